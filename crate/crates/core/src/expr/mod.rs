//! Symbolic expressions over the Heisenberg coordinates `z_α`, `z̄_α`, `t`.
//!
//! Expressions are immutable, reference-counted DAGs. Conjugation is pushed
//! down to the atoms at construction time, so there is no conjugation node:
//! `conj(z_α) = z̄_α`, `conj(t) = t`, and `conj` distributes over every other
//! node. Real powers and logarithms carry a positivity certificate, an
//! assertion that the operand is real and positive wherever the expression is
//! evaluated; evaluation verifies the assertion and differentiation refuses
//! to go through uncertified real powers.

mod diff;
mod eval;
mod parse;
mod simplify;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::hgroup::{ExactComplex, Rational};

pub use diff::{
    check_commutation, commutation_sides, differentiate, horizontal_energy, sub_laplacian, DerivOp,
    COMMUTATION_RULES,
};
pub use eval::{Tape, Value};
pub use parse::{parse, parse_corpus};
pub use simplify::simplify;

/// Coordinate atom, indices are 0-based (`Z(0)` prints as `z1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Z(usize),
    Zb(usize),
    T,
}

impl Atom {
    pub fn conj(self) -> Atom {
        match self {
            Atom::Z(a) => Atom::Zb(a),
            Atom::Zb(a) => Atom::Z(a),
            Atom::T => Atom::T,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constant {
    exact: ExactComplex,
    approx: Complex64,
}

impl Constant {
    fn new(exact: ExactComplex) -> Self {
        let approx = Complex64::new(
            exact.re.to_f64().unwrap_or(f64::NAN),
            exact.im.to_f64().unwrap_or(f64::NAN),
        );
        Self { exact, approx }
    }

    pub fn exact(&self) -> &ExactComplex {
        &self.exact
    }

    pub fn approx(&self) -> Complex64 {
        self.approx
    }

    fn is_zero(&self) -> bool {
        self.exact.re.is_zero() && self.exact.im.is_zero()
    }

    fn is_one(&self) -> bool {
        self.exact.re.is_one() && self.exact.im.is_zero()
    }

    /// The constant as a rational real number, if it is one.
    pub fn as_real(&self) -> Option<&Rational> {
        self.exact.im.is_zero().then_some(&self.exact.re)
    }
}

#[derive(Debug, PartialEq)]
pub enum Node {
    Const(Constant),
    Atom(Atom),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow {
        base: Expr,
        exp: Rational64,
        certified: bool,
    },
    Exp(Expr),
    Log {
        arg: Expr,
        certified: bool,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr(Arc<Node>);

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn exact_pow(base: &ExactComplex, k: i64) -> Option<ExactComplex> {
    let zero = ExactComplex::new(Rational::zero(), Rational::zero());
    if k < 0 && *base == zero {
        return None;
    }
    let mut acc = ExactComplex::new(Rational::one(), Rational::zero());
    for _ in 0..k.unsigned_abs() {
        acc *= base.clone();
    }
    if k < 0 {
        let d = acc.norm_sqr();
        acc = ExactComplex::new(acc.re / d.clone(), -acc.im / d);
    }
    Some(acc)
}

impl Expr {
    fn wrap(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub(crate) fn ptr(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn constant(c: ExactComplex) -> Self {
        Self::wrap(Node::Const(Constant::new(c)))
    }

    pub fn int(k: i64) -> Self {
        Self::constant(ExactComplex::new(rat(k, 1), Rational::zero()))
    }

    pub fn rational(num: i64, den: i64) -> Self {
        Self::constant(ExactComplex::new(rat(num, den), Rational::zero()))
    }

    pub fn real(r: Rational) -> Self {
        Self::constant(ExactComplex::new(r, Rational::zero()))
    }

    /// Exact constant equal to the given double (doubles are dyadic rationals).
    pub fn from_f64(x: f64) -> Self {
        Self::from_c64(Complex64::new(x, 0.0))
    }

    pub fn from_c64(c: Complex64) -> Self {
        let q = |x: f64| Rational::from_float(x).expect("finite constant");
        Self::constant(ExactComplex::new(q(c.re), q(c.im)))
    }

    pub fn zero() -> Self {
        Self::int(0)
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    pub fn i() -> Self {
        Self::constant(ExactComplex::new(Rational::zero(), Rational::one()))
    }

    pub fn atom(a: Atom) -> Self {
        Self::wrap(Node::Atom(a))
    }

    /// `z_{α+1}` for 0-based `alpha`.
    pub fn z(alpha: usize) -> Self {
        Self::atom(Atom::Z(alpha))
    }

    pub fn zb(alpha: usize) -> Self {
        Self::atom(Atom::Zb(alpha))
    }

    pub fn t() -> Self {
        Self::atom(Atom::T)
    }

    /// `Σ_α z_α z̄_α`.
    pub fn radius2(n: usize) -> Self {
        Self::sum((0..n).map(|a| Self::z(a) * Self::zb(a)).collect())
    }

    pub fn as_constant(&self) -> Option<&Constant> {
        match self.node() {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_constant().is_some_and(Constant::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(Constant::is_one)
    }

    pub fn sum(terms: Vec<Expr>) -> Self {
        let mut flat = Vec::with_capacity(terms.len());
        let mut acc = ExactComplex::new(Rational::zero(), Rational::zero());
        let mut saw_const = false;
        for term in terms {
            match term.node() {
                Node::Const(c) => {
                    acc += c.exact.clone();
                    saw_const = true;
                }
                Node::Add(inner) => {
                    for t in inner {
                        match t.node() {
                            Node::Const(c) => {
                                acc += c.exact.clone();
                                saw_const = true;
                            }
                            _ => flat.push(t.clone()),
                        }
                    }
                }
                _ => flat.push(term),
            }
        }
        let acc_zero = acc.re.is_zero() && acc.im.is_zero();
        if saw_const && !acc_zero {
            flat.push(Self::constant(acc));
        }
        match flat.len() {
            0 => Self::zero(),
            1 => flat.pop().unwrap(),
            _ => Self::wrap(Node::Add(flat)),
        }
    }

    pub fn product(factors: Vec<Expr>) -> Self {
        let mut flat = Vec::with_capacity(factors.len());
        let mut acc = ExactComplex::new(Rational::one(), Rational::zero());
        let push = |f: &Expr, flat: &mut Vec<Expr>, acc: &mut ExactComplex| match f.node() {
            Node::Const(c) => *acc = acc.clone() * c.exact.clone(),
            _ => flat.push(f.clone()),
        };
        for f in &factors {
            match f.node() {
                Node::Mul(inner) => inner.iter().for_each(|g| push(g, &mut flat, &mut acc)),
                _ => push(f, &mut flat, &mut acc),
            }
        }
        if acc.re.is_zero() && acc.im.is_zero() {
            return Self::zero();
        }
        let acc_one = acc.re.is_one() && acc.im.is_zero();
        if !acc_one {
            flat.insert(0, Self::constant(acc));
        }
        match flat.len() {
            0 => Self::one(),
            1 => flat.pop().unwrap(),
            _ => Self::wrap(Node::Mul(flat)),
        }
    }

    /// Integer power, valid for any base.
    pub fn pow_int(&self, k: i64) -> Self {
        if k == 0 {
            return Self::one();
        }
        if k == 1 {
            return self.clone();
        }
        match self.node() {
            Node::Const(c) => {
                if let Some(v) = exact_pow(&c.exact, k) {
                    return Self::constant(v);
                }
            }
            Node::Pow {
                base,
                exp,
                certified,
            }
                if (exp.is_integer() || *certified) => {
                    return Self::make_pow(base.clone(), *exp * Rational64::from(k), *certified);
                }
            _ => {}
        }
        Self::wrap(Node::Pow {
            base: self.clone(),
            exp: Rational64::from(k),
            certified: false,
        })
    }

    fn make_pow(base: Expr, exp: Rational64, certified: bool) -> Self {
        if exp.is_integer() {
            let k = exp.to_integer();
            if k == 0 {
                return Self::one();
            }
            if k == 1 {
                return base;
            }
            if let Node::Const(c) = base.node() {
                if let Some(v) = exact_pow(&c.exact, k) {
                    return Self::constant(v);
                }
            }
        }
        Self::wrap(Node::Pow {
            base,
            exp,
            certified: certified && !exp.is_integer(),
        })
    }

    /// Real power of an operand asserted to be real and positive.
    pub fn pow_pos(&self, p: Rational64) -> Self {
        if p.is_integer() {
            return self.pow_int(p.to_integer());
        }
        if let Node::Pow {
            base,
            exp,
            certified: true,
        } = self.node()
        {
            return Self::make_pow(base.clone(), *exp * p, true);
        }
        Self::make_pow(self.clone(), p, true)
    }

    /// Real power without a positivity certificate; evaluation uses the
    /// principal branch and differentiation is refused.
    pub fn pow_unchecked(&self, p: Rational64) -> Self {
        if p.is_integer() {
            return self.pow_int(p.to_integer());
        }
        Self::make_pow(self.clone(), p, false)
    }

    pub fn exp(&self) -> Self {
        if self.is_zero() {
            return Self::one();
        }
        Self::wrap(Node::Exp(self.clone()))
    }

    /// Logarithm of an operand asserted to be real and positive.
    pub fn log_pos(&self) -> Self {
        if self.is_one() {
            return Self::zero();
        }
        Self::wrap(Node::Log {
            arg: self.clone(),
            certified: true,
        })
    }

    pub fn log_unchecked(&self) -> Self {
        Self::wrap(Node::Log {
            arg: self.clone(),
            certified: false,
        })
    }

    pub fn conj(&self) -> Self {
        match self.node() {
            Node::Const(c) => Self::constant(c.exact.conj()),
            Node::Atom(a) => Self::atom(a.conj()),
            Node::Add(ts) => Self::sum(ts.iter().map(Expr::conj).collect()),
            Node::Mul(fs) => Self::product(fs.iter().map(Expr::conj).collect()),
            Node::Pow {
                base,
                exp,
                certified,
            } => Self::make_pow(base.conj(), *exp, *certified),
            Node::Exp(a) => a.conj().exp(),
            Node::Log { arg, certified } => Self::wrap(Node::Log {
                arg: arg.conj(),
                certified: *certified,
            }),
        }
    }

    pub fn re(&self) -> Self {
        Self::rational(1, 2) * (self.clone() + self.conj())
    }

    pub fn im(&self) -> Self {
        Self::constant(ExactComplex::new(Rational::zero(), rat(-1, 2)))
            * (self.clone() - self.conj())
    }

    /// `e · conj(e)`.
    pub fn abs2(&self) -> Self {
        self.clone() * self.conj()
    }

    /// `|e| = (e·conj e)^{1/2}` with a positivity certificate.
    pub fn modulus(&self) -> Self {
        self.abs2().pow_pos(Rational64::new(1, 2))
    }

    /// Replace atoms according to `map` (atoms mapped to `None` are kept).
    pub fn substitute(&self, map: &dyn Fn(Atom) -> Option<Expr>) -> Self {
        let mut memo = std::collections::HashMap::new();
        self.subst_rec(map, &mut memo)
    }

    fn subst_rec(
        &self,
        map: &dyn Fn(Atom) -> Option<Expr>,
        memo: &mut std::collections::HashMap<usize, Expr>,
    ) -> Self {
        if let Some(e) = memo.get(&self.ptr()) {
            return e.clone();
        }
        let out = match self.node() {
            Node::Const(_) => self.clone(),
            Node::Atom(a) => map(*a).unwrap_or_else(|| self.clone()),
            Node::Add(ts) => Self::sum(ts.iter().map(|t| t.subst_rec(map, memo)).collect()),
            Node::Mul(fs) => Self::product(fs.iter().map(|f| f.subst_rec(map, memo)).collect()),
            Node::Pow {
                base,
                exp,
                certified,
            } => Self::make_pow(base.subst_rec(map, memo), *exp, *certified),
            Node::Exp(a) => a.subst_rec(map, memo).exp(),
            Node::Log { arg, certified } => Self::wrap(Node::Log {
                arg: arg.subst_rec(map, memo),
                certified: *certified,
            }),
        };
        memo.insert(self.ptr(), out.clone());
        out
    }

    /// Largest coordinate index used, if any.
    pub fn max_index(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(e) = stack.pop() {
            if !seen.insert(e.ptr()) {
                continue;
            }
            match e.node() {
                Node::Const(_) | Node::Atom(Atom::T) => {}
                Node::Atom(Atom::Z(a)) | Node::Atom(Atom::Zb(a)) => {
                    best = Some(best.map_or(*a, |b| b.max(*a)));
                }
                Node::Add(xs) | Node::Mul(xs) => stack.extend(xs.iter().cloned()),
                Node::Pow { base, .. } => stack.push(base.clone()),
                Node::Exp(a) => stack.push(a.clone()),
                Node::Log { arg, .. } => stack.push(arg.clone()),
            }
        }
        best
    }

    /// Number of distinct DAG nodes.
    pub fn node_count(&self) -> usize {
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(e) = stack.pop() {
            if !seen.insert(e.ptr()) {
                continue;
            }
            match e.node() {
                Node::Const(_) | Node::Atom(_) => {}
                Node::Add(xs) | Node::Mul(xs) => stack.extend(xs.iter().cloned()),
                Node::Pow { base, .. } => stack.push(base.clone()),
                Node::Exp(a) => stack.push(a.clone()),
                Node::Log { arg, .. } => stack.push(arg.clone()),
            }
        }
        seen.len()
    }

    /// Whether the expression is a polynomial in the atoms.
    pub fn is_polynomial(&self) -> bool {
        match self.node() {
            Node::Const(_) | Node::Atom(_) => true,
            Node::Add(xs) | Node::Mul(xs) => xs.iter().all(Expr::is_polynomial),
            Node::Pow { base, exp, .. } => {
                exp.is_integer() && !exp.is_negative() && base.is_polynomial()
            }
            Node::Exp(_) | Node::Log { .. } => false,
        }
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::sum(vec![self, rhs])
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sum(vec![self, -rhs])
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::product(vec![self, rhs])
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::product(vec![Expr::int(-1), self])
    }
}

fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.to_integer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let re = &self.exact.re;
        let im = &self.exact.im;
        if im.is_zero() {
            if re.is_negative() {
                write!(f, "({})", fmt_rational(re))
            } else {
                write!(f, "{}", fmt_rational(re))
            }
        } else {
            let sign = if im.is_negative() { "-" } else { "+" };
            write!(
                f,
                "({}{}{}*i)",
                fmt_rational(re),
                sign,
                fmt_rational(&im.abs())
            )
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Z(a) => write!(f, "z{}", a + 1),
            Atom::Zb(a) => write!(f, "zb{}", a + 1),
            Atom::T => write!(f, "t"),
        }
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, name: &str, xs: &[Expr]) -> fmt::Result {
    write!(f, "{name}(")?;
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{x}")?;
    }
    write!(f, ")")
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) => write!(f, "{c}"),
            Node::Atom(a) => write!(f, "{a}"),
            Node::Add(xs) => write_list(f, "add", xs),
            Node::Mul(xs) => write_list(f, "mul", xs),
            Node::Pow { base, exp, .. } => {
                if exp.is_integer() {
                    write!(f, "pow({base},{})", exp.to_integer())
                } else {
                    write!(f, "pow({base},{}/{})", exp.numer(), exp.denom())
                }
            }
            Node::Exp(a) => write!(f, "exp({a})"),
            Node::Log { arg, .. } => write!(f, "log({arg})"),
        }
    }
}
