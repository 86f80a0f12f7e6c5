//! Canonical form.
//!
//! An expression is expanded into a sum of monomials with exact complex
//! coefficients. A monomial is a sorted product of generators raised to
//! rational exponents. Generators are the coordinate atoms plus opaque
//! subexpressions: bases of negative or real powers (keyed by the canonical
//! text of the base, so that `x^a x^b = x^{a+b}` merges), `exp(..)` and
//! `log(..)`. Polynomials therefore reach a unique normal form and exact
//! zero is decided exactly; for other inputs the form is canonical up to
//! identities between generators.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_rational::Rational64;
use num_traits::{One, Zero};

use super::{exact_pow, Atom, Expr, Node};
use crate::hgroup::{ExactComplex, Rational};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Gen {
    Atom(Atom),
    Key(Arc<str>),
}

#[derive(Clone)]
enum GenInfo {
    /// `base^p`; `certified` allows non-integer `p`.
    Base { base: Expr, certified: bool },
    /// An opaque factor raised to integer powers only.
    Other(Expr),
}

type Monomial = Vec<(Gen, Rational64)>;
type Poly = BTreeMap<Monomial, ExactComplex>;

fn is_czero(c: &ExactComplex) -> bool {
    c.re.is_zero() && c.im.is_zero()
}

fn constant_poly(c: ExactComplex) -> Poly {
    let mut p = Poly::new();
    if !is_czero(&c) {
        p.insert(Vec::new(), c);
    }
    p
}

fn gen_poly(g: Gen, e: Rational64) -> Poly {
    let mut p = Poly::new();
    p.insert(
        vec![(g, e)],
        ExactComplex::new(Rational::one(), Rational::zero()),
    );
    p
}

fn mul_monomials(a: &Monomial, b: &Monomial) -> Monomial {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i].clone());
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            out.push(b[j].clone());
            j += 1;
        } else {
            let e = a[i].1 + b[j].1;
            if !e.is_zero() {
                out.push((a[i].0.clone(), e));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

fn add_into(acc: &mut Poly, m: Monomial, c: ExactComplex) {
    use std::collections::btree_map::Entry;
    match acc.entry(m) {
        Entry::Vacant(v) => {
            if !is_czero(&c) {
                v.insert(c);
            }
        }
        Entry::Occupied(mut o) => {
            let s = o.get().clone() + c;
            if is_czero(&s) {
                o.remove();
            } else {
                *o.get_mut() = s;
            }
        }
    }
}

fn poly_add(mut a: Poly, b: &Poly) -> Poly {
    for (m, c) in b {
        add_into(&mut a, m.clone(), c.clone());
    }
    a
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            add_into(&mut out, mul_monomials(ma, mb), ca.clone() * cb.clone());
        }
    }
    out
}

struct Canon {
    info: HashMap<Arc<str>, GenInfo>,
    memo: HashMap<usize, Poly>,
}

impl Canon {
    fn key(&mut self, text: String, info: GenInfo) -> Gen {
        let k: Arc<str> = Arc::from(text);
        match self.info.get_mut(&k) {
            Some(GenInfo::Base { certified, .. }) => {
                if let GenInfo::Base { certified: c, .. } = info {
                    *certified |= c;
                }
            }
            Some(GenInfo::Other(_)) => {}
            None => {
                self.info.insert(k.clone(), info);
            }
        }
        Gen::Key(k)
    }

    fn canonical(&mut self, e: &Expr) -> Expr {
        let p = self.poly_of(e);
        self.expr_of_poly(&p)
    }

    fn poly_of(&mut self, e: &Expr) -> Poly {
        if let Some(p) = self.memo.get(&e.ptr()) {
            return p.clone();
        }
        let p = match e.node() {
            Node::Const(c) => constant_poly(c.exact().clone()),
            Node::Atom(a) => gen_poly(Gen::Atom(*a), Rational64::one()),
            Node::Add(xs) => {
                let mut acc = Poly::new();
                for x in xs {
                    let px = self.poly_of(x);
                    acc = poly_add(acc, &px);
                }
                acc
            }
            Node::Mul(xs) => {
                let mut acc = constant_poly(ExactComplex::new(Rational::one(), Rational::zero()));
                for x in xs {
                    let px = self.poly_of(x);
                    acc = poly_mul(&acc, &px);
                }
                acc
            }
            Node::Pow {
                base,
                exp,
                certified,
            } => self.pow_poly(base, *exp, *certified),
            Node::Exp(a) => {
                let inner = self.canonical(a);
                if inner.is_zero() {
                    constant_poly(ExactComplex::new(Rational::one(), Rational::zero()))
                } else {
                    let g = inner.exp();
                    let k = self.key(format!("x:{inner}"), GenInfo::Other(g));
                    gen_poly(k, Rational64::one())
                }
            }
            Node::Log { arg, certified } => {
                let inner = self.canonical(arg);
                if inner.is_one() {
                    Poly::new()
                } else {
                    let (tag, g) = if *certified {
                        ("l1", inner.log_pos())
                    } else {
                        ("l0", inner.log_unchecked())
                    };
                    let k = self.key(format!("{tag}:{inner}"), GenInfo::Other(g));
                    gen_poly(k, Rational64::one())
                }
            }
        };
        self.memo.insert(e.ptr(), p.clone());
        p
    }

    fn pow_poly(&mut self, base: &Expr, exp: Rational64, certified: bool) -> Poly {
        let pb = self.poly_of(base);
        if exp.is_integer() {
            let k = exp.to_integer();
            if k >= 0 {
                let mut acc = constant_poly(ExactComplex::new(Rational::one(), Rational::zero()));
                for _ in 0..k {
                    acc = poly_mul(&acc, &pb);
                }
                return acc;
            }
            if pb.len() == 1 {
                let (m, c) = pb.iter().next().unwrap();
                if let Some(ck) = exact_pow(c, k) {
                    let m: Monomial = m
                        .iter()
                        .map(|(g, e)| (g.clone(), *e * Rational64::from(k)))
                        .collect();
                    let mut out = Poly::new();
                    out.insert(m, ck);
                    return out;
                }
            }
        }
        let canon = self.expr_of_poly(&pb);
        if exp.is_integer() || certified {
            let k = self.key(
                format!("b:{canon}"),
                GenInfo::Base {
                    base: canon,
                    certified,
                },
            );
            gen_poly(k, exp)
        } else {
            let g = canon.pow_unchecked(exp);
            let k = self.key(format!("u:{g}"), GenInfo::Other(g));
            gen_poly(k, Rational64::one())
        }
    }

    fn gen_expr(&self, g: &Gen, e: Rational64) -> Expr {
        match g {
            Gen::Atom(a) => Expr::atom(*a).pow_int(e.to_integer()),
            Gen::Key(k) => match &self.info[k] {
                GenInfo::Base { base, certified } => {
                    if e.is_integer() {
                        base.pow_int(e.to_integer())
                    } else if *certified {
                        base.pow_pos(e)
                    } else {
                        base.pow_unchecked(e)
                    }
                }
                GenInfo::Other(x) => x.pow_int(e.to_integer()),
            },
        }
    }

    fn expr_of_poly(&self, p: &Poly) -> Expr {
        let terms = p
            .iter()
            .map(|(m, c)| {
                let mut fs = Vec::with_capacity(m.len() + 1);
                fs.push(Expr::constant(c.clone()));
                fs.extend(m.iter().map(|(g, e)| self.gen_expr(g, *e)));
                Expr::product(fs)
            })
            .collect();
        Expr::sum(terms)
    }
}

/// Canonical form of `e`; evaluates to the same values wherever `e` is
/// defined.
pub fn simplify(e: &Expr) -> Expr {
    let mut c = Canon {
        info: HashMap::new(),
        memo: HashMap::new(),
    };
    c.canonical(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_reach_normal_form() {
        let a = (Expr::z(0) + Expr::t()).pow_int(2);
        let b =
            Expr::t() * Expr::t() + Expr::int(2) * Expr::t() * Expr::z(0) + Expr::z(0) * Expr::z(0);
        assert_eq!(simplify(&a), simplify(&b));
        assert!(simplify(&(a - b)).is_zero());
    }

    #[test]
    fn conjugation_round_trip() {
        let e = Expr::i() * Expr::z(0) + Expr::t().exp();
        assert_eq!(simplify(&e.conj().conj()), simplify(&e));
    }

    #[test]
    fn powers_of_a_base_merge() {
        let base = Expr::radius2(1) + Expr::one();
        let e = base.pow_pos(Rational64::new(1, 2))
            * base.pow_int(-1)
            * base.pow_pos(Rational64::new(1, 2));
        assert!(simplify(&e).is_one());
        let m = Expr::z(0).pow_int(-2) * Expr::z(0).pow_int(3);
        assert_eq!(simplify(&m), Expr::z(0));
    }

    #[test]
    fn exponentials_cancel() {
        let e = Expr::t().exp() * Expr::z(0) - Expr::z(0) * Expr::t().exp();
        assert!(simplify(&e).is_zero());
    }
}
