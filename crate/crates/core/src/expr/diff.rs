//! Wirtinger derivatives and the left-invariant fields
//! `Z_α = ∂/∂z_α + i z̄_α ∂/∂t`, `Z_ᾱ = ∂/∂z̄_α − i z_α ∂/∂t`.
//!
//! Subscript order follows application order: `f_{αβ̄} = Z_β̄(Z_α f)`.

use std::collections::HashMap;

use num_rational::Rational64;
use num_traits::One;

use super::{simplify, Atom, Expr, Node};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DerivOp {
    /// `∂/∂z_α`
    Dz(usize),
    /// `∂/∂z̄_α`
    Dzb(usize),
    /// `∂/∂t`
    Dt,
    /// `Z_α`
    Z(usize),
    /// `Z_ᾱ`
    Zb(usize),
}

impl DerivOp {
    pub fn index(&self) -> Option<usize> {
        match *self {
            DerivOp::Dz(a) | DerivOp::Dzb(a) | DerivOp::Z(a) | DerivOp::Zb(a) => Some(a),
            DerivOp::Dt => None,
        }
    }

    pub fn check(&self, n: usize) -> Result<()> {
        match self.index() {
            Some(a) if a >= n => Err(Error::IndexOutOfRange { index: a, n }),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Partial {
    Z(usize),
    Zb(usize),
    T,
}

struct Differ {
    var: Partial,
    memo: HashMap<usize, Expr>,
}

impl Differ {
    fn run(&mut self, e: &Expr) -> Result<Expr> {
        if let Some(d) = self.memo.get(&e.ptr()) {
            return Ok(d.clone());
        }
        let d = match e.node() {
            Node::Const(_) => Expr::zero(),
            Node::Atom(a) => {
                let hit = matches!(
                    (a, self.var),
                    (Atom::Z(x), Partial::Z(y)) | (Atom::Zb(x), Partial::Zb(y)) if *x == y
                ) || (*a == Atom::T && self.var == Partial::T);
                if hit {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Add(ts) => {
                let mut out = Vec::with_capacity(ts.len());
                for t in ts {
                    out.push(self.run(t)?);
                }
                Expr::sum(out)
            }
            Node::Mul(fs) => {
                let mut terms = Vec::with_capacity(fs.len());
                for (i, fi) in fs.iter().enumerate() {
                    let di = self.run(fi)?;
                    if di.is_zero() {
                        continue;
                    }
                    let mut factors: Vec<Expr> = fs
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, f)| f.clone())
                        .collect();
                    factors.push(di);
                    terms.push(Expr::product(factors));
                }
                Expr::sum(terms)
            }
            Node::Pow {
                base,
                exp,
                certified,
            } => {
                if !exp.is_integer() && !*certified {
                    return Err(Error::Uncertified("a real power"));
                }
                let db = self.run(base)?;
                if db.is_zero() {
                    Expr::zero()
                } else {
                    let lowered = if exp.is_integer() {
                        base.pow_int(exp.to_integer() - 1)
                    } else {
                        base.pow_pos(*exp - Rational64::one())
                    };
                    Expr::product(vec![
                        Expr::rational(*exp.numer(), *exp.denom()),
                        lowered,
                        db,
                    ])
                }
            }
            Node::Exp(a) => {
                let da = self.run(a)?;
                e.clone() * da
            }
            Node::Log { arg, certified } => {
                if !*certified {
                    return Err(Error::Uncertified("a logarithm"));
                }
                let da = self.run(arg)?;
                da * arg.pow_int(-1)
            }
        };
        self.memo.insert(e.ptr(), d.clone());
        Ok(d)
    }
}

fn partial(e: &Expr, var: Partial) -> Result<Expr> {
    Differ {
        var,
        memo: HashMap::new(),
    }
    .run(e)
}

/// Exact symbolic derivative of `e` along `op`.
pub fn differentiate(e: &Expr, op: DerivOp) -> Result<Expr> {
    match op {
        DerivOp::Dz(a) => partial(e, Partial::Z(a)),
        DerivOp::Dzb(a) => partial(e, Partial::Zb(a)),
        DerivOp::Dt => partial(e, Partial::T),
        DerivOp::Z(a) => {
            let dz = partial(e, Partial::Z(a))?;
            let dt = partial(e, Partial::T)?;
            Ok(dz + Expr::product(vec![Expr::i(), Expr::zb(a), dt]))
        }
        DerivOp::Zb(a) => {
            let dzb = partial(e, Partial::Zb(a))?;
            let dt = partial(e, Partial::T)?;
            Ok(dzb - Expr::product(vec![Expr::i(), Expr::z(a), dt]))
        }
    }
}

fn apply(e: &Expr, ops: &[DerivOp]) -> Result<Expr> {
    let mut cur = e.clone();
    for op in ops {
        cur = differentiate(&cur, *op)?;
    }
    Ok(cur)
}

/// `Δ_H f = Σ_α (f_{αᾱ} + f_{ᾱα})`.
pub fn sub_laplacian(e: &Expr, n: usize) -> Result<Expr> {
    let mut terms = Vec::with_capacity(2 * n);
    for a in 0..n {
        let za = differentiate(e, DerivOp::Z(a))?;
        let zba = differentiate(e, DerivOp::Zb(a))?;
        terms.push(differentiate(&za, DerivOp::Zb(a))?);
        terms.push(differentiate(&zba, DerivOp::Z(a))?);
    }
    Ok(Expr::sum(terms))
}

/// `|∂f|^2 = Σ_α f_α f_ᾱ`. The full horizontal gradient satisfies
/// `|∇f|^2 = 2|∂f|^2`.
pub fn horizontal_energy(e: &Expr, n: usize) -> Result<Expr> {
    let mut terms = Vec::with_capacity(n);
    for a in 0..n {
        let fa = differentiate(e, DerivOp::Z(a))?;
        let fab = differentiate(e, DerivOp::Zb(a))?;
        terms.push(fa * fab);
    }
    Ok(Expr::sum(terms))
}

/// Names of the five commutation relations, in the order returned by
/// [`check_commutation`].
pub const COMMUTATION_RULES: [&str; 5] = [
    "f_ab - f_ba = 0",
    "f_ab' - f_b'a = 2i δ_ab f_0",
    "f_0a - f_a0 = 0",
    "f_ab0 - f_a0b = 0",
    "f_abc' - f_ac'b = 2i δ_bc f_a0",
];

/// Both sides of the five commutation rules for indices `(α, β, γ)`,
/// unsimplified, in the order of [`COMMUTATION_RULES`].
pub fn commutation_sides(
    e: &Expr,
    alpha: usize,
    beta: usize,
    gamma: usize,
) -> Result<[(Expr, Expr); 5]> {
    use DerivOp::{Dt, Zb, Z};
    let (a, b, c) = (alpha, beta, gamma);
    let two_i = Expr::int(2) * Expr::i();
    let f0 = apply(e, &[Dt])?;
    let fa0 = apply(e, &[Z(a), Dt])?;
    let delta = |cond: bool, x: Expr| {
        if cond {
            two_i.clone() * x
        } else {
            Expr::zero()
        }
    };

    Ok([
        (apply(e, &[Z(a), Z(b)])?, apply(e, &[Z(b), Z(a)])?),
        (
            apply(e, &[Z(a), Zb(b)])? - apply(e, &[Zb(b), Z(a)])?,
            delta(a == b, f0),
        ),
        (apply(e, &[Dt, Z(a)])?, fa0.clone()),
        (apply(e, &[Z(a), Z(b), Dt])?, apply(e, &[Z(a), Dt, Z(b)])?),
        (
            apply(e, &[Z(a), Z(b), Zb(c)])? - apply(e, &[Z(a), Zb(c), Z(b)])?,
            delta(b == c, fa0),
        ),
    ])
}

/// Residuals of the five commutation rules for indices `(α, β, γ)`, each
/// simplified. For polynomial input every residual is exactly zero.
pub fn check_commutation(e: &Expr, alpha: usize, beta: usize, gamma: usize) -> Result<[Expr; 5]> {
    let sides = commutation_sides(e, alpha, beta, gamma)?;
    Ok(sides.map(|(l, r)| simplify(&(l - r))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_of_t_is_i_zbar() {
        let d = simplify(&differentiate(&Expr::t(), DerivOp::Z(0)).unwrap());
        assert_eq!(d, simplify(&(Expr::i() * Expr::zb(0))));
    }

    #[test]
    fn basic_derivatives() {
        assert!(differentiate(&Expr::z(0), DerivOp::Z(0)).unwrap().is_one());
        let r = Expr::z(0) * Expr::zb(0);
        assert_eq!(
            simplify(&differentiate(&r, DerivOp::Zb(0)).unwrap()),
            Expr::z(0)
        );
        assert!(differentiate(&Expr::int(7), DerivOp::Zb(0))
            .unwrap()
            .is_zero());
    }

    #[test]
    fn sub_laplacian_examples() {
        let r = Expr::z(0) * Expr::zb(0);
        assert_eq!(simplify(&sub_laplacian(&r, 1).unwrap()), Expr::int(2));
        assert!(simplify(&sub_laplacian(&Expr::t(), 1).unwrap()).is_zero());
        assert!(simplify(&sub_laplacian(&Expr::int(3), 2).unwrap()).is_zero());
    }

    #[test]
    fn horizontal_energy_examples() {
        let r = Expr::z(0) * Expr::zb(0);
        assert_eq!(simplify(&horizontal_energy(&r, 1).unwrap()), simplify(&r));
        assert_eq!(
            simplify(&horizontal_energy(&Expr::t(), 1).unwrap()),
            simplify(&r)
        );
        assert!(horizontal_energy(&Expr::i(), 1).unwrap().is_zero());
    }

    #[test]
    fn commutation_on_t() {
        let res = check_commutation(&Expr::t(), 0, 0, 0).unwrap();
        for r in res {
            assert!(r.is_zero(), "{r}");
        }
    }

    #[test]
    fn uncertified_power_is_refused() {
        let e = (Expr::t() + Expr::int(2)).pow_unchecked(Rational64::new(1, 3));
        assert!(matches!(
            differentiate(&e, DerivOp::Dt),
            Err(Error::Uncertified(_))
        ));
        let l = Expr::t().log_unchecked();
        assert!(differentiate(&l, DerivOp::Z(0)).is_err());
    }

    #[test]
    fn index_check() {
        assert!(DerivOp::Z(2).check(2).is_err());
        assert!(DerivOp::Zb(1).check(2).is_ok());
        assert!(DerivOp::Dt.check(1).is_ok());
    }
}
