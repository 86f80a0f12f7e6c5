//! Radial cutoff `η = ρ(|ξ|/R)` with a quintic transition on `[1/2, 1]`.

use num_complex::Complex64;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::hgroup::HPoint;
use crate::jets::{Jet, JetProgram, Letter};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    /// Outer radius; `η = 1` on `B_{R/2}` and `η = 0` outside `B_R`.
    pub r: f64,
}

/// Profile `ρ(s)` and `ρ'(s)`: `1` for `s ≤ 1/2`, `0` for `s ≥ 1`, and
/// `1 − (10x³ − 15x⁴ + 6x⁵)` with `x = 2s − 1` in between (C² joins).
pub fn ramp(s: f64) -> (f64, f64) {
    if s <= 0.5 {
        return (1.0, 0.0);
    }
    if s >= 1.0 {
        return (0.0, 0.0);
    }
    let x = 2.0 * s - 1.0;
    let x2 = x * x;
    let v = 1.0 - x2 * x * (10.0 - 15.0 * x + 6.0 * x2);
    let d = -2.0 * 30.0 * x2 * (1.0 - x) * (1.0 - x);
    (v, d)
}

/// Cutoff for a fixed dimension; the gauge norm `(|z|⁴ + t²)^{1/4}` is
/// differentiated symbolically once.
#[derive(Clone, Debug)]
pub struct Cutoff {
    pub spec: CutoffSpec,
    n: usize,
    norm: JetProgram,
}

impl Cutoff {
    pub fn new(n: usize, spec: CutoffSpec) -> Result<Self> {
        if !(spec.r > 0.0 && spec.r.is_finite()) {
            return Err(Error::NonPositiveScale(spec.r));
        }
        let r2 = Expr::radius2(n);
        let norm = (r2.clone() * r2 + Expr::t() * Expr::t()).pow_pos(Rational64::new(1, 4));
        Ok(Cutoff {
            spec,
            n,
            norm: JetProgram::new(&norm, n, 1)?,
        })
    }

    /// Order-1 jet of `η` at `p`.
    pub fn jet(&self, p: &HPoint<f64>) -> Result<Jet<Complex64>> {
        if p.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: p.dim(),
            });
        }
        let r = self.spec.r;
        let rho = p.norm();
        if rho <= r / 2.0 || rho >= r {
            let (v, _) = ramp(rho / r);
            return Ok(Jet::constant(self.n, 1, Complex64::new(v, 0.0)));
        }
        let nj = self.norm.eval(p)?.jet;
        let (v, d) = ramp(rho / r);
        Ok(nj.compose(&[Complex64::new(v, 0.0), Complex64::new(d / r, 0.0)]))
    }

    /// `(η, |∂η|)` with `|∂η|² = Σ_α |Z_α η|²`.
    pub fn eval(&self, p: &HPoint<f64>) -> Result<(f64, f64)> {
        let j = self.jet(p)?;
        let g2: f64 = (0..self.n).map(|a| j.get(&[Letter::Z(a)]).norm_sqr()).sum();
        Ok((j.value().re, g2.sqrt()))
    }
}

/// `(η, |∂η|)` at `p`.
pub fn cutoff_eval(spec: CutoffSpec, p: &HPoint<f64>) -> Result<(f64, f64)> {
    Cutoff::new(p.dim(), spec)?.eval(p)
}
