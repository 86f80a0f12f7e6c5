//! The bubble family `U = C |t + i|z|² + z·μ + λ|^{−n}` of
//! `−Δ_H u = 2n² u^{q*}`, its Euclidean analogue, and sampled estimates.

use num_complex::Complex64;
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{sub_laplacian, Atom, Expr, Tape};
use crate::hgroup::HPoint;

mod cutoff;
mod estimates;
mod euclid;
mod integrals;

pub use cutoff::{cutoff_eval, ramp, Cutoff, CutoffSpec};
pub use estimates::{
    decay_check, global_gradient_sup, gradient_estimate_check, lower_bound_check, GradProgram,
    RadiusSample,
};
pub use euclid::{euclidean_residual, EuclideanBubble};
pub use integrals::{
    divergence_integral, integral_mc, lemma_pipeline, BumpField, LemmaCheck, Region,
};

/// Homogeneous dimension `Q = 2n + 2`.
pub fn homogeneous_dim(n: usize) -> f64 {
    2.0 * n as f64 + 2.0
}

/// Critical exponent `q* = (Q+2)/(Q−2) = (n+2)/n`.
pub fn critical_exponent(n: usize) -> f64 {
    (n as f64 + 2.0) / n as f64
}

pub fn check_params(n: usize, lambda: Complex64, mu: &[Complex64]) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    if mu.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: mu.len(),
        });
    }
    let finite = |c: &Complex64| c.re.is_finite() && c.im.is_finite();
    if !finite(&lambda) || !mu.iter().all(finite) {
        return Err(Error::NonFinite);
    }
    let bound = mu.iter().map(|m| m.norm_sqr()).sum::<f64>() / 4.0;
    if !(lambda.im > bound) {
        return Err(Error::Inadmissible {
            im_lambda: lambda.im,
            bound,
        });
    }
    Ok(())
}

/// `t + i|z|² + z·μ + λ`.
fn denominator(n: usize, lambda: Complex64, mu: &[Complex64]) -> Expr {
    let mut terms = vec![
        Expr::t(),
        Expr::i() * Expr::radius2(n),
        Expr::from_c64(lambda),
    ];
    for (a, m) in mu.iter().enumerate() {
        if *m != Complex64::new(0.0, 0.0) {
            terms.push(Expr::from_c64(*m) * Expr::z(a));
        }
    }
    Expr::sum(terms)
}

/// `|t + i|z|² + z·μ + λ|^{−n}` without the amplitude.
pub fn unnormalized_bubble_expr(n: usize, lambda: Complex64, mu: &[Complex64]) -> Result<Expr> {
    check_params(n, lambda, mu)?;
    Ok(denominator(n, lambda, mu)
        .abs2()
        .pow_pos(Rational64::new(-(n as i64), 2)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bubble {
    pub n: usize,
    pub lambda: Complex64,
    pub mu: Vec<Complex64>,
    pub amplitude: f64,
}

impl Bubble {
    /// Bubble with the amplitude derived by [`bubble_amplitude`].
    pub fn new(n: usize, lambda: Complex64, mu: Vec<Complex64>) -> Result<Self> {
        let amplitude = bubble_amplitude(n, lambda, &mu)?;
        Ok(Bubble {
            n,
            lambda,
            mu,
            amplitude,
        })
    }

    pub fn with_amplitude(
        n: usize,
        lambda: Complex64,
        mu: Vec<Complex64>,
        amplitude: f64,
    ) -> Result<Self> {
        check_params(n, lambda, &mu)?;
        if !(amplitude > 0.0 && amplitude.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "amplitude must be positive, got {amplitude}"
            )));
        }
        Ok(Bubble {
            n,
            lambda,
            mu,
            amplitude,
        })
    }

    /// Direct evaluation of the closed form.
    pub fn eval(&self, p: &HPoint<f64>) -> Result<f64> {
        if p.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: p.dim(),
            });
        }
        let r2: f64 = p.z().iter().map(|z| z.norm_sqr()).sum();
        let zmu: Complex64 = p.z().iter().zip(&self.mu).map(|(z, m)| z * m).sum();
        let d = Complex64::new(*p.t(), r2) + zmu + self.lambda;
        Ok(self.amplitude * d.norm().powi(-(self.n as i32)))
    }
}

/// `C · ((t+i|z|²+z·μ+λ)·conj(..))^{−n/2}`, with the positivity certificate
/// that admissibility provides.
pub fn bubble_expr(b: &Bubble) -> Result<Expr> {
    let w = unnormalized_bubble_expr(b.n, b.lambda, &b.mu)?;
    Ok(Expr::from_f64(b.amplitude) * w)
}

/// `−Δ_H u` and `u` compiled together.
#[derive(Clone, Debug)]
pub struct ResidualProgram {
    n: usize,
    tape: Tape,
}

impl ResidualProgram {
    pub fn new(u: &Expr, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension(0));
        }
        let lap = sub_laplacian(u, n)?;
        Ok(ResidualProgram {
            n,
            tape: Tape::compile(&[u.clone(), lap]),
        })
    }

    /// `(u, Δ_H u)` at `p`.
    pub fn values(&self, p: &HPoint<f64>) -> Result<(f64, f64)> {
        if p.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: p.dim(),
            });
        }
        let v = self.tape.eval(p)?;
        Ok((v[0].re, v[1].re))
    }

    /// `|−Δu − 2n²u^{q*}| / (2n²u^{q*})`.
    pub fn residual(&self, p: &HPoint<f64>) -> Result<f64> {
        let (u, lap) = self.values(p)?;
        if !(u > 0.0) {
            return Err(Error::Domain(format!("u = {u} is not positive")));
        }
        let n = self.n as f64;
        let rhs = 2.0 * n * n * u.powf(critical_exponent(self.n));
        Ok((-lap - rhs).abs() / rhs)
    }
}

/// Relative residual of `−Δ_H u = 2n² u^{q*}` at `p`.
pub fn residual_critical(u: &Expr, n: usize, p: &HPoint<f64>) -> Result<f64> {
    ResidualProgram::new(u, n)?.residual(p)
}

/// Number of probe points used to derive the amplitude.
pub const AMPLITUDE_PROBES: usize = 20;
/// Allowed relative spread of the probe ratios.
pub const AMPLITUDE_SPREAD: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeDerivation {
    pub amplitude: f64,
    /// `K(ξ) = −Δw / (2n² w^{q*})` at each probe.
    pub ratios: Vec<f64>,
    /// `(max K − min K) / mean K`.
    pub spread: f64,
}

/// Derive the amplitude from the unnormalized bubble `w`: the ratio
/// `K = −Δw/(2n² w^{q*})` must be constant, and `C = K^{n/2}` since
/// `C^{q*−1} = K`.
pub fn derive_amplitude(
    n: usize,
    lambda: Complex64,
    mu: &[Complex64],
    probes: usize,
    seed: u64,
) -> Result<AmplitudeDerivation> {
    let w = unnormalized_bubble_expr(n, lambda, mu)?;
    let prog = ResidualProgram::new(&w, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nf = n as f64;
    let mut ratios = Vec::with_capacity(probes);
    for _ in 0..probes {
        let z = (0..n)
            .map(|_| Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)))
            .collect();
        let p = HPoint::new(z, rng.random_range(-2.0..2.0))?;
        let (wv, lap) = prog.values(&p)?;
        ratios.push(-lap / (2.0 * nf * nf * wv.powf(critical_exponent(n))));
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let max = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let spread = (max - min) / mean.abs();
    if !(spread <= AMPLITUDE_SPREAD) || !(mean > 0.0) {
        return Err(Error::NonConstantRatio { spread });
    }
    Ok(AmplitudeDerivation {
        amplitude: mean.powf(nf / 2.0),
        ratios,
        spread,
    })
}

/// The amplitude `C > 0` for which the bubble solves the equation, derived
/// by [`derive_amplitude`] over [`AMPLITUDE_PROBES`] fixed probes.
pub fn bubble_amplitude(n: usize, lambda: Complex64, mu: &[Complex64]) -> Result<f64> {
    Ok(derive_amplitude(n, lambda, mu, AMPLITUDE_PROBES, 0x5eed)?.amplitude)
}

/// `ξ ↦ s^n u(ζ ∘ δ_s ξ)`: left translation by `ζ` composed with the
/// dilation that preserves the equation.
pub fn transform_solution(b: &Bubble, zeta: &HPoint<f64>, s: f64) -> Result<Expr> {
    if zeta.dim() != b.n {
        return Err(Error::DimensionMismatch {
            expected: b.n,
            found: zeta.dim(),
        });
    }
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::NonPositiveScale(s));
    }
    let u = bubble_expr(b)?;
    transform_expr(&u, b.n, zeta, s)
}

/// `ξ ↦ s^n u(ζ ∘ δ_s ξ)` for any expression `u`.
pub fn transform_expr(u: &Expr, n: usize, zeta: &HPoint<f64>, s: f64) -> Result<Expr> {
    let se = Expr::from_f64(s);
    let s2 = Expr::from_f64(s * s);
    let zc: Vec<Expr> = zeta.z().iter().map(|c| Expr::from_c64(*c)).collect();
    // 2 Im(ζ·z̄) = −i (ζ·z̄ − conj(ζ)·z), evaluated at δ_s ξ.
    let cross = Expr::sum(
        (0..n)
            .map(|a| zc[a].clone() * Expr::zb(a) - zc[a].conj() * Expr::z(a))
            .collect(),
    );
    let t_new = Expr::from_f64(*zeta.t()) + s2.clone() * Expr::t() - Expr::i() * se.clone() * cross;
    let map = |a: Atom| -> Option<Expr> {
        Some(match a {
            Atom::Z(k) => zc[k].clone() + se.clone() * Expr::z(k),
            Atom::Zb(k) => zc[k].conj() + se.clone() * Expr::zb(k),
            Atom::T => t_new.clone(),
        })
    };
    Ok(Expr::from_f64(s.powi(n as i32)) * u.substitute(&map))
}

/// Deterministic admissible `(λ, μ)` pairs: `Re λ ∈ [−2, 2]`, `μ` with
/// components in the square of half-width 1.5 (zero for the first entry),
/// and `Im λ = |μ|²/4 + δ` with `δ ∈ [0.2, 3]`.
pub fn default_grid(n: usize, count: usize, seed: u64) -> Vec<(Complex64, Vec<Complex64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((n as u64) << 32));
    (0..count)
        .map(|k| {
            let mu: Vec<Complex64> = (0..n)
                .map(|_| {
                    if k == 0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        Complex64::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5))
                    }
                })
                .collect();
            let bound = mu.iter().map(|m| m.norm_sqr()).sum::<f64>() / 4.0;
            let lambda = if k == 0 {
                Complex64::new(0.0, 1.0)
            } else {
                Complex64::new(
                    rng.random_range(-2.0..2.0),
                    bound + rng.random_range(0.2..3.0),
                )
            };
            (lambda, mu)
        })
        .collect()
}

#[cfg(test)]
mod tests;
