//! Sampled growth, decay and gradient bounds over gauge spheres and annuli.

use serde::{Deserialize, Serialize};

use super::{homogeneous_dim, ResidualProgram};
use crate::error::{Error, Result};
use crate::expr::{differentiate, DerivOp, Expr, Tape};
use crate::hgroup::{sample_box, sample_unit_sphere, HPoint};
use crate::mc;

/// A sampled extremum at one radius, with the number of samples it is
/// taken over; suprema are lower bounds of the true supremum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusSample {
    pub r: f64,
    pub value: f64,
    pub samples: usize,
}

type Evaluator<'a> = dyn Fn(&HPoint<f64>) -> Result<f64> + Sync + 'a;

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidArgument("radii must be positive".into()));
    }
    Ok(())
}

/// `sup_{|ξ|=R} u(ξ)(1 + R^{(Q−2)/2})` per radius.
pub fn decay_check(
    u: &Evaluator<'_>,
    n: usize,
    radii: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Vec<RadiusSample>> {
    check_radii(radii)?;
    let k = (homogeneous_dim(n) - 2.0) / 2.0;
    radii
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let w = 1.0 + r.powf(k);
            let (value, used) = mc::sup(mc::derive_seed(seed, i as u64), samples, |rng| {
                let p = sample_unit_sphere(rng, n).dilate(r)?;
                Ok(Some(u(&p)? * w))
            })?;
            Ok(RadiusSample {
                r,
                value,
                samples: used,
            })
        })
        .collect()
}

/// `inf_{|ξ|=R} u(ξ) R^{Q−2}` per radius. Every sample must also satisfy
/// `Δ_H u ≤ 0`.
pub fn lower_bound_check(
    u: &Expr,
    n: usize,
    radii: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Vec<RadiusSample>> {
    check_radii(radii)?;
    let prog = ResidualProgram::new(u, n)?;
    let k = homogeneous_dim(n) - 2.0;
    radii
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let w = r.powf(k);
            let (value, used) = mc::inf(mc::derive_seed(seed, i as u64), samples, |rng| {
                let p = sample_unit_sphere(rng, n).dilate(r)?;
                let (uv, lap) = prog.values(&p)?;
                if lap > 0.0 {
                    return Err(Error::NotSuperharmonic { value: lap });
                }
                Ok(Some(uv * w))
            })?;
            Ok(RadiusSample {
                r,
                value,
                samples: used,
            })
        })
        .collect()
}

/// `u` and `Z_α u` compiled together.
#[derive(Clone, Debug)]
pub struct GradProgram {
    n: usize,
    tape: Tape,
}

impl GradProgram {
    pub fn new(u: &Expr, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension(0));
        }
        let mut outs = vec![u.clone()];
        for a in 0..n {
            outs.push(differentiate(u, DerivOp::Z(a))?);
        }
        Ok(GradProgram {
            n,
            tape: Tape::compile(&outs),
        })
    }

    /// `|∂u| / u` with `|∂u|² = Σ_α |Z_α u|²`.
    pub fn log_gradient(&self, p: &HPoint<f64>) -> Result<f64> {
        if p.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: p.dim(),
            });
        }
        let v = self.tape.eval(p)?;
        let u = v[0].re;
        if !(u > 0.0) {
            return Err(Error::Domain(format!("u = {u} is not positive")));
        }
        let g2: f64 = v[1..].iter().map(|c| c.norm_sqr()).sum();
        Ok(g2.sqrt() / u)
    }
}

/// `R · sup_{R ≤ |ξ| < 2R} |∂u|/u` per radius. The annulus is sampled by
/// rejection from the box of half-width `2R`; `samples` counts draws.
pub fn gradient_estimate_check(
    u: &Expr,
    n: usize,
    radii: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Vec<RadiusSample>> {
    check_radii(radii)?;
    let prog = GradProgram::new(u, n)?;
    radii
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let (value, used) = mc::sup(mc::derive_seed(seed, i as u64), samples, |rng| {
                let p = sample_box(rng, n, 2.0 * r);
                let rho = p.norm();
                if rho < r || rho >= 2.0 * r {
                    return Ok(None);
                }
                Ok(Some(prog.log_gradient(&p)? * r))
            })?;
            if used == 0 {
                return Err(Error::InvalidArgument(format!(
                    "no samples landed in the annulus at R={r}"
                )));
            }
            Ok(RadiusSample {
                r,
                value,
                samples: used,
            })
        })
        .collect()
}

/// Sampled `sup |∂u|/u` over `|ξ| ≤ r_max`, with gauge radii drawn
/// log-uniformly from `[10^{-3}, r_max]` so every scale is visited.
pub fn global_gradient_sup(
    u: &Expr,
    n: usize,
    r_max: f64,
    samples: usize,
    seed: u64,
) -> Result<(f64, usize)> {
    if !(r_max > 1e-3) {
        return Err(Error::InvalidArgument(format!(
            "r_max must exceed 1e-3, got {r_max}"
        )));
    }
    let prog = GradProgram::new(u, n)?;
    let (lo, hi) = (1e-3f64.ln(), r_max.ln());
    mc::sup(seed, samples, |rng| {
        use rand::Rng;
        let r = rng.random_range(lo..hi).exp();
        let p = sample_unit_sphere(rng, n).dilate(r)?;
        Ok(Some(prog.log_gradient(&p)?))
    })
}
