//! Seeded Monte Carlo integrals over gauge balls and annuli.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{bubble_expr, Bubble, Cutoff, CutoffSpec};
use crate::error::{Error, Result};
use crate::hgroup::{sample_box, HPoint};
use crate::jets::{JetProgram, Letter};
use crate::jltensor::{f_from_u, frame_of, FrameMode};
use crate::mc::{self, McEstimate};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Region {
    Ball { r: f64 },
    Annulus { inner: f64, outer: f64 },
}

impl Region {
    fn outer(&self) -> f64 {
        match *self {
            Region::Ball { r } => r,
            Region::Annulus { outer, .. } => outer,
        }
    }

    fn contains(&self, rho: f64) -> bool {
        match *self {
            Region::Ball { r } => rho < r,
            Region::Annulus { inner, outer } => rho >= inner && rho < outer,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Region::Ball { r } => r > 0.0 && r.is_finite(),
            Region::Annulus { inner, outer } => inner >= 0.0 && outer > inner && outer.is_finite(),
        };
        if !ok {
            return Err(Error::InvalidArgument(format!("invalid region {self:?}")));
        }
        Ok(())
    }
}

/// `∫_region f` by uniform sampling of the box `[-R,R]^{2n} × [-R²,R²]`
/// around the outer radius, with rejection to the region. With `f ≡ 1` on a
/// ball this draws exactly the samples of [`crate::hgroup::ball_volume_mc`].
pub fn integral_mc<F>(
    n: usize,
    region: Region,
    samples: usize,
    seed: u64,
    f: F,
) -> Result<McEstimate>
where
    F: Fn(&HPoint<f64>) -> Result<f64> + Sync,
{
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    region.validate()?;
    let r = region.outer();
    let box_volume = (2.0 * r).powi(2 * n as i32) * 2.0 * r * r;
    let est = mc::mean(seed, samples, |rng| {
        let p = sample_box(rng, n, r);
        if region.contains(p.norm()) {
            f(&p)
        } else {
            Ok(0.0)
        }
    })?;
    Ok(est.scaled(box_volume))
}

/// A compactly supported field `W_α(ξ) = q_α(ξ) η(c⁻¹∘ξ)` with
/// `q_α = a_α + Σ_β (b_{αβ} z_β + e_{αβ} z̄_β) + d_α t` and `η` the cutoff
/// of radius `R` centered at `c`.
#[derive(Clone, Debug)]
pub struct BumpField {
    pub center: HPoint<f64>,
    pub a: Vec<Complex64>,
    pub b: Vec<Vec<Complex64>>,
    pub e: Vec<Vec<Complex64>>,
    pub d: Vec<Complex64>,
    cutoff: Cutoff,
}

impl BumpField {
    pub fn random<G: Rng + ?Sized>(rng: &mut G, n: usize) -> Result<Self> {
        let mut c = || Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let a = (0..n).map(|_| c()).collect();
        let b = (0..n).map(|_| (0..n).map(|_| c()).collect()).collect();
        let e = (0..n).map(|_| (0..n).map(|_| c()).collect()).collect();
        let d = (0..n).map(|_| c()).collect();
        let z = (0..n).map(|_| c()).collect();
        let t = rng.random_range(-1.0..1.0);
        let r = rng.random_range(0.5..2.0);
        Ok(BumpField {
            center: HPoint::new(z, t)?,
            a,
            b,
            e,
            d,
            cutoff: Cutoff::new(n, CutoffSpec { r })?,
        })
    }

    pub fn n(&self) -> usize {
        self.center.dim()
    }

    /// Radius of a gauge ball containing the support.
    pub fn support_radius(&self) -> f64 {
        self.center.norm() + self.cutoff.spec.r
    }

    /// `Re Σ_α Z_ᾱ W_α` at `p`.
    pub fn divergence(&self, p: &HPoint<f64>) -> Result<f64> {
        let n = self.n();
        let local = self.center.inverse().mul(p)?;
        let eta = self.cutoff.jet(&local)?;
        let z = p.z();
        let t = *p.t();
        let i = Complex64::new(0.0, 1.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for al in 0..n {
            let mut q = self.a[al] + self.d[al] * t;
            for be in 0..n {
                q += self.b[al][be] * z[be] + self.e[al][be] * z[be].conj();
            }
            // Z_ᾱ = ∂_{z̄_α} − i z_α ∂_t applied to q_α.
            let dq = self.e[al][al] - i * z[al] * self.d[al];
            acc += dq * eta.value() + q * eta.get(&[Letter::Zb(al)]);
        }
        Ok(acc.re)
    }
}

/// `∫ Re Z_ᾱ W_α` over a ball containing the support of `W`.
pub fn divergence_integral(field: &BumpField, samples: usize, seed: u64) -> Result<McEstimate> {
    integral_mc(
        field.n(),
        Region::Ball {
            r: field.support_radius(),
        },
        samples,
        seed,
        |p| field.divergence(p),
    )
}

/// Both sides of the weighted integral inequality for `M` on a bubble.
/// For `n = 1`: `∫ M Ψ^{−β} η^s` against `∫ |g|² Ψ^{−β} |∂η|² η^{s−2}`;
/// for `n ≥ 2`: `∫ M η^s` against `∫ |g|² e^{2(n−1)f} |∂η|² η^{s−2}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub n: usize,
    pub r: f64,
    pub s: f64,
    pub beta: f64,
    pub lhs: McEstimate,
    /// The left integrand with `M` replaced by the magnitude of its terms.
    pub lhs_scale: McEstimate,
    pub rhs: McEstimate,
}

impl LemmaCheck {
    /// `M ≡ 0` predicts `lhs = 0`: accept `|lhs| ≤ k σ + tol · lhs_scale`,
    /// and require `rhs ≥ 0`.
    pub fn consistent_with_zero(&self, k: f64, tol: f64) -> bool {
        self.lhs.value.abs() <= k * self.lhs.std_err + tol * self.lhs_scale.value.abs()
            && self.rhs.value >= 0.0
    }
}

pub fn lemma_pipeline(
    b: &Bubble,
    r: f64,
    s: f64,
    beta: f64,
    samples: usize,
    seed: u64,
) -> Result<LemmaCheck> {
    if !(s > 2.0) {
        return Err(Error::InvalidArgument(format!("s must exceed 2, got {s}")));
    }
    if !(beta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "beta must be positive, got {beta}"
        )));
    }
    let n = b.n;
    let prog = JetProgram::new(&bubble_expr(b)?, n, 3)?;
    let cutoff = Cutoff::new(n, CutoffSpec { r })?;
    let box_volume = (2.0 * r).powi(2 * n as i32) * 2.0 * r * r;
    let est = mc::mean_many(seed, samples, 3, |rng| {
        let p = sample_box(rng, n, r);
        let (eta, deta) = cutoff.eval(&p)?;
        if eta <= 0.0 {
            return Ok(vec![0.0; 3]);
        }
        let fr = frame_of(&f_from_u(&prog.eval(&p)?)?, FrameMode::General)?;
        let weight = if n == 1 {
            fr.psi.powf(-beta)
        } else {
            (2.0 * (n as f64 - 1.0) * fr.f).exp()
        };
        let lhs_w = if n == 1 { weight } else { 1.0 };
        let es = eta.powf(s);
        Ok(vec![
            fr.m * lhs_w * es,
            fr.m_scale * lhs_w * es,
            fr.g.norm_sqr() * weight * deta * deta * eta.powf(s - 2.0),
        ])
    })?;
    let mut it = est.into_iter().map(|e| e.scaled(box_volume));
    Ok(LemmaCheck {
        n,
        r,
        s,
        beta,
        lhs: it.next().expect("three estimates"),
        lhs_scale: it.next().expect("three estimates"),
        rhs: it.next().expect("three estimates"),
    })
}
