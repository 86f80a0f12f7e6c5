//! Points of the Heisenberg group `H^n = C^n x R`, the group law, the Korányi
//! gauge, left-invariant distance, anisotropic dilations and Monte Carlo
//! volume estimates for gauge balls.
//!
//! Coordinates are generic over [`Coord`], so the group axioms can be checked
//! in exact rational arithmetic as well as in `f64`.

use std::fmt::Debug;
use std::ops::Neg;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc::{self, McEstimate};

pub type Rational = BigRational;
pub type ExactComplex = Complex<Rational>;

/// Scalar type usable as a coordinate.
pub trait Coord: Clone + PartialEq + Debug + Num + Neg<Output = Self> {
    fn is_finite_coord(&self) -> bool;
}

impl Coord for f64 {
    fn is_finite_coord(&self) -> bool {
        self.is_finite()
    }
}

impl Coord for Rational {
    fn is_finite_coord(&self) -> bool {
        true
    }
}

/// How scalars are represented when evaluating.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scalarization {
    /// Rational real and imaginary parts, no rounding.
    ExactRational,
    /// IEEE-754 double precision.
    Float64,
}

/// A point `(z, t)` with `n = z.len() >= 1` complex slots.
#[derive(Debug, Clone, PartialEq)]
pub struct HPoint<R = f64> {
    z: Vec<Complex<R>>,
    t: R,
}

impl<R: Coord> HPoint<R> {
    pub fn new(z: Vec<Complex<R>>, t: R) -> Result<Self> {
        if z.is_empty() {
            return Err(Error::InvalidDimension(0));
        }
        let finite = t.is_finite_coord()
            && z.iter()
                .all(|c| c.re.is_finite_coord() && c.im.is_finite_coord());
        if !finite {
            return Err(Error::NonFinite);
        }
        Ok(Self { z, t })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(vec![Complex::new(R::zero(), R::zero()); n], R::zero())
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    pub fn z(&self) -> &[Complex<R>] {
        &self.z
    }

    pub fn t(&self) -> &R {
        &self.t
    }

    pub fn is_identity(&self) -> bool {
        self.t.is_zero() && self.z.iter().all(|c| c.re.is_zero() && c.im.is_zero())
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    /// `(z,t)∘(w,s) = (z+w, t+s+2 Im(z·w̄))`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut twist = R::zero();
        for (a, b) in self.z.iter().zip(&other.z) {
            // Im(a * conj(b))
            twist = twist + (a.im.clone() * b.re.clone() - a.re.clone() * b.im.clone());
        }
        let z = self
            .z
            .iter()
            .zip(&other.z)
            .map(|(a, b)| a.clone() + b.clone())
            .collect();
        let t = self.t.clone() + other.t.clone() + twist.clone() + twist;
        Ok(Self { z, t })
    }

    pub fn inverse(&self) -> Self {
        Self {
            z: self.z.iter().map(|c| -c.clone()).collect(),
            t: -self.t.clone(),
        }
    }
}

impl HPoint<f64> {
    pub fn from_parts(z: &[(f64, f64)], t: f64) -> Result<Self> {
        Self::new(z.iter().map(|&(re, im)| Complex::new(re, im)).collect(), t)
    }

    /// Korányi gauge `(|z|^4 + t^2)^{1/4}`.
    pub fn norm(&self) -> f64 {
        let r2: f64 = self.z.iter().map(|c| c.norm_sqr()).sum();
        (r2 * r2 + self.t * self.t).sqrt().sqrt()
    }

    /// `d(a, b) = |b^{-1} ∘ a|`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        Ok(other.inverse().mul(self)?.norm())
    }

    /// `δ_s(z, t) = (s z, s^2 t)`.
    pub fn dilate(&self, s: f64) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::NonPositiveScale(s));
        }
        Self::new(self.z.iter().map(|c| c * s).collect(), self.t * s * s)
    }

    /// Exact rational copy (every finite double is a dyadic rational).
    pub fn to_exact(&self) -> HPoint<Rational> {
        let q = |x: f64| Rational::from_float(x).expect("finite coordinate");
        HPoint {
            z: self
                .z
                .iter()
                .map(|c| Complex::new(q(c.re), q(c.im)))
                .collect(),
            t: q(self.t),
        }
    }

    pub fn coords(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.z.iter().flat_map(|c| [c.re, c.im]).collect();
        v.push(self.t);
        v
    }
}

impl HPoint<Rational> {
    pub fn to_f64(&self) -> HPoint<f64> {
        let f = |x: &Rational| x.to_f64().unwrap_or(f64::NAN);
        HPoint {
            z: self
                .z
                .iter()
                .map(|c| Complex::new(f(&c.re), f(&c.im)))
                .collect(),
            t: f(&self.t),
        }
    }
}

/// A small random rational in `[-8, 8]` with denominator up to 16.
pub fn random_rational<G: Rng + ?Sized>(rng: &mut G) -> Rational {
    let num: i64 = rng.random_range(-128..=128);
    let den: i64 = rng.random_range(1..=16);
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn random_exact_point<G: Rng + ?Sized>(rng: &mut G, n: usize) -> HPoint<Rational> {
    let z = (0..n)
        .map(|_| Complex::new(random_rational(rng), random_rational(rng)))
        .collect();
    HPoint {
        z,
        t: random_rational(rng),
    }
}

/// Uniform sample of the box `[-1,1]^{2n} x [-1,1]`.
pub fn sample_unit_box<G: Rng + ?Sized>(rng: &mut G, n: usize) -> HPoint<f64> {
    let z = (0..n)
        .map(|_| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    HPoint {
        z,
        t: rng.random_range(-1.0..1.0),
    }
}

/// Uniform sample of the gauge box `[-R,R]^{2n} x [-R^2,R^2]`, which is the
/// dilation of the unit box by `R`.
pub fn sample_box<G: Rng + ?Sized>(rng: &mut G, n: usize, r: f64) -> HPoint<f64> {
    let p = sample_unit_box(rng, n);
    HPoint {
        z: p.z.iter().map(|c| c * r).collect(),
        t: p.t * r * r,
    }
}

/// Point on the unit gauge sphere obtained by dilating a box sample.
pub fn sample_unit_sphere<G: Rng + ?Sized>(rng: &mut G, n: usize) -> HPoint<f64> {
    loop {
        let p = sample_unit_box(rng, n);
        let r = p.norm();
        if r > 1e-3 {
            return p.dilate(1.0 / r).expect("positive scale");
        }
    }
}

/// Monte Carlo estimate of the Lebesgue measure of `{|ξ| < R}` by rejection
/// from the box `[-R,R]^{2n} x [-R^2,R^2]`.
pub fn ball_volume_mc(n: usize, r: f64, samples: usize, seed: u64) -> Result<McEstimate> {
    if n == 0 {
        return Err(Error::InvalidDimension(0));
    }
    if !(r > 0.0) {
        return Err(Error::NonPositiveScale(r));
    }
    if samples < 10_000 {
        return Err(Error::InvalidArgument(format!(
            "ball volume needs at least 10^4 samples, got {samples}"
        )));
    }
    let box_volume = (2.0 * r).powi(2 * n as i32) * 2.0 * r * r;
    let est = mc::mean(seed, samples, |rng| {
        let p = sample_box(rng, n, r);
        Ok(if p.norm() < r { 1.0 } else { 0.0 })
    })?;
    Ok(est.scaled(box_volume))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VolumeFit {
    pub n: usize,
    /// Fitted exponent of `|B_R| = C R^Q`.
    pub slope: f64,
    /// Fitted constant `C` (reported, not asserted).
    pub constant: f64,
    pub points: Vec<(f64, McEstimate)>,
}

/// Log-log least-squares fit of ball volumes over `radii`. Each radius uses
/// its own derived seed so estimates are independent.
pub fn volume_exponent(n: usize, radii: &[f64], samples: usize, seed: u64) -> Result<VolumeFit> {
    if radii.len() < 2 {
        return Err(Error::InvalidArgument("need at least two radii".into()));
    }
    let mut points = Vec::with_capacity(radii.len());
    for (i, &r) in radii.iter().enumerate() {
        let est = ball_volume_mc(n, r, samples, mc::derive_seed(seed, i as u64))?;
        points.push((r, est));
    }
    let xs: Vec<f64> = points.iter().map(|(r, _)| r.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, e)| e.value.ln()).collect();
    let (slope, intercept) = least_squares(&xs, &ys);
    Ok(VolumeFit {
        n,
        slope,
        constant: intercept.exp(),
        points,
    })
}

pub(crate) fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn group_law_hand_example() {
        let a = HPoint::new(vec![c(1.0, 0.0)], 0.0).unwrap();
        let b = HPoint::new(vec![c(0.0, 1.0)], 0.0).unwrap();
        let ab = a.mul(&b).unwrap();
        assert_eq!(ab.z(), &[c(1.0, 1.0)]);
        assert_eq!(*ab.t(), -2.0);
    }

    #[test]
    fn identity_and_inverse() {
        let w = HPoint::new(vec![c(0.3, -2.0), c(1.5, 0.25)], 7.0).unwrap();
        let e = HPoint::identity(2).unwrap();
        assert_eq!(e.mul(&w).unwrap(), w);
        assert!(w.mul(&w.inverse()).unwrap().is_identity());

        let a = HPoint::new(vec![c(1.0, 1.0)], 3.0).unwrap();
        assert_eq!(a.inverse(), HPoint::new(vec![c(-1.0, -1.0)], -3.0).unwrap());
        assert!(HPoint::<f64>::identity(1).unwrap().inverse().is_identity());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = HPoint::<f64>::identity(1).unwrap();
        let b = HPoint::<f64>::identity(2).unwrap();
        assert!(matches!(a.mul(&b), Err(Error::DimensionMismatch { .. })));
        assert!(a.distance(&b).is_err());
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(HPoint::<f64>::new(vec![], 0.0).is_err());
        assert_eq!(
            HPoint::new(vec![c(f64::NAN, 0.0)], 0.0),
            Err(Error::NonFinite)
        );
    }

    #[test]
    fn norm_examples() {
        let a = HPoint::new(vec![c(0.6, 0.8)], 0.0).unwrap();
        assert!((a.norm() - 1.0).abs() < 1e-15);
        let b = HPoint::new(vec![c(0.0, 0.0)], 4.0).unwrap();
        assert!((b.norm() - 2.0).abs() < 1e-15);
        let one = HPoint::new(vec![c(1.0, 0.0)], 0.0).unwrap();
        assert_eq!(one.distance(&HPoint::identity(1).unwrap()).unwrap(), 1.0);
    }

    #[test]
    fn dilation_examples() {
        let a = HPoint::new(vec![c(1.0, 0.0)], 0.0).unwrap();
        let d = a.dilate(2.0).unwrap();
        assert_eq!(d, HPoint::new(vec![c(2.0, 0.0)], 0.0).unwrap());
        assert_eq!(d.norm(), 2.0);
        assert_eq!(a.dilate(1.0).unwrap(), a);
        assert!(matches!(a.dilate(0.0), Err(Error::NonPositiveScale(_))));
        assert!(a.dilate(-1.0).is_err());
    }

    #[test]
    fn exact_group_axioms() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=3 {
            for _ in 0..200 {
                let a = random_exact_point(&mut rng, n);
                let b = random_exact_point(&mut rng, n);
                let cc = random_exact_point(&mut rng, n);
                let left = a.mul(&b).unwrap().mul(&cc).unwrap();
                let right = a.mul(&b.mul(&cc).unwrap()).unwrap();
                assert_eq!(left, right);
                assert!(a.mul(&a.inverse()).unwrap().is_identity());
            }
        }
    }

    #[test]
    fn volume_ratio_matches_homogeneous_dimension() {
        let v1 = ball_volume_mc(1, 1.0, 200_000, 11).unwrap();
        let v2 = ball_volume_mc(1, 2.0, 200_000, 12).unwrap();
        let ratio = v2.value / v1.value;
        let sigma =
            ratio * ((v1.std_err / v1.value).powi(2) + (v2.std_err / v2.value).powi(2)).sqrt();
        assert!(
            (ratio - 16.0).abs() < 3.0 * sigma,
            "ratio {ratio} sigma {sigma}"
        );
    }

    #[test]
    fn volume_needs_enough_samples() {
        assert!(ball_volume_mc(1, 1.0, 100, 0).is_err());
        assert!(ball_volume_mc(1, -1.0, 20_000, 0).is_err());
    }
}
