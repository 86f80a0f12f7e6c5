use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `V(x) = (λ√(n(n−2)) / (λ² + |x − x₀|²))^{(n−2)/2}`, a solution of
/// `−ΔV = V^{(n+2)/(n−2)}` on `ℝⁿ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EuclideanBubble {
    pub n: usize,
    pub lambda: f64,
    pub x0: Vec<f64>,
}

impl EuclideanBubble {
    pub fn new(n: usize, lambda: f64, x0: Vec<f64>) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidDimension(n));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::NonPositiveScale(lambda));
        }
        if x0.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: x0.len(),
            });
        }
        Ok(EuclideanBubble { n, lambda, x0 })
    }

    fn check(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: x.len(),
            });
        }
        Ok(x.iter().zip(&self.x0).map(|(a, b)| (a - b) * (a - b)).sum())
    }

    fn a(&self) -> f64 {
        let n = self.n as f64;
        self.lambda * (n * (n - 2.0)).sqrt()
    }

    fn k(&self) -> f64 {
        (self.n as f64 - 2.0) / 2.0
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        let s = self.check(x)?;
        Ok((self.a() / (self.lambda * self.lambda + s)).powf(self.k()))
    }

    /// `ΔV` from the radial form `φ(s) = (a/(λ²+s))^k`, `s = |x−x₀|²`:
    /// `ΔV = 4sφ''(s) + 2nφ'(s)`.
    pub fn laplacian(&self, x: &[f64]) -> Result<f64> {
        let s = self.check(x)?;
        let (a, k) = (self.a(), self.k());
        let d = self.lambda * self.lambda + s;
        let base = a.powf(k) * d.powf(-k);
        let phi1 = -k * base / d;
        let phi2 = k * (k + 1.0) * base / (d * d);
        Ok(4.0 * s * phi2 + 2.0 * self.n as f64 * phi1)
    }
}

/// `|−ΔV − V^{(n+2)/(n−2)}| / V^{(n+2)/(n−2)}`.
pub fn euclidean_residual(v: &EuclideanBubble, x: &[f64]) -> Result<f64> {
    let n = v.n as f64;
    let rhs = v.value(x)?.powf((n + 2.0) / (n - 2.0));
    Ok((-v.laplacian(x)? - rhs).abs() / rhs)
}
