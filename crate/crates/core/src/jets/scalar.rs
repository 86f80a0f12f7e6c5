use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

/// Scalars a jet can carry.
pub trait JetScalar:
    Clone
    + fmt::Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// An exactly known constant.
    fn constant(c: Complex64) -> Self;
    fn value(&self) -> Complex64;
    /// Size of the terms this value was computed from; roundoff in `value`
    /// is a small multiple of `magnitude * EPSILON`.
    fn magnitude(&self) -> f64;
    fn conj(&self) -> Self;
    fn recip(&self) -> Self;
    fn exp(&self) -> Self;
    /// Logarithm (principal branch).
    fn ln(&self) -> Self;

    fn zero() -> Self {
        Self::constant(Complex64::new(0.0, 0.0))
    }

    fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    fn real(x: f64) -> Self {
        Self::constant(Complex64::new(x, 0.0))
    }

    fn re(&self) -> Self {
        (self.clone() + self.conj()) * Self::real(0.5)
    }

    fn abs2(&self) -> Self {
        self.clone() * self.conj()
    }
}

impl JetScalar for Complex64 {
    fn constant(c: Complex64) -> Self {
        c
    }
    fn value(&self) -> Complex64 {
        *self
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn recip(&self) -> Self {
        self.inv()
    }
    fn exp(&self) -> Self {
        Complex64::exp(*self)
    }
    fn ln(&self) -> Self {
        Complex64::ln(*self)
    }
}

/// A complex value paired with the magnitude of the terms that produced it.
///
/// Sums add magnitudes, so when large terms cancel the value becomes small
/// while the magnitude stays large. Comparing a residual against the
/// magnitude rather than the value gives a relative error that stays
/// meaningful at points where every term of an identity vanishes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gauged {
    pub value: Complex64,
    pub magnitude: f64,
}

impl Gauged {
    pub fn new(value: Complex64, magnitude: f64) -> Self {
        Self {
            value,
            magnitude: magnitude.max(value.norm()),
        }
    }
}

impl Add for Gauged {
    type Output = Gauged;
    fn add(self, o: Gauged) -> Gauged {
        Gauged {
            value: self.value + o.value,
            magnitude: self.magnitude + o.magnitude,
        }
    }
}

impl Sub for Gauged {
    type Output = Gauged;
    fn sub(self, o: Gauged) -> Gauged {
        Gauged {
            value: self.value - o.value,
            magnitude: self.magnitude + o.magnitude,
        }
    }
}

impl Mul for Gauged {
    type Output = Gauged;
    fn mul(self, o: Gauged) -> Gauged {
        Gauged {
            value: self.value * o.value,
            magnitude: self.magnitude * o.magnitude,
        }
    }
}

impl Neg for Gauged {
    type Output = Gauged;
    fn neg(self) -> Gauged {
        Gauged {
            value: -self.value,
            magnitude: self.magnitude,
        }
    }
}

impl JetScalar for Gauged {
    fn constant(c: Complex64) -> Self {
        Gauged {
            value: c,
            magnitude: c.norm(),
        }
    }
    fn value(&self) -> Complex64 {
        self.value
    }
    fn magnitude(&self) -> f64 {
        self.magnitude
    }
    fn conj(&self) -> Self {
        Gauged {
            value: self.value.conj(),
            magnitude: self.magnitude,
        }
    }
    fn recip(&self) -> Self {
        let a = self.value.norm();
        Gauged::new(self.value.inv(), self.magnitude / (a * a))
    }
    fn exp(&self) -> Self {
        let v = self.value.exp();
        Gauged {
            value: v,
            magnitude: v.norm() * self.magnitude.max(1.0),
        }
    }
    fn ln(&self) -> Self {
        let v = self.value.ln();
        Gauged {
            value: v,
            magnitude: v.norm() + self.magnitude / self.value.norm(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancellation_keeps_magnitude() {
        let a = Gauged::constant(Complex64::new(1e8, 0.0));
        let b = Gauged::constant(Complex64::new(1e8 + 1.0, 0.0));
        let d = b - a;
        assert_eq!(d.value.re, 1.0);
        assert_eq!(d.magnitude, 2e8 + 1.0);
    }

    #[test]
    fn recip_and_log_bound_their_value() {
        let a = Gauged::new(Complex64::new(0.5, 0.0), 3.0);
        assert!(a.recip().magnitude >= 2.0);
        assert!(a.ln().magnitude >= a.value.ln().norm());
        assert!(a.exp().magnitude >= a.value.exp().norm());
    }
}
