//! Jet producers: symbolic differentiation and finite differences.

use num_complex::Complex64;

use super::{word_name, Jet, JetShape, Letter};
use crate::error::{Error, Result};
use crate::expr::{differentiate, DerivOp, Expr, Tape};
use crate::hgroup::{least_squares, HPoint};

/// A jet together with its base point.
#[derive(Clone, Debug)]
pub struct HJet3 {
    pub point: HPoint<f64>,
    pub jet: Jet<Complex64>,
}

impl HJet3 {
    pub fn n(&self) -> usize {
        self.jet.n()
    }

    pub fn get(&self, w: &[Letter]) -> Complex64 {
        *self.jet.get(w)
    }

    pub fn value(&self) -> Complex64 {
        *self.jet.value()
    }
}

fn deriv_op(l: Letter) -> DerivOp {
    match l {
        Letter::Z(a) => DerivOp::Z(a),
        Letter::Zb(a) => DerivOp::Zb(a),
        Letter::T => DerivOp::Dt,
    }
}

/// Symbolic derivatives of one expression for every stored word, compiled
/// once and evaluated at many points.
#[derive(Clone, Debug)]
pub struct JetProgram {
    n: usize,
    order: usize,
    tape: Tape,
}

impl JetProgram {
    pub fn new(e: &Expr, n: usize, order: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension(n));
        }
        if let Some(a) = e.max_index() {
            if a >= n {
                return Err(Error::IndexOutOfRange { index: a, n });
            }
        }
        let shape = JetShape::get(n, order);
        let mut derivs: Vec<Expr> = Vec::with_capacity(shape.len());
        derivs.push(e.clone());
        for i in 1..shape.len() {
            let w = shape.word(i);
            let parent = shape
                .index(&w[..w.len() - 1])
                .expect("prefix of a stored word is stored");
            let d = differentiate(&derivs[parent], deriv_op(w[w.len() - 1]))?;
            derivs.push(d);
        }
        Ok(JetProgram {
            n,
            order,
            tape: Tape::compile(&derivs),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn tape_len(&self) -> usize {
        self.tape.len()
    }

    pub fn eval(&self, p: &HPoint<f64>) -> Result<HJet3> {
        if p.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: p.dim(),
            });
        }
        let values = self.tape.eval(p)?;
        if values
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::Domain("non-finite derivative".into()));
        }
        Ok(HJet3 {
            point: p.clone(),
            jet: Jet::from_values(self.n, self.order, values),
        })
    }

    /// Smallest positivity-certificate value at `p`.
    pub fn min_certificate(&self, p: &HPoint<f64>) -> Result<f64> {
        self.tape.min_certificate(p)
    }
}

/// Order-3 jet of `e` at `p` by symbolic differentiation.
pub fn jet_from_expr(e: &Expr, p: &HPoint<f64>) -> Result<HJet3> {
    JetProgram::new(e, p.dim(), 3)?.eval(p)
}

/// Central difference stencil along one direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stencil {
    /// `(f(h) − f(−h)) / 2h`, error `O(h²)`.
    Two,
    /// `(−f(2h) + 8f(h) − 8f(−h) + f(−2h)) / 12h`, error `O(h⁴)`.
    Four,
}

impl Stencil {
    fn taps(self) -> &'static [(f64, f64)] {
        match self {
            Stencil::Two => &[(1.0, 0.5), (-1.0, -0.5)],
            Stencil::Four => &[
                (2.0, -1.0 / 12.0),
                (1.0, 8.0 / 12.0),
                (-1.0, -8.0 / 12.0),
                (-2.0, 1.0 / 12.0),
            ],
        }
    }

    fn error_order(self) -> i32 {
        match self {
            Stencil::Two => 2,
            Stencil::Four => 4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FdOptions {
    pub order: usize,
    /// Horizontal step relative to `max(1, |ξ|)`; the `t` step is further
    /// multiplied by `max(1, |ξ|)`.
    pub h: f64,
    pub stencil: Stencil,
    /// Apply one Richardson extrapolation `(2^p D(h/2) − D(h)) / (2^p − 1)`
    /// with `p` the error order of the stencil.
    pub richardson: bool,
}

impl Default for FdOptions {
    fn default() -> Self {
        FdOptions {
            order: 3,
            h: 2e-3,
            stencil: Stencil::Four,
            richardson: true,
        }
    }
}

/// Real frame: code `α` is `X_α`, `n+α` is `Y_α`, `2n` is `∂_t`.
fn flow(n: usize, code: usize, s: f64) -> HPoint<f64> {
    let mut z = vec![Complex64::new(0.0, 0.0); n];
    let mut t = 0.0;
    if code < n {
        z[code] = Complex64::new(s, 0.0);
    } else if code < 2 * n {
        z[code - n] = Complex64::new(0.0, s);
    } else {
        t = s;
    }
    HPoint::new(z, t).expect("valid flow point")
}

type Evaluator<'a> = dyn Fn(&HPoint<f64>) -> Result<Complex64> + Sync + 'a;

fn real_jet(
    f: &Evaluator<'_>,
    p: &HPoint<f64>,
    shape: &JetShape,
    stencil: Stencil,
    h: f64,
    ht: f64,
) -> Result<Vec<Complex64>> {
    let n = shape.n();
    let taps = stencil.taps();
    let mut out = Vec::with_capacity(shape.len());
    for i in 0..shape.len() {
        let codes: Vec<usize> = shape
            .word(i)
            .iter()
            .map(|l| match l {
                Letter::Z(a) => *a,
                Letter::Zb(a) => n + a,
                Letter::T => 2 * n,
            })
            .collect();
        let k = codes.len();
        let steps: Vec<f64> = codes
            .iter()
            .map(|&c| if c == 2 * n { ht } else { h })
            .collect();
        let mut acc = Complex64::new(0.0, 0.0);
        // Tensor product of the stencil over the letters of the word.
        for combo in 0..taps.len().pow(k as u32) {
            let mut q = p.clone();
            let mut weight = 1.0;
            let mut rest = combo;
            for j in (0..k).rev() {
                let (offset, w) = taps[rest % taps.len()];
                rest /= taps.len();
                weight *= w;
                q = q.mul(&flow(n, codes[j], offset * steps[j]))?;
            }
            let v = f(&q).map_err(|e| Error::Evaluator(e.to_string()))?;
            acc += v * weight;
        }
        let denom: f64 = steps.iter().product();
        out.push(acc / denom);
    }
    Ok(out)
}

/// Recombine real-frame derivatives into the complex frame via
/// `Z_α = (X_α − iY_α)/2`, `Z̄_α = (X_α + iY_α)/2`.
fn complexify(shape: &JetShape, real: &[Complex64]) -> Vec<Complex64> {
    (0..shape.len())
        .map(|i| {
            let w = shape.word(i);
            let free: Vec<usize> = (0..w.len()).filter(|&j| w[j] != Letter::T).collect();
            let mut acc = Complex64::new(0.0, 0.0);
            for mask in 0..(1u32 << free.len()) {
                let mut rw = w.clone();
                let mut coef = Complex64::new(1.0, 0.0);
                for (b, &j) in free.iter().enumerate() {
                    let (a, conj) = match w[j] {
                        Letter::Z(a) => (a, false),
                        Letter::Zb(a) => (a, true),
                        Letter::T => unreachable!(),
                    };
                    if mask & (1 << b) == 0 {
                        rw[j] = Letter::Z(a);
                        coef *= 0.5;
                    } else {
                        rw[j] = Letter::Zb(a);
                        coef *= Complex64::new(0.0, if conj { 0.5 } else { -0.5 });
                    }
                }
                let ri = shape.index(&rw).expect("real word stored");
                acc += coef * real[ri];
            }
            acc
        })
        .collect()
}

/// Jet of a pointwise evaluator by central differences along the flows of
/// the left-invariant real fields `X_α = ∂_x + 2y∂_t`, `Y_α = ∂_y − 2x∂_t`
/// and `∂_t`.
pub fn jet_fd(f: &Evaluator<'_>, p: &HPoint<f64>, opts: &FdOptions) -> Result<HJet3> {
    if !(opts.h > 1e-6 && opts.h < 1e-1) {
        return Err(Error::InvalidArgument(format!(
            "finite-difference step {} outside (1e-6, 1e-1)",
            opts.h
        )));
    }
    let shape = JetShape::get(p.dim(), opts.order);
    let s = p.norm().max(1.0);
    let h = opts.h * s;
    let ht = h * s;
    let mut real = real_jet(f, p, &shape, opts.stencil, h, ht)?;
    if opts.richardson {
        let half = real_jet(f, p, &shape, opts.stencil, h / 2.0, ht / 2.0)?;
        let k = 2f64.powi(opts.stencil.error_order());
        for (r, hf) in real.iter_mut().zip(&half) {
            *r = (hf * k - *r) / (k - 1.0);
        }
    }
    Ok(HJet3 {
        point: p.clone(),
        jet: Jet::from_values(p.dim(), opts.order, complexify(&shape, &real)),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct JetComparison {
    pub max_rel: f64,
    pub worst_word: String,
    pub worst_index: usize,
    /// Per-entry deviation, indexed like the jet storage.
    pub deviations: Vec<f64>,
}

/// Entry-wise deviation of two jets at the same point. Each entry is
/// normalized by the largest modulus among entries with the same length
/// and the same number of `T` letters in either jet, floored by the largest
/// modulus among shorter words, so entries that vanish at the point do not
/// produce spurious relative errors.
pub fn compare_jets(a: &HJet3, b: &HJet3) -> Result<JetComparison> {
    if a.point != b.point || a.n() != b.n() {
        return Err(Error::JetMismatch);
    }
    let order = a.jet.order().min(b.jet.order());
    let shape = JetShape::get(a.n(), order);
    let class = |i: usize| {
        let w = shape.word(i);
        (w.len(), w.iter().filter(|l| **l == Letter::T).count())
    };
    let mut scale = std::collections::HashMap::new();
    for i in 0..shape.len() {
        let m = a.jet.values()[i].norm().max(b.jet.values()[i].norm());
        let e = scale.entry(class(i)).or_insert(0.0f64);
        *e = e.max(m);
    }
    let mut lower = vec![0.0f64; order + 2];
    for i in 0..shape.len() {
        let m = a.jet.values()[i].norm().max(b.jet.values()[i].norm());
        for slot in lower.iter_mut().skip(shape.word_len(i) + 1) {
            *slot = slot.max(m);
        }
    }
    let norm = |i: usize| scale[&class(i)].max(lower[shape.word_len(i)]).max(1e-300);
    let mut out = JetComparison {
        max_rel: 0.0,
        worst_word: word_name(&[]),
        worst_index: 0,
        deviations: Vec::with_capacity(shape.len()),
    };
    for i in 0..shape.len() {
        let d = (a.jet.values()[i] - b.jet.values()[i]).norm();
        let dev = d / norm(i);
        if dev > out.max_rel || dev.is_nan() {
            out.max_rel = dev;
            out.worst_index = i;
            out.worst_word = word_name(&shape.word(i));
        }
        out.deviations.push(dev);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FdConvergence {
    pub steps: Vec<f64>,
    pub errors: Vec<f64>,
    /// Fitted exponent of `error ~ h^slope`.
    pub slope: f64,
}

/// Error of first-order finite-difference entries against a reference jet
/// for a sequence of steps, with the fitted convergence exponent. Uses the
/// two-point stencil, so the exponent is 2, or 4 after Richardson.
pub fn fd_convergence(
    f: &Evaluator<'_>,
    reference: &HJet3,
    steps: &[f64],
    richardson: bool,
) -> Result<FdConvergence> {
    let mut errors = Vec::with_capacity(steps.len());
    for &h in steps {
        let opts = FdOptions {
            order: 1,
            h,
            stencil: Stencil::Two,
            richardson,
        };
        let fd = jet_fd(f, &reference.point, &opts)?;
        let cmp = compare_jets(&fd, reference)?;
        let first = &cmp.deviations[1..];
        errors.push(first.iter().cloned().fold(0.0, f64::max));
    }
    let xs: Vec<f64> = steps.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.max(1e-300).ln()).collect();
    let (slope, _) = least_squares(&xs, &ys);
    Ok(FdConvergence {
        steps: steps.to_vec(),
        errors,
        slope,
    })
}
