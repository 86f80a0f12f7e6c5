//! Pointwise derivative jets.
//!
//! A jet of order `K` stores, for every word `w` of length at most `K` over
//! the letters `Z_1..Z_n, Z̄_1..Z̄_n, T` (`T = ∂/∂t`), the value of
//! `w` applied to a function at a point. Letters are applied left to right:
//! the word `[Z_α, Z̄_β]` holds `Z_β̄(Z_α f) = f_{αβ̄}`.
//!
//! Jets form an algebra: products, quotients, `exp`, `ln` and real powers are
//! computed entry by entry with the ordered Leibniz rule (each field is a
//! derivation, so `w(uv) = Σ_S (w|S u)(w|S^c v)` over subsets `S` of the
//! letter positions, order preserved). Composite quantities built this way
//! carry their own derivatives, which is how divergences are formed.

mod produce;
mod scalar;

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

pub use produce::{
    compare_jets, fd_convergence, jet_fd, jet_from_expr, FdConvergence, FdOptions, HJet3,
    JetComparison, JetProgram, Stencil,
};
pub use scalar::{Gauged, JetScalar};

/// Highest supported jet order.
pub const MAX_ORDER: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    Z(usize),
    Zb(usize),
    T,
}

impl Letter {
    fn code(self, n: usize) -> usize {
        match self {
            Letter::Z(a) => a,
            Letter::Zb(a) => n + a,
            Letter::T => 2 * n,
        }
    }

    fn from_code(c: usize, n: usize) -> Letter {
        if c < n {
            Letter::Z(c)
        } else if c < 2 * n {
            Letter::Zb(c - n)
        } else {
            Letter::T
        }
    }

    pub fn conj(self) -> Letter {
        match self {
            Letter::Z(a) => Letter::Zb(a),
            Letter::Zb(a) => Letter::Z(a),
            Letter::T => Letter::T,
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Letter::Z(a) => write!(f, "Z{}", a + 1),
            Letter::Zb(a) => write!(f, "Zb{}", a + 1),
            Letter::T => write!(f, "T"),
        }
    }
}

pub fn word_name(w: &[Letter]) -> String {
    let parts: Vec<String> = w.iter().map(Letter::to_string).collect();
    format!("f[{}]", parts.join(","))
}

/// Index tables for jets of a given dimension and order.
#[derive(Debug)]
pub struct JetShape {
    n: usize,
    order: usize,
    base: usize,
    offsets: Vec<usize>,
    words: Vec<Vec<u8>>,
    /// For entry `i`: all `(w|S, w|S^c)` index pairs.
    mul_start: Vec<u32>,
    mul_pairs: Vec<(u32, u32)>,
    /// For entry `i = a·rest`: all `(rest|S, a·(rest|S^c))` index pairs.
    exp_start: Vec<u32>,
    exp_pairs: Vec<(u32, u32)>,
    conj_perm: Vec<u32>,
}

type ShapeCache = Mutex<HashMap<(usize, usize), Arc<JetShape>>>;

impl JetShape {
    /// Shared tables for `(n, order)`.
    pub fn get(n: usize, order: usize) -> Arc<JetShape> {
        assert!(n >= 1, "dimension must be positive");
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        static CACHE: OnceLock<ShapeCache> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("shape cache poisoned");
        guard
            .entry((n, order))
            .or_insert_with(|| Arc::new(JetShape::build(n, order)))
            .clone()
    }

    fn build(n: usize, order: usize) -> JetShape {
        let base = 2 * n + 1;
        let mut offsets = vec![0usize];
        for k in 0..=order {
            offsets.push(offsets[k] + base.pow(k as u32));
        }
        let len = offsets[order + 1];
        let mut words = Vec::with_capacity(len);
        for k in 0..=order {
            for mut code in 0..base.pow(k as u32) {
                let mut w = Vec::with_capacity(k);
                for _ in 0..k {
                    w.push((code % base) as u8);
                    code /= base;
                }
                words.push(w);
            }
        }
        let mut shape = JetShape {
            n,
            order,
            base,
            offsets,
            words,
            mul_start: vec![0],
            mul_pairs: Vec::new(),
            exp_start: vec![0],
            exp_pairs: Vec::new(),
            conj_perm: Vec::with_capacity(len),
        };
        for i in 0..len {
            let w = shape.words[i].clone();
            let k = w.len();
            for mask in 0..(1u32 << k) {
                let (s, c) = split(&w, mask);
                shape
                    .mul_pairs
                    .push((shape.index_codes(&s) as u32, shape.index_codes(&c) as u32));
            }
            shape.mul_start.push(shape.mul_pairs.len() as u32);
            if k >= 1 {
                let rest = &w[1..];
                for mask in 0..(1u32 << (k - 1)) {
                    let (s, c) = split(rest, mask);
                    let mut ac = vec![w[0]];
                    ac.extend_from_slice(&c);
                    shape
                        .exp_pairs
                        .push((shape.index_codes(&s) as u32, shape.index_codes(&ac) as u32));
                }
            }
            shape.exp_start.push(shape.exp_pairs.len() as u32);
            let cw: Vec<u8> = w
                .iter()
                .map(|&c| Letter::from_code(c as usize, n).conj().code(n) as u8)
                .collect();
            shape.conj_perm.push(shape.index_codes(&cw) as u32);
        }
        shape
    }

    fn index_codes(&self, w: &[u8]) -> usize {
        let mut idx = 0;
        let mut p = 1;
        for &c in w {
            idx += c as usize * p;
            p *= self.base;
        }
        self.offsets[w.len()] + idx
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Number of entries of order at most `k`.
    pub fn len_upto(&self, k: usize) -> usize {
        self.offsets[k.min(self.order) + 1]
    }

    pub fn index(&self, w: &[Letter]) -> Option<usize> {
        if w.len() > self.order {
            return None;
        }
        let mut codes = Vec::with_capacity(w.len());
        for l in w {
            if matches!(l, Letter::Z(a) | Letter::Zb(a) if *a >= self.n) {
                return None;
            }
            codes.push(l.code(self.n) as u8);
        }
        Some(self.index_codes(&codes))
    }

    pub fn word(&self, i: usize) -> Vec<Letter> {
        self.words[i]
            .iter()
            .map(|&c| Letter::from_code(c as usize, self.n))
            .collect()
    }

    pub fn word_len(&self, i: usize) -> usize {
        self.words[i].len()
    }

    fn mul_pairs(&self, i: usize) -> &[(u32, u32)] {
        &self.mul_pairs[self.mul_start[i] as usize..self.mul_start[i + 1] as usize]
    }

    fn exp_pairs(&self, i: usize) -> &[(u32, u32)] {
        &self.exp_pairs[self.exp_start[i] as usize..self.exp_start[i + 1] as usize]
    }
}

fn split(w: &[u8], mask: u32) -> (Vec<u8>, Vec<u8>) {
    let mut s = Vec::new();
    let mut c = Vec::new();
    for (i, &x) in w.iter().enumerate() {
        if mask & (1 << i) != 0 {
            s.push(x);
        } else {
            c.push(x);
        }
    }
    (s, c)
}

/// Derivative jet of a scalar function at a point.
#[derive(Clone, Debug)]
pub struct Jet<S = Complex64> {
    shape: Arc<JetShape>,
    data: Vec<S>,
}

impl<S: JetScalar> Jet<S> {
    pub fn from_fn(n: usize, order: usize, mut f: impl FnMut(&[Letter]) -> S) -> Self {
        let shape = JetShape::get(n, order);
        let data = (0..shape.len()).map(|i| f(&shape.word(i))).collect();
        Jet { shape, data }
    }

    pub fn from_values(n: usize, order: usize, data: Vec<S>) -> Self {
        let shape = JetShape::get(n, order);
        assert_eq!(data.len(), shape.len(), "jet storage length");
        Jet { shape, data }
    }

    pub fn constant(n: usize, order: usize, c: S) -> Self {
        let shape = JetShape::get(n, order);
        let mut data = vec![S::zero(); shape.len()];
        data[0] = c;
        Jet { shape, data }
    }

    pub fn shape(&self) -> &Arc<JetShape> {
        &self.shape
    }

    pub fn n(&self) -> usize {
        self.shape.n
    }

    pub fn order(&self) -> usize {
        self.shape.order
    }

    pub fn values(&self) -> &[S] {
        &self.data
    }

    pub fn value(&self) -> &S {
        &self.data[0]
    }

    pub fn get(&self, w: &[Letter]) -> &S {
        let i = self
            .shape
            .index(w)
            .unwrap_or_else(|| panic!("word {} not stored in this jet", word_name(w)));
        &self.data[i]
    }

    pub fn try_get(&self, w: &[Letter]) -> Option<&S> {
        self.shape.index(w).map(|i| &self.data[i])
    }

    pub fn set(&mut self, w: &[Letter], v: S) {
        let i = self.shape.index(w).expect("word not stored in this jet");
        self.data[i] = v;
    }

    pub fn map<T: JetScalar>(&self, f: impl Fn(&S) -> T) -> Jet<T> {
        Jet {
            shape: self.shape.clone(),
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn truncate(&self, order: usize) -> Self {
        if order >= self.order() {
            return self.clone();
        }
        let shape = JetShape::get(self.n(), order);
        Jet {
            data: self.data[..shape.len()].to_vec(),
            shape,
        }
    }

    /// The jet of `L f` for a letter `L`; one order lower.
    pub fn derivative(&self, l: Letter) -> Self {
        assert!(self.order() >= 1, "cannot differentiate an order-0 jet");
        let shape = JetShape::get(self.n(), self.order() - 1);
        let c = l.code(self.n()) as u8;
        let data = (0..shape.len())
            .map(|i| {
                let mut w = vec![c];
                w.extend_from_slice(&shape.words[i]);
                self.data[self.shape.index_codes(&w)].clone()
            })
            .collect();
        Jet { shape, data }
    }

    fn common_shape(&self, o: &Self) -> Arc<JetShape> {
        assert_eq!(self.n(), o.n(), "jet dimension mismatch");
        if self.order() <= o.order() {
            self.shape.clone()
        } else {
            o.shape.clone()
        }
    }

    fn zip(&self, o: &Self, f: impl Fn(&S, &S) -> S) -> Self {
        let shape = self.common_shape(o);
        let data = (0..shape.len())
            .map(|i| f(&self.data[i], &o.data[i]))
            .collect();
        Jet { shape, data }
    }

    pub fn scale(&self, c: &S) -> Self {
        self.map(|x| x.clone() * c.clone())
    }

    pub fn scale_re(&self, c: f64) -> Self {
        self.scale(&S::real(c))
    }

    pub fn add_constant(&self, c: &S) -> Self {
        let mut out = self.clone();
        out.data[0] = out.data[0].clone() + c.clone();
        out
    }

    pub fn conj(&self) -> Self {
        let data = (0..self.data.len())
            .map(|i| self.data[self.shape.conj_perm[i] as usize].conj())
            .collect();
        Jet {
            shape: self.shape.clone(),
            data,
        }
    }

    /// Real part `(f + f̄)/2`.
    pub fn re(&self) -> Self {
        (self + &self.conj()).scale_re(0.5)
    }

    pub fn mul_jet(&self, o: &Self) -> Self {
        let shape = self.common_shape(o);
        let data = (0..shape.len())
            .map(|i| {
                let mut acc = S::zero();
                for &(a, b) in shape.mul_pairs(i) {
                    acc = acc + self.data[a as usize].clone() * o.data[b as usize].clone();
                }
                acc
            })
            .collect();
        Jet { shape, data }
    }

    pub fn recip(&self) -> Self {
        let shape = self.shape.clone();
        let inv0 = self.data[0].recip();
        let mut r: Vec<S> = Vec::with_capacity(shape.len());
        r.push(inv0.clone());
        for i in 1..shape.len() {
            let mut acc = S::zero();
            for &(a, b) in shape.mul_pairs(i) {
                if a == 0 {
                    continue;
                }
                acc = acc + self.data[a as usize].clone() * r[b as usize].clone();
            }
            r.push(-(acc * inv0.clone()));
        }
        Jet { shape, data: r }
    }

    pub fn div_jet(&self, o: &Self) -> Self {
        self.mul_jet(&o.recip())
    }

    pub fn exp(&self) -> Self {
        let shape = self.shape.clone();
        let mut v: Vec<S> = Vec::with_capacity(shape.len());
        v.push(self.data[0].exp());
        for i in 1..shape.len() {
            let mut acc = S::zero();
            for &(a, b) in shape.exp_pairs(i) {
                acc = acc + v[a as usize].clone() * self.data[b as usize].clone();
            }
            v.push(acc);
        }
        Jet { shape, data: v }
    }

    /// Principal logarithm; the value must be nonzero.
    pub fn ln(&self) -> Self {
        let shape = self.shape.clone();
        let r = self.recip();
        let mut l: Vec<S> = Vec::with_capacity(shape.len());
        l.push(self.data[0].ln());
        for i in 1..shape.len() {
            let mut acc = S::zero();
            for &(a, b) in shape.exp_pairs(i) {
                acc = acc + r.data[a as usize].clone() * self.data[b as usize].clone();
            }
            l.push(acc);
        }
        Jet { shape, data: l }
    }

    pub fn powi(&self, k: i32) -> Self {
        if k < 0 {
            return self.powi(-k).recip();
        }
        let mut acc = Jet::constant(self.n(), self.order(), S::one());
        let mut base = self.clone();
        let mut e = k as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_jet(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_jet(&base);
            }
        }
        acc
    }

    /// `exp(p ln f)`; intended for functions with positive value.
    pub fn powf(&self, p: f64) -> Self {
        self.ln().scale_re(p).exp()
    }

    /// Composition `φ ∘ f` for a function of one variable, given the values
    /// `φ(f0), φ'(f0), φ''(f0), ...` up to the jet order (Faà di Bruno
    /// through the ordered set-partition recursion).
    pub fn compose(&self, derivs: &[S]) -> Self {
        assert!(
            derivs.len() > self.order(),
            "need derivatives up to the jet order"
        );
        // Build the jets of φ^{(j)}∘f recursively from the highest order down:
        // (φ^{(j)}∘f)_{a·rest} = (φ^{(j+1)}∘f · f_a)_{rest}.
        let k = self.order();
        let shape = self.shape.clone();
        let mut level: Vec<S> = vec![derivs[k].clone()];
        for j in (0..k).rev() {
            let order = k - j;
            let sh = JetShape::get(self.n(), order);
            let mut v: Vec<S> = Vec::with_capacity(sh.len());
            v.push(derivs[j].clone());
            for i in 1..sh.len() {
                let mut acc = S::zero();
                for &(a, b) in sh.exp_pairs(i) {
                    acc = acc + level[a as usize].clone() * self.data[b as usize].clone();
                }
                v.push(acc);
            }
            level = v;
        }
        Jet { shape, data: level }
    }
}

impl<S: JetScalar> Add for &Jet<S> {
    type Output = Jet<S>;
    fn add(self, o: &Jet<S>) -> Jet<S> {
        self.zip(o, |a, b| a.clone() + b.clone())
    }
}

impl<S: JetScalar> Sub for &Jet<S> {
    type Output = Jet<S>;
    fn sub(self, o: &Jet<S>) -> Jet<S> {
        self.zip(o, |a, b| a.clone() - b.clone())
    }
}

impl<S: JetScalar> Mul for &Jet<S> {
    type Output = Jet<S>;
    fn mul(self, o: &Jet<S>) -> Jet<S> {
        self.mul_jet(o)
    }
}

impl<S: JetScalar> Neg for &Jet<S> {
    type Output = Jet<S>;
    fn neg(self) -> Jet<S> {
        self.map(|x| -x.clone())
    }
}

impl<S: JetScalar> Add for Jet<S> {
    type Output = Jet<S>;
    fn add(self, o: Jet<S>) -> Jet<S> {
        &self + &o
    }
}

impl<S: JetScalar> Sub for Jet<S> {
    type Output = Jet<S>;
    fn sub(self, o: Jet<S>) -> Jet<S> {
        &self - &o
    }
}

impl<S: JetScalar> Mul for Jet<S> {
    type Output = Jet<S>;
    fn mul(self, o: Jet<S>) -> Jet<S> {
        self.mul_jet(&o)
    }
}

impl<S: JetScalar> Neg for Jet<S> {
    type Output = Jet<S>;
    fn neg(self) -> Jet<S> {
        -&self
    }
}

impl Jet<Complex64> {
    /// Attach magnitudes for gauged arithmetic: the value carries its own
    /// modulus and each derivative entry of order `k` carries the largest
    /// modulus among the order-`k` entries.
    pub fn gauged(&self) -> Jet<Gauged> {
        let mut scale = vec![0.0f64; self.order() + 1];
        for (i, v) in self.data.iter().enumerate() {
            let k = self.shape.word_len(i);
            scale[k] = scale[k].max(v.norm());
        }
        let data = self
            .data
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let k = self.shape.word_len(i);
                if k == 0 {
                    Gauged::constant(*v)
                } else {
                    Gauged::new(*v, scale[k])
                }
            })
            .collect();
        Jet {
            shape: self.shape.clone(),
            data,
        }
    }
}

impl Jet<Gauged> {
    pub fn plain(&self) -> Jet<Complex64> {
        self.map(|g| g.value)
    }
}

#[cfg(test)]
mod tests;
