//! Evaluation: a compiled tape for fast repeated `f64` evaluation of many
//! outputs sharing subexpressions, and an exact rational evaluator.

use std::collections::HashMap;

use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};

use super::{Atom, Expr, Node};
use crate::error::{Error, Result};
use crate::hgroup::{ExactComplex, HPoint, Rational, Scalarization};

/// Relative imaginary part tolerated on a certified (real positive) operand.
const CERT_IMAG_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
enum Op {
    Const(Complex64),
    Z(usize),
    Zb(usize),
    T,
    Add(Vec<u32>),
    Mul(Vec<u32>),
    PowInt(u32, i32),
    PowPos(u32, f64),
    PowPrincipal(u32, f64),
    Exp(u32),
    LogPos(u32),
    LogPrincipal(u32),
}

/// Straight-line program evaluating a set of expressions.
#[derive(Debug, Clone)]
pub struct Tape {
    ops: Vec<Op>,
    outputs: Vec<u32>,
    max_index: Option<usize>,
}

fn check_certified(v: Complex64) -> Result<f64> {
    if v.re > 0.0 && v.im.abs() <= CERT_IMAG_TOL * v.re.max(1.0) {
        Ok(v.re)
    } else {
        Err(Error::Domain(format!(
            "certified operand is not real positive: {v}"
        )))
    }
}

impl Tape {
    pub fn compile(exprs: &[Expr]) -> Tape {
        let mut tape = Tape {
            ops: Vec::new(),
            outputs: Vec::with_capacity(exprs.len()),
            max_index: None,
        };
        let mut slots: HashMap<usize, u32> = HashMap::new();
        for e in exprs {
            let s = tape.emit(e, &mut slots);
            tape.outputs.push(s);
            tape.max_index = match (tape.max_index, e.max_index()) {
                (Some(a), Some(b)) => Some(a.max(b)),
                (a, b) => a.or(b),
            };
        }
        tape
    }

    fn emit(&mut self, e: &Expr, slots: &mut HashMap<usize, u32>) -> u32 {
        if let Some(&s) = slots.get(&e.ptr()) {
            return s;
        }
        let op = match e.node() {
            Node::Const(c) => Op::Const(c.approx()),
            Node::Atom(Atom::Z(a)) => Op::Z(*a),
            Node::Atom(Atom::Zb(a)) => Op::Zb(*a),
            Node::Atom(Atom::T) => Op::T,
            Node::Add(xs) => Op::Add(xs.iter().map(|x| self.emit(x, slots)).collect()),
            Node::Mul(xs) => Op::Mul(xs.iter().map(|x| self.emit(x, slots)).collect()),
            Node::Pow {
                base,
                exp,
                certified,
            } => {
                let b = self.emit(base, slots);
                if exp.is_integer() {
                    Op::PowInt(b, exp.to_integer() as i32)
                } else {
                    let p = *exp.numer() as f64 / *exp.denom() as f64;
                    if *certified {
                        Op::PowPos(b, p)
                    } else {
                        Op::PowPrincipal(b, p)
                    }
                }
            }
            Node::Exp(a) => Op::Exp(self.emit(a, slots)),
            Node::Log { arg, certified } => {
                let a = self.emit(arg, slots);
                if *certified {
                    Op::LogPos(a)
                } else {
                    Op::LogPrincipal(a)
                }
            }
        };
        self.ops.push(op);
        let s = (self.ops.len() - 1) as u32;
        slots.insert(e.ptr(), s);
        s
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn output_count(&self) -> usize {
        self.outputs.len()
    }

    fn check_point(&self, p: &HPoint<f64>) -> Result<()> {
        match self.max_index {
            Some(a) if a >= p.dim() => Err(Error::IndexOutOfRange {
                index: a,
                n: p.dim(),
            }),
            _ => Ok(()),
        }
    }

    /// Evaluates every op into `scratch`; returns the smallest certified
    /// operand value seen (`+inf` if none).
    fn run(&self, p: &HPoint<f64>, scratch: &mut Vec<Complex64>) -> Result<f64> {
        self.check_point(p)?;
        scratch.clear();
        scratch.reserve(self.ops.len());
        let z = p.z();
        let t = Complex64::new(*p.t(), 0.0);
        let mut min_cert = f64::INFINITY;
        for op in &self.ops {
            let v = match op {
                Op::Const(c) => *c,
                Op::Z(a) => z[*a],
                Op::Zb(a) => z[*a].conj(),
                Op::T => t,
                Op::Add(xs) => xs.iter().map(|&i| scratch[i as usize]).sum(),
                Op::Mul(xs) => xs
                    .iter()
                    .fold(Complex64::one(), |acc, &i| acc * scratch[i as usize]),
                Op::PowInt(b, k) => {
                    let base = scratch[*b as usize];
                    if *k < 0 && base.is_zero() {
                        return Err(Error::Domain("negative power of zero".into()));
                    }
                    base.powi(*k)
                }
                Op::PowPos(b, pw) => {
                    let x = check_certified(scratch[*b as usize])?;
                    min_cert = min_cert.min(x);
                    Complex64::new(x.powf(*pw), 0.0)
                }
                Op::PowPrincipal(b, pw) => scratch[*b as usize].powf(*pw),
                Op::Exp(a) => scratch[*a as usize].exp(),
                Op::LogPos(a) => {
                    let x = check_certified(scratch[*a as usize])?;
                    min_cert = min_cert.min(x);
                    Complex64::new(x.ln(), 0.0)
                }
                Op::LogPrincipal(a) => {
                    let x = scratch[*a as usize];
                    if x.is_zero() {
                        return Err(Error::Domain("logarithm of zero".into()));
                    }
                    x.ln()
                }
            };
            scratch.push(v);
        }
        Ok(min_cert)
    }

    pub fn eval(&self, p: &HPoint<f64>) -> Result<Vec<Complex64>> {
        let mut scratch = Vec::new();
        self.eval_with(p, &mut scratch)
    }

    pub fn eval_with(
        &self,
        p: &HPoint<f64>,
        scratch: &mut Vec<Complex64>,
    ) -> Result<Vec<Complex64>> {
        self.run(p, scratch)?;
        Ok(self.outputs.iter().map(|&i| scratch[i as usize]).collect())
    }

    /// Smallest value taken by any certified operand at `p`.
    pub fn min_certificate(&self, p: &HPoint<f64>) -> Result<f64> {
        let mut scratch = Vec::new();
        self.run(p, &mut scratch)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Exact(ExactComplex),
    Float(Complex64),
}

impl Value {
    pub fn to_c64(&self) -> Complex64 {
        match self {
            Value::Float(c) => *c,
            Value::Exact(q) => Complex64::new(
                q.re.to_f64().unwrap_or(f64::NAN),
                q.im.to_f64().unwrap_or(f64::NAN),
            ),
        }
    }
}

impl Expr {
    pub fn eval(&self, p: &HPoint<f64>) -> Result<Complex64> {
        Ok(Tape::compile(std::slice::from_ref(self)).eval(p)?[0])
    }

    /// Exact evaluation; fails on `exp`, `log` and non-integer powers.
    pub fn eval_exact(&self, p: &HPoint<Rational>) -> Result<ExactComplex> {
        if let Some(a) = self.max_index() {
            if a >= p.dim() {
                return Err(Error::IndexOutOfRange {
                    index: a,
                    n: p.dim(),
                });
            }
        }
        let mut memo = HashMap::new();
        self.exact_rec(p, &mut memo)
    }

    fn exact_rec(
        &self,
        p: &HPoint<Rational>,
        memo: &mut HashMap<usize, ExactComplex>,
    ) -> Result<ExactComplex> {
        if let Some(v) = memo.get(&self.ptr()) {
            return Ok(v.clone());
        }
        let zero = ExactComplex::new(Rational::zero(), Rational::zero());
        let v = match self.node() {
            Node::Const(c) => c.exact().clone(),
            Node::Atom(Atom::Z(a)) => p.z()[*a].clone(),
            Node::Atom(Atom::Zb(a)) => p.z()[*a].conj(),
            Node::Atom(Atom::T) => ExactComplex::new(p.t().clone(), Rational::zero()),
            Node::Add(xs) => {
                let mut acc = zero;
                for x in xs {
                    acc += x.exact_rec(p, memo)?;
                }
                acc
            }
            Node::Mul(xs) => {
                let mut acc = ExactComplex::new(Rational::one(), Rational::zero());
                for x in xs {
                    acc *= x.exact_rec(p, memo)?;
                }
                acc
            }
            Node::Pow { base, exp, .. } => {
                if !exp.is_integer() {
                    return Err(Error::NotRational("non-integer power"));
                }
                let b = base.exact_rec(p, memo)?;
                super::exact_pow(&b, exp.to_integer())
                    .ok_or_else(|| Error::Domain("negative power of zero".into()))?
            }
            Node::Exp(_) => return Err(Error::NotRational("exp")),
            Node::Log { .. } => return Err(Error::NotRational("log")),
        };
        memo.insert(self.ptr(), v.clone());
        Ok(v)
    }

    pub fn eval_in(&self, p: &HPoint<f64>, mode: Scalarization) -> Result<Value> {
        match mode {
            Scalarization::Float64 => self.eval(p).map(Value::Float),
            Scalarization::ExactRational => self.eval_exact(&p.to_exact()).map(Value::Exact),
        }
    }
}
