use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use super::record::{Recorder, Rule};
use super::{GridMember, RunConfig, SuiteId, CORPUS};
use crate::error::{Error, Result};
use crate::expr::{
    check_commutation, commutation_sides, parse, parse_corpus, Expr, Tape, COMMUTATION_RULES,
};
use crate::hgroup::{random_exact_point, sample_box, volume_exponent, HPoint};
use crate::jets::{compare_jets, fd_convergence, jet_fd, FdOptions, JetProgram};
use crate::jltensor::{
    bochner_identity_residual, bochner_residual, bochner_residual_with, divergence_residual,
    dt_identity_residual, f_from_u, frame_of, frame_unchecked, pointwise_checks, BochnerConstants,
    CheckKind, FrameMode,
};
use crate::mc::{chunk_rng, derive_seed};
use crate::solutions::{
    bubble_expr, decay_check, derive_amplitude, divergence_integral, global_gradient_sup,
    gradient_estimate_check, homogeneous_dim, lemma_pipeline, lower_bound_check,
    transform_solution, Bubble, BumpField, Cutoff, CutoffSpec, EuclideanBubble, ResidualProgram,
    AMPLITUDE_PROBES,
};

const GROUP_LAW: &str = "(z,t)∘(w,s) = (z+w, t+s+2Im(z·w̄))";
const CRITICAL_PDE: &str = "−Δu = 2n² u^{q*}, q* = (n+2)/n";
const LOG_PDE: &str = "−Δf = 2n|∂f|² + 2n e^{2f}, f = (1/n) log u";

/// Points are drawn from `0.5 ≤ |ξ| ≤ 3`; points where a positivity
/// certificate drops below this are redrawn.
const MIN_CERTIFICATE: f64 = 1e-6;
const VOLUME_RADII: [f64; 4] = [0.5, 1.0, 2.0, 4.0];
const VOLUME_SAMPLES: usize = 200_000;
const DECAY_RADII: [f64; 4] = [1.0, 10.0, 100.0, 1000.0];
const LOWER_BOUND_RADII: [f64; 4] = [10.0, 100.0, 1000.0, 10_000.0];
const GRADIENT_RADII: [f64; 3] = [10.0, 100.0, 1000.0];
const CLOSURE_TRANSFORMS: usize = 20;
const CLOSURE_POINTS: usize = 20;
const BETAS: [f64; 3] = [0.01, 0.1, 0.5];
const NUS: [f64; 3] = [0.1, 1.0, 10.0];
const QUADRATURE_FIELDS: usize = 5;
/// A few functions that are not solutions; the PDE gate must reject them.
const NON_SOLUTIONS: [&str; 3] = ["pow(add(mul(z1,zb1),1),-1)", "exp(t)", "1 + z1*zb1 + t^2"];

struct Ctx<'a> {
    cfg: &'a RunConfig,
    suite: SuiteId,
    dims: Vec<usize>,
    samples: usize,
    seed: u64,
}

impl Ctx<'_> {
    fn seed_for(&self, n: usize, tag: u64) -> u64 {
        derive_seed(derive_seed(self.seed, n as u64), tag)
    }

    fn members(&self, n: usize) -> Vec<GridMember> {
        self.cfg.grid.members(n, self.cfg.seed)
    }

    fn inputs(&self, n: usize, extra: serde_json::Value) -> serde_json::Value {
        json!({
            "suite": self.suite.name(),
            "n": n,
            "seed": self.cfg.seed,
            "samples": self.samples,
            "grid": self.cfg.grid,
            "radii": self.cfg.radii,
            "extra": extra,
        })
    }
}

pub(super) fn run(suite: SuiteId, cfg: &RunConfig, rec: &mut Recorder<'_>) -> Result<()> {
    let ctx = Ctx {
        cfg,
        suite,
        dims: if cfg.dims.is_empty() {
            suite.default_dims()
        } else {
            cfg.dims.clone()
        },
        samples: cfg.samples.unwrap_or(suite.default_samples()),
        seed: derive_seed(cfg.seed, suite as u64),
    };
    match suite {
        SuiteId::VerifyGroup => group(&ctx, rec),
        SuiteId::VerifyCommutators => commutators(&ctx, rec),
        SuiteId::VerifyJets => jets(&ctx, rec),
        SuiteId::VerifyBubble => bubble(&ctx, rec),
        SuiteId::VerifyIdentity => identity(&ctx, rec),
        SuiteId::VerifyInequalities => inequalities(&ctx, rec),
        SuiteId::VerifyAppendix => appendix(&ctx, rec),
        SuiteId::VerifyIntegrals => integrals(&ctx, rec),
        SuiteId::VerifyEuclidean => euclidean(&ctx, rec),
        SuiteId::All => unreachable!("expanded by run_suite"),
    }
}

/// `f(i, rng_i)` for `i < count` in parallel, returned in index order.
fn par_indexed<T, F>(count: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> T + Sync,
{
    (0..count)
        .into_par_iter()
        .map(|i| f(i, &mut chunk_rng(seed, i as u64)))
        .collect()
}

fn annulus_point(rng: &mut ChaCha8Rng, n: usize) -> HPoint<f64> {
    loop {
        let p = sample_box(rng, n, 3.0);
        let r = p.norm();
        if (0.5..=3.0).contains(&r) {
            return p;
        }
    }
}

/// An annulus point where `cert` is at least [`MIN_CERTIFICATE`].
fn certified_point(
    rng: &mut ChaCha8Rng,
    n: usize,
    cert: &(dyn Fn(&HPoint<f64>) -> Result<f64> + Sync),
) -> Result<HPoint<f64>> {
    for _ in 0..1000 {
        let p = annulus_point(rng, n);
        if matches!(cert(&p), Ok(c) if c >= MIN_CERTIFICATE) {
            return Ok(p);
        }
    }
    Err(Error::Domain(
        "no point with a positive certificate in 1000 draws".into(),
    ))
}

/// Worst value of a batch under `rule`: the maximum for `AtMost`, the
/// minimum for `Slack`. A NaN is the worst possible value. Errors are
/// collected into a message.
fn worst<I>(values: I, rule: Rule) -> std::result::Result<f64, String>
where
    I: IntoIterator<Item = Result<f64>>,
{
    let mut acc: Option<f64> = None;
    let mut errors = 0usize;
    let mut first = None;
    let mut total = 0usize;
    for v in values {
        total += 1;
        match v {
            Ok(x) => {
                let w = if x.is_nan() {
                    match rule {
                        Rule::Slack => f64::NEG_INFINITY,
                        _ => f64::INFINITY,
                    }
                } else {
                    x
                };
                acc = Some(match (acc, rule) {
                    (None, _) => w,
                    (Some(a), Rule::Slack) => a.min(w),
                    (Some(a), _) => a.max(w),
                });
            }
            Err(e) => {
                errors += 1;
                first.get_or_insert(e.to_string());
            }
        }
    }
    if errors > 0 {
        return Err(format!(
            "evaluation failed at {errors} of {total} samples: {}",
            first.unwrap_or_default()
        ));
    }
    acc.ok_or_else(|| "no samples".to_string())
}

fn record(
    rec: &mut Recorder<'_>,
    id: String,
    anchor: &str,
    inputs: serde_json::Value,
    rule: Rule,
    outcome: std::result::Result<f64, String>,
    note: Option<String>,
) {
    match outcome {
        Ok(v) => rec.check(id, anchor, inputs, v, rule, note),
        Err(msg) => rec.failed(id, anchor, inputs, rule, msg),
    }
}

/// `base[a,b]` + `c` → `base[a,b,c]`; `base` + `c` → `base[c]`.
fn qualify(id: &str, extra: &str) -> String {
    match id.strip_suffix(']') {
        Some(head) => format!("{head},{extra}]"),
        None => format!("{id}[{extra}]"),
    }
}

fn needed_dim(e: &Expr) -> usize {
    e.max_index().map_or(1, |i| i + 1)
}

/// Built-in corpus, or the user expression alone.
fn corpus(ctx: &Ctx<'_>) -> Result<Vec<(String, Expr)>> {
    if let Some(text) = &ctx.cfg.expr {
        return Ok(vec![("user".to_string(), parse(text)?)]);
    }
    Ok(parse_corpus(CORPUS)?
        .into_iter()
        .enumerate()
        .map(|(k, e)| (format!("{}", k + 1), e))
        .collect())
}

fn member_bubble(m: &GridMember) -> Result<Bubble> {
    Bubble::new(m.n, m.lambda, m.mu.clone())
}

fn ratio_band(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

fn group(ctx: &Ctx<'_>, rec: &mut Recorder<'_>) -> Result<()> {
    for &n in &ctx.dims {
        let seed = ctx.seed_for(n, 0);
        let inputs = ctx.inputs(
            n,
            json!({"coordinates": "rationals p/q, |p| ≤ 128, q ≤ 16"}),
        );
        let flags = par_indexed(ctx.samples, seed, |_, rng| -> Result<[bool; 3]> {
            let a = random_exact_point(rng, n);
            let b = random_exact_point(rng, n);
            let c = random_exact_point(rng, n);
            let e = HPoint::identity(n)?;
            let assoc = a.mul(&b)?.mul(&c)? == a.mul(&b.mul(&c)?)?;
            let ident = a.mul(&e)? == a && e.mul(&a)? == a;
            let inv = a.mul(&a.inverse())?.is_identity() && a.inverse().mul(&a)?.is_identity();
            Ok([assoc, ident, inv])
        });
        let flags: Vec<[bool; 3]> = flags.into_iter().collect::<Result<_>>()?;
        for (k, (name, anchor)) in [
            ("group-associativity", "(ξ∘η)∘ζ = ξ∘(η∘ζ)"),
            ("group-identity", "ξ∘0 = 0∘ξ = ξ"),
            ("group-inverse", "ξ∘ξ⁻¹ = ξ⁻¹∘ξ = 0, (z,t)⁻¹ = (−z,−t)"),
        ]
        .into_iter()
        .enumerate()
        {
            let failures = flags.iter().filter(|f| !f[k]).count();
            rec.check(
                format!("{name}[n={n}]"),
                &format!("{anchor}; {GROUP_LAW}"),
                inputs.clone(),
                failures as f64,
                Rule::AtMost,
                Some(format!(
                    "failing triples out of {} (exact arithmetic)",
                    ctx.samples
                )),
            );
        }

        let hom = par_indexed(ctx.samples, ctx.seed_for(n, 1), |_, rng| {
            let p = sample_box(rng, n, 3.0);
            let s = rng.random_range(-3.0f64..3.0).exp();
            let want = s * p.norm();
            Ok((p.dilate(s)?.norm() - want).abs() / want.max(1e-300))
        });
        record(
            rec,
            format!("norm-homogeneity[n={n}]"),
            "|δ_s ξ| = s|ξ|, δ_s(z,t) = (sz, s²t), |ξ| = (|z|⁴ + t²)^{1/4}",
            inputs.clone(),
            Rule::AtMost,
            worst(hom, Rule::AtMost),
            None,
        );

        let inv = par_indexed(ctx.samples, ctx.seed_for(n, 2), |_, rng| {
            let z = sample_box(rng, n, 3.0);
            let x = sample_box(rng, n, 3.0);
            let y = sample_box(rng, n, 3.0);
            let moved = z.mul(&x)?.distance(&z.mul(&y)?)?;
            let d = x.distance(&y)?;
            Ok((moved - d).abs() / (z.norm() + x.norm() + y.norm()))
        });
        record(
            rec,
            format!("left-invariance[n={n}]"),
            "d(ζ∘ξ, ζ∘η) = d(ξ, η), d(ξ, η) = |η⁻¹∘ξ|",
            inputs.clone(),
            Rule::AtMost,
            worst(inv, Rule::AtMost),
            Some("deviation relative to |ζ| + |ξ| + |η|".into()),
        );

        let q = homogeneous_dim(n);
        match volume_exponent(n, &VOLUME_RADII, VOLUME_SAMPLES, ctx.seed_for(n, 3)) {
            Ok(fit) => {
                rec.check(
                    format!("volume-slope[n={n}]"),
                    "|B_R| = C R^Q, Q = 2n + 2",
                    ctx.inputs(
                        n,
                        json!({"radii": VOLUME_RADII, "draws_per_radius": VOLUME_SAMPLES}),
                    ),
                    fit.slope,
                    Rule::Near { target: q },
                    Some(format!(
                        "fitted constant C = {:.6} (reported, not checked)",
                        fit.constant
                    )),
                );
                rec.series(
                    format!("volume-n{n}"),
                    ["R", "volume"],
                    fit.points.iter().map(|(r, e)| [*r, e.value]).collect(),
                );
            }
            Err(e) => rec.failed(
                format!("volume-slope[n={n}]"),
                "|B_R| = C R^Q",
                inputs.clone(),
                Rule::Near { target: q },
                e.to_string(),
            ),
        }
    }
    Ok(())
}

fn commutators(ctx: &Ctx<'_>, rec: &mut Recorder<'_>) -> Result<()> {
    let anchor = COMMUTATION_RULES.join("; ");
    let exprs = corpus(ctx)?;
    rec.note(
        "commutators: polynomials are checked by exact simplification of each residual; other expressions \
         numerically, relative to the largest side of any rule at the point",
    );
    for &n in &ctx.dims {
        let triples: Vec<(usize, usize, usize)> = (0..n)
            .flat_map(|a| (0..n).flat_map(move |b| (0..n).map(move |c| (a, b, c))))
            .collect();
        for (label, e) in &exprs {
            let need = needed_dim(e);
            if need > n {
                rec.skip(
                    format!("commutators[n={n},expr={label}]"),
                    format!("expression uses index {need} > n = {n}"),
                );
                continue;
            }
            let inputs = ctx.inputs(n, json!({"expr": e.to_string()}));
            if e.is_polynomial() {
                let counts: Vec<Result<usize>> = triples
                    .par_iter()
                    .map(|&(a, b, c)| {
                        Ok(check_commutation(e, a, b, c)?
                            .iter()
                            .filter(|r| !r.is_zero())
                            .count())
                    })
                    .collect();
                let outcome = counts
                    .into_iter()
                    .collect::<Result<Vec<_>>>()
                    .map(|v| v.into_iter().sum::<usize>() as f64)
                    .map_err(|err| err.to_string());
                record(
                    rec,
                    format!("commutators-symbolic[n={n},expr={label}]"),
                    &anchor,
                    inputs,
                    Rule::AtMost,
                    outcome,
                    Some(format!(
                        "nonzero residuals over {} index triples",
                        triples.len()
                    )),
                );
                continue;
            }
            let sides: Result<Vec<Expr>> = triples
                .par_iter()
                .map(|&(a, b, c)| {
                    Ok(commutation_sides(e, a, b, c)?
                        .into_iter()
                        .flat_map(|(l, r)| [l, r])
                        .collect::<Vec<_>>())
                })
                .collect::<Result<Vec<Vec<Expr>>>>()
                .map(|v| v.into_iter().flatten().collect());
            let outcome = sides.map_err(|err| err.to_string()).and_then(|sides| {
                let tape = Tape::compile(&sides);
                let value = Tape::compile(std::slice::from_ref(e));
                let cert = |p: &HPoint<f64>| value.min_certificate(p);
                let vals = par_indexed(ctx.samples, ctx.seed_for(n, 10), |_, rng| {
                    let p = certified_point(rng, n, &cert)?;
                    let v = tape.eval(&p)?;
                    let scale = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
                    let diff = v
                        .chunks(2)
                        .map(|s| (s[0] - s[1]).norm())
                        .fold(0.0, f64::max);
                    Ok(if scale > 0.0 { diff / scale } else { 0.0 })
                });
                worst(vals, Rule::AtMost)
            });
            record(
                rec,
                format!("commutators[n={n},expr={label}]"),
                &anchor,
                inputs,
                Rule::AtMost,
                outcome,
                None,
            );
        }
    }
    Ok(())
}

fn jets(ctx: &Ctx<'_>, rec: &mut Recorder<'_>) -> Result<()> {
    let exprs = corpus(ctx)?;
    let opts = FdOptions::default();
    let anchor = "symbolic jet = finite-difference jet along X_α, Y_α, ∂_t, Z_α = (X_α − iY_α)/2";
    for &n in &ctx.dims {
        let mut functions: Vec<(String, Expr)> = Vec::new();
        for (label, e) in &exprs {
            if needed_dim(e) > n {
                rec.skip(
                    format!("jets-agreement[n={n},expr={label}]"),
                    format!("expression uses index {} > n = {n}", needed_dim(e)),
                );
            } else {
                functions.push((format!("expr={label}"), e.clone()));
            }
        }
        if ctx.cfg.expr.is_none() {
            for (j, m) in ctx.members(n).iter().take(3).enumerate() {
                functions.push((format!("bubble={j}"), bubble_expr(&member_bubble(m)?)?));
            }
        }
        for (k, (label, e)) in functions.iter().enumerate() {
            let inputs = ctx.inputs(
                n,
                json!({"function": e.to_string(), "h": opts.h, "richardson": opts.richardson}),
            );
            let outcome = JetProgram::new(e, n, 3)
                .map_err(|err| err.to_string())
                .and_then(|prog| {
                    let tape = Tape::compile(std::slice::from_ref(e));
                    let eval = |q: &HPoint<f64>| Ok(tape.eval(q)?[0]);
                    let cert = |p: &HPoint<f64>| prog.min_certificate(p);
                    let vals =
                        par_indexed(ctx.samples, ctx.seed_for(n, 100 + k as u64), |_, rng| {
                            let p = certified_point(rng, n, &cert)?;
                            let sym = prog.eval(&p)?;
                            let fd = jet_fd(&eval, &p, &opts)?;
                            Ok(compare_jets(&fd, &sym)?.max_rel)
                        });
                    worst(vals, Rule::AtMost)
                });
            record(
                rec,
                format!("jets-agreement[n={n},{label}]"),
                anchor,
                inputs,
                Rule::AtMost,
                outcome,
                None,
            );
        }

        if let Some(m) = ctx.members(n).first() {
            let steps = [1e-2, 5e-3, 2.5e-3];
            let inputs = ctx.inputs(n, json!({"member": m, "steps": steps}));
            let outcome = (|| -> Result<(f64, f64)> {
                let u = bubble_expr(&member_bubble(m)?)?;
                let prog = JetProgram::new(&u, n, 1)?;
                let tape = Tape::compile(std::slice::from_ref(&u));
                let eval = |q: &HPoint<f64>| Ok(tape.eval(q)?[0]);
                let mut z = vec![Complex64::new(0.5, 0.0); n];
                z[0] = Complex64::new(1.0, 0.0);
                let reference = prog.eval(&HPoint::new(z, 1.0)?)?;
                let rich = fd_convergence(&eval, &reference, &steps, true)?;
                let plain = fd_convergence(&eval, &reference, &steps, false)?;
                Ok((rich.slope, plain.slope))
            })();
            match outcome {
                Ok((rich, plain)) => rec.check(
                    format!("fd-slope[n={n}]"),
                    "error ~ h⁴ after one Richardson step (R = (4D(h/2) − D(h))/3)",
                    inputs,
                    rich,
                    Rule::Near { target: 4.0 },
                    Some(format!("slope without extrapolation {plain:.3}")),
                ),
                Err(e) => rec.failed(
                    format!("fd-slope[n={n}]"),
                    "error ~ h⁴ after one Richardson step",
                    inputs,
                    Rule::Near { target: 4.0 },
                    e.to_string(),
                ),
            }
        }
    }
    Ok(())
}

fn bubble(ctx: &Ctx<'_>, rec: &mut Recorder<'_>) -> Result<()> {
    for &n in &ctx.dims {
        let members = ctx.members(n);
        if members.is_empty() {
            rec.skip(
                format!("bubble-residual[n={n}]"),
                format!("grid has no members with n = {n}"),
            );
            continue;
        }
        let inputs = ctx.inputs(
            n,
            json!({"members": members.len(), "probes": AMPLITUDE_PROBES}),
        );
        let nf = n as f64;

        // Amplitude from the constancy of −Δw / (2n² w^{q*}), then the residual
        // of the normalized bubble.
        let per_member: Vec<Result<(f64, f64, f64)>> = members
            .par_iter()
            .enumerate()
            .map(|(j, m)| {
                let d = match derive_amplitude(
                    n,
                    m.lambda,
                    &m.mu,
                    AMPLITUDE_PROBES,
                    ctx.seed_for(n, j as u64),
                ) {
                    Ok(d) => d,
                    Err(Error::NonConstantRatio { spread }) => {
                        return Ok((spread, f64::NAN, f64::NAN))
                    }
                    Err(e) => return Err(e),
                };
                let bound = m.mu.iter().map(|x| x.norm_sqr()).sum::<f64>() / 4.0;
                let closed = (m.lambda.im - bound).powf(nf / 2.0);
                let b = Bubble::with_amplitude(n, m.lambda, m.mu.clone(), d.amplitude)?;
                let prog = ResidualProgram::new(&bubble_expr(&b)?, n)?;
                let res = par_indexed(ctx.samples, ctx.seed_for(n, 1000 + j as u64), |_, rng| {
                    prog.residual(&annulus_point(rng, n))
                });
                let res = worst(res, Rule::AtMost).map_err(Error::Evaluator)?;
                Ok((d.spread, (d.amplitude - closed).abs() / closed, res))
            })
            .collect();
        let pick = |k: usize| {
            per_member.iter().map(move |r| match r {
                Ok(t) => Ok([t.0, t.1, t.2][k]),
                Err(e) => Err(e.clone()),
            })
        };
        record(
            rec,
            format!("amplitude-constancy[n={n}]"),
            "K = −Δw / (2n² w^{q*}) is constant for w = |t + i|z|² + z·μ + λ|^{−n}; C = K^{n/2}",
            inputs.clone(),
            Rule::AtMost,
            worst(pick(0), Rule::AtMost),
            Some("relative spread (max K − min K)/mean K over the probes".into()),
        );
        record(
            rec,
            format!("amplitude-closed-form[n={n}]"),
            "C = (Im λ − |μ|²/4)^{n/2}",
            inputs.clone(),
            Rule::AtMost,
            worst(pick(1), Rule::AtMost),
            None,
        );
        record(
            rec,
            format!("bubble-residual[n={n}]"),
            CRITICAL_PDE,
            inputs.clone(),
            Rule::AtMost,
            worst(pick(2), Rule::AtMost),
            Some("relative residual |−Δu − 2n²u^{q*}| / (2n²u^{q*})".into()),
        );

        let closure = par_indexed(
            CLOSURE_TRANSFORMS,
            ctx.seed_for(n, 2),
            |i, rng| -> Result<f64> {
                let b = member_bubble(&members[i % members.len()])?;
                let zeta = sample_box(rng, n, 2.0);
                let s = rng.random_range(-1.0f64..1.0).exp();
                let prog = ResidualProgram::new(&transform_solution(&b, &zeta, s)?, n)?;
                let vals = (0..CLOSURE_POINTS).map(|_| prog.residual(&annulus_point(rng, n)));
                worst(vals, Rule::AtMost).map_err(Error::Evaluator)
            },
        );
        record(
            rec,
            format!("family-closure[n={n}]"),
            &format!("v(ξ) = s^n u(ζ∘δ_s ξ) solves {CRITICAL_PDE}"),
            ctx.inputs(
                n,
                json!({"transforms": CLOSURE_TRANSFORMS, "points": CLOSURE_POINTS}),
            ),
            Rule::AtMost,
            worst(closure, Rule::AtMost),
            None,
        );

        let b0 = member_bubble(&members[0])?;
        let sphere = 20 * ctx.samples;
        let decay_radii = ctx.cfg.radii.clone().unwrap_or(DECAY_RADII.to_vec());
        let u0 = |p: &HPoint<f64>| b0.eval(p);
        let decay_inputs = ctx.inputs(
            n,
            json!({"member": members[0], "radii": decay_radii, "draws": sphere}),
        );
        match decay_check(&u0, n, &decay_radii, sphere, ctx.seed_for(n, 3)) {
            Ok(rows) => {
                let vals: Vec<f64> = rows.iter().map(|r| r.value).collect();
                let growth = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max) / vals[0];
                rec.check(
                    format!("decay[n={n}]"),
                    "sup_{|ξ|=R} u(ξ)(1 + R^{(Q−2)/2}) stays bounded",
                    decay_inputs,
                    growth,
                    Rule::AtMost,
                    Some(
                        "max over R of the weighted sup, relative to its value at the smallest R; \
                         bubbles decay like R^{2−Q}, so the boundary exponent (Q−2)/2 itself is not probed"
                            .into(),
                    ),
                );
                rec.series(
                    format!("decay-n{n}"),
                    ["R", "weighted_sup"],
                    rows.iter().map(|r| [r.r, r.value]).collect(),
                );
            }
            Err(e) => rec.failed(
                format!("decay[n={n}]"),
                "sup u(1 + R^{(Q−2)/2}) bounded",
                decay_inputs,
                Rule::AtMost,
                e.to_string(),
            ),
        }

        let lb_radii = ctx.cfg.radii.clone().unwrap_or(LOWER_BOUND_RADII.to_vec());
        let lb_inputs = ctx.inputs(
            n,
            json!({"member": members[0], "radii": lb_radii, "draws": sphere}),
        );
        let lb = bubble_expr(&b0)
            .and_then(|u| lower_bound_check(&u, n, &lb_radii, sphere, ctx.seed_for(n, 4)));
        match lb {
            Ok(rows) => {
                let vals: Vec<f64> = rows.iter().map(|r| r.value).collect();
                let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
                rec.check(
                    format!("lower-bound[n={n}]"),
                    "u(ξ) ≥ c|ξ|^{2−Q} for superharmonic u > 0",
                    lb_inputs,
                    ratio_band(&vals),
                    Rule::AtMost,
                    Some(format!(
                        "band max/min of inf u·R^{{Q−2}} over the radii; smallest value {min:.6e}"
                    )),
                );
                rec.series(
                    format!("lower-bound-n{n}"),
                    ["R", "inf_ratio"],
                    rows.iter().map(|r| [r.r, r.value]).collect(),
                );
            }
            Err(e) => rec.failed(
                format!("lower-bound[n={n}]"),
                "u(ξ) ≥ c|ξ|^{2−Q}",
                lb_inputs,
                Rule::AtMost,
                e.to_string(),
            ),
        }
    }
    Ok(())
}

struct IdentityStats {
    div: f64,
    pde: f64,
    m: f64,
}

fn identity_at(prog: &JetProgram, n: usize, samples: usize, seed: u64) -> Result<IdentityStats> {
    let cert = |p: &HPoint<f64>| prog.min_certificate(p);
    let div = par_indexed(samples, seed, |_, rng| -> Result<(f64, f64)> {
        let p = certified_point(rng, n, &cert)?;
        let r = divergence_residual(&f_from_u(&prog.eval(&p)?)?)?;
        Ok((r.residual, r.pde_residual))
    });
    let m = par_indexed(
        10 * samples,
        derive_seed(seed, 1),
        |_, rng| -> Result<f64> {
            let p = certified_point(rng, n, &cert)?;
            Ok(frame_of(&f_from_u(&prog.eval(&p)?)?, FrameMode::General)?.m_normalized())
        },
    );
    let div: Vec<(f64, f64)> = div.into_iter().collect::<Result<_>>()?;
    Ok(IdentityStats {
        div: worst(div.iter().map(|d| Ok(d.0)), Rule::AtMost).map_err(Error::Evaluator)?,
        pde: worst(div.iter().map(|d| Ok(d.1)), Rule::AtMost).map_err(Error::Evaluator)?,
        m: worst(m, Rule::AtMost).map_err(Error::Evaluator)?,
    })
}

const IDENTITY_ANCHOR: &str = "M = Re Σ_α Z_ᾱ Φ_α on solutions of −Δf = 2n|∂f|² + 2n e^{2f}";
const M_ANCHOR: &str = "M ≡ 0, M = e^{2nf}(|E|² + |D|²) + e^{2(n−1)f}(|G|² + |G+D|² + |G−E|² + Σ|D_{αβ}f_γ̄ + E_{αγ̄}f_β|²)";

fn identity(ctx: &Ctx<'_>, rec: &mut Recorder<'_>) -> Result<()> {
    if let Some(text) = &ctx.cfg.expr {
        return identity_expr(ctx, rec, text);
    }
    rec.note("identity and M are normalized by the magnitude of the terms they are built from");
    for &n in &ctx.dims {
        let members = ctx.members(n);
        if members.is_empty() {
            rec.skip(
                format!("divergence-identity[n={n}]"),
                format!("grid has no members with n = {n}"),
            );
            continue;
        }
        let inputs = ctx.inputs(
            n,
            json!({"members": members.len(), "m_points": 10 * ctx.samples}),
        );
        let stats: Vec<Result<IdentityStats>> = members
            .par_iter()
            .enumerate()
            .map(|(j, m)| {
                let prog = JetProgram::new(&bubble_expr(&member_bubble(m)?)?, n, 3)?;
                identity_at(&prog, n, ctx.samples, ctx.seed_for(n, j as u64))
            })
            .collect();
        let get = |f: fn(&IdentityStats) -> f64| {
            stats.iter().map(move |s| match s {
                Ok(s) => Ok(f(s)),
                Err(e) => Err(e.clone()),
            })
        };
        record(
            rec,
            format!("divergence-identity[n={n}]"),
            IDENTITY_ANCHOR,
            inputs.clone(),
            Rule::AtMost,
            worst(get(|s| s.div), Rule::AtMost),
            None,
        );
        record(
            rec,
            format!("pde-gate[n={n}]"),
            LOG_PDE,
            inputs.clone(),
            Rule::AtMost,
            worst(get(|s| s.pde), Rule::AtMost),
            None,
        );
        record(
            rec,
            format!("m-vanishes[n={n}]"),
            M_ANCHOR,
            inputs.clone(),
            Rule::AtMost,
            worst(get(|s| s.m), Rule::AtMost),
            None,
        );

        for (k, text) in NON_SOLUTIONS.iter().enumerate() {
            let e = parse(text)?;
            let id = format!("gate-negative[n={n},expr={}]", k + 1);
            if needed_dim(&e) > n {
                rec.skip(
                    id,
                    format!("expression uses index {} > n = {n}", needed_dim(&e)),
                );
                continue;
            }
            let prog = JetProgram::new(&e, n, 3)?;
            let cert = |p: &HPoint<f64>| prog.min_certificate(p);
            let accepted = par_indexed(
                ctx.samples,
                ctx.seed_for(n, 500 + k as u64),
                |_, rng| -> Result<bool> {
                    let p = certified_point(rng, n, &cert)?;
                    match divergence_residual(&f_from_u(&prog.eval(&p)?)?) {
                        Ok(_) => Ok(true),
                        Err(Error::GateRejected { .. }) => Ok(false),
                        Err(e) => Err(e),
                    }
                },
            );
            let outcome = accepted
                .into_iter()
                .collect::<Result<Vec<bool>>>()
                .map(|v| v.iter().filter(|a| **a).count() as f64 / v.len() as f64)
                .map_err(|e| e.to_string());
            record(
                rec,
                id,
                LOG_PDE,
                ctx.inputs(n, json!({"expr": text})),
                Rule::AtMost,
                outcome,
                Some("fraction of sample points where a non-solution passed the PDE gate".into()),
            );
        }
    }
    Ok(())
}

fn identity_expr(ctx: &Ctx<'_>, rec: &mut Recorder<'_>, text: &str) -> Result<()> {
    let e = parse(text)?;
    let need = needed_dim(&e);
    let dims = if ctx.cfg.dims.is_empty() {
        vec![need]
    } else {
        ctx.dims.clone()
    };
    for n in dims {
        let id = |base: &str| format!("{base}[n={n},expr=user]");
        if need > n {
            rec.skip(
                id("pde-gate"),
                format!("expression uses index {need} > n = {n}"),
            );
            continue;
        }
        let inputs = ctx.inputs(n, json!({"expr": text}));
        let prog = match JetProgram::new(&e, n, 3) {
            Ok(p) => p,
            Err(err) => {
                rec.failed(
                    id("pde-gate"),
                    LOG_PDE,
                    inputs,
                    Rule::AtMost,
                    err.to_string(),
                );
                continue;
            }
        };
        let cert = |p: &HPoint<f64>| prog.min_certificate(p);
        let rows = par_indexed(
            ctx.samples,
            ctx.seed_for(n, 0),
            |_, rng| -> Result<(f64, Option<(f64, f64)>)> {
                let p = certified_point(rng, n, &cert)?;
                let f = f_from_u(&prog.eval(&p)?)?;
                match divergence_residual(&f) {
                    Ok(r) => {
                        let m = frame_of(&f, FrameMode::General)?.m_normalized();
                        Ok((r.pde_residual, Some((r.residual, m))))
                    }
                    Err(Error::GateRejected { residual, .. }) => Ok((residual, None)),
                    Err(e) => Err(e),
                }
            },
        );
        let rows: Vec<_> = match rows.into_iter().collect::<Result<Vec<_>>>() {
            Ok(r) => r,
            Err(err) => {
                rec.failed(
                    id("pde-gate"),
                    LOG_PDE,
                    inputs,
                    Rule::AtMost,
                    err.to_string(),
                );
                continue;
            }
        };
        let rejected = rows.iter().filter(|r| r.1.is_none()).count();
        let note = if rejected > 0 {
            format!(
                "gate rejected {rejected} of {} points: the input is not a solution",
                rows.len()
            )
        } else {
            "gate accepted every point".to_string()
        };
        let pde = worst(rows.iter().map(|r| Ok(r.0)), Rule::AtMost);
        record(
            rec,
            id("pde-gate"),
            LOG_PDE,
            inputs.clone(),
            Rule::AtMost,
            pde,
            Some(note),
        );
        if rejected == 0 {
            let div = worst(
                rows.iter().map(|r| Ok(r.1.map_or(f64::NAN, |x| x.0))),
                Rule::AtMost,
            );
            let m = worst(
                rows.iter().map(|r| Ok(r.1.map_or(f64::NAN, |x| x.1))),
                Rule::AtMost,
            );
            record(
                rec,
                id("divergence-identity"),
                IDENTITY_ANCHOR,
                inputs.clone(),
                Rule::AtMost,
                div,
                None,
            );
            record(
                rec,
                id("m-vanishes"),
                M_ANCHOR,
                inputs,
                Rule::AtMost,
                m,
                None,
            );
        } else {
            rec.skip(id("divergence-identity"), "input rejected by the PDE gate");
        }
    }
    Ok(())
}

fn anchor_for(id: &str) -> &'static str {
    match id.split('[').next().unwrap_or(id) {
        "g-modulus" => "|g|² = (|∂f|² + e^{2f})² + f_0², g = |∂f|² + e^{2f} − i f_0",
        "m-nonnegative" => "M ≥ 0",
        "trick" => "Ψ^{−β} ≤ e^{−2βf}, Ψ = |g|² e^{−2f}",
        "p1" => "|(g+3if_0)E_α + (g−if_0)D_α − 3if_0G_α| ≤ 2|g| e^{−(n−1)f} √M",
        "p2" => "|Ψ_ᾱ| ≤ 2 e^{−2f}|g| e^{−(n−1)f} √M",
        "stima-efg" => "|D_ᾱ + E_ᾱ − G_ᾱ| ≤ e^{−(n−1)f} √M",
        "p1-generic" => "|(g+3if_0)E_α + (g−if_0)D_α − 3if_0G_α| ≤ 2√3|g| e^{−(n−1)f} √M",
        "p2-generic" => "|Ψ_ᾱ| ≤ 2√3 e^{−2f}|g| e^{−(n−1)f} √M",
        "stima-efg-generic" => "|D_ᾱ + E_ᾱ − G_ᾱ| ≤ √3 e^{−(n−1)f} √M",
        "gbar-expansion" => "ḡ_ᾱ = D_ᾱ + E_ᾱ − G_ᾱ + 2ḡ f_ᾱ",
        "gradient-relations" => {
            "g_ᾱ = D_ᾱ + E_ᾱ + G_ᾱ, (|∂f|²)_ᾱ = D_ᾱ + E_ᾱ + ḡ f_ᾱ − 2 f_ᾱ e^{2f}"
        }
        _ => "",
    }
}

/// Fold pointwise checks into worst values per id.
#[derive(Default)]
struct PointFold {
    worst: BTreeMap<String, (CheckKind, f64)>,
    errors: Vec<String>,
}

impl PointFold {
    fn add(&mut self, checks: Vec<crate::jltensor::PointCheck>, extra: &str) {
        for c in checks {
            let id = qualify(&c.id, extra);
            let v = if c.value.is_nan() {
                match c.kind {
                    CheckKind::Slack => f64::NEG_INFINITY,
                    CheckKind::Residual => f64::INFINITY,
                }
            } else {
                c.value
            };
            let e = self.worst.entry(id).or_insert((c.kind, v));
            e.1 = match c.kind {
                CheckKind::Slack => e.1.min(v),
                CheckKind::Residual => e.1.max(v),
            };
        }
    }

    fn merge(mut self, other: PointFold) -> Self {
        for (id, (kind, v)) in other.worst {
            let e = self.worst.entry(id).or_insert((kind, v));
            e.1 = match kind {
                CheckKind::Slack => e.1.min(v),
                CheckKind::Residual => e.1.max(v),
            };
        }
        self.errors.extend(other.errors);
        self
    }
}

fn fold_points<F>(count: usize, seed: u64, f: F) -> PointFold
where
    F: Fn(&mut ChaCha8Rng) -> Result<PointFold> + Sync,
{
    par_indexed(count, seed, |_, rng| {
        f(rng).unwrap_or_else(|e| PointFold {
            errors: vec![e.to_string()],
            ..Default::default()
        })
    })
    .into_iter()
    .fold(PointFold::default(), PointFold::merge)
}

fn emit_fold(rec: &mut Recorder<'_>, fold: PointFold, inputs: serde_json::Value, fail_id: String) {
    if let Some(first) = fold.errors.first() {
        rec.failed(
            fail_id,
            "",
            inputs.clone(),
            Rule::AtMost,
            format!(
                "evaluation failed at {} samples: {first}",
                fold.errors.len()
            ),
        );
    }
    for (id, (kind, v)) in fold.worst {
        let rule = match kind {
            CheckKind::Slack => Rule::Slack,
            CheckKind::Residual => Rule::AtMost,
        };
        rec.check(id.clone(), anchor_for(&id), inputs.clone(), v, rule, None);
    }
}

fn inequalities(ctx: &Ctx<'_>, rec: &mut Recorder<'_>) -> Result<()> {
    rec.note(
        "inequalities: slacks are (rhs − |lhs|)/magnitude(lhs); sharp-constant bounds are checked only where the \
         PDE gate passes, the √3 forms for any real f",
    );
    let tol = rec.tolerances().clone();
    let exprs = corpus(ctx)?;
    for &n in &ctx.dims {
        let members = ctx.members(n);
        if ctx.cfg.expr.is_none() {
            let inputs = ctx.inputs(n, json!({"members": members.len(), "betas": BETAS}));
            let folds: Vec<PointFold> = members
                .par_iter()
                .enumerate()
                .map(|(j, m)| -> PointFold {
                    let prog = match member_bubble(m)
                        .and_then(|b| JetProgram::new(&bubble_expr(&b)?, n, 3))
                    {
                        Ok(p) => p,
                        Err(e) => {
                            return PointFold {
                                errors: vec![e.to_string()],
                                ..Default::default()
                            }
                        }
                    };
                    let cert = |p: &HPoint<f64>| prog.min_certificate(p);
                    fold_points(ctx.samples, ctx.seed_for(n, j as u64), |rng| {
                        let p = certified_point(rng, n, &cert)?;
                        let fr = frame_of(&f_from_u(&prog.eval(&p)?)?, FrameMode::OnSolution)?;
                        let mut fold = PointFold::default();
                        fold.add(
                            pointwise_checks(&fr, &BETAS, &tol),
                            &format!("n={n},f=bubble"),
                        );
                        Ok(fold)
                    })
                })
                .collect();
            let fold = folds
                .into_iter()
                .fold(PointFold::default(), PointFold::merge);
            emit_fold(rec, fold, inputs, format!("inequalities[n={n},f=bubble]"));
        }

        // Arbitrary real f: f = (1/2) log(1 + |e|²) for each corpus expression.
        let mut fold = PointFold::default();
        for (k, (label, e)) in exprs.iter().enumerate() {
            if needed_dim(e) > n {
                rec.skip(
                    format!("inequalities[n={n},f=corpus,expr={label}]"),
                    format!("expression uses index {} > n = {n}", needed_dim(e)),
                );
                continue;
            }
            let f = Expr::rational(1, 2) * (Expr::one() + e.abs2()).log_pos();
            let prog = match JetProgram::new(&f, n, 3) {
                Ok(p) => p,
                Err(err) => {
                    fold.errors.push(err.to_string());
                    continue;
                }
            };
            let cert = |p: &HPoint<f64>| prog.min_certificate(p);
            let sub = fold_points(ctx.samples, ctx.seed_for(n, 100 + k as u64), |rng| {
                let p = certified_point(rng, n, &cert)?;
                let fj = prog.eval(&p)?;
                let mut out = PointFold::default();
                for mode in [FrameMode::General, FrameMode::OnSolution] {
                    out.add(
                        pointwise_checks(&frame_unchecked(&fj, mode)?, &BETAS, &tol),
                        &format!("n={n},f=corpus"),
                    );
                }
                Ok(out)
            });
            fold = fold.merge(sub);
        }
        let inputs = ctx.inputs(
            n,
            json!({"f": "(1/2) log(1 + |e|²) over the corpus", "betas": BETAS}),
        );
        emit_fold(rec, fold, inputs, format!("inequalities[n={n},f=corpus]"));
    }
    Ok(())
}

fn appendix(ctx: &Ctx<'_>, rec: &mut Recorder<'_>) -> Result<()> {
    rec.note(
        "bochner: the constants n f_0², 2/ν, 2ν fail on shifted bubbles with |∇h|² = 2Σ h_α h_ᾱ; \
         bochner-identity checks the exact identity for Δ|∇f|² and bochner-from-identity the bound it \
         implies (4n f_0², 4/ν, 4ν)",
    );
    for &n in &ctx.dims {
        let members = ctx.members(n);
        if members.is_empty() {
            rec.skip(
                format!("bochner[n={n}]"),
                format!("grid has no members with n = {n}"),
            );
            continue;
        }
        let inputs = ctx.inputs(n, json!({"members": members.len(), "nu": NUS}));
        let rows: Vec<Result<Vec<[f64; 8]>>> = members
            .par_iter()
            .enumerate()
            .map(|(j, m)| {
                let prog = JetProgram::new(&bubble_expr(&member_bubble(m)?)?, n, 3)?;
                let cert = |p: &HPoint<f64>| prog.min_certificate(p);
                par_indexed(
                    ctx.samples,
                    ctx.seed_for(n, j as u64),
                    |_, rng| -> Result<[f64; 8]> {
                        let p = certified_point(rng, n, &cert)?;
                        let f = f_from_u(&prog.eval(&p)?)?;
                        let mut out = [0.0; 8];
                        for (k, nu) in NUS.iter().enumerate() {
                            out[k] = bochner_residual(&f, *nu)?.normalized();
                            out[4 + k] =
                                bochner_residual_with(&f, *nu, BochnerConstants::FROM_IDENTITY)?
                                    .normalized();
                        }
                        out[3] = dt_identity_residual(&f)?;
                        out[7] = bochner_identity_residual(&f)?;
                        Ok(out)
                    },
                )
                .into_iter()
                .collect()
            })
            .collect();
        let column = |k: usize| {
            rows.iter().flat_map(move |r| match r {
                Ok(v) => v.iter().map(|x| Ok(x[k])).collect::<Vec<_>>(),
                Err(e) => vec![Err(e.clone())],
            })
        };
        for (k, nu) in NUS.iter().enumerate() {
            record(
                rec,
                format!("bochner[n={n},nu={nu}]"),
                "Δ|∇f|² ≥ (1/n)(Δf)² + n f_0² + 2⟨∇f,∇Δf⟩ − (2/ν)|∇f|² − 2ν|∇f_0|²",
                inputs.clone(),
                Rule::Slack,
                worst(column(k), Rule::Slack),
                None,
            );
            record(
                rec,
                format!("bochner-from-identity[n={n},nu={nu}]"),
                "Δ|∇f|² ≥ (1/n)(Δf)² + 4n f_0² + 2⟨∇f,∇Δf⟩ − (4/ν)|∇f|² − 4ν|∇f_0|²",
                inputs.clone(),
                Rule::Slack,
                worst(column(4 + k), Rule::Slack),
                None,
            );
        }
        record(
            rec,
            format!("bochner-identity[n={n}]"),
            "Δ|∇f|² = 4Σ|f_{αβ}|² + 4Σ|f_{αβ̄}|² + 2⟨∇f,∇Δf⟩ + 8i Σ(f_ᾱ f_{0α} − f_α f_{0ᾱ})",
            inputs.clone(),
            Rule::AtMost,
            worst(column(7), Rule::AtMost),
            None,
        );
        record(
            rec,
            format!("dt-identity[n={n}]"),
            "Δ(f_0²) = −8n e^{2f} f_0² − 2n⟨∇f,∇(f_0²)⟩ + 2|∇f_0|²",
            inputs.clone(),
            Rule::AtMost,
            worst(column(3), Rule::AtMost),
            None,
        );

        let draws = 100 * ctx.samples;
        let radii = ctx.cfg.radii.clone().unwrap_or(GRADIENT_RADII.to_vec());
        let g_inputs = ctx.inputs(
            n,
            json!({"member": members[0], "radii": radii, "draws": draws}),
        );
        let u0 = member_bubble(&members[0]).and_then(|b| bubble_expr(&b))?;
        match gradient_estimate_check(&u0, n, &radii, draws, ctx.seed_for(n, 1)) {
            Ok(rows) => {
                let vals: Vec<f64> = rows.iter().map(|r| r.value).collect();
                let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                rec.check(
                    format!("gradient-estimate[n={n}]"),
                    "R · sup_{R ≤ |ξ| < 2R} |∂u|/u ≤ C",
                    g_inputs,
                    ratio_band(&vals),
                    Rule::AtMost,
                    Some(format!(
                        "variation max/min across radii; constant C ≈ {max:.6}"
                    )),
                );
                rec.series(
                    format!("gradient-estimate-n{n}"),
                    ["R", "R_sup_log_gradient"],
                    rows.iter().map(|r| [r.r, r.value]).collect(),
                );
            }
            Err(e) => rec.failed(
                format!("gradient-estimate[n={n}]"),
                "R · sup |∂u|/u ≤ C",
                g_inputs,
                Rule::AtMost,
                e.to_string(),
            ),
        }
        let r_max = 1e3;
        let gg_inputs = ctx.inputs(
            n,
            json!({"member": members[0], "r_max": r_max, "draws": draws}),
        );
        match global_gradient_sup(&u0, n, r_max, draws, ctx.seed_for(n, 2)) {
            Ok((v, used)) => rec.check(
                format!("gradient-global[n={n}]"),
                "sup |∂u|/u < ∞",
                gg_inputs,
                v,
                Rule::AtMost,
                Some(format!(
                    "sampled sup over {used} points with |ξ| log-uniform in [1e-3, {r_max}]"
                )),
            ),
            Err(e) => rec.failed(
                format!("gradient-global[n={n}]"),
                "sup |∂u|/u < ∞",
                gg_inputs,
                Rule::AtMost,
                e.to_string(),
            ),
        }
    }
    Ok(())
}

fn integrals(ctx: &Ctx<'_>, rec: &mut Recorder<'_>) -> Result<()> {
    rec.note(
        "weighted integral inequalities for M are degenerate (0 ≤ rhs) on the closed-form solutions; they are run \
         as pipeline checks that the left side vanishes within Monte Carlo error",
    );
    for &n in &ctx.dims {
        for k in 0..QUADRATURE_FIELDS {
            let seed = ctx.seed_for(n, k as u64);
            let inputs = ctx.inputs(n, json!({"field": k, "draws": ctx.samples}));
            let id = format!("quadrature[n={n},field={k}]");
            let anchor = "∫ Re Σ_α Z_ᾱ W_α = 0 for compactly supported W";
            let est = BumpField::random(&mut chunk_rng(seed, 0), n)
                .and_then(|field| divergence_integral(&field, ctx.samples, derive_seed(seed, 1)));
            match est {
                Ok(e) => {
                    let z = if e.std_err > 0.0 {
                        e.value.abs() / e.std_err
                    } else if e.value == 0.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    };
                    rec.check(
                        id,
                        anchor,
                        inputs,
                        z,
                        Rule::AtMost,
                        Some(format!(
                            "integral {:.3e} ± {:.3e}, in units of the standard error",
                            e.value, e.std_err
                        )),
                    );
                }
                Err(e) => rec.failed(id, anchor, inputs, Rule::AtMost, e.to_string()),
            }
        }

        let pairs = [(0.7, 0.5), (0.7, 3.0), (1.9, 0.5), (1.9, 3.0)];
        let cutoffs: Result<Vec<(f64, f64, Cutoff, Cutoff)>> = pairs
            .iter()
            .map(|&(r, s)| {
                Ok((
                    r,
                    s,
                    Cutoff::new(n, CutoffSpec { r })?,
                    Cutoff::new(n, CutoffSpec { r: s * r })?,
                ))
            })
            .collect();
        let cutoff_points = 1000;
        let outcome = cutoffs.map_err(|e| e.to_string()).and_then(|cs| {
            let vals = par_indexed(
                cutoff_points,
                ctx.seed_for(n, 100),
                |i, rng| -> Result<f64> {
                    let (r, s, a, b) = &cs[i % cs.len()];
                    let p = sample_box(rng, n, *r);
                    let (e1, d1) = a.eval(&p)?;
                    let (e2, d2) = b.eval(&p.dilate(*s)?)?;
                    Ok((e1 - e2).abs() + r * (d1 - s * d2).abs())
                },
            );
            worst(vals, Rule::AtMost)
        });
        record(
            rec,
            format!("cutoff[n={n}]"),
            "η_{sR}(δ_s ξ) = η_R(ξ), s|∂η_{sR}|(δ_s ξ) = |∂η_R|(ξ)",
            ctx.inputs(n, json!({"pairs": pairs, "points": cutoff_points})),
            Rule::AtMost,
            outcome,
            None,
        );

        let (r, s, beta) = (4.0, 4.0, 0.1);
        let inputs = ctx.inputs(
            n,
            json!({"bubble": "λ = i, μ = 0", "R": r, "s": s, "beta": beta}),
        );
        let id = format!("lemma-pipeline[n={n}]");
        let anchor = if n == 1 {
            "∫ M Ψ^{−β} η^s ≤ C ∫ |g|² Ψ^{−β} |∂η|² η^{s−2}"
        } else {
            "∫ M η^s ≤ C ∫ |g|² e^{2(n−1)f} |∂η|² η^{s−2}"
        };
        let b = Bubble::new(
            n,
            Complex64::new(0.0, 1.0),
            vec![Complex64::new(0.0, 0.0); n],
        );
        match b.and_then(|b| lemma_pipeline(&b, r, s, beta, ctx.samples, ctx.seed_for(n, 200))) {
            Ok(l) => {
                let excess = (l.lhs.value.abs() - 1e-8 * l.lhs_scale.value.abs()).max(0.0);
                let z = if excess == 0.0 {
                    0.0
                } else if l.lhs.std_err > 0.0 {
                    excess / l.lhs.std_err
                } else {
                    f64::INFINITY
                };
                let z = if l.rhs.value >= 0.0 { z } else { f64::INFINITY };
                rec.check(
                    id,
                    anchor,
                    inputs,
                    z,
                    Rule::AtMost,
                    Some(format!(
                        "lhs {:.3e} ± {:.3e} (term magnitude {:.3e}), rhs {:.3e}; value is (|lhs| − 1e-8·magnitude)/σ",
                        l.lhs.value, l.lhs.std_err, l.lhs_scale.value, l.rhs.value
                    )),
                );
            }
            Err(e) => rec.failed(id, anchor, inputs, Rule::AtMost, e.to_string()),
        }
    }
    Ok(())
}

fn euclidean(ctx: &Ctx<'_>, rec: &mut Recorder<'_>) -> Result<()> {
    let anchor = "−ΔV = V^{(n+2)/(n−2)}, V = (λ√(n(n−2)) / (λ² + |x − x₀|²))^{(n−2)/2}";
    for &n in &ctx.dims {
        let id = format!("euclidean-residual[n={n}]");
        if n < 3 {
            rec.skip(id, format!("the Euclidean bubble needs n ≥ 3, got n = {n}"));
            continue;
        }
        let members = 10;
        let vals = par_indexed(members, ctx.seed_for(n, 0), |_, rng| -> Result<f64> {
            let lambda = rng.random_range(-1.0f64..1.0).exp();
            let x0: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let v = EuclideanBubble::new(n, lambda, x0)?;
            let pts = (0..ctx.samples).map(|_| {
                let x: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
                crate::solutions::euclidean_residual(&v, &x)
            });
            worst(pts, Rule::AtMost).map_err(Error::Evaluator)
        });
        record(
            rec,
            id,
            anchor,
            ctx.inputs(n, json!({"members": members})),
            Rule::AtMost,
            worst(vals, Rule::AtMost),
            None,
        );
    }
    Ok(())
}
