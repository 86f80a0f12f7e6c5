//! The Jerison-Lee tensors of `f = (1/n) log u`.
//!
//! Everything is computed from an order-3 jet of `f` with gauged arithmetic
//! (see [`Gauged`]), so each derived quantity carries the size of the terms
//! it was assembled from. Identities whose sides both vanish, as they do on
//! the bubbles, are then normalized by that size instead of by `0`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hgroup::HPoint;
use crate::jets::{Gauged, HJet3, Jet, JetScalar, Letter};
use crate::tolerances::Tolerances;

type GJet = Jet<Gauged>;

/// Largest relative residual of `−Δf = 2n|∂f|² + 2n e^{2f}` accepted as a
/// solution.
pub const PDE_GATE: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrameMode {
    /// `E_{αβ̄} = f_{αβ̄} − (1/n) f_{γγ̄} δ_{αβ}`, valid for any `f`.
    General,
    /// `E_{αβ̄} = f_{αβ̄} + g δ_{αβ}`, which agrees with the general form
    /// only on solutions.
    OnSolution,
}

fn gi() -> Gauged {
    Gauged::constant(Complex64::new(0.0, 1.0))
}

fn gr(x: f64) -> Gauged {
    Gauged::real(x)
}

fn gsum(xs: impl IntoIterator<Item = Gauged>) -> Gauged {
    xs.into_iter().fold(Gauged::zero(), |a, b| a + b)
}

fn sqrt_g(x: Gauged) -> Gauged {
    Gauged::new(
        Complex64::new(x.value.re.max(0.0).sqrt(), 0.0),
        x.magnitude.sqrt(),
    )
}

/// `|x|` paired with the magnitude of `x`.
fn abs_g(x: Gauged) -> Gauged {
    Gauged {
        value: Complex64::new(x.value.norm(), 0.0),
        magnitude: x.magnitude,
    }
}

/// Relative size of a gauged quantity that should vanish.
fn relative(x: Gauged) -> f64 {
    x.value.norm() / x.magnitude.max(1e-300)
}

/// Sub-Laplacian `Σ_α (Z_α Z_ᾱ + Z_ᾱ Z_α)` of a jet; two orders lower.
pub fn laplacian<S: JetScalar>(j: &Jet<S>) -> Jet<S> {
    let n = j.n();
    let mut out: Option<Jet<S>> = None;
    for a in 0..n {
        let term = &j.derivative(Letter::Z(a)).derivative(Letter::Zb(a))
            + &j.derivative(Letter::Zb(a)).derivative(Letter::Z(a));
        out = Some(match out {
            None => term,
            Some(o) => &o + &term,
        });
    }
    out.expect("n >= 1")
}

/// `⟨∇a, ∇b⟩ = Σ_α (a_α b_ᾱ + a_ᾱ b_α)`; one order lower.
pub fn grad_inner<S: JetScalar>(a: &Jet<S>, b: &Jet<S>) -> Jet<S> {
    let n = a.n();
    let mut out: Option<Jet<S>> = None;
    for k in 0..n {
        let term = &a
            .derivative(Letter::Z(k))
            .mul_jet(&b.derivative(Letter::Zb(k)))
            + &a.derivative(Letter::Zb(k))
                .mul_jet(&b.derivative(Letter::Z(k)));
        out = Some(match out {
            None => term,
            Some(o) => &o + &term,
        });
    }
    out.expect("n >= 1")
}

/// Jet of `f = (1/n) log u`.
pub fn f_from_u(u: &HJet3) -> Result<HJet3> {
    let v = u.value();
    if !(v.re > 0.0 && v.re.is_finite()) || v.im.abs() > 1e-12 * v.re {
        return Err(Error::Domain(format!(
            "u must be real and positive, got {v}"
        )));
    }
    let n = u.n() as f64;
    Ok(HJet3 {
        point: u.point.clone(),
        jet: u.jet.ln().scale_re(1.0 / n),
    })
}

/// First-order building blocks shared by every quantity below.
struct Parts {
    n: usize,
    f: GJet,
    fa: Vec<GJet>,
    fb: Vec<GJet>,
    f0: GJet,
    /// `|∂f|² = Σ f_α f_ᾱ`.
    grad2: GJet,
    e2f: GJet,
    g: GJet,
}

impl Parts {
    fn new(f: &HJet3) -> Result<Parts> {
        if f.jet.order() < 3 {
            return Err(Error::InvalidArgument(format!(
                "order-3 jet of f required, got order {}",
                f.jet.order()
            )));
        }
        if f.jet
            .values()
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::Domain("non-finite jet entry".into()));
        }
        // f is real; symmetrizing removes roundoff in conjugate pairs.
        let f = f.jet.re().gauged();
        let n = f.n();
        let fa: Vec<GJet> = (0..n).map(|a| f.derivative(Letter::Z(a))).collect();
        let fb: Vec<GJet> = (0..n).map(|a| f.derivative(Letter::Zb(a))).collect();
        let f0 = f.derivative(Letter::T);
        let mut grad2 = fa[0].mul_jet(&fb[0]);
        for a in 1..n {
            grad2 = &grad2 + &fa[a].mul_jet(&fb[a]);
        }
        let e2f = f.scale_re(2.0).exp();
        let g = &(&grad2 + &e2f) - &f0.scale(&gi());
        Ok(Parts {
            n,
            f,
            fa,
            fb,
            f0,
            grad2,
            e2f,
            g,
        })
    }

    /// `Δf + 2n|∂f|² + 2n e^{2f}` at the point.
    fn pde(&self) -> Gauged {
        let k = gr(2.0 * self.n as f64);
        *laplacian(&self.f).value()
            + k * (*self.grad2.value() + *self.e2f.value())
    }

    fn f_value(&self) -> f64 {
        self.f.value().value.re
    }
}

/// `g = |∂f|² + e^{2f} − i f_0` at the point of `f`.
pub fn g_of(f: &HJet3) -> Result<Complex64> {
    Ok(Parts::new(f)?.g.value().value)
}

/// Relative residual of `−Δf = 2n|∂f|² + 2n e^{2f}` at the point.
pub fn pde_residual(f: &HJet3) -> Result<f64> {
    Ok(relative(Parts::new(f)?.pde()))
}

fn gate(p: &Parts) -> Result<f64> {
    let r = relative(p.pde());
    if r > PDE_GATE || r.is_nan() {
        return Err(Error::GateRejected {
            residual: r,
            tolerance: PDE_GATE,
        });
    }
    Ok(r)
}

/// The tensors, contracted vectors and derived scalars at one point.
#[derive(Clone, Debug)]
pub struct JLFrame {
    pub n: usize,
    pub mode: FrameMode,
    /// Whether `f` passed the PDE gate.
    pub on_solution: bool,
    pub point: HPoint<f64>,
    pub f: f64,
    pub f0: f64,
    /// `|∂f|²`.
    pub grad2: f64,
    pub g: Complex64,
    pub d: Vec<Vec<Complex64>>,
    pub e: Vec<Vec<Complex64>>,
    pub d_vec: Vec<Complex64>,
    pub e_vec: Vec<Complex64>,
    pub g_vec: Vec<Complex64>,
    pub m: f64,
    /// Magnitude of the terms of `M`; `m / m_scale` is the normalized `M`.
    pub m_scale: f64,
    /// `Φ_α`, including the factor `e^{2(n−1)f}`.
    pub phi: Vec<Complex64>,
    /// `Re Σ_α Z_ᾱ Φ_α`.
    pub div: f64,
    pub div_scale: f64,
    pub psi: f64,
    pub pde_residual: f64,
    gm: Gauged,
    /// `(g+3if_0)E_α + (g−if_0)D_α − 3if_0 G_α`.
    phi_tilde: Vec<Gauged>,
    /// `Ψ_ᾱ`.
    psi_bar: Vec<Gauged>,
    /// `D_ᾱ + E_ᾱ − G_ᾱ`.
    efg: Vec<Gauged>,
    gbar_expansion: Option<f64>,
    gradient_relations: Option<f64>,
}

impl JLFrame {
    /// `M` divided by the magnitude of its terms.
    pub fn m_normalized(&self) -> f64 {
        self.m / self.m_scale.max(1e-300)
    }
}

/// Frame of `f`. In [`FrameMode::OnSolution`] the PDE gate must pass.
pub fn frame_of(f: &HJet3, mode: FrameMode) -> Result<JLFrame> {
    build_frame(f, mode, mode == FrameMode::OnSolution)
}

/// Frame of `f` without the PDE gate, for checking relations that hold for
/// any real `f` once `E` is taken in a given form.
pub fn frame_unchecked(f: &HJet3, mode: FrameMode) -> Result<JLFrame> {
    build_frame(f, mode, false)
}

fn build_frame(fj: &HJet3, mode: FrameMode, gated: bool) -> Result<JLFrame> {
    let p = Parts::new(fj)?;
    let pde_res = relative(p.pde());
    if gated {
        gate(&p)?;
    }
    let n = p.n;
    let nf = n as f64;
    let g = &p.g;
    let i = gi();

    let mixed: Vec<Vec<GJet>> = (0..n)
        .map(|a| (0..n).map(|b| p.fa[a].derivative(Letter::Zb(b))).collect())
        .collect();
    let trace = {
        let mut t = mixed[0][0].clone();
        for (a, row) in mixed.iter().enumerate().skip(1) {
            t = &t + &row[a];
        }
        t
    };
    let d: Vec<Vec<GJet>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    &p.fa[a].derivative(Letter::Z(b)) - &p.fa[a].mul_jet(&p.fa[b]).scale_re(2.0)
                })
                .collect()
        })
        .collect();
    let e: Vec<Vec<GJet>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    if a != b {
                        mixed[a][b].clone()
                    } else {
                        match mode {
                            FrameMode::General => &mixed[a][b] - &trace.scale_re(1.0 / nf),
                            FrameMode::OnSolution => &mixed[a][b] + g,
                        }
                    }
                })
                .collect()
        })
        .collect();
    let d_vec: Vec<GJet> = (0..n)
        .map(|a| {
            let mut s = d[a][0].mul_jet(&p.fb[0]);
            for b in 1..n {
                s = &s + &d[a][b].mul_jet(&p.fb[b]);
            }
            s
        })
        .collect();
    let e_vec: Vec<GJet> = (0..n)
        .map(|a| {
            let mut s = e[a][0].mul_jet(&p.fa[0]);
            for b in 1..n {
                s = &s + &e[a][b].mul_jet(&p.fa[b]);
            }
            s
        })
        .collect();
    let g_vec: Vec<GJet> = (0..n)
        .map(|a| &p.f0.derivative(Letter::Z(a)).scale(&i) + &g.mul_jet(&p.fa[a]))
        .collect();

    let f0i = p.f0.scale(&i);
    let c_e = g + &f0i.scale_re(3.0);
    let c_d = g - &f0i;
    let c_g = f0i.scale_re(-3.0);
    let weight = p.f.scale_re(2.0 * (nf - 1.0)).exp();
    let phi_tilde: Vec<GJet> = (0..n)
        .map(|a| &(&c_e.mul_jet(&e_vec[a]) + &c_d.mul_jet(&d_vec[a])) + &c_g.mul_jet(&g_vec[a]))
        .collect();
    let phi: Vec<GJet> = phi_tilde.iter().map(|x| weight.mul_jet(x)).collect();
    let div = gsum((0..n).map(|a| *phi[a].derivative(Letter::Zb(a)).value()));

    // M from point values.
    let v = |j: &GJet| *j.value();
    let fv = p.f_value();
    let w_n = gr((2.0 * nf * fv).exp());
    let w_n1 = gr((2.0 * (nf - 1.0) * fv).exp());
    let mut tensors = Gauged::zero();
    let mut vectors = Gauged::zero();
    for a in 0..n {
        for b in 0..n {
            tensors = tensors + v(&e[a][b]).abs2() + v(&d[a][b]).abs2();
        }
        let (ga, da, ea) = (v(&g_vec[a]), v(&d_vec[a]), v(&e_vec[a]));
        vectors = vectors + ga.abs2() + (ga + da).abs2() + (ga - ea).abs2();
        for b in 0..n {
            for c in 0..n {
                let x = v(&d[a][b]) * v(&p.fb[c]) + v(&e[a][c]) * v(&p.fa[b]);
                vectors = vectors + x.abs2();
            }
        }
    }
    let gm = w_n * tensors + w_n1 * vectors;

    let psi_jet = g.mul_jet(&g.conj()).mul_jet(&p.f.scale_re(-2.0).exp());
    let psi_bar: Vec<Gauged> = (0..n)
        .map(|a| v(&psi_jet.derivative(Letter::Zb(a))))
        .collect();
    // Barred vectors are conjugates since f is real.
    let efg: Vec<Gauged> = (0..n)
        .map(|a| (v(&d_vec[a]) + v(&e_vec[a]) - v(&g_vec[a])).conj())
        .collect();

    let (gbar_expansion, gradient_relations) = if mode == FrameMode::OnSolution {
        let gbar = g.conj();
        let gv = v(g);
        let mut worst_gbar = 0.0f64;
        let mut worst_rel = 0.0f64;
        for a in 0..n {
            let (db, eb, gb) = (
                v(&d_vec[a]).conj(),
                v(&e_vec[a]).conj(),
                v(&g_vec[a]).conj(),
            );
            let fbv = v(&p.fb[a]);
            let lhs = v(&gbar.derivative(Letter::Zb(a)));
            let rhs = db + eb - gb + gr(2.0) * gv.conj() * fbv;
            worst_gbar = worst_gbar.max(relative(lhs - rhs));
            let g_bar_a = v(&g.derivative(Letter::Zb(a)));
            worst_rel = worst_rel.max(relative(g_bar_a - (db + eb + gb)));
            let grad_a = v(&p.grad2.derivative(Letter::Zb(a)));
            let r = db + eb + gv.conj() * fbv - gr(2.0) * fbv * v(&p.e2f);
            worst_rel = worst_rel.max(relative(grad_a - r));
        }
        (Some(worst_gbar), Some(worst_rel))
    } else {
        (None, None)
    };

    let plain = |j: &GJet| j.value().value;
    Ok(JLFrame {
        n,
        mode,
        on_solution: gated || (pde_res <= PDE_GATE),
        point: fj.point.clone(),
        f: fv,
        f0: p.f0.value().value.re,
        grad2: p.grad2.value().value.re,
        g: plain(g),
        d: d.iter().map(|r| r.iter().map(plain).collect()).collect(),
        e: e.iter().map(|r| r.iter().map(plain).collect()).collect(),
        d_vec: d_vec.iter().map(plain).collect(),
        e_vec: e_vec.iter().map(plain).collect(),
        g_vec: g_vec.iter().map(plain).collect(),
        m: gm.value.re,
        m_scale: gm.magnitude,
        phi: phi.iter().map(plain).collect(),
        div: div.value.re,
        div_scale: div.magnitude,
        psi: psi_jet.value().value.re,
        pde_residual: pde_res,
        gm,
        phi_tilde: phi_tilde.iter().map(v).collect(),
        psi_bar,
        efg,
        gbar_expansion,
        gradient_relations,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceResidual {
    pub m: f64,
    pub div: f64,
    /// `|M − Re Z_ᾱΦ_α|` over the magnitude of the terms of both sides.
    pub residual: f64,
    /// `|M − Re Z_ᾱΦ_α| / max(|M|, |Re Z_ᾱΦ_α|, 1e-300)`; of order one
    /// where both sides vanish to roundoff.
    pub plain: f64,
    pub pde_residual: f64,
}

/// Residual of `M = Re Z_ᾱ Φ_α`; `f` must pass the PDE gate.
pub fn divergence_residual(f: &HJet3) -> Result<DivergenceResidual> {
    let fr = frame_of(f, FrameMode::General)?;
    if fr.pde_residual > PDE_GATE || fr.pde_residual.is_nan() {
        return Err(Error::GateRejected {
            residual: fr.pde_residual,
            tolerance: PDE_GATE,
        });
    }
    Ok(divergence_of_frame(&fr))
}

/// Divergence residual of a frame, without any gate.
pub fn divergence_of_frame(fr: &JLFrame) -> DivergenceResidual {
    let diff = (fr.m - fr.div).abs();
    DivergenceResidual {
        m: fr.m,
        div: fr.div,
        residual: diff / (fr.m_scale + fr.div_scale).max(1e-300),
        plain: diff / fr.m.abs().max(fr.div.abs()).max(1e-300),
        pde_residual: fr.pde_residual,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    /// Passes when `value ≥ −tolerance`.
    Slack,
    /// Passes when `value ≤ tolerance`.
    Residual,
}

/// One pointwise check: a signed slack or a nonnegative residual.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointCheck {
    pub id: String,
    pub kind: CheckKind,
    pub point: Vec<f64>,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn slack(id: String, point: &[f64], value: f64, tol: f64) -> PointCheck {
    PointCheck {
        id,
        kind: CheckKind::Slack,
        point: point.to_vec(),
        value,
        tolerance: tol,
        pass: value >= -tol,
    }
}

fn residual(id: String, point: &[f64], value: f64, tol: f64) -> PointCheck {
    PointCheck {
        id,
        kind: CheckKind::Residual,
        point: point.to_vec(),
        value,
        tolerance: tol,
        pass: value <= tol,
    }
}

/// Normalized slack of `lhs ≤ rhs`: `(rhs − |lhs|) / magnitude(lhs)`.
fn bound_slack(lhs: Gauged, rhs: f64) -> f64 {
    let a = abs_g(lhs);
    (rhs - a.value.re) / a.magnitude.max(1e-300)
}

/// Pointwise relations and inequalities of the frame, as signed slacks or
/// residuals. Bounds with the sharp constants `2` and `1` are only checked
/// when the frame passed the PDE gate; for arbitrary `f` the constants pick
/// up a factor `√3` from Cauchy-Schwarz over the three vectors in `M`.
pub fn pointwise_checks(fr: &JLFrame, betas: &[f64], tol: &Tolerances) -> Vec<PointCheck> {
    let pt = fr.point.coords();
    let mut out = Vec::new();

    let modulus = (fr.grad2.powi(2)
        + (4.0 * fr.f).exp()
        + 2.0 * fr.grad2 * (2.0 * fr.f).exp()
        + fr.f0 * fr.f0)
        .sqrt();
    out.push(residual(
        "g-modulus".into(),
        &pt,
        (fr.g.norm() - modulus).abs() / modulus.max(1e-300),
        tol.get("g-modulus"),
    ));
    out.push(slack(
        "m-nonnegative".into(),
        &pt,
        fr.m,
        tol.get("m-nonnegative"),
    ));

    for &b in betas {
        let id = format!("trick[beta={b}]");
        let bound = (-2.0 * b * fr.f).exp();
        let s = (bound - fr.psi.powf(-b)) / bound;
        out.push(slack(id.clone(), &pt, s, tol.get(&id)));
    }

    let sqrt_m = sqrt_g(fr.gm).value.re;
    let damp = (-(fr.n as f64 - 1.0) * fr.f).exp();
    let g_abs = fr.g.norm();
    let r3 = 3f64.sqrt();
    let worst = |xs: &[Gauged], rhs: f64| {
        xs.iter()
            .map(|x| bound_slack(*x, rhs))
            .fold(f64::INFINITY, f64::min)
    };
    let rhs_p1 = 2.0 * g_abs * damp * sqrt_m;
    let rhs_p2 = 2.0 * (-2.0 * fr.f).exp() * g_abs * damp * sqrt_m;
    let rhs_efg = damp * sqrt_m;
    out.push(slack(
        "p1-generic".into(),
        &pt,
        worst(&fr.phi_tilde, r3 * rhs_p1),
        tol.get("p1-generic"),
    ));
    out.push(slack(
        "stima-efg-generic".into(),
        &pt,
        worst(&fr.efg, r3 * rhs_efg),
        tol.get("stima-efg-generic"),
    ));
    if fr.mode == FrameMode::OnSolution {
        out.push(slack(
            "p2-generic".into(),
            &pt,
            worst(&fr.psi_bar, r3 * rhs_p2),
            tol.get("p2-generic"),
        ));
        if let Some(r) = fr.gbar_expansion {
            out.push(residual(
                "gbar-expansion".into(),
                &pt,
                r,
                tol.get("gbar-expansion"),
            ));
        }
        if let Some(r) = fr.gradient_relations {
            out.push(residual(
                "gradient-relations".into(),
                &pt,
                r,
                tol.get("gradient-relations"),
            ));
        }
    }
    if fr.on_solution {
        out.push(slack(
            "p1".into(),
            &pt,
            worst(&fr.phi_tilde, rhs_p1),
            tol.get("p1"),
        ));
        if fr.mode == FrameMode::OnSolution {
            out.push(slack(
                "p2".into(),
                &pt,
                worst(&fr.psi_bar, rhs_p2),
                tol.get("p2"),
            ));
        }
        out.push(slack(
            "stima-efg".into(),
            &pt,
            worst(&fr.efg, rhs_efg),
            tol.get("stima-efg"),
        ));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BochnerSlack {
    /// `LHS − RHS`.
    pub slack: f64,
    /// Magnitude of the terms of both sides.
    pub scale: f64,
}

impl BochnerSlack {
    pub fn normalized(&self) -> f64 {
        self.slack / self.scale.max(1e-300)
    }
}

/// Coefficients of the Bochner-type lower bound
/// `Δ|∇f|² ≥ (1/n)(Δf)² + a n f_0² + 2⟨∇f,∇Δf⟩ − (c/ν)|∇f|² − cν|∇f_0|²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BochnerConstants {
    pub a: f64,
    pub c: f64,
}

impl BochnerConstants {
    /// `a = 1, c = 2`.
    pub const STATED: BochnerConstants = BochnerConstants { a: 1.0, c: 2.0 };
    /// `a = 4, c = 4`: what [`bochner_identity_residual`] gives after
    /// Cauchy-Schwarz on the trace and on the `f_0` cross term.
    pub const FROM_IDENTITY: BochnerConstants = BochnerConstants { a: 4.0, c: 4.0 };
}

/// Slack of the bound with [`BochnerConstants::STATED`],
/// `Δ|∇f|² ≥ (1/n)(Δf)² + n f_0² + 2⟨∇f,∇Δf⟩ − (2/ν)|∇f|² − 2ν|∇f_0|²`
/// with `|∇h|² = 2 Σ h_α h_ᾱ`.
pub fn bochner_residual(f: &HJet3, nu: f64) -> Result<BochnerSlack> {
    bochner_residual_with(f, nu, BochnerConstants::STATED)
}

pub fn bochner_residual_with(f: &HJet3, nu: f64, k: BochnerConstants) -> Result<BochnerSlack> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "nu must be positive, got {nu}"
        )));
    }
    let p = Parts::new(f)?;
    let nf = p.n as f64;
    let grad_sq = p.grad2.scale_re(2.0);
    let lhs = *laplacian(&grad_sq).value();
    let lap_f = laplacian(&p.f);
    let lf = *lap_f.value();
    let f0 = *p.f0.value();
    let grad_f0_sq = *grad_inner(&p.f0, &p.f0).value();
    let rhs = gr(1.0 / nf) * lf * lf
        + gr(k.a * nf) * f0 * f0
        + gr(2.0) * *grad_inner(&p.f, &lap_f).value()
        - gr(k.c / nu) * *grad_sq.value()
        - gr(k.c * nu) * grad_f0_sq;
    let s = lhs - rhs;
    Ok(BochnerSlack {
        slack: s.value.re,
        scale: s.magnitude,
    })
}

/// Relative residual of the identity behind the Bochner bound, valid for
/// any real `f`:
/// `Δ|∇f|² = 4Σ|f_{αβ}|² + 4Σ|f_{αβ̄}|² + 2⟨∇f,∇Δf⟩ + 8i Σ(f_ᾱ f_{0α} − f_α f_{0ᾱ})`
/// with `f_{αβ̄} = Z_β̄ Z_α f`.
pub fn bochner_identity_residual(f: &HJet3) -> Result<f64> {
    let p = Parts::new(f)?;
    let n = p.n;
    let grad_sq = p.grad2.scale_re(2.0);
    let lhs = *laplacian(&grad_sq).value();
    let lap_f = laplacian(&p.f);
    let mut hess = Gauged::zero();
    let mut cross = Gauged::zero();
    for a in 0..n {
        for b in 0..n {
            let fab = *p.fa[a].derivative(Letter::Z(b)).value();
            let fabb = *p.fa[a].derivative(Letter::Zb(b)).value();
            hess = hess + fab * fab.conj() + fabb * fabb.conj();
        }
        let f0a = *p.f0.derivative(Letter::Z(a)).value();
        let f0b = *p.f0.derivative(Letter::Zb(a)).value();
        cross = cross + *p.fb[a].value() * f0a - *p.fa[a].value() * f0b;
    }
    let rhs = gr(4.0) * hess
        + gr(2.0) * *grad_inner(&p.f, &lap_f).value()
        + gr(8.0) * gi() * cross;
    Ok(relative(lhs - rhs))
}

/// Relative residual of
/// `Δf_0² = −8n e^{2f} f_0² − 2n⟨∇f,∇f_0²⟩ + 2|∇f_0|²`; gated on the PDE.
pub fn dt_identity_residual(f: &HJet3) -> Result<f64> {
    let p = Parts::new(f)?;
    gate(&p)?;
    let nf = p.n as f64;
    let h = p.f0.mul_jet(&p.f0);
    let lhs = *laplacian(&h).value();
    let rhs = gr(-8.0 * nf) * *p.e2f.value() * *h.value()
        - gr(2.0 * nf) * *grad_inner(&p.f, &h).value()
        + gr(2.0) * *grad_inner(&p.f0, &p.f0).value();
    Ok(relative(lhs - rhs))
}

#[cfg(test)]
mod tests;
