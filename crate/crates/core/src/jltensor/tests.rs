use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::expr::{parse, Expr};
use crate::jets::{jet_from_expr, JetProgram};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Bubble text with amplitude `(Im λ − |μ|²/4)^{n/2}`.
fn bubble_text(n: usize, lambda: Complex64, mu: &[Complex64]) -> String {
    let mu2: f64 = mu.iter().map(|m| m.norm_sqr()).sum();
    let amp = (lambda.im - mu2 / 4.0).powf(n as f64 / 2.0);
    let mut inner = String::from("t + i*(");
    for a in 1..=n {
        if a > 1 {
            inner.push('+');
        }
        inner.push_str(&format!("z{a}*zb{a}"));
    }
    inner.push(')');
    for (a, m) in mu.iter().enumerate() {
        inner.push_str(&format!(" + ({:?} + {:?}i)*z{}", m.re, m.im, a + 1));
    }
    inner.push_str(&format!(" + ({:?} + {:?}i)", lambda.re, lambda.im));
    format!("{amp:?} * abs({inner})^(-{n})")
}

fn random_point(rng: &mut ChaCha8Rng, n: usize, r: f64) -> HPoint<f64> {
    let z = (0..n)
        .map(|_| c(rng.random_range(-r..r), rng.random_range(-r..r)))
        .collect();
    HPoint::new(z, rng.random_range(-r..r)).unwrap()
}

fn f_jet(u: &JetProgram, p: &HPoint<f64>) -> HJet3 {
    f_from_u(&u.eval(p).unwrap()).unwrap()
}

fn bubbles() -> Vec<(usize, Expr)> {
    vec![
        (
            1,
            parse(&bubble_text(1, c(0.0, 1.0), &[c(0.0, 0.0)])).unwrap(),
        ),
        (
            1,
            parse(&bubble_text(1, c(0.4, 1.3), &[c(0.5, -0.7)])).unwrap(),
        ),
        (
            2,
            parse(&bubble_text(2, c(-0.3, 2.0), &[c(0.6, 0.2), c(-0.4, 0.9)])).unwrap(),
        ),
    ]
}

#[test]
fn constant_u_gives_zero_frame() {
    let p = HPoint::from_parts(&[(0.3, -0.2)], 0.7).unwrap();
    let f = f_from_u(&jet_from_expr(&Expr::one(), &p).unwrap()).unwrap();
    assert!(f.jet.values().iter().all(|v| v.norm() == 0.0));
    assert_eq!(g_of(&f).unwrap(), c(1.0, 0.0));
    let fr = frame_unchecked(&f, FrameMode::General).unwrap();
    assert_eq!(fr.m, 0.0);
    assert!(fr
        .d_vec
        .iter()
        .chain(&fr.e_vec)
        .chain(&fr.g_vec)
        .all(|v| v.norm() == 0.0));
}

#[test]
fn exponential_u_gives_linear_f() {
    let p = HPoint::from_parts(&[(0.5, 0.25), (-1.0, 0.0)], 0.0).unwrap();
    let u = parse("exp(2*t)").unwrap();
    let f = f_from_u(&jet_from_expr(&u, &p).unwrap()).unwrap();
    assert!(f.value().norm() < 1e-15);
    assert!((f.get(&[Letter::T]) - 1.0).norm() < 1e-14);
    // g = |z|² + e^{2t} − i at t = 0.
    let g = g_of(&f).unwrap();
    assert!((g - c(0.3125 + 1.0 + 1.0, -1.0)).norm() < 1e-14);
}

#[test]
fn nonpositive_u_is_rejected() {
    let p = HPoint::from_parts(&[(0.0, 0.0)], 0.0).unwrap();
    for text in ["-1", "0", "i"] {
        let u = jet_from_expr(&parse(text).unwrap(), &p).unwrap();
        assert!(matches!(f_from_u(&u), Err(Error::Domain(_))), "{text}");
    }
}

#[test]
fn bubble_value_is_log_of_amplitude() {
    let p = HPoint::from_parts(&[(0.0, 0.0)], 0.0).unwrap();
    let e = parse(&bubble_text(1, c(0.0, 2.0), &[c(0.0, 0.0)])).unwrap();
    let f = f_from_u(&jet_from_expr(&e, &p).unwrap()).unwrap();
    // C = 2^{1/2}, U(0) = C/2.
    assert!((f.value().re - (2f64.sqrt() / 2.0).ln()).abs() < 1e-15);
}

#[test]
fn bubbles_pass_every_check() {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (n, e) in bubbles() {
        let prog = JetProgram::new(&e, n, 3).unwrap();
        for _ in 0..15 {
            let p = random_point(&mut rng, n, 2.0);
            let f = f_jet(&prog, &p);
            let fr = frame_of(&f, FrameMode::OnSolution).unwrap();
            assert!(fr.pde_residual < 1e-12, "pde {}", fr.pde_residual);
            assert!(fr.m_normalized() < 1e-8, "M {}", fr.m_normalized());
            for chk in pointwise_checks(&fr, &[0.01, 0.1, 0.5], &tol) {
                assert!(chk.pass, "{chk:?}");
            }
            let d = divergence_residual(&f).unwrap();
            assert!(d.residual < 1e-6, "{d:?}");
            assert!(dt_identity_residual(&f).unwrap() < 1e-6);
            assert!(bochner_identity_residual(&f).unwrap() < 1e-9);
            for nu in [0.1, 1.0, 10.0] {
                let b = bochner_residual_with(&f, nu, BochnerConstants::FROM_IDENTITY).unwrap();
                assert!(b.normalized() >= -1e-8, "nu {nu}: {b:?}");
            }
        }
    }
}

#[test]
fn general_and_on_solution_tensors_agree_on_bubbles() {
    let (n, e) = bubbles().pop().unwrap();
    let prog = JetProgram::new(&e, n, 3).unwrap();
    let p = HPoint::from_parts(&[(0.3, 0.1), (-0.2, 0.5)], -0.4).unwrap();
    let f = f_jet(&prog, &p);
    let a = frame_of(&f, FrameMode::General).unwrap();
    let b = frame_of(&f, FrameMode::OnSolution).unwrap();
    let scale = a.g.norm();
    for r in 0..n {
        for s in 0..n {
            assert!((a.e[r][s] - b.e[r][s]).norm() < 1e-9 * scale);
        }
    }
}

#[test]
fn gate_rejects_non_solutions() {
    let p = HPoint::from_parts(&[(0.4, -0.3)], 0.2).unwrap();
    for text in ["z1*zb1", "3"] {
        let f = jet_from_expr(&parse(text).unwrap(), &p).unwrap();
        assert!(
            matches!(divergence_residual(&f), Err(Error::GateRejected { .. })),
            "{text}"
        );
        assert!(
            matches!(dt_identity_residual(&f), Err(Error::GateRejected { .. })),
            "{text}"
        );
        assert!(frame_of(&f, FrameMode::OnSolution).is_err());
        assert!(frame_of(&f, FrameMode::General).is_ok());
    }
}

#[test]
fn divergence_identity_fails_off_solutions() {
    // The normalization is not vacuous: a generic f misses by O(1).
    let p = HPoint::from_parts(&[(0.4, -0.3), (0.1, 0.2)], 0.2).unwrap();
    let e = parse("0.3*z1*zb1 + 0.2*t*z2*zb2 + 0.1*(z1*zb2 + zb1*z2) + 0.5*t").unwrap();
    let f = jet_from_expr(&e, &p).unwrap();
    let fr = frame_unchecked(&f, FrameMode::General).unwrap();
    assert!(divergence_of_frame(&fr).residual > 1e-3);
}

/// Sum of squares recomputed from raw jet entries.
fn m_oracle(f: &HJet3) -> f64 {
    let n = f.n();
    let get = |w: &[Letter]| f.get(w);
    let fa: Vec<Complex64> = (0..n).map(|a| get(&[Letter::Z(a)])).collect();
    let fb: Vec<Complex64> = fa.iter().map(|v| v.conj()).collect();
    let f0 = get(&[Letter::T]).re;
    let ef = f.value().re.exp();
    let grad2: f64 = fa.iter().map(|v| v.norm_sqr()).sum();
    let g = c(grad2 + ef * ef, -f0);
    let trace: Complex64 = (0..n).map(|a| get(&[Letter::Z(a), Letter::Zb(a)])).sum();
    let d = |a: usize, b: usize| get(&[Letter::Z(a), Letter::Z(b)]) - 2.0 * fa[a] * fa[b];
    let e = |a: usize, b: usize| {
        let m = get(&[Letter::Z(a), Letter::Zb(b)]);
        if a == b {
            m - trace / n as f64
        } else {
            m
        }
    };
    let nf = n as f64;
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    for a in 0..n {
        let da: Complex64 = (0..n).map(|b| d(a, b) * fb[b]).sum();
        let ea: Complex64 = (0..n).map(|b| e(a, b) * fa[b]).sum();
        let ga = c(0.0, 1.0) * get(&[Letter::T, Letter::Z(a)]) + g * fa[a];
        s2 += ga.norm_sqr() + (ga + da).norm_sqr() + (ga - ea).norm_sqr();
        for b in 0..n {
            s1 += e(a, b).norm_sqr() + d(a, b).norm_sqr();
            for k in 0..n {
                s2 += (d(a, b) * fb[k] + e(a, k) * fa[b]).norm_sqr();
            }
        }
    }
    ef.powf(2.0 * nf) * s1 + ef.powf(2.0 * (nf - 1.0)) * s2
}

#[test]
fn m_matches_independent_sum_of_squares() {
    let p = HPoint::from_parts(&[(0.4, -0.3), (0.1, 0.2)], 0.2).unwrap();
    let e =
        parse("0.3*z1*zb1 - 0.7*t*z2*zb2 + 0.1*(z1*zb2 + zb1*z2) + 0.5*t^2 + 0.2*(z1^2 + zb1^2)")
            .unwrap();
    let f = jet_from_expr(&e, &p).unwrap();
    let fr = frame_unchecked(&f, FrameMode::General).unwrap();
    let oracle = m_oracle(&f);
    assert!(fr.m > 0.0);
    assert!(
        (fr.m - oracle).abs() <= 1e-12 * oracle,
        "{} vs {oracle}",
        fr.m
    );
    let trace: Complex64 = (0..2).map(|a| fr.e[a][a]).sum();
    assert!(trace.norm() < 1e-15);
}

#[test]
fn trick_holds_for_linear_f() {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let prog = JetProgram::new(&Expr::t(), 1, 3).unwrap();
    for _ in 0..20 {
        let p = random_point(&mut rng, 1, 3.0);
        let fr = frame_unchecked(&prog.eval(&p).unwrap(), FrameMode::General).unwrap();
        let checks = pointwise_checks(&fr, &[0.05], &tol);
        let t = checks.iter().find(|c| c.id.starts_with("trick")).unwrap();
        assert!(t.pass && t.value >= 0.0, "{t:?}");
    }
}

#[test]
fn constant_f_has_zero_bochner_slack() {
    let p = HPoint::from_parts(&[(0.4, -0.3)], 0.2).unwrap();
    let f = jet_from_expr(&Expr::int(2), &p).unwrap();
    let b = bochner_residual(&f, 1.0).unwrap();
    assert_eq!(b.slack, 0.0);
    assert!(bochner_residual(&f, 0.0).is_err());
}

/// A real expression from coefficients, mixing polynomial and exponential
/// terms in every coordinate.
fn generic_f(k: &[f64; 7]) -> Expr {
    parse(&format!(
        "{:?}*z1*zb1 + {:?}*t + {:?}*(z1 + zb1) + {:?}*t^2 + {:?}*(z1*z1 + zb1*zb1) \
         + {:?}*i*(z1 - zb1)*t + {:?}*exp(0.3*t + 0.2*(z1 + zb1))",
        k[0], k[1], k[2], k[3], k[4], k[5], k[6]
    ))
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn relations_hold_for_arbitrary_real_f(
        k in prop::array::uniform7(-1.0f64..1.0),
        x in -1.5f64..1.5, y in -1.5f64..1.5, t in -1.5f64..1.5,
    ) {
        let tol = Tolerances::default();
        let p = HPoint::from_parts(&[(x, y)], t).unwrap();
        let f = jet_from_expr(&generic_f(&k), &p).unwrap();
        for mode in [FrameMode::General, FrameMode::OnSolution] {
            let fr = frame_unchecked(&f, mode).unwrap();
            prop_assert!(fr.m >= 0.0);
            prop_assert!(fr.psi > 0.0);
            for chk in pointwise_checks(&fr, &[0.01, 0.1, 0.5], &tol) {
                if chk.id == "p1" || chk.id == "p2" || chk.id == "stima-efg" {
                    continue;
                }
                prop_assert!(chk.pass, "{:?}", chk);
            }
        }
    }
}

#[test]
fn bochner_is_violated_by_some_generic_f() {
    // The inequality is used for solutions only; for arbitrary real f a
    // seeded search finds clear violations, while f = t satisfies it.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = f64::INFINITY;
    for _ in 0..100 {
        let k: [f64; 7] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let p = random_point(&mut rng, 1, 1.5);
        let f = jet_from_expr(&generic_f(&k), &p).unwrap();
        let ft = jet_from_expr(&Expr::t(), &p).unwrap();
        for nu in [0.1, 1.0, 10.0] {
            worst = worst.min(bochner_residual(&f, nu).unwrap().normalized());
            assert!(bochner_residual(&ft, nu).unwrap().normalized() >= -1e-8);
        }
    }
    assert!(worst < -1e-2, "{worst}");
}

#[test]
fn stated_bochner_constants_fail_on_a_shifted_bubble() {
    // Found by an independent symbolic search; the bound from the identity
    // holds at the same point.
    let e = parse(&bubble_text(1, c(0.5, 1.0), &[c(0.8, -0.3)])).unwrap();
    let prog = JetProgram::new(&e, 1, 3).unwrap();
    let p = HPoint::new(vec![c(0.556, -1.080)], -0.816).unwrap();
    let f = f_jet(&prog, &p);
    let stated = bochner_residual(&f, 1.0).unwrap();
    assert!(stated.slack < 0.0, "{stated:?}");
    let derived = bochner_residual_with(&f, 1.0, BochnerConstants::FROM_IDENTITY).unwrap();
    assert!(derived.slack > 0.0, "{derived:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bochner_identity_holds_for_generic_f(
        k in proptest::array::uniform7(-1.0f64..1.0),
        x in -1.5f64..1.5, y in -1.5f64..1.5, t in -1.5f64..1.5,
    ) {
        let p = HPoint::new(vec![c(x, y)], t).unwrap();
        let f = jet_from_expr(&generic_f(&k), &p).unwrap();
        prop_assert!(bochner_identity_residual(&f).unwrap() < 1e-10);
        for nu in [0.1, 1.0, 10.0] {
            let b = bochner_residual_with(&f, nu, BochnerConstants::FROM_IDENTITY).unwrap();
            prop_assert!(b.normalized() >= -1e-10, "nu {}: {:?}", nu, b);
        }
    }
}

#[test]
fn bochner_identity_holds_in_two_dimensions() {
    let e = parse("z1*zb2 + 0.3*t*z2*zb1 + zb1*zb2*t - 0.5i*t^2 + exp(0.2*(z1 + zb2))").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let p = random_point(&mut rng, 2, 1.0);
        let g = jet_from_expr(&e, &p).unwrap();
        let f = HJet3 {
            point: g.point.clone(),
            jet: g.jet.re(),
        };
        assert!(bochner_identity_residual(&f).unwrap() < 1e-10);
    }
}
