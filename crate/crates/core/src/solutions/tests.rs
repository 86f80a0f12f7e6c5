use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::hgroup::ball_volume_mc;
use crate::jets::{compare_jets, jet_fd, FdOptions, HJet3};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn closed_form_amplitude(n: usize, lambda: Complex64, mu: &[Complex64]) -> f64 {
    let mu2: f64 = mu.iter().map(|m| m.norm_sqr()).sum();
    (lambda.im - mu2 / 4.0).powf(n as f64 / 2.0)
}

fn random_point(rng: &mut ChaCha8Rng, n: usize, r: f64) -> HPoint<f64> {
    let z = (0..n)
        .map(|_| c(rng.random_range(-r..r), rng.random_range(-r..r)))
        .collect();
    HPoint::new(z, rng.random_range(-r * r..r * r)).unwrap()
}

fn sample_params() -> Vec<(usize, Complex64, Vec<Complex64>)> {
    vec![
        (1, c(0.0, 1.0), vec![c(0.0, 0.0)]),
        (1, c(0.7, 2.5), vec![c(1.0, -0.5)]),
        (2, c(-1.0, 0.8), vec![c(0.3, 0.4), c(-0.6, 0.2)]),
        (3, c(0.2, 1.7), vec![c(0.5, 0.0), c(0.0, -0.5), c(0.4, 0.4)]),
    ]
}

#[test]
fn derived_amplitude_matches_closed_form() {
    for (n, lambda, mu) in sample_params() {
        let d = derive_amplitude(n, lambda, &mu, AMPLITUDE_PROBES, 1).unwrap();
        let want = closed_form_amplitude(n, lambda, &mu);
        assert!(d.spread < 1e-8, "{d:?}");
        assert!(
            (d.amplitude - want).abs() < 1e-10 * want,
            "n={n}: {} vs {want}",
            d.amplitude
        );
    }
}

#[test]
fn inadmissible_parameters_are_rejected() {
    assert!(matches!(
        Bubble::new(1, c(0.0, 0.2), vec![c(1.0, 0.0)]),
        Err(Error::Inadmissible { .. })
    ));
    assert!(Bubble::new(1, c(0.0, 1.0), vec![]).is_err());
    assert!(Bubble::with_amplitude(1, c(0.0, 1.0), vec![c(0.0, 0.0)], -1.0).is_err());
}

#[test]
fn standard_bubble_at_origin_equals_amplitude() {
    let b = Bubble::new(1, c(0.0, 1.0), vec![c(0.0, 0.0)]).unwrap();
    let o = HPoint::identity(1).unwrap();
    assert!((b.eval(&o).unwrap() - b.amplitude).abs() < 1e-14);
    let e = bubble_expr(&b).unwrap();
    assert!((e.eval(&o).unwrap().re - b.amplitude).abs() < 1e-14);
}

#[test]
fn bubble_decays_like_minus_two_n_on_rays() {
    let b = Bubble::new(2, c(0.3, 1.2), vec![c(0.2, 0.1), c(0.0, -0.4)]).unwrap();
    let dir = HPoint::from_parts(&[(0.6, 0.2), (-0.3, 0.5)], 0.7).unwrap();
    let ratio = |r: f64| {
        let p = dir.dilate(r / dir.norm()).unwrap();
        b.eval(&p).unwrap() * r.powi(2 * 2)
    };
    let (a, z) = (ratio(1e3), ratio(1e5));
    assert!((a - z).abs() < 1e-2 * z, "{a} vs {z}");
}

#[test]
fn bubbles_solve_the_equation() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (n, lambda, mu) in sample_params() {
        let b = Bubble::new(n, lambda, mu).unwrap();
        let e = bubble_expr(&b).unwrap();
        let prog = ResidualProgram::new(&e, n).unwrap();
        for _ in 0..40 {
            let p = random_point(&mut rng, n, 3.0);
            assert!(prog.residual(&p).unwrap() < 1e-9);
            assert!((prog.values(&p).unwrap().0 - b.eval(&p).unwrap()).abs() < 1e-13);
        }
    }
}

#[test]
fn constants_are_not_solutions() {
    let p = HPoint::from_parts(&[(0.1, 0.2)], 0.3).unwrap();
    assert_eq!(residual_critical(&Expr::one(), 1, &p).unwrap(), 1.0);
    assert_eq!(critical_exponent(1), 3.0);
    assert_eq!(homogeneous_dim(1), 4.0);
}

#[test]
fn transforms_preserve_solutions() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (n, lambda, mu) in sample_params().into_iter().take(3) {
        let b = Bubble::new(n, lambda, mu).unwrap();
        for _ in 0..3 {
            let zeta = random_point(&mut rng, n, 1.5);
            let s = rng.random_range(0.3..3.0);
            let v = transform_solution(&b, &zeta, s).unwrap();
            let prog = ResidualProgram::new(&v, n).unwrap();
            for _ in 0..5 {
                let p = random_point(&mut rng, n, 2.0);
                assert!(prog.residual(&p).unwrap() < 1e-8);
                // Direct evaluation of s^n u(ζ ∘ δ_s p).
                let q = zeta.mul(&p.dilate(s).unwrap()).unwrap();
                let want = s.powi(n as i32) * b.eval(&q).unwrap();
                let got = prog.values(&p).unwrap().0;
                assert!((got - want).abs() < 1e-12 * want.max(1.0));
            }
        }
    }
    let b = Bubble::new(1, c(0.0, 1.0), vec![c(0.0, 0.0)]).unwrap();
    let id = transform_solution(&b, &HPoint::identity(1).unwrap(), 1.0).unwrap();
    let p = HPoint::from_parts(&[(0.3, -0.2)], 0.5).unwrap();
    assert!((id.eval(&p).unwrap().re - b.eval(&p).unwrap()).abs() < 1e-15);
}

#[test]
fn default_grid_is_admissible_and_deterministic() {
    for n in 1..=3 {
        let g = default_grid(n, 50, 7);
        assert_eq!(g.len(), 50);
        assert_eq!(g, default_grid(n, 50, 7));
        for (lambda, mu) in &g {
            assert!(check_params(n, *lambda, mu).is_ok());
        }
    }
}

#[test]
fn euclidean_bubble_values_and_residual() {
    let v = EuclideanBubble::new(3, 1.0, vec![0.0; 3]).unwrap();
    assert!((v.value(&[0.0; 3]).unwrap() - 3f64.powf(0.25)).abs() < 1e-15);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 3..6 {
        let x0: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v = EuclideanBubble::new(n, rng.random_range(0.5..2.0), x0).unwrap();
        for _ in 0..100 {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            assert!(euclidean_residual(&v, &x).unwrap() < 1e-10);
        }
        // Finite-difference Laplacian as an oracle for the radial formula.
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let h = 1e-4;
        let mut fd = 0.0;
        for i in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            fd += (v.value(&xp).unwrap() - 2.0 * v.value(&x).unwrap() + v.value(&xm).unwrap())
                / (h * h);
        }
        let lap = v.laplacian(&x).unwrap();
        assert!((fd - lap).abs() < 1e-5 * lap.abs().max(1.0));
    }
    let v = EuclideanBubble::new(4, 1.3, vec![0.5; 4]).unwrap();
    let along = |s: f64| v.value(&[0.5 + s, 0.5, 0.5, 0.5]).unwrap();
    assert!(along(0.0) > along(0.5) && along(0.5) > along(2.0));
    assert!(EuclideanBubble::new(2, 1.0, vec![0.0; 2]).is_err());
}

#[test]
fn decay_ratios_bounded_for_bubbles_and_not_for_constants() {
    let b = Bubble::new(1, c(0.0, 1.0), vec![c(0.0, 0.0)]).unwrap();
    let radii = [10.0, 100.0, 1000.0];
    let ub = |p: &HPoint<f64>| b.eval(p);
    let r = decay_check(&ub, 1, &radii, 2000, 1).unwrap();
    assert!(r.iter().all(|s| s.value < 2.0 * b.amplitude), "{r:?}");
    let one = |_: &HPoint<f64>| Ok(1.0);
    let r = decay_check(&one, 1, &radii, 100, 1).unwrap();
    assert!(r[2].value / r[0].value > 50.0);

    let b2 = Bubble::new(2, c(0.1, 1.5), vec![c(0.2, 0.3), c(0.0, 0.1)]).unwrap();
    let ub2 = |p: &HPoint<f64>| b2.eval(p);
    let r = decay_check(&ub2, 2, &radii, 2000, 2).unwrap();
    assert!(r[0].value > r[1].value && r[1].value > r[2].value, "{r:?}");
}

#[test]
fn lower_bound_ratios_stay_in_a_band() {
    let b = Bubble::new(1, c(0.0, 1.0), vec![c(0.0, 0.0)]).unwrap();
    // Along the t-axis u(0,t)·t → C.
    let p = HPoint::from_parts(&[(0.0, 0.0)], 1e6).unwrap();
    assert!((b.eval(&p).unwrap() * 1e6 - b.amplitude).abs() < 1e-6);

    let b2 = Bubble::new(2, c(0.1, 1.5), vec![c(0.2, 0.3), c(0.0, 0.1)]).unwrap();
    let e = bubble_expr(&b2).unwrap();
    let r = lower_bound_check(&e, 2, &[10.0, 100.0, 1000.0], 2000, 3).unwrap();
    let hi = r.iter().map(|s| s.value).fold(0.0, f64::max);
    let lo = r.iter().map(|s| s.value).fold(f64::INFINITY, f64::min);
    assert!(lo > 0.0 && hi / lo < 10.0, "{r:?}");

    let sub = parse_expr("z1*zb1 + t*t");
    assert!(matches!(
        lower_bound_check(&sub, 1, &[2.0], 50, 1),
        Err(Error::NotSuperharmonic { .. })
    ));
}

fn parse_expr(s: &str) -> Expr {
    crate::expr::parse(s).unwrap()
}

#[test]
fn gradient_estimates_scale_and_separate_controls() {
    let b = Bubble::new(1, c(0.0, 1.0), vec![c(0.0, 0.0)]).unwrap();
    let e = bubble_expr(&b).unwrap();
    let radii = [10.0, 100.0, 1000.0];
    let r = gradient_estimate_check(&e, 1, &radii, 4000, 9).unwrap();
    let hi = r.iter().map(|s| s.value).fold(0.0, f64::max);
    let lo = r.iter().map(|s| s.value).fold(f64::INFINITY, f64::min);
    assert!(hi / lo < 4.0, "{r:?}");

    // v = s^n u∘δ_s at radius R matches u at radius sR on the same draws.
    let s = 10.0;
    let v = transform_solution(&b, &HPoint::identity(1).unwrap(), s).unwrap();
    let rv = gradient_estimate_check(&v, 1, &[10.0], 4000, 9).unwrap();
    let ru = gradient_estimate_check(&e, 1, &[100.0], 4000, 9).unwrap();
    assert!((rv[0].value - ru[0].value).abs() < 1e-9 * ru[0].value);

    // e^{nt} overflows beyond |t| ~ 700, so the control uses smaller radii.
    let control = parse_expr("exp(t)");
    let rc = gradient_estimate_check(&control, 1, &[1.0, 3.0, 10.0], 4000, 9).unwrap();
    assert!(rc[2].value / rc[0].value > 50.0, "{rc:?}");

    let (sup, used) = global_gradient_sup(&e, 1, 1e3, 4000, 1).unwrap();
    assert!(sup.is_finite() && used == 4000);
}

#[test]
fn cutoff_profile_and_gradient() {
    let spec = CutoffSpec { r: 2.0 };
    let inside = HPoint::from_parts(&[(0.3, 0.2)], 0.1).unwrap();
    assert_eq!(cutoff_eval(spec, &inside).unwrap(), (1.0, 0.0));
    let outside = HPoint::from_parts(&[(3.0, 0.0)], 0.0).unwrap();
    assert_eq!(cutoff_eval(spec, &outside).unwrap(), (0.0, 0.0));
    assert_eq!(ramp(0.75).0, 0.5);

    // Jet gradient against finite differences of the value.
    let cut = Cutoff::new(1, spec).unwrap();
    let p = HPoint::from_parts(&[(1.0, 0.4)], 0.9).unwrap();
    let j = cut.jet(&p).unwrap();
    let f = |q: &HPoint<f64>| Ok(Complex64::new(cut.eval(q)?.0, 0.0));
    let opts = FdOptions {
        order: 1,
        ..FdOptions::default()
    };
    let fd = jet_fd(&f, &p, &opts).unwrap();
    let sym = HJet3 {
        point: p.clone(),
        jet: j.clone(),
    };
    assert!(compare_jets(&fd, &sym).unwrap().max_rel < 1e-7);

    // sup |∂η| · R is the same for R and 2R on dilated draws.
    let sup_scaled = |r: f64| {
        let cut = Cutoff::new(2, CutoffSpec { r }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut best = 0.0f64;
        for _ in 0..2000 {
            let q = crate::hgroup::sample_box(&mut rng, 2, r);
            best = best.max(cut.eval(&q).unwrap().1 * r);
        }
        best
    };
    let (a, b) = (sup_scaled(3.0), sup_scaled(6.0));
    assert!(a > 0.0 && (a - b).abs() < 1e-9 * a, "{a} vs {b}");
}

#[test]
fn unit_integral_reproduces_ball_volume() {
    for n in 1..=2 {
        let a = integral_mc(n, Region::Ball { r: 1.7 }, 20_000, 13, |_| Ok(1.0)).unwrap();
        let b = ball_volume_mc(n, 1.7, 20_000, 13).unwrap();
        assert_eq!(a, b);
    }
    let ann = integral_mc(
        1,
        Region::Annulus {
            inner: 1.0,
            outer: 2.0,
        },
        20_000,
        1,
        |_| Ok(1.0),
    )
    .unwrap();
    let ball = integral_mc(1, Region::Ball { r: 2.0 }, 20_000, 1, |_| Ok(1.0)).unwrap();
    assert!(ann.value < ball.value);
    assert!(integral_mc(
        1,
        Region::Annulus {
            inner: 2.0,
            outer: 1.0
        },
        10,
        1,
        |_| Ok(1.0)
    )
    .is_err());
}

#[test]
fn divergence_of_bump_fields_integrates_to_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for k in 0..5 {
        let n = 1 + k % 2;
        let w = BumpField::random(&mut rng, n).unwrap();
        let est = divergence_integral(&w, 40_000, k as u64).unwrap();
        assert!(est.within(0.0, 3.0), "{est:?}");
        assert!(est.std_err > 0.0);
    }
}

#[test]
fn lemma_integrands_vanish_on_bubbles() {
    let b = Bubble::new(1, c(0.0, 1.0), vec![c(0.0, 0.0)]).unwrap();
    let chk = lemma_pipeline(&b, 3.0, 7.0, 0.01, 8000, 1).unwrap();
    assert!(chk.consistent_with_zero(3.0, 1e-8), "{chk:?}");
    assert!(chk.rhs.value > 0.0 && chk.lhs_scale.value > 0.0);
}
