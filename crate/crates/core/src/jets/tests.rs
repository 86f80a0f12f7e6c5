use num_complex::Complex64;
use num_rational::Rational64;

use super::*;
use crate::expr::{parse, Expr};
use crate::hgroup::HPoint;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn pt1(z: Complex64, t: f64) -> HPoint<f64> {
    HPoint::new(vec![z], t).unwrap()
}

fn pt2() -> HPoint<f64> {
    HPoint::new(vec![c(0.3, -0.7), c(-0.4, 0.5)], 0.6).unwrap()
}

fn sym(e: &Expr, p: &HPoint<f64>) -> Jet<Complex64> {
    jet_from_expr(e, p).unwrap().jet
}

fn assert_jets_close(a: &Jet<Complex64>, b: &Jet<Complex64>, tol: f64) {
    assert_eq!(a.order(), b.order());
    for (i, (x, y)) in a.values().iter().zip(b.values()).enumerate() {
        let scale = x.norm().max(y.norm()).max(1.0);
        assert!(
            (x - y).norm() <= tol * scale,
            "entry {} differs: {x} vs {y}",
            word_name(&a.shape().word(i))
        );
    }
}

#[test]
fn symbolic_jet_of_t() {
    let p = pt1(c(1.0, 2.0), 0.5);
    let j = jet_from_expr(&Expr::t(), &p).unwrap();
    assert_eq!(j.get(&[Letter::T]), c(1.0, 0.0));
    assert_eq!(j.get(&[Letter::Z(0)]), c(0.0, 1.0) * c(1.0, -2.0));
    assert_eq!(j.get(&[Letter::Zb(0)]), -c(0.0, 1.0) * c(1.0, 2.0));
    assert_eq!(j.get(&[Letter::Z(0), Letter::Zb(0)]), c(0.0, 1.0));
    assert_eq!(j.get(&[Letter::Zb(0), Letter::Z(0)]), c(0.0, -1.0));
}

#[test]
fn symbolic_jet_of_constant_and_radius() {
    let p = pt1(c(1.0, 1.0), 0.0);
    let j = jet_from_expr(&Expr::int(4), &p).unwrap();
    assert!(j.jet.values()[1..].iter().all(|v| *v == c(0.0, 0.0)));
    let r = jet_from_expr(&Expr::radius2(1), &p).unwrap();
    assert_eq!(r.get(&[Letter::Z(0)]), c(1.0, -1.0));
    assert_eq!(r.get(&[Letter::Z(0), Letter::Zb(0)]), c(1.0, 0.0));
}

#[test]
fn algebra_matches_symbolic_products_and_transcendentals() {
    let p = pt2();
    let a = parse("z1*zb2 + t^2 - 0.5i*z2").unwrap();
    let b = parse("1 + zb1*z1 + t*z2").unwrap();
    let ja = sym(&a, &p);
    let jb = sym(&b, &p);
    assert_jets_close(&ja.mul_jet(&jb), &sym(&(a.clone() * b.clone()), &p), 1e-12);
    assert_jets_close(&jb.recip(), &sym(&b.pow_int(-1), &p), 1e-12);
    assert_jets_close(&ja.exp(), &sym(&a.exp(), &p), 1e-11);
    assert_jets_close(&jb.powi(3), &sym(&b.pow_int(3), &p), 1e-12);
    assert_jets_close(&ja.conj(), &sym(&a.conj(), &p), 1e-14);
    let pos = parse("2 + z1*zb1 + z2*zb2 + t^2").unwrap();
    let jp = sym(&pos, &p);
    assert_jets_close(&jp.ln(), &sym(&pos.log_pos(), &p), 1e-12);
    assert_jets_close(
        &jp.powf(-1.5),
        &sym(&pos.pow_pos(Rational64::new(-3, 2)), &p),
        1e-12,
    );
}

#[test]
fn compose_matches_exp() {
    let p = pt2();
    let a = parse("z1*t + zb2").unwrap();
    let ja = sym(&a, &p);
    let e0 = ja.value().exp();
    let composed = ja.compose(&[e0, e0, e0, e0]);
    assert_jets_close(&composed, &ja.exp(), 1e-13);
}

#[test]
fn derivative_shifts_words() {
    let p = pt2();
    let a = parse("z1*zb1*t + z2^3").unwrap();
    let ja = sym(&a, &p);
    let d = ja.derivative(Letter::Zb(0));
    assert_eq!(d.order(), 2);
    assert_eq!(
        *d.get(&[Letter::T, Letter::Z(1)]),
        *ja.get(&[Letter::Zb(0), Letter::T, Letter::Z(1)])
    );
}

#[test]
fn mixed_orders_truncate() {
    let p = pt2();
    let ja = sym(&parse("z1*t").unwrap(), &p);
    let low = ja.truncate(1);
    let s = &ja + &low;
    assert_eq!(s.order(), 1);
    assert_eq!(*s.get(&[Letter::T]), *ja.get(&[Letter::T]) * 2.0);
}

#[test]
fn fd_of_t_is_exact_to_roundoff() {
    let p = pt1(c(0.4, -0.3), 1.2);
    let e = Expr::t();
    let f = |q: &HPoint<f64>| e.eval(q);
    let j = jet_fd(&f, &p, &FdOptions::default()).unwrap();
    assert!((j.get(&[Letter::T]) - 1.0).norm() < 1e-10);
}

#[test]
fn fd_of_exponential_in_t() {
    let p = pt1(c(0.2, 0.1), 0.3);
    let e = Expr::t().exp();
    let f = |q: &HPoint<f64>| e.eval(q);
    let j = jet_fd(&f, &p, &FdOptions::default()).unwrap();
    assert!((j.get(&[Letter::T, Letter::T]) - 0.3f64.exp()).norm() < 1e-7);
}

#[test]
fn fd_frame_recombination_on_linear_functions() {
    // Validates Z = (X - iY)/2 against the symbolic producer on linear and
    // quadratic functions of each coordinate. Third-order entries carry
    // roundoff of order eps/h³.
    let p = pt2();
    for text in ["z1", "zb1", "z2", "t", "z1*zb2 + t"] {
        let e = parse(text).unwrap();
        let f = |q: &HPoint<f64>| e.eval(q);
        let fd = jet_fd(&f, &p, &FdOptions::default()).unwrap();
        let s = jet_from_expr(&e, &p).unwrap();
        let cmp = compare_jets(&fd, &s).unwrap();
        assert!(
            cmp.max_rel < 1e-7,
            "{text}: {} at {}",
            cmp.max_rel,
            cmp.worst_word
        );
    }
}

#[test]
fn producers_agree_on_a_bubble() {
    let p = pt1(c(1.0, 0.0), 1.0);
    let u = parse("abs(t + i*z1*zb1 + i)^(-1)").unwrap();
    let f = |q: &HPoint<f64>| u.eval(q);
    let fd = jet_fd(&f, &p, &FdOptions::default()).unwrap();
    let s = jet_from_expr(&u, &p).unwrap();
    let cmp = compare_jets(&fd, &s).unwrap();
    assert!(cmp.max_rel < 1e-7, "{} at {}", cmp.max_rel, cmp.worst_word);
}

#[test]
fn compare_flags_corrupted_entry() {
    let p = pt2();
    let e = parse("exp(z1*zb2) + t*z2").unwrap();
    let a = jet_from_expr(&e, &p).unwrap();
    assert_eq!(compare_jets(&a, &a).unwrap().max_rel, 0.0);
    let mut b = a.clone();
    let w = [Letter::Z(0), Letter::Zb(1)];
    let v = b.get(&w);
    b.jet.set(&w, v + c(1e-3, 0.0) * (1.0 + v.norm()));
    let cmp = compare_jets(&a, &b).unwrap();
    assert_eq!(cmp.worst_word, word_name(&w));
    let mut other = a.clone();
    other.point = pt2().dilate(2.0).unwrap();
    assert!(compare_jets(&a, &other).is_err());
}

#[test]
fn richardson_raises_convergence_order() {
    let p = pt1(c(0.7, -0.2), 0.4);
    let u = parse("abs(t + i*z1*zb1 + 0.3*z1 + 2i)^(-1)").unwrap();
    let f = |q: &HPoint<f64>| u.eval(q);
    let s = JetProgram::new(&u, 1, 1).unwrap().eval(&p).unwrap();
    let steps = [1e-2, 5e-3, 2.5e-3];
    let plain = fd_convergence(&f, &s, &steps, false).unwrap();
    assert!((plain.slope - 2.0).abs() < 0.5, "{plain:?}");
    let rich = fd_convergence(&f, &s, &steps, true).unwrap();
    assert!((rich.slope - 4.0).abs() < 0.5, "{rich:?}");
}

#[test]
fn gauged_jets_track_cancellation() {
    let p = pt2();
    let a = sym(&parse("z1*z1 + t").unwrap(), &p).gauged();
    let d = &a - &a;
    assert!(d.values().iter().all(|g| g.value == c(0.0, 0.0)));
    assert!(d.value().magnitude > 0.0);
}

#[test]
fn out_of_range_words_are_rejected() {
    let shape = JetShape::get(1, 2);
    assert!(shape.index(&[Letter::Z(1)]).is_none());
    assert!(shape.index(&[Letter::T, Letter::T, Letter::T]).is_none());
    assert_eq!(shape.len(), 1 + 3 + 9);
}
