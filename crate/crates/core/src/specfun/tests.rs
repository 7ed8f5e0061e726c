use super::*;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn m(b: f64) -> Modulus {
    Modulus::real(b).unwrap()
}

// Values of G_b(Q/2 + a) from 30-digit mpmath quadrature of the same integral
// (independent implementation, frozen here).
#[test]
fn frozen_reference_values() {
    let cases = [
        (m(0.7), c(0.1, 0.2), c(-0.031866784634705793367, -1.0610170843182815151)),
        (m(0.6), c(-0.25, -1.5), c(-0.093889915611326464341, -0.011830882137108175949)),
        (m(0.8), c(0.3, 3.0), c(0.20727147290171024196, -0.97828362352612679153)),
        (
            Modulus::phase(std::f64::consts::PI / 8.0).unwrap(),
            c(0.2, 0.1),
            c(0.37966573473802414467, -1.0447496951702279415),
        ),
    ];
    for (md, a, want) in cases {
        let got = Gb(md.qq() * 0.5 + a, &md).unwrap();
        assert!((got.value - want).norm() < 1e-12, "{md:?} {a}: {} vs {want}", got.value);
        assert!(got.err_est < 1e-11);
    }
}

#[test]
fn central_value_closed_form() {
    // G_b(Q/2)^2 = e^{-i pi Q^2/4} from reflection; the integral fixes the sign
    for b in [0.6, 0.7, 1.0] {
        let md = m(b);
        let q = md.qq();
        let v = Gb(q * 0.5, &md).unwrap().value;
        let want = (-I * PI * q * q / 8.0).exp();
        assert!((v - want).norm() < 1e-13, "b={b}");
    }
}

#[test]
fn adaptive_and_fast_paths_agree() {
    let md = m(0.7);
    for a in [c(0.0, 0.0), c(0.2, 1.0), c(-0.3, -3.0), c(0.1, 6.5), c(0.0, -12.0)] {
        let fast = phi_fast(a, &md).0;
        let slow = phi_integral(a, &md, &default_contour(&md)).unwrap().value;
        assert!((fast - slow).norm() < 1e-11, "{a}: {fast} vs {slow}");
    }
}

#[test]
fn lower_line_agrees_with_upper_line() {
    let md = m(0.65);
    let a = c(0.12, -9.0);
    let up = phi_integral(a, &md, &default_contour(&md).with_tol(1e-14)).unwrap().value;
    let mut low = default_contour(&md);
    low.eta = -low.eta;
    let dn = phi_integral(a, &md, &low).unwrap().value;
    assert!((up - dn).norm() < 1e-9 * up.norm().max(1.0));
    assert!((phi_fast(a, &md).0 - up).norm() < 1e-9 * up.norm().max(1.0));
}

#[test]
fn log_gb_at_one_is_unimodular_and_self_dual() {
    let md = m(0.7);
    let v = log_gb_integral(c(1.0, 0.0), &md, &default_contour(&md)).unwrap();
    assert!(v.value.re.abs() < 1e-13);
    let vd = log_gb_integral(c(1.0, 0.0), &md.dual(), &default_contour(&md.dual())).unwrap();
    assert!((v.value - vd.value).norm() < 1e-12);
    // closed form from the residue at t = 0: Phi(0) = i pi (b^2 + b^-2) / 24
    assert!((v.value - I * PI * (0.49 + 1.0 / 0.49) / 24.0).norm() < 1e-12);
}

#[test]
fn log_gb_vanishes_as_x_goes_to_zero() {
    let md = m(0.8);
    let v = log_gb_integral(c(1e-8, 0.0), &md, &default_contour(&md)).unwrap();
    assert!(v.value.norm() < 1e-6, "{}", v.value);
    assert!(v.value.norm() < log_gb_integral(c(1e-4, 0.0), &md, &default_contour(&md)).unwrap().value.norm());
}

#[test]
fn branch_cut_rejected() {
    let md = m(0.7);
    assert_eq!(log_gb_integral(c(-1.0, 0.0), &md, &default_contour(&md)).unwrap_err(), Error::BranchViolation);
    assert!(gb(c(0.0, 0.0), &md).is_err());
}

#[test]
fn reflection_and_gxx_examples() {
    let md = m(0.7);
    let x = c(0.3, 0.1);
    let q = md.qq();
    let lhs = Gb(x, &md).unwrap().value * Gb(q - x, &md).unwrap().value;
    assert!((lhs - (I * PI * x * (x - q)).exp()).norm() < 1e-10);

    let md = m(0.6);
    let x = c(0.25, 0.0);
    let lhs = Gb(x, &md).unwrap().value * Gb(-x, &md).unwrap().value;
    let rhs = -(I * PI * x * x).exp() / (4.0 * (PI * md.b * x).sin() * (PI * x / md.b).sin());
    assert!((lhs - rhs).norm() < 1e-10);
}

#[test]
fn conjugation_example() {
    let md = m(0.75);
    let x = c(0.4, 0.2);
    let xb = x.conj();
    let lhs = Gb(x, &md).unwrap().value.conj();
    let rhs = (I * PI * xb * (md.qq() - xb)).exp() * Gb(xb, &md).unwrap().value;
    assert!((lhs - rhs).norm() < 1e-10);
}

#[test]
fn wb_examples() {
    let md = m(0.7);
    let x = c(0.37, 0.0);
    assert!((wb(x, &md).unwrap().value * wb(-x, &md).unwrap().value - 1.0).norm() < 1e-12);
    let md = m(0.8);
    assert!((wb(c(1.234, 0.0), &md).unwrap().value.norm() - 1.0).abs() < 1e-12);
    let md = m(0.65);
    let x = c(0.2, 0.0);
    let lhs = wb(x + I * md.b, &md).unwrap().value;
    let rhs = 2.0 * wb(x, &md).unwrap().value * (PI * md.b * (md.qq() * 0.5 - I * x)).sin();
    assert!((lhs - rhs).norm() < 1e-10 * rhs.norm());
}

#[test]
fn wb_dual_functional_equation() {
    let md = m(0.7);
    for x in [c(0.1, 0.0), c(-0.4, 0.2), c(0.9, -0.3)] {
        let lhs = wb(x + I / md.b, &md).unwrap().value;
        let rhs = 2.0 * wb(x, &md).unwrap().value * (PI / md.b * (md.qq() * 0.5 - I * x)).sin();
        assert!((lhs - rhs).norm() < 1e-10 * rhs.norm().max(1.0));
    }
}

#[test]
fn asymptotics() {
    for b in [0.6, 0.8] {
        let md = m(b);
        let q = md.qq();
        let zb = 1.0 / md.zeta;
        let up = Gb(c(0.5, 8.0), &md).unwrap().value;
        assert!((up / zb - 1.0).norm() < 1e-6);
        let x = c(0.5, -8.0);
        let dn = Gb(x, &md).unwrap().value;
        assert!((dn * (-I * PI * x * (x - q)).exp() / md.zeta - 1.0).norm() < 1e-6);
    }
}

#[test]
fn poles_and_ladder_overflow() {
    let md = m(0.7);
    assert!(matches!(Gb(c(0.0, 0.0), &md), Err(Error::AtPole(_))));
    assert!(matches!(Gb(-md.b * 2.0 - 1.0 / md.b, &md), Err(Error::AtPole(_))));
    assert!(matches!(Gb_with(c(40.0, 0.1), &md, 5), Err(Error::LadderOverflow(5))));
    let near = Gb(c(1e-3, 0.0), &md).unwrap();
    assert_eq!(near.method, Method::Ladder);
    assert!(near.ladder_steps >= 1);
}

#[test]
fn pole_lattice_enumeration() {
    let md = m(0.7);
    let poles = PoleZeroLattice::gb_poles(&md);
    let zeros = PoleZeroLattice::gb_zeros(&md);
    for (_, _, p) in poles.enumerate(2, 2) {
        let v = Gb(p + c(1e-4, 1e-4), &md).unwrap().value.norm();
        assert!(v > 10.0, "no blowup near {p}: {v}");
    }
    for (_, _, z) in zeros.enumerate(2, 1) {
        let v = Gb(z + c(1e-5, 0.0), &md).unwrap().value.norm();
        assert!(v < 1e-2, "no zero near {z}: {v}");
    }
    let wp = PoleZeroLattice::wb_poles(&md);
    let p = wp.point(1, 0);
    assert!((p - (-I * (md.qq() * 0.5 + md.b))).norm() < 1e-15);
    assert!(wb(p + c(1e-4, 0.0), &md).unwrap().value.norm() > 10.0);
    let z = PoleZeroLattice::wb_zeros(&md).point(0, 1);
    assert!(wb(z + c(1e-5, 0.0), &md).unwrap().value.norm() < 1e-2);
}

#[test]
fn product_representation() {
    let md = Modulus::phase(PI / 8.0).unwrap();
    let x = c(0.3, 0.0);
    let p = gb_product(x, &md, 200).unwrap();
    let l = Gb(x, &md).unwrap();
    assert!((p.value - l.value).norm() < p.err_est + l.err_est + 1e-12);
    let ratio = gb_product(x + md.b, &md, 200).unwrap().value / p.value;
    assert!((ratio - (1.0 - (2.0 * PI * I * md.b * x).exp())).norm() < 1e-10);
    assert_eq!(gb_product(x, &m(0.7), 50).unwrap_err(), Error::WrongRegime);
}

#[test]
fn limit_at_origin() {
    for b in [0.7, 0.9] {
        let v = limit_xGb(&m(b)).unwrap();
        assert!((v.value - 1.0 / (2.0 * PI)).norm() < 1e-8, "b={b}: {}", v.value);
    }
    let md = Modulus::phase(PI / 10.0).unwrap();
    let v = limit_xgb_with(&md, |x| gb_product(x, &md, 400)).unwrap();
    assert!((v.value - 1.0 / (2.0 * PI)).norm() < 1e-8);
}

#[test]
fn residues() {
    let md = m(0.7);
    assert!((residue_inv_Gb(0, 0, &md).unwrap() + 1.0 / (2.0 * PI)).norm() < 1e-16);
    let r10 = residue_inv_Gb(1, 0, &md).unwrap();
    assert!((r10 - (-1.0 / (2.0 * PI)) / (1.0 - md.q * md.q)).norm() < 1e-14);
    for (n, k) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
        let num = residue_inv_Gb_numeric(n, k, &md, 0.01).unwrap();
        let cf = residue_inv_Gb(n, k, &md).unwrap();
        assert!((num - cf).norm() < 1e-8, "({n},{k}): {num} vs {cf}");
    }
    // b^2 = 1/2 makes 1 - q^4 vanish
    let res = Modulus::real(0.5f64.sqrt()).unwrap();
    assert!(matches!(residue_inv_Gb(2, 0, &res), Err(Error::Degenerate(_))));
}

#[test]
fn gb_unimodular_on_positive_axis() {
    let md = m(0.7);
    for x in [1e-6, 0.3, 1.0, 7.0, 1e8] {
        assert!((gb(c(x, 0.0), &md).unwrap().value.norm() - 1.0).abs() < 1e-11, "x={x}");
    }
}

fn strip_point() -> impl Strategy<Value = Complex64> {
    (-1.5f64..3.5, -3.0f64..3.0).prop_map(|(re, im)| c(re, im))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn functional_equations(x in strip_point(), bi in 0usize..3) {
        let md = m([0.6, 0.7, 0.8][bi]);
        prop_assume!(PoleZeroLattice::gb_poles(&md).nearest(x).2 > 1e-2);
        let g = Gb(x, &md).unwrap().value;
        let gp = Gb(x + md.b, &md).unwrap().value;
        let gd = Gb(x + 1.0 / md.b, &md).unwrap().value;
        let scale = g.norm().max(gp.norm()).max(1e-3);
        prop_assert!((gp - (1.0 - (2.0 * PI * I * md.b * x).exp()) * g).norm() < 1e-10 * scale);
        let scale = g.norm().max(gd.norm()).max(1e-3);
        prop_assert!((gd - (1.0 - (2.0 * PI * I * x / md.b).exp()) * g).norm() < 1e-10 * scale);
    }

    #[test]
    fn self_duality(x in strip_point(), bi in 0usize..3) {
        let md = m([0.6, 0.7, 0.8][bi]);
        prop_assume!(PoleZeroLattice::gb_poles(&md).nearest(x).2 > 1e-2);
        let a = Gb(x, &md).unwrap().value;
        let d = Gb(x, &md.dual()).unwrap().value;
        prop_assert!((a - d).norm() < 1e-9 * a.norm().max(1.0));
    }

    #[test]
    fn w_reflection_and_conjugation(re in -3.0f64..3.0, im in -0.4f64..0.4) {
        let md = m(0.7);
        let x = c(re, im);
        let w = wb(x, &md).unwrap().value;
        prop_assert!((w * wb(-x, &md).unwrap().value - 1.0).norm() < 1e-10);
        prop_assert!((w.conj() - wb(-x.conj(), &md).unwrap().value).norm() < 1e-10 * w.norm());
    }
}

#[test]
fn residue_series_matches_rules() {
    for mm in [m(0.7), m(0.45), Modulus::new(Complex64::from_polar(1.0, PI / 8.0)).unwrap()] {
        for a in [c(0.1, 3.0), c(-0.2, 5.0), c(0.15, 12.0), c(0.0, -4.0), c(0.2, -20.0)] {
            let Some((v, _)) = (if a.im > 0.0 { phi_series(a, &mm) } else { phi_series(-a, &mm) }) else { continue };
            let v = if a.im > 0.0 { v } else { -v - 2.0 * PI * I * residue_at_origin(a, &mm) };
            let i = phi_integral(a, &mm, &default_contour(&mm)).unwrap().value;
            assert!((v - i).norm() < 1e-10 * (1.0 + i.norm()), "{a}: {v} vs {i}");
        }
    }
}
