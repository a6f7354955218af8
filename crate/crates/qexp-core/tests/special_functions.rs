// SPDX-License-Identifier: MIT OR Apache-2.0

mod common;

use common::{fn_oracle, fo_oracle};
use qexp_core::special::{
    conj_identity_residual, derivative_at_zero, derivative_relative_error, expansion_remainder, fn_direct, fn_scaled,
    remainder_bound, REFLECT_ABOVE_X,
};
use qexp_core::{f_o, fn_eval, GammaPoint, GroupParams, QexpError, QuadratureSpec, C64};

fn quad() -> QuadratureSpec {
    QuadratureSpec::default()
}

#[test]
fn fo_at_one_is_unimodular_and_matches_oracle() {
    let p = GroupParams::new(6).unwrap();
    let v = f_o(C64::new(1.0, 0.0), &p, &quad()).unwrap();
    assert!((v.norm() - 1.0).abs() < 1e-8);
    assert!((v - fo_oracle(C64::new(1.0, 0.0), 6)).norm() < 1e-8);
}

#[test]
fn fo_off_axis_matches_oracle() {
    let p = GroupParams::new(6).unwrap();
    for z in [
        C64::from_polar(1.0, std::f64::consts::PI / 6.0),
        C64::from_polar(0.3, 2.0),
        C64::from_polar(4.0, -2.5),
    ] {
        let got = f_o(z, &p, &quad()).unwrap();
        assert!((got - fo_oracle(z, 6)).norm() < 1e-8, "z = {z}");
    }
}

#[test]
fn fo_rejects_the_cut() {
    let p = GroupParams::new(8).unwrap();
    assert!(matches!(
        f_o(C64::new(-2.0, 0.0), &p, &quad()),
        Err(QexpError::Domain(_))
    ));
    assert!(matches!(
        f_o(C64::new(0.0, 0.0), &p, &quad()),
        Err(QexpError::Domain(_))
    ));
}

#[test]
fn fn_matches_explicit_product() {
    for n in [6usize, 8] {
        let p = GroupParams::new(n).unwrap();
        for k in 0..n {
            for x in [-1.3, 0.2, 1.7] {
                let got = fn_eval(p.point(k as i64, x), &p, &quad()).unwrap();
                let want = fn_oracle(k, f64::exp(x), n);
                assert!((got - want).norm() < 1e-8, "N={n} k={k} x={x}: {got} vs {want}");
            }
        }
    }
}

#[test]
fn reflected_branch_matches_explicit_product() {
    let p = GroupParams::new(6).unwrap();
    for k in [0usize, 3, 5] {
        let x = REFLECT_ABOVE_X + 0.7;
        let got = fn_eval(p.point(k as i64, x), &p, &quad()).unwrap();
        let want = fn_oracle(k, x.exp(), 6);
        assert!((got - want).norm() < 1e-7, "k={k}: {got} vs {want}");
    }
}

#[test]
fn removable_factor_at_r_one() {
    // N = 8, k = 4: the s = 2 factor (1 - r)/(1 - r) is dropped
    let p = GroupParams::new(8).unwrap();
    let got = fn_direct(p.point(4, 0.0), &p, &quad()).unwrap();
    assert!(got.re.is_finite() && got.im.is_finite());
    let lim = 0.5 * (fn_oracle(4, 1.0 + 1e-6, 8) + fn_oracle(4, 1.0 - 1e-6, 8));
    assert!((got - lim).norm() < 1e-8, "{got} vs {lim}");
}

#[test]
fn zero_and_scaling() {
    let p = GroupParams::new(6).unwrap();
    assert_eq!(fn_eval(GammaPoint::Zero, &p, &quad()).unwrap(), C64::new(1.0, 0.0));
    let z = p.point(4, -0.4);
    assert_eq!(
        fn_scaled(GammaPoint::IDENTITY, z, &p, &quad()).unwrap(),
        fn_eval(z, &p, &quad()).unwrap()
    );
    assert_eq!(fn_scaled(GammaPoint::Zero, z, &p, &quad()).unwrap(), C64::new(1.0, 0.0));
    let a = fn_scaled(p.point(1, 0.0), GammaPoint::IDENTITY, &p, &quad()).unwrap();
    assert_eq!(a, fn_eval(p.point(1, 0.0), &p, &quad()).unwrap());
}

#[test]
fn odd_or_small_n_rejected() {
    for n in [4usize, 5, 7] {
        assert!(GroupParams::new(n).is_err());
    }
}

#[test]
fn continuity_at_zero_is_monotone() {
    for n in [6usize, 8] {
        let p = GroupParams::new(n).unwrap();
        for k in 0..n as i64 {
            let d: Vec<f64> = [1e-2f64, 1e-4, 1e-6]
                .iter()
                .map(|r| (fn_eval(p.point(k, r.ln()), &p, &quad()).unwrap() - 1.0).norm())
                .collect();
            assert!(d[0] > d[1] && d[1] > d[2], "N={n} k={k}: {d:?}");
            assert!(d[2] < 1e-4);
        }
    }
}

#[test]
fn one_sided_slope_matches_closed_form() {
    let eps: f64 = 1e-5;
    for n in [6usize, 8] {
        let p = GroupParams::new(n).unwrap();
        for k in 0..n {
            let cf = derivative_at_zero(k, &p);
            let fd = (fn_eval(p.point(k as i64, eps.ln()), &p, &quad()).unwrap() - 1.0) / eps;
            let scale = cf.norm().max(0.5 / p.hbar().sin());
            assert!((fd - cf).norm() / scale < 1e-4, "N={n} k={k}");
            assert!(derivative_relative_error(k, eps, &p, &quad()).unwrap() < 1e-4);
        }
    }
}

#[test]
fn derivative_value_n6_k0() {
    let p = GroupParams::new(6).unwrap();
    let d = derivative_at_zero(0, &p);
    assert!(d.re.abs() < 1e-15);
    assert!((d.im + 0.577_350_269_189_625_8).abs() < 1e-12);
}

#[test]
fn remainder_vanishes_and_is_bounded() {
    let p = GroupParams::new(6).unwrap();
    for t in [p.point(0, 0.0), p.point(2, 0.5), p.point(5, -0.3)] {
        let r = expansion_remainder(1e-6, t, &p, &quad()).unwrap();
        assert!(r.value.norm() <= 1e-3);
        let (bound, rs) = remainder_bound(t, &p, &quad()).unwrap();
        assert!(rs.iter().all(|e| e.value.norm() <= bound));
    }
}

#[test]
fn remainder_rearrangement_at_lambda_one() {
    let p = GroupParams::new(6).unwrap();
    let t = GammaPoint::IDENTITY;
    let r = expansion_remainder(1.0, t, &p, &quad()).unwrap();
    let f = fn_eval(t, &p, &quad()).unwrap();
    let lin = (p.q() + p.q().conj()) / C64::new(0.0, 2.0 * p.hbar().sin());
    assert!((r.value - (f - 1.0 - lin)).norm() < 1e-14);
}

#[test]
fn conjugation_identity_examples() {
    let p6 = GroupParams::new(6).unwrap();
    let p8 = GroupParams::new(8).unwrap();
    assert!(conj_identity_residual(0, 1.0, &p6, &quad()).unwrap() <= 1e-7);
    assert!(conj_identity_residual(3, std::f64::consts::E, &p8, &quad()).unwrap() <= 1e-7);
    let fine = quad().halved();
    let a = conj_identity_residual(2, 0.4, &p6, &quad()).unwrap();
    let b = conj_identity_residual(2, 0.4, &p6, &fine).unwrap();
    assert!(a <= 1e-7 && b <= 1e-7);
    assert!(conj_identity_residual(6, 1.0, &p6, &quad()).is_err());
    assert!(conj_identity_residual(0, -1.0, &p6, &quad()).is_err());
}
