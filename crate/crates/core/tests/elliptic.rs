use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simvar_core::elliptic::{
    carlson_rf, exact_nutation, jacobi_sn, nutation_cubic, nutation_period, top_motion_constants, NutationCubic,
};
use simvar_core::systems::{preset, LagrangeTopParams};

fn table3() -> (LagrangeTopParams, NutationCubic) {
    let p = preset("lagrange-top-table3").unwrap();
    let params = p.system.as_top().unwrap().params;
    (params, nutation_cubic(&params, &p.q0, &p.qdot0).unwrap())
}

fn u(c: &NutationCubic, t: f64) -> f64 {
    exact_nutation(c, t).unwrap().cos()
}

proptest! {
    #[test]
    fn rf_at_symmetric_point(x in 1e-6..1e6f64) {
        prop_assert!((carlson_rf(x, x, x).unwrap() * x.sqrt() - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn rf_is_symmetric(x in 0.0..10.0f64, y in 1e-3..10.0f64, z in 1e-3..10.0f64) {
        let a = carlson_rf(x, y, z).unwrap();
        prop_assert!((carlson_rf(z, x, y).unwrap() - a).abs() <= 1e-14 * a);
        prop_assert!((carlson_rf(y, z, x).unwrap() - a).abs() <= 1e-14 * a);
    }

    #[test]
    fn sn_degenerate_moduli(v in -20.0..20.0f64) {
        prop_assert!((jacobi_sn(v, 0.0).unwrap() - v.sin()).abs() <= 1e-12);
        prop_assert!((jacobi_sn(v, 1.0).unwrap() - v.tanh()).abs() <= 1e-12);
    }

    #[test]
    fn sn_is_continuous_in_the_modulus(v in -3.0..3.0f64) {
        prop_assert!((jacobi_sn(v, 1e-12).unwrap() - v.sin()).abs() <= 1e-10);
        prop_assert!((jacobi_sn(v, 1.0 - 1e-12).unwrap() - v.tanh()).abs() <= 1e-5);
    }
}

#[test]
fn period_matches_direct_quadrature() {
    // T = 2∫ du/√f over the band, with u = u₁ + (u₂ − u₁) sin²s removing the endpoint singularities
    let (_, c) = table3();
    let [u1, u2, u3] = c.roots;
    let c3 = c.coefficients[0];
    let n = 20_000;
    let mut sum = 0.0;
    for k in 0..n {
        let s = (k as f64 + 0.5) / n as f64 * std::f64::consts::FRAC_PI_2;
        let uu = u1 + (u2 - u1) * s.sin().powi(2);
        sum += 2.0 / (c3 * (u3 - uu)).sqrt();
    }
    let quad = 2.0 * sum * std::f64::consts::FRAC_PI_2 / n as f64;
    let t = nutation_period(&c).unwrap();
    assert!((quad - t).abs() <= 1e-10 * t, "{quad} vs {t}");
}

#[test]
fn periodicity_at_random_times() {
    let (_, c) = table3();
    let t = nutation_period(&c).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let s: f64 = rng.random_range(0.0..5.0);
        let d = exact_nutation(&c, s + t).unwrap() - exact_nutation(&c, s).unwrap();
        assert!(d.abs() <= 1e-9, "t = {s}: {d:e}");
    }
}

#[test]
fn differential_identity_over_one_period() {
    let (_, c) = table3();
    let t = nutation_period(&c).unwrap();
    let e = 1e-5;
    for k in 0..400 {
        let s = t * k as f64 / 400.0;
        let du = (-u(&c, s + 2.0 * e) + 8.0 * u(&c, s + e) - 8.0 * u(&c, s - e) + u(&c, s - 2.0 * e)) / (12.0 * e);
        let r = du * du - c.eval(u(&c, s));
        assert!(r.abs() <= 1e-6, "t = {s}: {r:e}");
    }
}

#[test]
fn turning_points_match_band_edges() {
    let (_, c) = table3();
    let t = nutation_period(&c).unwrap();
    let (lo, hi) = (0..=4000)
        .map(|k| exact_nutation(&c, t * k as f64 / 4000.0).unwrap())
        .fold((f64::MAX, f64::MIN), |(a, b), th| (a.min(th), b.max(th)));
    // sampled at half and whole periods, where the edges are attained
    assert!((hi - c.roots[0].acos()).abs() <= 1e-9);
    assert!((lo - c.roots[1].acos()).abs() <= 1e-9);
    assert!((hi - std::f64::consts::FRAC_PI_3).abs() <= 1e-9);
}

#[test]
fn satisfies_the_nutation_equation() {
    // θ̈ = (m + φ̇² cos θ − a φ̇) sin θ with φ̇ = (b − a cos θ)/sin²θ
    let (params, c) = table3();
    let p = preset("lagrange-top-table3").unwrap();
    let k = top_motion_constants(&params, &p.q0, &p.qdot0).unwrap();
    let th = |t: f64| exact_nutation(&c, t).unwrap();
    let residual = |s: f64, e: f64| {
        let acc = (-th(s + 2.0 * e) + 16.0 * th(s + e) - 30.0 * th(s) + 16.0 * th(s - e) - th(s - 2.0 * e))
            / (12.0 * e * e);
        let x = th(s);
        let phi_dot = (k.b - k.a * x.cos()) / x.sin().powi(2);
        acc - (k.m + phi_dot * phi_dot * x.cos() - k.a * phi_dot) * x.sin()
    };
    let period = nutation_period(&c).unwrap();
    let worst = |e: f64| (1..50).map(|j| residual(period * j as f64 / 50.0, e).abs()).fold(0.0, f64::max);
    let (coarse, fine) = (worst(1e-2), worst(2.5e-3));
    assert!(fine < coarse / 50.0, "{coarse:e} → {fine:e}");
    assert!(fine < 1e-3 * k.m);
}
