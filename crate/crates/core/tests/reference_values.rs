//! Reference values checked against closed forms and hand calculations.

use weylbc::amplitude::{neumann_terms, solve_amplitude_march};
use weylbc::bounds::{amplitude_bound, amplitude_bound_l1, amplitude_bound_linf, lemma1_bound};
use weylbc::goursat::{response_from_goursat, solve_v, wave_kernel_from_v};
use weylbc::oracle::{
    bessel_j1, closed_form_amplitude, closed_form_m, m_riccati, ClosedFormFamily, OracleConfig,
};
use weylbc::response::response_kernel_from_amplitude;
use weylbc::spectral::{
    asymptotic_residual, convergence_threshold, herglotz_check, m_from_amplitude, m_from_response,
};
use weylbc::{Complex64, Potential};

#[test]
fn unit_window_norms() {
    let q = Potential::exp_decay(1.0, 1.0);
    assert!((q.local_l1_norm() - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
    assert_eq!(Potential::constant(1.0).local_l1_norm(), 1.0);
    assert!((Potential::box_(2.0, 0.25).local_l1_norm() - 0.5).abs() < 1e-15);
}

#[test]
fn bessel_amplitude_at_one() {
    assert!((bessel_j1(2.0) - 0.576_724_807_756_873_4).abs() < 1e-12);
    assert!((closed_form_amplitude(1.0, 1.0) - 0.576_724_807_756_873_4).abs() < 1e-12);
    let a = solve_amplitude_march(&Potential::constant(1.0), 3.0, 1.0 / 400.0).unwrap();
    assert!((a.samples[400] - 0.576725).abs() < 1e-4);
    // small-α expansion 1 - α²/2 + α⁴/12
    for j in 1..20 {
        let alpha = a.alpha(j);
        let series = 1.0 - alpha * alpha / 2.0 + alpha.powi(4) / 12.0;
        assert!((a.samples[j] - series).abs() < 1e-5 + alpha.powi(6) / 100.0);
    }
}

#[test]
fn bessel_envelope_decays() {
    // |A(α)| α^{3/2} stays bounded by the asymptotic amplitude (π)^{-1/2}
    for i in 10..200 {
        let alpha = i as f64 * 0.5;
        let scaled = closed_form_amplitude(1.0, alpha).abs() * alpha.powf(1.5);
        assert!(scaled < 0.6, "alpha={alpha}: {scaled}");
    }
}

#[test]
fn neumann_terms_of_unit_constant() {
    let terms = neumann_terms(&Potential::constant(1.0), 1.0, 1.0 / 200.0, 2).unwrap();
    assert!((terms[0].samples[200] - 0.5).abs() < 1e-5);
    assert!((terms[1].samples[200] - 1.0 / 12.0).abs() < 1e-4);
}

#[test]
fn goursat_boundary_and_diagonal() {
    let q = Potential::exp_decay(1.0, 1.0);
    let h = 0.01;
    let v = solve_v(&q, 2.0, h).unwrap();
    for i in 0..=v.n() {
        let u = i as f64 * h;
        // V(u, 0) = -(1/2)∫₀^{u/2} q
        assert!((v.get(i, 0) + 0.5 * q.integral(0.0, u / 2.0)).abs() < 1e-13);
    }
    let w = wave_kernel_from_v(&v);
    for x in [0.25, 0.5, 1.0] {
        let diag = w.eval(x, x).unwrap();
        assert!((diag + 0.5 * q.integral(0.0, x)).abs() < 1e-12);
    }
    let unit = solve_v(&Potential::constant(1.0), 1.0, 0.01).unwrap();
    assert!((unit.interpolate(0.5, 0.0) + 0.125).abs() < 1e-14);
}

#[test]
fn response_kernel_values() {
    let q = Potential::constant(1.0);
    let a = solve_amplitude_march(&q, 1.0, 1.0 / 400.0).unwrap();
    let r = response_kernel_from_amplitude(&a);
    assert_eq!(r.samples[0], -0.5);
    assert!((r.samples[400] + 0.288_362_403_878_436_7).abs() < 1e-4);
    let g = response_from_goursat(&solve_v(&q, 1.0, 1.0 / 400.0).unwrap(), &q);
    assert_eq!(g.samples[0], -0.5);
    assert!((g.samples[800] + 0.288_362_403_878_436_7).abs() < 1e-4);
}

#[test]
fn threshold_and_bounds() {
    assert!((convergence_threshold(1.0) - 5.436_563_656_918_09).abs() < 1e-12);
    assert_eq!(convergence_threshold(0.125), 1.0);
    assert_eq!(lemma1_bound(1.0, 1.0, 0.0, 1), 2.0);
    let b = amplitude_bound(&Potential::constant(1.0), 1.0).unwrap();
    assert!((b - 54.268_293_623_011_395).abs() < 1e-9);
    let b = amplitude_bound_l1(&Potential::box_(1.0, 1.0), 2.0).unwrap();
    assert!((b - std::f64::consts::E.powi(2)).abs() < 1e-12);
    let brute: f64 = (1..30u32)
        .map(|n| {
            let f = |m: u32| (1..=m).map(f64::from).product::<f64>();
            1.0 / (f(n) * f(n + 1))
        })
        .sum();
    assert!((amplitude_bound_linf(1.0, 1.0) - brute).abs() < 1e-15);
}

#[test]
fn constant_and_box_m() {
    let q = Potential::constant(1.0);
    let a = solve_amplitude_march(&q, 8.0, 1.0 / 200.0).unwrap();
    let k = Complex64::new(6.0, 0.0);
    let m = m_from_amplitude(&a, &q, k).unwrap().m;
    assert!((m.re + 37f64.sqrt()).abs() < 1e-4);
    let via_r = m_from_response(&response_kernel_from_amplitude(&a), &q, k)
        .unwrap()
        .m;
    assert!((via_r.re + 37f64.sqrt()).abs() < 1e-4);

    let bx = Potential::box_(1.0, 1.0);
    let cfg = OracleConfig::for_potential(&bx, 1e-4).unwrap();
    let k = Complex64::new(8.0, -0.5);
    let exact = closed_form_m(ClosedFormFamily::Box { c: 1.0, w: 1.0 }, k).unwrap();
    assert!((m_riccati(&bx, k, &cfg).unwrap() - exact).norm() < 1e-7);
    let a = solve_amplitude_march(&bx, 8.0, 1.0 / 200.0).unwrap();
    let m = m_from_amplitude(&a, &bx, k).unwrap().m;
    assert!((m - exact).norm() / exact.norm() < 1e-3);
    assert!(herglotz_check(m, k).agrees);
}

#[test]
fn asymptotic_residual_values() {
    let k = 40.0_f64;
    let res = asymptotic_residual(1.0, k, Complex64::new(-(k * k + 1.0).sqrt(), 0.0));
    assert!((res - 7.810_1e-5).abs() < 1e-8, "{res}");
    let q = Potential::exp_decay(1.0, 1.0);
    let m = m_riccati(
        &q,
        Complex64::new(k, 0.0),
        &OracleConfig::for_potential(&q, 1e-3).unwrap(),
    )
    .unwrap();
    assert!(asymptotic_residual(1.0, k, m) <= 0.05);
}
