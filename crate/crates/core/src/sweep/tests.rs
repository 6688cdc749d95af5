use super::*;
use crate::analytic::geometric_populations;
use crate::dynamics::{steady_populations_birth_death, DensityMatrix};
use crate::model::reference_params;

fn base_config(j: &str, mode: &str, grid: Option<(f64, f64, usize)>) -> SweepConfig {
    let grid = grid
        .map(|(a, b, n)| format!("delta_omega_hz = {{ min = {a:e}, max = {b:e}, points = {n} }}\n"))
        .unwrap_or_default();
    let text = format!(
        r#"
[model]
omega_c_hz = 27.5e6
delta_q_hz = 3e9
g_hz = 18e6
gamma0_hz = 0.5e6
kappa_hz = 2e3

[sweep]
j = "{j}"
n_bar = [1, 2, 4]
mode = "{mode}"
{grid}"#
    );
    SweepConfig::from_toml_str(&text).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn cooling_below_unity_at_two_thermal_photons() {
    let rows = run_sweep(&base_config("1/4", "analytic", None)).unwrap();
    assert_eq!(rows.len(), 3 * DEFAULT_GRID_POINTS);
    let cooled = rows.iter().any(|r| {
        r.n_bar == 2.0
            && r.delta_omega_hz > 0.0
            && r.n_mean.is_some_and(|n| n < 1.0)
            && r.below_saturation
            && r.good_cavity
            && r.cooling_regime
    });
    assert!(cooled);
}

#[test]
fn odd_sector_goes_sub_poissonian() {
    let rows = run_sweep(&base_config("both", "analytic", None)).unwrap();
    let window: Vec<&SweepRow> =
        rows.iter().filter(|r| r.n_bar == 2.0 && r.cooling_regime && r.g2.is_some()).collect();
    let even_min = window
        .iter()
        .filter(|r| r.j == Bargmann::Quarter)
        .filter_map(|r| r.g2)
        .fold(f64::INFINITY, f64::min);
    let odd_min = window
        .iter()
        .filter(|r| r.j == Bargmann::ThreeQuarters)
        .filter_map(|r| r.g2)
        .fold(f64::INFINITY, f64::min);
    assert!(even_min > 1.0);
    assert!(odd_min < 1.0);
}

#[test]
fn rows_follow_grid_order_and_are_deterministic() {
    let cfg = base_config("both", "analytic", Some((-40e6, 40e6, 9)));
    let a = run_sweep(&cfg).unwrap();
    let b = run_sweep(&cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 3 * 2 * 9);
    assert_eq!((a[0].n_bar, a[0].j, a[0].delta_omega_hz), (1.0, Bargmann::Quarter, -40e6));
    assert_eq!((a[9].n_bar, a[9].j), (1.0, Bargmann::ThreeQuarters));
    assert_eq!(a[53].delta_omega_hz, 40e6);
}

#[test]
fn heating_side_rows_are_empty() {
    let rows = run_sweep(&base_config("1/4", "analytic", Some((-30e6, -10e6, 3)))).unwrap();
    for r in rows {
        assert!(!r.cooling_regime);
        assert!(r.eta.is_some_and(|e| e <= 1.0));
        assert!(r.n_mean.is_none() && r.g2.is_none() && r.g4.is_none());
        assert!(!r.below_saturation);
        assert!(r.error.is_some());
    }
}

#[test]
fn flags_match_validity_checks() {
    let cfg = base_config("both", "analytic", Some((1e6, 54e6, 40)));
    for r in run_sweep(&cfg).unwrap() {
        if let (Some(n), Some(sat)) = (r.n_mean, r.n_sat) {
            assert_eq!(r.below_saturation, n < sat);
        }
        assert_eq!(r.cooling_regime, r.eta.is_some_and(|e| e > 1.0));
    }
}

#[test]
fn reduced_numeric_matches_analytic() {
    let analytic = run_sweep(&base_config("both", "analytic", Some((5e6, 54e6, 8)))).unwrap();
    let numeric = run_sweep(&base_config("both", "reduced-numeric", Some((5e6, 54e6, 8)))).unwrap();
    let mut compared = 0;
    for (a, n) in analytic.iter().zip(&numeric) {
        assert_eq!(n.mode, Mode::ReducedNumeric);
        if let (Some(x), Some(y)) = (a.n_mean, n.n_mean) {
            assert!(rel(y, x) < 1e-6, "{a:?} vs {n:?}");
            compared += 1;
        }
    }
    assert!(compared > 20);
}

#[test]
fn cross_validation_chain_at_fifty_megahertz() {
    let cfg = base_config("1/4", "analytic", None);
    let cv = cross_validate(&cfg, 2.0, Bargmann::Quarter, 50e6, false).unwrap();
    assert!(cv.max_deviation("analytic", "oracle").unwrap() < 1e-10);
    assert!(cv.max_deviation("analytic", "reduced-numeric").unwrap() < 1e-6);
    assert!(cv.full.is_none());
    let text = cv.to_string();
    assert!(text.contains("oracle") && text.contains("reduced-numeric"));
}

#[test]
fn thermal_pair_point() {
    // Qubit pumping switched off: only the thermal pair bath is left.
    let n_bar = 2.0;
    let p = reference_params(n_bar, Drive::Rabi { delta_omega: hz(50e6), omega_r: hz(55e6) });
    let mut r = derive_rates(&p).unwrap();
    r.gamma_up = 0.0;
    r.gamma_down = 0.0;
    r.eta = r.down_rate(&p) / r.up_rate(&p);
    assert!(rel(r.eta, (1.0 + n_bar) / n_bar) < 1e-15);
    let cv = cross_validate_rates(&p, &r, Bargmann::Quarter, &Tolerances::default(), None).unwrap();
    assert!(rel(cv.analytic.n_mean, 2.0 * n_bar) < 1e-12);
    assert!(rel(cv.reduced.n_mean, 2.0 * n_bar) < 1e-6);
    assert!(rel(cv.oracle.n_mean, 2.0 * n_bar) < 1e-10);
}

#[test]
fn eta_two_all_paths_agree() {
    let p = reference_params(1.0, Drive::Rabi { delta_omega: hz(50e6), omega_r: hz(55e6) });
    let mut r = derive_rates(&p).unwrap();
    // Hand-picked so that the total down rate is twice the up rate.
    r.gamma_up = 1.0e4;
    r.gamma_down = 2.0 * r.up_rate(&p) - p.kappa * (1.0 + p.n_bar);
    r.eta = r.down_rate(&p) / r.up_rate(&p);
    assert!(rel(r.eta, 2.0) < 1e-15);

    let m_cutoff = 60;
    let exact: Vec<f64> = (0..m_cutoff).map(|m| 0.5f64.powi(m as i32 + 1)).collect();
    let (geo, _) = geometric_populations(r.eta, m_cutoff).unwrap();
    let (bd, _) = steady_populations_birth_death(r.eta, Bargmann::Quarter, m_cutoff).unwrap();
    let g = build_reduced_generator(&r, &p, Bargmann::Quarter, m_cutoff).unwrap();
    let numeric: Vec<f64> = steady_state(&g).unwrap().rho.populations();
    for m in 0..m_cutoff {
        for v in [geo[m], bd[m], numeric[m]] {
            assert!((v - exact[m]).abs() < 1e-12, "m = {m}");
        }
    }
    let cv = cross_validate_rates(&p, &r, Bargmann::Quarter, &Tolerances::default(), None).unwrap();
    assert!(rel(cv.analytic.n_mean, 2.0) < 1e-15);
    assert!(cv.deviations.iter().all(|d| d.relative < 1e-6));
    let _ = DensityMatrix::diagonal(g.tag(), &numeric).unwrap();
}

#[test]
fn full_numeric_point_runs() {
    let cfg = base_config("1/4", "full-numeric", Some((50e6, 50e6 + 1.0, 2)));
    let row = evaluate_point(&cfg, 2.0, Bargmann::Quarter, 50e6);
    assert_eq!(row.mode, Mode::FullNumeric);
    assert!(row.error.is_none(), "{:?}", row.error);
    let n = row.n_mean.unwrap();
    assert!(n > 0.0 && n < 2.0 * 2.0);
}

#[test]
fn resolve_uses_resonance_or_fixed_drive() {
    let cfg = base_config("1/4", "analytic", None);
    let p = cfg.model_params(2.0, 50e6);
    let pt = resolve_point(&p, Bargmann::Quarter, 1e-3).unwrap();
    let res = pt.resonance.unwrap();
    let beta_z = 0.25 + 1.0 / (pt.rates.eta - 1.0);
    let target = 2.0 * p.shifted_omega_c() + 2.0 * pt.rates.g0 * beta_z;
    assert!((res.omega_r - target).abs() < hz(1e-2));
    let fixed = p.with_omega_r(hz(55e6));
    let pt = resolve_point(&fixed, Bargmann::Quarter, 1e-3).unwrap();
    assert!(pt.resonance.is_none() && pt.fallback.is_none());
    assert_eq!(pt.rates.omega_r, hz(55e6));
}
