//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line per
//! criterion and exits non-zero if any of them fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pairlind_core::algebra::{su11_from_mode, su11_sector, Bargmann};
use pairlind_core::analytic::{analytic_g, analytic_g_special, analytic_moments, cutoff_for_tail, oracle_moments};
use pairlind_core::dynamics::{
    build_full_generator, build_reduced_generator, evolve_sampled, parity_masses, steady_state,
    DensityMatrix, EvolveOptions, FullModelOptions, Generator,
};
use pairlind_core::model::{bath_rates, reference_params, hz, BathParams, Drive};
use pairlind_core::sweep::{cross_validate, evaluate_point, run_sweep, SweepConfig, SweepRow};

const ETAS: [f64; 6] = [1.1, 1.5, 2.0, 5.0, 10.0, 100.0];

struct Outcome {
    pass: bool,
    detail: String,
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b).abs()
    }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn base_config(j: &str, mode: &str, n_bar: &str) -> SweepConfig {
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
n_bar = {n_bar}
mode = "{mode}"
"#
    );
    SweepConfig::from_toml_str(&text).expect("valid reference config")
}

fn closed_form_consistency() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    for j in Bargmann::BOTH {
        for eta in ETAS {
            let a = analytic_moments(eta, j).unwrap();
            let (g2, g4) = analytic_g(eta, j).unwrap();
            let o = oracle_moments(eta, j, cutoff_for_tail(eta, 1e-17).unwrap()).unwrap();
            for (x, y) in [
                (a.beta_z_mean, o.beta_z_mean),
                (a.n_mean, o.n_mean),
                (a.b2, o.b2),
                (a.b4, o.b4),
                (g2, o.g2.unwrap()),
                (g4, o.g4.unwrap()),
            ] {
                worst = worst.max(rel(x, y));
            }
        }
    }
    let t = start.elapsed();
    Outcome {
        pass: worst < 1e-10 && within(t, 1.0),
        detail: format!("max relative deviation {worst:.2e} (limit 1e-10), {t:.2?}"),
    }
}

fn special_case_identity() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    for j in Bargmann::BOTH {
        for eta in ETAS {
            let (g2, g4) = analytic_g(eta, j).unwrap();
            let (s2, s4) = analytic_g_special(eta, j).unwrap();
            let literal = match j {
                Bargmann::Quarter => (3.0 + eta) / 2.0,
                Bargmann::ThreeQuarters => 2.0 * (1.0 + 3.0 * eta) / (1.0 + eta).powi(2),
            };
            worst = worst.max(rel(g2, s2)).max(rel(g4, s4)).max(rel(g2, literal));
        }
    }
    let t = start.elapsed();
    Outcome {
        pass: worst < 1e-12 && within(t, 1.0),
        detail: format!("max relative deviation {worst:.2e} (limit 1e-12), {t:.2?}"),
    }
}

fn solver_vs_formula() -> Outcome {
    let mut worst = 0.0_f64;
    let mut compared = 0;
    let mut missing = 0;
    let mut slowest = Duration::ZERO;
    for n_bar in ["[1]", "[2]", "[4]"] {
        let analytic = run_sweep(&base_config("1/4", "analytic", n_bar)).unwrap();
        let start = Instant::now();
        let numeric = run_sweep(&base_config("1/4", "reduced-numeric", n_bar)).unwrap();
        slowest = slowest.max(start.elapsed());
        for (a, n) in analytic.iter().zip(&numeric) {
            if !a.eta.is_some_and(|e| e >= 1.5) {
                continue;
            }
            match (a.n_mean, n.n_mean, a.g2, n.g2, a.g4, n.g4) {
                (Some(an), Some(nn), Some(ag2), Some(ng2), Some(ag4), Some(ng4)) => {
                    worst = worst.max(rel(nn, an)).max(rel(ng2, ag2)).max(rel(ng4, ag4));
                    compared += 1;
                }
                _ => missing += 1,
            }
        }
    }
    Outcome {
        pass: worst < 1e-6 && compared > 0 && missing == 0 && within(slowest, 10.0),
        detail: format!(
            "{compared} points with eta >= 1.5, max relative deviation {worst:.2e} (limit 1e-6), \
             {missing} unsolved, slowest 401-point sweep {slowest:.2?}"
        ),
    }
}

fn birth_death_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20240601);
    let mut worst = 0.0_f64;
    let mut worst_gap = 0.0_f64;
    let mut tuples = 0;
    while tuples < 50 {
        let mut p = reference_params(0.0, Drive::Rabi { delta_omega: hz(50e6), omega_r: hz(55e6) });
        p.kappa = rng.gen_range(0.1..2.0);
        p.n_bar = rng.gen_range(0.0..3.0);
        p.chi_bar = rng.gen_range(-1.0..1.0);
        let mut r = pairlind_core::model::derive_rates(&p).unwrap();
        r.gamma_up = rng.gen_range(0.05..1.0);
        let eta_target = rng.gen_range(1.2..6.0);
        r.gamma_down = eta_target * r.up_rate(&p) - p.kappa * (1.0 + p.n_bar);
        if r.gamma_down < 0.0 {
            continue;
        }
        r.eta = r.down_rate(&p) / r.up_rate(&p);
        let j = if rng.gen_bool(0.5) { Bargmann::Quarter } else { Bargmann::ThreeQuarters };
        let d = rng.gen_range(2..=6);

        let ours = steady_state(&build_reduced_generator(&r, &p, j, d).unwrap()).unwrap();
        let (raise, lower) = common::sector_ladders(j.value(), d);
        let h = (&raise * &lower) * C64::new(-p.chi_bar, 0.0);
        let l = common::dense_liouvillian(
            &h,
            &[(raise.clone(), lower.clone(), r.down_rate(&p)), (lower, raise, r.up_rate(&p))],
        );
        let (reference, gap) = common::null_state(&l, d);
        let diff = (ours.rho.matrix() - &reference).iter().map(|z| z.norm()).fold(0.0, f64::max);
        worst = worst.max(diff);
        worst_gap = worst_gap.max(gap);
        tuples += 1;
    }
    let t = start.elapsed();
    Outcome {
        pass: worst < 1e-9 && worst_gap < 1e-6 && within(t, 5.0),
        detail: format!(
            "50 random rate tuples, max entrywise deviation {worst:.2e} (limit 1e-9), \
             reference null spaces one-dimensional (gap {worst_gap:.1e}), {t:.2?}"
        ),
    }
}

fn flags_ok(r: &SweepRow) -> bool {
    r.good_cavity && r.below_saturation && r.cooling_regime
}

fn show(v: Option<f64>) -> String {
    v.map_or("none".into(), |v| format!("{v:.4}"))
}

fn cooling_reproduction() -> Outcome {
    let start = Instant::now();
    let cfg = base_config("1/4", "analytic", "[2]");
    let rows = run_sweep(&cfg).unwrap();
    let cooled: Vec<&SweepRow> = rows
        .iter()
        .filter(|r| {
            r.delta_omega_hz > 0.0
                && flags_ok(r)
                && matches!((r.n_mean, r.n_sat), (Some(n), Some(s)) if n < 1.0 && n < s)
        })
        .collect();
    let best = cooled
        .iter()
        .min_by(|a, b| a.n_mean.partial_cmp(&b.n_mean).unwrap())
        .map(|r| (r.delta_omega_hz, r.n_mean.unwrap()));
    let sym = evaluate_point(&cfg, 2.0, Bargmann::Quarter, 0.0);
    let sym_ok = matches!((sym.n_mean, sym.n_sat), (Some(n), Some(s)) if n > s);
    let t = start.elapsed();
    Outcome {
        pass: !cooled.is_empty() && sym_ok && within(t, 1.0),
        detail: format!(
            "{} valid points with n_mean < 1 ({}); at delta_omega = 0 n_mean = {} vs n_sat = {}; {t:.2?}",
            cooled.len(),
            best.map_or("none".into(), |(dw, n)| format!("lowest {n:.4} at delta_omega/2pi = {dw:.4e} Hz")),
            show(sym.n_mean),
            show(sym.n_sat),
        ),
    }
}

fn parity_discrimination() -> Outcome {
    let start = Instant::now();
    let rows = run_sweep(&base_config("both", "analytic", "[2]")).unwrap();
    let even: Vec<&SweepRow> = rows.iter().filter(|r| r.j == Bargmann::Quarter).collect();
    let odd: Vec<&SweepRow> = rows.iter().filter(|r| r.j == Bargmann::ThreeQuarters).collect();
    let window: Vec<usize> = (0..even.len()).filter(|&k| flags_ok(even[k])).collect();
    let even_min = window.iter().filter_map(|&k| even[k].g2).fold(f64::INFINITY, f64::min);
    let odd_min = window.iter().filter_map(|&k| odd[k].g2).fold(f64::INFINITY, f64::min);
    let even_defined = window.iter().all(|&k| even[k].g2.is_some());

    let grid: Vec<f64> = (0..500).map(|k| 1.0 + 1e-3 + 0.2 * k as f64).collect();
    let g2 = |j| grid.iter().map(|&e| analytic_g(e, j).unwrap().0).collect::<Vec<_>>();
    let up = g2(Bargmann::Quarter).windows(2).all(|w| w[1] > w[0]);
    let down = g2(Bargmann::ThreeQuarters).windows(2).all(|w| w[1] < w[0]);
    let t = start.elapsed();
    Outcome {
        pass: !window.is_empty() && even_defined && even_min > 1.0 && odd_min < 1.0 && up && down && within(t, 1.0),
        detail: format!(
            "cooling window of {} points: min g2(j=1/4) = {even_min:.4}, min g2(j=3/4) = {odd_min:.4}; \
             g2 increasing in eta for j=1/4: {up}, decreasing for j=3/4: {down}; {t:.2?}",
            window.len()
        ),
    }
}

fn sector_masses_conserved(g: &Generator, rho0: &DensityMatrix, parity: usize) -> f64 {
    let times: Vec<f64> = (1..=5).map(|k| k as f64 * 4e-7).collect();
    let traj = evolve_sampled(g, rho0, &times, EvolveOptions::new(1e-10)).unwrap();
    traj.iter()
        .map(|e| {
            let (even, odd) = parity_masses(&e.rho);
            let (own, other) = if parity == 0 { (even, odd) } else { (odd, even) };
            (own - 1.0).abs().max(other.abs())
        })
        .fold(0.0, f64::max)
}

fn full_model_corroboration() -> Outcome {
    let start = Instant::now();
    let cfg = base_config("1/4", "full-numeric", "[2]");
    let cv = match cross_validate(&cfg, 2.0, Bargmann::Quarter, 50e6, true) {
        Ok(cv) => cv,
        Err(e) => return Outcome { pass: false, detail: format!("full-model solve failed: {e}") },
    };
    let full = cv.full.expect("requested");
    let analytic_n = cv.analytic.n_mean;
    let dev = rel(full.stats.n_mean, analytic_n);

    let cutoff = 32;
    let g = build_full_generator(&cv.params, &cv.rates, FullModelOptions::new(cutoff).with_frame_shift(true))
        .unwrap();
    let amp = C64::new(0.5, 0.0);
    let mut drift = 0.0_f64;
    for parity in [0usize, 1] {
        // |g,p⟩ + |e,p⟩ + |g,p+2⟩ + |g,p+4⟩
        let mut psi = vec![C64::new(0.0, 0.0); 2 * cutoff];
        for k in [cutoff + parity, parity, cutoff + parity + 2, cutoff + parity + 4] {
            psi[k] = amp;
        }
        let rho0 = DensityMatrix::pure(g.tag(), &psi).unwrap();
        drift = drift.max(sector_masses_conserved(&g, &rho0, parity));
    }
    let t = start.elapsed();
    Outcome {
        pass: dev < 0.15 && drift < 1e-8 && within(t, 60.0),
        detail: format!(
            "even-sector n_mean {:.4} (cutoff {}) vs reduced analytic {:.4}: relative deviation {:.1}% \
             (limit 15%); sector mass drift {drift:.1e} (limit 1e-8); eta = {:.4}, omega_r/2pi = {:.6e} Hz; {t:.2?}",
            full.stats.n_mean,
            full.cutoff,
            analytic_n,
            100.0 * dev,
            cv.rates.eta,
            cv.rates.omega_r / (2.0 * std::f64::consts::PI),
        ),
    }
}

fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<C64> {
    let m = DMatrix::from_fn(d, d, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    (&m + m.adjoint()) * C64::new(0.5, 0.0)
}

fn generator_contracts() -> Outcome {
    let start = Instant::now();
    let p = reference_params(2.0, Drive::Rabi { delta_omega: hz(50e6), omega_r: hz(55e6) });
    let r = pairlind_core::model::derive_rates(&p).unwrap();
    let gens = [
        build_reduced_generator(&r, &p, Bargmann::Quarter, 16).unwrap(),
        build_full_generator(&p, &r, FullModelOptions::new(10)).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut trace_dev, mut herm_dev) = (0.0_f64, 0.0_f64);
    for g in &gens {
        for _ in 0..100 {
            let rho = random_hermitian(&mut rng, g.dim());
            let out = g.apply(&rho);
            // Both deviations are measured relative to ‖L‖‖ρ‖.
            let scale = g.fastest_rate() * rho.norm();
            trace_dev = trace_dev.max(out.trace().norm() / scale);
            let h = (&out - out.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            herm_dev = herm_dev.max(h / scale);
        }
    }

    let mut comm_dev = 0.0_f64;
    for cutoff in [8usize, 16, 33] {
        let su = su11_from_mode(cutoff).unwrap();
        let interior = |n: usize| n + 3 <= cutoff;
        comm_dev = comm_dev
            .max(su.weight.commutator(&su.raise).max_abs_diff_on(&su.raise, interior))
            .max(su.weight.commutator(&su.lower).max_abs_diff_on(&su.lower.scale(-1.0), interior))
            .max(su.raise.commutator(&su.lower).max_abs_diff_on(&su.weight.scale(-2.0), interior));
    }
    for j in Bargmann::BOTH {
        let su = su11_sector(j, 12).unwrap();
        let interior = |m: usize| m + 2 <= 12;
        comm_dev = comm_dev
            .max(su.weight.commutator(&su.raise).max_abs_diff_on(&su.raise, interior))
            .max(su.raise.commutator(&su.lower).max_abs_diff_on(&su.weight.scale(-2.0), interior));
    }

    let mut bath_dev = 0.0_f64;
    for _ in 0..20 {
        let omega_c = hz(rng.gen_range(1e6..1e8));
        let mut nu = hz(rng.gen_range(1e6..3e8));
        while (nu - 2.0 * omega_c).abs() < 1e-3 * omega_c {
            nu = hz(rng.gen_range(1e6..3e8));
        }
        let b = BathParams { nu, chi_tilde: hz(rng.gen_range(1e3..1e6)), chi: hz(rng.gen_range(1e3..1e7)) };
        let (kappa, chi_bar) = bath_rates(&b, omega_c).unwrap();
        bath_dev = bath_dev.max(rel(kappa / chi_bar, b.chi / (b.nu - 2.0 * omega_c)));
    }
    let t = start.elapsed();
    Outcome {
        pass: trace_dev <= 1e-10 && herm_dev <= 1e-12 && comm_dev < 1e-12 && bath_dev < 1e-12 && within(t, 5.0),
        detail: format!(
            "trace {trace_dev:.1e} (limit 1e-10), hermiticity {herm_dev:.1e} (limit 1e-12), \
             commutators {comm_dev:.1e}, bath ratio {bath_dev:.1e} (limit 1e-12); {t:.2?}"
        ),
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("closed-form moments vs direct summation", closed_form_consistency),
        ("sector-specific coherence formulas", special_case_identity),
        ("reduced steady state vs closed form", solver_vs_formula),
        ("birth-death chain vs dense null space", birth_death_oracle),
        ("cooling below one photon", cooling_reproduction),
        ("parity discrimination of g2", parity_discrimination),
        ("full model corroboration", full_model_corroboration),
        ("generator contracts", generator_contracts),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let out = run();
        let tag = if out.pass { "PASS" } else { "FAIL" };
        println!("criterion {} [{tag}] {name}: {}", k + 1, out.detail);
        failed += usize::from(!out.pass);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
