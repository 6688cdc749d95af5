//! Detuning sweeps over the model, with tabular and plot output.

mod config;
mod output;

pub use config::{
    Grid, Mode, ModelSection, Outputs, SectorChoice, SweepConfig, SweepSection, Tolerances,
    DEFAULT_FULL_CUTOFF, DEFAULT_FULL_CUTOFF_MAX, DEFAULT_GRID_POINTS,
};
pub use output::{emit_csv, emit_svg, format_float, read_csv, render_svg, write_csv, PlotSpec, COLUMNS, PLOT_COLUMNS};

use std::fmt;

use rayon::prelude::*;

use crate::algebra::Bargmann;
use crate::analytic::{analytic_moments, cutoff_for_tail, oracle_moments, SteadyStats};
use crate::dynamics::{
    build_full_generator, build_reduced_generator, moments, parity_resolved_moments,
    steady_state, steady_state_containing, FullModelOptions, ObservableSet,
};
use crate::error::{Error, Result};
use crate::model::{
    derive_rates, hz, resonance_omega_r, validity_flags, DerivedRates, Drive, ModelParams,
    Resonance,
};

/// Largest sector truncation the reduced-numeric mode will solve densely.
pub const MAX_REDUCED_CUTOFF: usize = 2000;

/// Full-numeric truncation is accepted once the top four Fock levels hold
/// less than this.
pub const FULL_TOP_MASS: f64 = 1e-10;

/// One evaluated sweep point. Statistics are `None` where undefined or not
/// computed; `error` explains why.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub delta_omega_hz: f64,
    pub n_bar: f64,
    pub j: Bargmann,
    pub eta: Option<f64>,
    pub n_mean: Option<f64>,
    pub n_sat: Option<f64>,
    pub g2: Option<f64>,
    pub g4: Option<f64>,
    pub sz0: Option<f64>,
    pub good_cavity: bool,
    pub below_saturation: bool,
    pub cooling_regime: bool,
    pub mode: Mode,
    /// Not written to CSV.
    pub error: Option<String>,
}

impl SweepRow {
    fn empty(delta_omega_hz: f64, n_bar: f64, j: Bargmann, mode: Mode) -> Self {
        SweepRow {
            delta_omega_hz,
            n_bar,
            j,
            eta: None,
            n_mean: None,
            n_sat: None,
            g2: None,
            g4: None,
            sz0: None,
            good_cavity: false,
            below_saturation: false,
            cooling_regime: false,
            mode,
            error: None,
        }
    }
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// Parameters and rates at one sweep point after fixing Ω_R.
#[derive(Clone, Debug)]
pub struct ResolvedPoint {
    pub params: ModelParams,
    pub rates: DerivedRates,
    /// Present when Ω_R came from the resonance condition.
    pub resonance: Option<Resonance>,
    /// Set when the resonance iteration failed and the bare value
    /// `2(ω_c + χ̄n̄)` was used instead.
    pub fallback: Option<Error>,
}

/// Fix Ω_R for one point. If the resonance iteration leaves the cooling
/// regime the bare resonance `2(ω_c + χ̄n̄)` is used so that the point can
/// still be reported.
pub fn resolve_point(p: &ModelParams, j: Bargmann, resonance_tol_hz: f64) -> Result<ResolvedPoint> {
    if !matches!(p.drive, Drive::Detuning { .. }) {
        let rates = derive_rates(p)?;
        return Ok(ResolvedPoint { params: *p, rates, resonance: None, fallback: None });
    }
    match resonance_omega_r(p, j, hz(resonance_tol_hz)) {
        Ok(res) => {
            let params = p.with_omega_r(res.omega_r);
            let rates = derive_rates(&params)?;
            Ok(ResolvedPoint { params, rates, resonance: Some(res), fallback: None })
        }
        Err(e @ Error::OutsideCoolingRegime { .. }) => {
            let params = p.with_omega_r(2.0 * p.shifted_omega_c());
            let rates = derive_rates(&params)?;
            Ok(ResolvedPoint { params, rates, resonance: None, fallback: Some(e) })
        }
        Err(e) => Err(e),
    }
}

fn stats_from_moments(m: &crate::dynamics::Moments) -> SteadyStats {
    SteadyStats::from_moments(m.beta_z_mean, m.b2, m.b4)
}

/// Reduced-generator steady state on sector `j`, truncated so that the
/// geometric tail is below `tail`.
pub fn reduced_numeric_stats(
    p: &ModelParams,
    r: &DerivedRates,
    j: Bargmann,
    tol: &Tolerances,
) -> Result<SteadyStats> {
    let m_cutoff = cutoff_for_tail(r.eta, tol.tail)?;
    if m_cutoff > MAX_REDUCED_CUTOFF {
        return Err(Error::Solver(format!(
            "eta = {} needs {m_cutoff} levels for tail {:e}, above the limit {MAX_REDUCED_CUTOFF}",
            r.eta, tol.tail
        )));
    }
    let g = build_reduced_generator(r, p, j, m_cutoff)?;
    let ss = steady_state(&g)?;
    if ss.relative_residual > tol.residual {
        return Err(Error::Solver(format!(
            "steady-state relative residual {:e} exceeds {:e}",
            ss.relative_residual, tol.residual
        )));
    }
    let ops = ObservableSet::for_basis(g.tag())?;
    Ok(stats_from_moments(&moments(&ss.rho, &ops)?))
}

/// Full-model sector statistics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FullSectorStats {
    pub stats: SteadyStats,
    pub cutoff: usize,
    /// Oscillator population in the top four Fock levels.
    pub top_mass: f64,
    pub relative_residual: f64,
}

/// Steady state of the full qubit-oscillator generator in the photon-number
/// parity sector of `j`. The Fock cutoff starts at `start` and doubles until
/// the top four levels hold less than [`FULL_TOP_MASS`].
pub fn full_numeric_stats(
    p: &ModelParams,
    r: &DerivedRates,
    j: Bargmann,
    start: usize,
    max: usize,
    tol: &Tolerances,
) -> Result<FullSectorStats> {
    let mut cutoff = start;
    loop {
        let g = build_full_generator(p, r, FullModelOptions::new(cutoff).with_frame_shift(true))?;
        // |g, parity⟩; the qubit is the slow index with the ground state second.
        let ss = steady_state_containing(&g, cutoff + j.parity())?;
        if ss.relative_residual > tol.residual {
            return Err(Error::Solver(format!(
                "full steady-state relative residual {:e} exceeds {:e} at cutoff {cutoff}",
                ss.relative_residual, tol.residual
            )));
        }
        let pops = ss.rho.oscillator_state().populations();
        let top_mass: f64 = pops[cutoff - 4..].iter().sum();
        if top_mass < FULL_TOP_MASS {
            let (even, odd) = parity_resolved_moments(&ss.rho)?;
            let m = if j.parity() == 0 { even } else { odd };
            let m = m.ok_or_else(|| Error::Solver("parity sector carries no weight".into()))?;
            return Ok(FullSectorStats {
                stats: stats_from_moments(&m),
                cutoff,
                top_mass,
                relative_residual: ss.relative_residual,
            });
        }
        if cutoff * 2 > max {
            return Err(Error::Solver(format!(
                "oscillator population {top_mass:e} in the top levels at cutoff {cutoff}; cap {max} reached"
            )));
        }
        log::debug!("full model: top mass {top_mass:e} at cutoff {cutoff}, doubling");
        cutoff *= 2;
    }
}

/// Evaluate one `(δω, n̄, j)` point in the configured mode.
pub fn evaluate_point(cfg: &SweepConfig, n_bar: f64, j: Bargmann, delta_omega_hz: f64) -> SweepRow {
    let mode = cfg.sweep.mode;
    let tol = &cfg.tolerances;
    let mut row = SweepRow::empty(delta_omega_hz, n_bar, j, mode);
    let p = cfg.model_params(n_bar, delta_omega_hz);
    let point = match resolve_point(&p, j, tol.resonance_hz) {
        Ok(pt) => pt,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    let (p, r) = (&point.params, &point.rates);
    row.eta = finite(r.eta);
    row.sz0 = finite(r.sz0);
    row.n_sat = finite(r.n_sat);
    if let Some(e) = &point.fallback {
        row.error = Some(e.to_string());
    }
    if !(r.eta > 1.0) {
        let flags = validity_flags(r, p, None, tol.much_less_factor);
        row.good_cavity = flags.good_cavity;
        row.error.get_or_insert_with(|| Error::OutsideCoolingRegime { eta: r.eta }.to_string());
        return row;
    }
    let stats = match mode {
        Mode::Analytic => analytic_moments(r.eta, j),
        Mode::ReducedNumeric => reduced_numeric_stats(p, r, j, tol),
        Mode::FullNumeric => {
            full_numeric_stats(p, r, j, cfg.sweep.full_cutoff, cfg.sweep.full_cutoff_max, tol)
                .map(|f| f.stats)
        }
    };
    match stats {
        Ok(s) => {
            row.n_mean = finite(s.n_mean);
            row.g2 = s.g2.and_then(finite);
            row.g4 = s.g4.and_then(finite);
        }
        Err(e) => {
            log::warn!("δω = {delta_omega_hz} Hz, n̄ = {n_bar}, j = {j}: {e}");
            row.error = Some(e.to_string());
        }
    }
    let flags = validity_flags(r, p, row.n_mean, tol.much_less_factor);
    row.good_cavity = flags.good_cavity;
    row.below_saturation = row.n_sat.is_some() && flags.below_saturation;
    row.cooling_regime = flags.cooling_regime;
    row
}

/// All rows, ordered by `n̄`, then `j`, then detuning.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let grid = cfg.grid_hz();
    let points: Vec<(f64, Bargmann, f64)> = cfg
        .sweep
        .n_bar
        .iter()
        .flat_map(|&n| cfg.sweep.j.sectors().into_iter().map(move |j| (n, j)))
        .flat_map(|(n, j)| grid.iter().map(move |&d| (n, j, d)))
        .collect();
    Ok(points.par_iter().map(|&(n, j, d)| evaluate_point(cfg, n, j, d)).collect())
}

/// Relative deviation of one quantity between two evaluation paths.
#[derive(Clone, Debug, PartialEq)]
pub struct Deviation {
    pub left: &'static str,
    pub right: &'static str,
    pub quantity: &'static str,
    pub relative: f64,
}

#[derive(Clone, Debug)]
pub struct CrossValidation {
    pub j: Bargmann,
    pub params: ModelParams,
    pub rates: DerivedRates,
    pub analytic: SteadyStats,
    pub oracle: SteadyStats,
    pub reduced: SteadyStats,
    pub full: Option<FullSectorStats>,
    pub deviations: Vec<Deviation>,
}

impl CrossValidation {
    pub fn max_deviation(&self, left: &str, right: &str) -> Option<f64> {
        self.deviations
            .iter()
            .filter(|d| d.left == left && d.right == right)
            .map(|d| d.relative)
            .reduce(f64::max)
    }
}

fn rel_dev(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(a.abs())
    }
}

/// Compare closed forms, direct summation, the reduced steady state and,
/// when `full` gives `(start, max)` cutoffs, the full-model sector state.
pub fn cross_validate_rates(
    p: &ModelParams,
    r: &DerivedRates,
    j: Bargmann,
    tol: &Tolerances,
    full: Option<(usize, usize)>,
) -> Result<CrossValidation> {
    if !(r.eta > 1.0) {
        return Err(Error::OutsideCoolingRegime { eta: r.eta });
    }
    let analytic = analytic_moments(r.eta, j)?;
    let oracle = oracle_moments(r.eta, j, cutoff_for_tail(r.eta, 1e-16)?)?;
    let reduced = reduced_numeric_stats(p, r, j, tol)?;
    let full = full
        .map(|(start, max)| full_numeric_stats(p, r, j, start, max, tol))
        .transpose()?;

    let mut paths = vec![("analytic", analytic), ("oracle", oracle), ("reduced-numeric", reduced)];
    if let Some(f) = &full {
        paths.push(("full-numeric", f.stats));
    }
    let mut deviations = Vec::new();
    for (i, (ln, ls)) in paths.iter().enumerate() {
        for (rn, rs) in &paths[i + 1..] {
            let quantities = [
                ("n_mean", Some(ls.n_mean), Some(rs.n_mean)),
                ("g2", ls.g2, rs.g2),
                ("g4", ls.g4, rs.g4),
            ];
            for (q, a, b) in quantities {
                if let (Some(a), Some(b)) = (a, b) {
                    deviations.push(Deviation { left: ln, right: rn, quantity: q, relative: rel_dev(a, b) });
                }
            }
        }
    }
    Ok(CrossValidation { j, params: *p, rates: *r, analytic, oracle, reduced, full, deviations })
}

/// [`cross_validate_rates`] at one configured point, with Ω_R resolved the
/// same way as in a sweep. Fails outside the cooling regime.
pub fn cross_validate(
    cfg: &SweepConfig,
    n_bar: f64,
    j: Bargmann,
    delta_omega_hz: f64,
    with_full: bool,
) -> Result<CrossValidation> {
    let p = cfg.model_params(n_bar, delta_omega_hz);
    let point = resolve_point(&p, j, cfg.tolerances.resonance_hz)?;
    if let Some(e) = point.fallback {
        return Err(e);
    }
    let full = with_full.then_some((cfg.sweep.full_cutoff, cfg.sweep.full_cutoff_max));
    cross_validate_rates(&point.params, &point.rates, j, &cfg.tolerances, full)
}

impl fmt::Display for CrossValidation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = &self.rates;
        writeln!(f, "j = {}, n_bar = {}", self.j, self.params.n_bar)?;
        writeln!(
            f,
            "delta_omega/2pi = {:.9e} Hz, omega_r/2pi = {:.9e} Hz, eta = {}",
            crate::model::to_hz(r.delta_omega),
            crate::model::to_hz(r.omega_r),
            r.eta
        )?;
        let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.12e}"));
        let mut rows = vec![
            ("analytic", self.analytic),
            ("oracle", self.oracle),
            ("reduced-numeric", self.reduced),
        ];
        if let Some(full) = &self.full {
            rows.push(("full-numeric", full.stats));
        }
        writeln!(f, "{:<16} {:>20} {:>20} {:>20}", "path", "n_mean", "g2", "g4")?;
        for (name, s) in rows {
            writeln!(f, "{name:<16} {:>20.12e} {:>20} {:>20}", s.n_mean, opt(s.g2), opt(s.g4))?;
        }
        if let Some(full) = &self.full {
            writeln!(f, "full model cutoff {}, top-level mass {:e}", full.cutoff, full.top_mass)?;
        }
        writeln!(f, "relative deviations:")?;
        for d in &self.deviations {
            writeln!(f, "  {:<16} vs {:<16} {:<7} {:.3e}", d.left, d.right, d.quantity, d.relative)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests;
