//! TOML sweep configuration. Every frequency in the file is cyclic (Hz).

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::algebra::Bargmann;
use crate::error::{Error, Result};
use crate::model::{hz, Drive, ModelParams, DEFAULT_MUCH_LESS_FACTOR};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Analytic,
    ReducedNumeric,
    FullNumeric,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Analytic => "analytic",
            Mode::ReducedNumeric => "reduced-numeric",
            Mode::FullNumeric => "full-numeric",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Mode::Analytic),
            "reduced-numeric" => Ok(Mode::ReducedNumeric),
            "full-numeric" => Ok(Mode::FullNumeric),
            other => Err(Error::Config(format!(
                "unknown mode {other:?} (expected analytic, reduced-numeric or full-numeric)"
            ))),
        }
    }
}

/// Which su(1,1) sectors to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SectorChoice {
    One(Bargmann),
    Both,
}

impl SectorChoice {
    pub fn sectors(self) -> Vec<Bargmann> {
        match self {
            SectorChoice::One(j) => vec![j],
            SectorChoice::Both => Bargmann::BOTH.to_vec(),
        }
    }
}

impl FromStr for SectorChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "both" => Ok(SectorChoice::Both),
            "1/4" | "0.25" => Ok(SectorChoice::One(Bargmann::Quarter)),
            "3/4" | "0.75" => Ok(SectorChoice::One(Bargmann::ThreeQuarters)),
            other => Err(Error::Config(format!("j must be 1/4, 3/4 or both, got {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        let step = (self.max - self.min) / (self.points - 1) as f64;
        (0..self.points)
            .map(|k| if k + 1 == self.points { self.max } else { self.min + step * k as f64 })
            .collect()
    }
}

pub const DEFAULT_GRID_POINTS: usize = 401;

/// Oscillator, qubit and bath parameters in Hz.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub omega_c_hz: f64,
    pub delta_q_hz: f64,
    pub g_hz: f64,
    pub gamma0_hz: f64,
    pub kappa_hz: f64,
    #[serde(default)]
    pub chi_bar_hz: f64,
    /// Fixed generalized Rabi frequency. When absent, Ω_R is solved for the
    /// two-photon resonance at every point.
    pub omega_r_hz: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSection {
    pub j: SectorChoice,
    pub n_bar: Vec<f64>,
    pub mode: Mode,
    pub delta_omega_hz: Option<Grid>,
    /// First oscillator cutoff tried in full-numeric mode.
    pub full_cutoff: usize,
    /// Largest cutoff the full-numeric mode may double up to.
    pub full_cutoff_max: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Largest population mass allowed beyond the truncation.
    pub tail: f64,
    /// Largest relative residual accepted from a steady-state solve.
    pub residual: f64,
    pub much_less_factor: f64,
    /// Convergence threshold of the resonance iteration, Hz.
    pub resonance_hz: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tail: 1e-12,
            residual: 1e-9,
            much_less_factor: DEFAULT_MUCH_LESS_FACTOR,
            resonance_hz: 1e-3,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    /// Column plotted in the SVG.
    pub svg_y: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub model: ModelSection,
    pub sweep: SweepSection,
    pub tolerances: Tolerances,
    pub outputs: Outputs,
}

pub const DEFAULT_FULL_CUTOFF: usize = 32;
pub const DEFAULT_FULL_CUTOFF_MAX: usize = 512;

// On-disk shapes; converted and checked into the public types above.

#[derive(Deserialize)]
#[serde(untagged)]
enum RawJ {
    Number(f64),
    Text(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    #[serde(default)]
    j: Option<RawJ>,
    n_bar: Vec<f64>,
    #[serde(default)]
    mode: Option<String>,
    #[serde(default)]
    delta_omega_hz: Option<Grid>,
    #[serde(default)]
    full_cutoff: Option<usize>,
    #[serde(default)]
    full_cutoff_max: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: ModelSection,
    sweep: RawSweep,
    #[serde(default)]
    tolerances: Tolerances,
    #[serde(default)]
    outputs: Outputs,
}

fn field_error(field: &str, msg: impl fmt::Display) -> Error {
    Error::Config(format!("{field}: {msg}"))
}

impl SweepConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let j = match raw.sweep.j {
            None => SectorChoice::Both,
            Some(RawJ::Text(s)) => s.parse().map_err(|e: Error| field_error("sweep.j", e))?,
            Some(RawJ::Number(v)) => SectorChoice::One(
                Bargmann::from_value(v).map_err(|_| field_error("sweep.j", format!("{v} is not 1/4 or 3/4")))?,
            ),
        };
        let mode = match raw.sweep.mode {
            None => Mode::Analytic,
            Some(s) => s.parse().map_err(|e: Error| field_error("sweep.mode", e))?,
        };
        let cfg = SweepConfig {
            model: raw.model,
            sweep: SweepSection {
                j,
                n_bar: raw.sweep.n_bar,
                mode,
                delta_omega_hz: raw.sweep.delta_omega_hz,
                full_cutoff: raw.sweep.full_cutoff.unwrap_or(DEFAULT_FULL_CUTOFF),
                full_cutoff_max: raw.sweep.full_cutoff_max.unwrap_or(DEFAULT_FULL_CUTOFF_MAX),
            },
            tolerances: raw.tolerances,
            outputs: raw.outputs,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.model;
        for (name, v) in [
            ("model.omega_c_hz", m.omega_c_hz),
            ("model.delta_q_hz", m.delta_q_hz),
            ("model.g_hz", m.g_hz),
            ("model.gamma0_hz", m.gamma0_hz),
            ("model.kappa_hz", m.kappa_hz),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(field_error(name, format!("must be a positive number, got {v}")));
            }
        }
        if !m.chi_bar_hz.is_finite() {
            return Err(field_error("model.chi_bar_hz", "must be finite"));
        }
        if let Some(w) = m.omega_r_hz {
            if !(w > 0.0 && w.is_finite()) {
                return Err(field_error("model.omega_r_hz", format!("must be positive, got {w}")));
            }
        }
        let s = &self.sweep;
        if s.n_bar.is_empty() {
            return Err(field_error("sweep.n_bar", "needs at least one value"));
        }
        if let Some(bad) = s.n_bar.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(field_error("sweep.n_bar", format!("values must be >= 0, got {bad}")));
        }
        if let Some(g) = &s.delta_omega_hz {
            if !(g.min < g.max) || !g.min.is_finite() || !g.max.is_finite() {
                return Err(field_error(
                    "sweep.delta_omega_hz",
                    format!("min ({}) must be below max ({})", g.min, g.max),
                ));
            }
            if g.points < 2 {
                return Err(field_error("sweep.delta_omega_hz.points", "must be >= 2"));
            }
        }
        if s.full_cutoff < crate::dynamics::MIN_FULL_CUTOFF || s.full_cutoff > s.full_cutoff_max {
            return Err(field_error(
                "sweep.full_cutoff",
                format!(
                    "must lie in [{}, full_cutoff_max = {}]",
                    crate::dynamics::MIN_FULL_CUTOFF,
                    s.full_cutoff_max
                ),
            ));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("tolerances.tail", t.tail),
            ("tolerances.residual", t.residual),
            ("tolerances.much_less_factor", t.much_less_factor),
            ("tolerances.resonance_hz", t.resonance_hz),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(field_error(name, format!("must be positive, got {v}")));
            }
        }
        if t.tail >= 1.0 {
            return Err(field_error("tolerances.tail", "must be below 1"));
        }
        if let Some(col) = &self.outputs.svg_y {
            if !super::PLOT_COLUMNS.contains(&col.as_str()) {
                return Err(field_error(
                    "outputs.svg_y",
                    format!("{col:?} is not one of {}", super::PLOT_COLUMNS.join(", ")),
                ));
            }
        }
        Ok(())
    }

    /// Angular-unit parameters for one point. The drive carries only the
    /// detuning unless a fixed Ω_R is configured.
    pub fn model_params(&self, n_bar: f64, delta_omega_hz: f64) -> ModelParams {
        let m = &self.model;
        let delta_omega = hz(delta_omega_hz);
        let drive = match m.omega_r_hz {
            Some(w) => Drive::Rabi { delta_omega, omega_r: hz(w) },
            None => Drive::Detuning { delta_omega },
        };
        ModelParams {
            omega_c: hz(m.omega_c_hz),
            delta_q: hz(m.delta_q_hz),
            g: hz(m.g_hz),
            gamma0: hz(m.gamma0_hz),
            kappa: hz(m.kappa_hz),
            n_bar,
            chi_bar: hz(m.chi_bar_hz),
            drive,
        }
    }

    /// The configured detuning grid, or `±Ω_R` with 401 points. Without a
    /// fixed Ω_R the bare resonance value `2(ω_c + χ̄n̄)` is used, taking the
    /// smallest over the listed `n̄`.
    pub fn grid_hz(&self) -> Vec<f64> {
        if let Some(g) = &self.sweep.delta_omega_hz {
            return g.values();
        }
        let half = self.model.omega_r_hz.unwrap_or_else(|| {
            self.sweep
                .n_bar
                .iter()
                .map(|n| 2.0 * (self.model.omega_c_hz + self.model.chi_bar_hz * n))
                .fold(f64::INFINITY, f64::min)
                .abs()
        });
        Grid { min: -half, max: half, points: DEFAULT_GRID_POINTS }.values()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[model]
omega_c_hz = 27.5e6
delta_q_hz = 3e9
g_hz = 18e6
gamma0_hz = 0.5e6
kappa_hz = 2e3

[sweep]
j = "1/4"
n_bar = [1, 2, 4]
"#;

    #[test]
    fn parses_minimal_config() {
        let cfg = SweepConfig::from_toml_str(BASE).unwrap();
        assert_eq!(cfg.sweep.j, SectorChoice::One(Bargmann::Quarter));
        assert_eq!(cfg.sweep.mode, Mode::Analytic);
        assert_eq!(cfg.sweep.n_bar, vec![1.0, 2.0, 4.0]);
        assert_eq!(cfg.tolerances, Tolerances::default());
        let grid = cfg.grid_hz();
        assert_eq!(grid.len(), DEFAULT_GRID_POINTS);
        assert_eq!(grid[0], -55e6);
        assert_eq!(grid[400], 55e6);
        assert_eq!(grid[200], 0.0);
    }

    #[test]
    fn numeric_and_both_sectors() {
        let cfg = SweepConfig::from_toml_str(&BASE.replace("\"1/4\"", "0.75")).unwrap();
        assert_eq!(cfg.sweep.j, SectorChoice::One(Bargmann::ThreeQuarters));
        let cfg = SweepConfig::from_toml_str(&BASE.replace("\"1/4\"", "\"both\"")).unwrap();
        assert_eq!(cfg.sweep.j.sectors().len(), 2);
    }

    #[test]
    fn syntax_errors_carry_a_line() {
        let err = SweepConfig::from_toml_str(&BASE.replace("kappa_hz = 2e3", "kappa_hz = ")).unwrap_err();
        let Error::Config(msg) = err else { panic!("{err:?}") };
        assert!(msg.contains("line 7"), "{msg}");
    }

    #[test]
    fn field_errors_name_the_field() {
        let cases = [
            (BASE.replace("n_bar = [1, 2, 4]", "n_bar = [1, -2]"), "sweep.n_bar"),
            (BASE.replace("\"1/4\"", "0.5"), "sweep.j"),
            (format!("{BASE}mode = \"quantum\"\n"), "sweep.mode"),
            (
                format!("{BASE}delta_omega_hz = {{ min = 5e6, max = 1e6, points = 10 }}\n"),
                "sweep.delta_omega_hz",
            ),
            (BASE.replace("g_hz = 18e6", "g_hz = 0"), "model.g_hz"),
            (format!("{BASE}\n[tolerances]\ntail = 2.0\n"), "tolerances.tail"),
        ];
        for (text, field) in cases {
            let Error::Config(msg) = SweepConfig::from_toml_str(&text).unwrap_err() else {
                panic!("expected a config error for {field}")
            };
            assert!(msg.contains(field), "{msg}");
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = SweepConfig::from_toml_str(&BASE.replace("kappa_hz", "kapa_hz")).unwrap_err();
        assert!(matches!(err, Error::Config(msg) if msg.contains("kapa_hz")));
    }

    #[test]
    fn grid_endpoints_are_exact() {
        let g = Grid { min: -1.0, max: 3.0, points: 5 };
        assert_eq!(g.values(), vec![-1.0, 0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn fixed_rabi_sets_grid_and_drive() {
        let text = BASE.replace("kappa_hz = 2e3", "kappa_hz = 2e3\nomega_r_hz = 60e6");
        let cfg = SweepConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg.grid_hz()[0], -60e6);
        let p = cfg.model_params(2.0, 10e6);
        assert_eq!(p.drive, Drive::Rabi { delta_omega: hz(10e6), omega_r: hz(60e6) });
    }
}
