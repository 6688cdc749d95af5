//! Physical parameters of the driven qubit / nonlinear oscillator system and
//! every rate derived from them.
//!
//! All frequencies and rates stored here are angular (rad/s). Use [`hz`] to
//! convert the cyclic values usually quoted for circuit experiments.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::algebra::Bargmann;
use crate::error::{Error, Result};

/// Cyclic frequency (Hz) to angular frequency (rad/s).
pub fn hz(f: f64) -> f64 {
    2.0 * PI * f
}

/// Angular frequency (rad/s) to cyclic frequency (Hz).
pub fn to_hz(w: f64) -> f64 {
    w / (2.0 * PI)
}

/// Ratio `ω_c / Δ` above which the dispersive treatment is questionable.
pub const DISPERSIVE_WARN_RATIO: f64 = 0.05;

/// How the qubit drive is specified. `delta_omega = Δ - ω` in every variant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Drive {
    /// Detuning and generalized Rabi frequency; the amplitude follows as
    /// `Ω = sqrt(Ω_R² - δω²)`.
    Rabi { delta_omega: f64, omega_r: f64 },
    /// Detuning and drive amplitude.
    Amplitude { delta_omega: f64, omega: f64 },
    /// Detuning only; `Ω_R` still has to be fixed, usually by
    /// [`resonance_omega_r`].
    Detuning { delta_omega: f64 },
}

impl Drive {
    pub fn delta_omega(&self) -> f64 {
        match *self {
            Drive::Rabi { delta_omega, .. }
            | Drive::Amplitude { delta_omega, .. }
            | Drive::Detuning { delta_omega } => delta_omega,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub omega_c: f64,
    /// Qubit tunnel splitting Δ.
    pub delta_q: f64,
    /// Transverse qubit-oscillator coupling.
    pub g: f64,
    /// Qubit spontaneous decay rate Γ₀.
    pub gamma0: f64,
    /// Two-photon damping rate κ.
    pub kappa: f64,
    /// Thermal occupation of the bath at `2ω_c`.
    pub n_bar: f64,
    /// Bath-induced frequency shift χ̄.
    pub chi_bar: f64,
    pub drive: Drive,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("omega_c", self.omega_c),
            ("delta_q", self.delta_q),
            ("g", self.g),
            ("kappa", self.kappa),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.gamma0 >= 0.0) || !self.gamma0.is_finite() {
            return Err(Error::InvalidArgument(format!("gamma0 must be > 0, got {}", self.gamma0)));
        }
        if self.gamma0 == 0.0 {
            return Err(Error::DegenerateInput(
                "gamma0 = 0 gives a vanishing longitudinal rate; the qubit inversion is undefined"
                    .into(),
            ));
        }
        if !(self.n_bar >= 0.0) || !self.n_bar.is_finite() {
            return Err(Error::InvalidArgument(format!("n_bar must be >= 0, got {}", self.n_bar)));
        }
        if !self.chi_bar.is_finite() {
            return Err(Error::InvalidArgument("chi_bar must be finite".into()));
        }
        match self.drive {
            Drive::Rabi { delta_omega, omega_r } => {
                if !(omega_r >= 0.0) || delta_omega.abs() > omega_r {
                    return Err(Error::InvalidArgument(format!(
                        "|delta_omega| = {} exceeds omega_r = {omega_r}",
                        delta_omega.abs()
                    )));
                }
            }
            Drive::Amplitude { omega, .. } => {
                if !(omega >= 0.0) {
                    return Err(Error::InvalidArgument(format!("drive amplitude must be >= 0, got {omega}")));
                }
            }
            Drive::Detuning { .. } => {}
        }
        if !self.drive.delta_omega().is_finite() {
            return Err(Error::InvalidArgument("delta_omega must be finite".into()));
        }
        Ok(())
    }

    /// `true` when `ω_c / Δ` is large enough to doubt the dispersive picture.
    pub fn dispersive_warning(&self) -> bool {
        self.omega_c / self.delta_q > DISPERSIVE_WARN_RATIO
    }

    pub fn with_drive(mut self, drive: Drive) -> Self {
        self.drive = drive;
        self
    }

    pub fn with_omega_r(self, omega_r: f64) -> Self {
        let delta_omega = self.drive.delta_omega();
        self.with_drive(Drive::Rabi { delta_omega, omega_r })
    }

    /// Oscillator frequency including the thermal bath shift, `ω_c + χ̄ n̄`.
    pub fn shifted_omega_c(&self) -> f64 {
        self.omega_c + self.chi_bar * self.n_bar
    }

    /// `(δω, Ω, Ω_R)` for a drive that pins the Rabi frequency.
    fn drive_triplet(&self) -> Result<(f64, f64, f64)> {
        match self.drive {
            Drive::Rabi { delta_omega, omega_r } => {
                if delta_omega.abs() > omega_r {
                    return Err(Error::InvalidArgument(format!(
                        "|delta_omega| = {} exceeds omega_r = {omega_r}",
                        delta_omega.abs()
                    )));
                }
                let omega = ((omega_r - delta_omega.abs()) * (omega_r + delta_omega.abs())).sqrt();
                Ok((delta_omega, omega, omega_r))
            }
            Drive::Amplitude { delta_omega, omega } => {
                Ok((delta_omega, omega, delta_omega.hypot(omega)))
            }
            Drive::Detuning { .. } => Err(Error::InvalidArgument(
                "the drive gives only a detuning; resolve omega_r first".into(),
            )),
        }
    }
}

/// Every quantity that follows from [`ModelParams`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedRates {
    pub delta_omega: f64,
    /// Drive amplitude Ω.
    pub omega: f64,
    /// Generalized Rabi frequency Ω_R.
    pub omega_r: f64,
    /// Dressing angle with `cot 2θ = δω/Ω`, `θ ∈ [0, π/2]`.
    pub theta: f64,
    pub g2: f64,
    pub g0: f64,
    /// γ⁽⁺⁾, drives dressed-state decay.
    pub gamma_plus: f64,
    /// γ⁽⁻⁾, drives dressed-state pumping.
    pub gamma_minus: f64,
    /// γ⁽⁰⁾, dressed-state dephasing.
    pub gamma_dephase: f64,
    pub gamma_par: f64,
    pub gamma_perp: f64,
    /// Qubit inversion without the oscillator.
    pub sz0: f64,
    /// Γ₊, pair emission into the oscillator.
    pub gamma_up: f64,
    /// Γ₋, pair absorption from the oscillator.
    pub gamma_down: f64,
    pub eta: f64,
    pub alpha: f64,
    /// Saturation photon number n₀.
    pub n_sat: f64,
}

impl DerivedRates {
    /// Total pair-lowering rate of the reduced oscillator equation.
    pub fn down_rate(&self, p: &ModelParams) -> f64 {
        p.kappa * (1.0 + p.n_bar) + self.gamma_down
    }

    /// Total pair-raising rate of the reduced oscillator equation.
    pub fn up_rate(&self, p: &ModelParams) -> f64 {
        p.kappa * p.n_bar + self.gamma_up
    }
}

pub fn derive_rates(p: &ModelParams) -> Result<DerivedRates> {
    p.validate()?;
    let (delta_omega, omega, omega_r) = p.drive_triplet()?;
    if omega_r == 0.0 {
        return Err(Error::DegenerateInput(
            "omega_r = 0: the dressing angle is undefined".into(),
        ));
    }
    let two_theta = omega.atan2(delta_omega);
    let theta = 0.5 * two_theta;
    let (sin2, cos2) = (omega / omega_r, delta_omega / omega_r);
    let g2 = 2.0 * p.g * p.g * sin2 / p.delta_q;
    let g0 = 4.0 * p.g * p.g * cos2 / p.delta_q;

    // cos²θ = (1 + cos2θ)/2 and sin²θ = (1 - cos2θ)/2 avoid the atan round trip.
    let cos_sq = 0.5 * (1.0 + cos2);
    let sin_sq = 0.5 * (1.0 - cos2);
    let gamma_plus = p.gamma0 * cos_sq * cos_sq / 2.0;
    let gamma_minus = p.gamma0 * sin_sq * sin_sq / 2.0;
    let gamma_dephase = p.gamma0 * sin2 * sin2 / 8.0;
    let gamma_par = gamma_plus + gamma_minus;
    if gamma_par == 0.0 {
        return Err(Error::DegenerateInput("longitudinal rate vanishes".into()));
    }
    let gamma_perp = 4.0 * gamma_dephase + gamma_par;
    let sz0 = (gamma_minus - gamma_plus) / gamma_par;
    let gamma_up = g2 * g2 * (1.0 + sz0) / (2.0 * gamma_perp);
    let gamma_down = g2 * g2 * (1.0 - sz0) / (2.0 * gamma_perp);
    let down = p.kappa * (1.0 + p.n_bar) + gamma_down;
    let up = p.kappa * p.n_bar + gamma_up;
    let eta = down / up;
    let n_sat = (gamma_par * gamma_perp / (2.0 * g2 * g2)).sqrt();
    debug_assert!((0.0..=FRAC_PI_2).contains(&theta));
    Ok(DerivedRates {
        delta_omega,
        omega,
        omega_r,
        theta,
        g2,
        g0,
        gamma_plus,
        gamma_minus,
        gamma_dephase,
        gamma_par,
        gamma_perp,
        sz0,
        gamma_up,
        gamma_down,
        eta,
        alpha: eta.ln(),
        n_sat,
    })
}

/// Reservoir around `2ω_c` coupled to the photon pairs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BathParams {
    /// Carrier frequency ν.
    pub nu: f64,
    /// Pair-bath coupling χ̃.
    pub chi_tilde: f64,
    /// Bath linewidth χ.
    pub chi: f64,
}

/// `(κ, χ̄)` obtained by eliminating the reservoir.
pub fn bath_rates(b: &BathParams, omega_c: f64) -> Result<(f64, f64)> {
    if !(b.chi > 0.0) {
        return Err(Error::InvalidArgument(format!("bath linewidth chi must be > 0, got {}", b.chi)));
    }
    if !(b.chi_tilde >= 0.0) {
        return Err(Error::InvalidArgument(format!("chi_tilde must be >= 0, got {}", b.chi_tilde)));
    }
    let detuning = b.nu - 2.0 * omega_c;
    let coupling = (2.0 * b.chi_tilde).powi(2);
    let denom = detuning * detuning + b.chi * b.chi;
    Ok((b.chi * coupling / denom, detuning * coupling / denom))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Resonance {
    pub omega_r: f64,
    pub iterations: usize,
    /// `|Ω_R - 2g₀⟨βz⟩ - 2(ω_c + χ̄n̄)|` at the returned value.
    pub residual: f64,
}

pub const RESONANCE_MAX_ITER: usize = 100;

/// Self-consistent Ω_R for the two-photon resonance
/// `Ω_R - 2g₀⟨βz⟩ = 2(ω_c + χ̄n̄)`, with `⟨βz⟩ = j + 1/(η - 1)`.
///
/// The first iterate uses `⟨βz⟩ = j`; afterwards `⟨βz⟩` is evaluated from η
/// at the previous Ω_R.
pub fn resonance_omega_r(p: &ModelParams, j: Bargmann, tol: f64) -> Result<Resonance> {
    let target = 2.0 * p.shifted_omega_c();
    let delta_omega = p.drive.delta_omega();
    let rates_at = |omega_r: f64| derive_rates(&p.with_omega_r(omega_r));
    let mut omega_r = target;
    let mut beta_z = j.value();
    for iteration in 1..=RESONANCE_MAX_ITER {
        if delta_omega.abs() > omega_r {
            return Err(Error::InvalidArgument(format!(
                "|delta_omega| = {} exceeds the resonant omega_r = {omega_r}",
                delta_omega.abs()
            )));
        }
        let r = rates_at(omega_r)?;
        if iteration > 1 {
            if !(r.eta > 1.0) {
                return Err(Error::OutsideCoolingRegime { eta: r.eta });
            }
            beta_z = j.value() + 1.0 / (r.eta - 1.0);
        }
        let next = target + 2.0 * r.g0 * beta_z;
        let step = (next - omega_r).abs();
        omega_r = next;
        if step < tol {
            let residual = match rates_at(omega_r) {
                Ok(r) if r.eta > 1.0 => {
                    (omega_r - 2.0 * r.g0 * (j.value() + 1.0 / (r.eta - 1.0)) - target).abs()
                }
                Ok(r) => return Err(Error::OutsideCoolingRegime { eta: r.eta }),
                Err(e) => return Err(e),
            };
            return Ok(Resonance { omega_r, iterations: iteration, residual });
        }
    }
    let residual = rates_at(omega_r)
        .map(|r| (omega_r - 2.0 * r.g0 * (j.value() + 1.0 / (r.eta - 1.0)) - target).abs())
        .unwrap_or(f64::NAN);
    Err(Error::NoConvergence { iterations: RESONANCE_MAX_ITER, last: omega_r, residual })
}

/// Default factor standing in for "much smaller than" in the good-cavity test.
pub const DEFAULT_MUCH_LESS_FACTOR: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityFlags {
    pub good_cavity: bool,
    pub below_saturation: bool,
    pub cooling_regime: bool,
}

/// Regime checks for the reduced oscillator description.
///
/// `good_cavity` is `κ(1 + n̄) < g₂/factor` and `g₂ < Γ₀`;
/// `below_saturation` is `n_mean < n₀` (false when `n_mean` is unknown).
pub fn validity_flags(
    r: &DerivedRates,
    p: &ModelParams,
    n_mean: Option<f64>,
    much_less_factor: f64,
) -> ValidityFlags {
    let good_cavity = p.kappa * (1.0 + p.n_bar) < r.g2 / much_less_factor && r.g2 < p.gamma0;
    let below_saturation = matches!(n_mean, Some(n) if n < r.n_sat);
    ValidityFlags { good_cavity, below_saturation, cooling_regime: r.eta > 1.0 }
}

/// Reference parameter set: ω_c/2π = 27.5 MHz, κ/2π = 2 kHz,
/// Δ/2π = 3 GHz, g/2π = 18 MHz, Γ₀/2π = 0.5 MHz, χ̄ = 0.
pub fn reference_params(n_bar: f64, drive: Drive) -> ModelParams {
    ModelParams {
        omega_c: hz(27.5e6),
        delta_q: hz(3e9),
        g: hz(18e6),
        gamma0: hz(0.5e6),
        kappa: hz(2e3),
        n_bar,
        chi_bar: 0.0,
        drive,
    }
}
