//! Closed-form steady-state statistics of the reduced oscillator equation,
//! together with a direct summation over the geometric sector populations
//! that serves as an independent check.

use serde::{Deserialize, Serialize};

use crate::algebra::Bargmann;
use crate::error::{Error, Result};

/// Steady-state moments and normalized coherences of one su(1,1) sector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteadyStats {
    pub beta_z_mean: f64,
    pub n_mean: f64,
    /// `⟨β⁺β⁻⟩`
    pub b2: f64,
    /// `⟨β⁺²β⁻²⟩`
    pub b4: f64,
    /// `g⁽²⁾(0) = 4⟨β⁺β⁻⟩/⟨n⟩²`, absent for the vacuum.
    pub g2: Option<f64>,
    /// `g⁽⁴⁾(0) = ⟨β⁺²β⁻²⟩/⟨β⁺β⁻⟩²`, absent when `⟨β⁺β⁻⟩ = 0`.
    pub g4: Option<f64>,
}

impl SteadyStats {
    pub fn from_moments(beta_z_mean: f64, b2: f64, b4: f64) -> Self {
        let n_mean = 2.0 * beta_z_mean - 0.5;
        SteadyStats {
            beta_z_mean,
            n_mean,
            b2,
            b4,
            g2: normalized_g2(b2, n_mean),
            g4: normalized_g4(b4, b2),
        }
    }
}

pub(crate) fn normalized_g2(b2: f64, n_mean: f64) -> Option<f64> {
    (n_mean != 0.0).then(|| 4.0 * b2 / (n_mean * n_mean))
}

pub(crate) fn normalized_g4(b4: f64, b2: f64) -> Option<f64> {
    (b2 != 0.0).then(|| b4 / (b2 * b2))
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 1.0 {
        Ok(())
    } else {
        Err(Error::LasingInstability { eta })
    }
}

/// Moments of `ρ ∝ exp(-ln η · βz)` on sector `j`.
pub fn analytic_moments(eta: f64, j: Bargmann) -> Result<SteadyStats> {
    check_eta(eta)?;
    let jv = j.value();
    let e1 = eta - 1.0;
    let beta_z_mean = jv + 1.0 / e1;
    let b2 = 2.0 * (1.0 + jv * e1) / (e1 * e1);
    let b4 = (12.0 * (1.0 + eta) + 4.0 * e1 * (5.0 + eta) * jv) / e1.powi(4)
        + 8.0 * jv * jv / (e1 * e1);
    let mut stats = SteadyStats::from_moments(beta_z_mean, b2, b4);
    // Use the closed-form coherences rather than ratios of the moments.
    let (g2, g4) = analytic_g(eta, j)?;
    stats.g2 = Some(g2);
    stats.g4 = Some(g4);
    Ok(stats)
}

/// `(g⁽²⁾(0), g⁽⁴⁾(0))` in closed form for any sector.
pub fn analytic_g(eta: f64, j: Bargmann) -> Result<(f64, f64)> {
    check_eta(eta)?;
    let j = j.value();
    let e1 = eta - 1.0;
    let g2 = 32.0 * (1.0 + e1 * j) / (5.0 + 4.0 * j * e1 - eta).powi(2);
    let g4 = 2.0 + (1.0 + 3.0 * eta + j * (eta * eta - 1.0)) / (1.0 + j * e1).powi(2);
    Ok((g2, g4))
}

/// Sector-specific closed forms: `j = 1/4` gives `g⁽²⁾ = (3+η)/2`,
/// `j = 3/4` gives `g⁽²⁾ = 2(1+3η)/(1+η)²`.
pub fn analytic_g_special(eta: f64, j: Bargmann) -> Result<(f64, f64)> {
    check_eta(eta)?;
    Ok(match j {
        Bargmann::Quarter => (
            (3.0 + eta) / 2.0,
            2.0 + 4.0 * (3.0 + 12.0 * eta + eta * eta) / (3.0 + eta).powi(2),
        ),
        Bargmann::ThreeQuarters => (
            2.0 * (1.0 + 3.0 * eta) / (1.0 + eta).powi(2),
            2.0 + 4.0 * (1.0 + 12.0 * eta + 3.0 * eta * eta) / (1.0 + 3.0 * eta).powi(2),
        ),
    })
}

/// Populations `p_m ∝ η^{-m}` truncated at `m_cutoff` levels.
///
/// Returns the normalized populations and the probability mass that the
/// untruncated distribution places beyond the cutoff.
pub fn geometric_populations(eta: f64, m_cutoff: usize) -> Result<(Vec<f64>, f64)> {
    if !(eta > 1.0) {
        return Err(Error::NotNormalizable { eta });
    }
    let q = 1.0 / eta;
    let mut p = Vec::with_capacity(m_cutoff);
    let mut w = 1.0 - q;
    for _ in 0..m_cutoff {
        p.push(w);
        w *= q;
    }
    let tail = q.powi(m_cutoff as i32);
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= total);
    Ok((p, tail))
}

/// Smallest cutoff with `η^{-m_cutoff} < tail`.
pub fn cutoff_for_tail(eta: f64, tail: f64) -> Result<usize> {
    if !(eta > 1.0) {
        return Err(Error::NotNormalizable { eta });
    }
    let m = (tail.ln() / -eta.ln()).ceil();
    Ok((m.max(2.0) as usize) + 1)
}

/// Moments by explicit summation over the sector populations and the
/// su(1,1) matrix elements.
pub fn oracle_moments(eta: f64, j: Bargmann, m_cutoff: usize) -> Result<SteadyStats> {
    check_eta(eta)?;
    let (p, tail) = geometric_populations(eta, m_cutoff)?;
    if tail >= 1e-15 {
        return Err(Error::InvalidArgument(format!(
            "m_cutoff = {m_cutoff} leaves tail mass {tail:e} >= 1e-15"
        )));
    }
    let jv = j.value();
    let (mut bz, mut b2, mut b4) = (0.0, 0.0, 0.0);
    // Sum from the smallest terms upwards.
    for (m, &pm) in p.iter().enumerate().rev() {
        let m = m as f64;
        bz += pm * (m + jv);
        b2 += pm * m * (m + 2.0 * jv - 1.0);
        b4 += pm * m * (m - 1.0) * (m + 2.0 * jv - 1.0) * (m + 2.0 * jv - 2.0);
    }
    Ok(SteadyStats::from_moments(bz, b2, b4))
}
