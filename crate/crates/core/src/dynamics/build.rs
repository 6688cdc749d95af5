use crate::algebra::{pauli, su11_from_mode, su11_sector, tensor, Bargmann, BasisTag, Operator};
use crate::error::{Error, Result};
use crate::model::{validity_flags, DerivedRates, ModelParams, DEFAULT_MUCH_LESS_FACTOR};

use super::{cross_dissipator, Generator};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FullModelOptions {
    /// Fock levels kept for the oscillator.
    pub cutoff: usize,
    /// Remove `(ω_c + χ̄n̄)(2βz + σz)` from the Hamiltonian. This operator
    /// commutes with the whole generator, so populations and every
    /// photon-number moment are unchanged while the fast phase rotation
    /// disappears.
    pub frame_shift: bool,
}

impl FullModelOptions {
    pub fn new(cutoff: usize) -> Self {
        FullModelOptions { cutoff, frame_shift: false }
    }

    pub fn with_frame_shift(mut self, on: bool) -> Self {
        self.frame_shift = on;
        self
    }
}

pub const MIN_FULL_CUTOFF: usize = 8;

/// Qubit ⊗ oscillator generator with the two-photon Hamiltonian
/// `H̃ = 2(ω_c + χ̄n̄)βz - χ̄β⁺β⁻ + (Ω_R - 2g₀βz)σz/2 + g₂(σ⁻β⁺ + β⁻σ⁺)`,
/// the dressed-qubit dissipators and the thermal two-photon damping.
pub fn build_full_generator(
    p: &ModelParams,
    r: &DerivedRates,
    opts: FullModelOptions,
) -> Result<Generator> {
    let cutoff = opts.cutoff;
    if cutoff < MIN_FULL_CUTOFF {
        return Err(Error::InvalidArgument(format!(
            "full model needs cutoff >= {MIN_FULL_CUTOFF}, got {cutoff}"
        )));
    }
    let su = su11_from_mode(cutoff)?;
    let s = pauli();
    let id_f = Operator::identity(BasisTag::Fock { cutoff });
    let osc = |o: &Operator| tensor(&s.identity, o);
    let qub = |o: &Operator| tensor(o, &id_f);

    let w = p.shifted_omega_c();
    let pair_number = &su.raise * &su.lower;
    let h_osc = &su.weight.scale(2.0 * w) - &pair_number.scale(p.chi_bar);
    let h_qubit = &qub(&s.z).scale(0.5 * r.omega_r) - &tensor(&s.z, &su.weight).scale(r.g0);
    let h_int = &tensor(&s.lower, &su.raise) + &tensor(&s.raise, &su.lower);
    let mut h = &(&osc(&h_osc) + &h_qubit) + &h_int.scale(r.g2);
    if opts.frame_shift {
        let frame = &osc(&su.weight).scale(2.0 * w) + &qub(&s.z).scale(w);
        h = &h - &frame;
    }

    let dissipators = vec![
        cross_dissipator(&qub(&s.z), &qub(&s.z), r.gamma_dephase)?,
        cross_dissipator(&qub(&s.raise), &qub(&s.lower), r.gamma_plus)?,
        cross_dissipator(&qub(&s.lower), &qub(&s.raise), r.gamma_minus)?,
        cross_dissipator(&osc(&su.raise), &osc(&su.lower), p.kappa * (1.0 + p.n_bar))?,
        cross_dissipator(&osc(&su.lower), &osc(&su.raise), p.kappa * p.n_bar)?,
    ];
    Generator::new(h, dissipators)
}

/// Oscillator-only generator on one su(1,1) sector after the qubit has been
/// eliminated: Hamiltonian `-χ̄β⁺β⁻`, pair loss at `κ(1+n̄) + Γ₋` and pair
/// gain at `κn̄ + Γ₊`.
pub fn build_reduced_generator(
    r: &DerivedRates,
    p: &ModelParams,
    j: Bargmann,
    m_cutoff: usize,
) -> Result<Generator> {
    let su = su11_sector(j, m_cutoff)?;
    if !validity_flags(r, p, None, DEFAULT_MUCH_LESS_FACTOR).good_cavity {
        log::warn!(
            "reduced generator built outside the good-cavity regime (g2 = {:.4e} rad/s)",
            r.g2
        );
    }
    let h = (&su.raise * &su.lower).scale(-p.chi_bar);
    let dissipators = vec![
        cross_dissipator(&su.raise, &su.lower, r.down_rate(p))?,
        cross_dissipator(&su.lower, &su.raise, r.up_rate(p))?,
    ];
    Generator::new(h, dissipators)
}

/// Dressed qubit alone: `Ω_R σz/2` plus its three dissipators.
pub fn qubit_generator(r: &DerivedRates) -> Result<Generator> {
    let s = pauli();
    let h = s.z.scale(0.5 * r.omega_r);
    let dissipators = vec![
        cross_dissipator(&s.z, &s.z, r.gamma_dephase)?,
        cross_dissipator(&s.raise, &s.lower, r.gamma_plus)?,
        cross_dissipator(&s.lower, &s.raise, r.gamma_minus)?,
    ];
    Generator::new(h, dissipators)
}
