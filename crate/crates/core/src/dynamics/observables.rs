use nalgebra::DMatrix;

use crate::algebra::{
    photon_numbers, pauli, su11_from_mode, su11_sector, tensor, BasisTag, Operator, Su11,
};
use crate::analytic::{normalized_g2, normalized_g4};
use crate::error::{Error, Result};

use super::DensityMatrix;

/// The operators whose expectation values define [`Moments`], written in one
/// basis.
#[derive(Clone, Debug)]
pub struct ObservableSet {
    tag: BasisTag,
    pub beta_z: Operator,
    /// `β⁺β⁻`
    pub pair_number: Operator,
    /// `β⁺²β⁻²`
    pub pair_number2: Operator,
}

impl ObservableSet {
    pub fn for_basis(tag: BasisTag) -> Result<Self> {
        let from_su = |su: Su11| {
            let pair = &su.raise * &su.lower;
            let raise2 = &su.raise * &su.raise;
            let lower2 = &su.lower * &su.lower;
            (su.weight, pair, &raise2 * &lower2)
        };
        let (beta_z, pair_number, pair_number2) = match tag {
            BasisTag::Fock { cutoff } => from_su(su11_from_mode(cutoff)?),
            BasisTag::Su11Sector { j, cutoff } => from_su(su11_sector(j, cutoff)?),
            BasisTag::QubitTensorFock { cutoff } => {
                let (z, p1, p2) = from_su(su11_from_mode(cutoff)?);
                let id = pauli().identity;
                (tensor(&id, &z), tensor(&id, &p1), tensor(&id, &p2))
            }
            other => {
                return Err(Error::InvalidArgument(format!(
                    "no oscillator observables for basis {other:?}"
                )))
            }
        };
        Ok(ObservableSet { tag, beta_z, pair_number, pair_number2 })
    }

    pub fn tag(&self) -> BasisTag {
        self.tag
    }
}

/// Photon statistics of a state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub beta_z_mean: f64,
    pub n_mean: f64,
    pub b2: f64,
    pub b4: f64,
    pub g2: Option<f64>,
    pub g4: Option<f64>,
    /// Probability of an even photon number.
    pub parity_even: f64,
    pub parity_odd: f64,
}

/// Even/odd photon-number masses. A sector state carries its own parity.
pub fn parity_masses(rho: &DensityMatrix) -> (f64, f64) {
    if let BasisTag::Su11Sector { j, .. } = rho.tag() {
        return if j.parity() == 0 { (1.0, 0.0) } else { (0.0, 1.0) };
    }
    let pops = rho.populations();
    let mut even = 0.0;
    let mut odd = 0.0;
    for (p, n) in pops.iter().zip(photon_numbers(rho.tag())) {
        if n % 2 == 0 {
            even += p;
        } else {
            odd += p;
        }
    }
    (even, odd)
}

pub fn moments(rho: &DensityMatrix, ops: &ObservableSet) -> Result<Moments> {
    if ops.tag() != rho.tag() {
        return Err(Error::InvalidArgument(format!(
            "observables built for {:?}, state is in {:?}",
            ops.tag(),
            rho.tag()
        )));
    }
    let beta_z_mean = rho.expectation(&ops.beta_z)?.re;
    let b2 = rho.expectation(&ops.pair_number)?.re;
    let b4 = rho.expectation(&ops.pair_number2)?.re;
    let n_mean = 2.0 * beta_z_mean - 0.5;
    let (parity_even, parity_odd) = parity_masses(rho);
    Ok(Moments {
        beta_z_mean,
        n_mean,
        b2,
        b4,
        g2: normalized_g2(b2, n_mean),
        g4: normalized_g4(b4, b2),
        parity_even,
        parity_odd,
    })
}

/// Statistics of the oscillator state projected on even and on odd photon
/// numbers, each renormalized. A sector with no weight gives `None`.
pub fn parity_resolved_moments(
    rho: &DensityMatrix,
) -> Result<(Option<Moments>, Option<Moments>)> {
    let osc = rho.oscillator_state();
    let BasisTag::Fock { cutoff } = osc.tag() else {
        return Err(Error::InvalidArgument(format!(
            "parity projection needs a Fock or qubit-Fock state, got {:?}",
            rho.tag()
        )));
    };
    let ops = ObservableSet::for_basis(osc.tag())?;
    let project = |parity: usize| -> Result<Option<Moments>> {
        let m = osc.matrix();
        let proj = DMatrix::from_fn(cutoff, cutoff, |r, c| {
            if r % 2 == parity && c % 2 == parity {
                m[(r, c)]
            } else {
                Default::default()
            }
        });
        let mass = proj.trace().re;
        if !(mass > 0.0) {
            return Ok(None);
        }
        let proj = proj.unscale(mass);
        let state = DensityMatrix::new_unchecked(Operator::from_parts(osc.tag(), proj));
        moments(&state, &ops).map(Some)
    };
    Ok((project(0)?, project(1)?))
}
