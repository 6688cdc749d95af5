//! Adaptive Dormand–Prince 5(4) integration of `ρ̇ = L(ρ)`.

use nalgebra::DMatrix;

use crate::algebra::{Operator, C64};
use crate::error::{Error, Result};

use super::{DensityMatrix, Generator};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveOptions {
    /// Maximum accepted local error per step (absolute, max-norm over entries).
    pub tol: f64,
    /// Abort with a stiffness error after this many attempted steps.
    pub max_steps: usize,
}

impl EvolveOptions {
    pub fn new(tol: f64) -> Self {
        EvolveOptions { tol, max_steps: 2_000_000 }
    }
}

#[derive(Clone, Debug)]
pub struct Evolution {
    pub rho: DensityMatrix,
    pub t: f64,
    pub steps: usize,
    pub rejected: usize,
    /// `|Tr ρ - 1|` of the returned state; the state is not renormalized.
    pub trace_deviation: f64,
}

// Dormand–Prince tableau (autonomous form, no nodes).
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] =
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

struct Stepper<'g> {
    g: &'g Generator,
    k: Vec<Vec<C64>>,
    stage: Vec<C64>,
    y5: Vec<C64>,
}

impl<'g> Stepper<'g> {
    fn new(g: &'g Generator) -> Self {
        let n = g.dim() * g.dim();
        Stepper {
            g,
            k: vec![vec![C64::new(0.0, 0.0); n]; 7],
            stage: vec![C64::new(0.0, 0.0); n],
            y5: vec![C64::new(0.0, 0.0); n],
        }
    }

    /// One trial step from `y`; `self.k[0]` must hold `L(y)`. Returns the
    /// max-norm error estimate and leaves the 5th-order result in `y5`
    /// (and, by FSAL, `L(y5)` in `k[6]`).
    fn attempt(&mut self, y: &[C64], h: f64) -> f64 {
        for s in 1..7 {
            for (i, st) in self.stage.iter_mut().enumerate() {
                let mut acc = y[i];
                for (kk, &a) in self.k[..s].iter().zip(&A[s][..s]) {
                    if a != 0.0 {
                        acc += kk[i] * (h * a);
                    }
                }
                *st = acc;
            }
            let (_, rest) = self.k.split_at_mut(s);
            self.g.apply_slice(&self.stage, &mut rest[0]);
        }
        // Stage 7 was evaluated at the 5th-order solution.
        self.y5.copy_from_slice(&self.stage);
        let mut err = 0.0_f64;
        for i in 0..y.len() {
            let mut e = C64::new(0.0, 0.0);
            for s in 0..7 {
                e += self.k[s][i] * (B5[s] - B4[s]);
            }
            err = err.max((e * h).norm());
        }
        err
    }
}

fn check_inputs(g: &Generator, rho0: &DensityMatrix) -> Result<()> {
    if rho0.dim() != g.dim() {
        return Err(Error::DimensionMismatch { left: g.dim(), right: rho0.dim() });
    }
    rho0.check()
}

/// `ρ(t_final)` starting from `rho0` at `t = 0`.
pub fn evolve(g: &Generator, rho0: &DensityMatrix, t_final: f64, tol: f64) -> Result<Evolution> {
    let mut out = evolve_sampled(g, rho0, &[t_final], EvolveOptions::new(tol))?;
    Ok(out.pop().expect("one sample requested"))
}

/// States at each of the (ascending, non-negative) sample times.
pub fn evolve_sampled(
    g: &Generator,
    rho0: &DensityMatrix,
    times: &[f64],
    opts: EvolveOptions,
) -> Result<Vec<Evolution>> {
    check_inputs(g, rho0)?;
    if times.iter().any(|&t| !(t >= 0.0) || !t.is_finite()) {
        return Err(Error::InvalidArgument("sample times must be finite and >= 0".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("sample times must be ascending".into()));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be > 0, got {}", opts.tol)));
    }
    let d = g.dim();
    let mut y: Vec<C64> = rho0.matrix().as_slice().to_vec();
    let mut stepper = Stepper::new(g);
    g.apply_slice(&y, &mut stepper.k[0]);

    let rate = g.fastest_rate().max(f64::MIN_POSITIVE);
    let mut h = 0.1 / rate;
    let mut t = 0.0;
    let (mut steps, mut rejected) = (0usize, 0usize);
    let mut samples = Vec::with_capacity(times.len());

    for &target in times {
        while t < target {
            if steps + rejected >= opts.max_steps {
                return Err(Error::Stiffness { t, step: h, fastest_rate: rate });
            }
            let h_try = h.min(target - t);
            let err = stepper.attempt(&y, h_try);
            let ratio = err / opts.tol;
            if ratio <= 1.0 {
                t = if h_try == target - t { target } else { t + h_try };
                std::mem::swap(&mut y, &mut stepper.y5);
                let (first, rest) = stepper.k.split_at_mut(6);
                std::mem::swap(&mut first[0], &mut rest[0]);
                steps += 1;
            } else {
                rejected += 1;
            }
            let factor = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
            // Only grow from a full step; a step clipped at a sample time says
            // little about the admissible size.
            if ratio > 1.0 || h_try == h {
                h = h_try * factor;
            }
            if h < f64::EPSILON * t.max(1.0 / rate) {
                return Err(Error::Stiffness { t, step: h, fastest_rate: rate });
            }
        }
        let m = DMatrix::from_column_slice(d, d, &y);
        let tr = m.trace();
        samples.push(Evolution {
            rho: DensityMatrix::new_unchecked(Operator::from_parts(g.tag(), m)),
            t,
            steps,
            rejected,
            trace_deviation: (tr - C64::new(1.0, 0.0)).norm(),
        });
    }
    Ok(samples)
}
