//! Stationary states by direct linear solves.
//!
//! Every generator built in this crate conserves some combination of photon
//! number and qubit excitation, so its vectorized form is block diagonal once
//! the vector indices are grouped by the connected components of the
//! Liouvillian's sparsity graph. Only components that contain diagonal
//! entries (populations) can carry trace; each of those has at least one
//! stationary vector. The components are found by a breadth-first search that
//! generates Liouvillian columns and rows on the fly, then each is solved
//! densely with one equation swapped for the trace condition.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use crate::algebra::{Bargmann, Operator, C64};
use crate::error::{Error, Result};

use super::{DensityMatrix, Generator};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SteadyStateOptions {
    /// Largest component solved with a dense LU.
    pub max_block: usize,
    /// Also factor the traceless components to detect stationary
    /// coherences, as long as their combined size stays below this.
    pub coherence_check_limit: usize,
}

impl Default for SteadyStateOptions {
    fn default() -> Self {
        SteadyStateOptions { max_block: 6000, coherence_check_limit: 4096 }
    }
}

#[derive(Clone, Debug)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    /// `‖L(ρ)‖_F`
    pub residual: f64,
    /// `‖L(ρ)‖_F / (‖L‖₁ ‖ρ‖_F)` over the solved block.
    pub relative_residual: f64,
    pub block_size: usize,
}

const NULL_TOL: f64 = 1e-12;

struct Component {
    indices: Vec<usize>,
    has_trace: bool,
}

struct Explorer<'g> {
    g: &'g Generator,
    owner: Vec<u32>,
    n_components: u32,
    cols: Vec<(usize, C64)>,
    rows: Vec<usize>,
}

const UNVISITED: u32 = u32::MAX;

impl<'g> Explorer<'g> {
    fn new(g: &'g Generator) -> Self {
        let d = g.dim();
        Explorer {
            g,
            owner: vec![UNVISITED; d * d],
            n_components: 0,
            cols: Vec::new(),
            rows: Vec::new(),
        }
    }

    fn explore(&mut self, seed: usize) -> Option<Component> {
        if self.owner[seed] != UNVISITED {
            return None;
        }
        let d = self.g.dim();
        let id = self.n_components;
        self.n_components += 1;
        let mut queue = VecDeque::from([seed]);
        self.owner[seed] = id;
        let mut indices = Vec::new();
        let mut has_trace = false;
        while let Some(idx) = queue.pop_front() {
            indices.push(idx);
            has_trace |= idx % d == idx / d;
            self.g.column_entries(idx, &mut self.cols);
            self.g.row_support(idx, &mut self.rows);
            let out = self.cols.iter().filter(|(_, v)| v.norm() != 0.0).map(|&(k, _)| k);
            for k in out.chain(self.rows.iter().copied()).collect::<Vec<_>>() {
                if self.owner[k] == UNVISITED {
                    self.owner[k] = id;
                    queue.push_back(k);
                }
            }
        }
        indices.sort_unstable();
        Some(Component { indices, has_trace })
    }

    fn trace_components(&mut self) -> Vec<Component> {
        let d = self.g.dim();
        (0..d).filter_map(|k| self.explore(k * (d + 1))).collect()
    }
}

/// Sparse block of the Liouvillian restricted to one component, in local
/// (sorted) indices.
struct Block {
    n: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl Block {
    fn assemble(g: &Generator, indices: &[usize]) -> Self {
        let n = indices.len();
        let mut local = std::collections::HashMap::with_capacity(n);
        for (i, &idx) in indices.iter().enumerate() {
            local.insert(idx, i);
        }
        let mut entries = Vec::new();
        let mut col = Vec::new();
        for (c, &idx) in indices.iter().enumerate() {
            g.column_entries(idx, &mut col);
            for &(k, v) in &col {
                let r = *local.get(&k).expect("component is closed under the generator");
                entries.push((r, c, v));
            }
        }
        Block { n, entries }
    }

    fn dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    fn one_norm(&self) -> f64 {
        let mut cols = vec![0.0; self.n];
        for &(_, c, v) in &self.entries {
            cols[c] += v.norm();
        }
        cols.into_iter().fold(0.0, f64::max)
    }

    /// `(sub, super)` diagonal counts.
    fn bandwidths(&self) -> (usize, usize) {
        self.entries.iter().fold((0, 0), |(kl, ku), &(r, c, _)| {
            (kl.max(r.saturating_sub(c)), ku.max(c.saturating_sub(r)))
        })
    }

    fn is_narrow(&self) -> bool {
        let (kl, ku) = self.bandwidths();
        self.n > 64 && 8 * (kl + ku + 1) <= self.n
    }
}

/// Gaussian elimination with partial pivoting in band storage. Rows are
/// stored with room for the fill-in that pivoting creates above the band.
struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<C64>,
    min_pivot: f64,
    max_pivot: f64,
}

impl BandLu {
    fn factor(n: usize, kl: usize, ku: usize, entries: impl Iterator<Item = (usize, usize, C64)>) -> Self {
        let ku = ku + kl;
        let width = kl + ku + 1;
        let mut lu = BandLu {
            n,
            kl,
            ku,
            width,
            data: vec![C64::new(0.0, 0.0); n * width],
            min_pivot: f64::INFINITY,
            max_pivot: 0.0,
        };
        for (r, c, v) in entries {
            *lu.at(r, c) += v;
        }
        lu
    }

    fn at(&mut self, r: usize, c: usize) -> &mut C64 {
        &mut self.data[r * self.width + c + self.kl - r]
    }

    fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.width + c + self.kl - r]
    }

    /// Factor in place while carrying `b` along; returns the solution.
    fn solve(mut self, mut b: Vec<C64>) -> (Vec<C64>, bool) {
        let n = self.n;
        for k in 0..n {
            let last_row = (k + self.kl).min(n - 1);
            let last_col = (k + self.ku).min(n - 1);
            let p = (k..=last_row)
                .max_by(|&a, &b| self.get(a, k).norm().total_cmp(&self.get(b, k).norm()))
                .expect("non-empty range");
            let piv = self.get(p, k).norm();
            self.min_pivot = self.min_pivot.min(piv);
            self.max_pivot = self.max_pivot.max(piv);
            if piv == 0.0 {
                return (b, true);
            }
            if p != k {
                for c in k..=last_col {
                    let t = self.get(k, c);
                    *self.at(k, c) = self.get(p, c);
                    *self.at(p, c) = t;
                }
                b.swap(k, p);
            }
            let pivot = self.get(k, k);
            for r in k + 1..=last_row {
                let f = self.get(r, k) / pivot;
                if f == C64::new(0.0, 0.0) {
                    continue;
                }
                for c in k..=last_col {
                    let v = self.get(k, c);
                    *self.at(r, c) -= f * v;
                }
                let bk = b[k];
                b[r] -= f * bk;
            }
        }
        for i in (0..n).rev() {
            let mut acc = b[i];
            for j in i + 1..=(i + self.ku).min(n - 1) {
                acc -= self.get(i, j) * b[j];
            }
            b[i] = acc / self.get(i, i);
        }
        let singular = self.min_pivot <= NULL_TOL * self.max_pivot;
        (b, singular)
    }
}

/// Stationary vector of a narrow block, normalized by fixing the entry at
/// `pivot` (a population) so that the band structure is kept. `None` when
/// the modified system is singular.
fn banded_null_vector(block: &Block, pivot: usize, scale: f64) -> Option<Vec<C64>> {
    let (kl, ku) = block.bandwidths();
    let entries = block
        .entries
        .iter()
        .copied()
        .filter(|&(r, _, _)| r != pivot)
        .chain(std::iter::once((pivot, pivot, C64::new(scale, 0.0))));
    let lu = BandLu::factor(block.n, kl, ku, entries);
    let mut rhs = vec![C64::new(0.0, 0.0); block.n];
    rhs[pivot] = C64::new(scale, 0.0);
    let (x, singular) = lu.solve(rhs);
    (!singular).then_some(x)
}

fn block_is_singular(block: &Block) -> bool {
    if block.is_narrow() {
        let (kl, ku) = block.bandwidths();
        let lu = BandLu::factor(block.n, kl, ku, block.entries.iter().copied());
        lu.solve(vec![C64::new(0.0, 0.0); block.n]).1
    } else {
        is_singular(&block.dense())
    }
}

/// Number of singular values below `NULL_TOL` relative to the largest.
fn null_dim_estimate(m: &DMatrix<C64>) -> usize {
    let sv = m.clone().singular_values();
    let top = sv.iter().copied().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s <= NULL_TOL * top).count().max(1)
}

type Lu = nalgebra::linalg::LU<C64, nalgebra::Dyn, nalgebra::Dyn>;

fn is_singular(m: &DMatrix<C64>) -> bool {
    lu_is_singular(&m.clone().lu())
}

fn lu_is_singular(lu: &Lu) -> bool {
    let u = lu.u();
    let diag: Vec<f64> = (0..u.nrows()).map(|k| u[(k, k)].norm()).collect();
    let top = diag.iter().copied().fold(0.0, f64::max);
    let bottom = diag.iter().copied().fold(f64::INFINITY, f64::min);
    top == 0.0 || bottom <= NULL_TOL * top
}

/// Dense solve with one equation swapped for the trace condition.
fn dense_null_vector(block: &Block, diag_local: &[usize], scale: f64) -> Result<Vec<C64>> {
    let n = block.n;
    let dense = block.dense();
    let mut sys = dense.clone();
    let pivot_row = diag_local[0];
    sys.row_mut(pivot_row).fill(C64::new(0.0, 0.0));
    for &k in diag_local {
        sys[(pivot_row, k)] = C64::new(scale, 0.0);
    }
    let mut rhs = DVector::zeros(n);
    rhs[pivot_row] = C64::new(scale, 0.0);

    let lu = sys.lu();
    if lu_is_singular(&lu) {
        return Err(Error::NonUniqueSteadyState { null_dim: null_dim_estimate(&dense) });
    }
    let x = lu
        .solve(&rhs)
        .ok_or_else(|| Error::NonUniqueSteadyState { null_dim: null_dim_estimate(&dense) })?;
    Ok(x.iter().copied().collect())
}

fn solve_component(
    g: &Generator,
    comp: &Component,
    opts: &SteadyStateOptions,
) -> Result<SteadyState> {
    let d = g.dim();
    let n = comp.indices.len();
    if n > opts.max_block {
        return Err(Error::Solver(format!(
            "stationary block of size {n} exceeds the dense limit {}",
            opts.max_block
        )));
    }
    let block = Block::assemble(g, &comp.indices);
    let diag_local: Vec<usize> = comp
        .indices
        .iter()
        .enumerate()
        .filter(|(_, &idx)| idx % d == idx / d)
        .map(|(i, _)| i)
        .collect();
    let scale = block.one_norm().max(f64::MIN_POSITIVE);

    let banded = if block.is_narrow() {
        banded_null_vector(&block, diag_local[0], scale)
    } else {
        None
    };
    let x = match banded {
        Some(x) => x,
        None => dense_null_vector(&block, &diag_local, scale)?,
    };

    let mut full = DMatrix::zeros(d, d);
    for (i, &idx) in comp.indices.iter().enumerate() {
        full[(idx % d, idx / d)] = x[i];
    }
    let full = (&full + full.adjoint()) * C64::new(0.5, 0.0);
    let tr = full.trace();
    if !(tr.norm() > 0.0) {
        return Err(Error::Solver("stationary vector carries no trace".into()));
    }
    let full = full / tr;

    let image = g.apply(&full);
    let residual = image.norm();
    let relative_residual = residual / (scale * full.norm());
    Ok(SteadyState {
        rho: DensityMatrix::new_unchecked(Operator::from_parts(g.tag(), full)),
        residual,
        relative_residual,
        block_size: n,
    })
}

fn check_coherence_blocks(
    g: &Generator,
    explorer: &mut Explorer<'_>,
    opts: &SteadyStateOptions,
) -> Result<()> {
    let d = g.dim();
    let mut budget = opts.coherence_check_limit;
    for idx in 0..d * d {
        let Some(comp) = explorer.explore(idx) else { continue };
        let n = comp.indices.len();
        if n > budget || n > opts.max_block {
            log::debug!("skipping stationary-coherence check beyond {} unknowns", opts.coherence_check_limit);
            return Ok(());
        }
        budget -= n;
        let block = Block::assemble(g, &comp.indices);
        if block_is_singular(&block) {
            let null_dim = if block.n <= 512 { null_dim_estimate(&block.dense()) } else { 1 };
            return Err(Error::NonUniqueSteadyState { null_dim: 1 + null_dim });
        }
    }
    Ok(())
}

/// Unique stationary state of `g`.
pub fn steady_state(g: &Generator) -> Result<SteadyState> {
    steady_state_with(g, &SteadyStateOptions::default())
}

pub fn steady_state_with(g: &Generator, opts: &SteadyStateOptions) -> Result<SteadyState> {
    let mut explorer = Explorer::new(g);
    let comps = explorer.trace_components();
    if comps.len() != 1 {
        return Err(Error::NonUniqueSteadyState { null_dim: comps.len() });
    }
    debug_assert!(comps[0].has_trace);
    let ss = solve_component(g, &comps[0], opts)?;
    check_coherence_blocks(g, &mut explorer, opts)?;
    Ok(ss)
}

/// Stationary state of the dynamically closed sector that contains the
/// population of basis state `k`, normalized within that sector.
pub fn steady_state_containing(g: &Generator, k: usize) -> Result<SteadyState> {
    let d = g.dim();
    if k >= d {
        return Err(Error::InvalidArgument(format!("basis index {k} out of range {d}")));
    }
    let mut explorer = Explorer::new(g);
    let comp = explorer.explore(k * (d + 1)).expect("fresh explorer");
    solve_component(g, &comp, &SteadyStateOptions::default())
}

/// One stationary state per dynamically closed population sector.
pub fn stationary_sectors(g: &Generator) -> Result<Vec<SteadyState>> {
    let mut explorer = Explorer::new(g);
    let opts = SteadyStateOptions::default();
    explorer
        .trace_components()
        .iter()
        .map(|c| solve_component(g, c, &opts))
        .collect()
}

/// Sector populations from detailed balance, `p_{m+1}/p_m = 1/η`.
///
/// Returns the normalized populations and the mass the untruncated chain
/// would put at `m >= m_cutoff`.
pub fn steady_populations_birth_death(
    eta: f64,
    _j: Bargmann,
    m_cutoff: usize,
) -> Result<(Vec<f64>, f64)> {
    if !(eta > 1.0) {
        return Err(Error::NotNormalizable { eta });
    }
    let mut p = vec![1.0; m_cutoff.max(1)];
    for m in 1..p.len() {
        p[m] = p[m - 1] / eta;
    }
    let tail = eta.powf(-(m_cutoff as f64));
    let total: f64 = p.iter().rev().sum();
    p.iter_mut().for_each(|v| *v /= total);
    Ok((p, tail))
}
