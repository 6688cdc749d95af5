//! Independent dense reference for small reduced generators: the
//! Liouvillian as an explicit `d² × d²` Kronecker sum, with its null vector
//! taken from a singular value decomposition.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

/// Sector ladder operators from their matrix elements.
pub fn sector_ladders(j: f64, d: usize) -> (DMatrix<C64>, DMatrix<C64>) {
    let mut raise = DMatrix::zeros(d, d);
    for m in 0..d - 1 {
        let m_f = m as f64;
        raise[(m + 1, m)] = C64::new(((m_f + 1.0) * (m_f + 2.0 * j)).sqrt(), 0.0);
    }
    let lower = raise.adjoint();
    (raise, lower)
}

/// `vec(A ρ B) = (Bᵀ ⊗ A) vec(ρ)` with column stacking.
fn sandwich(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    b.transpose().kronecker(a)
}

/// Dense Liouvillian of `-i[H, ρ] - Σ rate (ABρ + ρAB - 2BρA)`.
pub fn dense_liouvillian(h: &DMatrix<C64>, terms: &[(DMatrix<C64>, DMatrix<C64>, f64)]) -> DMatrix<C64> {
    let d = h.nrows();
    let id = DMatrix::<C64>::identity(d, d);
    let i = C64::new(0.0, 1.0);
    let mut l = (sandwich(h, &id) - sandwich(&id, h)) * (-i);
    for (a, b, rate) in terms {
        let ab = a * b;
        let r = C64::new(*rate, 0.0);
        l -= (sandwich(&ab, &id) + sandwich(&id, &ab) - sandwich(b, a) * C64::new(2.0, 0.0)) * r;
    }
    l
}

/// Unit-trace, Hermitian null vector of `l` and the ratio of its two
/// smallest singular values (small when the null space is one-dimensional).
pub fn null_state(l: &DMatrix<C64>, d: usize) -> (DMatrix<C64>, f64) {
    let svd = l.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[a].partial_cmp(&sv[b]).unwrap());
    let k = order[0];
    let gap = sv[order[0]] / sv[order[1]];
    let v: Vec<C64> = v_t.row(k).iter().map(|z| z.conj()).collect();
    let rho = DMatrix::from_column_slice(d, d, &v);
    let rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    let tr = rho.trace();
    (rho / tr, gap)
}
