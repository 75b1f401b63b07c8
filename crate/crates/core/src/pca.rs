//! Standard PCA over complex data via power iteration with deflation.
//!
//! The solver operates on the Gram operator of the centred data without ever
//! forming a matrix larger than the data itself: when the ambient dimension
//! is at most the sample count the (dim x dim) covariance is formed and
//! iterated directly, otherwise the operator is applied implicitly as
//! `v -> Σ_i <v, y_i> y_i`. If power iteration hits the iteration cap
//! (near-degenerate top eigenvalues) it falls back to a dense
//! eigendecomposition of the smaller of the two Gram matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{invalid, Error, Result};
use crate::signal::{Dataset, Signal};

/// Relative Rayleigh-quotient change below which iteration stops.
const CONVERGENCE_TOL: f64 = 1e-13;
const MAX_ITERATIONS: usize = 10_000;
/// Deflation stops once residual energy falls below this fraction of the original.
pub(crate) const RESIDUAL_ENERGY_TOL: f64 = 1e-12;
/// Default relative-magnitude threshold for selecting the phase anchor entry.
pub const PHASE_THRESHOLD: f64 = 1e-10;

/// Result of extracting `k` principal components.
#[derive(Clone, Debug)]
pub struct PcaResult {
    /// Unit-norm components, mutually orthogonal, ordered by captured energy.
    pub components: Vec<Signal>,
    /// Captured energies `Σ_i |<y_i, q^(j)>|²`, non-increasing.
    pub eigenvalues: Vec<f64>,
    /// Upper bound on the dimension of the span of the input data.
    pub rank_bound: usize,
}

/// Subtract the centroid from every vector.
pub fn center(data: &Dataset) -> Result<(Signal, Dataset)> {
    let m = data.num_vectors();
    let n = data.signal_len();
    let inv_m = 1.0 / m as f64;
    let mut mean = vec![C64::ZERO; n];
    for v in data.vectors() {
        for (acc, x) in mean.iter_mut().zip(v.values()) {
            *acc += x;
        }
    }
    for acc in &mut mean {
        *acc *= inv_m;
    }
    let centroid = Signal::new(mean)?;
    let centered: Vec<Signal> = data
        .vectors()
        .iter()
        .map(|v| {
            Signal::new(
                v.values()
                    .iter()
                    .zip(centroid.values())
                    .map(|(x, c)| x - c)
                    .collect(),
            )
            .expect("nonempty")
        })
        .collect();
    Ok((centroid.clone(), Dataset::new_centered(centered, centroid)))
}

/// First principal component of centred data: a unit-norm maximizer of
/// `Σ_i |<y_i, q>|²`, phase-normalized, together with the attained energy.
pub fn first_component(data: &Dataset) -> Result<(Signal, f64)> {
    if !data.is_centered() {
        return Err(Error::NotCentered);
    }
    let rows: Vec<&[C64]> = data.vectors().iter().map(Signal::values).collect();
    let (q, lambda) = dominant_eigenvector(&rows)?;
    let q = phase_normalize(&q, PHASE_THRESHOLD)?;
    Ok((Signal::new(q)?, lambda))
}

/// Up to `k` principal components by repeated extraction and deflation.
/// Returns fewer than `k` components if the data rank is exhausted first.
pub fn components(data: &Dataset, k: usize) -> Result<PcaResult> {
    if k < 1 {
        return Err(invalid("component count must be at least 1"));
    }
    if !data.is_centered() {
        return Err(Error::NotCentered);
    }
    let mut rows: Vec<Vec<C64>> = data
        .vectors()
        .iter()
        .map(|v| v.values().to_vec())
        .collect();
    let original_energy: f64 = rows.iter().map(|r| energy(r)).sum();
    let mut comps = Vec::new();
    let mut eigs = Vec::new();
    for _ in 0..k {
        let residual: f64 = rows.iter().map(|r| energy(r)).sum();
        if residual < RESIDUAL_ENERGY_TOL * original_energy {
            break;
        }
        let refs: Vec<&[C64]> = rows.iter().map(Vec::as_slice).collect();
        let (q, lambda) = dominant_eigenvector(&refs)?;
        let q = phase_normalize(&q, PHASE_THRESHOLD)?;
        deflate(&mut rows, &q);
        comps.push(Signal::new(q)?);
        eigs.push(lambda);
    }
    let rank_bound = data.num_vectors().min(data.signal_len());
    Ok(PcaResult {
        components: comps,
        eigenvalues: eigs,
        rank_bound,
    })
}

/// Rotate `v` by a unit phase so the first entry whose magnitude exceeds
/// `threshold * max|v|` becomes real and positive. Idempotent.
pub fn phase_normalize(v: &[C64], threshold: f64) -> Result<Vec<C64>> {
    let max_mag = v.iter().map(|x| x.norm()).fold(0.0f64, f64::max);
    if max_mag == 0.0 {
        return Err(Error::ZeroVector);
    }
    let anchor = v
        .iter()
        .find(|x| x.norm() > threshold * max_mag)
        .ok_or(Error::ZeroVector)?;
    let phase = anchor.conj() / anchor.norm();
    Ok(v.iter().map(|x| x * phase).collect())
}

pub(crate) fn energy(row: &[C64]) -> f64 {
    row.iter().map(|v| v.norm_sqr()).sum()
}

/// Remove the projection onto unit vector `q` from every row.
pub(crate) fn deflate(rows: &mut [Vec<C64>], q: &[C64]) {
    for row in rows.iter_mut() {
        // <y, q> = Σ y conj(q)
        let coeff: C64 = row.iter().zip(q).map(|(y, qq)| y * qq.conj()).sum();
        for (y, qq) in row.iter_mut().zip(q) {
            *y -= coeff * qq;
        }
    }
}

/// Top eigenpair of the Gram operator `C = Σ_i y_i y_i^H` of the rows.
///
/// Deterministic: fixed start vector, sequential reductions.
pub(crate) fn dominant_eigenvector(rows: &[&[C64]]) -> Result<(Vec<C64>, f64)> {
    if rows.is_empty() {
        return Err(Error::Empty);
    }
    let dim = rows[0].len();
    let m = rows.len();
    let total: f64 = rows.iter().map(|r| energy(r)).sum();
    if total <= 0.0 || !total.is_finite() {
        return Err(Error::DegenerateData);
    }

    // When the ambient dimension is small, iterating an explicit (dim x dim)
    // covariance is far cheaper per step than touching all rows.
    let cov = if dim <= m {
        Some(covariance(rows, dim))
    } else {
        None
    };
    let apply = |v: &[C64], out: &mut Vec<C64>| {
        out.clear();
        match &cov {
            Some(c) => {
                for a in 0..dim {
                    let mut acc = C64::ZERO;
                    let row = &c[a * dim..(a + 1) * dim];
                    for (cv, vv) in row.iter().zip(v) {
                        acc += cv * vv;
                    }
                    out.push(acc);
                }
            }
            None => {
                out.resize(dim, C64::ZERO);
                for r in rows {
                    // <v, y> y
                    let coeff: C64 = v.iter().zip(*r).map(|(a, b)| a * b.conj()).sum();
                    for (o, b) in out.iter_mut().zip(*r) {
                        *o += coeff * b;
                    }
                }
            }
        }
    };

    let mut v = start_vector(dim);
    let mut w = Vec::with_capacity(dim);
    let mut rayleigh_prev = f64::NAN;
    for iter in 0..MAX_ITERATIONS {
        apply(&v, &mut w);
        // v is unit, so v^H w is the Rayleigh quotient
        let rayleigh: f64 = v.iter().zip(&w).map(|(a, b)| (a.conj() * b).re).sum();
        let wnorm = energy(&w).sqrt();
        if wnorm <= total * 1e-150 {
            // v landed in the null space; restart once from a different vector
            if iter == 0 {
                v = start_vector_alt(dim);
                continue;
            }
            return Err(Error::DegenerateData);
        }
        let inv = 1.0 / wnorm;
        for (vv, ww) in v.iter_mut().zip(&w) {
            *vv = ww * inv;
        }
        if iter > 0 && (rayleigh - rayleigh_prev).abs() <= CONVERGENCE_TOL * rayleigh.abs() {
            return Ok((v, rayleigh.max(0.0)));
        }
        rayleigh_prev = rayleigh;
    }
    dense_top_eigenpair(rows)
}

fn covariance(rows: &[&[C64]], dim: usize) -> Vec<C64> {
    let mut c = vec![C64::ZERO; dim * dim];
    for r in rows {
        for a in 0..dim {
            let ya = r[a];
            let dst = &mut c[a * dim..(a + 1) * dim];
            for (d, yb) in dst.iter_mut().zip(*r) {
                *d += ya * yb.conj();
            }
        }
    }
    c
}

fn start_vector(dim: usize) -> Vec<C64> {
    // normalized all-ones plus a fixed pseudorandom perturbation
    let mut rng = ChaCha12Rng::seed_from_u64(0x71CA_DEC0);
    let base = 1.0 / (dim as f64).sqrt();
    let mut v: Vec<C64> = (0..dim)
        .map(|_| {
            C64::new(
                base + 0.01 * (rng.random::<f64>() - 0.5),
                0.01 * (rng.random::<f64>() - 0.5),
            )
        })
        .collect();
    let inv = 1.0 / energy(&v).sqrt();
    for x in &mut v {
        *x *= inv;
    }
    v
}

fn start_vector_alt(dim: usize) -> Vec<C64> {
    let mut rng = ChaCha12Rng::seed_from_u64(0x0DD5_EED5);
    let mut v: Vec<C64> = (0..dim)
        .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let inv = 1.0 / energy(&v).sqrt();
    for x in &mut v {
        *x *= inv;
    }
    v
}

/// Dense fallback: eigendecomposition of the smaller Gram matrix.
fn dense_top_eigenpair(rows: &[&[C64]]) -> Result<(Vec<C64>, f64)> {
    let dim = rows[0].len();
    let m = rows.len();
    if dim <= m {
        let c = covariance(rows, dim);
        let mat = DMatrix::from_fn(dim, dim, |r, cidx| c[r * dim + cidx]);
        let eig = mat.symmetric_eigen();
        let (idx, lambda) = argmax(&eig.eigenvalues);
        let v: Vec<C64> = eig.eigenvectors.column(idx).iter().copied().collect();
        Ok((v, lambda))
    } else {
        // Gram G_ij = y_i^H y_j; top eigenvector w maps to q = Σ w_i y_i
        let mat = DMatrix::from_fn(m, m, |i, j| {
            rows[i]
                .iter()
                .zip(rows[j])
                .map(|(a, b)| a.conj() * b)
                .sum::<C64>()
        });
        let eig = mat.symmetric_eigen();
        let (idx, lambda) = argmax(&eig.eigenvalues);
        if lambda <= 0.0 {
            return Err(Error::DegenerateData);
        }
        let w = eig.eigenvectors.column(idx);
        let mut q = vec![C64::ZERO; dim];
        for (i, r) in rows.iter().enumerate() {
            let wi = w[i];
            for (qq, y) in q.iter_mut().zip(*r) {
                *qq += wi * y;
            }
        }
        let inv = 1.0 / energy(&q).sqrt();
        for x in &mut q {
            *x *= inv;
        }
        Ok((q, lambda))
    }
}

fn argmax(vals: &DVector<f64>) -> (usize, f64) {
    let mut best = (0usize, f64::NEG_INFINITY);
    for (i, &v) in vals.iter().enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_rows(m: usize, n: usize, seed: u64) -> Vec<Signal> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        (0..m)
            .map(|_| {
                Signal::new(
                    (0..n)
                        .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                        .collect(),
                )
                .unwrap()
            })
            .collect()
    }

    fn dense_oracle(data: &Dataset, k: usize) -> Vec<f64> {
        // independent dense eigendecomposition of the m x m Gram matrix
        let m = data.num_vectors();
        let g = DMatrix::from_fn(m, m, |i, j| {
            data.vectors()[i]
                .values()
                .iter()
                .zip(data.vectors()[j].values())
                .map(|(a, b)| a.conj() * b)
                .sum::<C64>()
        });
        let mut eigs: Vec<f64> = g.symmetric_eigen().eigenvalues.iter().copied().collect();
        eigs.sort_by(|a, b| b.partial_cmp(a).unwrap());
        eigs.truncate(k);
        eigs
    }

    #[test]
    fn center_examples() {
        // m = 1: centred vector is zero
        let d = Dataset::new(random_rows(1, 6, 1)).unwrap();
        let (_, cd) = center(&d).unwrap();
        assert!(cd.total_energy() < 1e-28);
        assert!(cd.is_centered());

        // already-zero-mean data is unchanged
        let x = random_rows(1, 6, 2).remove(0);
        let neg = Signal::new(x.values().iter().map(|v| -v).collect()).unwrap();
        let d = Dataset::new(vec![x.clone(), neg]).unwrap();
        let (centroid, cd) = center(&d).unwrap();
        assert!(centroid.norm_sq() < 1e-28);
        for (a, b) in cd.vectors()[0].values().iter().zip(x.values()) {
            assert!((a - b).norm() < 1e-15);
        }

        // random 5x8: output column means vanish
        let d = Dataset::new(random_rows(5, 8, 3)).unwrap();
        let (_, cd) = center(&d).unwrap();
        for col in 0..8 {
            let mean: C64 = cd.vectors().iter().map(|v| v.values()[col]).sum::<C64>() / 5.0;
            assert!(mean.norm() < 1e-13);
        }
    }

    #[test]
    fn first_component_rank_one() {
        // rows are scalar multiples of e_0
        let n = 5;
        let scalars = [c(2.0, 0.0), c(0.0, -1.5), c(-0.5, 0.5)];
        let rows: Vec<Signal> = scalars
            .iter()
            .map(|&s| {
                Signal::new(
                    Signal::unit(n, 0)
                        .values()
                        .iter()
                        .map(|v| v * s)
                        .collect(),
                )
                .unwrap()
            })
            .collect();
        let d = Dataset::new_centered(rows, Signal::zeros(n));
        let (q, lambda) = first_component(&d).unwrap();
        assert!((q.values()[0] - C64::ONE).norm() < 1e-10);
        let expect: f64 = scalars.iter().map(|s| s.norm_sqr()).sum();
        assert!((lambda - expect).abs() < 1e-10 * expect);
    }

    #[test]
    fn first_component_single_vector() {
        let y = random_rows(1, 7, 4).remove(0);
        let d = Dataset::new_centered(vec![y.clone()], Signal::zeros(7));
        let (q, lambda) = first_component(&d).unwrap();
        assert!((lambda - y.norm_sq()).abs() < 1e-10 * y.norm_sq());
        let scaled: Vec<C64> = y.values().iter().map(|v| v / y.norm()).collect();
        let expect = phase_normalize(&scaled, PHASE_THRESHOLD).unwrap();
        for (a, b) in q.values().iter().zip(&expect) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn first_component_matches_dense_oracle() {
        let d = Dataset::new(random_rows(8, 5, 5)).unwrap();
        let (_, cd) = center(&d).unwrap();
        let (q, lambda) = first_component(&cd).unwrap();

        // dense oracle on the 5x5 covariance
        let dim = 5;
        let mat = DMatrix::from_fn(dim, dim, |a, b| {
            cd.vectors()
                .iter()
                .map(|y| y.values()[a] * y.values()[b].conj())
                .sum::<C64>()
        });
        let eig = mat.symmetric_eigen();
        let (idx, top) = {
            let mut best = (0, f64::NEG_INFINITY);
            for (i, &v) in eig.eigenvalues.iter().enumerate() {
                if v > best.1 {
                    best = (i, v);
                }
            }
            best
        };
        assert!((lambda - top).abs() < 1e-9 * top);
        let dense_q: Vec<C64> = eig.eigenvectors.column(idx).iter().copied().collect();
        let overlap: C64 = q
            .values()
            .iter()
            .zip(&dense_q)
            .map(|(a, b)| a * b.conj())
            .sum();
        assert!(overlap.norm() > 1.0 - 1e-9);
    }

    #[test]
    fn first_component_rejects_zero_data() {
        let d = Dataset::new_centered(vec![Signal::zeros(4)], Signal::zeros(4));
        assert!(matches!(first_component(&d), Err(Error::DegenerateData)));
    }

    #[test]
    fn components_exact_rank_two() {
        let a = Signal::from_real(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        let b = Signal::from_real(&[0.0, 2.0, 0.0, 0.0]).unwrap();
        let neg = |s: &Signal| Signal::new(s.values().iter().map(|v| -v).collect()).unwrap();
        let d = Dataset::new_centered(vec![a.clone(), neg(&a), b.clone(), neg(&b)], Signal::zeros(4));
        let res = components(&d, 4).unwrap();
        assert_eq!(res.components.len(), 2, "rank-2 data stops after 2");
        let ip = res.components[0]
            .inner_product(&res.components[1])
            .unwrap();
        assert!(ip.norm() < 1e-10);
        assert!(res.eigenvalues[0] >= res.eigenvalues[1]);
    }

    #[test]
    fn components_full_rank_orthonormal_basis() {
        let d = Dataset::new(random_rows(6, 4, 6)).unwrap();
        let (_, cd) = center(&d).unwrap();
        let res = components(&cd, 4).unwrap();
        assert_eq!(res.components.len(), 4);
        for a in 0..4 {
            for b in 0..4 {
                let ip = res.components[a]
                    .inner_product(&res.components[b])
                    .unwrap();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((ip.norm() - expect).abs() < 1e-9);
            }
        }
        // every centred vector is reproduced by its expansion in the basis
        for y in cd.vectors() {
            let mut rec = vec![C64::ZERO; 4];
            for q in &res.components {
                let coeff = y.inner_product(q).unwrap();
                for (r, qq) in rec.iter_mut().zip(q.values()) {
                    *r += coeff * qq;
                }
            }
            for (r, v) in rec.iter().zip(y.values()) {
                assert!((r - v).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn components_match_dense_eigenvalues() {
        let d = Dataset::new(random_rows(10, 6, 7)).unwrap();
        let (_, cd) = center(&d).unwrap();
        let res = components(&cd, 3).unwrap();
        let oracle = dense_oracle(&cd, 3);
        for (got, want) in res.eigenvalues.iter().zip(&oracle) {
            assert!(
                (got - want).abs() < 1e-9 * want.abs().max(1.0),
                "{got} vs {want}"
            );
        }
    }

    #[test]
    fn phase_normalize_examples() {
        let v = vec![c(0.0, 1.0), c(1.0, 0.0)];
        let out = phase_normalize(&v, PHASE_THRESHOLD).unwrap();
        assert!((out[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((out[1] - c(0.0, -1.0)).norm() < 1e-15);

        // idempotence, exact when already normalized
        let again = phase_normalize(&out, PHASE_THRESHOLD).unwrap();
        assert_eq!(out, again);

        let v = vec![c(0.0, 0.0), c(-2.0, 0.0)];
        let out = phase_normalize(&v, PHASE_THRESHOLD).unwrap();
        assert!((out[1] - c(2.0, 0.0)).norm() < 1e-15);

        assert!(matches!(
            phase_normalize(&[C64::ZERO], PHASE_THRESHOLD),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn objective_maximality_against_random_vectors() {
        let d = Dataset::new(random_rows(4, 3, 8)).unwrap();
        let (_, cd) = center(&d).unwrap();
        let (q, lambda) = first_component(&cd).unwrap();
        let objective = |u: &[C64]| -> f64 {
            cd.vectors()
                .iter()
                .map(|y| {
                    y.values()
                        .iter()
                        .zip(u)
                        .map(|(a, b)| a * b.conj())
                        .sum::<C64>()
                        .norm_sqr()
                })
                .sum()
        };
        assert!((objective(q.values()) - lambda).abs() < 1e-9 * lambda);
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        for _ in 0..10_000 {
            let mut u: Vec<C64> = (0..3)
                .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            let inv = 1.0 / energy(&u).sqrt();
            for x in &mut u {
                *x *= inv;
            }
            assert!(objective(&u) <= lambda * (1.0 + 1e-12));
        }
    }

    #[test]
    fn phase_invariance_of_objective() {
        let d = Dataset::new(random_rows(5, 4, 10)).unwrap();
        let (_, cd) = center(&d).unwrap();
        let rows: Vec<&[C64]> = cd.vectors().iter().map(Signal::values).collect();
        let (q_raw, lambda) = dominant_eigenvector(&rows).unwrap();
        let q_norm = phase_normalize(&q_raw, PHASE_THRESHOLD).unwrap();
        let objective = |u: &[C64]| -> f64 {
            rows.iter()
                .map(|y| {
                    y.iter()
                        .zip(u)
                        .map(|(a, b)| a * b.conj())
                        .sum::<C64>()
                        .norm_sqr()
                })
                .sum()
        };
        let before = objective(&q_raw);
        let after = objective(&q_norm);
        assert!((before - after).abs() <= 1e-12 * lambda);
    }

    #[test]
    fn energy_accounting() {
        let d = Dataset::new(random_rows(7, 5, 11)).unwrap();
        let (_, cd) = center(&d).unwrap();
        let total = cd.total_energy();
        let res = components(&cd, 3).unwrap();
        // subtract recovered projections and measure the residual
        let mut rows: Vec<Vec<C64>> = cd.vectors().iter().map(|v| v.values().to_vec()).collect();
        for q in &res.components {
            deflate(&mut rows, q.values());
        }
        let residual: f64 = rows.iter().map(|r| energy(r)).sum();
        let sum: f64 = res.eigenvalues.iter().sum();
        assert!((sum + residual - total).abs() < 1e-9 * total);
    }
}
