//! Quasicyclic PCA: recovers families of shift-orthonormal principal pulses
//! by solving independent PCA problems on the frequency cosets `t + <N>`.
//!
//! Pipeline: truncate the frames to a multiple of the oversampling rate,
//! centre, transform, solve one small PCA per coset, reassemble the coset
//! eigenvectors (each scaled to energy `1/N`) into a spectrum, and transform
//! back. The coset scaling makes every output pulse shift-orthonormal by
//! construction, and the per-coset eigenproblems are independent, so they
//! may run in parallel without affecting the result.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::pca;
use crate::signal::{coset_energy_deviation, shift_phase_ramp, Dataset, Signal, Spectrum};

/// Maximum coset-energy deviation tolerated when a pulse is used to project.
pub const PROJECTION_TOL: f64 = 1e-6;

/// How the per-coset phase freedom of the solution is resolved.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PhasePolicy {
    /// First significant entry of each coset eigenvector made real positive.
    #[default]
    LeadingReal,
    /// Per-coset phase chosen to minimize the imaginary energy of that
    /// coset's time-domain contribution.
    ZeroPhase,
}

#[derive(Clone, Copy, Debug)]
pub struct QpcaConfig {
    /// Oversampling rate `s` (samples per symbol).
    pub oversampling: usize,
    /// Number of component families to extract.
    pub num_components: usize,
    pub phase_policy: PhasePolicy,
    /// Tolerance used for shift-orthonormality validation of outputs.
    pub tol: f64,
}

impl QpcaConfig {
    pub fn new(oversampling: usize) -> Self {
        Self {
            oversampling,
            num_components: 1,
            phase_policy: PhasePolicy::LeadingReal,
            tol: 1e-9,
        }
    }

    pub fn with_components(mut self, k: usize) -> Self {
        self.num_components = k;
        self
    }

    pub fn with_phase_policy(mut self, policy: PhasePolicy) -> Self {
        self.phase_policy = policy;
        self
    }
}

#[derive(Clone, Debug)]
pub struct QpcaResult {
    /// Recovered pulses `q^(1..k)`, each of length `n = N s` and
    /// shift-orthonormal by construction.
    pub components: Vec<Signal>,
    /// Fraction of total centred energy captured by each component's shift
    /// family, non-increasing.
    pub lambdas: Vec<f64>,
    /// Per-coset PCA eigenvalues of the augmented problem, `[component][coset]`.
    pub coset_eigenvalues: Vec<Vec<f64>>,
    /// Number of symbols `N`.
    pub n_cosets: usize,
    /// Oversampling rate `s`.
    pub oversampling: usize,
    /// Frame length `n = N s`.
    pub n: usize,
    pub centroid: Signal,
}

/// Truncate (or zero-pad) every vector to `n = floor(ñ/s) * s`.
pub fn extend_truncate(data: &Dataset, s: usize) -> Result<Dataset> {
    if s == 0 {
        return Err(invalid("oversampling rate must be at least 1"));
    }
    let len = data.signal_len();
    if len < s {
        return Err(Error::FrameTooShort { len, s });
    }
    let n = (len / s) * s;
    if n == len {
        return Ok(data.clone());
    }
    let resize = |v: &Signal| -> Signal {
        let mut vals = v.values().to_vec();
        vals.resize(n, C64::ZERO);
        Signal::new(vals).expect("n >= s >= 1")
    };
    let vectors: Vec<Signal> = data.vectors().iter().map(resize).collect();
    // truncation and zero-padding both act column-wise, so zero means survive
    if data.is_centered() {
        let centroid = data.centroid().map(resize).unwrap_or_else(|| Signal::zeros(n));
        Ok(Dataset::new_centered(vectors, centroid))
    } else {
        Dataset::new(vectors)
    }
}

/// Augmented data `ẑ_{i,j}(k) = ŷ_i(k) e^{-2πi jk/N}`, ordered `ẑ[i + mj]`.
///
/// In the time domain `ẑ_{i,j}` is `y_i` circularly shifted by `j s` samples.
pub fn augment(spectra: &[Spectrum], n_cosets: usize) -> Result<Vec<Spectrum>> {
    if spectra.is_empty() {
        return Err(Error::Empty);
    }
    let n = spectra[0].len();
    if n_cosets == 0 || n % n_cosets != 0 {
        return Err(Error::NotDivisible {
            n,
            divisor: n_cosets,
        });
    }
    let s = n / n_cosets;
    let mut out = Vec::with_capacity(spectra.len() * n_cosets);
    for j in 0..n_cosets {
        let ramp = shift_phase_ramp(n, n_cosets, j);
        for sp in spectra {
            if sp.len() != n {
                return Err(Error::LengthMismatch {
                    left: n,
                    right: sp.len(),
                });
            }
            let vals: Vec<C64> = sp.values().iter().zip(&ramp).map(|(a, b)| a * b).collect();
            out.push(Spectrum::new(vals)?.with_factorization(n_cosets, s)?);
        }
    }
    Ok(out)
}

/// Solve the PCA problem on coset `t + <N>` of the augmented spectra.
///
/// Returns the phase-normalized top eigenvector scaled by `1/sqrt(N)`
/// (so its squared norm is `1/N`) and the attained PCA eigenvalue.
pub fn solve_coset(
    augmented: &[Spectrum],
    t: usize,
    n_cosets: usize,
) -> Result<(Vec<C64>, f64)> {
    let rows: Vec<Vec<C64>> = augmented
        .iter()
        .map(|sp| sp.coset_extract(t, n_cosets))
        .collect::<Result<_>>()?;
    let refs: Vec<&[C64]> = rows.iter().map(Vec::as_slice).collect();
    let (q, lambda) = pca::dominant_eigenvector(&refs)?;
    let q = pca::phase_normalize(&q, pca::PHASE_THRESHOLD)?;
    let scale = 1.0 / (n_cosets as f64).sqrt();
    Ok((q.iter().map(|v| v * scale).collect(), lambda))
}

/// One coset's solution stack: `k` unit-norm eigenvectors plus eigenvalues
/// on the augmented-problem scale.
fn solve_coset_stack(
    spectra: &[Spectrum],
    t: usize,
    n_cosets: usize,
    k: usize,
) -> Result<Vec<(Vec<C64>, f64)>> {
    // On coset t the augmentation phase e^{-2πi jt/N} is constant, so the
    // augmented Gram operator is exactly N times the plain one: solve with
    // the m original coset vectors and rescale the eigenvalues.
    let mut rows: Vec<Vec<C64>> = spectra
        .iter()
        .map(|sp| sp.coset_extract(t, n_cosets))
        .collect::<Result<_>>()?;
    let s = rows[0].len();
    let original: f64 = rows.iter().map(|r| pca::energy(r)).sum();
    let mut stack: Vec<(Vec<C64>, f64)> = Vec::with_capacity(k);
    for _ in 0..k.min(s) {
        let residual: f64 = rows.iter().map(|r| pca::energy(r)).sum();
        if original <= 0.0 || residual < pca::RESIDUAL_ENERGY_TOL * original {
            // data rank exhausted: complete with a deterministic unit vector
            // orthogonal to everything found so far (eigenvalue zero), so the
            // assembled pulse still carries energy 1/N on this coset
            let q = orthonormal_completion(s, &stack)?;
            stack.push((q, 0.0));
            continue;
        }
        let refs: Vec<&[C64]> = rows.iter().map(Vec::as_slice).collect();
        let (q, lambda) = pca::dominant_eigenvector(&refs)?;
        let q = pca::phase_normalize(&q, pca::PHASE_THRESHOLD)?;
        pca::deflate(&mut rows, &q);
        stack.push((q, lambda * n_cosets as f64));
    }
    Ok(stack)
}

fn orthonormal_completion(s: usize, found: &[(Vec<C64>, f64)]) -> Result<Vec<C64>> {
    for basis in 0..s {
        let mut v = vec![C64::ZERO; s];
        v[basis] = C64::ONE;
        for (q, _) in found {
            let coeff: C64 = v.iter().zip(q).map(|(a, b)| a * b.conj()).sum();
            for (vv, qq) in v.iter_mut().zip(q) {
                *vv -= coeff * qq;
            }
        }
        let norm = pca::energy(&v).sqrt();
        if norm > 0.5 {
            let inv = 1.0 / norm;
            return Ok(v.iter().map(|x| x * inv).collect());
        }
    }
    Err(Error::DegenerateData)
}

/// Run QPCA on `data` (any common length `ñ >= s`).
pub fn qpca(data: &Dataset, config: &QpcaConfig) -> Result<QpcaResult> {
    let s = config.oversampling;
    if config.num_components < 1 {
        return Err(invalid("component count must be at least 1"));
    }
    let truncated = extend_truncate(data, s)?;
    let (centroid, centered) = pca::center(&truncated)?;
    let n = centered.signal_len();
    let n_cosets = n / s;
    let k = config.num_components.min(s);

    let spectra: Vec<Spectrum> = centered
        .vectors()
        .iter()
        .map(|v| {
            v.dft()
                .with_factorization(n_cosets, s)
                .expect("n = N s by construction")
        })
        .collect();

    let coset_stacks: Vec<Vec<(Vec<C64>, f64)>> = (0..n_cosets)
        .into_par_iter()
        .map(|t| solve_coset_stack(&spectra, t, n_cosets, k))
        .collect::<Result<_>>()?;

    let scale = 1.0 / (n_cosets as f64).sqrt();
    let mut components = Vec::with_capacity(k);
    let mut lambdas = Vec::with_capacity(k);
    let mut coset_eigenvalues = Vec::with_capacity(k);
    for j in 0..k {
        let mut qhat = vec![C64::ZERO; n];
        let mut eigs = Vec::with_capacity(n_cosets);
        for (t, stack) in coset_stacks.iter().enumerate() {
            let (v, lambda) = &stack[j];
            let v = match config.phase_policy {
                PhasePolicy::LeadingReal => v.clone(), // applied during the solve
                PhasePolicy::ZeroPhase => zero_phase(v, t, n_cosets, n)?,
            };
            for (l, val) in v.iter().enumerate() {
                qhat[t + l * n_cosets] = val * scale;
            }
            eigs.push(*lambda);
        }
        let spectrum = Spectrum::new(qhat)?.with_factorization(n_cosets, s)?;
        let component = spectrum.idft();
        let lambda = energy_fraction(&centered, &component, s)?;
        components.push(component);
        lambdas.push(lambda);
        coset_eigenvalues.push(eigs);
    }

    Ok(QpcaResult {
        components,
        lambdas,
        coset_eigenvalues,
        n_cosets,
        oversampling: s,
        n,
        centroid,
    })
}

/// Rotate a coset eigenvector so its time-domain contribution has minimal
/// imaginary energy. For `u = e^{iφ} u0`, the imaginary energy is
/// `(||u0||² - Re(e^{2iφ} Σ u0(k)²)) / 2`, minimized at `φ = -arg(Σ u0²)/2`.
fn zero_phase(v: &[C64], t: usize, n_cosets: usize, n: usize) -> Result<Vec<C64>> {
    let embedded = Spectrum::coset_embed(v, t, n_cosets, n)?;
    let u = embedded.idft();
    let a: C64 = u.values().iter().map(|x| x * x).sum();
    let mut phi = if a.norm() > 0.0 { -a.arg() / 2.0 } else { 0.0 };
    // φ and φ+π both minimize; pick the one whose dominant time-domain entry
    // has a non-negative real part
    let rot = C64::from_polar(1.0, phi);
    let anchor = u
        .values()
        .iter()
        .max_by(|x, y| x.norm().partial_cmp(&y.norm()).unwrap())
        .copied()
        .unwrap_or(C64::ZERO);
    if (anchor * rot).re < 0.0 {
        phi += std::f64::consts::PI;
    }
    let rot = C64::from_polar(1.0, phi);
    Ok(v.iter().map(|x| x * rot).collect())
}

/// Inner products of `y` with all `N` shifts `q ⊛ e_{js}`, via one FFT
/// cross-correlation. `coeffs[j] = <y, q ⊛ e_{js}>`.
pub(crate) fn family_coefficients(
    yhat: &Spectrum,
    qhat: &Spectrum,
    s: usize,
) -> Vec<C64> {
    let n = yhat.len();
    let prod: Vec<C64> = yhat
        .values()
        .iter()
        .zip(qhat.values())
        .map(|(a, b)| a * b.conj())
        .collect();
    let corr = Spectrum::new(prod).expect("nonempty").idft();
    let root_n = (n as f64).sqrt();
    corr.values()
        .iter()
        .step_by(s)
        .map(|v| v * root_n)
        .collect()
}

/// Orthogonal projection of `y` onto `span^s(q)`, the space spanned by the
/// shifts of `q` by multiples of `s`.
pub fn project_family(y: &Signal, q: &Signal, s: usize) -> Result<Signal> {
    let n = y.len();
    if q.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: q.len(),
        });
    }
    if s == 0 || n % s != 0 {
        return Err(Error::NotDivisible { n, divisor: s });
    }
    let n_cosets = n / s;
    let qhat = q.dft();
    let deviation = coset_energy_deviation(&qhat, n_cosets);
    if deviation > PROJECTION_TOL {
        return Err(Error::NotShiftOrthonormal { deviation });
    }
    let coeffs = family_coefficients(&y.dft(), &qhat, s);
    let mut out = vec![C64::ZERO; n];
    for (j, coeff) in coeffs.iter().enumerate() {
        let shifted = q.circular_shift((j * s) as i64);
        for (o, v) in out.iter_mut().zip(shifted.values()) {
            *o += coeff * v;
        }
    }
    Signal::new(out)
}

/// Fraction of the total centred energy captured by the shift family of `q`:
/// `λ = Σ_i ||proj(y_i)||² / Σ_i ||y_i||²`.
pub fn energy_fraction(data: &Dataset, q: &Signal, s: usize) -> Result<f64> {
    if !data.is_centered() {
        return Err(Error::NotCentered);
    }
    let n = data.signal_len();
    if q.len() != n {
        return Err(Error::LengthMismatch {
            left: n,
            right: q.len(),
        });
    }
    if s == 0 || n % s != 0 {
        return Err(Error::NotDivisible { n, divisor: s });
    }
    let n_cosets = n / s;
    let total = data.total_energy();
    if total <= 0.0 {
        return Err(Error::DegenerateData);
    }
    let qhat = q.dft();
    let deviation = coset_energy_deviation(&qhat, n_cosets);
    if deviation > PROJECTION_TOL {
        return Err(Error::NotShiftOrthonormal { deviation });
    }
    // Pythagoras over the orthonormal shift family: the projection energy is
    // the sum of squared family coefficients
    let captured: f64 = data
        .vectors()
        .iter()
        .map(|y| {
            family_coefficients(&y.dft(), &qhat, s)
                .iter()
                .map(|c| c.norm_sqr())
                .sum::<f64>()
        })
        .sum();
    Ok(captured / total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pca;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_signal(n: usize, rng: &mut ChaCha12Rng) -> Signal {
        Signal::new(
            (0..n)
                .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect(),
        )
        .unwrap()
    }

    fn random_dataset(m: usize, n: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        Dataset::new((0..m).map(|_| random_signal(n, &mut rng)).collect()).unwrap()
    }

    /// Σ_i Σ_j |<y_i, q ⊛ e_{js}>|², by direct time-domain inner products.
    fn time_domain_objective(data: &Dataset, q: &Signal, s: usize) -> f64 {
        let n_shifts = data.signal_len() / s;
        data.vectors()
            .iter()
            .map(|y| {
                (0..n_shifts)
                    .map(|j| {
                        y.inner_product(&q.circular_shift((j * s) as i64))
                            .unwrap()
                            .norm_sqr()
                    })
                    .sum::<f64>()
            })
            .sum()
    }

    #[test]
    fn extend_truncate_examples() {
        let d = random_dataset(3, 100, 1);
        let out = extend_truncate(&d, 9).unwrap();
        assert_eq!(out.signal_len(), 99);
        assert_eq!(
            out.vectors()[0].values(),
            &d.vectors()[0].values()[..99]
        );

        let d = random_dataset(3, 96, 2);
        let out = extend_truncate(&d, 8).unwrap();
        assert_eq!(out.signal_len(), 96);

        let d = random_dataset(2, 850, 3);
        let out = extend_truncate(&d, 9).unwrap();
        assert_eq!(out.signal_len(), 846); // N = 94

        assert!(extend_truncate(&random_dataset(1, 5, 4), 6).is_err());
    }

    #[test]
    fn augment_examples() {
        let d = random_dataset(2, 12, 5);
        let spectra: Vec<Spectrum> = d.vectors().iter().map(Signal::dft).collect();
        let n_cosets = 4; // s = 3
        let aug = augment(&spectra, n_cosets).unwrap();
        assert_eq!(aug.len(), 2 * n_cosets);

        // j = 0 block equals the input
        for i in 0..2 {
            assert_eq!(aug[i].values(), spectra[i].values());
        }

        // N = 1 output equals input
        let aug1 = augment(&spectra, 1).unwrap();
        assert_eq!(aug1.len(), 2);
        for (a, b) in aug1.iter().zip(&spectra) {
            assert_eq!(a.values(), b.values());
        }

        // time-domain check: idft(ẑ_{i,j}) is y_i shifted by j*s
        for j in 0..n_cosets {
            for i in 0..2 {
                let z = aug[i + 2 * j].idft();
                let shifted = d.vectors()[i].circular_shift((j * 3) as i64);
                for (a, b) in z.values().iter().zip(shifted.values()) {
                    assert!((a - b).norm() < 1e-12);
                }
            }
        }

        assert!(augment(&spectra, 5).is_err());
    }

    #[test]
    fn solve_coset_examples() {
        let d = random_dataset(4, 6, 6);
        let (_, cd) = pca::center(&d).unwrap();
        let n_cosets = 3; // s = 2
        let spectra: Vec<Spectrum> = cd.vectors().iter().map(Signal::dft).collect();
        let aug = augment(&spectra, n_cosets).unwrap();

        for t in 0..n_cosets {
            let (v, lambda) = solve_coset(&aug, t, n_cosets).unwrap();
            // output norm² = 1/N
            let e: f64 = v.iter().map(|x| x.norm_sqr()).sum();
            assert!((e - 1.0 / n_cosets as f64).abs() < 1e-12);

            // dense eigendecomposition oracle on the coset Gram matrix
            let rows: Vec<Vec<C64>> = aug
                .iter()
                .map(|sp| sp.coset_extract(t, n_cosets).unwrap())
                .collect();
            let s = rows[0].len();
            let cov = DMatrix::from_fn(s, s, |a, b| {
                rows.iter().map(|r| r[a] * r[b].conj()).sum::<C64>()
            });
            let top = cov
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .fold(f64::NEG_INFINITY, |acc, &x| acc.max(x));
            assert!((lambda - top).abs() < 1e-9 * top, "{lambda} vs {top}");
        }
        assert!(solve_coset(&aug, 3, n_cosets).is_err());

        // N = 1, t = 0 reduces to plain PCA with unit-norm output
        let aug1 = augment(&spectra, 1).unwrap();
        let (v, _) = solve_coset(&aug1, 0, 1).unwrap();
        let e: f64 = v.iter().map(|x| x.norm_sqr()).sum();
        assert!((e - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qpca_reduces_to_pca_when_n_equals_s() {
        let d = random_dataset(5, 8, 7);
        let res = qpca(&d, &QpcaConfig::new(8)).unwrap();
        assert_eq!(res.n_cosets, 1);
        let (_, cd) = pca::center(&d).unwrap();
        let (q_pca, _) = pca::first_component(&cd).unwrap();
        let overlap = res.components[0].inner_product(&q_pca).unwrap();
        assert!(overlap.norm() > 1.0 - 1e-9);
    }

    #[test]
    fn qpca_objective_consistency() {
        // Σ coset eigenvalues (augmented scale) equals N times the direct
        // time-domain objective of the assembled pulse
        let d = random_dataset(4, 12, 8);
        let config = QpcaConfig::new(3);
        let res = qpca(&d, &config).unwrap();
        let truncated = extend_truncate(&d, 3).unwrap();
        let (_, cd) = pca::center(&truncated).unwrap();
        let direct = time_domain_objective(&cd, &res.components[0], 3);
        let from_cosets: f64 =
            res.coset_eigenvalues[0].iter().sum::<f64>() / res.n_cosets as f64;
        assert!(
            (direct - from_cosets).abs() < 1e-8 * direct.max(1.0),
            "{direct} vs {from_cosets}"
        );
    }

    #[test]
    fn qpca_components_are_shift_orthonormal_families() {
        let d = random_dataset(6, 24, 9);
        let config = QpcaConfig::new(4).with_components(3);
        let res = qpca(&d, &config).unwrap();
        assert_eq!(res.components.len(), 3);
        let s = 4;
        let n_shifts = res.n_cosets;
        for q in &res.components {
            let rep = crate::signal::is_shift_orthonormal(q, s, 1e-9).unwrap();
            assert!(rep.orthonormal, "deviation {}", rep.max_deviation);
        }
        // the full family Gram matrix is the identity
        let mut family = Vec::new();
        for q in &res.components {
            for j in 0..n_shifts {
                family.push(q.circular_shift((j * s) as i64));
            }
        }
        for (a, fa) in family.iter().enumerate() {
            for (b, fb) in family.iter().enumerate() {
                let ip = fa.inner_product(fb).unwrap().norm();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((ip - expect).abs() < 1e-8, "({a},{b}): {ip}");
            }
        }
        // lambdas non-increasing and summing below 1
        for w in res.lambdas.windows(2) {
            assert!(w[0] >= w[1] - 1e-12);
        }
        assert!(res.lambdas.iter().sum::<f64>() <= 1.0 + 1e-9);
    }

    #[test]
    fn qpca_phase_ambiguity_leaves_lambda_unchanged() {
        let d = random_dataset(5, 20, 10);
        let config = QpcaConfig::new(5);
        let res = qpca(&d, &config).unwrap();
        let truncated = extend_truncate(&d, 5).unwrap();
        let (_, cd) = pca::center(&truncated).unwrap();
        let lambda = energy_fraction(&cd, &res.components[0], 5).unwrap();
        assert!((lambda - res.lambdas[0]).abs() < 1e-12);

        // rotate every coset by a random phase and re-measure
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let qhat = res.components[0].dft();
        let n_cosets = res.n_cosets;
        let mut rotated = vec![C64::ZERO; res.n];
        for t in 0..n_cosets {
            let phase = C64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU);
            let coset = qhat.coset_extract(t, n_cosets).unwrap();
            for (l, v) in coset.iter().enumerate() {
                rotated[t + l * n_cosets] = v * phase;
            }
        }
        let q_rot = Spectrum::new(rotated).unwrap().idft();
        let lambda_rot = energy_fraction(&cd, &q_rot, 5).unwrap();
        assert!((lambda - lambda_rot).abs() < 1e-10);
    }

    #[test]
    fn zero_phase_policy_minimizes_imaginary_energy() {
        let d = random_dataset(5, 12, 12);
        let lr = qpca(&d, &QpcaConfig::new(3)).unwrap();
        let zp = qpca(
            &d,
            &QpcaConfig::new(3).with_phase_policy(PhasePolicy::ZeroPhase),
        )
        .unwrap();
        let imag_energy = |q: &Signal| -> f64 { q.values().iter().map(|v| v.im * v.im).sum() };
        assert!(imag_energy(&zp.components[0]) <= imag_energy(&lr.components[0]) + 1e-12);
        assert!((zp.lambdas[0] - lr.lambdas[0]).abs() < 1e-10);
    }

    #[test]
    fn project_family_examples() {
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        let q = crate::synth::random_shift_orthonormal_pulse(4, 3, &mut rng);
        let s = 3;

        // projecting a family element returns it
        let p = project_family(&q, &q, s).unwrap();
        for (a, b) in p.values().iter().zip(q.values()) {
            assert!((a - b).norm() < 1e-10);
        }

        // a vector orthogonal to all shifts projects to zero
        let y = random_signal(12, &mut rng);
        let mut resid = y.values().to_vec();
        for j in 0..4 {
            let shifted = q.circular_shift((j * s) as i64);
            let coeff: C64 = resid
                .iter()
                .zip(shifted.values())
                .map(|(a, b)| a * b.conj())
                .sum();
            for (r, v) in resid.iter_mut().zip(shifted.values()) {
                *r -= coeff * v;
            }
        }
        let resid = Signal::new(resid).unwrap();
        let p = project_family(&resid, &q, s).unwrap();
        assert!(p.norm() < 1e-9 * (resid.norm() + 1.0));

        // Pythagoras over the shift family
        let y = random_signal(12, &mut rng);
        let p = project_family(&y, &q, s).unwrap();
        let coeffs: f64 = (0..4)
            .map(|j| {
                y.inner_product(&q.circular_shift((j * s) as i64))
                    .unwrap()
                    .norm_sqr()
            })
            .sum();
        assert!((p.norm_sq() - coeffs).abs() < 1e-9 * coeffs.max(1.0));

        // a non-orthonormal pulse is rejected
        let bad = random_signal(12, &mut rng);
        assert!(matches!(
            project_family(&y, &bad, s),
            Err(Error::NotShiftOrthonormal { .. })
        ));
    }

    #[test]
    fn energy_fraction_examples() {
        let mut rng = ChaCha12Rng::seed_from_u64(14);
        let q = crate::synth::random_shift_orthonormal_pulse(4, 3, &mut rng);
        let s = 3;
        let n = 12;

        // data entirely inside the family: λ = 1
        let rows: Vec<Signal> = (0..5)
            .map(|_| {
                let mut v = vec![C64::ZERO; n];
                for j in 0..4usize {
                    let coeff = c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
                    for (vv, sv) in v
                        .iter_mut()
                        .zip(q.circular_shift((j * s) as i64).values())
                    {
                        *vv += coeff * sv;
                    }
                }
                Signal::new(v).unwrap()
            })
            .collect();
        let d = Dataset::new_centered(rows, Signal::zeros(n));
        let lambda = energy_fraction(&d, &q, s).unwrap();
        assert!((lambda - 1.0).abs() < 1e-9);

        // data orthogonal to the family: λ = 0
        let rows: Vec<Signal> = (0..3)
            .map(|_| {
                let y = random_signal(n, &mut rng);
                let p = project_family(&y, &q, s).unwrap();
                Signal::new(
                    y.values()
                        .iter()
                        .zip(p.values())
                        .map(|(a, b)| a - b)
                        .collect(),
                )
                .unwrap()
            })
            .collect();
        let d = Dataset::new_centered(rows, Signal::zeros(n));
        let lambda = energy_fraction(&d, &q, s).unwrap();
        assert!(lambda < 1e-9);
    }

    #[test]
    fn qpca_sequential_equals_parallel() {
        let d = random_dataset(6, 36, 15);
        let config = QpcaConfig::new(6).with_components(2);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let seq = pool.install(|| qpca(&d, &config)).unwrap();
        let pool4 = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let par = pool4.install(|| qpca(&d, &config)).unwrap();
        for (a, b) in seq.components.iter().zip(&par.components) {
            assert_eq!(a.values(), b.values(), "bit-identical across schedules");
        }
        assert_eq!(seq.lambdas, par.lambdas);
    }
}
