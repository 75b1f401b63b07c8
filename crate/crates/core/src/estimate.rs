//! Symbol-period estimation: a coarse guess from the occupied bandwidth of
//! the average spectrum, refined by sweeping candidate rates and comparing
//! the first-to-second eigenvalue ratio of each QPCA run.

use num_complex::Complex64 as C64;

use crate::error::{invalid, Error, Result};
use crate::qpca::{extend_truncate, qpca, QpcaConfig};
use crate::signal::Dataset;

/// One row of the rate sweep.
#[derive(Clone, Copy, Debug)]
pub struct PeriodSweepRow {
    /// Candidate rate.
    pub s: usize,
    /// Energy fraction of the first component family.
    pub lambda1: f64,
    /// Energy fraction of the second component family (0 when s = 1).
    pub lambda2: f64,
    /// `lambda1 / lambda2`, `+inf` when `lambda2` vanishes.
    pub ratio: f64,
    /// Truncated frame length used for this candidate.
    pub n_used: usize,
}

/// Eigenvalue-ratio sweep over candidate rates `s_min ..= s_max`.
///
/// For each candidate the frames are truncated to a multiple of `s`, QPCA
/// extracts two components, and the row records `λ₁/λ₂`. Returns the table
/// and the winning rate `s*` (largest ratio; finite ties go to the smallest
/// `s`). When several rows report `+inf` — which happens for every divisor
/// of the true rate on noiseless single-family data — the largest such `s`
/// wins, since its family is the smallest one explaining all the energy.
pub fn sweep_period(
    data: &Dataset,
    s_min: usize,
    s_max: usize,
    config: &QpcaConfig,
) -> Result<(Vec<PeriodSweepRow>, usize)> {
    if s_min < 1 || s_min > s_max || s_max > data.signal_len() {
        return Err(invalid("sweep range must satisfy 1 <= s_min <= s_max <= frame length"));
    }
    let mut rows = Vec::with_capacity(s_max - s_min + 1);
    for s in s_min..=s_max {
        let cfg = QpcaConfig {
            oversampling: s,
            num_components: 2,
            ..*config
        };
        let res = qpca(data, &cfg)?;
        let lambda1 = res.lambdas[0];
        let lambda2 = if res.lambdas.len() > 1 {
            res.lambdas[1]
        } else {
            0.0
        };
        let ratio = if lambda2 < 1e-12 {
            f64::INFINITY
        } else {
            lambda1 / lambda2
        };
        rows.push(PeriodSweepRow {
            s,
            lambda1,
            lambda2,
            ratio,
            n_used: res.n,
        });
    }
    let best = if let Some(row) = rows.iter().rev().find(|r| r.ratio.is_infinite()) {
        row
    } else {
        // strict > keeps the smallest s on finite ties
        let mut best = &rows[0];
        for row in &rows[1..] {
            if row.ratio > best.ratio {
                best = row;
            }
        }
        best
    };
    Ok((rows.clone(), best.s))
}

/// Coarse rate estimate from the occupied bandwidth of the dataset's average
/// energy spectrum.
///
/// Finds the smallest window, symmetric around the spectrum's circular
/// centroid, holding `energy_threshold` of the total energy. With the
/// occupied band a fraction `B` of the full band, the rate is roughly `1/B`.
/// Returns `(s_estimate, B)`.
pub fn bandwidth_period_estimate(
    data: &Dataset,
    energy_threshold: f64,
) -> Result<(f64, f64)> {
    if !(energy_threshold > 0.0 && energy_threshold < 1.0) {
        return Err(invalid("energy threshold must lie in (0, 1)"));
    }
    let n = data.signal_len();
    let mut mean = vec![0.0f64; n];
    for v in data.vectors() {
        for (acc, p) in mean.iter_mut().zip(v.energy_spectrum()) {
            *acc += p;
        }
    }
    let total: f64 = mean.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateData);
    }

    // circular centroid of the energy distribution over the frequency ring
    let z: C64 = mean
        .iter()
        .enumerate()
        .map(|(k, &p)| C64::from_polar(p, std::f64::consts::TAU * k as f64 / n as f64))
        .sum();
    let center = if z.norm() > 0.0 {
        let frac = z.arg().rem_euclid(std::f64::consts::TAU) / std::f64::consts::TAU;
        (frac * n as f64).round() as usize % n
    } else {
        0
    };

    // grow the symmetric window until it holds the requested energy
    let mut captured = mean[center];
    let mut radius = 0usize;
    while captured < energy_threshold * total && 2 * radius < n {
        radius += 1;
        let lo = (center + n - radius) % n;
        let hi = (center + radius) % n;
        captured += mean[lo];
        if hi != lo {
            captured += mean[hi];
        }
    }
    let width = (2 * radius + 1).min(n);
    let band_fraction = width as f64 / n as f64;
    Ok((1.0 / band_fraction, band_fraction))
}

/// `n_used` helper mirroring the truncation the sweep performs.
pub fn truncated_len(data: &Dataset, s: usize) -> Result<usize> {
    Ok(extend_truncate(data, s)?.signal_len())
}
