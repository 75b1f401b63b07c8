//! Complex signals with cyclic index semantics, the unitary DFT,
//! autocorrelation / energy spectrum, and the shift-orthonormality tests.
//!
//! A [`Signal`] is a finite complex sequence indexed modulo its length.
//! Its DFT is a [`Spectrum`], which can optionally carry the factorization
//! `n = N * s` used to address the frequency cosets `t + <N>`.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub type C64 = Complex64;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// An immutable complex signal of length `n >= 1`, indexed modulo `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    values: Vec<C64>,
}

impl Signal {
    pub fn new(values: Vec<C64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty);
        }
        Ok(Self { values })
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1);
        Self {
            values: vec![C64::ZERO; n],
        }
    }

    /// The Kronecker delta of length `n`.
    pub fn delta(n: usize) -> Self {
        let mut s = Self::zeros(n);
        s.values[0] = C64::ONE;
        s
    }

    /// The standard basis vector `e_j` (index taken modulo `n`).
    pub fn unit(n: usize, j: i64) -> Self {
        let mut s = Self::zeros(n);
        let idx = j.rem_euclid(n as i64) as usize;
        s.values[idx] = C64::ONE;
        s
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&r| C64::new(r, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// Element at `i mod n`; negative indices allowed.
    pub fn at(&self, i: i64) -> C64 {
        let n = self.values.len() as i64;
        self.values[i.rem_euclid(n) as usize]
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Circular shift by `j`: `result(i) = x(i - j)`. Equals `x ⊛ e_j`.
    pub fn circular_shift(&self, j: i64) -> Signal {
        let n = self.values.len();
        let shift = j.rem_euclid(n as i64) as usize;
        let mut out = Vec::with_capacity(n);
        out.extend_from_slice(&self.values[n - shift..]);
        out.extend_from_slice(&self.values[..n - shift]);
        Signal { values: out }
    }

    /// `Σ_i x(i) conj(y(i))`.
    pub fn inner_product(&self, other: &Signal) -> Result<C64> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(inner(&self.values, &other.values))
    }

    /// Autocorrelation `R_x(j) = Σ_i x(i) conj(x(i - j))`.
    ///
    /// Computed by the direct double sum; the FFT route is deliberately not
    /// used here so that `S_x = |x̂|²` remains an independent identity.
    pub fn autocorrelation(&self) -> Signal {
        let n = self.values.len();
        let x = &self.values;
        let mut r = vec![C64::ZERO; n];
        for (j, rj) in r.iter_mut().enumerate() {
            let mut acc = C64::ZERO;
            // i - j mod n, split to avoid per-element rem
            for i in j..n {
                acc += x[i] * x[i - j].conj();
            }
            for i in 0..j {
                acc += x[i] * x[n + i - j].conj();
            }
            *rj = acc;
        }
        Signal { values: r }
    }

    /// Unitary DFT: `x̂(k) = n^{-1/2} Σ_i x(i) ω_n^{-ik}`.
    pub fn dft(&self) -> Spectrum {
        let n = self.values.len();
        let mut buf = self.values.clone();
        plan(n, false).process(&mut buf);
        let scale = 1.0 / (n as f64).sqrt();
        for v in &mut buf {
            *v *= scale;
        }
        Spectrum {
            values: buf,
            factorization: None,
        }
    }

    /// Energy spectrum `S_x = n^{-1/2} F{R_x}`, returned as real values.
    ///
    /// The imaginary residue is asserted below 1e-10 and discarded.
    pub fn energy_spectrum(&self) -> Vec<f64> {
        let r = self.autocorrelation();
        let scale = 1.0 / (self.len() as f64).sqrt();
        let rhat = r.dft();
        rhat.values
            .iter()
            .map(|v| {
                let s = v * scale;
                assert!(
                    s.im.abs() < 1e-10 * (1.0 + self.norm_sq()),
                    "energy spectrum has non-negligible imaginary residue: {}",
                    s.im
                );
                s.re
            })
            .collect()
    }
}

fn inner(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

/// A DFT-domain sequence, optionally carrying the factorization `n = N * s`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    values: Vec<C64>,
    factorization: Option<(usize, usize)>, // (N, s)
}

impl Spectrum {
    pub fn new(values: Vec<C64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty);
        }
        Ok(Self {
            values,
            factorization: None,
        })
    }

    /// Attach the factorization `n = n_cosets * oversampling`.
    pub fn with_factorization(mut self, n_cosets: usize, oversampling: usize) -> Result<Self> {
        if n_cosets * oversampling != self.values.len() || n_cosets == 0 {
            return Err(Error::BadFactorization {
                n: self.values.len(),
                n_cosets,
                oversampling,
            });
        }
        self.factorization = Some((n_cosets, oversampling));
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn factorization(&self) -> Option<(usize, usize)> {
        self.factorization
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Inverse unitary DFT.
    pub fn idft(&self) -> Signal {
        let n = self.values.len();
        let mut buf = self.values.clone();
        plan(n, true).process(&mut buf);
        let scale = 1.0 / (n as f64).sqrt();
        for v in &mut buf {
            *v *= scale;
        }
        Signal { values: buf }
    }

    /// Entries on the coset `t + <N>` = indices `{t, t+N, ..., t+(s-1)N}`.
    pub fn coset_extract(&self, t: usize, n_cosets: usize) -> Result<Vec<C64>> {
        let n = self.values.len();
        if n_cosets == 0 || n % n_cosets != 0 {
            return Err(Error::NotDivisible {
                n,
                divisor: n_cosets,
            });
        }
        if t >= n_cosets {
            return Err(Error::CosetOutOfRange { t, n_cosets });
        }
        Ok(self.values[t..].iter().step_by(n_cosets).copied().collect())
    }

    /// Place `values` on coset `t + <N>` of a length-`n` spectrum, zeros elsewhere.
    pub fn coset_embed(values: &[C64], t: usize, n_cosets: usize, n: usize) -> Result<Spectrum> {
        if n_cosets == 0 || n % n_cosets != 0 {
            return Err(Error::NotDivisible {
                n,
                divisor: n_cosets,
            });
        }
        if t >= n_cosets {
            return Err(Error::CosetOutOfRange { t, n_cosets });
        }
        let s = n / n_cosets;
        if values.len() != s {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: s,
            });
        }
        let mut out = vec![C64::ZERO; n];
        for (l, &v) in values.iter().enumerate() {
            out[t + l * n_cosets] = v;
        }
        Ok(Spectrum {
            values: out,
            factorization: Some((n_cosets, s)),
        })
    }
}

/// A collection of `m` equal-length signals plus centering state.
#[derive(Clone, Debug)]
pub struct Dataset {
    vectors: Vec<Signal>,
    centroid: Option<Signal>,
    centered: bool,
}

impl Dataset {
    pub fn new(vectors: Vec<Signal>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::Empty);
        }
        let n = vectors[0].len();
        for v in &vectors {
            if v.len() != n {
                return Err(Error::LengthMismatch {
                    left: n,
                    right: v.len(),
                });
            }
        }
        Ok(Self {
            vectors,
            centroid: None,
            centered: false,
        })
    }

    pub(crate) fn new_centered(vectors: Vec<Signal>, centroid: Signal) -> Self {
        Self {
            vectors,
            centroid: Some(centroid),
            centered: true,
        }
    }

    /// Number of data vectors `m`.
    pub fn num_vectors(&self) -> usize {
        self.vectors.len()
    }

    /// Common signal length `n`.
    pub fn signal_len(&self) -> usize {
        self.vectors[0].len()
    }

    pub fn vectors(&self) -> &[Signal] {
        &self.vectors
    }

    pub fn is_centered(&self) -> bool {
        self.centered
    }

    pub fn centroid(&self) -> Option<&Signal> {
        self.centroid.as_ref()
    }

    pub fn total_energy(&self) -> f64 {
        self.vectors.iter().map(Signal::norm_sq).sum()
    }
}

/// Outcome of the shift-orthonormality test of a pulse.
///
/// `orthonormal` is the time-domain verdict (autocorrelation vanishing at
/// nonzero multiples of `s`); `freq_orthonormal` is the equivalent
/// frequency-domain verdict (every coset carrying energy `1/N`). The two
/// agree except within a band of order `N * tol` around the threshold.
#[derive(Clone, Copy, Debug)]
pub struct ShiftOrthReport {
    pub orthonormal: bool,
    /// `max(|R_x(0) - 1|, max_{k≠0} |R_x(ks)|)`.
    pub max_deviation: f64,
    /// `max_t | ||x̂_{t+<N>}||² - 1/N |`.
    pub coset_deviation: f64,
    pub freq_orthonormal: bool,
}

/// Test whether `x` is `s`-quasicyclic shift-orthonormal at tolerance `tol`,
/// reporting both the time-domain and the frequency-domain deviations.
pub fn is_shift_orthonormal(x: &Signal, s: usize, tol: f64) -> Result<ShiftOrthReport> {
    let n = x.len();
    if s == 0 || n % s != 0 {
        return Err(Error::NotDivisible { n, divisor: s });
    }
    let n_cosets = n / s;
    let r = x.autocorrelation();
    let mut max_dev = (r.values[0].re - 1.0).hypot(r.values[0].im);
    for k in 1..n_cosets {
        max_dev = max_dev.max(r.values[k * s].norm());
    }
    let coset_dev = coset_energy_deviation(&x.dft(), n_cosets);
    Ok(ShiftOrthReport {
        orthonormal: max_dev <= tol,
        max_deviation: max_dev,
        coset_deviation: coset_dev,
        freq_orthonormal: coset_dev <= tol,
    })
}

/// `max_t | ||x̂_{t+<N>}||² - 1/N |` for a spectrum of length `n = N s`.
pub(crate) fn coset_energy_deviation(xhat: &Spectrum, n_cosets: usize) -> f64 {
    let n = xhat.len();
    debug_assert_eq!(n % n_cosets, 0);
    let target = 1.0 / n_cosets as f64;
    let mut dev: f64 = 0.0;
    for t in 0..n_cosets {
        let e: f64 = xhat.values[t..]
            .iter()
            .step_by(n_cosets)
            .map(|v| v.norm_sqr())
            .sum();
        dev = dev.max((e - target).abs());
    }
    dev
}

/// Phase ramp `e^{-2πi j k / N}` evaluated for `k = 0..n`, i.e. the spectrum
/// multiplier corresponding to a time shift by `j*s` samples.
pub(crate) fn shift_phase_ramp(n: usize, n_cosets: usize, j: usize) -> Vec<C64> {
    let mut base = Vec::with_capacity(n_cosets);
    for k in 0..n_cosets {
        let ang = -2.0 * PI * (j as f64) * (k as f64) / (n_cosets as f64);
        base.push(C64::from_polar(1.0, ang));
    }
    (0..n).map(|k| base[k % n_cosets]).collect()
}
