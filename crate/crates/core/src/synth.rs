//! Synthetic cyclostationary data: root-raised-cosine pulses, random
//! shift-orthonormal pulses, PAM/QAM modulation, additive white Gaussian
//! noise, and two-system mixtures. Everything is deterministic given a seed;
//! per-frame generator substreams make parallel generation equal sequential.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::pca;
use crate::signal::{Dataset, Signal, Spectrum};

/// Symbol constellation, normalized to unit average power.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Alphabet {
    /// Real levels {±1, ±3} / √5.
    Pam4,
    /// Real and imaginary parts independently {±1, ±3} / √10.
    Qam16,
}

/// Parameters of one modulated system.
#[derive(Clone, Copy, Debug)]
pub struct ModulationSpec {
    pub alphabet: Alphabet,
    /// Symbols per frame.
    pub n_symbols: usize,
    /// Samples per symbol; integer values allow circular modulation.
    pub samples_per_symbol: f64,
    /// Excess-bandwidth factor α ∈ [0, 1] of the RRC pulse.
    pub roll_off: f64,
    /// Transmit power P (the amplitude scale is √P).
    pub power: f64,
    /// Timing offset in samples.
    pub offset_samples: f64,
    /// Total per-sample noise standard deviation σ.
    pub noise_sigma: f64,
    pub seed: u64,
    /// Wrap pulse tails around the frame so it is exactly cyclostationary;
    /// when false, tails are truncated (linear modulation).
    pub circular: bool,
    /// Draw real instead of circular complex noise.
    pub real_noise: bool,
}

impl ModulationSpec {
    pub fn new(alphabet: Alphabet, n_symbols: usize, samples_per_symbol: f64) -> Self {
        Self {
            alphabet,
            n_symbols,
            samples_per_symbol,
            roll_off: 0.0,
            power: 1.0,
            offset_samples: 0.0,
            noise_sigma: 0.0,
            seed: 0,
            circular: true,
            real_noise: false,
        }
    }
}

/// Root-raised-cosine pulse `ψ_α(τ)`, with the removable singularities at
/// `τ = 0` and `τ = ±1/(4α)` filled in by continuity.
pub fn rrc_pulse(alpha: f64, tau: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) || !alpha.is_finite() {
        return Err(invalid("roll-off must lie in [0, 1]"));
    }
    Ok(rrc_eval(alpha, tau))
}

pub(crate) fn rrc_eval(alpha: f64, tau: f64) -> f64 {
    use std::f64::consts::PI;
    if tau.abs() < 1e-8 {
        return 1.0 + alpha * (4.0 / PI - 1.0);
    }
    if alpha > 0.0 {
        let tau0 = 1.0 / (4.0 * alpha);
        if (tau.abs() - tau0).abs() < 1e-8 {
            let x = PI * (1.0 + alpha) * tau0;
            return alpha * (x.sin() - (2.0 / PI) * x.cos());
        }
    }
    let num = (PI * tau * (1.0 - alpha)).sin()
        + 4.0 * alpha * tau * (PI * tau * (1.0 + alpha)).cos();
    let den = PI * tau * (1.0 - (4.0 * alpha * tau).powi(2));
    num / den
}

/// Random pulse of length `N s` whose spectrum carries energy exactly `1/N`
/// on every coset `t + <N>`, hence shift-orthonormal at rate `s`.
///
/// Each coset is phase-aligned so its first significant entry is real
/// positive, the same canonical representative the QPCA solver reports.
pub fn random_shift_orthonormal_pulse(
    n_cosets: usize,
    s: usize,
    rng: &mut ChaCha12Rng,
) -> Signal {
    assert!(n_cosets >= 1 && s >= 1);
    let n = n_cosets * s;
    let raw: Vec<C64> = (0..n)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let coset_scale = 1.0 / (n_cosets as f64).sqrt();
    let mut qhat = vec![C64::ZERO; n];
    for t in 0..n_cosets {
        let mut coset: Vec<C64> = (t..n).step_by(n_cosets).map(|k| raw[k]).collect();
        let norm: f64 = coset.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let scale = coset_scale / norm;
        for v in &mut coset {
            *v *= scale;
        }
        let coset = pca::phase_normalize(&coset, pca::PHASE_THRESHOLD)
            .expect("Gaussian coset is nonzero");
        for (l, v) in coset.iter().enumerate() {
            qhat[t + l * n_cosets] = *v;
        }
    }
    Spectrum::new(qhat).expect("n >= 1").idft()
}

/// `count` i.i.d. uniform draws from the normalized constellation.
pub fn draw_symbols(alphabet: Alphabet, count: usize, rng: &mut ChaCha12Rng) -> Vec<C64> {
    let level = |rng: &mut ChaCha12Rng| -> f64 {
        [-3.0, -1.0, 1.0, 3.0][rng.random_range(0..4usize)]
    };
    (0..count)
        .map(|_| match alphabet {
            Alphabet::Pam4 => C64::new(level(rng) / 5.0f64.sqrt(), 0.0),
            Alphabet::Qam16 => {
                let re = level(rng);
                let im = level(rng);
                C64::new(re, im) / 10.0f64.sqrt()
            }
        })
        .collect()
}

/// Modulate a symbol sequence with a pulse shape evaluated in symbol time:
/// `y(k) = √P · Σ_j a(j) ψ((k − j s − T) / s)`.
///
/// In circular mode (integer `s`) the pulse is sampled once over the frame,
/// centred with wrap-around, and symbol shifts are circular, so the frame is
/// exactly cyclostationary. In linear mode tails falling outside the frame
/// are truncated.
pub fn modulate<F>(symbols: &[C64], pulse_eval: F, spec: &ModulationSpec) -> Result<Signal>
where
    F: Fn(f64) -> f64,
{
    if symbols.len() != spec.n_symbols {
        return Err(Error::LengthMismatch {
            left: symbols.len(),
            right: spec.n_symbols,
        });
    }
    let s = spec.samples_per_symbol;
    if !(s.is_finite() && s > 0.0) {
        return Err(invalid("samples per symbol must be positive"));
    }
    if spec.power < 0.0 {
        return Err(invalid("power must be non-negative"));
    }
    let amp = spec.power.sqrt();
    if spec.circular {
        let s_int = s.round() as usize;
        if s_int == 0 || (s - s_int as f64).abs() > 1e-9 {
            return Err(invalid(
                "circular modulation needs an integer number of samples per symbol",
            ));
        }
        let n = spec.n_symbols * s_int;
        // centred pulse with tails wrapped across the frame boundary
        let pulse: Vec<f64> = (0..n)
            .map(|k| {
                let kt = if 2 * k > n {
                    k as f64 - n as f64
                } else {
                    k as f64
                };
                pulse_eval((kt - spec.offset_samples) / s)
            })
            .collect();
        let mut out = vec![C64::ZERO; n];
        for (j, a) in symbols.iter().enumerate() {
            let shift = j * s_int;
            let coeff = a * amp;
            for k in 0..n {
                out[(k + shift) % n] += coeff * pulse[k];
            }
        }
        Signal::new(out)
    } else {
        let n = (spec.n_symbols as f64 * s + 1e-9).floor() as usize;
        let mut out = vec![C64::ZERO; n.max(1)];
        for (k, o) in out.iter_mut().enumerate() {
            let mut acc = C64::ZERO;
            for (j, a) in symbols.iter().enumerate() {
                let tau = (k as f64 - j as f64 * s - spec.offset_samples) / s;
                acc += a * pulse_eval(tau);
            }
            *o = acc * amp;
        }
        Signal::new(out)
    }
}

/// Add i.i.d. circular complex Gaussian noise with total per-sample
/// variance `σ²` (each component has standard deviation `σ/√2`).
pub fn add_awgn(x: &Signal, sigma: f64, rng: &mut ChaCha12Rng) -> Result<Signal> {
    if sigma < 0.0 || !sigma.is_finite() {
        return Err(invalid("noise level must be non-negative"));
    }
    if sigma == 0.0 {
        return Ok(x.clone());
    }
    let comp = sigma / 2.0f64.sqrt();
    Signal::new(
        x.values()
            .iter()
            .map(|v| {
                v + C64::new(
                    comp * rng.sample::<f64, _>(StandardNormal),
                    comp * rng.sample::<f64, _>(StandardNormal),
                )
            })
            .collect(),
    )
}

/// Add i.i.d. real Gaussian noise with per-sample standard deviation `σ`.
pub fn add_real_awgn(x: &Signal, sigma: f64, rng: &mut ChaCha12Rng) -> Result<Signal> {
    if sigma < 0.0 || !sigma.is_finite() {
        return Err(invalid("noise level must be non-negative"));
    }
    if sigma == 0.0 {
        return Ok(x.clone());
    }
    Signal::new(
        x.values()
            .iter()
            .map(|v| v + sigma * rng.sample::<f64, _>(StandardNormal))
            .collect(),
    )
}

fn substream(seed: u64, index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn apply_noise(y: &Signal, spec: &ModulationSpec, rng: &mut ChaCha12Rng) -> Result<Signal> {
    if spec.real_noise {
        add_real_awgn(y, spec.noise_sigma, rng)
    } else {
        add_awgn(y, spec.noise_sigma, rng)
    }
}

/// Generate `m` independent RRC-modulated noisy frames from one spec.
pub fn modulate_dataset(spec: &ModulationSpec, m: usize) -> Result<Dataset> {
    let alpha = spec.roll_off;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(invalid("roll-off must lie in [0, 1]"));
    }
    let frames: Vec<Signal> = (0..m)
        .map(|i| {
            let mut rng = substream(spec.seed, i as u64);
            let symbols = draw_symbols(spec.alphabet, spec.n_symbols, &mut rng);
            let y = modulate(&symbols, |tau| rrc_eval(alpha, tau), spec)?;
            apply_noise(&y, spec, &mut rng)
        })
        .collect::<Result<_>>()?;
    Dataset::new(frames)
}

/// Generate `m` frames that are random symbol combinations of the circular
/// shifts of an explicit pulse: `y_i = Σ_j a_{ij} (q ⊛ e_{js})`, plus noise.
pub fn pulse_family_dataset(
    pulse: &Signal,
    s: usize,
    alphabet: Alphabet,
    m: usize,
    noise_sigma: f64,
    real_noise: bool,
    seed: u64,
) -> Result<Dataset> {
    let n = pulse.len();
    if s == 0 || n % s != 0 {
        return Err(Error::NotDivisible { n, divisor: s });
    }
    let n_shifts = n / s;
    let shifts: Vec<Signal> = (0..n_shifts)
        .map(|j| pulse.circular_shift((j * s) as i64))
        .collect();
    let frames: Vec<Signal> = (0..m)
        .map(|i| {
            let mut rng = substream(seed, i as u64);
            let symbols = draw_symbols(alphabet, n_shifts, &mut rng);
            let mut v = vec![C64::ZERO; n];
            for (a, shifted) in symbols.iter().zip(&shifts) {
                for (vv, sv) in v.iter_mut().zip(shifted.values()) {
                    *vv += a * sv;
                }
            }
            let y = Signal::new(v)?;
            if real_noise {
                add_real_awgn(&y, noise_sigma, &mut rng)
            } else {
                add_awgn(&y, noise_sigma, &mut rng)
            }
        })
        .collect::<Result<_>>()?;
    Dataset::new(frames)
}

/// Mixture of two modulated systems observed through one channel:
/// `Y_i = mod₁(a_i) + mod₂(b_i) + noise`, with each system's power and
/// offset taken from its own spec and the noise level from `spec1`.
pub fn two_system_mixture(
    spec1: &ModulationSpec,
    spec2: &ModulationSpec,
    m: usize,
    rng: &mut ChaCha12Rng,
) -> Result<Dataset> {
    if spec1.n_symbols != spec2.n_symbols {
        return Err(invalid("mixture systems must share the symbol count"));
    }
    if (spec1.samples_per_symbol - spec2.samples_per_symbol).abs() > 1e-12 {
        return Err(invalid("mixture systems must share the sampling rate"));
    }
    if spec1.circular != spec2.circular {
        return Err(invalid("mixture systems must share the modulation mode"));
    }
    let base: u64 = rng.random();
    let frames: Vec<Signal> = (0..m)
        .map(|i| {
            let mut r = substream(base, i as u64);
            let a = draw_symbols(spec1.alphabet, spec1.n_symbols, &mut r);
            let b = draw_symbols(spec2.alphabet, spec2.n_symbols, &mut r);
            let y1 = modulate(&a, |tau| rrc_eval(spec1.roll_off, tau), spec1)?;
            let y2 = modulate(&b, |tau| rrc_eval(spec2.roll_off, tau), spec2)?;
            let sum = Signal::new(
                y1.values()
                    .iter()
                    .zip(y2.values())
                    .map(|(p, q)| p + q)
                    .collect(),
            )?;
            apply_noise(&sum, spec1, &mut r)
        })
        .collect::<Result<_>>()?;
    Dataset::new(frames)
}
