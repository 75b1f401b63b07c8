//! Sinc (band-limited) resampling of frames recorded at a fractional
//! oversampling rate onto an integer rate, so that the symbol period becomes
//! a whole number of samples and the coset decomposition applies.

use num_complex::Complex64 as C64;

use crate::error::{invalid, Error, Result};
use crate::signal::{Dataset, Signal};

/// Resampling request: the data was recorded at `s_tilde` samples per symbol
/// and should be interpolated to `s_new` samples per symbol.
#[derive(Clone, Copy, Debug)]
pub struct ResampleSpec {
    pub s_tilde: f64,
    pub s_new: usize,
}

/// `sinc(x) = sin(πx)/(πx)`, with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

/// Evaluate `Σ_i v(i) sinc(a - i)` for the sample grid `i = 0..len`.
///
/// All terms share `sin(π(a - i)) = (-1)^i sin(πa)`, so one trig call per
/// target point suffices.
pub(crate) fn sinc_interpolate(v: &[C64], a: f64) -> C64 {
    let rounded = a.round();
    if (a - rounded).abs() < 1e-9 {
        let i = rounded as i64;
        if i >= 0 && (i as usize) < v.len() {
            return v[i as usize];
        }
        return C64::ZERO;
    }
    let sin_pa = (std::f64::consts::PI * a).sin();
    let mut acc = C64::ZERO;
    let mut sign = 1.0;
    for (i, val) in v.iter().enumerate() {
        let weight = sign * sin_pa / (std::f64::consts::PI * (a - i as f64));
        acc += val * weight;
        sign = -sign;
    }
    acc
}

/// Interpolate one frame from rate `s_tilde` to rate `s_new`.
///
/// Output sample `k` reads the underlying continuous-time signal at symbol
/// time `k / s_new`, i.e. at input position `k s_tilde / s_new`. The output
/// covers the same `floor(ñ / s_tilde)` whole symbols, giving length
/// `floor(ñ / s_tilde) * s_new`.
pub fn resample_signal(x: &Signal, spec: &ResampleSpec) -> Result<Signal> {
    validate(spec)?;
    let n_symbols = symbols_covered(x.len(), spec.s_tilde)?;
    let out_len = n_symbols * spec.s_new;
    let ratio = spec.s_tilde / spec.s_new as f64;
    let out: Vec<C64> = (0..out_len)
        .map(|k| sinc_interpolate(x.values(), k as f64 * ratio))
        .collect();
    Signal::new(out)
}

/// Resample every frame of a dataset; see [`resample_signal`].
pub fn resample_dataset(data: &Dataset, spec: &ResampleSpec) -> Result<Dataset> {
    let vectors: Vec<Signal> = data
        .vectors()
        .iter()
        .map(|v| resample_signal(v, spec))
        .collect::<Result<_>>()?;
    if data.is_centered() {
        let centroid = match data.centroid() {
            Some(c) => resample_signal(c, spec)?,
            None => Signal::zeros(vectors[0].len()),
        };
        Ok(Dataset::new_centered(vectors, centroid))
    } else {
        Dataset::new(vectors)
    }
}

fn validate(spec: &ResampleSpec) -> Result<()> {
    if !(spec.s_tilde.is_finite() && spec.s_tilde > 0.0) {
        return Err(invalid("fractional rate must be positive and finite"));
    }
    if spec.s_new == 0 {
        return Err(invalid("target rate must be at least 1"));
    }
    Ok(())
}

fn symbols_covered(len: usize, s_tilde: f64) -> Result<usize> {
    // guard against 850 / 8.5 evaluating to 99.999…
    let n_symbols = (len as f64 / s_tilde + 1e-9).floor() as usize;
    if n_symbols == 0 {
        return Err(Error::FrameTooShort {
            len,
            s: s_tilde.ceil() as usize,
        });
    }
    Ok(n_symbols)
}
