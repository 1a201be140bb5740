//! Global tempo from the autocorrelation of a spectral-flux onset envelope.

use super::{stft, MetricsError};
use crate::audio::SAMPLE_RATE;
use crate::augment::{MAX_RATIO, MIN_RATIO};
use crate::note::NoteSequence;

const FLUX_WINDOW: usize = 1024;
const FLUX_HOP: usize = 256;
pub const MIN_BPM: f64 = 40.0;
pub const MAX_BPM: f64 = 220.0;
/// Preferred band for resolving the octave ambiguity.
pub const PREFERRED_BPM: (f64, f64) = (70.0, 140.0);
/// Shortest input accepted by [`tempo_estimate`], seconds.
pub const MIN_SECONDS: f64 = 5.0;
/// Normalized autocorrelation below which no periodicity is reported.
const MIN_PERIODICITY: f64 = 0.1;

/// Half-wave rectified log-magnitude flux, one value per hop.
pub fn onset_envelope(audio: &[f32]) -> Vec<f64> {
    let frames: Vec<Vec<f64>> = stft::power_frames(audio, FLUX_WINDOW, FLUX_HOP)
        .into_iter()
        .map(|p| p.into_iter().map(|v| (1.0 + 1000.0 * v.sqrt()).ln()).collect())
        .collect();
    let mut flux = vec![0.0];
    flux.extend(
        frames
            .windows(2)
            .map(|w| w[1].iter().zip(&w[0]).map(|(b, a)| (b - a).max(0.0)).sum::<f64>()),
    );
    smooth(&flux)
}

/// Short Hann smoothing so beat periods that fall between two lags still
/// produce a clear autocorrelation peak.
fn smooth(x: &[f64]) -> Vec<f64> {
    const HALF: usize = 4;
    let kernel: Vec<f64> = (0..=2 * HALF)
        .map(|i| 0.5 - 0.5 * (std::f64::consts::TAU * (i + 1) as f64 / (2 * HALF + 2) as f64).cos())
        .collect();
    (0..x.len())
        .map(|n| {
            kernel
                .iter()
                .enumerate()
                .filter_map(|(k, w)| (n + k).checked_sub(HALF).and_then(|i| x.get(i)).map(|v| v * w))
                .sum()
        })
        .collect()
}

fn envelope_rate() -> f64 {
    f64::from(SAMPLE_RATE) / FLUX_HOP as f64
}

/// Biased autocorrelation `r[l] = sum x[n] x[n+l] / N` of the mean-removed envelope.
fn autocorrelation(env: &[f64], max_lag: usize) -> Vec<f64> {
    let mean = env.iter().sum::<f64>() / env.len() as f64;
    let x: Vec<f64> = env.iter().map(|v| v - mean).collect();
    let n = x.len() as f64;
    (0..=max_lag.min(x.len() - 1))
        .map(|l| x.iter().zip(&x[l..]).map(|(a, b)| a * b).sum::<f64>() / n)
        .collect()
}

/// Vertex offset of the parabola through three neighbouring samples.
fn parabolic(r: &[f64], l: usize) -> f64 {
    if l == 0 || l + 1 >= r.len() {
        return l as f64;
    }
    let (a, b, c) = (r[l - 1], r[l], r[l + 1]);
    let denom = a - 2.0 * b + c;
    if denom >= 0.0 {
        return l as f64;
    }
    l as f64 + 0.5 * (a - c) / denom
}

/// Estimates the global tempo in BPM.
///
/// The strongest autocorrelation lag inside 40..220 BPM wins. If doubling
/// that tempo lands in 70..140 BPM and the half lag scores within 10% of the
/// peak, the doubled tempo is reported instead.
pub fn tempo_estimate(audio: &[f32]) -> Result<f64, MetricsError> {
    let seconds = audio.len() as f64 / f64::from(SAMPLE_RATE);
    if seconds < MIN_SECONDS {
        return Err(MetricsError::TooShort(seconds));
    }
    let env = onset_envelope(audio);
    let rate = envelope_rate();
    let lag_of = |bpm: f64| rate * 60.0 / bpm;
    let lo = lag_of(MAX_BPM).floor().max(1.0) as usize;
    let hi = lag_of(MIN_BPM).ceil() as usize;
    let r = autocorrelation(&env, hi + 1);
    if r[0] <= 0.0 || r.len() <= hi {
        return Err(MetricsError::NoPeriodicity);
    }
    let peak = (lo..=hi).max_by(|&a, &b| r[a].total_cmp(&r[b])).expect("non-empty lag band");
    if r[peak] / r[0] < MIN_PERIODICITY {
        return Err(MetricsError::NoPeriodicity);
    }
    let mut lag = parabolic(&r, peak);
    let doubled = 60.0 * rate / (lag / 2.0);
    if (PREFERRED_BPM.0..=PREFERRED_BPM.1).contains(&doubled) {
        let half = (lag / 2.0).round() as usize;
        let local = (half.saturating_sub(1)..=half + 1).max_by(|&a, &b| r[a].total_cmp(&r[b])).unwrap_or(half);
        if r[local] >= 0.9 * r[peak] {
            log::debug!("octave correction: lag {lag:.2} -> {local}");
            lag = parabolic(&r, local);
        }
    }
    Ok(60.0 * rate / lag)
}

/// `|estimated - expected| / expected` with `expected = reference / ratio`.
pub fn deviation_from_estimate(estimated_bpm: f64, reference_bpm: f64, prompt_ratio: f64) -> Result<f64, MetricsError> {
    if !(MIN_RATIO..=MAX_RATIO).contains(&prompt_ratio) {
        return Err(MetricsError::BadRatio(prompt_ratio));
    }
    if !(reference_bpm.is_finite() && reference_bpm > 0.0) {
        return Err(MetricsError::MissingScoreTempo);
    }
    let expected = reference_bpm / prompt_ratio;
    Ok((estimated_bpm - expected).abs() / expected)
}

/// Relative deviation of the estimated output tempo from the score tempo
/// adjusted by the prompted ratio. Scores without tempo events are rejected.
pub fn tempo_deviation(out_audio: &[f32], score: &NoteSequence, prompt_ratio: f64) -> Result<f64, MetricsError> {
    let reference = score.reference_bpm().ok_or(MetricsError::MissingScoreTempo)?;
    if !(MIN_RATIO..=MAX_RATIO).contains(&prompt_ratio) {
        return Err(MetricsError::BadRatio(prompt_ratio));
    }
    deviation_from_estimate(tempo_estimate(out_audio)?, reference, prompt_ratio)
}
