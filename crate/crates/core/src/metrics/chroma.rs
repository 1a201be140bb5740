use serde::{Deserialize, Serialize};

use super::{dtw, stft, MetricsError};
use crate::audio::SAMPLE_RATE;

pub const CHROMA_WINDOW: usize = 4096;
pub const CHROMA_HOP: usize = 2048;
const MIN_HZ: f64 = 27.5;
const MAX_HZ: f64 = 8000.0;
pub const DEFAULT_LAMBDA: f64 = 1e-3;

/// Pitch-class names, index 0 = C.
pub const PITCH_CLASSES: [&str; 12] = ["C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"];

/// `T x 12` pitch-class energies; every frame has unit L2 norm or is all zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChromaMatrix {
    pub frames: Vec<[f64; 12]>,
    pub frame_rate: f64,
}

impl ChromaMatrix {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn is_silent(&self) -> bool {
        self.frames.iter().all(|f| f.iter().all(|&v| v == 0.0))
    }
}

/// Pitch class of an FFT bin centre frequency, or `None` outside 27.5 Hz..8 kHz.
fn bin_class(hz: f64) -> Option<usize> {
    if !(MIN_HZ..=MAX_HZ).contains(&hz) {
        return None;
    }
    let midi = (69.0 + 12.0 * (hz / 440.0).log2()).round() as i64;
    Some(midi.rem_euclid(12) as usize)
}

/// Chromagram of mono 44.1 kHz audio from the Hann-windowed power spectrum.
pub fn chromagram(audio: &[f32]) -> Result<ChromaMatrix, MetricsError> {
    if audio.is_empty() {
        return Err(MetricsError::EmptyAudio);
    }
    let bin_hz = f64::from(SAMPLE_RATE) / CHROMA_WINDOW as f64;
    let classes: Vec<Option<usize>> = (0..=CHROMA_WINDOW / 2).map(|k| bin_class(k as f64 * bin_hz)).collect();
    let mut frames: Vec<[f64; 12]> = stft::power_frames(audio, CHROMA_WINDOW, CHROMA_HOP)
        .into_iter()
        .map(|spec| {
            let mut c = [0.0; 12];
            for (p, class) in spec.iter().zip(&classes) {
                if let Some(i) = class {
                    c[*i] += p;
                }
            }
            c
        })
        .collect();
    // silence is relative to the loudest frame so the result is gain invariant
    let loudest = frames.iter().map(norm).fold(0.0, f64::max);
    let floor = loudest * 1e-9;
    for f in &mut frames {
        let n = norm(f);
        if n <= floor || n == 0.0 {
            *f = [0.0; 12];
        } else {
            f.iter_mut().for_each(|v| *v /= n);
        }
    }
    Ok(ChromaMatrix {
        frames,
        frame_rate: f64::from(SAMPLE_RATE) / CHROMA_HOP as f64,
    })
}

fn norm(f: &[f64; 12]) -> f64 {
    f.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Cosine similarity of two normalized frames. Two silent frames count as
/// identical, silence against sound as orthogonal.
pub fn frame_cosine(a: &[f64; 12], b: &[f64; 12]) -> f64 {
    let silent = |f: &[f64; 12]| f.iter().all(|&v| v == 0.0);
    match (silent(a), silent(b)) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 0.0,
        _ => a.iter().zip(b).map(|(x, y)| x * y).sum(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChromaSimilarityResult {
    pub mean_cosine: f64,
    pub dtw_cost: f64,
    pub penalty_weight: f64,
    pub score: f64,
    pub path: Vec<(usize, usize)>,
}

pub fn chroma_similarity(out_audio: &[f32], ref_audio: &[f32], lambda: f64) -> Result<ChromaSimilarityResult, MetricsError> {
    chroma_similarity_banded(out_audio, ref_audio, lambda, None)
}

/// Chroma similarity with an optional Sakoe-Chiba band (in frames) on the alignment.
pub fn chroma_similarity_banded(
    out_audio: &[f32],
    ref_audio: &[f32],
    lambda: f64,
    band: Option<usize>,
) -> Result<ChromaSimilarityResult, MetricsError> {
    let a = chromagram(out_audio)?;
    let b = chromagram(ref_audio)?;
    if a.is_silent() || b.is_silent() {
        return Err(MetricsError::Silent);
    }
    let aligned = dtw::dtw_align_banded(&a, &b, band);
    let mean_cosine =
        aligned.path.iter().map(|&(i, j)| frame_cosine(&a.frames[i], &b.frames[j])).sum::<f64>() / aligned.path.len() as f64;
    Ok(ChromaSimilarityResult {
        mean_cosine,
        dtw_cost: aligned.cost,
        penalty_weight: lambda,
        score: mean_cosine - lambda * aligned.cost,
        path: aligned.path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sines(freqs: &[f64], seconds: f64) -> Vec<f32> {
        let sr = f64::from(SAMPLE_RATE);
        (0..(seconds * sr) as usize)
            .map(|i| freqs.iter().map(|f| (std::f64::consts::TAU * f * i as f64 / sr).sin()).sum::<f64>() as f32 * 0.2)
            .collect()
    }

    fn argmax(f: &[f64; 12]) -> usize {
        (0..12).max_by(|&a, &b| f[a].total_cmp(&f[b])).unwrap()
    }

    #[test]
    fn a440_is_class_a() {
        let c = chromagram(&sines(&[440.0], 2.0)).unwrap();
        assert!((c.frame_rate - 21.533).abs() < 1e-3);
        for f in c.frames.iter().filter(|f| f.iter().any(|&v| v > 0.0)) {
            assert_eq!(PITCH_CLASSES[argmax(f)], "A");
            assert!((norm(f) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn silence_gives_zero_frames() {
        let c = chromagram(&vec![0.0; 44_100]).unwrap();
        assert!(c.is_silent());
        assert!(matches!(chromagram(&[]), Err(MetricsError::EmptyAudio)));
    }

    #[test]
    fn triad_mass_on_c_e_g() {
        let c = chromagram(&sines(&[261.63, 329.63, 392.00], 2.0)).unwrap();
        // interior frames only; the last frame is mostly zero padding
        for f in &c.frames[..c.len() - 1] {
            let total: f64 = f.iter().map(|v| v * v).sum();
            let on = f[0] * f[0] + f[4] * f[4] + f[7] * f[7];
            assert!(on / total > 0.9, "{f:?}");
        }
    }

    #[test]
    fn bin_mapping_edges() {
        assert_eq!(bin_class(20.0), None);
        assert_eq!(bin_class(9000.0), None);
        assert_eq!(bin_class(440.0), Some(9));
        assert_eq!(bin_class(261.63), Some(0));
    }

    #[test]
    fn cosine_silence_conventions() {
        let z = [0.0; 12];
        let mut u = [0.0; 12];
        u[3] = 1.0;
        assert_eq!(frame_cosine(&z, &z), 1.0);
        assert_eq!(frame_cosine(&z, &u), 0.0);
        assert_eq!(frame_cosine(&u, &u), 1.0);
    }

    #[test]
    fn silent_input_is_rejected() {
        let tone = sines(&[440.0], 1.0);
        assert!(matches!(
            chroma_similarity(&tone, &vec![0.0; 44_100], DEFAULT_LAMBDA),
            Err(MetricsError::Silent)
        ));
    }
}
