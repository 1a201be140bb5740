use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

/// Power spectra `|X_k|^2` (bins `0..=n/2`) of Hann-windowed frames.
///
/// Frames start at multiples of `hop`; the tail is zero-padded so that every
/// sample lands in at least one frame. A buffer shorter than one window
/// yields a single padded frame.
pub(crate) fn power_frames(x: &[f32], window: usize, hop: usize) -> Vec<Vec<f64>> {
    let fft: Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft_forward(window);
    let hann: Vec<f64> = (0..window)
        .map(|i| 0.5 - 0.5 * (std::f64::consts::TAU * i as f64 / window as f64).cos())
        .collect();
    let frames = 1 + x.len().saturating_sub(window).div_ceil(hop);
    let mut buf = vec![Complex::new(0.0, 0.0); window];
    let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    (0..frames)
        .map(|f| {
            let start = f * hop;
            for (i, slot) in buf.iter_mut().enumerate() {
                let s = x.get(start + i).map_or(0.0, |&v| f64::from(v));
                *slot = Complex::new(s * hann[i], 0.0);
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            buf[..=window / 2].iter().map(|c| c.norm_sqr()).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_count_and_peak_bin() {
        let sr = 44_100.0;
        let x: Vec<f32> = (0..10_000)
            .map(|i| (std::f64::consts::TAU * 1000.0 * i as f64 / sr).sin() as f32)
            .collect();
        let frames = power_frames(&x, 4096, 2048);
        // starts 0, 2048, 4096, 6144 cover 10000 samples
        assert_eq!(frames.len(), 4);
        let peak = (0..frames[0].len()).max_by(|&a, &b| frames[0][a].total_cmp(&frames[0][b])).unwrap();
        assert_eq!(peak, (1000.0 * 4096.0 / sr).round() as usize);
        assert_eq!(power_frames(&[0.0; 10], 4096, 2048).len(), 1);
    }
}
