//! Reference math for the variance-preserving v-objective and
//! classifier-free guidance.

use std::f64::consts::FRAC_PI_2;

/// Latent frame rate of the audio autoencoder, in Hz.
pub const LATENT_RATE_HZ: f64 = 21.5;
/// Training latent sequence length (about 47 s of audio).
pub const LATENT_LENGTH: usize = 1024;
/// Guidance scale used at inference.
pub const DEFAULT_CFG_SCALE: f64 = 7.0;
/// Sampler steps used at inference.
pub const SAMPLER_STEPS: usize = 100;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum DiffusionError {
    #[error("diffusion time {0} is outside [0, 1]")]
    TimeOutOfRange(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VpSchedulePoint {
    pub t: f64,
    pub alpha: f64,
    pub sigma: f64,
}

/// A variance-preserving noise schedule: `alpha(t)^2 + sigma(t)^2 = 1`.
pub trait VpSchedule {
    fn point(&self, t: f64) -> Result<VpSchedulePoint, DiffusionError>;
}

/// `alpha = cos(t * pi / 2)`, `sigma = sin(t * pi / 2)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct CosineSchedule;

impl VpSchedule for CosineSchedule {
    fn point(&self, t: f64) -> Result<VpSchedulePoint, DiffusionError> {
        if !(0.0..=1.0).contains(&t) {
            return Err(DiffusionError::TimeOutOfRange(t));
        }
        let (sigma, alpha) = (t * FRAC_PI_2).sin_cos();
        Ok(VpSchedulePoint { t, alpha, sigma })
    }
}

pub fn vp_schedule(t: f64) -> Result<VpSchedulePoint, DiffusionError> {
    CosineSchedule.point(t)
}

fn check_dims(a: &[f64], b: &[f64]) -> Result<(), DiffusionError> {
    if a.len() != b.len() {
        return Err(DiffusionError::DimensionMismatch(a.len(), b.len()));
    }
    Ok(())
}

/// Noised latent `alpha * z + sigma * eps`.
pub fn noise_latent(z: &[f64], eps: &[f64], p: VpSchedulePoint) -> Result<Vec<f64>, DiffusionError> {
    check_dims(z, eps)?;
    Ok(z.iter().zip(eps).map(|(z, e)| p.alpha * z + p.sigma * e).collect())
}

/// Velocity target `alpha * eps - sigma * z`.
pub fn v_target(z: &[f64], eps: &[f64], p: VpSchedulePoint) -> Result<Vec<f64>, DiffusionError> {
    check_dims(z, eps)?;
    Ok(z.iter().zip(eps).map(|(z, e)| p.alpha * e - p.sigma * z).collect())
}

/// Clean latent from a noised latent and a velocity: `alpha * z_t - sigma * v`.
pub fn data_from_v(z_t: &[f64], v: &[f64], p: VpSchedulePoint) -> Result<Vec<f64>, DiffusionError> {
    check_dims(z_t, v)?;
    Ok(z_t.iter().zip(v).map(|(x, v)| p.alpha * x - p.sigma * v).collect())
}

/// Noise from a noised latent and a velocity: `sigma * z_t + alpha * v`.
pub fn noise_from_v(z_t: &[f64], v: &[f64], p: VpSchedulePoint) -> Result<Vec<f64>, DiffusionError> {
    check_dims(z_t, v)?;
    Ok(z_t.iter().zip(v).map(|(x, v)| p.sigma * x + p.alpha * v).collect())
}

/// `uncond + scale * (cond - uncond)`.
pub fn cfg_combine(cond: &[f64], uncond: &[f64], scale: f64) -> Result<Vec<f64>, DiffusionError> {
    check_dims(cond, uncond)?;
    Ok(cond
        .iter()
        .zip(uncond)
        .map(|(&c, &u)| {
            // exact at the two fixed points, not just within rounding
            if scale == 1.0 {
                c
            } else if scale == 0.0 {
                u
            } else {
                u + scale * (c - u)
            }
        })
        .collect())
}
