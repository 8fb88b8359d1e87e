//! Synthetic force trajectories for simulation and testing.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::ForceTrajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    Zero,
    /// Pure F_x: rise, fluctuating plateau, release.
    Tearing,
    /// Independent band-limited F_x, F_y and F_z.
    Mixed,
    /// Constant F_z with no planar load.
    PureFz,
    /// Pure F_x growing linearly over the record.
    Ramp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileSpec {
    pub kind: ProfileKind,
    pub samples: usize,
    pub sample_rate: f64,
    /// Peak load in N.
    pub amplitude_n: f64,
    pub seed: u64,
}

impl Default for ProfileSpec {
    fn default() -> Self {
        ProfileSpec {
            kind: ProfileKind::Tearing,
            samples: 5000,
            sample_rate: 100.0,
            amplitude_n: 0.3,
            seed: 0,
        }
    }
}

impl ProfileSpec {
    pub fn new(kind: ProfileKind, samples: usize, amplitude_n: f64, seed: u64) -> Self {
        ProfileSpec {
            kind,
            samples,
            amplitude_n,
            seed,
            ..ProfileSpec::default()
        }
    }

    pub fn generate(&self) -> Result<ForceTrajectory> {
        if self.samples == 0 {
            return Err(Error::InvalidInput("profile needs at least one sample".into()));
        }
        if !(self.amplitude_n.is_finite() && self.amplitude_n >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "profile amplitude must be finite and >= 0, got {}",
                self.amplitude_n
            )));
        }
        let n = self.samples;
        let a = self.amplitude_n;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let zeros = || vec![0.0; n];
        let (fx, fy, fz) = match self.kind {
            ProfileKind::Zero => (zeros(), zeros(), zeros()),
            ProfileKind::Tearing => {
                let wobble = tone_mix(&mut rng, n, 4, (3.0, 40.0));
                let fx = (0..n)
                    .map(|i| a * tearing_envelope(i as f64 / n as f64) * (0.85 + 0.15 * wobble[i]))
                    .collect();
                (fx, zeros(), zeros())
            }
            ProfileKind::Mixed => {
                // Split the budget so |F| stays below `a` in the worst case.
                let share = a / 3f64.sqrt();
                let fx = tone_mix(&mut rng, n, 5, (2.0, 60.0)).iter().map(|v| share * v).collect();
                let fy = tone_mix(&mut rng, n, 5, (2.0, 60.0)).iter().map(|v| share * v).collect();
                let fz = tone_mix(&mut rng, n, 5, (2.0, 60.0)).iter().map(|v| share * v).collect();
                (fx, fy, fz)
            }
            ProfileKind::PureFz => (zeros(), zeros(), vec![a; n]),
            ProfileKind::Ramp => {
                let fx = (0..n).map(|i| a * i as f64 / n as f64).collect();
                (fx, zeros(), zeros())
            }
        };
        ForceTrajectory::new(self.sample_rate, fx, fy, fz)
    }
}

/// Zero at both ends, full load from 20% to 90% of the record.
fn tearing_envelope(u: f64) -> f64 {
    if u < 0.2 {
        0.5 - 0.5 * (std::f64::consts::PI * u / 0.2).cos()
    } else if u < 0.9 {
        1.0
    } else {
        0.5 + 0.5 * (std::f64::consts::PI * (u - 0.9) / 0.1).cos()
    }
}

/// Sum of `tones` sinusoids with random frequencies (in cycles per record)
/// and phases, normalised to peak magnitude 1.
fn tone_mix(rng: &mut ChaCha8Rng, n: usize, tones: usize, cycles: (f64, f64)) -> Vec<f64> {
    let params: Vec<(f64, f64, f64)> = (0..tones)
        .map(|_| {
            (
                rng.random_range(0.3..1.0),
                rng.random_range(cycles.0..cycles.1),
                rng.random_range(0.0..TAU),
            )
        })
        .collect();
    let raw: Vec<f64> = (0..n)
        .map(|i| {
            let u = i as f64 / n as f64;
            params.iter().map(|&(amp, f, ph)| amp * (TAU * f * u + ph).sin()).sum()
        })
        .collect();
    let peak = raw.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        raw
    } else {
        raw.iter().map(|v| v / peak).collect()
    }
}
