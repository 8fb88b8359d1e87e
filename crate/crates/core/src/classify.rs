//! Uniaxial vs multiaxial loading decision per sensor pair.
//!
//! The magnitude spectra of the two channels are compared by linear
//! regression after dropping DC and the few dominant bins. A pair driven by a
//! single axis responds proportionally on both sensors and regresses almost
//! perfectly.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{SensorPair, WavelengthFrame};

pub const MIN_CLASSIFY_SAMPLES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoadingKind {
    Uniaxial,
    Multiaxial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadingClass {
    pub kind: LoadingKind,
    pub r_squared: f64,
    pub pair: SensorPair,
    /// Number of spectrum bins dropped (union over both channels).
    pub removed_bins: usize,
    /// Set when the trimmed spectra carried no variance to regress.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierConfig {
    pub removed_bins: usize,
    pub r2_threshold: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            removed_bins: 3,
            r2_threshold: 0.8,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.r2_threshold) {
            return Err(Error::Config(format!(
                "R² threshold must lie in [0, 1], got {}",
                self.r2_threshold
            )));
        }
        Ok(())
    }
}

/// Magnitude spectrum of a real series, bins `1..=n/2` (DC dropped).
pub fn magnitude_spectrum(series: &[f64]) -> Vec<f64> {
    let n = series.len();
    if n < 2 {
        return Vec::new();
    }
    let fft: Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft_forward(n);
    let mut buf: Vec<Complex<f64>> = series.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fft.process(&mut buf);
    buf[1..=n / 2].iter().map(|c| c.norm()).collect()
}

fn largest_indices(values: &[f64], count: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    // Stable on ties: lower index wins.
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx.truncate(count);
    idx
}

/// R² of the least-squares line of `y` on `x`; `None` if either has no spread.
pub(crate) fn regression_r2(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    if x.is_empty() {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
        sxy += (a - mx) * (b - my);
    }
    // Relative floor so rounding noise on a flat spectrum does not count.
    let scale = x.iter().chain(y).fold(0.0_f64, |m, v| m.max(v.abs()));
    let floor = (scale * 1e-12).powi(2) * n;
    if sxx <= floor || syy <= floor {
        return None;
    }
    Some((sxy * sxy / (sxx * syy)).clamp(0.0, 1.0))
}

/// Classifies the loading seen by one pair of (filtered) channels.
pub fn classify_pair(
    ch_a: &[f64],
    ch_b: &[f64],
    pair: SensorPair,
    cfg: &ClassifierConfig,
) -> Result<LoadingClass> {
    cfg.validate()?;
    if ch_a.len() != ch_b.len() {
        return Err(Error::LengthMismatch(format!(
            "pair channels have {} and {} samples",
            ch_a.len(),
            ch_b.len()
        )));
    }
    if ch_a.len() < MIN_CLASSIFY_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "classification needs at least {MIN_CLASSIFY_SAMPLES} samples, got {}",
            ch_a.len()
        )));
    }
    let spec_a = magnitude_spectrum(ch_a);
    let spec_b = magnitude_spectrum(ch_b);

    let mut drop = largest_indices(&spec_a, cfg.removed_bins);
    drop.extend(largest_indices(&spec_b, cfg.removed_bins));
    drop.sort_unstable();
    drop.dedup();
    let keep = |s: &[f64]| -> Vec<f64> {
        s.iter()
            .enumerate()
            .filter(|(i, _)| drop.binary_search(i).is_err())
            .map(|(_, &v)| v)
            .collect()
    };
    let (a, b) = (keep(&spec_a), keep(&spec_b));

    let (kind, r_squared, degenerate) = match regression_r2(&a, &b) {
        Some(r2) if r2 > cfg.r2_threshold => (LoadingKind::Uniaxial, r2, false),
        Some(r2) => (LoadingKind::Multiaxial, r2, false),
        None => (LoadingKind::Uniaxial, 1.0, true),
    };
    Ok(LoadingClass {
        kind,
        r_squared,
        pair,
        removed_bins: drop.len(),
        degenerate,
    })
}

/// Verdicts for sensor pairs 1–2 and 3–4.
pub fn classify_frame(frame: &WavelengthFrame, cfg: &ClassifierConfig) -> Result<[LoadingClass; 2]> {
    let (a, b) = frame.pair(SensorPair::First);
    let first = classify_pair(a, b, SensorPair::First, cfg)?;
    let (c, d) = frame.pair(SensorPair::Second);
    let second = classify_pair(c, d, SensorPair::Second, cfg)?;
    Ok([first, second])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine_mix(n: usize, comps: &[(f64, f64, f64)]) -> Vec<f64> {
        (0..n)
            .map(|i| {
                comps
                    .iter()
                    .map(|&(amp, cycles, phase)| amp * (std::f64::consts::TAU * cycles * i as f64 / n as f64 + phase).sin())
                    .sum()
            })
            .collect()
    }

    #[test]
    fn proportional_pair_is_uniaxial() {
        let a: Vec<f64> = (0..256).map(|i| ((i * 37 % 101) as f64).sin() + 0.01 * i as f64).collect();
        let b: Vec<f64> = a.iter().map(|v| 2.0 * v).collect();
        let c = classify_pair(&a, &b, SensorPair::First, &ClassifierConfig::default()).unwrap();
        assert_eq!(c.kind, LoadingKind::Uniaxial);
        assert!((c.r_squared - 1.0).abs() < 1e-12);
        assert!(!c.degenerate);
        assert!(c.removed_bins >= 3 && c.removed_bins <= 6);
    }

    #[test]
    fn short_input_rejected() {
        let a = vec![1.0; 15];
        assert!(matches!(
            classify_pair(&a, &a, SensorPair::First, &ClassifierConfig::default()),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn zero_frame_is_degenerate_uniaxial() {
        let f = WavelengthFrame::zeros(100.0, 64).unwrap();
        let [p, q] = classify_frame(&f, &ClassifierConfig::default()).unwrap();
        for c in [p, q] {
            assert_eq!(c.kind, LoadingKind::Uniaxial);
            assert!(c.degenerate);
            assert_eq!(c.r_squared, 1.0);
        }
    }

    #[test]
    fn disjoint_spectra_are_multiaxial() {
        let n = 512;
        let a = sine_mix(n, &[(1.0, 5.0, 0.0), (0.8, 17.0, 0.3), (0.6, 29.0, 1.0), (0.5, 41.0, 0.2), (0.4, 53.0, 0.0)]);
        let b = sine_mix(n, &[(1.0, 9.0, 0.0), (0.8, 23.0, 0.3), (0.6, 31.0, 1.0), (0.5, 47.0, 0.2), (0.4, 61.0, 0.0)]);
        let c = classify_pair(&a, &b, SensorPair::Second, &ClassifierConfig::default()).unwrap();
        assert_eq!(c.kind, LoadingKind::Multiaxial);
        assert!(c.r_squared < 0.7);
    }

    #[test]
    fn verdicts_are_reported_per_pair() {
        let n = 256;
        let x = sine_mix(n, &[(1.0, 3.0, 0.0), (0.5, 11.0, 0.4), (0.3, 19.0, 0.9), (0.2, 37.0, 0.1)]);
        let y = sine_mix(n, &[(1.0, 7.0, 0.0), (0.5, 13.0, 0.4), (0.3, 23.0, 0.9), (0.2, 43.0, 0.1)]);
        let frame = WavelengthFrame::new(
            100.0,
            [x.iter().map(|v| 3.0 * v).collect(), x.iter().map(|v| 0.5 * v).collect(), x.clone(), y],
        )
        .unwrap();
        let [p, q] = classify_frame(&frame, &ClassifierConfig::default()).unwrap();
        assert_eq!(p.kind, LoadingKind::Uniaxial);
        assert_eq!(q.kind, LoadingKind::Multiaxial);
        assert_eq!(p.pair, SensorPair::First);
        assert_eq!(q.pair, SensorPair::Second);
    }

    #[test]
    fn r2_is_scale_invariant() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let n = 300;
        let mut a = sine_mix(n, &[(5.0, 4.0, 0.0), (3.0, 12.0, 0.3)]);
        let mut b = sine_mix(n, &[(4.0, 4.0, 1.0), (2.0, 15.0, 0.3)]);
        for (x, y) in a.iter_mut().zip(b.iter_mut()) {
            let common = rng.random_range(-1.0..1.0);
            *x += common + 0.5 * rng.random_range(-1.0..1.0);
            *y += 0.7 * common + 0.5 * rng.random_range(-1.0..1.0);
        }
        let cfg = ClassifierConfig::default();
        let base = classify_pair(&a, &b, SensorPair::First, &cfg).unwrap().r_squared;
        assert!(base > 0.05 && base < 0.95, "{base}");
        for c in [-3.0, 0.01, 250.0] {
            let scaled: Vec<f64> = b.iter().map(|v| v * c).collect();
            let r = classify_pair(&a, &scaled, SensorPair::First, &cfg).unwrap().r_squared;
            assert!((r - base).abs() < 1e-10, "{c}: {r} vs {base}");
        }
    }
}
