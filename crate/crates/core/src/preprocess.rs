//! Partial removal of interrogator jitter by thresholded zeroing and
//! flattening of near-equal consecutive samples.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::WavelengthFrame;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    /// Jitter threshold, pm.
    pub epsilon_pm: f64,
    /// Zero-based channels to filter; others pass through untouched.
    pub enabled_channels: [bool; 4],
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            epsilon_pm: 2.0,
            enabled_channels: [true; 4],
        }
    }
}

impl FilterConfig {
    pub fn with_epsilon(epsilon_pm: f64) -> Self {
        FilterConfig {
            epsilon_pm,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon_pm >= 0.0 && self.epsilon_pm.is_finite()) {
            return Err(Error::Config(format!(
                "epsilon must be finite and >= 0, got {}",
                self.epsilon_pm
            )));
        }
        Ok(())
    }
}

/// Single left-to-right pass over one channel.
///
/// A sample within `eps` of zero becomes zero. A sample that is above `eps`
/// and within `eps` of its (already filtered, same-sign, above-`eps`) left
/// neighbour takes the neighbour's value. Everything else passes through.
pub fn filter_channel(input: &[f64], eps: f64) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(input.len());
    for &cur in input {
        let next = if cur.abs() <= eps {
            0.0
        } else {
            match out.last() {
                Some(&prev)
                    if prev.abs() > eps
                        && prev.signum() == cur.signum()
                        && (prev.abs() - cur.abs()).abs() <= eps =>
                {
                    prev
                }
                _ => cur,
            }
        };
        out.push(next);
    }
    out
}

pub fn filter_instability(frame: &WavelengthFrame, cfg: &FilterConfig) -> Result<WavelengthFrame> {
    cfg.validate()?;
    let channels = std::array::from_fn(|i| {
        let ch = frame.channel(i);
        if cfg.enabled_channels[i] {
            filter_channel(ch, cfg.epsilon_pm)
        } else {
            ch.to_vec()
        }
    });
    frame.with_channels(channels)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ChannelFilterStats {
    pub zeroed: usize,
    pub flattened: usize,
    /// Largest |input| among zeroed samples, pm.
    pub max_suppressed_pm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    pub samples: usize,
    pub channels: [ChannelFilterStats; 4],
    pub zeroed: usize,
    pub flattened: usize,
    pub max_suppressed_pm: f64,
    /// Fraction of all samples the filter changed.
    pub suppressed_fraction: f64,
}

/// Diff summary between an unfiltered and a filtered frame.
pub fn filter_report(before: &WavelengthFrame, after: &WavelengthFrame) -> Result<FilterReport> {
    if before.len() != after.len() {
        return Err(Error::LengthMismatch(format!(
            "frames have {} and {} samples",
            before.len(),
            after.len()
        )));
    }
    let channels: [ChannelFilterStats; 4] = std::array::from_fn(|i| {
        let mut s = ChannelFilterStats::default();
        for (&b, &a) in before.channel(i).iter().zip(after.channel(i)) {
            if a == 0.0 && b != 0.0 {
                s.zeroed += 1;
                s.max_suppressed_pm = s.max_suppressed_pm.max(b.abs());
            } else if a != b {
                s.flattened += 1;
            }
        }
        s
    });
    let zeroed = channels.iter().map(|c| c.zeroed).sum::<usize>();
    let flattened = channels.iter().map(|c| c.flattened).sum::<usize>();
    let max_suppressed_pm = channels.iter().fold(0.0_f64, |m, c| m.max(c.max_suppressed_pm));
    let total = 4 * before.len();
    Ok(FilterReport {
        samples: before.len(),
        channels,
        zeroed,
        flattened,
        max_suppressed_pm,
        suppressed_fraction: (zeroed + flattened) as f64 / total as f64,
    })
}
