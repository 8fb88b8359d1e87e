//! Fixed-point FastICA for two whitened channels.
//!
//! The contrast is the Gaussian-family `G(u) = -(1/a) exp(-a u^2 / 2)`, so
//! `g(u) = u exp(-a u^2 / 2)` and `g'(u) = (1 - a u^2) exp(-a u^2 / 2)`.
//! Each unit update is `w+ = E{z g(w'z)} - E{g'(w'z)} w`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot2, norm2, sym_inv_sqrt, Mat2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orthogonalization {
    /// Symmetric decorrelation of both rows every iteration.
    Parallel,
    /// One row at a time with Gram-Schmidt against earlier rows.
    Sequential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IcaConfig {
    pub a2: f64,
    pub max_iterations: usize,
    pub convergence_tol: f64,
    pub rng_seed: u64,
    pub deflation_order: Orthogonalization,
}

impl Default for IcaConfig {
    fn default() -> Self {
        IcaConfig {
            a2: 1.0,
            max_iterations: 200,
            convergence_tol: 1e-8,
            rng_seed: 0,
            deflation_order: Orthogonalization::Parallel,
        }
    }
}

impl IcaConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(1.0..=2.0).contains(&self.a2) {
            return Err(Error::Config(format!("a2 must lie in [1, 2], got {}", self.a2)));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        if !(self.convergence_tol > 0.0 && self.convergence_tol.is_finite()) {
            return Err(Error::Config(format!(
                "convergence tolerance must be positive, got {}",
                self.convergence_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FastIcaResult {
    /// Unmixing in whitened space; rows are orthonormal.
    pub w: Mat2,
    pub converged: bool,
    pub iterations: usize,
    /// Excess kurtosis of each separated output.
    pub kurtosis: [f64; 2],
    /// False when no output departs from Gaussian enough for the
    /// separation to be meaningful.
    pub identifiable: bool,
}

/// Smallest |excess kurtosis| that counts as non-Gaussian for `n` samples:
/// four standard errors of the Gaussian sample kurtosis, at least 0.3.
pub fn gaussianity_threshold(n: usize) -> f64 {
    (4.0 * (24.0 / n as f64).sqrt()).max(0.3)
}

/// One fixed-point step for a single unit.
fn unit_update(z: &[Vec<f64>; 2], w: [f64; 2], a2: f64) -> [f64; 2] {
    let n = z[0].len() as f64;
    let (mut s0, mut s1, mut sd) = (0.0, 0.0, 0.0);
    for (&z0, &z1) in z[0].iter().zip(&z[1]) {
        let u = w[0] * z0 + w[1] * z1;
        let e = (-0.5 * a2 * u * u).exp();
        let g = u * e;
        s0 += z0 * g;
        s1 += z1 * g;
        sd += (1.0 - a2 * u * u) * e;
    }
    let d = sd / n;
    [s0 / n - d * w[0], s1 / n - d * w[1]]
}

fn normalize(w: [f64; 2]) -> [f64; 2] {
    let n = norm2(w);
    [w[0] / n, w[1] / n]
}

/// `(W W^T)^{-1/2} W`
fn symmetric_decorrelation(w: &Mat2) -> Option<Mat2> {
    let wwt = w.mul(&w.transpose());
    sym_inv_sqrt(&wwt).map(|s| s.mul(w))
}

fn random_unit(rng: &mut ChaCha8Rng) -> [f64; 2] {
    loop {
        let v = [StandardNormal.sample(rng), StandardNormal.sample(rng)];
        if norm2(v) > 1e-6 {
            return normalize(v);
        }
    }
}

fn excess_kurtosis(z: &[Vec<f64>; 2], w: [f64; 2]) -> f64 {
    let n = z[0].len() as f64;
    let (mut m2, mut m4) = (0.0, 0.0);
    for (&z0, &z1) in z[0].iter().zip(&z[1]) {
        let u = w[0] * z0 + w[1] * z1;
        let u2 = u * u;
        m2 += u2;
        m4 += u2 * u2;
    }
    let (m2, m4) = (m2 / n, m4 / n);
    m4 / (m2 * m2) - 3.0
}

/// Estimates two orthonormal unmixing rows for whitened data `z`.
pub fn fastica_pair(z: &[Vec<f64>; 2], cfg: &IcaConfig) -> Result<FastIcaResult> {
    cfg.validate()?;
    if z[0].len() != z[1].len() || z[0].is_empty() {
        return Err(Error::InvalidInput("whitened pair must be non-empty and aligned".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let (w, converged, iterations) = match cfg.deflation_order {
        Orthogonalization::Parallel => parallel(z, cfg, &mut rng)?,
        Orthogonalization::Sequential => sequential(z, cfg, &mut rng),
    };
    let kurtosis = [excess_kurtosis(z, w.row(0)), excess_kurtosis(z, w.row(1))];
    let threshold = gaussianity_threshold(z[0].len());
    Ok(FastIcaResult {
        w,
        converged,
        iterations,
        kurtosis,
        identifiable: kurtosis.iter().any(|k| k.abs() >= threshold),
    })
}

fn parallel(z: &[Vec<f64>; 2], cfg: &IcaConfig, rng: &mut ChaCha8Rng) -> Result<(Mat2, bool, usize)> {
    let init = Mat2([random_unit(rng), random_unit(rng)]);
    let mut w = symmetric_decorrelation(&init).unwrap_or(Mat2::IDENTITY);
    for it in 1..=cfg.max_iterations {
        let next = Mat2([
            unit_update(z, w.row(0), cfg.a2),
            unit_update(z, w.row(1), cfg.a2),
        ]);
        let next = symmetric_decorrelation(&next)
            .ok_or_else(|| Error::Degenerate("fixed-point update collapsed to rank < 2".into()))?;
        let worst = (0..2)
            .map(|i| dot2(next.row(i), w.row(i)).abs())
            .fold(f64::INFINITY, f64::min);
        w = next;
        if worst > 1.0 - cfg.convergence_tol {
            return Ok((w, true, it));
        }
    }
    Ok((w, false, cfg.max_iterations))
}

fn sequential(z: &[Vec<f64>; 2], cfg: &IcaConfig, rng: &mut ChaCha8Rng) -> (Mat2, bool, usize) {
    let mut rows: Vec<[f64; 2]> = Vec::with_capacity(2);
    let mut all_converged = true;
    let mut total = 0;
    for _ in 0..2 {
        let project = |v: [f64; 2], rows: &[[f64; 2]]| {
            let mut v = v;
            for r in rows {
                let p = dot2(v, *r);
                v = [v[0] - p * r[0], v[1] - p * r[1]];
            }
            normalize(v)
        };
        let mut w = project(random_unit(rng), &rows);
        let mut converged = false;
        let mut iters = cfg.max_iterations;
        for it in 1..=cfg.max_iterations {
            let next = project(unit_update(z, w, cfg.a2), &rows);
            let c = dot2(next, w).abs();
            w = next;
            if c > 1.0 - cfg.convergence_tol {
                converged = true;
                iters = it;
                break;
            }
        }
        all_converged &= converged;
        total += iters;
        rows.push(w);
    }
    (Mat2([rows[0], rows[1]]), all_converged, total)
}
