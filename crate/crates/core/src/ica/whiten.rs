use crate::error::{Error, Result};
use crate::linalg::{sym_eigen, Mat2};

pub const MIN_WHITEN_SAMPLES: usize = 32;

/// Centered, whitened pair with the transform that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Whitened {
    pub data: [Vec<f64>; 2],
    /// `z = B (x - means)`.
    pub whitening: Mat2,
    pub means: [f64; 2],
}

pub(crate) fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Population covariance of two equal-length series.
pub(crate) fn covariance(a: &[f64], b: &[f64], means: [f64; 2]) -> Mat2 {
    let n = a.len() as f64;
    let (mut saa, mut sab, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - means[0], y - means[1]);
        saa += dx * dx;
        sab += dx * dy;
        sbb += dy * dy;
    }
    Mat2::new(saa / n, sab / n, sab / n, sbb / n)
}

/// Centers a pair and maps it to identity covariance with `B = D^{-1/2} E^T`
/// from the eigen-decomposition `C = E D E^T` of the sample covariance.
pub fn center_whiten(a: &[f64], b: &[f64]) -> Result<Whitened> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(format!(
            "pair channels have {} and {} samples",
            a.len(),
            b.len()
        )));
    }
    if a.len() < MIN_WHITEN_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "whitening needs at least {MIN_WHITEN_SAMPLES} samples, got {}",
            a.len()
        )));
    }
    let means = [mean(a), mean(b)];
    let cov = covariance(a, b, means);
    for (i, v) in [cov.get(0, 0), cov.get(1, 1)].into_iter().enumerate() {
        let scale = means[i].abs().max(1.0);
        if !(v > (scale * 1e-12).powi(2)) {
            return Err(Error::Degenerate(format!("channel {} has zero variance", i + 1)));
        }
    }
    let ([l1, l2], e) = sym_eigen(&cov);
    if !(l2 > l1 * 1e-12) {
        return Err(Error::Degenerate(format!(
            "pair covariance is rank deficient (eigenvalues {l1:e}, {l2:e})"
        )));
    }
    let d = Mat2::new(1.0 / l1.sqrt(), 0.0, 0.0, 1.0 / l2.sqrt());
    let whitening = d.mul(&e.transpose());
    let (za, zb): (Vec<f64>, Vec<f64>) = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| {
            let z = whitening.apply([x - means[0], y - means[1]]);
            (z[0], z[1])
        })
        .unzip();
    Ok(Whitened {
        data: [za, zb],
        whitening,
        means,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn assert_white(w: &Whitened) {
        let [a, b] = &w.data;
        let m = [mean(a), mean(b)];
        assert!(m[0].abs() < 1e-10 && m[1].abs() < 1e-10, "{m:?}");
        let c = covariance(a, b, [0.0, 0.0]);
        assert!((c.get(0, 0) - 1.0).abs() < 1e-8);
        assert!((c.get(1, 1) - 1.0).abs() < 1e-8);
        assert!(c.get(0, 1).abs() < 1e-8);
    }

    #[test]
    fn white_input_stays_white() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a: Vec<f64> = (0..4000).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..4000).map(|_| rng.random_range(-1.0..1.0)).collect();
        let w = center_whiten(&a, &b).unwrap();
        assert_white(&w);
        // Var of U(-1,1) is 1/3, so B is close to sqrt(3) times a rotation.
        let btb = w.whitening.transpose().mul(&w.whitening);
        assert!((btb.get(0, 0) - 3.0).abs() < 0.3 && btb.get(0, 1).abs() < 0.3);
    }

    #[test]
    fn correlated_input_whitened() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s: Vec<[f64; 2]> = (0..2000)
            .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect();
        let a: Vec<f64> = s.iter().map(|v| 3.6 * v[0] + v[1] + 7.1).collect();
        let b: Vec<f64> = s.iter().map(|v| 0.4 * v[0] + v[1] - 3.2).collect();
        let w = center_whiten(&a, &b).unwrap();
        assert_white(&w);
        assert!((w.means[0] - 7.1).abs() < 0.2);
    }

    #[test]
    fn degenerate_inputs() {
        let a: Vec<f64> = (0..64).map(|i| (i as f64).sin()).collect();
        let b: Vec<f64> = a.iter().map(|v| -2.0 * v).collect();
        assert!(matches!(center_whiten(&a, &b), Err(Error::Degenerate(_))));
        let flat = vec![4.0; 64];
        assert!(matches!(center_whiten(&a, &flat), Err(Error::Degenerate(_))));
        assert!(matches!(center_whiten(&a[..31], &b[..31]), Err(Error::InsufficientData(_))));
    }
}
