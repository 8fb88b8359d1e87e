use nalgebra::{DMatrix, DVector};

pub(crate) struct OlsFit {
    pub beta: DVector<f64>,
    pub ssr: f64,
    /// Standard errors of the coefficients.
    pub se: DVector<f64>,
}

/// Least squares through a QR factorisation; `None` if the design is rank
/// deficient or leaves no residual degrees of freedom.
pub(crate) fn ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Option<OlsFit> {
    let (n, k) = x.shape();
    if n <= k {
        return None;
    }
    let qr = x.clone().qr();
    let r = qr.r();
    let rmax = r.diagonal().amax();
    if rmax == 0.0 || r.diagonal().iter().any(|d| d.abs() <= rmax * 1e-10) {
        return None;
    }
    let qty = qr.q().transpose() * y;
    let beta = r.solve_upper_triangular(&qty)?;
    let resid = y - x * &beta;
    let ssr = resid.norm_squared();
    let sigma2 = ssr / (n - k) as f64;
    let r_inv = r.solve_upper_triangular(&DMatrix::identity(k, k))?;
    // (X'X)^-1 = R^-1 R^-T
    let se = DVector::from_iterator(k, (0..k).map(|i| (sigma2 * r_inv.row(i).norm_squared()).sqrt()));
    Some(OlsFit { beta, ssr, se })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = DMatrix::from_fn(5, 2, |i, j| if j == 0 { 1.0 } else { i as f64 });
        let y = DVector::from_iterator(5, (0..5).map(|i| 2.0 + 3.0 * i as f64));
        let fit = ols(&x, &y).unwrap();
        assert!((fit.beta[0] - 2.0).abs() < 1e-12 && (fit.beta[1] - 3.0).abs() < 1e-12);
        assert!(fit.ssr < 1e-20);
    }

    #[test]
    fn standard_error_matches_closed_form() {
        // slope se = sqrt(s2 / Sxx)
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let ys = [0.1, 0.9, 2.2, 2.8, 4.1, 5.0];
        let x = DMatrix::from_fn(6, 2, |i, j| if j == 0 { 1.0 } else { xs[i] });
        let y = DVector::from_column_slice(&ys);
        let fit = ols(&x, &y).unwrap();
        let mx = 2.5;
        let sxx: f64 = xs.iter().map(|v| (v - mx) * (v - mx)).sum();
        let s2 = fit.ssr / 4.0;
        assert!((fit.se[1] - (s2 / sxx).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rank_deficient() {
        let x = DMatrix::from_fn(5, 2, |i, _| i as f64);
        let y = DVector::from_element(5, 1.0);
        assert!(ols(&x, &y).is_none());
    }
}
