use std::f64::consts::PI;

/// log(exp(a) + exp(b)) without overflow; handles -inf operands.
#[inline]
pub(crate) fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

#[inline]
pub(crate) fn safe_ln(p: f64) -> f64 {
    if p > 0.0 {
        p.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// Log density of a diagonal-covariance Gaussian.
pub(crate) fn diag_gaussian_log_pdf(x: &[f64], mean: &[f64], var: &[f64]) -> f64 {
    let mut acc = 0.0;
    for ((&xi, &mi), &vi) in x.iter().zip(mean).zip(var) {
        let d = xi - mi;
        acc += (2.0 * PI * vi).ln() + d * d / vi;
    }
    -0.5 * acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_add_matches_direct() {
        let v = log_add(0.2f64.ln(), 0.3f64.ln());
        assert!((v - 0.5f64.ln()).abs() < 1e-15);
        assert_eq!(log_add(f64::NEG_INFINITY, 1.5), 1.5);
        assert_eq!(log_add(f64::NEG_INFINITY, f64::NEG_INFINITY), f64::NEG_INFINITY);
    }

    #[test]
    fn unit_gaussian_at_mean() {
        let v = diag_gaussian_log_pdf(&[0.0], &[0.0], &[1.0]);
        assert!((v + 0.5 * (2.0 * PI).ln()).abs() < 1e-15);
    }
}
