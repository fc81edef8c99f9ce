//! Small numeric helpers shared across modules.
//!
//! Reduction order is fixed everywhere (parallel maps collect in index order,
//! then fold sequentially), so results are bit-identical across thread
//! counts. Compensated summation keeps the long accumulations accurate.

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    compensated_sum(values.iter().copied()) / values.len() as f64
}

/// Two-pass sample variance (ddof = 1) over the finite entries.
/// Returns `(n_finite, variance)`; variance is NaN when `n_finite < 2`.
pub(crate) fn sample_variance_finite(values: &[f64]) -> (usize, f64) {
    let mut n = 0usize;
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &x in values {
        if x.is_finite() {
            n += 1;
            let t = sum + x;
            if sum.abs() >= x.abs() {
                comp += (sum - t) + x;
            } else {
                comp += (x - t) + sum;
            }
            sum = t;
        }
    }
    if n < 2 {
        return (n, f64::NAN);
    }
    let m = (sum + comp) / n as f64;
    let ss = compensated_sum(values.iter().filter(|x| x.is_finite()).map(|&x| {
        let d = x - m;
        d * d
    }));
    (n, ss / (n - 1) as f64)
}

/// Format with nine significant digits, the precision of the TSV outputs.
pub(crate) fn fmt_sig9(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.8e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancellation() {
        // 1 + 1e16 - 1e16 loses the 1 under naive summation
        let xs = [1.0, 1e16, -1e16];
        assert_eq!(compensated_sum(xs.iter().copied()), 1.0);
    }

    #[test]
    fn variance_ignores_nan() {
        let (n, v) = sample_variance_finite(&[1.0, f64::NAN, 3.0]);
        assert_eq!(n, 2);
        assert!((v - 2.0).abs() < 1e-15);
    }

    #[test]
    fn variance_undefined_below_two_points() {
        let (n, v) = sample_variance_finite(&[f64::NAN, 2.0]);
        assert_eq!(n, 1);
        assert!(v.is_nan());
    }

    #[test]
    fn sig9_has_nine_significant_digits() {
        assert_eq!(fmt_sig9(0.05), "5.00000000e-2");
        assert_eq!(fmt_sig9(1.0 / 2001.0), "4.99750125e-4");
        assert_eq!(fmt_sig9(f64::NAN), "nan");
    }
}
