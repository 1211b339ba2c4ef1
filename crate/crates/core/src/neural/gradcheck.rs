//! Central finite differences for validating the analytic backward passes.

/// Default step for central differences in 64-bit.
pub const STEP: f64 = 1e-5;

/// Numerical gradient of `f` at `x` by central differences with step `h`.
pub fn numerical_gradient<F>(mut f: F, x: &[f64], h: f64) -> Vec<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + h;
            let plus = f(&probe);
            probe[i] = orig - h;
            let minus = f(&probe);
            probe[i] = orig;
            (plus - minus) / (2.0 * h)
        })
        .collect()
}

/// `‖a − b‖₂ / (‖a‖₂ + ‖b‖₂)`, zero when both gradients vanish.
pub fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    let norm = |v: &mut dyn Iterator<Item = f64>| v.map(|x| x * x).sum::<f64>().sqrt();
    let diff = norm(&mut analytic.iter().zip(numeric).map(|(a, b)| a - b));
    let scale = norm(&mut analytic.iter().copied()) + norm(&mut numeric.iter().copied());
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic() {
        let x = [0.3, -1.1];
        let g = numerical_gradient(|v| v[0].powi(3) + 2.0 * v[0] * v[1], &x, STEP);
        let exact = [3.0 * 0.09 + 2.0 * -1.1, 2.0 * 0.3];
        assert!(relative_error(&exact, &g) < 1e-9);
    }

    #[test]
    fn zero_vs_zero() {
        assert_eq!(relative_error(&[0.0, 0.0], &[0.0, 0.0]), 0.0);
    }
}
