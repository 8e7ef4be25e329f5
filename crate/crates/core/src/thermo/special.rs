use std::f64::consts::PI;

use super::ThermoError;

/// Regularized lower incomplete gamma function P(3/2, x).
///
/// Closed form erf(√x) − (2/√π)√x e^(−x). Below x = 0.5 the two terms cancel
/// to O(x^(3/2)), so the power series of γ(3/2, x) is summed instead.
pub fn incomplete_gamma_p32(x: f64) -> Result<f64, ThermoError> {
    if x.is_nan() || x < 0.0 {
        return Err(ThermoError::Domain(format!("P(3/2, x) needs x >= 0, got {x}")));
    }
    Ok(p32_unchecked(x))
}

/// P(3/2, x) for x already known to be non-negative; negative input returns 0.
#[inline]
pub(crate) fn p32_unchecked(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < 0.5 {
        // γ(a, x) = x^a e^(−x) Σ x^n / (a (a+1) ... (a+n)), a = 3/2.
        let mut term = 1.0 / 1.5;
        let mut sum = term;
        let mut a = 1.5;
        for _ in 0..40 {
            a += 1.0;
            term *= x / a;
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        // Γ(3/2) = √π / 2
        return x * x.sqrt() * (-x).exp() * sum * 2.0 / PI.sqrt();
    }
    let s = x.sqrt();
    libm::erf(s) - 2.0 / PI.sqrt() * s * (-x).exp()
}
