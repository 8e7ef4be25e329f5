//! Adaptive Dormand–Prince 5(4) stepper for small fixed-size systems.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t:e} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("step limit reached at t = {t:e}")]
    TooManySteps { t: f64 },
    #[error("non-finite derivative at t = {t:e}")]
    NonFinite { t: f64 },
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights (equal to the last row of A).
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;
const MAX_STEPS: usize = 5_000_000;

/// Advance `y` from `t0` to exactly `t1`. `h` carries the step size between
/// calls; a non-positive value asks for a default first step.
pub fn integrate<const N: usize, F>(
    mut f: F,
    t0: f64,
    y: [f64; N],
    t1: f64,
    h: &mut f64,
    tol: Tolerances,
) -> Result<[f64; N], OdeError>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let span = t1 - t0;
    if span <= 0.0 {
        return Ok(y);
    }
    if !(*h > 0.0) {
        *h = span / 100.0;
    }
    let mut t = t0;
    let mut y = y;
    let mut k = [[0.0; N]; 7];
    for _ in 0..MAX_STEPS {
        let last = t + *h >= t1;
        let step = if last { t1 - t } else { *h };
        for s in 0..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                for i in 0..N {
                    ys[i] += step * A[s][j] * kj[i];
                }
            }
            k[s] = f(t + C[s] * step, &ys);
            if k[s].iter().any(|v| !v.is_finite()) {
                return Err(OdeError::NonFinite { t });
            }
        }
        let mut y5 = y;
        let mut err2 = 0.0;
        for i in 0..N {
            let (mut d5, mut d4) = (0.0, 0.0);
            for s in 0..7 {
                d5 += B5[s] * k[s][i];
                d4 += B4[s] * k[s][i];
            }
            y5[i] += step * d5;
            let scale = tol.abs + tol.rel * y[i].abs().max(y5[i].abs());
            err2 += (step * (d5 - d4) / scale).powi(2);
        }
        let err = (err2 / N as f64).sqrt();
        let factor = if err == 0.0 { MAX_FACTOR } else { (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR) };
        if err <= 1.0 {
            t += step;
            y = y5;
            if last {
                // Keep the proposed size: the shortened final step says nothing.
                *h = (*h).max(step * factor);
                return Ok(y);
            }
            *h = step * factor;
        } else {
            *h = step * factor.min(1.0);
            if *h < 1e-14 * t.abs().max(span) {
                return Err(OdeError::StepUnderflow { t, h: *h });
            }
        }
    }
    Err(OdeError::TooManySteps { t })
}
