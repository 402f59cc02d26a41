//! Adaptive Dormand-Prince 5(4) integration over complex vectors and
//! matrices, with sample-time interpolation avoided by stepping exactly onto
//! every requested sample.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use super::DynamicsError;

/// Minimal linear-space interface the integrator needs.
pub trait OdeState: Clone {
    /// `self += a * x`
    fn axpy(&mut self, a: f64, x: &Self);
    fn zeros_like(&self) -> Self;
    fn inf_norm(&self) -> f64;
}

impl OdeState for Array1<C64> {
    fn axpy(&mut self, a: f64, x: &Self) {
        self.scaled_add(C64::new(a, 0.0), x);
    }
    fn zeros_like(&self) -> Self {
        Array1::zeros(self.raw_dim())
    }
    fn inf_norm(&self) -> f64 {
        self.iter().fold(0.0f64, |m, z| m.max(z.norm_sqr())).sqrt()
    }
}

impl OdeState for Array2<C64> {
    fn axpy(&mut self, a: f64, x: &Self) {
        self.scaled_add(C64::new(a, 0.0), x);
    }
    fn zeros_like(&self) -> Self {
        Array2::zeros(self.raw_dim())
    }
    fn inf_norm(&self) -> f64 {
        self.iter().fold(0.0f64, |m, z| m.max(z.norm_sqr())).sqrt()
    }
}

// Dormand-Prince coefficients.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 6] = [
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// 5th-order weights (row 7 equals the last A row: FSAL tableau).
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
/// Error weights b5 - b4.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const MAX_STEPS: usize = 50_000_000;

/// Integrates `y' = rhs(t, y)` through the strictly increasing `times`,
/// invoking `on_sample(sample_index, t, y)` at each entry (including the
/// first). `max_step` bounds the step size (for resolving known oscillation
/// frequencies).
pub fn integrate<S, F, G>(
    mut rhs: F,
    y0: &S,
    times: &[f64],
    rel_tol: f64,
    max_step: Option<f64>,
    mut on_sample: G,
) -> Result<(), DynamicsError>
where
    S: OdeState,
    F: FnMut(f64, &S) -> S,
    G: FnMut(usize, f64, &S),
{
    let span = times[times.len() - 1] - times[0];
    let cap = max_step.unwrap_or(f64::INFINITY);
    let min_step = span * 1e-15;

    let mut t = times[0];
    let mut y = y0.clone();
    on_sample(0, t, &y);

    let mut dt = (span / 256.0).min(cap);
    let mut steps = 0usize;

    for (si, &ts) in times.iter().enumerate().skip(1) {
        while ts - t > span * 1e-14 {
            let h = dt.min(cap).min(ts - t);
            steps += 1;
            if steps > MAX_STEPS {
                return Err(DynamicsError::ToleranceNotMet { t, achieved: f64::NAN });
            }

            // stages
            let mut k: Vec<S> = Vec::with_capacity(7);
            k.push(rhs(t, &y));
            for i in 0..6 {
                let mut yi = y.clone();
                for (j, kj) in k.iter().enumerate() {
                    let a = A[i][j];
                    if a != 0.0 {
                        yi.axpy(h * a, kj);
                    }
                }
                k.push(rhs(t + C[i + 1] * h, &yi));
            }

            // 5th-order solution and embedded error estimate
            let mut y_new = y.clone();
            for (j, kj) in k.iter().enumerate() {
                if B5[j] != 0.0 {
                    y_new.axpy(h * B5[j], kj);
                }
            }
            let mut err = y.zeros_like();
            for (j, kj) in k.iter().enumerate() {
                if E[j] != 0.0 {
                    err.axpy(h * E[j], kj);
                }
            }

            let sc = rel_tol * (1.0 + y_new.inf_norm());
            let ratio = err.inf_norm() / sc;

            if ratio <= 1.0 {
                t += h;
                y = y_new;
                let grow = if ratio > 0.0 {
                    (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0)
                } else {
                    5.0
                };
                dt = (h * grow).min(cap);
            } else {
                let shrink = (0.9 * ratio.powf(-0.2)).clamp(0.1, 0.9);
                dt = h * shrink;
                if dt < min_step {
                    return Err(DynamicsError::ToleranceNotMet { t, achieved: ratio });
                }
            }
        }
        t = ts;
        on_sample(si, t, &y);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;

    #[test]
    fn exponential_decay_scalar() {
        // y' = -y, y(0) = 1 -> y(t) = e^{-t}
        let y0 = array![C64::new(1.0, 0.0)];
        let times = [0.0, 0.5, 1.0, 2.0];
        let mut got = Vec::new();
        integrate(
            |_t, y: &Array1<C64>| y.mapv(|z| -z),
            &y0,
            &times,
            1e-10,
            None,
            |_, _, y| got.push(y[0].re),
        )
        .unwrap();
        for (i, &t) in times.iter().enumerate() {
            assert_relative_eq!(got[i], (-t as f64).exp(), max_relative = 1e-8);
        }
    }

    #[test]
    fn rotation_in_complex_plane() {
        // y' = i*omega*y -> |y| constant, phase omega*t
        let w = 3.0;
        let y0 = array![C64::new(1.0, 0.0)];
        let times: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let mut fin = C64::new(0.0, 0.0);
        integrate(
            |_t, y: &Array1<C64>| y.mapv(|z| C64::new(0.0, w) * z),
            &y0,
            &times,
            1e-12,
            None,
            |_, _, y| fin = y[0],
        )
        .unwrap();
        assert_relative_eq!(fin.re, (w * 1.0f64).cos(), max_relative = 1e-9);
        assert_relative_eq!(fin.im, (w * 1.0f64).sin(), max_relative = 1e-9);
    }

    #[test]
    fn max_step_respected_for_fast_drive() {
        // y' = cos(2*pi*f*t), integral known; without the max-step bound the
        // first trial step could overshoot the oscillation entirely.
        let f = 50.0;
        let y0 = array![C64::new(0.0, 0.0)];
        let times = [0.0, 1.0];
        let mut fin = 0.0;
        integrate(
            |t, _y: &Array1<C64>| array![C64::new((crate::TAU * f * t).cos(), 0.0)],
            &y0,
            &times,
            1e-10,
            Some(1.0 / (20.0 * f)),
            |_, _, y| fin = y[0].re,
        )
        .unwrap();
        assert_relative_eq!(
            fin,
            (crate::TAU * f * 1.0).sin() / (crate::TAU * f),
            epsilon = 1e-9
        );
    }
}
