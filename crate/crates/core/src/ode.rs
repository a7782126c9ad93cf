//! Dormand–Prince 5(4) with adaptive step size control.
//!
//! The integrator lands exactly on every requested output time by shortening
//! the step that would cross it, so no interpolation is involved in sampled
//! output.

use crate::error::{Error, Result};

// Butcher tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Fifth-order weights minus the embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

/// Outcome of the caller's check on a trial step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepCheck {
    /// Keep the (possibly adjusted) state.
    Accept,
    /// Keep the state; it was modified, so the derivative must be re-evaluated.
    Adjusted,
    /// Discard the step and retry with half the step size.
    Reject,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DormandPrince {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Largest step allowed, in units of the independent variable.
    pub max_step: f64,
}

impl Default for DormandPrince {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            max_steps: 5_000_000,
            max_step: f64::INFINITY,
        }
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (a, k) in terms {
            acc += a * k[i];
        }
        *o += h * acc;
    }
    out
}

impl DormandPrince {
    /// Integrate `y' = f(t, y)` from `(t0, y0)` through each of `outputs`
    /// (ascending, all `>= t0`), calling `emit(t, &y)` at every output time.
    ///
    /// `check` sees every trial state before acceptance.
    pub fn solve<const N: usize, F, C, E>(
        &self,
        mut f: F,
        t0: f64,
        y0: [f64; N],
        outputs: &[f64],
        mut check: C,
        mut emit: E,
    ) -> Result<[f64; N]>
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
        C: FnMut(f64, &mut [f64; N]) -> StepCheck,
        E: FnMut(f64, &[f64; N]),
    {
        if outputs.windows(2).any(|w| !(w[1] >= w[0])) || outputs.first().is_some_and(|&t| t < t0) {
            return Err(Error::InvalidInput(
                "output times must be ascending and not before t0".into(),
            ));
        }
        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(t, &y);
        let mut h = match outputs.last() {
            Some(&t_end) if t_end > t0 => self.initial_step(&mut f, t, &y, &k1, t_end - t0),
            _ => 0.0,
        };
        let mut steps = 0usize;

        for &target in outputs {
            while t < target {
                if steps >= self.max_steps {
                    return Err(Error::TooManySteps {
                        t,
                        max_steps: self.max_steps,
                    });
                }
                let remaining = target - t;
                let last = h >= remaining;
                let step = if last { remaining } else { h };
                if step <= 1e-12 * t.abs().max(1.0) && !last {
                    return Err(Error::StepUnderflow { t });
                }

                let k2 = f(t + C2 * step, &axpy(&y, step, &[(A21, &k1)]));
                let k3 = f(t + C3 * step, &axpy(&y, step, &[(A31, &k1), (A32, &k2)]));
                let k4 = f(
                    t + C4 * step,
                    &axpy(&y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
                );
                let k5 = f(
                    t + C5 * step,
                    &axpy(&y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
                );
                let k6 = f(
                    t + step,
                    &axpy(
                        &y,
                        step,
                        &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                    ),
                );
                let mut y_new = axpy(
                    &y,
                    step,
                    &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
                );
                let t_new = if last { target } else { t + step };
                let k7 = f(t_new, &y_new);
                steps += 1;

                let mut err_sq = 0.0;
                for i in 0..N {
                    let e = step
                        * (E1 * k1[i]
                            + E3 * k3[i]
                            + E4 * k4[i]
                            + E5 * k5[i]
                            + E6 * k6[i]
                            + E7 * k7[i]);
                    let scale = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                    err_sq += (e / scale).powi(2);
                }
                let err = (err_sq / N as f64).sqrt();
                if !err.is_finite() {
                    h = 0.5 * step;
                    continue;
                }
                if err > 1.0 {
                    h = step * (SAFETY * err.powf(-0.2)).max(MIN_FACTOR);
                    continue;
                }

                let refresh = match check(t_new, &mut y_new) {
                    StepCheck::Reject => {
                        h = 0.5 * step;
                        continue;
                    }
                    StepCheck::Adjusted => true,
                    StepCheck::Accept => false,
                };

                let factor = if err == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
                };
                // A step shortened to hit an output time says little about the
                // natural step size; keep the previous proposal.
                let proposal = if last && step < h { h } else { step * factor };
                h = proposal.min(self.max_step);
                t = t_new;
                y = y_new;
                k1 = if refresh { f(t, &y) } else { k7 };
            }
            emit(t, &y);
        }
        Ok(y)
    }

    fn initial_step<const N: usize, F>(
        &self,
        f: &mut F,
        t: f64,
        y: &[f64; N],
        k1: &[f64; N],
        span: f64,
    ) -> f64
    where
        F: FnMut(f64, &[f64; N]) -> [f64; N],
    {
        // Hairer, Nørsett & Wanner's starting-step heuristic.
        let scale = |i: usize| self.atol + self.rtol * y[i].abs();
        let norm = |v: &dyn Fn(usize) -> f64| {
            ((0..N).map(|i| (v(i) / scale(i)).powi(2)).sum::<f64>() / N as f64).sqrt()
        };
        let d0 = norm(&|i| y[i]);
        let d1 = norm(&|i| k1[i]);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let h0 = h0.min(span).min(self.max_step);
        let y1 = axpy(y, h0, &[(1.0, k1)]);
        let k2 = f(t + h0, &y1);
        let d2 = norm(&|i| k2[i] - k1[i]) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(span).min(self.max_step)
    }
}
