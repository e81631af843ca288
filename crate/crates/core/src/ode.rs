//! Adaptive Dormand–Prince 5(4) integrator with a 4th-order continuous extension.
//!
//! States are fixed-size real arrays so the control equations (2 states) and the real/imaginary
//! split of the four-level Schrödinger equation (8 states) run without heap allocation per step.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Right-hand side of `dy/dt = f(t, y)`.
pub trait OdeSystem<T: Real, const N: usize> {
    fn rhs(&self, t: T, y: &[T; N]) -> [T; N];
}

impl<T: Real, const N: usize, F> OdeSystem<T, N> for F
where
    F: Fn(T, &[T; N]) -> [T; N],
{
    fn rhs(&self, t: T, y: &[T; N]) -> [T; N] {
        self(t, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances<T> {
    pub abs: T,
    pub rel: T,
}

impl<T: Real> Tolerances<T> {
    pub fn new(abs: T, rel: T) -> Self {
        Self { abs, rel }
    }

    pub fn uniform(tol: T) -> Self {
        Self { abs: tol, rel: tol }
    }
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Self::uniform(T::lit(1e-10))
    }
}

/// Whether integration should go on after an accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

/// One accepted step together with its dense interpolant.
#[derive(Debug, Clone)]
pub struct DenseStep<T, const N: usize> {
    pub t0: T,
    pub t1: T,
    pub y0: [T; N],
    pub y1: [T; N],
    /// Slope at `t1` (first stage of the next step).
    pub f1: [T; N],
    r3: [T; N],
    r4: [T; N],
    r5: [T; N],
}

impl<T: Real, const N: usize> DenseStep<T, N> {
    pub fn h(&self) -> T {
        self.t1 - self.t0
    }

    /// Interpolated state at `t` within `[t0, t1]`.
    pub fn interpolate(&self, t: T) -> [T; N] {
        let s = (t - self.t0) / self.h();
        let s1 = T::one() - s;
        std::array::from_fn(|i| {
            let r2 = self.y1[i] - self.y0[i];
            self.y0[i] + s * (r2 + s1 * (self.r3[i] + s * (self.r4[i] + s1 * self.r5[i])))
        })
    }

    pub fn contains(&self, t: T) -> bool {
        if self.t1 >= self.t0 {
            t >= self.t0 && t <= self.t1
        } else {
            t <= self.t0 && t >= self.t1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome<T, const N: usize> {
    pub t: T,
    pub y: [T; N],
    pub accepted: usize,
    pub rejected: usize,
    /// True when the step callback asked to stop before `t_end`.
    pub stopped: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct Dopri5<T> {
    pub tol: Tolerances<T>,
    /// Magnitude below which a step counts as underflow.
    pub h_min: T,
    pub h_max: Option<T>,
    pub max_steps: usize,
}

impl<T: Real> Default for Dopri5<T> {
    fn default() -> Self {
        Self::new(Tolerances::default())
    }
}

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
// Error weights (5th minus embedded 4th order).
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Continuous extension.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn combine<T: Real, const N: usize>(y: &[T; N], h: T, terms: &[(f64, &[T; N])]) -> [T; N] {
    std::array::from_fn(|i| {
        let mut acc = T::zero();
        for (c, k) in terms {
            acc += T::lit(*c) * k[i];
        }
        y[i] + h * acc
    })
}

fn all_finite<T: Real, const N: usize>(y: &[T; N]) -> bool {
    y.iter().all(|v| v.is_finite())
}

impl<T: Real> Dopri5<T> {
    pub fn new(tol: Tolerances<T>) -> Self {
        Self {
            tol,
            h_min: T::lit(1e-12),
            h_max: None,
            max_steps: 50_000_000,
        }
    }

    pub fn with_h_max(mut self, h_max: T) -> Self {
        self.h_max = Some(h_max);
        self
    }

    fn error_norm<const N: usize>(&self, y0: &[T; N], y1: &[T; N], err: &[T; N]) -> T {
        let mut acc = T::zero();
        for i in 0..N {
            let scale = self.tol.abs + self.tol.rel * y0[i].abs().max(y1[i].abs());
            let r = err[i] / scale;
            acc += r * r;
        }
        (acc / T::from_usize(N).unwrap()).sqrt()
    }

    fn initial_step<S: OdeSystem<T, N>, const N: usize>(&self, sys: &S, t0: T, y0: &[T; N], f0: &[T; N], dir: T) -> T {
        let scale = |i: usize| self.tol.abs + self.tol.rel * y0[i].abs();
        let rms = |v: &dyn Fn(usize) -> T| {
            let mut acc = T::zero();
            for i in 0..N {
                let r = v(i);
                acc += r * r;
            }
            (acc / T::from_usize(N).unwrap()).sqrt()
        };
        let d0 = rms(&|i| y0[i] / scale(i));
        let d1 = rms(&|i| f0[i] / scale(i));
        let tiny = T::lit(1e-5);
        let mut h0 = if d0 < tiny || d1 < tiny {
            T::lit(1e-6)
        } else {
            T::lit(0.01) * d0 / d1
        };
        if let Some(hm) = self.h_max {
            h0 = h0.min(hm);
        }
        let y1: [T; N] = std::array::from_fn(|i| y0[i] + dir * h0 * f0[i]);
        let f1 = sys.rhs(t0 + dir * h0, &y1);
        let d2 = rms(&|i| (f1[i] - f0[i]) / scale(i)) / h0;
        let dmax = d1.max(d2);
        let h1 = if dmax <= T::lit(1e-15) {
            (h0 * T::lit(1e-3)).max(T::lit(1e-6))
        } else {
            (T::lit(0.01) / dmax).powf(T::lit(0.2))
        };
        let mut h = (T::lit(100.0) * h0).min(h1);
        if let Some(hm) = self.h_max {
            h = h.min(hm);
        }
        if !h.is_finite() || h <= T::zero() {
            T::lit(1e-6)
        } else {
            h
        }
    }

    /// Integrates from `(t0, y0)` to `t_end` (either direction), handing every accepted step to
    /// `on_step`. Returns the final state, or the state at which `on_step` stopped.
    pub fn integrate<S, F, const N: usize>(
        &self,
        sys: &S,
        t0: T,
        y0: [T; N],
        t_end: T,
        mut on_step: F,
    ) -> Result<Outcome<T, N>>
    where
        S: OdeSystem<T, N>,
        F: FnMut(&DenseStep<T, N>) -> Result<Flow>,
    {
        if !all_finite(&y0) {
            return Err(Error::NonFiniteState { tau: t0.to_f64_lossy() });
        }
        let mut outcome = Outcome {
            t: t0,
            y: y0,
            accepted: 0,
            rejected: 0,
            stopped: false,
        };
        if t_end == t0 {
            return Ok(outcome);
        }
        let dir = if t_end > t0 { T::one() } else { -T::one() };
        let span = (t_end - t0).abs();

        let mut t = t0;
        let mut y = y0;
        let mut k1 = sys.rhs(t, &y);
        if !all_finite(&k1) {
            return Err(Error::NonFiniteState { tau: t.to_f64_lossy() });
        }
        let mut h_abs = self.initial_step(sys, t, &y, &k1, dir).min(span);
        let mut last_rejected = false;

        loop {
            if outcome.accepted + outcome.rejected >= self.max_steps {
                return Err(Error::TooManySteps(self.max_steps));
            }
            let remaining = (t_end - t).abs();
            let mut last = false;
            if h_abs >= remaining {
                h_abs = remaining;
                last = true;
            }
            if h_abs < self.h_min && !last {
                return Err(Error::StepUnderflow {
                    tau: t.to_f64_lossy(),
                    step: h_abs.to_f64_lossy(),
                });
            }
            let h = dir * h_abs;

            let k2 = sys.rhs(t + T::lit(C2) * h, &combine(&y, h, &[(A21, &k1)]));
            let k3 = sys.rhs(t + T::lit(C3) * h, &combine(&y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = sys.rhs(
                t + T::lit(C4) * h,
                &combine(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
            );
            let k5 = sys.rhs(
                t + T::lit(C5) * h,
                &combine(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = sys.rhs(
                t + h,
                &combine(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y_new = combine(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let t_new = if last { t_end } else { t + h };
            let k7 = sys.rhs(t_new, &y_new);

            let err: [T; N] = std::array::from_fn(|i| {
                h * (T::lit(E1) * k1[i]
                    + T::lit(E3) * k3[i]
                    + T::lit(E4) * k4[i]
                    + T::lit(E5) * k5[i]
                    + T::lit(E6) * k6[i]
                    + T::lit(E7) * k7[i])
            });
            let err_norm = self.error_norm(&y, &y_new, &err);

            if !err_norm.is_finite() || !all_finite(&y_new) || !all_finite(&k7) {
                outcome.rejected += 1;
                h_abs *= T::lit(0.2);
                last_rejected = true;
                if h_abs < self.h_min {
                    return Err(Error::StepUnderflow {
                        tau: t.to_f64_lossy(),
                        step: h_abs.to_f64_lossy(),
                    });
                }
                continue;
            }

            if err_norm <= T::one() {
                let r3: [T; N] = std::array::from_fn(|i| h * k1[i] - (y_new[i] - y[i]));
                let r4: [T; N] = std::array::from_fn(|i| (y_new[i] - y[i]) - h * k7[i] - r3[i]);
                let r5: [T; N] = std::array::from_fn(|i| {
                    h * (T::lit(D1) * k1[i]
                        + T::lit(D3) * k3[i]
                        + T::lit(D4) * k4[i]
                        + T::lit(D5) * k5[i]
                        + T::lit(D6) * k6[i]
                        + T::lit(D7) * k7[i])
                });
                let step = DenseStep {
                    t0: t,
                    t1: t_new,
                    y0: y,
                    y1: y_new,
                    f1: k7,
                    r3,
                    r4,
                    r5,
                };
                outcome.accepted += 1;
                t = t_new;
                y = y_new;
                k1 = k7;
                outcome.t = t;
                outcome.y = y;
                if on_step(&step)? == Flow::Stop {
                    outcome.stopped = true;
                    return Ok(outcome);
                }
                if last {
                    return Ok(outcome);
                }
                let mut factor = T::lit(0.9) * err_norm.max(T::lit(1e-10)).powf(T::lit(-0.2));
                factor = factor.min(T::lit(5.0)).max(T::lit(0.2));
                if last_rejected {
                    factor = factor.min(T::one());
                }
                h_abs *= factor;
                if let Some(hm) = self.h_max {
                    h_abs = h_abs.min(hm);
                }
                last_rejected = false;
            } else {
                outcome.rejected += 1;
                let factor = (T::lit(0.9) * err_norm.powf(T::lit(-0.2))).max(T::lit(0.2));
                h_abs *= factor;
                last_rejected = true;
                if h_abs < self.h_min {
                    return Err(Error::StepUnderflow {
                        tau: t.to_f64_lossy(),
                        step: h_abs.to_f64_lossy(),
                    });
                }
            }
        }
    }

    /// Integrates and evaluates the dense output on `grid` (monotone in the integration direction,
    /// all points between `t0` and `t_end`).
    pub fn integrate_on_grid<S, const N: usize>(&self, sys: &S, t0: T, y0: [T; N], grid: &[T]) -> Result<Vec<[T; N]>>
    where
        S: OdeSystem<T, N>,
    {
        let mut out = Vec::with_capacity(grid.len());
        let mut idx = 0;
        while idx < grid.len() && grid[idx] == t0 {
            out.push(y0);
            idx += 1;
        }
        let Some(&t_end) = grid.last() else {
            return Ok(out);
        };
        self.integrate(sys, t0, y0, t_end, |step| {
            while idx < grid.len() && step.contains(grid[idx]) {
                out.push(if grid[idx] == step.t1 {
                    step.y1
                } else {
                    step.interpolate(grid[idx])
                });
                idx += 1;
            }
            Ok(Flow::Continue)
        })?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn harmonic_oscillator_matches_closed_form() {
        let sys = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let solver = Dopri5::new(Tolerances::uniform(1e-12));
        let out = solver
            .integrate(&sys, 0.0, [1.0, 0.0], 20.0, |_| Ok(Flow::Continue))
            .unwrap();
        assert_abs_diff_eq!(out.y[0], 20f64.cos(), epsilon = 1e-9);
        assert_abs_diff_eq!(out.y[1], -20f64.sin(), epsilon = 1e-9);
        assert!(!out.stopped);
    }

    #[test]
    fn dense_output_is_accurate_between_steps() {
        let sys = |_t: f64, y: &[f64; 1]| [y[0]];
        let solver = Dopri5::new(Tolerances::uniform(1e-11));
        let grid: Vec<f64> = (0..=40).map(|k| k as f64 * 0.05).collect();
        let ys = solver.integrate_on_grid(&sys, 0.0, [1.0], &grid).unwrap();
        assert_eq!(ys.len(), grid.len());
        for (t, y) in grid.iter().zip(&ys) {
            assert_abs_diff_eq!(y[0], t.exp(), epsilon = 1e-9 * t.exp());
        }
    }

    #[test]
    fn backward_integration() {
        let sys = |_t: f64, y: &[f64; 1]| [-2.0 * y[0]];
        let solver = Dopri5::new(Tolerances::uniform(1e-12));
        let out = solver
            .integrate(&sys, 1.0, [1.0], -1.0, |_| Ok(Flow::Continue))
            .unwrap();
        assert_abs_diff_eq!(out.y[0], 4f64.exp(), epsilon = 1e-8);
    }

    #[test]
    fn blow_up_underflows_step() {
        // y' = y², y(0) = 1 blows up at t = 1.
        let sys = |_t: f64, y: &[f64; 1]| [y[0] * y[0]];
        let solver = Dopri5::new(Tolerances::uniform(1e-10));
        let err = solver
            .integrate(&sys, 0.0, [1.0], 2.0, |_| Ok(Flow::Continue))
            .unwrap_err();
        match err {
            Error::StepUnderflow { tau, .. } => assert!((tau - 1.0).abs() < 1e-6, "tau = {tau}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn callback_can_stop() {
        let sys = |_t: f64, y: &[f64; 1]| [y[0] * y[0]];
        let solver = Dopri5::new(Tolerances::uniform(1e-10));
        let out = solver
            .integrate(&sys, 0.0, [1.0], 2.0, |s| {
                Ok(if s.y1[0] > 1e3 { Flow::Stop } else { Flow::Continue })
            })
            .unwrap();
        assert!(out.stopped);
        assert!(out.t < 1.0 && out.t > 0.99);
    }

    #[test]
    fn rejects_non_finite_start() {
        let sys = |_t: f64, y: &[f64; 1]| [y[0]];
        let solver = Dopri5::<f64>::default();
        assert!(matches!(
            solver.integrate(&sys, 0.0, [f64::NAN], 1.0, |_| Ok(Flow::Continue)),
            Err(Error::NonFiniteState { .. })
        ));
    }
}
