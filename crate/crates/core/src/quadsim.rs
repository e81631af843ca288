//! Four-level forward integration under a synthesized schedule.
//!
//! The schedule is the only input shared with [`crate::synth`]: the Hamiltonian is rebuilt from
//! interpolated controls and the full state is propagated with `i dφ/dτ = ½ H(τ) φ`, so agreement
//! of the central amplitudes with the closed-form PT trajectory is an end-to-end check of the
//! control law.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::ode::{Dopri5, OdeSystem, Tolerances};
use crate::ptcore::{initial_amplitudes, PtParams};
use crate::scalar::Real;
use crate::synth::{initial_reservoir, ControlParams, ControlTrace};

pub type Mat4<T> = [[T; 4]; 4];

/// A sampled control value with its slope, for cubic Hermite interpolation.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Knot<T> {
    value: T,
    slope: T,
}

impl<T: Real> Knot<T> {
    /// Knot of `ln x` for a positive control `x` with slope `dx`.
    fn logarithmic(x: T, dx: T) -> Self {
        Self {
            value: x.ln(),
            slope: dx / x,
        }
    }
}

fn hermite<T: Real>(a: Knot<T>, b: Knot<T>, h: T, s: T) -> T {
    let s2 = s * s;
    let s3 = s2 * s;
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let h00 = two * s3 - three * s2 + T::one();
    let h10 = s3 - two * s2 + s;
    let h01 = three * s2 - two * s3;
    let h11 = s3 - s2;
    h00 * a.value + h10 * h * a.slope + h01 * b.value + h11 * h * b.slope
}

/// Interpolated controls at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleControls<T> {
    pub omega01: T,
    pub omega23: T,
    pub delta0: T,
    pub delta3: T,
}

/// Piecewise-cubic view of a control trace. Couplings are interpolated in `ln Ω`, which keeps them
/// positive up to the breakdown, detunings directly.
#[derive(Debug, Clone)]
pub struct Schedule<T> {
    params: ControlParams<T>,
    taus: Vec<T>,
    knots: Vec<[Knot<T>; 4]>,
}

impl<T: Real> Schedule<T> {
    pub fn from_trace(trace: &ControlTrace<T>) -> Result<Self> {
        if trace.samples.len() < 2 {
            return Err(Error::InvalidParameter {
                name: "samples",
                value: trace.samples.len() as f64,
                reason: "a schedule needs at least two samples",
            });
        }
        let taus = trace.samples.iter().map(|s| s.tau).collect();
        let knots = trace
            .samples
            .iter()
            .map(|s| {
                [
                    Knot::logarithmic(s.omega01, s.d_omega01),
                    Knot::logarithmic(s.omega23, s.d_omega23),
                    Knot {
                        value: s.delta0,
                        slope: s.d_delta0,
                    },
                    Knot {
                        value: s.delta3,
                        slope: s.d_delta3,
                    },
                ]
            })
            .collect();
        Ok(Self {
            params: trace.params,
            taus,
            knots,
        })
    }

    /// Keeps every `stride`-th knot (and always the last one).
    pub fn thinned(&self, stride: usize) -> Self {
        let stride = stride.max(1);
        let last = self.taus.len() - 1;
        let keep: Vec<usize> = (0..=last).filter(|i| i % stride == 0 || *i == last).collect();
        Self {
            params: self.params,
            taus: keep.iter().map(|&i| self.taus[i]).collect(),
            knots: keep.iter().map(|&i| self.knots[i]).collect(),
        }
    }

    pub fn params(&self) -> &ControlParams<T> {
        &self.params
    }

    pub fn pt(&self) -> &PtParams<T> {
        &self.params.pt
    }

    pub fn grid(&self) -> &[T] {
        &self.taus
    }

    pub fn span(&self) -> (T, T) {
        (self.taus[0], self.taus[self.taus.len() - 1])
    }

    fn out_of_span(&self, tau: T) -> Error {
        let (start, end) = self.span();
        Error::OutOfSpan {
            tau: tau.to_f64_lossy(),
            start: start.to_f64_lossy(),
            end: end.to_f64_lossy(),
        }
    }

    pub fn controls_at(&self, tau: T) -> Result<ScheduleControls<T>> {
        let (start, end) = self.span();
        if !(tau >= start && tau <= end) {
            return Err(self.out_of_span(tau));
        }
        let i = self.taus.partition_point(|&t| t <= tau).clamp(1, self.taus.len() - 1) - 1;
        let (t0, t1) = (self.taus[i], self.taus[i + 1]);
        let h = t1 - t0;
        let s = (tau - t0) / h;
        let a = &self.knots[i];
        let b = &self.knots[i + 1];
        Ok(ScheduleControls {
            omega01: hermite(a[0], b[0], h, s).exp(),
            omega23: hermite(a[1], b[1], h, s).exp(),
            delta0: hermite(a[2], b[2], h, s),
            delta3: hermite(a[3], b[3], h, s),
        })
    }

    /// Initial four-level state: target amplitudes plus the reservoir amplitudes they require.
    pub fn initial_state(&self) -> QuadState<T> {
        QuadState::embedded(&self.params)
    }
}

fn hamiltonian_from<T: Real>(c: &ScheduleControls<T>, lambda: T, omega03: T) -> Mat4<T> {
    let z = T::zero();
    [
        [c.delta0, c.omega01, z, omega03],
        [c.omega01, z, lambda, z],
        [z, lambda, z, c.omega23],
        [omega03, z, c.omega23, c.delta3],
    ]
}

/// Real symmetric four-level Hamiltonian in the level order (0, 1, 2, 3).
pub fn hamiltonian_at<T: Real>(schedule: &Schedule<T>, tau: T) -> Result<Mat4<T>> {
    let c = schedule.controls_at(tau)?;
    Ok(hamiltonian_from(&c, schedule.params.lambda(), schedule.params.omega03))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadState<T> {
    pub phi: [Complex<T>; 4],
    pub tau: T,
}

impl<T: Real> QuadState<T> {
    pub fn embedded(params: &ControlParams<T>) -> Self {
        let [psi1, psi2] = initial_amplitudes(params.theta);
        let (phi0, phi3) = initial_reservoir(params);
        Self {
            phi: [phi0, psi1, psi2, phi3],
            tau: T::zero(),
        }
    }

    pub fn populations(&self) -> [T; 4] {
        self.phi.map(|a| a.norm_sqr())
    }

    pub fn total(&self) -> T {
        self.populations().iter().fold(T::zero(), |a, &b| a + b)
    }

    fn to_real(self) -> [T; 8] {
        std::array::from_fn(|i| if i < 4 { self.phi[i].re } else { self.phi[i - 4].im })
    }

    fn from_real(y: &[T; 8], tau: T) -> Self {
        Self {
            phi: std::array::from_fn(|i| Complex::new(y[i], y[i + 4])),
            tau,
        }
    }
}

struct FourLevelOde<'a, T> {
    schedule: &'a Schedule<T>,
}

impl<T: Real> OdeSystem<T, 8> for FourLevelOde<'_, T> {
    fn rhs(&self, tau: T, y: &[T; 8]) -> [T; 8] {
        let Ok(h) = hamiltonian_at(self.schedule, tau) else {
            return [T::nan(); 8];
        };
        // φ = x + iy, dφ/dτ = −(i/2) H φ  ⇒  dx/dτ = ½ H y,  dy/dτ = −½ H x.
        let half = T::lit(0.5);
        let mut out = [T::zero(); 8];
        for i in 0..4 {
            let mut hx = T::zero();
            let mut hy = T::zero();
            for j in 0..4 {
                hx += h[i][j] * y[j];
                hy += h[i][j] * y[j + 4];
            }
            out[i] = half * hy;
            out[i + 4] = -half * hx;
        }
        out
    }
}

/// Diagnostics of a four-level run against the closed-form PT trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct EmulationReport<T> {
    pub taus: Vec<T>,
    pub populations: Vec<[T; 4]>,
    /// `max(|φ1 − ψ1|, |φ2 − ψ2|)` per sample.
    pub embedding_errors: Vec<T>,
    /// `Σ p_i − N0` per sample.
    pub norm_errors: Vec<T>,
    pub max_embedding_error: T,
    pub norm_drift: T,
    /// `norm_drift` scaled to a `100π` stretch of evolution.
    pub norm_drift_per_100pi: T,
    pub initial_total: T,
    pub pt_fraction_measured: T,
}

#[derive(Debug, Clone)]
pub struct FourLevelRun<T> {
    pub trajectory: Vec<QuadState<T>>,
    pub report: EmulationReport<T>,
}

/// Default tolerances for the four-level propagation.
pub fn default_tolerances<T: Real>() -> Tolerances<T> {
    Tolerances::uniform(T::lit(1e-13).max(T::epsilon() * T::lit(100.0)))
}

/// Propagates `initial` under the schedule up to `tau_end`, reporting on the schedule grid.
pub fn evolve_four_level<T: Real>(
    schedule: &Schedule<T>,
    initial: QuadState<T>,
    tau_end: T,
    tol: Tolerances<T>,
) -> Result<FourLevelRun<T>> {
    let (start, end) = schedule.span();
    for t in [initial.tau, tau_end] {
        if !(t >= start && t <= end) {
            return Err(schedule.out_of_span(t));
        }
    }
    let grid: Vec<T> = schedule
        .grid()
        .iter()
        .copied()
        .filter(|&t| t >= initial.tau && t <= tau_end)
        .collect();

    let sys = FourLevelOde { schedule };
    let solver = Dopri5::new(tol);
    let states = solver.integrate_on_grid(&sys, initial.tau, initial.to_real(), &grid)?;

    let pt = schedule.pt();
    let theta = schedule.params.theta;
    let n0 = initial.total();
    let mut trajectory = Vec::with_capacity(grid.len());
    let mut report = EmulationReport {
        taus: Vec::with_capacity(grid.len()),
        populations: Vec::with_capacity(grid.len()),
        embedding_errors: Vec::with_capacity(grid.len()),
        norm_errors: Vec::with_capacity(grid.len()),
        max_embedding_error: T::zero(),
        norm_drift: T::zero(),
        norm_drift_per_100pi: T::zero(),
        initial_total: n0,
        pt_fraction_measured: T::infinity(),
    };
    for (tau, y) in grid.iter().zip(&states) {
        let q = QuadState::from_real(y, *tau);
        if q.phi.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFiniteState {
                tau: tau.to_f64_lossy(),
            });
        }
        let target = pt.evolve(theta, *tau);
        let err = (q.phi[1] - target.psi1).norm().max((q.phi[2] - target.psi2).norm());
        let p = q.populations();
        let total = p[0] + p[1] + p[2] + p[3];
        report.taus.push(*tau);
        report.populations.push(p);
        report.embedding_errors.push(err);
        report.norm_errors.push(total - n0);
        report.max_embedding_error = report.max_embedding_error.max(err);
        report.norm_drift = report.norm_drift.max((total - n0).abs());
        report.pt_fraction_measured = report.pt_fraction_measured.min((p[1] + p[2]) / total);
        trajectory.push(q);
    }
    let elapsed = tau_end - initial.tau;
    if elapsed > T::zero() {
        report.norm_drift_per_100pi = report.norm_drift * T::lit(100.0) * T::PI() / elapsed;
    }
    Ok(FourLevelRun { trajectory, report })
}

/// Populations of a four-level trajectory next to the closed-form subspace observables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationRow<T> {
    pub tau: T,
    pub p: [T; 4],
    /// `p1 + p2`.
    pub subspace_norm: T,
    /// `p1 − p2`.
    pub subspace_magnetization: T,
    pub target_norm: T,
    pub target_magnetization: T,
}

pub fn population_trace<T: Real>(trajectory: &[QuadState<T>], pt: &PtParams<T>, theta: T) -> Vec<PopulationRow<T>> {
    trajectory
        .iter()
        .map(|q| {
            let p = q.populations();
            let target = pt.evolve(theta, q.tau);
            PopulationRow {
                tau: q.tau,
                p,
                subspace_norm: p[1] + p[2],
                subspace_magnetization: p[1] - p[2],
                target_norm: target.norm(),
                target_magnetization: target.magnetization(),
            }
        })
        .collect()
}

/// Mean population of `level` over each complete `2π` window, starting at the first sample.
pub fn cycle_averages<T: Real>(rows: &[PopulationRow<T>], level: usize) -> Vec<T> {
    let Some(first) = rows.first() else {
        return Vec::new();
    };
    let mut out = Vec::new();
    let mut window = 0usize;
    let mut sum = T::zero();
    let mut count = 0usize;
    for r in rows {
        let w = ((r.tau - first.tau) / T::TAU()).floor().to_usize().unwrap_or(0);
        if w != window {
            if count > 0 {
                out.push(sum / T::from_usize(count).unwrap());
            }
            window = w;
            sum = T::zero();
            count = 0;
        }
        sum += r.p[level];
        count += 1;
    }
    out
}
