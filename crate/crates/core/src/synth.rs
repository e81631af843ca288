//! Control synthesis: the time-dependent couplings and detunings that make the two central levels
//! of a four-level Hermitian system follow the PT-symmetric target.
//!
//! Requiring `φ1 = ψ1`, `φ2 = ψ2` in `i dφ/dτ = ½ H(τ) φ` fixes the reservoir amplitudes through
//! the embedding constraints
//!
//! ```text
//! Ω01 φ0 = −iγ ψ1        Ω23 φ3 = +iγ ψ2
//! ```
//!
//! and the reservoir rows of the Schrödinger equation then split into a real part (the coupling
//! ODEs) and an imaginary part (the detunings). With `ρ = ψ2/ψ1`:
//!
//! ```text
//! dΩ01/dτ = (−γ/2 + λ/2 Im ρ) Ω01 − Ω01³/(2γ) + ½ Im ρ · Ω03 Ω01²/Ω23
//! dΩ23/dτ = (+γ/2 + λ/2 Im ρ⁻¹) Ω23 + Ω23³/(2γ) + ½ Im ρ⁻¹ · Ω03 Ω23²/Ω01
//! δ0 = (λ + Ω03 Ω01/Ω23) Re ρ      δ3 = (λ + Ω03 Ω23/Ω01) Re ρ⁻¹
//! ```

use std::cell::Cell;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::ode::{Dopri5, Flow, OdeSystem, Tolerances};
use crate::ptcore::{initial_amplitudes, PtParams, PtState};
use crate::roots::{first_root, golden_max};
use crate::scalar::Real;

/// Amplitudes below this magnitude make the control law singular.
pub const AMPLITUDE_FLOOR: f64 = 1e-10;
pub const DEFAULT_OMEGA_CAP: f64 = 1e3;
pub const DEFAULT_HORIZON_CYCLES: f64 = 200.0;
pub const DEFAULT_SAMPLES_PER_PI: f64 = 200.0;
/// Largest cycle-to-cycle change of the averaged source population (relative to the conserved
/// total) still counted as periodic.
pub const PERIODIC_DRIFT_TOL: f64 = 1e-4;
/// Resolution of the restart bisection that pins down a breakdown time.
pub const BREAKDOWN_REFINE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlParams<T> {
    pub pt: PtParams<T>,
    /// Mixing angle of the real initial state `(cos θ/2, sin θ/2)`.
    pub theta: T,
    pub omega01_init: T,
    pub omega23_init: T,
    /// Static sink-to-source recycling coupling.
    pub omega03: T,
    pub horizon: T,
    pub tol: Tolerances<T>,
    pub omega_cap: T,
    /// Spacing of the uniform output grid.
    pub sample_step: T,
    pub periodic_drift_tol: T,
}

impl<T: Real> ControlParams<T> {
    /// Symmetric start `θ = π/2`, equal initial couplings, no recycling, default horizon `400π`.
    pub fn new(pt: PtParams<T>, omega_init: T) -> Self {
        Self {
            pt,
            theta: T::FRAC_PI_2(),
            omega01_init: omega_init,
            omega23_init: omega_init,
            omega03: T::zero(),
            horizon: T::lit(2.0 * DEFAULT_HORIZON_CYCLES) * T::PI(),
            tol: Tolerances::default(),
            omega_cap: T::lit(DEFAULT_OMEGA_CAP),
            sample_step: T::PI() / T::lit(DEFAULT_SAMPLES_PER_PI),
            periodic_drift_tol: T::lit(PERIODIC_DRIFT_TOL),
        }
    }

    /// Same as [`ControlParams::new`] with couplings given in units of `λ`.
    pub fn from_ratios(gamma_ratio: T, omega_init_over_lambda: T, omega03_over_lambda: T) -> Result<Self> {
        let pt = PtParams::from_ratio(gamma_ratio)?;
        let lambda = pt.lambda();
        Ok(Self::new(pt, omega_init_over_lambda * lambda).with_omega03(omega03_over_lambda * lambda))
    }

    pub fn with_theta(mut self, theta: T) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_omega03(mut self, omega03: T) -> Self {
        self.omega03 = omega03;
        self
    }

    pub fn with_horizon(mut self, horizon: T) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_tolerances(mut self, tol: Tolerances<T>) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_omega_cap(mut self, cap: T) -> Self {
        self.omega_cap = cap;
        self
    }

    pub fn with_sample_step(mut self, step: T) -> Self {
        self.sample_step = step;
        self
    }

    /// Unequal starting couplings. Supported by the integrator but outside the validated setup.
    pub fn with_initial_couplings(mut self, omega01: T, omega23: T) -> Self {
        self.omega01_init = omega01;
        self.omega23_init = omega23;
        self
    }

    pub fn gamma(&self) -> T {
        self.pt.gamma()
    }

    pub fn lambda(&self) -> T {
        self.pt.lambda()
    }

    /// `θ = π/2` with equal initial couplings: the configuration with closed-form controls.
    pub fn is_symmetric_start(&self) -> bool {
        (self.theta - T::FRAC_PI_2()).abs() <= T::lit(1e-12) && self.omega01_init == self.omega23_init
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, name: &'static str, value: T, reason: &'static str| {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    name,
                    value: value.to_f64_lossy(),
                    reason,
                })
            }
        };
        check(
            self.gamma() > T::zero(),
            "gamma",
            self.gamma(),
            "control synthesis needs positive gain",
        )?;
        check(
            self.theta > T::zero() && self.theta < T::PI(),
            "theta",
            self.theta,
            "must lie in (0, pi)",
        )?;
        check(
            self.omega01_init > T::zero(),
            "omega01_init",
            self.omega01_init,
            "must be positive",
        )?;
        check(
            self.omega23_init > T::zero(),
            "omega23_init",
            self.omega23_init,
            "must be positive",
        )?;
        check(
            self.omega03 >= T::zero(),
            "omega03",
            self.omega03,
            "must be non-negative",
        )?;
        check(self.horizon > T::zero(), "horizon", self.horizon, "must be positive")?;
        check(
            self.sample_step > T::zero(),
            "sample_step",
            self.sample_step,
            "must be positive",
        )?;
        check(self.tol.abs > T::zero(), "abs_tol", self.tol.abs, "must be positive")?;
        check(self.tol.rel > T::zero(), "rel_tol", self.tol.rel, "must be positive")?;
        check(
            self.omega_cap > self.omega01_init.max(self.omega23_init),
            "omega_cap",
            self.omega_cap,
            "must exceed the initial couplings",
        )?;
        Ok(())
    }
}

/// Target amplitudes and their ratio at one instant.
#[derive(Debug, Clone, Copy)]
struct Kinematics<T> {
    state: PtState<T>,
    rho: Complex<T>,
}

fn kinematics<T: Real>(pt: &PtParams<T>, theta: T, tau: T) -> Result<Kinematics<T>> {
    let state = pt.evolve(theta, tau);
    let floor = T::lit(AMPLITUDE_FLOOR);
    if state.psi1.norm() < floor || state.psi2.norm() < floor {
        return Err(Error::AmplitudeVanishes {
            tau: tau.to_f64_lossy(),
        });
    }
    Ok(Kinematics {
        rho: state.psi2 / state.psi1,
        state,
    })
}

/// Coefficient functions of the coupling ODEs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients<T> {
    pub f1: T,
    pub f2: T,
    pub f3: T,
    pub g1: T,
    pub g2: T,
    pub g3: T,
}

impl<T: Real> Coefficients<T> {
    fn from_ratio(gamma: T, lambda: T, rho: Complex<T>) -> Self {
        let half = T::lit(0.5);
        let im_rho = rho.im;
        let im_inv = rho.inv().im;
        let inv_two_gamma = half / gamma;
        Self {
            f1: -half * gamma + half * lambda * im_rho,
            f2: -inv_two_gamma,
            f3: half * im_rho,
            g1: half * gamma + half * lambda * im_inv,
            g2: inv_two_gamma,
            g3: half * im_inv,
        }
    }
}

/// The six coefficient functions `f_i(τ)`, `g_i(τ)` bound to a target trajectory.
#[derive(Debug, Clone, Copy)]
pub struct CoefficientSet<T> {
    pt: PtParams<T>,
    theta: T,
}

impl<T: Real> CoefficientSet<T> {
    pub fn at(&self, tau: T) -> Result<Coefficients<T>> {
        let k = kinematics(&self.pt, self.theta, tau)?;
        Ok(Coefficients::from_ratio(self.pt.gamma(), self.pt.lambda(), k.rho))
    }

    pub fn f1(&self, tau: T) -> Result<T> {
        Ok(self.at(tau)?.f1)
    }

    pub fn f2(&self) -> T {
        -T::lit(0.5) / self.pt.gamma()
    }

    pub fn f3(&self, tau: T) -> Result<T> {
        Ok(self.at(tau)?.f3)
    }

    pub fn g1(&self, tau: T) -> Result<T> {
        Ok(self.at(tau)?.g1)
    }

    pub fn g2(&self) -> T {
        T::lit(0.5) / self.pt.gamma()
    }

    pub fn g3(&self, tau: T) -> Result<T> {
        Ok(self.at(tau)?.g3)
    }
}

pub fn coefficient_set<T: Real>(params: &ControlParams<T>) -> Result<CoefficientSet<T>> {
    if params.gamma() <= T::zero() {
        return Err(Error::InvalidParameter {
            name: "gamma",
            value: params.gamma().to_f64_lossy(),
            reason: "coefficients need positive gain",
        });
    }
    Ok(CoefficientSet {
        pt: params.pt,
        theta: params.theta,
    })
}

/// Right-hand sides of the coupling ODEs and the detunings, with their time derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlRates<T> {
    pub d_omega01: T,
    pub d_omega23: T,
    pub delta0: T,
    pub delta3: T,
    pub d_delta0: T,
    pub d_delta3: T,
}

fn rates_at<T: Real>(params: &ControlParams<T>, k: &Kinematics<T>, omega01: T, omega23: T) -> ControlRates<T> {
    let gamma = params.gamma();
    let lambda = params.lambda();
    let o03 = params.omega03;
    let c = Coefficients::from_ratio(gamma, lambda, k.rho);
    let d_omega01 = c.f1 * omega01 + c.f2 * omega01.powi(3) + c.f3 * o03 * omega01 * omega01 / omega23;
    let d_omega23 = c.g1 * omega23 + c.g2 * omega23.powi(3) + c.g3 * o03 * omega23 * omega23 / omega01;

    let inv = k.rho.inv();
    let q = omega01 / omega23;
    let delta0 = (lambda + o03 * q) * k.rho.re;
    let delta3 = (lambda + o03 / q) * inv.re;

    // ρ' = (ψ2'ψ1 − ψ2ψ1')/ψ1², (1/ρ)' = −ρ'/ρ².
    let [d1, d2] = params.pt.derivative(&k.state);
    let psi1 = k.state.psi1;
    let psi2 = k.state.psi2;
    let d_rho = (d2 * psi1 - psi2 * d1) / (psi1 * psi1);
    let d_inv = -d_rho * inv * inv;
    let d_q = q * (d_omega01 / omega01 - d_omega23 / omega23);
    let d_delta0 = o03 * d_q * k.rho.re + (lambda + o03 * q) * d_rho.re;
    let d_delta3 = -o03 * d_q / (q * q) * inv.re + (lambda + o03 / q) * d_inv.re;

    ControlRates {
        d_omega01,
        d_omega23,
        delta0,
        delta3,
        d_delta0,
        d_delta3,
    }
}

/// Evaluates the control law at `(Ω01, Ω23, τ)`.
pub fn control_law<T: Real>(params: &ControlParams<T>, omega01: T, omega23: T, tau: T) -> Result<ControlRates<T>> {
    for (name, value) in [("omega01", omega01), ("omega23", omega23)] {
        if !(value > T::zero()) {
            return Err(Error::InvalidParameter {
                name,
                value: value.to_f64_lossy(),
                reason: "couplings must stay positive",
            });
        }
        if value > params.omega_cap {
            return Err(Error::DivergencePending {
                tau: tau.to_f64_lossy(),
                value: value.to_f64_lossy(),
                cap: params.omega_cap.to_f64_lossy(),
            });
        }
    }
    let k = kinematics(&params.pt, params.theta, tau)?;
    Ok(rates_at(params, &k, omega01, omega23))
}

struct ControlOde<'a, T> {
    params: &'a ControlParams<T>,
    vanished_at: Cell<Option<T>>,
}

impl<T: Real> OdeSystem<T, 2> for ControlOde<'_, T> {
    fn rhs(&self, tau: T, y: &[T; 2]) -> [T; 2] {
        match kinematics(&self.params.pt, self.params.theta, tau) {
            Ok(k) => {
                let r = rates_at(self.params, &k, y[0], y[1]);
                [r.d_omega01, r.d_omega23]
            }
            Err(_) => {
                if self.vanished_at.get().is_none() {
                    self.vanished_at.set(Some(tau));
                }
                [T::nan(), T::nan()]
            }
        }
    }
}

/// One row of a synthesized schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlSample<T> {
    pub tau: T,
    pub omega01: T,
    pub omega23: T,
    pub d_omega01: T,
    pub d_omega23: T,
    pub delta0: T,
    pub delta3: T,
    pub d_delta0: T,
    pub d_delta3: T,
    pub psi1: Complex<T>,
    pub psi2: Complex<T>,
    /// Sink amplitude from `Ω01 φ0 = −iγψ1`.
    pub phi0: Complex<T>,
    /// Source amplitude from `Ω23 φ3 = +iγψ2`.
    pub phi3: Complex<T>,
}

impl<T: Real> ControlSample<T> {
    fn build(params: &ControlParams<T>, tau: T, omega01: T, omega23: T) -> Result<Self> {
        let k = kinematics(&params.pt, params.theta, tau)?;
        let r = rates_at(params, &k, omega01, omega23);
        let gamma = params.gamma();
        let i_gamma = Complex::new(T::zero(), gamma);
        Ok(Self {
            tau,
            omega01,
            omega23,
            d_omega01: r.d_omega01,
            d_omega23: r.d_omega23,
            delta0: r.delta0,
            delta3: r.delta3,
            d_delta0: r.d_delta0,
            d_delta3: r.d_delta3,
            psi1: k.state.psi1,
            psi2: k.state.psi2,
            phi0: -i_gamma * k.state.psi1 / omega01,
            phi3: i_gamma * k.state.psi2 / omega23,
        })
    }

    /// `[p0, p1, p2, p3]`.
    pub fn populations(&self) -> [T; 4] {
        [
            self.phi0.norm_sqr(),
            self.psi1.norm_sqr(),
            self.psi2.norm_sqr(),
            self.phi3.norm_sqr(),
        ]
    }

    pub fn total_population(&self) -> T {
        self.populations().iter().fold(T::zero(), |a, &b| a + b)
    }

    /// Largest residual of the two embedding constraints.
    pub fn embedding_residual(&self, gamma: T) -> T {
        let i_gamma = Complex::new(T::zero(), gamma);
        let r0 = (self.phi0 * self.omega01 + i_gamma * self.psi1).norm();
        let r3 = (self.phi3 * self.omega23 - i_gamma * self.psi2).norm();
        r0.max(r3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BreakdownCause {
    /// A coupling crossed the divergence cap.
    Divergence,
    StepUnderflow,
}

/// Outcome of a synthesis run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verdict<T> {
    /// The schedule breaks down at `tau_star`.
    Terminated { tau_star: T, cause: BreakdownCause },
    /// Bounded up to the horizon but the cycle-averaged source population still drifts.
    ReachedHorizon { drift: Option<T> },
    /// Bounded with cycle-averaged source population steady to `periodic_drift_tol`.
    Periodic { drift: T },
}

impl<T: Real> Verdict<T> {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Terminated { .. } => "Terminated",
            Verdict::ReachedHorizon { .. } => "ReachedHorizon",
            Verdict::Periodic { .. } => "Periodic",
        }
    }

    pub fn tau_star(&self) -> Option<T> {
        match self {
            Verdict::Terminated { tau_star, .. } => Some(*tau_star),
            _ => None,
        }
    }

    pub fn is_terminated(&self) -> bool {
        matches!(self, Verdict::Terminated { .. })
    }

    /// Drift of the cycle-averaged `p3` between the final two `2π` windows, relative to `N0`.
    pub fn drift(&self) -> Option<T> {
        match self {
            Verdict::Terminated { .. } => None,
            Verdict::ReachedHorizon { drift } => *drift,
            Verdict::Periodic { drift } => Some(*drift),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ControlTrace<T> {
    pub params: ControlParams<T>,
    pub samples: Vec<ControlSample<T>>,
    pub verdict: Verdict<T>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl<T: Real> ControlTrace<T> {
    pub fn tau_star(&self) -> Option<T> {
        self.verdict.tau_star()
    }

    /// Minimum over the samples of `(p1 + p2) / Σ p_i`.
    pub fn pt_fraction(&self) -> T {
        self.samples
            .iter()
            .map(|s| {
                let p = s.populations();
                (p[1] + p[2]) / (p[0] + p[1] + p[2] + p[3])
            })
            .fold(T::infinity(), T::min)
    }

    pub fn max_embedding_residual(&self) -> T {
        let gamma = self.params.gamma();
        self.samples
            .iter()
            .map(|s| s.embedding_residual(gamma))
            .fold(T::zero(), T::max)
    }

    /// Largest deviation of `Σ p_i` from its initial value along the trace.
    pub fn population_drift(&self) -> T {
        let Some(first) = self.samples.first() else {
            return T::zero();
        };
        let n0 = first.total_population();
        self.samples
            .iter()
            .map(|s| (s.total_population() - n0).abs())
            .fold(T::zero(), T::max)
    }
}

/// Running averages of `p3` over the final two `2π` windows before the horizon.
struct WindowAverages<T> {
    bounds: Option<[T; 3]>,
    sums: [T; 2],
    counts: [usize; 2],
}

impl<T: Real> WindowAverages<T> {
    fn new(horizon: T) -> Self {
        let two_pi = T::TAU();
        let bounds = (horizon >= two_pi + two_pi).then(|| [horizon - two_pi - two_pi, horizon - two_pi, horizon]);
        Self {
            bounds,
            sums: [T::zero(); 2],
            counts: [0; 2],
        }
    }

    fn add(&mut self, tau: T, p3: T) {
        let Some([a, b, c]) = self.bounds else {
            return;
        };
        if tau >= a && tau < b {
            self.sums[0] += p3;
            self.counts[0] += 1;
        } else if tau >= b && tau <= c {
            self.sums[1] += p3;
            self.counts[1] += 1;
        }
    }

    fn drift(&self, n0: T) -> Option<T> {
        if self.counts[0] == 0 || self.counts[1] == 0 {
            return None;
        }
        let m0 = self.sums[0] / T::from_usize(self.counts[0]).unwrap();
        let m1 = self.sums[1] / T::from_usize(self.counts[1]).unwrap();
        Some((m1 - m0) / n0)
    }
}

fn exceeds_cap<T: Real>(y: &[T; 2], cap: T) -> bool {
    !(y[0] <= cap && y[1] <= cap && y[0] > T::zero() && y[1] > T::zero())
}

/// Pins the first cap crossing after `(t0, y0)` by bisecting the horizon of fresh integrations.
fn refine_breakdown<T: Real>(params: &ControlParams<T>, sys: &ControlOde<'_, T>, t0: T, y0: [T; 2], t1: T) -> T {
    let solver = Dopri5::new(params.tol);
    let cap = params.omega_cap;
    let blows_up_before = |h: T| -> bool {
        match solver.integrate(sys, t0, y0, h, |s| {
            Ok(if exceeds_cap(&s.y1, cap) {
                Flow::Stop
            } else {
                Flow::Continue
            })
        }) {
            Ok(out) => out.stopped || exceeds_cap(&out.y, cap),
            Err(_) => true,
        }
    };
    let (mut lo, mut hi) = (t0, t1);
    let tol = T::lit(BREAKDOWN_REFINE_TOL);
    while hi - lo > tol {
        let mid = T::lit(0.5) * (lo + hi);
        if blows_up_before(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    T::lit(0.5) * (lo + hi)
}

fn run_controls<T: Real>(params: &ControlParams<T>, record: bool) -> Result<ControlTrace<T>> {
    params.validate()?;
    let sys = ControlOde {
        params,
        vanished_at: Cell::new(None),
    };
    let solver = Dopri5::new(params.tol);
    let horizon = params.horizon;
    let dt = params.sample_step;
    let cap = params.omega_cap;
    let n0 = total_initial_population(params);

    let mut samples = Vec::new();
    let mut windows = WindowAverages::new(horizon);
    let mut next_k: usize = 0;
    let grid_at = |k: usize| T::from_usize(k).unwrap() * dt;
    let mut crossing: Option<(T, [T; 2], T)> = None;

    let mut emit = |tau: T, y: [T; 2], samples: &mut Vec<ControlSample<T>>| -> Result<()> {
        let s = ControlSample::build(params, tau, y[0], y[1])?;
        windows.add(tau, s.phi3.norm_sqr());
        if record {
            samples.push(s);
        }
        Ok(())
    };

    let y0 = [params.omega01_init, params.omega23_init];
    emit(T::zero(), y0, &mut samples)?;
    next_k += 1;

    let result = solver.integrate(&sys, T::zero(), y0, horizon, |step| {
        if exceeds_cap(&step.y1, cap) {
            crossing = Some((step.t0, step.y0, step.t1));
            return Ok(Flow::Stop);
        }
        while grid_at(next_k) <= step.t1 {
            let tau = grid_at(next_k);
            let y = if tau == step.t1 { step.y1 } else { step.interpolate(tau) };
            emit(tau, y, &mut samples)?;
            next_k += 1;
        }
        Ok(Flow::Continue)
    });

    if let Some(tau) = sys.vanished_at.get() {
        return Err(Error::AmplitudeVanishes {
            tau: tau.to_f64_lossy(),
        });
    }

    let (verdict, accepted, rejected) = match result {
        Ok(out) => {
            if let Some((t0, y_start, t1)) = crossing {
                let tau_star = refine_breakdown(params, &sys, t0, y_start, t1);
                // Fill the grid between the last accepted step and the breakdown.
                let tail: Vec<T> = (next_k..)
                    .map(grid_at)
                    .take_while(|&t| t < tau_star && t > t0)
                    .collect();
                if !tail.is_empty() {
                    let pts = solver.integrate_on_grid(&sys, t0, y_start, &tail)?;
                    for (tau, y) in tail.iter().zip(pts) {
                        if exceeds_cap(&y, cap) {
                            break;
                        }
                        emit(*tau, y, &mut samples)?;
                    }
                }
                (
                    Verdict::Terminated {
                        tau_star,
                        cause: BreakdownCause::Divergence,
                    },
                    out.accepted,
                    out.rejected,
                )
            } else {
                // Round-off can push the last grid point just past the horizon.
                if grid_at(next_k - 1) < horizon {
                    emit(horizon, out.y, &mut samples)?;
                }
                let drift = windows.drift(n0);
                let verdict = match drift {
                    Some(d) if d.abs() < params.periodic_drift_tol => Verdict::Periodic { drift: d },
                    other => Verdict::ReachedHorizon { drift: other },
                };
                (verdict, out.accepted, out.rejected)
            }
        }
        Err(Error::StepUnderflow { tau, .. }) => (
            Verdict::Terminated {
                tau_star: T::lit(tau),
                cause: BreakdownCause::StepUnderflow,
            },
            0,
            0,
        ),
        Err(e) => return Err(e),
    };

    Ok(ControlTrace {
        params: *params,
        samples,
        verdict,
        accepted_steps: accepted,
        rejected_steps: rejected,
    })
}

/// Integrates the coupling ODEs from the initial couplings to the horizon or breakdown and
/// samples the full schedule on the uniform output grid.
pub fn integrate_controls<T: Real>(params: &ControlParams<T>) -> Result<ControlTrace<T>> {
    run_controls(params, true)
}

/// Same integration as [`integrate_controls`] without storing samples.
pub fn classify<T: Real>(params: &ControlParams<T>) -> Result<Verdict<T>> {
    Ok(run_controls(params, false)?.verdict)
}

/// Closed-form controls without recycling for the symmetric start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticControls<T> {
    pub omega01: T,
    pub omega23: T,
    pub delta0: T,
    pub delta3: T,
}

/// `1 − Ω²(1 + λ²τ/γ − cos τ − γ sin τ)`: vanishes at the breakdown of `Ω23`.
pub fn breakdown_denominator<T: Real>(pt: &PtParams<T>, omega_init: T, tau: T) -> T {
    let (g, l) = (pt.gamma(), pt.lambda());
    let (s, c) = tau.sin_cos();
    T::one() - omega_init * omega_init * (T::one() + l * l * tau / g - c - g * s)
}

fn require_closed_form<T: Real>(params: &ControlParams<T>) -> Result<()> {
    if params.omega03 != T::zero() {
        return Err(Error::InvalidParameter {
            name: "omega03",
            value: params.omega03.to_f64_lossy(),
            reason: "closed form requires no recycling",
        });
    }
    if (params.theta - T::FRAC_PI_2()).abs() > T::lit(1e-12) {
        return Err(Error::InvalidParameter {
            name: "theta",
            value: params.theta.to_f64_lossy(),
            reason: "closed form requires theta = pi/2",
        });
    }
    if params.gamma() <= T::zero() {
        return Err(Error::InvalidParameter {
            name: "gamma",
            value: params.gamma().to_f64_lossy(),
            reason: "closed form requires positive gain",
        });
    }
    Ok(())
}

pub fn analytic_controls<T: Real>(params: &ControlParams<T>, tau: T) -> Result<AnalyticControls<T>> {
    require_closed_form(params)?;
    let (g, l) = (params.gamma(), params.lambda());
    let coupling = |t: T, omega_init: T| -> Result<T> {
        let den = breakdown_denominator(&params.pt, omega_init, t);
        if den <= T::zero() {
            return Err(Error::PastBreakdown { tau: t.to_f64_lossy() });
        }
        let (s, c) = t.sin_cos();
        let num = l * l - g * g * c + g * s;
        Ok(omega_init * (num / den).sqrt())
    };
    let omega23 = coupling(tau, params.omega23_init)?;
    let omega01 = coupling(-tau, params.omega01_init)?;
    let (s, c) = tau.sin_cos();
    let base = l * l - g * g * c;
    Ok(AnalyticControls {
        omega01,
        omega23,
        delta0: l / (base - g * s),
        delta3: l / (base + g * s),
    })
}

/// First zero of the breakdown denominator, to `tol`.
pub fn exact_breakdown_time<T: Real>(params: &ControlParams<T>, tol: T) -> Result<T> {
    require_closed_form(params)?;
    let (g, l) = (params.gamma(), params.lambda());
    let o = params.omega23_init;
    // cos τ + γ sin τ is bounded by λ, so the denominator is positive before `start` and a root
    // lies before `bound`.
    let bound = g * (T::one() / (o * o) + g) / (l * l) + T::one();
    let start = (g * (T::one() / (o * o) - T::one() - l) / (l * l)).max(T::zero());
    first_root(
        |t| breakdown_denominator(&params.pt, o, t),
        start,
        bound,
        T::lit(0.05),
        tol,
    )
    .ok_or(Error::PastBreakdown {
        tau: bound.to_f64_lossy(),
    })
}

/// Breakdown time: exact root for the closed-form case, otherwise the integration verdict.
pub fn breakdown_time<T: Real>(params: &ControlParams<T>) -> Result<Option<T>> {
    if params.omega03 == T::zero() && params.is_symmetric_start() {
        params.validate()?;
        return exact_breakdown_time(params, T::lit(1e-10)).map(Some);
    }
    Ok(classify(params)?.tau_star())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `Ω_init ≪ 1`: oscillating terms dropped from the denominator.
    Small,
    /// `Ω_init ≫ 1`: denominator expanded to first order in time.
    Large,
}

pub fn breakdown_approx<T: Real>(params: &ControlParams<T>, regime: Regime) -> Result<T> {
    if params.omega03 != T::zero() {
        return Err(Error::InvalidParameter {
            name: "omega03",
            value: params.omega03.to_f64_lossy(),
            reason: "estimate assumes no recycling",
        });
    }
    let (g, l) = (params.gamma(), params.lambda());
    let o2 = params.omega23_init * params.omega23_init;
    Ok(match regime {
        Regime::Small => g * (T::one() - o2) / (o2 * l * l),
        Regime::Large => g / o2,
    })
}

/// `(φ0(0), φ3(0))` from the embedding constraints at `τ = 0`.
pub fn initial_reservoir<T: Real>(params: &ControlParams<T>) -> (Complex<T>, Complex<T>) {
    let [psi1, psi2] = initial_amplitudes(params.theta);
    let i_gamma = Complex::new(T::zero(), params.gamma());
    (
        -i_gamma * psi1 / params.omega01_init,
        i_gamma * psi2 / params.omega23_init,
    )
}

/// Conserved total population `N0 = Σ p_i(0)`.
pub fn total_initial_population<T: Real>(params: &ControlParams<T>) -> T {
    let (phi0, phi3) = initial_reservoir(params);
    T::one() + phi0.norm_sqr() + phi3.norm_sqr()
}

/// Minimum fraction of the total population inside the PT subspace.
pub fn pt_fraction<T: Real>(params: &ControlParams<T>) -> Result<T> {
    if params.is_symmetric_start() {
        let x = params.gamma() / params.omega23_init;
        return Ok(T::one() / (T::one() + x * x));
    }
    // min_τ n(τ) over one period, divided by the conserved total.
    let n0 = total_initial_population(params);
    let neg_norm = |t: T| -params.pt.evolve(params.theta, t).norm();
    let samples = 512;
    let step = T::TAU() / T::from_usize(samples).unwrap();
    let best =
        (0..samples)
            .map(|k| T::from_usize(k).unwrap() * step)
            .fold((T::zero(), neg_norm(T::zero())), |acc, t| {
                let v = neg_norm(t);
                if v > acc.1 {
                    (t, v)
                } else {
                    acc
                }
            });
    let (_, peak) = golden_max(neg_norm, best.0 - step, best.0 + step, T::lit(1e-12));
    Ok(-peak.max(best.1) / n0)
}

/// Smallest `Ω_init` keeping the PT fraction at or above `r_min`.
pub fn min_coupling_for_fraction<T: Real>(gamma: T, r_min: T) -> Result<T> {
    if !(r_min > T::zero() && r_min < T::one()) {
        return Err(Error::InvalidParameter {
            name: "r_min",
            value: r_min.to_f64_lossy(),
            reason: "must lie in (0, 1)",
        });
    }
    Ok(gamma * (r_min / (T::one() - r_min)).sqrt())
}
