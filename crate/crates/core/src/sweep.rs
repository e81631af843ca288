//! Parameter-space studies over the synthesis module.
//!
//! Grid coordinates are expressed in units of `λ` (`γ/λ`, `Ω_init/λ`, `Ω03/λ`). Points are
//! evaluated on a rayon pool and gathered in grid order, so results do not depend on the pool
//! width.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ode::Tolerances;
use crate::quadsim::Schedule;
use crate::roots::{bisect, golden_max};
use crate::synth::{
    breakdown_approx, classify, exact_breakdown_time, integrate_controls, ControlParams, ControlTrace, Regime, Verdict,
    DEFAULT_OMEGA_CAP,
};

/// Settings shared by every sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    /// Pool width; `None` uses rayon's default.
    pub threads: Option<usize>,
    pub horizon: f64,
    pub tol: Tolerances<f64>,
    /// Absolute tolerance of threshold bisections, in units of `λ`.
    pub bisection_tol: f64,
    pub sample_step: f64,
    pub omega_cap: f64,
    pub theta: f64,
    /// Leading fraction of a trace dropped before measuring ranges or orbit closure.
    pub transient_fraction: f64,
    /// Orbit closure threshold relative to the largest coupling on the trace.
    pub closure_tol: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            threads: None,
            horizon: 400.0 * PI,
            tol: Tolerances::default(),
            bisection_tol: 1e-5,
            sample_step: PI / 200.0,
            omega_cap: DEFAULT_OMEGA_CAP,
            theta: PI / 2.0,
            transient_fraction: 0.25,
            closure_tol: 1e-4,
        }
    }
}

impl SweepOptions {
    pub fn with_threads(mut self, threads: Option<usize>) -> Self {
        self.threads = threads;
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    fn params(
        &self,
        gamma_ratio: f64,
        omega_init_over_lambda: f64,
        omega03_over_lambda: f64,
    ) -> Result<ControlParams<f64>> {
        Ok(
            ControlParams::from_ratios(gamma_ratio, omega_init_over_lambda, omega03_over_lambda)?
                .with_theta(self.theta)
                .with_horizon(self.horizon)
                .with_tolerances(self.tol)
                .with_sample_step(self.sample_step)
                .with_omega_cap(self.omega_cap),
        )
    }

    fn metadata(&self) -> Vec<(String, String)> {
        vec![
            ("code_version".into(), env!("CARGO_PKG_VERSION").into()),
            ("horizon_tau".into(), format!("{:e}", self.horizon)),
            ("tol_abs".into(), format!("{:e}", self.tol.abs)),
            ("tol_rel".into(), format!("{:e}", self.tol.rel)),
            ("bisection_tol".into(), format!("{:e}", self.bisection_tol)),
            ("sample_step".into(), format!("{:e}", self.sample_step)),
            ("omega_cap".into(), format!("{:e}", self.omega_cap)),
            ("theta".into(), format!("{:e}", self.theta)),
        ]
    }
}

/// Maps `f` over `items` on a pool of the requested width, preserving order.
pub fn par_map<I, O, F>(threads: Option<usize>, items: &[I], f: F) -> Result<Vec<O>>
where
    I: Sync,
    O: Send,
    F: Fn(&I) -> O + Sync + Send,
{
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build().map_err(|e| Error::Pool(e.to_string()))?;
    Ok(pool.install(|| items.par_iter().map(&f).collect()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

impl Axis {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter {
                name: "grid",
                value: 0.0,
                reason: "grid must not be empty",
            });
        }
        if let Some(w) = values.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter {
                name: "grid",
                value: w[1],
                reason: "grid must be strictly increasing",
            });
        }
        Ok(Self {
            name: name.into(),
            values,
        })
    }

    pub fn single(name: impl Into<String>, value: f64) -> Self {
        Self {
            name: name.into(),
            values: vec![value],
        }
    }
}

/// `count` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// `count` log-spaced values from `lo` to `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    linspace(lo.ln(), hi.ln(), count).into_iter().map(f64::exp).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    /// One coordinate per axis.
    pub coords: Vec<f64>,
    pub verdict: String,
    /// One entry per payload column; `None` where not applicable.
    pub values: Vec<Option<f64>>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axes: Vec<Axis>,
    pub columns: Vec<String>,
    pub points: Vec<SweepPoint>,
    pub metadata: Vec<(String, String)>,
}

impl SweepResult {
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.points.iter().map(|p| p.values[idx]).collect())
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

fn cartesian(a: &[f64], b: &[f64]) -> Vec<(f64, f64)> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).collect()
}

fn error_point(coords: Vec<f64>, ncols: usize, e: &Error) -> SweepPoint {
    SweepPoint {
        coords,
        verdict: "Error".into(),
        values: vec![None; ncols],
        note: Some(e.to_string()),
    }
}

/// Breakdown time and verdict for one parameter set.
fn breakdown_point(params: &ControlParams<f64>) -> Result<(String, Option<f64>)> {
    if params.omega03 == 0.0 && params.is_symmetric_start() {
        params.validate()?;
        let t = exact_breakdown_time(params, 1e-10)?;
        return Ok(("Terminated".into(), Some(t)));
    }
    let v = classify(params)?;
    Ok((v.label().into(), v.tau_star()))
}

/// Breakdown times over `γ/λ × Ω_init/λ` at fixed `Ω03/λ`, with the small- and large-coupling
/// estimates alongside when `Ω03 = 0`.
pub fn scan_breakdown(
    gamma_ratios: &[f64],
    omega_init_grid: &[f64],
    omega03_over_lambda: f64,
    opts: &SweepOptions,
) -> Result<SweepResult> {
    let axes = vec![
        Axis::new("gamma_ratio", gamma_ratios.to_vec())?,
        Axis::new("omega_init_over_lambda", omega_init_grid.to_vec())?,
    ];
    let columns: Vec<String> = ["tau_star", "tau_star_over_pi", "approx_small", "approx_large"]
        .map(String::from)
        .to_vec();
    let ncols = columns.len();
    let grid = cartesian(gamma_ratios, omega_init_grid);
    let points = par_map(opts.threads, &grid, |&(g, oi)| {
        let coords = vec![g, oi];
        let run = || -> Result<SweepPoint> {
            let p = opts.params(g, oi, omega03_over_lambda)?;
            let (verdict, tau_star) = breakdown_point(&p)?;
            let (small, large) = if omega03_over_lambda == 0.0 {
                (
                    breakdown_approx(&p, Regime::Small).ok(),
                    breakdown_approx(&p, Regime::Large).ok(),
                )
            } else {
                (None, None)
            };
            Ok(SweepPoint {
                coords: coords.clone(),
                verdict,
                values: vec![tau_star, tau_star.map(|t| t / PI), small, large],
                note: None,
            })
        };
        run().unwrap_or_else(|e| error_point(coords.clone(), ncols, &e))
    })?;
    let mut metadata = opts.metadata();
    metadata.push(("omega03_over_lambda".into(), format!("{omega03_over_lambda:e}")));
    Ok(SweepResult {
        axes,
        columns,
        points,
        metadata,
    })
}

/// Result of a recycling-threshold bisection, in units of `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalRecycling {
    pub omega03_over_lambda: f64,
    /// Final bracket: `lo` terminates, `hi` does not within the horizon.
    pub bracket: (f64, f64),
    pub horizon: f64,
    pub evaluations: usize,
}

const MAX_BRACKET_OVER_LAMBDA: f64 = 64.0;

/// Smallest `Ω03/λ` for which the schedule survives the horizon, by bisection.
///
/// Runs that reach the horizon without settling are counted as surviving, so the estimate is
/// biased low by an amount that shrinks as the horizon grows.
pub fn critical_recycling(
    gamma_ratio: f64,
    omega_init_over_lambda: f64,
    opts: &SweepOptions,
) -> Result<CriticalRecycling> {
    let mut evaluations = 0usize;
    let mut terminates = |o03: f64| -> Result<bool> {
        evaluations += 1;
        Ok(classify(&opts.params(gamma_ratio, omega_init_over_lambda, o03)?)?.is_terminated())
    };
    let mut lo = 0.0;
    if !terminates(lo)? {
        return Err(Error::NoBracket {
            lo,
            hi: lo,
            verdict: "not Terminated",
        });
    }
    let mut hi = omega_init_over_lambda.max(1e-3);
    while terminates(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > MAX_BRACKET_OVER_LAMBDA {
            return Err(Error::NoBracket {
                lo: 0.0,
                hi: MAX_BRACKET_OVER_LAMBDA,
                verdict: "Terminated",
            });
        }
    }
    while hi - lo > opts.bisection_tol {
        let mid = 0.5 * (lo + hi);
        if terminates(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(CriticalRecycling {
        omega03_over_lambda: 0.5 * (lo + hi),
        bracket: (lo, hi),
        horizon: opts.horizon,
        evaluations,
    })
}

/// Recycling threshold as a function of `Ω_init/λ`, one curve per `γ/λ`.
pub fn boundary_curves(gamma_ratios: &[f64], omega_init_grid: &[f64], opts: &SweepOptions) -> Result<SweepResult> {
    let axes = vec![
        Axis::new("gamma_ratio", gamma_ratios.to_vec())?,
        Axis::new("omega_init_over_lambda", omega_init_grid.to_vec())?,
    ];
    let columns: Vec<String> = ["omega03_crit_over_lambda", "omega03_crit", "bracket_lo", "bracket_hi"]
        .map(String::from)
        .to_vec();
    let grid = cartesian(gamma_ratios, omega_init_grid);
    // Points run serially inside each bisection; the grid is what gets spread over the pool.
    let serial = SweepOptions {
        threads: Some(1),
        ..*opts
    };
    let points = par_map(opts.threads, &grid, |&(g, oi)| {
        match critical_recycling(g, oi, &serial) {
            Ok(c) => SweepPoint {
                coords: vec![g, oi],
                verdict: "Boundary".into(),
                values: vec![
                    Some(c.omega03_over_lambda),
                    Some(c.omega03_over_lambda / (1.0 - g * g).sqrt()),
                    Some(c.bracket.0),
                    Some(c.bracket.1),
                ],
                note: None,
            },
            Err(e @ Error::NoBracket { .. }) => SweepPoint {
                coords: vec![g, oi],
                verdict: "NoBracket".into(),
                values: vec![None; 4],
                note: Some(e.to_string()),
            },
            Err(e) => error_point(vec![g, oi], 4, &e),
        }
    })?;
    let mut metadata = opts.metadata();
    metadata.push((
        "horizon_bias".into(),
        "non-terminating runs at the horizon count as above threshold".into(),
    ));
    Ok(SweepResult {
        axes,
        columns,
        points,
        metadata,
    })
}

/// Requirements for a feasible emulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityQuery {
    pub gamma_ratio: f64,
    pub tau_required: f64,
    pub r_min: f64,
    pub omega03_max_over_lambda: f64,
    /// Upper end of the `Ω_init/λ` axis of the region map.
    pub omega_init_max_over_lambda: f64,
    pub omega_init_points: usize,
    pub omega03_points: usize,
}

impl FeasibilityQuery {
    pub fn new(gamma_ratio: f64, tau_required: f64, r_min: f64, omega03_max_over_lambda: f64) -> Self {
        Self {
            gamma_ratio,
            tau_required,
            r_min,
            omega03_max_over_lambda,
            omega_init_max_over_lambda: 1.0,
            omega_init_points: 21,
            omega03_points: 21,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tau_required > 0.0) {
            return Err(Error::InvalidParameter {
                name: "tau_required",
                value: self.tau_required,
                reason: "must be positive",
            });
        }
        if !(self.r_min > 0.0 && self.r_min < 1.0) {
            return Err(Error::InvalidParameter {
                name: "r_min",
                value: self.r_min,
                reason: "must lie in (0, 1)",
            });
        }
        if !(self.omega03_max_over_lambda >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "omega03_max_over_lambda",
                value: self.omega03_max_over_lambda,
                reason: "must be non-negative",
            });
        }
        if self.omega_init_points == 0 || self.omega03_points == 0 {
            return Err(Error::InvalidParameter {
                name: "grid",
                value: 0.0,
                reason: "region grids need at least one point",
            });
        }
        Ok(())
    }

    /// Smallest `Ω_init/λ` meeting the PT-fraction floor.
    pub fn omega_init_bound_over_lambda(&self) -> f64 {
        self.gamma_ratio * (self.r_min / (1.0 - self.r_min)).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub omega_init_bound_over_lambda: f64,
    /// First feasible grid point `(Ω_init/λ, Ω03/λ)`, scanning from the bound.
    pub witness: Option<(f64, f64)>,
    pub region: SweepResult,
}

fn survives(opts: &SweepOptions, g: f64, oi: f64, o03: f64, tau_required: f64) -> Result<bool> {
    let p = opts.params(g, oi, o03)?.with_horizon(tau_required);
    Ok(!classify(&p)?.is_terminated())
}

/// Maps `{τ* ≥ τ_required}` over `Ω_init/λ ∈ [bound, max] × Ω03/λ ∈ [0, Ω03_max]`, where the
/// bound enforces the PT-fraction floor.
pub fn feasibility_region(query: &FeasibilityQuery, opts: &SweepOptions) -> Result<FeasibilityReport> {
    query.validate()?;
    let bound = query.omega_init_bound_over_lambda();
    let oi_max = if query.omega_init_max_over_lambda > bound {
        query.omega_init_max_over_lambda
    } else {
        2.0 * bound
    };
    let oi_grid = linspace(bound, oi_max, query.omega_init_points);
    let o03_grid = linspace(0.0, query.omega03_max_over_lambda, query.omega03_points);
    let axes = vec![
        Axis::new("omega_init_over_lambda", oi_grid.clone())?,
        Axis::new("omega03_over_lambda", o03_grid.clone())?,
    ];
    let grid = cartesian(&oi_grid, &o03_grid);
    let g = query.gamma_ratio;
    let points = par_map(opts.threads, &grid, |&(oi, o03)| {
        match opts
            .params(g, oi, o03)
            .and_then(|p| classify(&p.with_horizon(query.tau_required)))
        {
            Ok(v) => SweepPoint {
                coords: vec![oi, o03],
                verdict: if v.is_terminated() { "Infeasible" } else { "Feasible" }.into(),
                values: vec![v.tau_star()],
                note: None,
            },
            Err(e) => error_point(vec![oi, o03], 1, &e),
        }
    })?;
    let witness = points
        .iter()
        .find(|p| p.verdict == "Feasible")
        .map(|p| (p.coords[0], p.coords[1]));
    let mut metadata = opts.metadata();
    metadata.extend([
        ("gamma_ratio".into(), format!("{g:e}")),
        ("tau_required".into(), format!("{:e}", query.tau_required)),
        ("r_min".into(), format!("{:e}", query.r_min)),
        (
            "omega03_max_over_lambda".into(),
            format!("{:e}", query.omega03_max_over_lambda),
        ),
        ("omega_init_bound_over_lambda".into(), format!("{bound:e}")),
        ("feasible".into(), witness.is_some().to_string()),
    ]);
    Ok(FeasibilityReport {
        feasible: witness.is_some(),
        omega_init_bound_over_lambda: bound,
        witness,
        region: SweepResult {
            axes,
            columns: vec!["tau_star".into()],
            points,
            metadata,
        },
    })
}

/// Feasibility at the most favourable corner: smallest allowed `Ω_init`, largest allowed `Ω03`.
pub fn corner_feasible(query: &FeasibilityQuery, opts: &SweepOptions) -> Result<bool> {
    query.validate()?;
    survives(
        opts,
        query.gamma_ratio,
        query.omega_init_bound_over_lambda(),
        query.omega03_max_over_lambda,
        query.tau_required,
    )
}

/// Largest `γ/λ` whose corner point is feasible, by bisection to `tol`.
pub fn max_feasible_gamma(
    tau_required: f64,
    r_min: f64,
    omega03_max_over_lambda: f64,
    tol: f64,
    opts: &SweepOptions,
) -> Result<f64> {
    let feasible = |g: f64| {
        corner_feasible(
            &FeasibilityQuery::new(g, tau_required, r_min, omega03_max_over_lambda),
            opts,
        )
    };
    let (mut lo, mut hi) = (1e-3, 1.0 - 1e-6);
    if !feasible(lo)? {
        return Err(Error::NoBracket {
            lo,
            hi,
            verdict: "Infeasible",
        });
    }
    if feasible(hi)? {
        return Ok(hi);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Largest `γ/λ` for which the small-coupling breakdown estimate at the PT-fraction bound still
/// reaches `τ_required`, without recycling.
pub fn max_gamma_without_recycling(tau_required: f64, r_min: f64) -> Result<f64> {
    if !(r_min > 0.0 && r_min < 1.0) {
        return Err(Error::InvalidParameter {
            name: "r_min",
            value: r_min,
            reason: "must lie in (0, 1)",
        });
    }
    // With Ω_init = cγ the estimate reads (1 − c²γ²) / (c²γ(1 + γ²)), decreasing in γ.
    let c2 = r_min / (1.0 - r_min);
    let estimate = |g: f64| (1.0 - c2 * g * g) / (c2 * g * (1.0 + g * g)) - tau_required;
    let gamma = bisect(estimate, 1e-12, 1.0 / c2.sqrt(), 1e-14).ok_or(Error::NoBracket {
        lo: 0.0,
        hi: 1.0 / c2.sqrt(),
        verdict: "same sign",
    })?;
    Ok(gamma / (1.0 + gamma * gamma).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    pub fn width(&self) -> f64 {
        self.max - self.min
    }
}

/// Extremes of one interpolated control over `[from, end]`, refined between knots.
fn refined_range(
    schedule: &Schedule<f64>,
    from: f64,
    pick: impl Fn(&crate::quadsim::ScheduleControls<f64>) -> f64,
) -> Range {
    let grid: Vec<f64> = schedule.grid().iter().copied().filter(|&t| t >= from).collect();
    let value = |t: f64| schedule.controls_at(t).map(|c| pick(&c)).unwrap_or(f64::NAN);
    let vals: Vec<f64> = grid.iter().map(|&t| value(t)).collect();
    let (end_lo, end_hi) = (grid[0], grid[grid.len() - 1]);
    let refine = |k: usize, sign: f64| -> f64 {
        let a = grid[k.saturating_sub(1)].max(end_lo);
        let b = grid[(k + 1).min(grid.len() - 1)].min(end_hi);
        let (_, v) = golden_max(|t| sign * value(t), a, b, 1e-10);
        sign * v
    };
    let argmax = (0..vals.len()).fold(0, |best, k| if vals[k] > vals[best] { k } else { best });
    let argmin = (0..vals.len()).fold(0, |best, k| if vals[k] < vals[best] { k } else { best });
    Range {
        min: refine(argmin, -1.0).min(vals[argmin]),
        max: refine(argmax, 1.0).max(vals[argmax]),
    }
}

/// Detuning ranges of a bounded schedule after dropping the leading transient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetuningRanges {
    pub delta0: Range,
    pub delta3: Range,
}

/// Ranges of `δ0` and `δ3` on `[start, end]` of a recorded trace.
pub fn detuning_ranges_on(trace: &ControlTrace<f64>, start: f64) -> Result<DetuningRanges> {
    let schedule = Schedule::from_trace(trace)?;
    Ok(DetuningRanges {
        delta0: refined_range(&schedule, start, |c| c.delta0),
        delta3: refined_range(&schedule, start, |c| c.delta3),
    })
}

/// `Δδ0` and `Δδ3` over `Ω_init/λ × Ω03/λ`; only points whose schedule is periodic are measured.
pub fn detuning_range(
    gamma_ratio: f64,
    omega_init_list: &[f64],
    omega03_grid: &[f64],
    opts: &SweepOptions,
) -> Result<SweepResult> {
    let axes = vec![
        Axis::new("omega_init_over_lambda", omega_init_list.to_vec())?,
        Axis::new("omega03_over_lambda", omega03_grid.to_vec())?,
    ];
    let columns: Vec<String> = [
        "delta0_range",
        "delta3_range",
        "delta0_range_over_lambda",
        "delta3_range_over_lambda",
        "delta0_min",
        "delta0_max",
    ]
    .map(String::from)
    .to_vec();
    let ncols = columns.len();
    let grid = cartesian(omega_init_list, omega03_grid);
    let points = par_map(opts.threads, &grid, |&(oi, o03)| {
        let coords = vec![oi, o03];
        let run = || -> Result<SweepPoint> {
            let p = opts.params(gamma_ratio, oi, o03)?;
            let trace = integrate_controls(&p)?;
            if !matches!(trace.verdict, Verdict::Periodic { .. }) {
                return Ok(SweepPoint {
                    coords: coords.clone(),
                    verdict: format!("Skipped{}", trace.verdict.label()),
                    values: vec![None; ncols],
                    note: None,
                });
            }
            let r = detuning_ranges_on(&trace, opts.transient_fraction * opts.horizon)?;
            let l = p.lambda();
            Ok(SweepPoint {
                coords: coords.clone(),
                verdict: "Periodic".into(),
                values: vec![
                    Some(r.delta0.width()),
                    Some(r.delta3.width()),
                    Some(r.delta0.width() / l),
                    Some(r.delta3.width() / l),
                    Some(r.delta0.min),
                    Some(r.delta0.max),
                ],
                note: None,
            })
        };
        run().unwrap_or_else(|e| error_point(coords.clone(), ncols, &e))
    })?;
    let mut metadata = opts.metadata();
    metadata.extend([
        ("gamma_ratio".into(), format!("{gamma_ratio:e}")),
        ("transient_fraction".into(), format!("{:e}", opts.transient_fraction)),
    ]);
    Ok(SweepResult {
        axes,
        columns,
        points,
        metadata,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitVerdict {
    /// The couplings diverge.
    Unbounded,
    /// The trace returns to its starting point after one period.
    SingleClosedOrbit,
    /// The trace closes only after the leading transient.
    TransientThenOrbit,
    /// Bounded, but no closure found within the horizon.
    Open,
}

impl OrbitVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            OrbitVerdict::Unbounded => "Unbounded",
            OrbitVerdict::SingleClosedOrbit => "SingleClosedOrbit",
            OrbitVerdict::TransientThenOrbit => "TransientThenOrbit",
            OrbitVerdict::Open => "Open",
        }
    }
}

#[derive(Debug, Clone)]
pub struct OrbitTrace {
    pub trace: ControlTrace<f64>,
    pub verdict: OrbitVerdict,
    /// Return distance measured from `τ = 0`, relative to the largest coupling.
    pub closure_from_start: Option<f64>,
    /// Return distance measured after the transient, relative to the largest coupling.
    pub closure_after_transient: Option<f64>,
}

/// Closest approach in the `(Ω01, Ω23)` plane to the point at `t0`, over `[t0 + π, t0 + 3π]`.
fn return_distance(schedule: &Schedule<f64>, t0: f64) -> Option<f64> {
    let (_, end) = schedule.span();
    if t0 + 3.0 * PI > end {
        return None;
    }
    let c0 = schedule.controls_at(t0).ok()?;
    let dist = |t: f64| {
        schedule
            .controls_at(t)
            .map(|c| (c.omega01 - c0.omega01).hypot(c.omega23 - c0.omega23))
            .unwrap_or(f64::INFINITY)
    };
    let (a, b) = (t0 + PI, t0 + 3.0 * PI);
    let knots: Vec<f64> = schedule.grid().iter().copied().filter(|&t| t >= a && t <= b).collect();
    let k = (0..knots.len()).fold(0, |best, k| if dist(knots[k]) < dist(knots[best]) { k } else { best });
    let lo = knots[k.saturating_sub(1)];
    let hi = knots[(k + 1).min(knots.len() - 1)];
    let (_, neg) = golden_max(|t| -dist(t), lo, hi, 1e-12);
    Some((-neg).min(dist(knots[k])))
}

/// Parametric `(Ω23, Ω01)` trace with a closure verdict.
pub fn orbit_trace(
    gamma_ratio: f64,
    omega_init_over_lambda: f64,
    omega03_over_lambda: f64,
    opts: &SweepOptions,
) -> Result<OrbitTrace> {
    let p = opts.params(gamma_ratio, omega_init_over_lambda, omega03_over_lambda)?;
    let trace = integrate_controls(&p)?;
    if trace.verdict.is_terminated() {
        return Ok(OrbitTrace {
            trace,
            verdict: OrbitVerdict::Unbounded,
            closure_from_start: None,
            closure_after_transient: None,
        });
    }
    let schedule = Schedule::from_trace(&trace)?;
    let scale = trace
        .samples
        .iter()
        .fold(0.0f64, |m, s| m.max(s.omega01).max(s.omega23));
    let (_, end) = schedule.span();
    let closure_from_start = return_distance(&schedule, 0.0).map(|d| d / scale);
    let late = (end - 3.0 * PI).max(opts.transient_fraction * end);
    let closure_after_transient = return_distance(&schedule, late).map(|d| d / scale);
    let closed = |d: Option<f64>| d.is_some_and(|d| d < opts.closure_tol);
    let verdict = if closed(closure_from_start) {
        OrbitVerdict::SingleClosedOrbit
    } else if closed(closure_after_transient) {
        OrbitVerdict::TransientThenOrbit
    } else {
        OrbitVerdict::Open
    };
    Ok(OrbitTrace {
        trace,
        verdict,
        closure_from_start,
        closure_after_transient,
    })
}
