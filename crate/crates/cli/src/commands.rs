//! One runner per subcommand. Each returns the table to emit and whether the run counts as a
//! negative answer (infeasible query).

use std::f64::consts::PI;

use pt_forge::ptcore::{PhaseUnwrapper, PtParams};
use pt_forge::quadsim::{evolve_four_level, Schedule};
use pt_forge::sweep::{
    boundary_curves, critical_recycling, detuning_range, feasibility_region, max_gamma_without_recycling, orbit_trace,
    scan_breakdown, FeasibilityQuery, SweepOptions, SweepResult,
};
use pt_forge::synth::{integrate_controls, total_initial_population, ControlParams, ControlTrace, Verdict};
use pt_forge::Tolerances;

use crate::config::{Command, RunConfig};
use crate::emit::{Cell, Output};
use crate::CliError;

pub struct RunOutcome {
    pub output: Output,
    pub infeasible: bool,
}

impl From<Output> for RunOutcome {
    fn from(output: Output) -> Self {
        Self {
            output,
            infeasible: false,
        }
    }
}

pub fn execute(config: &RunConfig, threads: Option<usize>) -> Result<RunOutcome, CliError> {
    match config.command {
        Command::Pt2 => pt2(config).map(Into::into),
        Command::Synth => synth(config).map(Into::into),
        Command::Emulate => emulate(config).map(Into::into),
        Command::BreakdownScan => breakdown_scan(config, threads).map(Into::into),
        Command::Threshold => threshold(config).map(Into::into),
        Command::Boundary => boundary(config, threads).map(Into::into),
        Command::Feasibility => feasibility(config, threads),
        Command::DetuningRange => detuning(config, threads).map(Into::into),
        Command::Orbit => orbit(config).map(Into::into),
    }
}

fn control_params(c: &RunConfig) -> Result<ControlParams<f64>, CliError> {
    Ok(
        ControlParams::from_ratios(c.gamma_ratio, c.omega_init_over_lambda, c.omega03_over_lambda)?
            .with_theta(c.theta)
            .with_horizon(c.horizon_tau)
            .with_tolerances(Tolerances::new(c.tol_abs, c.tol_rel))
            .with_sample_step(c.sample_step)
            .with_omega_cap(c.omega_cap),
    )
}

fn sweep_options(c: &RunConfig, threads: Option<usize>) -> SweepOptions {
    SweepOptions {
        threads,
        horizon: c.horizon_tau,
        tol: Tolerances::new(c.tol_abs, c.tol_rel),
        bisection_tol: c.bisection_tol,
        sample_step: c.sample_step,
        omega_cap: c.omega_cap,
        theta: c.theta,
        transient_fraction: c.transient_fraction,
        closure_tol: c.closure_tol,
    }
}

fn sample_grid(end: f64, step: f64) -> Vec<f64> {
    let n = (end / step).floor() as usize;
    let mut taus: Vec<f64> = (0..=n).map(|k| k as f64 * step).filter(|&t| t <= end).collect();
    if taus.last().is_some_and(|&t| t < end) {
        taus.push(end);
    }
    taus
}

fn pt2(c: &RunConfig) -> Result<Output, CliError> {
    let pt = PtParams::from_ratio(c.gamma_ratio)?;
    let mut out = Output::new(&["tau", "n", "w", "Phi", "p1", "p2"]);
    out.meta.push("gamma", pt.gamma());
    out.meta.push("lambda", pt.lambda());
    if let Ok(t) = pt.tau_sharp() {
        out.meta.push("tau_sharp", t);
    }
    let mut unwrapper = PhaseUnwrapper::new();
    for tau in sample_grid(c.horizon_tau, c.sample_step) {
        let s = pt.evolve(c.theta, tau);
        let phase = s.relative_phase().ok().map(|p| unwrapper.unwrap(p));
        out.row(vec![
            tau.into(),
            s.norm().into(),
            s.magnetization().into(),
            phase.into(),
            s.psi1.norm_sqr().into(),
            s.psi2.norm_sqr().into(),
        ]);
    }
    Ok(out)
}

fn verdict_meta(out: &mut Output, trace: &ControlTrace<f64>) {
    out.meta.push("verdict", trace.verdict.label());
    match trace.verdict {
        Verdict::Terminated { tau_star, cause } => {
            out.meta.push("tau_star", tau_star);
            out.meta.push("tau_star_over_pi", tau_star / PI);
            out.meta.push("breakdown_cause", format!("{cause:?}"));
        }
        Verdict::ReachedHorizon { drift } => out.meta.push("drift", drift),
        Verdict::Periodic { drift } => out.meta.push("drift", drift),
    }
}

fn synth(c: &RunConfig) -> Result<Output, CliError> {
    let p = control_params(c)?;
    let trace = integrate_controls(&p)?;
    let l = p.lambda();
    let mut out = Output::new(&[
        "tau",
        "omega01",
        "omega23",
        "delta0",
        "delta3",
        "re_phi0",
        "im_phi0",
        "re_phi3",
        "im_phi3",
        "omega01_over_lambda",
        "omega23_over_lambda",
        "delta0_over_lambda",
        "delta3_over_lambda",
    ]);
    out.meta.push("gamma", p.gamma());
    out.meta.push("lambda", l);
    out.meta.push("total_population", total_initial_population(&p));
    out.meta.push("pt_fraction", trace.pt_fraction());
    verdict_meta(&mut out, &trace);
    for s in &trace.samples {
        out.row(vec![
            s.tau.into(),
            s.omega01.into(),
            s.omega23.into(),
            s.delta0.into(),
            s.delta3.into(),
            s.phi0.re.into(),
            s.phi0.im.into(),
            s.phi3.re.into(),
            s.phi3.im.into(),
            (s.omega01 / l).into(),
            (s.omega23 / l).into(),
            (s.delta0 / l).into(),
            (s.delta3 / l).into(),
        ]);
    }
    Ok(out)
}

/// Fraction of the breakdown time covered by `emulate` when the schedule terminates.
const EMULATE_BREAKDOWN_FRACTION: f64 = 0.9;

fn emulate(c: &RunConfig) -> Result<Output, CliError> {
    let p = control_params(c)?;
    let trace = integrate_controls(&p)?;
    let schedule = Schedule::from_trace(&trace)?;
    let (_, span_end) = schedule.span();
    let tau_end = match trace.tau_star() {
        Some(t) => (EMULATE_BREAKDOWN_FRACTION * t).min(span_end),
        None => span_end,
    };
    let run = evolve_four_level(
        &schedule,
        schedule.initial_state(),
        tau_end,
        Tolerances::uniform(c.emulate_tol),
    )?;
    let r = &run.report;
    let mut out = Output::new(&["tau", "p0", "p1", "p2", "p3", "embed_err", "norm_err"]);
    verdict_meta(&mut out, &trace);
    out.meta.push("tau_end", tau_end);
    out.meta.push("total_population", r.initial_total);
    out.meta.push("max_embedding_error", r.max_embedding_error);
    out.meta.push("norm_drift", r.norm_drift);
    out.meta.push("norm_drift_per_100pi", r.norm_drift_per_100pi);
    out.meta.push("pt_fraction_measured", r.pt_fraction_measured);
    for k in 0..r.taus.len() {
        let pop = r.populations[k];
        out.row(vec![
            r.taus[k].into(),
            pop[0].into(),
            pop[1].into(),
            pop[2].into(),
            pop[3].into(),
            r.embedding_errors[k].into(),
            r.norm_errors[k].into(),
        ]);
    }
    Ok(out)
}

fn sweep_output(result: &SweepResult) -> Output {
    let mut names: Vec<&str> = result.axes.iter().map(|a| a.name.as_str()).collect();
    names.extend(result.columns.iter().map(String::as_str));
    names.push("verdict");
    let mut out = Output::new(&names);
    for (k, v) in &result.metadata {
        out.meta.push(k, v.clone());
    }
    for point in &result.points {
        let mut cells: Vec<Cell> = point.coords.iter().map(|&x| x.into()).collect();
        cells.extend(point.values.iter().map(|&v| Cell::from(v)));
        cells.push(point.verdict.as_str().into());
        out.row(cells);
    }
    out
}

fn breakdown_scan(c: &RunConfig, threads: Option<usize>) -> Result<Output, CliError> {
    let opts = sweep_options(c, threads);
    let result = scan_breakdown(
        &c.gamma_list.values(),
        &c.omega_init_grid.values(),
        c.omega03_over_lambda,
        &opts,
    )?;
    Ok(sweep_output(&result))
}

fn threshold(c: &RunConfig) -> Result<Output, CliError> {
    let opts = sweep_options(c, Some(1));
    let crit = critical_recycling(c.gamma_ratio, c.omega_init_over_lambda, &opts)?;
    let lambda = PtParams::from_ratio(c.gamma_ratio)?.lambda();
    let mut out = Output::new(&[
        "gamma_ratio",
        "omega_init_over_lambda",
        "omega03_crit_over_lambda",
        "omega03_crit",
        "bracket_lo",
        "bracket_hi",
        "verdict",
    ]);
    out.meta.push("omega03_crit_over_lambda", crit.omega03_over_lambda);
    out.meta.push("omega03_crit", crit.omega03_over_lambda * lambda);
    out.meta.push("horizon_tau", crit.horizon);
    out.meta.push("evaluations", crit.evaluations as f64);
    out.meta.push(
        "horizon_bias",
        "non-terminating runs at the horizon count as above threshold",
    );
    out.row(vec![
        c.gamma_ratio.into(),
        c.omega_init_over_lambda.into(),
        crit.omega03_over_lambda.into(),
        (crit.omega03_over_lambda * lambda).into(),
        crit.bracket.0.into(),
        crit.bracket.1.into(),
        "Boundary".into(),
    ]);
    Ok(out)
}

fn boundary(c: &RunConfig, threads: Option<usize>) -> Result<Output, CliError> {
    let opts = sweep_options(c, threads);
    let result = boundary_curves(&c.gamma_list.values(), &c.omega_init_grid.values(), &opts)?;
    Ok(sweep_output(&result))
}

fn feasibility(c: &RunConfig, threads: Option<usize>) -> Result<RunOutcome, CliError> {
    let opts = sweep_options(c, threads);
    let mut query = FeasibilityQuery::new(c.gamma_ratio, c.tau_required, c.r_min, c.omega03_max_over_lambda);
    query.omega_init_max_over_lambda = c.omega_init_max_over_lambda;
    query.omega_init_points = c.omega_init_points;
    query.omega03_points = c.omega03_points;
    let report = feasibility_region(&query, &opts)?;
    let mut out = sweep_output(&report.region);
    if let Some((oi, o03)) = report.witness {
        out.meta.push("witness_omega_init_over_lambda", oi);
        out.meta.push("witness_omega03_over_lambda", o03);
    }
    out.meta.push(
        "no_recycling_max_gamma_ratio",
        max_gamma_without_recycling(c.tau_required, c.r_min)?,
    );
    Ok(RunOutcome {
        output: out,
        infeasible: !report.feasible,
    })
}

fn detuning(c: &RunConfig, threads: Option<usize>) -> Result<Output, CliError> {
    let opts = sweep_options(c, threads);
    let result = detuning_range(
        c.gamma_ratio,
        &c.omega_init_grid.values(),
        &c.omega03_grid.values(),
        &opts,
    )?;
    Ok(sweep_output(&result))
}

fn orbit(c: &RunConfig) -> Result<Output, CliError> {
    let opts = sweep_options(c, Some(1));
    let o = orbit_trace(c.gamma_ratio, c.omega_init_over_lambda, c.omega03_over_lambda, &opts)?;
    let l = o.trace.params.lambda();
    let mut out = Output::new(&[
        "tau",
        "omega23",
        "omega01",
        "omega23_over_lambda",
        "omega01_over_lambda",
    ]);
    out.meta.push("orbit", o.verdict.label());
    verdict_meta(&mut out, &o.trace);
    out.meta.push("closure_from_start", o.closure_from_start);
    out.meta.push("closure_after_transient", o.closure_after_transient);
    for s in &o.trace.samples {
        out.row(vec![
            s.tau.into(),
            s.omega23.into(),
            s.omega01.into(),
            (s.omega23 / l).into(),
            (s.omega01 / l).into(),
        ]);
    }
    Ok(out)
}
