//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line; the test fails if any
//! criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex;
use pt_forge::ptcore::{mat2_det, mat2_mul, PtParams};
use pt_forge::quadsim::{default_tolerances, evolve_four_level, EmulationReport, Schedule};
use pt_forge::sweep::{
    corner_feasible, critical_recycling, detuning_range, detuning_ranges_on, feasibility_region, max_feasible_gamma,
    max_gamma_without_recycling, scan_breakdown, FeasibilityQuery, SweepOptions,
};
use pt_forge::synth::{
    analytic_controls, breakdown_approx, exact_breakdown_time, integrate_controls, total_initial_population,
    ControlParams, ControlTrace, Regime,
};

struct Ledger {
    failed: Vec<usize>,
}

impl Ledger {
    fn record(&mut self, id: usize, title: &str, pass: bool, detail: String) {
        println!("{} [{id}] {title}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failed.push(id);
        }
    }
}

fn reference_point() -> ControlParams<f64> {
    ControlParams::from_ratios(0.5, 0.05, 0.0).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn reference_threshold() -> f64 {
    critical_recycling(0.5, 0.05, &SweepOptions::default())
        .unwrap()
        .omega03_over_lambda
}

fn oracle_equivalence(ledger: &mut Ledger) {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut worst_at = (0.0, 0.0);
    for g in [0.2, 0.5, 0.8] {
        for oi in [0.02, 0.05, 0.1] {
            let p = ControlParams::from_ratios(g, oi, 0.0).unwrap();
            let tau_star = exact_breakdown_time(&p, 1e-12).unwrap();
            let trace = integrate_controls(&p.with_horizon(0.95 * tau_star)).unwrap();
            for s in trace.samples.iter().filter(|s| s.tau <= 0.95 * tau_star) {
                let a = analytic_controls(&p, s.tau).unwrap();
                let e = rel(s.omega23, a.omega23)
                    .max(rel(s.omega01, a.omega01))
                    .max(rel(s.delta0, a.delta0))
                    .max(rel(s.delta3, a.delta3));
                if e > worst {
                    worst = e;
                    worst_at = (g, oi);
                }
            }
        }
    }
    let elapsed = secs(start.elapsed());
    ledger.record(
        1,
        "oracle equivalence",
        worst <= 1e-6 && elapsed < 5.0,
        format!(
            "max rel err {worst:.2e} at gamma/lambda={}, omega_init/lambda={} (tol 1e-6); {elapsed:.2} s (limit 5 s)",
            worst_at.0, worst_at.1
        ),
    );
}

fn reference_breakdown(ledger: &mut Ledger) {
    let p = reference_point();
    let exact = exact_breakdown_time(&p, 1e-12).unwrap();
    let detected = integrate_controls(&p).unwrap().tau_star().unwrap_or(f64::NAN);
    let target = 41.09 * PI;
    let pass = rel(exact, target) <= 5e-3 && rel(detected, target) <= 5e-3 && rel(detected, exact) <= 1e-4;
    ledger.record(
        2,
        "breakdown time",
        pass,
        format!(
            "exact {:.5}pi, event-detected {:.5}pi (target 41.09pi +/- 0.5%); exact vs detected {:.2e} (tol 1e-4)",
            exact / PI,
            detected / PI,
            rel(detected, exact)
        ),
    );
}

fn approximations(ledger: &mut Ledger) {
    let pt = PtParams::from_ratio(0.5).unwrap();
    let mut small = 0.0f64;
    for oi in [0.005, 0.01, 0.02, 0.03, 0.04, 0.05] {
        let p = ControlParams::from_ratios(0.5, oi, 0.0).unwrap();
        let exact = exact_breakdown_time(&p, 1e-12).unwrap();
        small = small.max(rel(breakdown_approx(&p, Regime::Small).unwrap(), exact));
    }
    let mut large = 0.0f64;
    let mut large_at = 0.0;
    for oi in [1.0, 1.5, 2.0, 5.0, 10.0] {
        let p = ControlParams::new(pt, oi);
        let exact = exact_breakdown_time(&p, 1e-12).unwrap();
        let e = rel(breakdown_approx(&p, Regime::Large).unwrap(), exact);
        if e > large {
            large = e;
            large_at = oi;
        }
    }
    ledger.record(
        3,
        "breakdown estimates",
        small <= 0.02 && large <= 0.10,
        format!(
            "small-coupling max rel err {small:.2e} over omega_init/lambda in [0.005, 0.05] (tol 2%); \
             large-coupling max rel err {large:.2e} at omega_init = {large_at} over [1, 10] (tol 10%)"
        ),
    );
}

fn threshold(ledger: &mut Ledger, crit: f64) {
    ledger.record(
        4,
        "recycling threshold",
        rel(crit, 0.01412) <= 0.05,
        format!(
            "computed omega03*/lambda = {crit:.6} (target 0.01412 +/- 5%, off by {:.2}%); \
             the alternative printed value 0.1412 is off by {:.1}%",
            100.0 * rel(crit, 0.01412),
            100.0 * rel(crit, 0.1412)
        ),
    );
}

fn pt_fraction(ledger: &mut Ledger, crit: f64) {
    let closed = 1.0 / total_initial_population(&reference_point());
    let mut measured = Vec::new();
    for o03 in [0.0, crit, 2.0 * crit] {
        let p = ControlParams::from_ratios(0.5, 0.05, o03).unwrap();
        measured.push(integrate_controls(&p).unwrap().pt_fraction());
    }
    let agree = (measured[0] - closed).abs();
    let spread = measured.iter().map(|m| (m - measured[0]).abs()).fold(0.0, f64::max);
    ledger.record(
        5,
        "PT fraction",
        rel(closed, 1.0 / 101.0) <= 1e-12 && agree <= 1e-6 && spread <= 1e-6,
        format!(
            "closed form {closed:.9} (1/101 = {:.9}); trace-measured {:.9} (diff {agree:.1e}, tol 1e-6); \
             spread over omega03 in {{0, w*, 2w*}} {spread:.1e} (tol 1e-6)",
            1.0 / 101.0,
            measured[0]
        ),
    );
}

fn emulate(p: &ControlParams<f64>, tau_end: Option<f64>) -> (ControlTrace<f64>, EmulationReport<f64>) {
    let trace = integrate_controls(p).unwrap();
    let schedule = Schedule::from_trace(&trace).unwrap();
    let end = tau_end.unwrap_or(schedule.span().1);
    let run = evolve_four_level(&schedule, schedule.initial_state(), end, default_tolerances()).unwrap();
    (trace, run.report)
}

fn embedding(ledger: &mut Ledger, crit: f64) {
    let p = reference_point();
    let tau_star = exact_breakdown_time(&p, 1e-12).unwrap();
    let (_, short) = emulate(&p.with_horizon(tau_star), Some(0.9 * tau_star));
    let recycled = ControlParams::from_ratios(0.5, 0.05, 2.0 * crit)
        .unwrap()
        .with_horizon(20.0 * PI);
    let (trace, long) = emulate(&recycled, None);
    let covered = long.taus.last().copied().unwrap_or(0.0);
    let pass = short.max_embedding_error <= 1e-6
        && long.max_embedding_error <= 1e-6
        && !trace.verdict.is_terminated()
        && covered >= 20.0 * PI * (1.0 - 1e-12)
        && short.norm_drift_per_100pi <= 1e-9
        && long.norm_drift_per_100pi <= 1e-9;
    ledger.record(
        6,
        "four-level embedding",
        pass,
        format!(
            "to 0.9 tau*: max err {:.2e}, drift {:.2e}/100pi; at 2 omega03* over {:.1} periods ({}): \
             max err {:.2e}, drift {:.2e}/100pi (tol 1e-6, 1e-9/100pi)",
            short.max_embedding_error,
            short.norm_drift_per_100pi,
            covered / (2.0 * PI),
            trace.verdict.label(),
            long.max_embedding_error,
            long.norm_drift_per_100pi
        ),
    );
}

fn detunings(ledger: &mut Ledger) {
    let p = reference_point();
    let (g, l) = (p.gamma(), p.lambda());
    let trace = integrate_controls(&p).unwrap();
    let outside = trace
        .samples
        .iter()
        .flat_map(|s| [s.delta0, s.delta3])
        .filter(|&d| d < (l - g) * (1.0 - 1e-12) || d > (l + g) * (1.0 + 1e-12))
        .count();

    let one_cycle = integrate_controls(&p.with_horizon(2.0 * PI)).unwrap();
    let width0 = detuning_ranges_on(&one_cycle, 0.0).unwrap().delta0.width();
    let limit_err = (width0 - 2.0 * g).abs();
    let faint = integrate_controls(&p.with_omega03(1e-9 * l).with_horizon(2.0 * PI)).unwrap();
    let faint_err = (detuning_ranges_on(&faint, 0.0).unwrap().delta0.width() - 2.0 * g).abs();

    let o03_grid = [0.02, 0.03, 0.05, 0.1, 0.2, 0.3, 0.5];
    let scan = detuning_range(0.5, &[0.02, 0.05, 0.1], &o03_grid, &SweepOptions::default()).unwrap();
    let widths: Vec<f64> = scan.column("delta3_range").unwrap().into_iter().flatten().collect();
    let worst3 = widths.iter().map(|w| rel(*w, 2.0 * g)).fold(0.0, f64::max);

    let pass = outside == 0 && limit_err <= 1e-6 && faint_err <= 1e-6 && !widths.is_empty() && worst3 <= 0.10;
    ledger.record(
        7,
        "detuning ranges",
        pass,
        format!(
            "{outside} of {} samples outside [lambda-gamma, lambda+gamma]; |d0 range - 2 gamma| = {limit_err:.1e} at \
             omega03 = 0 and {faint_err:.1e} at omega03 = 1e-9 lambda (tol 1e-6); d3 range within {:.2}% of 2 gamma \
             over {} periodic points of {} (tol 10%)",
            2 * trace.samples.len(),
            100.0 * worst3,
            widths.len(),
            scan.points.len()
        ),
    );
}

fn feasibility(ledger: &mut Ledger) {
    let start = Instant::now();
    let opts = SweepOptions::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for (g, expected) in [(0.5, true), (0.85, true), (0.875, true), (0.9, false)] {
        let query = FeasibilityQuery::new(g, 10.0 * PI, 0.1, 2.0);
        let region = feasibility_region(&query, &opts).unwrap();
        let corner = corner_feasible(&query, &opts).unwrap();
        let ok = region.feasible == expected && corner == expected;
        pass &= ok;
        parts.push(format!(
            "{g}: map {} corner {} (expected {}){}",
            verdict(region.feasible),
            verdict(corner),
            verdict(expected),
            if ok { "" } else { " MISMATCH" }
        ));
    }
    let elapsed = secs(start.elapsed());
    let max_g = max_feasible_gamma(10.0 * PI, 0.1, 2.0, 1e-5, &opts).unwrap();
    let no_recycling = max_gamma_without_recycling(10.0 * PI, 0.1).unwrap();
    pass &= (no_recycling - 0.257).abs() <= 0.005 && elapsed <= 300.0;
    ledger.record(
        8,
        "feasibility",
        pass,
        format!(
            "{}; largest feasible gamma/lambda {max_g:.5}; no-recycling limit {no_recycling:.4} (target 0.257 +/- 0.005); \
             maps {elapsed:.1} s (limit 300 s)",
            parts.join(", ")
        ),
    );
}

fn verdict(feasible: bool) -> &'static str {
    if feasible {
        "feasible"
    } else {
        "infeasible"
    }
}

fn property_summary(ledger: &mut Ledger) {
    let mut det = 0.0f64;
    let mut group = 0.0f64;
    let mut hyperbola = 0.0f64;
    let mut ellipse = 0.0f64;
    for k in 0..=19 {
        let g = 0.05 * k as f64;
        let pt = PtParams::from_ratio(g).unwrap();
        let (gm, l) = (pt.gamma(), pt.lambda());
        hyperbola = hyperbola.max((l * l - gm * gm - 1.0).abs());
        for j in 0..=40 {
            let t = -10.0 + 0.5 * j as f64;
            det = det.max((mat2_det(&pt.propagator(t)) - Complex::new(1.0, 0.0)).norm());
            let prod = mat2_mul(&pt.propagator(t), &pt.propagator(0.37 * t + 1.1));
            let direct = pt.propagator(1.37 * t + 1.1);
            for r in 0..2 {
                for c in 0..2 {
                    group = group.max((prod[r][c] - direct[r][c]).norm() / (1.0 + direct[r][c].norm()));
                }
            }
            let s = pt.evolve(PI / 2.0, t);
            let (n, w) = (s.norm(), s.magnetization());
            let lhs = (n - 1.0 - gm * gm).powi(2) + gm * gm * w * w;
            ellipse = ellipse.max((lhs - gm.powi(4)).abs() / (1.0 + gm.powi(4)));
        }
    }

    let mut min_coupling = f64::INFINITY;
    let mut residual = 0.0f64;
    for (g, oi, o03) in [(0.3, 0.05, 0.0), (0.5, 0.05, 0.03), (0.8, 0.1, 0.2), (0.5, 0.2, 0.5)] {
        let trace =
            integrate_controls(&ControlParams::from_ratios(g, oi, o03).unwrap().with_horizon(40.0 * PI)).unwrap();
        for s in &trace.samples {
            min_coupling = min_coupling.min(s.omega01.min(s.omega23));
        }
        residual = residual.max(trace.max_embedding_residual());
    }

    let ois: [f64; 5] = [0.01, 0.015, 0.02, 0.03, 0.05];
    let pts: Vec<(f64, f64)> = ois
        .iter()
        .map(|&oi| {
            let p = ControlParams::from_ratios(0.5, oi, 0.0).unwrap();
            (oi.ln(), exact_breakdown_time::<f64>(&p, 1e-12).unwrap().ln())
        })
        .collect();
    let slope = least_squares_slope(&pts);

    let grid = [0.01, 0.02, 0.05, 0.1, 0.2];
    let scans: Vec<_> = [Some(1), Some(3), None]
        .into_iter()
        .map(|t| {
            scan_breakdown(
                &[0.3, 0.7],
                &grid,
                0.02,
                &SweepOptions::default().with_horizon(80.0 * PI).with_threads(t),
            )
            .unwrap()
        })
        .collect();
    let deterministic = scans.windows(2).all(|w| w[0] == w[1]);

    let pass = det <= 1e-12
        && group <= 1e-12
        && hyperbola <= 1e-12
        && ellipse <= 1e-10
        && min_coupling > 0.0
        && residual <= 1e-9
        && (slope + 2.0).abs() <= 0.05
        && deterministic;
    ledger.record(
        9,
        "property summary",
        pass,
        format!(
            "|det U - 1| {det:.1e}; group {group:.1e}; hyperbola {hyperbola:.1e}; ellipse {ellipse:.1e}; \
             min coupling {min_coupling:.3e} (> 0); embedding residual {residual:.1e} (tol 1e-9); \
             log-log slope {slope:.4} (-2 +/- 0.05); sweeps identical across pool widths: {deterministic}"
        ),
    );
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn acceptance() {
    let mut ledger = Ledger { failed: Vec::new() };
    oracle_equivalence(&mut ledger);
    reference_breakdown(&mut ledger);
    approximations(&mut ledger);
    let crit = reference_threshold();
    threshold(&mut ledger, crit);
    pt_fraction(&mut ledger, crit);
    embedding(&mut ledger, crit);
    detunings(&mut ledger);
    feasibility(&mut ledger);
    property_summary(&mut ledger);
    assert!(ledger.failed.is_empty(), "failed criteria: {:?}", ledger.failed);
}
