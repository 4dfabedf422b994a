use std::time::{Duration, Instant};

use qgibbs::estimator::{count_ratio, Estimator};
use qgibbs::hamiltonian::{build_ising, shift_positive, Boundary, ModelConfig, ShiftPolicy, DEFAULT_DENSE_LIMIT};
use qgibbs::qpe::{evolution_time, kernel_row, median_distribution, median_tail_mass, rounded_distribution, tail_mass, two_peaks};
use qgibbs::{bounds, EstimateOptions, EstimationMode, VerifyConfig, VerifyReport, ZMode};
use qgibbs_cli::{cmd_estimate, cmd_figure1, cmd_prepare, render_estimate, BetaGrid, EstimateParams, Figure1Params, Format, PrepareParams};

type Outcome = Result<(bool, String), String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn check(label: &str, v: bool, detail: String, notes: &mut Vec<String>) -> bool {
    notes.push(format!(
        "{label}={}{}",
        if v { "ok" } else { "FAIL" },
        if detail.is_empty() { String::new() } else { format!(" ({detail})") }
    ));
    v
}

fn within(elapsed: Duration, limit: Duration, notes: &mut Vec<String>) -> bool {
    check("runtime", elapsed < limit, format!("{:.2}s < {}s", elapsed.as_secs_f64(), limit.as_secs()), notes)
}

fn figure1() -> Outcome {
    let start = Instant::now();
    let model = ModelConfig { n: 10, boundary: Boundary::Periodic, shift_policy: ShiftPolicy::ExactGround, ..ModelConfig::default() };
    let p = Figure1Params { ratios: vec![0.5, 1.0, 2.0], betas: BetaGrid { start: 0.0, end: 3.0, steps: 61 } };
    let rows = cmd_figure1(&model, &p).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let curve = |r: f64| -> Vec<(f64, f64)> { rows.iter().filter(|x| x.g_over_j == r).map(|x| (x.beta, x.alpha)).collect() };
    let (half, one, two) = (curve(0.5), curve(1.0), curve(2.0));
    let mut notes = Vec::new();
    let mut ok = true;
    ok &= check("alpha(0)=0", [&half, &one, &two].iter().all(|c| c[0] == (0.0, 0.0)), String::new(), &mut notes);
    let worst_drop = [&half, &one, &two].iter().flat_map(|c| c.windows(2).map(|w| w[0].1 - w[1].1)).fold(f64::NEG_INFINITY, f64::max);
    ok &= check("nondecreasing", worst_drop <= 1e-12, format!("max drop {worst_drop:.2e}"), &mut notes);
    let top = rows.iter().map(|x| x.alpha).fold(f64::NEG_INFINITY, f64::max);
    ok &= check("alpha<=1/2", top <= 0.5 + 1e-12, format!("max {top:.4}"), &mut notes);
    let misordered: Vec<f64> = one
        .iter()
        .zip(half.iter().zip(&two))
        .filter(|(c, _)| c.0 >= 0.5)
        .filter(|(c, (h, t))| c.1 > h.1 + 1e-12 || c.1 > t.1 + 1e-12)
        .map(|(c, _)| c.0)
        .collect();
    let first = misordered.first().map(|b| format!(", first at beta={b}")).unwrap_or_default();
    ok &= check("critical minimum", misordered.is_empty(), format!("{} betas misordered{first}", misordered.len()), &mut notes);
    let dual = half.iter().zip(&two).map(|(a, b)| (a.1 - b.1).abs()).fold(0.0, f64::max);
    ok &= check("r<->1/r", dual <= 1e-8, format!("max gap {dual:.3e}"), &mut notes);
    ok &= within(elapsed, Duration::from_secs(10), &mut notes);
    Ok((ok, notes.join("; ")))
}

fn ising(n: usize, coupling: f64, field: f64) -> Result<qgibbs::LocalHamiltonian, String> {
    let h = build_ising(n, coupling, field, Boundary::Periodic, DEFAULT_DENSE_LIMIT).map_err(|e| e.to_string())?;
    shift_positive(&h, ShiftPolicy::ExactGround).map_err(|e| e.to_string())
}

fn end_to_end() -> Outcome {
    let start = Instant::now();
    let h = ising(3, 1.0, 1.0)?;
    let opts = EstimateOptions { eps: 0.1, confidence: 0.9, ..EstimateOptions::default() };
    let est = Estimator::new(&h, 1.0, opts).map_err(|e| e.to_string())?;
    let mut hits = 0;
    let mut worst = 0.0f64;
    for seed in 0..50u64 {
        let r = est.run(seed).map_err(|e| e.to_string())?;
        worst = worst.max(r.rel_err());
        hits += usize::from(r.rel_err() <= 0.1);
    }
    let elapsed = start.elapsed();
    let freq = hits as f64 / 50.0;
    let mut notes = Vec::new();
    let mut ok = check("frequency", freq >= 0.9 - 0.13, format!("{hits}/50 within 0.1, worst {worst:.4}"), &mut notes);
    ok &= within(elapsed, Duration::from_secs(300), &mut notes);
    Ok((ok, notes.join("; ")))
}

fn preparation() -> Outcome {
    let start = Instant::now();
    let model = ModelConfig { n: 2, ..ModelConfig::default() };
    let p = PrepareParams { beta: 1.0, eps: 0.1, m: Some(10), ..PrepareParams::default() };
    let r = cmd_prepare(&model, &p).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let mut notes = Vec::new();
    let mut ok = check("fidelity", r.fidelity >= 0.95, format!("{:.6}", r.fidelity), &mut notes);
    ok &= within(elapsed, Duration::from_secs(60), &mut notes);
    Ok((ok, notes.join("; ")))
}

fn qpe_statistics() -> Outcome {
    let (m, emax, padding) = (6u32, 1.0, 4u32);
    let step = 8.0 * emax / (1u64 << m) as f64;
    let mut notes = Vec::new();
    let mut ok = true;

    let on_grid = (1..7).map(|j| {
        let e = j as f64 * step;
        let exact = kernel_row(e, m, emax)[j];
        let padded = rounded_distribution(e, m, padding, emax)[j];
        (1.0 - exact).abs().max((1.0 - padded).abs())
    });
    let dev = on_grid.fold(0.0, f64::max);
    ok &= check("on-grid", dev <= 1e-10, format!("max |1-p| {dev:.1e}"), &mut notes);

    let literal = 2f64.powi(-(m as i32)) / evolution_time(emax);
    let fine = step / (1u64 << padding) as f64;
    let beyond = |raw: &[f64], e: f64, tol: f64| -> f64 {
        raw.iter().enumerate().filter(|(x, _)| (*x as f64 * fine - e).abs() > tol + 1e-12).map(|(_, p)| p).sum()
    };
    let (mut worst, mut worst_literal, mut worst_rounded) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..101 {
        let e = (3.0 + i as f64 / 100.0) * step;
        let raw = kernel_row(e, m + padding, emax);
        worst = worst.max(beyond(&raw, e, step));
        worst_literal = worst_literal.max(beyond(&raw, e, literal));
        let dist = rounded_distribution(e, m, padding, emax);
        worst_rounded = worst_rounded.max(tail_mass(&dist, two_peaks(e, m, emax)));
    }
    ok &= check(
        "tail<1/16",
        worst < 1.0 / 16.0,
        format!("padded register beyond one grid step: worst {worst:.5}; literal 2^-m/t tolerance: {worst_literal:.4}; rounded outside both neighbours: {worst_rounded:.5}"),
        &mut notes,
    );

    let m4 = 4u32;
    let step4 = 8.0 * emax / 16.0;
    let mut worst_median = 0.0f64;
    let mut mass_err = 0.0f64;
    for i in 0..101 {
        let e = (3.0 + i as f64 / 100.0) * step4;
        let single = rounded_distribution(e, m4, padding, emax);
        mass_err = mass_err.max((median_distribution(&single, 5).iter().sum::<f64>() - 1.0).abs());
        worst_median = worst_median.max(median_tail_mass(&single, 5, two_peaks(e, m4, emax)));
    }
    ok &= check(
        "median eta=5",
        worst_median <= 2f64.powi(-5) && mass_err < 1e-12,
        format!("worst {worst_median:.2e} <= {:.4}", 2f64.powi(-5)),
        &mut notes,
    );
    Ok((ok, notes.join("; ")))
}

fn counting() -> Outcome {
    let mut hits = 0;
    for seed in 0..200u64 {
        let r = count_ratio(0.5, 0.05, 0.95, seed).map_err(|e| e.to_string())?;
        hits += usize::from((r.estimate - 0.5).abs() <= 0.05);
    }
    Ok((hits >= 190, format!("{hits}/200 within 0.05")))
}

fn bound_line(report: &VerifyReport, name: &str) -> Result<(bool, String), String> {
    let b = report.get(name).ok_or_else(|| format!("missing bound {name}"))?;
    Ok((b.pass, format!("{name}: max {:.4e} vs {:.4e}, {} of {} violated", b.max_observed_ratio, b.bound, b.violations, b.trials)))
}

fn log_perturbation(report: &VerifyReport, elapsed: Duration) -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for name in ["log_lipschitz_matrix", "scalar_kappa_region", "contour_vs_spectral_log"] {
        let (pass, detail) = bound_line(report, name)?;
        ok &= check(name, pass, detail, &mut notes);
    }
    let (_, wedge) = bound_line(report, "scalar_kappa_wedge")?;
    notes.push(format!("reference {wedge}"));
    ok &= within(elapsed, Duration::from_secs(120), &mut notes);
    Ok((ok, notes.join("; ")))
}

fn single_bound(report: &VerifyReport, names: &[&str]) -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for name in names {
        let (pass, detail) = bound_line(report, name)?;
        ok &= check(name, pass, detail, &mut notes);
    }
    Ok((ok, notes.join("; ")))
}

fn classical() -> Outcome {
    let h = ising(3, 1.0, 0.0)?;
    let diag = h.dense().map_err(|e| e.to_string())?;
    let direct: f64 = (0..diag.nrows()).map(|x| (-diag[(x, x)].re).exp()).sum();
    let opts = EstimateOptions { eps: 0.05, mode: EstimationMode::Classical, ..EstimateOptions::default() };
    let est = Estimator::new(&h, 1.0, opts).map_err(|e| e.to_string())?;
    let (mut hits, mut qpe_calls) = (0, 0u64);
    for seed in 0..50u64 {
        let r = est.run(seed).map_err(|e| e.to_string())?;
        qpe_calls += r.cost.qpe_invocations;
        hits += usize::from((r.z_hat / direct - 1.0).abs() <= 0.05);
    }
    let mut notes = Vec::new();
    let mut ok = check("frequency", hits >= 45, format!("{hits}/50 within 5%"), &mut notes);
    ok &= check("qpe invocations", qpe_calls == 0, format!("{qpe_calls}"), &mut notes);
    Ok((ok, notes.join("; ")))
}

fn determinism() -> Outcome {
    let model = ModelConfig::default();
    let p = EstimateParams {
        betas: BetaGrid { start: 0.5, end: 1.0, steps: 2 },
        options: EstimateOptions { z_mode: ZMode::SelfHosted, ..EstimateOptions::default() },
        ..EstimateParams::default()
    };
    let render = || -> Result<String, String> {
        let r = cmd_estimate(&model, &p, 42).map_err(|e| e.to_string())?;
        Ok(render_estimate(&model, 42, &r, Format::Json))
    };
    let (a, b) = (render()?, render()?);
    Ok((a == b, format!("{} bytes", a.len())))
}

fn main() {
    let verify = || {
        let start = Instant::now();
        let report = bounds::verify_bounds(&VerifyConfig::default());
        (report, start.elapsed())
    };
    let (report, verify_time) = verify();
    let report = report.map_err(|e| e.to_string());

    let criteria: Vec<Criterion> = vec![
        ("figure 1 reproduction", Box::new(figure1)),
        ("end-to-end partition estimation", Box::new(end_to_end)),
        ("Gibbs preparation fidelity", Box::new(preparation)),
        ("phase estimation statistics", Box::new(qpe_statistics)),
        ("counting calibration", Box::new(counting)),
        ("logarithm perturbation", Box::new(|| log_perturbation(report.as_ref()?, verify_time))),
        ("partition function perturbation", Box::new(|| single_bound(report.as_ref()?, &["weyl_partition"]))),
        ("Gibbs state fidelity and trace monotonicity", Box::new(|| single_bound(report.as_ref()?, &["fidelity", "gt_monotonicity"]))),
        ("classical mode", Box::new(classical)),
        ("determinism", Box::new(determinism)),
    ];

    let mut errors = 0;
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok((pass, detail)) => {
                failures += usize::from(!pass);
                println!("{} criterion {}: {name} [{secs:.2}s] {detail}", if pass { "PASS" } else { "FAIL" }, i + 1);
            }
            Err(e) => {
                errors += 1;
                println!("FAIL criterion {}: {name} [{secs:.2}s] error: {e}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed, {errors} errored", criteria.len() - failures - errors);
    if errors > 0 {
        std::process::exit(1);
    }
}
