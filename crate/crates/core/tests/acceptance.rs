//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p disom --test acceptance`.

use std::process::ExitCode;
use std::time::Instant;

use disom::analysis::{clone_monte_carlo_checks, gamblers_ruin_checks, generation_event_stats, EventStats};
use disom::harness::{default_p_grid, noise_key_for_seed, FIGURE2_BUDGET};
use disom::report::{trial_rows, trials_csv};
use disom::{
    figure1_sweep, figure2_params, figure2_sweep, run_experiment, run_experiments, run_to_target_with,
    uniform_random_point, update_lambda, AlgorithmKind, ControllerParams, DistortedOneMax, EvalCounter,
    ExperimentConfig, RandomStream, RunOptions, SweepOptions, TargetSpec,
};

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }
}

fn clone_bounds() -> Outcome {
    let checks = clone_monte_carlo_checks(100_000, 11);
    let failed: Vec<_> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    let worst = checks.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min);
    Outcome::new(
        failed.is_empty(),
        format!("{} checks, smallest margin {worst:.3e}, failed {failed:?}", checks.len()),
    )
}

fn gamblers_ruin() -> Outcome {
    let checks = gamblers_ruin_checks();
    let failed: Vec<_> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    let worst = checks
        .iter()
        .map(|c| (c.formula - c.oracle).abs())
        .fold(0.0, f64::max);
    Outcome::new(
        failed.is_empty(),
        format!("{} checks, max abs error {worst:.3e}, failed {failed:?}", checks.len()),
    )
}

fn controller() -> Outcome {
    let params = ControllerParams::new(1.5, 1.0, 10.0).unwrap();
    // F = 1.5, s = 1, cap 10: grow to the cap, reset, then clamp at 1
    let script = [false, false, false, false, false, false, false, true, true];
    let expected = [1.5, 2.25, 3.375, 5.0625, 7.59375, 10.0, 1.0, 1.0, 1.0];
    let mut lambda = 1.0;
    let mut trajectory_ok = true;
    for (&success, &want) in script.iter().zip(&expected) {
        lambda = update_lambda(lambda, success, &params).unwrap();
        trajectory_ok &= lambda == want;
    }

    let quarter = ControllerParams::new(2.0, 0.25, 1000.0).unwrap();
    let mut lambda = 3.0;
    let mut quarter_ok = true;
    for (&success, &want) in [false, false, true, false, true, true, true].iter().zip(&[
        48.0, 768.0, 384.0, 1000.0, 500.0, 250.0, 125.0,
    ]) {
        lambda = update_lambda(lambda, success, &quarter).unwrap();
        quarter_ok &= lambda == want;
    }
    let reset = update_lambda(1000.0, false, &quarter).unwrap() == 1.0;

    let mut worst = 0.0f64;
    for s in [1.0, 0.5, 0.25] {
        let f = 1.5;
        let params = ControllerParams::new(f, s, 1e6).unwrap();
        for lambda0 in [2.0, 7.3, 40.0, 123.456] {
            let product = lambda0 * (1.0 / f) * f.powf(1.0 / s).powf(s);
            worst = worst.max(((product - lambda0) / lambda0).abs());
            // the same identity executed by the controller: one failure
            // undone by 1/s successes
            let mut l = update_lambda(lambda0, false, &params).unwrap();
            for _ in 0..(1.0 / s).round() as u32 {
                l = update_lambda(l, true, &params).unwrap();
            }
            worst = worst.max(((l - lambda0) / lambda0).abs());
            if s == 1.0 {
                let l = update_lambda(lambda0, true, &params).unwrap();
                let l = update_lambda(l, false, &params).unwrap();
                worst = worst.max(((l - lambda0) / lambda0).abs());
            }
        }
    }
    let composition_ok = worst <= 1e-9;
    Outcome::new(
        trajectory_ok && quarter_ok && reset && composition_ok,
        format!(
            "golden trajectories {}, reset {}, composition max rel error {worst:.3e}",
            trajectory_ok && quarter_ok,
            reset
        ),
    )
}

fn frozen_noise() -> Outcome {
    let n = 64;
    let landscape = DistortedOneMax::new(n, 0.1, (n as f64).ln(), noise_key_for_seed(5)).unwrap();
    let mut rng = RandomStream::new(99);
    let points: Vec<_> = (0..1_000).map(|_| uniform_random_point(n, &mut rng).unwrap()).collect();
    let mut counter = EvalCounter::new();
    let first: Vec<_> = points
        .iter()
        .map(|x| landscape.evaluate(x, &mut counter).unwrap())
        .collect();
    let mut discrepancies = 0u64;
    for round in 0..10 {
        for (x, f) in points.iter().zip(&first).skip(round % 3) {
            discrepancies += (landscape.evaluate(x, &mut counter).unwrap() != *f) as u64;
        }
        for (x, f) in points.iter().zip(&first).take(round % 3) {
            discrepancies += (landscape.evaluate(x, &mut counter).unwrap() != *f) as u64;
        }
    }
    let reevaluations = counter.count() - points.len() as u64;

    let mut distorted = 0u64;
    let fresh = 100_000u64;
    for _ in 0..fresh {
        let x = uniform_random_point(n, &mut rng).unwrap();
        distorted += landscape.is_distorted(&x).unwrap() as u64;
    }
    let rate = distorted as f64 / fresh as f64;
    Outcome::new(
        discrepancies == 0 && reevaluations == 10_000 && (rate - 0.1).abs() <= 0.003,
        format!("{discrepancies} discrepancies over {reevaluations} re-evaluations, distortion rate {rate:.4}"),
    )
}

fn figure2_ordering() -> Outcome {
    let n_list = [100usize, 200, 400, 800];
    let opts = SweepOptions {
        replications: 20,
        budget: Some(FIGURE2_BUDGET),
        base_seed: 1,
        parallelism: 1,
    };
    let table = match figure2_sweep(&n_list, &opts) {
        Ok(t) => t,
        Err(e) => return Outcome::new(false, e.to_string()),
    };
    let mut ordered = true;
    let mut ratios = Vec::new();
    let mut parts = Vec::new();
    for &n in &n_list {
        let stats = |algo: &str| &table.row(n, algo).expect("row present").stats;
        let (comma, plus, sa) = (stats("static_comma"), stats("static_plus"), stats("sa_comma_reset"));
        ordered &= comma.median < sa.median && comma.median < plus.median;
        let ratio = sa.median.min(plus.median) / comma.median;
        ratios.push(ratio);
        parts.push(format!(
            "n={n} comma={} sa={} plus={} gap={ratio:.2} censored {}/{}/{}",
            comma.median, sa.median, plus.median, comma.censored_count, sa.censored_count, plus.censored_count
        ));
    }
    let increasing = ratios.windows(2).all(|w| w[1] > w[0]);
    Outcome::new(
        ordered && increasing,
        format!("ordering {ordered}, gap increasing {increasing}; {}", parts.join("; ")),
    )
}

fn figure1_flatness() -> Outcome {
    let opts = SweepOptions {
        replications: 20,
        ..Default::default()
    };
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [100usize, 200] {
        let grid = default_p_grid(n).unwrap();
        let upper = &grid[grid.len() / 2..];
        let rows = match figure1_sweep(&[n], Some(upper), &opts) {
            Ok(r) => r,
            Err(e) => return Outcome::new(false, e.to_string()),
        };
        let values: Vec<f64> = rows.iter().filter_map(|r| r.stats.normalized_mean).collect();
        let max = values.iter().cloned().fold(f64::MIN, f64::max);
        let min = values.iter().cloned().fold(f64::MAX, f64::min);
        let spread = max / min;
        ok &= values.len() == upper.len() && spread < 5.0;
        parts.push(format!("n={n} normalized mean in [{min:.3}, {max:.3}] ratio {spread:.2}"));
    }
    Outcome::new(ok, parts.join("; "))
}

fn comma_escape() -> Outcome {
    let n = 400;
    let (lambda, p) = figure2_params(n).unwrap();
    let nf = n as f64;
    let config = ExperimentConfig {
        experiment_id: "comma_escape".into(),
        algorithm: AlgorithmKind::StaticComma { lambda },
        n,
        p,
        d: nf.ln(),
        k_star: nf.powf(0.4),
        budget: FIGURE2_BUDGET,
        replications: 20,
        base_seed: 1000,
        parallelism: 1,
    };
    let records = match run_experiment(&config) {
        Ok(r) => r,
        Err(e) => return Outcome::new(false, e.to_string()),
    };
    let hits = records.iter().filter(|r| r.hit_target).count();
    Outcome::new(
        hits * 10 >= records.len() * 9,
        format!("lambda={lambda} p={p:.5}: {hits}/{} trials hit the target", records.len()),
    )
}

fn parallel_determinism() -> Outcome {
    let n = 80;
    let nf = n as f64;
    let mk = |id: &str, algorithm| ExperimentConfig {
        experiment_id: id.into(),
        algorithm,
        n,
        p: 0.03,
        d: nf.ln(),
        k_star: nf.powf(0.4),
        budget: 300_000,
        replications: 12,
        base_seed: 77,
        parallelism: 1,
    };
    let configs = vec![
        mk(
            "sa",
            AlgorithmKind::SaCommaReset(ControllerParams::new(1.5, 1.0, nf * nf.ln()).unwrap()),
        ),
        mk("comma", AlgorithmKind::StaticComma { lambda: 7 }),
        mk("plus", AlgorithmKind::StaticPlus { lambda: 7 }),
        mk("one", AlgorithmKind::OnePlusOne),
    ];
    let csv_for = |threads: usize| -> Result<String, disom::Error> {
        let results = run_experiments(&configs, threads)?;
        let rows = trial_rows(configs.iter().zip(results.iter().map(Vec::as_slice)));
        Ok(trials_csv(&rows))
    };
    match (csv_for(1), csv_for(8)) {
        (Ok(a), Ok(b)) => Outcome::new(
            a == b,
            format!("{} bytes, {} rows, identical {}", a.len(), a.lines().count() - 1, a == b),
        ),
        (Err(e), _) | (_, Err(e)) => Outcome::new(false, e.to_string()),
    }
}

fn clean_selection() -> Outcome {
    let n = 200;
    let nf = n as f64;
    let params = ControllerParams::new(1.5, 1.0, nf * nf.ln()).unwrap();
    let kind = AlgorithmKind::SaCommaReset(params);
    let spec = TargetSpec::new(nf.powf(0.4), n).unwrap();
    let options = RunOptions {
        record_trajectory: true,
        track_distinct_queries: false,
    };
    let mut total = EventStats::default();
    for seed in 0..20u64 {
        let landscape = DistortedOneMax::new(n, 0.02, nf.ln(), noise_key_for_seed(seed)).unwrap();
        let result = match run_to_target_with(kind, &landscape, spec, FIGURE2_BUDGET, seed, options) {
            Ok(r) => r,
            Err(e) => return Outcome::new(false, e.to_string()),
        };
        let stats = generation_event_stats(result.trajectory.as_deref()).unwrap();
        total.generations += stats.generations;
        total.with_distorted_offspring += stats.with_distorted_offspring;
        total.clean_selected_despite_distorted += stats.clean_selected_despite_distorted;
    }
    let fraction = total.clean_selected_fraction().unwrap_or(0.0);
    Outcome::new(
        total.with_distorted_offspring > 0 && fraction <= 0.01,
        format!(
            "{} of {} generations with a distorted offspring selected a clean one ({:.4})",
            total.clean_selected_despite_distorted, total.with_distorted_offspring, fraction
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("clone probability lower bounds (Monte Carlo)", clone_bounds),
        ("gambler's ruin closed form vs absorption oracle", gamblers_ruin),
        ("lambda controller trajectories and composition", controller),
        ("frozen noise consistency and distortion rate", frozen_noise),
        ("static comma fastest with growing gap", figure2_ordering),
        ("normalized runtime flat over the upper p-grid", figure1_flatness),
        ("static comma escapes at n = 400", comma_escape),
        ("CSV identical under 1 and 8 threads", parallel_determinism),
        ("clean offspring rarely selected over distorted", clean_selection),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let verdict = if outcome.passed { "PASS" } else { "FAIL" };
        failures += !outcome.passed as usize;
        println!(
            "{verdict} [{}] {name}: {} ({:.1}s)",
            i + 1,
            outcome.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
