use std::time::Instant;

use threshreg::inference::critical_value;
use threshreg::montecarlo::{estimation_experiment, size_experiment, SimConfig};
use threshreg::{detect, KernelConfig, Sample, SearchConfig, WeightBox};

use crate::args::{CriticalArgs, DetectArgs, Experiment, SimulateArgs};
use crate::data::{load_csv, DatasetSpec};
use crate::error::CliError;
use crate::report::{shell_word, tool_version, CriticalReport, CriticalRow, DetectEcho, DetectTiming, RunReport, SimReport, SimTable, SCHEMA_VERSION};

const FULL_REPS: usize = 1000;

fn check_alpha(alpha: f64) -> Result<(), CliError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--alpha must lie in (0, 1), got {alpha}")))
    }
}

fn column_mean(sample: &Sample, col: usize) -> f64 {
    (0..sample.len()).map(|i| sample.x_row(i)[col]).sum::<f64>() / sample.len() as f64
}

/// The box from the flags, or mean +/- 2 sd of each covariate.
fn resolve_box(args: &DetectArgs, sample: &Sample) -> Result<(WeightBox, bool), CliError> {
    let p = sample.dim();
    if args.box_lo.is_empty() && args.box_hi.is_empty() {
        let lo = (0..p).map(|j| column_mean(sample, j) - 2.0 * sample.x_std(j)).collect();
        let hi = (0..p).map(|j| column_mean(sample, j) + 2.0 * sample.x_std(j)).collect();
        return Ok((WeightBox::new(lo, hi).map_err(|e| CliError::Data(format!("cannot form the default box: {e}")))?, true));
    }
    if args.box_lo.len() != p || args.box_hi.len() != p {
        return Err(CliError::Usage(format!(
            "--box-lo and --box-hi must each be given once per covariate ({p}), got {} and {}",
            args.box_lo.len(),
            args.box_hi.len()
        )));
    }
    Ok((WeightBox::new(args.box_lo.clone(), args.box_hi.clone()).map_err(CliError::from_library)?, false))
}

fn reproduce_line(args: &DetectArgs, echo: &DetectEcho) -> String {
    let mut words = vec!["threshreg".to_string(), "detect".into(), "--input".into(), shell_word(&echo.input)];
    words.extend(["--y".into(), shell_word(&args.y)]);
    for x in &args.x {
        words.extend(["--x".into(), shell_word(x)]);
    }
    words.extend(["--q".into(), shell_word(&args.q)]);
    if args.no_header {
        words.push("--no-header".into());
    }
    let pairs = [
        ("--c", echo.c.to_string()),
        ("--delta", echo.delta.to_string()),
        ("--scale", echo.scale.to_string()),
        ("--alpha", echo.alpha.to_string()),
        ("--m", echo.m.to_string()),
        ("--grid-points", echo.grid_points.to_string()),
        ("--trim", echo.trim.to_string()),
        ("--test-trim", echo.test_trim.to_string()),
        ("--min-regime-obs", echo.min_regime_obs.to_string()),
        ("--max-thresholds", echo.max_thresholds.to_string()),
    ];
    for (flag, value) in pairs {
        words.extend([flag.to_string(), value]);
    }
    for (lo, hi) in echo.box_lo.iter().zip(&echo.box_hi) {
        words.extend(["--box-lo".into(), lo.to_string(), "--box-hi".into(), hi.to_string()]);
    }
    words.join(" ")
}

fn percentile(q: &[f64], gamma: f64) -> f64 {
    100.0 * q.iter().filter(|&&v| v < gamma).count() as f64 / q.len() as f64
}

pub fn run_detect(args: &DetectArgs) -> Result<RunReport, CliError> {
    check_alpha(args.alpha)?;
    let search = SearchConfig {
        grid_points: args.grid_points,
        trim_fraction: args.trim,
        max_thresholds: args.max_thresholds,
        alpha: args.alpha,
        m: args.m,
        test_trim: args.test_trim,
    };
    search.validate().map_err(CliError::from_library)?;
    if args.min_regime_obs == 0 {
        return Err(CliError::Usage("--min-regime-obs must be at least 1".into()));
    }
    if let Some(s) = args.scale {
        if !(s > 0.0 && s.is_finite()) {
            return Err(CliError::Usage(format!("--scale must be positive, got {s}")));
        }
    }

    let start = Instant::now();
    let spec = DatasetSpec {
        path: args.input.clone(),
        y_column: args.y.clone(),
        x_columns: args.x.clone(),
        q_column: args.q.clone(),
        has_header: !args.no_header,
    };
    let loaded = load_csv(&spec)?;
    let load_seconds = start.elapsed().as_secs_f64();
    let sample = &loaded.sample;
    if loaded.dropped_rows > 0 {
        eprintln!("warning: dropped {} rows with missing or non-numeric cells", loaded.dropped_rows);
    }

    let p = sample.dim();
    let scale = match args.scale {
        Some(s) => s,
        None => {
            let s = (0..p).map(|j| sample.x_std(j)).sum::<f64>() / p as f64;
            if !(s > 0.0 && s.is_finite()) {
                return Err(CliError::Data("covariates have zero spread; pass --scale".into()));
            }
            s
        }
    };
    let mut kernel = KernelConfig::from_rule(args.c, scale, sample.len(), args.delta, p).map_err(CliError::from_library)?;
    kernel.min_regime_obs = args.min_regime_obs;
    kernel.validate().map_err(CliError::from_library)?;
    let (weight_box, box_from_data) = resolve_box(args, sample)?;

    let start = Instant::now();
    let detection = detect(sample, &kernel, &search, &weight_box).map_err(|f| CliError::Estimation {
        error: f.error,
        partial: Some(Box::new(f.partial)),
    })?;
    let detect_seconds = start.elapsed().as_secs_f64();

    let mut config = DetectEcho {
        input: args.input.display().to_string(),
        y: args.y.clone(),
        x: args.x.clone(),
        q: args.q.clone(),
        has_header: !args.no_header,
        n: sample.len(),
        dropped_rows: loaded.dropped_rows,
        c: args.c,
        delta: args.delta,
        scale,
        scale_from_data: args.scale.is_none(),
        h: kernel.h,
        m: args.m,
        alpha: args.alpha,
        grid_points: args.grid_points,
        trim: args.trim,
        test_trim: args.test_trim,
        min_regime_obs: args.min_regime_obs,
        max_thresholds: args.max_thresholds,
        box_lo: weight_box.lower.clone(),
        box_hi: weight_box.upper.clone(),
        box_from_data,
        reproduce: String::new(),
    };
    config.reproduce = reproduce_line(args, &config);
    let threshold_percentiles = detection.gammas.iter().map(|&g| percentile(sample.q(), g)).collect();
    Ok(RunReport {
        schema_version: SCHEMA_VERSION,
        version: tool_version(),
        command: "detect".into(),
        config,
        timing: DetectTiming { load_seconds, detect_seconds },
        detection,
        threshold_percentiles,
    })
}

pub fn run_critical_values(args: &CriticalArgs) -> Result<CriticalReport, CliError> {
    if args.k_min == 0 || args.k_min > args.k_max {
        return Err(CliError::Usage(format!("need 1 <= --k-min <= --k-max, got {} and {}", args.k_min, args.k_max)));
    }
    if args.alpha.is_empty() {
        return Err(CliError::Usage("at least one --alpha is required".into()));
    }
    for &a in &args.alpha {
        check_alpha(a)?;
    }
    let mut rows = Vec::with_capacity(args.k_max - args.k_min + 1);
    for k in args.k_min..=args.k_max {
        // + 0.0 turns the median's -0 into 0
        let values = args.alpha.iter().map(|&a| critical_value(k, a).map(|v| v + 0.0)).collect::<Result<Vec<_>, _>>();
        rows.push(CriticalRow { k, values: values.map_err(CliError::from_library)? });
    }
    Ok(CriticalReport {
        schema_version: SCHEMA_VERSION,
        version: tool_version(),
        command: "critical-values".into(),
        alphas: args.alpha.clone(),
        rows,
    })
}

pub fn run_simulate(args: &SimulateArgs) -> Result<SimReport, CliError> {
    for &a in &args.alpha {
        check_alpha(a)?;
    }
    let config = SimConfig {
        n: args.n,
        reps: if args.full { FULL_REPS } else { args.reps },
        seed: args.seed,
        c: args.c,
        delta: args.delta,
        m: args.m,
        alphas: args.alpha.clone(),
        box_half: args.box_half,
        search: SearchConfig {
            grid_points: args.grid_points,
            trim_fraction: args.trim,
            m: args.m,
            test_trim: args.test_trim,
            ..SearchConfig::default()
        },
    };
    config.validate().map_err(CliError::from_library)?;
    let start = Instant::now();
    let (command, table) = match args.experiment {
        Experiment::Size => ("simulate size", SimTable::Size(size_experiment(&config).map_err(CliError::from_library)?)),
        Experiment::Estimation => ("simulate estimation", SimTable::Estimation(estimation_experiment(&config).map_err(CliError::from_library)?)),
    };
    Ok(SimReport {
        schema_version: SCHEMA_VERSION,
        version: tool_version(),
        command: command.into(),
        config,
        seconds: start.elapsed().as_secs_f64(),
        table,
    })
}
