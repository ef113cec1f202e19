use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime};

use hetcause::causality::run_tests;
use hetcause::dgp::default_coefficients;
use hetcause::io::write_csv;
use hetcause::montecarlo::ExperimentConfig;
use hetcause::{
    box_pierce_diagnostic, difference, fit_ols, load_csv, nw_covariance, power_curve,
    run_experiment, select_partition, simulate_var1, Bandwidth, BootstrapOptions, CsvOptions,
    Dataset, Execution, LagSelection, VarianceProfile,
};
use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

use crate::args::{
    Cli, Command, DataArgs, DesignArgs, FitArgs, KernelArgs, McArgs, OutputArgs, PowerCurveArgs,
    SimulateArgs, TestArgs,
};
use crate::manifest::{manifest_path, RunManifest};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Lib(#[from] hetcause::Error),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json encoding failed: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn is_numerical(&self) -> bool {
        matches!(self, CliError::Lib(e) if e.is_numerical())
    }

    pub fn exit_code(&self) -> u8 {
        if self.is_numerical() {
            2
        } else {
            1
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub fn dispatch(cli: Cli) -> Result<()> {
    let started = SystemTime::now();
    let clock = Instant::now();
    let (name, seed, params, output) = match &cli.command {
        Command::Fit(a) => ("fit", None, serde_json::to_value(a)?, a.output.clone()),
        Command::Test(a) => (
            "test",
            Some(a.seed),
            serde_json::to_value(a)?,
            a.output.clone(),
        ),
        Command::Simulate(a) => (
            "simulate",
            Some(a.seed),
            serde_json::to_value(a)?,
            a.output.clone(),
        ),
        Command::Mc(a) => (
            "mc",
            Some(a.seed),
            serde_json::to_value(resolve_mc(a)?)?,
            a.output.clone(),
        ),
        Command::PowerCurve(a) => (
            "power-curve",
            Some(a.seed),
            serde_json::to_value(resolve_power(a)?)?,
            a.output.clone(),
        ),
        Command::Kernelvar(a) => (
            "kernelvar",
            None,
            serde_json::to_value(a)?,
            a.output.clone(),
        ),
    };
    let artifact = match &cli.command {
        Command::Fit(a) => fit(a)?,
        Command::Test(a) => test(a)?,
        Command::Simulate(a) => simulate(a)?,
        Command::Mc(a) => mc(a)?,
        Command::PowerCurve(a) => power(a)?,
        Command::Kernelvar(a) => kernelvar(a)?,
    };
    emit(&output, &artifact)?;
    if let Some(path) = manifest_path(output.out.as_deref(), output.manifest.as_deref()) {
        let manifest = RunManifest::new(name, seed, params, started, clock.elapsed());
        write_file(&path, serde_json::to_string_pretty(&manifest)?.as_bytes())?;
    }
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(output: &OutputArgs, artifact: &[u8]) -> Result<()> {
    match &output.out {
        Some(path) => write_file(path, artifact),
        None => std::io::stdout()
            .write_all(artifact)
            .map_err(|source| CliError::Write {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}

fn json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s.into_bytes())
}

fn load(args: &DataArgs) -> Result<Dataset> {
    if !args.delimiter.is_ascii() {
        return Err(CliError::Usage(
            "delimiter must be a single ASCII character".into(),
        ));
    }
    let options = CsvOptions {
        delimiter: args.delimiter as u8,
        has_header: !args.no_header,
        time_column: args.time_column.clone(),
    };
    let mut ds = load_csv(&args.input, &options)?;
    if let Some(cols) = &args.columns {
        ds = ds.select_columns(cols)?;
    }
    if args.diff > 0 {
        ds = difference(&ds, args.diff)?;
    }
    if args.demean {
        ds = ds.demean();
    }
    Ok(ds)
}

#[derive(Serialize)]
struct FitReport {
    p: usize,
    d: usize,
    #[serde(rename = "T_effective")]
    t_effective: usize,
    series: Vec<String>,
    /// `coefficients[i][r][c]` is row `r`, column `c` of `A_{i+1}`.
    coefficients: Vec<Vec<Vec<f64>>>,
    robust_se: Vec<Vec<Vec<f64>>>,
    se_type: &'static str,
    theta_hat: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    portmanteau: Option<hetcause::var::Portmanteau>,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn fit(args: &FitArgs) -> Result<Vec<u8>> {
    let ds = load(&args.data)?;
    let fit = fit_ols(&ds, args.p)?;
    let portmanteau = match args.portmanteau_lags {
        Some(h) => Some(box_pierce_diagnostic(&fit, h)?),
        None => None,
    };
    let report = FitReport {
        p: fit.p,
        d: fit.d,
        t_effective: fit.t_effective,
        series: ds.names().to_vec(),
        coefficients: fit.coefficients.iter().map(rows).collect(),
        robust_se: fit.robust_se_matrices().iter().map(rows).collect(),
        se_type: "heteroscedasticity-robust sandwich",
        theta_hat: fit.theta_hat.iter().copied().collect(),
        portmanteau,
    };
    json(&report)
}

fn lag_selection(args: &TestArgs) -> LagSelection {
    match args.varhac_m {
        Some(m) => LagSelection::Fixed(m),
        None => LagSelection::Aic {
            max_order: args.varhac_max,
        },
    }
}

fn test(args: &TestArgs) -> Result<Vec<u8>> {
    let ds = load(&args.data)?;
    let part = select_partition(&ds, args.d1)?;
    let fit = fit_ols(&ds, args.p)?;
    let bootstrap = BootstrapOptions::new(args.bootstrap_b, args.seed)
        .with_execution(Execution::from_jobs(args.jobs));
    let results = run_tests(
        &fit.residuals,
        part.d1,
        &args.methods,
        lag_selection(args),
        &bootstrap,
    )?;
    json(&results)
}

fn design_profile(d: &DesignArgs) -> VarianceProfile {
    match d.case {
        1 => VarianceProfile::case1(d.a, d.b),
        _ => VarianceProfile::case2(d.a, d.b, d.c),
    }
}

fn simulate(args: &SimulateArgs) -> Result<Vec<u8>> {
    let ds = simulate_var1(
        &default_coefficients(),
        &design_profile(&args.design),
        args.t_len,
        args.seed,
    )?;
    let mut buf = Vec::new();
    write_csv(&ds, &mut buf)?;
    Ok(buf)
}

fn resolve_mc(args: &McArgs) -> Result<ExperimentConfig> {
    let base = ExperimentConfig::default();
    let base = if args.fast { base.fast() } else { base };
    Ok(ExperimentConfig {
        case: args.design.case,
        a: args.design.a,
        b: args.design.b,
        c: if args.design.case == 1 {
            0.0
        } else {
            args.design.c
        },
        sample_sizes: args.sample_sizes.clone(),
        levels: args.levels.clone(),
        replications: args.replications.unwrap_or(base.replications),
        bootstrap_b: args.bootstrap_b.unwrap_or(base.bootstrap_b),
        seed: args.seed,
        methods: args.methods.clone(),
        execution: Execution::from_jobs(args.jobs),
        ..base
    })
}

fn mc(args: &McArgs) -> Result<Vec<u8>> {
    let table = run_experiment(&resolve_mc(args)?)?;
    Ok(table.to_csv().into_bytes())
}

#[derive(Serialize)]
struct ResolvedPowerCurve {
    c_values: Vec<f64>,
    config: ExperimentConfig,
}

pub fn parse_c_values(spec: &str) -> Result<Vec<f64>> {
    let bad = || CliError::Usage(format!("cannot parse c values '{spec}'"));
    if spec.contains(':') {
        let parts: Vec<f64> = spec
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let [start, stop, step] = parts[..] else {
            return Err(bad());
        };
        if !(step > 0.0) || stop < start {
            return Err(bad());
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        // round to the step's decimal grid so 0.05:0.65:0.05 prints cleanly
        Ok((0..=n)
            .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
            .collect())
    } else {
        spec.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect()
    }
}

fn resolve_power(args: &PowerCurveArgs) -> Result<ResolvedPowerCurve> {
    let base = ExperimentConfig::default();
    let base = if args.fast { base.fast() } else { base };
    Ok(ResolvedPowerCurve {
        c_values: parse_c_values(&args.c_values)?,
        config: ExperimentConfig {
            case: 2,
            a: args.a,
            b: args.b,
            sample_sizes: vec![args.t_len],
            levels: vec![args.level],
            replications: args.replications.unwrap_or(base.replications),
            bootstrap_b: args.bootstrap_b.unwrap_or(base.bootstrap_b),
            seed: args.seed,
            methods: args.methods.clone(),
            execution: Execution::from_jobs(args.jobs),
            ..base
        },
    })
}

fn power(args: &PowerCurveArgs) -> Result<Vec<u8>> {
    let resolved = resolve_power(args)?;
    let points = power_curve(&resolved.config, &resolved.c_values)?;
    let mut out = String::from("c,T,alpha,method,reject_freq,N\n");
    for p in points {
        out.push_str(&format!(
            "{:?},{},{:?},{},{:?},{}\n",
            p.c, p.t_len, p.alpha, p.method, p.reject_freq, p.replications
        ));
    }
    Ok(out.into_bytes())
}

fn kernelvar(args: &KernelArgs) -> Result<Vec<u8>> {
    let ds = load(&args.data)?;
    let part = select_partition(&ds, args.d1)?;
    let fit = fit_ols(&ds, args.p)?;
    let bandwidth = args.bandwidth.map_or(Bandwidth::Auto, Bandwidth::Fixed);
    let curve = nw_covariance(&fit.residuals, part.d1, bandwidth, args.grid)?;
    let mut out = String::from("r,i,j,sigma_hat\n");
    for p in curve.points(args.full) {
        out.push_str(&format!("{:?},{},{},{:?}\n", p.r, p.i, p.j, p.sigma_hat));
    }
    Ok(out.into_bytes())
}
