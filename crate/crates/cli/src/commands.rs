use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use record_gof::dist::WeibullParams;
use record_gof::estimate::{
    fit_exponential, fit_weibull, loglik_grid, npmle, weibull_loglik, FitReport,
};
use record_gof::gof::{decide, glr_test, gof_statistics, GlrResult, Statistic};
use record_gof::mc::{build_table, CriticalTable};
use record_gof::records::{extract_records, parse_sample, RecordSample};

use crate::args::{Cli, Command, Format, GlobalArgs, ModelChoice, RecordInput};
use crate::output::{csv_bytes, json_bytes, sig10, write_grid, write_main, write_steps};
use crate::report::{
    FitFragment, FitSource, InputDescriptor, RunReport, TableProvenance, TestFragment,
};

/// Prints a line of the human summary unless `--quiet`.
macro_rules! say {
    ($g:expr, $($arg:tt)*) => {
        if !$g.quiet {
            eprintln!($($arg)*);
        }
    };
}

pub fn run(cli: &Cli, argv: Vec<String>) -> Result<()> {
    let start = Instant::now();
    let g = &cli.global;
    let report = match &cli.command {
        Command::Extract { input } => return cmd_extract(g, input),
        Command::Simulate {
            sizes,
            levels,
            reps,
            csv,
            timestamp,
        } => return cmd_simulate(g, sizes, levels, *reps, csv.as_deref(), *timestamp),
        Command::Fit { input, model } => {
            let rs = load_records(input)?;
            cmd_fit(g, &rs, input, *model)?
        }
        Command::Test {
            input,
            table,
            stats,
            gamma,
            table_n,
            alpha,
            sigma,
        } => {
            let rs = load_records(input)?;
            let fixed = match (alpha, sigma) {
                (Some(a), Some(s)) => Some(WeibullParams::new(*a, *s)?),
                _ => None,
            };
            cmd_test(g, &rs, input, table, stats, *gamma, *table_n, fixed)?
        }
        Command::Glr { input, gamma } => {
            let rs = load_records(input)?;
            cmd_glr(g, &rs, input, *gamma)?
        }
    };
    let report = RunReport {
        argv,
        config: serde_json::to_value(cli)?,
        duration_seconds: (!g.deterministic).then(|| start.elapsed().as_secs_f64()),
        ..report
    };
    let bytes = match g.format {
        Format::Json => json_bytes(&report)?,
        Format::Csv if report.tests.is_empty() => {
            csv_bytes(&report.fits.iter().map(|f| f.fit.clone()).collect::<Vec<_>>())?
        }
        Format::Csv => csv_bytes(&report.tests.iter().map(|t| t.test.clone()).collect::<Vec<_>>())?,
    };
    write_main(g.output.as_deref(), &bytes)
}

fn load_records(input: &RecordInput) -> Result<RecordSample> {
    let path = &input.records;
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if input.sample {
        let values = parse_sample(&text).with_context(|| format!("parsing {}", path.display()))?;
        Ok(extract_records(&values)?)
    } else {
        serde_json::from_str(&text).with_context(|| format!("reading record file {}", path.display()))
    }
}

fn base_report(command: &str, rs: &RecordSample, input: &RecordInput) -> RunReport {
    RunReport {
        tool_version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        argv: Vec::new(),
        config: serde_json::Value::Null,
        input: InputDescriptor {
            path: input.records.clone(),
            scheme: rs.scheme(),
            n: rs.n(),
            m: rs.m(),
        },
        fits: Vec::new(),
        tests: Vec::new(),
        table: None,
        warnings: Vec::new(),
        duration_seconds: None,
    }
}

fn mle_fragment(fit: FitReport) -> FitFragment {
    FitFragment {
        fit,
        source: FitSource::Mle,
    }
}

fn weibull_mle(rs: &RecordSample) -> Result<record_gof::estimate::WeibullFit> {
    fit_weibull(rs).context("Weibull fit needs at least two distinct records")
}

/// Writes the optional step-function and likelihood-grid files.
fn emit_extras(g: &GlobalArgs, rs: &RecordSample, model: Option<&WeibullParams>) -> Result<()> {
    if let Some(path) = &g.emit_steps {
        let view = rs.ordered_view();
        write_steps(path, &npmle(rs), &view.k_ord, model)?;
        say!(g, "step function written to {}", path.display());
    }
    if let Some(path) = &g.emit_loglik_grid {
        let centre = match (g.grid_alpha, g.grid_sigma, model) {
            (Some(_), Some(_), _) => None,
            (_, _, Some(p)) => Some(*p),
            _ => Some(weibull_mle(rs)?.params),
        };
        let around = |x: f64| (0.5 * x, 1.5 * x);
        let alpha = g.grid_alpha.unwrap_or_else(|| around(centre.expect("centre").alpha));
        let sigma = g.grid_sigma.unwrap_or_else(|| around(centre.expect("centre").sigma));
        write_grid(path, &loglik_grid(rs, alpha, sigma, g.grid_steps)?)?;
        say!(g, "log-likelihood grid written to {}", path.display());
    }
    Ok(())
}

fn cmd_extract(g: &GlobalArgs, input: &Path) -> Result<()> {
    let text = std::fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let values = parse_sample(&text).with_context(|| format!("parsing {}", input.display()))?;
    let rs = extract_records(&values)?;
    let bytes = match g.format {
        Format::Json => json_bytes(&rs)?,
        Format::Csv => csv_bytes(rs.records())?,
    };
    write_main(g.output.as_deref(), &bytes)?;
    say!(g, "records: m = {}, n = {}", rs.m(), rs.n());
    Ok(())
}

fn cmd_fit(g: &GlobalArgs, rs: &RecordSample, input: &RecordInput, model: ModelChoice) -> Result<RunReport> {
    let mut report = base_report("fit", rs, input);
    let mut weibull = None;
    if matches!(model, ModelChoice::Weibull | ModelChoice::Both) {
        let fit = weibull_mle(rs)?;
        say!(
            g,
            "weibull: alpha = {}, sigma = {}, loglik = {} ({} iterations)",
            sig10(fit.params.alpha),
            sig10(fit.params.sigma),
            sig10(fit.loglik),
            fit.iterations
        );
        report.fits.push(mle_fragment((&fit).into()));
        weibull = Some(fit.params);
    }
    if matches!(model, ModelChoice::Exponential | ModelChoice::Both) {
        let fit = fit_exponential(rs)?;
        say!(g, "exponential: sigma = {}, loglik = {}", sig10(fit.params.sigma), sig10(fit.loglik));
        report.fits.push(mle_fragment((&fit).into()));
    }
    emit_extras(g, rs, weibull.as_ref())?;
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn cmd_test(
    g: &GlobalArgs,
    rs: &RecordSample,
    input: &RecordInput,
    table_path: &Path,
    stats: &[String],
    gamma: f64,
    table_n: Option<u64>,
    fixed: Option<WeibullParams>,
) -> Result<RunReport> {
    let mut report = base_report("test", rs, input);
    let stats: Vec<Statistic> = stats
        .iter()
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<Statistic>())
        .collect::<Result<_, _>>()?;
    if stats.is_empty() {
        let msg = "no statistics requested; nothing to test";
        say!(g, "warning: {msg}");
        report.warnings.push(msg.into());
        return Ok(report);
    }

    let params = match fixed {
        Some(p) => {
            report.fits.push(FitFragment {
                fit: FitReport {
                    model: "weibull".into(),
                    alpha: p.alpha,
                    sigma: p.sigma,
                    loglik: weibull_loglik(rs, &p),
                    iterations: 0,
                    residual: 0.0,
                },
                source: FitSource::Fixed,
            });
            let msg = "fixed parameters: tabulated critical values assume estimated parameters";
            say!(g, "warning: {msg}");
            report.warnings.push(msg.into());
            p
        }
        None => {
            let fit = weibull_mle(rs)?;
            report.fits.push(mle_fragment((&fit).into()));
            fit.params
        }
    };
    say!(g, "weibull: alpha = {}, sigma = {}", sig10(params.alpha), sig10(params.sigma));

    let table = CriticalTable::read_json(table_path)
        .with_context(|| format!("reading table {}", table_path.display()))?;
    let lookup_n = table_n.unwrap_or(rs.n());
    let values = gof_statistics(rs, &params)?;
    for stat in stats {
        let result = decide(values.get(stat), &table, stat, lookup_n, gamma, g.interpolate_n).with_context(|| {
            format!(
                "table {} has no {} critical value for n = {lookup_n} at level {}{}",
                table_path.display(),
                stat,
                1.0 - gamma,
                if g.interpolate_n { "" } else { " (see --interpolate-n and --table-n)" }
            )
        })?;
        say!(
            g,
            "{}: {} vs critical {} at gamma = {} -> {}",
            stat,
            sig10(result.value),
            sig10(result.critical_value),
            gamma,
            if result.reject { "reject" } else { "accept" }
        );
        report.tests.push(TestFragment {
            test: result.report(),
            fits: vec![0],
        });
    }
    report.table = Some(TableProvenance {
        path: table_path.to_path_buf(),
        meta: table.meta,
        lookup_n,
        interpolated: g.interpolate_n && table.rows.iter().all(|r| r.n != lookup_n),
    });
    emit_extras(g, rs, Some(&params))?;
    Ok(report)
}

fn cmd_glr(g: &GlobalArgs, rs: &RecordSample, input: &RecordInput, gamma: f64) -> Result<RunReport> {
    if !(gamma > 0.0 && gamma < 1.0) {
        bail!("significance level must lie in (0, 1), got {gamma}");
    }
    let mut report = base_report("glr", rs, input);
    let glr: GlrResult = glr_test(rs).context("likelihood-ratio test needs at least two records")?;
    let exp = fit_exponential(rs)?;
    report.fits.push(mle_fragment((&glr.weibull_fit).into()));
    report.fits.push(mle_fragment((&exp).into()));
    let test = glr.report(gamma);
    say!(
        g,
        "Lambda = {}, -2 ln Lambda = {}, p = {} -> {} exponential at gamma = {}",
        sig10(glr.lambda),
        sig10(glr.neg2loglambda),
        sig10(glr.p_value),
        if test.reject { "reject" } else { "accept" },
        gamma
    );
    report.tests.push(TestFragment { test, fits: vec![0, 1] });
    emit_extras(g, rs, Some(&glr.weibull_fit.params))?;
    Ok(report)
}

fn cmd_simulate(
    g: &GlobalArgs,
    sizes: &[u64],
    levels: &[f64],
    reps: u64,
    csv: Option<&Path>,
    timestamp: bool,
) -> Result<()> {
    let workers = g
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if sizes.is_empty() {
        bail!("no sample sizes given");
    }
    let mut table: Option<CriticalTable> = None;
    for &n in sizes {
        say!(g, "simulating n = {n}: M = {reps}, workers = {workers}");
        let part = build_table(&[n], levels, reps, g.seed, workers)?;
        match &mut table {
            Some(t) => t.rows.extend(part.rows),
            None => table = Some(part),
        }
    }
    let mut table = table.expect("at least one size");
    if timestamp {
        table.meta.generated_at = Some(chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
    }
    let bytes = match g.format {
        Format::Json => table.to_json()?.into_bytes(),
        Format::Csv => {
            let mut buf = Vec::new();
            table.write_csv(&mut buf)?;
            buf
        }
    };
    write_main(g.output.as_deref(), &bytes)?;
    if let Some(path) = csv {
        let file = std::fs::File::create(path).with_context(|| format!("writing {}", path.display()))?;
        table.write_csv(file)?;
    }
    say!(g, "table: {} rows, M = {}, seed = {}", table.rows.len(), reps, g.seed);
    Ok(())
}
