//! Command-line front end: phase expressions in, machine-readable JSON
//! reports out.
//!
//! Exit codes: 0 when everything passed, 1 when a check failed (unfulfilled
//! expectation, failed reconstruction, failed selftest criterion, runtime
//! error), 2 on usage errors (bad syntax, bad flags).

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;

use soliton_forge::cones;
use soliton_forge::dsl::{self, Lowered};
use soliton_forge::expalg::{ExpPoly, VarSet};
use soliton_forge::numeric::{self, AxisRange, Grid};
use soliton_forge::operators::{self, Model, Profile};
use soliton_forge::report::{
    ConeSummary, ExpectationResult, NumericSummary, OperatorReport, PhaseEcho,
    ReconstructionReport, Report,
};
use soliton_forge::selftest;

#[derive(Parser)]
#[command(name = "soliton-forge", version, about = "exact KP soliton-phase toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct OutputOpts {
    /// Pretty-print the JSON report.
    #[arg(long)]
    pretty: bool,
    /// Write the JSON report to a file instead of stdout.
    #[arg(long)]
    report_out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Apply operators to a phase expression and test them for zero.
    Check {
        expr: String,
        /// Comma-separated operator names (defaults depend on the variable set).
        #[arg(long, value_delimiter = ',')]
        ops: Vec<String>,
        /// Expectations `op=zero` or `op=nonzero`; any miss exits 1.
        #[arg(long = "expect")]
        expect: Vec<String>,
        /// Variable set (default `t,x,y`).
        #[arg(long, value_delimiter = ',')]
        vars: Vec<String>,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Run the full classification report on a KP phase.
    Classify {
        expr: String,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Reconstruct resonant parameters from the cleared y-Wronskian.
    Reconstruct {
        expr: String,
        /// Number of spectral parameters; inferred from the decomposition
        /// size when omitted.
        #[arg(long)]
        m: Option<usize>,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Sample the field u over a grid, optionally exporting CSV and
    /// running the finite-difference residual check.
    Grid {
        expr: String,
        #[arg(long, default_value = "log")]
        profile: String,
        /// kp | kdv | mkdv (defaults by variable count).
        #[arg(long)]
        model: Option<String>,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t0: f64,
        /// x range as min:max:count.
        #[arg(long, default_value = "-10:10:201", allow_hyphen_values = true)]
        x: String,
        /// y range as min:max:count.
        #[arg(long, default_value = "-10:10:201", allow_hyphen_values = true)]
        y: String,
        /// CSV destination.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also run the finite-difference PDE residual.
        #[arg(long)]
        residual: bool,
        /// Finite-difference step (default 0.05 for KP, 0.004 for 1D models).
        #[arg(long)]
        h: Option<f64>,
        /// Residual tolerance (default: the calibrated max(1e-6, C h²)).
        #[arg(long)]
        tol: Option<f64>,
        /// Variable set (default `t,x,y`).
        #[arg(long, value_delimiter = ',')]
        vars: Vec<String>,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Evaluate a template over parameter ranges; `$name` placeholders are
    /// substituted with exact rational steps.
    Sweep {
        template: String,
        /// Ranges `name=min:max:count` with rational bounds.
        #[arg(long = "param")]
        params: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        ops: Vec<String>,
        #[arg(long = "expect")]
        expect: Vec<String>,
        /// Include the classification report per point.
        #[arg(long)]
        classify: bool,
        #[command(flatten)]
        output: OutputOpts,
    },
    /// Run the built-in verification suite (criteria 1-11).
    Selftest {
        /// Seed for randomized checks (default: SOLITON_FORGE_SEED or built-in).
        #[arg(long)]
        seed: Option<u64>,
        /// Subset of criteria ids to run.
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<usize>,
        #[command(flatten)]
        output: OutputOpts,
    },
}

enum CliError {
    Usage(String),
    Failed(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failed(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Failed(m) => m,
        }
    }
}

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

fn failed<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Failed(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(all_pass) => {
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn emit(report: &Report, output: &OutputOpts) -> Result<(), CliError> {
    let text = if output.pretty { report.to_json_pretty() } else { report.to_json() };
    match &output.report_out {
        Some(path) => std::fs::write(path, text + "\n")
            .map_err(|e| failed(format!("writing {}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn parse_vars(vars: &[String]) -> Result<VarSet, CliError> {
    if vars.is_empty() {
        Ok(VarSet::kp())
    } else {
        VarSet::new(vars).map_err(usage)
    }
}

fn lower_expr(expr: &str, vars: &VarSet) -> Result<(dsl::PhaseExpr, Lowered), CliError> {
    let ast = dsl::parse_with_vars(expr, vars).map_err(usage)?;
    let lowered = dsl::lower(&ast).map_err(usage)?;
    Ok((ast, lowered))
}

fn phase_echo(ast: &dsl::PhaseExpr, lowered: &Lowered) -> PhaseEcho {
    PhaseEcho {
        expr: ast.to_string(),
        spec: lowered.spec.as_ref().map(|s| s.to_json()),
        term_count: lowered.theta.term_count(),
        theta: lowered.theta.to_string(),
    }
}

fn default_ops(vars: &VarSet) -> Vec<String> {
    let names = vars.names();
    if vars == &VarSet::kp() {
        ["heat", "airy", "wx", "wy", "T", "kp_residual"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    } else if vars == &VarSet::kdv() {
        ["kdv_ai", "kdv_w", "kdv_T", "mkdv_res"].iter().map(|s| s.to_string()).collect()
    } else if names.first().map(String::as_str) == Some("t") {
        ["zk_ai", "zk_w1", "zk_wxj", "mzk_lambda"].iter().map(|s| s.to_string()).collect()
    } else {
        Vec::new()
    }
}

struct Expectation {
    op: String,
    zero: bool,
}

fn parse_expectations(raw: &[String]) -> Result<Vec<Expectation>, CliError> {
    raw.iter()
        .map(|s| {
            let (op, val) = s
                .split_once('=')
                .ok_or_else(|| usage(format!("bad expectation `{s}`, use op=zero|nonzero")))?;
            let zero = match val {
                "zero" => true,
                "nonzero" => false,
                other => {
                    return Err(usage(format!("bad expectation value `{other}`")));
                }
            };
            Ok(Expectation { op: op.to_string(), zero })
        })
        .collect()
}

/// Operator reports, cone summaries (KP only), expectation outcomes, and
/// whether every expectation was fulfilled.
type OpRun = (Vec<OperatorReport>, Vec<ConeSummary>, Vec<ExpectationResult>, bool);

/// Applies the named operators to a phase.
fn run_ops(
    theta: &ExpPoly,
    ops: &[String],
    expectations: &[Expectation],
) -> Result<OpRun, CliError> {
    let mut op_reports = Vec::new();
    let mut cone_summaries = Vec::new();
    let mut zero_by_name: BTreeMap<String, bool> = BTreeMap::new();
    let is_kp = theta.vars() == &VarSet::kp();
    for name in ops {
        let results = operators::apply_named(theta, name).map_err(usage)?;
        let mut family_zero = true;
        for (full_name, op) in &results {
            op_reports.push(OperatorReport::new(full_name, op));
            family_zero &= op.is_zero();
            if is_kp {
                let dec = cones::decompose(&op.expr, "y").map_err(failed)?;
                let mut summary = ConeSummary::new(&dec);
                summary.var = format!("{full_name}:y");
                cone_summaries.push(summary);
            }
            zero_by_name.insert(full_name.clone(), op.is_zero());
        }
        zero_by_name.insert(name.clone(), family_zero);
    }
    let mut all_fulfilled = true;
    let mut expectation_results = Vec::new();
    for e in expectations {
        let actual_zero = *zero_by_name
            .get(&e.op)
            .ok_or_else(|| usage(format!("expectation on `{}` which was not computed", e.op)))?;
        let fulfilled = actual_zero == e.zero;
        all_fulfilled &= fulfilled;
        expectation_results.push(ExpectationResult {
            operator: e.op.clone(),
            expected_zero: e.zero,
            actual_zero,
            fulfilled,
        });
    }
    Ok((op_reports, cone_summaries, expectation_results, all_fulfilled))
}

fn parse_axis(text: &str) -> Result<AxisRange, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(usage(format!("bad range `{text}`, use min:max:count")));
    }
    let min: f64 = parts[0].parse().map_err(|_| usage("bad range minimum"))?;
    let max: f64 = parts[1].parse().map_err(|_| usage("bad range maximum"))?;
    let count: usize = parts[2].parse().map_err(|_| usage("bad range count"))?;
    AxisRange::new(min, max, count).map_err(usage)
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.cmd {
        Cmd::Check { expr, ops, expect, vars, output } => {
            let varset = parse_vars(&vars)?;
            let (ast, lowered) = lower_expr(&expr, &varset)?;
            let op_names = if ops.is_empty() { default_ops(&varset) } else { ops };
            if op_names.is_empty() {
                return Err(usage("no operators apply to this variable set; pass --ops"));
            }
            let expectations = parse_expectations(&expect)?;
            let (op_reports, cone_summaries, expectation_results, all_fulfilled) =
                run_ops(&lowered.theta, &op_names, &expectations)?;
            let mut flags = BTreeMap::new();
            flags.insert("ops".into(), op_names.join(","));
            flags.insert("vars".into(), varset.names().join(","));
            let mut report = Report::new("check", Some(expr), flags);
            report.phase = Some(phase_echo(&ast, &lowered));
            report.operators = op_reports;
            report.cones = cone_summaries;
            report.expectations = expectation_results;
            emit(&report, &output)?;
            Ok(all_fulfilled)
        }
        Cmd::Classify { expr, output } => {
            let (ast, lowered) = lower_expr(&expr, &VarSet::kp())?;
            let classification = cones::classify(&lowered.theta).map_err(failed)?;
            let mut flags = BTreeMap::new();
            flags.insert("vars".into(), "t,x,y".into());
            let mut report = Report::new("classify", Some(expr), flags);
            report.phase = Some(phase_echo(&ast, &lowered));
            report.classification = Some(classification);
            emit(&report, &output)?;
            Ok(true)
        }
        Cmd::Reconstruct { expr, m, output } => {
            let (ast, lowered) = lower_expr(&expr, &VarSet::kp())?;
            let wy = operators::wy_cleared(&lowered.theta).map_err(failed)?;
            let dec = cones::decompose(&wy.expr, "y").map_err(failed)?;
            let m_effective = match m {
                Some(m) => m,
                None => cones::infer_resonant_order(dec.dim()).ok_or_else(|| {
                    failed(format!(
                        "cannot infer M: {} entries is not M(M-1)/2 for any M >= 2",
                        dec.dim()
                    ))
                })?,
            };
            let reconstruction = match cones::reconstruct_resonant(&dec, m_effective) {
                Ok(params) => ReconstructionReport {
                    ok: true,
                    m: m_effective,
                    k: params.k.iter().map(BigRational::to_string).collect(),
                    a: params.a.iter().map(BigRational::to_string).collect(),
                    error: None,
                },
                Err(e) => ReconstructionReport {
                    ok: false,
                    m: m_effective,
                    k: Vec::new(),
                    a: Vec::new(),
                    error: Some(e.to_string()),
                },
            };
            let ok = reconstruction.ok;
            let mut flags = BTreeMap::new();
            flags.insert("m".into(), m_effective.to_string());
            let mut report = Report::new("reconstruct", Some(expr), flags);
            report.phase = Some(phase_echo(&ast, &lowered));
            report.cones = vec![ConeSummary::new(&dec)];
            report.reconstruction = Some(reconstruction);
            emit(&report, &output)?;
            Ok(ok)
        }
        Cmd::Grid { expr, profile, model, t0, x, y, out, residual, h, tol, vars, output } => {
            let varset = parse_vars(&vars)?;
            let (ast, lowered) = lower_expr(&expr, &varset)?;
            let profile = match profile.as_str() {
                "log" => Profile::Log,
                "arctan2" => Profile::Arctan2,
                other => return Err(usage(format!("unknown profile `{other}`"))),
            };
            let model = match model.as_deref() {
                Some("kp") => Model::Kp,
                Some("kdv") => Model::Kdv,
                Some("mkdv") => Model::Mkdv,
                Some(other) => return Err(usage(format!("unknown model `{other}`"))),
                None => {
                    if varset == VarSet::kp() {
                        Model::Kp
                    } else if profile == Profile::Arctan2 {
                        Model::Mkdv
                    } else {
                        Model::Kdv
                    }
                }
            };
            let grid = Grid::new(t0, parse_axis(&x)?, parse_axis(&y)?);
            let h_effective = h.unwrap_or(if model == Model::Kp { 0.05 } else { 0.004 });
            let fd_c = match model {
                Model::Kp => numeric::KP_FD_C,
                Model::Kdv => numeric::KDV_FD_C,
                _ => numeric::MKDV_FD_C,
            };
            let tol_effective = tol.unwrap_or_else(|| numeric::fd_tolerance(fd_c, h_effective));
            let sample =
                numeric::eval_field(&lowered.theta, profile, &grid, model).map_err(failed)?;
            if let Some(path) = &out {
                numeric::export_csv(&sample, path).map_err(failed)?;
            }
            let mut within_tol = true;
            let fd = if residual {
                let rep = numeric::fd_residual(&lowered.theta, profile, model, &grid, h_effective)
                    .map_err(failed)?;
                within_tol = rep.max_abs_residual <= tol_effective;
                Some(rep)
            } else {
                None
            };
            let mut flags = BTreeMap::new();
            flags.insert("profile".into(), format!("{profile:?}").to_lowercase());
            flags.insert("model".into(), format!("{model:?}").to_lowercase());
            flags.insert("t0".into(), t0.to_string());
            flags.insert("x".into(), x);
            flags.insert("y".into(), y);
            flags.insert("h".into(), h_effective.to_string());
            flags.insert("tol".into(), tol_effective.to_string());
            let mut report = Report::new("grid", Some(expr), flags);
            report.phase = Some(phase_echo(&ast, &lowered));
            report.numeric = Some(NumericSummary {
                model,
                profile,
                grid,
                max_u: sample.max_value(),
                residual: fd,
                csv_path: out.map(|p| p.display().to_string()),
            });
            emit(&report, &output)?;
            Ok(within_tol)
        }
        Cmd::Sweep { template, params, ops, expect, classify, output } => {
            let ranges = parse_sweep_params(&params)?;
            if ranges.is_empty() {
                return Err(usage("sweep needs at least one --param name=min:max:count"));
            }
            let expectations = parse_expectations(&expect)?;
            let combos = cartesian(&ranges);
            let mut all_pass = true;
            let mut flags = BTreeMap::new();
            flags.insert("params".into(), params.join(";"));
            flags.insert("points".into(), combos.len().to_string());
            let mut report = Report::new("sweep", Some(template.clone()), flags);
            for combo in combos {
                let mut text = template.clone();
                let mut point_flags = BTreeMap::new();
                for (name, value) in &combo {
                    text = text.replace(&format!("${name}"), &value.to_string());
                    point_flags.insert(name.clone(), value.to_string());
                }
                let mut point = Report::new("sweep-point", Some(text.clone()), point_flags);
                match lower_expr(&text, &VarSet::kp()) {
                    Ok((ast, lowered)) => {
                        point.phase = Some(phase_echo(&ast, &lowered));
                        let op_names =
                            if ops.is_empty() { default_ops(&VarSet::kp()) } else { ops.clone() };
                        let (op_reports, cone_summaries, expectation_results, fulfilled) =
                            run_ops(&lowered.theta, &op_names, &expectations)?;
                        point.operators = op_reports;
                        point.cones = cone_summaries;
                        point.expectations = expectation_results;
                        all_pass &= fulfilled;
                        if classify {
                            point.classification =
                                Some(cones::classify(&lowered.theta).map_err(failed)?);
                        }
                    }
                    Err(e) => {
                        all_pass = false;
                        point
                            .invocation
                            .flags
                            .insert("error".into(), e.message().to_string());
                    }
                }
                report.sweep.push(point);
            }
            emit(&report, &output)?;
            Ok(all_pass)
        }
        Cmd::Selftest { seed, criteria, output } => {
            let seed = seed.unwrap_or_else(selftest::seed_from_env);
            let results = selftest::run_all(seed);
            let selected: Vec<_> = results
                .into_iter()
                .filter(|r| criteria.is_empty() || criteria.contains(&r.id))
                .collect();
            let all_pass = selected.iter().all(|r| r.pass);
            for r in &selected {
                eprintln!(
                    "criterion {:2}: {} — {} ({})",
                    r.id,
                    if r.pass { "PASS" } else { "FAIL" },
                    r.name,
                    r.details
                );
            }
            let mut flags = BTreeMap::new();
            flags.insert("seed".into(), seed.to_string());
            let mut report = Report::new("selftest", None, flags);
            report.criteria = selected;
            emit(&report, &output)?;
            Ok(all_pass)
        }
    }
}

type SweepRange = (String, Vec<BigRational>);

fn parse_sweep_params(params: &[String]) -> Result<Vec<SweepRange>, CliError> {
    params
        .iter()
        .map(|p| {
            let (name, range) = p
                .split_once('=')
                .ok_or_else(|| usage(format!("bad param `{p}`, use name=min:max:count")))?;
            let parts: Vec<&str> = range.split(':').collect();
            if parts.len() != 3 {
                return Err(usage(format!("bad range `{range}`, use min:max:count")));
            }
            let min = parse_rational(parts[0])?;
            let max = parse_rational(parts[1])?;
            let count: usize =
                parts[2].parse().map_err(|_| usage("bad range count"))?;
            if count == 0 {
                return Err(usage("range count must be positive"));
            }
            let values = if count == 1 {
                vec![min]
            } else {
                let step = (&max - &min)
                    / BigRational::from_integer(((count - 1) as i64).into());
                (0..count)
                    .map(|i| &min + &step * BigRational::from_integer((i as i64).into()))
                    .collect()
            };
            Ok((name.to_string(), values))
        })
        .collect()
}

fn parse_rational(text: &str) -> Result<BigRational, CliError> {
    let ast = dsl::parse(text).map_err(|_| usage(format!("bad rational `{text}`")))?;
    match ast {
        dsl::PhaseExpr::Canonical(p) if p.term_count() <= 1 => {
            if p.is_zero() {
                Ok(BigRational::from_integer(0.into()))
            } else {
                let t = &p.terms()[0];
                if t.mono.iter().all(|&m| m == 0)
                    && t.freq.iter().all(num_traits::Zero::is_zero)
                {
                    Ok(t.coeff.clone())
                } else {
                    Err(usage(format!("bad rational `{text}`")))
                }
            }
        }
        _ => Err(usage(format!("bad rational `{text}`"))),
    }
}

fn cartesian(ranges: &[SweepRange]) -> Vec<Vec<(String, BigRational)>> {
    let mut combos: Vec<Vec<(String, BigRational)>> = vec![Vec::new()];
    for (name, values) in ranges {
        let mut next = Vec::with_capacity(combos.len() * values.len());
        for combo in &combos {
            for v in values {
                let mut c = combo.clone();
                c.push((name.clone(), v.clone()));
                next.push(c);
            }
        }
        combos = next;
    }
    combos
}
