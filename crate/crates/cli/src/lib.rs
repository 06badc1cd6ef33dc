//! `lpexp`: tables, schemes and verification reports from the command line.
//!
//! [`run`] does all the work and returns the exit code and both output
//! streams, so tests can drive the tool without spawning a process.

pub mod render;

use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use lpexp_core::{
    build_scheme, cellular_margin, check, general_scheme, grid_search, p_cmw, p_ness, sweep_report,
    transverse_margin, AdmissibilityReport, DecadeMax, Error, Rational, RemainderReport, Scheme,
    Segment, Target,
};
use serde::Serialize;

use render::{json, Table};

/// Digits after the point in table approximations.
const APPROX_DIGITS: usize = 4;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Markdown,
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "lpexp", version, about = "Exact Lebesgue exponent schemes for restriction estimates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Final, previous-best and necessary exponents side by side.
    Table {
        #[arg(long, default_value_t = 3)]
        n_min: u32,
        #[arg(long, default_value_t = 10)]
        n_max: u32,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// The canonical scheme for one dimension.
    Scheme {
        #[arg(long)]
        n: u32,
        /// Print every stage with its constraint margins.
        #[arg(long)]
        trace: bool,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Admissibility report; exits 0 iff every condition holds.
    Check {
        #[arg(long)]
        n: u32,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Grid search over stage weights; exits 0 iff the canonical scheme is minimal.
    Optimize {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 64)]
        grid: u32,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Scheme closed at an allowed loss `gamma0` instead of zero.
    General {
        #[arg(long)]
        n: u32,
        #[arg(long, allow_hyphen_values = true)]
        gamma0: Rational,
        #[arg(long)]
        trace: bool,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
    /// Remainders of the large-n expansion over a log-spaced sweep.
    Asymptotics {
        #[arg(long)]
        target: Target,
        #[arg(long, default_value_t = 3)]
        n_min: u32,
        #[arg(long)]
        n_max: u32,
        #[arg(long, default_value_t = 30)]
        digits: u32,
        #[arg(long, value_enum, default_value_t)]
        format: OutputFormat,
    },
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self { code: 0, stdout, stderr: String::new() }
    }

    fn verdict(pass: bool, stdout: String) -> Self {
        Self { code: if pass { 0 } else { 1 }, stdout, stderr: String::new() }
    }

    fn failure(err: &Error) -> Self {
        let code = match err {
            Error::Usage(_) | Error::Parse(_) => 2,
            _ => 1,
        };
        Self { code, stdout: String::new(), stderr: format!("error: {err}\n") }
    }

    pub fn into_tuple(self) -> (i32, String, String) {
        (self.code, self.stdout, self.stderr)
    }
}

/// Runs one invocation. `argv` excludes the program name.
pub fn run<I, S>(argv: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let args = std::iter::once(std::ffi::OsString::from("lpexp")).chain(argv.into_iter().map(Into::into));
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let mut text = e.render().to_string();
            return if e.use_stderr() {
                if !text.contains("Usage:") {
                    text.push_str(&format!("\n{}\n", Cli::command().render_usage()));
                }
                Outcome { code: 2, stdout: String::new(), stderr: text }
            } else {
                Outcome::ok(text)
            };
        }
    };
    dispatch(cli.command).unwrap_or_else(|e| Outcome::failure(&e))
}

fn dispatch(command: Command) -> Result<Outcome, Error> {
    match command {
        Command::Table { n_min, n_max, format } => table(n_min, n_max, format).map(Outcome::ok),
        Command::Scheme { n, trace, format } => {
            let scheme = build_scheme(n)?;
            Ok(Outcome::ok(scheme_output(&scheme, trace, format)))
        }
        Command::Check { n, format } => {
            let report = check(&build_scheme(n)?);
            Ok(Outcome::verdict(report.overall, check_output(&report, format)))
        }
        Command::Optimize { n, grid, format } => {
            let result = grid_search(n, grid)?;
            let text = match format {
                OutputFormat::Json => json(&result),
                _ => {
                    let mut t = Table::new([
                        "n",
                        "grid",
                        "evaluated",
                        "admissible",
                        "canonical_p_final",
                        "best_p_final",
                        "best_overrides",
                        "canonical_is_minimal",
                    ]);
                    let overrides: Vec<String> =
                        result.best.overrides.iter().map(|(m, a)| format!("{m}:{a}")).collect();
                    t.push(vec![
                        result.n.to_string(),
                        result.resolution.to_string(),
                        result.evaluated.to_string(),
                        result.admissible_count.to_string(),
                        result.canonical_p_final.excess_form(),
                        result.best.scheme.p_final.excess_form(),
                        if overrides.is_empty() { "-".into() } else { overrides.join(" ") },
                        result.canonical_is_minimal.to_string(),
                    ]);
                    render_table(&t, format)
                }
            };
            Ok(Outcome::verdict(result.canonical_is_minimal, text))
        }
        Command::General { n, gamma0, trace, format } => {
            let scheme = general_scheme(n, &gamma0)?;
            Ok(Outcome::ok(scheme_output(&scheme, trace, format)))
        }
        Command::Asymptotics { target, n_min, n_max, digits, format } => {
            let report = sweep_report(n_min, n_max, target, digits)?;
            Ok(Outcome::ok(asymptotics_output(&report, format)))
        }
    }
}

fn render_table(t: &Table, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => t.csv(),
        _ => t.markdown(),
    }
}

#[derive(Serialize)]
struct TableRow {
    n: u32,
    p_final: Rational,
    p_cmw: Rational,
    p_ness: Rational,
    p_final_text: String,
    p_cmw_text: String,
    p_ness_text: String,
    p_final_approx: String,
    p_cmw_approx: String,
    p_ness_approx: String,
}

fn table(n_min: u32, n_max: u32, format: OutputFormat) -> Result<String, Error> {
    if n_min > n_max {
        return Err(Error::EmptyRange { lo: n_min.into(), hi: n_max.into() });
    }
    let rows = (n_min..=n_max)
        .map(|n| {
            let (f, c, s) = (build_scheme(n)?.p_final, p_cmw(n)?, p_ness(n)?.value);
            Ok(TableRow {
                n,
                p_final_text: f.excess_form(),
                p_cmw_text: c.excess_form(),
                p_ness_text: s.excess_form(),
                p_final_approx: f.to_decimal(APPROX_DIGITS),
                p_cmw_approx: c.to_decimal(APPROX_DIGITS),
                p_ness_approx: s.to_decimal(APPROX_DIGITS),
                p_final: f,
                p_cmw: c,
                p_ness: s,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    if format == OutputFormat::Json {
        return Ok(json(&serde_json::json!({ "rows": rows })));
    }
    let mut t = Table::new(["n", "p_final", "p_cmw", "p_ness", "p_final_approx", "p_cmw_approx", "p_ness_approx"]);
    for r in rows {
        t.push(vec![
            r.n.to_string(),
            r.p_final_text,
            r.p_cmw_text,
            r.p_ness_text,
            r.p_final_approx,
            r.p_cmw_approx,
            r.p_ness_approx,
        ]);
    }
    Ok(render_table(&t, format))
}

#[derive(Serialize)]
struct SchemeJson<'a> {
    #[serde(flatten)]
    scheme: &'a Scheme,
    p_final_text: String,
    segments: Vec<Segment>,
}

fn source_name<T: Serialize>(value: &T) -> String {
    serde_json::to_value(value)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

fn scheme_output(scheme: &Scheme, trace: bool, format: OutputFormat) -> String {
    if format == OutputFormat::Json {
        return json(&SchemeJson {
            scheme,
            p_final_text: scheme.p_final.excess_form(),
            segments: scheme.segments(),
        });
    }
    let n = scheme.n;
    let summary = format!("M={}, p_final = {}\n", scheme.m_stop, scheme.p_final.excess_form());
    if !trace {
        return match format {
            OutputFormat::Csv => {
                let mut t = Table::new(["n", "M", "closing_alpha", "p_final"]);
                t.push(vec![
                    n.to_string(),
                    scheme.m_stop.to_string(),
                    scheme.closing_alpha.to_string(),
                    scheme.p_final.excess_form(),
                ]);
                t.csv()
            }
            _ => format!("n={n}, closing alpha = {}\n{summary}", scheme.closing_alpha),
        };
    }
    let report = check(scheme);
    let mut t = Table::new(["m", "p_m", "gamma_m", "alpha_m", "source", "cellular", "transverse", "tangential"]);
    for m in 2..=scheme.m_stop + 1 {
        let Some(level) = scheme.level(m) else { break };
        let margins = report.per_step.iter().find(|s| s.m == m);
        let (cell, trans) = if m >= 3 {
            (cellular_margin(&level).to_string(), transverse_margin(n, &level).to_string())
        } else {
            ("-".into(), "-".into())
        };
        t.push(vec![
            m.to_string(),
            level.p().excess_form(),
            level.gamma.to_string(),
            level.alpha.to_string(),
            source_name(&level.source),
            cell,
            trans,
            margins.map_or("-".into(), |s| s.tangential_ok.to_string()),
        ]);
    }
    match format {
        OutputFormat::Csv => t.csv(),
        _ => format!("n={n}\n{}{summary}", t.markdown()),
    }
}

fn opt(value: &Option<Rational>) -> String {
    value.as_ref().map_or("-".into(), Rational::to_string)
}

fn check_output(report: &AdmissibilityReport, format: OutputFormat) -> String {
    if format == OutputFormat::Json {
        return json(report);
    }
    let mut t = Table::new(["m", "cellular", "transverse", "tangential", "chain_bound", "ok"]);
    for s in &report.per_step {
        t.push(vec![
            s.m.to_string(),
            s.cellular_margin.to_string(),
            s.transverse_margin.to_string(),
            s.tangential_ok.to_string(),
            opt(&s.chain_bound),
            s.ok().to_string(),
        ]);
    }
    if format == OutputFormat::Csv {
        return t.csv();
    }
    format!(
        "n={}, M={}\n{}bracketing_ok = {}\nclosing_alpha_in_open_unit = {}\nclosing_weighted_gamma_positive = {}\noverall = {}\n",
        report.n,
        report.m_stop,
        t.markdown(),
        report.bracketing_ok,
        report.closing_alpha_in_open_unit,
        report.closing_weighted_gamma_positive,
        report.overall
    )
}

#[derive(Serialize)]
struct AsymptoticsJson<'a> {
    #[serde(flatten)]
    report: &'a RemainderReport,
    decade_maxima: Vec<DecadeMax>,
}

fn asymptotics_output(report: &RemainderReport, format: OutputFormat) -> String {
    let decades = report.decade_maxima();
    match format {
        OutputFormat::Json => json(&AsymptoticsJson { report, decade_maxima: decades }),
        OutputFormat::Csv => {
            let mut t = Table::new(["n", "remainder_times_n2"]);
            for s in &report.samples {
                t.push(vec![s.n.to_string(), s.remainder_times_n2.to_string()]);
            }
            t.csv()
        }
        OutputFormat::Markdown => {
            let mut t = Table::new(["n", "remainder_times_n2"]);
            for s in &report.samples {
                t.push(vec![s.n.to_string(), s.remainder_times_n2.to_string()]);
            }
            let mut d = Table::new(["decade", "max_abs"]);
            for dm in &decades {
                d.push(vec![format!("{}..{}", dm.lo, dm.hi), dm.max_abs.to_string()]);
            }
            format!(
                "target={}, digits={}\n{}\n{}max_abs = {}\n",
                report.target,
                report.precision_digits,
                t.markdown(),
                d.markdown(),
                report.max_abs
            )
        }
    }
}
