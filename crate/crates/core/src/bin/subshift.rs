//! Command-line surface over the library: every pipeline stage with
//! machine-readable output.
//!
//! Exit codes: 0 on success, 2 when the result is inconclusive (a budget,
//! saturation, or truncation kept the tool from deciding), 1 on error.
//! Identical invocations produce byte-identical output.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{ArgAction, Args, Parser, Subcommand};
use serde::Serialize;

use subshift::attractor::{
    accident_renormalization_check, accidents, delta_profile_over, staircase_text, AttractorError,
    LevelProfiler, ShallowProfiler,
};
use subshift::deep::DeepProfiler;
use subshift::language::LanguageIndex;
use subshift::recognize::recognizability_length;
use subshift::renorm::{classify_limit, limit_u, LimitU, RenormError, RenormResult};
use subshift::report::{self, Format};
use subshift::thermo::{
    default_beta_grid, freezing_certificate_grid_budgeted, pressure_curve_budgeted, CertOutcome,
    CylinderJ, FreezingCertificate, ThermoError, PRESSURE_BUDGET, THERMO_NODE_BUDGET,
};
use subshift::potential::Potential;
use subshift::Substitution;

#[derive(Parser)]
#[command(
    name = "subshift",
    version,
    about = "Substitution subshift analysis: language structure, accidents, renormalization, freezing certificates"
)]
struct Cli {
    /// Output format (json, csv, text).
    #[arg(long, global = true, default_value = "json")]
    format: String,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Seed for randomized tail specifications.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// JSON file supplying the whole invocation: {"command": NAME, FLAG: VALUE, ...}.
    /// Keys are the long flag names (camelCase or kebab-case); it replaces the
    /// command line and cannot be combined with a subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Structural report: primitivity, markedness, 2-fullness, aperiodicity
    /// evidence, Perron root, length constants, power-free bound, and the
    /// recognizability length.
    Analyze(AnalyzeArgs),
    /// Language complexity table, with optional factor listing.
    Language(LanguageArgs),
    /// Bispecial taxonomy, seed decomposition, and length clusters.
    Bispecial(BispecialArgs),
    /// Accident profile of a tail, with optional staircase rendering and
    /// renormalization cross-check.
    Accidents(AccidentsArgs),
    /// Renormalization iterates R^m V with limit classification.
    Renorm(RenormArgs),
    /// Freezing-transition certificate on a cylinder.
    Freeze(FreezeArgs),
    /// Finite-level pressure sandwich over an inverse-temperature grid.
    Pressure(PressureArgs),
}

/// Substitution source: a file path, or an inline rule string such as
/// "0 -> 01 / 1 -> 10" (also JSON {"0": "01", ...}).
#[derive(Args)]
struct SubstArg {
    substitution: String,
}

impl SubstArg {
    fn load(&self) -> Result<Substitution> {
        let text = if self.substitution.contains("->") || self.substitution.trim_start().starts_with('{') {
            self.substitution.clone()
        } else {
            fs::read_to_string(&self.substitution)
                .with_context(|| format!("reading substitution file `{}`", self.substitution))?
        };
        Ok(Substitution::parse(&text)?)
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    subst: SubstArg,
    /// Language cutoff; factor data is exact up to this length.
    #[arg(long, default_value_t = 201)]
    max_len: usize,
    /// Aperiodicity evidence bound (clamped to max_len - 1).
    #[arg(long, default_value_t = 200)]
    aperiodicity_bound: usize,
    /// Levels scanned for the empirical length constant K.
    #[arg(long, default_value_t = 40)]
    k_depth: u32,
    /// Base-length cap for the power-free exponent scan.
    #[arg(long, default_value_t = 16)]
    power_free_base: usize,
    /// Desubstitution scan length for the recognizability report.
    #[arg(long, default_value_t = 32)]
    scan: usize,
}

#[derive(Args)]
struct LanguageArgs {
    #[command(flatten)]
    subst: SubstArg,
    #[arg(long, default_value_t = 64)]
    max_len: usize,
    /// Print complexity rows up to this length (default: max_len).
    #[arg(long)]
    table_to: Option<usize>,
    /// Also list the factor set at this length.
    #[arg(long)]
    factors: Option<usize>,
}

#[derive(Args)]
struct BispecialArgs {
    #[command(flatten)]
    subst: SubstArg,
    #[arg(long, default_value_t = 128)]
    max_len: usize,
    /// Catalog bispecial words up to this length (default: max_len - 2, capped at 100).
    #[arg(long)]
    up_to: Option<usize>,
    /// Recognizability length override; computed from a scan when absent.
    #[arg(long)]
    l_h: Option<usize>,
    #[arg(long, default_value_t = 32)]
    scan: usize,
}

#[derive(Args)]
struct AccidentsArgs {
    #[command(flatten)]
    subst: SubstArg,
    /// Tail specification: BLOCK^inf, PREFIX|BLOCK^inf, [PREFIX|]fixed:LETTER, random:LEN.
    #[arg(long)]
    x: String,
    #[arg(long, default_value_t = 64)]
    max_len: usize,
    /// Chart `H^level(x)` instead of x itself.
    #[arg(long, default_value_t = 0)]
    level: u32,
    /// Number of accidents to chart.
    #[arg(long, default_value_t = 32)]
    horizon: usize,
    /// Include a plain-text staircase of the depth profile.
    #[arg(long, action = ArgAction::SetTrue)]
    staircase: bool,
    /// Cross-check accident renormalization at this image level.
    #[arg(long)]
    check: Option<u32>,
    /// Base level for the cross-check (auto-selected when absent).
    #[arg(long)]
    k: Option<u32>,
    #[arg(long, default_value_t = 32)]
    scan: usize,
}

#[derive(Args)]
struct RenormArgs {
    #[command(flatten)]
    subst: SubstArg,
    /// Tail specification (see `accidents --help`).
    #[arg(long)]
    x: String,
    #[arg(long, default_value_t = 64)]
    max_len: usize,
    /// Potential exponent for the power form (g + h) / delta^alpha.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// JSON potential document {alpha, g, h, logForm}; overrides --alpha.
    #[arg(long)]
    potential: Option<PathBuf>,
    /// Iterate the operator up to this level.
    #[arg(long, default_value_t = 14)]
    m_max: u32,
    /// Also compute the accident-gap limit U.
    #[arg(long, action = ArgAction::SetTrue)]
    limit: bool,
    /// Profiler choice: auto, deep, shallow.
    #[arg(long, default_value = "auto")]
    profiler: String,
    #[arg(long, default_value_t = 32)]
    scan: usize,
}

#[derive(Args)]
struct FreezeArgs {
    #[command(flatten)]
    subst: SubstArg,
    /// Cylinder word; must not be a language factor.
    #[arg(long)]
    wj: String,
    /// Freeness cutoff N.
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Single inverse temperature; omit to run the default grid.
    #[arg(long)]
    beta: Option<f64>,
    /// Explicit comma-separated grid (overrides --beta and the default grid).
    #[arg(long, value_delimiter = ',')]
    betas: Option<Vec<f64>>,
    /// Return-word truncation length.
    #[arg(long, default_value_t = 20)]
    n_max: usize,
    /// Free-excursion truncation length.
    #[arg(long, default_value_t = 24)]
    l_max: usize,
    #[arg(long, default_value_t = 64)]
    max_len: usize,
    /// Recognizability length override; computed from a scan when absent.
    #[arg(long)]
    l_h: Option<usize>,
    #[arg(long, default_value_t = 32)]
    scan: usize,
}

#[derive(Args)]
struct PressureArgs {
    #[command(flatten)]
    subst: SubstArg,
    /// Word length of the finite-level estimates.
    #[arg(long, default_value_t = 12)]
    n: usize,
    /// Explicit comma-separated grid (default: the standard 25-point grid).
    #[arg(long, value_delimiter = ',')]
    betas: Option<Vec<f64>>,
    #[arg(long, default_value_t = 64)]
    max_len: usize,
}

/// Budget caps may be raised or lowered through the environment only;
/// everything else comes from flags.
fn env_budget(name: &str, default: usize) -> Result<usize> {
    match std::env::var(name) {
        Ok(text) => text
            .parse()
            .map_err(|_| anyhow!("{name} must be a positive integer, got `{text}`")),
        Err(_) => Ok(default),
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    // Usage problems are plain errors (exit 1); 2 is reserved for
    // inconclusive results.
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

/// 2 for budget/saturation conditions the caller can widen, 1 otherwise.
fn exit_code_for(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(a) = cause.downcast_ref::<AttractorError>() {
            if matches!(
                a,
                AttractorError::DepthSaturated { .. }
                    | AttractorError::BudgetExceeded { .. }
                    | AttractorError::NodeBudgetExceeded { .. }
            ) {
                return 2;
            }
        }
        if let Some(r) = cause.downcast_ref::<RenormError>() {
            if matches!(
                r,
                RenormError::WindowBudget { .. }
                    | RenormError::PrefixBudget { .. }
                    | RenormError::AmbiguousSaturation
            ) {
                return 2;
            }
            if let RenormError::Attractor(a) = r {
                if matches!(
                    a,
                    AttractorError::DepthSaturated { .. }
                        | AttractorError::BudgetExceeded { .. }
                        | AttractorError::NodeBudgetExceeded { .. }
                ) {
                    return 2;
                }
            }
        }
        if let Some(t) = cause.downcast_ref::<ThermoError>() {
            if matches!(t, ThermoError::NodeBudget { .. }) {
                return 2;
            }
        }
    }
    1
}

fn run(cli: Cli) -> Result<ExitCode> {
    let format: Format = cli
        .format
        .parse()
        .map_err(|e: String| anyhow!(e))?;
    let command = match (cli.config, cli.command) {
        (Some(path), None) => return run_config(&path),
        (Some(_), Some(_)) => bail!("--config replaces the command line; drop the subcommand"),
        (None, Some(c)) => c,
        (None, None) => bail!("a subcommand or --config is required (try --help)"),
    };
    let (body, code) = dispatch(command, format, cli.seed)?;
    emit(&body, cli.output.as_deref())?;
    Ok(ExitCode::from(code))
}

/// Rebuilds an argv from the config document and reparses it, so the JSON
/// mirror and the flag surface can never drift apart.
fn run_config(path: &std::path::Path) -> Result<ExitCode> {
    let text = fs::read_to_string(path).with_context(|| format!("reading config `{}`", path.display()))?;
    let doc: serde_json::Map<String, serde_json::Value> =
        serde_json::from_str(&text).context("config must be a JSON object")?;
    let mut argv = vec!["subshift".to_string()];
    let command = doc
        .get("command")
        .and_then(|v| v.as_str())
        .ok_or_else(|| anyhow!("config needs a string `command` field"))?;
    argv.push(command.to_string());
    let mut positional = Vec::new();
    for (key, value) in &doc {
        if key == "command" {
            continue;
        }
        let flag = format!("--{}", kebab(key));
        if key == "substitution" {
            positional.push(
                value
                    .as_str()
                    .ok_or_else(|| anyhow!("config `substitution` must be a string"))?
                    .to_string(),
            );
            continue;
        }
        match value {
            serde_json::Value::Bool(true) => argv.push(flag),
            serde_json::Value::Bool(false) | serde_json::Value::Null => {}
            serde_json::Value::String(s) => {
                argv.push(flag);
                argv.push(s.clone());
            }
            serde_json::Value::Number(n) => {
                argv.push(flag);
                argv.push(n.to_string());
            }
            serde_json::Value::Array(items) => {
                let joined: Vec<String> = items
                    .iter()
                    .map(|v| match v {
                        serde_json::Value::String(s) => Ok(s.clone()),
                        serde_json::Value::Number(n) => Ok(n.to_string()),
                        other => Err(anyhow!("config `{key}` has a non-scalar entry: {other}")),
                    })
                    .collect::<Result<_>>()?;
                argv.push(flag);
                argv.push(joined.join(","));
            }
            other => bail!("config `{key}` has unsupported value {other}"),
        }
    }
    argv.extend(positional);
    let cli = Cli::try_parse_from(&argv).with_context(|| format!("config expands to: {argv:?}"))?;
    if cli.config.is_some() {
        bail!("config files cannot nest");
    }
    run(cli)
}

fn kebab(key: &str) -> String {
    let mut out = String::with_capacity(key.len() + 4);
    for c in key.chars() {
        if c.is_ascii_uppercase() {
            out.push('-');
            out.push(c.to_ascii_lowercase());
        } else {
            out.push(c);
        }
    }
    out
}

fn emit(body: &str, output: Option<&std::path::Path>) -> Result<()> {
    match output {
        Some(path) => fs::write(path, body).with_context(|| format!("writing `{}`", path.display()))?,
        None => print!("{body}"),
    }
    Ok(())
}

fn json_body<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn dispatch(command: Command, format: Format, seed: u64) -> Result<(String, u8)> {
    match command {
        Command::Analyze(args) => cmd_analyze(args, format),
        Command::Language(args) => cmd_language(args, format),
        Command::Bispecial(args) => cmd_bispecial(args, format),
        Command::Accidents(args) => cmd_accidents(args, format, seed),
        Command::Renorm(args) => cmd_renorm(args, format, seed),
        Command::Freeze(args) => cmd_freeze(args, format),
        Command::Pressure(args) => cmd_pressure(args, format),
    }
}

fn cmd_analyze(args: AnalyzeArgs, format: Format) -> Result<(String, u8)> {
    let subst = args.subst.load()?;
    let index = LanguageIndex::build(&subst, args.max_len)?;
    let mut structure = subst.structure_report();
    let bound = args.aperiodicity_bound.min(args.max_len.saturating_sub(1));
    structure.aperiodic_evidence = Some(index.aperiodicity_check(bound)?);
    let power_free = match index.power_free_bound(args.power_free_base) {
        Ok(r) => Some(r),
        Err(subshift::language::LanguageError::PowerSearchSaturated { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let recognizability = match recognizability_length(&index, args.scan.min(args.max_len / 2)) {
        Ok(r) => Some(r),
        Err(
            subshift::recognize::RecognizeError::ScanSaturated { .. }
            | subshift::recognize::RecognizeError::NotMarked,
        ) => None,
        Err(e) => return Err(e.into()),
    };
    let report = report::AnalyzeReport {
        two_full: index.is_two_full(),
        max_len: args.max_len,
        k_constant: report::k_constant(&subst, structure.perron.value, args.k_depth),
        k_depth: args.k_depth,
        power_free,
        recognizability,
        structure,
    };
    let body = match format {
        Format::Json => json_body(&report)?,
        Format::Csv => {
            let mut out = String::from("key,value\n");
            let s = &report.structure;
            out.push_str(&format!("alphabet,{}\n", s.alphabet.iter().collect::<String>()));
            out.push_str(&format!("primitive,{}\n", s.primitive));
            out.push_str(&format!("marked,{}\n", s.marked));
            out.push_str(&format!("twoFull,{}\n", report.two_full));
            out.push_str(&format!("lambda,{}\n", report::sig12(s.perron.value)));
            out.push_str(&format!("lengthConstant,{}\n", report::sig12(s.length_constant)));
            out.push_str(&format!("kConstant,{}\n", report::sig12(report.k_constant)));
            match &report.power_free {
                Some(p) => out.push_str(&format!("powerFreeBound,{}\n", p.n_h)),
                None => out.push_str("powerFreeBound,unbounded\n"),
            }
            match &report.recognizability {
                Some(r) => out.push_str(&format!("recognizabilityLength,{}\n", r.l_h)),
                None => out.push_str("recognizabilityLength,none\n"),
            }
            out
        }
        Format::Text => {
            let s = &report.structure;
            let mut out = String::new();
            out.push_str(&format!(
                "alphabet: {}\n",
                s.alphabet.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
            ));
            for (c, img) in s.alphabet.iter().zip(s.images.iter()) {
                out.push_str(&format!("  {c} -> {img}\n"));
            }
            out.push_str(&format!(
                "primitive: {} (witness power {:?})\n",
                s.primitive, s.primitive_witness
            ));
            out.push_str(&format!("marked: {}\n", s.marked));
            out.push_str(&format!("two-full: {}\n", report.two_full));
            match s.aperiodic_evidence.as_ref().unwrap() {
                subshift::AperiodicEvidence::CertifiedPeriodic { period } => {
                    out.push_str(&format!("aperiodicity: certified periodic, period {period}\n"))
                }
                subshift::AperiodicEvidence::NoPeriodicityFoundUpToBound { bound } => out
                    .push_str(&format!(
                        "aperiodicity: no periodicity found up to length {bound}\n"
                    )),
            }
            out.push_str(&format!(
                "lambda: {} (certified in [{}, {}])\n",
                report::sig12(s.perron.value),
                report::sig12(s.perron.lower),
                report::sig12(s.perron.upper)
            ));
            out.push_str(&format!("length constant c: {}\n", report::sig12(s.length_constant)));
            out.push_str(&format!(
                "K (sup |H^n(a)| / lambda^n, n <= {}): {}\n",
                report.k_depth,
                report::sig12(report.k_constant)
            ));
            match &report.power_free {
                Some(p) => out.push_str(&format!(
                    "power-free bound N_H: {} (max exponent {} by {})\n",
                    p.n_h, p.max_exponent, p.witness
                )),
                None => out.push_str("power-free bound N_H: none within the cutoff\n"),
            }
            match &report.recognizability {
                Some(r) => out.push_str(&format!(
                    "recognizability length l(H): {} (scan {})\n",
                    r.l_h, r.scan_len
                )),
                None => out.push_str("recognizability length l(H): none within the scan\n"),
            }
            out
        }
    };
    Ok((body, 0))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct LanguageReport {
    max_len: usize,
    lambda: f64,
    two_full: bool,
    rows: Vec<ComplexityRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    factors: Option<FactorListing>,
}

#[derive(Serialize)]
struct ComplexityRow {
    n: usize,
    p: usize,
    s: i64,
}

#[derive(Serialize)]
struct FactorListing {
    length: usize,
    words: Vec<String>,
}

fn cmd_language(args: LanguageArgs, format: Format) -> Result<(String, u8)> {
    let subst = args.subst.load()?;
    let index = LanguageIndex::build(&subst, args.max_len)?;
    let up_to = args.table_to.unwrap_or(args.max_len).min(args.max_len);
    let raw = report::complexity_rows(&index, up_to);
    let factors = match args.factors {
        Some(len) => {
            if len > args.max_len {
                bail!("--factors {} exceeds --max-len {}", len, args.max_len);
            }
            Some(FactorListing {
                length: len,
                words: index
                    .factors_sorted(len)
                    .into_iter()
                    .map(|w| subst.word_string(w))
                    .collect(),
            })
        }
        None => None,
    };
    let report_data = LanguageReport {
        max_len: args.max_len,
        lambda: index.lambda(),
        two_full: index.is_two_full(),
        rows: raw.iter().map(|&(n, p, s)| ComplexityRow { n, p, s }).collect(),
        factors,
    };
    let body = match format {
        Format::Json => json_body(&report_data)?,
        Format::Csv => report::complexity_csv(&raw),
        Format::Text => {
            let mut out = format!(
                "lambda {}  two-full {}\n   n    p(n)    s(n)\n",
                report::sig12(report_data.lambda),
                report_data.two_full
            );
            for row in &report_data.rows {
                out.push_str(&format!("{:4}  {:6}  {:6}\n", row.n, row.p, row.s));
            }
            if let Some(f) = &report_data.factors {
                out.push_str(&format!("factors of length {}: {}\n", f.length, f.words.join(" ")));
            }
            out
        }
    };
    Ok((body, 0))
}

fn cmd_bispecial(args: BispecialArgs, format: Format) -> Result<(String, u8)> {
    let subst = args.subst.load()?;
    let index = LanguageIndex::build(&subst, args.max_len)?;
    let l_h = match args.l_h {
        Some(v) => v,
        None => recognizability_length(&index, args.scan.min(args.max_len / 2))?.l_h,
    };
    let up_to = args
        .up_to
        .unwrap_or_else(|| args.max_len.saturating_sub(2).min(100));
    let records = index.bispecials_up_to(up_to)?;
    let catalog = index.bispecial_structure_check(records, l_h);
    let body = match format {
        Format::Json => json_body(&catalog)?,
        Format::Csv => report::bispecial_csv(&catalog),
        Format::Text => {
            let mut out = format!(
                "l(H) {}  bispecials {}  seeds {}  violations {}\n",
                catalog.l_h,
                catalog.records.len(),
                catalog.seed_set.len(),
                catalog.violations.len()
            );
            for e in &catalog.structure_map {
                out.push_str(&format!(
                    "  {} = H^{}({}) length {}\n",
                    e.word, e.n, e.seed, e.length
                ));
            }
            for v in &catalog.violations {
                out.push_str(&format!("  violation: {v}\n"));
            }
            for c in &catalog.length_clusters {
                out.push_str(&format!(
                    "  cluster seed {}: count {} c {} spread {}\n",
                    c.seed,
                    c.count,
                    report::sig12(c.c),
                    report::sig12(c.spread)
                ));
            }
            out
        }
    };
    Ok((body, 0))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct AccidentsReport {
    x: String,
    level: u32,
    horizon: usize,
    profile: subshift::attractor::AccidentProfile,
    #[serde(skip_serializing_if = "Option::is_none")]
    staircase: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    check: Option<subshift::attractor::RenormCheckReport>,
}

fn cmd_accidents(args: AccidentsArgs, format: Format, seed: u64) -> Result<(String, u8)> {
    let subst = args.subst.load()?;
    let index = LanguageIndex::build(&subst, args.max_len)?;
    let x = report::parse_tail(&subst, &args.x, seed).map_err(|e| anyhow!(e))?;
    let x = if args.level > 0 {
        x.image(&subst, args.level, subshift::attractor::PROFILE_CAP)?
    } else {
        x
    };
    let profile = accidents(&index, &x, args.horizon)?;
    let staircase = if args.staircase {
        let last = profile.times.last().copied().unwrap_or(0) + 2;
        let digits = x.digits(&subst, last + index.max_len() + 2)?;
        Some(staircase_text(&delta_profile_over(&index, &digits.0, last)?))
    } else {
        None
    };
    let check = match args.check {
        Some(n) => {
            let l_h = recognizability_length(&index, args.scan.min(args.max_len / 2))?.l_h;
            let mut report = None;
            if let Ok(mut deep) = DeepProfiler::new(&index) {
                report = Some(accident_renormalization_check(
                    &index, &x, args.k, n, l_h, &mut deep,
                )?);
            }
            match report {
                Some(r) => Some(r),
                None => {
                    let mut shallow = ShallowProfiler { index: &index };
                    Some(accident_renormalization_check(
                        &index, &x, args.k, n, l_h, &mut shallow,
                    )?)
                }
            }
        }
        None => None,
    };
    let data = AccidentsReport {
        x: args.x.clone(),
        level: args.level,
        horizon: args.horizon,
        profile,
        staircase,
        check,
    };
    let body = match format {
        Format::Json => json_body(&data)?,
        Format::Csv => report::accidents_csv(&data.profile),
        Format::Text => {
            let mut out = format!(
                "x {}  delta0 {}  accidents {}\ntimes  {:?}\ndepths {:?}\nDeltas {:?}\n",
                data.x,
                data.profile.delta0,
                data.profile.times.len(),
                data.profile.times,
                data.profile.depths,
                data.profile.deltas
            );
            if let Some(s) = &data.staircase {
                out.push_str(s);
            }
            if let Some(c) = &data.check {
                out.push_str(&format!(
                    "check n={}: hypotheses {} count-match {} witnesses-match {} max residual {:?}\n",
                    c.n, c.hypotheses_met, c.count_match, c.witnesses_match, c.max_relative_residual
                ));
            }
            out
        }
    };
    Ok((body, 0))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct RenormReport {
    x: String,
    m_max: u32,
    profiler: String,
    result: RenormResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    limit_u: Option<LimitU>,
}

fn pick_profiler<'a>(
    choice: &str,
    index: &'a LanguageIndex,
) -> Result<(Box<dyn LevelProfiler + 'a>, String)> {
    match choice {
        "deep" => Ok((Box::new(DeepProfiler::new(index)?), "deep".to_string())),
        "shallow" => Ok((Box::new(ShallowProfiler { index }), "shallow".to_string())),
        "auto" => match DeepProfiler::new(index) {
            Ok(p) => Ok((Box::new(p), "deep".to_string())),
            Err(_) => Ok((Box::new(ShallowProfiler { index }), "shallow".to_string())),
        },
        other => bail!("unknown profiler `{other}` (expected auto, deep, or shallow)"),
    }
}

fn cmd_renorm(args: RenormArgs, format: Format, seed: u64) -> Result<(String, u8)> {
    let subst = args.subst.load()?;
    let index = LanguageIndex::build(&subst, args.max_len)?;
    let x = report::parse_tail(&subst, &args.x, seed).map_err(|e| anyhow!(e))?;
    let potential = match &args.potential {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading potential `{}`", path.display()))?;
            serde_json::from_str::<Potential>(&text).context("parsing potential document")?
        }
        None => Potential::power(args.alpha),
    };
    let (mut profiler, profiler_name) = pick_profiler(&args.profiler, &index)?;
    let result = classify_limit(&potential, &index, &x, args.m_max, profiler.as_mut())?;
    let limit_report = if args.limit {
        let l_h = recognizability_length(&index, args.scan.min(args.max_len / 2))?.l_h;
        Some(limit_u(&index, &x, l_h, profiler.as_mut())?)
    } else {
        None
    };
    let inconclusive = matches!(result.classification, subshift::renorm::LimitClass::Inconclusive);
    let lambda = index.lambda();
    let data = RenormReport {
        x: args.x.clone(),
        m_max: args.m_max,
        profiler: profiler_name,
        result,
        limit_u: limit_report,
    };
    let body = match format {
        Format::Json => json_body(&data)?,
        Format::Csv => report::renorm_csv(&data.result, lambda),
        Format::Text => {
            let mut out = format!("x {}  alpha {}\n", data.x, report::sig12(data.result.alpha));
            for (m, v) in data.result.values.iter().enumerate() {
                out.push_str(&format!("m {:2}  R^m V = {}\n", m, report::sig12(*v)));
            }
            out.push_str(&format!(
                "classification: {}\n",
                report::class_str(&data.result.classification)
            ));
            if let Some(est) = data.result.limit_estimate {
                out.push_str(&format!("limit estimate: {}\n", report::sig12(est)));
            }
            if let Some(oracle) = data.result.oracle_value {
                out.push_str(&format!("closed-form value: {}\n", report::sig12(oracle)));
            }
            if let Some(l) = &data.limit_u {
                out.push_str(&format!(
                    "limit U: {} (levels {}..{}, converged {})\n",
                    report::sig12(l.value),
                    l.k_start,
                    l.k_used,
                    l.converged
                ));
            }
            out
        }
    };
    Ok((body, if inconclusive { 2 } else { 0 }))
}

fn cmd_freeze(args: FreezeArgs, format: Format) -> Result<(String, u8)> {
    let subst = args.subst.load()?;
    let index = LanguageIndex::build(&subst, args.max_len)?;
    let l_h = match args.l_h {
        Some(v) => v,
        None => recognizability_length(&index, args.scan.min(args.max_len / 2))?.l_h,
    };
    let cyl = CylinderJ::new(&index, &args.wj, args.n, l_h)?;
    let budget = env_budget("SUBSHIFT_NODE_BUDGET", THERMO_NODE_BUDGET)?;
    let single = args.betas.is_none() && args.beta.is_some();
    let grid: Vec<f64> = match (&args.betas, args.beta) {
        (Some(list), _) => list.clone(),
        (None, Some(b)) => vec![b],
        (None, None) => default_beta_grid(),
    };
    let certs: Vec<FreezingCertificate> =
        freezing_certificate_grid_budgeted(&index, &cyl, &grid, args.n_max, args.l_max, budget)?;
    let code = if single && certs[0].outcome == CertOutcome::Inconclusive {
        2
    } else {
        0
    };
    let body = match format {
        Format::Json => {
            if single {
                json_body(&certs[0])?
            } else {
                json_body(&certs)?
            }
        }
        Format::Csv => report::freeze_csv(&certs),
        Format::Text => {
            let mut out = format!(
                "wJ {}  N {}  nMax {}  lMax {}  model: {}\n",
                certs[0].wj, certs[0].n, certs[0].n_max, certs[0].l_max, certs[0].model
            );
            for c in &certs {
                out.push_str(&format!(
                    "beta {:>14}  q {:>14}  op {:>14}  tail {:>14}  {}\n",
                    report::sig12(c.beta),
                    report::sig12(c.q),
                    report::sig12(c.operator_value),
                    report::sig12(c.tail_bound),
                    report::outcome_str(c.outcome)
                ));
            }
            out
        }
    };
    Ok((body, code))
}

fn cmd_pressure(args: PressureArgs, format: Format) -> Result<(String, u8)> {
    let subst = args.subst.load()?;
    let index = LanguageIndex::build(&subst, args.max_len)?;
    let grid = args.betas.clone().unwrap_or_else(default_beta_grid);
    let budget = env_budget("SUBSHIFT_PRESSURE_BUDGET", PRESSURE_BUDGET)?;
    let curve = pressure_curve_budgeted(&index, &grid, args.n, budget)?;
    let body = match format {
        Format::Json => json_body(&curve)?,
        Format::Csv => report::pressure_csv(&curve),
        Format::Text => {
            let mut out = format!(
                "n {}  ln D = {}  betaCStar {:?}\n",
                curve.n,
                report::sig12(curve.log_d),
                curve.beta_c_star
            );
            for i in 0..curve.betas.len() {
                out.push_str(&format!(
                    "beta {:>14}  lower {:>14}  upper {:>14}\n",
                    report::sig12(curve.betas[i]),
                    report::sig12(curve.lower[i]),
                    report::sig12(curve.upper[i])
                ));
            }
            out
        }
    };
    Ok((body, 0))
}
