// Copyright 2026 The bosonic-covert Authors
// SPDX-License-Identifier: Apache-2.0

//! The `covert` command-line front end.
//!
//! Exit codes: 0 success, 1 selfcheck failure, 2 usage or out-of-range input,
//! 3 numerical instability, 4 rejected configuration.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::constellations::{
    default_u_grid, qre_sweep, quartic_coefficient_fit, Constellation, ConstellationKind,
    WillieSpec,
};
use crate::covertlimits::{
    c_cov, c_rel_bounds, covert_budget_ns, pinsker_pe_floor, sparsification_tau, srl_throughput,
    ChannelParams,
};
use crate::error::{Error, Result};
use crate::fockspace::TruncationPolicy;
use crate::linksim::{run_experiment, srl_scaling_sweep, SimConfig};
use crate::selfcheck::{run_selfcheck, SelfcheckOptions};

pub const SCHEMA_VERSION: u32 = 1;
/// Setting this to `1` makes `selfcheck` compare against negated closed forms.
pub const FAULT_ENV: &str = "BOSONIC_COVERT_SELFCHECK_FAULT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Qpsk,
    Bpsk,
}

impl From<Kind> for ConstellationKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Qpsk => ConstellationKind::Qpsk,
            Kind::Bpsk => ConstellationKind::Bpsk,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "covert",
    version,
    about = "Covert-communication limits and simulations for the lossy thermal-noise bosonic channel"
)]
pub struct Cli {
    /// Output document format (default: csv for tables, json otherwise).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the document here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Square-root-law constants, photon budget and throughput estimates.
    Budget(BudgetArgs),
    /// Exact versus leading-order per-mode QRE over warden-side displacements.
    QreSweep(SweepArgs),
    /// Fit the quartic QRE coefficient from exact truncated-Fock QRE.
    FitCoeff(FitArgs),
    /// Run a seeded Monte Carlo link experiment.
    Simulate(SimArgs),
    /// Run the experiment across block lengths and regress throughput on n.
    Scaling(ScalingArgs),
    /// Run the invariant suite.
    Selfcheck,
}

#[derive(Debug, Args)]
pub struct BudgetArgs {
    #[arg(long)]
    pub eta: f64,
    #[arg(long = "nbar-b")]
    pub nbar_b: f64,
    #[arg(long = "delta-qre")]
    pub delta_qre: f64,
    /// Number of modes.
    #[arg(long, value_parser = parse_count)]
    pub n: u64,
    /// Operating photon number per selected mode, for the sparsification fraction.
    #[arg(long = "nbar-s")]
    pub nbar_s: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub constellation: Kind,
    #[arg(long)]
    pub eta: f64,
    #[arg(long = "nbar-b")]
    pub nbar_b: f64,
    #[arg(long = "u-min")]
    pub u_min: f64,
    #[arg(long = "u-max")]
    pub u_max: f64,
    #[arg(long)]
    pub points: usize,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long, value_enum)]
    pub constellation: Kind,
    /// Warden-side thermal photon number η·n̄_B.
    #[arg(long)]
    pub nt: f64,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 0.5)]
    pub eta: f64,
}

#[derive(Debug, Args)]
pub struct SimFlags {
    /// JSON SimConfig; flags below are ignored when given, except --seed.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    pub eta: f64,
    #[arg(long = "nbar-b", default_value_t = 1.0)]
    pub nbar_b: f64,
    #[arg(long = "delta-qre", default_value_t = 0.04)]
    pub delta_qre: f64,
    #[arg(long, value_enum, default_value = "qpsk")]
    pub constellation: Kind,
    /// Mean photon number on each selected mode.
    #[arg(long = "nbar-s", default_value_t = 0.1)]
    pub nbar_s: f64,
    #[arg(long, value_parser = parse_count, default_value = "1000")]
    pub trials: u64,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[command(flatten)]
    pub sim: SimFlags,
    #[arg(long, value_parser = parse_count, default_value = "100000")]
    pub n: u64,
    /// Include every ROC point in the JSON document.
    #[arg(long = "include-roc")]
    pub include_roc: bool,
}

#[derive(Debug, Args)]
pub struct ScalingArgs {
    #[command(flatten)]
    pub sim: SimFlags,
    /// Comma-separated ascending block lengths.
    #[arg(long, value_delimiter = ',', value_parser = parse_count, default_value = "1e4,1e5,1e6")]
    pub n: Vec<u64>,
}

/// Positive integer, accepting scientific notation such as `1e6`.
fn parse_count(s: &str) -> std::result::Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return if v == 0 { Err("must be at least 1".into()) } else { Ok(v) };
    }
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !(v >= 1.0 && v.fract() == 0.0 && v < 1.8e19) {
        return Err(format!("`{s}` is not a positive integer"));
    }
    Ok(v as u64)
}

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidParameter { .. }
        | Error::InvalidInput(_)
        | Error::InvalidDimension { .. }
        | Error::DimensionMismatch { .. }
        | Error::InvalidState(_) => 2,
        Error::UnstableFit(_)
        | Error::TruncationOverflow { .. }
        | Error::InsufficientDimension { .. }
        | Error::InvalidBracket { .. }
        | Error::DivergenceInfinite { .. } => 3,
        Error::ConfigRejected(_) | Error::BudgetNotBinding { .. } => 4,
    }
}

enum Cell {
    F(f64),
    I(u64),
    S(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::F(v) => format!("{v:.5e}"),
            Cell::I(v) => v.to_string(),
            Cell::S(s) => s.clone(),
        }
    }
}

fn csv_table(columns: &[&str], rows: &[Vec<Cell>]) -> String {
    let mut out = columns.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

/// A rendered document and whether the command succeeded.
pub struct Rendered {
    pub text: String,
    pub ok: bool,
}

fn document(command: &str, fields: Map<String, Value>) -> Value {
    let mut doc = Map::new();
    doc.insert("schema_version".into(), json!(SCHEMA_VERSION));
    doc.insert("command".into(), json!(command));
    doc.extend(fields);
    Value::Object(doc)
}

fn render_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable document");
    s.push('\n');
    s
}

/// Flat record rendered as JSON or a one-row CSV.
fn record(command: &str, fields: Vec<(&str, Cell)>, format: Format) -> String {
    match format {
        Format::Json => {
            let map = fields
                .into_iter()
                .map(|(k, c)| {
                    let v = match c {
                        Cell::F(x) => json!(x),
                        Cell::I(x) => json!(x),
                        Cell::S(x) => json!(x),
                    };
                    (k.to_string(), v)
                })
                .collect();
            render_json(&document(command, map))
        }
        Format::Csv => {
            let columns: Vec<&str> = fields.iter().map(|(k, _)| *k).collect();
            let row: Vec<Cell> = fields.into_iter().map(|(_, c)| c).collect();
            csv_table(&columns, &[row])
        }
    }
}

fn cmd_budget(a: &BudgetArgs, format: Format) -> Result<String> {
    let p = ChannelParams::new(a.eta, a.nbar_b)?;
    let budget = covert_budget_ns(&p, a.n, a.delta_qre)?;
    let cc = c_cov(&p);
    let rel = c_rel_bounds(&p);
    let delta = a.delta_qre.sqrt();
    let n = a.n as f64;
    let ln2 = std::f64::consts::LN_2;
    let m_thermal = srl_throughput(n, delta, cc, rel.lower_thermal)?;
    let m_shot = srl_throughput(n, delta, cc, rel.lower_shotnoise)?;
    let m_chi = srl_throughput(n, delta, cc, rel.upper_chi)?;
    let mut fields = vec![
        ("eta", Cell::F(a.eta)),
        ("nbar_b", Cell::F(a.nbar_b)),
        ("delta_qre_nats", Cell::F(a.delta_qre)),
        ("n", Cell::I(a.n)),
        ("c_cov", Cell::F(cc)),
        ("nbar_s", Cell::F(budget.nbar_s)),
        ("delta_p", Cell::F(budget.delta_p)),
        ("c_rel_lower_thermal_nats_per_photon", Cell::F(rel.lower_thermal)),
        ("c_rel_lower_shotnoise_nats_per_photon", Cell::F(rel.lower_shotnoise)),
        ("c_rel_upper_chi_nats_per_photon", Cell::F(rel.upper_chi)),
        ("m_lower_thermal_nats", Cell::F(m_thermal * ln2)),
        ("m_lower_thermal_bits", Cell::F(m_thermal)),
        ("m_lower_shotnoise_nats", Cell::F(m_shot * ln2)),
        ("m_lower_shotnoise_bits", Cell::F(m_shot)),
        ("m_upper_chi_nats", Cell::F(m_chi * ln2)),
        ("m_upper_chi_bits", Cell::F(m_chi)),
        ("pinsker_pe_floor", Cell::F(pinsker_pe_floor(a.delta_qre)?)),
    ];
    if let Some(ns) = a.nbar_s {
        fields.push(("operating_nbar_s", Cell::F(ns)));
        fields.push(("tau", Cell::F(sparsification_tau(ns, &p, a.delta_qre, a.n)?)));
    }
    Ok(record("budget", fields, format))
}

fn cmd_qre_sweep(a: &SweepArgs, format: Format) -> Result<String> {
    if !(a.u_min > 0.0 && a.u_min < a.u_max) {
        return Err(Error::InvalidInput(format!(
            "--u-min and --u-max must satisfy 0 < u_min < u_max (got {} and {})",
            a.u_min, a.u_max
        )));
    }
    if a.points == 0 {
        return Err(Error::InvalidInput("--points must be at least 1".into()));
    }
    let channel = ChannelParams::new(a.eta, a.nbar_b)?;
    let kind: ConstellationKind = a.constellation.into();
    let rows = qre_sweep(
        kind,
        channel,
        a.u_min,
        a.u_max,
        a.points,
        a.tau,
        TruncationPolicy::default(),
    )?;
    Ok(match format {
        Format::Csv => csv_table(
            &["u", "qre_exact_nats", "qre_leading_nats", "ratio", "dim_used"],
            &rows
                .iter()
                .map(|r| {
                    vec![
                        Cell::F(r.u),
                        Cell::F(r.qre_exact_nats),
                        Cell::F(r.qre_leading_nats),
                        Cell::F(r.ratio),
                        Cell::I(r.dim_used as u64),
                    ]
                })
                .collect::<Vec<_>>(),
        ),
        Format::Json => {
            let mut m = Map::new();
            m.insert("constellation".into(), json!(kind.to_string()));
            m.insert("eta".into(), json!(a.eta));
            m.insert("nbar_b".into(), json!(a.nbar_b));
            m.insert("tau".into(), json!(a.tau));
            m.insert("rows".into(), serde_json::to_value(&rows).expect("rows"));
            render_json(&document("qre-sweep", m))
        }
    })
}

fn cmd_fit(a: &FitArgs, format: Format) -> Result<String> {
    if !(a.nt > 0.0 && a.nt.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "nt",
            value: a.nt,
            reason: "must be positive",
        });
    }
    let kind: ConstellationKind = a.constellation.into();
    let channel = ChannelParams::new(a.eta, a.nt / a.eta)?;
    let spec = WillieSpec::new(channel, kind.preset(1.0), a.tau, TruncationPolicy::default())?;
    let fit = quartic_coefficient_fit(&spec, &default_u_grid(a.nt))?;
    let expected = kind.quartic(a.nt) * a.tau * a.tau;
    let fields = vec![
        ("constellation", Cell::S(kind.to_string())),
        ("nt", Cell::F(a.nt)),
        ("tau", Cell::F(a.tau)),
        ("c4_nats", Cell::F(fit.c4)),
        ("c4_stderr_nats", Cell::F(fit.stderr)),
        ("c4_closed_form_nats", Cell::F(expected)),
        ("relative_error", Cell::F(fit.c4 / expected - 1.0)),
        ("points_used", Cell::I(fit.points_used as u64)),
        ("dim", Cell::I(fit.dim as u64)),
    ];
    Ok(record("fit-coeff", fields, format))
}

fn sim_config(f: &SimFlags, n: u64) -> Result<SimConfig> {
    let mut config = match &f.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<SimConfig>(&text)
                .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?
        }
        None => SimConfig {
            channel: ChannelParams::new(f.eta, f.nbar_b)?,
            n_modes: n,
            delta_qre: f.delta_qre,
            constellation: match f.constellation {
                Kind::Qpsk => Constellation::qpsk(1.0),
                Kind::Bpsk => Constellation::bpsk(1.0),
            },
            nbar_s_per_selected_mode: f.nbar_s,
            trials: f.trials,
            master_seed: 0,
        },
    };
    if let Some(seed) = f.seed {
        config.master_seed = seed;
    }
    config.validate()?;
    Ok(config)
}

fn cmd_simulate(a: &SimArgs, format: Format) -> Result<String> {
    let config = sim_config(&a.sim, a.n)?;
    let r = run_experiment(&config)?;
    let ln2 = std::f64::consts::LN_2;
    let fields = vec![
        ("n", Cell::I(r.n_modes)),
        ("trials", Cell::I(r.trials)),
        ("seed", Cell::I(config.master_seed)),
        ("tau", Cell::F(r.tau)),
        ("e_selected", Cell::F(r.mean_selected)),
        ("expected_photons", Cell::F(r.expected_photons)),
        ("ser", Cell::F(r.ser)),
        ("ser_stderr", Cell::F(r.ser_stderr)),
        ("mi_nats", Cell::F(r.mi_nats)),
        ("mi_bits", Cell::F(r.mi_nats / ln2)),
        ("holevo_chi_nats", Cell::F(r.holevo_chi_nats)),
        ("m_bits", Cell::F(r.m_bits)),
        ("willie_min_pe", Cell::F(r.willie.min_pe)),
        ("willie_pe_stderr", Cell::F(r.willie.min_pe_stderr)),
        ("willie_best_threshold", Cell::I(r.willie.best_threshold)),
        ("pinsker_pe_floor", Cell::F(r.pinsker_floor)),
    ];
    if a.include_roc && format == Format::Json {
        let text = record("simulate", fields, format);
        let mut v: Value = serde_json::from_str(&text).expect("own document");
        v["config"] = serde_json::to_value(&config).expect("config");
        v["roc"] = serde_json::to_value(&r.willie.points).expect("roc");
        return Ok(render_json(&v));
    }
    Ok(record("simulate", fields, format))
}

fn cmd_scaling(a: &ScalingArgs, format: Format) -> Result<String> {
    let first = *a.n.first().ok_or_else(|| Error::InvalidInput("--n is empty".into()))?;
    let base = sim_config(&a.sim, first)?;
    let report = srl_scaling_sweep(&base, &a.n)?;
    Ok(match format {
        Format::Csv => {
            eprintln!("log-log slope of m_bits against n: {:.4}", report.slope);
            csv_table(
                &[
                    "n",
                    "tau",
                    "e_selected",
                    "ser",
                    "mi_nats",
                    "m_bits",
                    "willie_min_pe",
                    "willie_pe_stderr",
                ],
                &report
                    .rows
                    .iter()
                    .map(|r| {
                        vec![
                            Cell::I(r.n),
                            Cell::F(r.tau),
                            Cell::F(r.e_selected),
                            Cell::F(r.ser),
                            Cell::F(r.mi_nats),
                            Cell::F(r.m_bits),
                            Cell::F(r.willie_min_pe),
                            Cell::F(r.willie_pe_stderr),
                        ]
                    })
                    .collect::<Vec<_>>(),
            )
        }
        Format::Json => {
            let mut m = Map::new();
            m.insert("seed".into(), json!(base.master_seed));
            m.insert("trials".into(), json!(base.trials));
            m.insert("slope".into(), json!(report.slope));
            m.insert("pinsker_pe_floor".into(), json!(report.pinsker_floor));
            m.insert("rows".into(), serde_json::to_value(&report.rows).expect("rows"));
            render_json(&document("scaling", m))
        }
    })
}

fn cmd_selfcheck(format: Option<Format>) -> Rendered {
    let fault = std::env::var(FAULT_ENV).map(|v| v == "1").unwrap_or(false);
    let results = run_selfcheck(SelfcheckOptions {
        fault_injection: fault,
    });
    let ok = results.iter().all(|c| c.passed);
    let text = match format {
        Some(Format::Json) => {
            let mut m = Map::new();
            m.insert("passed".into(), json!(ok));
            m.insert("checks".into(), serde_json::to_value(&results).expect("checks"));
            render_json(&document("selfcheck", m))
        }
        Some(Format::Csv) => csv_table(
            &["check", "passed", "value", "tolerance"],
            &results
                .iter()
                .map(|c| {
                    vec![
                        Cell::S(c.name.clone()),
                        Cell::S(c.passed.to_string()),
                        Cell::F(c.value),
                        Cell::F(c.tolerance),
                    ]
                })
                .collect::<Vec<_>>(),
        ),
        None => {
            let mut s = String::new();
            for c in &results {
                s.push_str(&format!(
                    "{:<4} {:<28} {:>12.4e} <= {:<10.3e} {}\n",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.tolerance,
                    c.detail
                ));
            }
            let failed: Vec<&str> = results.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
            if failed.is_empty() {
                s.push_str(&format!("all {} checks passed\n", results.len()));
            } else {
                s.push_str(&format!("failed: {}\n", failed.join(", ")));
            }
            s
        }
    };
    Rendered { text, ok }
}

/// Runs one parsed invocation.
pub fn execute(cli: &Cli) -> Result<Rendered> {
    let table = Format::Csv;
    let rec = Format::Json;
    let text = match &cli.command {
        Command::Budget(a) => cmd_budget(a, cli.format.unwrap_or(rec))?,
        Command::QreSweep(a) => cmd_qre_sweep(a, cli.format.unwrap_or(table))?,
        Command::FitCoeff(a) => cmd_fit(a, cli.format.unwrap_or(rec))?,
        Command::Simulate(a) => cmd_simulate(a, cli.format.unwrap_or(rec))?,
        Command::Scaling(a) => cmd_scaling(a, cli.format.unwrap_or(table))?,
        Command::Selfcheck => return Ok(cmd_selfcheck(cli.format)),
    };
    Ok(Rendered { text, ok: true })
}

fn emit(cli: &Cli, text: &str) -> std::io::Result<()> {
    match &cli.output {
        Some(path) => std::fs::write(path, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(rendered) => {
            if let Err(e) = emit(&cli, &rendered.text) {
                eprintln!("error: cannot write output: {e}");
                return 2;
            }
            if rendered.ok {
                0
            } else {
                if cli.format.is_some() {
                    eprintln!("selfcheck failed");
                }
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
