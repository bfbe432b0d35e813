//! `watermelon` command line: every library operation as a subcommand that
//! writes a CSV or JSON table.

pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use watermelon_core::height_law::{density_h1, density_h2, km_limit, km_ratio, law};
use watermelon_core::lattice_series::{z_direct, z_tilde};
use watermelon_core::moments::{moment_h1, moment_h2_theta};
use watermelon_core::special_fn::{gamma_complete, theta, xi_riemann};
use watermelon_core::{DoubleSeriesParams, MomentMethod, MomentQuery, SumMethod, TruncationPolicy64};
use watermelon_walkers::{
    enumerate_heights, sample_heights, scaling_report, Mode, WalkEnsembleConfig, WalkError,
};

pub use output::{Cell, Format, OutputSpec, Table};

/// Published moments `E[H₁ˢ]`, `s = 0..5`, six decimals.
pub const TABLE1_H1: [f64; 6] = [1.0, 1.253314, 1.644934, 2.259832, 3.246969, 4.873485];
/// Published moments `E[H₂ˢ]`, `s = 0..5`, six decimals.
pub const TABLE1_H2: [f64; 6] = [1.0, 1.822625, 3.395156, 6.463823, 12.576665, 25.005999];
/// Published constant `c₂` in `⟨h₂(2n)⟩ ≃ c₂ √n`.
pub const FULMEK_C2: f64 = 2.57758;

/// Term cap used by `zseries --method direct` unless `--max-terms` is given.
pub const ZSERIES_DIRECT_TERMS: usize = 4096;

#[derive(Debug, Parser)]
#[command(name = "watermelon", version, about = "Maximum-height laws of Bessel bridges and watermelons")]
#[command(allow_negative_numbers = true)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Absolute tolerance of every truncated series.
    #[arg(long, global = true, default_value_t = 1e-15)]
    tol: f64,
    /// Term or shell cap of every truncated series [default: 64].
    #[arg(long, global = true)]
    max_terms: Option<usize>,
    /// Seed of the sampling commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output format [default: json for zseries and kmcheck, csv otherwise].
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Significant digits of every real number.
    #[arg(long, global = true, default_value_t = 10, value_parser = clap::value_parser!(u8).range(1..=17))]
    precision: u8,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Dirichlet,
    #[value(alias = "theta")]
    ThetaIntegral,
    Quadrature,
}

impl From<MethodArg> for MomentMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Dirichlet => MomentMethod::Dirichlet,
            MethodArg::ThetaIntegral => MomentMethod::ThetaIntegral,
            MethodArg::Quadrature => MomentMethod::Quadrature,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SumArg {
    Direct,
    GammaAccelerated,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Sample,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Theta function ϑ(u) or its derivatives.
    Theta {
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        u: Vec<f64>,
        #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=2))]
        order: u8,
    },
    /// Riemann ξ(s).
    Xi {
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        s: Vec<f64>,
    },
    /// Double Dirichlet series Z(α, β; γ).
    Zseries {
        #[arg(long)]
        alpha: u32,
        #[arg(long)]
        beta: u32,
        #[arg(long, allow_negative_numbers = true)]
        gamma: f64,
        #[arg(long, value_enum, default_value = "direct")]
        method: SumArg,
    },
    /// Moments E[H_N^s].
    Moments {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        n: u8,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        s: Vec<f64>,
        #[arg(long, value_enum, default_value = "theta-integral")]
        method: MethodArg,
    },
    /// Moments for s = 0..5 next to the published table.
    Table1,
    /// √2·E[H₂] next to the published constant c₂.
    Fulmek,
    /// P(H_N < h).
    Cdf {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        n: u8,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        h: Vec<f64>,
    },
    /// Density of H_N.
    Density {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        n: u8,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        h: Vec<f64>,
    },
    /// Karlin–McGregor ratio against the CDF of H₂.
    Kmcheck {
        #[arg(long, allow_negative_numbers = true)]
        h: f64,
        #[arg(long, default_value_t = 1e-2)]
        eps: f64,
    },
    /// Dyck paths and 2-watermelons.
    #[command(subcommand)]
    Walk(WalkCommand),
}

#[derive(Debug, Subcommand)]
enum WalkCommand {
    /// Exact height histogram.
    Enumerate {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        walkers: u8,
        #[arg(long)]
        n: usize,
    },
    /// Sampled height histogram.
    Sample {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        walkers: u8,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
    /// Scaled moments against their continuum limits.
    Scaling {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        walkers: u8,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        s: Vec<f64>,
        #[arg(long, value_enum, default_value = "sample")]
        mode: ModeArg,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Theta { .. } => "theta",
            Command::Xi { .. } => "xi",
            Command::Zseries { .. } => "zseries",
            Command::Moments { .. } => "moments",
            Command::Table1 => "table1",
            Command::Fulmek => "fulmek",
            Command::Cdf { .. } => "cdf",
            Command::Density { .. } => "density",
            Command::Kmcheck { .. } => "kmcheck",
            Command::Walk(WalkCommand::Enumerate { .. }) => "walk enumerate",
            Command::Walk(WalkCommand::Sample { .. }) => "walk sample",
            Command::Walk(WalkCommand::Scaling { .. }) => "walk scaling",
        }
    }

    fn default_format(&self) -> Format {
        match self {
            Command::Zseries { .. } | Command::Kmcheck { .. } => Format::Json,
            _ => Format::Csv,
        }
    }
}

/// Failure of a command, reported as `{kind, message, context}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
}

impl From<watermelon_core::Error> for CliError {
    fn from(e: watermelon_core::Error) -> Self {
        Self {
            kind: e.kind(),
            message: e.to_string(),
        }
    }
}

impl From<WalkError> for CliError {
    fn from(e: WalkError) -> Self {
        let kind = match &e {
            WalkError::Config(_) => "config",
            WalkError::Capacity { .. } => "capacity",
            WalkError::Core(inner) => inner.kind(),
        };
        Self {
            kind,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self {
            kind: "io",
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<Table, CliError>;

fn policy(tol: f64, max_terms: Option<usize>, default_terms: usize) -> Result<TruncationPolicy64, CliError> {
    Ok(TruncationPolicy64::new(tol, max_terms.unwrap_or(default_terms))?)
}

/// Runs the command line `argv` (program name first) and returns the exit
/// code: 0 on success, 1 on a numerical or configuration error, 2 on a usage
/// error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    let name = cli.command.name();
    let spec = OutputSpec {
        format: cli.global.format.unwrap_or(cli.command.default_format()),
        path: cli.global.output.clone(),
        precision: cli.global.precision,
    };
    let result = execute(&cli).and_then(|table| {
        let text = output::render(&table, &spec);
        output::emit(&text, &spec, stdout).map_err(CliError::from)
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let report = json!({
                "kind": e.kind,
                "message": e.message,
                "context": { "command": name },
            });
            let _ = writeln!(stderr, "{report}");
            1
        }
    }
}

fn execute(cli: &Cli) -> CmdResult {
    let g = &cli.global;
    let default = policy(g.tol, g.max_terms, 64);
    match &cli.command {
        Command::Theta { u, order } => {
            let p = default?;
            let mut t = Table::new(&["u", "order", "value", "err_bound", "terms_used"]);
            for &x in u {
                let v = theta(x, *order as usize, &p)?;
                t.push(vec![x.into(), (*order).into(), v.value.into(), v.err_bound.into(), v.terms_used.into()]);
            }
            Ok(t)
        }
        Command::Xi { s } => {
            let p = default?;
            let mut t = Table::new(&["s", "value", "err_bound", "terms_used"]);
            for &x in s {
                let v = xi_riemann(x, &p)?;
                t.push(vec![x.into(), v.value.into(), v.err_bound.into(), v.terms_used.into()]);
            }
            Ok(t)
        }
        Command::Zseries {
            alpha,
            beta,
            gamma,
            method,
        } => {
            let params = DoubleSeriesParams::new(*alpha, *beta, *gamma)?;
            let r = match method {
                SumArg::Direct => z_direct(&params, &policy(g.tol, g.max_terms, ZSERIES_DIRECT_TERMS)?)?,
                SumArg::GammaAccelerated => {
                    if alpha != beta || *alpha > 4 {
                        return Err(CliError {
                            kind: "domain",
                            message: "gamma_accelerated needs alpha = beta in {0, 2, 4}".into(),
                        });
                    }
                    // Z(2b, 2b; γ) = Z̃_{γ-2b}(b) / Γ(γ)
                    let b = (*alpha / 2) as usize;
                    let zt = z_tilde(*gamma - *alpha as f64, b, SumMethod::GammaAccelerated, &default?)?;
                    let g0 = gamma_complete(*gamma)?;
                    watermelon_core::LatticeSumResult {
                        value: zt.value / g0,
                        err_bound: zt.err_bound / g0,
                        method: zt.method,
                    }
                }
            };
            let mut t = Table::new(&["alpha", "beta", "gamma", "value", "err_bound", "method"]);
            t.push(vec![
                Cell::Int(*alpha as i64),
                Cell::Int(*beta as i64),
                (*gamma).into(),
                r.value.into(),
                r.err_bound.into(),
                r.method.name().into(),
            ]);
            Ok(t)
        }
        Command::Moments { n, s, method } => {
            let p = default?;
            let mut t = Table::new(&["n", "s", "value", "err_bound", "method"]);
            for &x in s {
                let r = MomentQuery::new(*n, x, (*method).into())?.evaluate(&p)?;
                t.push(vec![(*n).into(), x.into(), r.value.into(), r.err_bound.into(), r.method.name().into()]);
            }
            Ok(t)
        }
        Command::Table1 => {
            let p = default?;
            let mut t = Table::new(&["s", "E_H1_paper", "E_H1_computed", "E_H2_paper", "E_H2_computed", "abs_dev"]);
            for s in 0..6 {
                let h1 = moment_h1(s as f64, &p)?.value;
                let h2 = moment_h2_theta(s as f64, &p)?.value;
                let dev = (h1 - TABLE1_H1[s]).abs().max((h2 - TABLE1_H2[s]).abs());
                t.push(vec![
                    s.into(),
                    TABLE1_H1[s].into(),
                    h1.into(),
                    TABLE1_H2[s].into(),
                    h2.into(),
                    dev.into(),
                ]);
            }
            Ok(t)
        }
        Command::Fulmek => {
            let c = std::f64::consts::SQRT_2 * moment_h2_theta(1.0, &default?)?.value;
            let mut t = Table::new(&["sqrt2_E_H2", "paper_c2", "deviation"]);
            t.push(vec![c.into(), FULMEK_C2.into(), (c - FULMEK_C2).abs().into()]);
            Ok(t)
        }
        Command::Cdf { n, h } => {
            let p = default?;
            let mut t = Table::new(&["h", "value", "err_bound"]);
            for &x in h {
                let pt = law(*n, x, &p)?;
                t.push(vec![x.into(), pt.cdf.into(), pt.err_bound.into()]);
            }
            Ok(t)
        }
        Command::Density { n, h } => {
            let p = default?;
            let mut t = Table::new(&["h", "value", "err_bound"]);
            for &x in h {
                let pt = if *n == 1 { density_h1(x, &p)? } else { density_h2(x, &p)? };
                t.push(vec![x.into(), pt.density.into(), pt.err_bound.into()]);
            }
            Ok(t)
        }
        Command::Kmcheck { h, eps } => {
            let p = default?;
            let ratio = km_ratio(*h, *eps, 1.0, &p)?;
            let limit = km_limit(*h, &p)?;
            let cdf = law(2, *h, &p)?.cdf;
            let mut t = Table::new(&[
                "h",
                "eps",
                "km_ratio",
                "km_limit",
                "km_limit_err",
                "cdf_h2",
                "residual",
                "residual_limit",
            ]);
            t.push(vec![
                (*h).into(),
                (*eps).into(),
                ratio.into(),
                limit.value.into(),
                limit.err_bound.into(),
                cdf.into(),
                (ratio - cdf).abs().into(),
                (limit.value - cdf).abs().into(),
            ]);
            Ok(t)
        }
        Command::Walk(w) => walk(w, g.seed),
    }
}

fn walk(cmd: &WalkCommand, seed: u64) -> CmdResult {
    match cmd {
        WalkCommand::Enumerate { walkers, n } => {
            let hist = enumerate_heights(&WalkEnsembleConfig::exact(*walkers, *n)?)?;
            let mut t = Table::new(&["h", "count", "probability"]);
            for (&h, c) in &hist.counts {
                t.push(vec![h.into(), c.clone().into(), hist.probability(h).into()]);
            }
            Ok(t)
        }
        WalkCommand::Sample { walkers, n, samples } => {
            let hist = sample_heights(&WalkEnsembleConfig::sample(*walkers, *n, *samples, seed)?)?;
            let mut t = Table::new(&["h", "count", "probability", "std_error"]);
            for (&h, c) in &hist.counts {
                let p = hist.probability(h);
                let se = (p * (1.0 - p) / *samples as f64).sqrt();
                t.push(vec![h.into(), c.clone().into(), p.into(), se.into()]);
            }
            Ok(t)
        }
        WalkCommand::Scaling {
            walkers,
            n,
            s,
            mode,
            samples,
        } => {
            let mode = match mode {
                ModeArg::Exact => Mode::Exact,
                ModeArg::Sample => Mode::Sample,
            };
            // the half-length of the basis is replaced per entry of `n`
            let base = WalkEnsembleConfig::new(*walkers, 1, mode, *samples, seed)?;
            let mut t = Table::new(&[
                "n_walkers",
                "n",
                "s",
                "scaled_moment",
                "std_error",
                "continuum_target",
                "deviation",
            ]);
            for r in scaling_report(n, s, &base)? {
                t.push(vec![
                    r.n_walkers.into(),
                    r.n.into(),
                    r.s.into(),
                    r.scaled_moment.into(),
                    r.std_error.into(),
                    r.continuum_target.into(),
                    r.deviation.into(),
                ]);
            }
            Ok(t)
        }
    }
}
