//! Command-line front end: market files in, CSV or JSON tables out.
//!
//! Exit codes: 0 on success, 2 for invalid arguments or market files
//! (reported with a field path), 3 for domain errors (reported with the
//! library error name).

pub mod spec;
pub mod table;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use indiff::ldp::probe_grid;
use indiff::mc::with_workers;
use indiff::{
    arbitrage_bounds, empirical_regime_table, gartner_ellis_check, indifference_price, m_bounds,
    mc_cgf, mc_price_offset, mc_tilted_mean, optimal_quantity, quantity_scaling, rate_function,
    sample_tail, tail_cgf, tail_cgf_derivative, ComponentFamily, Error, ExtReal, FamilyKind,
    GeometricTail, MarketSpec, McConfig, McEstimate, Prediction, QuantityRule, TailClaim,
};

pub use spec::{parse_market_spec, MarketSpecFile, SpecError};
pub use table::{fmt_sig, Cell, Table};

pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Parser)]
#[command(name = "indiff", version, about = "Indifference prices and their large-deviations limits")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct MarketArg {
    /// Market file (JSON).
    #[arg(long)]
    market: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Indifference price per unit of `q` units in market `n`.
    Price {
        #[command(flatten)]
        market: MarketArg,
        #[arg(long)]
        n: usize,
        /// Quantities, comma-separated.
        #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true)]
        q: Vec<f64>,
    },
    /// Arbitrage-free price interval in market `n`.
    Bounds {
        #[command(flatten)]
        market: MarketArg,
        /// Market indices, e.g. `3` or `1-5,8`.
        #[arg(long, value_parser = parse_n_list)]
        n: NList,
    },
    /// Optimal purchase quantity at a quoted price.
    OptimalQty {
        #[command(flatten)]
        market: MarketArg,
        #[arg(long)]
        n: usize,
        /// Quoted prices, comma-separated.
        #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true)]
        price: Vec<f64>,
    },
    /// Optimal quantities against the speed `r_n` at a fixed price offset.
    Scaling {
        #[command(flatten)]
        market: MarketArg,
        /// `p̃^n - d^n`.
        #[arg(long, allow_hyphen_values = true)]
        p_offset: f64,
        #[arg(long, value_parser = parse_n_list)]
        n_list: NList,
    },
    /// Predicted regime limit beside the empirical price offsets.
    Regime {
        #[command(flatten)]
        market: MarketArg,
        /// Limit of `q_n / r_n`: a number, `inf` or `-inf`. Positions are
        /// `q_n = l r_n`, or `± r_n^{3/2}` for infinite `l`.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_ext, conflicts_with = "q", required_unless_present = "q")]
        l: Option<ExtReal>,
        /// Constant position `q_n = q`.
        #[arg(long, allow_hyphen_values = true)]
        q: Option<f64>,
        #[arg(long, value_parser = parse_n_list)]
        n_list: NList,
    },
    /// Scaled CGF probes, Gärtner–Ellis diagnostics and M-bounds.
    LdpCheck {
        #[command(flatten)]
        market: MarketArg,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-2,-1,-0.5,0.5,1,2")]
        lambdas: Vec<f64>,
        /// Market indices; useful ranges depend on the speed `r_n`.
        #[arg(long, value_parser = parse_n_list)]
        n_list: NList,
    },
    /// Monte Carlo estimates against the analytic values.
    McValidate {
        #[command(flatten)]
        market: MarketArg,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-2,-1,-0.4,0.5,1")]
        lambdas: Vec<f64>,
        /// Exponential tilt of the sampling law.
        #[arg(long, allow_hyphen_values = true)]
        tilt: Option<f64>,
        /// Sampling threads; results do not depend on it.
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(Debug, Clone)]
struct NList(Vec<usize>);

/// `"4"`, `"2,4,8"`, `"10-40"` or mixtures such as `"1-3,10"`.
fn parse_n_list(s: &str) -> Result<NList, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim) {
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}"));
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b) = (parse(a)?, parse(b)?);
                if a > b {
                    return Err(format!("empty range `{part}`"));
                }
                out.extend(a..=b);
            }
            None => out.push(parse(part)?),
        }
    }
    Ok(NList(out))
}

fn parse_ext(s: &str) -> Result<ExtReal, String> {
    match s.trim() {
        "inf" | "+inf" => Ok(ExtReal::PosInf),
        "-inf" => Ok(ExtReal::NegInf),
        t => t
            .parse::<f64>()
            .map_err(|e| e.to_string())
            .and_then(|x| ExtReal::from_f64(x).map_err(|e| e.to_string())),
    }
}

/// Exit code and the text destined for stdout and stderr.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Failure {
    Spec(SpecError),
    Domain(Error),
}

impl From<SpecError> for Failure {
    fn from(e: SpecError) -> Self {
        Failure::Spec(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

struct Report {
    table: Table,
    warnings: Vec<String>,
}

impl From<Table> for Report {
    fn from(table: Table) -> Self {
        Report {
            table,
            warnings: Vec::new(),
        }
    }
}

/// Parses `argv` (program name first), runs the subcommand and renders its table.
pub fn run_command<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let (stdout, stderr) = if code == 0 { (text, String::new()) } else { (String::new(), text) };
            return Outcome { code, stdout, stderr };
        }
    };
    match dispatch(cli.command) {
        Ok(report) => Outcome {
            code: 0,
            stdout: match cli.format {
                Format::Csv => report.table.to_csv(),
                Format::Json => report.table.to_json(),
            },
            stderr: report.warnings.iter().map(|w| format!("warning: {w}\n")).collect(),
        },
        Err(Failure::Spec(e)) => Outcome {
            code: 2,
            stdout: String::new(),
            stderr: format!("error: invalid market file at {}: {}\n", e.path, e.message),
        },
        Err(Failure::Domain(e)) => Outcome {
            code: 3,
            stdout: String::new(),
            stderr: format!("error: {}: {e}\n", e.name()),
        },
    }
}

/// Component family shared by every component, when there is one.
fn family_kind(market: &MarketSpec) -> Result<FamilyKind, Error> {
    let seq = market.components();
    let mut kinds: Vec<FamilyKind> = seq.explicit().iter().map(ComponentFamily::kind).collect();
    if let Some(tail) = seq.geometric_tail() {
        kinds.push(match tail {
            GeometricTail::Gaussian { .. } => FamilyKind::Gaussian,
            GeometricTail::Poisson { .. } => FamilyKind::Poisson,
            GeometricTail::ScaledCustom { .. } => FamilyKind::Custom,
        });
    }
    match kinds.split_first() {
        Some((first, rest)) if rest.iter().all(|k| k == first) => Ok(*first),
        _ => Err(Error::UnsupportedRateFunction(
            "rate functions need a single Gaussian or Poisson component family".into(),
        )),
    }
}

fn prediction_cell(p: Prediction) -> Cell {
    match p {
        Prediction::Finite(v) => Cell::Num(v),
        Prediction::PosInf => Cell::Num(f64::INFINITY),
        Prediction::NegInf => Cell::Num(f64::NEG_INFINITY),
        Prediction::UpperBound(v) => Cell::Text(format!("<= {}", fmt_sig(v))),
        Prediction::LowerBound(v) => Cell::Text(format!(">= {}", fmt_sig(v))),
        Prediction::UncoveredBoundary => Cell::Text("uncovered-boundary".into()),
    }
}

fn verdict(v: indiff::ldp::Verdict) -> Cell {
    Cell::Text(format!("{v:?}").to_lowercase())
}

fn dispatch(command: Command) -> Result<Report, Failure> {
    Ok(match command {
        Command::Price { market, n, q } => {
            let m = parse_market_spec(&market.market)?;
            let mut t = Table::new(&["n", "q", "hedgeable", "offset", "total"]);
            for q in q {
                let p = indifference_price(&m, n, q)?;
                t.push(vec![n.into(), q.into(), p.hedgeable.into(), p.offset.into(), p.total.into()]);
            }
            t.into()
        }
        Command::Bounds { market, n } => {
            let m = parse_market_spec(&market.market)?;
            let mut t = Table::new(&["n", "lower", "upper"]);
            for n in n.0 {
                let (lo, hi) = arbitrage_bounds(&m, n)?;
                t.push(vec![n.into(), lo.into(), hi.into()]);
            }
            t.into()
        }
        Command::OptimalQty { market, n, price } => {
            let m = parse_market_spec(&market.market)?;
            let mut t = Table::new(&["n", "price", "q_hat", "residual", "iterations"]);
            for p in price {
                let s = optimal_quantity(&m, n, p)?;
                t.push(vec![n.into(), p.into(), s.q_hat.into(), s.residual.into(), s.iterations.into()]);
            }
            t.into()
        }
        Command::Scaling { market, p_offset, n_list } => {
            let m = parse_market_spec(&market.market)?;
            let s = quantity_scaling(&m, p_offset, &n_list.0)?;
            let mut t = Table::new(&["n", "q_hat", "r_n", "ratio"]);
            for r in &s.rows {
                t.push(vec![r.n.into(), r.q_hat.into(), r.r_n.into(), r.ratio.into()]);
            }
            Report {
                table: t,
                warnings: s.warnings,
            }
        }
        Command::Regime { market, l, q, n_list } => {
            let m = parse_market_spec(&market.market)?;
            let rate = rate_function(family_kind(&m)?)?;
            let bounds = m_bounds(&m, &rate)?;
            let rule = match (l, q) {
                (_, Some(q)) => QuantityRule::Constant(q),
                (Some(ExtReal::Finite(l)), None) => QuantityRule::Linear(l),
                (Some(l), None) => {
                    let sign = if l == ExtReal::PosInf { 1.0 } else { -1.0 };
                    QuantityRule::Custom {
                        rule: std::sync::Arc::new(move |_, r: f64| sign * r.powf(1.5)),
                        limit: l,
                    }
                }
                (None, None) => unreachable!("clap requires --l or --q"),
            };
            let table = empirical_regime_table(&m, &rate, &bounds, &rule, &n_list.0)?;
            let report = table.report;
            let mut t = Table::new(&["n", "r_n", "q_n", "offset", "regime", "l", "prediction"]);
            for r in &table.rows {
                t.push(vec![
                    r.n.into(),
                    r.r_n.into(),
                    r.q_n.into(),
                    r.offset.into(),
                    format!("{:?}", report.regime).to_lowercase().into(),
                    report.l.into(),
                    prediction_cell(report.prediction),
                ]);
            }
            t.into()
        }
        Command::LdpCheck { market, lambdas, n_list } => {
            let m = parse_market_spec(&market.market)?;
            let probes = probe_grid(&m, &lambdas, &n_list.0)?;
            let ge = gartner_ellis_check(&probes);
            let mut t = Table::new(&["item", "lambda", "value"]);
            for (l, g) in ge.lambdas.iter().zip(&ge.gamma) {
                t.push(vec!["gamma".into(), (*l).into(), (*g).into()]);
            }
            for (name, v) in [
                ("convergence", ge.convergence),
                ("interior_zero", ge.interior_zero),
                ("differentiable", ge.differentiable),
                ("steep", ge.steep),
            ] {
                t.push(vec![name.into(), Cell::Empty, verdict(v)]);
            }
            t.push(vec!["domain_lower".into(), Cell::Empty, ge.domain_boundary.0.into()]);
            t.push(vec!["domain_upper".into(), Cell::Empty, ge.domain_boundary.1.into()]);
            let b = m_bounds(&m, &rate_function(family_kind(&m)?)?)?;
            for (name, v) in [
                ("m_lower_star", b.lower_star),
                ("m_lower", b.lower),
                ("m_upper", b.upper),
                ("m_upper_star", b.upper_star),
            ] {
                t.push(vec![name.into(), Cell::Empty, v.into()]);
            }
            t.into()
        }
        Command::McValidate {
            market,
            n,
            samples,
            seed,
            lambdas,
            tilt,
            workers,
        } => {
            let m = parse_market_spec(&market.market)?;
            let mut cfg = McConfig::new(samples, seed);
            if let Some(t) = tilt {
                cfg = cfg.with_tilt(t);
            }
            let run = || mc_validate(&m, n, &cfg, &lambdas);
            match workers {
                Some(w) => with_workers(w, || mc_validate(&m, n, &cfg.with_workers(w), &lambdas))??,
                None => run()?,
            }
        }
    })
}

fn mc_validate(m: &MarketSpec, n: usize, cfg: &McConfig, lambdas: &[f64]) -> Result<Report, Error> {
    let s = sample_tail(m, n, cfg)?;
    let tail = TailClaim::new(m, n);
    let a = m.risk_aversion();
    let mut t = Table::new(&["quantity", "lambda", "analytic", "estimate", "std_error", "z_score"]);
    let mut warnings = Vec::new();
    let mut add = |name: &str, l: f64, est: McEstimate, analytic: f64, t: &mut Table| {
        let e = est.compare(analytic);
        warnings.extend(e.warnings.iter().map(|w| format!("{name} at lambda {}: {w}", fmt_sig(l))));
        t.push(vec![
            name.into(),
            l.into(),
            analytic.into(),
            e.estimate.into(),
            e.std_error.into(),
            e.z_score.into(),
        ]);
    };
    for &l in lambdas {
        add("cgf", l, mc_cgf(&s, l)?, tail_cgf(&tail, l)?, &mut t);
        add("tilted_mean", l, mc_tilted_mean(&s, l)?, tail_cgf_derivative(&tail, l)?, &mut t);
        let q = -l / a;
        let analytic = indifference_price(m, n, q)?.offset;
        add("price_offset", l, mc_price_offset(&s, q, a)?, analytic, &mut t);
    }
    Ok(Report { table: t, warnings })
}
