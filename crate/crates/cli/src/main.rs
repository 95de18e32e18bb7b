mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use jackratio::dist::{DistParams, SeriesLedger};
use jackratio::esym::lb_apply;
use jackratio::jack::{jack_in_e, jack_product};
use jackratio::mc::{empirical_moments, sample_extreme_ratio, sorted_quantile, McConfig, Statistic};
use jackratio::rational::parse_rational;
use jackratio::{snapshot, Partition, Rational};
use serde_json::{json, Value};

use output::{Envelope, Format, Table};

#[derive(Parser, Debug)]
#[command(name = "jackratio", version, about = "Jack polynomial algebra and the extreme eigenvalue ratio of singular beta-Wishart matrices")]
struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Significant digits of decimal outputs.
    #[arg(long, global = true, default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..=17))]
    digits: u32,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Jack polynomials in the elementary-symmetric basis.
    #[command(subcommand)]
    Jack(JackCommand),
    /// One row of the Laplace-Beltrami operator in the elementary basis.
    LbRow(LbRowArgs),
    /// Distribution of 1 - l_n/l_1 from the truncated series.
    #[command(subcommand)]
    Dist(DistCommand),
    /// Monte Carlo sampling of the extreme eigenvalue ratio.
    Sim(SimArgs),
}

#[derive(Subcommand, Debug)]
enum JackCommand {
    /// Coefficients of C_kappa in the E-basis.
    Expand(ExpandArgs),
    /// Coefficients g of C_left C_right in the Jack basis.
    Product(ProductArgs),
}

#[derive(Args, Debug)]
struct ExpandArgs {
    #[arg(long, value_parser = parse_partition)]
    partition: Partition,
    #[arg(long, value_parser = parse_beta)]
    beta: Rational,
    #[arg(long)]
    m: usize,
}

#[derive(Args, Debug)]
struct ProductArgs {
    #[arg(long, value_parser = parse_partition)]
    left: Partition,
    #[arg(long, value_parser = parse_partition)]
    right: Partition,
    #[arg(long, value_parser = parse_beta)]
    beta: Rational,
    #[arg(long)]
    m: usize,
}

#[derive(Args, Debug)]
struct LbRowArgs {
    #[arg(long, value_parser = parse_partition)]
    partition: Partition,
    #[arg(long, value_parser = parse_beta)]
    beta: Rational,
    #[arg(long)]
    m: usize,
}

#[derive(Args, Debug, Clone)]
struct SeriesArgs {
    #[arg(long)]
    m: u32,
    #[arg(long)]
    n: u32,
    #[arg(long, value_parser = parse_dist_beta)]
    beta: u32,
    /// Truncation order of the k-sum (default 25 for beta = 1, 40 otherwise).
    #[arg(long = "K", visible_alias = "k")]
    k_max: Option<u32>,
    /// Upper limit of the t-sum (default p (n - 1)).
    #[arg(long)]
    t_max: Option<u32>,
    /// Use the real-case series in min(m, n), max(m, n); allows m <= n.
    #[arg(long)]
    general: bool,
}

#[derive(Subcommand, Debug)]
enum DistCommand {
    Pdf {
        #[command(flatten)]
        series: SeriesArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<f64>,
    },
    Cdf {
        #[command(flatten)]
        series: SeriesArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<f64>,
    },
    Quantile {
        #[command(flatten)]
        series: SeriesArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        alpha: Vec<f64>,
    },
    Moment {
        #[command(flatten)]
        series: SeriesArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        h: Vec<u32>,
    },
    /// Percentile points for m = 10, n = 3 next to Monte Carlo quantiles.
    Table1 {
        #[arg(long, value_enum, default_value_t = Variant::A)]
        variant: Variant,
        #[arg(long = "K", visible_alias = "k")]
        k_max: Option<u32>,
        /// Monte Carlo replications for the simulated column (0 skips it).
        #[arg(long, default_value_t = 1_000_000)]
        reps: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Mean, variance, skewness and kurtosis of 1 - l_2/l_1 for real matrices.
    Table2 {
        #[arg(long, default_value = "5:145:20", value_parser = parse_grid)]
        m_grid: Grid,
    },
    /// Pr(0.7 < l_2/l_1 < 1) for real matrices over a grid of m.
    Fig1 {
        #[arg(long, default_value = "5:145:20", value_parser = parse_grid)]
        m_grid: Grid,
    },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Variant {
    A,
    B,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum StatisticArg {
    Ratio,
    OneMinusRatio,
}

#[derive(Args, Debug)]
struct SimArgs {
    #[arg(long)]
    m: u32,
    #[arg(long)]
    n: u32,
    #[arg(long, value_parser = parse_sim_beta)]
    beta: u32,
    #[arg(long, default_value_t = 100_000)]
    reps: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = StatisticArg::OneMinusRatio)]
    statistic: StatisticArg,
    #[arg(long, value_delimiter = ',', conflicts_with = "moments")]
    alpha: Vec<f64>,
    #[arg(long)]
    moments: bool,
    /// Also write the raw samples, one per line.
    #[arg(long)]
    dump: Option<PathBuf>,
}

const DEFAULT_SEED: u64 = 20240501;
const TABLE1_ALPHAS: [f64; 5] = [0.01, 0.05, 0.50, 0.90, 0.95];
/// Tolerance for the converged series behind `table2` and `fig1`.
const TABLE_TOLERANCE: f64 = 1e-12;
const MAX_K: u32 = 5000;

fn parse_partition(s: &str) -> Result<Partition, String> {
    s.parse().map_err(|e: jackratio::Error| e.to_string())
}

fn parse_beta(s: &str) -> Result<Rational, String> {
    let beta = parse_rational(s).map_err(|e| e.to_string())?;
    if beta <= Rational::from_integer(0.into()) {
        return Err(format!("beta must be positive, got {s}"));
    }
    Ok(beta)
}

fn parse_dist_beta(s: &str) -> Result<u32, String> {
    match s {
        "1" | "2" | "4" => Ok(s.parse().unwrap()),
        _ => Err(format!("beta must be 1, 2 or 4, got {s}")),
    }
}

fn parse_sim_beta(s: &str) -> Result<u32, String> {
    match s {
        "1" | "2" => Ok(s.parse().unwrap()),
        _ => Err(format!("sampling supports beta 1 or 2, got {s}")),
    }
}

#[derive(Clone, Debug)]
struct Grid(Vec<u32>);

/// `start:stop:step`, inclusive of `stop` when it lies on the grid.
fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let nums: Vec<u32> = parts
        .iter()
        .map(|p| p.trim().parse::<u32>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match nums[..] {
        [single] => Ok(Grid(vec![single])),
        [start, stop, step] if step > 0 && start <= stop => Ok(Grid((start..=stop).step_by(step as usize).collect())),
        _ => Err(format!("expected start:stop:step, got {s:?}")),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let cache = snapshot::cache_dir_from_env();
    if let Some(dir) = &cache {
        if let Err(e) = snapshot::load(dir) {
            eprintln!("warning: ignoring Jack table cache: {e}");
        }
    }
    let result = run(&cli);
    if let Some(dir) = &cache {
        if let Err(e) = snapshot::save(dir) {
            eprintln!("warning: could not write Jack table cache: {e}");
        }
    }
    match result.and_then(|rendered| output::write(cli.output.as_deref(), &rendered)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn command_echo() -> String {
    let args: Vec<String> = std::env::args().skip(1).collect();
    args.join(" ")
}

fn run(cli: &Cli) -> Result<String, jackratio::Error> {
    match &cli.command {
        Command::Jack(JackCommand::Expand(a)) => {
            let table = jack_in_e(&a.partition, &a.beta, a.m)?;
            Ok(output::symbolic(cli.format, "mu", table.terms()))
        }
        Command::Jack(JackCommand::Product(a)) => {
            let g = jack_product(&a.left, &a.right, &a.beta, a.m)?;
            Ok(output::symbolic(cli.format, "delta", g.terms()))
        }
        Command::LbRow(a) => {
            let row = lb_apply(&a.partition, &a.beta, a.m)?;
            Ok(output::symbolic(cli.format, "mu", &row.entries))
        }
        Command::Dist(d) => dist(cli, d),
        Command::Sim(s) => sim(cli, s),
    }
}

fn build_series(s: &SeriesArgs) -> Result<(SeriesLedger, Value), jackratio::Error> {
    let k_max = s.k_max.unwrap_or_else(|| DistParams::default_truncation(s.beta));
    if s.general {
        if s.beta != 1 {
            return Err(jackratio::Error::InvalidParams("--general requires beta = 1".into()));
        }
        let (n1, n2) = (s.m.min(s.n), s.m.max(s.n));
        let ledger = SeriesLedger::build_general_beta1(n1, n2, k_max, s.t_max)?;
        let params = json!({"m": s.m, "n": s.n, "beta": 1, "K": k_max, "t_max": ledger.t_max(), "n1": n1, "n2": n2});
        return Ok((ledger, params));
    }
    let mut p = DistParams::new(s.m, s.n, s.beta, k_max)?;
    if let Some(t) = s.t_max {
        p = p.with_t_max(t);
    }
    let ledger = SeriesLedger::build(&p)?;
    let params = json!({"m": s.m, "n": s.n, "beta": s.beta, "K": k_max, "t_max": ledger.t_max()});
    Ok((ledger, params))
}

fn diagnostics(ledger: &SeriesLedger, envelope: &mut Envelope) {
    let d = ledger.diagnostics();
    envelope.metadata.insert("diagnostics".into(), serde_json::to_value(&d).unwrap());
    if let Some(w) = ledger.truncation_warning() {
        eprintln!("warning: {w}");
        envelope.warnings.push(w);
    }
}

fn dist(cli: &Cli, d: &DistCommand) -> Result<String, jackratio::Error> {
    let digits = cli.digits;
    match d {
        DistCommand::Pdf { series, x } | DistCommand::Cdf { series, x } => {
            let is_pdf = matches!(d, DistCommand::Pdf { .. });
            let (ledger, params) = build_series(series)?;
            let mut table = Table::new(&["x", if is_pdf { "pdf" } else { "cdf" }]);
            for &xi in x {
                let v = if is_pdf { ledger.pdf(xi)? } else { ledger.cdf(xi)? };
                table.push(vec![Value::from(xi), output::number(v, digits)]);
            }
            let mut env = Envelope::new(command_echo(), params, table);
            diagnostics(&ledger, &mut env);
            Ok(env.render(cli.format))
        }
        DistCommand::Quantile { series, alpha } => {
            let (ledger, params) = build_series(series)?;
            let mut table = Table::new(&["alpha", "quantile"]);
            for &a in alpha {
                table.push(vec![Value::from(a), output::number(ledger.quantile(a)?, digits)]);
            }
            let mut env = Envelope::new(command_echo(), params, table);
            diagnostics(&ledger, &mut env);
            Ok(env.render(cli.format))
        }
        DistCommand::Moment { series, h } => {
            let (ledger, params) = build_series(series)?;
            let mut table = Table::new(&["h", "moment"]);
            for &hi in h {
                table.push(vec![Value::from(hi), output::number(ledger.moment(hi), digits)]);
            }
            let mut env = Envelope::new(command_echo(), params, table);
            diagnostics(&ledger, &mut env);
            Ok(env.render(cli.format))
        }
        DistCommand::Table1 {
            variant,
            k_max,
            reps,
            seed,
        } => {
            let beta = match variant {
                Variant::A => 1,
                Variant::B => 2,
            };
            let k = k_max.unwrap_or_else(|| DistParams::default_truncation(beta));
            let ledger = SeriesLedger::build(&DistParams::new(10, 3, beta, k)?)?;
            let sorted = if *reps > 0 {
                let cfg = McConfig::new(10, 3, beta, *reps, *seed, Statistic::OneMinusRatio)?;
                let mut values = sample_extreme_ratio(&cfg)?.values;
                values.sort_by(f64::total_cmp);
                Some(values)
            } else {
                None
            };
            let sim_header = "F_sim^-1(alpha)".to_string();
            let series_header = format!("F_{k}^-1(alpha)");
            let mut headers = vec!["alpha"];
            if sorted.is_some() {
                headers.push(&sim_header);
            }
            headers.push(&series_header);
            let mut table = Table::new(&headers);
            for a in TABLE1_ALPHAS {
                let mut row = vec![Value::from(a)];
                if let Some(s) = &sorted {
                    row.push(output::number(sorted_quantile(s, a)?, digits));
                }
                row.push(output::number(ledger.quantile(a)?, digits));
                table.push(row);
            }
            let params = json!({"m": 10, "n": 3, "beta": beta, "K": k, "t_max": ledger.t_max(), "reps": reps, "seed": seed});
            let mut env = Envelope::new(command_echo(), params, table);
            diagnostics(&ledger, &mut env);
            Ok(env.render(cli.format))
        }
        DistCommand::Table2 { m_grid } => {
            let mut table = Table::new(&["m", "Mean", "Variance", "Skewness", "Kurtosis"]);
            let mut used = Vec::new();
            for &m in &m_grid.0 {
                let ledger = SeriesLedger::build_converged(m, 2, 1, 25, TABLE_TOLERANCE, MAX_K)?;
                let s = ledger.summary_stats()?;
                used.push(json!({"m": m, "K": ledger.k_max(), "last_term": ledger.diagnostics().last_term}));
                table.push(vec![
                    Value::from(m),
                    output::number(s.mean, digits),
                    output::number(s.variance, digits),
                    output::number(s.skewness, digits),
                    output::number(s.kurtosis, digits),
                ]);
            }
            let params = json!({"n": 2, "beta": 1, "statistic": "one_minus_ratio", "tolerance": TABLE_TOLERANCE});
            let mut env = Envelope::new(command_echo(), params, table);
            env.metadata.insert("truncation".into(), Value::Array(used));
            Ok(env.render(cli.format))
        }
        DistCommand::Fig1 { m_grid } => {
            let mut table = Table::new(&["m", "Pr(0.7<l_n/l_1<1)"]);
            let mut used = Vec::new();
            for &m in &m_grid.0 {
                let ledger = SeriesLedger::build_converged(m, 2, 1, 25, TABLE_TOLERANCE, MAX_K)?;
                used.push(json!({"m": m, "K": ledger.k_max()}));
                table.push(vec![Value::from(m), output::number(ledger.cdf(0.3)?, digits)]);
            }
            let params = json!({"n": 2, "beta": 1, "x": 0.3, "tolerance": TABLE_TOLERANCE});
            let mut env = Envelope::new(command_echo(), params, table);
            env.metadata.insert("truncation".into(), Value::Array(used));
            Ok(env.render(cli.format))
        }
    }
}

fn sim(cli: &Cli, s: &SimArgs) -> Result<String, jackratio::Error> {
    let statistic = match s.statistic {
        StatisticArg::Ratio => Statistic::Ratio,
        StatisticArg::OneMinusRatio => Statistic::OneMinusRatio,
    };
    let cfg = McConfig::new(s.m, s.n, s.beta, s.reps, s.seed, statistic)?;
    let sample = sample_extreme_ratio(&cfg)?;
    if let Some(path) = &s.dump {
        let text: String = sample.values.iter().map(|v| format!("{v}\n")).collect();
        std::fs::write(path, text).map_err(|e| jackratio::Error::Io(format!("{}: {e}", path.display())))?;
    }
    let table = if s.moments {
        let m = empirical_moments(&sample.values)?;
        let mut t = Table::new(&["Mean", "Variance", "Skewness", "Kurtosis"]);
        t.push(
            [m.mean, m.variance, m.skewness, m.kurtosis]
                .iter()
                .map(|&v| output::number(v, cli.digits))
                .collect(),
        );
        t
    } else {
        let alphas = if s.alpha.is_empty() { TABLE1_ALPHAS.to_vec() } else { s.alpha.clone() };
        let mut sorted = sample.values.clone();
        sorted.sort_by(f64::total_cmp);
        let mut t = Table::new(&["alpha", "quantile"]);
        for a in alphas {
            t.push(vec![Value::from(a), output::number(sorted_quantile(&sorted, a)?, cli.digits)]);
        }
        t
    };
    let params = serde_json::to_value(&cfg).unwrap();
    let mut env = Envelope::new(command_echo(), params, table);
    env.metadata.insert("resampled".into(), Value::from(sample.resampled));
    Ok(env.render(cli.format))
}
