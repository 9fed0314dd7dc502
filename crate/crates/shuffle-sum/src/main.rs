//! Thin command-line front end over the library: plan parameters, emit the
//! bounds table, run experiments, and run the security validation suite.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use shuffle_sum::harness::config::{
    parse_config_file, DatasetSpec, ExperimentConfig, ProtocolSelector,
};
use shuffle_sum::harness::dataset::Normalizer;
use shuffle_sum::harness::table::{
    emit_bounds_table, rows_to_csv, rows_to_json, rows_to_markdown, Scenario,
};
use shuffle_sum::harness::{plan_mechanism, run_experiment};
use shuffle_sum::security::{
    component_bound, estimate_q_power_components, exact_tv_oracle, max_admissible_q, TinyInstance,
};
use shuffle_sum::{Error, Result, RngStream};

#[derive(Parser)]
#[command(name = "shuffle-sum", version, about = "Private summation in the shuffle model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print planned protocol parameters for a scenario.
    Plan {
        #[arg(long)]
        protocol: ProtocolArg,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        epsilon: f64,
        /// Defaults to 1/n^2.
        #[arg(long)]
        delta: Option<f64>,
        /// Message count for the recursive planners (default 2).
        #[arg(long)]
        messages: Option<usize>,
        #[arg(long, default_value = "md")]
        format: Format,
    },
    /// Emit the analytic comparison table over a scenario grid.
    Bounds {
        /// Population sizes (repeatable).
        #[arg(long = "n", num_args = 1.., default_values_t = [10_000u64, 100_000])]
        n: Vec<u64>,
        /// Privacy budgets (repeatable).
        #[arg(long = "epsilon", num_args = 1.., default_values_t = [0.5, 1.0])]
        epsilon: Vec<f64>,
        /// Shared delta; defaults to 1/n^2 per scenario.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value = "md")]
        format: Format,
        /// Write to this path instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment and emit its JSON report.
    Run(RunArgs),
    /// Monte Carlo component-bound checks and the exact TV oracle.
    Security {
        /// Trials per Monte Carlo grid point.
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "md")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Flat key=value config file; explicit flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    protocol: Option<ProtocolArg>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    messages: Option<usize>,
    #[arg(long)]
    runs: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// ur | normal | csv
    #[arg(long)]
    dataset: Option<String>,
    #[arg(long)]
    csv_path: Option<PathBuf>,
    #[arg(long)]
    csv_column: Option<String>,
    /// max | minmax | fixed(<denominator>)
    #[arg(long)]
    normalizer: Option<String>,
    /// Mean of the normal dataset.
    #[arg(long)]
    mean: Option<f64>,
    /// Standard deviation of the normal dataset.
    #[arg(long)]
    std: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy)]
struct ProtocolArg(ProtocolSelector);

impl std::str::FromStr for ProtocolArg {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(ProtocolArg(s.parse()?))
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
    Md,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "md" => Ok(Format::Md),
            other => Err(Error::Config(format!("unknown format {other:?}"))),
        }
    }
}

fn main() {
    if let Err(err) = dispatch(Cli::parse()) {
        eprintln!("error: {err}");
        std::process::exit(1);
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Plan {
            protocol,
            n,
            epsilon,
            delta,
            messages,
            format,
        } => plan_command(protocol.0, n, epsilon, delta, messages, format),
        Command::Bounds {
            n,
            epsilon,
            delta,
            format,
            out,
        } => bounds_command(&n, &epsilon, delta, format, out),
        Command::Run(args) => run_command(args),
        Command::Security {
            trials,
            seed,
            format,
            out,
        } => security_command(trials, seed, format, out),
    }
}

fn plan_command(
    protocol: ProtocolSelector,
    n: u64,
    epsilon: f64,
    delta: Option<f64>,
    messages: Option<usize>,
    format: Format,
) -> Result<()> {
    let delta = delta.unwrap_or_else(|| 1.0 / (n as f64 * n as f64));
    let planned = plan_mechanism(protocol, n, epsilon, delta, messages)?;
    match format {
        Format::Json => {
            let value = serde_json::json!({
                "protocol": planned.name,
                "n": n,
                "epsilon": epsilon,
                "delta": delta,
                "messages": planned.messages,
                "feasible": planned.runner.is_some(),
                "analytic_mse_bound": planned.bound,
                "formula": planned.formula,
            });
            println!("{}", serde_json::to_string_pretty(&value)?);
        }
        _ => {
            println!("protocol: {}", planned.name);
            println!("n: {n}");
            println!("epsilon: {epsilon}");
            println!("delta: {delta:e}");
            match planned.messages {
                Some(m) => println!("messages per user: {m}"),
                None => println!("messages per user: - (central model)"),
            }
            println!("feasible: {}", planned.runner.is_some());
            println!("analytic mse bound: {}", planned.bound);
            print_plan_details(protocol, n, epsilon, delta, messages)?;
        }
    }
    Ok(())
}

fn print_plan_details(
    protocol: ProtocolSelector,
    n: u64,
    epsilon: f64,
    delta: f64,
    messages: Option<usize>,
) -> Result<()> {
    match protocol {
        ProtocolSelector::Single | ProtocolSelector::Recursive | ProtocolSelector::RecursiveOpt => {
            let m = if protocol == ProtocolSelector::Single {
                1
            } else {
                messages.unwrap_or(2)
            };
            let planned = if protocol == ProtocolSelector::RecursiveOpt {
                shuffle_sum::recursive::optimize_recursive_params(epsilon, delta, n, m)
            } else {
                shuffle_sum::recursive::plan_recursive_basic(epsilon, delta, n, m)
            };
            if let Ok(params) = planned {
                println!("precisions: {:?}", params.precisions);
                println!("decoy rates: {:?}", params.gammas);
                println!("per-level epsilons: {:?}", params.epsilons);
            }
        }
        ProtocolSelector::Ikos => {
            let params = shuffle_sum::ikos::plan_ikos(epsilon, delta, n)?;
            println!("precision p: {}", params.p);
            println!("group order q: {}", params.q);
            println!("noise alpha: {}", params.alpha);
            println!("security sigma: {}", params.sigma);
            println!(
                "shares: {} shuffled + 1 unshuffled",
                params.m_total - 1
            );
        }
        _ => {}
    }
    Ok(())
}

fn bounds_command(
    ns: &[u64],
    epsilons: &[f64],
    delta: Option<f64>,
    format: Format,
    out: Option<PathBuf>,
) -> Result<()> {
    let scenarios: Vec<Scenario> = ns
        .iter()
        .flat_map(|&n| {
            epsilons.iter().map(move |&epsilon| Scenario {
                n,
                epsilon,
                delta,
            })
        })
        .collect();
    let rows = emit_bounds_table(&scenarios)?;
    let rendered = match format {
        Format::Csv => rows_to_csv(&rows),
        Format::Json => rows_to_json(&rows)?,
        Format::Md => rows_to_markdown(&rows),
    };
    write_out(out, &rendered)
}

fn run_command(args: RunArgs) -> Result<()> {
    let file: BTreeMap<String, String> = match &args.config {
        Some(path) => parse_config_file(path)?,
        None => BTreeMap::new(),
    };
    let from_file = |key: &str| file.get(key).cloned();
    let parse_key = |key: &str| -> Result<Option<f64>> {
        from_file(key)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad numeric value for {key}: {v:?}")))
            })
            .transpose()
    };

    let protocol = match args.protocol {
        Some(p) => p.0,
        None => from_file("protocol")
            .ok_or_else(|| Error::Config("missing protocol".into()))?
            .parse()?,
    };
    let n = match args.n {
        Some(n) => n,
        None => from_file("n")
            .ok_or_else(|| Error::Config("missing n".into()))?
            .parse()
            .map_err(|_| Error::Config("bad n".into()))?,
    };
    let epsilon = match args.epsilon {
        Some(e) => e,
        None => parse_key("epsilon")?.ok_or_else(|| Error::Config("missing epsilon".into()))?,
    };
    let delta = args.delta.or(parse_key("delta")?);
    let messages = match args.messages {
        Some(m) => Some(m),
        None => from_file("messages")
            .map(|v| v.parse().map_err(|_| Error::Config("bad messages".into())))
            .transpose()?,
    };
    let runs = match args.runs {
        Some(r) => r,
        None => from_file("runs")
            .map(|v| v.parse().map_err(|_| Error::Config("bad runs".into())))
            .transpose()?
            .unwrap_or(20),
    };
    let seed = match args.seed {
        Some(s) => s,
        None => from_file("seed")
            .map(|v| v.parse().map_err(|_| Error::Config("bad seed".into())))
            .transpose()?
            .unwrap_or(0),
    };

    let dataset_kind = args
        .dataset
        .or_else(|| from_file("dataset"))
        .unwrap_or_else(|| "ur".into());
    let dataset = match dataset_kind.as_str() {
        "ur" => DatasetSpec::Uniform,
        "normal" => DatasetSpec::Normal {
            mean: args.mean.or(parse_key("mean")?).unwrap_or(0.573),
            std: args.std.or(parse_key("std")?).unwrap_or(0.1),
        },
        "csv" => {
            let path = args
                .csv_path
                .or_else(|| from_file("csv-path").map(PathBuf::from))
                .ok_or_else(|| Error::Config("csv dataset needs --csv-path".into()))?;
            let column = args
                .csv_column
                .or_else(|| from_file("csv-column"))
                .ok_or_else(|| Error::Config("csv dataset needs --csv-column".into()))?;
            let normalizer: Normalizer = args
                .normalizer
                .or_else(|| from_file("normalizer"))
                .unwrap_or_else(|| "max".into())
                .parse()?;
            DatasetSpec::Csv {
                path,
                column,
                normalizer,
            }
        }
        other => return Err(Error::Config(format!("unknown dataset {other:?}"))),
    };

    let config = ExperimentConfig {
        protocol,
        n,
        epsilon,
        delta,
        messages,
        runs,
        seed,
        dataset,
    };
    let report = run_experiment(&config)?;
    write_out(args.out, &report.to_json()?)
}

fn security_command(trials: u64, seed: u64, format: Format, out: Option<PathBuf>) -> Result<()> {
    #[derive(serde::Serialize)]
    struct GraphRow {
        n: usize,
        m: usize,
        q: f64,
        estimate: f64,
        ci_halfwidth: f64,
        bound: f64,
        within_bound: bool,
    }
    let mut graph_rows = Vec::new();
    let mut stream = 0u64;
    for &n in &[19usize, 50, 100, 1000] {
        for &m in &[3usize, 4, 5] {
            for &q in &[2.0, max_admissible_q(n as u64, m as u32)] {
                stream += 1;
                let mut rng = RngStream::new(seed, stream);
                let est = estimate_q_power_components(n, m, q, trials, &mut rng)?;
                let bound = component_bound(n as u64, m as u32, q)?;
                graph_rows.push(GraphRow {
                    n,
                    m,
                    q,
                    estimate: est.estimate,
                    ci_halfwidth: est.ci_halfwidth,
                    bound,
                    within_bound: est.estimate <= bound + 3.0 * est.ci_halfwidth,
                });
            }
        }
    }

    #[derive(serde::Serialize)]
    struct TinyRow {
        n: usize,
        m: usize,
        q: u64,
        avg_tv: f64,
        worst_tv: f64,
        variant_worst_tv: f64,
        collision_probability: f64,
        tv_bound: f64,
        avg_within_bound: bool,
        variant_within_avg: bool,
        variant_within_bound: bool,
    }
    let mut tiny_rows = Vec::new();
    for &n in &[2usize, 3] {
        for &m in &[2usize, 3] {
            for &q in &[2u64, 3] {
                let r = exact_tv_oracle(TinyInstance::new(n, m, q)?)?;
                tiny_rows.push(TinyRow {
                    n,
                    m,
                    q,
                    avg_tv: r.avg_tv,
                    worst_tv: r.worst_tv,
                    variant_worst_tv: r.variant_worst_tv,
                    collision_probability: r.collision_probability,
                    tv_bound: r.tv_bound,
                    avg_within_bound: r.avg_within_bound,
                    variant_within_avg: r.variant_within_avg,
                    variant_within_bound: r.variant_within_bound,
                });
            }
        }
    }

    let rendered = match format {
        Format::Json => serde_json::to_string_pretty(&serde_json::json!({
            "graph_monte_carlo": graph_rows,
            "tiny_instance_tv": tiny_rows,
        }))?,
        _ => {
            let mut s = String::new();
            s.push_str("component-bound Monte Carlo (estimate of E[q^C(G)])\n");
            s.push_str("| n    | m | q            | estimate     | 3*ci        | bound        | within |\n");
            for r in &graph_rows {
                s.push_str(&format!(
                    "| {:<4} | {} | {:<12.5e} | {:<12.6e} | {:<11.4e} | {:<12.6e} | {} |\n",
                    r.n, r.m, r.q, r.estimate, 3.0 * r.ci_halfwidth, r.bound, r.within_bound
                ));
            }
            s.push_str("\nexact tiny-instance total-variation oracle\n");
            s.push_str("| n | m | q | avg TV     | worst TV   | variant worst | sqrt bound | avg<=bound | variant<=avg |\n");
            for r in &tiny_rows {
                s.push_str(&format!(
                    "| {} | {} | {} | {:<10.6} | {:<10.6} | {:<13.6} | {:<10.6} | {:<10} | {} |\n",
                    r.n,
                    r.m,
                    r.q,
                    r.avg_tv,
                    r.worst_tv,
                    r.variant_worst_tv,
                    r.tv_bound,
                    r.avg_within_bound,
                    r.variant_within_avg
                ));
            }
            s
        }
    };
    write_out(out, &rendered)
}

fn write_out(path: Option<PathBuf>, content: &str) -> Result<()> {
    match path {
        Some(p) => {
            std::fs::write(&p, content)?;
            eprintln!("wrote {}", p.display());
        }
        None => println!("{content}"),
    }
    Ok(())
}
