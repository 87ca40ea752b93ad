//! `gsp`: sampling experiments for bandlimited graph signals.


use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use gsp_cli::experiments::{
    self, RecoverParams, StrategyParams, SupportIdParams, SupportMethod,
};
use gsp_cli::specparse;
use gsp_core::error::{Error, Result};
use gsp_core::graphs_io::{
    save_results, ExperimentConfig, GraphSpec, NoiseSpec, PlanSpec, ResultRecord,
    ResultValue, ResultsFile, ShiftKind, SupportSpec,
};
use gsp_core::noisy::Metric;

#[derive(Parser)]
#[command(
    name = "gsp",
    version,
    about = "Aggregation sampling of bandlimited graph signals",
    long_about = "Sample bandlimited graph signals by successive local aggregation, \
                  interpolate them back (with or without noise), identify unknown \
                  frequency supports, and design sampling sets. Every subcommand is \
                  deterministic given --seed."
)]
struct Cli {
    /// Master seed (falls back to GSP_SEED, then 0).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON experiment config supplying defaults for graph/shift/support/
    /// noise/plan/trials; explicit flags override.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigendecompose a graph shift and report the ordered spectrum.
    Decompose {
        /// Graph spec: er:N,P | cycle:N | edges:PATH | table:PATH
        #[arg(long)]
        graph: Option<String>,
        /// Shift kind: adjacency | i-minus-a | half-a-squared | laplacian
        #[arg(long)]
        shift: Option<String>,
        /// Output JSON path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Recover planted bandlimited signals from (noisy) aggregation samples.
    Recover {
        #[arg(long)]
        graph: Option<String>,
        #[arg(long)]
        shift: Option<String>,
        /// Sampling node (1-based); omit to sample at every node.
        #[arg(long)]
        node: Option<usize>,
        /// Bandwidth K (support = first K frequencies).
        #[arg(long)]
        bandwidth: Option<usize>,
        /// Explicit support: first:K or comma-separated indices.
        #[arg(long)]
        support: Option<String>,
        /// Sample-selection plan: first-k | n0,N0 | picks:i,j,k
        #[arg(long)]
        plan: Option<String>,
        /// Noise kind: none | observation | signal | frequency
        #[arg(long)]
        noise: Option<String>,
        /// Noise power sigma^2.
        #[arg(long)]
        sigma2: Option<f64>,
        #[arg(long)]
        trials: Option<usize>,
        /// Run the noiseless recovery ensemble instead of a single graph.
        #[arg(long)]
        sweep: bool,
        /// Number of random graphs in the sweep (default 1000).
        #[arg(long)]
        graphs: Option<usize>,
        /// Full-scale sweep (10000 graphs).
        #[arg(long)]
        full: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Unknown-support recovery-rate sweep (rate vs observation count).
    SupportId {
        /// Nodes in each random graph.
        #[arg(long, default_value_t = 20)]
        n: usize,
        /// Planted sparsity K.
        #[arg(long, default_value_t = 3)]
        bandwidth: usize,
        /// Shift kinds to compare, comma separated.
        #[arg(long, default_value = "adjacency,i-minus-a,half-a-squared")]
        shifts: String,
        /// Edge probabilities, comma separated.
        #[arg(long, default_value = "0.15,0.2,0.25")]
        p: String,
        /// Observation counts, comma separated.
        #[arg(long, default_value = "2,3,4,5,6,8")]
        observations: String,
        /// Instances per (p, shift) point.
        #[arg(long, default_value_t = 50)]
        seeds: usize,
        /// Recovery method: l0 | l1
        #[arg(long, default_value = "l1")]
        method: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank sampling nodes and design the selection scheme.
    Design {
        #[arg(long)]
        graph: Option<String>,
        #[arg(long)]
        shift: Option<String>,
        #[arg(long)]
        bandwidth: Option<usize>,
        #[arg(long)]
        support: Option<String>,
        #[arg(long)]
        plan: Option<String>,
        #[arg(long)]
        noise: Option<String>,
        #[arg(long)]
        sigma2: Option<f64>,
        /// Ranking metric: e1 | e2 | e3 | e4
        #[arg(long, default_value = "e1")]
        metric: String,
        /// Shift-application budget for the n0 rule (default 4N).
        #[arg(long)]
        max_shifts: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare space-shift sampling strategies on a low-pass ensemble.
    Spaceshift {
        #[arg(long)]
        graph: Option<String>,
        /// Bandwidth; signals live on the leading frequencies.
        #[arg(long, default_value_t = 2)]
        bandwidth: usize,
        /// Leading frequencies carrying the signal energy.
        #[arg(long, default_value_t = 2)]
        dominant: usize,
        #[arg(long, default_value_t = 0.02)]
        sigma2: f64,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's own help/version output exits 0; anything else is usage.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(gsp_cli::exit_code(&e));
        }
    }
}

struct Defaults {
    seed: u64,
    graph: GraphSpec,
    shift: ShiftKind,
    support: SupportSpec,
    noise: NoiseSpec,
    plan: PlanSpec,
    trials: usize,
}

impl Defaults {
    fn load(cli_seed: Option<u64>, config: &Option<PathBuf>) -> Result<Self> {
        let mut d = Self {
            seed: 0,
            graph: GraphSpec::ErdosRenyi {
                n: 20,
                p: 0.2,
                connected: true,
                symmetric: true,
            },
            shift: ShiftKind::Adjacency,
            support: SupportSpec::FirstK { k: 3 },
            noise: NoiseSpec::None,
            plan: PlanSpec::FirstK,
            trials: 100,
        };
        if let Some(path) = config {
            let file = load_results_config(path)?;
            d.seed = file.seed;
            d.graph = file.graph;
            d.shift = file.shift;
            d.support = file.support;
            d.noise = file.noise;
            d.plan = file.plan;
            d.trials = file.trials;
        } else if let Ok(env_seed) = std::env::var("GSP_SEED") {
            d.seed = env_seed.parse().map_err(|_| Error::InvalidPlan {
                reason: format!("GSP_SEED = '{env_seed}' is not a u64"),
            })?;
        }
        if let Some(s) = cli_seed {
            d.seed = s;
        }
        Ok(d)
    }
}

fn load_results_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::SchemaMismatch(e.to_string()))
}

fn timestamp() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<()> {
    let mut text = String::with_capacity(rows.len() * 32 + header.len() + 1);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn csv_sibling(out: &Path) -> PathBuf {
    out.with_extension("csv")
}

fn run(cli: Cli) -> Result<()> {
    let defaults = Defaults::load(cli.seed, &cli.config)?;
    match cli.command {
        Command::Decompose { graph, shift, out } => {
            let graph = resolve_graph(&graph, &defaults)?;
            let shift = resolve_shift(&shift, &defaults)?;
            let summary = experiments::decompose_report(&graph, shift, defaults.seed)?;
            let mut file = ResultsFile::new(defaults.seed);
            file.timestamp_unix = Some(timestamp());
            file.config = Some(config_echo(&defaults, graph, shift));
            file.results.push(
                ResultRecord::new("decomposition")
                    .with("n", ResultValue::Int(summary.n as i64))
                    .with("is_normal", ResultValue::Flag(summary.is_normal))
                    .with(
                        "condition_number",
                        ResultValue::number(summary.condition_number),
                    ),
            );
            file.results.push(ResultRecord::new("eigenvalues").with(
                "ordered",
                ResultValue::ComplexList(
                    summary.eigenvalues.iter().map(|&z| z.into()).collect(),
                ),
            ));
            file.results.push(ResultRecord::new("ordering").with(
                "permutation",
                ResultValue::IntList(summary.ordering.iter().map(|&i| i as i64).collect()),
            ));
            save_results(&out, &file)
        }
        Command::Recover {
            graph,
            shift,
            node,
            bandwidth,
            support,
            plan,
            noise,
            sigma2,
            trials,
            sweep,
            graphs,
            full,
            out,
        } => {
            if sweep {
                let count = if full { 10_000 } else { graphs.unwrap_or(1_000) };
                let outcome = experiments::noiseless_recovery_sweep(count, defaults.seed)?;
                let mut file = ResultsFile::new(defaults.seed);
                file.timestamp_unix = Some(timestamp());
                file.results.push(
                    ResultRecord::new("noiseless_sweep")
                        .with("graphs", ResultValue::Int(count as i64))
                        .with("cases", ResultValue::Int(outcome.cases as i64))
                        .with("successes", ResultValue::Int(outcome.successes as i64))
                        .with("rate", ResultValue::number(outcome.rate()))
                        .with(
                            "condition_cases",
                            ResultValue::Int(outcome.condition_cases as i64),
                        )
                        .with(
                            "conditioned_rate",
                            ResultValue::number(outcome.conditioned_rate()),
                        ),
                );
                return save_results(&out, &file);
            }
            let graph = resolve_graph(&graph, &defaults)?;
            let shift = resolve_shift(&shift, &defaults)?;
            let support = resolve_support(&support, bandwidth, &defaults)?;
            let plan = match plan {
                Some(s) => specparse::parse_plan(&s)?,
                None => defaults.plan.clone(),
            };
            let noise = resolve_noise(&noise, sigma2, &defaults)?;
            let params = RecoverParams {
                graph: graph.clone(),
                shift,
                support,
                plan,
                noise,
                node,
                trials: trials.unwrap_or(defaults.trials),
                seed: defaults.seed,
            };
            let outcome = experiments::recover_trials(&params)?;
            let rows: Vec<String> = outcome
                .rows
                .iter()
                .map(|r| {
                    format!(
                        "{},{},{:.17e},{}",
                        r.trial, r.node, r.rel_error, r.success
                    )
                })
                .collect();
            write_csv(&csv_sibling(&out), "trial,node,rel_error,success", &rows)?;
            let mut file = ResultsFile::new(defaults.seed);
            file.timestamp_unix = Some(timestamp());
            file.config = Some(config_echo(&defaults, graph, shift));
            file.results.push(
                ResultRecord::new("recovery")
                    .with("attempted", ResultValue::Int(outcome.attempted as i64))
                    .with("successes", ResultValue::Int(outcome.successes as i64))
                    .with(
                        "success_rate",
                        ResultValue::number(
                            outcome.successes as f64 / outcome.attempted.max(1) as f64,
                        ),
                    )
                    .with("mean_error", ResultValue::number(outcome.mean_error))
                    .with("median_error", ResultValue::number(outcome.median_error)),
            );
            save_results(&out, &file)
        }
        Command::SupportId {
            n,
            bandwidth,
            shifts,
            p,
            observations,
            seeds,
            method,
            out,
        } => {
            let shifts: Vec<ShiftKind> = shifts
                .split(',')
                .map(ShiftKind::parse)
                .collect::<Result<_>>()?;
            let params = SupportIdParams {
                n,
                bandwidth,
                shifts,
                edge_probabilities: specparse::parse_float_list(&p)?,
                observations: specparse::parse_index_list(&observations)?,
                instances: seeds,
                method: match method.as_str() {
                    "l0" => SupportMethod::L0,
                    "l1" => SupportMethod::L1,
                    other => {
                        return Err(Error::InvalidPlan {
                            reason: format!("unknown method '{other}' (l0 | l1)"),
                        })
                    }
                },
                seed: defaults.seed,
            };
            let points = experiments::support_id_sweep(&params)?;
            let rows: Vec<String> = points
                .iter()
                .map(|pt| {
                    format!(
                        "{},{},{},{},{:.17e}",
                        shift_name(pt.shift),
                        pt.p,
                        pt.observations,
                        pt.instances,
                        pt.rate()
                    )
                })
                .collect();
            write_csv(
                &csv_sibling(&out),
                "shift,p,observations,instances,rate",
                &rows,
            )?;
            let mut file = ResultsFile::new(defaults.seed);
            file.timestamp_unix = Some(timestamp());
            for pt in &points {
                file.results.push(
                    ResultRecord::new("support_id")
                        .with("shift", ResultValue::Text(shift_name(pt.shift).into()))
                        .with("p", ResultValue::number(pt.p))
                        .with("observations", ResultValue::Int(pt.observations as i64))
                        .with("instances", ResultValue::Int(pt.instances as i64))
                        .with("recovered", ResultValue::Int(pt.recovered as i64))
                        .with("rate", ResultValue::number(pt.rate()))
                        .with("certified", ResultValue::Int(pt.certified as i64))
                        .with(
                            "certified_recovered",
                            ResultValue::Int(pt.certified_recovered as i64),
                        ),
                );
            }
            save_results(&out, &file)
        }
        Command::Design {
            graph,
            shift,
            bandwidth,
            support,
            plan,
            noise,
            sigma2,
            metric,
            max_shifts,
            out,
        } => {
            let graph = resolve_graph(&graph, &defaults)?;
            let shift_kind = resolve_shift(&shift, &defaults)?;
            let support = resolve_support(&support, bandwidth, &defaults)?;
            let noise = resolve_noise(&noise, sigma2, &defaults)?;
            let metric = match metric.as_str() {
                "e1" => Metric::E1,
                "e2" => Metric::E2,
                "e3" => Metric::E3,
                "e4" => Metric::E4,
                other => {
                    return Err(Error::InvalidPlan {
                        reason: format!("unknown metric '{other}'"),
                    })
                }
            };
            let (_, _, decomp) = experiments::build_instance(&graph, shift_kind, defaults.seed)?;
            let n = decomp.n();
            let indices = support.resolve(n)?;
            let k = indices.len();
            let plan_spec = match plan {
                Some(s) => specparse::parse_plan(&s)?,
                None => defaults.plan.clone(),
            };
            let rows = experiments::plan_rows(n, &plan_spec, k)?;
            let plan = plan_spec.to_plan(rows, k)?;
            let model = noise.to_model();
            let report = experiments::design_report(
                &decomp,
                &indices,
                &plan,
                &model,
                metric,
                max_shifts.unwrap_or(4 * n),
            )?;
            let csv_rows: Vec<String> = report
                .rankings
                .iter()
                .map(|r| {
                    let (e1, e2, e3, e4) = r
                        .metrics
                        .map(|m| (m.e1, m.e2, m.e3, m.e4))
                        .unwrap_or((f64::NAN, f64::NAN, f64::NAN, f64::NAN));
                    let fast = r
                        .fast_score
                        .map(|s| format!("{s:.17e}"))
                        .unwrap_or_default();
                    format!("{},{e1:.17e},{e2:.17e},{e3:.17e},{e4:.17e},{fast}", r.node)
                })
                .collect();
            write_csv(&csv_sibling(&out), "node,e1,e2,e3,e4,fast_score", &csv_rows)?;
            let mut file = ResultsFile::new(defaults.seed);
            file.timestamp_unix = Some(timestamp());
            file.config = Some(config_echo(&defaults, graph, shift_kind));
            for r in &report.rankings {
                let mut record = ResultRecord::new("node_ranking")
                    .with("node", ResultValue::Int(r.node as i64));
                if let Some(m) = r.metrics {
                    record = record
                        .with("e1", ResultValue::number(m.e1))
                        .with("e2", ResultValue::number(m.e2))
                        .with("e3", ResultValue::number(m.e3))
                        .with("e4", ResultValue::number(m.e4));
                } else {
                    record = record.with("singular", ResultValue::Flag(true));
                }
                if let Some(s) = r.fast_score {
                    record = record.with("fast_score", ResultValue::number(s));
                }
                file.results.push(record);
            }
            if let Some(n0) = report.n0 {
                file.results.push(
                    ResultRecord::new("n0_rule")
                        .with("n0", ResultValue::Int(n0.n0 as i64))
                        .with(
                            "eigenvalue_power_product",
                            ResultValue::number(n0.eigenvalue_power_product),
                        ),
                );
            }
            save_results(&out, &file)
        }
        Command::Spaceshift {
            graph,
            bandwidth,
            dominant,
            sigma2,
            trials,
            out,
        } => {
            let graph = resolve_graph(&graph, &defaults)?;
            let (n, p) = match graph {
                GraphSpec::ErdosRenyi { n, p, .. } => (n, p),
                _ => {
                    return Err(Error::InvalidPlan {
                        reason: "spaceshift strategy study expects an er:N,P graph".into(),
                    })
                }
            };
            let outcomes = experiments::strategy_comparison(&StrategyParams {
                n,
                p,
                bandwidth,
                dominant,
                sigma2,
                trials: trials.unwrap_or(defaults.trials),
                seed: defaults.seed,
            })?;
            let rows: Vec<String> = outcomes
                .iter()
                .map(|o| {
                    format!(
                        "{},{},{},{:.17e},{:.17e}",
                        o.name, o.attempted, o.solved, o.min_error, o.median_error
                    )
                })
                .collect();
            write_csv(
                &csv_sibling(&out),
                "strategy,attempted,solved,min_error,median_error",
                &rows,
            )?;
            let mut file = ResultsFile::new(defaults.seed);
            file.timestamp_unix = Some(timestamp());
            for o in &outcomes {
                file.results.push(
                    ResultRecord::new("strategy")
                        .with("name", ResultValue::Text(o.name.into()))
                        .with("attempted", ResultValue::Int(o.attempted as i64))
                        .with("solved", ResultValue::Int(o.solved as i64))
                        .with("min_error", ResultValue::number(o.min_error))
                        .with("median_error", ResultValue::number(o.median_error)),
                );
            }
            save_results(&out, &file)
        }
    }
}

fn shift_name(kind: ShiftKind) -> &'static str {
    match kind {
        ShiftKind::Adjacency => "adjacency",
        ShiftKind::IdentityMinusAdjacency => "i-minus-a",
        ShiftKind::HalfAdjacencySquared => "half-a-squared",
        ShiftKind::Laplacian => "laplacian",
    }
}

fn resolve_graph(arg: &Option<String>, defaults: &Defaults) -> Result<GraphSpec> {
    match arg {
        Some(s) => specparse::parse_graph(s),
        None => Ok(defaults.graph.clone()),
    }
}

fn resolve_shift(arg: &Option<String>, defaults: &Defaults) -> Result<ShiftKind> {
    match arg {
        Some(s) => specparse::parse_shift(s),
        None => Ok(defaults.shift),
    }
}

fn resolve_support(
    arg: &Option<String>,
    bandwidth: Option<usize>,
    defaults: &Defaults,
) -> Result<SupportSpec> {
    if let Some(s) = arg {
        return specparse::parse_support(s);
    }
    if let Some(k) = bandwidth {
        return Ok(SupportSpec::FirstK { k });
    }
    Ok(defaults.support.clone())
}

fn resolve_noise(
    arg: &Option<String>,
    sigma2: Option<f64>,
    defaults: &Defaults,
) -> Result<NoiseSpec> {
    match arg {
        Some(kind) => specparse::parse_noise(kind, sigma2.unwrap_or(0.0)),
        None => Ok(defaults.noise),
    }
}

fn config_echo(defaults: &Defaults, graph: GraphSpec, shift: ShiftKind) -> ExperimentConfig {
    ExperimentConfig {
        seed: defaults.seed,
        graph,
        shift,
        support: defaults.support.clone(),
        noise: defaults.noise,
        plan: defaults.plan.clone(),
        trials: defaults.trials,
    }
}

