//! Command-line surface of the trace-invariant workbench.

mod formats;
mod report;

use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_traits::ToPrimitive;
use sha2::{Digest, Sha256};

use formats::{parse_graph_input, parse_script, parse_state_input, CliError, CliResult};
use tracegraph::degrees::SearchBudget;
use tracegraph::families::{generate, tree_compose, ComposedGraph, FamilySpec};
use tracegraph::graph::ColoredGraph;
use tracegraph::haar::{asymptotic_r_haar, haar_moment_exact, renyi_monotone};
use tracegraph::oracle::monte_carlo_haar_moment;
use tracegraph::refstates::{
    evaluate_on_reference, locc_flow_order, locc_pointwise_le, locc_reachable_sufficient,
    lo_less_equal, lu_equal, scaling_of_named, LoccVerdict,
};

#[derive(Parser)]
#[command(
    name = "tracegraph",
    version,
    about = "Exact workbench for trace-invariants of multipartite tensors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GraphSource {
    /// Graph file (JSON document or cycle-notation text).
    #[arg(long)]
    graph: Option<String>,
    /// Family spec such as "PT k=3 D=3" or "ME n=2 D=3".
    #[arg(long)]
    family: Option<String>,
    /// Tree-composition script file.
    #[arg(long)]
    script: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// All combinatorial quantities of a graph.
    GraphInfo {
        #[command(flatten)]
        source: GraphSource,
        /// Exhaustive-search ceiling for the compatibility degree.
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        csv: bool,
    },
    /// Exact evaluation of an invariant on a reference state.
    Eval {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long)]
        state: String,
        #[arg(long)]
        json: bool,
    },
    /// First catalog graph whose scaling separates two states.
    Distinguish {
        #[arg(long)]
        state_a: String,
        #[arg(long)]
        state_b: String,
        /// Largest catalog graph order to try.
        #[arg(long, default_value_t = 6)]
        k_budget: usize,
        #[arg(long)]
        json: bool,
    },
    /// LU / LO / LOCC verdict between two reference states.
    Order {
        #[arg(long)]
        state_a: String,
        #[arg(long)]
        state_b: String,
        #[arg(long, value_parser = ["lu", "lo", "locc"])]
        relation: String,
        /// State cap for the LOCC closure.
        #[arg(long, default_value_t = 20000)]
        budget: usize,
        #[arg(long)]
        json: bool,
    },
    /// Haar moment of an invariant: exact, Monte Carlo, or asymptotic.
    Haar {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long, default_value_t = 2)]
        n: u64,
        #[arg(long)]
        exact: bool,
        /// Monte Carlo sample count.
        #[arg(long)]
        mc: Option<u64>,
        #[arg(long)]
        asymptotic: bool,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Write an SVG of ln(moment) against ln(N).
        #[arg(long)]
        plot: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Fixture suites: identities, appc, footnote68, oplaws, all.
    Verify {
        suite: String,
        #[arg(long, default_value_t = 20260810)]
        seed: u64,
    },
}

fn default_budget() -> SearchBudget {
    let mut budget = SearchBudget::default();
    if let Ok(value) = std::env::var("TRACEGRAPH_BUDGET") {
        if let Ok(k) = value.parse::<usize>() {
            budget.exhaustive_k = k;
        }
    }
    budget
}

fn load(path: &str) -> CliResult<(String, String)> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError(format!("cannot read {path:?}: {e}")))?;
    let digest = Sha256::digest(text.as_bytes());
    Ok((text, format!("{path} sha256:{digest:x}")))
}

pub struct LoadedGraph {
    pub graph: ColoredGraph,
    pub provenance: String,
    pub composed: Option<ComposedGraph>,
}

fn load_graph(source: &GraphSource, budget: &SearchBudget) -> CliResult<LoadedGraph> {
    match (&source.graph, &source.family, &source.script) {
        (Some(path), None, None) => {
            let (text, provenance) = load(path)?;
            Ok(LoadedGraph {
                graph: parse_graph_input(&text)?,
                provenance,
                composed: None,
            })
        }
        (None, Some(spec_text), None) => {
            let spec: FamilySpec = spec_text
                .parse()
                .map_err(|e: tracegraph::Error| CliError(e.to_string()))?;
            Ok(LoadedGraph {
                graph: generate(&spec)?,
                provenance: format!("family: {spec}"),
                composed: None,
            })
        }
        (None, None, Some(path)) => {
            let (text, provenance) = load(path)?;
            let script = parse_script(&text)?;
            let composed = tree_compose(&script, budget).map_err(|e| CliError(e.to_string()))?;
            Ok(LoadedGraph {
                graph: composed.graph.clone(),
                provenance,
                composed: Some(composed),
            })
        }
        _ => Err(CliError(
            "provide exactly one of --graph, --family, --script".into(),
        )),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    match cli.command {
        Command::GraphInfo {
            source,
            budget,
            json,
            csv,
        } => {
            let mut search_budget = default_budget();
            if let Some(k) = budget {
                search_budget.exhaustive_k = k;
            }
            let loaded = load_graph(&source, &search_budget)?;
            let report = report::graph_info(&loaded, &search_budget)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report).unwrap());
            } else if csv {
                report::print_graph_info_csv(&report);
            } else {
                report::print_graph_info(&report);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Eval {
            source,
            state,
            json,
        } => {
            let budget = default_budget();
            let loaded = load_graph(&source, &budget)?;
            let (text, state_provenance) = load(&state)?;
            let parsed = parse_state_input(&text)?;
            if parsed.d() != loaded.graph.d() {
                return Err(CliError(format!(
                    "graph has D = {} but the state has D = {}",
                    loaded.graph.d(),
                    parsed.d()
                )));
            }
            let wf = parsed.weight_function()?;
            let value = evaluate_on_reference(&loaded.graph, &wf)?;
            let scaling = parsed
                .named()
                .map(|named| scaling_of_named(&loaded.graph, named, &budget))
                .transpose()?;
            let report =
                report::eval_report(&loaded, &state_provenance, &wf, &value, scaling);
            if json {
                println!("{}", serde_json::to_string_pretty(&report).unwrap());
            } else {
                report::print_eval(&report);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Distinguish {
            state_a,
            state_b,
            k_budget,
            json,
        } => {
            let budget = default_budget();
            let (text_a, _) = load(&state_a)?;
            let (text_b, _) = load(&state_b)?;
            let a = parse_state_input(&text_a)?;
            let b = parse_state_input(&text_b)?;
            if a.d() != b.d() {
                return Err(CliError("states live on different D".into()));
            }
            let d = a.d();
            let outcome = match (a.named(), b.named()) {
                (Some(na), Some(nb)) => report::distinguish_named(d, na, nb, k_budget, &budget)?,
                _ => {
                    let wa = a.weight_function()?;
                    let wb = b.weight_function()?;
                    report::distinguish_weights(d, &wa, &wb, k_budget)?
                }
            };
            if json {
                println!("{}", serde_json::to_string_pretty(&outcome).unwrap());
            } else {
                report::print_distinguish(&outcome);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Order {
            state_a,
            state_b,
            relation,
            budget,
            json,
        } => {
            let (text_a, _) = load(&state_a)?;
            let (text_b, _) = load(&state_b)?;
            let a = parse_state_input(&text_a)?.weight_function()?;
            let b = parse_state_input(&text_b)?.weight_function()?;
            let report = match relation.as_str() {
                "lu" => report::OrderReport {
                    relation: "lu".into(),
                    verdict: if lu_equal(&a, &b) {
                        "EQUAL".into()
                    } else {
                        "DISTINCT".into()
                    },
                    witness: None,
                    established: true,
                },
                "lo" => {
                    let forward = lo_less_equal(&a, &b)?;
                    report::OrderReport {
                        relation: "lo".into(),
                        verdict: if forward {
                            "A -> B".into()
                        } else {
                            "NO".into()
                        },
                        witness: forward.then(|| report::divisor_table(&a, &b)),
                        established: true,
                    }
                }
                "locc" => {
                    if locc_pointwise_le(&a, &b)? {
                        report::OrderReport {
                            relation: "locc".into(),
                            verdict: "ESTABLISHED: A -> B".into(),
                            witness: Some("pointwise measurement reduction".into()),
                            established: true,
                        }
                    } else if let Some(flow) = locc_flow_order(&a, &b)? {
                        report::OrderReport {
                            relation: "locc".into(),
                            verdict: "ESTABLISHED: A -> B".into(),
                            witness: Some(report::flow_witness(&flow)),
                            established: true,
                        }
                    } else {
                        match locc_reachable_sufficient(&a, &b, budget)? {
                            LoccVerdict::Established(path) => report::OrderReport {
                                relation: "locc".into(),
                                verdict: "ESTABLISHED: A -> B".into(),
                                witness: Some(path),
                                established: true,
                            },
                            LoccVerdict::NotEstablished => report::OrderReport {
                                relation: "locc".into(),
                                verdict: "NOT_ESTABLISHED".into(),
                                witness: None,
                                established: false,
                            },
                        }
                    }
                }
                _ => unreachable!("clap validates the relation"),
            };
            if json {
                println!("{}", serde_json::to_string_pretty(&report).unwrap());
            } else {
                println!(
                    "{} relation: {}{}",
                    report.relation.to_uppercase(),
                    report.verdict,
                    report
                        .witness
                        .as_deref()
                        .map(|w| format!(" ({w})"))
                        .unwrap_or_default()
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Haar {
            source,
            n,
            exact,
            mc,
            asymptotic,
            seed,
            plot,
            json,
        } => {
            let budget = default_budget();
            let loaded = load_graph(&source, &budget)?;
            let g = &loaded.graph;
            let mut out = report::HaarReport {
                provenance: loaded.provenance.clone(),
                n,
                exact: None,
                gaussian: None,
                prefactor: None,
                mc_mean: None,
                mc_std_error: None,
                mc_samples: None,
                seed,
                s: None,
                mu: None,
                renyi: None,
                asymptotic_slope: None,
                asymptotic_mu: None,
                conditions: Vec::new(),
                exactness: "EXACT".into(),
            };
            if exact || (!asymptotic && mc.is_none()) {
                let report = haar_moment_exact(g, n, &budget)?;
                out.exact = Some(report.exact_value.to_string());
                out.gaussian = Some(report.gaussian_value.to_string());
                out.prefactor = Some(report.prefactor.to_string());
                out.s = Some(report.s);
                out.mu = report.mu;
                out.renyi = report.exact_value.to_f64().map(renyi_monotone);
            }
            if let Some(samples) = mc {
                let estimate = monte_carlo_haar_moment(g, n as usize, samples, seed)?;
                out.mc_mean = Some((estimate.mean.re, estimate.mean.im));
                out.mc_std_error = Some(estimate.std_error);
                out.mc_samples = Some(samples);
            }
            if asymptotic {
                match asymptotic_r_haar(g, &budget) {
                    Ok(asym) => {
                        out.asymptotic_slope = Some(asym.slope);
                        out.asymptotic_mu = Some(asym.mu);
                        out.conditions = asym.conditions;
                    }
                    Err(tracegraph::Error::ConditionsNotMet(why)) => {
                        out.exactness = "CONDITIONS_NOT_MET".into();
                        out.conditions = vec![why];
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            if let Some(path) = plot {
                report::write_scaling_plot(g, &budget, &path)?;
                eprintln!("wrote {path}");
            }
            if json {
                println!("{}", serde_json::to_string_pretty(&out).unwrap());
            } else {
                report::print_haar(&out);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { suite, seed } => {
            let ok = match suite.as_str() {
                "identities" => report::verify_identities(),
                "appc" => report::verify_appc(),
                "footnote68" => report::verify_footnote68(),
                "oplaws" => report::verify_oplaws(seed),
                "all" => {
                    let mut ok = report::verify_identities();
                    ok &= report::verify_appc();
                    ok &= report::verify_footnote68();
                    ok &= report::verify_oplaws(seed);
                    ok
                }
                other => {
                    return Err(CliError(format!(
                        "unknown suite {other:?}; available: identities, appc, footnote68, oplaws, all"
                    )))
                }
            };
            if ok {
                println!("verify {suite}: pass");
                Ok(ExitCode::SUCCESS)
            } else {
                println!("verify {suite}: FAIL");
                Ok(ExitCode::from(2))
            }
        }
    }
}
