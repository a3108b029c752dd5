//! Command-line definition and command execution.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use illiq_core::geometry::{generators_to_halfspaces, lineality_space};
use illiq_core::lp::solver_stats;
use illiq_core::oracle::{
    brute_membership_at, brute_polar_check, brute_superhedge_one_period, interval_martingale_feasibility,
    polar_counterexample, Interval,
};
use illiq_core::{
    check_na, check_robust_na, check_robust_no_scalable_arbitrage, dual_bound, find_consistent_price_system,
    superhedge_premium, tol, DualEncoding, HPolyhedron, Normalization, PremiumStatus, PricingError, VCone,
};
use serde_json::{json, Value};

use crate::error::CliError;
use crate::input::{load_model, load_process, ModelInput, ModelKind};
use crate::report::{node_ids, number, object, process_json, Inputs, RunReport, Stats};

#[derive(Debug, Parser)]
#[command(name = "illiq", version, about = "Superhedging and arbitrage checks on scenario trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the JSON report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also write scalar results as CSV to this file.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    /// RNG seed for sampling oracles.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ModelArg {
    /// Model file (tree and per-node market data).
    #[arg(long)]
    pub model: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// No-arbitrage check with a witness strategy when it fails.
    CheckNa(ModelArg),
    /// Robust no-arbitrage of a conical model.
    CheckRna(ModelArg),
    /// Robust no scalable arbitrage (robust NA of the recession model).
    CheckRnsa(ModelArg),
    /// Search for a (strictly) consistent price system.
    FindCps {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        strict: bool,
    },
    /// Minimal root premium in units of a numeraire asset.
    Superhedge {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        claim: PathBuf,
        #[arg(long, default_value_t = 0)]
        numeraire: usize,
    },
    /// Dual bound for a claim and a candidate premium process.
    DualBound {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        claim: PathBuf,
        #[arg(long)]
        premium: PathBuf,
    },
    /// Polar cone, recession cone or lineality space at a node.
    Geometry {
        #[arg(value_enum)]
        op: GeometryOp,
        #[command(flatten)]
        model: ModelArg,
        /// Node id.
        #[arg(long)]
        node: u64,
    },
    /// Brute-force verifiers that do not use the LP solver.
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
    },
    /// Re-check the certificates of a report without solving LPs.
    Verify {
        #[arg(long)]
        report: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GeometryOp {
    Polar,
    Recession,
    Lineality,
}

#[derive(Debug, Subcommand)]
pub enum OracleCommand {
    /// Sampled comparison of a node cone's generators with its polar.
    PolarCheck {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        node: u64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Grid test of terminal-claim membership (one period, two assets).
    Membership {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        claim: PathBuf,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[arg(long, default_value_t = 10.0)]
        radius: f64,
    },
    /// Grid superhedging premium (one period, two assets).
    Superhedge {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        claim: PathBuf,
        #[arg(long, default_value_t = 0)]
        numeraire: usize,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[arg(long, default_value_t = 10.0)]
        radius: f64,
    },
    /// Exact ratio-interval test for two-asset bid-ask models.
    Intervals {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        strict: bool,
    },
}

impl Command {
    pub fn name(&self) -> String {
        match self {
            Command::CheckNa(_) => "check-na".into(),
            Command::CheckRna(_) => "check-rna".into(),
            Command::CheckRnsa(_) => "check-rnsa".into(),
            Command::FindCps { .. } => "find-cps".into(),
            Command::Superhedge { .. } => "superhedge".into(),
            Command::DualBound { .. } => "dual-bound".into(),
            Command::Geometry { .. } => "geometry".into(),
            Command::Oracle { which } => format!(
                "oracle {}",
                match which {
                    OracleCommand::PolarCheck { .. } => "polar-check",
                    OracleCommand::Membership { .. } => "membership",
                    OracleCommand::Superhedge { .. } => "superhedge",
                    OracleCommand::Intervals { .. } => "intervals",
                }
            ),
            Command::Verify { .. } => "verify".into(),
        }
    }
}

/// Report tolerance for the no-arbitrage verdict, from `ILLIQ_LP_TOL`.
pub fn report_tolerance() -> Result<f64, CliError> {
    match std::env::var("ILLIQ_LP_TOL") {
        Err(_) => Ok(tol::LP_REPORT),
        Ok(s) => s
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|t| t.is_finite() && *t >= 0.0)
            .ok_or_else(|| CliError::Input(format!("ILLIQ_LP_TOL: expected a nonnegative number, got {s:?}"))),
    }
}

fn node_index(input: &ModelInput, id: u64) -> Result<usize, CliError> {
    input
        .tree()
        .index_of(id)
        .ok_or_else(|| CliError::Input(format!("--node {id}: not a node id of the tree")))
}

pub(crate) struct Computed {
    pub inputs: Inputs,
    pub results: Value,
}

/// Runs one command and assembles its report.
pub fn run(cli: &Cli) -> Result<RunReport, CliError> {
    let before = solver_stats();
    let start = Instant::now();
    let computed = execute(cli)?;
    let after = solver_stats();
    Ok(RunReport {
        command: cli.command.name(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        inputs: computed.inputs,
        results: computed.results,
        stats: Stats {
            lp_count: after.lp_count - before.lp_count,
            pivot_count: after.pivot_count - before.pivot_count,
            wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        },
    })
}

fn model_inputs(input: &ModelInput, options: Value) -> Inputs {
    Inputs::new(Some(input.raw.clone()), None, None, options)
}

fn execute(cli: &Cli) -> Result<Computed, CliError> {
    match &cli.command {
        Command::CheckNa(m) => {
            let input = load_model(&m.model)?;
            let tol = report_tolerance()?;
            let r = check_na(&input.model)?;
            let holds = r.holds_at(tol);
            let results = object(vec![
                ("holds", json!(holds)),
                ("optimum", number(r.optimum)),
                ("tolerance", number(tol)),
                ("node_ids", node_ids(input.tree())),
                ("witness", r.witness.as_ref().filter(|_| !holds).map_or(Value::Null, process_json)),
                ("terminal", r.terminal.as_ref().filter(|_| !holds).map_or(Value::Null, process_json)),
            ]);
            Ok(Computed {
                inputs: model_inputs(&input, json!({ "tolerance": tol })),
                results,
            })
        }
        Command::CheckRna(m) | Command::CheckRnsa(m) => {
            let input = load_model(&m.model)?;
            let rnsa = matches!(cli.command, Command::CheckRnsa(_));
            let r = if rnsa {
                check_robust_no_scalable_arbitrage(&input.model)?
            } else {
                check_robust_na(&input.model)?
            };
            let mut pairs = vec![
                ("holds", json!(r.holds)),
                ("margin", r.margin.map_or(Value::Null, number)),
                ("node_ids", node_ids(input.tree())),
                ("certificate", r.certificate.as_ref().map_or(Value::Null, |p| process_json(&p.y))),
            ];
            if rnsa {
                pairs.push(("recession_model", json!(!input.model.is_conical())));
            }
            Ok(Computed {
                inputs: model_inputs(&input, json!({})),
                results: object(pairs),
            })
        }
        Command::FindCps { model, strict } => {
            let input = load_model(&model.model)?;
            let found = find_consistent_price_system(&input.model, *strict)?;
            let results = object(vec![
                ("found", json!(found.is_some())),
                ("strict", json!(strict)),
                ("margin", found.as_ref().map_or(Value::Null, |p| number(p.margin))),
                ("node_ids", node_ids(input.tree())),
                ("y", found.as_ref().map_or(Value::Null, |p| process_json(&p.y))),
            ]);
            Ok(Computed {
                inputs: model_inputs(&input, json!({ "strict": strict })),
                results,
            })
        }
        Command::Superhedge {
            model,
            claim,
            numeraire,
        } => {
            let input = load_model(&model.model)?;
            let (c, raw_claim) = load_process(claim, input.tree())?;
            let inputs = Inputs::new(
                Some(input.raw.clone()),
                Some(raw_claim),
                None,
                json!({ "numeraire": numeraire }),
            );
            let mut pairs = vec![("numeraire", json!(numeraire)), ("node_ids", node_ids(input.tree()))];
            match superhedge_premium(&input.model, &c, *numeraire) {
                Ok(s) => {
                    let status = match s.status {
                        PremiumStatus::Optimal => "optimal",
                        PremiumStatus::UnboundedBelow => "unbounded_below",
                    };
                    pairs.extend([
                        ("status", json!(status)),
                        ("alpha", number(s.alpha)),
                        ("precondition", json!(s.precondition)),
                        ("hedge", s.hedge.as_ref().map_or(Value::Null, process_json)),
                        ("premium", s.premium.as_ref().map_or(Value::Null, process_json)),
                    ]);
                }
                Err(PricingError::NoHedge) => {
                    pairs.extend([
                        ("status", json!("no_hedge")),
                        ("alpha", Value::Null),
                        ("precondition", Value::Null),
                        ("hedge", Value::Null),
                        ("premium", Value::Null),
                    ]);
                }
                Err(e) => return Err(e.into()),
            }
            Ok(Computed {
                inputs,
                results: object(pairs),
            })
        }
        Command::DualBound { model, claim, premium } => {
            let input = load_model(&model.model)?;
            let (c, raw_claim) = load_process(claim, input.tree())?;
            let (p, raw_premium) = load_process(premium, input.tree())?;
            let r = dual_bound(&input.model, &c, &p)?;
            let normalization = match r.normalization {
                Normalization::RootSimplex => json!("root_simplex"),
                Normalization::Box(m) => json!({ "box": m }),
            };
            let encoding = match r.encoding {
                DualEncoding::Polar => "polar",
                DualEncoding::Epigraph => "epigraph",
                DualEncoding::Auto => "auto",
            };
            let results = object(vec![
                ("value", number(r.value)),
                ("superhedges", json!(r.value <= tol::DUAL_ZERO)),
                ("normalization", normalization),
                ("encoding", json!(encoding)),
                ("node_ids", node_ids(input.tree())),
                ("y", process_json(&r.y)),
            ]);
            Ok(Computed {
                inputs: Inputs::new(Some(input.raw.clone()), Some(raw_claim), Some(raw_premium), json!({})),
                results,
            })
        }
        Command::Geometry { op, model, node } => {
            let input = load_model(&model.model)?;
            let set = input.model.set(node_index(&input, *node)?);
            let results = match op {
                GeometryOp::Polar => {
                    let p = set.polar()?;
                    object(vec![("node", json!(node)), ("a", json!(p.a)), ("b", json!(p.b))])
                }
                GeometryOp::Recession => {
                    let r = set.recession().projected()?;
                    object(vec![("node", json!(node)), ("a", json!(r.a)), ("b", json!(r.b))])
                }
                GeometryOp::Lineality => {
                    let l = lineality_space(&set.recession().projected()?)?;
                    object(vec![("node", json!(node)), ("basis", json!(l.lineality))])
                }
            };
            let op_name = match op {
                GeometryOp::Polar => "polar",
                GeometryOp::Recession => "recession",
                GeometryOp::Lineality => "lineality",
            };
            Ok(Computed {
                inputs: model_inputs(&input, json!({ "op": op_name, "node": node })),
                results,
            })
        }
        Command::Oracle { which } => oracle(which, cli.seed),
        Command::Verify { report } => crate::verify::verify_file(report),
    }
}

fn oracle(which: &OracleCommand, seed: u64) -> Result<Computed, CliError> {
    match which {
        OracleCommand::PolarCheck { model, node, samples } => {
            let input = load_model(&model.model)?;
            let set = input.model.set(node_index(&input, *node)?).recession();
            // Generators of the cone against the polar's halfspaces, each
            // obtained by its own conversion.
            let k = set.cone_generators()?;
            let rows = set.projected()?;
            let polar_gens = VCone::new(rows.dim, rows.a.clone(), Vec::new())?;
            let p: HPolyhedron = generators_to_halfspaces(&polar_gens)?;
            let ok = brute_polar_check(&k, &p, *samples, seed)?;
            let counterexample = if ok {
                Value::Null
            } else {
                json!(polar_counterexample(&k, &p, *samples, seed)?)
            };
            Ok(Computed {
                inputs: model_inputs(&input, json!({ "node": node, "samples": samples, "seed": seed })),
                results: object(vec![("agrees", json!(ok)), ("counterexample", counterexample)]),
            })
        }
        OracleCommand::Membership {
            model,
            claim,
            step,
            radius,
        } => {
            let input = load_model(&model.model)?;
            let (c, raw) = load_process(claim, input.tree())?;
            let member = brute_membership_at(&input.model, &c, *step, *radius)?;
            Ok(Computed {
                inputs: Inputs::new(
                    Some(input.raw.clone()),
                    Some(raw),
                    None,
                    json!({ "step": step, "radius": radius }),
                ),
                results: object(vec![("member", json!(member))]),
            })
        }
        OracleCommand::Superhedge {
            model,
            claim,
            numeraire,
            step,
            radius,
        } => {
            let input = load_model(&model.model)?;
            let (c, raw) = load_process(claim, input.tree())?;
            let alpha = brute_superhedge_one_period(&input.model, &c, *numeraire, *step, *radius)?;
            Ok(Computed {
                inputs: Inputs::new(
                    Some(input.raw.clone()),
                    Some(raw),
                    None,
                    json!({ "numeraire": numeraire, "step": step, "radius": radius }),
                ),
                results: object(vec![("alpha", number(alpha))]),
            })
        }
        OracleCommand::Intervals { model, strict } => {
            let input = load_model(&model.model)?;
            let matrices = match (&input.kind, &input.exact_bid_ask) {
                (ModelKind::BidAsk, Some(m)) if input.model.assets() == 2 => m,
                _ => {
                    return Err(CliError::Input(
                        "oracle intervals needs a two-asset bid_ask model".to_string(),
                    ))
                }
            };
            let intervals: Vec<Interval> = matrices
                .iter()
                .map(|pi| Interval::from_bid_ask(&pi[0][1], &pi[1][0]))
                .collect();
            let feasible = interval_martingale_feasibility(input.tree(), &intervals, *strict)?;
            Ok(Computed {
                inputs: model_inputs(&input, json!({ "strict": strict })),
                results: object(vec![("feasible", json!(feasible)), ("strict", json!(strict))]),
            })
        }
    }
}
