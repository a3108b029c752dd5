//! `verify --report R`: re-checks embedded certificates against the
//! embedded inputs. Only direct evaluations are used (membership in
//! halfspace forms, martingale sums, cone generators); no LP is solved.

use std::path::Path;

use illiq_core::{tol, AdaptedVectorProcess, EventTree, HPolyhedron, MarketModel, PriceSystem};
use serde_json::{json, Value};

use crate::commands::Computed;
use crate::error::CliError;
use crate::input::{parse_model, parse_process};
use crate::report::{process_from_json, Inputs, RunReport};

struct Checks(Vec<Value>);

impl Checks {
    fn add(&mut self, name: &str, ok: bool, detail: impl Into<String>) {
        self.0.push(json!({ "name": name, "ok": ok, "detail": detail.into() }));
    }

    fn all_ok(&self) -> bool {
        self.0.iter().all(|c| c["ok"] == json!(true))
    }
}

pub(crate) fn verify_file(path: &Path) -> Result<Computed, CliError> {
    let file = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{file}: {e}")))?;
    let report = RunReport::from_json(&text, &file)?;
    let mut checks = Checks(Vec::new());
    let digest_ok = report.inputs.compute_digest() == report.inputs.digest;
    checks.add("inputs digest", digest_ok, "");
    if digest_ok {
        check_certificates(&report, &mut checks)?;
    }
    let results = json!({
        "verified_command": report.command,
        "valid": checks.all_ok(),
        "checks": checks.0,
    });
    let inputs = Inputs::new(
        None,
        None,
        None,
        json!({ "report_command": report.command, "report_inputs_digest": report.inputs.digest }),
    );
    Ok(Computed { inputs, results })
}

fn model_of(report: &RunReport) -> Result<MarketModel, CliError> {
    let raw = report
        .inputs
        .model
        .clone()
        .ok_or_else(|| CliError::Input("report has no embedded model".to_string()))?;
    Ok(parse_model(raw, "inputs.model")?.model)
}

fn scaled(x: &[f64]) -> f64 {
    tol::GEOMETRY_SLACK * (1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

/// Sets in portfolio coordinates, projected once.
fn halfspaces(model: &MarketModel) -> Result<Vec<HPolyhedron>, CliError> {
    model
        .sets()
        .iter()
        .map(|s| s.projected().map_err(CliError::from))
        .collect()
}

fn check_certificates(report: &RunReport, checks: &mut Checks) -> Result<(), CliError> {
    let r = &report.results;
    match report.command.as_str() {
        "check-na" => {
            if r["holds"] == json!(true) {
                checks.add("certificate", true, "no-arbitrage verdicts carry no certificate");
                return Ok(());
            }
            let model = model_of(report)?;
            let tree = model.tree();
            if r["witness"].is_null() {
                checks.add("witness present", false, "arbitrage reported without a witness");
                return Ok(());
            }
            let z = process_from_json(&r["witness"], tree, "results.witness")?;
            let terminal = process_from_json(&r["terminal"], tree, "results.terminal")?;
            let sets = halfspaces(&model)?;
            let outside: Vec<u64> = (0..tree.len())
                .filter(|&n| !sets[n].contains(z.at(n), scaled(z.at(n))))
                .map(|n| tree.node(n).id)
                .collect();
            checks.add("increments solvent", outside.is_empty(), format!("outside at nodes {outside:?}"));
            let agg = z.path_aggregate(tree);
            let consistent = tree
                .leaves()
                .all(|l| agg.at(l).iter().zip(terminal.at(l)).all(|(a, b)| (a - b).abs() <= scaled(agg.at(l))));
            checks.add("terminal value is the path sum", consistent, "");
            let nonneg = tree.leaves().all(|l| terminal.at(l).iter().all(|&v| v >= -scaled(terminal.at(l))));
            let positive = tree.leaves().any(|l| terminal.at(l).iter().any(|&v| v > tol::LP_REPORT));
            checks.add("terminal value nonnegative", nonneg, "");
            checks.add("terminal value nonzero", positive, "");
        }
        "check-rna" | "check-rnsa" | "find-cps" => {
            let key = if report.command == "find-cps" { "y" } else { "certificate" };
            if r[key].is_null() {
                checks.add("certificate", true, "no price system reported");
                return Ok(());
            }
            let mut model = model_of(report)?;
            if r["recession_model"] == json!(true) {
                model = model.recession_model();
            }
            let strict = report.command != "find-cps" || r["strict"] == json!(true);
            let ps = PriceSystem {
                y: process_from_json(&r[key], model.tree(), &format!("results.{key}"))?,
                strict,
                margin: r["margin"].as_f64().unwrap_or(0.0),
            };
            let issues = ps.verify(&model)?;
            checks.add("price system", issues.is_empty(), issues.join("; "));
        }
        "superhedge" => {
            if r["status"] != json!("optimal") {
                checks.add("certificate", true, "no hedge reported");
                return Ok(());
            }
            let model = model_of(report)?;
            let tree = model.tree();
            let claim_raw = report
                .inputs
                .claim
                .as_ref()
                .ok_or_else(|| CliError::Input("report has no embedded claim".to_string()))?;
            let c = parse_process(claim_raw, "inputs.claim", tree)?;
            let x = process_from_json(&r["hedge"], tree, "results.hedge")?;
            let p = process_from_json(&r["premium"], tree, "results.premium")?;
            check_hedge(&model, &c, &p, &x, checks)?;
            let alpha = r["alpha"].as_f64().unwrap_or(f64::NAN);
            let k = r["numeraire"].as_u64().unwrap_or(0) as usize;
            let premium_ok = (0..tree.len()).all(|n| {
                p.at(n).iter().enumerate().all(|(i, &v)| {
                    let want = if n == 0 && i == k { alpha } else { 0.0 };
                    (v - want).abs() <= scaled(&[want])
                })
            });
            checks.add("premium is alpha in the numeraire at the root", premium_ok, "");
        }
        "dual-bound" => {
            let model = model_of(report)?;
            let tree = model.tree();
            let y = process_from_json(&r["y"], tree, "results.y")?;
            check_dual(tree, &y, &r["normalization"], checks);
        }
        _ => checks.add("certificate", true, "command has no certificate"),
    }
    Ok(())
}

fn check_hedge(
    model: &MarketModel,
    c: &AdaptedVectorProcess,
    p: &AdaptedVectorProcess,
    x: &AdaptedVectorProcess,
    checks: &mut Checks,
) -> Result<(), CliError> {
    let tree = model.tree();
    let sets = halfspaces(model)?;
    let mut outside = Vec::new();
    for n in 0..tree.len() {
        let parent = tree.node(n).parent;
        let z: Vec<f64> = (0..tree.assets())
            .map(|i| x.at(n)[i] - parent.map_or(0.0, |q| x.at(q)[i]) + c.at(n)[i] - p.at(n)[i])
            .collect();
        if !sets[n].contains(&z, scaled(&z)) {
            outside.push(tree.node(n).id);
        }
    }
    checks.add("hedge increments solvent", outside.is_empty(), format!("outside at nodes {outside:?}"));
    let liquidated = tree.leaves().all(|l| x.at(l).iter().all(|&v| v == 0.0));
    checks.add("hedge liquidated at the leaves", liquidated, "");
    Ok(())
}

fn check_dual(tree: &EventTree, y: &AdaptedVectorProcess, normalization: &Value, checks: &mut Checks) {
    let scale = tol::MARTINGALE * (1.0 + y.max_abs());
    let nonneg = y.values().iter().flatten().all(|&v| v >= -scale);
    checks.add("dual variables nonnegative", nonneg, "");
    checks.add("dual variables form a martingale", illiq_core::tree::is_martingale(tree, y, scale), "");
    let normalized = match normalization {
        Value::String(s) if s == "root_simplex" => y.at(0).iter().sum::<f64>() <= 1.0 + scale,
        Value::Object(o) => match o.get("box").and_then(Value::as_f64) {
            Some(m) => y.values().iter().flatten().all(|&v| v <= m * (1.0 + tol::MARTINGALE)),
            None => false,
        },
        _ => false,
    };
    checks.add("normalization", normalized, normalization.to_string());
}
