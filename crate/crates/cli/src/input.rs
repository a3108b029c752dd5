//! JSON input files: trees, market models and node-indexed claims.
//!
//! Model file layout:
//!
//! ```json
//! {
//!   "d": 2,
//!   "tree": {"nodes": [{"id": 0, "parent": null, "time": 0, "p": 1}, ...]},
//!   "model": {"kind": "bid_ask", "per_node": {"0": [[1, "6/5"], ["5/4", 1]], "*": ...}}
//! }
//! ```
//!
//! `per_node` maps node ids to node data; the key `"*"` supplies data for
//! every node without its own entry. Node data by kind:
//!
//! - `bid_ask`: `d × d` matrix `π`;
//! - `cost_process`: list of pieces `{"a": [..d], "b": x}`;
//! - `currency_costs`: `d × d` matrix of piece lists
//!   `[{"slope": s, "intercept": c}, ...]` (empty list: no exchange);
//! - `explicit_polyhedra`: `{"a": [[..]], "b": [..], "aux": k}` with rows over
//!   `d + k` columns (`aux` defaults to 0).
//!
//! Numbers are JSON numbers or strings holding integers, decimals or
//! fractions `"p/q"`. Claim files map node ids to `d`-vectors; nodes without
//! an entry get the zero vector.

use std::path::Path;

use illiq_core::tree::validate_tree;
use illiq_core::{
    AdaptedVectorProcess, BidAskSpec, CostPiece, CostProcessSpec, CurrencyIlliquiditySpec, EventTree,
    HPolyhedron, MarketModel, RawNode, ScalarPiece, SolvencySet,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde_json::{Map, Value};

use crate::error::CliError;

/// Number with its exact rational value.
#[derive(Debug, Clone, PartialEq)]
pub struct Num {
    pub value: f64,
    pub exact: BigRational,
}

fn parse_exact(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let scale = BigInt::from(10u32).pow(frac.len() as u32);
    Some(BigRational::new(digits * sign, scale))
}

/// Field-path aware reader over a parsed JSON document.
struct Reader<'a> {
    file: &'a str,
}

impl Reader<'_> {
    fn err(&self, path: &str, message: impl std::fmt::Display) -> CliError {
        CliError::field(self.file, path, message)
    }

    fn num(&self, v: &Value, path: &str) -> Result<Num, CliError> {
        let num = match v {
            Value::Number(n) => {
                let value = n
                    .as_f64()
                    .ok_or_else(|| self.err(path, "number out of range"))?;
                let exact = match (n.as_i64(), n.as_u64()) {
                    (Some(i), _) => BigRational::from_integer(i.into()),
                    (_, Some(u)) => BigRational::from_integer(u.into()),
                    _ => BigRational::from_float(value).ok_or_else(|| self.err(path, "non-finite number"))?,
                };
                Num { value, exact }
            }
            Value::String(s) => {
                let exact = parse_exact(s)
                    .ok_or_else(|| self.err(path, format!("cannot parse {s:?} as a number or fraction p/q")))?;
                let value = exact.to_f64().unwrap_or(f64::NAN);
                Num { value, exact }
            }
            other => return Err(self.err(path, format!("expected a number, got {}", kind(other)))),
        };
        if !num.value.is_finite() {
            return Err(self.err(path, "number is not finite in double precision"));
        }
        Ok(num)
    }

    fn array<'v>(&self, v: &'v Value, path: &str) -> Result<&'v Vec<Value>, CliError> {
        v.as_array()
            .ok_or_else(|| self.err(path, format!("expected an array, got {}", kind(v))))
    }

    fn object<'v>(&self, v: &'v Value, path: &str) -> Result<&'v Map<String, Value>, CliError> {
        v.as_object()
            .ok_or_else(|| self.err(path, format!("expected an object, got {}", kind(v))))
    }

    fn get<'v>(&self, obj: &'v Map<String, Value>, key: &str, path: &str) -> Result<&'v Value, CliError> {
        obj.get(key)
            .ok_or_else(|| self.err(path, format!("missing field `{key}`")))
    }

    fn uint(&self, v: &Value, path: &str) -> Result<u64, CliError> {
        v.as_u64()
            .ok_or_else(|| self.err(path, format!("expected a nonnegative integer, got {v}")))
    }

    fn vector(&self, v: &Value, len: usize, path: &str) -> Result<Vec<Num>, CliError> {
        let items = self.array(v, path)?;
        if items.len() != len {
            return Err(self.err(path, format!("dimension mismatch: expected {len} entries, got {}", items.len())));
        }
        items
            .iter()
            .enumerate()
            .map(|(i, x)| self.num(x, &format!("{path}[{i}]")))
            .collect()
    }

    fn matrix(&self, v: &Value, rows: usize, cols: usize, path: &str) -> Result<Vec<Vec<Num>>, CliError> {
        let items = self.array(v, path)?;
        if items.len() != rows {
            return Err(self.err(path, format!("dimension mismatch: expected {rows} rows, got {}", items.len())));
        }
        items
            .iter()
            .enumerate()
            .map(|(i, r)| self.vector(r, cols, &format!("{path}[{i}]")))
            .collect()
    }
}

fn kind(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

fn values(v: Vec<Num>) -> Vec<f64> {
    v.into_iter().map(|n| n.value).collect()
}

pub fn read_json(path: &Path) -> Result<(String, Value), CliError> {
    let file = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{file}: {e}")))?;
    let value = parse_json(&text, &file)?;
    Ok((file, value))
}

pub fn parse_json(text: &str, file: &str) -> Result<Value, CliError> {
    serde_json::from_str(text).map_err(|e| {
        CliError::Input(format!("{file}:{}:{}: malformed JSON: {e}", e.line(), e.column()))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    BidAsk,
    CostProcess,
    CurrencyCosts,
    ExplicitPolyhedra,
}

impl ModelKind {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "bid_ask" => ModelKind::BidAsk,
            "cost_process" => ModelKind::CostProcess,
            "currency_costs" => ModelKind::CurrencyCosts,
            "explicit_polyhedra" => ModelKind::ExplicitPolyhedra,
            _ => return None,
        })
    }
}

/// A parsed model file.
#[derive(Debug, Clone)]
pub struct ModelInput {
    pub model: MarketModel,
    pub kind: ModelKind,
    /// Exact bid-ask matrices per node, for `bid_ask` models.
    pub exact_bid_ask: Option<Vec<Vec<Vec<BigRational>>>>,
    /// The document as read.
    pub raw: Value,
}

impl ModelInput {
    pub fn tree(&self) -> &EventTree {
        self.model.tree()
    }
}

pub fn load_model(path: &Path) -> Result<ModelInput, CliError> {
    let (file, value) = read_json(path)?;
    parse_model(value, &file)
}

pub fn parse_model(raw: Value, file: &str) -> Result<ModelInput, CliError> {
    let r = Reader { file };
    let top = r.object(&raw, "$")?;
    let d = r.uint(r.get(top, "d", "$")?, "d")? as usize;
    if d == 0 {
        return Err(r.err("d", "asset count must be positive"));
    }
    let tree = parse_tree(&r, r.get(top, "tree", "$")?, d)?;
    let model_obj = r.object(r.get(top, "model", "$")?, "model")?;
    let kind_str = r.get(model_obj, "kind", "model")?;
    let kind = kind_str
        .as_str()
        .and_then(ModelKind::parse)
        .ok_or_else(|| {
            r.err(
                "model.kind",
                format!("expected one of bid_ask, cost_process, currency_costs, explicit_polyhedra, got {kind_str}"),
            )
        })?;
    let per_node = r.object(r.get(model_obj, "per_node", "model")?, "model.per_node")?;
    for key in per_node.keys() {
        let known = key == "*" || key.parse::<u64>().ok().and_then(|id| tree.index_of(id)).is_some();
        if !known {
            return Err(r.err("model.per_node", format!("key {key:?} is not a node id of the tree")));
        }
    }
    let entries: Vec<(String, &Value)> = tree
        .nodes()
        .iter()
        .map(|n| {
            let key = n.id.to_string();
            match per_node.get(&key) {
                Some(v) => Ok((format!("model.per_node.{key}"), v)),
                None => per_node
                    .get("*")
                    .map(|v| ("model.per_node.*".to_string(), v))
                    .ok_or_else(|| r.err("model.per_node", format!("no entry for node {key} and no \"*\" default"))),
            }
        })
        .collect::<Result<_, _>>()?;

    let mut exact_bid_ask = None;
    let model = match kind {
        ModelKind::BidAsk => {
            let mats: Vec<Vec<Vec<Num>>> = entries
                .iter()
                .map(|(p, v)| r.matrix(v, d, d, p))
                .collect::<Result<_, _>>()?;
            exact_bid_ask = Some(
                mats.iter()
                    .map(|m| m.iter().map(|row| row.iter().map(|x| x.exact.clone()).collect()).collect())
                    .collect(),
            );
            let matrices = mats.into_iter().map(|m| m.into_iter().map(values).collect()).collect();
            MarketModel::from_bid_ask(tree, &BidAskSpec { matrices })?
        }
        ModelKind::CostProcess => {
            let pieces = entries
                .iter()
                .map(|(p, v)| {
                    r.array(v, p)?
                        .iter()
                        .enumerate()
                        .map(|(k, piece)| {
                            let path = format!("{p}[{k}]");
                            let obj = r.object(piece, &path)?;
                            Ok(CostPiece {
                                a: values(r.vector(r.get(obj, "a", &path)?, d, &format!("{path}.a"))?),
                                b: r.num(r.get(obj, "b", &path)?, &format!("{path}.b"))?.value,
                            })
                        })
                        .collect::<Result<Vec<_>, CliError>>()
                })
                .collect::<Result<_, _>>()?;
            MarketModel::from_cost_process(tree, &CostProcessSpec { pieces })?
        }
        ModelKind::CurrencyCosts => {
            let costs = entries
                .iter()
                .map(|(p, v)| parse_currency_node(&r, v, d, p))
                .collect::<Result<_, _>>()?;
            MarketModel::from_currency_costs(tree, &CurrencyIlliquiditySpec { costs })?
        }
        ModelKind::ExplicitPolyhedra => {
            let sets = entries
                .iter()
                .map(|(p, v)| parse_polyhedron(&r, v, d, p))
                .collect::<Result<_, _>>()?;
            MarketModel::from_sets(tree, sets)?
        }
    };
    Ok(ModelInput {
        model,
        kind,
        exact_bid_ask,
        raw,
    })
}

fn parse_tree(r: &Reader, v: &Value, d: usize) -> Result<EventTree, CliError> {
    let obj = r.object(v, "tree")?;
    let nodes = r.array(r.get(obj, "nodes", "tree")?, "tree.nodes")?;
    let mut raw = Vec::with_capacity(nodes.len());
    for (i, node) in nodes.iter().enumerate() {
        let path = format!("tree.nodes[{i}]");
        let o = r.object(node, &path)?;
        let id = r.uint(r.get(o, "id", &path)?, &format!("{path}.id"))?;
        let parent = match o.get("parent") {
            None | Some(Value::Null) => None,
            Some(p) => Some(r.uint(p, &format!("{path}.parent"))?),
        };
        let time = r.uint(r.get(o, "time", &path)?, &format!("{path}.time"))? as usize;
        let p = r.num(r.get(o, "p", &path)?, &format!("{path}.p"))?.value;
        raw.push(RawNode::new(id, parent, time, p));
    }
    validate_tree(&raw, d).map_err(|e| r.err("tree.nodes", e))
}

fn parse_currency_node(r: &Reader, v: &Value, d: usize, path: &str) -> Result<Vec<Vec<Vec<ScalarPiece>>>, CliError> {
    let rows = r.array(v, path)?;
    if rows.len() != d {
        return Err(r.err(path, format!("dimension mismatch: expected {d} rows, got {}", rows.len())));
    }
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            let rp = format!("{path}[{i}]");
            let cells = r.array(row, &rp)?;
            if cells.len() != d {
                return Err(r.err(&rp, format!("dimension mismatch: expected {d} entries, got {}", cells.len())));
            }
            cells
                .iter()
                .enumerate()
                .map(|(j, cell)| {
                    let cp = format!("{rp}[{j}]");
                    r.array(cell, &cp)?
                        .iter()
                        .enumerate()
                        .map(|(k, piece)| {
                            let pp = format!("{cp}[{k}]");
                            let o = r.object(piece, &pp)?;
                            Ok(ScalarPiece {
                                slope: r.num(r.get(o, "slope", &pp)?, &format!("{pp}.slope"))?.value,
                                intercept: r.num(r.get(o, "intercept", &pp)?, &format!("{pp}.intercept"))?.value,
                            })
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

fn parse_polyhedron(r: &Reader, v: &Value, d: usize, path: &str) -> Result<SolvencySet, CliError> {
    let o = r.object(v, path)?;
    let aux = match o.get("aux") {
        None => 0,
        Some(a) => r.uint(a, &format!("{path}.aux"))? as usize,
    };
    let cols = d + aux;
    let rows = r.array(r.get(o, "a", path)?, &format!("{path}.a"))?;
    let a: Vec<Vec<f64>> = rows
        .iter()
        .enumerate()
        .map(|(i, row)| r.vector(row, cols, &format!("{path}.a[{i}]")).map(values))
        .collect::<Result<_, _>>()?;
    let b = values(r.vector(r.get(o, "b", path)?, a.len(), &format!("{path}.b"))?);
    let poly = HPolyhedron::new(cols, a, b).map_err(|e| r.err(path, e))?;
    if aux == 0 {
        Ok(SolvencySet::from_halfspaces(poly))
    } else {
        SolvencySet::lifted(d, poly).map_err(|e| r.err(path, e))
    }
}

/// Node-indexed process from `{node_id: [v_1..v_d]}`; absent nodes are zero.
pub fn parse_process(raw: &Value, file: &str, tree: &EventTree) -> Result<AdaptedVectorProcess, CliError> {
    let r = Reader { file };
    let obj = r.object(raw, "$")?;
    let mut p = AdaptedVectorProcess::zeros(tree);
    for (key, v) in obj {
        let index = key
            .parse::<u64>()
            .ok()
            .and_then(|id| tree.index_of(id))
            .ok_or_else(|| r.err(key, "not a node id of the tree"))?;
        let values = values(r.vector(v, tree.assets(), key)?);
        p.at_mut(index).copy_from_slice(&values);
    }
    Ok(p)
}

pub fn load_process(path: &Path, tree: &EventTree) -> Result<(AdaptedVectorProcess, Value), CliError> {
    let (file, value) = read_json(path)?;
    let p = parse_process(&value, &file, tree)?;
    Ok((p, value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn binomial(per_node: Value) -> Value {
        json!({
            "d": 2,
            "tree": {"nodes": [
                {"id": 0, "parent": null, "time": 0, "p": 1},
                {"id": 1, "parent": 0, "time": 1, "p": "1/2"},
                {"id": 2, "parent": 0, "time": 1, "p": 0.5}
            ]},
            "model": {"kind": "explicit_polyhedra", "per_node": per_node}
        })
    }

    #[test]
    fn exact_numbers() {
        let half = BigRational::new(1.into(), 2.into());
        assert_eq!(parse_exact("1/2"), Some(half.clone()));
        assert_eq!(parse_exact("0.5"), Some(half));
        assert_eq!(parse_exact("-3"), Some(BigRational::from_integer((-3).into())));
        assert_eq!(parse_exact("1/0"), None);
        assert_eq!(parse_exact("abc"), None);
        assert_eq!(parse_exact("."), None);
    }

    #[test]
    fn explicit_model_with_default_entry() {
        let doc = binomial(json!({
            "0": {"a": [[1, 1]], "b": [0]},
            "1": {"a": [[1, 2]], "b": [0]},
            "*": {"a": [[1, "1/2"]], "b": [0]}
        }));
        let m = parse_model(doc, "m.json").unwrap();
        assert_eq!(m.kind, ModelKind::ExplicitPolyhedra);
        assert_eq!(m.model.set(2).poly().a, vec![vec![1.0, 0.5]]);
    }

    #[test]
    fn diagnostics_name_the_field() {
        let doc = binomial(json!({"*": {"a": [[1, 1, 1]], "b": [0]}}));
        let e = parse_model(doc, "m.json").unwrap_err().to_string();
        assert!(e.contains("model.per_node.*.a[0]") && e.contains("dimension mismatch"), "{e}");

        let mut doc = binomial(json!({"*": {"a": [[1, 1]], "b": [0]}}));
        doc["tree"]["nodes"][2]["p"] = json!(0.4);
        let e = parse_model(doc, "m.json").unwrap_err().to_string();
        assert!(e.contains("child-probability sum"), "{e}");

        let e = parse_json("{\n  \"d\": 2,\n  oops\n}", "m.json").unwrap_err().to_string();
        assert!(e.starts_with("m.json:3:"), "{e}");

        let doc = binomial(json!({"7": {"a": [[1, 1]], "b": [0]}}));
        let e = parse_model(doc, "m.json").unwrap_err().to_string();
        assert!(e.contains("\"7\""), "{e}");
    }

    #[test]
    fn claims_default_to_zero() {
        let doc = binomial(json!({"*": {"a": [[1, 1]], "b": [0]}}));
        let m = parse_model(doc, "m.json").unwrap();
        let c = parse_process(&json!({"1": [1, 0]}), "c.json", m.tree()).unwrap();
        assert_eq!(c.at(1), &[1.0, 0.0]);
        assert_eq!(c.at(2), &[0.0, 0.0]);
        assert!(parse_process(&json!({"9": [1, 0]}), "c.json", m.tree()).is_err());
    }
}
