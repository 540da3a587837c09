//! File formats: graph documents (JSON and cycle-notation text), state
//! documents, and tree scripts.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use num_bigint::BigUint;
use tracegraph::families::{FamilySpec, TreeOperand, TreeScript, TreeStep};
use tracegraph::graph::{ColorSet, ColoredGraph, Vertex};
use tracegraph::perm::{parse_cycle_notation, Perm};
use tracegraph::refstates::{
    NamedState, Slot, WeightFunction, WeightedBlock, WeightedPartition,
};

#[derive(Debug)]
pub struct CliError(pub String);

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for CliError {}

impl From<tracegraph::Error> for CliError {
    fn from(e: tracegraph::Error) -> Self {
        CliError(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

// ---------------------------------------------------------------------------
// Graph documents
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
pub struct GraphDocument {
    #[serde(rename = "D")]
    pub d: usize,
    pub k: usize,
    /// 1-indexed image arrays, one per color.
    pub sigma: Vec<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
}

impl GraphDocument {
    pub fn from_graph(g: &ColoredGraph, name: Option<String>, family: Option<String>) -> Self {
        GraphDocument {
            d: g.d(),
            k: g.k(),
            sigma: g.sigmas().iter().map(|s| s.one_line()).collect(),
            name,
            family,
        }
    }

    pub fn to_graph(&self) -> CliResult<ColoredGraph> {
        if self.sigma.len() != self.d {
            return Err(CliError(format!(
                "document lists {} colors but D = {}",
                self.sigma.len(),
                self.d
            )));
        }
        let mut perms = Vec::new();
        for (c, images) in self.sigma.iter().enumerate() {
            if images.len() != self.k {
                return Err(CliError(format!(
                    "color {}: {} images but k = {}",
                    c + 1,
                    images.len(),
                    self.k
                )));
            }
            let p = Perm::from_images_one_indexed(images)
                .map_err(|e| CliError(format!("color {}: {e}", c + 1)))?;
            perms.push(p);
        }
        Ok(ColoredGraph::new(perms)?)
    }
}

/// Parses either the JSON document or the cycle-notation text form:
/// a `k = N` line followed by `color: (cycles)` lines.
pub fn parse_graph_input(text: &str) -> CliResult<ColoredGraph> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let doc: GraphDocument =
            serde_json::from_str(trimmed).map_err(|e| CliError(format!("bad graph JSON: {e}")))?;
        return doc.to_graph();
    }
    let mut k: Option<usize> = None;
    let mut colors: BTreeMap<usize, String> = BTreeMap::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("k") {
            let rest = rest.trim_start();
            if let Some(value) = rest.strip_prefix('=') {
                k = Some(
                    value
                        .trim()
                        .parse()
                        .map_err(|_| CliError(format!("bad k line: {line:?}")))?,
                );
                continue;
            }
        }
        let (head, tail) = line
            .split_once(':')
            .ok_or_else(|| CliError(format!("expected `color: cycles`, found {line:?}")))?;
        let color: usize = head
            .trim()
            .parse()
            .map_err(|_| CliError(format!("bad color label {head:?}")))?;
        colors.insert(color, tail.trim().to_string());
    }
    let k = k.ok_or_else(|| CliError("missing `k = N` line".into()))?;
    let d = colors.len();
    let mut perms = Vec::new();
    for c in 1..=d {
        let text = colors
            .get(&c)
            .ok_or_else(|| CliError(format!("missing line for color {c}")))?;
        perms.push(
            parse_cycle_notation(k, text)
                .map_err(|e| CliError(format!("color {c}: {e}")))?,
        );
    }
    Ok(ColoredGraph::new(perms)?)
}

// ---------------------------------------------------------------------------
// State documents
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateDocument {
    Weights {
        #[serde(rename = "D")]
        d: usize,
        weights: BTreeMap<String, u64>,
    },
    Named {
        #[serde(rename = "D")]
        d: usize,
        named: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        b: Option<Vec<usize>>,
        #[serde(skip_serializing_if = "Option::is_none")]
        p: Option<usize>,
        #[serde(skip_serializing_if = "Option::is_none")]
        c: Option<usize>,
        #[serde(skip_serializing_if = "Option::is_none")]
        i: Option<usize>,
        #[serde(skip_serializing_if = "Option::is_none")]
        tau: Option<Vec<usize>>,
        /// Block dimension used when a concrete weight function is needed.
        #[serde(skip_serializing_if = "Option::is_none")]
        n: Option<u64>,
    },
    Partition {
        #[serde(rename = "D")]
        d: usize,
        blocks: Vec<BlockDocument>,
    },
}

#[derive(Serialize, Deserialize)]
pub struct BlockDocument {
    /// Members as `[color, copy]` pairs, 1-indexed.
    pub members: Vec<(usize, usize)>,
    pub w: u64,
}

/// The parsed state: always exposes a weight function; named states also
/// keep their tag for scaling conventions.
pub enum ParsedState {
    Weights(WeightFunction),
    Named { state: NamedState, d: usize, n: u64 },
    Partition(WeightedPartition),
}

impl ParsedState {
    pub fn d(&self) -> usize {
        match self {
            ParsedState::Weights(w) => w.d(),
            ParsedState::Named { d, .. } => *d,
            ParsedState::Partition(p) => p.d,
        }
    }

    pub fn weight_function(&self) -> CliResult<WeightFunction> {
        match self {
            ParsedState::Weights(w) => Ok(w.clone()),
            ParsedState::Named { state, d, n } => {
                Ok(state.to_weight_function(*d, &BigUint::from(*n))?)
            }
            ParsedState::Partition(p) => Ok(p.canonical_weights()),
        }
    }

    pub fn named(&self) -> Option<&NamedState> {
        match self {
            ParsedState::Named { state, .. } => Some(state),
            _ => None,
        }
    }
}

pub fn parse_state_input(text: &str) -> CliResult<ParsedState> {
    let doc: StateDocument =
        serde_json::from_str(text).map_err(|e| CliError(format!("bad state JSON: {e}")))?;
    match doc {
        StateDocument::Weights { d, weights } => {
            let mut wf = WeightFunction::ones(d);
            for (key, value) in weights {
                let colors: Vec<usize> = key
                    .split(',')
                    .map(|s| {
                        s.trim()
                            .parse()
                            .map_err(|_| CliError(format!("bad weight key {key:?}")))
                    })
                    .collect::<CliResult<_>>()?;
                let set = ColorSet::from_slice(&colors);
                let current = wf.get(&set);
                wf.set(set, current * BigUint::from(value))?;
            }
            Ok(ParsedState::Weights(wf))
        }
        StateDocument::Named {
            d,
            named,
            b,
            p,
            c,
            i,
            tau,
            n,
        } => {
            let state = match named.as_str() {
                "ghz" => NamedState::Ghz,
                "ghz_b" => NamedState::GhzRestricted {
                    b: ColorSet::from_slice(
                        &b.ok_or_else(|| CliError("ghz_b needs `b`".into()))?,
                    ),
                },
                "ghz_frac" => NamedState::GhzFraction {
                    i: i.ok_or_else(|| CliError("ghz_frac needs `i`".into()))?,
                },
                "cyclic" => NamedState::Cyclic {
                    tau: tau.ok_or_else(|| CliError("cyclic needs `tau`".into()))?,
                },
                "phi_p" | "p_complete" => NamedState::PComplete {
                    p: p.ok_or_else(|| CliError("phi_p needs `p`".into()))?,
                },
                "c_star" => NamedState::CStar {
                    c: c.ok_or_else(|| CliError("c_star needs `c`".into()))?,
                },
                "star_set" => NamedState::StarSet {
                    b: ColorSet::from_slice(
                        &b.ok_or_else(|| CliError("star_set needs `b`".into()))?,
                    ),
                },
                "haar" => NamedState::Haar,
                other => return Err(CliError(format!("unknown state label: {other:?}"))),
            };
            Ok(ParsedState::Named {
                state,
                d,
                n: n.unwrap_or(2),
            })
        }
        StateDocument::Partition { d, blocks } => {
            let blocks = blocks
                .into_iter()
                .map(|b| WeightedBlock {
                    members: b
                        .members
                        .into_iter()
                        .map(|(color, index)| Slot { color, index })
                        .collect(),
                    weight: BigUint::from(b.w),
                })
                .collect();
            Ok(ParsedState::Partition(WeightedPartition::new(d, blocks)?))
        }
    }
}

// ---------------------------------------------------------------------------
// Tree scripts
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
pub struct ScriptDocument {
    pub base: String,
    pub steps: Vec<ScriptStep>,
}

#[derive(Serialize, Deserialize)]
pub struct ScriptStep {
    pub op: String,
    pub with: String,
    #[serde(default)]
    pub color: usize,
    /// 1-indexed white endpoints.
    #[serde(default)]
    pub edge_acc: usize,
    #[serde(default)]
    pub edge_op: usize,
    /// Contraction vertices as e.g. "w3" / "b1".
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertex_acc: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertex_op: Option<String>,
}

fn parse_vertex(text: &str) -> CliResult<Vertex> {
    let (shade, index) = text.split_at(1);
    let index: usize = index
        .parse()
        .map_err(|_| CliError(format!("bad vertex {text:?}")))?;
    if index == 0 {
        return Err(CliError("vertices are 1-indexed".into()));
    }
    match shade {
        "w" => Ok(Vertex::White(index - 1)),
        "b" => Ok(Vertex::Black(index - 1)),
        _ => Err(CliError(format!("bad vertex shade in {text:?}"))),
    }
}

fn parse_operand(text: &str) -> CliResult<TreeOperand> {
    let spec: FamilySpec = text
        .parse()
        .map_err(|e: tracegraph::Error| CliError(e.to_string()))?;
    Ok(TreeOperand::Family(spec))
}

pub fn parse_script(text: &str) -> CliResult<TreeScript> {
    let doc: ScriptDocument =
        serde_json::from_str(text).map_err(|e| CliError(format!("bad script JSON: {e}")))?;
    let base = parse_operand(&doc.base)?;
    let mut steps = Vec::new();
    for (i, step) in doc.steps.iter().enumerate() {
        let operand = parse_operand(&step.with)
            .map_err(|e| CliError(format!("step {i}: {e}")))?;
        let parsed = match step.op.as_str() {
            "union" => TreeStep::Union { operand },
            "flip" => TreeStep::Flip {
                operand,
                color: step.color,
                edge_acc: step
                    .edge_acc
                    .checked_sub(1)
                    .ok_or_else(|| CliError(format!("step {i}: edges are 1-indexed")))?,
                edge_op: step
                    .edge_op
                    .checked_sub(1)
                    .ok_or_else(|| CliError(format!("step {i}: edges are 1-indexed")))?,
            },
            "contract" => TreeStep::Contract {
                operand,
                vertex_acc: parse_vertex(
                    step.vertex_acc
                        .as_deref()
                        .ok_or_else(|| CliError(format!("step {i}: missing vertex_acc")))?,
                )?,
                vertex_op: parse_vertex(
                    step.vertex_op
                        .as_deref()
                        .ok_or_else(|| CliError(format!("step {i}: missing vertex_op")))?,
                )?,
            },
            other => return Err(CliError(format!("step {i}: unknown op {other:?}"))),
        };
        steps.push(parsed);
    }
    Ok(TreeScript { base, steps })
}
