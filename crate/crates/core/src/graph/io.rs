//! `.gg.json` reading and canonical writing.
//!
//! Canonical form is compact UTF-8 JSON with sorted object keys, nodes sorted
//! by id and edges sorted by `(owner, kind, payload)`.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::Deserialize;

use super::{validate, GameGraph, GraphEdge, GraphError, Severity, SpriteNode};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    name: String,
    nodes: Vec<SpriteNode>,
    edges: Vec<GraphEdge>,
}

fn parse_error(e: serde_json::Error) -> GraphError {
    GraphError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// Parses a graph without checking its invariants.
pub fn load_unchecked(bytes: &[u8]) -> Result<GameGraph, GraphError> {
    let doc: Document = serde_json::from_slice(bytes).map_err(parse_error)?;
    Ok(GameGraph::new(doc.name, doc.nodes, doc.edges))
}

/// Parses and validates a graph. Rule-pairing warnings are logged and do not
/// fail the load.
pub fn from_json_str(text: &str) -> Result<GameGraph, GraphError> {
    checked(load_unchecked(text.as_bytes())?)
}

/// Reads a graph from a file path or any byte stream.
pub fn load(mut source: impl Read) -> Result<GameGraph, GraphError> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    checked(load_unchecked(&bytes)?)
}

pub fn load_file(path: impl AsRef<Path>) -> Result<GameGraph, GraphError> {
    load(fs::File::open(path)?)
}

fn checked(graph: GameGraph) -> Result<GameGraph, GraphError> {
    let (errors, warnings): (Vec<_>, Vec<_>) = validate(&graph)
        .into_iter()
        .partition(|v| v.severity() == Severity::Error);
    for w in &warnings {
        log::warn!("{}: {w}", graph.name());
    }
    if errors.is_empty() {
        Ok(graph)
    } else {
        Err(GraphError::Validation(errors))
    }
}

pub fn to_canonical_json(graph: &GameGraph) -> String {
    // Going through `Value` sorts every object's keys.
    let value = serde_json::to_value(graph).expect("graphs always serialize");
    serde_json::to_string(&value).expect("values always serialize")
}

pub fn save(graph: &GameGraph, mut sink: impl Write) -> Result<(), GraphError> {
    sink.write_all(to_canonical_json(graph).as_bytes())?;
    sink.flush()?;
    Ok(())
}

pub fn save_file(graph: &GameGraph, path: impl AsRef<Path>) -> Result<(), GraphError> {
    save(graph, fs::File::create(path)?)
}
