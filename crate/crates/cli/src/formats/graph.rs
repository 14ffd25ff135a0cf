//! Graph exports: DOT, GraphML, and a versioned JSON document that
//! round-trips losslessly.

use std::fmt::Write as _;

use spillover_core::graph::{NodeRole, SpilloverGraph};

use crate::error::{CliError, Result};
use crate::io::format_float;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphFormat {
    Dot,
    Graphml,
    Json,
}

impl std::str::FromStr for GraphFormat {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dot" => Ok(GraphFormat::Dot),
            "graphml" => Ok(GraphFormat::Graphml),
            "json" => Ok(GraphFormat::Json),
            other => Err(CliError::config(format!(
                "unsupported graph format \"{other}\" (expected dot, graphml, or json)"
            ))),
        }
    }
}

impl GraphFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            GraphFormat::Dot => "dot",
            GraphFormat::Graphml => "graphml",
            GraphFormat::Json => "json",
        }
    }
}

pub fn export(graph: &SpilloverGraph, format: GraphFormat) -> Result<Vec<u8>> {
    Ok(match format {
        GraphFormat::Dot => to_dot(graph).into_bytes(),
        GraphFormat::Graphml => to_graphml(graph).into_bytes(),
        GraphFormat::Json => to_json(graph)?.into_bytes(),
    })
}

fn quote_dot(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn role_str(role: NodeRole) -> &'static str {
    match role {
        NodeRole::Transmitter => "transmitter",
        NodeRole::Receiver => "receiver",
    }
}

/// DOT digraph with node and edge attributes.
pub fn to_dot(graph: &SpilloverGraph) -> String {
    let mut out = String::from("digraph spillover {\n");
    for node in &graph.nodes {
        let mut attrs = vec![
            format!("net={}", quote_dot(&format_float(node.net))),
            format!("role={}", quote_dot(role_str(node.role))),
            format!("size={}", quote_dot(&format_float(node.size))),
        ];
        if let Some([lat, lon]) = node.coordinates {
            attrs.push(format!(
                "pos={}",
                quote_dot(&format!("{},{}", format_float(lon), format_float(lat)))
            ));
        }
        let _ = writeln!(out, "  {} [{}];", quote_dot(&node.label), attrs.join(" "));
    }
    for edge in &graph.edges {
        let mut attrs = vec![format!("weight={}", quote_dot(&format_float(edge.weight)))];
        if edge.emphasized {
            attrs.push("emphasized=\"true\"".to_string());
        }
        let _ = writeln!(
            out,
            "  {} -> {} [{}];",
            quote_dot(&edge.source),
            quote_dot(&edge.target),
            attrs.join(" ")
        );
    }
    out.push_str("}\n");
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// GraphML with typed attribute keys.
pub fn to_graphml(graph: &SpilloverGraph) -> String {
    let mut out = String::from(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n\
         \x20 <key id=\"net\" for=\"node\" attr.name=\"net\" attr.type=\"double\"/>\n\
         \x20 <key id=\"role\" for=\"node\" attr.name=\"role\" attr.type=\"string\"/>\n\
         \x20 <key id=\"size\" for=\"node\" attr.name=\"size\" attr.type=\"double\"/>\n\
         \x20 <key id=\"lat\" for=\"node\" attr.name=\"latitude\" attr.type=\"double\"/>\n\
         \x20 <key id=\"lon\" for=\"node\" attr.name=\"longitude\" attr.type=\"double\"/>\n\
         \x20 <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n\
         \x20 <key id=\"emphasized\" for=\"edge\" attr.name=\"emphasized\" attr.type=\"boolean\"/>\n\
         \x20 <graph id=\"spillover\" edgedefault=\"directed\">\n",
    );
    for node in &graph.nodes {
        let _ = writeln!(out, "    <node id=\"{}\">", xml_escape(&node.label));
        let _ = writeln!(out, "      <data key=\"net\">{}</data>", format_float(node.net));
        let _ = writeln!(out, "      <data key=\"role\">{}</data>", role_str(node.role));
        let _ = writeln!(out, "      <data key=\"size\">{}</data>", format_float(node.size));
        if let Some([lat, lon]) = node.coordinates {
            let _ = writeln!(out, "      <data key=\"lat\">{}</data>", format_float(lat));
            let _ = writeln!(out, "      <data key=\"lon\">{}</data>", format_float(lon));
        }
        out.push_str("    </node>\n");
    }
    for edge in &graph.edges {
        let _ = writeln!(
            out,
            "    <edge source=\"{}\" target=\"{}\">",
            xml_escape(&edge.source),
            xml_escape(&edge.target)
        );
        let _ = writeln!(out, "      <data key=\"weight\">{}</data>", format_float(edge.weight));
        if edge.emphasized {
            out.push_str("      <data key=\"emphasized\">true</data>\n");
        }
        out.push_str("    </edge>\n");
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}

/// Versioned JSON envelope for the graph.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GraphDocument {
    pub format_version: u32,
    #[serde(flatten)]
    pub graph: SpilloverGraph,
}

pub const GRAPH_FORMAT_VERSION: u32 = 1;

pub fn to_json(graph: &SpilloverGraph) -> Result<String> {
    let doc = GraphDocument { format_version: GRAPH_FORMAT_VERSION, graph: graph.clone() };
    let mut text = serde_json::to_string_pretty(&doc)
        .map_err(|e| CliError::data(format!("graph serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

pub fn from_json(bytes: &[u8]) -> Result<SpilloverGraph> {
    let doc: GraphDocument = serde_json::from_slice(bytes)
        .map_err(|e| CliError::data(format!("cannot parse graph document: {e}")))?;
    if doc.format_version != GRAPH_FORMAT_VERSION {
        return Err(CliError::data(format!(
            "unsupported graph document version {}",
            doc.format_version
        )));
    }
    Ok(doc.graph)
}
