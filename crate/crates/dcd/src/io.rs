//! Text and JSON formats.
//!
//! * Edge list: UTF-8, one edge per line as two whitespace-separated
//!   0-based node ids. Lines starting with `#` are comments, except that a
//!   `# nodes: N` header fixes the node count (otherwise it is one past the
//!   largest id).
//! * Labels: one integer per line in node order. Written 1-based; any
//!   integers are accepted on input and only the partition they induce is
//!   kept.
//! * Reals (degree parameters): one number per line.
//! * Model spec and reports: JSON.

use std::fs;
use std::path::Path;

use dcd_core::generators::{BlockModel, DegreeLaw, SimulationKind};
use dcd_core::pipeline::DetectionReport;
use dcd_core::{Graph, Labeling, Matrix};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn parse_error(source: &str, line: usize, msg: impl Into<String>) -> CliError {
    CliError::Parse { path: source.to_string(), line, msg: msg.into() }
}

// Content lines with their 1-based numbers; blank and `#` lines dropped.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn node_header(line: &str) -> Option<&str> {
    let rest = line.strip_prefix('#')?.trim_start();
    let (key, value) = rest.split_once(':')?;
    key.trim().eq_ignore_ascii_case("nodes").then(|| value.trim())
}

/// Parses an edge list; `source` names the input in error messages.
pub fn parse_edge_list(text: &str, source: &str) -> Result<Graph> {
    let mut declared = None;
    for (i, line) in text.lines().enumerate() {
        if let Some(value) = node_header(line.trim()) {
            let n = value.parse::<usize>().map_err(|_| parse_error(source, i + 1, format!("bad node count `{value}`")))?;
            if declared.replace(n).is_some() {
                return Err(parse_error(source, i + 1, "repeated `# nodes:` header"));
            }
        }
    }
    let mut edges = Vec::new();
    let mut largest = None;
    for (number, line) in content_lines(text) {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(parse_error(source, number, format!("expected two node ids, found {} fields", fields.len())));
        }
        let id = |s: &str| s.parse::<usize>().map_err(|_| parse_error(source, number, format!("bad node id `{s}`")));
        let (a, b) = (id(fields[0])?, id(fields[1])?);
        if a == b {
            return Err(parse_error(source, number, format!("self-loop on node {a}")));
        }
        if let Some(n) = declared {
            if a.max(b) >= n {
                return Err(parse_error(source, number, format!("node id {} not below declared count {n}", a.max(b))));
            }
        }
        largest = largest.max(Some(a.max(b)));
        edges.push((a, b));
    }
    let n = declared.unwrap_or(largest.map_or(0, |m| m + 1));
    Graph::from_edges(n, &edges).map_err(|e| parse_error(source, 0, e.to_string()))
}

/// Writes the `# nodes:` header and every edge once as `i j` with `i < j`.
pub fn format_edge_list(g: &Graph) -> String {
    let mut out = format!("# nodes: {}\n# edges: {}\n", g.node_count(), g.edge_count());
    for (i, j) in g.edges() {
        out.push_str(&format!("{i} {j}\n"));
    }
    out
}

pub fn parse_labels(text: &str, source: &str) -> Result<Labeling> {
    let raw = content_lines(text)
        .map(|(number, line)| line.parse::<i64>().map_err(|_| parse_error(source, number, format!("bad label `{line}`"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(Labeling::from_raw(&raw))
}

/// One 1-based label per line.
pub fn format_labels(labels: &Labeling) -> String {
    labels.as_slice().iter().map(|l| format!("{}\n", l + 1)).collect()
}

pub fn parse_reals(text: &str, source: &str) -> Result<Vec<f64>> {
    content_lines(text)
        .map(|(number, line)| line.parse::<f64>().map_err(|_| parse_error(source, number, format!("bad number `{line}`"))))
        .collect()
}

pub fn format_reals(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v}\n")).collect()
}

/// Degree law in a model spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeLawSpec {
    pub values: Vec<f64>,
    pub probs: Vec<f64>,
}

/// JSON form of a grouped block model. `group_of` is 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: SimulationKind,
    pub b: Vec<Vec<f64>>,
    pub pi: Vec<f64>,
    pub group_of: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree_law: Option<DegreeLawSpec>,
    /// Block matrices drawn before one satisfied the grouping condition.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub draws: Option<usize>,
}

impl ModelSpec {
    pub fn from_model(kind: SimulationKind, model: &BlockModel, law: Option<&DegreeLaw>, draws: Option<usize>) -> Self {
        ModelSpec {
            kind,
            b: model.probs().to_rows(),
            pi: model.pi().to_vec(),
            group_of: model.group_of().iter().map(|g| g + 1).collect(),
            degree_law: law.map(|l| DegreeLawSpec { values: l.values().to_vec(), probs: l.probs().to_vec() }),
            draws,
        }
    }

    /// Validates the spec; a degree-corrected spec without a law uses
    /// constant degrees.
    pub fn to_model(&self) -> Result<(BlockModel, Option<DegreeLaw>)> {
        let k = self.b.len();
        if self.b.iter().any(|row| row.len() != k) {
            return Err(CliError::Usage(format!("model: block matrix must be {k}x{k}")));
        }
        if self.group_of.contains(&0) {
            return Err(CliError::Usage("model: group_of is 1-based".into()));
        }
        let group_of = self.group_of.iter().map(|g| g - 1).collect();
        let model = BlockModel::new(Matrix::from_rows(&self.b), self.pi.clone(), group_of)?;
        let law = match (self.kind, &self.degree_law) {
            (SimulationKind::Sbm, None) => None,
            (SimulationKind::Sbm, Some(_)) => return Err(CliError::Usage("model: degree_law needs kind \"dcsbm\"".into())),
            (SimulationKind::Dcsbm, None) => Some(DegreeLaw::constant()),
            (SimulationKind::Dcsbm, Some(l)) => Some(DegreeLaw::new(l.values.clone(), l.probs.clone())?),
        };
        Ok((model, law))
    }
}

pub fn parse_model_spec(text: &str, source: &str) -> Result<ModelSpec> {
    serde_json::from_str(text).map_err(|e| parse_error(source, e.line(), e.to_string()))
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("in-memory JSON serialization");
    s.push('\n');
    s
}

/// Report as pretty JSON. Without timings every wall-clock field is
/// dropped, so the output depends only on the input and the seed.
pub fn report_json(report: &DetectionReport, timings: bool) -> String {
    let mut value = serde_json::to_value(report).expect("in-memory JSON serialization");
    if !timings {
        strip_timings(&mut value);
    }
    to_json(&value)
}

fn strip_timings(value: &mut serde_json::Value) {
    if let Some(obj) = value.as_object_mut() {
        obj.remove("timings");
        if let Some(groups) = obj.get_mut("group_results").and_then(|g| g.as_array_mut()) {
            for g in groups.iter_mut().filter_map(|g| g.as_object_mut()) {
                g.remove("selection_ms");
                g.remove("detection_ms");
            }
        }
    }
}

/// The labelings of a report, as read back by `eval`.
#[derive(Debug, Deserialize)]
pub struct ReportLabels {
    pub communities: Labeling,
    pub groups: Labeling,
}

pub fn parse_report_labels(text: &str, source: &str) -> Result<ReportLabels> {
    let r: ReportLabels = serde_json::from_str(text).map_err(|e| parse_error(source, e.line(), e.to_string()))?;
    // Deserialization bypasses the range check.
    let check = |l: &Labeling| Labeling::new(l.as_slice().to_vec(), l.count()).map_err(|e| parse_error(source, 0, e.to_string()));
    Ok(ReportLabels { communities: check(&r.communities)?, groups: check(&r.groups)? })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_list_round_trip() {
        let g = Graph::from_edges(5, &[(0, 1), (3, 1), (2, 3)]).unwrap();
        let text = format_edge_list(&g);
        assert_eq!(text, "# nodes: 5\n# edges: 3\n0 1\n1 3\n2 3\n");
        assert_eq!(parse_edge_list(&text, "t").unwrap(), g);
    }

    #[test]
    fn edge_list_without_header_and_with_comments() {
        let g = parse_edge_list("# a comment\n\n0 2\n  2 1 \n#1 9\n", "t").unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(parse_edge_list("", "t").unwrap().node_count(), 0);
    }

    #[test]
    fn edge_list_errors_carry_line_numbers() {
        let line = |text: &str| match parse_edge_list(text, "t").unwrap_err() {
            CliError::Parse { line, .. } => line,
            e => panic!("{e}"),
        };
        assert_eq!(line("0 1\n1 x\n"), 2);
        assert_eq!(line("0 1\n\n2 2\n"), 3);
        assert_eq!(line("0 1 5\n"), 1);
        assert_eq!(line("# nodes: 3\n0 1\n1 3\n"), 3);
        assert_eq!(line("# nodes: many\n"), 1);
    }

    #[test]
    fn labels_are_written_one_based() {
        let l = Labeling::from_raw(&[7, 7, 3]);
        assert_eq!(format_labels(&l), "1\n1\n2\n");
        assert!(parse_labels(&format_labels(&l), "t").unwrap().same_partition(&l));
        assert!(matches!(parse_labels("1\n-\n", "t"), Err(CliError::Parse { line: 2, .. })));
    }

    #[test]
    fn model_spec_round_trip() {
        let b = Matrix::from_rows(&[[0.9, 0.1], [0.1, 0.8]]);
        let model = BlockModel::grouped_uniform(b, &[1, 1]).unwrap();
        let law = DegreeLaw::simulation_default();
        let spec = ModelSpec::from_model(SimulationKind::Dcsbm, &model, Some(&law), Some(3));
        let parsed = parse_model_spec(&to_json(&spec), "t").unwrap();
        assert_eq!(parsed, spec);
        let (m, l) = parsed.to_model().unwrap();
        assert_eq!(m, model);
        assert_eq!(l.unwrap().values(), law.values());
    }

    #[test]
    fn model_spec_rejects_bad_input() {
        let spec = ModelSpec { kind: SimulationKind::Sbm, b: vec![vec![0.5]], pi: vec![1.0], group_of: vec![0], degree_law: None, draws: None };
        assert!(matches!(spec.to_model(), Err(CliError::Usage(_))));
        let ragged = ModelSpec { b: vec![vec![0.5, 0.1]], group_of: vec![1], ..spec };
        assert!(ragged.to_model().is_err());
        assert!(matches!(parse_model_spec("{\"kind\": \"sbm\"}", "t"), Err(CliError::Parse { .. })));
    }
}
