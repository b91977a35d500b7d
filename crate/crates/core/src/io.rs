//! Plain-text dataset, label and score files.
//!
//! * edges: one whitespace-separated integer pair per line, `#` comments
//! * features: headerless CSV of reals, one row per node
//! * labels: CSV `node_id,label,kind` with a header row
//! * scores: CSV `node_id,score` with a header row, 17 significant digits

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::AttributedGraph;

pub const EDGES_FILE: &str = "graph.edges";
pub const FEATURES_FILE: &str = "features.csv";
pub const LABELS_FILE: &str = "labels.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnomalyKind {
    None,
    Structural,
    Feature,
}

impl AnomalyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AnomalyKind::None => "none",
            AnomalyKind::Structural => "structural",
            AnomalyKind::Feature => "feature",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(AnomalyKind::None),
            "structural" => Some(AnomalyKind::Structural),
            "feature" => Some(AnomalyKind::Feature),
            _ => None,
        }
    }
}

/// Ground truth per node. Real-world labels may flag an anomaly without a
/// kind; an injected anomaly always has one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labels {
    anomalous: Vec<bool>,
    kinds: Vec<AnomalyKind>,
}

impl Labels {
    pub fn clean(n: usize) -> Self {
        Labels {
            anomalous: vec![false; n],
            kinds: vec![AnomalyKind::None; n],
        }
    }

    pub fn from_parts(anomalous: Vec<bool>, kinds: Vec<AnomalyKind>) -> Result<Self> {
        if anomalous.len() != kinds.len() {
            return Err(Error::Input("label and kind vectors differ in length".into()));
        }
        for (v, (&a, &k)) in anomalous.iter().zip(&kinds).enumerate() {
            if !a && k != AnomalyKind::None {
                return Err(Error::Consistency(format!(
                    "node {v} has kind {} but is labeled normal",
                    k.as_str()
                )));
            }
        }
        Ok(Labels { anomalous, kinds })
    }

    pub fn len(&self) -> usize {
        self.anomalous.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anomalous.is_empty()
    }

    pub fn is_anomalous(&self, v: usize) -> bool {
        self.anomalous[v]
    }

    pub fn kind(&self, v: usize) -> AnomalyKind {
        self.kinds[v]
    }

    pub fn flags(&self) -> &[bool] {
        &self.anomalous
    }

    pub fn kinds(&self) -> &[AnomalyKind] {
        &self.kinds
    }

    pub fn anomaly_count(&self) -> usize {
        self.anomalous.iter().filter(|&&a| a).count()
    }

    pub(crate) fn mark(&mut self, v: usize, kind: AnomalyKind) {
        self.anomalous[v] = true;
        self.kinds[v] = kind;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetBundle {
    pub name: String,
    pub graph: AttributedGraph,
    pub labels: Option<Labels>,
}

impl DatasetBundle {
    pub fn new(name: impl Into<String>, graph: AttributedGraph, labels: Option<Labels>) -> Result<Self> {
        if let Some(l) = &labels {
            if l.len() != graph.n() {
                return Err(Error::Consistency(format!(
                    "{} labels for {} nodes",
                    l.len(),
                    graph.n()
                )));
            }
        }
        Ok(DatasetBundle {
            name: name.into(),
            graph,
            labels,
        })
    }

    /// Reads `graph.edges`, `features.csv` and, if present, `labels.csv`
    /// from a directory. The directory name becomes the dataset name.
    pub fn load_dir(dir: &Path) -> Result<Self> {
        let labels = dir.join(LABELS_FILE);
        let mut bundle = load_dataset(
            &dir.join(EDGES_FILE),
            &dir.join(FEATURES_FILE),
            labels.exists().then_some(labels.as_path()),
        )?;
        if let Some(name) = dir.file_name() {
            bundle.name = name.to_string_lossy().into_owned();
        }
        Ok(bundle)
    }

    pub fn save_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_edges(&self.graph, &dir.join(EDGES_FILE))?;
        write_features(self.graph.features(), &dir.join(FEATURES_FILE))?;
        if let Some(l) = &self.labels {
            write_labels(l, &dir.join(LABELS_FILE))?;
        }
        Ok(())
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: PathBuf::from(path),
        line,
        msg: msg.into(),
    }
}

pub fn read_edges(path: &Path) -> Result<Vec<(usize, usize)>> {
    let text = read(path)?;
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let mut id = || -> Result<usize> {
            let tok = parts
                .next()
                .ok_or_else(|| parse_err(path, i + 1, "expected two node ids"))?;
            tok.parse()
                .map_err(|_| parse_err(path, i + 1, format!("bad node id {tok:?}")))
        };
        let (a, b) = (id()?, id()?);
        if parts.next().is_some() {
            return Err(parse_err(path, i + 1, "expected exactly two node ids"));
        }
        edges.push((a, b));
    }
    Ok(edges)
}

pub fn write_edges(g: &AttributedGraph, path: &Path) -> Result<()> {
    let mut out = String::new();
    for (a, b) in g.edges() {
        writeln!(out, "{a} {b}").unwrap();
    }
    write(path, &out)
}

pub fn read_features(path: &Path) -> Result<Array2<f64>> {
    let text = read(path)?;
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let before = values.len();
        for tok in line.split(',') {
            let x: f64 = tok
                .trim()
                .parse()
                .map_err(|_| parse_err(path, i + 1, format!("bad real {tok:?}")))?;
            values.push(x);
        }
        let width = values.len() - before;
        match cols {
            None => cols = Some(width),
            Some(c) if c != width => {
                return Err(parse_err(path, i + 1, format!("expected {c} columns, found {width}")))
            }
            _ => {}
        }
        rows += 1;
    }
    Array2::from_shape_vec((rows, cols.unwrap_or(0)), values)
        .map_err(|e| parse_err(path, 0, e.to_string()))
}

/// Shortest round-trip rendering, so the file is lossless.
pub fn write_features(x: &Array2<f64>, path: &Path) -> Result<()> {
    let mut out = String::new();
    for row in x.rows() {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            write!(out, "{v}").unwrap();
            first = false;
        }
        out.push('\n');
    }
    write(path, &out)
}

pub fn read_labels(path: &Path, n: usize) -> Result<Labels> {
    let text = read(path)?;
    let mut anomalous: Vec<Option<bool>> = vec![None; n];
    let mut kinds = vec![AnomalyKind::None; n];
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with("node_id")) {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 && fields.len() != 2 {
            return Err(parse_err(path, i + 1, "expected node_id,label,kind"));
        }
        let v: usize = fields[0]
            .parse()
            .map_err(|_| parse_err(path, i + 1, format!("bad node id {:?}", fields[0])))?;
        if v >= n {
            return Err(Error::Consistency(format!(
                "{}:{}: node {v} outside the {n}-node graph",
                path.display(),
                i + 1
            )));
        }
        let flag = match fields[1] {
            "0" => false,
            "1" => true,
            other => {
                return Err(Error::Consistency(format!(
                    "{}:{}: label {other:?} is not 0 or 1",
                    path.display(),
                    i + 1
                )))
            }
        };
        let kind = match fields.get(2) {
            Some(k) => AnomalyKind::parse(k)
                .ok_or_else(|| parse_err(path, i + 1, format!("unknown anomaly kind {k:?}")))?,
            None => AnomalyKind::None,
        };
        if anomalous[v].replace(flag).is_some() {
            return Err(Error::Consistency(format!("node {v} labeled twice in {}", path.display())));
        }
        kinds[v] = kind;
    }
    let anomalous = anomalous
        .into_iter()
        .enumerate()
        .map(|(v, a)| {
            a.ok_or_else(|| Error::Consistency(format!("node {v} has no label in {}", path.display())))
        })
        .collect::<Result<Vec<_>>>()?;
    Labels::from_parts(anomalous, kinds)
}

pub fn write_labels(labels: &Labels, path: &Path) -> Result<()> {
    let mut out = String::from("node_id,label,kind\n");
    for v in 0..labels.len() {
        writeln!(
            out,
            "{v},{},{}",
            u8::from(labels.is_anomalous(v)),
            labels.kind(v).as_str()
        )
        .unwrap();
    }
    write(path, &out)
}

pub fn load_dataset(
    graph_path: &Path,
    feature_path: &Path,
    label_path: Option<&Path>,
) -> Result<DatasetBundle> {
    let features = read_features(feature_path)?;
    let n = features.nrows();
    let edges = read_edges(graph_path)?;
    if let Some(&(a, b)) = edges.iter().find(|&&(a, b)| a >= n || b >= n) {
        return Err(Error::Consistency(format!(
            "edge ({a}, {b}) in {} but {} has {n} rows",
            graph_path.display(),
            feature_path.display()
        )));
    }
    let graph = AttributedGraph::from_edges(&edges, features)?;
    let labels = label_path.map(|p| read_labels(p, n)).transpose()?;
    let name = graph_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    DatasetBundle::new(name, graph, labels)
}

pub fn write_scores(scores: &[f64], path: &Path) -> Result<()> {
    let mut out = String::from("node_id,score\n");
    for (v, s) in scores.iter().enumerate() {
        if !s.is_finite() {
            return Err(Error::Input(format!("score of node {v} is not finite")));
        }
        writeln!(out, "{v},{s:.16e}").unwrap();
    }
    write(path, &out)
}

pub fn read_scores(path: &Path) -> Result<Vec<f64>> {
    let text = read(path)?;
    let mut scores = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with("node_id")) {
            continue;
        }
        let (id, score) = line
            .split_once(',')
            .ok_or_else(|| parse_err(path, i + 1, "expected node_id,score"))?;
        let id: usize = id
            .trim()
            .parse()
            .map_err(|_| parse_err(path, i + 1, format!("bad node id {id:?}")))?;
        if id != scores.len() {
            return Err(parse_err(path, i + 1, format!("expected node {}, found {id}", scores.len())));
        }
        scores.push(
            score
                .trim()
                .parse()
                .map_err(|_| parse_err(path, i + 1, format!("bad score {score:?}")))?,
        );
    }
    Ok(scores)
}
