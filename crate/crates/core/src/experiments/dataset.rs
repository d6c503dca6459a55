use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::classify::{num_classes, SplitSpec};
use crate::error::{IgtError, Result};
use crate::graph::Graph;
use crate::numerics::{DenseMatrix, FeatureMatrix};

/// Published size of a benchmark dataset. `edges` is the count reported
/// upstream, which for Cora is the number of directed citation records.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatasetStats {
    pub name: &'static str,
    pub nodes: usize,
    pub edges: usize,
    pub classes: usize,
    pub features: usize,
}

pub const DATASET_STATS: [DatasetStats; 4] = [
    DatasetStats { name: "cora", nodes: 2708, edges: 5429, classes: 7, features: 1433 },
    DatasetStats { name: "citeseer", nodes: 3327, edges: 4732, classes: 6, features: 3703 },
    DatasetStats { name: "pubmed", nodes: 19717, edges: 44338, classes: 3, features: 500 },
    DatasetStats { name: "wikics", nodes: 11701, edges: 216123, classes: 10, features: 300 },
];

/// Statistics for a dataset name, ignoring case and punctuation
/// (`Wiki-CS` matches `wikics`).
pub fn known_stats(name: &str) -> Option<&'static DatasetStats> {
    let key: String = name.chars().filter(char::is_ascii_alphanumeric).collect::<String>().to_ascii_lowercase();
    DATASET_STATS.iter().find(|s| s.name == key)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetBundle {
    pub name: String,
    pub graph: Graph,
    pub features: FeatureMatrix,
    pub labels: Vec<usize>,
    /// predefined splits; several when the dataset ships numbered splits
    pub splits: Vec<SplitSpec>,
}

impl DatasetBundle {
    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn classes(&self) -> usize {
        num_classes(&self.labels)
    }

    /// Sizes agree with each other and, for a recognized name, with the
    /// published node, class and feature counts. A differing edge count is
    /// only logged: upstream counts may include both directions or
    /// duplicate records.
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        let mismatch = |what, expected, found| IgtError::DatasetMismatch {
            dataset: self.name.clone(),
            what,
            expected,
            found,
        };
        if self.features.rows() != n {
            return Err(mismatch("feature rows", n, self.features.rows()));
        }
        if self.labels.len() != n {
            return Err(mismatch("label count", n, self.labels.len()));
        }
        for s in &self.splits {
            s.validate(n)?;
        }
        if let Some(stats) = known_stats(&self.name) {
            if n != stats.nodes {
                return Err(mismatch("node count", stats.nodes, n));
            }
            if self.classes() != stats.classes {
                return Err(mismatch("class count", stats.classes, self.classes()));
            }
            if self.features.cols() != stats.features {
                return Err(mismatch("feature width", stats.features, self.features.cols()));
            }
            if self.graph.edge_count() != stats.edges {
                log::warn!(
                    "{}: {} undirected edges, published count is {}",
                    self.name,
                    self.graph.edge_count(),
                    stats.edges
                );
            }
        }
        Ok(())
    }

    /// Writes the plain-text layout read by [`load_dataset`].
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.graph.write(&dir.join("graph.txt"))?;
        let mut text = String::new();
        for r in 0..self.features.rows() {
            let row: Vec<String> = self.features.row(r).iter().map(f64::to_string).collect();
            let _ = writeln!(text, "{}", row.join(" "));
        }
        std::fs::write(dir.join("features.txt"), text)?;
        write_indices(&dir.join("labels.txt"), &self.labels)?;
        let numbered = self.splits.len() > 1;
        for (i, s) in self.splits.iter().enumerate() {
            for (part, idx) in [("train", &s.train), ("val", &s.val), ("test", &s.test)] {
                let name = if numbered { format!("split_{part}_{i}.txt") } else { format!("split_{part}.txt") };
                write_indices(&dir.join(name), idx)?;
            }
        }
        Ok(())
    }
}

fn write_indices(path: &Path, values: &[usize]) -> Result<()> {
    let mut text = String::with_capacity(values.len() * 5);
    for v in values {
        let _ = writeln!(text, "{v}");
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn read_required(path: PathBuf) -> Result<(PathBuf, String)> {
    if !path.is_file() {
        return Err(IgtError::MissingDatasetFile { path });
    }
    let text = std::fs::read_to_string(&path)?;
    Ok((path, text))
}

/// Non-empty, non-comment lines with their 1-based numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_indices(path: &Path, text: &str) -> Result<Vec<usize>> {
    content_lines(text)
        .map(|(line, l)| {
            l.parse().map_err(|_| IgtError::Parse {
                path: path.to_path_buf(),
                line,
                message: format!("expected a nonnegative integer, got `{l}`"),
            })
        })
        .collect()
}

fn parse_features(path: &Path, text: &str) -> Result<FeatureMatrix> {
    let mut values = Vec::new();
    let mut width = None;
    let mut rows = 0;
    for (line, l) in content_lines(text) {
        let err = |message: String| IgtError::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let before = values.len();
        for tok in l.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| err(format!("bad number `{tok}`")))?;
            if !v.is_finite() {
                return Err(err(format!("non-finite feature `{tok}`")));
            }
            values.push(v);
        }
        let w = values.len() - before;
        match width {
            None => width = Some(w),
            Some(p) if p != w => return Err(err(format!("row has {w} values, expected {p}"))),
            Some(_) => {}
        }
        rows += 1;
    }
    DenseMatrix::new(rows, width.unwrap_or(0), values)
}

fn read_split(dir: &Path, suffix: &str, n: usize) -> Result<Option<SplitSpec>> {
    let train = dir.join(format!("split_train{suffix}.txt"));
    if !train.is_file() {
        return Ok(None);
    }
    let mut parts = Vec::with_capacity(3);
    for part in ["train", "val", "test"] {
        let path = dir.join(format!("split_{part}{suffix}.txt"));
        parts.push(if path.is_file() {
            parse_indices(&path, &std::fs::read_to_string(&path)?)?
        } else {
            Vec::new()
        });
    }
    let test = parts.pop().unwrap_or_default();
    let val = parts.pop().unwrap_or_default();
    let train = parts.pop().unwrap_or_default();
    SplitSpec::predefined(n, train, val, test).map(Some)
}

/// Reads `graph.txt`, `features.txt`, `labels.txt` and the optional
/// `split_{train,val,test}.txt` (or numbered `split_train_<i>.txt`, …)
/// from `dir`. The dataset is named after the directory.
pub fn load_dataset(dir: &Path) -> Result<DatasetBundle> {
    let name = dir
        .file_name()
        .map_or_else(|| dir.display().to_string(), |s| s.to_string_lossy().into_owned());
    let (gpath, gtext) = read_required(dir.join("graph.txt"))?;
    let graph = Graph::parse(&gtext, &gpath)?;
    let (fpath, ftext) = read_required(dir.join("features.txt"))?;
    let features = parse_features(&fpath, &ftext)?;
    let (lpath, ltext) = read_required(dir.join("labels.txt"))?;
    let labels = parse_indices(&lpath, &ltext)?;
    let n = graph.n();
    let mut splits = Vec::new();
    if let Some(s) = read_split(dir, "", n)? {
        splits.push(s);
    } else {
        while let Some(s) = read_split(dir, &format!("_{}", splits.len()), n)? {
            splits.push(s);
        }
    }
    let bundle = DatasetBundle {
        name,
        graph,
        features,
        labels,
        splits,
    };
    bundle.validate()?;
    log::info!(
        "loaded {}: {} nodes, {} edges, {} classes, {} features, {} predefined split(s)",
        bundle.name,
        bundle.n(),
        bundle.graph.edge_count(),
        bundle.classes(),
        bundle.features.cols(),
        bundle.splits.len()
    );
    Ok(bundle)
}
