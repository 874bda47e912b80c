//! TSV ingestion and serialization.
//!
//! Edge files hold one `src<TAB>rel<TAB>dst` triple per line, label files one
//! `vertex<TAB>label` pair per line. Blank lines and lines starting with `#`
//! are skipped. Lines without a tab are split on whitespace instead.
//!
//! Tokens are mapped to dense ids by first occurrence. When a label file is
//! given it is read first and must list every vertex, so it also fixes the
//! vertex order; this is what makes [`write_tsv`] round-trip exactly.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::graph::{Adjacency, Label, MultiRelGraph};

#[derive(Clone, Debug, Default)]
struct Vocabulary {
    ids: HashMap<String, usize>,
    names: Vec<String>,
}

impl Vocabulary {
    fn intern(&mut self, token: &str) -> usize {
        if let Some(&id) = self.ids.get(token) {
            return id;
        }
        let id = self.names.len();
        self.ids.insert(token.to_owned(), id);
        self.names.push(token.to_owned());
        id
    }

    fn get(&self, token: &str) -> Option<usize> {
        self.ids.get(token).copied()
    }
}

/// A graph together with the original tokens behind its dense ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoadedGraph {
    pub graph: MultiRelGraph,
    pub vertex_names: Vec<String>,
    pub relation_names: Vec<String>,
    /// Empty when no label file was given (all labels are 0).
    pub label_names: Vec<String>,
}

impl LoadedGraph {
    /// Token tables for a graph that has no source file: vertices `0..n`,
    /// relations `r0..`, labels written as decimals.
    pub fn with_numeric_names(graph: MultiRelGraph) -> Self {
        let max_label = graph.labels().iter().copied().max().unwrap_or(0);
        LoadedGraph {
            vertex_names: (0..graph.vertex_count()).map(|v| v.to_string()).collect(),
            relation_names: (0..graph.relation_count())
                .map(|i| format!("r{i}"))
                .collect(),
            label_names: (0..=max_label).map(|l| l.to_string()).collect(),
            graph,
        }
    }
}

/// Loads graphs against shared relation and label vocabularies, so that the
/// same relation or label token means the same id in every graph it loads.
#[derive(Clone, Debug, Default)]
pub struct Loader {
    relations: Vocabulary,
    labels: Vocabulary,
    numeric_labels: bool,
}

impl Loader {
    pub fn new() -> Self {
        Self::default()
    }

    /// Reads label tokens as non-negative integers and uses them as label
    /// ids unchanged, so graphs written by [`write_tsv`] from numerically
    /// labeled graphs load back with identical labels.
    pub fn numeric_labels(mut self) -> Self {
        self.numeric_labels = true;
        self
    }

    /// Number of distinct relation tokens seen so far.
    pub fn relation_count(&self) -> usize {
        self.relations.names.len()
    }

    pub fn load(&mut self, edges_path: &Path, labels_path: Option<&Path>) -> Result<LoadedGraph> {
        let mut vertices = Vocabulary::default();
        let mut labels: Vec<Label> = Vec::new();

        if let Some(path) = labels_path {
            let text = fs::read_to_string(path)?;
            for (line_no, fields) in records(&text) {
                let [vertex, label] = fields[..] else {
                    return Err(parse_error(
                        path,
                        line_no,
                        format!("expected 2 fields, found {}", fields.len()),
                    ));
                };
                if vertices.get(vertex).is_some() {
                    return Err(parse_error(
                        path,
                        line_no,
                        format!("vertex `{vertex}` labeled twice"),
                    ));
                }
                vertices.intern(vertex);
                if self.numeric_labels {
                    let value = label.parse::<Label>().map_err(|_| {
                        parse_error(
                            path,
                            line_no,
                            format!("label `{label}` is not a non-negative integer"),
                        )
                    })?;
                    labels.push(value);
                } else {
                    labels.push(self.labels.intern(label) as Label);
                }
            }
        }
        let labeled = labels_path.is_some();

        let text = fs::read_to_string(edges_path)?;
        let mut edges: Vec<Vec<(usize, usize)>> = Vec::new();
        let mut seen: HashSet<(usize, usize, usize)> = HashSet::new();
        for (line_no, fields) in records(&text) {
            let [src, rel, dst] = fields[..] else {
                return Err(parse_error(
                    edges_path,
                    line_no,
                    format!("expected 3 fields, found {}", fields.len()),
                ));
            };
            if src == dst {
                return Err(Error::SelfLoop {
                    path: edges_path.to_owned(),
                    line: line_no,
                    vertex: src.to_owned(),
                });
            }
            let mut vertex_id = |token: &str| -> Result<usize> {
                match vertices.get(token) {
                    Some(id) => Ok(id),
                    None if labeled => Err(parse_error(
                        edges_path,
                        line_no,
                        format!("vertex `{token}` has no label"),
                    )),
                    None => Ok(vertices.intern(token)),
                }
            };
            let u = vertex_id(src)?;
            let v = vertex_id(dst)?;
            let i = self.relations.intern(rel);
            if !seen.insert((i, u.min(v), u.max(v))) {
                return Err(Error::DuplicateEdge {
                    path: edges_path.to_owned(),
                    line: line_no,
                    src: src.to_owned(),
                    rel: rel.to_owned(),
                    dst: dst.to_owned(),
                });
            }
            if edges.len() <= i {
                edges.resize_with(i + 1, Vec::new);
            }
            edges[i].push((u, v));
        }

        let n = vertices.names.len();
        if !labeled {
            labels = vec![0; n];
        }
        edges.resize_with(self.relation_count(), Vec::new);
        let label_names = if labeled && self.numeric_labels {
            let max = labels.iter().copied().max().unwrap_or(0);
            (0..=max).map(|l| l.to_string()).collect()
        } else if labeled {
            self.labels.names.clone()
        } else {
            Vec::new()
        };
        let graph = MultiRelGraph::new(n, &edges, labels)?;
        Ok(LoadedGraph {
            graph,
            vertex_names: vertices.names,
            relation_names: self.relations.names.clone(),
            label_names,
        })
    }
}

/// Loads one graph with fresh vocabularies.
pub fn load_graph(edges_path: &Path, labels_path: Option<&Path>) -> Result<LoadedGraph> {
    Loader::new().load(edges_path, labels_path)
}

/// Pads a graph with empty relations up to `r` (used after loading several
/// graphs with one [`Loader`]).
pub fn pad_relations(g: &MultiRelGraph, r: usize) -> Result<MultiRelGraph> {
    if r < g.relation_count() {
        return Err(Error::contract(format!(
            "cannot shrink {} relations to {r}",
            g.relation_count()
        )));
    }
    let mut relations = g.relations().to_vec();
    relations.resize_with(r, || Adjacency::from_edges(g.vertex_count(), &[]).unwrap());
    Ok(MultiRelGraph::from_parts(relations, g.labels().to_vec()))
}

/// Writes the edge file and a label file listing every vertex in id order.
pub fn write_tsv(loaded: &LoadedGraph, edges_path: &Path, labels_path: &Path) -> Result<()> {
    let g = &loaded.graph;
    let label_name = |l: Label| -> String {
        loaded
            .label_names
            .get(l as usize)
            .cloned()
            .unwrap_or_else(|| l.to_string())
    };

    let mut out = BufWriter::new(fs::File::create(labels_path)?);
    for v in 0..g.vertex_count() {
        writeln!(
            out,
            "{}\t{}",
            loaded.vertex_names[v],
            label_name(g.label(v))
        )?;
    }
    out.flush()?;

    let mut out = BufWriter::new(fs::File::create(edges_path)?);
    for (i, rel) in g.relations().iter().enumerate() {
        for (u, v) in rel.edges() {
            writeln!(
                out,
                "{}\t{}\t{}",
                loaded.vertex_names[u], loaded.relation_names[i], loaded.vertex_names[v]
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

/// `g.tsv` -> `g.labels.tsv`
pub fn sibling_labels_path(edges_path: &Path) -> PathBuf {
    let stem = edges_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    edges_path.with_file_name(format!("{stem}.labels.tsv"))
}

fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            return None;
        }
        let fields = if line.contains('\t') {
            line.split('\t').map(str::trim).collect()
        } else {
            line.split_whitespace().collect()
        };
        Some((i + 1, fields))
    })
}

fn parse_error(path: &Path, line: usize, message: String) -> Error {
    Error::Parse {
        path: path.to_owned(),
        line,
        message,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn loads_two_relations() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "g.tsv", "# comment\na\tr1\tb\nb\tr2\tc\n");
        let g = load_graph(&p, None).unwrap();
        assert_eq!(g.graph.vertex_count(), 3);
        assert_eq!(g.graph.relation_count(), 2);
        assert_eq!(g.graph.neighbors(0, 0), &[1]);
        assert_eq!(g.graph.neighbors(1, 1), &[2]);
        assert_eq!(g.vertex_names, ["a", "b", "c"]);
        assert_eq!(g.relation_names, ["r1", "r2"]);
        assert!(g.graph.labels().iter().all(|&l| l == 0));
    }

    #[test]
    fn self_loop_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "g.tsv", "a\tr1\ta\n");
        match load_graph(&p, None) {
            Err(Error::SelfLoop { line: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reversed_duplicate_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "g.tsv", "a\tr1\tb\nb\tr1\ta\n");
        match load_graph(&p, None) {
            Err(Error::DuplicateEdge { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        // same endpoints under another relation are fine
        let p = write(&dir, "h.tsv", "a\tr1\tb\nb\tr2\ta\n");
        assert_eq!(load_graph(&p, None).unwrap().graph.edge_count(), 2);
    }

    #[test]
    fn malformed_lines() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "g.tsv", "a\tr1\tb\na\tb\n");
        assert!(matches!(
            load_graph(&p, None),
            Err(Error::Parse { line: 2, .. })
        ));
        let e = write(&dir, "e.tsv", "a\tr\tb\n");
        let l = write(&dir, "l.tsv", "a\tx\ty\n");
        assert!(matches!(
            load_graph(&e, Some(&l)),
            Err(Error::Parse { line: 1, .. })
        ));
        let l = write(&dir, "l2.tsv", "a\tx\n");
        assert!(matches!(
            load_graph(&e, Some(&l)),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn numeric_labels_keep_values() {
        let dir = tempfile::tempdir().unwrap();
        let e = dir.path().join("g.tsv");
        let l = dir.path().join("g.labels.tsv");
        fs::write(&e, "a\tr\tb\n").unwrap();
        fs::write(&l, "a\t2\nb\t0\n").unwrap();
        let g = Loader::new().numeric_labels().load(&e, Some(&l)).unwrap();
        assert_eq!(g.graph.labels(), &[2, 0]);
        assert_eq!(g.label_names, ["0", "1", "2"]);
        fs::write(&l, "a\tx\nb\t0\n").unwrap();
        assert!(Loader::new().numeric_labels().load(&e, Some(&l)).is_err());
    }

    #[test]
    fn labels_fix_vertex_order() {
        let dir = tempfile::tempdir().unwrap();
        let e = write(&dir, "e.tsv", "a r b\nb r c\n");
        let l = write(&dir, "l.tsv", "c\tred\nb\tblue\na\tred\n");
        let g = load_graph(&e, Some(&l)).unwrap();
        assert_eq!(g.vertex_names, ["c", "b", "a"]);
        assert_eq!(g.graph.labels(), &[0, 1, 0]);
    }

    #[test]
    fn shared_loader_aligns_tokens() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(&dir, "a.tsv", "x\tp\ty\n");
        let b = write(&dir, "b.tsv", "x\tq\ty\ny\tp\tz\n");
        let mut loader = Loader::new();
        let ga = loader.load(&a, None).unwrap();
        let gb = loader.load(&b, None).unwrap();
        assert_eq!(ga.graph.relation_count(), 1);
        assert_eq!(gb.graph.relation_count(), 2);
        assert_eq!(gb.graph.neighbors(0, 1), &[2]);
        let padded = pad_relations(&ga.graph, loader.relation_count()).unwrap();
        assert_eq!(padded.relation_count(), 2);
        assert_eq!(padded.relation(1).edge_count(), 0);
    }

    #[test]
    fn write_then_load_is_identity() {
        let dir = tempfile::tempdir().unwrap();
        let e = write(&dir, "e.tsv", "q\tr2\tp\np\tr1\tz\nz\tr2\tq\n");
        let l = write(&dir, "l.tsv", "p\tA\nq\tB\nz\tA\n");
        let g = load_graph(&e, Some(&l)).unwrap();
        let e2 = dir.path().join("e2.tsv");
        let l2 = sibling_labels_path(&e2);
        write_tsv(&g, &e2, &l2).unwrap();
        assert_eq!(load_graph(&e2, Some(&l2)).unwrap(), g);
    }
}
