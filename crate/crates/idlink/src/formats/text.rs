//! Line-oriented text formats: edge lists, anchor files, embedding tables.
//!
//! All three accept `#` comments and blank lines. Errors carry the 1-based
//! line number.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};

use idlink_core::embedding::EmbeddingMatrix;
use idlink_core::graph::{AnchorSet, Graph};
use idlink_core::Error as CoreError;

use crate::error::Result;

fn content(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

fn parse_error(line: usize, message: impl Into<String>) -> CoreError {
    CoreError::Parse { line, message: message.into() }
}

/// Edge list: `a b` per edge. A line with a single label declares a node,
/// which is how isolated nodes and node order survive a round trip.
pub fn read_graph<R: BufRead>(reader: R) -> Result<Graph> {
    let mut g = Graph::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let n = i + 1;
        let fields: Vec<&str> = content(&line).split_whitespace().collect();
        match fields.as_slice() {
            [] => {}
            [a] => {
                g.add_node(a);
            }
            [a, b] => {
                g.add_labeled_edge(a, b, n)?;
            }
            _ => return Err(parse_error(n, format!("expected 1 or 2 labels, found {}", fields.len())).into()),
        }
    }
    Ok(g)
}

/// Writes every node (in index order) and then every edge.
pub fn write_graph<W: Write>(g: &Graph, mut w: W) -> Result<()> {
    writeln!(w, "# {} nodes, {} edges", g.len(), g.edge_count())?;
    for label in g.labels() {
        writeln!(w, "{label}")?;
    }
    for (u, v) in g.edges() {
        writeln!(w, "{} {}", g.label(u), g.label(v))?;
    }
    Ok(())
}

/// Anchor file: `original_label target_label` per line.
pub fn read_anchors<R: BufRead>(reader: R, original: &Graph, target: &Graph) -> Result<AnchorSet> {
    let mut pairs = Vec::new();
    let (mut seen_o, mut seen_t) = (BTreeSet::new(), BTreeSet::new());
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let n = i + 1;
        let fields: Vec<&str> = content(&line).split_whitespace().collect();
        match fields.as_slice() {
            [] => {}
            [a, b] => {
                if original.index_of(a).is_none() {
                    return Err(parse_error(n, format!("unknown original identity `{a}`")).into());
                }
                if target.index_of(b).is_none() {
                    return Err(parse_error(n, format!("unknown target identity `{b}`")).into());
                }
                if !seen_o.insert(a.to_string()) || !seen_t.insert(b.to_string()) {
                    return Err(parse_error(n, format!("`{a} {b}` reuses an anchored identity")).into());
                }
                pairs.push((a.to_string(), b.to_string()));
            }
            _ => return Err(parse_error(n, format!("expected 2 labels, found {}", fields.len())).into()),
        }
    }
    Ok(AnchorSet::from_labels(pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())), original, target)?)
}

pub fn write_anchors<W: Write>(anchors: &AnchorSet, original: &Graph, target: &Graph, mut w: W) -> Result<()> {
    writeln!(w, "# {} anchor pairs: original target", anchors.len())?;
    for a in anchors.iter() {
        writeln!(w, "{} {}", original.label(a.original), target.label(a.target))?;
    }
    Ok(())
}

/// Embedding table: header `N d`, then `label v1 .. vd` per node. Rows are
/// returned in the graph's node order.
pub fn read_embeddings<R: BufRead>(reader: R, g: &Graph) -> Result<EmbeddingMatrix> {
    let mut header: Option<(usize, usize)> = None;
    let mut rows: Vec<Option<Vec<f64>>> = vec![None; g.len()];
    let mut count = 0;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let n = i + 1;
        let fields: Vec<&str> = content(&line).split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        let Some((rows_expected, dim)) = header else {
            let parsed = match fields.as_slice() {
                [a, b] => a.parse::<usize>().ok().zip(b.parse::<usize>().ok()),
                _ => None,
            };
            let (count_h, dim) = parsed.ok_or_else(|| parse_error(n, "expected header `N d`"))?;
            if count_h != g.len() {
                return Err(parse_error(n, format!("header declares {count_h} rows, graph has {} nodes", g.len())).into());
            }
            header = Some((count_h, dim));
            continue;
        };
        if fields.len() != dim + 1 {
            return Err(parse_error(n, format!("expected a label and {dim} values, found {} fields", fields.len())).into());
        }
        let idx = g.index_of(fields[0]).ok_or_else(|| parse_error(n, format!("unknown identity `{}`", fields[0])))?;
        if rows[idx].is_some() {
            return Err(parse_error(n, format!("duplicate row for `{}`", fields[0])).into());
        }
        let values = fields[1..]
            .iter()
            .map(|v| v.parse::<f64>().map_err(|e| parse_error(n, format!("bad value `{v}`: {e}"))))
            .collect::<Result<Vec<f64>, _>>()?;
        rows[idx] = Some(values);
        count += 1;
        if count > rows_expected {
            return Err(parse_error(n, "more rows than declared").into());
        }
    }
    let (_, dim) = header.ok_or_else(|| parse_error(0, "empty embedding file"))?;
    let mut flat = Vec::with_capacity(g.len() * dim);
    for (i, r) in rows.into_iter().enumerate() {
        let r = r.ok_or_else(|| parse_error(0, format!("missing row for `{}`", g.label(i))))?;
        flat.extend(r);
    }
    Ok(EmbeddingMatrix::from_rows(dim, flat)?)
}

/// Values are written in shortest round-trip form, so reading back is exact.
pub fn write_embeddings<W: Write>(u: &EmbeddingMatrix, g: &Graph, mut w: W) -> Result<()> {
    writeln!(w, "{} {}", u.len(), u.dim())?;
    for i in 0..u.len() {
        write!(w, "{}", g.label(i))?;
        for v in u.row(i) {
            write!(w, " {v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn core_err(e: Error) -> CoreError {
        match e {
            Error::Core(c) => c,
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn graph_round_trip_keeps_isolated_nodes() {
        let text = "# demo\na b\nb c  # trailing\n\nlonely\n";
        let g = read_graph(text.as_bytes()).unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g.edge_count(), 2);
        let mut buf = Vec::new();
        write_graph(&g, &mut buf).unwrap();
        let h = read_graph(buf.as_slice()).unwrap();
        assert_eq!(h.labels(), g.labels());
        assert_eq!(h.edges().collect::<Vec<_>>(), g.edges().collect::<Vec<_>>());
    }

    #[test]
    fn graph_errors_name_the_line() {
        assert_eq!(core_err(read_graph("a b\nc c\n".as_bytes()).unwrap_err()), CoreError::SelfLoop { label: "c".into(), line: 2 });
        assert!(matches!(core_err(read_graph("a b c\n".as_bytes()).unwrap_err()), CoreError::Parse { line: 1, .. }));
    }

    #[test]
    fn anchors_parse_and_reject() {
        let go = read_graph("o1 o2\n".as_bytes()).unwrap();
        let gt = read_graph("t1 t2\n".as_bytes()).unwrap();
        let a = read_anchors("# pairs\no1 t2\no2 t1\n".as_bytes(), &go, &gt).unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(a.partner_of_original(0), Some(1));
        assert!(matches!(core_err(read_anchors("o1 t9\n".as_bytes(), &go, &gt).unwrap_err()), CoreError::Parse { line: 1, .. }));
        assert!(matches!(core_err(read_anchors("o1 t1\no1 t2\n".as_bytes(), &go, &gt).unwrap_err()), CoreError::Parse { line: 2, .. }));
        let mut buf = Vec::new();
        write_anchors(&a, &go, &gt, &mut buf).unwrap();
        assert_eq!(read_anchors(buf.as_slice(), &go, &gt).unwrap(), a);
    }

    #[test]
    fn embeddings_round_trip_exactly() {
        let g = read_graph("x y\nz\n".as_bytes()).unwrap();
        let u = EmbeddingMatrix::from_rows(2, vec![0.1, -2.5e-7, 1.0 / 3.0, 4.0, -0.75, 1e300]).unwrap();
        let mut buf = Vec::new();
        write_embeddings(&u, &g, &mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("3 2\n"));
        assert_eq!(read_embeddings(buf.as_slice(), &g).unwrap(), u);
    }

    #[test]
    fn embedding_errors() {
        let g = read_graph("x y\n".as_bytes()).unwrap();
        assert!(matches!(core_err(read_embeddings("3 2\n".as_bytes(), &g).unwrap_err()), CoreError::Parse { line: 1, .. }));
        assert!(matches!(core_err(read_embeddings("2 2\nx 1 2\nq 1 2\n".as_bytes(), &g).unwrap_err()), CoreError::Parse { line: 3, .. }));
        assert!(matches!(core_err(read_embeddings("2 2\nx 1\n".as_bytes(), &g).unwrap_err()), CoreError::Parse { line: 2, .. }));
        assert!(read_embeddings("2 2\nx 1 2\n".as_bytes(), &g).is_err());
    }
}
