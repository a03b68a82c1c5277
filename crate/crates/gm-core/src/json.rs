//! The `gm/1` JSON document format for manifolds and basis changes.
//!
//! The writer is hand-rolled so the output is byte-stable: fixed field
//! order, no whitespace, integers emitted as JSON numbers when they fit in
//! the 53-bit-safe range and as decimal strings otherwise. The reader
//! accepts both encodings and any field order. Reading a document written
//! by this module reproduces it byte for byte.

use crate::matrix::IntMatrix;
use crate::wstructure::{
    BasisChange, BlockSpec, EdgeSpec, GluingMatrix, GraphManifold, VertexChange,
};
use num_bigint::BigInt;
use num_traits::Signed;
use serde_json::Value;
use std::collections::BTreeMap;
use std::str::FromStr;
use thiserror::Error;

pub const SCHEMA: &str = "gm/1";

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("malformed JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("invalid document: {0}")]
    Document(String),
}

fn doc_err<T>(msg: impl Into<String>) -> Result<T, JsonError> {
    Err(JsonError::Document(msg.into()))
}

/// Largest integer magnitude emitted as a bare JSON number.
fn fits_in_json_number(v: &BigInt) -> bool {
    v.abs() <= BigInt::from((1i64 << 53) - 1)
}

fn write_bigint(out: &mut String, v: &BigInt) {
    if fits_in_json_number(v) {
        out.push_str(&v.to_string());
    } else {
        out.push('"');
        out.push_str(&v.to_string());
        out.push('"');
    }
}

fn write_string(out: &mut String, s: &str) {
    out.push_str(&serde_json::to_string(s).expect("string serialization"));
}

fn write_matrix(out: &mut String, m: &IntMatrix) {
    out.push('[');
    for r in 0..m.rows() {
        if r > 0 {
            out.push(',');
        }
        out.push('[');
        for c in 0..m.cols() {
            if c > 0 {
                out.push(',');
            }
            write_bigint(out, m.get(r, c));
        }
        out.push(']');
    }
    out.push(']');
}

/// Canonical single-line serialization of a manifold.
pub fn manifold_to_json(g: &GraphManifold) -> String {
    let mut out = String::new();
    out.push_str("{\"schema\":\"gm/1\",\"convention\":\"C1\",\"blocks\":[");
    for (i, b) in g.blocks().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str("{\"id\":");
        write_string(&mut out, &b.id);
        out.push_str(&format!(
            ",\"genus\":{},\"boundary\":{}}}",
            b.genus, b.boundary_count
        ));
    }
    out.push_str("],\"edges\":[");
    for (i, e) in g.edges().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str("{\"id\":");
        write_string(&mut out, &e.id);
        out.push_str(",\"from\":[");
        write_string(&mut out, &e.from.0);
        out.push_str(&format!(",{}],\"to\":[", e.from.1));
        write_string(&mut out, &e.to.0);
        out.push_str(&format!(",{}],\"matrix\":", e.to.1));
        write_matrix(&mut out, e.gluing.matrix());
        out.push('}');
    }
    out.push(']');
    if let Some(meta) = g.meta() {
        out.push_str(",\"meta\":");
        out.push_str(&serde_json::to_string(meta).expect("meta serialization"));
    }
    out.push('}');
    out
}

fn parse_bigint(v: &Value, what: &str) -> Result<BigInt, JsonError> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(BigInt::from(i))
            } else if let Some(u) = n.as_u64() {
                Ok(BigInt::from(u))
            } else {
                doc_err(format!("{what}: expected an integer, got {n}"))
            }
        }
        Value::String(s) => BigInt::from_str(s)
            .map_err(|_| JsonError::Document(format!("{what}: bad integer string {s:?}"))),
        other => doc_err(format!("{what}: expected an integer, got {other}")),
    }
}

fn parse_u32(v: &Value, what: &str) -> Result<u32, JsonError> {
    v.as_u64()
        .and_then(|n| u32::try_from(n).ok())
        .ok_or_else(|| JsonError::Document(format!("{what}: expected a small non-negative integer")))
}

fn parse_matrix(v: &Value, what: &str) -> Result<IntMatrix, JsonError> {
    let rows = v
        .as_array()
        .ok_or_else(|| JsonError::Document(format!("{what}: expected an array of rows")))?;
    if rows.len() != 3 {
        return doc_err(format!("{what}: expected 3 rows, got {}", rows.len()));
    }
    let mut data = Vec::with_capacity(9);
    for (r, row) in rows.iter().enumerate() {
        let entries = row
            .as_array()
            .ok_or_else(|| JsonError::Document(format!("{what}: row {r} is not an array")))?;
        if entries.len() != 3 {
            return doc_err(format!("{what}: row {r} has {} entries", entries.len()));
        }
        for (c, e) in entries.iter().enumerate() {
            data.push(parse_bigint(e, &format!("{what}[{r}][{c}]"))?);
        }
    }
    Ok(IntMatrix::from_fn(3, 3, |r, c| data[r * 3 + c].clone()))
}

fn parse_endpoint(v: &Value, what: &str) -> Result<(String, u32), JsonError> {
    let pair = v
        .as_array()
        .ok_or_else(|| JsonError::Document(format!("{what}: expected [vertex, slot]")))?;
    if pair.len() != 2 {
        return doc_err(format!("{what}: expected [vertex, slot]"));
    }
    let vid = pair[0]
        .as_str()
        .ok_or_else(|| JsonError::Document(format!("{what}: vertex id must be a string")))?;
    Ok((vid.to_string(), parse_u32(&pair[1], what)?))
}

/// Parses a `gm/1` manifold document. When `transpose` is set the matrices
/// are transposed at load time (the alternative column/row reading);
/// everything downstream stays in convention C1. A document whose own
/// `convention` field says `"transpose"` is transposed as well (the two
/// toggles compose).
pub fn manifold_from_json(text: &str, transpose: bool) -> Result<GraphManifold, JsonError> {
    let root: Value = serde_json::from_str(text)?;
    let obj = root
        .as_object()
        .ok_or_else(|| JsonError::Document("top level must be an object".into()))?;
    if let Some(s) = obj.get("schema") {
        if s.as_str() != Some(SCHEMA) {
            return doc_err(format!("unsupported schema {s}, expected \"{SCHEMA}\""));
        }
    }
    let mut flip = transpose;
    if let Some(c) = obj.get("convention") {
        match c.as_str() {
            Some("C1") => {}
            Some("transpose") => flip = !flip,
            other => return doc_err(format!("unknown convention {other:?}")),
        }
    }
    let blocks_v = obj
        .get("blocks")
        .and_then(|v| v.as_array())
        .ok_or_else(|| JsonError::Document("missing \"blocks\" array".into()))?;
    let mut blocks = Vec::with_capacity(blocks_v.len());
    for (i, b) in blocks_v.iter().enumerate() {
        let bo = b
            .as_object()
            .ok_or_else(|| JsonError::Document(format!("block {i} is not an object")))?;
        let id = bo
            .get("id")
            .and_then(|v| v.as_str())
            .ok_or_else(|| JsonError::Document(format!("block {i}: missing string id")))?;
        blocks.push(BlockSpec {
            id: id.to_string(),
            genus: parse_u32(
                bo.get("genus")
                    .ok_or_else(|| JsonError::Document(format!("block {id:?}: missing genus")))?,
                "genus",
            )?,
            boundary_count: parse_u32(
                bo.get("boundary").ok_or_else(|| {
                    JsonError::Document(format!("block {id:?}: missing boundary"))
                })?,
                "boundary",
            )?,
        });
    }
    let edges_v = obj
        .get("edges")
        .and_then(|v| v.as_array())
        .ok_or_else(|| JsonError::Document("missing \"edges\" array".into()))?;
    let mut edges = Vec::with_capacity(edges_v.len());
    for (i, e) in edges_v.iter().enumerate() {
        let eo = e
            .as_object()
            .ok_or_else(|| JsonError::Document(format!("edge {i} is not an object")))?;
        let id = eo
            .get("id")
            .and_then(|v| v.as_str())
            .ok_or_else(|| JsonError::Document(format!("edge {i}: missing string id")))?;
        let m = parse_matrix(
            eo.get("matrix")
                .ok_or_else(|| JsonError::Document(format!("edge {id:?}: missing matrix")))?,
            &format!("edge {id:?} matrix"),
        )?;
        edges.push(EdgeSpec {
            id: id.to_string(),
            from: parse_endpoint(
                eo.get("from")
                    .ok_or_else(|| JsonError::Document(format!("edge {id:?}: missing from")))?,
                "from",
            )?,
            to: parse_endpoint(
                eo.get("to")
                    .ok_or_else(|| JsonError::Document(format!("edge {id:?}: missing to")))?,
                "to",
            )?,
            gluing: GluingMatrix::new(if flip { m.transpose() } else { m }),
        });
    }
    let mut g = GraphManifold::new(blocks, edges);
    if let Some(meta) = obj.get("meta") {
        g = g.with_meta(meta.clone());
    }
    Ok(g)
}

/// Canonical serialization of a basis change.
pub fn basis_change_to_json(g: &GraphManifold, h: &BasisChange) -> String {
    let mut out = String::new();
    out.push_str("{\"schema\":\"gm/1\",\"kind\":\"basis-change\",\"vertices\":[");
    for (i, b) in g.blocks().iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let vc = h.vertex_change(&b.id);
        out.push_str("{\"id\":");
        write_string(&mut out, &b.id);
        out.push_str(",\"epsilon\":");
        write_bigint(&mut out, &vc.epsilon);
        out.push_str(",\"sigma\":[[");
        for r in 0..2 {
            if r > 0 {
                out.push_str("],[");
            }
            for c in 0..2 {
                if c > 0 {
                    out.push(',');
                }
                write_bigint(&mut out, vc.sigma.get(r, c));
            }
        }
        out.push_str("]]}");
    }
    out.push_str("],\"shifts\":[");
    let mut first = true;
    for e in g.edges() {
        for reversed in [false, true] {
            let n = h.shift(&e.id, reversed);
            if !first {
                out.push(',');
            }
            first = false;
            out.push_str("{\"edge\":");
            write_string(&mut out, &e.id);
            out.push_str(&format!(",\"reversed\":{reversed},\"n\":["));
            write_bigint(&mut out, &n[0]);
            out.push(',');
            write_bigint(&mut out, &n[1]);
            out.push_str("]}");
        }
    }
    out.push_str("]}");
    out
}

/// Parses a basis change written by [`basis_change_to_json`].
pub fn basis_change_from_json(text: &str) -> Result<BasisChange, JsonError> {
    let root: Value = serde_json::from_str(text)?;
    let obj = root
        .as_object()
        .ok_or_else(|| JsonError::Document("top level must be an object".into()))?;
    let mut vertices = BTreeMap::new();
    for v in obj
        .get("vertices")
        .and_then(|v| v.as_array())
        .ok_or_else(|| JsonError::Document("missing \"vertices\" array".into()))?
    {
        let vo = v
            .as_object()
            .ok_or_else(|| JsonError::Document("vertex entry is not an object".into()))?;
        let id = vo
            .get("id")
            .and_then(|x| x.as_str())
            .ok_or_else(|| JsonError::Document("vertex entry: missing id".into()))?;
        let eps = parse_bigint(
            vo.get("epsilon")
                .ok_or_else(|| JsonError::Document("vertex entry: missing epsilon".into()))?,
            "epsilon",
        )?;
        let sig = vo
            .get("sigma")
            .and_then(|x| x.as_array())
            .ok_or_else(|| JsonError::Document("vertex entry: missing sigma".into()))?;
        if sig.len() != 2 {
            return doc_err("sigma must be 2x2");
        }
        let mut entries = Vec::with_capacity(4);
        for row in sig {
            let row = row
                .as_array()
                .ok_or_else(|| JsonError::Document("sigma row is not an array".into()))?;
            if row.len() != 2 {
                return doc_err("sigma must be 2x2");
            }
            for e in row {
                entries.push(parse_bigint(e, "sigma entry")?);
            }
        }
        vertices.insert(
            id.to_string(),
            VertexChange {
                epsilon: eps,
                sigma: IntMatrix::from_fn(2, 2, |r, c| entries[r * 2 + c].clone()),
            },
        );
    }
    let mut shifts = BTreeMap::new();
    for s in obj
        .get("shifts")
        .and_then(|v| v.as_array())
        .ok_or_else(|| JsonError::Document("missing \"shifts\" array".into()))?
    {
        let so = s
            .as_object()
            .ok_or_else(|| JsonError::Document("shift entry is not an object".into()))?;
        let edge = so
            .get("edge")
            .and_then(|x| x.as_str())
            .ok_or_else(|| JsonError::Document("shift entry: missing edge".into()))?;
        let reversed = so
            .get("reversed")
            .and_then(|x| x.as_bool())
            .ok_or_else(|| JsonError::Document("shift entry: missing reversed".into()))?;
        let n = so
            .get("n")
            .and_then(|x| x.as_array())
            .ok_or_else(|| JsonError::Document("shift entry: missing n".into()))?;
        if n.len() != 2 {
            return doc_err("shift n must have two entries");
        }
        shifts.insert(
            (edge.to_string(), reversed),
            [parse_bigint(&n[0], "n[0]")?, parse_bigint(&n[1], "n[1]")?],
        );
    }
    Ok(BasisChange { vertices, shifts })
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"{"blocks":[{"id":"v1","genus":1,"boundary":2},{"id":"v2","genus":1,"boundary":2}],"edges":[{"id":"e1","from":["v1",0],"to":["v2",0],"matrix":[[0,0,1],[0,1,0],[1,0,0]]},{"id":"e2","from":["v1",1],"to":["v2",1],"matrix":[[0,1,0],[1,0,0],[0,0,1]]}],"convention":"C1"}"#;

    #[test]
    fn reads_spec_shaped_document() {
        let g = manifold_from_json(DOC, false).unwrap();
        assert_eq!(g.blocks().len(), 2);
        assert_eq!(g.edges().len(), 2);
        assert!(g.validate().is_valid());
    }

    #[test]
    fn canonical_output_roundtrips_byte_exactly() {
        let g = manifold_from_json(DOC, false).unwrap();
        let s = manifold_to_json(&g);
        let g2 = manifold_from_json(&s, false).unwrap();
        assert_eq!(manifold_to_json(&g2), s);
    }

    #[test]
    fn big_integers_use_strings() {
        let doc = r#"{"blocks":[{"id":"v","genus":1,"boundary":1}],"edges":[{"id":"e","from":["v",0],"to":["v",0],"matrix":[[0,0,1],[0,1,"18014398509481984"],[1,0,0]]}],"convention":"C1"}"#;
        let g = manifold_from_json(doc, false).unwrap();
        let s = manifold_to_json(&g);
        assert!(s.contains("\"18014398509481984\""));
        assert_eq!(
            manifold_to_json(&manifold_from_json(&s, false).unwrap()),
            s
        );
    }

    #[test]
    fn transpose_flag_transposes() {
        let g = manifold_from_json(DOC, true).unwrap();
        let m = g.edges()[1].gluing.matrix();
        assert_eq!(
            m,
            &IntMatrix::from_rows_i64(&[vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 1]]).transpose()
        );
    }

    #[test]
    fn rejects_garbage() {
        assert!(manifold_from_json("{not json", false).is_err());
        assert!(manifold_from_json("{\"blocks\":3}", false).is_err());
        assert!(manifold_from_json(
            r#"{"blocks":[],"edges":[{"id":"e","from":["v",0],"to":["v",0],"matrix":[[0,0],[0,1]]}]}"#,
            false
        )
        .is_err());
    }

    #[test]
    fn basis_change_roundtrip() {
        let g = manifold_from_json(DOC, false).unwrap();
        let mut h = BasisChange::identity();
        h.vertices.insert(
            "v1".into(),
            VertexChange {
                epsilon: (-1).into(),
                sigma: IntMatrix::from_rows_i64(&[vec![0, 1], vec![1, 0]]),
            },
        );
        h.shifts.insert(("e1".into(), false), [3.into(), (-2).into()]);
        let s = basis_change_to_json(&g, &h);
        let h2 = basis_change_from_json(&s).unwrap();
        assert_eq!(h2.vertex_change("v1"), h.vertex_change("v1"));
        assert_eq!(h2.shift("e1", false), h.shift("e1", false));
        assert_eq!(h2.shift("e2", true), h.shift("e2", true));
    }
}
