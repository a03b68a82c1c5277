//! Stable report documents for the command-line interface.
//!
//! Reports are `serde_json` values with alphabetically ordered keys and
//! entries sorted by id, so serialized output is deterministic. Large
//! integers follow the manifold format: plain numbers inside the 53-bit
//! range, decimal strings beyond it.

use crate::charge::{charge_data, ChargeData, ChargeError, OrthogonalityVerdict};
use crate::invariants::{invariant_set, InvariantSet};
use crate::lattice::Lattice;
use crate::transform::{AssertionRecord, PipelineReport, ReglueResult, UnwindResult, WitnessOutcome};
use crate::wstructure::{GraphManifold, ValidationReport};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde_json::{json, Map, Value};

pub fn bigint_json(v: &BigInt) -> Value {
    if v.abs() <= BigInt::from((1i64 << 53) - 1) {
        Value::from(i64::try_from(v.clone()).expect("bounded"))
    } else {
        Value::String(v.to_string())
    }
}

pub fn biguint_json(v: &BigUint) -> Value {
    bigint_json(&BigInt::from(v.clone()))
}

/// Exact rational as a string "n" or "n/d".
pub fn rational_json(r: &BigRational) -> Value {
    if r.denom().is_one() {
        bigint_json(r.numer())
    } else {
        Value::String(format!("{}/{}", r.numer(), r.denom()))
    }
}

pub fn lattice_json(l: &Lattice) -> Value {
    Value::Array(
        l.basis_rows()
            .iter()
            .map(|row| Value::Array(row.iter().map(bigint_json).collect()))
            .collect(),
    )
}

pub fn validation_json(r: &ValidationReport) -> Value {
    json!({
        "schema": "gm-report/1",
        "kind": "validation",
        "valid": r.is_valid(),
        "violations": r.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
    })
}

pub fn validation_text(r: &ValidationReport) -> String {
    if r.is_valid() {
        "valid\n".to_string()
    } else {
        r.violations
            .iter()
            .map(|v| format!("violation: {v}\n"))
            .collect()
    }
}

fn sorted_charge(g: &GraphManifold) -> Result<Vec<ChargeData>, ChargeError> {
    let mut ids: Vec<(String, usize)> = g
        .blocks()
        .iter()
        .enumerate()
        .map(|(i, b)| (b.id.clone(), i))
        .collect();
    ids.sort();
    ids.into_iter().map(|(_, v)| charge_data(g, v)).collect()
}

fn charge_vertex_json(g: &GraphManifold, inv: &InvariantSet, cd: &ChargeData) -> Value {
    let vi = inv.vertex(&cd.vertex_id).expect("vertex invariants");
    let c1 = g
        .boundary_of(cd.vertex)
        .iter()
        .all(|w| {
            let gm = crate::wstructure::GluingMatrix::new(
                g.gluing_of(*w).expect("valid manifold"),
            );
            crate::invariants::intersection_number(&gm).is_one()
        });
    let c2 = vi.j.is_one();
    let c3 = cd
        .k_of_b
        .as_ref()
        .map(|k| k[0] == BigRational::from(BigInt::from(0)) && k[1] == BigRational::from(BigInt::from(0)));
    let mut o = Map::new();
    o.insert("id".into(), Value::String(cd.vertex_id.clone()));
    o.insert("dimQ".into(), Value::from(cd.dim_q));
    o.insert("dimA".into(), Value::from(cd.dim_a));
    o.insert("chargeVanishing".into(), Value::Bool(cd.charge_vanishing));
    o.insert(
        "conditions".into(),
        json!({
            "c1": c1,
            "c2": c2,
            "c3": c3,
        }),
    );
    o.insert(
        "kOfB".into(),
        match &cd.k_of_b {
            Some(k) => Value::Array(vec![rational_json(&k[0]), rational_json(&k[1])]),
            None => Value::Null,
        },
    );
    o.insert(
        "bDefined".into(),
        Value::Bool(cd.b_generator.as_ref().is_some_and(|b| !b.degenerate)),
    );
    Value::Object(o)
}

/// Invariant and charge report: per-edge intersection data, per-vertex
/// type and secondary index, charge conditions, manifold type.
pub fn full_report_json(g: &GraphManifold) -> Result<Value, ChargeError> {
    let inv = invariant_set(g)?;
    let mut edges: Vec<_> = inv.edges.iter().collect();
    edges.sort_by(|a, b| a.edge_id.cmp(&b.edge_id));
    let edges_json: Vec<Value> = edges
        .iter()
        .map(|e| {
            json!({
                "id": e.edge_id,
                "i": biguint_json(&e.i),
                "feIndex": biguint_json(&e.fe_index),
                "pW": lattice_json(&e.p_w),
                "pFrom": lattice_json(&e.p_from),
                "pTo": lattice_json(&e.p_to),
            })
        })
        .collect();
    let mut vertices: Vec<_> = inv.vertices.iter().collect();
    vertices.sort_by(|a, b| a.vertex_id.cmp(&b.vertex_id));
    let vertices_json: Vec<Value> = vertices
        .iter()
        .map(|v| {
            let g_ref = g;
            json!({
                "id": v.vertex_id,
                "type": v.vtype,
                "j": biguint_json(&v.j),
                "pV": lattice_json(&v.p_v),
                "classes": v.classes.iter().map(|c| json!({
                    "lattice": lattice_json(&c.lattice),
                    "members": c.members.iter().map(|&w| g_ref.directed_edge_name(w)).collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    let charge: Vec<Value> = sorted_charge(g)?
        .iter()
        .map(|cd| charge_vertex_json(g, &inv, cd))
        .collect();
    Ok(json!({
        "schema": "gm-report/1",
        "kind": "report",
        "manifoldType": inv.manifold_type,
        "edges": edges_json,
        "vertices": vertices_json,
        "charge": charge,
    }))
}

pub fn full_report_text(g: &GraphManifold) -> Result<String, ChargeError> {
    let inv = invariant_set(g)?;
    let mut out = String::new();
    out.push_str(&format!("manifold type: {}\n", inv.manifold_type));
    let mut edges: Vec<_> = inv.edges.iter().collect();
    edges.sort_by(|a, b| a.edge_id.cmp(&b.edge_id));
    for e in edges {
        out.push_str(&format!(
            "edge {}: i={} index={} P={}\n",
            e.edge_id,
            e.i,
            e.fe_index,
            lattice_text(&e.p_w)
        ));
    }
    let mut vertices: Vec<_> = inv.vertices.iter().collect();
    vertices.sort_by(|a, b| a.vertex_id.cmp(&b.vertex_id));
    for v in vertices {
        let classes: Vec<String> = v
            .classes
            .iter()
            .map(|c| {
                format!(
                    "{}:{}",
                    lattice_text(&c.lattice),
                    c.members
                        .iter()
                        .map(|&w| g.directed_edge_name(w))
                        .collect::<Vec<_>>()
                        .join(",")
                )
            })
            .collect();
        out.push_str(&format!(
            "vertex {}: type={} j={} classes=[{}]\n",
            v.vertex_id,
            v.vtype,
            v.j,
            classes.join(" | ")
        ));
    }
    for cd in sorted_charge(g)? {
        let c3 = match &cd.k_of_b {
            Some(k) if k[0] == BigRational::from(BigInt::from(0))
                && k[1] == BigRational::from(BigInt::from(0)) => "yes",
            Some(_) => "no",
            None => "n/a",
        };
        out.push_str(&format!(
            "charge {}: dimQ={} dimA={} vanishing={} kOfB=0? {}\n",
            cd.vertex_id,
            cd.dim_q,
            cd.dim_a,
            if cd.charge_vanishing { "yes" } else { "no" },
            c3,
        ));
    }
    Ok(out)
}

fn lattice_text(l: &Lattice) -> String {
    let rows: Vec<String> = l
        .basis_rows()
        .iter()
        .map(|r| {
            format!(
                "({})",
                r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
            )
        })
        .collect();
    format!("[{}]", rows.join(" "))
}

pub fn verdict_json(v: &OrthogonalityVerdict, witness: Option<&WitnessOutcome>) -> Value {
    let mut o = Map::new();
    o.insert("schema".into(), Value::String("gm-report/1".into()));
    o.insert("kind".into(), Value::String("orthogonality".into()));
    match v {
        OrthogonalityVerdict::Pass => {
            o.insert("verdict".into(), Value::String("pass".into()));
        }
        OrthogonalityVerdict::Refuted {
            condition,
            location,
            detail,
        } => {
            o.insert("verdict".into(), Value::String("refuted".into()));
            o.insert(
                "failing".into(),
                json!({
                    "condition": condition,
                    "location": location,
                    "detail": detail,
                }),
            );
        }
        OrthogonalityVerdict::NotApplicable { vertex, vtype } => {
            o.insert("verdict".into(), Value::String("not-applicable".into()));
            o.insert(
                "failing".into(),
                json!({ "vertex": vertex, "type": vtype }),
            );
        }
    }
    if let Some(WitnessOutcome::Witness {
        flipped_vertices, ..
    }) = witness
    {
        o.insert(
            "witness".into(),
            json!({ "found": true, "flippedVertices": flipped_vertices }),
        );
    }
    Value::Object(o)
}

pub fn verdict_text(v: &OrthogonalityVerdict, witness: Option<&WitnessOutcome>) -> String {
    let mut s = match v {
        OrthogonalityVerdict::Pass => "orthogonal: pass\n".to_string(),
        OrthogonalityVerdict::Refuted {
            condition,
            location,
            detail,
        } => format!("orthogonal: refuted (condition {condition} at {location}: {detail})\n"),
        OrthogonalityVerdict::NotApplicable { vertex, vtype } => {
            format!("orthogonal: not applicable (vertex {vertex} has type {vtype})\n")
        }
    };
    if let Some(WitnessOutcome::Witness { .. }) = witness {
        s.push_str("witness: found\n");
    }
    s
}

fn assertions_json(records: &[AssertionRecord]) -> Value {
    Value::Array(
        records
            .iter()
            .map(|r| {
                json!({
                    "name": r.name,
                    "ok": r.ok,
                    "detail": r.detail,
                })
            })
            .collect(),
    )
}

fn assertions_text(records: &[AssertionRecord]) -> String {
    records
        .iter()
        .map(|r| {
            format!(
                "[{}] {}{}\n",
                if r.ok { "ok" } else { "FAIL" },
                r.name,
                if r.detail.is_empty() {
                    String::new()
                } else {
                    format!(" ({})", r.detail)
                }
            )
        })
        .collect()
}

pub fn reglue_json(r: &ReglueResult) -> Value {
    json!({
        "schema": "gm-report/1",
        "kind": "reglue",
        "assertions": assertions_json(&r.assertions),
        "ok": crate::transform::assertions_ok(&r.assertions),
    })
}

pub fn reglue_text(r: &ReglueResult) -> String {
    format!(
        "reglue: {}\n{}",
        if crate::transform::assertions_ok(&r.assertions) {
            "ok"
        } else {
            "ASSERTION FAILURE"
        },
        assertions_text(&r.assertions)
    )
}

pub fn unwind_json(u: &UnwindResult) -> Value {
    json!({
        "schema": "gm-report/1",
        "kind": "unwind",
        "jProduct": biguint_json(&u.j_product),
        "vertices": u.vertices.iter().map(|v| json!({
            "id": v.vertex_id,
            "fiber": lattice_json(&v.fiber),
            "j": biguint_json(&v.j),
            "copies": v.copies,
        })).collect::<Vec<_>>(),
        "edges": u.edges.iter().map(|e| json!({
            "id": e.edge_id,
            "coverLattice": lattice_json(&e.a_lattice),
            "index": biguint_json(&e.index_in_l),
            "expectedIndex": biguint_json(&e.expected_index),
            "boundaryFrom": e.boundary_from,
            "boundaryTo": e.boundary_to,
            "zFlipped": e.z_flipped,
        })).collect::<Vec<_>>(),
        "assertions": assertions_json(&u.assertions),
        "ok": crate::transform::assertions_ok(&u.assertions),
    })
}

pub fn unwind_text(u: &UnwindResult) -> String {
    let mut s = format!("unwind: J = {}\n", u.j_product);
    for v in &u.vertices {
        s.push_str(&format!(
            "vertex {}: j={} fiber={} copies={}\n",
            v.vertex_id,
            v.j,
            lattice_text(&v.fiber),
            v.copies
        ));
    }
    for e in &u.edges {
        s.push_str(&format!(
            "edge {}: (L:A)={} expected={} boundary {} | {}\n",
            e.edge_id, e.index_in_l, e.expected_index, e.boundary_from, e.boundary_to
        ));
    }
    s.push_str(&assertions_text(&u.assertions));
    s
}

pub fn pipeline_json(p: &PipelineReport) -> Value {
    json!({
        "schema": "gm-report/1",
        "kind": "orthogonalize",
        "unwind": unwind_json(&p.unwind),
        "reglue": reglue_json(&p.reglue),
        "ok": p.all_assertions_ok(),
    })
}

pub fn pipeline_text(p: &PipelineReport) -> String {
    format!("{}\n{}", unwind_text(&p.unwind), reglue_text(&p.reglue))
}

/// Pretty JSON plus a trailing newline (the CLI's canonical report shape).
pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serialization");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_cycle_example, gen_orthogonal, GraphShape, PermAssignment};

    #[test]
    fn report_is_deterministic() {
        let g = gen_orthogonal(GraphShape::Cycle(4), PermAssignment::Alternating, 0).unwrap();
        let a = render(&full_report_json(&g).unwrap());
        let b = render(&full_report_json(&g).unwrap());
        assert_eq!(a, b);
        assert!(a.contains("\"manifoldType\": 2"));
    }

    #[test]
    fn text_report_mentions_all_parts() {
        let g = gen_cycle_example(3, false).unwrap();
        let t = full_report_text(&g).unwrap();
        assert!(t.contains("manifold type: 1"));
        assert!(t.contains("edge e1"));
        assert!(t.contains("vertex v1"));
        assert!(t.contains("charge v1"));
    }
}
