//! JSON documents for instances, solutions and allocations.
//!
//! Weights and payoffs are written as exact strings (`"35/3"`); on input an
//! integer JSON number is accepted as well.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    format_rational, parse_rational, Allocation, CMatching, Instance, ModelError, Rational,
    Solution,
};

#[derive(Debug, Error)]
pub enum DocError {
    #[error("malformed document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A rational written either as a JSON integer or as a string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RationalText {
    Int(i64),
    Text(String),
}

impl RationalText {
    pub fn parse(&self) -> Result<Rational, ModelError> {
        match self {
            RationalText::Int(n) => Ok(Rational::from_integer(*n as i128)),
            RationalText::Text(s) => parse_rational(s),
        }
    }
}

impl From<&Rational> for RationalText {
    fn from(value: &Rational) -> Self {
        RationalText::Text(format_rational(value))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VertexDoc {
    pub id: String,
    pub capacity: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub u: String,
    pub v: String,
    pub weight: RationalText,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceDoc {
    pub vertices: Vec<VertexDoc>,
    pub edges: Vec<EdgeDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitDoc {
    pub u: String,
    pub v: String,
    pub z_uv: RationalText,
    pub z_vu: RationalText,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionDoc {
    pub matching: Vec<(String, String)>,
    pub splits: Vec<SplitDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AllocationDoc {
    pub payoffs: BTreeMap<String, RationalText>,
}

pub fn instance_from_doc(doc: &InstanceDoc) -> Result<Instance, ModelError> {
    let edges = doc
        .edges
        .iter()
        .map(|e| Ok((e.u.as_str(), e.v.as_str(), e.weight.parse()?)))
        .collect::<Result<Vec<_>, ModelError>>()?;
    Instance::new(doc.vertices.iter().map(|v| (v.id.clone(), v.capacity)), edges)
}

pub fn instance_to_doc(inst: &Instance) -> InstanceDoc {
    InstanceDoc {
        vertices: (0..inst.vertex_count())
            .map(|u| VertexDoc { id: inst.id(u).to_string(), capacity: inst.capacity(u) as i64 })
            .collect(),
        edges: inst
            .edges()
            .iter()
            .map(|e| EdgeDoc {
                u: inst.id(e.u).to_string(),
                v: inst.id(e.v).to_string(),
                weight: (&e.weight).into(),
            })
            .collect(),
    }
}

pub fn load_instance(text: &str) -> Result<Instance, DocError> {
    let doc: InstanceDoc = serde_json::from_str(text)?;
    Ok(instance_from_doc(&doc)?)
}

pub fn write_instance(inst: &Instance) -> String {
    serde_json::to_string_pretty(&instance_to_doc(inst)).expect("instance documents serialize")
}

pub fn solution_from_doc(inst: &Instance, doc: &SolutionDoc) -> Result<Solution, ModelError> {
    let matching = CMatching::from_pairs(inst, &doc.matching)?;
    let entries = doc
        .splits
        .iter()
        .map(|s| Ok((s.u.as_str(), s.v.as_str(), s.z_uv.parse()?, s.z_vu.parse()?)))
        .collect::<Result<Vec<_>, ModelError>>()?;
    Solution::from_split_list(inst, matching, &entries)
}

pub fn solution_to_doc(inst: &Instance, sol: &Solution) -> SolutionDoc {
    let matching = sol.matching();
    SolutionDoc {
        matching: matching
            .pairs(inst)
            .into_iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect(),
        splits: matching
            .edges()
            .iter()
            .map(|&e| {
                let edge = inst.edge(e);
                let (zu, zv) = sol.splits()[e];
                SplitDoc {
                    u: inst.id(edge.u).to_string(),
                    v: inst.id(edge.v).to_string(),
                    z_uv: (&zu).into(),
                    z_vu: (&zv).into(),
                }
            })
            .collect(),
    }
}

pub fn load_solution(inst: &Instance, text: &str) -> Result<Solution, DocError> {
    let doc: SolutionDoc = serde_json::from_str(text)?;
    Ok(solution_from_doc(inst, &doc)?)
}

pub fn write_solution(inst: &Instance, sol: &Solution) -> String {
    serde_json::to_string_pretty(&solution_to_doc(inst, sol)).expect("solution documents serialize")
}

/// Vertices missing from the document get payoff 0.
pub fn allocation_from_doc(inst: &Instance, doc: &AllocationDoc) -> Result<Allocation, ModelError> {
    let mut values = vec![Rational::from_integer(0); inst.vertex_count()];
    for (id, value) in &doc.payoffs {
        values[inst.vertex(id)?] = value.parse()?;
    }
    Allocation::new(values)
}

pub fn allocation_to_doc(inst: &Instance, x: &Allocation) -> AllocationDoc {
    AllocationDoc {
        payoffs: (0..inst.vertex_count())
            .map(|u| (inst.id(u).to_string(), (&x.get(u)).into()))
            .collect(),
    }
}

pub fn load_allocation(inst: &Instance, text: &str) -> Result<Allocation, DocError> {
    let doc: AllocationDoc = serde_json::from_str(text)?;
    Ok(allocation_from_doc(inst, &doc)?)
}

pub fn write_allocation(inst: &Instance, x: &Allocation) -> String {
    serde_json::to_string_pretty(&allocation_to_doc(inst, x)).expect("allocation documents serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TRIANGLE: &str = r#"{
        "vertices": [{"id": "a", "capacity": 1}, {"id": "b", "capacity": 1}, {"id": "c", "capacity": 1}],
        "edges": [{"u": "a", "v": "b", "weight": 1}, {"u": "b", "v": "c", "weight": "1"},
                  {"u": "c", "v": "a", "weight": "2/2"}]
    }"#;

    #[test]
    fn integer_and_string_weights_load() {
        let inst = load_instance(TRIANGLE).unwrap();
        assert_eq!(inst.edge_count(), 3);
        assert!(inst.edges().iter().all(|e| e.weight == Rational::from_integer(1)));
    }

    #[test]
    fn malformed_documents_are_parse_errors() {
        assert!(matches!(load_instance("{"), Err(DocError::Parse(_))));
        assert!(matches!(
            load_instance(r#"{"vertices": [{"id": "a", "capacity": 1}], "edges": [{"u": "a", "v": "Q", "weight": 1}]}"#),
            Err(DocError::Model(ModelError::DanglingEndpoint { missing, .. })) if missing == "Q"
        ));
        assert!(matches!(
            load_instance(r#"{"vertices": [{"id": "a", "capacity": -1}], "edges": []}"#),
            Err(DocError::Model(ModelError::BadCapacity(..)))
        ));
    }

    #[test]
    fn solution_document_round_trips() {
        let inst = load_instance(TRIANGLE).unwrap();
        let text = r#"{"matching": [["b", "a"]], "splits": [{"u": "b", "v": "a", "z_uv": "1/3", "z_vu": "2/3"}]}"#;
        let sol = load_solution(&inst, text).unwrap();
        assert_eq!(sol.z_by_ids(&inst, "a", "b").unwrap(), Rational::new(2, 3));
        let again = load_solution(&inst, &write_solution(&inst, &sol)).unwrap();
        assert_eq!(sol, again);
    }

    proptest! {
        #[test]
        fn instance_documents_round_trip(
            caps in proptest::collection::vec(1i64..5, 1..7),
            raw in proptest::collection::vec((0usize..7, 0usize..7, 0i128..50, 1i128..7), 0..15),
        ) {
            let n = caps.len();
            let ids: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
            let mut seen = std::collections::HashSet::new();
            let edges: Vec<_> = raw
                .into_iter()
                .filter(|(a, b, _, _)| a % n != b % n && seen.insert(((a % n).min(b % n), (a % n).max(b % n))))
                .map(|(a, b, p, q)| (ids[a % n].clone(), ids[b % n].clone(), Rational::new(p, q)))
                .collect();
            let inst = Instance::new(ids.iter().cloned().zip(caps), edges).unwrap();
            let back = load_instance(&write_instance(&inst)).unwrap();
            prop_assert_eq!(back, inst);
        }
    }
}
