//! Reduction of a capacitated game with a c-matching to a unit-capacity game
//! with a matching, and the payoff maps between the two solution sets.
//!
//! Every vertex `u` becomes `c_u` copies named `u#1 .. u#c_u`. A matched edge
//! `uv` becomes the single edge between copy `sigma_u(v)` of `u` and copy
//! `sigma_v(u)` of `v`, where `sigma_u` numbers `u`'s matched partners
//! `1..=d_u`. A non-matching edge becomes the complete bipartite bundle
//! between all copies of its endpoints. Copies `d_u + 1 ..= c_u` stay
//! uncovered.

use num_traits::Zero;
use thiserror::Error;

use crate::model::{Allocation, CMatching, Instance, ModelError, Rational, Solution};
use crate::semantics::{
    check_unit_solution, is_balanced, is_stable, outside_options, unit_is_balanced, unit_is_stable,
    unit_outside_options, SemanticsError,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReductionError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid labelling: {0}")]
    InvalidLabelling(String),
    #[error("not a unit-capacity solution on the auxiliary matching: {0}")]
    InvalidUnitSolution(#[from] SemanticsError),
    #[error("solution is not on the bundle's matching")]
    ForeignMatching,
    #[error("pair is not related by the payoff map: {0}")]
    NotRelated(String),
}

pub fn copy_id(id: &str, i: usize) -> String {
    format!("{id}#{i}")
}

#[derive(Debug, Clone)]
pub struct AuxiliaryBundle {
    original: Instance,
    matching: CMatching,
    aux: Instance,
    aux_matching: CMatching,
    // labels[u][i] = matched partner v with sigma_u(v) = i + 1
    labels: Vec<Vec<usize>>,
    // copies[u][i] = aux vertex u#(i + 1)
    copies: Vec<Vec<usize>>,
    // aux vertex -> (u, i) with i 1-based
    origin: Vec<(usize, usize)>,
    // original matched edge -> its aux edge
    aux_edge: Vec<Option<usize>>,
}

/// Builds the bundle with each `sigma_u` numbering partners in id order.
pub fn build_auxiliary(inst: &Instance, m: &CMatching) -> Result<AuxiliaryBundle, ReductionError> {
    let labels = (0..inst.vertex_count())
        .map(|u| m.partners(inst, u).map(|(v, _)| v).collect())
        .collect();
    build_auxiliary_with_labels(inst, m, labels)
}

/// Builds the bundle from explicit labellings: `labels[u]` lists `u`'s
/// matched partners in `sigma_u` order.
pub fn build_auxiliary_with_labels(
    inst: &Instance,
    m: &CMatching,
    labels: Vec<Vec<usize>>,
) -> Result<AuxiliaryBundle, ReductionError> {
    // Re-validate the matching against this instance.
    let m = CMatching::new(inst, m.edges().iter().copied())?;
    if labels.len() != inst.vertex_count() {
        return Err(ReductionError::InvalidLabelling(format!(
            "{} labellings for {} vertices",
            labels.len(),
            inst.vertex_count()
        )));
    }
    for (u, list) in labels.iter().enumerate() {
        let mut got = list.clone();
        got.sort_unstable();
        let want: Vec<usize> = m.partners(inst, u).map(|(v, _)| v).collect();
        if got != want {
            return Err(ReductionError::InvalidLabelling(format!(
                "labelling of {} is not a bijection onto its matched partners",
                inst.id(u)
            )));
        }
    }

    let sigma = |u: usize, v: usize| labels[u].iter().position(|&p| p == v).expect("partner") + 1;

    let mut vertices = Vec::new();
    for u in 0..inst.vertex_count() {
        for i in 1..=inst.capacity(u) as usize {
            vertices.push((copy_id(inst.id(u), i), 1i64));
        }
    }
    let mut edges: Vec<(String, String, Rational)> = Vec::new();
    for (k, e) in inst.edges().iter().enumerate() {
        if m.contains(k) {
            edges.push((
                copy_id(inst.id(e.u), sigma(e.u, e.v)),
                copy_id(inst.id(e.v), sigma(e.v, e.u)),
                e.weight,
            ));
        } else {
            for i in 1..=inst.capacity(e.u) as usize {
                for j in 1..=inst.capacity(e.v) as usize {
                    edges.push((copy_id(inst.id(e.u), i), copy_id(inst.id(e.v), j), e.weight));
                }
            }
        }
    }
    let aux = Instance::new(vertices, edges.iter().map(|(a, b, w)| (a.as_str(), b.as_str(), *w)))?;

    let copies: Vec<Vec<usize>> = (0..inst.vertex_count())
        .map(|u| {
            (1..=inst.capacity(u) as usize)
                .map(|i| aux.index_of(&copy_id(inst.id(u), i)).expect("copy exists"))
                .collect()
        })
        .collect();
    let mut origin = vec![(0, 0); aux.vertex_count()];
    for (u, list) in copies.iter().enumerate() {
        for (i, &c) in list.iter().enumerate() {
            origin[c] = (u, i + 1);
        }
    }
    let mut aux_edge = vec![None; inst.edge_count()];
    for &k in m.edges() {
        let e = inst.edge(k);
        let a = copies[e.u][sigma(e.u, e.v) - 1];
        let b = copies[e.v][sigma(e.v, e.u) - 1];
        aux_edge[k] = Some(aux.edge_between(a, b).expect("matched aux edge exists"));
    }
    let aux_matching = CMatching::new(&aux, aux_edge.iter().flatten().copied())?;

    Ok(AuxiliaryBundle {
        original: inst.clone(),
        matching: m,
        aux,
        aux_matching,
        labels,
        copies,
        origin,
        aux_edge,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreservationReport {
    /// `(u, i)` with `i <= d_u` where the two outside options differ.
    pub alpha_mismatches: Vec<(usize, usize)>,
    /// Same comparison for uncovered copies `i > d_u`.
    pub uncovered_copy_mismatches: Vec<(usize, usize)>,
    pub stable_original: bool,
    pub stable_aux: bool,
    pub balanced_original: bool,
    pub balanced_aux: bool,
}

impl PreservationReport {
    pub fn alpha_preserved(&self) -> bool {
        self.alpha_mismatches.is_empty()
    }

    pub fn stability_preserved(&self) -> bool {
        self.stable_original == self.stable_aux
    }

    pub fn balance_preserved(&self) -> bool {
        self.balanced_original == self.balanced_aux
    }

    pub fn holds(&self) -> bool {
        self.alpha_preserved() && self.stability_preserved() && self.balance_preserved()
    }
}

impl AuxiliaryBundle {
    pub fn original(&self) -> &Instance {
        &self.original
    }

    pub fn matching(&self) -> &CMatching {
        &self.matching
    }

    pub fn aux(&self) -> &Instance {
        &self.aux
    }

    pub fn aux_matching(&self) -> &CMatching {
        &self.aux_matching
    }

    /// `u`'s matched partners in label order.
    pub fn labels(&self, u: usize) -> &[usize] {
        &self.labels[u]
    }

    /// `sigma_u(v)`, 1-based.
    pub fn sigma(&self, u: usize, v: usize) -> Option<usize> {
        self.labels[u].iter().position(|&p| p == v).map(|i| i + 1)
    }

    /// Aux vertex `u#i`, 1-based.
    pub fn copy(&self, u: usize, i: usize) -> usize {
        self.copies[u][i - 1]
    }

    pub fn copies(&self, u: usize) -> &[usize] {
        &self.copies[u]
    }

    /// `(u, i)` for aux vertex `u#i`.
    pub fn origin(&self, aux_vertex: usize) -> (usize, usize) {
        self.origin[aux_vertex]
    }

    /// Aux edge carrying original matched edge `e`.
    pub fn aux_edge(&self, e: usize) -> Option<usize> {
        self.aux_edge[e]
    }

    /// Re-derives the structural invariants of the construction; `Err` names the first failure.
    pub fn check_invariants(&self) -> Result<(), String> {
        let (g, m) = (&self.original, &self.matching);
        if !self.aux.is_unit_capacity() {
            return Err("aux instance has a capacity above 1".into());
        }
        let copies: usize = (0..g.vertex_count()).map(|u| g.capacity(u) as usize).sum();
        if self.aux.vertex_count() != copies {
            return Err(format!("{} aux vertices, expected {copies}", self.aux.vertex_count()));
        }
        let expected_edges: usize = m.len()
            + g.edges()
                .iter()
                .enumerate()
                .filter(|(k, _)| !m.contains(*k))
                .map(|(_, e)| (g.capacity(e.u) * g.capacity(e.v)) as usize)
                .sum::<usize>();
        if self.aux.edge_count() != expected_edges {
            return Err(format!("{} aux edges, expected {expected_edges}", self.aux.edge_count()));
        }
        if self.aux_matching.len() != m.len() {
            return Err("aux matching size differs".into());
        }
        if self.aux_matching.weight(&self.aux) != m.weight(g) {
            return Err("aux matching weight differs".into());
        }
        for &k in m.edges() {
            let e = g.edge(k);
            let ae = self.aux.edge(self.aux_edge[k].ok_or("matched edge without aux edge")?);
            let want = (
                self.copy(e.u, self.sigma(e.u, e.v).ok_or("missing label")?),
                self.copy(e.v, self.sigma(e.v, e.u).ok_or("missing label")?),
            );
            let got = (ae.u.min(ae.v), ae.u.max(ae.v));
            if got != (want.0.min(want.1), want.0.max(want.1)) || ae.weight != e.weight {
                return Err(format!("matched edge ({}, {}) maps incorrectly", g.id(e.u), g.id(e.v)));
            }
        }
        for (k, e) in g.edges().iter().enumerate() {
            if m.contains(k) {
                continue;
            }
            for &a in self.copies(e.u) {
                for &b in self.copies(e.v) {
                    match self.aux.edge_between(a, b) {
                        Some(ae) if self.aux.weight(ae) == e.weight && !self.aux_matching.contains(ae) => {}
                        _ => return Err(format!("bundle of ({}, {}) incomplete", g.id(e.u), g.id(e.v))),
                    }
                }
            }
        }
        for u in 0..g.vertex_count() {
            for i in 1..=g.capacity(u) as usize {
                let covered = self.aux_matching.degree(self.copy(u, i)) == 1;
                if covered != (i <= m.degree(u) as usize) {
                    return Err(format!("copy {} has wrong coverage", copy_id(g.id(u), i)));
                }
            }
        }
        Ok(())
    }

    /// Maps a unit solution on the aux matching to a solution on the original matching.
    pub fn phi(&self, x: &Allocation) -> Result<Solution, ReductionError> {
        check_unit_solution(&self.aux, &self.aux_matching, x)?;
        let g = &self.original;
        let mut splits = vec![(Rational::zero(), Rational::zero()); g.edge_count()];
        for &k in self.matching.edges() {
            let e = g.edge(k);
            let su = self.sigma(e.u, e.v).expect("label");
            let sv = self.sigma(e.v, e.u).expect("label");
            splits[k] = (x.get(self.copy(e.u, su)), x.get(self.copy(e.v, sv)));
        }
        Ok(Solution::new(g, self.matching.clone(), splits)?)
    }

    /// Maps a solution on the original matching to a unit solution on the aux matching.
    pub fn phi_inverse(&self, z: &Solution) -> Result<Allocation, ReductionError> {
        if z.matching() != &self.matching {
            return Err(ReductionError::ForeignMatching);
        }
        let g = &self.original;
        Solution::new(g, z.matching().clone(), z.splits().to_vec())?;
        let mut values = vec![Rational::zero(); self.aux.vertex_count()];
        for u in 0..g.vertex_count() {
            for (i, &v) in self.labels[u].iter().enumerate() {
                values[self.copies[u][i]] = z.z(g, u, v);
            }
        }
        Ok(Allocation::new(values)?)
    }

    /// Compares outside options, stability and balance across a related pair.
    pub fn verify_preservation(
        &self,
        z: &Solution,
        x: &Allocation,
    ) -> Result<PreservationReport, ReductionError> {
        let mapped = self.phi(x)?;
        if &mapped != z {
            return Err(ReductionError::NotRelated("z differs from phi(x)".into()));
        }
        let g = &self.original;
        let alpha = outside_options(g, z);
        let alpha_aux = unit_outside_options(&self.aux, &self.aux_matching, x);
        let mut alpha_mismatches = Vec::new();
        let mut uncovered_copy_mismatches = Vec::new();
        for u in 0..g.vertex_count() {
            for i in 1..=g.capacity(u) as usize {
                if alpha[u] != alpha_aux[self.copy(u, i)] {
                    if i <= self.matching.degree(u) as usize {
                        alpha_mismatches.push((u, i));
                    } else {
                        uncovered_copy_mismatches.push((u, i));
                    }
                }
            }
        }
        let balance = is_balanced(g, z);
        Ok(PreservationReport {
            alpha_mismatches,
            uncovered_copy_mismatches,
            stable_original: is_stable(g, z).stable,
            stable_aux: unit_is_stable(&self.aux, &self.aux_matching, x),
            balanced_original: balance.balanced,
            balanced_aux: unit_is_balanced(&self.aux, &self.aux_matching, x),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i128) -> Rational {
        Rational::from_integer(n)
    }

    fn path() -> (Instance, CMatching) {
        let inst = Instance::new([("a", 1), ("b", 2), ("c", 1)], [("a", "b", q(10)), ("b", "c", q(2))]).unwrap();
        let m = CMatching::from_pairs(&inst, &[("a", "b"), ("b", "c")]).unwrap();
        (inst, m)
    }

    #[test]
    fn path_construction_is_forced() {
        let (inst, m) = path();
        let bundle = build_auxiliary(&inst, &m).unwrap();
        bundle.check_invariants().unwrap();
        let aux = bundle.aux();
        assert_eq!(aux.ids(), &["a#1", "b#1", "b#2", "c#1"]);
        let pairs = bundle.aux_matching().pairs(aux);
        assert_eq!(pairs, vec![("a#1", "b#1"), ("b#2", "c#1")]);
        assert_eq!(aux.edge_count(), 2);
    }

    #[test]
    fn phi_transcribes_payoffs() {
        let (inst, m) = path();
        let bundle = build_auxiliary(&inst, &m).unwrap();
        let aux = bundle.aux();
        let mut x = vec![q(0); 4];
        x[aux.vertex("a#1").unwrap()] = q(3);
        x[aux.vertex("b#1").unwrap()] = q(7);
        x[aux.vertex("b#2").unwrap()] = q(2);
        x[aux.vertex("c#1").unwrap()] = q(0);
        let z = bundle.phi(&Allocation::new(x.clone()).unwrap()).unwrap();
        assert_eq!(z.z_by_ids(&inst, "a", "b").unwrap(), q(3));
        assert_eq!(z.z_by_ids(&inst, "b", "a").unwrap(), q(7));
        assert_eq!(z.z_by_ids(&inst, "b", "c").unwrap(), q(2));
        assert_eq!(z.z_by_ids(&inst, "c", "b").unwrap(), q(0));
        assert_eq!(bundle.phi_inverse(&z).unwrap().values(), &x[..]);
    }

    #[test]
    fn empty_matching_maps_zero_to_zero() {
        let (inst, _) = path();
        let bundle = build_auxiliary(&inst, &CMatching::empty(&inst)).unwrap();
        bundle.check_invariants().unwrap();
        let zero = Allocation::zeros(bundle.aux().vertex_count());
        let z = bundle.phi(&zero).unwrap();
        assert_eq!(z, Solution::empty(&inst));
        assert_eq!(bundle.phi_inverse(&z).unwrap(), zero);
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let (inst, m) = path();
        let bundle = build_auxiliary(&inst, &m).unwrap();
        let bad = Allocation::new(vec![q(1), q(1), q(1), q(1)]).unwrap();
        assert!(matches!(bundle.phi(&bad), Err(ReductionError::InvalidUnitSolution(_))));
        let other = Solution::empty(&inst);
        assert_eq!(bundle.phi_inverse(&other), Err(ReductionError::ForeignMatching));
        let b = inst.vertex("b").unwrap();
        let mut labels: Vec<Vec<usize>> = (0..3).map(|u| m.partners(&inst, u).map(|p| p.0).collect()).collect();
        labels[b].pop();
        assert!(matches!(
            build_auxiliary_with_labels(&inst, &m, labels),
            Err(ReductionError::InvalidLabelling(_))
        ));
    }
}
