//! Decompositions of the Grassmannian [V,k]_q into joins over the standard
//! chain: the q-Pascal split, the q-Vandermonde decomposition into ordinary
//! joins, and the decompositions into avoiding and covering joins, together
//! with exact partition verification and big-integer identity checks.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::gaussian_binomial;
use crate::grassmann::visit_grassmannian;
use crate::joins::{join_size, left_grassmannian, right_grassmannian, visit_join, JoinKind, JoinSpec};
use crate::subspace::Subspace;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecompKind {
    QPascal,
    Vandermonde { u: usize },
    Avoid { s: usize },
    Cover { s: usize },
}

/// One cell of a decomposition: a join over the flag V_{u1} <= V_{u2} whose
/// factors run through the full Grassmannians [V_{u1}, k1] and
/// [V/V_{u2}, kbar2]. Vandermonde cells outside the effective index range
/// are kept in the plan but are empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub index: usize,
    pub kind: JoinKind,
    pub u1: usize,
    pub u2: usize,
    pub k1: usize,
    pub kbar2: usize,
}

impl Cell {
    pub fn is_empty(&self, v: usize) -> bool {
        self.k1 > self.u1 || self.kbar2 > v - self.u2
    }

    pub fn join_spec(&self, v: usize) -> Option<JoinSpec> {
        if self.is_empty(v) {
            return None;
        }
        JoinSpec::new(self.kind, self.u1, self.u2, self.k1, self.kbar2).ok()
    }

    /// Exact number of subspaces in the cell:
    /// join size times the two Grassmannian factors.
    pub fn size(&self, v: usize, q: u64) -> BigUint {
        let Some(spec) = self.join_spec(v) else {
            return BigUint::zero();
        };
        join_size(&spec, q)
            * gaussian_binomial(self.u1 as u64, self.k1 as u64, q)
            * gaussian_binomial((v - self.u2) as u64, self.kbar2 as u64, q)
    }
}

#[derive(Debug, Clone)]
pub struct DecompositionPlan {
    pub kind: DecompKind,
    pub v: usize,
    pub k: usize,
    pub q: u64,
    pub cells: Vec<Cell>,
}

/// Builds the cell list of the decomposition exactly as in the generating
/// theorem over the standard chain.
pub fn make_decomposition(kind: DecompKind, v: usize, k: usize, q: u64) -> Result<DecompositionPlan> {
    if k > v {
        return Err(Error::InvalidParameter(format!(
            "k = {k} must lie in 0..={v}"
        )));
    }
    let cells = match kind {
        DecompKind::QPascal => {
            if k == 0 || k == v {
                return Err(Error::InvalidParameter(format!(
                    "q-Pascal split requires 1 <= k <= v-1, got k = {k}, v = {v}"
                )));
            }
            vec![
                // first step vertical: covering join over V/V_{v-1}
                Cell {
                    index: 0,
                    kind: JoinKind::Covering,
                    u1: v - 1,
                    u2: v,
                    k1: k - 1,
                    kbar2: 0,
                },
                // first step horizontal: avoiding join over V/V_{v-1}
                Cell {
                    index: 1,
                    kind: JoinKind::Avoiding,
                    u1: v - 1,
                    u2: v,
                    k1: k,
                    kbar2: 0,
                },
            ]
        }
        DecompKind::Vandermonde { u } => {
            if u > v {
                return Err(Error::InvalidParameter(format!(
                    "Vandermonde cut requires 0 <= u <= v, got u = {u}, v = {v}"
                )));
            }
            (0..=k)
                .map(|i| Cell {
                    index: i,
                    kind: JoinKind::Ordinary,
                    u1: u,
                    u2: u,
                    k1: i,
                    kbar2: k - i,
                })
                .collect()
        }
        DecompKind::Avoid { s } => {
            if k >= v || s > v - k - 1 {
                return Err(Error::InvalidParameter(format!(
                    "avoiding decomposition requires s in 0..={}, got s = {s}",
                    v as i64 - k as i64 - 1
                )));
            }
            (0..=k)
                .map(|i| Cell {
                    index: i,
                    kind: JoinKind::Avoiding,
                    u1: s + i,
                    u2: s + i + 1,
                    k1: i,
                    kbar2: k - i,
                })
                .collect()
        }
        DecompKind::Cover { s } => {
            if k == 0 || s > k - 1 {
                return Err(Error::InvalidParameter(format!(
                    "covering decomposition requires s in 0..={}, got s = {s}",
                    k as i64 - 1
                )));
            }
            (0..=v - k)
                .map(|i| Cell {
                    index: i,
                    kind: JoinKind::Covering,
                    u1: v - s - i - 1,
                    u2: v - s - i,
                    k1: k - s - 1,
                    kbar2: s,
                })
                .collect()
        }
    };
    for c in &cells {
        if let Some(spec) = c.join_spec(v) {
            debug_assert_eq!(spec.member_dim(), k);
        }
    }
    Ok(DecompositionPlan { kind, v, k, q, cells })
}

/// Materializes one cell: left Grassmannian times right Grassmannian times
/// the join template.
pub fn enumerate_cell(field: &Field, plan: &DecompositionPlan, cell: &Cell) -> Result<Vec<Subspace>> {
    let Some(spec) = cell.join_spec(plan.v) else {
        return Ok(Vec::new());
    };
    let mut out = Vec::new();
    for k1_sub in left_grassmannian(field, plan.v, &spec) {
        for k2_sub in right_grassmannian(field, plan.v, &spec) {
            visit_join(&k1_sub, &k2_sub, &spec, |s| out.push(s.clone()))?;
        }
    }
    Ok(out)
}

#[derive(Debug)]
pub struct PartitionReport {
    /// (cell index, exact member count) per cell, empty cells included.
    pub cell_counts: Vec<(usize, u64)>,
    pub total: u64,
}

/// Enumerates every cell and asserts pairwise disjointness and full
/// coverage of [V,k]_q. Desk-scale parameters only.
pub fn verify_partition(field: &Field, plan: &DecompositionPlan) -> Result<PartitionReport> {
    let mut seen: HashMap<Subspace, usize> = HashMap::new();
    let mut cell_counts = Vec::with_capacity(plan.cells.len());
    for cell in &plan.cells {
        let members = enumerate_cell(field, plan, cell)?;
        cell_counts.push((cell.index, members.len() as u64));
        for m in members {
            if let Some(prev) = seen.insert(m.clone(), cell.index) {
                return Err(Error::PartitionCheck(format!(
                    "subspace {:?} lies in cells {} and {}",
                    m.row_codes(),
                    prev,
                    cell.index
                )));
            }
        }
    }
    let expected = gaussian_binomial(plan.v as u64, plan.k as u64, plan.q);
    if BigUint::from(seen.len()) != expected {
        // find a witness gap
        let mut witness = None;
        visit_grassmannian(field, plan.v, plan.k, |mat, _| {
            if witness.is_none() {
                let s = Subspace::from_canonical(field, mat.clone());
                if !seen.contains_key(&s) {
                    witness = Some(s);
                }
            }
        });
        return Err(Error::PartitionCheck(format!(
            "cells cover {} of {} subspaces; missing witness {:?}",
            seen.len(),
            expected,
            witness.map(|w| w.row_codes())
        )));
    }
    Ok(PartitionReport {
        total: seen.len() as u64,
        cell_counts,
    })
}

/// Evaluates both sides of the counting identity of the generating theorem
/// with exact big integers. Returns (lhs, rhs); an inequality is an
/// implementation bug and reported as an internal-consistency error.
pub fn verify_identity(plan: &DecompositionPlan) -> Result<(BigUint, BigUint)> {
    let lhs = gaussian_binomial(plan.v as u64, plan.k as u64, plan.q);
    let rhs: BigUint = plan
        .cells
        .iter()
        .map(|c| c.size(plan.v, plan.q))
        .sum();
    if lhs != rhs {
        return Err(Error::InternalConsistency(format!(
            "decomposition identity fails for {:?}: lhs = {lhs}, rhs = {rhs}",
            plan.kind
        )));
    }
    Ok((lhs, rhs))
}
