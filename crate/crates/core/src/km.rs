//! The Kramer-Mesner pipeline: closure and order of matrix groups acting
//! projectively, orbits on Grassmannians, the orbit incidence matrix, the
//! 0/1 exact linear-system solver, selection verification and design
//! assembly, and the isomorphism-type counting workflow.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::gaussian_binomial;
use crate::grassmann::{canonical_matrices, visit_grassmannian};
use crate::subspace::{MatGf, Subspace};

/// Scalar-normalizes a projective representative: the first nonzero entry
/// in row-major order becomes 1.
pub fn scalar_normalize(m: &MatGf, field: &Field) -> MatGf {
    let lead = m.data().iter().copied().find(|&x| x != 0);
    let Some(lead) = lead else { return m.clone() };
    if lead == 1 {
        return m.clone();
    }
    let inv = field.inv(lead).expect("lead entry is nonzero");
    let mut out = m.clone();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            out.set(i, j, field.mul(m.get(i, j), inv));
        }
    }
    out
}

/// A subgroup of PGL(v, q) stored as the full closure of scalar-normalized
/// matrices.
#[derive(Debug, Clone)]
pub struct ProjectiveGroup {
    pub field: Field,
    pub v: usize,
    pub generators: Vec<MatGf>,
    pub elements: Vec<MatGf>,
}

impl ProjectiveGroup {
    pub fn order(&self) -> u64 {
        self.elements.len() as u64
    }
}

/// Breadth-first closure under multiplication. Generators must be
/// invertible; inverses arise as powers since the group is finite.
pub fn group_closure(field: &Field, generators: &[MatGf]) -> Result<ProjectiveGroup> {
    let v = generators
        .first()
        .map(|m| m.rows())
        .ok_or_else(|| Error::InvalidParameter("no generators".into()))?;
    for g in generators {
        if g.rows() != v || g.cols() != v {
            return Err(Error::InvalidParameter("generators must be square of equal size".into()));
        }
        if !g.is_invertible(field) {
            return Err(Error::SingularGenerator);
        }
    }
    let gens: Vec<MatGf> = generators.iter().map(|g| scalar_normalize(g, field)).collect();
    let mut seen: HashMap<Vec<u8>, ()> = HashMap::new();
    let mut elements = Vec::new();
    let identity = scalar_normalize(&MatGf::identity(v), field);
    seen.insert(identity.data().to_vec(), ());
    elements.push(identity);
    let mut frontier = 0usize;
    while frontier < elements.len() {
        let cur = elements[frontier].clone();
        frontier += 1;
        for g in &gens {
            let prod = scalar_normalize(&cur.mul(g, field), field);
            if !seen.contains_key(prod.data()) {
                seen.insert(prod.data().to_vec(), ());
                elements.push(prod);
            }
        }
    }
    Ok(ProjectiveGroup {
        field: field.clone(),
        v,
        generators: gens,
        elements,
    })
}

enum OrbitIndex {
    Packed(HashMap<u128, u32>),
    General(HashMap<Subspace, u32>),
}

/// The orbit partition of [V,d]_q under a group, with the lexicographically
/// least canonical form of each orbit as its representative.
pub struct OrbitTable {
    pub d: usize,
    pub transversal: Vec<Subspace>,
    pub orbit_sizes: Vec<u64>,
    index: OrbitIndex,
}

impl OrbitTable {
    pub fn orbit_count(&self) -> usize {
        self.transversal.len()
    }

    pub fn orbit_of(&self, s: &Subspace) -> Option<u32> {
        match &self.index {
            OrbitIndex::Packed(m) => m.get(&s.packed_code()?).copied(),
            OrbitIndex::General(m) => m.get(s).copied(),
        }
    }

    /// Multiset of orbit sizes as (size, multiplicity), ascending.
    pub fn size_profile(&self) -> Vec<(u64, usize)> {
        let mut counts: HashMap<u64, usize> = HashMap::new();
        for &s in &self.orbit_sizes {
            *counts.entry(s).or_insert(0) += 1;
        }
        let mut out: Vec<(u64, usize)> = counts.into_iter().collect();
        out.sort_unstable();
        out
    }
}

/// Computes the orbits of the group on [V,d]_q by BFS from unvisited
/// canonical forms, applying the generators and re-canonicalizing. The
/// subspace action is on row vectors: U maps to rowspace(cm(U) * M).
pub fn orbits(group: &ProjectiveGroup, d: usize) -> OrbitTable {
    let field = &group.field;
    let v = group.v;
    let use_packed = {
        let probe = Subspace::zero(field, v);
        // packing depends on (q, v, d); probe with a d-dim dummy is not
        // possible for d > 0, so compute the bit budget directly
        let bits = v as u32 * (32 - (field.q() - 1).leading_zeros());
        let _ = probe;
        bits as usize * d + 8 <= 128
    };
    let mut packed: HashMap<u128, u32> = HashMap::new();
    let mut general: HashMap<Subspace, u32> = HashMap::new();
    let mut transversal: Vec<Subspace> = Vec::new();
    let mut orbit_sizes: Vec<u64> = Vec::new();
    let mut stack: Vec<Subspace> = Vec::new();

    visit_grassmannian(field, v, d, |mat, _| {
        let seed = Subspace::from_canonical(field, mat.clone());
        let seen = if use_packed {
            packed.contains_key(&seed.packed_code().unwrap())
        } else {
            general.contains_key(&seed)
        };
        if seen {
            return;
        }
        let oid = transversal.len() as u32;
        let mut size = 0u64;
        let mut rep = seed.clone();
        if use_packed {
            packed.insert(seed.packed_code().unwrap(), oid);
        } else {
            general.insert(seed.clone(), oid);
        }
        stack.push(seed);
        while let Some(cur) = stack.pop() {
            size += 1;
            for g in &group.generators {
                let img = cur.apply(g);
                if img < rep {
                    rep = img.clone();
                }
                let inserted = if use_packed {
                    packed.insert(img.packed_code().unwrap(), oid).is_none()
                } else {
                    general.insert(img.clone(), oid).is_none()
                };
                if inserted {
                    stack.push(img);
                }
            }
        }
        // orbit-stabilizer: orbit sizes divide the group order
        assert_eq!(group.order() % size, 0, "orbit size {size} does not divide group order");
        transversal.push(rep);
        orbit_sizes.push(size);
    });

    OrbitTable {
        d,
        transversal,
        orbit_sizes,
        index: if use_packed {
            OrbitIndex::Packed(packed)
        } else {
            OrbitIndex::General(general)
        },
    }
}

/// All members of the orbit of `rep`.
pub fn expand_orbit(group: &ProjectiveGroup, rep: &Subspace) -> Vec<Subspace> {
    let mut seen: HashMap<Subspace, ()> = HashMap::new();
    let mut out = Vec::new();
    let mut stack = vec![rep.clone()];
    seen.insert(rep.clone(), ());
    while let Some(cur) = stack.pop() {
        out.push(cur.clone());
        for g in &group.generators {
            let img = cur.apply(g);
            if !seen.contains_key(&img) {
                seen.insert(img.clone(), ());
                stack.push(img);
            }
        }
    }
    out
}

/// The Kramer-Mesner instance: the tau x kappa integer matrix with
/// a_ij = #{K in k-orbit j | T_i <= K} for t-orbit representatives T_i,
/// and the right-hand side lambda.
pub struct KmInstance {
    pub field: Field,
    pub v: usize,
    pub t: usize,
    pub k: usize,
    pub lambda: u64,
    pub group_order: u64,
    pub t_orbits: OrbitTable,
    pub k_orbits: OrbitTable,
    pub a: Vec<Vec<u64>>,
}

/// Builds A from the k-orbit representatives: each representative's
/// t-subspaces are located in the t-orbit table and rescaled by the orbit
/// lengths; the row and column counting identities are asserted.
pub fn km_matrix(
    group: &ProjectiveGroup,
    t: usize,
    k: usize,
    lambda: u64,
) -> Result<KmInstance> {
    let field = &group.field;
    let v = group.v;
    let q = field.q() as u64;
    let t_orbits = orbits(group, t);
    let k_orbits = orbits(group, k);
    let tau = t_orbits.orbit_count();
    let kappa = k_orbits.orbit_count();
    let transversal = canonical_matrices(field, k, t);
    let mut a = vec![vec![0u64; kappa]; tau];
    for (j, rep) in k_orbits.transversal.iter().enumerate() {
        // b_ij = #t-subspaces of K_j lying in orbit i
        let mut b = vec![0u64; tau];
        for coeff in &transversal {
            let t_sub = Subspace::canonicalize(field, &coeff.mul(rep.cm(), field));
            let i = t_orbits
                .orbit_of(&t_sub)
                .ok_or_else(|| Error::InternalConsistency("t-subspace missing from orbit index".into()))?;
            b[i as usize] += 1;
        }
        for i in 0..tau {
            let num = k_orbits.orbit_sizes[j]
                .checked_mul(b[i])
                .ok_or(Error::CounterOverflow)?;
            if num % t_orbits.orbit_sizes[i] != 0 {
                return Err(Error::InternalConsistency(format!(
                    "a[{i}][{j}] = {num}/{} is not integral",
                    t_orbits.orbit_sizes[i]
                )));
            }
            a[i][j] = num / t_orbits.orbit_sizes[i];
        }
    }
    // row identity: sum_j a_ij = [v-t, k-t]_q
    let row_target = gaussian_binomial((v - t) as u64, (k - t) as u64, q)
        .to_u64()
        .ok_or(Error::CounterOverflow)?;
    for (i, row) in a.iter().enumerate() {
        let s: u64 = row.iter().sum();
        if s != row_target {
            return Err(Error::InternalConsistency(format!(
                "row {i} sums to {s}, expected {row_target}"
            )));
        }
    }
    // column identity: sum_i |T_i| a_ij = |K_j| [k,t]_q
    let kt = gaussian_binomial(k as u64, t as u64, q)
        .to_u64()
        .ok_or(Error::CounterOverflow)?;
    for j in 0..kappa {
        let s: u64 = (0..tau).map(|i| t_orbits.orbit_sizes[i] * a[i][j]).sum();
        if s != k_orbits.orbit_sizes[j] * kt {
            return Err(Error::InternalConsistency(format!(
                "column {j} fails the counting identity"
            )));
        }
    }
    Ok(KmInstance {
        field: field.clone(),
        v,
        t,
        k,
        lambda,
        group_order: group.order(),
        t_orbits,
        k_orbits,
        a,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMode {
    First,
    Count,
    Enumerate,
}

/// Exact solution counter: propagation to a fixpoint (forced inclusions
/// and exclusions, per-row subset-sum reachability), factorization of the
/// residual system into independent row/column components with caching of
/// residual subproblems, and branching on a column of the tightest row.
/// Requires kappa <= 128 and tau <= 64; columns live in a u128 mask.
struct Counter<'s> {
    a: &'s [Vec<u64>],
    lambda: u64,
    budget: Option<u64>,
    nodes: u64,
    complete: bool,
    /// Residual subproblems keyed by (undecided-column mask, packed row
    /// needs); identical residuals recur across branches, and caching them
    /// is what makes full solution counts tractable.
    cache: HashMap<(u128, u128), u64>,
    cache_bits: Option<u32>,
    hits: u64,
    /// Solutions accumulated in fully counted subtrees (progress metric).
    found: u64,
    /// Per row: mask of columns with a positive entry.
    supports: Vec<u128>,
    /// Per column: rows with a positive entry.
    col_rows: Vec<Vec<u32>>,
}

const COUNTER_CACHE_CAP: usize = 12_000_000;

fn iter_bits128(mut mask: u128, mut f: impl FnMut(usize)) {
    while mask != 0 {
        let j = mask.trailing_zeros() as usize;
        f(j);
        mask &= mask - 1;
    }
}

impl Counter<'_> {
    /// Excludes overshooting columns and includes forced columns until a
    /// fixpoint; returns false on contradiction. `rows` is the mask of
    /// rows still tracked; needs of satisfied rows reach 0 and their
    /// leftover support is excluded by the overshoot rule.
    fn propagate(&self, cols: &mut u128, rows: u64, needs: &mut [u64]) -> bool {
        loop {
            let mut changed = false;
            let mut feasible = true;
            let mut r_mask = rows;
            while r_mask != 0 && feasible {
                let r = r_mask.trailing_zeros() as usize;
                r_mask &= r_mask - 1;
                let need = needs[r];
                let mut sum = 0u64;
                let mut keep: u128 = 0;
                iter_bits128(self.supports[r] & *cols, |j| {
                    let a = self.a[r][j];
                    if a > need {
                        *cols &= !(1u128 << j);
                        changed = true;
                    } else {
                        sum += a;
                        keep |= 1u128 << j;
                    }
                });
                if sum < need {
                    feasible = false;
                    break;
                }
                if need > 0 && sum == need {
                    // the whole remaining support of this row is forced in
                    let mut ok = true;
                    iter_bits128(keep, |j| {
                        if !ok {
                            return;
                        }
                        *cols &= !(1u128 << j);
                        for &rr in &self.col_rows[j] {
                            let a = self.a[rr as usize][j];
                            if a > needs[rr as usize] {
                                ok = false;
                                return;
                            }
                            needs[rr as usize] -= a;
                        }
                    });
                    if !ok {
                        feasible = false;
                        break;
                    }
                    changed = true;
                }
            }
            if !feasible {
                return false;
            }
            if !changed {
                // subset-sum reachability per unsatisfied row
                if self.lambda < 128 {
                    let mut r_mask = rows;
                    while r_mask != 0 {
                        let r = r_mask.trailing_zeros() as usize;
                        r_mask &= r_mask - 1;
                        let need = needs[r];
                        if need == 0 {
                            continue;
                        }
                        let cap_mask = (1u128 << (need + 1)) - 1;
                        let mut reach = 1u128;
                        iter_bits128(self.supports[r] & *cols, |j| {
                            let a = self.a[r][j];
                            if a <= need {
                                reach |= (reach << a) & cap_mask;
                            }
                        });
                        if reach & (1u128 << need) == 0 {
                            return false;
                        }
                    }
                }
                return true;
            }
        }
    }

    /// Counts assignments of the columns in `cols` meeting every row's
    /// need exactly. `needs` is indexed by global row id.
    fn count(&mut self, mut cols: u128, rows: u64, needs: &mut Vec<u64>) -> Option<u64> {
        self.nodes += 1;
        if let Some(b) = self.budget {
            if self.nodes > b {
                self.complete = false;
                return None;
            }
        }
        if !self.propagate(&mut cols, rows, needs) {
            return Some(0);
        }
        // unsatisfied rows; any column not supporting one is free
        let mut active: u64 = 0;
        let mut live: u128 = 0;
        iter_bits64(rows, |r| {
            if needs[r] > 0 {
                active |= 1u64 << r;
                live |= self.supports[r];
            }
        });
        live &= cols;
        let free = (cols & !live).count_ones();
        if active == 0 {
            assert!(free < 64, "free-column count overflows u64");
            self.found += 1u64 << free;
            return Some(1u64 << free);
        }
        let key = self.cache_key(active, needs, live);
        if let Some(k) = key {
            if let Some(&hit) = self.cache.get(&k) {
                self.hits += 1;
                return hit.checked_mul(1u64 << free);
            }
        }
        // split into independent components over shared support columns
        let comps = self.split_components(active, live);
        let residual = if comps.len() > 1 {
            let mut product = 1u64;
            for &(comp_rows, comp_cols) in &comps {
                let c = self.count(comp_cols, comp_rows, needs)?;
                if c == 0 {
                    product = 0;
                    break;
                }
                product = product.checked_mul(c).expect("solution count fits u64");
            }
            product
        } else {
            // branch on the largest-entry column of the tightest row
            let mut best: Option<(u32, u64, usize)> = None;
            iter_bits64(active, |r| {
                let support = (self.supports[r] & live).count_ones();
                let cand = (support, needs[r], r);
                if best.is_none_or(|b| cand < b) {
                    best = Some(cand);
                }
            });
            let branch_row = best.expect("active row exists").2;
            let mut branch_col = 0usize;
            let mut branch_val = 0u64;
            iter_bits128(self.supports[branch_row] & live, |j| {
                if self.a[branch_row][j] > branch_val {
                    branch_val = self.a[branch_row][j];
                    branch_col = j;
                }
            });
            let rest = live & !(1u128 << branch_col);
            // include
            let mut inc_needs = needs.clone();
            let mut ok = true;
            for &rr in &self.col_rows[branch_col] {
                let a = self.a[rr as usize][branch_col];
                if active >> rr & 1 == 0 {
                    if a > 0 {
                        ok = false;
                        break;
                    }
                    continue;
                }
                if a > inc_needs[rr as usize] {
                    ok = false;
                    break;
                }
                inc_needs[rr as usize] -= a;
            }
            let with = if ok {
                self.count(rest, active, &mut inc_needs)?
            } else {
                0
            };
            let without = self.count(rest, active, needs)?;
            with + without
        };
        if let Some(k) = key {
            if live.count_ones() <= 56 && self.cache.len() < COUNTER_CACHE_CAP {
                self.cache.insert(k, residual);
            }
        }
        residual
            .checked_mul(1u64 << free)
            .map(Some)
            .expect("solution count fits u64")
    }

    fn cache_key(&self, active: u64, needs: &[u64], live: u128) -> Option<(u128, u128)> {
        let bits = self.cache_bits?;
        let mut packed = 0u128;
        iter_bits64(active, |r| {
            packed |= (needs[r] as u128) << (bits * r as u32);
        });
        Some((live, packed))
    }

    /// Connected components of the active rows under shared support
    /// columns, as (row mask, column mask) pairs.
    fn split_components(&self, active: u64, live: u128) -> Vec<(u64, u128)> {
        let mut comps: Vec<(u64, u128)> = Vec::new();
        let mut remaining = active;
        while remaining != 0 {
            let seed = remaining.trailing_zeros() as usize;
            let mut comp_rows: u64 = 1u64 << seed;
            let mut comp_cols: u128 = 0;
            loop {
                let mut next_cols = comp_cols;
                iter_bits64(comp_rows, |r| {
                    next_cols |= self.supports[r] & live;
                });
                let mut next_rows = comp_rows;
                iter_bits128(next_cols & !comp_cols, |j| {
                    for &rr in &self.col_rows[j] {
                        if active >> rr & 1 == 1 {
                            next_rows |= 1u64 << rr;
                        }
                    }
                });
                if next_rows == comp_rows && next_cols == comp_cols {
                    break;
                }
                comp_rows = next_rows;
                comp_cols = next_cols;
            }
            comps.push((comp_rows, comp_cols));
            remaining &= !comp_rows;
        }
        comps
    }
}

fn iter_bits64(mut mask: u64, mut f: impl FnMut(usize)) {
    while mask != 0 {
        let r = mask.trailing_zeros() as usize;
        f(r);
        mask &= mask - 1;
    }
}

/// Exact count of all solutions via the propagating component counter.
/// When every row sums to 2*lambda the complement map chi -> 1 - chi pairs
/// the solutions, so one column is pinned and the count doubled. Falls
/// back to the plain depth-first search when the masks do not fit.
fn km_count(inst: &KmInstance, budget: Option<u64>) -> SolveOutcome {
    let tau = inst.a.len();
    let kappa = inst.a.first().map_or(0, |row| row.len());
    if kappa > 128 || tau > 64 {
        return km_count_dfs(inst, budget);
    }
    let need_bits = 64 - inst.lambda.leading_zeros().min(63);
    let cache_bits = (need_bits * tau as u32 <= 128).then_some(need_bits);
    let supports: Vec<u128> = (0..tau)
        .map(|i| {
            let mut m = 0u128;
            for j in 0..kappa {
                if inst.a[i][j] > 0 {
                    m |= 1u128 << j;
                }
            }
            m
        })
        .collect();
    let col_rows: Vec<Vec<u32>> = (0..kappa)
        .map(|j| {
            (0..tau)
                .filter(|&i| inst.a[i][j] > 0)
                .map(|i| i as u32)
                .collect()
        })
        .collect();
    let mut counter = Counter {
        a: &inst.a,
        lambda: inst.lambda,
        budget,
        nodes: 0,
        complete: true,
        cache: HashMap::new(),
        cache_bits,
        hits: 0,
        found: 0,
        supports,
        col_rows,
    };
    let all_rows: u64 = if tau == 64 { u64::MAX } else { (1u64 << tau) - 1 };
    let all_cols: u128 = if kappa == 128 {
        u128::MAX
    } else {
        (1u128 << kappa) - 1
    };
    let symmetric = kappa > 0
        && inst.lambda > 0
        && (0..tau).all(|i| inst.a[i].iter().sum::<u64>() == 2 * inst.lambda);
    let count = if symmetric {
        // pin column 0 as included and double
        let mut needs = vec![inst.lambda; tau];
        let mut feasible = true;
        for i in 0..tau {
            if inst.a[i][0] > needs[i] {
                feasible = false;
                break;
            }
            needs[i] -= inst.a[i][0];
        }
        let with_first = if feasible {
            counter.count(all_cols & !1, all_rows, &mut needs)
        } else {
            Some(0)
        };
        with_first.map(|c| 2 * c)
    } else {
        let mut needs = vec![inst.lambda; tau];
        counter.count(all_cols, all_rows, &mut needs)
    };
    if std::env::var_os("QDESIGN_COUNT_DEBUG").is_some() {
        eprintln!(
            "count debug: {} nodes, {} cache entries, {} hits, {} solutions in finished subtrees",
            counter.nodes,
            counter.cache.len(),
            counter.hits,
            counter.found
        );
    }
    SolveOutcome {
        solutions: Vec::new(),
        count: count.unwrap_or(0),
        complete: counter.complete,
        nodes: counter.nodes,
    }
}

/// Plain depth-first count for instances too large for the mask-based
/// counter.
fn km_count_dfs(inst: &KmInstance, budget: Option<u64>) -> SolveOutcome {
    let kappa = inst.a.first().map_or(0, |row| row.len());
    let tau = inst.a.len();
    let mut nodes = 0u64;
    let mut count = 0u64;
    let mut complete = true;
    let mut rows = vec![0u64; tau];
    let mut suffix = vec![vec![0u64; tau]; kappa + 1];
    for d in (0..kappa).rev() {
        for i in 0..tau {
            suffix[d][i] = suffix[d + 1][i] + inst.a[i][d];
        }
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(
        inst: &KmInstance,
        suffix: &[Vec<u64>],
        depth: usize,
        rows: &mut [u64],
        nodes: &mut u64,
        count: &mut u64,
        complete: &mut bool,
        budget: Option<u64>,
    ) {
        if !*complete {
            return;
        }
        *nodes += 1;
        if let Some(b) = budget {
            if *nodes > b {
                *complete = false;
                return;
            }
        }
        for i in 0..rows.len() {
            if rows[i] > inst.lambda || rows[i] + suffix[depth][i] < inst.lambda {
                return;
            }
        }
        if depth == suffix.len() - 1 {
            *count += 1;
            return;
        }
        for i in 0..rows.len() {
            rows[i] += inst.a[i][depth];
        }
        rec(inst, suffix, depth + 1, rows, nodes, count, complete, budget);
        for i in 0..rows.len() {
            rows[i] -= inst.a[i][depth];
        }
        rec(inst, suffix, depth + 1, rows, nodes, count, complete, budget);
    }
    rec(
        inst, &suffix, 0, &mut rows, &mut nodes, &mut count, &mut complete, budget,
    );
    SolveOutcome {
        solutions: Vec::new(),
        count,
        complete,
        nodes,
    }
}

#[derive(Debug)]
pub struct SolveOutcome {
    /// Solutions as sorted orbit-id lists (First: at most one; Enumerate:
    /// all; Count: empty).
    pub solutions: Vec<Vec<u32>>,
    pub count: u64,
    /// False when the node budget ran out before the search finished.
    pub complete: bool,
    pub nodes: u64,
}

/// Depth-first 0/1 search over orbit selections. Columns are branched in
/// descending orbit size (large orbits tighten the row bounds early).
/// A branch dies when some row exceeds lambda, or when for some row no
/// subset of the remaining columns sums to exactly the missing amount
/// (per-row subset-sum reachability, precomputed as suffix bitmasks when
/// lambda < 128; a plain max-contribution bound otherwise).
pub fn km_solve(inst: &KmInstance, mode: SolveMode, budget: Option<u64>) -> SolveOutcome {
    let tau = inst.a.len();
    let kappa = inst.a.first().map_or(0, |row| row.len());
    if mode == SolveMode::Count {
        return km_count(inst, budget);
    }
    let mut order: Vec<usize> = (0..kappa).collect();
    order.sort_by_key(|&j| (std::cmp::Reverse(inst.k_orbits.orbit_sizes[j]), j));

    // reach[d][i]: bit s set iff some subset of columns order[d..] adds
    // exactly s to row i (sums clamped at lambda)
    let exact = inst.lambda < 128;
    let mask: u128 = if exact {
        (1u128 << (inst.lambda + 1)) - 1
    } else {
        0
    };
    let mut reach = vec![vec![1u128; tau]; kappa + 1];
    // suffix max bound, used when the reachability masks do not apply
    let mut suffix = vec![vec![0u64; tau]; kappa + 1];
    for d in (0..kappa).rev() {
        for i in 0..tau {
            let a = inst.a[i][order[d]];
            suffix[d][i] = suffix[d + 1][i] + a;
            if exact {
                let prev = reach[d + 1][i];
                let shifted = if a <= inst.lambda {
                    (prev << a) & mask
                } else {
                    0
                };
                reach[d][i] = prev | shifted;
            }
        }
    }

    struct Search<'s> {
        inst: &'s KmInstance,
        order: &'s [usize],
        suffix: &'s [Vec<u64>],
        reach: &'s [Vec<u128>],
        exact: bool,
        mode: SolveMode,
        budget: Option<u64>,
        nodes: u64,
        count: u64,
        chosen: Vec<u32>,
        solutions: Vec<Vec<u32>>,
        complete: bool,
    }

    impl Search<'_> {
        fn done(&self) -> bool {
            !self.complete || (self.mode == SolveMode::First && self.count > 0)
        }

        fn rec(&mut self, depth: usize, rows: &mut [u64]) {
            if self.done() {
                return;
            }
            self.nodes += 1;
            if let Some(b) = self.budget {
                if self.nodes > b {
                    self.complete = false;
                    return;
                }
            }
            let tau = rows.len();
            for i in 0..tau {
                if rows[i] > self.inst.lambda {
                    return;
                }
                let need = self.inst.lambda - rows[i];
                if self.exact {
                    if self.reach[depth][i] & (1u128 << need) == 0 {
                        return;
                    }
                } else if self.suffix[depth][i] < need {
                    return;
                }
            }
            if depth == self.order.len() {
                // the bounds force rows == lambda exactly here
                self.count += 1;
                if self.mode != SolveMode::Count {
                    let mut sol = self.chosen.clone();
                    sol.sort_unstable();
                    self.solutions.push(sol);
                }
                return;
            }
            let j = self.order[depth];
            // include column j
            for i in 0..tau {
                rows[i] += self.inst.a[i][j];
            }
            self.chosen.push(j as u32);
            self.rec(depth + 1, rows);
            self.chosen.pop();
            for i in 0..tau {
                rows[i] -= self.inst.a[i][j];
            }
            if self.done() {
                return;
            }
            // exclude column j
            self.rec(depth + 1, rows);
        }
    }

    let mut search = Search {
        inst,
        order: &order,
        suffix: &suffix,
        reach: &reach,
        exact,
        mode,
        budget,
        nodes: 0,
        count: 0,
        chosen: Vec::new(),
        solutions: Vec::new(),
        complete: true,
    };
    let mut rows = vec![0u64; tau];
    search.rec(0, &mut rows);
    SolveOutcome {
        solutions: search.solutions,
        count: search.count,
        complete: search.complete,
        nodes: search.nodes,
    }
}

/// Maps explicit orbit representatives (e.g. a published selection) to
/// orbit ids of this instance.
pub fn selection_from_reps(inst: &KmInstance, reps: &[Subspace]) -> Result<Vec<u32>> {
    let mut out = Vec::with_capacity(reps.len());
    for r in reps {
        let id = inst.k_orbits.orbit_of(r).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "representative {:?} is not a {}-subspace of the instance",
                r.row_codes(),
                inst.k
            ))
        })?;
        if out.contains(&id) {
            return Err(Error::InvalidParameter(format!(
                "representative {:?} repeats orbit {id}",
                r.row_codes()
            )));
        }
        out.push(id);
    }
    Ok(out)
}

/// Integer check A·chi = lambda·1; the first failing row is reported.
pub fn verify_selection(inst: &KmInstance, selection: &[u32]) -> Result<()> {
    for id in selection {
        if *id as usize >= inst.k_orbits.orbit_count() {
            return Err(Error::InvalidParameter(format!("orbit id {id} out of range")));
        }
    }
    for (i, row) in inst.a.iter().enumerate() {
        let s: u64 = selection.iter().map(|&j| row[j as usize]).sum();
        if s != inst.lambda {
            return Err(Error::Verification(format!(
                "row {i}: selection gives {s}, expected {}",
                inst.lambda
            )));
        }
    }
    Ok(())
}

/// Expands the selected orbits to a full block set and verifies it as a
/// t-(v,k,lambda)_q design.
pub fn assemble_design(
    group: &ProjectiveGroup,
    inst: &KmInstance,
    selection: &[u32],
) -> Result<crate::design::SubspaceDesign> {
    let mut blocks = std::collections::BTreeSet::new();
    for &j in selection {
        for b in expand_orbit(group, &inst.k_orbits.transversal[j as usize]) {
            blocks.insert(b);
        }
    }
    let d = crate::design::SubspaceDesign::new(
        &inst.field,
        inst.v,
        inst.k,
        inst.t,
        BigUint::from(inst.lambda),
        blocks,
    )?;
    crate::design::verify_design(&d)?;
    Ok(d)
}

/// Parses a generator word spec like "s^2,f" or "s^2,s*f,f^2" into factor
/// lists over the Singer image s and Frobenius image f.
pub fn parse_group_words(spec: &str) -> Result<Vec<Vec<(char, u32)>>> {
    let mut words = Vec::new();
    for word in spec.split(',') {
        let word = word.trim();
        if word.is_empty() {
            return Err(Error::InvalidParameter("empty generator word".into()));
        }
        let mut factors = Vec::new();
        for factor in word.split('*') {
            let factor = factor.trim();
            let (base, exp) = match factor.split_once('^') {
                Some((b, e)) => (
                    b.trim(),
                    e.trim().parse::<u32>().map_err(|_| {
                        Error::InvalidParameter(format!("bad exponent in `{factor}`"))
                    })?,
                ),
                None => (factor, 1),
            };
            let c = match base {
                "s" => 's',
                "f" => 'f',
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "unknown generator `{other}` (expected s or f)"
                    )))
                }
            };
            factors.push((c, exp));
        }
        words.push(factors);
    }
    Ok(words)
}

/// Realizes parsed words as matrices from the Singer and Frobenius images.
pub fn realize_words(
    field: &Field,
    singer: &MatGf,
    frobenius: &MatGf,
    words: &[Vec<(char, u32)>],
) -> Vec<MatGf> {
    let v = singer.rows();
    let mut out = Vec::with_capacity(words.len());
    for word in words {
        let mut m = MatGf::identity(v);
        for &(c, e) in word {
            let base = if c == 's' { singer } else { frobenius };
            for _ in 0..e {
                m = m.mul(base, field);
            }
        }
        out.push(m);
    }
    out
}
