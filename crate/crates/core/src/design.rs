//! Subspace designs and large sets: lambda maps, design verification,
//! t-equivalence, admissibility, and the parameter-transforming
//! constructions (dual, supplementary, reduced, derived, residual, merge),
//! together with the text file formats.

use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, Write};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::gaussian_binomial;
use crate::grassmann::{canonical_matrices, decode_block, encode_block, visit_grassmannian};
use crate::subspace::Subspace;

/// A t-(v,k,lambda)_q subspace design: a simple set of k-subspaces such
/// that (once verified) every t-subspace lies in exactly lambda blocks.
#[derive(Debug, Clone)]
pub struct SubspaceDesign {
    pub field: Field,
    pub v: usize,
    pub k: usize,
    pub t: usize,
    pub lambda: BigUint,
    pub blocks: BTreeSet<Subspace>,
}

impl SubspaceDesign {
    pub fn new(
        field: &Field,
        v: usize,
        k: usize,
        t: usize,
        lambda: BigUint,
        blocks: BTreeSet<Subspace>,
    ) -> Result<SubspaceDesign> {
        for b in &blocks {
            if b.v() != v {
                return Err(Error::AmbientMismatch {
                    left: v,
                    right: b.v(),
                });
            }
            if b.dim() != k {
                return Err(Error::InvalidParameter(format!(
                    "block of dimension {} in a {k}-design",
                    b.dim()
                )));
            }
        }
        Ok(SubspaceDesign {
            field: field.clone(),
            v,
            k,
            t,
            lambda,
            blocks,
        })
    }

    /// The supplementary design on the complementary block set, with
    /// lambda' = [v-t, k-t]_q - lambda.
    pub fn supplementary(&self) -> SubspaceDesign {
        let all_minus = complement_blocks(&self.field, self.v, self.k, &self.blocks);
        let lam = gaussian_binomial(
            (self.v - self.t) as u64,
            (self.k - self.t) as u64,
            self.field.q() as u64,
        ) - &self.lambda;
        SubspaceDesign {
            field: self.field.clone(),
            v: self.v,
            k: self.k,
            t: self.t,
            lambda: lam,
            blocks: all_minus,
        }
    }

    /// Blockwise dual, with parameters t-(v, v-k, lambda [v-k,t]/[k,t])_q.
    pub fn dual(&self) -> SubspaceDesign {
        let q = self.field.q() as u64;
        let num = &self.lambda * gaussian_binomial((self.v - self.k) as u64, self.t as u64, q);
        let den = gaussian_binomial(self.k as u64, self.t as u64, q);
        let (lam, rem) = num.div_rem(&den);
        debug_assert!(rem.is_zero());
        SubspaceDesign {
            field: self.field.clone(),
            v: self.v,
            k: self.v - self.k,
            t: self.t,
            lambda: lam,
            blocks: self.blocks.iter().map(|b| b.dual()).collect(),
        }
    }
}

/// All k-subspaces of GF(q)^v not in `blocks`.
pub fn complement_blocks(
    field: &Field,
    v: usize,
    k: usize,
    blocks: &BTreeSet<Subspace>,
) -> BTreeSet<Subspace> {
    let mut out = BTreeSet::new();
    visit_grassmannian(field, v, k, |mat, _| {
        let s = Subspace::from_canonical(field, mat.clone());
        if !blocks.contains(&s) {
            out.insert(s);
        }
    });
    out
}

/// Exact containment counts lambda(T, blocks) for every t-subspace T that
/// lies in at least one block. Counts are 64-bit checked; T-subspaces of
/// the blocks are enumerated per block, which is the cheap direction since
/// [k,t]_q < [v,t]_q.
pub struct LambdaMap {
    field: Field,
    v: usize,
    t: usize,
    packed: Option<HashMap<u128, u64>>,
    general: Option<HashMap<Subspace, u64>>,
}

impl LambdaMap {
    pub fn get(&self, t_sub: &Subspace) -> u64 {
        if let Some(m) = &self.packed {
            let key = t_sub.packed_code().expect("packed repr chosen only when codes fit");
            *m.get(&key).unwrap_or(&0)
        } else {
            *self.general.as_ref().unwrap().get(t_sub).unwrap_or(&0)
        }
    }

    /// Number of t-subspaces with a nonzero count.
    pub fn support_len(&self) -> usize {
        match (&self.packed, &self.general) {
            (Some(m), _) => m.len(),
            (_, Some(m)) => m.len(),
            _ => 0,
        }
    }

    pub fn counts(&self) -> Vec<u64> {
        if let Some(m) = &self.packed {
            m.values().copied().collect()
        } else {
            self.general.as_ref().unwrap().values().copied().collect()
        }
    }

    /// Smallest t-subspace in the support whose count violates `pred`.
    pub fn violating_key(&self, pred: impl Fn(u64) -> bool) -> Option<Subspace> {
        if let Some(m) = &self.packed {
            m.iter()
                .filter(|(_, &c)| !pred(c))
                .map(|(&key, _)| unpack_subspace(&self.field, self.v, self.t, key))
                .min()
        } else {
            self.general
                .as_ref()
                .unwrap()
                .iter()
                .filter(|(_, &c)| !pred(c))
                .map(|(s, _)| s.clone())
                .min()
        }
    }
}

fn pack_params(field: &Field, v: usize, t: usize) -> Option<u32> {
    let q = field.q();
    let bits = v as u32 * (32 - (q - 1).leading_zeros());
    if bits as usize * t + 8 <= 128 {
        Some(bits)
    } else {
        None
    }
}

fn unpack_subspace(field: &Field, v: usize, t: usize, key: u128) -> Subspace {
    let q = field.q() as u128;
    let bits = pack_params(field, v, t).expect("key was packed with these parameters");
    let mut key = key;
    let mut rows: Vec<Vec<u8>> = Vec::new();
    // rows were shifted in first-row-first, so the last row sits in the low bits
    loop {
        if key == 1 {
            break;
        }
        let mut code = key & ((1u128 << bits) - 1);
        key >>= bits;
        let mut row = vec![0u8; v];
        for j in (0..v).rev() {
            row[j] = (code % q) as u8;
            code /= q;
        }
        rows.insert(0, row);
    }
    let refs: Vec<&[u8]> = rows.iter().map(|r| r.as_slice()).collect();
    let mat = if refs.is_empty() {
        crate::subspace::MatGf::zeros(0, v)
    } else {
        crate::subspace::MatGf::from_rows(&refs)
    };
    Subspace::from_canonical(field, mat)
}

/// Builds the lambda map of a block set. Parallelizes over blocks with
/// per-worker partial maps merged at the end.
pub fn lambda_map<'a, I>(field: &Field, v: usize, t: usize, blocks: I) -> Result<LambdaMap>
where
    I: IntoIterator<Item = &'a Subspace>,
{
    let blocks: Vec<&Subspace> = blocks.into_iter().collect();
    let k = blocks.first().map_or(t, |b| b.dim());
    let transversal = canonical_matrices(field, k, t);
    let use_packed = pack_params(field, v, t).is_some();

    if use_packed {
        let map = blocks
            .par_chunks(8192)
            .map(|chunk| {
                let mut local: HashMap<u128, u64> = HashMap::new();
                for b in chunk {
                    for coeff in &transversal {
                        let t_sub = Subspace::canonicalize(field, &coeff.mul(b.cm(), field));
                        let key = t_sub.packed_code().unwrap();
                        *local.entry(key).or_insert(0) += 1;
                    }
                }
                local
            })
            .reduce(HashMap::new, |mut a, b| {
                for (k, c) in b {
                    let slot = a.entry(k).or_insert(0);
                    *slot = slot.checked_add(c).expect("counter overflow");
                }
                a
            });
        Ok(LambdaMap {
            field: field.clone(),
            v,
            t,
            packed: Some(map),
            general: None,
        })
    } else {
        let mut map: HashMap<Subspace, u64> = HashMap::new();
        for b in blocks {
            for coeff in &transversal {
                let t_sub = Subspace::canonicalize(field, &coeff.mul(b.cm(), field));
                let slot = map.entry(t_sub).or_insert(0);
                *slot = slot.checked_add(1).ok_or(Error::CounterOverflow)?;
            }
        }
        Ok(LambdaMap {
            field: field.clone(),
            v,
            t,
            packed: None,
            general: Some(map),
        })
    }
}

#[derive(Debug)]
pub struct DesignReport {
    pub t_spaces_checked: BigUint,
    pub lambda: BigUint,
    pub blocks: u64,
}

/// Checks that the lambda map is constant equal to the design's lambda over
/// the whole Grassmannian [V,t]_q. The first violating t-subspace is
/// reported as a witness.
pub fn verify_design(d: &SubspaceDesign) -> Result<DesignReport> {
    let q = d.field.q() as u64;
    let map = lambda_map(&d.field, d.v, d.t, &d.blocks)?;
    let lam = d
        .lambda
        .to_u64()
        .ok_or(Error::CounterOverflow)?;
    let expected_support = if lam == 0 {
        BigUint::zero()
    } else {
        gaussian_binomial(d.v as u64, d.t as u64, q)
    };
    if let Some(w) = map.violating_key(|c| c == lam) {
        return Err(Error::Verification(format!(
            "lambda({:?}) = {} != {}",
            w.row_codes(),
            map.get(&w),
            lam
        )));
    }
    if BigUint::from(map.support_len()) != expected_support {
        // some t-subspace is missed entirely
        let mut witness = None;
        visit_grassmannian(&d.field, d.v, d.t, |mat, _| {
            if witness.is_none() {
                let s = Subspace::from_canonical(&d.field, mat.clone());
                if map.get(&s) != lam {
                    witness = Some(s);
                }
            }
        });
        return Err(Error::Verification(format!(
            "lambda({:?}) = 0 != {}",
            witness.map(|w| w.row_codes()),
            lam
        )));
    }
    Ok(DesignReport {
        t_spaces_checked: expected_support,
        lambda: d.lambda.clone(),
        blocks: d.blocks.len() as u64,
    })
}

/// First t-subspace where the two block sets disagree, or None when they
/// are t-equivalent.
pub fn t_equivalence_witness(
    field: &Field,
    v: usize,
    t: usize,
    b1: &BTreeSet<Subspace>,
    b2: &BTreeSet<Subspace>,
) -> Result<Option<Subspace>> {
    let m1 = lambda_map(field, v, t, b1)?;
    let m2 = lambda_map(field, v, t, b2)?;
    let mut worst: Option<Subspace> = None;
    // compare over the union of supports; anything outside counts 0 in both
    for s in support_keys(&m1).into_iter().chain(support_keys(&m2)) {
        if m1.get(&s) != m2.get(&s) && worst.as_ref().is_none_or(|w| s < *w) {
            worst = Some(s);
        }
    }
    Ok(worst)
}

fn support_keys(m: &LambdaMap) -> Vec<Subspace> {
    if let Some(packed) = &m.packed {
        packed
            .keys()
            .map(|&k| unpack_subspace(&m.field, m.v, m.t, k))
            .collect()
    } else {
        m.general.as_ref().unwrap().keys().cloned().collect()
    }
}

/// Two sets of k-subspaces are t-equivalent when every t-subspace lies in
/// the same number of members of each.
pub fn is_t_equivalent(
    field: &Field,
    v: usize,
    t: usize,
    b1: &BTreeSet<Subspace>,
    b2: &BTreeSet<Subspace>,
) -> Result<bool> {
    Ok(t_equivalence_witness(field, v, t, b1, b2)?.is_none())
}

/// Admissibility of LS_q[N](t,k,v): N must divide [v-i, k-i]_q for every
/// i in 0..=t.
pub fn admissible(q: u64, n: u64, t: usize, k: usize, v: usize) -> bool {
    if k > v || t > k {
        return false;
    }
    let n = BigUint::from(n);
    (0..=t).all(|i| {
        gaussian_binomial((v - i) as u64, (k - i) as u64, q).is_multiple_of(&n)
    })
}

/// A large set LS_q[N](t,k,v): N disjoint block sets partitioning the full
/// Grassmannian, each one a t-(v,k,lambda)_q design with
/// lambda = [v-t,k-t]_q / N.
#[derive(Debug, Clone)]
pub struct LargeSet {
    pub field: Field,
    pub v: usize,
    pub k: usize,
    pub t: usize,
    pub parts: Vec<BTreeSet<Subspace>>,
}

impl LargeSet {
    /// Validates the partition property (disjoint parts of total size
    /// [v,k]_q); the design property of the parts is checked separately by
    /// [`verify_large_set`].
    pub fn new(
        field: &Field,
        v: usize,
        k: usize,
        t: usize,
        parts: Vec<BTreeSet<Subspace>>,
    ) -> Result<LargeSet> {
        let n = parts.len() as u64;
        if n == 0 {
            return Err(Error::InvalidParameter("a large set needs N >= 1 parts".into()));
        }
        if !admissible(field.q() as u64, n, t, k, v) {
            return Err(Error::InvalidParameter(format!(
                "LS_{}[{}]({},{},{}) is not admissible",
                field.q(),
                n,
                t,
                k,
                v
            )));
        }
        let mut total = 0u64;
        for (i, p) in parts.iter().enumerate() {
            total += p.len() as u64;
            for b in p {
                if b.v() != v || b.dim() != k {
                    return Err(Error::InvalidParameter(format!(
                        "part {} contains a block of shape ({}, {})",
                        i + 1,
                        b.dim(),
                        b.v()
                    )));
                }
            }
            for later in &parts[i + 1..] {
                if let Some(w) = p.intersection(later).next() {
                    return Err(Error::PartitionCheck(format!(
                        "block {:?} appears in two parts",
                        w.row_codes()
                    )));
                }
            }
        }
        if BigUint::from(total) != gaussian_binomial(v as u64, k as u64, field.q() as u64) {
            return Err(Error::PartitionCheck(format!(
                "parts cover {total} subspaces, expected the full Grassmannian"
            )));
        }
        Ok(LargeSet {
            field: field.clone(),
            v,
            k,
            t,
            parts,
        })
    }

    pub fn n(&self) -> usize {
        self.parts.len()
    }

    /// lambda = [v-t, k-t]_q / N, determined by the parameters.
    pub fn lambda(&self) -> BigUint {
        gaussian_binomial(
            (self.v - self.t) as u64,
            (self.k - self.t) as u64,
            self.field.q() as u64,
        ) / BigUint::from(self.n())
    }

    pub fn part_design(&self, i: usize) -> SubspaceDesign {
        SubspaceDesign {
            field: self.field.clone(),
            v: self.v,
            k: self.k,
            t: self.t,
            lambda: self.lambda(),
            blocks: self.parts[i].clone(),
        }
    }

    /// The halving {B, complement of B} built from a design with
    /// lambda = [v-t,k-t]_q / 2.
    pub fn halving_from_design(d: &SubspaceDesign) -> Result<LargeSet> {
        let q = d.field.q() as u64;
        let half = gaussian_binomial((d.v - d.t) as u64, (d.k - d.t) as u64, q);
        if BigUint::from(2u32) * &d.lambda != half {
            return Err(Error::InvalidParameter(format!(
                "halving requires lambda = [v-t,k-t]_q / 2, got {}",
                d.lambda
            )));
        }
        let comp = complement_blocks(&d.field, d.v, d.k, &d.blocks);
        LargeSet::new(
            &d.field,
            d.v,
            d.k,
            d.t,
            vec![d.blocks.clone(), comp],
        )
    }

    /// The trivial LS_q[1](t,k,v): one part holding the full Grassmannian.
    pub fn trivial(field: &Field, v: usize, k: usize, t: usize) -> LargeSet {
        let mut part = BTreeSet::new();
        visit_grassmannian(field, v, k, |mat, _| {
            part.insert(Subspace::from_canonical(field, mat.clone()));
        });
        LargeSet {
            field: field.clone(),
            v,
            k,
            t,
            parts: vec![part],
        }
    }

    /// An LS_q[N](0,k,v) built by slicing the enumeration stream into N
    /// equal runs; exists exactly when the parameters are admissible.
    pub fn t0_by_slicing(field: &Field, v: usize, k: usize, n: usize) -> Result<LargeSet> {
        let q = field.q() as u64;
        let total = gaussian_binomial(v as u64, k as u64, q);
        if !total.is_multiple_of(&BigUint::from(n)) {
            return Err(Error::InvalidParameter(format!(
                "N = {n} does not divide [{}candidates{}]",
                v, k
            )));
        }
        let slice = (total / BigUint::from(n)).to_u64().ok_or(Error::CounterOverflow)? as usize;
        let mut parts = vec![BTreeSet::new(); n];
        let mut idx = 0usize;
        visit_grassmannian(field, v, k, |mat, _| {
            parts[idx / slice].insert(Subspace::from_canonical(field, mat.clone()));
            idx += 1;
        });
        LargeSet::new(field, v, k, 0, parts)
    }
}

#[derive(Debug)]
pub struct LsReport {
    pub lambda: BigUint,
    pub part_sizes: Vec<u64>,
}

/// Verifies every part as a t-(v,k,lambda)_q design.
pub fn verify_large_set(ls: &LargeSet) -> Result<LsReport> {
    let lam = ls.lambda();
    let mut sizes = Vec::with_capacity(ls.n());
    for i in 0..ls.n() {
        let d = ls.part_design(i);
        verify_design(&d).map_err(|e| {
            Error::Verification(format!("part {}: {e}", i + 1))
        })?;
        sizes.push(ls.parts[i].len() as u64);
    }
    Ok(LsReport {
        lambda: lam,
        part_sizes: sizes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LsTransform {
    Dual,
    Reduced,
    Derived,
    Residual,
    /// Union the parts in groups of N/d, giving an LS_q[d].
    Merge(usize),
}

/// Parameter-transforming constructions on large sets. Derived fixes the
/// point P = V_1 and residual fixes the hyperplane H = V_{v-1}, which keeps
/// the outputs reproducible.
pub fn transform(ls: &LargeSet, op: LsTransform) -> Result<LargeSet> {
    match op {
        LsTransform::Dual => {
            let parts = ls
                .parts
                .iter()
                .map(|p| p.iter().map(|b| b.dual()).collect())
                .collect();
            LargeSet::new(&ls.field, ls.v, ls.v - ls.k, ls.t, parts)
        }
        LsTransform::Reduced => {
            if ls.t == 0 {
                return Err(Error::InvalidParameter("reduced requires t >= 1".into()));
            }
            Ok(LargeSet {
                field: ls.field.clone(),
                v: ls.v,
                k: ls.k,
                t: ls.t - 1,
                parts: ls.parts.clone(),
            })
        }
        LsTransform::Derived => {
            if ls.t == 0 || ls.k == 0 {
                return Err(Error::InvalidParameter(
                    "derived requires t >= 1 and k >= 1".into(),
                ));
            }
            let p = Subspace::chain_member(&ls.field, ls.v, 1);
            let parts: Vec<BTreeSet<Subspace>> = ls
                .parts
                .iter()
                .map(|part| {
                    part.iter()
                        .filter(|b| b.contains(&p))
                        .map(|b| b.quotient_by_chain(1).expect("block contains V_1"))
                        .collect()
                })
                .collect();
            LargeSet::new(&ls.field, ls.v - 1, ls.k - 1, ls.t - 1, parts)
        }
        LsTransform::Residual => {
            if ls.t == 0 {
                return Err(Error::InvalidParameter("residual requires t >= 1".into()));
            }
            let parts: Vec<BTreeSet<Subspace>> = ls
                .parts
                .iter()
                .map(|part| {
                    part.iter()
                        .filter_map(|b| b.drop_first_coordinate().ok())
                        .collect()
                })
                .collect();
            LargeSet::new(&ls.field, ls.v - 1, ls.k, ls.t - 1, parts)
        }
        LsTransform::Merge(d) => {
            let n = ls.n();
            if d == 0 || n % d != 0 {
                return Err(Error::InvalidParameter(format!(
                    "merge divisor {d} does not divide N = {n}"
                )));
            }
            let group = n / d;
            let parts: Vec<BTreeSet<Subspace>> = ls
                .parts
                .chunks(group)
                .map(|chunk| chunk.iter().flatten().cloned().collect())
                .collect();
            LargeSet::new(&ls.field, ls.v, ls.k, ls.t, parts)
        }
    }
}

// --- text file formats

/// Writes `design q=.. v=.. k=.. t=.. lambda=..` followed by one block per
/// line as k space-separated q-adic row codes.
pub fn write_design<W: Write>(d: &SubspaceDesign, mut w: W) -> Result<()> {
    writeln!(
        w,
        "design q={} v={} k={} t={} lambda={}",
        d.field.q(),
        d.v,
        d.k,
        d.t,
        d.lambda
    )?;
    for b in &d.blocks {
        let codes = encode_block(b)?;
        let line: Vec<String> = codes.iter().map(|c| c.to_string()).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

fn parse_header(line: &str, expected: &str) -> Result<HashMap<String, String>> {
    let mut parts = line.split_whitespace();
    let head = parts.next().unwrap_or_default();
    if head != expected {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected `{expected}` header, found `{head}`"),
        });
    }
    let mut map = HashMap::new();
    for item in parts {
        let Some((key, value)) = item.split_once('=') else {
            return Err(Error::Parse {
                line: 1,
                msg: format!("malformed header item `{item}`"),
            });
        };
        map.insert(key.to_string(), value.to_string());
    }
    Ok(map)
}

fn header_usize(map: &HashMap<String, String>, key: &str) -> Result<usize> {
    map.get(key)
        .ok_or_else(|| Error::Parse {
            line: 1,
            msg: format!("missing header field `{key}`"),
        })?
        .parse()
        .map_err(|_| Error::Parse {
            line: 1,
            msg: format!("field `{key}` is not an integer"),
        })
}

pub fn read_design<R: BufRead>(r: R) -> Result<SubspaceDesign> {
    let mut lines = r.lines();
    let header = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty file".into(),
    })??;
    let map = parse_header(&header, "design")?;
    let q = header_usize(&map, "q")? as u32;
    let v = header_usize(&map, "v")?;
    let k = header_usize(&map, "k")?;
    let t = header_usize(&map, "t")?;
    let lambda: BigUint = map
        .get("lambda")
        .ok_or(Error::Parse {
            line: 1,
            msg: "missing header field `lambda`".into(),
        })?
        .parse()
        .map_err(|_| Error::Parse {
            line: 1,
            msg: "field `lambda` is not an integer".into(),
        })?;
    let field = Field::gf(q)?;
    let mut blocks = BTreeSet::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let codes: Vec<u64> = line
            .split_whitespace()
            .map(|tok| {
                tok.parse().map_err(|_| Error::Parse {
                    line: lineno,
                    msg: format!("`{tok}` is not an integer"),
                })
            })
            .collect::<Result<_>>()?;
        if codes.len() != k {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected {k} codes, found {}", codes.len()),
            });
        }
        let block = decode_block(&field, &codes, v).map_err(|e| Error::Parse {
            line: lineno,
            msg: e.to_string(),
        })?;
        blocks.insert(block);
    }
    SubspaceDesign::new(&field, v, k, t, lambda, blocks)
}

/// Writes `largeset q=.. v=.. k=.. t=.. N=..` followed by one block per
/// line: the 1-based part index, then the k row codes.
pub fn write_large_set<W: Write>(ls: &LargeSet, mut w: W) -> Result<()> {
    writeln!(
        w,
        "largeset q={} v={} k={} t={} N={}",
        ls.field.q(),
        ls.v,
        ls.k,
        ls.t,
        ls.n()
    )?;
    for (i, part) in ls.parts.iter().enumerate() {
        for b in part {
            let codes = encode_block(b)?;
            let line: Vec<String> = codes.iter().map(|c| c.to_string()).collect();
            writeln!(w, "{} {}", i + 1, line.join(" "))?;
        }
    }
    Ok(())
}

pub fn read_large_set<R: BufRead>(r: R) -> Result<LargeSet> {
    let mut lines = r.lines();
    let header = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty file".into(),
    })??;
    let map = parse_header(&header, "largeset")?;
    let q = header_usize(&map, "q")? as u32;
    let v = header_usize(&map, "v")?;
    let k = header_usize(&map, "k")?;
    let t = header_usize(&map, "t")?;
    let n = header_usize(&map, "N")?;
    let field = Field::gf(q)?;
    let mut parts: Vec<BTreeSet<Subspace>> = vec![BTreeSet::new(); n];
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace();
        let part: usize = toks
            .next()
            .unwrap()
            .parse()
            .map_err(|_| Error::Parse {
                line: lineno,
                msg: "part index is not an integer".into(),
            })?;
        if part == 0 || part > n {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("part index {part} out of range 1..={n}"),
            });
        }
        let codes: Vec<u64> = toks
            .map(|tok| {
                tok.parse().map_err(|_| Error::Parse {
                    line: lineno,
                    msg: format!("`{tok}` is not an integer"),
                })
            })
            .collect::<Result<_>>()?;
        if codes.len() != k {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected {k} codes, found {}", codes.len()),
            });
        }
        let block = decode_block(&field, &codes, v).map_err(|e| Error::Parse {
            line: lineno,
            msg: e.to_string(),
        })?;
        parts[part - 1].insert(block);
    }
    LargeSet::new(&field, v, k, t, parts)
}
