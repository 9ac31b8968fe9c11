//! The ordinary, covering and avoiding joins of subspaces along the
//! standard chain, on single subspaces and on sets: membership, streaming
//! enumeration through canonical-matrix templates, exact cardinalities, and
//! the closed form for lambda of a join.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grassmann::visit_grassmannian;
use crate::subspace::{MatGf, Subspace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum JoinKind {
    Ordinary,
    Covering,
    Avoiding,
}

/// One join cell over the standard chain: the flag V_{u1} <= V_{u2}
/// (u1 = u2 for the ordinary join), left dimension k1 and right quotient
/// dimension kbar2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct JoinSpec {
    pub kind: JoinKind,
    pub u1: usize,
    pub u2: usize,
    pub k1: usize,
    pub kbar2: usize,
}

impl JoinSpec {
    pub fn new(kind: JoinKind, u1: usize, u2: usize, k1: usize, kbar2: usize) -> Result<JoinSpec> {
        if u1 > u2 {
            return Err(Error::InvalidParameter(format!(
                "flag requires u1 <= u2, got {u1} > {u2}"
            )));
        }
        if kind == JoinKind::Ordinary && u1 != u2 {
            return Err(Error::InvalidParameter(
                "ordinary join requires u1 = u2".into(),
            ));
        }
        if k1 > u1 {
            return Err(Error::InvalidParameter(format!(
                "left dimension k1 = {k1} exceeds u1 = {u1}"
            )));
        }
        Ok(JoinSpec {
            kind,
            u1,
            u2,
            k1,
            kbar2,
        })
    }

    pub fn ordinary(u: usize, k1: usize, kbar2: usize) -> Result<JoinSpec> {
        JoinSpec::new(JoinKind::Ordinary, u, u, k1, kbar2)
    }

    pub fn f(&self) -> usize {
        self.u2 - self.u1
    }

    /// Dimension of every member of the join.
    pub fn member_dim(&self) -> usize {
        match self.kind {
            JoinKind::Ordinary | JoinKind::Avoiding => self.k1 + self.kbar2,
            JoinKind::Covering => self.k1 + self.kbar2 + self.f(),
        }
    }

    /// Checks kbar2 against the ambient dimension.
    pub fn check_ambient(&self, v: usize) -> Result<()> {
        if self.u2 > v || self.kbar2 > v - self.u2 {
            return Err(Error::InvalidParameter(format!(
                "join spec (u1={}, u2={}, kbar2={}) does not fit ambient dimension {v}",
                self.u1, self.u2, self.kbar2
            )));
        }
        Ok(())
    }

    /// Exponent of q in the size of one join cell.
    pub fn size_exponent(&self) -> usize {
        match self.kind {
            JoinKind::Ordinary => (self.u1 - self.k1) * self.kbar2,
            JoinKind::Covering => (self.u1 - self.k1) * (self.kbar2 + self.f()),
            JoinKind::Avoiding => (self.u2 - self.k1) * self.kbar2,
        }
    }
}

/// Size of a single join cell: a pure power of q.
pub fn join_size(spec: &JoinSpec, q: u64) -> BigUint {
    BigUint::from(q).pow(spec.size_exponent() as u32)
}

fn check_left(k1_sub: &Subspace, spec: &JoinSpec) -> Result<()> {
    if k1_sub.dim() != spec.k1 {
        return Err(Error::JoinPrecondition(format!(
            "left factor has dimension {}, spec requires {}",
            k1_sub.dim(),
            spec.k1
        )));
    }
    k1_sub.restrict_last(spec.u1).map(|_| ()).map_err(|_| {
        Error::JoinPrecondition(format!("left factor is not contained in V_{}", spec.u1))
    })
}

fn check_right(k2_sub: &Subspace, spec: &JoinSpec) -> Result<()> {
    if k2_sub.dim() != spec.kbar2 + spec.u2 {
        return Err(Error::JoinPrecondition(format!(
            "right factor has dimension {}, spec requires {}",
            k2_sub.dim(),
            spec.kbar2 + spec.u2
        )));
    }
    k2_sub.quotient_by_chain(spec.u2).map(|_| ()).map_err(|_| {
        Error::JoinPrecondition(format!("right factor does not contain V_{}", spec.u2))
    })
}

/// Visits every member of the join K1 * K2 by filling the free entries of
/// the canonical-matrix template in lexicographic order.
pub fn visit_join<F>(k1_sub: &Subspace, k2_sub: &Subspace, spec: &JoinSpec, mut f: F) -> Result<()>
where
    F: FnMut(&Subspace),
{
    let field = k1_sub.field().clone();
    let v = k1_sub.v();
    if k2_sub.v() != v {
        return Err(Error::AmbientMismatch {
            left: v,
            right: k2_sub.v(),
        });
    }
    spec.check_ambient(v)?;
    check_left(k1_sub, spec)?;
    check_right(k2_sub, spec)?;

    let a1 = k1_sub.restrict_last(spec.u1)?;
    let a2 = k2_sub.quotient_by_chain(spec.u2)?;
    let a1_pivots = a1.pivots();
    let (u1, u2, k1, kbar2, fdim) = (spec.u1, spec.u2, spec.k1, spec.kbar2, spec.f());
    let k = spec.member_dim();

    let mut mat = MatGf::zeros(k, v);
    // A2 block, top-left
    for r in 0..kbar2 {
        for c in 0..v - u2 {
            mat.set(r, c, a2.cm().get(r, c));
        }
    }
    // covering join: E_f block in the middle rows
    if spec.kind == JoinKind::Covering {
        for j in 0..fdim {
            mat.set(kbar2 + j, v - u2 + j, 1);
        }
    }
    // A1 block, bottom-right
    for r in 0..k1 {
        for c in 0..u1 {
            mat.set(k - k1 + r, v - u1 + c, a1.cm().get(r, c));
        }
    }

    // free positions, row-major
    let mut free: Vec<(usize, usize)> = Vec::with_capacity(spec.size_exponent());
    let non_pivot_u1: Vec<usize> = (0..u1).filter(|c| !a1_pivots.contains(c)).collect();
    match spec.kind {
        JoinKind::Ordinary => {
            for r in 0..kbar2 {
                for &c in &non_pivot_u1 {
                    free.push((r, v - u1 + c));
                }
            }
        }
        JoinKind::Covering => {
            for r in 0..kbar2 + fdim {
                for &c in &non_pivot_u1 {
                    free.push((r, v - u1 + c));
                }
            }
        }
        JoinKind::Avoiding => {
            for r in 0..kbar2 {
                for c in 0..fdim {
                    free.push((r, v - u2 + c));
                }
                for &c in &non_pivot_u1 {
                    free.push((r, v - u1 + c));
                }
            }
        }
    }
    debug_assert_eq!(free.len(), spec.size_exponent());

    let q = field.q() as u8;
    loop {
        f(&Subspace::from_canonical(&field, mat.clone()));
        // odometer over the free entries, last position fastest
        let mut i = free.len();
        let mut wrapped = true;
        while i > 0 {
            i -= 1;
            let (r, c) = free[i];
            let d = mat.get(r, c);
            if d + 1 < q {
                mat.set(r, c, d + 1);
                wrapped = false;
                break;
            }
            mat.set(r, c, 0);
        }
        if wrapped {
            return Ok(());
        }
    }
}

/// Materialized join cell, in template order.
pub fn join_enumerate(
    k1_sub: &Subspace,
    k2_sub: &Subspace,
    spec: &JoinSpec,
) -> Result<Vec<Subspace>> {
    let mut out = Vec::new();
    visit_join(k1_sub, k2_sub, spec, |s| out.push(s.clone()))?;
    Ok(out)
}

/// Tests the defining conditions directly: U1 ∩ K = K1, U2 + K = K2, plus
/// the cover/avoid condition of the join kind.
pub fn join_membership(
    k: &Subspace,
    k1_sub: &Subspace,
    k2_sub: &Subspace,
    spec: &JoinSpec,
) -> bool {
    if k.meet_with_chain(spec.u1) != *k1_sub {
        return false;
    }
    if k.join_with_chain(spec.u2) != *k2_sub {
        return false;
    }
    match spec.kind {
        JoinKind::Ordinary => true,
        JoinKind::Covering => k.covers_chain(spec.u1, spec.u2),
        JoinKind::Avoiding => k.avoids_chain(spec.u1, spec.u2),
    }
}

/// Number of members of the ordinary join K1 *_U K2/U containing T:
/// q^((u-k1)(kbar2-r)) when U ∩ T <= K1 and T <= K2 with r = dim((U+T)/U),
/// and 0 otherwise.
pub fn lambda_of_join(
    t: &Subspace,
    k1_sub: &Subspace,
    k2_sub: &Subspace,
    u: &Subspace,
) -> Result<BigUint> {
    if !u.contains(k1_sub) || !k2_sub.contains(u) {
        return Err(Error::JoinPrecondition(
            "lambda_of_join requires K1 <= U <= K2".into(),
        ));
    }
    let q = t.field().q() as u64;
    let u_cap_t = u.intersect(t)?;
    if !k1_sub.contains(&u_cap_t) || !k2_sub.contains(t) {
        return Ok(BigUint::zero());
    }
    let r = u.sum(t)?.dim() - u.dim();
    let kbar2 = k2_sub.dim() - u.dim();
    let exp = (u.dim() - k1_sub.dim()) * (kbar2 - r);
    Ok(BigUint::from(q).pow(exp as u32))
}

/// Join of two sets of subspaces: the union over all pairs. Right-factor
/// members are quotient subspaces represented by their preimages over the
/// standard chain. Empty factors give the empty join.
pub fn set_join(b1: &[Subspace], b2: &[Subspace], spec: &JoinSpec) -> Result<BTreeSet<Subspace>> {
    let mut out = BTreeSet::new();
    if b1.is_empty() || b2.is_empty() {
        return Ok(out);
    }
    for k1_sub in b1 {
        for k2_sub in b2 {
            visit_join(k1_sub, k2_sub, spec, |s| {
                out.insert(s.clone());
            })?;
        }
    }
    // distinct (K1, K2) pairs yield disjoint cells, so the size is exact
    debug_assert_eq!(
        BigUint::from(out.len()),
        join_size(spec, b1[0].field().q() as u64) * b1.len() * b2.len()
    );
    Ok(out)
}

/// The full left Grassmannian [V_{u1}, k1], embedded into GF(q)^v.
pub fn left_grassmannian(field: &Field, v: usize, spec: &JoinSpec) -> Vec<Subspace> {
    let mut out = Vec::new();
    visit_grassmannian(field, spec.u1, spec.k1, |mat, _| {
        out.push(Subspace::from_canonical(field, mat.clone()).embed_last(v));
    });
    out
}

/// The full right Grassmannian [V/V_{u2}, kbar2], as preimages in GF(q)^v.
pub fn right_grassmannian(field: &Field, v: usize, spec: &JoinSpec) -> Vec<Subspace> {
    let mut out = Vec::new();
    visit_grassmannian(field, v - spec.u2, spec.kbar2, |mat, _| {
        out.push(Subspace::from_canonical(field, mat.clone()).lift_preimage(spec.u2));
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use crate::grassmann::GrassmannianIter;

    fn gf(q: u32) -> Field {
        Field::gf(q).unwrap()
    }

    /// Brute-force join membership over the whole Grassmannian.
    fn brute_join(
        field: &Field,
        v: usize,
        k1_sub: &Subspace,
        k2_sub: &Subspace,
        spec: &JoinSpec,
    ) -> Vec<Subspace> {
        GrassmannianIter::new(field, v, spec.member_dim())
            .filter(|k| join_membership(k, k1_sub, k2_sub, spec))
            .collect()
    }

    #[test]
    fn ordinary_join_singleton() {
        // K1 = U = K2: no free entries, single member K1
        let f2 = gf(2);
        let v = 4;
        let u = 2;
        let k1_sub = Subspace::chain_member(&f2, v, u);
        let k2_sub = k1_sub.clone();
        let spec = JoinSpec::ordinary(u, u, 0).unwrap();
        let members = join_enumerate(&k1_sub, &k2_sub, &spec).unwrap();
        assert_eq!(members, vec![k1_sub]);
        assert_eq!(join_size(&spec, 2), BigUint::one());
    }

    #[test]
    fn ordinary_join_gf2_v3() {
        // U = V_1, K1 = 0, K2 = V: size 2^((1-0)(3-1)) = 4
        let f2 = gf(2);
        let v = 3;
        let k1_sub = Subspace::zero(&f2, v);
        let k2_sub = Subspace::full(&f2, v);
        let spec = JoinSpec::ordinary(1, 0, 2).unwrap();
        let members = join_enumerate(&k1_sub, &k2_sub, &spec).unwrap();
        assert_eq!(members.len(), 4);
        let brute = brute_join(&f2, v, &k1_sub, &k2_sub, &spec);
        assert_eq!(
            members.iter().collect::<BTreeSet<_>>(),
            brute.iter().collect::<BTreeSet<_>>()
        );
    }

    #[test]
    fn covering_join_gf2_v4() {
        // flag V_1 <= V_2, K1 = 0, K2 = V_2: size 2^((1-0)(0+1)) = 2
        let f2 = gf(2);
        let v = 4;
        let k1_sub = Subspace::zero(&f2, v);
        let k2_sub = Subspace::chain_member(&f2, v, 2);
        let spec = JoinSpec::new(JoinKind::Covering, 1, 2, 0, 0).unwrap();
        let members = join_enumerate(&k1_sub, &k2_sub, &spec).unwrap();
        assert_eq!(members.len(), 2);
        let brute = brute_join(&f2, v, &k1_sub, &k2_sub, &spec);
        assert_eq!(members.len(), brute.len());
        for m in &members {
            assert!(brute.contains(m));
            assert!(m.covers_chain(1, 2));
        }
    }

    #[test]
    fn join_sizes_against_enumeration() {
        // ordinary u=3, k1=1, k2=5 (kbar2=2) in GF(3)^6: 3^4 = 81
        let f3 = gf(3);
        let v = 6;
        let k1_sub = Subspace::chain_member(&f3, 3, 1).embed_last(v);
        let a2 = Subspace::canonicalize(&f3, &MatGf::from_rows(&[&[1, 0, 0], &[0, 1, 0]]));
        let k2_sub = a2.lift_preimage(3);
        let spec = JoinSpec::ordinary(3, 1, 2).unwrap();
        assert_eq!(join_size(&spec, 3), BigUint::from(81u32));
        assert_eq!(join_enumerate(&k1_sub, &k2_sub, &spec).unwrap().len(), 81);

        // avoiding u2=2, k1=0, kbar2=1 in GF(5)^4: 25
        let f5 = gf(5);
        let v = 4;
        let k1_sub = Subspace::zero(&f5, v);
        let a2 = Subspace::canonicalize(&f5, &MatGf::from_rows(&[&[1, 0]]));
        let k2_sub = a2.lift_preimage(2);
        let spec = JoinSpec::new(JoinKind::Avoiding, 1, 2, 0, 1).unwrap();
        assert_eq!(join_size(&spec, 5), BigUint::from(25u32));
        let members = join_enumerate(&k1_sub, &k2_sub, &spec).unwrap();
        assert_eq!(members.len(), 25);
        let brute = brute_join(&f5, v, &k1_sub, &k2_sub, &spec);
        assert_eq!(members.len(), brute.len());
    }

    #[test]
    fn membership_agrees_with_enumeration_exhaustive() {
        // every join spec on GF(2)^4: enumeration output = membership filter
        let f2 = gf(2);
        let v = 4;
        for u1 in 0..=v {
            for u2 in u1..=v {
                for k1 in 0..=u1 {
                    for kbar2 in 0..=v - u2 {
                        for kind in [JoinKind::Ordinary, JoinKind::Covering, JoinKind::Avoiding] {
                            if kind == JoinKind::Ordinary && u1 != u2 {
                                continue;
                            }
                            let spec = JoinSpec::new(kind, u1, u2, k1, kbar2).unwrap();
                            let Some(k1_sub) =
                                left_grassmannian(&f2, v, &spec).into_iter().next()
                            else {
                                continue;
                            };
                            let Some(k2_sub) =
                                right_grassmannian(&f2, v, &spec).into_iter().next()
                            else {
                                continue;
                            };
                            let members = join_enumerate(&k1_sub, &k2_sub, &spec).unwrap();
                            let brute = brute_join(&f2, v, &k1_sub, &k2_sub, &spec);
                            assert_eq!(
                                members.iter().collect::<BTreeSet<_>>(),
                                brute.iter().collect::<BTreeSet<_>>(),
                                "spec {spec:?}"
                            );
                            assert_eq!(
                                BigUint::from(members.len()),
                                join_size(&spec, 2),
                                "spec {spec:?}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn lambda_of_join_cases() {
        let f2 = gf(2);
        let v = 5;
        let u = Subspace::chain_member(&f2, v, 2);
        let k1_sub = Subspace::chain_member(&f2, 2, 1).embed_last(v);
        let k2_sub = Subspace::full(&f2, 3).lift_preimage(2);
        let spec = JoinSpec::ordinary(2, 1, 3).unwrap();
        // T = zero space: lambda = join size
        let zero = Subspace::zero(&f2, v);
        assert_eq!(
            lambda_of_join(&zero, &k1_sub, &k2_sub, &u).unwrap(),
            join_size(&spec, 2)
        );
        // exhaustive cross-check against enumeration
        let members = join_enumerate(&k1_sub, &k2_sub, &spec).unwrap();
        for t_dim in 0..=3 {
            for t in GrassmannianIter::new(&f2, v, t_dim) {
                let count = members.iter().filter(|m| m.contains(&t)).count();
                assert_eq!(
                    lambda_of_join(&t, &k1_sub, &k2_sub, &u).unwrap(),
                    BigUint::from(count),
                    "t = {t:?}"
                );
            }
        }
    }

    #[test]
    fn set_join_boundary_and_monotonicity() {
        let f2 = gf(2);
        let v = 4;
        let spec = JoinSpec::ordinary(2, 1, 1).unwrap();
        let left = left_grassmannian(&f2, v, &spec);
        let right = right_grassmannian(&f2, v, &spec);
        assert!(set_join(&[], &right, &spec).unwrap().is_empty());
        assert!(set_join(&left, &[], &spec).unwrap().is_empty());

        // singleton = join_enumerate
        let single = set_join(&left[..1], &right[..1], &spec).unwrap();
        let direct = join_enumerate(&left[0], &right[0], &spec).unwrap();
        assert_eq!(single, direct.into_iter().collect());

        // monotonicity both ways
        let small = set_join(&left[..1], &right[..2], &spec).unwrap();
        let large = set_join(&left[..2], &right[..3], &spec).unwrap();
        assert!(small.is_subset(&large));
        let not_nested = set_join(&left[1..2], &right[..1], &spec).unwrap();
        assert!(!not_nested.is_subset(&small));
    }

    #[test]
    fn degenerate_joins_coincide() {
        // with u1 = u2 all three kinds describe the same set
        let f3 = gf(3);
        let v = 5;
        let u = 2;
        for kind in [JoinKind::Ordinary, JoinKind::Covering, JoinKind::Avoiding] {
            let spec = JoinSpec::new(kind, u, u, 1, 1).unwrap();
            let k1_sub = left_grassmannian(&f3, v, &spec)[1].clone();
            let k2_sub = right_grassmannian(&f3, v, &spec)[1].clone();
            let members: BTreeSet<Subspace> = join_enumerate(&k1_sub, &k2_sub, &spec)
                .unwrap()
                .into_iter()
                .collect();
            let ord = JoinSpec::ordinary(u, 1, 1).unwrap();
            let expected: BTreeSet<Subspace> = join_enumerate(&k1_sub, &k2_sub, &ord)
                .unwrap()
                .into_iter()
                .collect();
            assert_eq!(members, expected);
        }
    }

    #[test]
    fn join_duality() {
        // elementwise dual of a covering join satisfies the avoiding-join
        // conditions for the dual flag (GF(2)^4)
        let f2 = gf(2);
        let v = 4;
        let spec = JoinSpec::new(JoinKind::Covering, 1, 2, 1, 1).unwrap();
        for k1_sub in left_grassmannian(&f2, v, &spec) {
            for k2_sub in right_grassmannian(&f2, v, &spec) {
                let members = join_enumerate(&k1_sub, &k2_sub, &spec).unwrap();
                for m in &members {
                    let md = m.dual();
                    let u1 = Subspace::chain_member(&f2, v, spec.u1);
                    let u2 = Subspace::chain_member(&f2, v, spec.u2);
                    assert!(md.avoids(&u2.dual(), &u1.dual()).unwrap());
                    assert_eq!(md.intersect(&k2_sub.dual()).unwrap(), k2_sub.dual());
                    assert_eq!(md.sum(&k1_sub.dual()).unwrap(), k1_sub.dual());
                }
            }
        }
    }

    #[test]
    fn members_pass_the_path_vertex_condition() {
        // every member of a standard-chain ordinary join passes through the
        // vertex (v - u - kbar2, kbar2) of its grid path
        let f2 = gf(2);
        let v = 5;
        for u in 0..=v {
            for k1 in 0..=u {
                for kbar2 in 0..=v - u {
                    let spec = JoinSpec::ordinary(u, k1, kbar2).unwrap();
                    for k1_sub in left_grassmannian(&f2, v, &spec).iter().take(3) {
                        for k2_sub in right_grassmannian(&f2, v, &spec).iter().take(3) {
                            for m in join_enumerate(k1_sub, k2_sub, &spec).unwrap() {
                                let path = crate::grassmann::subspace_to_path(&m);
                                assert!(path
                                    .vertices()
                                    .contains(&(v - u - kbar2, kbar2)));
                            }
                        }
                    }
                }
            }
        }
    }
}
