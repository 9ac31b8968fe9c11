//! Parameter tables for the halving series: the lambda and design sizes of
//! the small halvings, and the admissibility/realizability pattern of
//! LS_q[2](2,k,v).

use num_bigint::BigUint;
use num_integer::Integer;

use crate::design::admissible;
use crate::gaussian_binomial;

/// One row of the small-halvings table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalvingRow {
    pub q: u64,
    pub v: usize,
    pub k: usize,
    pub lambda: BigUint,
    pub size: BigUint,
}

/// lambda = [v-2, k-2]_q / 2 and size = lambda [v,2]_q / [k,2]_q for a
/// halving with t = 2.
pub fn halving_row(q: u64, v: usize, k: usize) -> HalvingRow {
    let lambda2 = gaussian_binomial((v - 2) as u64, (k - 2) as u64, q);
    let (lambda, rem) = lambda2.div_rem(&BigUint::from(2u32));
    assert!(rem == BigUint::from(0u32), "halving requires even [v-2,k-2]_q");
    let num = &lambda * gaussian_binomial(v as u64, 2, q);
    let den = gaussian_binomial(k as u64, 2, q);
    let (size, rem) = num.div_rem(&den);
    assert!(rem == BigUint::from(0u32));
    HalvingRow {
        q,
        v,
        k,
        lambda,
        size,
    }
}

/// The (q, v, k) parameter list of the small-halvings table, v <= 14.
/// Rows with two k values share lambda and size by duality, so only the
/// smaller k is produced.
pub const SMALL_HALVING_PARAMS: [(u64, usize, usize); 8] = [
    (3, 6, 3),
    (3, 10, 3),
    (3, 14, 3),
    (3, 14, 7),
    (5, 6, 3),
    (5, 10, 3),
    (5, 14, 3),
    (5, 14, 7),
];

pub fn small_halvings(q_filter: Option<u64>) -> Vec<HalvingRow> {
    SMALL_HALVING_PARAMS
        .iter()
        .filter(|(q, _, _)| q_filter.is_none_or(|f| f == *q))
        .map(|&(q, v, k)| halving_row(q, v, k))
        .collect()
}

/// One entry of the admissibility table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdmissibilityEntry {
    /// Parameters fail the divisibility conditions.
    NotAdmissible,
    /// Realized by the two-parameter halving series (k = 3 mod 4 or
    /// v - k = 3 mod 4 inside the admissible range).
    Realizable(usize),
    /// Admissible, existence open.
    Open,
}

impl AdmissibilityEntry {
    pub fn symbol(&self) -> String {
        match self {
            AdmissibilityEntry::NotAdmissible => "-".to_string(),
            AdmissibilityEntry::Realizable(k) => k.to_string(),
            AdmissibilityEntry::Open => "?".to_string(),
        }
    }
}

/// Entry of the LS_q[2](2,k,v) table for one (v, k).
pub fn admissibility_entry(q: u64, v: usize, k: usize) -> AdmissibilityEntry {
    if !admissible(q, 2, 2, k, v) {
        return AdmissibilityEntry::NotAdmissible;
    }
    let series = v % 4 == 2
        && (3..=v - 3).contains(&k)
        && (k % 4 == 3 || (v - k) % 4 == 3);
    if series {
        AdmissibilityEntry::Realizable(k)
    } else {
        AdmissibilityEntry::Open
    }
}

/// The table rows for 6 <= v <= v_max, 3 <= k <= v/2 (the other half
/// follows by duality).
pub fn admissibility_pattern(q: u64, v_max: usize) -> Vec<(usize, Vec<AdmissibilityEntry>)> {
    (6..=v_max)
        .map(|v| {
            let row = (3..=v / 2).map(|k| admissibility_entry(q, v, k)).collect();
            (v, row)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q3_v6_row() {
        let row = halving_row(3, 6, 3);
        assert_eq!(row.lambda, BigUint::from(20u32));
        assert_eq!(row.size, BigUint::from(16940u32));
    }

    #[test]
    fn size_is_half_the_grassmannian() {
        for &(q, v, k) in &SMALL_HALVING_PARAMS {
            let row = halving_row(q, v, k);
            assert_eq!(
                BigUint::from(2u32) * &row.size,
                gaussian_binomial(v as u64, k as u64, q)
            );
        }
    }

    #[test]
    fn dual_k_shares_size() {
        // the table lists k = 3 and k = 7 together at v = 10: the design
        // size is shared by duality, the lambda value belongs to k = 3
        let a = halving_row(3, 10, 3);
        let b = halving_row(3, 10, 7);
        assert_eq!(a.size, b.size);
        assert_eq!(
            b.lambda,
            gaussian_binomial(8, 5, 3) / BigUint::from(2u32)
        );
    }

    #[test]
    fn pattern_examples() {
        assert_eq!(
            admissibility_entry(3, 6, 3),
            AdmissibilityEntry::Realizable(3)
        );
        assert_eq!(admissibility_entry(3, 8, 3), AdmissibilityEntry::NotAdmissible);
        assert_eq!(admissibility_entry(3, 10, 4), AdmissibilityEntry::Open);
        assert_eq!(admissibility_entry(3, 14, 7), AdmissibilityEntry::Realizable(7));
    }
}
