//! Bundled instance data for the two computer constructions: primitive
//! polynomials, generator words, expected group orders and orbit profiles,
//! and the published orbit-representative selection for q = 5.

use crate::error::Result;
use crate::field::{frobenius_matrix, singer_matrix, Field, PrimitivePolynomial};
use crate::grassmann::decode_block;
use crate::km::{group_closure, parse_group_words, realize_words, ProjectiveGroup};
use crate::subspace::{MatGf, Subspace};

/// A ready-to-run halving search instance.
pub struct BundledInstance {
    pub name: &'static str,
    pub q: u32,
    pub v: usize,
    pub t: usize,
    pub k: usize,
    pub lambda: u64,
    /// Primitive polynomial, descending coefficients (constant term last).
    pub poly_desc: &'static [u8],
    /// Generators of the prescribed subgroup as words in the Singer image
    /// s and the Frobenius image f.
    pub group_words: &'static str,
    pub expected_order: u64,
    /// Expected orbit size profile on [V,k]_q as (size, multiplicity).
    pub expected_profile: &'static [(u64, usize)],
    /// Published orbit representatives of a solution, as q-adic row code
    /// triples; empty when no explicit selection is bundled.
    pub selection_triples: &'static [(u64, u64, u64)],
}

/// The q = 3 instance: the group generated by the squares of the Singer
/// and Frobenius images, of order 546.
pub const Q3_HALVING: BundledInstance = BundledInstance {
    name: "q3-halving",
    q: 3,
    v: 6,
    t: 2,
    k: 3,
    lambda: 20,
    // X^6 - X^4 + X^2 - X - 1 over GF(3)
    poly_desc: &[1, 0, 2, 0, 1, 2, 2],
    group_words: "s^2,f^2",
    expected_order: 546,
    expected_profile: &[(14, 2), (182, 18), (546, 56)],
    selection_triples: &[],
};

/// Overgroups of the q = 3 group inside <s, f>, used by the
/// isomorphism-type count: none of them admits a 2-(6,3,20)_3 design.
pub const Q3_OVERGROUP_WORDS: [&str; 4] = ["s,f^2", "s^2,f", "s^2,s*f,f^2", "s,f"];

/// The q = 5 instance with its published 126-orbit solution.
pub const Q5_HALVING: BundledInstance = BundledInstance {
    name: "q5-halving",
    q: 5,
    v: 6,
    t: 2,
    k: 3,
    lambda: 78,
    // X^6 + X^4 - X^3 + X^2 + 2 over GF(5)
    poly_desc: &[1, 0, 1, 4, 1, 0, 2],
    group_words: "s^2,f",
    expected_order: 11718,
    expected_profile: &[(63, 2), (1953, 2), (3906, 24), (5859, 20), (11718, 200)],
    // 1 orbit of size 63, 1 of size 1953, 12 of size 3906, 14 of size 5859,
    // 98 of size 11718, in the published order
    selection_triples: &[
        (3221, 728, 155),
        (3133, 898, 32),
        (3144, 132, 49),
        (627, 136, 49),
        (3202, 631, 146),
        (3248, 749, 246),
        (3157, 662, 229),
        (3265, 1125, 44),
        (3224, 637, 145),
        (3139, 647, 41),
        (3643, 771, 45),
        (3226, 739, 239),
        (3383, 1136, 43),
        (3263, 756, 45),
        (3224, 714, 205),
        (3167, 629, 129),
        (3174, 701, 242),
        (3221, 728, 182),
        (3151, 639, 132),
        (3207, 641, 247),
        (3220, 635, 202),
        (3173, 736, 166),
        (5629, 146, 38),
        (3643, 1017, 26),
        (3190, 639, 206),
        (3227, 670, 157),
        (3246, 720, 210),
        (3127, 137, 35),
        (3262, 758, 27),
        (3143, 749, 225),
        (3232, 659, 198),
        (3134, 731, 162),
        (3209, 672, 165),
        (3236, 633, 219),
        (3194, 748, 211),
        (3229, 669, 179),
        (3381, 878, 35),
        (3236, 698, 246),
        (3157, 747, 138),
        (3150, 659, 194),
        (3233, 719, 223),
        (3228, 663, 164),
        (3207, 661, 237),
        (4392, 144, 44),
        (3130, 774, 26),
        (3169, 642, 246),
        (5012, 141, 41),
        (3181, 745, 232),
        (3220, 717, 148),
        (3131, 718, 167),
        (3233, 680, 196),
        (3182, 702, 181),
        (3649, 1138, 41),
        (3186, 629, 161),
        (3147, 715, 218),
        (3156, 686, 198),
        (3645, 641, 44),
        (3510, 880, 1),
        (3500, 636, 29),
        (3244, 647, 129),
        (3231, 699, 203),
        (3226, 717, 228),
        (3638, 1014, 38),
        (3147, 696, 143),
        (3245, 639, 197),
        (3246, 718, 222),
        (3140, 143, 31),
        (3173, 669, 190),
        (3221, 719, 161),
        (5000, 131, 42),
        (3513, 1145, 32),
        (3170, 721, 241),
        (3199, 714, 157),
        (3232, 685, 201),
        (3203, 644, 232),
        (3223, 649, 218),
        (3176, 677, 5),
        (3167, 656, 228),
        (3145, 888, 36),
        (3509, 629, 33),
        (3232, 694, 134),
        (3211, 660, 207),
        (3727, 1100, 8),
        (3376, 954, 5),
        (3274, 752, 48),
        (3137, 670, 214),
        (3201, 647, 210),
        (3209, 644, 180),
        (3132, 697, 160),
        (3175, 628, 160),
        (3154, 1000, 9),
        (3233, 745, 159),
        (3396, 1012, 48),
        (3140, 631, 224),
        (3153, 677, 171),
        (3149, 718, 221),
        (3380, 1139, 27),
        (3146, 665, 242),
        (3238, 721, 206),
        (3225, 703, 182),
        (3163, 733, 249),
        (3227, 711, 139),
        (3204, 704, 204),
        (3201, 738, 163),
        (3174, 725, 152),
        (3225, 648, 223),
        (3192, 667, 173),
        (3140, 684, 140),
        (3643, 1015, 46),
        (3141, 636, 249),
        (3166, 667, 202),
        (3230, 734, 130),
        (3160, 722, 218),
        (3188, 675, 170),
        (3219, 681, 197),
        (3212, 662, 167),
        (3230, 635, 210),
        (3165, 715, 177),
        (3627, 627, 6),
        (3187, 711, 125),
        (3478, 803, 8),
        (3231, 748, 223),
        (3131, 690, 192),
        (3222, 625, 148),
        (3504, 1003, 32),
        (3242, 714, 226),
    ],
};

impl BundledInstance {
    pub fn field(&self) -> Field {
        Field::gf(self.q).expect("bundled q is a prime")
    }

    pub fn polynomial(&self) -> PrimitivePolynomial {
        PrimitivePolynomial::from_descending(&self.field(), self.poly_desc)
            .expect("bundled polynomial is primitive")
    }

    pub fn singer(&self) -> MatGf {
        singer_matrix(&self.polynomial())
    }

    pub fn frobenius(&self) -> MatGf {
        frobenius_matrix(&self.polynomial()).expect("bundled q is prime")
    }

    /// The prescribed subgroup, from the bundled generator words.
    pub fn group(&self) -> Result<ProjectiveGroup> {
        self.group_with_words(self.group_words)
    }

    /// A subgroup from arbitrary generator words over the same Singer and
    /// Frobenius images.
    pub fn group_with_words(&self, words: &str) -> Result<ProjectiveGroup> {
        let field = self.field();
        let parsed = parse_group_words(words)?;
        let gens = realize_words(&field, &self.singer(), &self.frobenius(), &parsed);
        group_closure(&field, &gens)
    }

    /// Decodes the published selection triples.
    pub fn selection_subspaces(&self) -> Result<Vec<Subspace>> {
        let field = self.field();
        self.selection_triples
            .iter()
            .map(|&(a, b, c)| decode_block(&field, &[a, b, c], self.v))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q3_matrices_match_published() {
        let s = Q3_HALVING.singer();
        let expected_s = [
            [0, 0, 0, 0, 0, 1],
            [1, 0, 0, 0, 0, 1],
            [0, 1, 0, 0, 0, 2],
            [0, 0, 1, 0, 0, 0],
            [0, 0, 0, 1, 0, 1],
            [0, 0, 0, 0, 1, 0],
        ];
        for i in 0..6 {
            assert_eq!(s.row(i), &expected_s[i], "singer row {i}");
        }
        let f = Q3_HALVING.frobenius();
        let expected_f = [
            [1, 0, 1, 0, 0, 1],
            [0, 0, 1, 1, 1, 2],
            [0, 0, 2, 1, 1, 2],
            [0, 1, 0, 0, 2, 1],
            [0, 0, 1, 1, 1, 0],
            [0, 0, 0, 0, 2, 2],
        ];
        for i in 0..6 {
            assert_eq!(f.row(i), &expected_f[i], "frobenius row {i}");
        }
    }

    #[test]
    fn q5_matrices_match_published() {
        let s = Q5_HALVING.singer();
        let expected_s = [
            [0, 0, 0, 0, 0, 3],
            [1, 0, 0, 0, 0, 0],
            [0, 1, 0, 0, 0, 4],
            [0, 0, 1, 0, 0, 1],
            [0, 0, 0, 1, 0, 4],
            [0, 0, 0, 0, 1, 0],
        ];
        for i in 0..6 {
            assert_eq!(s.row(i), &expected_s[i], "singer row {i}");
        }
        let f = Q5_HALVING.frobenius();
        let expected_f = [
            [1, 0, 0, 2, 0, 4],
            [0, 0, 3, 0, 3, 4],
            [0, 0, 2, 4, 4, 0],
            [0, 0, 4, 4, 1, 3],
            [0, 0, 0, 4, 1, 4],
            [0, 1, 3, 1, 0, 2],
        ];
        for i in 0..6 {
            assert_eq!(f.row(i), &expected_f[i], "frobenius row {i}");
        }
    }

    #[test]
    fn selection_decodes_canonically() {
        let sel = Q5_HALVING.selection_subspaces().unwrap();
        assert_eq!(sel.len(), 126);
        assert_eq!(sel[0].cm().row(0), &[1, 0, 0, 3, 4, 1]);
        let set: std::collections::BTreeSet<&Subspace> = sel.iter().collect();
        assert_eq!(set.len(), 126);
    }

    #[test]
    fn singer_order_matches_point_count() {
        // the Singer image has order [v,1]_q
        for inst in [&Q3_HALVING, &Q5_HALVING] {
            let g = inst.group_with_words("s").unwrap();
            let expected = crate::gaussian_binomial(inst.v as u64, 1, inst.q as u64);
            assert_eq!(num_bigint::BigUint::from(g.order()), expected);
        }
    }

    fn mat_pow(m: &MatGf, e: u64, field: &Field) -> MatGf {
        let mut out = MatGf::identity(m.rows());
        let mut base = m.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                out = out.mul(&base, field);
            }
            base = base.mul(&base, field);
            e >>= 1;
        }
        out
    }

    #[test]
    fn singer_matrix_has_full_multiplicative_order() {
        // S^(q^v - 1) = I and S^((q^v-1)/r) != I for every prime r
        for inst in [&Q3_HALVING, &Q5_HALVING] {
            let field = inst.field();
            let s = inst.singer();
            let n = (inst.q as u64).pow(inst.v as u32) - 1;
            assert_eq!(mat_pow(&s, n, &field), MatGf::identity(inst.v));
            for r in crate::field::prime_factors(n as u128).unwrap() {
                assert_ne!(
                    mat_pow(&s, n / r as u64, &field),
                    MatGf::identity(inst.v),
                    "order divides (q^v-1)/{r}"
                );
            }
        }
    }

    #[test]
    fn frobenius_normalizes_singer_v6() {
        // F S = S^q F exactly, for the bundled q = 3, 5 and for q = 2 with
        // the primitive polynomial x^6 + x + 1
        let mut cases: Vec<(Field, MatGf, MatGf, u64)> = vec![];
        for inst in [&Q3_HALVING, &Q5_HALVING] {
            cases.push((
                inst.field(),
                inst.singer(),
                inst.frobenius(),
                inst.q as u64,
            ));
        }
        let f2 = Field::gf(2).unwrap();
        let p2 = PrimitivePolynomial::new(&f2, &[1, 1, 0, 0, 0, 0, 1]).unwrap();
        cases.push((
            f2.clone(),
            singer_matrix(&p2),
            frobenius_matrix(&p2).unwrap(),
            2,
        ));
        for (field, s, fr, q) in cases {
            let lhs = fr.mul(&s, &field);
            let rhs = mat_pow(&s, q, &field).mul(&fr, &field);
            assert_eq!(lhs, rhs, "q = {q}");
        }
    }
}
