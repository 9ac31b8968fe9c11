//! Matrices over GF(q), the reduced row echelon canonical form, and the
//! subspace algebra: sum, intersection, dual, the standard chain V_i and
//! cover/avoid tests.
//!
//! Throughout, `V_i` denotes the span of the *last* i standard basis vectors
//! of GF(q)^v, so `V_0 = 0 <= V_1 <= ... <= V_v` is the standard chain.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};
use crate::field::Field;

/// Dense row-major matrix with entries in a field, stored as canonical `u8`
/// values. The field itself is passed to the operations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MatGf {
    rows: usize,
    cols: usize,
    data: Vec<u8>,
}

impl MatGf {
    pub fn new(rows: usize, cols: usize, data: Vec<u8>) -> MatGf {
        assert_eq!(rows * cols, data.len());
        MatGf { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> MatGf {
        MatGf {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> MatGf {
        let mut m = MatGf::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_rows(rows: &[&[u8]]) -> MatGf {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c);
            data.extend_from_slice(row);
        }
        MatGf { rows: r, cols: c, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u8) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u8] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let (a, b) = (a.min(b), a.max(b));
        let (head, tail) = self.data.split_at_mut(b * self.cols);
        head[a * self.cols..(a + 1) * self.cols].swap_with_slice(&mut tail[..self.cols]);
    }

    /// self * other.
    pub fn mul(&self, other: &MatGf, field: &Field) -> MatGf {
        assert_eq!(self.cols, other.rows);
        let mut out = MatGf::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(l, j);
                    if b != 0 {
                        let cur = out.get(i, j);
                        out.set(i, j, field.add(cur, field.mul(a, b)));
                    }
                }
            }
        }
        out
    }

    /// Rows of `self` followed by rows of `other`.
    pub fn stack(&self, other: &MatGf) -> MatGf {
        assert_eq!(self.cols, other.cols);
        let mut data = Vec::with_capacity((self.rows + other.rows) * self.cols);
        data.extend_from_slice(&self.data);
        data.extend_from_slice(&other.data);
        MatGf {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    /// In-place reduced row echelon form; returns the pivot columns.
    /// Zero rows sink to the bottom and are kept.
    pub fn rref(&mut self, field: &Field) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            let mut pr = None;
            for i in r..self.rows {
                if self.get(i, c) != 0 {
                    pr = Some(i);
                    break;
                }
            }
            let Some(pr) = pr else { continue };
            self.swap_rows(r, pr);
            let inv = field
                .inv(self.get(r, c))
                .expect("pivot entry is nonzero");
            if inv != 1 {
                for j in c..self.cols {
                    let x = self.get(r, j);
                    self.set(r, j, field.mul(x, inv));
                }
            }
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let f = self.get(i, c);
                if f != 0 {
                    for j in c..self.cols {
                        let x = self.get(i, j);
                        let y = self.get(r, j);
                        self.set(i, j, field.sub(x, field.mul(f, y)));
                    }
                }
            }
            pivots.push(c);
            r += 1;
            if r == self.rows {
                break;
            }
        }
        pivots
    }

    pub fn rank(&self, field: &Field) -> usize {
        let mut m = self.clone();
        m.rref(field).len()
    }

    pub fn is_invertible(&self, field: &Field) -> bool {
        self.rows == self.cols && self.rank(field) == self.rows
    }

    pub fn transpose(&self) -> MatGf {
        let mut out = MatGf::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    fn truncate_rows(&mut self, rows: usize) {
        self.data.truncate(rows * self.cols);
        self.rows = rows;
    }
}

/// Structural reduced-row-echelon check: strictly increasing pivots, each
/// the first nonzero entry of its row with value 1, pivot columns standard
/// basis vectors. A matrix of this shape is the canonical matrix of its
/// row space.
pub(crate) fn is_canonical_shape(mat: &MatGf) -> bool {
    let mut prev: Option<usize> = None;
    for r in 0..mat.rows() {
        let row = mat.row(r);
        let Some(p) = row.iter().position(|&x| x != 0) else {
            return false;
        };
        if row[p] != 1 || prev.is_some_and(|pp| p <= pp) {
            return false;
        }
        for i in 0..mat.rows() {
            if i != r && mat.get(i, p) != 0 {
                return false;
            }
        }
        prev = Some(p);
    }
    true
}

impl fmt::Display for MatGf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// A k-dimensional subspace of GF(q)^v, stored as its unique canonical
/// matrix (reduced left row echelon form). Equality, ordering and hashing
/// are on the canonical matrix entries, so `Subspace` works directly as a
/// dictionary key.
#[derive(Clone)]
pub struct Subspace {
    field: Field,
    mat: MatGf, // k x v, canonical
}

impl PartialEq for Subspace {
    fn eq(&self, other: &Self) -> bool {
        self.mat == other.mat && self.field == other.field
    }
}
impl Eq for Subspace {}

impl Hash for Subspace {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.field.q().hash(state);
        self.mat.hash(state);
    }
}

impl Ord for Subspace {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.field.q(), self.mat.cols, self.mat.rows, &self.mat.data).cmp(&(
            other.field.q(),
            other.mat.cols,
            other.mat.rows,
            &other.mat.data,
        ))
    }
}
impl PartialOrd for Subspace {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Subspace(q={}, v={}, k={}, codes={:?})",
            self.field.q(),
            self.v(),
            self.dim(),
            self.row_codes()
        )
    }
}

impl Subspace {
    /// Row space of `generators`, brought to canonical form. Idempotent;
    /// zero rows are allowed.
    pub fn canonicalize(field: &Field, generators: &MatGf) -> Subspace {
        let mut m = generators.clone();
        let pivots = m.rref(field);
        m.truncate_rows(pivots.len());
        Subspace {
            field: field.clone(),
            mat: m,
        }
    }

    /// Wraps a matrix that is already in reduced row echelon form. The
    /// shape is checked in debug builds only; callers must uphold it.
    pub fn from_canonical(field: &Field, mat: MatGf) -> Subspace {
        debug_assert!(is_canonical_shape(&mat), "matrix is not in reduced row echelon form");
        Subspace {
            field: field.clone(),
            mat,
        }
    }

    pub fn zero(field: &Field, v: usize) -> Subspace {
        Subspace {
            field: field.clone(),
            mat: MatGf::zeros(0, v),
        }
    }

    pub fn full(field: &Field, v: usize) -> Subspace {
        Subspace {
            field: field.clone(),
            mat: MatGf::identity(v),
        }
    }

    /// V_i: span of the last i standard basis vectors of GF(q)^v.
    pub fn chain_member(field: &Field, v: usize, i: usize) -> Subspace {
        assert!(i <= v);
        let mut mat = MatGf::zeros(i, v);
        for r in 0..i {
            mat.set(r, v - i + r, 1);
        }
        Subspace {
            field: field.clone(),
            mat,
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    #[inline]
    pub fn v(&self) -> usize {
        self.mat.cols()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn cm(&self) -> &MatGf {
        &self.mat
    }

    /// Pivot positions of the canonical matrix, 0-based, strictly increasing.
    pub fn pivots(&self) -> Vec<usize> {
        (0..self.dim())
            .map(|i| {
                self.mat
                    .row(i)
                    .iter()
                    .position(|&x| x != 0)
                    .expect("canonical rows are nonzero")
            })
            .collect()
    }

    fn check_ambient(&self, other: &Subspace) -> Result<()> {
        if self.field != other.field {
            return Err(Error::MixedFields {
                left: self.field.q(),
                right: other.field.q(),
            });
        }
        if self.v() != other.v() {
            return Err(Error::AmbientMismatch {
                left: self.v(),
                right: other.v(),
            });
        }
        Ok(())
    }

    /// Lattice join: self + other.
    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.check_ambient(other)?;
        Ok(Subspace::canonicalize(
            &self.field,
            &self.mat.stack(&other.mat),
        ))
    }

    /// Lattice meet: self ∩ other, via (A^⊥ + B^⊥)^⊥.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        self.check_ambient(other)?;
        Ok(self.dual().sum(&other.dual())?.dual())
    }

    /// Orthogonal complement with respect to the standard dot product,
    /// built directly from the pivot structure: the generator with pivot
    /// set {1..v} \ π(U) whose remaining entries come from -A^T, where A is
    /// the non-pivot part of cm(U).
    pub fn dual(&self) -> Subspace {
        let v = self.v();
        let k = self.dim();
        let pivots = self.pivots();
        let mut is_pivot = vec![false; v];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let co: Vec<usize> = (0..v).filter(|&c| !is_pivot[c]).collect();
        let mut gen = MatGf::zeros(v - k, v);
        for (i, &ci) in co.iter().enumerate() {
            gen.set(i, ci, 1);
            for (j, &pj) in pivots.iter().enumerate() {
                // entry of -A^T: A[j][i] is cm[j][co[i]]
                gen.set(i, pj, self.field.neg(self.mat.get(j, ci)));
            }
        }
        Subspace::canonicalize(&self.field, &gen)
    }

    /// other <= self.
    pub fn contains(&self, other: &Subspace) -> bool {
        debug_assert_eq!(self.v(), other.v());
        if other.dim() > self.dim() {
            return false;
        }
        if other.dim() == 0 {
            return true;
        }
        let mut m = self.mat.stack(&other.mat);
        m.rref(&self.field).len() == self.dim()
    }

    /// U ∩ V_i, read off the block decomposition of cm(U): the rows that
    /// vanish on the first v-i coordinates.
    pub fn meet_with_chain(&self, i: usize) -> Subspace {
        let v = self.v();
        assert!(i <= v);
        let split = v - i;
        let rows: Vec<&[u8]> = (0..self.dim())
            .map(|r| self.mat.row(r))
            .filter(|row| row[..split].iter().all(|&x| x == 0))
            .collect();
        let mat = MatGf::from_rows(&rows);
        let mat = if mat.cols() == v {
            mat
        } else {
            MatGf::zeros(0, v)
        };
        Subspace::from_canonical(&self.field, mat)
    }

    /// U + V_i: block diagonal of the upper-left block of cm(U) with E_i.
    pub fn join_with_chain(&self, i: usize) -> Subspace {
        let v = self.v();
        assert!(i <= v);
        let split = v - i;
        let mut rows: Vec<Vec<u8>> = Vec::new();
        for r in 0..self.dim() {
            let row = self.mat.row(r);
            if row[..split].iter().any(|&x| x != 0) {
                let mut nr = row.to_vec();
                for x in nr[split..].iter_mut() {
                    *x = 0;
                }
                rows.push(nr);
            }
        }
        for j in 0..i {
            let mut e = vec![0u8; v];
            e[split + j] = 1;
            rows.push(e);
        }
        let refs: Vec<&[u8]> = rows.iter().map(|r| r.as_slice()).collect();
        let mat = if refs.is_empty() {
            MatGf::zeros(0, v)
        } else {
            MatGf::from_rows(&refs)
        };
        Subspace::from_canonical(&self.field, mat)
    }

    /// K covers U2/U1, i.e. U1 + K = U2 + K. The flag must be nested.
    pub fn covers(&self, u1: &Subspace, u2: &Subspace) -> Result<bool> {
        self.check_ambient(u1)?;
        self.check_ambient(u2)?;
        if !u2.contains(u1) {
            return Err(Error::NotNested);
        }
        Ok(self.sum(u1)? == self.sum(u2)?)
    }

    /// K avoids U2/U1, i.e. U1 ∩ K = U2 ∩ K.
    pub fn avoids(&self, u1: &Subspace, u2: &Subspace) -> Result<bool> {
        self.check_ambient(u1)?;
        self.check_ambient(u2)?;
        if !u2.contains(u1) {
            return Err(Error::NotNested);
        }
        Ok(self.intersect(u1)? == self.intersect(u2)?)
    }

    /// Pivot-set shortcut for the standard chain: K covers V_j/V_i iff the
    /// positions {v-j, ..., v-i-1} (0-based) are all pivots of cm(K).
    pub fn covers_chain(&self, i: usize, j: usize) -> bool {
        assert!(i <= j && j <= self.v());
        let v = self.v();
        let pivots = self.pivots();
        (v - j..v - i).all(|c| pivots.contains(&c))
    }

    /// K avoids V_j/V_i iff no position in {v-j, ..., v-i-1} is a pivot.
    pub fn avoids_chain(&self, i: usize, j: usize) -> bool {
        assert!(i <= j && j <= self.v());
        let v = self.v();
        let pivots = self.pivots();
        !(v - j..v - i).any(|c| pivots.contains(&c))
    }

    /// Image under the matrix acting on row vectors: row space of cm(U)·M.
    pub fn apply(&self, m: &MatGf) -> Subspace {
        Subspace::canonicalize(&self.field, &self.mat.mul(m, &self.field))
    }

    /// Embeds a subspace of GF(q)^u into GF(q)^v on the last u coordinates,
    /// i.e. as a subspace of the chain member V_u.
    pub fn embed_last(&self, v: usize) -> Subspace {
        let u = self.v();
        assert!(u <= v);
        let mut mat = MatGf::zeros(self.dim(), v);
        for r in 0..self.dim() {
            for c in 0..u {
                mat.set(r, v - u + c, self.mat.get(r, c));
            }
        }
        Subspace::from_canonical(&self.field, mat)
    }

    /// Inverse of `embed_last`: requires the subspace to lie in V_u.
    pub fn restrict_last(&self, u: usize) -> Result<Subspace> {
        let v = self.v();
        let split = v - u;
        let k = self.dim();
        let mut mat = MatGf::zeros(k, u);
        for r in 0..k {
            let row = self.mat.row(r);
            if row[..split].iter().any(|&x| x != 0) {
                return Err(Error::InvalidParameter(format!(
                    "subspace does not lie in V_{u}"
                )));
            }
            for c in 0..u {
                mat.set(r, c, row[split + c]);
            }
        }
        Ok(Subspace::from_canonical(&self.field, mat))
    }

    /// Preimage under GF(q)^v -> GF(q)^v/V_u (quotient coordinates are the
    /// first v-u ones): a subspace A of GF(q)^(v-u) lifts to the canonical
    /// matrix [A 0; 0 E_u].
    pub fn lift_preimage(&self, u: usize) -> Subspace {
        let w = self.v();
        let v = w + u;
        let k = self.dim();
        let mut mat = MatGf::zeros(k + u, v);
        for r in 0..k {
            for c in 0..w {
                mat.set(r, c, self.mat.get(r, c));
            }
        }
        for j in 0..u {
            mat.set(k + j, w + j, 1);
        }
        Subspace::from_canonical(&self.field, mat)
    }

    /// For U ⊇ V_u: the image of U in the quotient coordinates, i.e. the A
    /// block of cm(U) = [A 0; 0 E_u].
    pub fn quotient_by_chain(&self, u: usize) -> Result<Subspace> {
        let v = self.v();
        let w = v - u;
        let k = self.dim();
        if k < u || !self.contains(&Subspace::chain_member(&self.field, v, u)) {
            return Err(Error::InvalidParameter(format!(
                "subspace does not contain V_{u}"
            )));
        }
        let mut mat = MatGf::zeros(k - u, w);
        for r in 0..k - u {
            for c in 0..w {
                mat.set(r, c, self.mat.get(r, c));
            }
        }
        Ok(Subspace::from_canonical(&self.field, mat))
    }

    /// Drops the first coordinate; requires the subspace to lie in the
    /// hyperplane {x_1 = 0}.
    pub fn drop_first_coordinate(&self) -> Result<Subspace> {
        let v = self.v();
        let k = self.dim();
        let mut mat = MatGf::zeros(k, v - 1);
        for r in 0..k {
            let row = self.mat.row(r);
            if row[0] != 0 {
                return Err(Error::InvalidParameter(
                    "subspace is not contained in the hyperplane x_1 = 0".into(),
                ));
            }
            for c in 1..v {
                mat.set(r, c - 1, row[c]);
            }
        }
        Ok(Subspace::from_canonical(&self.field, mat))
    }

    /// Inserts a zero first coordinate (section of `drop_first_coordinate`).
    pub fn prepend_zero_coordinate(&self) -> Subspace {
        let v = self.v();
        let k = self.dim();
        let mut mat = MatGf::zeros(k, v + 1);
        for r in 0..k {
            for c in 0..v {
                mat.set(r, c + 1, self.mat.get(r, c));
            }
        }
        Subspace::from_canonical(&self.field, mat)
    }

    /// Reverses the coordinate order (the reversion automorphism ρ).
    pub fn reverse_coordinates(&self) -> Subspace {
        let v = self.v();
        let k = self.dim();
        let mut mat = MatGf::zeros(k, v);
        for r in 0..k {
            for c in 0..v {
                mat.set(r, c, self.mat.get(r, v - 1 - c));
            }
        }
        Subspace::canonicalize(&self.field, &mat)
    }

    /// q-adic code of each row, most significant digit first (leftmost
    /// matrix entry).
    pub fn row_codes(&self) -> Vec<u64> {
        let q = self.field.q() as u64;
        (0..self.dim())
            .map(|r| self.mat.row(r).iter().fold(0u64, |acc, &d| acc * q + d as u64))
            .collect()
    }

    /// All row codes packed into a single u128 key, when they fit.
    pub fn packed_code(&self) -> Option<u128> {
        let v = self.v() as u32;
        let q = self.field.q();
        let bits = v * (32 - (q - 1).leading_zeros());
        let total = bits as usize * self.dim() + 8;
        if total > 128 {
            return None;
        }
        let mut key = 1u128; // dimension marker
        for r in 0..self.dim() {
            let mut code = 0u128;
            for &d in self.mat.row(r) {
                code = code * q as u128 + d as u128;
            }
            key = (key << bits) | code;
        }
        Some(key)
    }
}
