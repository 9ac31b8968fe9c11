//! Exact Gaussian binomials, streaming enumeration of the Grassmannian via
//! the q-grid-path bijection, and the q-adic block codec.
//!
//! A path from (0,0) to (v-k, k) in the q-grid graph is read column-wise as
//! a k x v matrix in reduced row echelon form: the i-th step is vertical
//! exactly when column i is a pivot column, and a horizontal step at height
//! y carries a label in GF(q)^y giving the entries of rows 0..y in that
//! column. Enumeration is depth-first, vertical before horizontal, labels
//! in lexicographic order (row 0 most significant), which fixes a
//! reproducible stream order.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::subspace::{MatGf, Subspace};

/// Exact Gaussian binomial coefficient [v, k]_q. Out-of-range k gives 0.
pub fn gaussian_binomial(v: u64, k: u64, q: u64) -> BigUint {
    if k > v {
        return BigUint::zero();
    }
    let k = k.min(v - k); // symmetry keeps the partial products small
    let q = BigUint::from(q);
    let mut result = BigUint::one();
    for i in 0..k {
        // partial products are themselves Gaussian binomials, so the
        // division is exact at every step
        let num = q.pow((v - i) as u32) - 1u32;
        let den = q.pow((i + 1) as u32) - 1u32;
        result = result * num / den;
    }
    result
}

/// One step of a q-grid path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathStep {
    Vertical,
    /// Label entries for rows 0..y, row 0 first.
    Horizontal(Vec<u8>),
}

/// A path from (0,0) to (v-k, k) in the q-grid graph, one step per column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridPath {
    pub steps: Vec<PathStep>,
}

impl GridPath {
    pub fn v(&self) -> usize {
        self.steps.len()
    }

    pub fn k(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| matches!(s, PathStep::Vertical))
            .count()
    }

    /// The vertices (x, y) visited, starting at (0,0).
    pub fn vertices(&self) -> Vec<(usize, usize)> {
        let mut out = vec![(0, 0)];
        let (mut x, mut y) = (0, 0);
        for s in &self.steps {
            match s {
                PathStep::Vertical => y += 1,
                PathStep::Horizontal(_) => x += 1,
            }
            out.push((x, y));
        }
        out
    }
}

/// Builds the canonical matrix described by a path.
pub fn path_to_subspace(field: &Field, path: &GridPath) -> Result<Subspace> {
    let v = path.v();
    let k = path.k();
    let q = field.q() as u8;
    let mut mat = MatGf::zeros(k, v);
    let mut y = 0;
    for (col, step) in path.steps.iter().enumerate() {
        match step {
            PathStep::Vertical => {
                mat.set(y, col, 1);
                y += 1;
            }
            PathStep::Horizontal(label) => {
                if label.len() != y {
                    return Err(Error::MalformedPath(format!(
                        "horizontal step at column {} has label length {}, expected {}",
                        col + 1,
                        label.len(),
                        y
                    )));
                }
                for (r, &d) in label.iter().enumerate() {
                    if d >= q {
                        return Err(Error::MalformedPath(format!(
                            "label digit {d} is not an element of GF({q})"
                        )));
                    }
                    mat.set(r, col, d);
                }
            }
        }
    }
    Ok(Subspace::from_canonical(field, mat))
}

/// Reads the path off the canonical matrix of a subspace.
pub fn subspace_to_path(s: &Subspace) -> GridPath {
    let v = s.v();
    let pivots = s.pivots();
    let mut steps = Vec::with_capacity(v);
    let mut y = 0;
    for col in 0..v {
        if pivots.get(y) == Some(&col) {
            steps.push(PathStep::Vertical);
            y += 1;
        } else {
            let label = (0..y).map(|r| s.cm().get(r, col)).collect();
            steps.push(PathStep::Horizontal(label));
        }
    }
    GridPath { steps }
}

/// Depth-first visit of every k-subspace of GF(q)^v, exactly once, in the
/// fixed stream order. The visitor receives the canonical matrix and the
/// pivot columns; the buffers are reused between calls.
pub fn visit_grassmannian<F>(field: &Field, v: usize, k: usize, mut f: F)
where
    F: FnMut(&MatGf, &[usize]),
{
    if k > v {
        return;
    }
    let q = field.q() as u8;
    let mut mat = MatGf::zeros(k, v);
    let mut pivots = Vec::with_capacity(k);
    visit_rec(q, v, k, 0, 0, &mut mat, &mut pivots, &mut f);
}

#[allow(clippy::too_many_arguments)]
fn visit_rec<F>(
    q: u8,
    v: usize,
    k: usize,
    col: usize,
    y: usize,
    mat: &mut MatGf,
    pivots: &mut Vec<usize>,
    f: &mut F,
) where
    F: FnMut(&MatGf, &[usize]),
{
    if col == v {
        f(mat, pivots);
        return;
    }
    // vertical step: column becomes the pivot column of row y
    if y < k {
        mat.set(y, col, 1);
        pivots.push(col);
        visit_rec(q, v, k, col + 1, y + 1, mat, pivots, f);
        pivots.pop();
        mat.set(y, col, 0);
    }
    // horizontal step, if enough columns remain for the missing pivots;
    // labels run through GF(q)^y in lexicographic order
    if v - col - 1 >= k - y {
        if y == 0 {
            visit_rec(q, v, k, col + 1, y, mat, pivots, f);
        } else {
            'labels: loop {
                visit_rec(q, v, k, col + 1, y, mat, pivots, f);
                // odometer: row y-1 is the least significant digit
                let mut r = y;
                while r > 0 {
                    r -= 1;
                    let d = mat.get(r, col);
                    if d + 1 < q {
                        mat.set(r, col, d + 1);
                        continue 'labels;
                    }
                    mat.set(r, col, 0);
                }
                break; // wrapped: all labels done, column back to zero
            }
        }
    }
}

/// Iterator over all k-subspaces of GF(q)^v in the deterministic stream
/// order. Materializes each yielded subspace; use [`visit_grassmannian`]
/// for allocation-free sweeps.
pub struct GrassmannianIter {
    field: Field,
    v: usize,
    k: usize,
    // current path; None before the first element, empty Vec when exhausted
    state: Option<Vec<PathStep>>,
    done: bool,
}

impl GrassmannianIter {
    pub fn new(field: &Field, v: usize, k: usize) -> GrassmannianIter {
        GrassmannianIter {
            field: field.clone(),
            v,
            k,
            state: None,
            done: k > v,
        }
    }

    /// First valid extension from (col, y): vertical while rows remain,
    /// horizontal zero labels afterwards.
    fn extend(&self, steps: &mut Vec<PathStep>) {
        let mut y = steps.iter().filter(|s| matches!(s, PathStep::Vertical)).count();
        while steps.len() < self.v {
            if y < self.k {
                steps.push(PathStep::Vertical);
                y += 1;
            } else {
                steps.push(PathStep::Horizontal(vec![0; y]));
            }
        }
    }

    /// Advances to the successor path, or flags exhaustion.
    fn advance(&mut self) {
        let mut steps = self.state.take().expect("advance after first element");
        loop {
            let Some(step) = steps.pop() else {
                self.done = true;
                self.state = Some(steps);
                return;
            };
            let col = steps.len();
            let y = steps.iter().filter(|s| matches!(s, PathStep::Vertical)).count();
            let x = col - y;
            let q = self.field.q() as u8;
            match step {
                PathStep::Vertical => {
                    // next alternative: horizontal with all-zero label
                    if x < self.v - self.k {
                        steps.push(PathStep::Horizontal(vec![0; y]));
                        self.extend(&mut steps);
                        self.state = Some(steps);
                        return;
                    }
                }
                PathStep::Horizontal(mut label) => {
                    // next label in lexicographic order
                    let mut r = label.len();
                    let mut carried = true;
                    while r > 0 {
                        r -= 1;
                        if label[r] + 1 < q {
                            label[r] += 1;
                            carried = false;
                            break;
                        }
                        label[r] = 0;
                    }
                    if !carried {
                        steps.push(PathStep::Horizontal(label));
                        self.extend(&mut steps);
                        self.state = Some(steps);
                        return;
                    }
                }
            }
        }
    }
}

impl Iterator for GrassmannianIter {
    type Item = Subspace;

    fn next(&mut self) -> Option<Subspace> {
        if self.done {
            return None;
        }
        if self.state.is_none() {
            let mut steps = Vec::with_capacity(self.v);
            self.extend(&mut steps);
            self.state = Some(steps);
        }
        let path = GridPath {
            steps: self.state.clone().unwrap(),
        };
        let out = path_to_subspace(&self.field, &path).expect("generated paths are valid");
        self.advance();
        Some(out)
    }
}

/// All canonical k x v matrices, collected in stream order. Convenient as a
/// transversal for mapping t-subspaces through a block's canonical matrix.
pub fn canonical_matrices(field: &Field, v: usize, k: usize) -> Vec<MatGf> {
    let mut out = Vec::new();
    visit_grassmannian(field, v, k, |mat, _| out.push(mat.clone()));
    out
}

fn code_capacity_ok(q: u32, v: usize) -> bool {
    (q as u128).checked_pow(v as u32).is_some_and(|n| n <= u64::MAX as u128 + 1)
}

/// q-adic code of each canonical-matrix row: row (a_{v-1}, ..., a_0) maps
/// to sum a_i q^i, leftmost entry most significant.
pub fn encode_block(s: &Subspace) -> Result<Vec<u64>> {
    let q = s.field().q();
    if !code_capacity_ok(q, s.v()) {
        return Err(Error::InvalidParameter(format!(
            "q^v = {}^{} does not fit the 64-bit block codec",
            q,
            s.v()
        )));
    }
    Ok(s.row_codes())
}

/// Inverse of [`encode_block`]; the decoded matrix must already be in
/// reduced row echelon form.
pub fn decode_block(field: &Field, codes: &[u64], v: usize) -> Result<Subspace> {
    let q = field.q() as u64;
    if !code_capacity_ok(field.q(), v) {
        return Err(Error::InvalidParameter(format!(
            "q^v = {q}^{v} does not fit the 64-bit block codec"
        )));
    }
    let k = codes.len();
    let mut mat = MatGf::zeros(k, v);
    for (r, &code) in codes.iter().enumerate() {
        let mut c = code;
        for j in (0..v).rev() {
            mat.set(r, j, (c % q) as u8);
            c /= q;
        }
        if c != 0 {
            return Err(Error::Parse {
                line: r + 1,
                msg: format!("code {code} is not below q^v = {q}^{v}"),
            });
        }
    }
    check_canonical(&mat).map(|_| Subspace::from_canonical(field, mat))
}

/// Checks the reduced row echelon property, reporting the first offending row.
fn check_canonical(mat: &MatGf) -> Result<()> {
    let mut prev_pivot: Option<usize> = None;
    for r in 0..mat.rows() {
        let row = mat.row(r);
        let Some(p) = row.iter().position(|&x| x != 0) else {
            return Err(Error::NonCanonicalRow { row: r + 1 });
        };
        if row[p] != 1 {
            return Err(Error::NonCanonicalRow { row: r + 1 });
        }
        if let Some(pp) = prev_pivot {
            if p <= pp {
                return Err(Error::NonCanonicalRow { row: r + 1 });
            }
        }
        // pivot column must be a standard basis vector
        for i in 0..mat.rows() {
            if i != r && mat.get(i, p) != 0 {
                return Err(Error::NonCanonicalRow { row: i + 1 });
            }
        }
        prev_pivot = Some(p);
    }
    Ok(())
}
