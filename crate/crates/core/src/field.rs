//! Exact arithmetic in GF(q) for prime and prime-power q, polynomial
//! arithmetic over such fields, and the Singer / Frobenius matrices obtained
//! from a primitive polynomial.
//!
//! Elements are stored as canonical `u8` representatives: for a prime field
//! the integer in `[0, p)`, for an extension field GF(p^e) the integer whose
//! base-p digits are the coefficient vector of the representative polynomial
//! (digit i = coefficient of x^i). Extension fields are table-driven and
//! restricted to q <= 16; prime fields work for any prime that fits in `u8`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::subspace::MatGf;

/// Describes a concrete field GF(q) = GF(p^e).
///
/// For e = 1 the modulus is empty; for e > 1 it is a monic irreducible
/// polynomial of degree e over GF(p), coefficients in ascending degree order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    pub q: u32,
    pub p: u32,
    pub e: u32,
    pub modulus: Vec<u8>,
}

#[derive(Debug)]
enum Repr {
    Prime {
        p: u16,
        inv: Vec<u8>, // inv[0] unused
    },
    Ext {
        q: u16,
        add: Vec<u8>, // q*q tables
        mul: Vec<u8>,
        neg: Vec<u8>,
        inv: Vec<u8>,
    },
}

#[derive(Debug)]
struct FieldInner {
    spec: FieldSpec,
    repr: Repr,
}

/// A finite field handle. Cheap to clone; all values immutable.
#[derive(Debug, Clone)]
pub struct Field(Arc<FieldInner>);

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.spec == other.0.spec
    }
}
impl Eq for Field {}

fn is_prime_u32(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Bundled primitive moduli (ascending coefficients) for the extension
/// fields with q <= 16.
fn bundled_modulus(p: u32, e: u32) -> Option<Vec<u8>> {
    match (p, e) {
        (2, 2) => Some(vec![1, 1, 1]),       // x^2 + x + 1
        (2, 3) => Some(vec![1, 1, 0, 1]),    // x^3 + x + 1
        (2, 4) => Some(vec![1, 1, 0, 0, 1]), // x^4 + x + 1
        (3, 2) => Some(vec![2, 2, 1]),       // x^2 + 2x + 2
        _ => None,
    }
}

impl Field {
    /// The prime field GF(p).
    pub fn prime(p: u32) -> Result<Field> {
        if !is_prime_u32(p) {
            return Err(Error::NotPrime(p));
        }
        if p > 251 {
            return Err(Error::UnsupportedField { q: p });
        }
        let mut inv = vec![0u8; p as usize];
        for a in 1..p {
            inv[a as usize] = mod_inverse(a, p) as u8;
        }
        Ok(Field(Arc::new(FieldInner {
            spec: FieldSpec {
                q: p,
                p,
                e: 1,
                modulus: Vec::new(),
            },
            repr: Repr::Prime { p: p as u16, inv },
        })))
    }

    /// GF(q) for a prime power q, using the bundled modulus when q is not prime.
    pub fn gf(q: u32) -> Result<Field> {
        if is_prime_u32(q) {
            return Field::prime(q);
        }
        for p in 2..=q {
            if is_prime_u32(p) && q % p == 0 {
                let mut e = 0u32;
                let mut n = q;
                while n % p == 0 {
                    n /= p;
                    e += 1;
                }
                if n != 1 {
                    break; // not a prime power
                }
                let modulus =
                    bundled_modulus(p, e).ok_or(Error::UnsupportedField { q })?;
                return Field::extension(p, &modulus);
            }
        }
        Err(Error::UnsupportedField { q })
    }

    /// GF(p^e) with an explicit monic modulus of degree e (ascending coefficients).
    pub fn extension(p: u32, modulus: &[u8]) -> Result<Field> {
        if !is_prime_u32(p) {
            return Err(Error::NotPrime(p));
        }
        let e = modulus.len().saturating_sub(1) as u32;
        if e < 2 {
            return Err(Error::InvalidParameter(
                "extension modulus must have degree >= 2".into(),
            ));
        }
        let q = (p as u64).pow(e);
        if q > 16 {
            return Err(Error::UnsupportedField { q: q as u32 });
        }
        let q = q as u32;
        if modulus[e as usize] != 1 {
            return Err(Error::InvalidParameter("modulus must be monic".into()));
        }
        let base = Field::prime(p)?;
        // Element index <-> coefficient vector in base p.
        let digits = |n: u32| -> Vec<u8> {
            let mut d = vec![0u8; e as usize];
            let mut n = n;
            for x in d.iter_mut() {
                *x = (n % p) as u8;
                n /= p;
            }
            d
        };
        let undigits = |d: &[u8]| -> u32 {
            d.iter().rev().fold(0u32, |acc, &c| acc * p + c as u32)
        };
        let qq = q as usize;
        let mut add = vec![0u8; qq * qq];
        let mut mul = vec![0u8; qq * qq];
        let mut neg = vec![0u8; qq];
        for a in 0..q {
            let da = digits(a);
            let n: Vec<u8> = da.iter().map(|&x| base.neg(x)).collect();
            neg[a as usize] = undigits(&n) as u8;
            for b in 0..q {
                let db = digits(b);
                let s: Vec<u8> = da
                    .iter()
                    .zip(db.iter())
                    .map(|(&x, &y)| base.add(x, y))
                    .collect();
                add[(a * q + b) as usize] = undigits(&s) as u8;
                let prod = poly_mul_mod(&da, &db, modulus, &base);
                mul[(a * q + b) as usize] = undigits(&prod) as u8;
            }
        }
        // Irreducibility of the modulus shows as every nonzero element having
        // an inverse in the multiplication table.
        let mut inv = vec![0u8; qq];
        for a in 1..q {
            let mut found = None;
            for b in 1..q {
                if mul[(a * q + b) as usize] == 1 {
                    found = Some(b as u8);
                    break;
                }
            }
            inv[a as usize] = found.ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "modulus is not irreducible over GF({p}): element {a} has no inverse"
                ))
            })?;
        }
        Ok(Field(Arc::new(FieldInner {
            spec: FieldSpec {
                q,
                p,
                e,
                modulus: modulus.to_vec(),
            },
            repr: Repr::Ext {
                q: q as u16,
                add,
                mul,
                neg,
                inv,
            },
        })))
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.0.spec
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.0.spec.q
    }

    pub fn p(&self) -> u32 {
        self.0.spec.p
    }

    pub fn is_prime_field(&self) -> bool {
        self.0.spec.e == 1
    }

    /// All canonical element values, 0..q.
    pub fn elements(&self) -> impl Iterator<Item = u8> {
        (0..self.q() as u8).chain(std::iter::empty())
    }

    #[inline]
    pub fn add(&self, a: u8, b: u8) -> u8 {
        match &self.0.repr {
            Repr::Prime { p, .. } => ((a as u16 + b as u16) % p) as u8,
            Repr::Ext { q, add, .. } => add[(a as usize) * (*q as usize) + b as usize],
        }
    }

    #[inline]
    pub fn sub(&self, a: u8, b: u8) -> u8 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: u8, b: u8) -> u8 {
        match &self.0.repr {
            Repr::Prime { p, .. } => ((a as u16 * b as u16) % p) as u8,
            Repr::Ext { q, mul, .. } => mul[(a as usize) * (*q as usize) + b as usize],
        }
    }

    #[inline]
    pub fn neg(&self, a: u8) -> u8 {
        match &self.0.repr {
            Repr::Prime { p, .. } => {
                if a == 0 {
                    0
                } else {
                    (*p - a as u16) as u8
                }
            }
            Repr::Ext { neg, .. } => neg[a as usize],
        }
    }

    pub fn inv(&self, a: u8) -> Result<u8> {
        if a == 0 {
            return Err(Error::ZeroInversion { q: self.q() });
        }
        Ok(match &self.0.repr {
            Repr::Prime { inv, .. } => inv[a as usize],
            Repr::Ext { inv, .. } => inv[a as usize],
        })
    }

    /// Wraps a canonical value, checking the range.
    pub fn elem(&self, value: u8) -> Result<FieldElement> {
        if (value as u32) < self.q() {
            Ok(FieldElement {
                field: self.clone(),
                value,
            })
        } else {
            Err(Error::InvalidParameter(format!(
                "{value} is not a canonical element of GF({})",
                self.q()
            )))
        }
    }
}

/// A field element bundled with its field, for checked arithmetic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldElement {
    field: Field,
    value: u8,
}

impl FieldElement {
    pub fn value(&self) -> u8 {
        self.value
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    fn check_same(&self, other: &FieldElement) -> Result<()> {
        if self.field == other.field {
            Ok(())
        } else {
            Err(Error::MixedFields {
                left: self.field.q(),
                right: other.field.q(),
            })
        }
    }

    pub fn add(&self, other: &FieldElement) -> Result<FieldElement> {
        self.check_same(other)?;
        Ok(FieldElement {
            field: self.field.clone(),
            value: self.field.add(self.value, other.value),
        })
    }

    pub fn sub(&self, other: &FieldElement) -> Result<FieldElement> {
        self.check_same(other)?;
        Ok(FieldElement {
            field: self.field.clone(),
            value: self.field.sub(self.value, other.value),
        })
    }

    pub fn mul(&self, other: &FieldElement) -> Result<FieldElement> {
        self.check_same(other)?;
        Ok(FieldElement {
            field: self.field.clone(),
            value: self.field.mul(self.value, other.value),
        })
    }

    pub fn neg(&self) -> FieldElement {
        FieldElement {
            field: self.field.clone(),
            value: self.field.neg(self.value),
        }
    }

    pub fn inv(&self) -> Result<FieldElement> {
        Ok(FieldElement {
            field: self.field.clone(),
            value: self.field.inv(self.value)?,
        })
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

fn mod_inverse(a: u32, p: u32) -> u32 {
    // Fermat; p is prime and a != 0.
    let mut result = 1u64;
    let mut base = a as u64 % p as u64;
    let mut exp = p as u64 - 2;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * base % p as u64;
        }
        base = base * base % p as u64;
        exp >>= 1;
    }
    result as u32
}

// --- polynomial arithmetic over a field, coefficients in ascending degree order

/// (a * b) mod m over `field`; m monic with deg(m) = m.len() - 1.
pub fn poly_mul_mod(a: &[u8], b: &[u8], m: &[u8], field: &Field) -> Vec<u8> {
    let d = m.len() - 1;
    let mut res = vec![0u8; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            if y != 0 {
                res[i + j] = field.add(res[i + j], field.mul(x, y));
            }
        }
    }
    for i in (d..res.len()).rev() {
        let c = res[i];
        if c != 0 {
            res[i] = 0;
            for j in 0..d {
                let t = field.mul(c, m[j]);
                res[i - d + j] = field.sub(res[i - d + j], t);
            }
        }
    }
    res.truncate(d);
    res.resize(d, 0);
    res
}

/// base^exp mod m over `field`.
pub fn poly_pow_mod(base: &[u8], mut exp: u128, m: &[u8], field: &Field) -> Vec<u8> {
    let d = m.len() - 1;
    let mut result = vec![0u8; d];
    result[0] = 1;
    let mut b = base.to_vec();
    while exp > 0 {
        if exp & 1 == 1 {
            result = poly_mul_mod(&result, &b, m, field);
        }
        b = poly_mul_mod(&b, &b, m, field);
        exp >>= 1;
    }
    result
}

fn is_one(p: &[u8]) -> bool {
    p.first() == Some(&1) && p.iter().skip(1).all(|&c| c == 0)
}

/// Distinct prime factors by trial division, with a Miller-Rabin check on
/// any large leftover cofactor.
pub fn prime_factors(mut n: u128) -> Result<Vec<u128>> {
    let mut out = Vec::new();
    let push = |f: u128, out: &mut Vec<u128>| {
        if out.last() != Some(&f) {
            out.push(f);
        }
    };
    let mut d = 2u128;
    while d <= 1_000_000 && d * d <= n {
        while n % d == 0 {
            push(d, &mut out);
            n /= d;
        }
        d = if d == 2 { 3 } else { d + 2 };
    }
    if n > 1 {
        if is_probable_prime(n) {
            push(n, &mut out);
        } else {
            return Err(Error::InvalidParameter(format!(
                "cannot factor {n} while checking primitivity"
            )));
        }
    }
    Ok(out)
}

fn mulmod_u128(mut a: u128, mut b: u128, m: u128) -> u128 {
    if let (Some(_), true) = (a.checked_mul(b), m <= u64::MAX as u128) {
        return a * b % m;
    }
    let mut res = 0u128;
    a %= m;
    while b > 0 {
        if b & 1 == 1 {
            res = (res + a) % m;
        }
        a = (a << 1) % m;
        b >>= 1;
    }
    res
}

fn powmod_u128(mut base: u128, mut exp: u128, m: u128) -> u128 {
    let mut res = 1u128 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            res = mulmod_u128(res, base, m);
        }
        base = mulmod_u128(base, base, m);
        exp >>= 1;
    }
    res
}

fn is_probable_prime(n: u128) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u128, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d & 1 == 0 {
        d >>= 1;
        s += 1;
    }
    'witness: for &a in &[2u128, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod_u128(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mulmod_u128(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// A monic primitive polynomial of degree v over GF(q). Primitivity is
/// checked at construction: a root must generate the full multiplicative
/// group of GF(q^v).
#[derive(Debug, Clone)]
pub struct PrimitivePolynomial {
    field: Field,
    coeffs: Vec<u8>, // ascending, length v+1, leading coefficient 1
}

impl PrimitivePolynomial {
    /// From ascending coefficients (constant term first).
    pub fn new(field: &Field, coeffs: &[u8]) -> Result<Self> {
        let v = coeffs.len().saturating_sub(1);
        if v == 0 {
            return Err(Error::InvalidParameter(
                "polynomial must have degree >= 1".into(),
            ));
        }
        if coeffs[v] != 1 {
            return Err(Error::InvalidParameter("polynomial must be monic".into()));
        }
        if coeffs.iter().any(|&c| c as u32 >= field.q()) {
            return Err(Error::InvalidParameter(format!(
                "coefficients must be canonical elements of GF({})",
                field.q()
            )));
        }
        let poly = PrimitivePolynomial {
            field: field.clone(),
            coeffs: coeffs.to_vec(),
        };
        poly.check_primitive()?;
        Ok(poly)
    }

    /// From descending coefficients (leading term first, constant last) —
    /// the CLI input order.
    pub fn from_descending(field: &Field, coeffs: &[u8]) -> Result<Self> {
        let mut asc = coeffs.to_vec();
        asc.reverse();
        Self::new(field, &asc)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Ascending coefficients, constant term first.
    pub fn coeffs(&self) -> &[u8] {
        &self.coeffs
    }

    /// Verifies that the order of x in GF(q)[x]/(f) is exactly q^v - 1.
    /// Together with a nonzero constant term this certifies both
    /// irreducibility and primitivity.
    fn check_primitive(&self) -> Result<()> {
        let q = self.field.q() as u128;
        let v = self.degree() as u32;
        if self.coeffs[0] == 0 {
            return Err(Error::NotPrimitive {
                witness: "constant term is zero, so x is not a unit".into(),
            });
        }
        let n = q
            .checked_pow(v)
            .ok_or_else(|| Error::InvalidParameter("q^v overflows".into()))?
            - 1;
        let x = vec![0u8, 1];
        let full = poly_pow_mod(&x, n, &self.coeffs, &self.field);
        if !is_one(&full) {
            return Err(Error::NotPrimitive {
                witness: format!("x^(q^v-1) = x^{n} != 1"),
            });
        }
        for r in prime_factors(n)? {
            let part = poly_pow_mod(&x, n / r, &self.coeffs, &self.field);
            if is_one(&part) {
                return Err(Error::NotPrimitive {
                    witness: format!("x^((q^v-1)/{r}) = 1"),
                });
            }
        }
        Ok(())
    }

    /// Coordinates of x^e in the basis {1, x, ..., x^(v-1)} of GF(q)[x]/(f).
    pub fn power_coords(&self, e: u128) -> Vec<u8> {
        poly_pow_mod(&[0, 1], e, &self.coeffs, &self.field)
    }
}

/// Matrix of the Singer cycle x -> alpha*x on GF(q^v) in the basis
/// {1, alpha, ..., alpha^(v-1)}, alpha a root of `poly`: subdiagonal ones,
/// last column the coordinates of alpha^v.
pub fn singer_matrix(poly: &PrimitivePolynomial) -> MatGf {
    let v = poly.degree();
    let field = poly.field();
    let mut m = MatGf::zeros(v, v);
    for j in 0..v - 1 {
        m.set(j + 1, j, 1);
    }
    for i in 0..v {
        m.set(i, v - 1, field.neg(poly.coeffs()[i]));
    }
    m
}

/// Matrix of the Frobenius automorphism x -> x^q in the same basis:
/// column i holds the coordinates of alpha^(i*q). Requires q prime, since
/// otherwise x -> x^q is not GF(q)-linear.
pub fn frobenius_matrix(poly: &PrimitivePolynomial) -> Result<MatGf> {
    let field = poly.field();
    if !field.is_prime_field() {
        return Err(Error::InvalidParameter(format!(
            "Frobenius matrix requires prime q, got q = {}",
            field.q()
        )));
    }
    let v = poly.degree();
    let q = field.q() as u128;
    let mut m = MatGf::zeros(v, v);
    for j in 0..v {
        let col = poly.power_coords(j as u128 * q);
        for i in 0..v {
            m.set(i, j, col[i]);
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_basics() {
        let f3 = Field::prime(3).unwrap();
        assert_eq!(f3.mul(2, 2), 1);
        let f5 = Field::prime(5).unwrap();
        assert_eq!(f5.inv(2).unwrap(), 3);
        assert!(matches!(
            f5.inv(0),
            Err(Error::ZeroInversion { q: 5 })
        ));
        assert!(Field::prime(6).is_err());
    }

    #[test]
    fn gf4_multiplication() {
        // x * x = x + 1 with modulus x^2 + x + 1; index(x) = 2, index(x+1) = 3
        let f4 = Field::gf(4).unwrap();
        assert_eq!(f4.mul(2, 2), 3);
    }

    #[test]
    fn mixed_field_error() {
        let f3 = Field::prime(3).unwrap();
        let f5 = Field::prime(5).unwrap();
        let a = f3.elem(2).unwrap();
        let b = f5.elem(2).unwrap();
        assert!(matches!(
            a.add(&b),
            Err(Error::MixedFields { left: 3, right: 5 })
        ));
    }

    #[test]
    fn field_axioms_exhaustive_small_q() {
        for q in [2u32, 3, 4, 5, 7, 8, 9] {
            let f = Field::gf(q).unwrap();
            let els: Vec<u8> = (0..q as u8).collect();
            for &a in &els {
                assert_eq!(f.add(a, 0), a);
                assert_eq!(f.mul(a, 1), a);
                assert_eq!(f.add(a, f.neg(a)), 0);
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                }
                for &b in &els {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for &c in &els {
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(
                            f.mul(a, f.add(b, c)),
                            f.add(f.mul(a, b), f.mul(a, c))
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn primitive_poly_gf2() {
        let f2 = Field::prime(2).unwrap();
        // x^2 + x + 1 is primitive over GF(2)
        let p = PrimitivePolynomial::new(&f2, &[1, 1, 1]).unwrap();
        let s = singer_matrix(&p);
        assert_eq!(s.row(0), &[0, 1]);
        assert_eq!(s.row(1), &[1, 1]);
        let fr = frobenius_matrix(&p).unwrap();
        // columns: coords of 1 and alpha^2 = alpha + 1
        assert_eq!(fr.get(0, 0), 1);
        assert_eq!(fr.get(1, 0), 0);
        assert_eq!(fr.get(0, 1), 1);
        assert_eq!(fr.get(1, 1), 1);
    }

    #[test]
    fn non_primitive_rejected() {
        let f2 = Field::prime(2).unwrap();
        // x^2 + 1 = (x+1)^2 over GF(2)
        let err = PrimitivePolynomial::new(&f2, &[1, 0, 1]).unwrap_err();
        assert!(matches!(err, Error::NotPrimitive { .. }));
        // x^4 + x^3 + x^2 + x + 1 is irreducible over GF(2) but not primitive
        // (its roots have order 5, not 15)
        let err = PrimitivePolynomial::new(&f2, &[1, 1, 1, 1, 1]).unwrap_err();
        match err {
            Error::NotPrimitive { witness } => assert!(witness.contains("/3")),
            other => panic!("unexpected: {other}"),
        }
    }

    #[test]
    fn frobenius_rejects_non_prime_q() {
        let f4 = Field::gf(4).unwrap();
        // x^2 + x + w over GF(4) would be needed; just check the q gate with
        // a degree-2 primitive polynomial over GF(4): x^2 + x + 2 (2 = w).
        if let Ok(p) = PrimitivePolynomial::new(&f4, &[2, 1, 1]) {
            assert!(frobenius_matrix(&p).is_err());
        }
    }
}
