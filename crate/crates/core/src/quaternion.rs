//! Quaternion division algebra over `f64`.
//!
//! A [`Quaternion`] is written `t + x i + y j + z k`. Multiplication is the
//! Hamilton product and is not commutative.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Squared norms below this are treated as zero by [`Quaternion::inverse`].
pub const ZERO_DIVISOR_NORM_SQR: f64 = 1e-300;

/// A quaternion `t + x i + y j + z k`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(t: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { t, x, y, z }
    }

    pub const fn real(t: f64) -> Self {
        Quaternion::new(t, 0.0, 0.0, 0.0)
    }

    /// Pure imaginary quaternion `x i + y j + z k`.
    pub const fn pure(x: f64, y: f64, z: f64) -> Self {
        Quaternion::new(0.0, x, y, z)
    }

    pub fn from_array(c: [f64; 4]) -> Self {
        Quaternion::new(c[0], c[1], c[2], c[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.t, self.x, self.y, self.z]
    }

    pub fn scalar(self) -> f64 {
        self.t
    }

    /// The imaginary part `x i + y j + z k`.
    pub fn vector(self) -> Quaternion {
        Quaternion::pure(self.x, self.y, self.z)
    }

    pub fn conj(self) -> Self {
        Quaternion::new(self.t, -self.x, -self.y, -self.z)
    }

    pub fn norm_sqr(self) -> f64 {
        self.t * self.t + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(self) -> f64 {
        // hypot-style scaling is unnecessary at the magnitudes used here
        self.norm_sqr().sqrt()
    }

    /// Norm of the imaginary part.
    pub fn vector_norm(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Euclidean inner product on R^4.
    pub fn dot(self, other: Quaternion) -> f64 {
        self.t * other.t + self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn scale(self, s: f64) -> Self {
        Quaternion::new(self.t * s, self.x * s, self.y * s, self.z * s)
    }

    /// Multiplicative inverse `conj(q) / |q|^2`.
    ///
    /// Fails with [`Error::ZeroDivisor`] when `|q|^2 < 1e-300`.
    pub fn inverse(self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if !(n2 >= ZERO_DIVISOR_NORM_SQR) {
            return Err(Error::ZeroDivisor { norm_sqr: n2 });
        }
        Ok(self.conj().scale(1.0 / n2))
    }

    /// Integer power by repeated multiplication (`q^0 = 1`).
    pub fn powi(self, n: u32) -> Self {
        let mut acc = Quaternion::ONE;
        let mut base = self;
        let mut e = n;
        // powers of a single quaternion commute, so square-and-multiply is exact algebra
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base *= base;
            e >>= 1;
        }
        acc
    }

    pub fn is_finite(self) -> bool {
        self.t.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// `|self - other| <= tol.abs + tol.rel * max(|self|, |other|)`.
    pub fn approx_eq(self, other: Quaternion, tol: Tolerance) -> bool {
        let diff = (self - other).norm();
        diff <= tol.abs + tol.rel * self.norm().max(other.norm())
    }

    /// Distance `|self - other|`.
    pub fn dist(self, other: Quaternion) -> f64 {
        (self - other).norm()
    }
}

/// Absolute plus relative tolerance pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Tolerance { abs, rel }
    }

    /// Allowed error against a reference magnitude.
    pub fn allowed(self, magnitude: f64) -> f64 {
        self.abs + self.rel * magnitude
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::new(1e-12, 1e-9)
    }
}

impl From<f64> for Quaternion {
    fn from(t: f64) -> Self {
        Quaternion::real(t)
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.t + o.t, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.t - o.t, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.t, -self.x, -self.y, -self.z)
    }
}

/// Hamilton product.
impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, o: Quaternion) -> Quaternion {
        let (a1, b1, c1, d1) = (self.t, self.x, self.y, self.z);
        let (a2, b2, c2, d2) = (o.t, o.x, o.y, o.z);
        Quaternion::new(
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    fn mul(self, s: f64) -> Quaternion {
        self.scale(s)
    }
}

impl Mul<Quaternion> for f64 {
    type Output = Quaternion;
    fn mul(self, q: Quaternion) -> Quaternion {
        q.scale(self)
    }
}

impl Div<f64> for Quaternion {
    type Output = Quaternion;
    fn div(self, s: f64) -> Quaternion {
        self.scale(1.0 / s)
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, o: Quaternion) {
        *self = *self + o;
    }
}

impl SubAssign for Quaternion {
    fn sub_assign(&mut self, o: Quaternion) {
        *self = *self - o;
    }
}

impl MulAssign for Quaternion {
    fn mul_assign(&mut self, o: Quaternion) {
        *self = *self * o;
    }
}

impl Sum for Quaternion {
    fn sum<I: Iterator<Item = Quaternion>>(iter: I) -> Quaternion {
        iter.fold(Quaternion::ZERO, |a, b| a + b)
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, v: f64, unit: &str) -> fmt::Result {
    if v.is_sign_negative() {
        write!(f, "-{}{}", -v, unit)
    } else {
        write!(f, "+{}{}", v, unit)
    }
}

/// Renders as `a+bi+cj+dk`, always with all four components, e.g. `1-2i+0j+0.5k`.
impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.t)?;
        write_term(f, self.x, "i")?;
        write_term(f, self.y, "j")?;
        write_term(f, self.z, "k")
    }
}

struct Cursor<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn sign(&mut self) -> Option<f64> {
        match self.peek() {
            Some(b'+') => {
                self.pos += 1;
                Some(1.0)
            }
            Some(b'-') => {
                self.pos += 1;
                Some(-1.0)
            }
            _ => None,
        }
    }

    /// Unsigned decimal literal with optional fraction and exponent.
    fn number(&mut self) -> Option<f64> {
        let start = self.pos;
        let digits = |c: &mut Cursor<'_>| {
            let s = c.pos;
            while c.peek().is_some_and(|b| b.is_ascii_digit()) {
                c.pos += 1;
            }
            c.pos - s
        };
        let mut n = digits(self);
        if self.peek() == Some(b'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            self.pos = start;
            return None;
        }
        if matches!(self.peek(), Some(b'e') | Some(b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
            }
        }
        std::str::from_utf8(&self.s[start..self.pos]).ok()?.parse().ok()
    }
}

impl FromStr for Quaternion {
    type Err = Error;

    /// Parses the `a+bi+cj+dk` grammar produced by `Display`, whitespace allowed
    /// between tokens.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |what: &str| Error::Parse(format!("quaternion {s:?}: {what}"));
        let mut c = Cursor { s: s.as_bytes(), pos: 0 };
        let mut out = [0.0; 4];
        for (idx, unit) in [None, Some(b'i'), Some(b'j'), Some(b'k')].into_iter().enumerate() {
            c.skip_ws();
            let sign = match c.sign() {
                Some(sg) => sg,
                None if idx == 0 => 1.0,
                None => return Err(bad("expected '+' or '-'")),
            };
            c.skip_ws();
            let v = c.number().ok_or_else(|| bad("expected a number"))?;
            c.skip_ws();
            if let Some(u) = unit {
                if c.peek() != Some(u) {
                    return Err(bad(&format!("expected unit '{}'", u as char)));
                }
                c.pos += 1;
            }
            out[idx] = sign * v;
        }
        c.skip_ws();
        if c.pos != c.s.len() {
            return Err(bad("trailing characters"));
        }
        Ok(Quaternion::from_array(out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const I: Quaternion = Quaternion::I;
    const J: Quaternion = Quaternion::J;
    const K: Quaternion = Quaternion::K;

    /// Component oracle: expands the product from the unit multiplication table.
    fn table_product(a: Quaternion, b: Quaternion) -> Quaternion {
        // unit index 0..4 = 1,i,j,k; table[m][n] = (sign, index) of e_m e_n
        const TABLE: [[(f64, usize); 4]; 4] = [
            [(1.0, 0), (1.0, 1), (1.0, 2), (1.0, 3)],
            [(1.0, 1), (-1.0, 0), (1.0, 3), (-1.0, 2)],
            [(1.0, 2), (-1.0, 3), (-1.0, 0), (1.0, 1)],
            [(1.0, 3), (1.0, 2), (-1.0, 1), (-1.0, 0)],
        ];
        let (ca, cb) = (a.to_array(), b.to_array());
        let mut out = [0.0; 4];
        for m in 0..4 {
            for n in 0..4 {
                let (s, idx) = TABLE[m][n];
                out[idx] += s * ca[m] * cb[n];
            }
        }
        Quaternion::from_array(out)
    }

    #[test]
    fn unit_relations() {
        assert_eq!(I * J, K);
        assert_eq!(J * K, I);
        assert_eq!(K * I, J);
        assert_eq!(J * I, -K);
        for u in [I, J, K] {
            assert_eq!(u * u, Quaternion::real(-1.0));
        }
        assert_eq!(I * J * K, Quaternion::real(-1.0));
    }

    #[test]
    fn product_matches_table_oracle() {
        let a = Quaternion::new(1.0, 1.0, 0.0, 0.0);
        let b = Quaternion::new(1.0, 0.0, 1.0, 0.0);
        assert_eq!(table_product(a, b), Quaternion::new(1.0, 1.0, 1.0, 1.0));
        assert_eq!(a * b, Quaternion::new(1.0, 1.0, 1.0, 1.0));
        let p = Quaternion::new(0.3, -1.2, 2.5, 0.7);
        let q = Quaternion::new(-2.0, 0.4, 0.1, -3.3);
        assert!((p * q).dist(table_product(p, q)) < 1e-14);
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(I.inverse().unwrap(), -I);
        assert_eq!(Quaternion::real(2.0).inverse().unwrap(), Quaternion::real(0.5));
        let q = Quaternion::new(1.0, 1.0, 1.0, 1.0);
        let expected = Quaternion::new(1.0, -1.0, -1.0, -1.0).scale(0.25);
        assert!(q.inverse().unwrap().dist(expected) < 1e-15);
    }

    #[test]
    fn inverse_of_zero_is_an_error() {
        assert!(matches!(Quaternion::ZERO.inverse(), Err(Error::ZeroDivisor { .. })));
        assert!(Quaternion::real(1e-151).inverse().is_err());
        assert!(Quaternion::real(1e-149).inverse().is_ok());
    }

    #[test]
    fn conj_and_norm() {
        assert_eq!(Quaternion::new(1.0, 1.0, 0.0, 0.0).conj(), Quaternion::new(1.0, -1.0, 0.0, 0.0));
        assert_eq!(Quaternion::new(3.0, 4.0, 0.0, 0.0).norm(), 5.0);
        let q = Quaternion::new(0.5, -1.0, 2.0, 3.0);
        let n = q * q.conj();
        assert!(n.dist(Quaternion::real(q.norm_sqr())) < 1e-14);
    }

    #[test]
    fn powi_matches_repeated_product() {
        let q = Quaternion::new(0.3, -0.7, 0.2, 1.1);
        let mut acc = Quaternion::ONE;
        for n in 0..10 {
            assert!(q.powi(n).dist(acc) < 1e-13, "n = {n}");
            acc *= q;
        }
    }

    #[test]
    fn display_format() {
        assert_eq!(Quaternion::new(1.0, -2.0, 0.0, 0.5).to_string(), "1-2i+0j+0.5k");
        assert_eq!(Quaternion::new(-0.0, 1e-20, -3.0, 4.0).to_string(), "-0+0.00000000000000000001i-3j+4k");
    }

    #[test]
    fn parse_accepts_whitespace_and_exponents() {
        let q: Quaternion = " 1 - 2i + 3.5 j - 1e-3k ".parse().unwrap();
        assert_eq!(q, Quaternion::new(1.0, -2.0, 3.5, -1e-3));
        let q: Quaternion = "-1E+2+2.5e-1i-0j+0k".parse().unwrap();
        assert_eq!(q, Quaternion::new(-100.0, 0.25, -0.0, 0.0));
        assert!("1+2i+3j".parse::<Quaternion>().is_err());
        assert!("1+2j+3i+4k".parse::<Quaternion>().is_err());
        assert!("1+2i+3j+4k+".parse::<Quaternion>().is_err());
        assert!("".parse::<Quaternion>().is_err());
    }

    #[test]
    fn approx_eq_uses_both_tolerances() {
        let a = Quaternion::real(1e6);
        let b = Quaternion::real(1e6 + 1e-4);
        assert!(a.approx_eq(b, Tolerance::default()));
        assert!(!Quaternion::real(1e-6).approx_eq(Quaternion::ZERO, Tolerance::default()));
    }
}
