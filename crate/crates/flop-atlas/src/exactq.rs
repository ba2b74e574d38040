//! Exact rational linear algebra. Everything downstream (root systems, cones,
//! chamber walks) is decided by sign tests, so there is no floating point
//! anywhere in this crate.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ExactqError {
    #[error("singular matrix")]
    SingularMatrix,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("cannot parse rational from {0:?}")]
    Parse(String),
}

/// Arbitrary-precision rational, always in lowest terms with positive
/// denominator (num-rational maintains both invariants).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Q(BigRational);

impl Q {
    pub fn from_int(n: i64) -> Q {
        Q(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn new(num: i64, den: i64) -> Q {
        assert!(den != 0, "zero denominator");
        Q(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_bigint(n: BigInt) -> Q {
        Q(BigRational::from_integer(n))
    }

    pub fn zero() -> Q {
        Q(BigRational::zero())
    }

    pub fn one() -> Q {
        Q(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Q {
        Q(self.0.abs())
    }

    pub fn recip(&self) -> Q {
        assert!(!self.is_zero(), "division by zero");
        Q(self.0.recip())
    }

    pub fn signum(&self) -> i32 {
        if self.0.is_positive() {
            1
        } else if self.0.is_negative() {
            -1
        } else {
            0
        }
    }

    /// Exact integer value; panics if not an integer.
    pub fn to_bigint(&self) -> BigInt {
        assert!(self.is_integer(), "not an integer: {}", self);
        self.0.numer().clone()
    }
}

impl fmt::Display for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Q {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl FromStr for Q {
    type Err = ExactqError;

    fn from_str(s: &str) -> Result<Q, ExactqError> {
        let bad = || ExactqError::Parse(s.to_string());
        match s.split_once('/') {
            Some((n, d)) => {
                let n: BigInt = n.trim().parse().map_err(|_| bad())?;
                let d: BigInt = d.trim().parse().map_err(|_| bad())?;
                if d.is_zero() {
                    return Err(bad());
                }
                Ok(Q(BigRational::new(n, d)))
            }
            None => {
                let n: BigInt = s.trim().parse().map_err(|_| bad())?;
                Ok(Q(BigRational::from_integer(n)))
            }
        }
    }
}

// JSON form is the string "p/q" ("p" when integral): exactness survives any
// serializer, and output is byte-stable.
impl Serialize for Q {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(|_| D::Error::custom(format!("bad rational {:?}", s)))
    }
}

macro_rules! impl_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Q {
            type Output = Q;
            fn $method(self, rhs: Q) -> Q {
                Q((self.0).$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Q> for &'a Q {
            type Output = Q;
            fn $method(self, rhs: &'a Q) -> Q {
                Q((&self.0).$method(&rhs.0))
            }
        }
    };
}

impl_binop!(Add, add);
impl_binop!(Sub, sub);
impl_binop!(Mul, mul);

impl Div for Q {
    type Output = Q;
    fn div(self, rhs: Q) -> Q {
        assert!(!rhs.is_zero(), "division by zero");
        Q(self.0 / rhs.0)
    }
}

impl<'a> Div<&'a Q> for &'a Q {
    type Output = Q;
    fn div(self, rhs: &'a Q) -> Q {
        assert!(!rhs.is_zero(), "division by zero");
        Q(&self.0 / &rhs.0)
    }
}

impl Neg for Q {
    type Output = Q;
    fn neg(self) -> Q {
        Q(-self.0)
    }
}

impl<'a> Neg for &'a Q {
    type Output = Q;
    fn neg(self) -> Q {
        Q(-&self.0)
    }
}

impl AddAssign for Q {
    fn add_assign(&mut self, rhs: Q) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Q {
    fn sub_assign(&mut self, rhs: Q) {
        self.0 -= rhs.0;
    }
}

/// Dense rational vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QVector(pub Vec<Q>);

impl QVector {
    pub fn zeros(n: usize) -> QVector {
        QVector(vec![Q::zero(); n])
    }

    pub fn from_ints(v: &[i64]) -> QVector {
        QVector(v.iter().map(|&x| Q::from_int(x)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Q::is_zero)
    }

    pub fn dot(&self, other: &QVector) -> Q {
        assert_eq!(self.len(), other.len(), "dot: length mismatch");
        self.0
            .iter()
            .zip(&other.0)
            .fold(Q::zero(), |acc, (a, b)| acc + a * b)
    }

    pub fn scale(&self, c: &Q) -> QVector {
        QVector(self.0.iter().map(|x| x * c).collect())
    }

    pub fn add(&self, other: &QVector) -> QVector {
        assert_eq!(self.len(), other.len(), "add: length mismatch");
        QVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &QVector) -> QVector {
        assert_eq!(self.len(), other.len(), "sub: length mismatch");
        QVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> QVector {
        QVector(self.0.iter().map(|x| -x).collect())
    }

    /// Clears denominators and divides by the content, keeping orientation.
    /// The zero vector is returned unchanged.
    pub fn primitive(&self) -> Vec<BigInt> {
        use num_integer::Integer;
        let mut lcm = BigInt::one();
        for x in &self.0 {
            lcm = lcm.lcm(x.denom());
        }
        let ints: Vec<BigInt> = self.0.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
        let mut g = BigInt::zero();
        for x in &ints {
            g = g.gcd(x);
        }
        if g.is_zero() {
            return ints;
        }
        ints.into_iter().map(|x| x / &g).collect()
    }
}

pub fn qvec_from_bigints(v: &[BigInt]) -> QVector {
    QVector(v.iter().map(|x| Q::from_bigint(x.clone())).collect())
}

/// Dense rational matrix, row-major.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QMatrix {
    pub rows: Vec<QVector>,
}

impl QMatrix {
    pub fn from_rows(rows: Vec<QVector>) -> QMatrix {
        if let Some(first) = rows.first() {
            let w = first.len();
            assert!(rows.iter().all(|r| r.len() == w), "ragged matrix");
        }
        QMatrix { rows }
    }

    pub fn from_ints(rows: &[&[i64]]) -> QMatrix {
        QMatrix::from_rows(rows.iter().map(|r| QVector::from_ints(r)).collect())
    }

    pub fn identity(n: usize) -> QMatrix {
        let mut rows = vec![QVector::zeros(n); n];
        for (i, r) in rows.iter_mut().enumerate() {
            r.0[i] = Q::one();
        }
        QMatrix { rows }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.rows.first().map_or(0, QVector::len)
    }

    pub fn at(&self, i: usize, j: usize) -> &Q {
        &self.rows[i].0[j]
    }

    pub fn transpose(&self) -> QMatrix {
        let (m, n) = (self.nrows(), self.ncols());
        let mut rows = vec![QVector::zeros(m); n];
        for i in 0..m {
            for j in 0..n {
                rows[j].0[i] = self.rows[i].0[j].clone();
            }
        }
        QMatrix { rows }
    }

    pub fn mul_vec(&self, v: &QVector) -> QVector {
        assert_eq!(self.ncols(), v.len(), "mul_vec: dimension mismatch");
        QVector(self.rows.iter().map(|r| r.dot(v)).collect())
    }

    pub fn mul_mat(&self, other: &QMatrix) -> QMatrix {
        assert_eq!(self.ncols(), other.nrows(), "mul_mat: dimension mismatch");
        let ot = other.transpose();
        QMatrix::from_rows(
            self.rows
                .iter()
                .map(|r| QVector(ot.rows.iter().map(|c| r.dot(c)).collect()))
                .collect(),
        )
    }

    /// Row echelon form via fraction-aware Gaussian elimination.
    /// Returns (echelon rows, pivot column indices, sign of row permutation).
    fn echelon(&self) -> (Vec<QVector>, Vec<usize>, i32) {
        let mut m: Vec<QVector> = self.rows.clone();
        let (nr, nc) = (m.len(), self.ncols());
        let mut pivots = Vec::new();
        let mut sign = 1;
        let mut r = 0;
        for c in 0..nc {
            let Some(p) = (r..nr).find(|&i| !m[i].0[c].is_zero()) else {
                continue;
            };
            if p != r {
                m.swap(p, r);
                sign = -sign;
            }
            let inv = m[r].0[c].recip();
            for i in (r + 1)..nr {
                if m[i].0[c].is_zero() {
                    continue;
                }
                let f = &m[i].0[c] * &inv;
                let row_r = m[r].clone();
                for j in c..nc {
                    let d = &f * &row_r.0[j];
                    m[i].0[j] -= d;
                }
            }
            pivots.push(c);
            r += 1;
            if r == nr {
                break;
            }
        }
        (m, pivots, sign)
    }

    pub fn rank(&self) -> usize {
        self.echelon().1.len()
    }

    pub fn det(&self) -> Q {
        assert_eq!(self.nrows(), self.ncols(), "det: not square");
        let n = self.nrows();
        let (ech, pivots, sign) = self.echelon();
        if pivots.len() < n {
            return Q::zero();
        }
        let mut d = if sign < 0 { -Q::one() } else { Q::one() };
        for i in 0..n {
            d = d * ech[i].0[i].clone();
        }
        d
    }

    /// Solves A x = b for square A.
    pub fn solve_linear(&self, b: &QVector) -> Result<QVector, ExactqError> {
        let n = self.nrows();
        if self.ncols() != n {
            return Err(ExactqError::DimensionMismatch("solve_linear: not square".into()));
        }
        if b.len() != n {
            return Err(ExactqError::DimensionMismatch("solve_linear: rhs length".into()));
        }
        // Augment and eliminate.
        let mut aug = QMatrix::from_rows(
            self.rows
                .iter()
                .zip(&b.0)
                .map(|(r, bi)| {
                    let mut v = r.0.clone();
                    v.push(bi.clone());
                    QVector(v)
                })
                .collect(),
        );
        let (ech, pivots, _) = aug.echelon();
        if pivots.len() < n || pivots.iter().any(|&c| c >= n) {
            return Err(ExactqError::SingularMatrix);
        }
        aug.rows = ech;
        // Back substitution.
        let mut x = vec![Q::zero(); n];
        for i in (0..n).rev() {
            let mut s = aug.rows[i].0[n].clone();
            for j in (i + 1)..n {
                s -= &aug.rows[i].0[j] * &x[j];
            }
            x[i] = s / aug.rows[i].0[i].clone();
        }
        Ok(QVector(x))
    }

    pub fn inverse(&self) -> Result<QMatrix, ExactqError> {
        let n = self.nrows();
        if self.ncols() != n {
            return Err(ExactqError::DimensionMismatch("inverse: not square".into()));
        }
        let id = QMatrix::identity(n);
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            cols.push(self.solve_linear(&id.rows[j])?);
        }
        Ok(QMatrix::from_rows(cols).transpose())
    }

    /// Positive definiteness via leading principal minors (Sylvester).
    /// The matrix must be symmetric; symmetrize first if needed.
    pub fn is_positive_definite(&self) -> bool {
        let n = self.nrows();
        if self.ncols() != n {
            return false;
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if self.at(i, j) != self.at(j, i) {
                    return false;
                }
            }
        }
        for k in 1..=n {
            let sub = QMatrix::from_rows(
                (0..k)
                    .map(|i| QVector(self.rows[i].0[..k].to_vec()))
                    .collect(),
            );
            if !sub.det().is_positive() {
                return false;
            }
        }
        true
    }

    /// Basis of the right null space { x : A x = 0 }.
    pub fn null_space(&self) -> Vec<QVector> {
        let nc = self.ncols();
        let (ech, pivots, _) = self.echelon();
        let free: Vec<usize> = (0..nc).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Vec::new();
        for &f in &free {
            let mut x = vec![Q::zero(); nc];
            x[f] = Q::one();
            // Solve for pivot variables bottom-up.
            for (r, &pc) in pivots.iter().enumerate().rev() {
                let mut s = Q::zero();
                for j in (pc + 1)..nc {
                    s += &ech[r].0[j] * &x[j];
                }
                x[pc] = -(s / ech[r].0[pc].clone());
            }
            basis.push(QVector(x));
        }
        basis
    }
}
