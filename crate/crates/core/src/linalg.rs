//! Exact linear algebra: small integer matrices, rational elimination and
//! prime-field helpers used by the representation code.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Dense row-major integer matrix.
///
/// Entries in this crate stay tiny (exchange matrices, c-vectors of
/// finite-type roots), so `i64` with checked arithmetic is used; every
/// product and sum panics on overflow instead of wrapping.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1;
        }
        m
    }

    pub fn diagonal(entries: &[i64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    /// Builds a matrix from rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<i64>]) -> Option<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return None;
        }
        Some(Self { rows: r, cols: c, data: rows.concat() })
    }

    /// Builds a square matrix whose j-th column is `cols[j]`.
    pub fn from_columns(cols: &[Vec<i64>]) -> Option<Self> {
        let c = cols.len();
        let r = cols.first().map_or(0, Vec::len);
        if cols.iter().any(|col| col.len() != r) {
            return None;
        }
        let mut m = Self::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Some(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> Vec<i64> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn column(&self, j: usize) -> Vec<i64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let p = a.checked_mul(other[(k, j)]).expect("integer overflow");
                    out[(i, j)] = out[(i, j)].checked_add(p).expect("integer overflow");
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[i64]) -> Vec<i64> {
        assert_eq!(self.cols, v.len(), "matrix/vector shape mismatch");
        (0..self.rows)
            .map(|i| {
                (0..self.cols).fold(0i64, |acc, j| {
                    acc.checked_add(self[(i, j)].checked_mul(v[j]).expect("integer overflow"))
                        .expect("integer overflow")
                })
            })
            .collect()
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data =
            self.data.iter().zip(&other.data).map(|(a, b)| a.checked_sub(*b).expect("integer overflow")).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn neg(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| -a).collect() }
    }

    /// Permutes rows and columns simultaneously: `out[i][j] = self[p[i]][p[j]]`.
    pub fn conjugate_by(&self, perm: &[usize]) -> Self {
        let n = perm.len();
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = self[(perm[i], perm[j])];
            }
        }
        out
    }

    /// Reorders columns: `out[.][j] = self[.][p[j]]`.
    pub fn permute_columns(&self, perm: &[usize]) -> Self {
        let mut out = Self::zeros(self.rows, perm.len());
        for i in 0..self.rows {
            for (j, &pj) in perm.iter().enumerate() {
                out[(i, j)] = self[(i, pj)];
            }
        }
        out
    }

    pub fn is_skew_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..self.cols).all(|j| self[(i, j)] == -self[(j, i)]))
    }

    pub fn to_rational(&self) -> RatMatrix {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| BigRational::from_integer(self[(i, j)].into())).collect())
            .collect()
    }

    /// Exact determinant by rational elimination.
    pub fn det(&self) -> BigInt {
        assert!(self.is_square(), "determinant of non-square matrix");
        let mut a = self.to_rational();
        let n = self.rows;
        let mut det = BigRational::one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !a[r][col].is_zero()) else {
                return BigInt::zero();
            };
            if p != col {
                a.swap(p, col);
                det = -det;
            }
            let pivot = a[col][col].clone();
            det *= &pivot;
            for r in col + 1..n {
                if a[r][col].is_zero() {
                    continue;
                }
                let f = &a[r][col] / &pivot;
                for c in col..n {
                    let t = &f * &a[col][c];
                    a[r][c] -= t;
                }
            }
        }
        det.to_integer()
    }

    /// Exact rational inverse, `None` when singular.
    pub fn rational_inverse(&self) -> Option<RatMatrix> {
        assert!(self.is_square());
        invert(&self.to_rational())
    }

    /// Integer inverse, `None` when the matrix is singular or the inverse is
    /// not integral.
    pub fn integer_inverse(&self) -> Option<IntMatrix> {
        let inv = self.rational_inverse()?;
        rational_to_int(&inv)
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = i64;
    fn index(&self, (i, j): (usize, usize)) -> &i64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut i64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.to_rows())
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|v| format!("{v:>3}")).collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}

pub type RatMatrix = Vec<Vec<BigRational>>;

pub fn rat(v: i64) -> BigRational {
    BigRational::from_integer(v.into())
}

pub fn rational_to_int(m: &RatMatrix) -> Option<IntMatrix> {
    let rows: Option<Vec<Vec<i64>>> = m
        .iter()
        .map(|row| row.iter().map(|x| if x.is_integer() { x.to_integer().to_i64() } else { None }).collect())
        .collect();
    IntMatrix::from_rows(&rows?)
}

pub fn rational_vec_to_int(v: &[BigRational]) -> Option<Vec<i64>> {
    v.iter().map(|x| if x.is_integer() { x.to_integer().to_i64() } else { None }).collect()
}

/// Gauss-Jordan inverse of a square rational matrix.
pub fn invert(m: &RatMatrix) -> Option<RatMatrix> {
    let n = m.len();
    let mut a: RatMatrix = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(p, col);
        let pivot = a[col][col].clone();
        for x in a[col].iter_mut() {
            *x /= &pivot;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in 0..2 * n {
                let t = &f * &a[col][c];
                a[r][c] -= t;
            }
        }
    }
    Some(a.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Reduced row echelon form in place; returns pivot columns.
pub fn rref(a: &mut RatMatrix) -> Vec<usize> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(p, r);
        let pivot = a[r][c].clone();
        for x in a[r].iter_mut() {
            *x /= &pivot;
        }
        for i in 0..rows {
            if i == r || a[i][c].is_zero() {
                continue;
            }
            let f = a[i][c].clone();
            for j in c..cols {
                let t = &f * &a[r][j];
                a[i][j] -= t;
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &RatMatrix) -> usize {
    let mut a = m.clone();
    rref(&mut a).len()
}

/// Basis of `{x : m x = 0}` for an `rows x cols` matrix, scaled to be
/// integral and primitive.
pub fn nullspace(m: &RatMatrix, cols: usize) -> Vec<Vec<BigRational>> {
    let mut a = m.clone();
    let pivots = rref(&mut a);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); cols];
            v[f] = BigRational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[row][f].clone();
            }
            primitive(v)
        })
        .collect()
}

/// Clears denominators and common factors, so small bases stay integral.
fn primitive(v: Vec<BigRational>) -> Vec<BigRational> {
    use num_integer::Integer;
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * BigRational::from_integer(lcm.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return v;
    }
    let sign = ints.iter().find(|x| !x.is_zero()).map_or(BigInt::one(), |x| x.signum());
    ints.into_iter().map(|x| BigRational::from_integer(x / &g * &sign)).collect()
}

pub fn transpose_rat(m: &RatMatrix, rows: usize, cols: usize) -> RatMatrix {
    (0..cols).map(|j| (0..rows).map(|i| m[i][j].clone()).collect()).collect()
}

pub fn mat_vec_rat(m: &RatMatrix, v: &[BigRational]) -> Vec<BigRational> {
    m.iter().map(|row| row.iter().zip(v).fold(BigRational::zero(), |acc, (a, b)| acc + a * b)).collect()
}

/// Rank over the prime field F_p of an integer matrix.
pub fn rank_mod_p(m: &[Vec<i64>], p: i64) -> usize {
    let mut a: Vec<Vec<i64>> = m.iter().map(|r| r.iter().map(|x| x.rem_euclid(p)).collect()).collect();
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(piv) = (r..rows).find(|&i| a[i][c] != 0) else {
            continue;
        };
        a.swap(piv, r);
        let inv = inv_mod(a[r][c], p);
        for x in a[r].iter_mut() {
            *x = *x * inv % p;
        }
        for i in 0..rows {
            if i != r && a[i][c] != 0 {
                let f = a[i][c];
                for j in c..cols {
                    a[i][j] = (a[i][j] - f * a[r][j]).rem_euclid(p);
                }
            }
        }
        r += 1;
    }
    r
}

pub fn inv_mod(a: i64, p: i64) -> i64 {
    // p is prime and small; Fermat.
    let mut result = 1i64;
    let mut base = a.rem_euclid(p);
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    result
}

/// Reduces a rational to F_p, `None` if the denominator vanishes mod p.
pub fn rational_mod_p(x: &BigRational, p: i64) -> Option<i64> {
    let pb = BigInt::from(p);
    let n = (x.numer() % &pb + &pb) % &pb;
    let d = (x.denom() % &pb + &pb) % &pb;
    let d = d.to_i64()?;
    if d == 0 {
        return None;
    }
    Some(n.to_i64()? * inv_mod(d, p) % p)
}

pub fn is_nonneg_nonzero(v: &[i64]) -> bool {
    v.iter().all(|&x| x >= 0) && v.iter().any(|&x| x != 0)
}

pub fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_and_inverse() {
        let c = IntMatrix::from_rows(&[vec![0, -1, 0], vec![1, -1, 0], vec![0, 0, 1]]).unwrap();
        assert_eq!(c.det(), BigInt::from(1));
        let inv = c.integer_inverse().unwrap();
        assert_eq!(c.mul(&inv), IntMatrix::identity(3));
        let sing = IntMatrix::from_rows(&[vec![1, 2], vec![2, 4]]).unwrap();
        assert_eq!(sing.det(), BigInt::zero());
        assert!(sing.integer_inverse().is_none());
        let half = IntMatrix::from_rows(&[vec![2, 0], vec![0, 1]]).unwrap();
        assert!(half.rational_inverse().is_some());
        assert!(half.integer_inverse().is_none());
    }

    #[test]
    fn nullspace_is_primitive() {
        let m = IntMatrix::from_rows(&[vec![1, 1, 0]]).unwrap().to_rational();
        let ns = nullspace(&m, 3);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(mat_vec_rat(&m, v).iter().all(Zero::is_zero));
            assert!(v.iter().all(|x| x.is_integer()));
        }
    }

    #[test]
    fn prime_field_rank() {
        let m = vec![vec![1, 1], vec![1, -1]];
        assert_eq!(rank_mod_p(&m, 2), 1);
        assert_eq!(rank_mod_p(&m, 3), 2);
        assert_eq!(rational_mod_p(&BigRational::new(1.into(), 2.into()), 3), Some(2));
        assert_eq!(rational_mod_p(&BigRational::new(1.into(), 2.into()), 2), None);
    }
}
