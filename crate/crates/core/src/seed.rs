//! Valued quivers, Euler forms, exchange matrices and the linear
//! dictionary between dimension vectors and g-vectors.
//!
//! Vertices are 0-based internally and 1-based in every printed or
//! serialized form.

use std::path::Path;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, IntMatrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeedError {
    #[error("euler matrix must be {0}x{0}")]
    Shape(usize),
    #[error("symmetrizer must have {expected} positive entries, got {got:?}")]
    Symmetrizer { expected: usize, got: Vec<i64> },
    #[error("euler diagonal entry e_{i}{i} = {value} differs from f_{i} = {f}", i = .index + 1)]
    Diagonal { index: usize, value: i64, f: i64 },
    #[error("off-diagonal euler entry e_{}{} = {} is positive", .0 + 1, .1 + 1, .2)]
    PositiveOffDiagonal(usize, usize, i64),
    #[error("quiver is not acyclic")]
    Cyclic,
    #[error("D^-1(E^t - E) is not integral")]
    NonIntegral,
    #[error("D*B is not skew-symmetric")]
    NotSkewSymmetrizable,
    #[error("vector length {got} does not match rank {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("D g = E^t d has no integral solution for d = {0:?}")]
    NotAModuleClass(Vec<i64>),
    #[error("unknown quiver preset or unreadable file `{0}`")]
    UnknownQuiver(String),
    #[error("invalid quiver json: {0}")]
    Json(String),
}

/// An acyclic valued quiver described by its Euler matrix and symmetrizer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "QuiverJson", into = "QuiverJson")]
pub struct ValuedQuiver {
    name: Option<String>,
    euler: IntMatrix,
    symmetrizer: Vec<i64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct QuiverJson {
    #[serde(default)]
    name: Option<String>,
    n: usize,
    euler: Vec<Vec<i64>>,
    symmetrizer: Vec<i64>,
}

impl TryFrom<QuiverJson> for ValuedQuiver {
    type Error = SeedError;
    fn try_from(j: QuiverJson) -> Result<Self, SeedError> {
        if j.euler.len() != j.n {
            return Err(SeedError::Shape(j.n));
        }
        ValuedQuiver::new(j.name, j.euler, j.symmetrizer)
    }
}

impl From<ValuedQuiver> for QuiverJson {
    fn from(q: ValuedQuiver) -> Self {
        QuiverJson { name: q.name.clone(), n: q.n(), euler: q.euler.to_rows(), symmetrizer: q.symmetrizer }
    }
}

impl ValuedQuiver {
    pub fn new(name: Option<String>, euler: Vec<Vec<i64>>, symmetrizer: Vec<i64>) -> Result<Self, SeedError> {
        let n = euler.len();
        let euler = IntMatrix::from_rows(&euler).ok_or(SeedError::Shape(n))?;
        if n == 0 || euler.cols() != n {
            return Err(SeedError::Shape(n));
        }
        if symmetrizer.len() != n || symmetrizer.iter().any(|&f| f <= 0) {
            return Err(SeedError::Symmetrizer { expected: n, got: symmetrizer });
        }
        for i in 0..n {
            if euler[(i, i)] != symmetrizer[i] {
                return Err(SeedError::Diagonal { index: i, value: euler[(i, i)], f: symmetrizer[i] });
            }
            for j in 0..n {
                if i != j && euler[(i, j)] > 0 {
                    return Err(SeedError::PositiveOffDiagonal(i, j, euler[(i, j)]));
                }
            }
        }
        let q = Self { name, euler, symmetrizer };
        q.topological_order().ok_or(SeedError::Cyclic)?;
        let b = q.exchange_matrix()?;
        if !IntMatrix::diagonal(&q.symmetrizer).mul(&b).is_skew_symmetric() {
            return Err(SeedError::NotSkewSymmetrizable);
        }
        Ok(q)
    }

    /// Simply-laced quiver from 0-based arrows `(tail, head)`.
    pub fn from_arrows(name: &str, n: usize, arrows: &[(usize, usize)]) -> Result<Self, SeedError> {
        let mut e = vec![vec![0i64; n]; n];
        for (i, row) in e.iter_mut().enumerate() {
            row[i] = 1;
        }
        for &(t, h) in arrows {
            e[t][h] -= 1;
        }
        Self::new(Some(name.to_string()), e, vec![1; n])
    }

    pub fn n(&self) -> usize {
        self.euler.rows()
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn euler(&self) -> &IntMatrix {
        &self.euler
    }

    pub fn symmetrizer(&self) -> &[i64] {
        &self.symmetrizer
    }

    pub fn d_matrix(&self) -> IntMatrix {
        IntMatrix::diagonal(&self.symmetrizer)
    }

    pub fn is_simply_laced(&self) -> bool {
        self.symmetrizer.iter().all(|&f| f == 1)
    }

    /// Arrows `(tail, head, multiplicity)` recovered from `-e_ij`.
    pub fn arrows(&self) -> Vec<(usize, usize, i64)> {
        let n = self.n();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && self.euler[(i, j)] < 0 {
                    out.push((i, j, -self.euler[(i, j)]));
                }
            }
        }
        out
    }

    /// Vertex order in which every arrow points from a later to an earlier
    /// vertex (E becomes lower triangular); `None` if there is a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.n();
        let mut placed = vec![false; n];
        let mut order = Vec::with_capacity(n);
        while order.len() < n {
            // a sink among the remaining vertices: no arrow into an unplaced vertex
            let next =
                (0..n).find(|&i| !placed[i] && (0..n).all(|j| j == i || placed[j] || self.euler[(i, j)] == 0))?;
            placed[next] = true;
            order.push(next);
        }
        Some(order)
    }

    /// `B = D^{-1}(E^t - E)`.
    pub fn exchange_matrix(&self) -> Result<IntMatrix, SeedError> {
        let n = self.n();
        let diff = self.euler.transpose().sub(&self.euler);
        let mut b = IntMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let f = self.symmetrizer[i];
                if diff[(i, j)] % f != 0 {
                    return Err(SeedError::NonIntegral);
                }
                b[(i, j)] = diff[(i, j)] / f;
            }
        }
        Ok(b)
    }

    fn check_len(&self, v: &[i64]) -> Result<(), SeedError> {
        if v.len() != self.n() {
            return Err(SeedError::LengthMismatch { expected: self.n(), got: v.len() });
        }
        Ok(())
    }

    /// Euler-Ringel pairing `a^t E b`.
    pub fn euler_pairing(&self, a: &[i64], b: &[i64]) -> Result<i64, SeedError> {
        self.check_len(a)?;
        self.check_len(b)?;
        Ok(linalg::dot(a, &self.euler.mul_vec(b)))
    }

    /// g-vector of a module with dimension vector `d`, from `D g = E^t d`.
    pub fn g_of_dim(&self, d: &[i64]) -> Result<Vec<i64>, SeedError> {
        self.check_len(d)?;
        let etd = self.euler.transpose().mul_vec(d);
        etd.iter()
            .zip(&self.symmetrizer)
            .map(|(&x, &f)| if x % f == 0 { Ok(x / f) } else { Err(SeedError::NotAModuleClass(d.to_vec())) })
            .collect()
    }

    /// `(E^t)^{-1} D g` over the rationals.
    pub fn dim_of_g(&self, g: &[i64]) -> Result<Vec<BigRational>, SeedError> {
        self.check_len(g)?;
        let inv = self.euler.transpose().rational_inverse().expect("Euler matrix is unitriangular up to order");
        let dg: Vec<BigRational> = g.iter().zip(&self.symmetrizer).map(|(&x, &f)| linalg::rat(x * f)).collect();
        Ok(linalg::mat_vec_rat(&inv, &dg))
    }

    /// Integral nonnegative dimension vector for `g`, if there is one.
    pub fn module_dim_of_g(&self, g: &[i64]) -> Option<Vec<i64>> {
        let d = linalg::rational_vec_to_int(&self.dim_of_g(g).ok()?)?;
        linalg::is_nonneg_nonzero(&d).then_some(d)
    }

    /// Dimension vector of the indecomposable projective at `i` (simply-laced
    /// path counting; for valued quivers this is the projective's class in
    /// units of the simple tops, computed from `g(P_i) = e_i`).
    pub fn projective_dim(&self, i: usize) -> Vec<i64> {
        let mut e = vec![0; self.n()];
        e[i] = 1;
        self.module_dim_of_g(&e).expect("projectives have integral dimension vectors")
    }

    /// Loads a preset by name or a quiver JSON file.
    pub fn resolve(name: &str) -> Result<Self, SeedError> {
        if let Some(q) = preset(name) {
            return q;
        }
        let path = Path::new(name);
        if path.is_file() {
            let text = std::fs::read_to_string(path).map_err(|e| SeedError::Json(e.to_string()))?;
            return serde_json::from_str(&text).map_err(|e| SeedError::Json(e.to_string()));
        }
        Err(SeedError::UnknownQuiver(name.to_string()))
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| "inline".to_string())
    }
}

/// Built-in presets: `a2`, `a3`, `a2tilde`, `d4`, `b2`, `g2`, linear `aN`
/// (all arrows `i <- i+1`) and `a_n:<orientation>` where the k-th character
/// is `<` for `k <- k+1` and `>` for `k -> k+1`.
pub fn preset(name: &str) -> Option<Result<ValuedQuiver, SeedError>> {
    let lower = name.to_ascii_lowercase();
    let q = match lower.as_str() {
        "a2" => ValuedQuiver::from_arrows("a2", 2, &[(1, 0)]),
        "a3" => ValuedQuiver::from_arrows("a3", 3, &[(1, 0), (1, 2)]),
        "a2tilde" => ValuedQuiver::from_arrows("a2tilde", 3, &[(1, 0), (2, 1), (2, 0)]),
        "d4" => ValuedQuiver::from_arrows("d4", 4, &[(1, 0), (1, 2), (1, 3)]),
        "b2" => ValuedQuiver::new(Some("b2".into()), vec![vec![1, 0], vec![-2, 2]], vec![1, 2]),
        "g2" => ValuedQuiver::new(Some("g2".into()), vec![vec![1, 0], vec![-3, 3]], vec![1, 3]),
        _ => {
            if let Some(orient) = lower.strip_prefix("a_n:") {
                return Some(linear_a(name, orient));
            }
            let rest = lower.strip_prefix('a')?;
            let (num, orient) = match rest.split_once(':') {
                Some((num, orient)) => (num, Some(orient)),
                None => (rest, None),
            };
            let n: usize = num.trim_start_matches('_').parse().ok()?;
            let orient = orient.map(str::to_string).unwrap_or_else(|| "<".repeat(n.saturating_sub(1)));
            if orient.len() + 1 != n {
                return Some(Err(SeedError::UnknownQuiver(name.to_string())));
            }
            return Some(linear_a(name, &orient));
        }
    };
    Some(q)
}

fn linear_a(name: &str, orient: &str) -> Result<ValuedQuiver, SeedError> {
    let n = orient.len() + 1;
    let arrows: Option<Vec<(usize, usize)>> = orient
        .chars()
        .enumerate()
        .map(|(k, c)| match c {
            '<' => Some((k + 1, k)),
            '>' => Some((k, k + 1)),
            _ => None,
        })
        .collect();
    let arrows = arrows.ok_or_else(|| SeedError::UnknownQuiver(name.to_string()))?;
    ValuedQuiver::from_arrows(name, n, &arrows)
}
