//! Extended exchange matrices with a slope row, and the positive and
//! negative mutations of m-configurations.
//!
//! A state stores the exchange matrix `B`, the unsigned c-matrix `|C|`
//! (column `j` is `|c_j|`) and the slope row `s`. The graded c-vector of
//! column `j` is `t^{s_j} |c_j|`; its value at `t = -1` is the signed
//! column `c_j = (-1)^{s_j} |c_j|`. The exchange matrix is always
//! `B = D^{-1} C^t D B0 C`.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Signed;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::IntMatrix;
use crate::seed::{SeedError, ValuedQuiver};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MutationError {
    #[error("vertex {k} out of range for rank {n}", k = .k + 1)]
    VertexOutOfRange { k: usize, n: usize },
    #[error("slope of column {} is already m", .0 + 1)]
    SlopeAtMax(usize),
    #[error("slope of column {} is already 0", .0 + 1)]
    SlopeAtMin(usize),
    #[error("|c_{j}| - |c_{k}| b_{k}{j} = {vector:?} has mixed signs", j = .j + 1, k = .k + 1)]
    SignIncoherence { k: usize, j: usize, vector: Vec<i64> },
    #[error("no preimage under positive mutation at column {}", .0 + 1)]
    NotInvertibleHere(usize),
    #[error("m must be at least 1")]
    ZeroM,
    #[error("invalid state: {}", .0.join("; "))]
    InvalidState(Vec<String>),
    #[error(transparent)]
    Seed(#[from] SeedError),
}

/// The fixed data shared by every state of one exchange graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MutationContext {
    quiver: ValuedQuiver,
    b0: IntMatrix,
    m: u32,
}

impl MutationContext {
    pub fn new(quiver: ValuedQuiver, m: u32) -> Result<Arc<Self>, MutationError> {
        if m == 0 {
            return Err(MutationError::ZeroM);
        }
        let b0 = quiver.exchange_matrix()?;
        Ok(Arc::new(Self { quiver, b0, m }))
    }

    pub fn quiver(&self) -> &ValuedQuiver {
        &self.quiver
    }

    pub fn b0(&self) -> &IntMatrix {
        &self.b0
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> usize {
        self.quiver.n()
    }

    /// `D^{-1} C^t D B0 C`, or `None` when it is not integral.
    pub fn exchange_for(&self, c: &IntMatrix) -> Option<IntMatrix> {
        let d = self.quiver.d_matrix();
        let full = c.transpose().mul(&d).mul(&self.b0).mul(c);
        let f = self.quiver.symmetrizer();
        let mut b = full.clone();
        for i in 0..self.n() {
            for j in 0..self.n() {
                if full[(i, j)] % f[i] != 0 {
                    return None;
                }
                b[(i, j)] = full[(i, j)] / f[i];
            }
        }
        Some(b)
    }
}

/// A c-vector or g-vector together with its power of `t`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GradedVector {
    #[serde(rename = "dim")]
    pub coords: Vec<i64>,
    #[serde(rename = "slope")]
    pub grade: i64,
}

impl GradedVector {
    pub fn new(coords: Vec<i64>, grade: i64) -> Self {
        Self { coords, grade }
    }

    /// Value at `t = -1`.
    pub fn at_minus_one(&self) -> Vec<i64> {
        let sign = if self.grade.rem_euclid(2) == 0 { 1 } else { -1 };
        self.coords.iter().map(|x| sign * x).collect()
    }
}

impl fmt::Display for GradedVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c: Vec<String> = self.coords.iter().map(ToString::to_string).collect();
        write!(f, "t^{}({})", self.grade, c.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VecSign {
    Positive,
    Negative,
    Mixed,
}

fn vec_sign(v: &[i64]) -> VecSign {
    let pos = v.iter().any(|&x| x > 0);
    let neg = v.iter().any(|&x| x < 0);
    match (pos, neg) {
        (true, false) => VecSign::Positive,
        (false, true) => VecSign::Negative,
        _ => VecSign::Mixed,
    }
}

/// One seed of the m-cluster exchange graph. Immutable; mutations return
/// fresh states.
#[derive(Clone)]
pub struct MutationState {
    b: IntMatrix,
    abs_c: IntMatrix,
    slopes: Vec<u32>,
    ctx: Arc<MutationContext>,
}

impl PartialEq for MutationState {
    fn eq(&self, other: &Self) -> bool {
        self.b == other.b
            && self.abs_c == other.abs_c
            && self.slopes == other.slopes
            && (Arc::ptr_eq(&self.ctx, &other.ctx) || self.ctx == other.ctx)
    }
}

impl Eq for MutationState {}

impl Hash for MutationState {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.b.hash(state);
        self.abs_c.hash(state);
        self.slopes.hash(state);
    }
}

impl fmt::Debug for MutationState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MutationState")
            .field("B", &self.b)
            .field("absC", &self.abs_c)
            .field("slopes", &self.slopes)
            .field("m", &self.ctx.m)
            .finish()
    }
}

impl fmt::Display for MutationState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.b)?;
        writeln!(f, "---")?;
        write!(f, "{}", self.abs_c)?;
        writeln!(f, "---")?;
        let s: Vec<String> = self.slopes.iter().map(|x| format!("{x:>3}")).collect();
        writeln!(f, "[{}]", s.join(" "))
    }
}

/// Result of [`MutationState::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StateReport {
    pub valid: bool,
    pub violations: Vec<String>,
}

impl MutationState {
    /// `B = B0`, `|C| = I`, all slopes zero.
    pub fn initial(ctx: &Arc<MutationContext>) -> Self {
        let n = ctx.n();
        Self { b: ctx.b0.clone(), abs_c: IntMatrix::identity(n), slopes: vec![0; n], ctx: Arc::clone(ctx) }
    }

    /// Assembles a state from raw parts without validating it.
    pub fn from_parts(
        ctx: &Arc<MutationContext>,
        b: Vec<Vec<i64>>,
        abs_c: Vec<Vec<i64>>,
        slopes: Vec<u32>,
    ) -> Result<Self, MutationError> {
        let n = ctx.n();
        let b = IntMatrix::from_rows(&b).filter(|m| m.rows() == n && m.cols() == n);
        let abs_c = IntMatrix::from_rows(&abs_c).filter(|m| m.rows() == n && m.cols() == n);
        match (b, abs_c) {
            (Some(b), Some(abs_c)) if slopes.len() == n => Ok(Self { b, abs_c, slopes, ctx: Arc::clone(ctx) }),
            _ => Err(MutationError::InvalidState(vec![format!("matrix shapes do not match rank {n}")])),
        }
    }

    /// Builds the state with the given c-columns and slopes, deriving `B`.
    pub fn from_columns(
        ctx: &Arc<MutationContext>,
        columns: &[Vec<i64>],
        slopes: Vec<u32>,
    ) -> Result<Self, MutationError> {
        let abs_c = IntMatrix::from_columns(columns)
            .filter(|m| m.rows() == ctx.n() && m.cols() == ctx.n() && slopes.len() == ctx.n())
            .ok_or_else(|| MutationError::InvalidState(vec!["shape mismatch".into()]))?;
        let c = signed(&abs_c, &slopes);
        let b = ctx.exchange_for(&c).ok_or_else(|| MutationError::InvalidState(vec!["B is not integral".into()]))?;
        Ok(Self { b, abs_c, slopes, ctx: Arc::clone(ctx) })
    }

    pub fn context(&self) -> &Arc<MutationContext> {
        &self.ctx
    }

    pub fn n(&self) -> usize {
        self.ctx.n()
    }

    pub fn m(&self) -> u32 {
        self.ctx.m
    }

    pub fn b(&self) -> &IntMatrix {
        &self.b
    }

    pub fn abs_c(&self) -> &IntMatrix {
        &self.abs_c
    }

    pub fn slopes(&self) -> &[u32] {
        &self.slopes
    }

    pub fn abs_column(&self, j: usize) -> Vec<i64> {
        self.abs_c.column(j)
    }

    /// `c~_j = t^{s_j} |c_j|`.
    pub fn c_tilde(&self, j: usize) -> GradedVector {
        GradedVector::new(self.abs_column(j), i64::from(self.slopes[j]))
    }

    /// The signed c-matrix `C` (value of the graded c-vectors at `t = -1`).
    pub fn signed_c_matrix(&self) -> IntMatrix {
        signed(&self.abs_c, &self.slopes)
    }

    pub fn is_terminal(&self) -> bool {
        self.slopes.iter().all(|&s| s == self.ctx.m)
    }

    pub fn is_initial(&self) -> bool {
        self.slopes.iter().all(|&s| s == 0) && self.abs_c == IntMatrix::identity(self.n())
    }

    fn check_vertex(&self, k: usize) -> Result<(), MutationError> {
        if k >= self.n() {
            return Err(MutationError::VertexOutOfRange { k, n: self.n() });
        }
        Ok(())
    }

    /// Positive mutation in direction `k` (0-based).
    pub fn mu_plus(&self, k: usize) -> Result<Self, MutationError> {
        self.check_vertex(k)?;
        let m = self.ctx.m;
        let sk = self.slopes[k];
        if sk >= m {
            return Err(MutationError::SlopeAtMax(k));
        }
        let n = self.n();
        let ck = self.abs_column(k);
        let mut cols: Vec<Vec<i64>> = (0..n).map(|j| self.abs_column(j)).collect();
        let mut slopes = self.slopes.clone();
        slopes[k] = sk + 1;
        for j in (0..n).filter(|&j| j != k) {
            let bkj = self.b[(k, j)];
            let sj = self.slopes[j];
            if bkj <= 0 || (sj != sk && sj != sk + 1) {
                continue;
            }
            let cj = &cols[j];
            if sj == sk {
                cols[j] = cj.iter().zip(&ck).map(|(a, b)| a + bkj * b).collect();
                continue;
            }
            let diff: Vec<i64> = cj.iter().zip(&ck).map(|(a, b)| a - bkj * b).collect();
            match vec_sign(&diff) {
                VecSign::Positive => cols[j] = diff,
                VecSign::Negative => {
                    cols[j] = diff.iter().map(|x| -x).collect();
                    slopes[j] = sk;
                }
                VecSign::Mixed => return Err(MutationError::SignIncoherence { k, j, vector: diff }),
            }
        }
        Self::from_columns(&self.ctx, &cols, slopes)
    }

    /// Negative mutation in direction `k`: the inverse of [`Self::mu_plus`].
    ///
    /// Every case of the positive rule negates row `k` of `B`, so the old
    /// row is `-B[k]` and each column can be undone case by case. The
    /// candidate is accepted only if mutating it forward gives `self` back.
    pub fn mu_minus(&self, k: usize) -> Result<Self, MutationError> {
        self.check_vertex(k)?;
        if self.slopes[k] == 0 {
            return Err(MutationError::SlopeAtMin(k));
        }
        let n = self.n();
        let sk = self.slopes[k] - 1;
        let ck = self.abs_column(k);
        let mut cols: Vec<Vec<i64>> = (0..n).map(|j| self.abs_column(j)).collect();
        let mut slopes = self.slopes.clone();
        slopes[k] = sk;
        for j in (0..n).filter(|&j| j != k) {
            let bkj = -self.b[(k, j)];
            let sj = self.slopes[j];
            if bkj <= 0 {
                continue;
            }
            let cj = &cols[j];
            if sj == sk {
                let diff: Vec<i64> = cj.iter().zip(&ck).map(|(a, b)| a - bkj * b).collect();
                match vec_sign(&diff) {
                    // the same-slope extension case
                    VecSign::Positive => cols[j] = diff,
                    // the kernel case, which lowered the slope
                    VecSign::Negative => {
                        cols[j] = diff.iter().map(|x| -x).collect();
                        slopes[j] = sk + 1;
                    }
                    VecSign::Mixed => return Err(MutationError::NotInvertibleHere(k)),
                }
            } else if sj == sk + 1 {
                cols[j] = cj.iter().zip(&ck).map(|(a, b)| a + bkj * b).collect();
            }
        }
        if cols.iter().any(|c| !crate::linalg::is_nonneg_nonzero(c)) {
            return Err(MutationError::NotInvertibleHere(k));
        }
        let prev = Self::from_columns(&self.ctx, &cols, slopes).map_err(|_| MutationError::NotInvertibleHere(k))?;
        match prev.mu_plus(k) {
            Ok(ref fwd) if fwd == self => Ok(prev),
            _ => Err(MutationError::NotInvertibleHere(k)),
        }
    }

    /// Checks every state invariant and lists the violated ones.
    pub fn validate(&self) -> StateReport {
        let mut violations = Vec::new();
        let n = self.n();
        let m = self.ctx.m;
        for j in 0..n {
            if !crate::linalg::is_nonneg_nonzero(&self.abs_column(j)) {
                violations.push(format!("column {} of |C| is not nonnegative and nonzero", j + 1));
            }
        }
        for (j, &s) in self.slopes.iter().enumerate() {
            if s > m {
                violations.push(format!("slope s_{} = {s} exceeds m = {m}", j + 1));
            }
        }
        let c = self.signed_c_matrix();
        match self.ctx.exchange_for(&c) {
            Some(b) if b == self.b => {}
            Some(_) => violations.push("B differs from D^-1 C^t D B0 C".into()),
            None => violations.push("D^-1 C^t D B0 C is not integral".into()),
        }
        if !self.ctx.quiver.d_matrix().mul(&self.b).is_skew_symmetric() {
            violations.push("D B is not skew-symmetric".into());
        }
        let det = c.det();
        if det.abs() != BigInt::from(1) {
            violations.push(format!("det C = {det}"));
        }
        StateReport { valid: violations.is_empty(), violations }
    }

    /// Applies positive mutations in order (0-based directions).
    pub fn replay(&self, ks: &[usize]) -> Result<Self, MutationError> {
        ks.iter().try_fold(self.clone(), |st, &k| st.mu_plus(k))
    }

    /// Same state with columns relabeled: new column `i` is old column `perm[i]`.
    /// The permutation must preserve the symmetrizer.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        let f = self.ctx.quiver.symmetrizer();
        debug_assert!(perm.iter().enumerate().all(|(i, &p)| f[i] == f[p]), "relabeling must preserve D");
        Self {
            b: self.b.conjugate_by(perm),
            abs_c: self.abs_c.permute_columns(perm),
            slopes: perm.iter().map(|&p| self.slopes[p]).collect(),
            ctx: Arc::clone(&self.ctx),
        }
    }

    pub fn to_json(&self) -> StateJson {
        StateJson {
            b: self.b.to_rows(),
            abs_c: self.abs_c.to_rows(),
            slopes: self.slopes.clone(),
            m: self.ctx.m,
            quiver: match self.ctx.quiver.name() {
                Some(name) => serde_json::Value::String(name.to_string()),
                None => serde_json::to_value(&self.ctx.quiver).expect("quiver serializes"),
            },
        }
    }

    /// Parses a state; the quiver field must match the given context.
    pub fn from_json(ctx: &Arc<MutationContext>, json: &StateJson) -> Result<Self, MutationError> {
        if json.m != ctx.m {
            return Err(MutationError::InvalidState(vec![format!("m = {} but context has m = {}", json.m, ctx.m)]));
        }
        Self::from_parts(ctx, json.b.clone(), json.abs_c.clone(), json.slopes.clone())
    }
}

fn signed(abs_c: &IntMatrix, slopes: &[u32]) -> IntMatrix {
    let mut c = abs_c.clone();
    for (j, &s) in slopes.iter().enumerate() {
        if s % 2 == 1 {
            for i in 0..c.rows() {
                c[(i, j)] = -c[(i, j)];
            }
        }
    }
    c
}

/// Wire form: `absC[i][j]` is entry `i` of `|c_j|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateJson {
    #[serde(rename = "B")]
    pub b: Vec<Vec<i64>>,
    #[serde(rename = "absC")]
    pub abs_c: Vec<Vec<i64>>,
    pub slopes: Vec<u32>,
    pub m: u32,
    pub quiver: serde_json::Value,
}
