//! Representations of simply-laced Dynkin quivers over the rationals:
//! indecomposables, Hom and Ext, perpendicular categories, stability walls
//! and torsion classes.
//!
//! A representation stores one matrix per arrow `t -> h`, of shape
//! `dim_h x dim_t`. Indecomposables are built as seeded random
//! representations of each positive root and accepted only once
//! `End = K` is confirmed exactly; in Dynkin type a brick is determined by
//! its dimension vector.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::OnceLock;

use num_rational::BigRational;
use num_traits::Zero;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fans::{self, FansError, SummandKind};
use crate::linalg::{self, IntMatrix, RatMatrix};
use crate::mutation::MutationState;
use crate::seed::ValuedQuiver;

/// Largest total dimension accepted by [`RepTable::submodule_dims`].
pub const SUBMODULE_DIM_LIMIT: i64 = 12;

const BUILD_SEED: u64 = 0x6d63_665f_7265_7073;
const BUILD_TRIALS: usize = 64;
const PRIMES: [i64; 4] = [2, 3, 5, 7];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FinrepError {
    #[error("unsupported quiver type: {0}")]
    UnsupportedType(String),
    #[error("negative ext between indecomposables #{0} and #{1}")]
    NegativeExt(usize, usize),
    #[error("total dimension {0} exceeds the submodule search limit")]
    TooLarge(i64),
    #[error("not an exceptional sequence")]
    NotExceptionalSequence,
    #[error("span has rank {got}, expected {expected}")]
    SpanRank { expected: usize, got: usize },
    #[error("no dual brick found for summand {}", .0 + 1)]
    DualBrickNotFound(usize),
    #[error("{0:?} is not the dimension vector of an indecomposable")]
    UnknownModule(Vec<i64>),
    #[error("could not realize a brick of dimension {0:?}")]
    Construction(Vec<i64>),
    #[error("universal map is neither mono nor epi")]
    InconclusiveGenericity,
    #[error("multiplicity {r} matches neither hom = {hom} nor ext = {ext}")]
    MultiplicityMismatch { r: usize, hom: usize, ext: usize },
    #[error("operation needs an m = 1 state, got m = {0}")]
    NotClusterState(u32),
    #[error("silting recovery failed: {0}")]
    Silting(Box<FansError>),
}

impl From<FansError> for FinrepError {
    fn from(e: FansError) -> Self {
        FinrepError::Silting(Box::new(e))
    }
}

/// An indecomposable representation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IndecRep {
    pub id: usize,
    pub dim: Vec<i64>,
    #[serde(skip)]
    pub maps: Vec<RatMatrix>,
}

/// Stability set `{x : x.normal = 0, x.d <= 0 for d in subdims}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Wall {
    pub normal: Vec<i64>,
    pub subdims: Vec<Vec<i64>>,
}

impl Wall {
    pub fn contains(&self, x: &[BigRational]) -> bool {
        let dot = |d: &[i64]| x.iter().zip(d).fold(BigRational::zero(), |acc, (a, &b)| acc + a * linalg::rat(b));
        dot(&self.normal).is_zero() && self.subdims.iter().all(|d| dot(d) <= BigRational::zero())
    }

    pub fn contains_int(&self, x: &[i64]) -> bool {
        linalg::dot(x, &self.normal) == 0 && self.subdims.iter().all(|d| linalg::dot(x, d) <= 0)
    }

    /// The wall of `{x : -x in self}`.
    pub fn negated(&self) -> Wall {
        let neg = |v: &Vec<i64>| v.iter().map(|x| -x).collect::<Vec<_>>();
        Wall { normal: neg(&self.normal), subdims: self.subdims.iter().map(neg).collect() }
    }
}

/// An object of the cluster category on the wall-membership side: a module
/// or a shifted indecomposable projective `P_i[1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Object {
    Module(usize),
    ShiftedProjective(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MembershipReport {
    pub geometric: bool,
    pub homological: bool,
}

impl MembershipReport {
    pub fn agree(&self) -> bool {
        self.geometric == self.homological
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `{X : Hom(X, S) = 0 = Ext(X, S)}`
    Left,
    /// `{X : Hom(S, X) = 0 = Ext(S, X)}`
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TorsionClass {
    pub members: BTreeSet<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorsionClassJson {
    pub members: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChamberReport {
    /// Dual brick for each summand, as an indecomposable id.
    pub dual_bricks: Vec<usize>,
    pub interior_clear: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseKind {
    Extension,
    Mono,
    Epi,
}

/// Outcome of the module-theoretic mutation step, with the dimension
/// vector of the new module (middle term, cokernel or kernel).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MutationCase {
    pub kind: CaseKind,
    pub dim: Vec<i64>,
}

/// What the numerical sign test of the mutation rule predicts for the pair
/// `(|c_j|, |c_k|)` with `b = b_kj > 0`.
pub fn numerical_case(abs_cj: &[i64], abs_ck: &[i64], b: i64, same_slope: bool) -> Option<MutationCase> {
    if same_slope {
        let dim = abs_cj.iter().zip(abs_ck).map(|(x, y)| x + b * y).collect();
        return Some(MutationCase { kind: CaseKind::Extension, dim });
    }
    let diff: Vec<i64> = abs_cj.iter().zip(abs_ck).map(|(x, y)| x - b * y).collect();
    if diff.iter().all(|&x| x >= 0) && diff.iter().any(|&x| x > 0) {
        Some(MutationCase { kind: CaseKind::Mono, dim: diff })
    } else if diff.iter().all(|&x| x <= 0) && diff.iter().any(|&x| x < 0) {
        Some(MutationCase { kind: CaseKind::Epi, dim: diff.iter().map(|x| -x).collect() })
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RestrictionReport {
    pub checked: usize,
    pub violations: Vec<String>,
}

/// The indecomposables of a simply-laced Dynkin quiver with their Hom and
/// Ext tables.
pub struct RepTable {
    quiver: ValuedQuiver,
    arrows: Vec<(usize, usize)>,
    reps: Vec<IndecRep>,
    by_dim: HashMap<Vec<i64>, usize>,
    hom: Vec<Vec<usize>>,
    ext: Vec<Vec<usize>>,
    walls: Vec<OnceLock<Result<Wall, FinrepError>>>,
}

impl std::fmt::Debug for RepTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RepTable")
            .field("quiver", &self.quiver.label())
            .field("indecomposables", &self.reps.len())
            .finish()
    }
}

/// Positive roots of a Dynkin quiver by closing the simple roots under
/// simple reflections.
pub fn positive_roots(q: &ValuedQuiver) -> Result<Vec<Vec<i64>>, FinrepError> {
    check_dynkin(q)?;
    let n = q.n();
    let e = q.euler();
    let sym = |a: &[i64], i: usize| -> i64 { (0..n).map(|j| a[j] * (e[(j, i)] + e[(i, j)])).sum() };
    let mut seen: BTreeSet<Vec<i64>> = BTreeSet::new();
    let mut queue = VecDeque::new();
    for i in 0..n {
        let mut v = vec![0; n];
        v[i] = 1;
        seen.insert(v.clone());
        queue.push_back(v);
    }
    while let Some(a) = queue.pop_front() {
        for i in 0..n {
            let mut r = a.clone();
            r[i] -= sym(&a, i);
            if r.iter().all(|&x| x >= 0) && r.iter().any(|&x| x > 0) && seen.insert(r.clone()) {
                queue.push_back(r);
            }
        }
    }
    let mut roots: Vec<Vec<i64>> = seen.into_iter().collect();
    roots.sort_by(|a, b| a.iter().sum::<i64>().cmp(&b.iter().sum::<i64>()).then_with(|| b.cmp(a)));
    Ok(roots)
}

fn check_dynkin(q: &ValuedQuiver) -> Result<(), FinrepError> {
    if !q.is_simply_laced() {
        return Err(FinrepError::UnsupportedType(format!("{} is valued", q.label())));
    }
    let n = q.n();
    let e = q.euler();
    let s = symmetrized(e);
    for k in 1..=n {
        let minor = IntMatrix::from_rows(&(0..k).map(|i| (0..k).map(|j| s[(i, j)]).collect()).collect::<Vec<_>>())
            .expect("square minor");
        if minor.det() <= 0.into() {
            return Err(FinrepError::UnsupportedType(format!("{} is not of Dynkin type", q.label())));
        }
    }
    Ok(())
}

/// Layout of the unknowns of a Hom system: one `y_v x x_v` block per vertex.
struct HomLayout {
    offsets: Vec<usize>,
    total: usize,
}

impl HomLayout {
    fn new(x: &[i64], y: &[i64]) -> Self {
        let mut offsets = Vec::with_capacity(x.len());
        let mut total = 0;
        for (a, b) in x.iter().zip(y) {
            offsets.push(total);
            total += (a * b) as usize;
        }
        Self { offsets, total }
    }

    fn index(&self, v: usize, row: usize, col: usize, x_v: usize) -> usize {
        self.offsets[v] + row * x_v + col
    }
}

/// Linear system whose solutions are the morphisms `X -> Y`:
/// `Y_a f_t = f_h X_a` for every arrow `a: t -> h`.
fn hom_system(arrows: &[(usize, usize)], x: &IndecLike, y: &IndecLike) -> (RatMatrix, HomLayout) {
    let layout = HomLayout::new(x.dim, y.dim);
    let mut rows: RatMatrix = Vec::new();
    for (a, &(t, h)) in arrows.iter().enumerate() {
        let (xt, xh) = (x.dim[t] as usize, x.dim[h] as usize);
        let (yt, yh) = (y.dim[t] as usize, y.dim[h] as usize);
        for r in 0..yh {
            for c in 0..xt {
                let mut eq = vec![BigRational::zero(); layout.total];
                for l in 0..yt {
                    let coeff = &y.maps[a][r][l];
                    if !coeff.is_zero() {
                        eq[layout.index(t, l, c, xt)] += coeff;
                    }
                }
                for l in 0..xh {
                    let coeff = &x.maps[a][l][c];
                    if !coeff.is_zero() {
                        eq[layout.index(h, r, l, xh)] -= coeff;
                    }
                }
                if eq.iter().any(|e| !e.is_zero()) {
                    rows.push(eq);
                }
            }
        }
    }
    (rows, layout)
}

struct IndecLike<'a> {
    dim: &'a [i64],
    maps: &'a [RatMatrix],
}

impl<'a> From<&'a IndecRep> for IndecLike<'a> {
    fn from(r: &'a IndecRep) -> Self {
        IndecLike { dim: &r.dim, maps: &r.maps }
    }
}

fn hom_dim_raw(arrows: &[(usize, usize)], x: &IndecLike, y: &IndecLike) -> usize {
    let (sys, layout) = hom_system(arrows, x, y);
    layout.total - linalg::rank(&sys)
}

fn hom_dim_mod_p(arrows: &[(usize, usize)], x: &IndecLike, p: i64) -> Option<usize> {
    let (sys, layout) = hom_system(arrows, x, x);
    let reduced: Option<Vec<Vec<i64>>> =
        sys.iter().map(|row| row.iter().map(|e| linalg::rational_mod_p(e, p)).collect()).collect();
    Some(layout.total - linalg::rank_mod_p(&reduced?, p))
}

fn random_rep(arrows: &[(usize, usize)], dim: &[i64], rng: &mut StdRng) -> Vec<RatMatrix> {
    arrows
        .iter()
        .map(|&(t, h)| (0..dim[h]).map(|_| (0..dim[t]).map(|_| linalg::rat(rng.gen_range(-2..=2))).collect()).collect())
        .collect()
}

impl RepTable {
    pub fn build(q: &ValuedQuiver) -> Result<Self, FinrepError> {
        let roots = positive_roots(q)?;
        let arrows: Vec<(usize, usize)> = q.arrows().into_iter().map(|(t, h, _)| (t, h)).collect();
        let mut rng = StdRng::seed_from_u64(BUILD_SEED);
        let mut reps = Vec::with_capacity(roots.len());
        for (id, dim) in roots.into_iter().enumerate() {
            let maps = (0..BUILD_TRIALS)
                .map(|_| random_rep(&arrows, &dim, &mut rng))
                .find(|maps| hom_dim_raw(&arrows, &IndecLike { dim: &dim, maps }, &IndecLike { dim: &dim, maps }) == 1)
                .ok_or_else(|| FinrepError::Construction(dim.clone()))?;
            reps.push(IndecRep { id, dim, maps });
        }
        let count = reps.len();
        let mut hom = vec![vec![0; count]; count];
        let mut ext = vec![vec![0; count]; count];
        for x in 0..count {
            for y in 0..count {
                let h = hom_dim_raw(&arrows, &(&reps[x]).into(), &(&reps[y]).into());
                let euler = q.euler_pairing(&reps[x].dim, &reps[y].dim).expect("same rank");
                let e = h as i64 - euler;
                if e < 0 {
                    return Err(FinrepError::NegativeExt(x, y));
                }
                hom[x][y] = h;
                ext[x][y] = e as usize;
            }
        }
        let by_dim = reps.iter().map(|r| (r.dim.clone(), r.id)).collect();
        let walls = (0..count).map(|_| OnceLock::new()).collect();
        Ok(Self { quiver: q.clone(), arrows, reps, by_dim, hom, ext, walls })
    }

    pub fn quiver(&self) -> &ValuedQuiver {
        &self.quiver
    }

    pub fn indecomposables(&self) -> &[IndecRep] {
        &self.reps
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn get(&self, id: usize) -> &IndecRep {
        &self.reps[id]
    }

    pub fn id_of(&self, dim: &[i64]) -> Option<usize> {
        self.by_dim.get(dim).copied()
    }

    pub fn require(&self, dim: &[i64]) -> Result<usize, FinrepError> {
        self.id_of(dim).ok_or_else(|| FinrepError::UnknownModule(dim.to_vec()))
    }

    pub fn hom_dim(&self, x: usize, y: usize) -> usize {
        self.hom[x][y]
    }

    pub fn ext_dim(&self, x: usize, y: usize) -> usize {
        self.ext[x][y]
    }

    /// Recomputes `dim Hom(X, Y)` from the intertwining system (the tables
    /// cache the same values).
    pub fn hom_dim_direct(&self, x: usize, y: usize) -> usize {
        hom_dim_raw(&self.arrows, &(&self.reps[x]).into(), &(&self.reps[y]).into())
    }

    /// Basis of `Hom(X, Y)`, each element given by its per-vertex matrices.
    pub fn hom_basis(&self, x: usize, y: usize) -> Vec<Vec<RatMatrix>> {
        let (rx, ry) = (&self.reps[x], &self.reps[y]);
        let (sys, layout) = hom_system(&self.arrows, &rx.into(), &ry.into());
        linalg::nullspace(&sys, layout.total)
            .into_iter()
            .map(|v| {
                (0..self.quiver.n())
                    .map(|vert| {
                        let (xv, yv) = (rx.dim[vert] as usize, ry.dim[vert] as usize);
                        (0..yv).map(|r| (0..xv).map(|c| v[layout.index(vert, r, c, xv)].clone()).collect()).collect()
                    })
                    .collect()
            })
            .collect()
    }

    pub fn is_exceptional_sequence(&self, seq: &[usize]) -> bool {
        seq.iter().enumerate().all(|(i, &a)| seq[i + 1..].iter().all(|&b| self.hom[b][a] == 0 && self.ext[b][a] == 0))
    }

    /// Dimension vectors of the proper nonzero subrepresentations, found by
    /// exhaustive search over a small prime field.
    pub fn submodule_dims(&self, id: usize) -> Result<BTreeSet<Vec<i64>>, FinrepError> {
        let rep = &self.reps[id];
        let total: i64 = rep.dim.iter().sum();
        if total > SUBMODULE_DIM_LIMIT {
            return Err(FinrepError::TooLarge(total));
        }
        for p in PRIMES {
            if let Some(found) = self.submodule_dims_mod_p(id, p) {
                return Ok(found);
            }
        }
        Err(FinrepError::Construction(rep.dim.clone()))
    }

    /// Submodule search over `F_p`; `None` if the reduction mod `p` is not
    /// defined or no longer a brick.
    pub fn submodule_dims_mod_p(&self, id: usize, p: i64) -> Option<BTreeSet<Vec<i64>>> {
        let rep = &self.reps[id];
        if hom_dim_mod_p(&self.arrows, &rep.into(), p)? != 1 {
            return None;
        }
        let maps: Vec<Vec<Vec<i64>>> = rep
            .maps
            .iter()
            .map(|m| m.iter().map(|row| row.iter().map(|e| linalg::rational_mod_p(e, p)).collect()).collect())
            .collect::<Option<_>>()?;
        let spaces: Vec<Vec<Vec<Vec<i64>>>> = rep.dim.iter().map(|&d| subspaces(d as usize, p)).collect();
        let mut found = BTreeSet::new();
        let mut choice: Vec<usize> = vec![0; rep.dim.len()];
        self.search_subreps(0, &spaces, &maps, p, &mut choice, &mut found);
        found.remove(&vec![0; rep.dim.len()]);
        found.remove(&rep.dim);
        Some(found)
    }

    fn search_subreps(
        &self,
        v: usize,
        spaces: &[Vec<Vec<Vec<i64>>>],
        maps: &[Vec<Vec<i64>>],
        p: i64,
        choice: &mut Vec<usize>,
        found: &mut BTreeSet<Vec<i64>>,
    ) {
        let n = spaces.len();
        if v == n {
            found.insert((0..n).map(|u| spaces[u][choice[u]].len() as i64).collect());
            return;
        }
        for idx in 0..spaces[v].len() {
            choice[v] = idx;
            let ok = self.arrows.iter().enumerate().all(|(a, &(t, h))| {
                if t.max(h) != v {
                    return true;
                }
                let (src, dst) = (&spaces[t][choice[t]], &spaces[h][choice[h]]);
                src.iter().all(|u| {
                    let image: Vec<i64> = maps[a]
                        .iter()
                        .map(|row| row.iter().zip(u).map(|(x, y)| x * y).sum::<i64>().rem_euclid(p))
                        .collect();
                    in_span(dst, &image, p)
                })
            });
            if ok {
                self.search_subreps(v + 1, spaces, maps, p, choice, found);
            }
        }
    }

    pub fn wall_of(&self, id: usize) -> Result<Wall, FinrepError> {
        self.walls[id]
            .get_or_init(|| {
                let subdims = self.submodule_dims(id)?;
                Ok(Wall { normal: self.reps[id].dim.clone(), subdims: subdims.into_iter().collect() })
            })
            .clone()
    }

    /// Vector `D g(X)`, or `-D e_i` for `P_i[1]`.
    pub fn stability_vector(&self, x: Object) -> Vec<i64> {
        match x {
            Object::Module(id) => self.quiver.euler().transpose().mul_vec(&self.reps[id].dim),
            Object::ShiftedProjective(i) => {
                let mut v = vec![0; self.quiver.n()];
                v[i] = -self.quiver.symmetrizer()[i];
                v
            }
        }
    }

    pub fn check_wall_membership(&self, x: Object, m: usize) -> Result<MembershipReport, FinrepError> {
        let wall = self.wall_of(m)?;
        let geometric = wall.contains_int(&self.stability_vector(x));
        let homological = match x {
            Object::Module(id) => self.hom[id][m] == 0 && self.ext[id][m] == 0,
            Object::ShiftedProjective(i) => self.reps[m].dim[i] == 0,
        };
        Ok(MembershipReport { geometric, homological })
    }

    pub fn perp_category(&self, s: &[usize], side: Side) -> Vec<usize> {
        (0..self.reps.len())
            .filter(|&x| {
                s.iter().all(|&m| match side {
                    Side::Left => self.hom[x][m] == 0 && self.ext[x][m] == 0,
                    Side::Right => self.hom[m][x] == 0 && self.ext[m][x] == 0,
                })
            })
            .collect()
    }

    /// `span(M_1..M_r) = (^perp M)^perp`.
    pub fn span_of(&self, seq: &[usize]) -> Result<Vec<usize>, FinrepError> {
        if !self.is_exceptional_sequence(seq) {
            return Err(FinrepError::NotExceptionalSequence);
        }
        let left = self.perp_category(seq, Side::Left);
        let span = self.perp_category(&left, Side::Right);
        let dims: RatMatrix =
            span.iter().map(|&i| self.reps[i].dim.iter().map(|&x| linalg::rat(x)).collect()).collect();
        let got = if dims.is_empty() { 0 } else { linalg::rank(&dims) };
        if got != seq.len() {
            return Err(FinrepError::SpanRank { expected: seq.len(), got });
        }
        Ok(span)
    }

    /// Module-theoretic form of one mutation step: the universal extension
    /// `0 -> E_j -> E' -> E_k^r -> 0` when `Ext(E_k, E_j)` has dimension
    /// `r`, or the universal morphism `E_k^r -> E_j` when `Hom` does.
    pub fn mutation_case_oracle(&self, k: usize, j: usize, r: usize) -> Result<MutationCase, FinrepError> {
        let (hom, ext) = (self.hom[k][j], self.ext[k][j]);
        let (dk, dj) = (&self.reps[k].dim, &self.reps[j].dim);
        if r == 0 || (hom != r && ext != r) {
            return Err(FinrepError::MultiplicityMismatch { r, hom, ext });
        }
        if hom == 0 {
            let dim = dj.iter().zip(dk).map(|(a, b)| a + r as i64 * b).collect();
            return Ok(MutationCase { kind: CaseKind::Extension, dim });
        }
        let basis = self.hom_basis(k, j);
        let mut mono = true;
        let mut epi = true;
        for v in 0..self.quiver.n() {
            let rows = dj[v] as usize;
            let block: RatMatrix =
                (0..rows).map(|row| basis.iter().flat_map(|f| f[v][row].iter().cloned()).collect()).collect();
            let rank = if rows == 0 || dk[v] == 0 { 0 } else { linalg::rank(&block) };
            mono &= rank == r * dk[v] as usize;
            epi &= rank == rows;
        }
        match (mono, epi) {
            (true, _) => Ok(MutationCase {
                kind: CaseKind::Mono,
                dim: dj.iter().zip(dk).map(|(a, b)| a - r as i64 * b).collect(),
            }),
            (false, true) => Ok(MutationCase {
                kind: CaseKind::Epi,
                dim: dk.iter().zip(dj).map(|(a, b)| r as i64 * a - b).collect(),
            }),
            _ => Err(FinrepError::InconclusiveGenericity),
        }
    }

    /// The g-vector-side stability vectors `D g~(T_i)` at `t = -1` of the
    /// cluster attached to an m = 1 state.
    fn cluster_vectors(&self, st: &MutationState) -> Result<Vec<Vec<i64>>, FinrepError> {
        if st.m() != 1 {
            return Err(FinrepError::NotClusterState(st.m()));
        }
        let silting = fans::silting_from_state(st)?;
        let f = self.quiver.symmetrizer();
        Ok(silting.items.iter().map(|t| t.g_at_minus_one().iter().zip(f).map(|(g, f)| g * f).collect()).collect())
    }

    /// Dual bricks of an m = 1 cluster and a check that strictly positive
    /// combinations of its g-vectors avoid every wall.
    pub fn verify_chamber(&self, st: &MutationState) -> Result<ChamberReport, FinrepError> {
        let vecs = self.cluster_vectors(st)?;
        let n = vecs.len();
        let walls: Vec<Wall> = (0..self.len()).map(|i| self.wall_of(i)).collect::<Result<_, _>>()?;
        let mut dual_bricks = Vec::with_capacity(n);
        for j in 0..n {
            let hits: Vec<usize> =
                (0..walls.len()).filter(|&x| (0..n).all(|i| walls[x].contains_int(&vecs[i]) == (i != j))).collect();
            match hits.as_slice() {
                [x] => dual_bricks.push(*x),
                _ => return Err(FinrepError::DualBrickNotFound(j)),
            }
        }
        let weights: Vec<Vec<i64>> = vec![
            vec![1; n],
            (1..=n as i64).collect(),
            (1..=n as i64).rev().collect(),
            (0..n as i64).map(|i| 1 + (3 * i) % 5).collect(),
        ];
        let interior_clear = weights.iter().all(|w| {
            let point: Vec<i64> = (0..n).map(|c| (0..n).map(|i| w[i] * vecs[i][c]).sum()).collect();
            walls.iter().all(|wall| !wall.contains_int(&point))
        });
        Ok(ChamberReport { dual_bricks, interior_clear })
    }

    /// Torsion class of an m = 1 cluster: indecomposables `Z` with
    /// `Ext(M, Z) = 0` and support inside the support of the module part `M`.
    pub fn torsion_class_of_state(&self, st: &MutationState) -> Result<TorsionClass, FinrepError> {
        if st.m() != 1 {
            return Err(FinrepError::NotClusterState(st.m()));
        }
        let silting = fans::silting_from_state(st)?;
        let module_part: Vec<usize> = silting
            .items
            .iter()
            .filter(|t| t.kind == SummandKind::Module && t.level == 0)
            .map(|t| self.require(&t.dim))
            .collect::<Result<_, _>>()?;
        let n = self.quiver.n();
        let support: Vec<bool> = (0..n).map(|v| module_part.iter().any(|&t| self.reps[t].dim[v] > 0)).collect();
        let members = (0..self.len())
            .filter(|&z| {
                !module_part.is_empty()
                    && module_part.iter().all(|&t| self.ext[t][z] == 0)
                    && (0..n).all(|v| support[v] || self.reps[z].dim[v] == 0)
            })
            .collect();
        Ok(TorsionClass { members })
    }

    pub fn torsion_json(&self, t: &TorsionClass) -> TorsionClassJson {
        TorsionClassJson { members: t.members.iter().map(|&i| self.reps[i].dim.clone()).collect() }
    }

    /// Whether a generic morphism `X -> Y` is surjective.
    pub fn has_epi(&self, x: usize, y: usize) -> bool {
        if self.hom[x][y] == 0 {
            return false;
        }
        let basis = self.hom_basis(x, y);
        (0..self.quiver.n()).all(|v| {
            let rows = self.reps[y].dim[v] as usize;
            if rows == 0 {
                return true;
            }
            let combo: RatMatrix = (0..rows)
                .map(|r| {
                    (0..self.reps[x].dim[v] as usize)
                        .map(|c| {
                            basis.iter().enumerate().fold(BigRational::zero(), |acc, (i, f)| {
                                acc + &f[v][r][c] * linalg::rat(2 * i as i64 + 1)
                            })
                        })
                        .collect()
                })
                .collect();
            self.reps[x].dim[v] > 0 && linalg::rank(&combo) == rows
        })
    }

    /// Printable name: `P_i`, `S_i` or `I_i` in the given preference order,
    /// falling back to the dimension vector.
    pub fn module_name(&self, dim: &[i64], order: &str) -> String {
        module_name(&self.quiver, dim, order)
    }
}

pub fn module_name(q: &ValuedQuiver, dim: &[i64], order: &str) -> String {
    let n = q.n();
    let inv_e = q.euler().rational_inverse().expect("euler matrix is invertible");
    for c in order.chars() {
        for i in 0..n {
            let candidate: Vec<i64> = match c {
                'P' => q.projective_dim(i),
                'S' => (0..n).map(|v| i64::from(v == i)).collect(),
                'I' => {
                    let col: Vec<BigRational> =
                        (0..n).map(|r| inv_e[r][i].clone() * linalg::rat(q.symmetrizer()[i])).collect();
                    match linalg::rational_vec_to_int(&col) {
                        Some(v) => v,
                        None => continue,
                    }
                }
                _ => continue,
            };
            if candidate == dim {
                return format!("{c}{}", i + 1);
            }
        }
    }
    format!("M{}", dim.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(""))
}

/// Checks that `q_sub` is `q` with some arrows deleted and that every brick
/// of `q_sub` is a brick of `q` with the same wall normal.
pub fn restricted_walls(q: &ValuedQuiver, q_sub: &ValuedQuiver) -> Result<RestrictionReport, FinrepError> {
    let mut violations = Vec::new();
    let n = q.n();
    if q_sub.n() != n {
        violations.push(format!("rank {} differs from {}", q_sub.n(), n));
        return Ok(RestrictionReport { checked: 0, violations });
    }
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (q.euler()[(i, j)], q_sub.euler()[(i, j)]);
            let ok = if i == j { a == b } else { (a..=0).contains(&b) };
            if !ok {
                violations.push(format!("euler entry ({}, {}) is {b}, not obtained by deleting arrows", i + 1, j + 1));
            }
        }
    }
    let big = RepTable::build(q)?;
    let small = RepTable::build(q_sub)?;
    for rep in small.indecomposables() {
        match big.id_of(&rep.dim) {
            None => violations.push(format!("brick {:?} of the subquiver is not a brick of the quiver", rep.dim)),
            Some(id) => {
                if big.wall_of(id)?.normal != small.wall_of(rep.id)?.normal {
                    violations.push(format!("wall normal of {:?} differs", rep.dim));
                }
            }
        }
    }
    Ok(RestrictionReport { checked: small.len(), violations })
}

/// All subspaces of `F_p^d`, each as a list of reduced row-echelon basis rows.
fn subspaces(d: usize, p: i64) -> Vec<Vec<Vec<i64>>> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << d) {
        let pivots: Vec<usize> = (0..d).filter(|&i| mask & (1 << i) != 0).collect();
        // free slots: row r, column c > pivots[r] with c not a pivot
        let free: Vec<(usize, usize)> = pivots
            .iter()
            .enumerate()
            .flat_map(|(r, &pc)| ((pc + 1)..d).filter(|c| !pivots.contains(c)).map(move |c| (r, c)))
            .collect();
        let count = (p as u64).pow(free.len() as u32);
        for code in 0..count {
            let mut rows: Vec<Vec<i64>> = pivots
                .iter()
                .map(|&pc| {
                    let mut row = vec![0; d];
                    row[pc] = 1;
                    row
                })
                .collect();
            let mut rest = code;
            for &(r, c) in &free {
                rows[r][c] = (rest % p as u64) as i64;
                rest /= p as u64;
            }
            out.push(rows);
        }
    }
    out
}

fn in_span(basis: &[Vec<i64>], v: &[i64], p: i64) -> bool {
    if v.iter().all(|&x| x == 0) {
        return true;
    }
    if basis.is_empty() {
        return false;
    }
    let mut m = basis.to_vec();
    m.push(v.to_vec());
    linalg::rank_mod_p(&m, p) == basis.len()
}

fn symmetrized(e: &IntMatrix) -> IntMatrix {
    let t = e.transpose();
    let rows: Vec<Vec<i64>> = (0..e.rows()).map(|i| (0..e.cols()).map(|j| e[(i, j)] + t[(i, j)]).collect()).collect();
    IntMatrix::from_rows(&rows).expect("square")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumeration::{enumerate_mgs, ExchangeGraph, DEFAULT_NODE_CAP};
    use crate::fixtures;

    fn table(name: &str) -> RepTable {
        RepTable::build(&ValuedQuiver::resolve(name).unwrap()).unwrap()
    }

    fn id(t: &RepTable, d: &[i64]) -> usize {
        t.id_of(d).unwrap()
    }

    #[test]
    fn indecomposable_counts() {
        let a2 = table("a2");
        let dims: BTreeSet<Vec<i64>> = a2.indecomposables().iter().map(|r| r.dim.clone()).collect();
        assert_eq!(dims, [vec![1, 0], vec![0, 1], vec![1, 1]].into_iter().collect());
        assert_eq!(table("a3").len(), 6);
        assert_eq!(table("a4").len(), 10);
        assert_eq!(table("d4").len(), 12);
        for bad in ["a2tilde", "b2"] {
            assert!(matches!(
                RepTable::build(&ValuedQuiver::resolve(bad).unwrap()),
                Err(FinrepError::UnsupportedType(_))
            ));
        }
    }

    #[test]
    fn hom_and_ext_oracles() {
        let t = table("a2");
        let (s1, s2, p2) = (id(&t, &[1, 0]), id(&t, &[0, 1]), id(&t, &[1, 1]));
        assert_eq!((t.hom_dim(p2, s2), t.ext_dim(p2, s2)), (1, 0));
        assert_eq!((t.hom_dim(s2, s1), t.ext_dim(s2, s1)), (0, 1));
        for x in 0..t.len() {
            assert_eq!((t.hom_dim(x, x), t.ext_dim(x, x)), (1, 0));
        }
        assert_eq!(t.hom_dim(s1, p2), 1);
    }

    #[test]
    fn projectives_detect_vertex_dimension() {
        for name in ["a3", "a_4:<><", "d4"] {
            let t = table(name);
            let q = t.quiver();
            for i in 0..q.n() {
                let p = id(&t, &q.projective_dim(i));
                for m in 0..t.len() {
                    assert_eq!(t.hom_dim(p, m) as i64, t.get(m).dim[i]);
                }
            }
        }
    }

    #[test]
    fn exceptional_sequences() {
        let t = table("a2");
        let (s1, s2) = (id(&t, &[1, 0]), id(&t, &[0, 1]));
        assert!(t.is_exceptional_sequence(&[s2, s1]));
        assert!(!t.is_exceptional_sequence(&[s1, s2]));
        assert!(t.is_exceptional_sequence(&[s1]));
    }

    #[test]
    fn submodules() {
        let a2 = table("a2");
        let expect: BTreeSet<Vec<i64>> = [vec![1, 0]].into_iter().collect();
        assert_eq!(a2.submodule_dims(id(&a2, &[1, 1])).unwrap(), expect);
        assert!(a2.submodule_dims(id(&a2, &[1, 0])).unwrap().is_empty());
        let a3 = table("a3");
        let expect: BTreeSet<Vec<i64>> = [vec![1, 0, 0], vec![0, 0, 1], vec![1, 0, 1]].into_iter().collect();
        assert_eq!(a3.submodule_dims(id(&a3, &[1, 1, 1])).unwrap(), expect);
    }

    #[test]
    fn submodule_dims_agree_across_characteristics() {
        for name in ["a3", "a_4:><>", "d4"] {
            let t = table(name);
            for x in 0..t.len() {
                let found: Vec<_> = PRIMES.iter().filter_map(|&p| t.submodule_dims_mod_p(x, p)).collect();
                assert!(!found.is_empty());
                assert!(found.windows(2).all(|w| w[0] == w[1]), "{name} {:?}", t.get(x).dim);
            }
        }
    }

    #[test]
    fn walls() {
        let a2 = table("a2");
        assert_eq!(a2.wall_of(id(&a2, &[1, 0])).unwrap(), Wall { normal: vec![1, 0], subdims: vec![] });
        assert_eq!(a2.wall_of(id(&a2, &[1, 1])).unwrap(), Wall { normal: vec![1, 1], subdims: vec![vec![1, 0]] });
        let a3 = table("a3");
        assert!(a3.wall_of(id(&a3, &[0, 1, 0])).unwrap().subdims.is_empty());
        let json = serde_json::to_value(a2.wall_of(id(&a2, &[1, 1])).unwrap()).unwrap();
        assert_eq!(json, serde_json::json!({"normal": [1, 1], "subdims": [[1, 0]]}));
    }

    #[test]
    fn wall_membership() {
        let t = table("a2");
        let (s1, s2, p1) = (id(&t, &[1, 0]), id(&t, &[0, 1]), id(&t, &[1, 0]));
        let r = t.check_wall_membership(Object::Module(s2), s1).unwrap();
        assert_eq!(r, MembershipReport { geometric: false, homological: false });
        let r = t.check_wall_membership(Object::Module(p1), s2).unwrap();
        assert_eq!(r, MembershipReport { geometric: true, homological: true });
        let r = t.check_wall_membership(Object::ShiftedProjective(0), s1).unwrap();
        assert_eq!(r, MembershipReport { geometric: false, homological: false });
        for name in ["a3", "a_4:<><"] {
            let t = table(name);
            for m in 0..t.len() {
                for x in 0..t.len() {
                    assert!(t.check_wall_membership(Object::Module(x), m).unwrap().agree());
                }
                for i in 0..t.quiver().n() {
                    assert!(t.check_wall_membership(Object::ShiftedProjective(i), m).unwrap().agree());
                }
            }
        }
    }

    #[test]
    fn perps_and_spans() {
        let t = table("a2");
        let (s1, s2, p2) = (id(&t, &[1, 0]), id(&t, &[0, 1]), id(&t, &[1, 1]));
        assert_eq!(t.perp_category(&[p2], Side::Right), vec![s1]);
        assert_eq!(t.perp_category(&[], Side::Left).len(), 3);
        assert_eq!(t.span_of(&[s2, s1]).unwrap().len(), 3);
        assert_eq!(t.span_of(&[p2]).unwrap(), vec![p2]);
        assert_eq!(t.span_of(&[s1, s2]), Err(FinrepError::NotExceptionalSequence));
        let a3 = table("a3");
        let seq: Vec<usize> = [[0, 1, 0], [1, 1, 0], [0, 0, 1]].iter().map(|d| id(&a3, d)).collect();
        assert_eq!(a3.span_of(&[seq[1], seq[0], seq[2]]).unwrap().len(), 6);
        let i1 = id(&a3, &[1, 1, 0]);
        let right = a3.perp_category(&[i1], Side::Right);
        let dims: Vec<&Vec<i64>> = right.iter().map(|&x| &a3.get(x).dim).collect();
        assert!(dims.iter().all(|d| a3.hom_dim(i1, id(&a3, d)) == 0));
        assert_eq!(dims.len(), 3);
    }

    #[test]
    fn mutation_cases() {
        let a3 = table("a3");
        let case = a3.mutation_case_oracle(id(&a3, &[1, 1, 0]), id(&a3, &[0, 1, 0]), 1).unwrap();
        assert_eq!(case, MutationCase { kind: CaseKind::Epi, dim: vec![1, 0, 0] });
        assert_eq!(numerical_case(&[0, 1, 0], &[1, 1, 0], 1, false), Some(case));
        let a2 = table("a2");
        let case = a2.mutation_case_oracle(id(&a2, &[0, 1]), id(&a2, &[1, 0]), 1).unwrap();
        assert_eq!(case, MutationCase { kind: CaseKind::Extension, dim: vec![1, 1] });
        let case = a2.mutation_case_oracle(id(&a2, &[1, 0]), id(&a2, &[1, 1]), 1).unwrap();
        assert_eq!(case, MutationCase { kind: CaseKind::Mono, dim: vec![0, 1] });
        assert!(a2.mutation_case_oracle(id(&a2, &[1, 0]), id(&a2, &[0, 1]), 1).is_err());
    }

    /// Every mutation rule firing over the A3, m = 3 graph agrees with the
    /// module-theoretic computation.
    #[test]
    fn oracle_matches_rules_exhaustively() {
        let ctx = fixtures::ctx("a3", 3);
        let t = table("a3");
        let g = ExchangeGraph::build(&ctx, DEFAULT_NODE_CAP).unwrap();
        let mut fired = 0;
        for node in g.nodes() {
            let st = &node.state;
            for k in 0..3 {
                if st.slopes()[k] == st.m() {
                    continue;
                }
                for j in 0..3 {
                    let b = st.b()[(k, j)];
                    let (sk, sj) = (st.slopes()[k], st.slopes()[j]);
                    if j == k || b <= 0 || (sj != sk && sj != sk + 1) {
                        continue;
                    }
                    let (ck, cj) = (st.abs_column(k), st.abs_column(j));
                    let expect = numerical_case(&cj, &ck, b, sj == sk).unwrap();
                    let got = t.mutation_case_oracle(id(&t, &ck), id(&t, &cj), b as usize).unwrap();
                    assert_eq!(got, expect);
                    fired += 1;
                }
            }
        }
        assert!(fired > 0);
    }

    #[test]
    fn torsion_classes_of_a2() {
        let ctx = fixtures::ctx("a2", 1);
        let t = table("a2");
        let g = ExchangeGraph::build(&ctx, DEFAULT_NODE_CAP).unwrap();
        let mut classes: Vec<Vec<Vec<i64>>> =
            g.nodes().iter().map(|n| t.torsion_json(&t.torsion_class_of_state(&n.state).unwrap()).members).collect();
        classes.sort();
        let mut expect = vec![
            vec![],
            vec![vec![1, 0]],
            vec![vec![1, 0], vec![0, 1], vec![1, 1]],
            vec![vec![0, 1], vec![1, 1]],
            vec![vec![0, 1]],
        ];
        for c in &mut expect {
            c.sort_by_key(|d| id(&t, d));
        }
        expect.sort();
        assert_eq!(classes, expect);
    }

    #[test]
    fn torsion_classes_of_a3_and_closure() {
        let ctx = fixtures::ctx("a3", 1);
        let t = table("a3");
        let g = ExchangeGraph::build(&ctx, DEFAULT_NODE_CAP).unwrap();
        let classes: BTreeSet<BTreeSet<usize>> =
            g.nodes().iter().map(|n| t.torsion_class_of_state(&n.state).unwrap().members).collect();
        assert_eq!(classes.len(), 14);
        for class in &classes {
            for &x in class {
                for y in 0..t.len() {
                    if t.has_epi(x, y) {
                        assert!(class.contains(&y), "quotient {:?} of {:?}", t.get(y).dim, t.get(x).dim);
                    }
                }
            }
        }
    }

    #[test]
    fn chambers() {
        let t = table("a2");
        let init = crate::mutation::MutationState::initial(&fixtures::ctx("a2", 1));
        let terminal = init.replay(&[0, 1]).unwrap();
        let rep = t.verify_chamber(&terminal).unwrap();
        let dims: BTreeSet<Vec<i64>> = rep.dual_bricks.iter().map(|&x| t.get(x).dim.clone()).collect();
        assert_eq!(dims, [vec![1, 0], vec![0, 1]].into_iter().collect());
        assert!(rep.interior_clear);
        for name in ["a2", "a3"] {
            let t = table(name);
            let g = ExchangeGraph::build(&fixtures::ctx(name, 1), DEFAULT_NODE_CAP).unwrap();
            for node in g.nodes() {
                let rep = t.verify_chamber(&node.state).unwrap();
                assert!(rep.interior_clear);
                for (j, &x) in rep.dual_bricks.iter().enumerate() {
                    assert_eq!(t.get(x).dim, node.state.abs_column(j));
                }
            }
        }
    }

    #[test]
    fn mgs_crossings_build_torsion_chains() {
        for name in ["a2", "a3"] {
            let ctx = fixtures::ctx(name, 1);
            let t = table(name);
            let mgs = enumerate_mgs(&ctx, 20).unwrap();
            for rec in &mgs.records {
                let mut st = crate::mutation::MutationState::initial(&ctx);
                let mut prev = t.torsion_class_of_state(&st).unwrap().members;
                for (&k, dim) in rec.mutations.iter().zip(rec.crossing_dims()) {
                    st = st.mu_plus(k).unwrap();
                    let next = t.torsion_class_of_state(&st).unwrap().members;
                    let added: Vec<usize> = next.difference(&prev).copied().collect();
                    assert!(prev.is_subset(&next));
                    assert!(added.contains(&id(&t, &dim)));
                    prev = next;
                }
                assert_eq!(prev.len(), t.len());
            }
        }
    }

    #[test]
    fn arrow_deletion() {
        let a3 = ValuedQuiver::resolve("a3").unwrap();
        let sub = ValuedQuiver::from_arrows("a2xa1", 3, &[(1, 0)]).unwrap();
        let rep = restricted_walls(&a3, &sub).unwrap();
        assert_eq!(rep.checked, 4);
        assert!(rep.violations.is_empty(), "{:?}", rep.violations);
        let a2 = ValuedQuiver::resolve("a2").unwrap();
        let bare = ValuedQuiver::from_arrows("a1xa1", 2, &[]).unwrap();
        assert!(restricted_walls(&a2, &bare).unwrap().violations.is_empty());
        assert!(restricted_walls(&a2, &a2).unwrap().violations.is_empty());
        let flipped = ValuedQuiver::from_arrows("a2op", 2, &[(0, 1)]).unwrap();
        assert!(!restricted_walls(&a2, &flipped).unwrap().violations.is_empty());
    }

    #[test]
    fn names() {
        let q = ValuedQuiver::resolve("a3").unwrap();
        assert_eq!(module_name(&q, &[0, 1, 1], "PIS"), "I3");
        assert_eq!(module_name(&q, &[0, 0, 1], "PIS"), "P3");
        assert_eq!(module_name(&q, &[0, 0, 1], "SIP"), "S3");
        assert_eq!(module_name(&q, &[1, 1, 1], "SIP"), "P2");
    }
}
