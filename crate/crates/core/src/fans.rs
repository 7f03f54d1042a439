//! m-configurations and silting objects read off mutation states, the
//! horizontal and vertical algebras `H(X)`, `V(X)`, and fan wall sets.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::enumeration::Parity;
use crate::finrep::{self, FinrepError, RepTable, Wall};
use crate::linalg::{self, IntMatrix};
use crate::mutation::{GradedVector, MutationError, MutationState};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FansError {
    #[error("state is not an m-configuration: {0}")]
    NotConfigurable(String),
    #[error("graded duality fails: {0}")]
    DualityViolation(String),
    #[error(transparent)]
    Finrep(#[from] FinrepError),
    #[error(transparent)]
    Mutation(#[from] MutationError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfigItem {
    pub dim: Vec<i64>,
    pub slope: u32,
    pub id: usize,
}

/// `X = E_1(s_1) + ... + E_n(s_n)`; `ordering` lists item indices so that
/// slopes weakly increase and the modules form an exceptional sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MConfiguration {
    pub m: u32,
    pub items: Vec<ConfigItem>,
    pub ordering: Vec<usize>,
}

impl MConfiguration {
    pub fn label(&self, table: &RepTable) -> String {
        self.items
            .iter()
            .map(|it| format!("{}({})", table.module_name(&it.dim, "SIP"), it.slope))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

pub fn configuration_of_state(table: &RepTable, st: &MutationState) -> Result<MConfiguration, FansError> {
    let n = st.n();
    let items: Vec<ConfigItem> = (0..n)
        .map(|j| {
            let dim = st.abs_column(j);
            let id = table.id_of(&dim).ok_or_else(|| {
                FansError::NotConfigurable(format!("column {} is not a positive root: {dim:?}", j + 1))
            })?;
            Ok(ConfigItem { dim, slope: st.slopes()[j], id })
        })
        .collect::<Result<_, FansError>>()?;
    let mut slopes: Vec<u32> = items.iter().map(|it| it.slope).collect();
    slopes.sort_unstable();
    slopes.dedup();
    let mut ordering = Vec::with_capacity(n);
    for s in slopes {
        let mut group: Vec<usize> = (0..n).filter(|&j| items[j].slope == s).collect();
        // A must precede B whenever Hom(A, B) or Ext(A, B) is nonzero.
        while !group.is_empty() {
            let pos = group
                .iter()
                .position(|&a| {
                    group.iter().all(|&b| {
                        b == a
                            || (table.hom_dim(items[b].id, items[a].id) == 0
                                && table.ext_dim(items[b].id, items[a].id) == 0)
                    })
                })
                .ok_or_else(|| FansError::NotConfigurable(format!("no exceptional order at slope {s}")))?;
            ordering.push(group.remove(pos));
        }
    }
    let seq: Vec<usize> = ordering.iter().map(|&j| items[j].id).collect();
    if !table.is_exceptional_sequence(&seq) {
        return Err(FansError::NotConfigurable("modules do not form an exceptional sequence".into()));
    }
    Ok(MConfiguration { m: st.m(), items, ordering })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SummandKind {
    Module,
    ShiftedProjective,
}

/// `T_i = M_i[level]`; `g` is the g-vector of the module `M_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiltingItem {
    pub g: Vec<i64>,
    pub dim: Vec<i64>,
    pub level: u32,
    pub kind: SummandKind,
}

impl SiltingItem {
    pub fn g_tilde(&self) -> GradedVector {
        GradedVector::new(self.g.clone(), i64::from(self.level))
    }

    pub fn g_at_minus_one(&self) -> Vec<i64> {
        self.g_tilde().at_minus_one()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiltingObject {
    pub items: Vec<SiltingItem>,
}

impl SiltingObject {
    pub fn label(&self, q: &crate::seed::ValuedQuiver) -> String {
        self.items
            .iter()
            .map(|t| {
                let name = finrep::module_name(q, &t.dim, "PIS");
                if t.level == 0 {
                    name
                } else {
                    format!("{name}[{}]", t.level)
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// Coefficient and t-power of one graded pairing `g~(T_i)^t D c~(X_j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GradedEntry {
    pub coeff: i64,
    pub power: i64,
}

/// Recovers the silting object dual to a state. At `t = -1` the g-vectors
/// are the columns of `G = (-1)^m D^{-1} (C^t)^{-1} D`, the solution of
/// `G^t D C = (-1)^m D`; each column is matched to `+-g` of a module and the
/// level is read off the sign of the diagonal pairing.
pub fn silting_from_state(st: &MutationState) -> Result<SiltingObject, FansError> {
    let q = st.context().quiver();
    let f = q.symmetrizer();
    let n = st.n();
    let m = st.m();
    let c = st.signed_c_matrix();
    let ct_inv =
        c.transpose().integer_inverse().ok_or_else(|| FansError::DualityViolation("C is not unimodular".into()))?;
    let sign = if m % 2 == 0 { 1 } else { -1 };
    let mut g = IntMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            let num = sign * ct_inv[(a, b)] * f[b];
            if num % f[a] != 0 {
                return Err(FansError::DualityViolation("G is not integral".into()));
            }
            g[(a, b)] = num / f[a];
        }
    }
    let abs_d: Vec<Vec<i64>> = (0..n).map(|j| st.abs_column(j).iter().zip(f).map(|(x, fi)| x * fi).collect()).collect();
    let mut items = Vec::with_capacity(n);
    for i in 0..n {
        let gi = g.column(i);
        let found = [1i64, -1].iter().find_map(|&sgn| {
            let v: Vec<i64> = gi.iter().map(|x| sgn * x).collect();
            let dim = q.module_dim_of_g(&v)?;
            let p = linalg::dot(&v, &abs_d[i]);
            let s = st.slopes()[i];
            let level = if p == f[i] {
                m - s
            } else if p == -f[i] && s < m {
                m - 1 - s
            } else {
                return None;
            };
            let level_sign = if level % 2 == 0 { 1 } else { -1 };
            if level_sign != sgn {
                return None;
            }
            if (0..n).any(|j| j != i && linalg::dot(&v, &abs_d[j]) != 0) {
                return None;
            }
            let is_projective = v.iter().filter(|&&x| x != 0).count() == 1 && v.contains(&1);
            let kind = if level == m { SummandKind::ShiftedProjective } else { SummandKind::Module };
            if level == m && !is_projective {
                return None;
            }
            Some(SiltingItem { g: v, dim, level, kind })
        });
        items.push(found.ok_or_else(|| {
            FansError::DualityViolation(format!("column {} of G, {gi:?}, matches no summand", i + 1))
        })?);
    }
    Ok(SiltingObject { items })
}

/// Full matrix of graded pairings `g~(T_i)^t D c~(X_j)`.
pub fn pairing_matrix(st: &MutationState, t: &SiltingObject) -> Vec<Vec<GradedEntry>> {
    let f = st.context().quiver().symmetrizer();
    let n = st.n();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let dc: Vec<i64> = st.abs_column(j).iter().zip(f).map(|(x, fi)| x * fi).collect();
                    GradedEntry {
                        coeff: linalg::dot(&t.items[i].g, &dc),
                        power: i64::from(t.items[i].level) + i64::from(st.slopes()[j]),
                    }
                })
                .collect()
        })
        .collect()
}

/// Diagonal entries are `+t^m f_i` or `-t^(m-1) f_i`; all others vanish.
pub fn graded_duality_holds(st: &MutationState, t: &SiltingObject) -> bool {
    let f = st.context().quiver().symmetrizer();
    let m = i64::from(st.m());
    pairing_matrix(st, t).iter().enumerate().all(|(i, row)| {
        row.iter().enumerate().all(|(j, e)| {
            if i != j {
                e.coeff == 0
            } else {
                (e.coeff == f[i] && e.power == m) || (e.coeff == -f[i] && e.power == m - 1)
            }
        })
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FanFactor {
    pub slot: u32,
    pub members: Vec<usize>,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FanAlgebra {
    pub parity: Parity,
    pub factors: Vec<FanFactor>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FanFactorJson {
    pub slot: u32,
    pub members: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FanAlgebraJson {
    pub parity: String,
    pub factors: Vec<FanFactorJson>,
}

impl FanAlgebra {
    pub fn to_json(&self, table: &RepTable) -> FanAlgebraJson {
        FanAlgebraJson {
            parity: self.parity.to_string(),
            factors: self
                .factors
                .iter()
                .map(|f| FanFactorJson {
                    slot: f.slot,
                    members: f.members.iter().map(|&i| table.get(i).dim.clone()).collect(),
                })
                .collect(),
        }
    }

    pub fn rank(&self) -> usize {
        self.factors.iter().map(|f| f.rank).sum()
    }

    pub fn label(&self, table: &RepTable) -> String {
        self.factors
            .iter()
            .map(|f| {
                if f.members.is_empty() {
                    "0".to_string()
                } else {
                    let names: Vec<String> =
                        f.members.iter().map(|&i| table.module_name(&table.get(i).dim, "SPI")).collect();
                    format!("<{}>", names.join(","))
                }
            })
            .collect::<Vec<_>>()
            .join(" x ")
    }
}

/// Slopes collected by slot `s`: `{2s, 2s+1}` horizontally, `{2s-1, 2s}`
/// vertically.
fn slot_slopes(parity: Parity, s: u32) -> [i64; 2] {
    let s = i64::from(s);
    match parity {
        Parity::Horizontal => [2 * s, 2 * s + 1],
        Parity::Vertical => [2 * s - 1, 2 * s],
    }
}

fn slot_count(parity: Parity, m: u32) -> u32 {
    match parity {
        Parity::Horizontal => m / 2 + 1,
        Parity::Vertical => (m + 1) / 2 + 1,
    }
}

pub fn fan_algebra(table: &RepTable, x: &MConfiguration, parity: Parity) -> Result<FanAlgebra, FansError> {
    let factors = (0..slot_count(parity, x.m))
        .map(|s| {
            let slopes = slot_slopes(parity, s);
            let seq: Vec<usize> = x
                .ordering
                .iter()
                .filter(|&&j| slopes.contains(&i64::from(x.items[j].slope)))
                .map(|&j| x.items[j].id)
                .collect();
            let members = table.span_of(&seq)?;
            Ok(FanFactor { slot: s, members, rank: seq.len() })
        })
        .collect::<Result<_, FansError>>()?;
    Ok(FanAlgebra { parity, factors })
}

pub fn horizontal_algebra(table: &RepTable, x: &MConfiguration) -> Result<FanAlgebra, FansError> {
    fan_algebra(table, x, Parity::Horizontal)
}

pub fn vertical_algebra(table: &RepTable, x: &MConfiguration) -> Result<FanAlgebra, FansError> {
    fan_algebra(table, x, Parity::Vertical)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HvCheck {
    pub parity: Parity,
    pub holds: bool,
}

/// Compares `H` (for even `s_k`) or `V` (for odd `s_k`) before and after
/// `mu_k^+`.
pub fn check_hv_invariance(table: &RepTable, st: &MutationState, k: usize) -> Result<HvCheck, FansError> {
    let parity = Parity::of_slope(st.slopes()[k]);
    let next = st.mu_plus(k)?;
    let before = fan_algebra(table, &configuration_of_state(table, st)?, parity)?;
    let after = fan_algebra(table, &configuration_of_state(table, &next)?, parity)?;
    Ok(HvCheck { parity, holds: before == after })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FanWall {
    pub wall: Wall,
    pub slot: u32,
    pub negated: bool,
    pub brick: usize,
}

/// Walls of every brick of every factor; vertical walls are negated.
pub fn fan_wall_set(table: &RepTable, x: &MConfiguration, parity: Parity) -> Result<Vec<FanWall>, FansError> {
    let alg = fan_algebra(table, x, parity)?;
    let negated = parity == Parity::Vertical;
    let mut out = Vec::new();
    for factor in &alg.factors {
        for &b in &factor.members {
            let w = table.wall_of(b)?;
            out.push(FanWall { wall: if negated { w.negated() } else { w }, slot: factor.slot, negated, brick: b });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::collections::{BTreeMap, BTreeSet};

    use super::*;
    use crate::enumeration::{ExchangeGraph, DEFAULT_NODE_CAP};
    use crate::fixtures;
    use crate::seed::ValuedQuiver;

    fn table(name: &str) -> RepTable {
        RepTable::build(&ValuedQuiver::resolve(name).unwrap()).unwrap()
    }

    fn dims_slopes(c: &MConfiguration) -> Vec<(Vec<i64>, u32)> {
        c.items.iter().map(|it| (it.dim.clone(), it.slope)).collect()
    }

    #[test]
    fn configurations() {
        let t = table("a3");
        let x = configuration_of_state(&t, &fixtures::stx()).unwrap();
        assert_eq!(dims_slopes(&x), vec![(vec![0, 1, 0], 2), (vec![1, 1, 0], 1), (vec![0, 0, 1], 2)]);
        assert_eq!(x.ordering[0], 1);
        assert_eq!(x.label(&t), "S2(2) + I1(1) + S3(2)");
        let y = configuration_of_state(&t, &fixtures::sty()).unwrap();
        assert_eq!(y.label(&t), "S1(1) + I1(2) + S3(2)");
        let init = MutationState::initial(&fixtures::ctx("a3", 3));
        let c = configuration_of_state(&t, &init).unwrap();
        assert!(c.items.iter().all(|it| it.slope == 0 && it.dim.iter().sum::<i64>() == 1));
    }

    #[test]
    fn silting_objects() {
        let q = ValuedQuiver::resolve("a3").unwrap();
        let tx = silting_from_state(&fixtures::stx()).unwrap();
        assert_eq!(tx.label(&q), "I3[1] + P1[2] + P3[1]");
        let ty = silting_from_state(&fixtures::sty()).unwrap();
        assert_eq!(ty.label(&q), "I3[1] + P2[1] + P3[1]");
        let ctx = fixtures::ctx("a3", 3);
        let init = silting_from_state(&MutationState::initial(&ctx)).unwrap();
        assert!(init.items.iter().all(|t| t.level == 3 && t.kind == SummandKind::ShiftedProjective));
        let g = ExchangeGraph::build(&ctx, DEFAULT_NODE_CAP).unwrap();
        let terminal = &g.nodes()[g.terminals()[0]].state;
        let fin = silting_from_state(terminal).unwrap();
        let mut names: Vec<String> = fin.label(&q).split(" + ").map(String::from).collect();
        names.sort();
        assert_eq!(names, ["P1", "P2", "P3"]);
    }

    #[test]
    fn duality_on_every_reachable_state() {
        for (name, m) in [("a2", 1), ("a2", 2), ("a2", 3), ("a3", 1), ("a3", 2), ("a3", 3), ("b2", 2), ("g2", 1)] {
            let g = ExchangeGraph::build(&fixtures::ctx(name, m), DEFAULT_NODE_CAP).unwrap();
            for node in g.nodes() {
                let t = silting_from_state(&node.state).unwrap();
                assert!(graded_duality_holds(&node.state, &t), "{name} m={m}");
            }
        }
    }

    fn member_dims(t: &RepTable, f: &FanFactor) -> BTreeSet<Vec<i64>> {
        f.members.iter().map(|&i| t.get(i).dim.clone()).collect()
    }

    #[test]
    fn horizontal_algebras() {
        let t = table("a2");
        let init = MutationState::initial(&fixtures::ctx("a2", 3));
        let h = horizontal_algebra(&t, &configuration_of_state(&t, &init).unwrap()).unwrap();
        assert_eq!(h.factors.len(), 2);
        assert_eq!(h.factors[0].members.len(), 3);
        assert!(h.factors[1].members.is_empty());
        assert_eq!(h.rank(), 2);

        let h = horizontal_algebra(&t, &configuration_of_state(&t, &fixtures::st(5)).unwrap()).unwrap();
        assert_eq!(member_dims(&t, &h.factors[0]), [vec![1, 1]].into_iter().collect());
        assert_eq!(member_dims(&t, &h.factors[1]), [vec![0, 1]].into_iter().collect());

        let a3 = table("a3");
        let hx = horizontal_algebra(&a3, &configuration_of_state(&a3, &fixtures::stx()).unwrap()).unwrap();
        let i1 = a3.id_of(&[1, 1, 0]).unwrap();
        assert_eq!(hx.factors[0].members, vec![i1]);
        let perp: BTreeSet<usize> = a3.perp_category(&[i1], crate::finrep::Side::Left).into_iter().collect();
        assert_eq!(hx.factors[1].members.iter().copied().collect::<BTreeSet<_>>(), perp);
    }

    /// The five horizontal algebras of the A2, m = 3 graph.
    #[test]
    fn a2_horizontal_list() {
        let t = table("a2");
        let g = ExchangeGraph::build(&fixtures::ctx("a2", 3), DEFAULT_NODE_CAP).unwrap();
        let algebras: BTreeSet<Vec<BTreeSet<Vec<i64>>>> = g
            .nodes()
            .iter()
            .map(|n| {
                let h = horizontal_algebra(&t, &configuration_of_state(&t, &n.state).unwrap()).unwrap();
                h.factors.iter().map(|f| member_dims(&t, f)).collect()
            })
            .collect();
        let set = |v: &[[i64; 2]]| v.iter().map(|d| d.to_vec()).collect::<BTreeSet<_>>();
        let all = set(&[[1, 0], [0, 1], [1, 1]]);
        let expect: BTreeSet<Vec<BTreeSet<Vec<i64>>>> = [
            vec![all.clone(), set(&[])],
            vec![set(&[[0, 1]]), set(&[[1, 0]])],
            vec![set(&[]), all],
            vec![set(&[[1, 0]]), set(&[[1, 1]])],
            vec![set(&[[1, 1]]), set(&[[0, 1]])],
        ]
        .into_iter()
        .collect();
        assert_eq!(algebras, expect);
    }

    #[test]
    fn invariance_examples() {
        let t = table("a3");
        let r = check_hv_invariance(&t, &fixtures::stx(), 2).unwrap();
        assert_eq!(r, HvCheck { parity: Parity::Horizontal, holds: true });
        let r = check_hv_invariance(&t, &fixtures::stx(), 1).unwrap();
        assert_eq!(r, HvCheck { parity: Parity::Vertical, holds: true });
    }

    #[test]
    fn invariance_and_components_on_a2() {
        let t = table("a2");
        let g = ExchangeGraph::build(&fixtures::ctx("a2", 3), DEFAULT_NODE_CAP).unwrap();
        for node in g.nodes() {
            for k in 0..2 {
                if node.state.slopes()[k] < 3 {
                    assert!(check_hv_invariance(&t, &node.state, k).unwrap().holds);
                }
            }
        }
        for parity in [Parity::Horizontal, Parity::Vertical] {
            let mut groups: BTreeMap<FanAlgebra, Vec<usize>> = BTreeMap::new();
            for (i, node) in g.nodes().iter().enumerate() {
                let alg = fan_algebra(&t, &configuration_of_state(&t, &node.state).unwrap(), parity).unwrap();
                groups.entry(alg).or_default().push(i);
            }
            let mut by_alg: Vec<Vec<usize>> = groups.into_values().collect();
            by_alg.sort();
            let mut comps = g.fan_components(parity);
            comps.sort();
            assert_eq!(by_alg, comps, "{parity}");
        }
    }

    #[test]
    fn fan_walls() {
        let t = table("a2");
        let init = MutationState::initial(&fixtures::ctx("a2", 3));
        let x = configuration_of_state(&t, &init).unwrap();
        let walls = fan_wall_set(&t, &x, Parity::Horizontal).unwrap();
        assert_eq!(walls.len(), 3);
        assert!(walls.iter().all(|w| w.slot == 0 && !w.negated));
        let a3 = table("a3");
        let init = MutationState::initial(&fixtures::ctx("a3", 1));
        let x = configuration_of_state(&a3, &init).unwrap();
        let walls = fan_wall_set(&a3, &x, Parity::Vertical).unwrap();
        assert_eq!(walls.len(), 6);
        assert!(walls.iter().all(|w| w.negated && w.wall.normal.iter().all(|&c| c <= 0)));
        let json = serde_json::to_value(
            horizontal_algebra(&a3, &configuration_of_state(&a3, &fixtures::stx()).unwrap()).unwrap().to_json(&a3),
        )
        .unwrap();
        assert_eq!(json["parity"], "horizontal");
        assert_eq!(json["factors"][0]["members"], serde_json::json!([[1, 1, 0]]));
    }
}
