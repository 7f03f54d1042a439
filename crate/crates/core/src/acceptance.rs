//! The acceptance suite: eleven numbered checks against the worked
//! examples, each reporting pass or fail with a short detail line.
//! Shared by the `acceptance` integration test and `mcf verify`.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use serde::Serialize;

use crate::dilog::{check_pentagon, dt_invariant_check};
use crate::enumeration::{
    enumerate_mgs, fuss_catalan_usize, longest_mgs, ExchangeGraph, MgsRecord, Parity, DEFAULT_NODE_CAP,
};
use crate::fans::{check_hv_invariance, configuration_of_state, fan_algebra, graded_duality_holds, silting_from_state};
use crate::finrep::{positive_roots, restricted_walls, Object, RepTable};
use crate::fixtures;
use crate::mutation::MutationState;
use crate::render::{build_scene, render_picture, scene_stats, RenderOptions, SceneWall, Style};
use crate::seed::ValuedQuiver;

pub const CRITERIA: [&str; 11] = [
    "A2 m=1 exchange graph is a 5-cycle",
    "m-cluster counts",
    "worked matrices",
    "longest maximal green sequences",
    "affine A2 maximal green sequences",
    "graded tropical duality",
    "torsion classes",
    "mutation fans",
    "H/V invariance",
    "quantum dilogarithm identities",
    "property suites",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub millis: u128,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        format!("{verdict} criterion {:>2}: {} ({}, {} ms)", self.id, self.name, self.detail, self.millis)
    }
}

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn graph(name: &str, m: u32) -> Result<ExchangeGraph, String> {
    ExchangeGraph::build(&fixtures::ctx(name, m), DEFAULT_NODE_CAP).map_err(err)
}

fn table(name: &str) -> Result<RepTable, String> {
    RepTable::build(&ValuedQuiver::resolve(name).map_err(err)?).map_err(err)
}

fn same_state(a: &MutationState, b: &MutationState) -> bool {
    a.b() == b.b() && a.abs_c() == b.abs_c() && a.slopes() == b.slopes()
}

fn c1() -> Outcome {
    let g = graph("a2", 1)?;
    ensure!(g.node_count() == 5, "{} nodes", g.node_count());
    let adj = g.undirected_adjacency();
    ensure!(adj.iter().all(|n| n.len() == 2), "degrees {:?}", adj.iter().map(Vec::len).collect::<Vec<_>>());
    let (mut prev, mut cur, mut steps) = (usize::MAX, 0, 0);
    loop {
        let next = *adj[cur].iter().find(|&&x| x != prev).ok_or("dead end")?;
        prev = cur;
        cur = next;
        steps += 1;
        if cur == 0 || steps > 5 {
            break;
        }
    }
    ensure!(steps == 5, "walk closed after {steps} steps");
    Ok("5 nodes, one cycle".into())
}

fn c2() -> Outcome {
    let a2 = graph("a2", 3)?.node_count();
    let a3 = graph("a3", 3)?.node_count();
    let (f2, f3) = (fuss_catalan_usize(2, 3), fuss_catalan_usize(3, 3));
    ensure!(a2 == 22 && f2 == 22, "A2 m=3: {a2} nodes, Fuss-Catalan {f2}");
    ensure!(a3 == 140 && f3 == 140, "A3 m=3: {a3} nodes, Fuss-Catalan {f3}");
    Ok("22 and 140".into())
}

fn c3() -> Outcome {
    let mut st = fixtures::st(1);
    ensure!(same_state(&st, &MutationState::initial(&fixtures::ctx("a2", 3))), "ST1 is not initial");
    for (i, &k) in fixtures::A2_CHAIN.iter().enumerate() {
        st = st.mu_plus(k).map_err(err)?;
        ensure!(same_state(&st, &fixtures::st(i + 2)), "ST{} differs:\n{st}", i + 2);
    }
    let init = MutationState::initial(&fixtures::ctx("a2", 2));
    let first = init.mu_plus(0).map_err(err)?;
    let second = first.mu_plus(0).map_err(err)?;
    let [e1, e2] = fixtures::a2_m2_chain();
    ensure!(same_state(&first, &e1) && same_state(&second, &e2), "A2 m=2 chain differs");
    let x = fixtures::stx();
    ensure!(same_state(&x.mu_plus(1).map_err(err)?, &fixtures::sty()), "mu_2(STX) differs from STY");
    ensure!(same_state(&x.mu_plus(2).map_err(err)?, &fixtures::stz()), "mu_3(STX) differs from STZ");
    Ok("ST1..ST8, A2 m=2, STY, STZ".into())
}

fn c4() -> Outcome {
    let a2 = longest_mgs(&fixtures::ctx("a2", 3), DEFAULT_NODE_CAP).map_err(err)?;
    let a3 = longest_mgs(&fixtures::ctx("a3", 3), DEFAULT_NODE_CAP).map_err(err)?;
    ensure!(a2 == 9 && a3 == 18, "longest {a2} and {a3}");
    Ok("9 and 18".into())
}

/// Mutation sequences (1-based) and crossed dimension vectors of the five
/// maximal green sequences of affine A2.
pub fn a2tilde_chart() -> Vec<(Vec<usize>, Vec<Vec<i64>>)> {
    let rows: [(&[usize], &[[i64; 3]]); 5] = [
        (&[2, 1, 3, 2, 3], &[[0, 1, 0], [1, 1, 0], [0, 0, 1], [1, 0, 1], [1, 0, 0]]),
        (&[2, 1, 2, 3], &[[0, 1, 0], [1, 1, 0], [1, 0, 0], [0, 0, 1]]),
        (&[1, 2, 3], &[[1, 0, 0], [0, 1, 0], [0, 0, 1]]),
        (&[1, 3, 2, 3], &[[1, 0, 0], [0, 0, 1], [0, 1, 1], [0, 1, 0]]),
        (&[3, 1, 3, 2, 1], &[[0, 0, 1], [1, 0, 1], [1, 0, 0], [0, 1, 1], [0, 1, 0]]),
    ];
    rows.iter().map(|(ks, dims)| (ks.to_vec(), dims.iter().map(|d| d.to_vec()).collect())).collect()
}

fn a2tilde_records() -> Result<Vec<MgsRecord>, String> {
    Ok(enumerate_mgs(&fixtures::ctx("a2tilde", 1), 10).map_err(err)?.records)
}

fn c5() -> Outcome {
    let records = a2tilde_records()?;
    let got: BTreeSet<(Vec<usize>, Vec<Vec<i64>>)> =
        records.iter().map(|r| (r.mutations.iter().map(|k| k + 1).collect(), r.crossing_dims())).collect();
    let expect: BTreeSet<_> = a2tilde_chart().into_iter().collect();
    ensure!(records.len() == 5, "{} sequences", records.len());
    ensure!(got == expect, "sequences {got:?}");
    let mut lens: Vec<usize> = records.iter().map(MgsRecord::len).collect();
    lens.sort_unstable();
    Ok(format!("lengths {lens:?}"))
}

fn c6() -> Outcome {
    let mut states = 0;
    for name in ["a2", "a3"] {
        for m in 1..=3 {
            for node in graph(name, m)?.nodes() {
                let t = silting_from_state(&node.state).map_err(|e| format!("{name} m={m}: {e}"))?;
                ensure!(graded_duality_holds(&node.state, &t), "{name} m={m}: duality fails at\n{}", node.state);
                states += 1;
            }
        }
    }
    let q = ValuedQuiver::resolve("a3").map_err(err)?;
    let label = silting_from_state(&fixtures::stx()).map_err(err)?.label(&q);
    ensure!(label == "I3[1] + P1[2] + P3[1]", "STX gives {label}");
    Ok(format!("{states} states"))
}

fn c7() -> Outcome {
    let t = table("a2")?;
    let g = graph("a2", 1)?;
    let mut got = BTreeSet::new();
    for node in g.nodes() {
        let class = t.torsion_class_of_state(&node.state).map_err(err)?;
        let dims: BTreeSet<Vec<i64>> = class.members.iter().map(|&x| t.get(x).dim.clone()).collect();
        got.insert(dims);
    }
    let set = |v: &[[i64; 2]]| v.iter().map(|d| d.to_vec()).collect::<BTreeSet<_>>();
    let expect: BTreeSet<BTreeSet<Vec<i64>>> =
        [set(&[]), set(&[[1, 0]]), set(&[[0, 1]]), set(&[[0, 1], [1, 1]]), set(&[[1, 0], [0, 1], [1, 1]])]
            .into_iter()
            .collect();
    ensure!(got == expect, "A2 classes {got:?}");
    let t = table("a3")?;
    let classes: BTreeSet<BTreeSet<usize>> = graph("a3", 1)?
        .nodes()
        .iter()
        .map(|n| t.torsion_class_of_state(&n.state).map(|c| c.members))
        .collect::<Result<_, _>>()
        .map_err(err)?;
    ensure!(classes.len() == 14, "A3 gives {} classes", classes.len());
    Ok("5 and 14 classes".into())
}

fn partition(mut groups: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    for g in &mut groups {
        g.sort_unstable();
    }
    groups.sort();
    groups
}

/// Checks that fan components coincide with grouping by `H(X)` or `V(X)`.
fn grouping_matches(name: &str, g: &ExchangeGraph, parity: Parity) -> Result<usize, String> {
    let t = table(name)?;
    let mut by_algebra: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, node) in g.nodes().iter().enumerate() {
        let x = configuration_of_state(&t, &node.state).map_err(err)?;
        let a = fan_algebra(&t, &x, parity).map_err(err)?;
        let key = serde_json::to_string(&a.to_json(&t)).map_err(err)?;
        by_algebra.entry(key).or_default().push(i);
    }
    let comps = partition(g.fan_components(parity));
    ensure!(
        partition(by_algebra.into_values().collect()) == comps,
        "{name} {parity:?}: components differ from algebra grouping"
    );
    Ok(comps.len())
}

fn c8() -> Outcome {
    let g = graph("a2", 3)?;
    let sizes = |p: Parity| {
        let mut s: Vec<usize> = g.fan_components(p).iter().map(Vec::len).collect();
        s.sort_unstable_by(|a, b| b.cmp(a));
        s
    };
    ensure!(sizes(Parity::Horizontal) == [5, 5, 4, 4, 4], "A2 horizontal {:?}", sizes(Parity::Horizontal));
    ensure!(
        sizes(Parity::Vertical) == [5, 2, 2, 2, 2, 2, 2, 1, 1, 1, 1, 1],
        "A2 vertical {:?}",
        sizes(Parity::Vertical)
    );
    grouping_matches("a2", &g, Parity::Horizontal)?;
    grouping_matches("a2", &g, Parity::Vertical)?;
    let g = graph("a3", 3)?;
    let h = grouping_matches("a3", &g, Parity::Horizontal)?;
    let v = grouping_matches("a3", &g, Parity::Vertical)?;
    ensure!(h == 14 && v == 55, "A3 gives {h} horizontal and {v} vertical");
    Ok("A2 5/12, A3 14/55, grouping agrees".into())
}

fn c9() -> Outcome {
    let mut checked = 0;
    for name in ["a2", "a3"] {
        let t = table(name)?;
        for node in graph(name, 3)?.nodes() {
            for k in 0..node.state.n() {
                if node.state.mu_plus(k).is_err() {
                    continue;
                }
                let c = check_hv_invariance(&t, &node.state, k).map_err(err)?;
                ensure!(c.holds, "{name}: {:?} changes under mu_{} at\n{}", c.parity, k + 1, node.state);
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} mutations"))
}

fn c10() -> Outcome {
    let t = table("a2")?;
    let (s1, s2, p2) =
        (t.require(&[1, 0]).map_err(err)?, t.require(&[0, 1]).map_err(err)?, t.require(&[1, 1]).map_err(err)?);
    ensure!(check_pentagon(&t, s2, s1, p2, 10).map_err(err)?, "A2 pentagon fails at N=10");
    let ctx = fixtures::ctx("a2tilde", 1);
    let rep = dt_invariant_check(&ctx, &a2tilde_records()?, 8).map_err(err)?;
    ensure!(rep.consistent(), "affine A2 products fall into {} classes", rep.classes.len());
    let ctx = fixtures::ctx("a3", 1);
    let mgs = enumerate_mgs(&ctx, 20).map_err(err)?;
    ensure!(!mgs.truncated, "A3 enumeration truncated");
    let rep = dt_invariant_check(&ctx, &mgs.records, 6).map_err(err)?;
    ensure!(rep.consistent(), "A3 products fall into {} classes", rep.classes.len());
    Ok(format!("pentagon, 5 affine A2 products, {} A3 products", mgs.records.len()))
}

fn mutation_properties() -> Result<usize, String> {
    let mut states = 0;
    for (name, m) in [("a2", 1), ("a2", 2), ("a2", 3), ("a3", 1), ("a3", 2), ("a3", 3), ("b2", 2), ("g2", 1)] {
        let g = graph(name, m)?;
        let q = g.context().quiver();
        // root systems are computed for simply-laced types only
        let roots: Option<BTreeSet<Vec<i64>>> =
            if q.is_simply_laced() { Some(positive_roots(q).map_err(err)?.into_iter().collect()) } else { None };
        for node in g.nodes() {
            let st = &node.state;
            let c = st.signed_c_matrix();
            for j in 0..st.n() {
                let col = c.column(j);
                ensure!(
                    col.iter().all(|&x| x >= 0) || col.iter().all(|&x| x <= 0),
                    "{name} m={m}: column {j} not sign coherent"
                );
                ensure!(
                    roots.as_ref().is_none_or(|r| r.contains(&st.abs_column(j))),
                    "{name} m={m}: |c_{j}| is not a root"
                );
                if let Ok(next) = st.mu_plus(j) {
                    let back = next.mu_minus(j).map_err(err)?;
                    ensure!(same_state(&back, st), "{name} m={m}: round trip fails at {j}");
                }
            }
            let det = c.det();
            ensure!(det == 1.into() || det == (-1).into(), "{name} m={m}: det C = {det}");
            states += 1;
        }
    }
    Ok(states)
}

fn module_properties() -> Result<usize, String> {
    let mut pairs = 0;
    for name in ["a2", "a3", "a4", "d4"] {
        let t = table(name)?;
        let q = t.quiver();
        for x in 0..t.len() {
            for y in 0..t.len() {
                let euler = q.euler_pairing(&t.get(x).dim, &t.get(y).dim).map_err(err)?;
                let lhs = t.hom_dim_direct(x, y) as i64 - t.ext_dim(x, y) as i64;
                ensure!(lhs == euler, "{name}: hom - ext = {lhs} but euler = {euler}");
                pairs += 1;
            }
        }
    }
    for name in ["a2", "a3"] {
        let t = table(name)?;
        for m in 0..t.len() {
            let objects = (0..t.len()).map(Object::Module).chain((0..t.quiver().n()).map(Object::ShiftedProjective));
            for x in objects {
                ensure!(t.check_wall_membership(x, m).map_err(err)?.agree(), "{name}: membership disagrees");
            }
        }
    }
    let a3 = ValuedQuiver::resolve("a3").map_err(err)?;
    let sub = ValuedQuiver::from_arrows("a2xa1", 3, &[(1, 0)]).map_err(err)?;
    let rep = restricted_walls(&a3, &sub).map_err(err)?;
    ensure!(rep.violations.is_empty(), "arrow deletion violations {:?}", rep.violations);
    Ok(pairs)
}

fn render_properties() -> Result<(), String> {
    for (name, rank) in [("a2", 2), ("a3", 3)] {
        let t = table(name)?;
        let walls: Vec<SceneWall> = (0..t.len())
            .map(|i| t.wall_of(i).map(|wall| SceneWall { id: i, wall, style: Style::Black, label: None }))
            .collect::<Result<_, _>>()
            .map_err(err)?;
        let opts = RenderOptions::default();
        let a = render_picture(rank, &walls, &opts).map_err(err)?;
        let b = render_picture(rank, &walls, &opts).map_err(err)?;
        ensure!(a == b, "{name}: rendering is not deterministic");
        let stats = scene_stats(&build_scene(rank, &walls, &opts).map_err(err)?);
        ensure!(
            stats.arc_group_count == t.len(),
            "{name}: {} arc groups for {} bricks",
            stats.arc_group_count,
            t.len()
        );
    }
    Ok(())
}

fn c11() -> Outcome {
    let states = mutation_properties()?;
    let pairs = module_properties()?;
    render_properties()?;
    Ok(format!("{states} states, {pairs} module pairs"))
}

/// Runs criterion `id` (1-based).
pub fn run_criterion(id: usize) -> Option<CriterionResult> {
    let f: fn() -> Outcome = match id {
        1 => c1,
        2 => c2,
        3 => c3,
        4 => c4,
        5 => c5,
        6 => c6,
        7 => c7,
        8 => c8,
        9 => c9,
        10 => c10,
        11 => c11,
        _ => return None,
    };
    let start = Instant::now();
    let outcome = f();
    let millis = start.elapsed().as_millis();
    let (passed, detail) = match outcome {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    Some(CriterionResult { id, name: CRITERIA[id - 1], passed, detail, millis })
}

pub fn run_all() -> Vec<CriterionResult> {
    (1..=CRITERIA.len()).filter_map(run_criterion).collect()
}
