use std::collections::BTreeSet;

use mcf_core::enumeration::canonical_key;
use mcf_core::finrep::{positive_roots, RepTable};
use mcf_core::fixtures;
use mcf_core::render::{build_scene, render_picture, scene_stats, Projection, RenderOptions, SceneWall, Style};
use mcf_core::{MutationState, ValuedQuiver};
use proptest::prelude::*;

const QUIVERS: [&str; 6] = ["a2", "a3", "a4", "d4", "b2", "g2"];

/// Follows a random walk of legal mutations, choosing positive or negative
/// steps by the low bit of each draw.
fn walk(name: &str, m: u32, steps: &[u32]) -> Vec<MutationState> {
    let mut st = MutationState::initial(&fixtures::ctx(name, m));
    let mut seen = vec![st.clone()];
    for &r in steps {
        let k = (r as usize >> 1) % st.n();
        let next = if r & 1 == 0 { st.mu_plus(k) } else { st.mu_minus(k) };
        if let Ok(next) = next {
            st = next;
            seen.push(st.clone());
        }
    }
    seen
}

fn table(name: &str) -> RepTable {
    RepTable::build(&ValuedQuiver::resolve(name).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn states_stay_valid(q in 0..QUIVERS.len(), m in 1u32..=3, steps in prop::collection::vec(any::<u32>(), 0..40)) {
        for st in walk(QUIVERS[q], m, &steps) {
            let report = st.validate();
            prop_assert!(report.valid, "{:?}", report.violations);
            let c = st.signed_c_matrix();
            for j in 0..st.n() {
                let col = c.column(j);
                prop_assert!(col.iter().all(|&x| x >= 0) || col.iter().all(|&x| x <= 0));
            }
        }
    }

    #[test]
    fn mutations_invert(q in 0..QUIVERS.len(), m in 1u32..=3, steps in prop::collection::vec(any::<u32>(), 0..30)) {
        for st in walk(QUIVERS[q], m, &steps) {
            for k in 0..st.n() {
                if let Ok(up) = st.mu_plus(k) {
                    prop_assert_eq!(up.mu_minus(k).unwrap(), st.clone());
                }
                if let Ok(down) = st.mu_minus(k) {
                    prop_assert_eq!(down.mu_plus(k).unwrap(), st.clone());
                }
            }
        }
    }

    #[test]
    fn c_columns_are_roots(q in 0..4usize, m in 1u32..=3, steps in prop::collection::vec(any::<u32>(), 0..40)) {
        let name = QUIVERS[q];
        let roots: BTreeSet<Vec<i64>> =
            positive_roots(&ValuedQuiver::resolve(name).unwrap()).unwrap().into_iter().collect();
        for st in walk(name, m, &steps) {
            for j in 0..st.n() {
                prop_assert!(roots.contains(&st.abs_column(j)));
            }
        }
    }

    #[test]
    fn canonical_key_ignores_labels(m in 1u32..=3, steps in prop::collection::vec(any::<u32>(), 0..30), perm in Just(vec![0usize, 1, 2]).prop_shuffle()) {
        let st = walk("a3", m, &steps).pop().unwrap();
        prop_assert_eq!(canonical_key(&st.relabel(&perm)), canonical_key(&st));
    }

    #[test]
    fn hom_minus_ext_is_euler(q in 0..4usize, x in any::<prop::sample::Index>(), y in any::<prop::sample::Index>()) {
        let t = table(QUIVERS[q]);
        let (x, y) = (x.index(t.len()), y.index(t.len()));
        let euler = t.quiver().euler_pairing(&t.get(x).dim, &t.get(y).dim).unwrap();
        prop_assert_eq!(t.hom_dim(x, y) as i64 - t.ext_dim(x, y) as i64, euler);
        prop_assert_eq!(t.hom_dim(x, y), t.hom_dim_direct(x, y));
    }

    #[test]
    fn renderer_is_deterministic(p in prop::array::uniform3(-1.0f64..-0.2)) {
        let t = table("a3");
        let walls: Vec<SceneWall> = (0..t.len())
            .map(|i| SceneWall { id: i, wall: t.wall_of(i).unwrap(), style: Style::Black, label: None })
            .collect();
        let opts = RenderOptions { projection: Projection::from_pole(p).unwrap(), ..RenderOptions::default() };
        prop_assert_eq!(render_picture(3, &walls, &opts).unwrap(), render_picture(3, &walls, &opts).unwrap());
        prop_assert_eq!(scene_stats(&build_scene(3, &walls, &opts).unwrap()).arc_group_count, t.len());
    }
}
