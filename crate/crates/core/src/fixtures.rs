//! Worked states used by tests, the acceptance suite and `mcf verify`.
//!
//! `st(1)..=st(8)` is the A2 (`1 <- 2`), m = 3 chain reached by
//! mutating at columns 2,2,2,1,1,1,2. `stx`, `sty`, `stz` are three A3
//! (`1 <- 2 -> 3`), m = 3 states related by `sty = mu_2^+(stx)` and
//! `stz = mu_3^+(stx)`.

use std::sync::Arc;

use crate::mutation::{MutationContext, MutationState};
use crate::seed::ValuedQuiver;

pub fn ctx(quiver: &str, m: u32) -> Arc<MutationContext> {
    let q = ValuedQuiver::resolve(quiver).expect("known preset");
    MutationContext::new(q, m).expect("m >= 1")
}

fn state(ctx: &Arc<MutationContext>, b: [&[i64]; 3], c: [&[i64]; 3], s: &[u32], n: usize) -> MutationState {
    MutationState::from_parts(
        ctx,
        b[..n].iter().map(|r| r.to_vec()).collect(),
        c[..n].iter().map(|r| r.to_vec()).collect(),
        s.to_vec(),
    )
    .expect("fixture shapes")
}

/// The i-th matrix (1-based) of the A2, m = 3 chain.
pub fn st(i: usize) -> MutationState {
    let ctx = ctx("a2", 3);
    let pos: [&[i64]; 3] = [&[0, -1], &[1, 0], &[]];
    let neg: [&[i64]; 3] = [&[0, 1], &[-1, 0], &[]];
    let (b, c, s): ([&[i64]; 3], [&[i64]; 3], [u32; 2]) = match i {
        1 => (pos, [&[1, 0], &[0, 1], &[]], [0, 0]),
        2 => (neg, [&[1, 0], &[1, 1], &[]], [0, 1]),
        3 => (pos, [&[1, 0], &[1, 1], &[]], [0, 2]),
        4 => (neg, [&[1, 0], &[1, 1], &[]], [0, 3]),
        5 => (pos, [&[1, 0], &[1, 1], &[]], [1, 3]),
        6 => (neg, [&[1, 0], &[1, 1], &[]], [2, 3]),
        7 => (pos, [&[1, 1], &[1, 0], &[]], [3, 2]),
        8 => (neg, [&[0, 1], &[1, 0], &[]], [3, 3]),
        _ => panic!("chain has eight states"),
    };
    state(&ctx, b, c, &s, 2)
}

/// Mutation directions (0-based) leading from `st(i)` to `st(i + 1)`.
pub const A2_CHAIN: [usize; 7] = [1, 1, 1, 0, 0, 0, 1];

/// The two states after mutating the A2, m = 2 initial state twice at column 1.
pub fn a2_m2_chain() -> [MutationState; 2] {
    let ctx = ctx("a2", 2);
    [
        state(&ctx, [&[0, 1], &[-1, 0], &[]], [&[1, 0], &[0, 1], &[]], &[1, 0], 2),
        state(&ctx, [&[0, -1], &[1, 0], &[]], [&[1, 0], &[0, 1], &[]], &[2, 0], 2),
    ]
}

pub fn stx() -> MutationState {
    state(&ctx("a3", 3), [&[0, -1, 1], &[1, 0, -1], &[-1, 1, 0]], [&[0, 1, 0], &[1, 1, 0], &[0, 0, 1]], &[2, 1, 2], 3)
}

pub fn sty() -> MutationState {
    state(&ctx("a3", 3), [&[0, 1, 0], &[-1, 0, 1], &[0, -1, 0]], [&[1, 1, 0], &[0, 1, 0], &[0, 0, 1]], &[1, 2, 2], 3)
}

pub fn stz() -> MutationState {
    state(&ctx("a3", 3), [&[0, -1, -1], &[1, 0, 1], &[1, -1, 0]], [&[0, 1, 0], &[1, 1, 0], &[0, 0, 1]], &[2, 1, 3], 3)
}
