//! Exhaustive barrier packing for small graphs, used as a test oracle.
//!
//! Independent of the cut-ray bookkeeping: each directed edge's wrap count is
//! recomputed from plain polar angles, a Held–Karp style sweep finds every
//! vertex subset that a single barrier can span exactly, and a subset DP picks
//! the largest disjoint family.

use std::f64::consts::TAU;

use super::count::BarrierCount;
use super::CoverageGraph;
use crate::deployment::Point;
use crate::error::{Error, Result};

pub const ORACLE_MAX_VERTICES: usize = 14;

fn polar(p: Point) -> f64 {
    p.y.atan2(p.x)
}

/// Whole turns picked up by the polar angle when walking straight from `p` to
/// `q` (the straight segment never subtends more than half a turn).
fn wrap(p: Point, q: Point) -> i32 {
    let swept = (p.x * q.y - p.y * q.x).atan2(p.x * q.x + p.y * q.y);
    ((polar(p) + swept - polar(q)) / TAU).round() as i32
}

pub fn brute_force_barriers(graph: &CoverageGraph) -> Result<BarrierCount> {
    let n = graph.vertex_count();
    if n > ORACLE_MAX_VERTICES {
        return Err(Error::OracleBudget {
            vertices: n,
            budget: ORACLE_MAX_VERTICES,
        });
    }
    if n < 3 {
        return Ok(BarrierCount {
            k: 0,
            witness: Vec::new(),
            upper_bound: 0,
            exact: true,
        });
    }
    let pos = graph.positions();
    let mut adj = vec![vec![None; n]; n];
    for u in 0..n {
        for v in 0..n {
            if u != v && graph.has_edge(u, v) {
                adj[u][v] = Some(wrap(pos[u], pos[v]));
            }
        }
    }

    // reach[mask * n + v]: bitset of net turns (offset by n) over simple paths
    // from lowest(mask) through exactly `mask`, ending at v.
    let full = 1usize << n;
    let mut reach = vec![0u32; full * n];
    let mut spans = vec![false; full];
    for s in 0..n {
        reach[(1 << s) * n + s] = 1 << n;
    }
    for mask in 1..full {
        let s = mask.trailing_zeros() as usize;
        for v in 0..n {
            let turns = reach[mask * n + v];
            if turns == 0 {
                continue;
            }
            if mask.count_ones() >= 3 {
                if let Some(w) = adj[v][s] {
                    let closed = shift(turns, w);
                    if closed & ((1 << (n + 1)) | (1 << (n - 1))) != 0 {
                        spans[mask] = true;
                    }
                }
            }
            for (w, step) in adj[v].iter().enumerate() {
                if let Some(step) = step {
                    if w > s && mask & (1 << w) == 0 {
                        reach[(mask | 1 << w) * n + w] |= shift(turns, *step);
                    }
                }
            }
        }
    }

    // best[mask]: largest family of disjoint spanned subsets inside mask.
    let mut best = vec![0u8; full];
    let mut choice = vec![0usize; full];
    for mask in 1..full {
        let low = mask & mask.wrapping_neg();
        let rest = mask ^ low;
        best[mask] = best[rest];
        choice[mask] = 0;
        let mut sub = rest;
        loop {
            let set = sub | low;
            if spans[set] && best[mask ^ set] + 1 > best[mask] {
                best[mask] = best[mask ^ set] + 1;
                choice[mask] = set;
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }

    let mut witness = Vec::new();
    let mut mask = full - 1;
    while mask != 0 {
        let set = choice[mask];
        if set == 0 {
            mask &= mask - 1;
        } else {
            witness.push(cycle_on(set, &adj).expect("spanned subset has a barrier"));
            mask ^= set;
        }
    }
    Ok(BarrierCount {
        k: best[full - 1] as usize,
        witness,
        upper_bound: best[full - 1] as usize,
        exact: true,
    })
}

fn shift(bits: u32, by: i32) -> u32 {
    if by >= 0 {
        bits << by
    } else {
        bits >> -by
    }
}

/// A counter-clockwise barrier through exactly the vertices of `set`.
fn cycle_on(set: usize, adj: &[Vec<Option<i32>>]) -> Option<Vec<usize>> {
    fn go(
        path: &mut Vec<usize>,
        turns: i32,
        set: usize,
        used: usize,
        adj: &[Vec<Option<i32>>],
    ) -> bool {
        let v = *path.last().unwrap();
        if used == set {
            return adj[v][path[0]].is_some_and(|w| turns + w == 1);
        }
        for (w, step) in adj[v].iter().enumerate() {
            if let Some(step) = step {
                if set & (1 << w) != 0 && used & (1 << w) == 0 {
                    path.push(w);
                    if go(path, turns + step, set, used | 1 << w, adj) {
                        return true;
                    }
                    path.pop();
                }
            }
        }
        false
    }
    let s = set.trailing_zeros() as usize;
    let mut path = vec![s];
    go(&mut path, 0, set, 1 << s, adj).then_some(path)
}
