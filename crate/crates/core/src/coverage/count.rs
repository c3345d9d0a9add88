//! Maximum packing of vertex-disjoint barriers.
//!
//! Every barrier, oriented counter-clockwise, crosses the cut ray a net `+1`
//! times, so somewhere along it two `+1` crossings are consecutive. The stretch
//! between them is a path that avoids the ray and runs from the head of a
//! `+1` crossing edge to the tail of another. Splitting every sensor into an
//! in/out pair with unit capacity turns "how many sensor-disjoint such paths
//! exist" into a max-flow problem, and its value bounds the barrier count from
//! above. Its minimum vertex cut meets every barrier.
//!
//! Paths do not always close into barriers on their own (a path may end at
//! the tail of a different crossing edge than the one it started from), so
//! the count itself comes from a branch and bound: greedy packings give the
//! lower bound, the flow gives the upper bound, and the search branches on a
//! min-cut sensor being used by some barrier or not at all.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use serde::{Deserialize, Serialize};

use super::flow::Dinic;
use super::CoverageGraph;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BarrierCount {
    /// Number of vertex-disjoint barriers found.
    pub k: usize,
    /// One sensor cycle per barrier, in counter-clockwise order.
    pub witness: Vec<Vec<usize>>,
    /// Proven upper bound on the optimum; equals `k` when `exact`.
    pub upper_bound: usize,
    /// False only when the search budget ran out before `k` was proven
    /// optimal.
    pub exact: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountOptions {
    /// Branch-and-bound nodes explored before giving up on optimality.
    pub node_budget: usize,
    /// DFS steps allowed when listing the barriers through a branch sensor.
    pub enumeration_budget: usize,
}

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions {
            node_budget: 2_000,
            enumeration_budget: 200_000,
        }
    }
}

impl CountOptions {
    /// A small budget for bulk simulation, where most time goes to fields
    /// whose optimum cannot be proven quickly anyway.
    pub fn sweep() -> Self {
        CountOptions {
            node_budget: 40,
            enumeration_budget: 20_000,
        }
    }
}

pub fn count_barriers(graph: &CoverageGraph) -> BarrierCount {
    count_barriers_with(graph, &CountOptions::default())
}

pub fn count_barriers_with(graph: &CoverageGraph, opts: &CountOptions) -> BarrierCount {
    let mut alive = vec![true; graph.vertex_count()];
    let mut search = Search::new(graph, *opts);
    let root = search.bound(&alive);
    let first = search.greedy(&alive, &root);
    let start = search.improve(&alive, first);
    let witness = if start.len() >= root.value {
        start
    } else {
        let found = search.solve(&mut alive, start.len() as isize);
        if found.len() > start.len() {
            found
        } else {
            start
        }
    };
    let k = witness.len();
    let exact = !search.exhausted || k == root.value;
    BarrierCount {
        k,
        witness,
        upper_bound: if exact { k } else { root.value },
        exact,
    }
}

/// Extra cut rays tried for the flow bound, as quarter turns from the
/// graph's own ray.
const EXTRA_RAYS: usize = 3;

struct Bound {
    value: usize,
    ray: usize,
    paths: Vec<Vec<usize>>,
    cut: Vec<usize>,
}

struct Search<'g> {
    g: &'g CoverageGraph,
    opts: CountOptions,
    /// Crossing signs per ray, parallel to the adjacency lists.
    rays: Vec<Vec<Vec<i8>>>,
    nodes: usize,
    exhausted: bool,
}

impl<'g> Search<'g> {
    fn new(g: &'g CoverageGraph, opts: CountOptions) -> Self {
        let own: Vec<Vec<i8>> = (0..g.vertex_count())
            .map(|v| g.neighbors(v).iter().map(|&(_, s)| s).collect())
            .collect();
        let mut rays = vec![own];
        for j in 1..=EXTRA_RAYS {
            let base = g.cut_angle() + std::f64::consts::FRAC_PI_2 * j as f64;
            if let Some(signs) = (0..8).find_map(|t| g.signs_for_ray(base + 1e-3 * f64::from(t))) {
                rays.push(signs);
            }
        }
        Search {
            g,
            opts,
            rays,
            nodes: 0,
            exhausted: false,
        }
    }

    /// Best packing among live sensors. Anything no larger than `need` is
    /// of no use to the caller, which lets whole subtrees be skipped.
    fn solve(&mut self, alive: &mut [bool], need: isize) -> Vec<Vec<usize>> {
        self.nodes += 1;
        let bound = self.bound(alive);
        if bound.value as isize <= need {
            return Vec::new();
        }
        let mut best = self.greedy(alive, &bound);
        if best.len() >= bound.value {
            return best;
        }
        if self.nodes > self.opts.node_budget {
            self.exhausted = true;
            return best;
        }

        let x = *bound
            .cut
            .iter()
            .min_by_key(|&&v| (self.live_degree(v, alive), v))
            .expect("positive flow has a non-empty cut");

        let (cycles, truncated) = self.cycles_through(x, alive);
        if truncated {
            self.exhausted = true;
        }
        for cycle in cycles {
            let floor = need.max(best.len() as isize);
            for &v in &cycle {
                alive[v] = false;
            }
            let rest = self.solve(alive, floor - 1);
            for &v in &cycle {
                alive[v] = true;
            }
            if 1 + rest.len() > best.len() {
                best = std::iter::once(cycle).chain(rest).collect();
            }
            if best.len() >= bound.value {
                return best;
            }
            if self.exhausted {
                return best;
            }
        }

        alive[x] = false;
        let rest = self.solve(alive, need.max(best.len() as isize));
        alive[x] = true;
        if rest.len() > best.len() {
            best = rest;
        }
        best
    }

    fn live_degree(&self, v: usize, alive: &[bool]) -> usize {
        self.g.neighbors(v).iter().filter(|&&(w, _)| alive[w]).count()
    }

    /// Tightest flow bound over the available rays.
    fn bound(&self, alive: &[bool]) -> Bound {
        let mut best: Option<Bound> = None;
        for ray in 0..self.rays.len() {
            let b = self.ray_bound(alive, ray);
            if best.as_ref().is_none_or(|x| b.value < x.value) {
                best = Some(b);
            }
            if best.as_ref().is_some_and(|x| x.value == 0) {
                break;
            }
        }
        best.expect("at least one ray")
    }

    /// Max-flow bound against one ray, with the flow paths and min cut.
    fn ray_bound(&self, alive: &[bool], ray: usize) -> Bound {
        let n = self.g.vertex_count();
        let signs = &self.rays[ray];
        let live = alive.iter().filter(|&&a| a).count();
        let (src, sink) = (2 * n, 2 * n + 1);
        let big = i32::try_from(n + 1).unwrap_or(i32::MAX);
        let mut net = Dinic::new(2 * n + 2);
        for v in (0..n).filter(|&v| alive[v]) {
            net.add_arc(2 * v, 2 * v + 1, 1);
            let (mut head, mut tail) = (false, false);
            for (&(w, _), &s) in self.g.neighbors(v).iter().zip(&signs[v]) {
                if !alive[w] {
                    continue;
                }
                match s {
                    0 => {
                        net.add_arc(2 * v + 1, 2 * w, big);
                    }
                    -1 => head = true,
                    _ => tail = true,
                }
            }
            if head {
                net.add_arc(src, 2 * v, big);
            }
            if tail {
                net.add_arc(2 * v + 1, sink, big);
            }
        }
        let value = net.max_flow(src, sink) as usize;

        let reach = net.reachable(src);
        let cut = (0..n)
            .filter(|&v| alive[v] && reach[2 * v] && !reach[2 * v + 1])
            .collect();

        // Walk the unit flow from each saturated source arc to the sink.
        let mut paths = Vec::with_capacity(value);
        let starts: Vec<usize> = net
            .arcs(src)
            .filter(|&(i, _)| net.flow_on(src, i) > 0)
            .map(|(_, to)| to / 2)
            .collect();
        for start in starts {
            let mut path = vec![start];
            let mut v = start;
            loop {
                let out = 2 * v + 1;
                let next = net
                    .arcs(out)
                    .find(|&(i, to)| to != 2 * v && net.flow_on(out, i) > 0 && to != src);
                match next {
                    Some((_, to)) if to == sink => break,
                    Some((_, to)) => {
                        v = to / 2;
                        path.push(v);
                    }
                    None => break,
                }
            }
            paths.push(path);
        }

        Bound {
            value: value.min(live / 3),
            ray,
            paths,
            cut,
        }
    }

    fn greedy(&self, alive: &[bool], bound: &Bound) -> Vec<Vec<usize>> {
        let a = self.greedy_shortest(alive);
        if a.len() >= bound.value {
            return a;
        }
        let b = self.greedy_from_paths(alive, bound);
        if b.len() > a.len() {
            b
        } else {
            a
        }
    }

    /// Swap search on a packing: trade one barrier (or two touching ones) for
    /// more barriers built from its sensors plus the unused ones.
    fn improve(&self, alive: &[bool], mut packing: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
        let n = self.g.vertex_count();
        loop {
            let mut owner = vec![usize::MAX; n];
            for (i, c) in packing.iter().enumerate() {
                for &v in c {
                    owner[v] = i;
                }
            }
            let free: Vec<bool> = (0..n).map(|v| alive[v] && owner[v] == usize::MAX).collect();
            let with = |members: &[usize]| {
                let mut sub = free.clone();
                for &i in members {
                    for &v in &packing[i] {
                        sub[v] = true;
                    }
                }
                sub
            };

            let mut swap = None;
            for i in 0..packing.len() {
                let found = self.greedy_shortest(&with(&[i]));
                if found.len() >= 2 {
                    swap = Some((vec![i], found));
                    break;
                }
            }
            if swap.is_none() {
                let mut pairs = Vec::new();
                for (i, c) in packing.iter().enumerate() {
                    for &v in c {
                        for &(w, _) in self.g.neighbors(v) {
                            let j = owner[w];
                            if j != usize::MAX && j > i {
                                pairs.push((i, j));
                            }
                        }
                    }
                }
                pairs.sort_unstable();
                pairs.dedup();
                for (i, j) in pairs {
                    let found = self.greedy_shortest(&with(&[i, j]));
                    if found.len() >= 3 {
                        swap = Some((vec![i, j], found));
                        break;
                    }
                }
            }

            let Some((out, found)) = swap else {
                return packing;
            };
            let mut next: Vec<Vec<usize>> = packing
                .into_iter()
                .enumerate()
                .filter(|(i, _)| !out.contains(i))
                .map(|(_, c)| c)
                .collect();
            next.extend(found);
            packing = next;
        }
    }

    /// Repeatedly takes the globally shortest single-crossing barrier.
    fn greedy_shortest(&self, alive: &[bool]) -> Vec<Vec<usize>> {
        let n = self.g.vertex_count();
        let mut alive = alive.to_vec();
        let mut scratch = BfsScratch::new(n);
        let mut heap = BinaryHeap::new();
        for h in (0..n).filter(|&v| alive[v]) {
            if let Some(c) = self.shortest_cycle(h, &alive, &mut scratch) {
                heap.push(Reverse((c.len(), h)));
            }
        }
        let mut out = Vec::new();
        while let Some(Reverse((len, h))) = heap.pop() {
            if !alive[h] {
                continue;
            }
            if let Some(c) = self.shortest_cycle(h, &alive, &mut scratch) {
                if c.len() == len {
                    for &v in &c {
                        alive[v] = false;
                    }
                    out.push(c);
                } else {
                    heap.push(Reverse((c.len(), h)));
                }
            }
        }
        out
    }

    /// Shortest barrier that leaves `head` and returns to it over one `+1`
    /// crossing edge, as a counter-clockwise vertex sequence starting at
    /// `head`.
    fn shortest_cycle(
        &self,
        head: usize,
        alive: &[bool],
        scratch: &mut BfsScratch,
    ) -> Option<Vec<usize>> {
        scratch.reset();
        let mut any_target = false;
        for &(t, s) in self.g.neighbors(head) {
            if s == -1 && alive[t] {
                scratch.target[t] = true;
                scratch.touched.push(t);
                any_target = true;
            }
        }
        if !any_target {
            return None;
        }
        scratch.visit(head, usize::MAX);
        let mut queue = VecDeque::from([head]);
        while let Some(u) = queue.pop_front() {
            for &(w, s) in self.g.neighbors(u) {
                if s != 0 || !alive[w] || scratch.seen[w] {
                    continue;
                }
                scratch.visit(w, u);
                if scratch.target[w] {
                    let mut cycle = vec![w];
                    let mut v = u;
                    while v != usize::MAX {
                        cycle.push(v);
                        v = scratch.parent[v];
                    }
                    cycle.reverse();
                    return Some(cycle);
                }
                queue.push_back(w);
            }
        }
        None
    }

    /// Closes flow paths through shortcut crossing edges, removing the found
    /// barriers and re-running the flow until nothing new closes.
    fn greedy_from_paths(&self, alive: &[bool], bound: &Bound) -> Vec<Vec<usize>> {
        let mut alive = alive.to_vec();
        let mut out = Vec::new();
        let mut pending = bound.paths.clone();
        loop {
            let found: Vec<Vec<usize>> = pending
                .iter()
                .filter_map(|p| self.close_path(p, bound.ray))
                .collect();
            if found.is_empty() {
                return out;
            }
            for c in &found {
                for &v in c {
                    alive[v] = false;
                }
            }
            out.extend(found);
            pending = self.ray_bound(&alive, bound.ray).paths;
        }
    }

    /// Shortest sub-path `p[i..=j]` with a `+1` crossing edge `p[j] -> p[i]`.
    fn close_path(&self, path: &[usize], ray: usize) -> Option<Vec<usize>> {
        let signs = &self.rays[ray];
        let mut best: Option<(usize, usize)> = None;
        for (j, &v) in path.iter().enumerate() {
            for (&(w, _), &s) in self.g.neighbors(v).iter().zip(&signs[v]) {
                if s != 1 {
                    continue;
                }
                if let Some(i) = path[..j].iter().position(|&u| u == w) {
                    if best.is_none_or(|(bi, bj)| j - i < bj - bi) {
                        best = Some((i, j));
                    }
                }
            }
        }
        best.map(|(i, j)| path[i..=j].to_vec())
    }

    /// Barriers through `x` among live sensors that contain no smaller
    /// barrier on a subset of their sensors. A packing can always swap a
    /// barrier for such a minimal one, and minimal ones avoiding `x` are the
    /// exclude branch's business.
    fn cycles_through(&self, x: usize, alive: &[bool]) -> (Vec<Vec<usize>>, bool) {
        let n = self.g.vertex_count();
        let mut st = Enumerator {
            g: self.g,
            alive,
            slot: vec![usize::MAX; n],
            levels: vec![0],
            path: vec![x],
            found: Vec::new(),
            steps: 0,
            budget: self.opts.enumeration_budget,
        };
        st.slot[x] = 0;
        st.dfs(x, 0);
        let truncated = st.steps > st.budget;
        let mut found = st.found;
        found.sort_by_key(Vec::len);

        let words = n.div_ceil(64);
        let mut kept: Vec<(Vec<u64>, Vec<usize>)> = Vec::new();
        for c in found {
            let mut bits = vec![0u64; words];
            for &v in &c {
                bits[v / 64] |= 1 << (v % 64);
            }
            let dominated = kept
                .iter()
                .any(|(k, _)| k.iter().zip(&bits).all(|(a, b)| a & !b == 0));
            if !dominated {
                kept.push((bits, c));
            }
        }
        (kept.into_iter().map(|(_, c)| c).collect(), truncated)
    }
}

/// A chord splits a cycle into two whose crossing counts add up to the
/// cycle's. If one part counts -1, 0, 1 or 2, one of the parts is a barrier.
fn chord_yields_barrier(part: i32) -> bool {
    (-1..=2).contains(&part)
}

struct Enumerator<'a> {
    g: &'a CoverageGraph,
    alive: &'a [bool],
    /// Position on the current path, or `usize::MAX`.
    slot: Vec<usize>,
    /// Net crossings from `x` to each path position.
    levels: Vec<i32>,
    path: Vec<usize>,
    found: Vec<Vec<usize>>,
    steps: usize,
    budget: usize,
}

impl Enumerator<'_> {
    fn dfs(&mut self, u: usize, level: i32) {
        for &(w, s) in self.g.neighbors(u) {
            self.steps += 1;
            if self.steps > self.budget {
                return;
            }
            if !self.alive[w] || self.slot[w] != usize::MAX {
                continue;
            }
            let next = level + i32::from(s);
            let mut back_to_x = None;
            let mut split = false;
            for &(v, t) in self.g.neighbors(w) {
                let i = self.slot[v];
                if v == u || i == usize::MAX || !self.alive[v] {
                    continue;
                }
                let part = next - self.levels[i] + i32::from(t);
                if i == 0 {
                    back_to_x = Some(part);
                } else if chord_yields_barrier(part) {
                    split = true;
                    break;
                }
            }
            if split {
                continue;
            }
            self.path.push(w);
            if let Some(closed) = back_to_x {
                if closed == 1 {
                    self.found.push(self.path.clone());
                }
                if chord_yields_barrier(closed) {
                    self.path.pop();
                    continue;
                }
            }
            self.slot[w] = self.path.len() - 1;
            self.levels.push(next);
            self.dfs(w, next);
            self.levels.pop();
            self.slot[w] = usize::MAX;
            self.path.pop();
        }
    }
}

struct BfsScratch {
    seen: Vec<bool>,
    target: Vec<bool>,
    parent: Vec<usize>,
    touched: Vec<usize>,
}

impl BfsScratch {
    fn new(n: usize) -> Self {
        BfsScratch {
            seen: vec![false; n],
            target: vec![false; n],
            parent: vec![usize::MAX; n],
            touched: Vec::new(),
        }
    }

    fn visit(&mut self, v: usize, parent: usize) {
        self.seen[v] = true;
        self.parent[v] = parent;
        self.touched.push(v);
    }

    fn reset(&mut self) {
        for &v in &self.touched {
            self.seen[v] = false;
            self.target[v] = false;
            self.parent[v] = usize::MAX;
        }
        self.touched.clear();
    }
}
