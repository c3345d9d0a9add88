//! Dinic's max-flow on small integer capacities.

use std::collections::VecDeque;

#[derive(Debug, Clone)]
struct Arc {
    to: usize,
    cap: i32,
    rev: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct Dinic {
    graph: Vec<Vec<Arc>>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

impl Dinic {
    pub fn new(n: usize) -> Self {
        Dinic {
            graph: vec![Vec::new(); n],
            level: vec![-1; n],
            iter: vec![0; n],
        }
    }

    /// Adds `from -> to` and returns its position in `from`'s arc list.
    pub fn add_arc(&mut self, from: usize, to: usize, cap: i32) -> usize {
        let fwd = self.graph[from].len();
        let back = self.graph[to].len() + usize::from(from == to);
        self.graph[from].push(Arc { to, cap, rev: back });
        self.graph[to].push(Arc {
            to: from,
            cap: 0,
            rev: fwd,
        });
        fwd
    }

    fn bfs(&mut self, s: usize) {
        self.level.fill(-1);
        self.level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for a in &self.graph[u] {
                if a.cap > 0 && self.level[a.to] < 0 {
                    self.level[a.to] = self.level[u] + 1;
                    queue.push_back(a.to);
                }
            }
        }
    }

    fn dfs(&mut self, u: usize, t: usize, pushed: i32) -> i32 {
        if u == t {
            return pushed;
        }
        while self.iter[u] < self.graph[u].len() {
            let i = self.iter[u];
            let Arc { to, cap, rev } = self.graph[u][i];
            if cap > 0 && self.level[u] < self.level[to] {
                let d = self.dfs(to, t, pushed.min(cap));
                if d > 0 {
                    self.graph[u][i].cap -= d;
                    self.graph[to][rev].cap += d;
                    return d;
                }
            }
            self.iter[u] += 1;
        }
        0
    }

    pub fn max_flow(&mut self, s: usize, t: usize) -> i32 {
        let mut flow = 0;
        loop {
            self.bfs(s);
            if self.level[t] < 0 {
                return flow;
            }
            self.iter.fill(0);
            loop {
                let f = self.dfs(s, t, i32::MAX);
                if f == 0 {
                    break;
                }
                flow += f;
            }
        }
    }

    /// Residual capacity of arc `idx` leaving `from`.
    #[cfg(test)]
    pub fn residual(&self, from: usize, idx: usize) -> i32 {
        self.graph[from][idx].cap
    }

    /// Flow currently carried by forward arc `idx` of `from`.
    pub fn flow_on(&self, from: usize, idx: usize) -> i32 {
        let a = &self.graph[from][idx];
        self.graph[a.to][a.rev].cap
    }

    /// Nodes reachable from `s` in the residual graph.
    pub fn reachable(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.graph.len()];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for a in &self.graph[u] {
                if a.cap > 0 && !seen[a.to] {
                    seen[a.to] = true;
                    stack.push(a.to);
                }
            }
        }
        seen
    }

    pub fn arcs(&self, from: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.graph[from]
            .iter()
            .enumerate()
            .map(|(i, a)| (i, a.to))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_network() {
        let mut d = Dinic::new(6);
        d.add_arc(0, 1, 10);
        d.add_arc(0, 2, 10);
        d.add_arc(1, 3, 4);
        d.add_arc(1, 4, 8);
        d.add_arc(2, 4, 9);
        d.add_arc(3, 5, 10);
        d.add_arc(4, 3, 6);
        d.add_arc(4, 5, 10);
        assert_eq!(d.max_flow(0, 5), 19);
    }

    #[test]
    fn disconnected() {
        let mut d = Dinic::new(4);
        d.add_arc(0, 1, 3);
        d.add_arc(2, 3, 3);
        assert_eq!(d.max_flow(0, 3), 0);
        let r = d.reachable(0);
        assert!(r[0] && r[1] && !r[2] && !r[3]);
    }

    #[test]
    fn flow_accounting() {
        let mut d = Dinic::new(3);
        let a = d.add_arc(0, 1, 2);
        let b = d.add_arc(1, 2, 1);
        assert_eq!(d.max_flow(0, 2), 1);
        assert_eq!(d.flow_on(0, a), 1);
        assert_eq!(d.residual(0, a), 1);
        assert_eq!(d.flow_on(1, b), 1);
    }
}
