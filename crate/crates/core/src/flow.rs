//! Maximum flow on real capacities (Dinic's algorithm).
//!
//! Residual capacities at or below [`FLOW_TOL`] count as saturated.
//! Capacities may be `f64::INFINITY`.

use std::collections::VecDeque;

pub const FLOW_TOL: f64 = 1e-12;

const UNSEEN: u32 = u32::MAX;

#[derive(Clone, Debug, Default)]
pub struct FlowNetwork {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<f64>,
    flow: Vec<f64>,
}

impl FlowNetwork {
    pub fn new(nodes: usize) -> Self {
        FlowNetwork {
            head: vec![Vec::new(); nodes],
            ..Default::default()
        }
    }

    pub fn nodes(&self) -> usize {
        self.head.len()
    }

    /// Directed arc u -> v; returns its index. The paired reverse arc is
    /// `index ^ 1`.
    pub fn add_arc(&mut self, u: usize, v: usize, cap: f64) -> usize {
        debug_assert!(cap >= 0.0);
        let e = self.to.len();
        self.to.extend([v, u]);
        self.cap.extend([cap, 0.0]);
        self.flow.extend([0.0, 0.0]);
        self.head[u].push(e);
        self.head[v].push(e + 1);
        e
    }

    pub fn flow(&self, arc: usize) -> f64 {
        self.flow[arc]
    }

    pub fn capacity(&self, arc: usize) -> f64 {
        self.cap[arc]
    }

    pub fn set_capacity(&mut self, arc: usize, cap: f64) {
        debug_assert!(cap >= 0.0);
        self.cap[arc] = cap;
    }

    /// Zero every arc flow, keeping capacities.
    pub fn reset(&mut self) {
        self.flow.iter_mut().for_each(|f| *f = 0.0);
    }

    fn residual(&self, e: usize) -> f64 {
        self.cap[e] - self.flow[e]
    }

    fn levels(&self, s: usize) -> Vec<u32> {
        let mut level = vec![UNSEEN; self.nodes()];
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.head[u] {
                let v = self.to[e];
                if level[v] == UNSEEN && self.residual(e) > FLOW_TOL {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        level
    }

    /// Push a maximum flow from `s` to `t` on top of any existing flow and
    /// return the amount added.
    pub fn max_flow(&mut self, s: usize, t: usize) -> f64 {
        if s == t {
            return 0.0;
        }
        let mut total = 0.0;
        let mut path: Vec<usize> = Vec::new();
        loop {
            let mut level = self.levels(s);
            if level[t] == UNSEEN {
                return total;
            }
            let mut next = vec![0usize; self.nodes()];
            'augment: loop {
                path.clear();
                let mut u = s;
                while u != t {
                    let mut advanced = false;
                    while next[u] < self.head[u].len() {
                        let e = self.head[u][next[u]];
                        let v = self.to[e];
                        if level[v] == level[u].wrapping_add(1) && self.residual(e) > FLOW_TOL {
                            path.push(e);
                            u = v;
                            advanced = true;
                            break;
                        }
                        next[u] += 1;
                    }
                    if !advanced {
                        // dead end: retire u and back up one arc
                        level[u] = UNSEEN;
                        match path.pop() {
                            None => break 'augment,
                            Some(e) => {
                                u = self.to[e ^ 1];
                                next[u] += 1;
                            }
                        }
                    }
                }
                let push = path.iter().map(|&e| self.residual(e)).fold(f64::INFINITY, f64::min);
                if !push.is_finite() {
                    // an all-infinite path: the flow is unbounded
                    return f64::INFINITY;
                }
                for &e in &path {
                    self.flow[e] += push;
                    self.flow[e ^ 1] -= push;
                }
                total += push;
            }
        }
    }

    /// Nodes reachable from `s` in the residual network: the source side
    /// of a minimum cut after [`FlowNetwork::max_flow`].
    pub fn source_side(&self, s: usize) -> Vec<bool> {
        self.levels(s).into_iter().map(|l| l != UNSEEN).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_example() {
        // CLRS figure: max flow 23
        let mut g = FlowNetwork::new(6);
        for (u, v, c) in [
            (0, 1, 16.0),
            (0, 2, 13.0),
            (1, 2, 10.0),
            (2, 1, 4.0),
            (1, 3, 12.0),
            (3, 2, 9.0),
            (2, 4, 14.0),
            (4, 3, 7.0),
            (3, 5, 20.0),
            (4, 5, 4.0),
        ] {
            g.add_arc(u, v, c);
        }
        assert_eq!(g.max_flow(0, 5), 23.0);
        let side = g.source_side(0);
        let cut: f64 = (0..g.to.len())
            .step_by(2)
            .filter(|&e| side[g.to[e ^ 1]] && !side[g.to[e]])
            .map(|e| g.capacity(e))
            .sum();
        assert_eq!(cut, 23.0);
    }

    #[test]
    fn infinite_sink_arcs_and_fractional_capacities() {
        let mut g = FlowNetwork::new(4);
        g.add_arc(0, 1, 1.0);
        g.add_arc(1, 2, 0.25);
        g.add_arc(1, 2, 0.5);
        g.add_arc(2, 3, f64::INFINITY);
        assert!((g.max_flow(0, 3) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn conservation_on_a_grid() {
        let n = 6;
        let id = |i: usize, j: usize| i * n + j;
        let mut g = FlowNetwork::new(n * n);
        let mut arcs = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i + 1 < n {
                    arcs.push(g.add_arc(id(i, j), id(i + 1, j), 1.0 + (i * j % 3) as f64));
                    arcs.push(g.add_arc(id(i + 1, j), id(i, j), 0.5));
                }
                if j + 1 < n {
                    arcs.push(g.add_arc(id(i, j), id(i, j + 1), 0.7));
                }
            }
        }
        let f = g.max_flow(0, n * n - 1);
        assert!(f > 0.0);
        let mut net = vec![0.0; n * n];
        for &e in &arcs {
            assert!(g.flow(e) <= g.capacity(e) + 1e-12 && g.flow(e) >= -1e-12);
            net[g.to[e ^ 1]] -= g.flow(e);
            net[g.to[e]] += g.flow(e);
        }
        for (v, x) in net.iter().enumerate() {
            let expect = if v == 0 {
                -f
            } else if v == n * n - 1 {
                f
            } else {
                0.0
            };
            assert!((x - expect).abs() < 1e-9, "node {v}: {x}");
        }
    }

    #[test]
    fn disconnected_sink_gets_nothing() {
        let mut g = FlowNetwork::new(3);
        g.add_arc(0, 1, 5.0);
        assert_eq!(g.max_flow(0, 2), 0.0);
    }
}
