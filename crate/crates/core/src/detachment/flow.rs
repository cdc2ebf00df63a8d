//! Dinic max-flow on small integral networks.

use std::collections::VecDeque;

#[derive(Clone, Debug)]
struct Arc {
    to: usize,
    cap: u64,
    rev: usize,
}

#[derive(Clone, Debug)]
pub(crate) struct FlowNetwork {
    adj: Vec<Vec<Arc>>,
    level: Vec<i64>,
    iter: Vec<usize>,
}

/// Handle to an arc added with [`FlowNetwork::add_arc`].
#[derive(Clone, Copy, Debug)]
pub(crate) struct ArcId {
    from: usize,
    index: usize,
    original: u64,
}

impl FlowNetwork {
    pub(crate) fn new(nodes: usize) -> Self {
        FlowNetwork { adj: vec![Vec::new(); nodes], level: vec![0; nodes], iter: vec![0; nodes] }
    }

    pub(crate) fn add_arc(&mut self, from: usize, to: usize, cap: u64) -> ArcId {
        let index = self.adj[from].len();
        let rev = self.adj[to].len() + usize::from(from == to);
        self.adj[from].push(Arc { to, cap, rev });
        let back = index;
        self.adj[to].push(Arc { to: from, cap: 0, rev: back });
        ArcId { from, index, original: cap }
    }

    pub(crate) fn flow(&self, id: ArcId) -> u64 {
        id.original - self.adj[id.from][id.index].cap
    }

    fn bfs(&mut self, s: usize) {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            for arc in &self.adj[x] {
                if arc.cap > 0 && self.level[arc.to] < 0 {
                    self.level[arc.to] = self.level[x] + 1;
                    queue.push_back(arc.to);
                }
            }
        }
    }

    fn dfs(&mut self, x: usize, t: usize, limit: u64) -> u64 {
        if x == t {
            return limit;
        }
        while self.iter[x] < self.adj[x].len() {
            let i = self.iter[x];
            let Arc { to, cap, rev } = self.adj[x][i];
            if cap > 0 && self.level[x] < self.level[to] {
                let pushed = self.dfs(to, t, limit.min(cap));
                if pushed > 0 {
                    self.adj[x][i].cap -= pushed;
                    self.adj[to][rev].cap += pushed;
                    return pushed;
                }
            }
            self.iter[x] += 1;
        }
        0
    }

    pub(crate) fn max_flow(&mut self, s: usize, t: usize) -> u64 {
        let mut total = 0;
        loop {
            self.bfs(s);
            if self.level[t] < 0 {
                return total;
            }
            self.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let pushed = self.dfs(s, t, u64::MAX);
                if pushed == 0 {
                    break;
                }
                total += pushed;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transportation_is_saturated() {
        // rows supply 2 and 1, columns demand 1 and 2, all cells cap 2
        let mut net = FlowNetwork::new(6);
        net.add_arc(0, 1, 2);
        net.add_arc(0, 2, 1);
        let cells = [net.add_arc(1, 3, 2), net.add_arc(1, 4, 2), net.add_arc(2, 3, 2), net.add_arc(2, 4, 2)];
        net.add_arc(3, 5, 1);
        net.add_arc(4, 5, 2);
        assert_eq!(net.max_flow(0, 5), 3);
        let row1: u64 = cells[..2].iter().map(|&c| net.flow(c)).sum();
        assert_eq!(row1, 2);
    }

    #[test]
    fn bottleneck() {
        let mut net = FlowNetwork::new(4);
        net.add_arc(0, 1, 5);
        net.add_arc(1, 2, 1);
        net.add_arc(2, 3, 5);
        net.add_arc(0, 2, 2);
        assert_eq!(net.max_flow(0, 3), 3);
    }
}
