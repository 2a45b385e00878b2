//! Exact solver for small instances: Dijkstra over (grid point, serving-cell
//! rank) pairs.
//!
//! Edge costs are the per-step penalties of the learner with the sign
//! flipped, so the minimum path cost is the best normalised objective any
//! planner can reach on the same map.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::planner::Association;
use crate::radio::RadioMap;
use crate::scenario::{GridPoint, Scenario};
use crate::trajectory::Trajectory;

/// Default cap on product-graph nodes.
pub const DEFAULT_NODE_LIMIT: usize = 2_000_000;

const MOVES: [(i64, i64); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, 1), (1, -1), (-1, -1)];

#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub trajectory: Trajectory,
    /// Minimum normalised objective.
    pub cost: f64,
    /// Product-graph nodes settled before the goal was reached.
    pub settled: usize,
}

#[derive(PartialEq)]
struct Entry {
    cost: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on cost, then on node id.
        other.cost.total_cmp(&self.cost).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Optimal start-to-goal path and association with the default node cap.
pub fn oracle_optimal(scenario: &Scenario, map: &RadioMap) -> Result<OracleSolution> {
    oracle_optimal_with_limit(scenario, map, DEFAULT_NODE_LIMIT)
}

pub fn oracle_optimal_with_limit(scenario: &Scenario, map: &RadioMap, max_nodes: usize) -> Result<OracleSolution> {
    let grid = map.grid();
    if grid != &scenario.grid {
        return Err(Error::Mismatch("map grid differs from scenario grid".into()));
    }
    let ranks = match scenario.rl.association {
        Association::Ranked => map.mprime(),
        Association::Strongest => 1,
    };
    let n = grid.points;
    let nodes = n * n * ranks;
    if nodes > max_nodes {
        return Err(Error::TooLarge { nodes, limit: max_nodes });
    }
    let w = &scenario.weights;
    let threshold = scenario.rsrp_threshold;
    let node_of = |p: GridPoint, r: usize| (p.j * n + p.i) * ranks + r;
    let point_of = |node: usize| {
        let pos = node / ranks;
        (GridPoint::new(pos % n, pos / n), node % ranks)
    };

    let mut dist = vec![f64::INFINITY; nodes];
    let mut prev = vec![usize::MAX; nodes];
    let mut done = vec![false; nodes];
    let source = node_of(scenario.start, 0);
    dist[source] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Entry { cost: 0.0, node: source });
    let mut settled = 0;

    while let Some(Entry { cost, node }) = heap.pop() {
        if done[node] {
            continue;
        }
        done[node] = true;
        settled += 1;
        let (p, r) = point_of(node);
        if p == scenario.goal {
            return Ok(OracleSolution { trajectory: unwind(node, &prev, map, &point_of), cost, settled });
        }
        let here = map.candidate(p, r).cell;
        for (di, dj) in MOVES {
            let (qi, qj) = (p.i as i64 + di, p.j as i64 + dj);
            if qi < 0 || qj < 0 || qi >= n as i64 || qj >= n as i64 {
                continue;
            }
            let q = GridPoint::new(qi as usize, qj as usize);
            let motion = if di != 0 && dj != 0 { 1.0 } else { 0.5f64.sqrt() };
            for r2 in 0..ranks {
                let c = map.candidate(q, r2);
                let mut edge = w.en * motion;
                if c.rsrp < threshold {
                    edge += w.sig;
                }
                if c.cell != here {
                    edge += w.ho;
                }
                let target = node_of(q, r2);
                let cand = cost + edge;
                if cand < dist[target] {
                    dist[target] = cand;
                    prev[target] = node;
                    heap.push(Entry { cost: cand, node: target });
                }
            }
        }
    }
    Err(Error::Infeasible("goal unreachable in the product graph".into()))
}

fn unwind(mut node: usize, prev: &[usize], map: &RadioMap, point_of: &dyn Fn(usize) -> (GridPoint, usize)) -> Trajectory {
    let mut chain = vec![node];
    while prev[node] != usize::MAX {
        node = prev[node];
        chain.push(node);
    }
    let mut t = Trajectory::default();
    for &k in chain.iter().rev() {
        let (p, r) = point_of(k);
        let c = map.candidate(p, r);
        t.push(p, c.cell, c.rsrp);
    }
    t
}
