//! Exact optimum of the discounted problem the learner actually solves.
//!
//! The product-graph oracle minimises the undiscounted path cost. Q-learning
//! maximises the discounted return instead, and with a discount below one the
//! two optima can differ: cheap cardinal steps look better when later costs
//! are shrunk, and on some maps circling forever in covered space beats any
//! route to the goal. Value iteration over (grid point, serving-cell rank)
//! gives the discounted optimum, so the learner can be checked against the
//! target it is built to reach.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::planner::Association;
use crate::radio::RadioMap;
use crate::scenario::{GridPoint, Scenario};
use crate::trajectory::Trajectory;

use super::metrics::normalized_objective;

// Same order as the learner's action encoding: E, W, N, S, NE, NW, SE, SW.
const MOVES: [(i64, i64); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, 1), (1, -1), (-1, -1)];

#[derive(Debug, Clone)]
pub struct DiscountedSolution {
    /// Greedy walk under the optimal values.
    pub trajectory: Trajectory,
    /// Optimal discounted return from the start (non-positive).
    pub value: f64,
    /// Undiscounted normalised objective of `trajectory`.
    pub cost: f64,
    pub iterations: usize,
}

/// Value iteration to a sup-norm change below `tol`, then a greedy walk from
/// the start. Ties go to the lowest action index. Fails with
/// [`Error::RolloutLoop`] when the optimal policy never reaches the goal.
pub fn discounted_optimal(scenario: &Scenario, map: &RadioMap, tol: f64) -> Result<DiscountedSolution> {
    let grid = map.grid();
    if grid != &scenario.grid {
        return Err(Error::Mismatch("map grid differs from scenario grid".into()));
    }
    let beta = scenario.rl.discount;
    if !(0.0..1.0).contains(&beta) || !(tol > 0.0) {
        return Err(Error::invalid("need a discount in [0, 1) and a positive tolerance"));
    }
    let ranks = match scenario.rl.association {
        Association::Ranked => map.mprime(),
        Association::Strongest => 1,
    };
    let n = grid.points;
    let w = scenario.weights;
    let node = |p: GridPoint, r: usize| (p.j * n + p.i) * ranks + r;

    // Successors of every node as (target node, reward), in action order.
    let mut succ: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n * n * ranks);
    for j in 0..n {
        for i in 0..n {
            for r in 0..ranks {
                let here = map.candidate(GridPoint::new(i, j), r).cell;
                let mut out = Vec::with_capacity(8 * ranks);
                for (di, dj) in MOVES {
                    let (qi, qj) = (i as i64 + di, j as i64 + dj);
                    if qi < 0 || qj < 0 || qi >= n as i64 || qj >= n as i64 {
                        continue;
                    }
                    let q = GridPoint::new(qi as usize, qj as usize);
                    for r2 in 0..ranks {
                        let c = map.candidate(q, r2);
                        let mut reward = -w.en * if di != 0 && dj != 0 { 1.0 } else { std::f64::consts::FRAC_1_SQRT_2 };
                        if c.rsrp < scenario.rsrp_threshold {
                            reward -= w.sig;
                        }
                        if c.cell != here {
                            reward -= w.ho;
                        }
                        out.push((node(q, r2), reward));
                    }
                }
                succ.push(out);
            }
        }
    }
    let is_goal = |k: usize| k / ranks == scenario.goal.j * n + scenario.goal.i;

    let backup = |v: &[f64], k: usize| -> (f64, usize) {
        let mut best = (f64::NEG_INFINITY, 0);
        for (a, &(t, r)) in succ[k].iter().enumerate() {
            let q = r + beta * v[t];
            if q > best.0 {
                best = (q, a);
            }
        }
        best
    };

    let mut v = vec![0.0; succ.len()];
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut delta: f64 = 0.0;
        let next: Vec<f64> = (0..succ.len())
            .map(|k| {
                let x = if is_goal(k) { 0.0 } else { backup(&v, k).0 };
                delta = delta.max((x - v[k]).abs());
                x
            })
            .collect();
        v = next;
        if delta < tol {
            break;
        }
    }

    let mut k = node(scenario.start, 0);
    let mut t = Trajectory::default();
    let attach = |t: &mut Trajectory, k: usize| {
        let pos = k / ranks;
        let p = GridPoint::new(pos % n, pos / n);
        let c = map.candidate(p, k % ranks);
        t.push(p, c.cell, c.rsrp);
    };
    attach(&mut t, k);
    let mut seen = HashSet::new();
    while !is_goal(k) {
        if !seen.insert(k) {
            let p = t.last().expect("walk is non-empty");
            return Err(Error::RolloutLoop { i: p.i, j: p.j, steps: t.len() - 1 });
        }
        k = succ[k][backup(&v, k).1].0;
        attach(&mut t, k);
    }
    let cost = normalized_objective(&t, scenario);
    Ok(DiscountedSolution { trajectory: t, value: v[node(scenario.start, 0)], cost, iterations })
}
