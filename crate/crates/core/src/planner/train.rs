use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::mdp::{legal_directions, Action, Direction, State, StepKind};
use super::qtable::QTable;
use super::Association;
use crate::energy::{available_energy, segment_energy};
use crate::error::{Error, Result};
use crate::radio::RadioMap;
use crate::scenario::{GridSpec, Scenario};
use crate::trajectory::Trajectory;

/// One row of the training log.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub episode: usize,
    /// Undiscounted sum of rewards.
    pub cumulative_reward: f64,
    pub steps: usize,
    pub reached_goal: bool,
    /// Horizontal propulsion energy spent, J.
    pub energy: f64,
    /// Exploration rate after the episode's last action.
    pub epsilon: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingLog {
    pub episodes: Vec<EpisodeRecord>,
}

impl TrainingLog {
    pub fn len(&self) -> usize {
        self.episodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.episodes.is_empty()
    }

    /// Mean cumulative reward over `episodes[range]`.
    pub fn mean_reward(&self, range: std::ops::Range<usize>) -> f64 {
        let slice = &self.episodes[range];
        slice.iter().map(|e| e.cumulative_reward).sum::<f64>() / slice.len() as f64
    }

    /// Highest cumulative reward among episodes that reached the goal.
    pub fn best_reward(&self) -> Option<f64> {
        self.episodes
            .iter()
            .filter(|e| e.reached_goal)
            .map(|e| e.cumulative_reward)
            .max_by(f64::total_cmp)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("episode,cumulative_reward,steps,reached_goal,energy_J,epsilon\n");
        for e in &self.episodes {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                e.episode, e.cumulative_reward, e.steps, e.reached_goal, e.energy, e.epsilon
            );
        }
        out
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub qtable: QTable,
    /// Best goal-reaching, within-budget episode.
    pub best: Trajectory,
    /// Cumulative reward of `best`.
    pub best_reward: f64,
    /// Episode index of `best`.
    pub best_episode: usize,
    pub log: TrainingLog,
}

/// One Bellman update of `Q(s, a)`; the bootstrap maximises over the actions
/// legal at `next`. Returns the new value.
#[allow(clippy::too_many_arguments)]
pub fn q_update(
    q: &mut QTable,
    s: &State,
    a: Action,
    reward: f64,
    next: &State,
    grid: &GridSpec,
    alpha: f64,
    beta: f64,
) -> f64 {
    let future = q.max_legal(next, legal_directions(next.position, grid));
    let old = q.get(s, a);
    let new = (1.0 - alpha) * old + alpha * (reward + beta * future);
    q.set(s, a, new);
    new
}

fn random_legal<R: Rng + ?Sized>(mask: u8, ranks: usize, rng: &mut R) -> Action {
    let legal = mask.count_ones() as usize;
    let pick = rng.gen_range(0..legal * ranks);
    let (nth_dir, rank) = (pick / ranks, pick % ranks);
    let d = (0..8).filter(|d| mask & (1 << d) != 0).nth(nth_dir).expect("nth legal direction exists");
    Action { direction: Direction::from_index(d), cell_rank: rank }
}

fn choose<R: Rng + ?Sized>(q: &QTable, s: &State, mask: u8, epsilon: f64, rng: &mut R) -> Option<Action> {
    if mask == 0 {
        return None;
    }
    let kappa: f64 = rng.gen();
    if kappa < epsilon {
        Some(random_legal(mask, q.ranks(), rng))
    } else {
        q.argmax_legal(s, mask)
    }
}

/// Epsilon-greedy choice among the actions legal at `s`.
pub fn select_action<R: Rng + ?Sized>(q: &QTable, s: &State, epsilon: f64, rng: &mut R, grid: &GridSpec) -> Result<Action> {
    choose(q, s, legal_directions(s.position, grid), epsilon, rng)
        .ok_or_else(|| Error::invalid(format!("no legal action at {}", s.position)))
}

fn selectable_ranks(scenario: &Scenario, map: &RadioMap) -> usize {
    match scenario.rl.association {
        Association::Ranked => map.mprime(),
        Association::Strongest => 1,
    }
}

fn check_inputs(scenario: &Scenario, map: &RadioMap) -> Result<()> {
    scenario.rl.validate()?;
    scenario.weights.validate()?;
    if map.grid() != &scenario.grid {
        return Err(Error::Mismatch(format!(
            "map grid {:?} differs from scenario grid {:?}",
            map.grid(),
            scenario.grid
        )));
    }
    if scenario.start.i >= scenario.grid.points || scenario.goal.i >= scenario.grid.points
        || scenario.start.j >= scenario.grid.points || scenario.goal.j >= scenario.grid.points
    {
        return Err(Error::invalid("start or goal outside the map"));
    }
    if scenario.start == scenario.goal {
        return Err(Error::invalid("start and goal must differ"));
    }
    Ok(())
}

/// Runs epsilon-greedy Q-learning for `scenario.rl.max_episodes` episodes
/// and returns the table, the best goal-reaching episode and the log.
///
/// Every episode starts at the start point attached to its strongest cell
/// and ends at the goal, after `max_steps` actions, or once the horizontal
/// energy exceeds what the battery leaves after the vertical legs. Epsilon
/// drops by the configured decrement after every action.
pub fn train(scenario: &Scenario, map: &RadioMap) -> Result<TrainOutcome> {
    check_inputs(scenario, map)?;
    let cfg = &scenario.rl;
    let grid = &scenario.grid;
    let budget = available_energy(&scenario.budget(), &scenario.power)?;
    let cardinal_energy = segment_energy(scenario.speed, grid.step, &scenario.power)?;
    let diagonal_energy = segment_energy(scenario.speed, grid.step * std::f64::consts::SQRT_2, &scenario.power)?;

    let ranks = selectable_ranks(scenario, map);
    let mut q = QTable::new(grid.points, ranks, cfg.state_mode);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let max_steps = cfg.max_steps(grid.points);
    // A direct flight takes as many actions as the Chebyshev distance.
    let direct = scenario.start.i.abs_diff(scenario.goal.i).max(scenario.start.j.abs_diff(scenario.goal.j));
    let decay = cfg.epsilon_decay(direct);
    let mut epsilon = cfg.epsilon_start;

    let mut log = TrainingLog { episodes: Vec::with_capacity(cfg.max_episodes) };
    let mut best: Option<(f64, usize, Trajectory)> = None;
    let mut current = Trajectory::default();
    let (mut reached_count, mut over_budget) = (0usize, 0usize);

    for episode in 0..cfg.max_episodes {
        let mut s = State::at(scenario.start, 0, map);
        current.waypoints.clear();
        current.cells.clear();
        current.rsrps.clear();
        current.push(s.position, s.serving_cell, map.candidate(s.position, 0).rsrp);
        let (mut total, mut energy, mut steps, mut reached) = (0.0, 0.0, 0usize, false);

        while steps < max_steps {
            let mask = legal_directions(s.position, grid);
            let a = choose(&q, &s, mask, epsilon, &mut rng).expect("every grid point has a legal move");
            let pos = a.direction.apply(s.position, grid).expect("masked direction stays on grid");
            let next = State::at(pos, a.cell_rank, map);
            let kind = StepKind::classify(&s, &next, map, scenario.rsrp_threshold);
            let r = kind.reward(&scenario.weights);
            q_update(&mut q, &s, a, r, &next, grid, cfg.learning_rate, cfg.discount);
            epsilon = (epsilon - decay).max(cfg.epsilon_min);

            steps += 1;
            total += r;
            energy += if kind.diagonal { diagonal_energy } else { cardinal_energy };
            current.push(pos, next.serving_cell, map.candidate(pos, a.cell_rank).rsrp);
            s = next;
            if energy > budget {
                over_budget += 1;
                break;
            }
            if s.position == scenario.goal {
                reached = true;
                break;
            }
        }

        if reached {
            reached_count += 1;
            if best.as_ref().is_none_or(|(b, _, _)| total > *b) {
                best = Some((total, episode, current.clone()));
            }
        }
        log.episodes.push(EpisodeRecord { episode, cumulative_reward: total, steps, reached_goal: reached, energy, epsilon });
    }

    q.set_provenance(cfg.seed, cfg.max_episodes as u64);
    let (best_reward, best_episode, best) = best.ok_or_else(|| {
        Error::NoFeasibleEpisode(format!(
            "{} episodes, {reached_count} reached the goal, {over_budget} exceeded the {budget:.0} J budget, \
             step cap {max_steps}",
            cfg.max_episodes
        ))
    })?;
    Ok(TrainOutcome { qtable: q, best, best_reward, best_episode, log })
}

/// Greedy walk from the start following the table. Fails if a state repeats
/// (the walk would cycle forever) or the step cap is hit.
pub fn rollout(q: &QTable, scenario: &Scenario, map: &RadioMap) -> Result<Trajectory> {
    check_inputs(scenario, map)?;
    let grid = &scenario.grid;
    if !q.matches_grid(grid) || q.ranks() > map.mprime() {
        return Err(Error::Mismatch("Q-table shape does not match the map".into()));
    }
    let max_steps = scenario.rl.max_steps(grid.points);
    let extended = q.shape()[2] > 1;
    let mut s = State::at(scenario.start, 0, map);
    let mut t = Trajectory::default();
    t.push(s.position, s.serving_cell, map.candidate(s.position, 0).rsrp);
    let mut seen = HashSet::new();
    for steps in 0..max_steps {
        let key = (s.position, if extended { s.rank } else { 0 });
        if !seen.insert(key) {
            return Err(Error::RolloutLoop { i: s.position.i, j: s.position.j, steps });
        }
        let a = q
            .argmax_legal(&s, legal_directions(s.position, grid))
            .expect("every grid point has a legal move");
        let pos = a.direction.apply(s.position, grid).expect("masked direction stays on grid");
        s = State::at(pos, a.cell_rank, map);
        t.push(pos, s.serving_cell, map.candidate(pos, a.cell_rank).rsrp);
        if pos == scenario.goal {
            return Ok(t);
        }
    }
    Err(Error::RolloutTruncated(max_steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::{step, StateMode};
    use crate::scenario::{generate_scenario, DeploymentParams, GridPoint, Weights};

    fn flat_map(points: usize) -> RadioMap {
        let grid = GridSpec { origin: [0.0, 0.0], step: 20.0, points, altitude: 80.0 };
        RadioMap::from_fn(grid, 2, 2, 0, |_, c| Ok(if c == 0 { -50.0 } else { -60.0 })).unwrap()
    }

    fn small_scenario(points: usize, goal: (usize, usize)) -> (Scenario, RadioMap) {
        let m = flat_map(points);
        let mut s = generate_scenario(3, &DeploymentParams::default()).unwrap();
        s.grid = m.grid().clone();
        s.start = GridPoint::new(0, 0);
        s.goal = GridPoint::new(goal.0, goal.1);
        s.rl.max_episodes = 200;
        (s, m)
    }

    #[test]
    fn bellman_update_by_hand() {
        let m = flat_map(4);
        let mut q = QTable::new(4, 2, StateMode::Compact);
        let s = State::at(GridPoint::new(1, 1), 0, &m);
        let a = Action { direction: Direction::E, cell_rank: 0 };
        let next = State::at(GridPoint::new(2, 1), 0, &m);
        assert_eq!(q_update(&mut q, &s, a, -1.0, &next, m.grid(), 0.01, 0.9), -0.01);

        // alpha = 1, beta = 0 stores the reward; alpha = 0 changes nothing.
        let mut q = QTable::new(4, 2, StateMode::Compact);
        assert_eq!(q_update(&mut q, &s, a, -0.3, &next, m.grid(), 1.0, 0.0), -0.3);
        assert_eq!(q_update(&mut q, &s, a, -0.7, &next, m.grid(), 0.0, 0.9), -0.3);
    }

    #[test]
    fn update_touches_one_entry() {
        let m = flat_map(4);
        let mut q = QTable::new(4, 2, StateMode::Extended);
        let s = State::at(GridPoint::new(0, 0), 1, &m);
        let next = State::at(GridPoint::new(1, 1), 0, &m);
        let before = q.values().to_vec();
        q_update(&mut q, &s, Action { direction: Direction::NE, cell_rank: 0 }, -0.5, &next, m.grid(), 0.1, 0.9);
        let changed = before.iter().zip(q.values()).filter(|(a, b)| a != b).count();
        assert_eq!(changed, 1);
    }

    #[test]
    fn bootstrap_ignores_illegal_actions() {
        let m = flat_map(3);
        let mut q = QTable::new(3, 2, StateMode::Compact);
        let corner = State::at(GridPoint::new(0, 0), 0, &m);
        // West leaves the grid from the corner, so its large value must not leak.
        q.set(&corner, Action { direction: Direction::W, cell_rank: 0 }, 5.0);
        q.set(&corner, Action { direction: Direction::E, cell_rank: 1 }, -2.0);
        let from = State::at(GridPoint::new(1, 0), 0, &m);
        let a = Action { direction: Direction::W, cell_rank: 0 };
        let v = q_update(&mut q, &from, a, 0.0, &corner, m.grid(), 1.0, 0.5);
        assert_eq!(v, 0.0);
    }

    #[test]
    fn random_actions_are_uniform_over_legal_ones() {
        let m = flat_map(5);
        let q = QTable::new(5, 2, StateMode::Compact);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = State::at(GridPoint::new(2, 2), 0, &m);
        let mut counts = [0usize; 16];
        let draws = 32_000;
        for _ in 0..draws {
            counts[select_action(&q, &s, 1.0, &mut rng, m.grid()).unwrap().index(2)] += 1;
        }
        let expected = draws as f64 / 16.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 15 degrees of freedom, 0.1% critical value.
        assert!(chi2 < 37.7, "chi2 = {chi2}");

        let corner = State::at(GridPoint::new(0, 0), 0, &m);
        for _ in 0..2_000 {
            let a = select_action(&q, &corner, 1.0, &mut rng, m.grid()).unwrap();
            assert!(a.direction.apply(corner.position, m.grid()).is_some());
        }
    }

    #[test]
    fn greedy_choice_follows_the_table() {
        let m = flat_map(5);
        let mut q = QTable::new(5, 2, StateMode::Compact);
        let s = State::at(GridPoint::new(2, 2), 0, &m);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        // All zero: ties go to the lowest index, east on rank 0.
        assert_eq!(select_action(&q, &s, 0.0, &mut rng, m.grid()).unwrap(), Action { direction: Direction::E, cell_rank: 0 });
        for a in 0..16 {
            q.set(&s, Action::from_index(a, 2), -1.0);
        }
        let best = Action { direction: Direction::SW, cell_rank: 1 };
        q.set(&s, best, -0.1);
        for _ in 0..100 {
            assert_eq!(select_action(&q, &s, 0.0, &mut rng, m.grid()).unwrap(), best);
        }
    }

    #[test]
    fn epsilon_is_non_increasing_and_floored() {
        let (mut s, m) = small_scenario(6, (5, 5));
        s.rl.epsilon_decay = Some(1e-3);
        let out = train(&s, &m).unwrap();
        let eps: Vec<f64> = out.log.episodes.iter().map(|e| e.epsilon).collect();
        assert!(eps.windows(2).all(|w| w[1] <= w[0]));
        assert!(eps.iter().all(|&e| e >= s.rl.epsilon_min));
        assert_eq!(*eps.last().unwrap(), s.rl.epsilon_min);
    }

    #[test]
    fn values_stay_within_the_discounted_bound() {
        let (s, m) = small_scenario(6, (5, 5));
        let out = train(&s, &m).unwrap();
        let bound = 1.0 / (1.0 - s.rl.discount);
        assert!(out.qtable.values().iter().all(|v| v.abs() <= bound && *v <= 0.0));
    }

    #[test]
    fn one_step_mission() {
        let (mut s, m) = small_scenario(2, (1, 1));
        s.rl.learning_rate = 0.5;
        s.rl.max_episodes = 500;
        let out = train(&s, &m).unwrap();
        let greedy = rollout(&out.qtable, &s, &m).unwrap();
        assert_eq!(greedy.waypoints, vec![GridPoint::new(0, 0), GridPoint::new(1, 1)]);
        assert_eq!(greedy.cells, vec![m.best(s.start).cell; 2]);
        assert!((out.best_reward + s.weights.en).abs() < 1e-12);
    }

    #[test]
    fn training_is_deterministic() {
        let (s, m) = small_scenario(6, (5, 3));
        let a = train(&s, &m).unwrap();
        let b = train(&s, &m).unwrap();
        assert_eq!(a.qtable.values(), b.qtable.values());
        assert_eq!(a.log, b.log);
        assert_eq!(a.best, b.best);
    }

    #[test]
    fn best_episode_matches_its_logged_reward() {
        let (s, m) = small_scenario(6, (5, 3));
        let out = train(&s, &m).unwrap();
        assert_eq!(out.log.best_reward(), Some(out.best_reward));
        assert!(out.log.episodes[out.best_episode].reached_goal);
        assert_eq!(out.best.first(), Some(s.start));
        assert_eq!(out.best.last(), Some(s.goal));
        assert!(out.best.is_well_formed());
    }

    #[test]
    fn energy_only_weights_learn_a_geodesic() {
        let (mut s, m) = small_scenario(8, (7, 4));
        s.weights = Weights::new(1.0, 0.0, 0.0).unwrap();
        s.rl.state_mode = StateMode::Extended;
        s.rl.learning_rate = 0.2;
        s.rl.discount = 0.99;
        s.rl.max_episodes = 3_000;
        let out = train(&s, &m).unwrap();
        let t = rollout(&out.qtable, &s, &m).unwrap();
        let geodesic = crate::baselines::octile_distance(s.start, s.goal, s.grid.step);
        assert!((t.total_distance(&s.grid) - geodesic).abs() < 1e-9);
    }

    #[test]
    fn scaling_the_rewards_scales_the_table() {
        // Rewards are linear in the weights, so the same update sequence with
        // every reward scaled by c yields c times the table and the same argmax.
        let m = flat_map(5);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (mut q1, mut q2) = (QTable::new(5, 2, StateMode::Extended), QTable::new(5, 2, StateMode::Extended));
        let mut s = State::at(GridPoint::new(0, 0), 0, &m);
        for _ in 0..5_000 {
            let a = select_action(&q1, &s, 1.0, &mut rng, m.grid()).unwrap();
            let next = step(&s, a, &m).unwrap();
            let r = -rng.gen::<f64>();
            q_update(&mut q1, &s, a, r, &next, m.grid(), 0.1, 0.9);
            q_update(&mut q2, &s, a, 0.25 * r, &next, m.grid(), 0.1, 0.9);
            s = next;
        }
        for (x, y) in q1.values().iter().zip(q2.values()) {
            assert!((0.25 * x - y).abs() <= 1e-12 * x.abs().max(1e-12));
        }
        for p in m.grid().points_iter() {
            for r in 0..2 {
                let st = State::at(p, r, &m);
                let mask = legal_directions(p, m.grid());
                assert_eq!(q1.argmax_legal(&st, mask), q2.argmax_legal(&st, mask));
            }
        }
    }

    #[test]
    fn rollout_rejects_loops_and_foreign_tables() {
        let (s, m) = small_scenario(4, (3, 3));
        let q = QTable::new(4, 2, StateMode::Compact);
        // Zero table: every state heads east, so the walk bounces at the east edge.
        let err = rollout(&q, &s, &m).unwrap_err();
        assert!(matches!(err, Error::RolloutLoop { .. }));
        let wrong = QTable::new(5, 2, StateMode::Compact);
        assert!(matches!(rollout(&wrong, &s, &m), Err(Error::Mismatch(_))));
    }
}
