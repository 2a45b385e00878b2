use std::fmt;

use crate::error::{Error, Result};
use crate::radio::{is_covered, RadioMap};
use crate::scenario::{GridPoint, GridSpec, Weights};

/// Compass direction of one grid move. The discriminant is the direction's
/// index inside an action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    E = 0,
    W = 1,
    N = 2,
    S = 3,
    NE = 4,
    NW = 5,
    SE = 6,
    SW = 7,
}

impl Direction {
    pub const ALL: [Direction; 8] = [
        Direction::E,
        Direction::W,
        Direction::N,
        Direction::S,
        Direction::NE,
        Direction::NW,
        Direction::SE,
        Direction::SW,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(k: usize) -> Direction {
        Direction::ALL[k]
    }

    /// Grid offset `(di, dj)`; north is `+j`.
    pub fn delta(self) -> (i64, i64) {
        match self {
            Direction::E => (1, 0),
            Direction::W => (-1, 0),
            Direction::N => (0, 1),
            Direction::S => (0, -1),
            Direction::NE => (1, 1),
            Direction::NW => (-1, 1),
            Direction::SE => (1, -1),
            Direction::SW => (-1, -1),
        }
    }

    pub fn is_diagonal(self) -> bool {
        self.index() >= 4
    }

    pub fn name(self) -> &'static str {
        match self {
            Direction::E => "E",
            Direction::W => "W",
            Direction::N => "N",
            Direction::S => "S",
            Direction::NE => "NE",
            Direction::NW => "NW",
            Direction::SE => "SE",
            Direction::SW => "SW",
        }
    }

    pub fn apply(self, p: GridPoint, grid: &GridSpec) -> Option<GridPoint> {
        let (di, dj) = self.delta();
        let (i, j) = (p.i as i64 + di, p.j as i64 + dj);
        grid.contains(i, j).then(|| GridPoint::new(i as usize, j as usize))
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Bit `k` set iff `Direction::ALL[k]` stays on the grid from `p`.
pub fn legal_directions(p: GridPoint, grid: &GridSpec) -> u8 {
    let last = grid.points - 1;
    let (west, east) = (p.i > 0, p.i < last);
    let (south, north) = (p.j > 0, p.j < last);
    let flags = [east, west, north, south, north && east, north && west, south && east, south && west];
    flags.iter().enumerate().fold(0u8, |m, (k, ok)| if *ok { m | (1 << k) } else { m })
}

/// A move plus the rank of the cell to attach to at the destination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Action {
    pub direction: Direction,
    pub cell_rank: usize,
}

impl Action {
    pub fn index(self, ranks: usize) -> usize {
        self.direction.index() * ranks + self.cell_rank
    }

    pub fn from_index(k: usize, ranks: usize) -> Action {
        Action { direction: Direction::from_index(k / ranks), cell_rank: k % ranks }
    }
}

/// UAV position and serving cell. `rank` is the serving cell's rank in the
/// candidate list at `position`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct State {
    pub position: GridPoint,
    pub serving_cell: usize,
    pub rank: usize,
}

impl State {
    /// At `p`, served by the cell of the given rank.
    pub fn at(p: GridPoint, rank: usize, map: &RadioMap) -> State {
        State { position: p, serving_cell: map.candidate(p, rank).cell, rank }
    }
}

/// Deterministic transition.
pub fn step(state: &State, action: Action, map: &RadioMap) -> Result<State> {
    if action.cell_rank >= map.mprime() {
        return Err(Error::invalid(format!("cell rank {} >= M' = {}", action.cell_rank, map.mprime())));
    }
    let next = action.direction.apply(state.position, map.grid()).ok_or(Error::IllegalMove {
        direction: action.direction.name(),
        i: state.position.i,
        j: state.position.j,
    })?;
    Ok(State::at(next, action.cell_rank, map))
}

/// The three binary events a step can trigger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StepKind {
    pub diagonal: bool,
    pub handoff: bool,
    pub uncovered: bool,
}

impl StepKind {
    pub fn classify(prev: &State, next: &State, map: &RadioMap, threshold: f64) -> StepKind {
        debug_assert!(prev.position.is_neighbor(&next.position));
        StepKind {
            diagonal: prev.position.i != next.position.i && prev.position.j != next.position.j,
            handoff: prev.serving_cell != next.serving_cell,
            uncovered: !is_covered(map.candidate(next.position, next.rank).rsrp, threshold),
        }
    }

    /// `w_en W_mo + w_sig W_sig + w_ho W_ho`.
    pub fn reward(self, w: &Weights) -> f64 {
        let motion = if self.diagonal { -1.0 } else { -std::f64::consts::FRAC_1_SQRT_2 };
        let sig = if self.uncovered { -1.0 } else { 0.0 };
        let ho = if self.handoff { -1.0 } else { 0.0 };
        w.en * motion + w.sig * sig + w.ho * ho
    }
}

/// Reward of moving from `prev` to the adjacent `next`: motion penalty
/// `-1/sqrt(2)` (cardinal) or `-1` (diagonal), `-1` for a handoff and `-1`
/// when the new serving cell is below `threshold`, weighted by `weights`.
pub fn reward(prev: &State, next: &State, map: &RadioMap, weights: &Weights, threshold: f64) -> f64 {
    StepKind::classify(prev, next, map, threshold).reward(weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radio::Candidate;

    fn map() -> RadioMap {
        let grid = GridSpec { origin: [0.0, 0.0], step: 20.0, points: 4, altitude: 80.0 };
        // Rank 0 is cell (i + j) % 3 at -60 dBm, rank 1 the next id at -70.
        RadioMap::from_fn(grid, 3, 2, 0, |p, c| {
            let strongest = (p.i + p.j) % 3;
            Ok(if c == strongest { -60.0 } else if c == (strongest + 1) % 3 { -70.0 } else { -90.0 })
        })
        .unwrap()
    }

    #[test]
    fn unit_moves_and_boundaries() {
        let m = map();
        let s = State::at(GridPoint::new(0, 0), 0, &m);
        let e = step(&s, Action { direction: Direction::E, cell_rank: 0 }, &m).unwrap();
        assert_eq!(e.position, GridPoint::new(1, 0));
        assert_eq!(e.serving_cell, m.best(GridPoint::new(1, 0)).cell);
        assert!(matches!(
            step(&s, Action { direction: Direction::W, cell_rank: 0 }, &m),
            Err(Error::IllegalMove { .. })
        ));
        assert!(step(&s, Action { direction: Direction::N, cell_rank: 2 }, &m).is_err());
        let r1 = step(&s, Action { direction: Direction::NE, cell_rank: 1 }, &m).unwrap();
        assert_eq!(r1.serving_cell, m.candidate(GridPoint::new(1, 1), 1).cell);
    }

    #[test]
    fn legality_mask_matches_apply() {
        let m = map();
        for p in m.grid().points_iter() {
            let mask = legal_directions(p, m.grid());
            for d in Direction::ALL {
                assert_eq!(mask & (1 << d.index()) != 0, d.apply(p, m.grid()).is_some());
            }
        }
        assert_eq!(legal_directions(GridPoint::new(0, 0), m.grid()).count_ones(), 3);
        assert_eq!(legal_directions(GridPoint::new(1, 2), m.grid()).count_ones(), 8);
    }

    #[test]
    fn action_index_round_trip() {
        for k in 0..24 {
            assert_eq!(Action::from_index(k, 3).index(3), k);
        }
        assert_eq!(Action { direction: Direction::E, cell_rank: 0 }.index(3), 0);
    }

    #[test]
    fn reward_examples() {
        let covered_same = StepKind { diagonal: false, handoff: false, uncovered: false };
        let r = covered_same.reward(&Weights::PROPOSED);
        assert!((r - (-0.025 / 2f64.sqrt())).abs() < 1e-15);
        assert!((r + 0.01768).abs() < 1e-5);

        let worst = StepKind { diagonal: true, handoff: true, uncovered: true };
        assert!((worst.reward(&Weights::PROPOSED) + 1.0).abs() < 1e-15);

        let ho = StepKind { diagonal: false, handoff: true, uncovered: false };
        let r = ho.reward(&Weights::PROPOSED_2);
        assert!((r - (-0.04 / 2f64.sqrt() - 0.16)).abs() < 1e-15);
        assert!((r + 0.18828).abs() < 1e-5);
    }

    #[test]
    fn reward_reads_the_map() {
        let grid = GridSpec { origin: [0.0, 0.0], step: 20.0, points: 3, altitude: 80.0 };
        let data = (0..9)
            .flat_map(|k| {
                let strong = if k == 4 { -70.0 } else { -50.0 };
                [Candidate { cell: 0, rsrp: strong }, Candidate { cell: 1, rsrp: -80.0 }]
            })
            .collect();
        let m = RadioMap::from_candidates(grid, 2, 2, 0, data).unwrap();
        let a = State::at(GridPoint::new(0, 0), 0, &m);
        let b = State::at(GridPoint::new(1, 1), 0, &m);
        let w = Weights::PROPOSED;
        assert!((reward(&a, &b, &m, &w, -65.0) - (-0.025 - 0.9)).abs() < 1e-15);
        let c = State::at(GridPoint::new(1, 0), 1, &m);
        assert!((reward(&a, &c, &m, &w, -65.0) - (-0.025 / 2f64.sqrt() - 0.9 - 0.075)).abs() < 1e-15);
    }
}
