use std::path::Path;

use super::mdp::{Action, State};
use super::StateMode;
use crate::error::{Error, Result};
use crate::scenario::GridSpec;

const MAGIC: &[u8; 8] = b"SKYRQTB1";

/// Dense Q-values, laid out `[position][state rank][direction][cell rank]`.
///
/// In compact mode the state-rank axis has length one, giving the
/// `J x J x 8 x M'` table; in extended mode it has length `M'`.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    points: usize,
    state_ranks: usize,
    ranks: usize,
    seed: u64,
    episodes: u64,
    values: Vec<f64>,
}

impl QTable {
    /// All-zero table for a `points x points` grid with `ranks` selectable
    /// cell ranks per action.
    pub fn new(points: usize, ranks: usize, mode: StateMode) -> QTable {
        let state_ranks = match mode {
            StateMode::Compact => 1,
            StateMode::Extended => ranks,
        };
        QTable {
            points,
            state_ranks,
            ranks,
            seed: 0,
            episodes: 0,
            values: vec![0.0; points * points * state_ranks * 8 * ranks],
        }
    }

    pub fn mode(&self) -> StateMode {
        // With a single rank both layouts coincide and report as compact.
        if self.state_ranks == 1 {
            StateMode::Compact
        } else {
            StateMode::Extended
        }
    }

    /// `(J, J, state ranks, 8, M')`.
    pub fn shape(&self) -> [usize; 5] {
        [self.points, self.points, self.state_ranks, 8, self.ranks]
    }

    pub fn ranks(&self) -> usize {
        self.ranks
    }

    pub fn actions(&self) -> usize {
        8 * self.ranks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn episodes(&self) -> u64 {
        self.episodes
    }

    pub(crate) fn set_provenance(&mut self, seed: u64, episodes: u64) {
        self.seed = seed;
        self.episodes = episodes;
    }

    fn row_start(&self, s: &State) -> usize {
        let pos = s.position.j * self.points + s.position.i;
        let srank = if self.state_ranks == 1 { 0 } else { s.rank };
        (pos * self.state_ranks + srank) * self.actions()
    }

    /// Q-values of every action at `s`, indexed by [`Action::index`].
    pub fn row(&self, s: &State) -> &[f64] {
        let k = self.row_start(s);
        &self.values[k..k + self.actions()]
    }

    pub fn get(&self, s: &State, a: Action) -> f64 {
        self.values[self.row_start(s) + a.index(self.ranks)]
    }

    pub fn set(&mut self, s: &State, a: Action, value: f64) {
        let k = self.row_start(s) + a.index(self.ranks);
        self.values[k] = value;
    }

    /// Largest Q-value over the actions allowed by the direction mask.
    pub fn max_legal(&self, s: &State, mask: u8) -> f64 {
        let row = self.row(s);
        let mut best = f64::NEG_INFINITY;
        for d in 0..8 {
            if mask & (1 << d) != 0 {
                for v in &row[d * self.ranks..(d + 1) * self.ranks] {
                    best = best.max(*v);
                }
            }
        }
        best
    }

    /// Legal action with the largest value; ties go to the lowest index.
    pub fn argmax_legal(&self, s: &State, mask: u8) -> Option<Action> {
        let row = self.row(s);
        let mut best: Option<(usize, f64)> = None;
        for d in 0..8 {
            if mask & (1 << d) == 0 {
                continue;
            }
            for r in 0..self.ranks {
                let k = d * self.ranks + r;
                if best.is_none_or(|(_, v)| row[k] > v) {
                    best = Some((k, row[k]));
                }
            }
        }
        best.map(|(k, _)| Action::from_index(k, self.ranks))
    }

    pub fn matches_grid(&self, grid: &GridSpec) -> bool {
        self.points == grid.points
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(48 + self.values.len() * 8);
        out.extend_from_slice(MAGIC);
        for dim in [self.points, self.state_ranks, self.ranks] {
            out.extend_from_slice(&(dim as u32).to_le_bytes());
        }
        out.extend_from_slice(&self.seed.to_le_bytes());
        out.extend_from_slice(&self.episodes.to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<QTable> {
        let bad = |reason: &str| Error::Format { path: "<q-table>".into(), reason: reason.into() };
        if bytes.len() < 36 || &bytes[..8] != MAGIC {
            return Err(bad("bad magic or truncated header"));
        }
        let u32_at = |k: usize| u32::from_le_bytes(bytes[k..k + 4].try_into().unwrap()) as usize;
        let u64_at = |k: usize| u64::from_le_bytes(bytes[k..k + 8].try_into().unwrap());
        let (points, state_ranks, ranks) = (u32_at(8), u32_at(12), u32_at(16));
        let (seed, episodes) = (u64_at(20), u64_at(28));
        let n = points * points * state_ranks * 8 * ranks;
        let body = &bytes[36..];
        if body.len() != n * 8 || ranks == 0 || !(state_ranks == 1 || state_ranks == ranks) {
            return Err(bad("shape does not match payload"));
        }
        let values = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Ok(QTable { points, state_ranks, ranks, seed, episodes, values })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<QTable> {
        let path = path.as_ref();
        QTable::from_bytes(&std::fs::read(path)?).map_err(|e| match e {
            Error::Format { reason, .. } => Error::Format { path: path.to_path_buf(), reason },
            other => other,
        })
    }
}
