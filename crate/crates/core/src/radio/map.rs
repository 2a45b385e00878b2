use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::channel::{is_covered, rsrp};
use crate::error::{Error, Result};
use crate::scenario::{GridPoint, GridSpec, Scenario};

const MAGIC: &[u8; 8] = b"SKYRMAP1";

/// One entry of a per-point candidate list.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub cell: usize,
    /// dBm.
    pub rsrp: f64,
}

/// The `M'` strongest cells at every grid point, strongest first.
///
/// Stored dense and row-major: point `(i, j)` owns the slice starting at
/// `(j * J + i) * M'`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadioMap {
    grid: GridSpec,
    mprime: usize,
    num_cells: usize,
    fingerprint: u64,
    data: Vec<Candidate>,
}

fn rank_order(a: &Candidate, b: &Candidate) -> std::cmp::Ordering {
    b.rsrp.total_cmp(&a.rsrp).then(a.cell.cmp(&b.cell))
}

impl RadioMap {
    /// Builds a map by evaluating `rsrp_of(point, cell)` for every point and
    /// every one of `num_cells` cells, keeping the `mprime` strongest. Ties go
    /// to the lower cell id.
    pub fn from_fn<F>(grid: GridSpec, num_cells: usize, mprime: usize, fingerprint: u64, rsrp_of: F) -> Result<RadioMap>
    where
        F: Fn(GridPoint, usize) -> Result<f64> + Sync,
    {
        grid.validate()?;
        if mprime == 0 || mprime > num_cells {
            return Err(Error::invalid(format!("M' must be in [1, {num_cells}], got {mprime}")));
        }
        let n = grid.points;
        let rows: Vec<Vec<Candidate>> = (0..n)
            .into_par_iter()
            .map(|j| {
                let mut row = Vec::with_capacity(n * mprime);
                let mut all = Vec::with_capacity(num_cells);
                for i in 0..n {
                    let p = GridPoint::new(i, j);
                    all.clear();
                    for cell in 0..num_cells {
                        all.push(Candidate { cell, rsrp: rsrp_of(p, cell)? });
                    }
                    all.sort_by(rank_order);
                    row.extend_from_slice(&all[..mprime]);
                }
                Ok(row)
            })
            .collect::<Result<_>>()?;
        Ok(RadioMap { grid, mprime, num_cells, fingerprint, data: rows.concat() })
    }

    /// Wraps precomputed candidate lists, checking rank order and id
    /// uniqueness.
    pub fn from_candidates(grid: GridSpec, num_cells: usize, mprime: usize, fingerprint: u64, data: Vec<Candidate>) -> Result<RadioMap> {
        grid.validate()?;
        if mprime == 0 || mprime > num_cells {
            return Err(Error::invalid(format!("M' must be in [1, {num_cells}], got {mprime}")));
        }
        if data.len() != grid.len() * mprime {
            return Err(Error::invalid(format!("expected {} candidates, got {}", grid.len() * mprime, data.len())));
        }
        for (k, list) in data.chunks(mprime).enumerate() {
            for (a, c) in list.iter().enumerate() {
                if c.cell >= num_cells || !c.rsrp.is_finite() {
                    return Err(Error::invalid(format!("point {k}: bad candidate {c:?}")));
                }
                if list[..a].iter().any(|o| o.cell == c.cell) {
                    return Err(Error::invalid(format!("point {k}: duplicate cell {}", c.cell)));
                }
            }
            if list.windows(2).any(|w| w[0].rsrp < w[1].rsrp) {
                return Err(Error::invalid(format!("point {k}: candidates not in descending RSRP order")));
            }
        }
        Ok(RadioMap { grid, mprime, num_cells, fingerprint, data })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn mprime(&self) -> usize {
        self.mprime
    }

    pub fn num_cells(&self) -> usize {
        self.num_cells
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn candidates(&self, p: GridPoint) -> &[Candidate] {
        let k = self.grid.index(p) * self.mprime;
        &self.data[k..k + self.mprime]
    }

    pub fn candidate(&self, p: GridPoint, rank: usize) -> Candidate {
        self.candidates(p)[rank]
    }

    pub fn best(&self, p: GridPoint) -> Candidate {
        self.candidate(p, 0)
    }

    /// Fraction of grid points whose strongest cell meets `threshold`.
    pub fn coverage_fraction(&self, threshold: f64) -> f64 {
        let covered = self
            .data
            .chunks(self.mprime)
            .filter(|list| is_covered(list[0].rsrp, threshold))
            .count();
        covered as f64 / self.grid.len() as f64
    }

    /// Checks that this map was built for `scenario` at its altitude.
    pub fn check_matches(&self, scenario: &Scenario) -> Result<()> {
        if self.fingerprint != scenario.radio_fingerprint() {
            return Err(Error::Mismatch(format!(
                "map fingerprint {:016x} != scenario fingerprint {:016x}",
                self.fingerprint,
                scenario.radio_fingerprint()
            )));
        }
        if self.grid != scenario.grid {
            return Err(Error::Mismatch(format!(
                "map grid {:?} differs from scenario grid {:?}",
                self.grid, scenario.grid
            )));
        }
        Ok(())
    }

    /// `i,j,rank,cell_id,rsrp_dbm` for every candidate.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,j,rank,cell_id,rsrp_dbm\n");
        for p in self.grid.points_iter() {
            for (rank, c) in self.candidates(p).iter().enumerate() {
                let _ = writeln!(out, "{},{},{rank},{},{}", p.i, p.j, c.cell, c.rsrp);
            }
        }
        out
    }

    /// Strongest RSRP per point: `i,j,x_m,y_m,max_rsrp_dbm,cell_id`.
    pub fn heatmap_csv(&self) -> String {
        let mut out = String::from("i,j,x_m,y_m,max_rsrp_dbm,cell_id\n");
        for p in self.grid.points_iter() {
            let [x, y, _] = self.grid.coords(p);
            let best = self.best(p);
            let _ = writeln!(out, "{},{},{x},{y},{},{}", p.i, p.j, best.rsrp, best.cell);
        }
        out
    }

    fn payload(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(self.data.len() * 12);
        for c in &self.data {
            buf.extend_from_slice(&(c.cell as u32).to_le_bytes());
            buf.extend_from_slice(&c.rsrp.to_le_bytes());
        }
        buf
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let payload = self.payload();
        let checksum = checksum(&payload);
        let mut out = Vec::with_capacity(payload.len() + 64);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.grid.points as u32).to_le_bytes());
        out.extend_from_slice(&self.grid.step.to_le_bytes());
        out.extend_from_slice(&self.grid.origin[0].to_le_bytes());
        out.extend_from_slice(&self.grid.origin[1].to_le_bytes());
        out.extend_from_slice(&self.grid.altitude.to_le_bytes());
        out.extend_from_slice(&(self.mprime as u32).to_le_bytes());
        out.extend_from_slice(&(self.num_cells as u32).to_le_bytes());
        out.extend_from_slice(&self.fingerprint.to_le_bytes());
        out.extend_from_slice(&checksum.to_le_bytes());
        out.extend_from_slice(&payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<RadioMap> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(format_error("bad magic"));
        }
        let points = r.u32()? as usize;
        let step = r.f64()?;
        let origin = [r.f64()?, r.f64()?];
        let altitude = r.f64()?;
        let mprime = r.u32()? as usize;
        let num_cells = r.u32()? as usize;
        let fingerprint = r.u64()?;
        let stored = r.u64()?;
        let grid = GridSpec { origin, step, points, altitude };
        let payload = &bytes[r.pos..];
        if payload.len() != points * points * mprime * 12 {
            return Err(format_error("payload length does not match header"));
        }
        if checksum(payload) != stored {
            return Err(format_error("checksum mismatch"));
        }
        let data = payload
            .chunks_exact(12)
            .map(|c| Candidate {
                cell: u32::from_le_bytes(c[..4].try_into().unwrap()) as usize,
                rsrp: f64::from_le_bytes(c[4..].try_into().unwrap()),
            })
            .collect();
        RadioMap::from_candidates(grid, num_cells, mprime, fingerprint, data)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<RadioMap> {
        let path = path.as_ref();
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        RadioMap::from_bytes(&bytes).map_err(|e| match e {
            Error::Format { reason, .. } => Error::Format { path: path.to_path_buf(), reason },
            other => other,
        })
    }
}

fn checksum(payload: &[u8]) -> u64 {
    let digest = Sha256::digest(payload);
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

fn format_error(reason: &str) -> Error {
    Error::Format { path: "<radio map>".into(), reason: reason.into() }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        let s = self.bytes.get(self.pos..end).ok_or_else(|| format_error("truncated header"))?;
        self.pos = end;
        Ok(s)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Evaluates every cell at every grid point of `scenario` and keeps the
/// `mprime` strongest per point.
pub fn build_radio_map(scenario: &Scenario, mprime: usize) -> Result<RadioMap> {
    let grid = scenario.grid.clone();
    let cells = &scenario.cells;
    let params = &scenario.channel;
    RadioMap::from_fn(grid.clone(), cells.len(), mprime, scenario.radio_fingerprint(), |p, c| {
        rsrp(&cells[c], grid.coords(p), params)
    })
}
