use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::{GridPoint, GridSpec};

/// Ordered waypoints with the serving cell and its RSRP at each one.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub waypoints: Vec<GridPoint>,
    pub cells: Vec<usize>,
    /// Serving-cell RSRP per waypoint, dBm.
    pub rsrps: Vec<f64>,
}

pub const CSV_HEADER: &str = "step,i,j,x_m,y_m,cell_id,rsrp_dbm";

impl Trajectory {
    pub fn push(&mut self, point: GridPoint, cell: usize, rsrp: f64) {
        self.waypoints.push(point);
        self.cells.push(cell);
        self.rsrps.push(rsrp);
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    pub fn first(&self) -> Option<GridPoint> {
        self.waypoints.first().copied()
    }

    pub fn last(&self) -> Option<GridPoint> {
        self.waypoints.last().copied()
    }

    pub fn segment_lengths<'a>(&'a self, grid: &'a GridSpec) -> impl Iterator<Item = f64> + 'a {
        self.waypoints.windows(2).map(|w| grid.distance(w[0], w[1]))
    }

    pub fn total_distance(&self, grid: &GridSpec) -> f64 {
        self.segment_lengths(grid).sum()
    }

    /// Equal-length records and 8-neighbour steps throughout.
    pub fn is_well_formed(&self) -> bool {
        self.cells.len() == self.waypoints.len()
            && self.rsrps.len() == self.waypoints.len()
            && self.waypoints.windows(2).all(|w| w[0].is_neighbor(&w[1]))
    }

    pub fn reversed(&self) -> Trajectory {
        Trajectory {
            waypoints: self.waypoints.iter().rev().copied().collect(),
            cells: self.cells.iter().rev().copied().collect(),
            rsrps: self.rsrps.iter().rev().copied().collect(),
        }
    }

    pub fn to_csv(&self, grid: &GridSpec) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for (k, ((p, c), r)) in self.waypoints.iter().zip(&self.cells).zip(&self.rsrps).enumerate() {
            let [x, y, _] = grid.coords(*p);
            let _ = writeln!(out, "{k},{},{},{x},{y},{c},{r}", p.i, p.j);
        }
        out
    }

    pub fn save_csv(&self, path: impl AsRef<Path>, grid: &GridSpec) -> Result<()> {
        std::fs::write(path, self.to_csv(grid))?;
        Ok(())
    }

    pub fn from_csv(text: &str) -> Result<Trajectory> {
        let bad = |reason: String| Error::Format { path: "<trajectory csv>".into(), reason };
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == CSV_HEADER => {}
            other => return Err(bad(format!("unexpected header {other:?}"))),
        }
        let mut t = Trajectory::default();
        for (n, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 7 {
                return Err(bad(format!("line {}: expected 7 fields", n + 2)));
            }
            let parse_err = |e: &dyn std::fmt::Display| bad(format!("line {}: {e}", n + 2));
            let i = fields[1].parse().map_err(|e| parse_err(&e))?;
            let j = fields[2].parse().map_err(|e| parse_err(&e))?;
            let c = fields[5].parse().map_err(|e| parse_err(&e))?;
            let r = fields[6].parse().map_err(|e| parse_err(&e))?;
            t.push(GridPoint::new(i, j), c, r);
        }
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_and_shape() {
        let grid = GridSpec { origin: [0.0, 0.0], step: 20.0, points: 5, altitude: 40.0 };
        let mut t = Trajectory::default();
        t.push(GridPoint::new(0, 0), 3, -60.5);
        t.push(GridPoint::new(1, 1), 3, -70.25);
        t.push(GridPoint::new(2, 1), 4, -64.0);
        assert!(t.is_well_formed());
        let back = Trajectory::from_csv(&t.to_csv(&grid)).unwrap();
        assert_eq!(back, t);
        assert!((t.total_distance(&grid) - 20.0 * (1.0 + 2f64.sqrt())).abs() < 1e-12);
        assert_eq!(t.reversed().reversed(), t);
    }

    #[test]
    fn rejects_jumps_and_bad_csv() {
        let mut t = Trajectory::default();
        t.push(GridPoint::new(0, 0), 0, 0.0);
        t.push(GridPoint::new(2, 0), 0, 0.0);
        assert!(!t.is_well_formed());
        assert!(Trajectory::from_csv("nope\n1,2").is_err());
    }
}
