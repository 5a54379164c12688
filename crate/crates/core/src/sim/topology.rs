//! Station layout, coverage sets and the grid-to-station distance table.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::traffic::TrafficSeries;
use crate::Real;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridDims {
    pub nx: usize,
    pub ny: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BsSpec {
    pub id: usize,
    /// Position in grid units.
    pub x: f64,
    pub y: f64,
    pub radius: f64,
    /// Traffic units per slot; may be filled in later by a capacity rule.
    #[serde(default)]
    pub capacity: Option<f64>,
}

/// Topology file contents (`{"grid": {...}, "bs": [...]}`).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySpec {
    pub grid: GridDims,
    pub bs: Vec<BsSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum CapacityRule {
    /// Every station gets the same capacity.
    Uniform { capacity: f64 },
    /// `C_i = headroom x` peak aggregate demand over the grids only station
    /// `i` covers, floored.
    PeakExclusive { headroom: f64, floor: f64 },
    /// `C_i = headroom x` peak of the station's demand share, splitting each
    /// grid's demand equally among its covering stations.
    PeakShare { headroom: f64, floor: f64 },
}

#[derive(Clone, Debug)]
pub struct BaseStation {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
    pub capacity: Real,
}

#[derive(Clone, Debug)]
pub struct NetworkTopology {
    pub nx: usize,
    pub ny: usize,
    stations: Vec<BaseStation>,
    /// Per station: covered grid indices (row-major `g = x * ny + y`).
    coverage: Vec<Vec<usize>>,
    /// Per grid: stations covering it.
    covered_by: Vec<Vec<usize>>,
    /// `[grid x station]` Euclidean distance between grid center and station.
    dist: Array2<Real>,
}

impl NetworkTopology {
    pub fn n_grids(&self) -> usize {
        self.nx * self.ny
    }

    pub fn n_stations(&self) -> usize {
        self.stations.len()
    }

    pub fn stations(&self) -> &[BaseStation] {
        &self.stations
    }

    pub fn capacity(&self, bs: usize) -> Real {
        self.stations[bs].capacity
    }

    pub fn coverage(&self, bs: usize) -> &[usize] {
        &self.coverage[bs]
    }

    pub fn covered_by(&self, grid: usize) -> &[usize] {
        &self.covered_by[grid]
    }

    pub fn dist(&self, grid: usize, bs: usize) -> Real {
        self.dist[[grid, bs]]
    }

    /// Largest grid-to-station distance over covering pairs.
    pub fn max_covering_dist(&self) -> Real {
        let mut out: Real = 0.0;
        for (bs, grids) in self.coverage.iter().enumerate() {
            for &g in grids {
                out = out.max(self.dist[[g, bs]]);
            }
        }
        out
    }

    /// Grids only this station covers.
    pub fn exclusive_coverage(&self, bs: usize) -> Vec<usize> {
        self.coverage[bs]
            .iter()
            .copied()
            .filter(|&g| self.covered_by[g].len() == 1)
            .collect()
    }

    pub fn apply_capacity_rule(&mut self, rule: &CapacityRule, series: Option<&TrafficSeries>) -> Result<()> {
        match rule {
            CapacityRule::Uniform { capacity } => {
                if *capacity <= 0.0 {
                    return Err(Error::Topology("uniform capacity must be positive".into()));
                }
                for s in &mut self.stations {
                    s.capacity = *capacity;
                }
            }
            CapacityRule::PeakExclusive { headroom, floor } => {
                let series = series.ok_or_else(|| {
                    Error::Topology("peak capacity rule needs a traffic series".into())
                })?;
                for bs in 0..self.n_stations() {
                    let grids = self.exclusive_coverage(bs);
                    let peak = series
                        .frames()
                        .iter()
                        .map(|f| grids.iter().map(|&g| f.flat()[g]).sum::<Real>())
                        .fold(0.0, Real::max);
                    self.stations[bs].capacity = (headroom * peak).max(*floor);
                }
            }
            CapacityRule::PeakShare { headroom, floor } => {
                let series = series.ok_or_else(|| {
                    Error::Topology("peak capacity rule needs a traffic series".into())
                })?;
                for bs in 0..self.n_stations() {
                    let peak = series
                        .frames()
                        .iter()
                        .map(|f| {
                            let flat = f.flat();
                            self.coverage[bs]
                                .iter()
                                .map(|&g| flat[g] / self.covered_by[g].len() as Real)
                                .sum::<Real>()
                        })
                        .fold(0.0, Real::max);
                    self.stations[bs].capacity = (headroom * peak).max(*floor);
                }
            }
        }
        Ok(())
    }
}

/// Build coverage sets and the distance table; every grid must be covered by
/// at least one station and every capacity must be positive.
pub fn build_topology(spec: &TopologySpec) -> Result<NetworkTopology> {
    let (nx, ny) = (spec.grid.nx, spec.grid.ny);
    if nx == 0 || ny == 0 {
        return Err(Error::Topology("grid dims must be positive".into()));
    }
    if spec.bs.is_empty() {
        return Err(Error::Topology("need at least one base station".into()));
    }
    let n_grids = nx * ny;
    let n_bs = spec.bs.len();

    let stations: Vec<BaseStation> = spec
        .bs
        .iter()
        .map(|b| BaseStation {
            x: b.x,
            y: b.y,
            radius: b.radius,
            capacity: b.capacity.unwrap_or(0.0),
        })
        .collect();

    let mut dist = Array2::zeros((n_grids, n_bs));
    let mut coverage = vec![Vec::new(); n_bs];
    let mut covered_by = vec![Vec::new(); n_grids];
    for gx in 0..nx {
        for gy in 0..ny {
            let g = gx * ny + gy;
            let cx = gx as f64 + 0.5;
            let cy = gy as f64 + 0.5;
            for (bs, st) in stations.iter().enumerate() {
                let d = ((cx - st.x).powi(2) + (cy - st.y).powi(2)).sqrt();
                dist[[g, bs]] = d;
                if d <= st.radius {
                    coverage[bs].push(g);
                    covered_by[g].push(bs);
                }
            }
        }
    }

    let uncovered: Vec<usize> = (0..n_grids).filter(|&g| covered_by[g].is_empty()).collect();
    if !uncovered.is_empty() {
        return Err(Error::Topology(format!(
            "grids without any covering station: {uncovered:?}"
        )));
    }

    Ok(NetworkTopology {
        nx,
        ny,
        stations,
        coverage,
        covered_by,
        dist,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec_one_center() -> TopologySpec {
        TopologySpec {
            grid: GridDims { nx: 3, ny: 3 },
            bs: vec![BsSpec {
                id: 0,
                x: 1.5,
                y: 1.5,
                radius: 2.0,
                capacity: Some(10.0),
            }],
        }
    }

    #[test]
    fn center_station_covers_the_whole_3x3_grid() {
        let topo = build_topology(&spec_one_center()).unwrap();
        assert_eq!(topo.coverage(0).len(), 9);
    }

    #[test]
    fn overlapping_stations_share_grids() {
        let spec = TopologySpec {
            grid: GridDims { nx: 2, ny: 1 },
            bs: vec![
                BsSpec { id: 0, x: 0.5, y: 0.5, radius: 1.2, capacity: Some(5.0) },
                BsSpec { id: 1, x: 1.5, y: 0.5, radius: 1.2, capacity: Some(5.0) },
            ],
        };
        let topo = build_topology(&spec).unwrap();
        assert_eq!(topo.coverage(0), &[0, 1]);
        assert_eq!(topo.coverage(1), &[0, 1]);
        assert_eq!(topo.covered_by(0), &[0, 1]);
    }

    #[test]
    fn uncovered_grid_is_reported() {
        let spec = TopologySpec {
            grid: GridDims { nx: 3, ny: 3 },
            bs: vec![BsSpec { id: 0, x: 0.5, y: 0.5, radius: 0.1, capacity: Some(1.0) }],
        };
        match build_topology(&spec) {
            Err(Error::Topology(msg)) => assert!(msg.contains('1'), "{msg}"),
            other => panic!("expected topology error, got {other:?}"),
        }
    }

    #[test]
    fn four_station_fixture_matches_hand_enumerated_coverage() {
        // 4x4 grid, stations at the four quadrant centers with radius 1.5:
        // each covers its own 2x2 block plus the adjacent ring cells within
        // 1.5 of its position.
        let spec = TopologySpec {
            grid: GridDims { nx: 4, ny: 4 },
            bs: (0..4)
                .map(|i| BsSpec {
                    id: i,
                    x: 1.0 + 2.0 * (i / 2) as f64,
                    y: 1.0 + 2.0 * (i % 2) as f64,
                    radius: 1.5,
                    capacity: Some(8.0),
                })
                .collect(),
        };
        let topo = build_topology(&spec).unwrap();
        // station 0 at (1,1): centers within 1.5 are the 2x2 block (0,0)-(1,1)
        // at distance sqrt(0.5), plus (0,2),(1,2),(2,0),(2,1) at distance
        // sqrt(0.25+2.25) ~ 1.58 > 1.5 -> excluded. Hand table: grids 0,1,4,5.
        assert_eq!(topo.coverage(0), &[0, 1, 4, 5]);
        assert_eq!(topo.coverage(1), &[2, 3, 6, 7]);
        assert_eq!(topo.coverage(2), &[8, 9, 12, 13]);
        assert_eq!(topo.coverage(3), &[10, 11, 14, 15]);
        for g in 0..16 {
            assert_eq!(topo.covered_by(g).len(), 1);
        }
    }
}
