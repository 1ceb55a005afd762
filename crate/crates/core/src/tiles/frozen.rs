//! Per-cell path freezing. With one path fixed per cell the SNR constraints
//! become convex in `x = ln T`.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::Result;
use crate::plan::{CellId, Locations, PlanView};
use crate::routing::{PathSolution, Router};
use crate::scenario::{Scenario, VertexId};
use crate::snr::path_hop_gains;

/// One exponential term of an inverse SNR: `exp(offset + sum coeff * x_cell)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogTerm {
    pub coeffs: Vec<(CellId, f64)>,
    pub offset: f64,
}

impl LogTerm {
    fn new(offset: f64) -> Self {
        LogTerm { coeffs: Vec::new(), offset }
    }

    fn add(&mut self, cell: CellId, coeff: f64) {
        match self.coeffs.iter_mut().find(|(c, _)| *c == cell) {
            Some((_, a)) => *a += coeff,
            None => self.coeffs.push((cell, coeff)),
        }
    }

    pub fn exponent(&self, x: &dyn Fn(CellId) -> f64) -> f64 {
        self.offset + self.coeffs.iter().map(|&(c, a)| a * x(c)).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FrozenPath {
    Direct {
        snr: f64,
    },
    /// `ln_c` is `ln C~0`, the inverse SNR at one tile per surface.
    AllPassive {
        path: Vec<VertexId>,
        ln_c: f64,
    },
    /// `ln_c0`, `ln_ca` are `ln C-0` and `ln C-A` of the two sub-paths.
    Hybrid {
        path: Vec<VertexId>,
        airs: CellId,
        airs_position: usize,
        ln_c0: f64,
        ln_ca: f64,
    },
    Unreachable,
}

impl FrozenPath {
    /// Terms whose sum is the inverse SNR as a function of `x = ln T`, or
    /// `None` for an unreachable cell.
    pub fn inverse_snr_terms(&self, tile_elements: f64) -> Option<Vec<LogTerm>> {
        let reflectors = |path: &[VertexId]| path[1..path.len() - 1].to_vec();
        Some(match self {
            FrozenPath::Direct { snr } => vec![LogTerm::new(-snr.ln())],
            FrozenPath::AllPassive { path, ln_c } => {
                let mut t = LogTerm::new(*ln_c);
                for c in reflectors(path) {
                    t.add(c, -2.0);
                }
                vec![t]
            }
            FrozenPath::Hybrid { path, airs, airs_position, ln_c0, ln_ca } => {
                let refl = reflectors(path);
                let (up, down) = refl.split_at(airs_position - 1);
                let mut first = LogTerm::new(ln_c0 - tile_elements.ln());
                let mut second = LogTerm::new(*ln_ca);
                let mut third = LogTerm::new(ln_c0 + ln_ca);
                for &c in up {
                    first.add(c, -2.0);
                    third.add(c, -2.0);
                }
                first.add(*airs, -1.0);
                for &c in down {
                    second.add(c, -2.0);
                    third.add(c, -2.0);
                }
                vec![first, second, third]
            }
            FrozenPath::Unreachable => return None,
        })
    }

    pub fn kind_str(&self) -> &'static str {
        match self {
            FrozenPath::Direct { .. } => "direct",
            FrozenPath::AllPassive { .. } => "all_passive",
            FrozenPath::Hybrid { .. } => "hybrid",
            FrozenPath::Unreachable => "unreachable",
        }
    }
}

/// One frozen path per cell of the region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrozenPathSet {
    pub locations: Locations,
    pub cells: Vec<FrozenPath>,
    tile_elements: f64,
}

impl FrozenPathSet {
    pub fn tile_elements(&self) -> f64 {
        self.tile_elements
    }

    /// Frozen-path SNR of `cell` at real tile counts `tiles(cell)`.
    pub fn snr(&self, cell: CellId, tiles: &dyn Fn(CellId) -> f64) -> Option<f64> {
        let terms = self.cells[cell].inverse_snr_terms(self.tile_elements)?;
        let x = |c: CellId| tiles(c).ln();
        let inv: f64 = terms.iter().map(|t| t.exponent(&x).exp()).sum();
        Some(1.0 / inv)
    }

    /// Whether every frozen path meets `gamma0` at the given tiles.
    pub fn satisfied(&self, tiles: &dyn Fn(CellId) -> f64, gamma0: f64) -> bool {
        (0..self.cells.len()).all(|c| matches!(self.snr(c, tiles), Some(s) if s >= gamma0))
    }
}

fn ln_inverse_gains(scenario: &Scenario, path: &[VertexId]) -> Result<Vec<f64>> {
    Ok(path_hop_gains(scenario, path)?.into_iter().map(|g| -g.ln()).collect())
}

fn freeze_cell(scenario: &Scenario, sol: PathSolution) -> Result<FrozenPath> {
    let r = &scenario.radio;
    let ln_n4 = 2.0 * r.tile_elements().ln();
    Ok(match sol.kind {
        crate::routing::PathKind::Direct => FrozenPath::Direct { snr: sol.snr_linear.unwrap() },
        crate::routing::PathKind::AllPassive => {
            let hops = ln_inverse_gains(scenario, &sol.path)?;
            let reflections = (hops.len() - 1) as f64;
            let ln_c = hops.iter().sum::<f64>() - reflections * ln_n4 - r.c0().ln();
            FrozenPath::AllPassive { path: sol.path, ln_c }
        }
        crate::routing::PathKind::Hybrid => {
            let airs = sol.airs_vertex.unwrap();
            let l = sol.path.iter().position(|&v| v == airs).unwrap();
            let hops = ln_inverse_gains(scenario, &sol.path)?;
            let big_l = hops.len() - 1;
            let ln_c0 = hops[..l].iter().sum::<f64>() - (l - 1) as f64 * ln_n4 - r.c0().ln();
            let ln_ca = hops[l..].iter().sum::<f64>() - (big_l - l + 1) as f64 * ln_n4 - r.ca().ln();
            FrozenPath::Hybrid { path: sol.path, airs, airs_position: l, ln_c0, ln_ca }
        }
        crate::routing::PathKind::Unreachable => FrozenPath::Unreachable,
    })
}

/// Freeze one path per cell with every surface at `tiles` tiles: hybrid if
/// it is at least as good as both alternatives, all-passive if strictly
/// better than both, otherwise direct.
pub fn freeze_paths_at(
    scenario: &Scenario,
    router: &Router,
    locations: &Locations,
    tiles: u32,
) -> Result<FrozenPathSet> {
    let view = PlanView::from_locations(locations, scenario.num_cells(), tiles as f64);
    let routed = router.route(&view)?;
    let snr = |s: &Option<PathSolution>| s.as_ref().and_then(|p| p.snr_linear);
    let gt = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (Some(a), Some(b)) => a.partial_cmp(&b) == Some(Ordering::Greater),
        (Some(_), None) => true,
        _ => false,
    };
    let mut cells = Vec::with_capacity(scenario.num_cells());
    for cell in 0..scenario.num_cells() {
        let (direct, hybrid, passive) = (routed.direct(cell), routed.best_hybrid(cell), routed.best_all_passive(cell));
        let (d, h, p) = (snr(&direct), snr(&hybrid), snr(&passive));
        let chosen = if h.is_some() && !gt(d, h) && !gt(p, h) {
            hybrid
        } else if gt(p, d) && gt(p, h) {
            passive
        } else {
            direct
        };
        cells.push(match chosen {
            Some(sol) => freeze_cell(scenario, sol)?,
            None => FrozenPath::Unreachable,
        });
    }
    Ok(FrozenPathSet {
        locations: locations.clone(),
        cells,
        tile_elements: scenario.radio.tile_elements(),
    })
}

/// Freeze at one tile per surface.
pub fn freeze_paths(scenario: &Scenario, locations: &Locations) -> Result<FrozenPathSet> {
    freeze_paths_at(scenario, &Router::new(scenario), locations, 1)
}
