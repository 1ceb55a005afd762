//! Region model: grid cells, the base station, candidate surface locations,
//! line-of-sight indicators and radio/cost parameters.
//!
//! Node ids follow the cell ids: node 0 is the base station and the candidate
//! location in cell `i` is node `i`. Virtual user vertices for cell `j` are
//! numbered `J + j`.

mod document;
mod graph;
pub mod presets;

use std::collections::{BTreeMap, BTreeSet};

pub use document::{BsDoc, CandidateDoc, CostsDoc, GridDoc, RadioDoc, ScenarioDocument};
pub use graph::{LosEdge, LosGraph};

use crate::cost::CostModel;
use crate::error::{Error, Result, ScenarioError};
use crate::plan::CellId;
use crate::units::{db_to_linear, dbm_to_watts};

pub type NodeId = usize;
pub type VertexId = usize;

pub const BS_NODE: NodeId = 0;

const POSITION_SLACK: f64 = 1e-9;

/// Radio parameters in linear units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioParams {
    pub tx_power_watts: f64,
    pub amp_power_per_element_watts: f64,
    pub noise_power_watts: f64,
    pub bs_antennas: u32,
    pub elements_per_tile_dim: u32,
    pub ref_path_gain: f64,
    pub pathloss_exponent: f64,
    pub wavelength: f64,
    pub element_spacing: f64,
}

impl RadioParams {
    pub fn from_doc(doc: &RadioDoc) -> std::result::Result<Self, ScenarioError> {
        let wavelength = doc.wavelength_m;
        let radio = RadioParams {
            tx_power_watts: dbm_to_watts(doc.p0_dbm),
            amp_power_per_element_watts: dbm_to_watts(doc.pa_dbm),
            noise_power_watts: dbm_to_watts(doc.noise_dbm),
            bs_antennas: doc.m,
            elements_per_tile_dim: doc.n,
            ref_path_gain: db_to_linear(doc.beta0_db),
            pathloss_exponent: doc.alpha,
            wavelength,
            element_spacing: doc.spacing_m.unwrap_or(wavelength / 2.0),
        };
        radio.validate()?;
        Ok(radio)
    }

    pub fn validate(&self) -> std::result::Result<(), ScenarioError> {
        let positive = [
            ("radio.p0_dbm", self.tx_power_watts),
            ("radio.pa_dbm", self.amp_power_per_element_watts),
            ("radio.noise_dbm", self.noise_power_watts),
            ("radio.wavelength_m", self.wavelength),
            ("radio.spacing_m", self.element_spacing),
        ];
        for (path, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(ScenarioError::invalid(path, "must be finite and positive"));
            }
        }
        if self.bs_antennas == 0 {
            return Err(ScenarioError::invalid("radio.m", "need at least one antenna"));
        }
        if self.elements_per_tile_dim == 0 {
            return Err(ScenarioError::invalid("radio.n", "need at least one element per tile side"));
        }
        if !(self.ref_path_gain > 0.0 && self.ref_path_gain <= 1.0) {
            return Err(ScenarioError::invalid("radio.beta0_db", "reference gain must lie in (0, 1] (<= 0 dB)"));
        }
        if !(self.pathloss_exponent.is_finite() && self.pathloss_exponent >= 0.0) {
            return Err(ScenarioError::invalid("radio.alpha", "path-loss exponent must be >= 0"));
        }
        let (c0, ca) = (self.c0(), self.ca());
        if !(c0.is_finite() && c0 > 0.0 && ca.is_finite() && ca > 0.0) {
            return Err(ScenarioError::invalid("radio", "derived transmit/amplifier SNR constants are not finite"));
        }
        Ok(())
    }

    /// Transmit SNR scale `P0 M / sigma^2`.
    pub fn c0(&self) -> f64 {
        self.tx_power_watts * self.bs_antennas as f64 / self.noise_power_watts
    }

    /// Amplifier SNR scale `P_A / sigma^2`.
    pub fn ca(&self) -> f64 {
        self.amp_power_per_element_watts / self.noise_power_watts
    }

    /// `N^2`, elements per tile.
    pub fn tile_elements(&self) -> f64 {
        let n = self.elements_per_tile_dim as f64;
        n * n
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub rows: usize,
    pub cols: usize,
    pub cell_size: f64,
    pub user_height: f64,
}

impl Grid {
    pub fn num_cells(&self) -> usize {
        self.rows * self.cols
    }

    /// `(x_min, y_min, x_max, y_max)`; cells are numbered row-major.
    pub fn cell_rect(&self, cell: CellId) -> (f64, f64, f64, f64) {
        let (r, c) = (cell / self.cols, cell % self.cols);
        let s = self.cell_size;
        (c as f64 * s, r as f64 * s, (c + 1) as f64 * s, (r + 1) as f64 * s)
    }

    pub fn contains(&self, cell: CellId, pos: [f64; 3]) -> bool {
        let (x0, y0, x1, y1) = self.cell_rect(cell);
        pos[0] >= x0 - POSITION_SLACK
            && pos[0] <= x1 + POSITION_SLACK
            && pos[1] >= y0 - POSITION_SLACK
            && pos[1] <= y1 + POSITION_SLACK
    }

    pub fn corners(&self, cell: CellId) -> [[f64; 3]; 4] {
        let (x0, y0, x1, y1) = self.cell_rect(cell);
        let h = self.user_height;
        [[x0, y0, h], [x1, y0, h], [x0, y1, h], [x1, y1, h]]
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub grid: Grid,
    pub bs_cell: CellId,
    pub bs_pos: [f64; 3],
    /// Candidate positions keyed by cell (= node id).
    pub candidates: BTreeMap<CellId, [f64; 3]>,
    /// Unordered node pairs stored as `(min, max)`.
    pub los_nodes: BTreeSet<(NodeId, NodeId)>,
    /// `(node, cell)`: node sees every user location in the cell.
    pub los_users: BTreeSet<(NodeId, CellId)>,
    pub dmax_overrides: BTreeMap<(NodeId, CellId), f64>,
    pub radio: RadioParams,
    pub costs: CostModel,
    pub max_tiles: u32,
    pub warnings: Vec<String>,
}

pub fn load_scenario(text: &str) -> std::result::Result<Scenario, ScenarioError> {
    let doc: ScenarioDocument = serde_json::from_str(text)?;
    Scenario::from_document(&doc)
}

impl Scenario {
    pub fn from_document(doc: &ScenarioDocument) -> std::result::Result<Self, ScenarioError> {
        let g = &doc.grid;
        if g.rows == 0 || g.cols == 0 {
            return Err(ScenarioError::invalid("grid", "rows and cols must be >= 1"));
        }
        if !(g.cell_size_m.is_finite() && g.cell_size_m > 0.0) {
            return Err(ScenarioError::invalid("grid.cell_size_m", "must be positive"));
        }
        let user_height = g.user_height_m.unwrap_or(0.0);
        if !user_height.is_finite() {
            return Err(ScenarioError::invalid("grid.user_height_m", "must be finite"));
        }
        let grid = Grid {
            rows: g.rows,
            cols: g.cols,
            cell_size: g.cell_size_m,
            user_height,
        };
        let num_cells = grid.num_cells();

        if doc.bs.cell >= num_cells {
            return Err(ScenarioError::invalid("bs.cell", format!("cell {} outside grid of {num_cells} cells", doc.bs.cell)));
        }
        check_pos("bs.pos", doc.bs.pos)?;
        if !grid.contains(doc.bs.cell, doc.bs.pos) {
            return Err(ScenarioError::invalid("bs.pos", format!("position lies outside cell {}", doc.bs.cell)));
        }

        let mut candidates = BTreeMap::new();
        for (k, cand) in doc.candidates.iter().enumerate() {
            let path = format!("candidates[{k}]");
            if cand.cell >= num_cells {
                return Err(ScenarioError::invalid(format!("{path}.cell"), format!("cell {} outside grid", cand.cell)));
            }
            if cand.id != cand.cell {
                return Err(ScenarioError::invalid(
                    format!("{path}.id"),
                    format!("node id {} must equal its cell id {}", cand.id, cand.cell),
                ));
            }
            if cand.cell == BS_NODE || cand.cell == doc.bs.cell {
                return Err(ScenarioError::invalid(
                    format!("{path}.cell"),
                    format!("cell {} is reserved for the base station", cand.cell),
                ));
            }
            check_pos(&format!("{path}.pos"), cand.pos)?;
            if !grid.contains(cand.cell, cand.pos) {
                return Err(ScenarioError::invalid(
                    format!("{path}.pos"),
                    format!("candidate {} lies outside its cell", cand.id),
                ));
            }
            if candidates.insert(cand.cell, cand.pos).is_some() {
                return Err(ScenarioError::invalid(
                    format!("{path}.cell"),
                    format!("duplicate candidate in cell {}", cand.cell),
                ));
            }
        }

        let node_exists = |n: NodeId| n == BS_NODE || candidates.contains_key(&n);

        let mut los_nodes = BTreeSet::new();
        for (k, &[a, b]) in doc.los_nodes.iter().enumerate() {
            for n in [a, b] {
                if !node_exists(n) {
                    return Err(ScenarioError::invalid(format!("los_nodes[{k}]"), format!("node {n} is not declared")));
                }
            }
            if a == b {
                return Err(ScenarioError::invalid(format!("los_nodes[{k}]"), format!("self-pair on node {a}")));
            }
            los_nodes.insert((a.min(b), a.max(b)));
        }

        let mut los_users = BTreeSet::new();
        for (k, &[n, c]) in doc.los_users.iter().enumerate() {
            if !node_exists(n) {
                return Err(ScenarioError::invalid(format!("los_users[{k}]"), format!("node {n} is not declared")));
            }
            if c >= num_cells {
                return Err(ScenarioError::invalid(format!("los_users[{k}]"), format!("cell {c} outside grid")));
            }
            los_users.insert((n, c));
        }
        // every node covers its own cell
        los_users.insert((BS_NODE, doc.bs.cell));
        for &c in candidates.keys() {
            los_users.insert((c, c));
        }

        let mut dmax_overrides = BTreeMap::new();
        for (k, &(n, c, meters)) in doc.dmax_overrides.iter().flatten().enumerate() {
            let path = format!("dmax_overrides[{k}]");
            if !los_users.contains(&(n, c)) {
                return Err(ScenarioError::invalid(path, format!("pair ({n}, {c}) is not LoS-covered")));
            }
            if !(meters.is_finite() && meters > 0.0) {
                return Err(ScenarioError::invalid(path, "distance must be positive"));
            }
            dmax_overrides.insert((n, c), meters);
        }

        let radio = RadioParams::from_doc(&doc.radio)?;
        let costs = CostModel {
            cell_use_passive: doc.costs.cp0,
            cell_use_active: doc.costs.ca0,
            per_tile_passive: doc.costs.cp,
            per_tile_active: doc.costs.ca,
        };
        for (name, c) in [("cp0", costs.cell_use_passive), ("ca0", costs.cell_use_active), ("cp", costs.per_tile_passive), ("ca", costs.per_tile_active)] {
            if c.as_f64() < 0.0 {
                return Err(ScenarioError::invalid(format!("costs.{name}"), "costs must be >= 0"));
            }
        }
        if doc.max_tiles < 1 {
            return Err(ScenarioError::invalid("max_tiles", "must be >= 1"));
        }

        let scenario = Scenario {
            grid,
            bs_cell: doc.bs.cell,
            bs_pos: doc.bs.pos,
            candidates,
            los_nodes,
            los_users,
            dmax_overrides,
            radio,
            costs,
            max_tiles: doc.max_tiles,
            warnings: costs.warnings(),
        };
        // Coincident nodes would give zero-length links.
        for &(a, b) in &scenario.los_nodes {
            if scenario.node_distance(a, b) <= 0.0 {
                return Err(ScenarioError::invalid("los_nodes", format!("nodes {a} and {b} coincide")));
            }
        }
        Ok(scenario)
    }

    pub fn to_document(&self) -> ScenarioDocument {
        use crate::units::{linear_to_db, watts_to_dbm};
        let r = &self.radio;
        ScenarioDocument {
            grid: GridDoc {
                rows: self.grid.rows,
                cols: self.grid.cols,
                cell_size_m: self.grid.cell_size,
                user_height_m: Some(self.grid.user_height),
            },
            bs: BsDoc { cell: self.bs_cell, pos: self.bs_pos },
            candidates: self
                .candidates
                .iter()
                .map(|(&c, &pos)| CandidateDoc { id: c, cell: c, pos })
                .collect(),
            los_nodes: self.los_nodes.iter().map(|&(a, b)| [a, b]).collect(),
            los_users: self.los_users.iter().map(|&(n, c)| [n, c]).collect(),
            dmax_overrides: if self.dmax_overrides.is_empty() {
                None
            } else {
                Some(self.dmax_overrides.iter().map(|(&(n, c), &m)| (n, c, m)).collect())
            },
            radio: RadioDoc {
                p0_dbm: watts_to_dbm(r.tx_power_watts),
                pa_dbm: watts_to_dbm(r.amp_power_per_element_watts),
                noise_dbm: watts_to_dbm(r.noise_power_watts),
                m: r.bs_antennas,
                n: r.elements_per_tile_dim,
                beta0_db: linear_to_db(r.ref_path_gain),
                alpha: r.pathloss_exponent,
                wavelength_m: r.wavelength,
                spacing_m: Some(r.element_spacing),
            },
            costs: CostsDoc {
                cp0: self.costs.cell_use_passive,
                ca0: self.costs.cell_use_active,
                cp: self.costs.per_tile_passive,
                ca: self.costs.per_tile_active,
            },
            max_tiles: self.max_tiles,
        }
    }

    pub fn num_cells(&self) -> usize {
        self.grid.num_cells()
    }

    pub fn user_vertex(&self, cell: CellId) -> VertexId {
        self.num_cells() + cell
    }

    pub fn is_user_vertex(&self, v: VertexId) -> bool {
        v >= self.num_cells()
    }

    pub fn is_candidate(&self, cell: CellId) -> bool {
        self.candidates.contains_key(&cell)
    }

    pub fn candidate_cells(&self) -> Vec<CellId> {
        self.candidates.keys().copied().collect()
    }

    pub fn node_exists(&self, node: NodeId) -> bool {
        node == BS_NODE || self.candidates.contains_key(&node)
    }

    pub fn node_position(&self, node: NodeId) -> Option<[f64; 3]> {
        if node == BS_NODE {
            Some(self.bs_pos)
        } else {
            self.candidates.get(&node).copied()
        }
    }

    pub fn nodes_los(&self, a: NodeId, b: NodeId) -> bool {
        self.los_nodes.contains(&(a.min(b), a.max(b)))
    }

    fn node_distance(&self, a: NodeId, b: NodeId) -> f64 {
        let (pa, pb) = (self.node_position(a).unwrap(), self.node_position(b).unwrap());
        distance(pa, pb)
    }

    /// Worst-case user location of `cell` as seen from `node`: the farthest
    /// cell corner on the user plane.
    pub fn worst_case_user_position(&self, node: NodeId, cell: CellId) -> Result<[f64; 3]> {
        let p = self
            .node_position(node)
            .ok_or_else(|| Error::Argument(format!("node {node} is not declared")))?;
        Ok(farthest_corner(&self.grid, cell, p))
    }

    pub fn worst_case_distance(&self, node: NodeId, cell: CellId) -> Result<f64> {
        if !self.los_users.contains(&(node, cell)) {
            return Err(Error::Argument(format!("node {node} does not cover cell {cell}")));
        }
        if let Some(&d) = self.dmax_overrides.get(&(node, cell)) {
            return Ok(d);
        }
        let p = self.node_position(node).expect("covered nodes exist");
        Ok(distance(p, farthest_corner(&self.grid, cell, p)))
    }

    /// Distance along a graph edge (node-node or node-user).
    pub fn edge_distance(&self, from: VertexId, to: VertexId) -> Result<f64> {
        if self.is_user_vertex(to) {
            self.worst_case_distance(from, to - self.num_cells())
        } else if self.nodes_los(from, to) {
            Ok(self.node_distance(from, to))
        } else {
            Err(Error::MissingEdge { from, to })
        }
    }

    pub fn graph(&self) -> LosGraph {
        LosGraph::build(self)
    }

    /// Copy with a subset of candidates removed, along with their LoS pairs.
    pub fn restricted(&self, keep: &BTreeSet<CellId>) -> Scenario {
        let mut s = self.clone();
        s.candidates.retain(|c, _| keep.contains(c));
        let exists = |n: NodeId| n == BS_NODE || keep.contains(&n) && self.candidates.contains_key(&n);
        s.los_nodes.retain(|&(a, b)| exists(a) && exists(b));
        s.los_users.retain(|&(n, _)| exists(n));
        s.dmax_overrides.retain(|&(n, _), _| exists(n));
        s
    }
}

fn farthest_corner(grid: &Grid, cell: CellId, from: [f64; 3]) -> [f64; 3] {
    let mut best = grid.corners(cell)[0];
    for c in grid.corners(cell) {
        if distance(from, c) > distance(from, best) {
            best = c;
        }
    }
    best
}

fn check_pos(path: &str, pos: [f64; 3]) -> std::result::Result<(), ScenarioError> {
    if pos.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(ScenarioError::invalid(path, "coordinates must be finite"))
    }
}

pub fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}
