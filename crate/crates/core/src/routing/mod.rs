//! Beam routing: per-cell selection of the best direct, hybrid or
//! all-passive LoS path for a given deployment.
//!
//! Path SNRs are products of per-hop factors, so maximizing SNR is a shortest
//! path problem over natural-log edge weights. Edges that cannot carry a valid
//! path in a given view are excluded rather than weighted infinite.

mod bellman_ford;
mod brute;

use std::cmp::Ordering;

use serde::Serialize;

pub use bellman_ford::{shortest_paths, ShortestPathResult, ShortestPathTree};
pub use brute::{brute_force_best_path, enumerate_simple_paths, BRUTE_FORCE_VERTEX_LIMIT};

use crate::error::Result;
use crate::plan::{CellId, DeploymentPlan, PlanView, Role};
use crate::scenario::{LosGraph, Scenario, VertexId, BS_NODE};
use crate::units::linear_to_db;

/// Exponent clamp before `exp`.
const EXP_CLAMP: f64 = 700.0;

pub(crate) fn clamped_exp(x: f64) -> f64 {
    x.clamp(-EXP_CLAMP, EXP_CLAMP).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    Direct,
    Hybrid,
    AllPassive,
    Unreachable,
}

impl PathKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PathKind::Direct => "direct",
            PathKind::Hybrid => "hybrid",
            PathKind::AllPassive => "all_passive",
            PathKind::Unreachable => "unreachable",
        }
    }

    /// Rank used to break exact SNR ties: hybrid, then all-passive, then direct.
    fn tie_rank(self) -> u8 {
        match self {
            PathKind::Hybrid => 3,
            PathKind::AllPassive => 2,
            PathKind::Direct => 1,
            PathKind::Unreachable => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathSolution {
    pub cell: CellId,
    pub kind: PathKind,
    pub path: Vec<VertexId>,
    pub airs_vertex: Option<VertexId>,
    /// `None` when the cell is unreachable.
    pub snr_linear: Option<f64>,
}

impl PathSolution {
    pub fn unreachable(cell: CellId) -> Self {
        PathSolution {
            cell,
            kind: PathKind::Unreachable,
            path: Vec::new(),
            airs_vertex: None,
            snr_linear: None,
        }
    }

    pub fn snr_db(&self) -> Option<f64> {
        self.snr_linear.map(linear_to_db)
    }

    /// `true` when this cell meets `gamma0`. Unreachable never does.
    pub fn meets(&self, gamma0: f64) -> bool {
        matches!(self.snr_linear, Some(s) if s >= gamma0)
    }

    /// Ordering by SNR with unreachable lowest and the type tie rule.
    pub fn compare(&self, other: &PathSolution) -> Ordering {
        match (self.snr_linear, other.snr_linear) {
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Less,
            (Some(_), None) => Ordering::Greater,
            (Some(a), Some(b)) => a
                .partial_cmp(&b)
                .unwrap_or(Ordering::Equal)
                .then(self.kind.tie_rank().cmp(&other.kind.tie_rank())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViewMode {
    /// Paths through exactly one designated active surface.
    Hybrid { airs: VertexId },
    AllPassive,
}

/// Precomputed per-scenario routing data: the LoS graph and `ln kappa^-2`
/// for every edge.
#[derive(Debug, Clone)]
pub struct Router {
    graph: LosGraph,
    /// `(from, to, ln kappa^-2)` in deterministic order.
    edges: Vec<(VertexId, VertexId, f64)>,
    num_cells: usize,
    c0: f64,
    ca: f64,
    tile_elements: f64,
}

impl Router {
    pub fn new(scenario: &Scenario) -> Self {
        let graph = scenario.graph();
        let r = &scenario.radio;
        let edges = graph
            .edges()
            .map(|e| {
                let ln_inv_gain = r.pathloss_exponent * e.distance.ln() - r.ref_path_gain.ln();
                (e.from, e.to, ln_inv_gain)
            })
            .collect();
        Router {
            num_cells: scenario.num_cells(),
            c0: r.c0(),
            ca: r.ca(),
            tile_elements: r.tile_elements(),
            graph,
            edges,
        }
    }

    pub fn graph(&self) -> &LosGraph {
        &self.graph
    }

    pub fn view<'a>(&'a self, plan: &'a PlanView, mode: ViewMode) -> WeightedView<'a> {
        WeightedView { router: self, plan, mode }
    }

    /// Shortest-path trees for every view the plan needs.
    pub fn route(&self, plan: &PlanView) -> Result<RoutedPlan<'_>> {
        let passive = shortest_paths(&self.view(plan, ViewMode::AllPassive), BS_NODE)?;
        let mut hybrid = Vec::new();
        for airs in plan.active_cells() {
            let view = self.view(plan, ViewMode::Hybrid { airs });
            let to_airs = shortest_paths(&view, BS_NODE)?;
            let from_airs = shortest_paths(&view, airs)?;
            hybrid.push(HybridTrees { airs, to_airs, from_airs });
        }
        Ok(RoutedPlan {
            router: self,
            tiles: plan.clone(),
            passive,
            hybrid,
        })
    }

    /// Direct-link SNR for a cell, if the BS covers it.
    pub fn direct(&self, cell: CellId) -> Option<PathSolution> {
        let user = self.num_cells + cell;
        let &(_, _, ln_inv) = self.edges.iter().find(|&&(f, t, _)| f == BS_NODE && t == user)?;
        Some(PathSolution {
            cell,
            kind: PathKind::Direct,
            path: vec![BS_NODE, user],
            airs_vertex: None,
            snr_linear: Some(self.c0 * clamped_exp(-ln_inv)),
        })
    }
}

/// Edge weights of one routing view over a fixed plan.
pub struct WeightedView<'a> {
    router: &'a Router,
    plan: &'a PlanView,
    mode: ViewMode,
}

impl<'a> WeightedView<'a> {
    pub fn mode(&self) -> ViewMode {
        self.mode
    }

    pub fn id_space(&self) -> usize {
        self.router.graph.id_space()
    }

    /// Weight of an edge, or `None` if the view excludes it.
    pub fn weight(&self, from: VertexId, to: VertexId, ln_inv_gain: f64) -> Option<f64> {
        if from >= self.router.num_cells {
            return None;
        }
        let reflect = |cell: CellId| {
            let t = self.plan.tiles(cell);
            ln_inv_gain - (t * t * self.router.tile_elements * self.router.tile_elements).ln()
        };
        match self.mode {
            ViewMode::Hybrid { airs } => {
                if from == BS_NODE {
                    Some(ln_inv_gain)
                } else if from == airs || self.plan.role(from) == Some(Role::Passive) {
                    Some(reflect(from))
                } else {
                    None
                }
            }
            ViewMode::AllPassive => {
                if from == BS_NODE {
                    (to < self.router.num_cells).then_some(ln_inv_gain)
                } else if self.plan.role(from) == Some(Role::Passive) {
                    Some(reflect(from))
                } else {
                    None
                }
            }
        }
    }

    /// Included edges with their weights, in a fixed order.
    pub fn weighted_edges(&self) -> impl Iterator<Item = (VertexId, VertexId, f64)> + '_ {
        self.router
            .edges
            .iter()
            .filter_map(move |&(f, t, g)| self.weight(f, t, g).map(|w| (f, t, w)))
    }
}

struct HybridTrees {
    airs: VertexId,
    to_airs: ShortestPathTree,
    from_airs: ShortestPathTree,
}

/// Routing results for one plan; answers per-cell queries.
pub struct RoutedPlan<'a> {
    router: &'a Router,
    tiles: PlanView,
    passive: ShortestPathTree,
    hybrid: Vec<HybridTrees>,
}

impl<'a> RoutedPlan<'a> {
    pub fn direct(&self, cell: CellId) -> Option<PathSolution> {
        self.router.direct(cell)
    }

    /// Best hybrid path over all designated active surfaces.
    pub fn best_hybrid(&self, cell: CellId) -> Option<PathSolution> {
        let user = self.router.num_cells + cell;
        let mut best: Option<PathSolution> = None;
        for h in &self.hybrid {
            let (Some(up), Some(down)) = (h.to_airs.result(h.airs), h.from_airs.result(user)) else {
                continue;
            };
            let snr = compose_hybrid(
                up.weight,
                down.weight,
                self.router.c0,
                self.router.ca,
                self.router.tile_elements * self.tiles.tiles(h.airs),
            );
            if best.as_ref().is_none_or(|b| snr > b.snr_linear.unwrap()) {
                let mut path = up.path;
                path.extend_from_slice(&down.path[1..]);
                best = Some(PathSolution {
                    cell,
                    kind: PathKind::Hybrid,
                    path,
                    airs_vertex: Some(h.airs),
                    snr_linear: Some(snr),
                });
            }
        }
        best
    }

    pub fn best_all_passive(&self, cell: CellId) -> Option<PathSolution> {
        let user = self.router.num_cells + cell;
        let r = self.passive.result(user)?;
        Some(PathSolution {
            cell,
            kind: PathKind::AllPassive,
            path: r.path,
            airs_vertex: None,
            snr_linear: Some(self.router.c0 * clamped_exp(-r.weight)),
        })
    }

    /// Best of the three transmission types; ties go hybrid, all-passive, direct.
    pub fn overall(&self, cell: CellId) -> PathSolution {
        let mut best = PathSolution::unreachable(cell);
        for cand in [self.best_hybrid(cell), self.best_all_passive(cell), self.direct(cell)]
            .into_iter()
            .flatten()
        {
            if cand.compare(&best) == Ordering::Greater {
                best = cand;
            }
        }
        best
    }

    pub fn all_cells(&self) -> Vec<PathSolution> {
        (0..self.router.num_cells).map(|c| self.overall(c)).collect()
    }
}

/// Hybrid SNR from the two sub-path log losses.
pub fn compose_hybrid(lambda_up: f64, lambda_down: f64, c0: f64, ca: f64, airs_elements: f64) -> f64 {
    let inv = clamped_exp(lambda_up) / (c0 * airs_elements)
        + clamped_exp(lambda_down) / ca
        + clamped_exp(lambda_up + lambda_down) / (c0 * ca);
    1.0 / inv
}

pub fn best_hybrid(scenario: &Scenario, plan: &DeploymentPlan, cell: CellId) -> Result<Option<PathSolution>> {
    let router = Router::new(scenario);
    let view = PlanView::from_plan(plan, scenario.num_cells());
    Ok(router.route(&view)?.best_hybrid(cell))
}

pub fn best_all_passive(scenario: &Scenario, plan: &DeploymentPlan, cell: CellId) -> Result<Option<PathSolution>> {
    let router = Router::new(scenario);
    let view = PlanView::from_plan(plan, scenario.num_cells());
    Ok(router.route(&view)?.best_all_passive(cell))
}

pub fn overall_snr(scenario: &Scenario, plan: &DeploymentPlan, cell: CellId) -> Result<PathSolution> {
    let router = Router::new(scenario);
    let view = PlanView::from_plan(plan, scenario.num_cells());
    Ok(router.route(&view)?.overall(cell))
}

/// Per-cell overall SNR for every cell of the region.
pub fn evaluate_plan(scenario: &Scenario, plan: &DeploymentPlan) -> Result<Vec<PathSolution>> {
    let router = Router::new(scenario);
    let view = PlanView::from_plan(plan, scenario.num_cells());
    Ok(router.route(&view)?.all_cells())
}

#[cfg(test)]
mod tests;
