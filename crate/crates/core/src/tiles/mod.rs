//! Tile-count optimization for fixed surface locations.

mod frozen;
mod relax;

use std::collections::BTreeMap;

use serde::Serialize;

pub use frozen::{freeze_paths, freeze_paths_at, FrozenPath, FrozenPathSet, LogTerm};
pub use relax::{
    solve_problem, solve_relaxation, LseConstraint, RelaxOutcome, RelaxedSolution, SolverOptions, TileProblem,
};

use crate::cost::{total_cost, Cost, CostBreakdown};
use crate::error::{Error, Result};
use crate::plan::{CellId, DeploymentPlan, Locations, PlanView};
use crate::routing::Router;
use crate::scenario::Scenario;

/// Largest number of tile combinations `brute_force_tiles` will visit.
pub const BRUTE_FORCE_TILE_BUDGET: u64 = 10_000_000;

/// Tolerance under which `exp(x)` is taken to be the nearby integer.
const SNAP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TileSolution {
    pub plan: DeploymentPlan,
    pub cost: CostBreakdown,
    /// Continuous objective of the first relaxation, when one was solved.
    pub relaxed_objective: Option<f64>,
    /// Hardware cost after reconstruction and after every accepted
    /// refinement step.
    pub cost_trace: Vec<Cost>,
    /// Tile count at which paths were frozen, if any.
    pub frozen_at: Option<u32>,
}

impl TileSolution {
    fn new(plan: DeploymentPlan, scenario: &Scenario) -> Self {
        let cost = total_cost(&plan, &scenario.costs);
        TileSolution {
            plan,
            cost,
            relaxed_objective: None,
            cost_trace: vec![cost.hardware],
            frozen_at: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TileOutcome {
    Feasible(TileSolution),
    Infeasible,
}

impl TileOutcome {
    pub fn solution(&self) -> Option<&TileSolution> {
        match self {
            TileOutcome::Feasible(s) => Some(s),
            TileOutcome::Infeasible => None,
        }
    }

    pub fn into_solution(self) -> Option<TileSolution> {
        match self {
            TileOutcome::Feasible(s) => Some(s),
            TileOutcome::Infeasible => None,
        }
    }
}

/// Whether every cell meets `gamma0` under full path selection.
pub fn plan_meets(router: &Router, scenario: &Scenario, plan: &DeploymentPlan, gamma0: f64) -> Result<bool> {
    let view = PlanView::from_plan(plan, scenario.num_cells());
    let routed = router.route(&view)?;
    Ok((0..scenario.num_cells()).all(|c| routed.overall(c).meets(gamma0)))
}

/// Feasibility of a location pair: all surfaces at the maximum tile count.
pub fn check_feasibility(scenario: &Scenario, locations: &Locations, gamma0: f64) -> Result<bool> {
    check_feasibility_with(&Router::new(scenario), scenario, locations, gamma0)
}

pub fn check_feasibility_with(router: &Router, scenario: &Scenario, locations: &Locations, gamma0: f64) -> Result<bool> {
    plan_meets(router, scenario, &locations.with_uniform_tiles(scenario.max_tiles), gamma0)
}

/// `ceil(exp(x))` clamped to `[1, max_tiles]`. Values within rounding noise
/// above an integer snap down to it.
pub fn reconstruct_tiles(x: &BTreeMap<CellId, f64>, max_tiles: u32) -> BTreeMap<CellId, u32> {
    x.iter()
        .map(|(&c, &v)| {
            let t = v.exp();
            let r = t.round();
            let t = if (t - r).abs() <= SNAP_TOLERANCE * r.max(1.0) { r } else { t.ceil() };
            (c, (t as u32).clamp(1, max_tiles))
        })
        .collect()
}

fn plan_from(locations: &Locations, tiles: &BTreeMap<CellId, u32>) -> DeploymentPlan {
    DeploymentPlan {
        passive: locations.passive.iter().map(|&c| (c, tiles[&c])).collect(),
        active: locations.active.iter().map(|&c| (c, tiles[&c])).collect(),
    }
}

/// Reconstruct integer tiles; if snapping broke a frozen constraint, fall
/// back to plain ceilings.
fn reconstruct_checked(
    frozen: &FrozenPathSet,
    x: &BTreeMap<CellId, f64>,
    max_tiles: u32,
    gamma0: f64,
) -> BTreeMap<CellId, u32> {
    let tiles = reconstruct_tiles(x, max_tiles);
    if frozen.satisfied(&|c| tiles[&c] as f64, gamma0) {
        return tiles;
    }
    x.iter()
        .map(|(&c, &v)| (c, (v.exp().ceil() as u32).clamp(1, max_tiles)))
        .collect()
}

/// Greedy tile refinement around the relaxed optimum: freeze paths, solve
/// the relaxation, round up, then try removing tiles cell by cell in order
/// of largest rounding slack.
pub fn sequential_refine(
    scenario: &Scenario,
    locations: &Locations,
    gamma0: f64,
    options: &SolverOptions,
) -> Result<TileOutcome> {
    sequential_refine_with(&Router::new(scenario), scenario, locations, gamma0, options)
}

pub fn sequential_refine_with(
    router: &Router,
    scenario: &Scenario,
    locations: &Locations,
    gamma0: f64,
    options: &SolverOptions,
) -> Result<TileOutcome> {
    locations.validate(scenario)?;
    if !check_feasibility_with(router, scenario, locations, gamma0)? {
        return Ok(TileOutcome::Infeasible);
    }
    let tmax = scenario.max_tiles;
    if locations.is_empty() {
        return Ok(TileOutcome::Feasible(TileSolution::new(DeploymentPlan::default(), scenario)));
    }

    let none = BTreeMap::new();
    let mut frozen = freeze_paths_at(scenario, router, locations, 1)?;
    let mut frozen_at = 1;
    let mut relaxed = solve_relaxation(scenario, &frozen, gamma0, &none, options)?.solution();
    if relaxed.is_none() {
        frozen = freeze_paths_at(scenario, router, locations, tmax)?;
        frozen_at = tmax;
        relaxed = solve_relaxation(scenario, &frozen, gamma0, &none, options)?.solution();
    }
    let Some(relaxed) = relaxed else {
        let mut sol = TileSolution::new(locations.with_uniform_tiles(tmax), scenario);
        sol.frozen_at = Some(tmax);
        return Ok(TileOutcome::Feasible(sol));
    };

    let hardware = |tiles: &BTreeMap<CellId, u32>| total_cost(&plan_from(locations, tiles), &scenario.costs).hardware;
    let slack = |tiles: &BTreeMap<CellId, u32>, x: &BTreeMap<CellId, f64>| -> BTreeMap<CellId, f64> {
        x.iter().map(|(&c, &v)| (c, tiles[&c] as f64 - v.exp())).collect()
    };

    let mut best = reconstruct_checked(&frozen, &relaxed.x, tmax, gamma0);
    let mut best_cost = hardware(&best);
    let mut delta = slack(&best, &relaxed.x);
    let mut cost_trace = vec![best_cost];
    let mut refined: BTreeMap<CellId, u32> = BTreeMap::new();

    while refined.len() < locations.len() {
        // largest slack among unrefined cells, smallest id on ties
        let s = delta
            .iter()
            .filter(|(c, _)| !refined.contains_key(c))
            .fold(None::<(CellId, f64)>, |acc, (&c, &d)| match acc {
                Some((_, bd)) if bd >= d => acc,
                _ => Some((c, d)),
            })
            .map(|(c, _)| c)
            .expect("an unrefined cell remains");
        let start = best[&s];
        for t in 1..start {
            let mut fixed_int: BTreeMap<CellId, u32> = refined.keys().map(|&c| (c, best[&c])).collect();
            fixed_int.insert(s, start - t);
            let fixed: BTreeMap<CellId, f64> = fixed_int.iter().map(|(&c, &v)| (c, (v as f64).ln())).collect();
            let Some(sol) = solve_relaxation(scenario, &frozen, gamma0, &fixed, options)?.solution() else {
                break;
            };
            let mut cand = reconstruct_checked(&frozen, &sol.x, tmax, gamma0);
            cand.extend(fixed_int.iter().map(|(&c, &v)| (c, v)));
            let cand_cost = hardware(&cand);
            if cand_cost < best_cost {
                best = cand;
                best_cost = cand_cost;
                cost_trace.push(best_cost);
                delta = slack(&best, &sol.x);
            } else {
                break;
            }
        }
        refined.insert(s, best[&s]);
    }

    // Frozen paths can hide cheaper plans that switch path type, so finish
    // with single-tile removals checked under full path selection.
    let mut order: Vec<CellId> = locations.cells();
    let price = |c: &CellId| {
        if locations.active.contains(c) {
            scenario.costs.per_tile_active
        } else {
            scenario.costs.per_tile_passive
        }
    };
    order.sort_by(|a, b| price(b).cmp(&price(a)).then(a.cmp(b)));
    let mut improved = true;
    while improved {
        improved = false;
        for &c in &order {
            while best[&c] > 1 {
                let mut cand = best.clone();
                *cand.get_mut(&c).unwrap() -= 1;
                if !plan_meets(router, scenario, &plan_from(locations, &cand), gamma0)? {
                    break;
                }
                best = cand;
                best_cost = hardware(&best);
                cost_trace.push(best_cost);
                improved = true;
            }
        }
    }

    let mut sol = TileSolution::new(plan_from(locations, &best), scenario);
    sol.relaxed_objective = Some(relaxed.objective);
    sol.cost_trace = cost_trace;
    sol.frozen_at = Some(frozen_at);
    Ok(TileOutcome::Feasible(sol))
}

/// Exhaustive search over `[1, T_max]^n`, checking every combination under
/// full path selection. Returns the cheapest feasible one, first in
/// enumeration order on ties.
pub fn brute_force_tiles(scenario: &Scenario, locations: &Locations, gamma0: f64) -> Result<TileOutcome> {
    brute_force_tiles_with(&Router::new(scenario), scenario, locations, gamma0)
}

pub fn brute_force_tiles_with(
    router: &Router,
    scenario: &Scenario,
    locations: &Locations,
    gamma0: f64,
) -> Result<TileOutcome> {
    locations.validate(scenario)?;
    let cells = locations.cells();
    let tmax = scenario.max_tiles;
    let combos = (tmax as u64).checked_pow(cells.len() as u32).filter(|&c| c <= BRUTE_FORCE_TILE_BUDGET);
    let Some(combos) = combos else {
        return Err(Error::Budget(format!(
            "{tmax}^{} tile combinations exceed {BRUTE_FORCE_TILE_BUDGET}",
            cells.len()
        )));
    };
    let mut tiles: BTreeMap<CellId, u32> = cells.iter().map(|&c| (c, 1)).collect();
    let mut best: Option<(Cost, BTreeMap<CellId, u32>)> = None;
    for _ in 0..combos {
        let plan = plan_from(locations, &tiles);
        if plan_meets(router, scenario, &plan, gamma0)? {
            let cost = total_cost(&plan, &scenario.costs).hardware;
            if best.as_ref().is_none_or(|(b, _)| cost < *b) {
                best = Some((cost, tiles.clone()));
            }
        }
        // mixed-radix increment, first cell fastest
        for c in &cells {
            let t = tiles.get_mut(c).unwrap();
            if *t < tmax {
                *t += 1;
                break;
            }
            *t = 1;
        }
    }
    Ok(match best {
        Some((_, tiles)) => TileOutcome::Feasible(TileSolution::new(plan_from(locations, &tiles), scenario)),
        None => TileOutcome::Infeasible,
    })
}

/// Fixed tile counts: feasible iff the uniform plan meets `gamma0`.
pub fn equal_tiles(
    router: &Router,
    scenario: &Scenario,
    locations: &Locations,
    gamma0: f64,
    passive_tiles: u32,
    active_tiles: u32,
) -> Result<TileOutcome> {
    locations.validate(scenario)?;
    for t in [passive_tiles, active_tiles] {
        if t == 0 || t > scenario.max_tiles {
            return Err(Error::Argument(format!(
                "equal tile count {t} outside 1..={}",
                scenario.max_tiles
            )));
        }
    }
    let plan = locations.with_tiles(passive_tiles, active_tiles);
    Ok(if plan_meets(router, scenario, &plan, gamma0)? {
        TileOutcome::Feasible(TileSolution::new(plan, scenario))
    } else {
        TileOutcome::Infeasible
    })
}

/// A tile-count strategy for fixed locations.
pub trait TileOptimizer: Send + Sync {
    fn name(&self) -> &'static str;

    fn optimize(&self, router: &Router, scenario: &Scenario, locations: &Locations, gamma0: f64) -> Result<TileOutcome>;
}

/// Relaxation plus sequential refinement.
#[derive(Debug, Clone, Default)]
pub struct Refine {
    pub options: SolverOptions,
}

impl TileOptimizer for Refine {
    fn name(&self) -> &'static str {
        "refine"
    }

    fn optimize(&self, router: &Router, scenario: &Scenario, locations: &Locations, gamma0: f64) -> Result<TileOutcome> {
        sequential_refine_with(router, scenario, locations, gamma0, &self.options)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Exhaustive;

impl TileOptimizer for Exhaustive {
    fn name(&self) -> &'static str {
        "exhaustive"
    }

    fn optimize(&self, router: &Router, scenario: &Scenario, locations: &Locations, gamma0: f64) -> Result<TileOutcome> {
        brute_force_tiles_with(router, scenario, locations, gamma0)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EqualTiles {
    pub passive: u32,
    pub active: u32,
}

impl TileOptimizer for EqualTiles {
    fn name(&self) -> &'static str {
        "equal"
    }

    fn optimize(&self, router: &Router, scenario: &Scenario, locations: &Locations, gamma0: f64) -> Result<TileOutcome> {
        equal_tiles(router, scenario, locations, gamma0, self.passive, self.active)
    }
}

pub const TILE_OPTIMIZERS: &[&str] = &["refine", "exhaustive", "equal"];

/// Look up a tile optimizer by name. `equal` uses 4 passive and 1 active tile.
pub fn tile_optimizer(name: &str, options: &SolverOptions) -> Option<Box<dyn TileOptimizer>> {
    match name {
        "refine" => Some(Box::new(Refine { options: *options })),
        "exhaustive" => Some(Box::new(Exhaustive)),
        "equal" => Some(Box::new(EqualTiles { passive: 4, active: 1 })),
        _ => None,
    }
}
