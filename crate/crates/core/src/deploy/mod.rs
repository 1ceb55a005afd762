//! Location search: which candidate cells get a passive or an active
//! surface. Pairs are visited cheapest-first by their one-tile cost bound
//! so that bound pruning fires early.

mod schemes;

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering as AtomicOrdering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::Serialize;

pub use schemes::{build_scheme, DeploymentScheme, SCHEME_NAMES};

use crate::cost::{total_cost, Cost, CostBreakdown};
use crate::error::{Error, Result};
use crate::plan::{DeploymentPlan, Locations};
use crate::routing::{evaluate_plan, PathSolution, Router};
use crate::scenario::Scenario;
use crate::tiles::{SolverOptions, TileOutcome};

/// Largest number of location pairs the search will enumerate.
pub const PAIR_BUDGET: u64 = 10_000_000;

/// Largest candidate set the full-enumeration oracle accepts.
pub const ORACLE_MAX_CANDIDATES: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    /// SNR target, linear.
    pub gamma0: f64,
    /// Registered scheme name: `joint`, `bench1`, `bench2` or `bench3`.
    pub scheme: String,
    pub equal_tiles_passive: u32,
    pub equal_tiles_active: u32,
    pub workers: usize,
    /// Stop after this many tile subproblems.
    pub budget: Option<usize>,
    pub solver: SolverOptions,
    /// Keep a record of every pruned pair.
    pub record_pruned: bool,
}

impl SearchConfig {
    pub fn new(gamma0: f64) -> Self {
        SearchConfig {
            gamma0,
            scheme: "joint".to_string(),
            equal_tiles_passive: 4,
            equal_tiles_active: 1,
            workers: 1,
            budget: None,
            solver: SolverOptions::default(),
            record_pruned: false,
        }
    }

    pub fn with_scheme(mut self, name: &str) -> Self {
        self.scheme = name.to_string();
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PruneReason {
    Bound,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrunedPair {
    pub locations: Locations,
    pub reason: PruneReason,
    /// Incumbent total cost when the pair was pruned.
    pub incumbent: Option<Cost>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub scheme: String,
    pub gamma0: f64,
    pub plan: Option<DeploymentPlan>,
    pub cost: Option<CostBreakdown>,
    /// Per-cell best path of the reported plan.
    pub cells: Vec<PathSolution>,
    pub total_pairs: usize,
    pub examined: usize,
    pub pruned_infeasible: usize,
    pub pruned_bound: usize,
    /// Incumbent total cost after each improvement.
    pub incumbent_trace: Vec<Cost>,
    pub budget_exhausted: bool,
    #[serde(serialize_with = "millis")]
    pub wall_time: Duration,
    #[serde(skip)]
    pub pruned: Vec<PrunedPair>,
}

fn millis<S: serde::Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64() * 1e3)
}

impl SolveReport {
    pub fn feasible(&self) -> bool {
        self.plan.is_some()
    }

    pub fn total_cost(&self) -> Option<Cost> {
        self.cost.map(|c| c.total)
    }

    pub fn pruned_fraction(&self) -> f64 {
        if self.total_pairs == 0 {
            return 0.0;
        }
        (self.pruned_bound + self.pruned_infeasible) as f64 / self.total_pairs as f64
    }
}

struct Candidate {
    locations: Locations,
    bound: Cost,
}

/// Every disjoint `(P, A)` pair the scheme allows, ordered by lower bound,
/// then `|A|`, `|P|` and the sorted cell ids.
fn ordered_pairs(scenario: &Scenario, scheme: &dyn DeploymentScheme) -> Result<Vec<Candidate>> {
    let cells = scenario.candidate_cells();
    let roles: u64 = if scheme.allows_active() { 3 } else { 2 };
    let total = roles
        .checked_pow(cells.len() as u32)
        .filter(|&t| t <= PAIR_BUDGET)
        .ok_or_else(|| Error::Budget(format!("{roles}^{} location pairs exceed {PAIR_BUDGET}", cells.len())))?;
    let mut out = Vec::with_capacity(total as usize);
    for code in 0..total {
        let mut rest = code;
        let mut loc = Locations::default();
        for &c in &cells {
            match rest % roles {
                1 => {
                    loc.passive.insert(c);
                }
                2 => {
                    loc.active.insert(c);
                }
                _ => {}
            }
            rest /= roles;
        }
        let bound = scheme.lower_bound(scenario, &loc);
        out.push(Candidate { locations: loc, bound });
    }
    out.sort_by(|a, b| {
        (a.bound, a.locations.active.len(), a.locations.passive.len())
            .cmp(&(b.bound, b.locations.active.len(), b.locations.passive.len()))
            .then_with(|| a.locations.passive.iter().cmp(b.locations.passive.iter()))
            .then_with(|| a.locations.active.iter().cmp(b.locations.active.iter()))
    });
    Ok(out)
}

struct Incumbent {
    cost: Option<Cost>,
    index: usize,
    plan: Option<DeploymentPlan>,
    trace: Vec<Cost>,
}

impl Incumbent {
    /// Whether a pair at `index` with lower bound `bound` cannot win.
    fn dominates(&self, bound: Cost, index: usize) -> bool {
        match self.cost {
            Some(c) => bound > c || (bound == c && index > self.index),
            None => false,
        }
    }

    fn offer(&mut self, cost: Cost, index: usize, plan: DeploymentPlan) {
        let better = match self.cost {
            None => true,
            Some(c) => cost < c || (cost == c && index < self.index),
        };
        if better {
            self.cost = Some(cost);
            self.index = index;
            self.plan = Some(plan);
            self.trace.push(cost);
        }
    }
}

#[derive(Default)]
struct Counters {
    examined: AtomicUsize,
    pruned_infeasible: AtomicUsize,
}

/// Partial enumeration with bound and feasibility pruning.
pub fn optimize_deployment(scenario: &Scenario, config: &SearchConfig) -> Result<SolveReport> {
    let start = Instant::now();
    let scheme = build_scheme(&config.scheme, config, scenario)?;
    let router = Router::new(scenario);
    let pairs = ordered_pairs(scenario, scheme.as_ref())?;

    let incumbent = Mutex::new(Incumbent { cost: None, index: usize::MAX, plan: None, trace: Vec::new() });
    let counters = Counters::default();
    let next = AtomicUsize::new(0);
    let stop = AtomicBool::new(false);
    let exhausted = AtomicBool::new(false);
    let pruned = Mutex::new(Vec::new());
    let first_error: Mutex<Option<Error>> = Mutex::new(None);
    let handed: Vec<AtomicBool> = pairs.iter().map(|_| AtomicBool::new(false)).collect();

    let record = |pair: &Candidate, reason: PruneReason, inc: Option<Cost>| {
        if config.record_pruned {
            pruned.lock().unwrap().push(PrunedPair { locations: pair.locations.clone(), reason, incumbent: inc });
        }
    };

    let worker = || {
        loop {
            if stop.load(AtomicOrdering::Relaxed) {
                break;
            }
            let index = next.fetch_add(1, AtomicOrdering::Relaxed);
            let Some(pair) = pairs.get(index) else { break };
            let inc_cost = {
                let inc = incumbent.lock().unwrap();
                if inc.dominates(pair.bound, index) {
                    // later pairs have no smaller bound
                    stop.store(true, AtomicOrdering::Relaxed);
                    break;
                }
                inc.cost
            };
            if let Some(b) = config.budget {
                if counters.examined.fetch_add(1, AtomicOrdering::Relaxed) >= b {
                    exhausted.store(true, AtomicOrdering::Relaxed);
                    stop.store(true, AtomicOrdering::Relaxed);
                    break;
                }
            } else {
                counters.examined.fetch_add(1, AtomicOrdering::Relaxed);
            }
            handed[index].store(true, AtomicOrdering::Relaxed);
            match scheme.tile_optimizer().optimize(&router, scenario, &pair.locations, config.gamma0) {
                Ok(TileOutcome::Feasible(sol)) => {
                    incumbent.lock().unwrap().offer(sol.cost.total, index, sol.plan);
                }
                Ok(TileOutcome::Infeasible) => {
                    counters.pruned_infeasible.fetch_add(1, AtomicOrdering::Relaxed);
                    record(pair, PruneReason::Infeasible, inc_cost);
                }
                Err(e) => {
                    first_error.lock().unwrap().get_or_insert(e);
                    stop.store(true, AtomicOrdering::Relaxed);
                    break;
                }
            }
        }
    };

    let workers = config.workers.max(1);
    if workers == 1 {
        worker();
    } else {
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(worker);
            }
        });
    }
    if let Some(e) = first_error.into_inner().unwrap() {
        return Err(e);
    }

    let inc = incumbent.into_inner().unwrap();
    let budget_exhausted = exhausted.load(AtomicOrdering::Relaxed);
    let examined = counters.examined.load(AtomicOrdering::Relaxed).min(config.budget.unwrap_or(usize::MAX));
    let pruned_infeasible = counters.pruned_infeasible.load(AtomicOrdering::Relaxed);
    let mut pruned = pruned.into_inner().unwrap();
    // every pair never handed to the optimizer was cut by the bound
    let pruned_bound = if budget_exhausted { 0 } else { pairs.len() - examined };
    if config.record_pruned && !budget_exhausted {
        for (pair, _) in pairs.iter().zip(&handed).filter(|(_, h)| !h.load(AtomicOrdering::Relaxed)) {
            pruned.push(PrunedPair { locations: pair.locations.clone(), reason: PruneReason::Bound, incumbent: inc.cost });
        }
    }
    finish(
        scenario,
        config,
        inc.plan,
        inc.trace,
        SearchStats {
            total_pairs: pairs.len(),
            examined,
            pruned_infeasible,
            pruned_bound,
            budget_exhausted,
            pruned,
        },
        start.elapsed(),
    )
}

struct SearchStats {
    total_pairs: usize,
    examined: usize,
    pruned_infeasible: usize,
    pruned_bound: usize,
    budget_exhausted: bool,
    pruned: Vec<PrunedPair>,
}

fn finish(
    scenario: &Scenario,
    config: &SearchConfig,
    plan: Option<DeploymentPlan>,
    incumbent_trace: Vec<Cost>,
    stats: SearchStats,
    wall_time: Duration,
) -> Result<SolveReport> {
    let (cost, cells) = match &plan {
        Some(p) => {
            let cells = evaluate_plan(scenario, p)?;
            if let Some(bad) = cells.iter().find(|c| !c.meets(config.gamma0)) {
                return Err(Error::Verification(format!(
                    "cell {} misses the SNR target in the reported plan",
                    bad.cell
                )));
            }
            (Some(total_cost(p, &scenario.costs)), cells)
        }
        None => (None, Vec::new()),
    };
    Ok(SolveReport {
        scheme: config.scheme.clone(),
        gamma0: config.gamma0,
        plan,
        cost,
        cells,
        total_pairs: stats.total_pairs,
        examined: stats.examined,
        pruned_infeasible: stats.pruned_infeasible,
        pruned_bound: stats.pruned_bound,
        incumbent_trace,
        budget_exhausted: stats.budget_exhausted,
        wall_time,
        pruned: stats.pruned,
    })
}

/// Certified optimum at small scale: every pair, exhaustive tiles, no pruning.
pub fn full_enumeration(scenario: &Scenario, config: &SearchConfig) -> Result<SolveReport> {
    let start = Instant::now();
    let n = scenario.candidates.len();
    if n > ORACLE_MAX_CANDIDATES {
        return Err(Error::Budget(format!(
            "full enumeration limited to {ORACLE_MAX_CANDIDATES} candidates, got {n}"
        )));
    }
    let scheme = build_scheme(&config.scheme, config, scenario)?;
    let oracle = scheme.oracle_tile_optimizer();
    let router = Router::new(scenario);
    let pairs = ordered_pairs(scenario, scheme.as_ref())?;
    let mut inc = Incumbent { cost: None, index: usize::MAX, plan: None, trace: Vec::new() };
    let mut infeasible = 0;
    for (index, pair) in pairs.iter().enumerate() {
        match oracle.optimize(&router, scenario, &pair.locations, config.gamma0)? {
            TileOutcome::Feasible(sol) => inc.offer(sol.cost.total, index, sol.plan),
            TileOutcome::Infeasible => infeasible += 1,
        }
    }
    finish(
        scenario,
        config,
        inc.plan,
        inc.trace,
        SearchStats {
            total_pairs: pairs.len(),
            examined: pairs.len(),
            pruned_infeasible: infeasible,
            pruned_bound: 0,
            budget_exhausted: false,
            pruned: Vec::new(),
        },
        start.elapsed(),
    )
}

#[cfg(test)]
mod tests;
