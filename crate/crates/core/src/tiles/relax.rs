//! Continuous tile relaxation in `x = ln T`, solved with a log-barrier
//! Newton method.
//!
//! Every frozen SNR constraint is written as a log-sum-exp of affine
//! functions of `x`, `g(x) = ln sum_k exp(a_k . x + b_k) <= 0`, which is
//! convex. The objective `sum_i c_i exp(x_i)` is convex as well.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::frozen::FrozenPathSet;
use crate::error::{Error, Result};
use crate::plan::{CellId, Role};
use crate::routing::clamped_exp;
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Stop once the duality measure `m / t` falls to this value.
    pub tolerance: f64,
    /// Newton steps allowed per centering step.
    pub max_newton_iters: usize,
    pub barrier_growth: f64,
    pub initial_barrier: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-9,
            max_newton_iters: 200,
            barrier_growth: 10.0,
            initial_barrier: 1.0,
        }
    }
}

/// `ln sum_k exp(a_k . x + b_k) <= 0` over the free variables.
#[derive(Debug, Clone, PartialEq)]
pub struct LseConstraint {
    pub a: Vec<DVector<f64>>,
    pub b: Vec<f64>,
    /// Cell whose SNR this constraint guards.
    pub cell: CellId,
}

impl LseConstraint {
    fn softmax(&self, x: &DVector<f64>) -> (f64, Vec<f64>) {
        let z: Vec<f64> = self.a.iter().zip(&self.b).map(|(a, b)| a.dot(x) + b).collect();
        let zmax = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = z.iter().map(|v| (v - zmax).exp()).collect();
        let s: f64 = w.iter().sum();
        (zmax + s.ln(), w.into_iter().map(|v| v / s).collect())
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        self.softmax(x).0
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let (_, p) = self.softmax(x);
        let mut g = DVector::zeros(x.len());
        for (pk, a) in p.iter().zip(&self.a) {
            g.axpy(*pk, a, 1.0);
        }
        g
    }

    pub fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let (_, p) = self.softmax(x);
        let g = self.gradient(x);
        let mut h = DMatrix::zeros(x.len(), x.len());
        for (pk, a) in p.iter().zip(&self.a) {
            h.ger(*pk, a, a, 1.0);
        }
        h.ger(-1.0, &g, &g, 1.0);
        h
    }
}

/// One instance of the relaxed tile problem.
#[derive(Debug, Clone)]
pub struct TileProblem {
    /// Deployed cells, ascending.
    pub cells: Vec<CellId>,
    /// Per-tile cost of each deployed cell.
    pub unit_costs: Vec<f64>,
    /// Indices into `cells` of the free variables.
    pub free: Vec<usize>,
    /// Value of every variable that is not free.
    pub fixed: BTreeMap<CellId, f64>,
    pub lower: DVector<f64>,
    pub upper: DVector<f64>,
    pub constraints: Vec<LseConstraint>,
    /// Set when a constraint cannot hold for any `x`.
    pub infeasible: bool,
}

impl TileProblem {
    /// Build the problem for `frozen` at target `gamma0` (linear). Variables
    /// listed in `fixed` are pinned to the given `ln T`; the rest range over
    /// `[0, ln T_max]`.
    pub fn new(scenario: &Scenario, frozen: &FrozenPathSet, gamma0: f64, fixed: &BTreeMap<CellId, f64>) -> Self {
        let cells = frozen.locations.cells();
        let unit_costs: Vec<f64> = cells
            .iter()
            .map(|&c| match frozen.locations.role(c) {
                Some(Role::Active) => scenario.costs.per_tile_active.as_f64(),
                _ => scenario.costs.per_tile_passive.as_f64(),
            })
            .collect();
        let ub = (scenario.max_tiles as f64).ln();
        let mut pinned = fixed.clone();
        if ub == 0.0 {
            for &c in &cells {
                pinned.entry(c).or_insert(0.0);
            }
        }
        let free: Vec<usize> = (0..cells.len()).filter(|&i| !pinned.contains_key(&cells[i])).collect();
        let index: BTreeMap<CellId, usize> = free.iter().enumerate().map(|(k, &i)| (cells[i], k)).collect();
        let n = free.len();

        let mut constraints = Vec::new();
        let mut infeasible = false;
        for (cell, path) in frozen.cells.iter().enumerate() {
            let Some(terms) = path.inverse_snr_terms(frozen.tile_elements()) else {
                infeasible = true;
                continue;
            };
            if gamma0 <= 0.0 {
                continue;
            }
            let mut a = Vec::new();
            let mut b = Vec::new();
            for t in &terms {
                let mut av = DVector::zeros(n);
                let mut bv = t.offset + gamma0.ln();
                for &(c, coeff) in &t.coeffs {
                    match index.get(&c) {
                        Some(&k) => av[k] += coeff,
                        None => bv += coeff * pinned[&c],
                    }
                }
                a.push(av);
                b.push(bv);
            }
            let con = LseConstraint { a, b, cell };
            if con.a.iter().all(|v| v.iter().all(|&e| e == 0.0)) {
                if con.value(&DVector::zeros(n)) > 0.0 {
                    infeasible = true;
                }
            } else {
                constraints.push(con);
            }
        }
        TileProblem {
            unit_costs,
            free,
            fixed: pinned,
            lower: DVector::zeros(n),
            upper: DVector::from_element(n, ub),
            constraints,
            infeasible,
            cells,
        }
    }

    pub fn num_free(&self) -> usize {
        self.free.len()
    }

    pub fn free_cells(&self) -> Vec<CellId> {
        self.free.iter().map(|&i| self.cells[i]).collect()
    }

    fn free_costs(&self) -> DVector<f64> {
        DVector::from_iterator(self.free.len(), self.free.iter().map(|&i| self.unit_costs[i]))
    }

    /// Objective over all variables, fixed ones included.
    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        let free = self.free_costs().iter().zip(x.iter()).map(|(c, v)| c * clamped_exp(*v)).sum::<f64>();
        let fixed: f64 = self
            .cells
            .iter()
            .zip(&self.unit_costs)
            .filter_map(|(c, u)| self.fixed.get(c).map(|x| u * clamped_exp(*x)))
            .sum();
        free + fixed
    }

    pub fn objective_gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.free_costs().zip_map(x, |c, v| c * clamped_exp(v))
    }

    /// Full `ln T` map for a free-variable vector.
    pub fn assemble(&self, x: &DVector<f64>) -> BTreeMap<CellId, f64> {
        let mut out = self.fixed.clone();
        for (k, &i) in self.free.iter().enumerate() {
            out.insert(self.cells[i], x[k]);
        }
        out
    }

    fn strictly_inside(&self, x: &DVector<f64>) -> bool {
        (0..x.len()).all(|i| x[i] > self.lower[i] && x[i] < self.upper[i])
            && self.constraints.iter().all(|c| c.value(x) < 0.0)
    }

    /// Barrier function `t f(x) - sum ln(-g) - sum ln(box slack)`.
    fn barrier_value(&self, t: f64, x: &DVector<f64>) -> f64 {
        let mut v = t * self.objective_free(x);
        for c in &self.constraints {
            v -= (-c.value(x)).ln();
        }
        for i in 0..x.len() {
            v -= (x[i] - self.lower[i]).ln() + (self.upper[i] - x[i]).ln();
        }
        v
    }

    fn objective_free(&self, x: &DVector<f64>) -> f64 {
        self.objective_gradient(x).sum()
    }

    fn barrier_derivatives(&self, t: f64, x: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let n = x.len();
        let fg = self.objective_gradient(x);
        let mut grad = &fg * t;
        let mut hess = DMatrix::from_diagonal(&(&fg * t));
        for c in &self.constraints {
            let g = c.value(x);
            let dg = c.gradient(x);
            grad.axpy(-1.0 / g, &dg, 1.0);
            hess += c.hessian(x) * (-1.0 / g);
            hess.ger(1.0 / (g * g), &dg, &dg, 1.0);
        }
        for i in 0..n {
            let (lo, hi) = (x[i] - self.lower[i], self.upper[i] - x[i]);
            grad[i] += -1.0 / lo + 1.0 / hi;
            hess[(i, i)] += 1.0 / (lo * lo) + 1.0 / (hi * hi);
        }
        (grad, hess)
    }

    /// Gradients of the constraints and bounds within `slack` of activity.
    pub fn active_gradients(&self, x: &DVector<f64>, slack: f64) -> Vec<DVector<f64>> {
        let n = x.len();
        let mut out: Vec<DVector<f64>> = self
            .constraints
            .iter()
            .filter(|c| c.value(x) >= -slack)
            .map(|c| c.gradient(x))
            .collect();
        for i in 0..n {
            if x[i] - self.lower[i] <= slack {
                out.push(-DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 }));
            }
            if self.upper[i] - x[i] <= slack {
                out.push(DVector::from_fn(n, |k, _| if k == i { 1.0 } else { 0.0 }));
            }
        }
        out
    }

    /// Stationarity residual `min_{mu >= 0} |grad f + sum mu_k grad g_k|`
    /// over the active set.
    pub fn kkt_residual(&self, x: &DVector<f64>, slack: f64) -> f64 {
        let grad = self.objective_gradient(x);
        nonnegative_residual(&grad, &self.active_gradients(x, slack))
    }

    fn inequality_count(&self) -> usize {
        self.constraints.len() + 2 * self.free.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelaxedSolution {
    /// `ln T` per deployed cell, fixed cells included.
    pub x: BTreeMap<CellId, f64>,
    /// Continuous hardware cost `sum c_i exp(x_i)`.
    pub objective: f64,
    /// Norm of the Lagrangian gradient with the barrier-implied multipliers.
    pub kkt_residual: f64,
    /// Newton steps over all centering steps.
    pub iterations: usize,
    /// Objective after each centering step.
    pub objective_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RelaxOutcome {
    Solved(RelaxedSolution),
    Infeasible,
}

impl RelaxOutcome {
    pub fn solution(self) -> Option<RelaxedSolution> {
        match self {
            RelaxOutcome::Solved(s) => Some(s),
            RelaxOutcome::Infeasible => None,
        }
    }
}

pub fn solve_relaxation(
    scenario: &Scenario,
    frozen: &FrozenPathSet,
    gamma0: f64,
    fixed: &BTreeMap<CellId, f64>,
    options: &SolverOptions,
) -> Result<RelaxOutcome> {
    solve_problem(&TileProblem::new(scenario, frozen, gamma0, fixed), options)
}

pub fn solve_problem(problem: &TileProblem, options: &SolverOptions) -> Result<RelaxOutcome> {
    if problem.infeasible {
        return Ok(RelaxOutcome::Infeasible);
    }
    let n = problem.num_free();
    let done = |x: DVector<f64>, kkt: f64, iterations: usize, trace: Vec<f64>| {
        Ok(RelaxOutcome::Solved(RelaxedSolution {
            objective: problem.objective(&x),
            x: problem.assemble(&x),
            kkt_residual: kkt,
            iterations,
            objective_trace: trace,
        }))
    };
    if n == 0 {
        return done(DVector::zeros(0), 0.0, 0, Vec::new());
    }

    // constraints decrease in every variable, so the upper corner is the
    // most feasible point
    let worst_at_upper = problem
        .constraints
        .iter()
        .map(|c| c.value(&problem.upper))
        .fold(f64::NEG_INFINITY, f64::max);
    if worst_at_upper > 0.0 {
        return Ok(RelaxOutcome::Infeasible);
    }
    let width = &problem.upper - &problem.lower;
    let mut theta = 0.5;
    let mut x = &problem.upper - &width * theta;
    while !problem.strictly_inside(&x) {
        theta *= 0.5;
        if theta < 1e-15 {
            // feasible set has empty interior: only the upper corner works
            let x = problem.upper.clone();
            let trace = vec![problem.objective(&x)];
            return done(x, 0.0, 0, trace);
        }
        x = &problem.upper - &width * theta;
    }

    let m = problem.inequality_count() as f64;
    let mut t = options.initial_barrier;
    let mut iterations = 0;
    let mut trace = Vec::new();
    loop {
        iterations += center(problem, t, &mut x, options)?;
        trace.push(problem.objective(&x));
        if m / t <= options.tolerance {
            break;
        }
        t *= options.barrier_growth;
    }
    let kkt = problem.kkt_residual(&x, ACTIVE_SLACK);
    done(x, kkt, iterations, trace)
}

/// Slack under which a constraint or bound counts as active.
pub const ACTIVE_SLACK: f64 = 1e-6;

const CENTERING_GAP: f64 = 1e-10;

/// Newton's method on the barrier function at parameter `t`.
fn center(problem: &TileProblem, t: f64, x: &mut DVector<f64>, options: &SolverOptions) -> Result<usize> {
    const ARMIJO: f64 = 0.01;
    for iter in 0..options.max_newton_iters {
        let (grad, hess) = problem.barrier_derivatives(t, x);
        let step = match hess.clone().cholesky() {
            Some(ch) => ch.solve(&(-&grad)),
            None => {
                let reg = DMatrix::identity(x.len(), x.len()) * (1e-12 * hess.diagonal().amax().max(1.0));
                (hess + reg)
                    .cholesky()
                    .ok_or(Error::NonConvergence { iterations: iter, residual: grad.norm() })?
                    .solve(&(-&grad))
            }
        };
        let decrement = -grad.dot(&step);
        // decrement / 2t bounds the objective gap of this centering step
        if decrement / 2.0 <= CENTERING_GAP * t.max(1.0) {
            return Ok(iter);
        }
        let f0 = problem.barrier_value(t, x);
        let mut s = 1.0;
        let mut next = &*x + &step * s;
        while !problem.strictly_inside(&next) {
            s *= 0.5;
            next = &*x + &step * s;
            if s < 1e-20 {
                return Ok(iter);
            }
        }
        while problem.barrier_value(t, &next) > f0 - ARMIJO * s * decrement {
            s *= 0.5;
            if s < 1e-14 {
                // no representable decrease left at this barrier level
                return Ok(iter);
            }
            next = &*x + &step * s;
        }
        if next == *x {
            return Ok(iter);
        }
        *x = next;
    }
    let (grad, _) = problem.barrier_derivatives(t, x);
    Err(Error::NonConvergence {
        iterations: options.max_newton_iters,
        residual: grad.norm() / t,
    })
}

/// `min_{mu >= 0} |g + sum mu_k v_k|` by active-set elimination: solve
/// least squares, drop the most negative multiplier, repeat.
pub fn nonnegative_residual(g: &DVector<f64>, vs: &[DVector<f64>]) -> f64 {
    let mut set: Vec<usize> = (0..vs.len()).collect();
    loop {
        if set.is_empty() {
            return g.norm();
        }
        let a = DMatrix::from_columns(&set.iter().map(|&k| vs[k].clone()).collect::<Vec<_>>());
        let Ok(mu) = a.clone().svd(true, true).solve(&(-g), 1e-12) else {
            return g.norm();
        };
        let (worst, &min) = mu
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty");
        if min >= 0.0 {
            return (g + a * mu).norm();
        }
        set.remove(worst);
    }
}
