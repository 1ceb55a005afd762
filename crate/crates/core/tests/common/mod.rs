//! Random scenario generation shared by the integration tests.
#![allow(dead_code)]

use irs_deploy::plan::{DeploymentPlan, Locations};
use irs_deploy::routing::evaluate_plan;
use irs_deploy::scenario::{
    distance, BsDoc, CandidateDoc, CostsDoc, GridDoc, RadioDoc, ScenarioDocument,
};
use irs_deploy::Scenario;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Node pairs closer than this are never given mutual LoS. Two facing passive
/// surfaces at nine tiles gain more than they lose below about 6.4 m, which
/// would make routing ill-posed.
pub const MIN_LOS_SEPARATION: f64 = 6.5;

#[derive(Debug, Clone)]
pub struct GenParams {
    pub rows: usize,
    pub cols: usize,
    pub cell_size: f64,
    /// Upper bound on candidate count.
    pub max_candidates: usize,
    pub max_tiles: u32,
    pub los_node_prob: f64,
    pub los_user_prob: f64,
    pub bs_anywhere: bool,
}

impl GenParams {
    pub fn new(rows: usize, cols: usize, max_candidates: usize, max_tiles: u32) -> Self {
        GenParams {
            rows,
            cols,
            cell_size: 10.0,
            max_candidates,
            max_tiles,
            los_node_prob: 0.6,
            los_user_prob: 0.4,
            bs_anywhere: false,
        }
    }
}

fn point_in_cell(rng: &mut TestRng, p: &GenParams, cell: usize) -> [f64; 3] {
    let (r, c) = (cell / p.cols, cell % p.cols);
    let s = p.cell_size;
    [
        s * (c as f64 + rng.gen_range(0.1..0.9)),
        s * (r as f64 + rng.gen_range(0.1..0.9)),
        rng.gen_range(2.0..4.0),
    ]
}

pub fn random_document(rng: &mut TestRng, p: &GenParams) -> ScenarioDocument {
    let cells = p.rows * p.cols;
    let bs_cell = if p.bs_anywhere { rng.gen_range(0..cells) } else { 0 };
    let bs_pos = point_in_cell(rng, p, bs_cell);

    let mut free: Vec<usize> = (1..cells).filter(|&c| c != bs_cell).collect();
    free.shuffle(rng);
    let count = rng.gen_range(1..=p.max_candidates.min(free.len()).max(1)).min(free.len());
    let mut chosen: Vec<usize> = free[..count].to_vec();
    chosen.sort_unstable();
    let candidates: Vec<CandidateDoc> = chosen
        .iter()
        .map(|&c| CandidateDoc { id: c, cell: c, pos: point_in_cell(rng, p, c) })
        .collect();

    let pos = |n: usize| -> [f64; 3] {
        if n == 0 {
            bs_pos
        } else {
            candidates.iter().find(|c| c.id == n).unwrap().pos
        }
    };
    let nodes: Vec<usize> = std::iter::once(0).chain(chosen.iter().copied()).collect();
    let mut los_nodes = Vec::new();
    for (i, &a) in nodes.iter().enumerate() {
        for &b in &nodes[i + 1..] {
            if distance(pos(a), pos(b)) >= MIN_LOS_SEPARATION && rng.gen_bool(p.los_node_prob) {
                los_nodes.push([a, b]);
            }
        }
    }
    let mut los_users = Vec::new();
    for &n in &nodes {
        for c in 0..cells {
            if rng.gen_bool(p.los_user_prob) {
                los_users.push([n, c]);
            }
        }
    }

    ScenarioDocument {
        grid: GridDoc { rows: p.rows, cols: p.cols, cell_size_m: p.cell_size, user_height_m: Some(1.0) },
        bs: BsDoc { cell: bs_cell, pos: bs_pos },
        candidates,
        los_nodes,
        los_users,
        dmax_overrides: None,
        radio: RadioDoc::indoor_3_5ghz(),
        costs: CostsDoc::integers(5, 12, 1, 3),
        max_tiles: p.max_tiles,
    }
}

pub fn random_scenario(rng: &mut TestRng, p: &GenParams) -> Scenario {
    Scenario::from_document(&random_document(rng, p)).expect("generated scenario is valid")
}

/// Every candidate gets a random role and tile count.
pub fn random_plan(rng: &mut TestRng, s: &Scenario, max_active: usize) -> DeploymentPlan {
    let mut plan = DeploymentPlan::default();
    for c in s.candidate_cells() {
        let t = rng.gen_range(1..=s.max_tiles);
        match rng.gen_range(0..3) {
            0 => {}
            1 if plan.active.len() < max_active => {
                plan.active.insert(c, t);
            }
            _ => {
                plan.passive.insert(c, t);
            }
        }
    }
    plan
}

/// Random non-empty location pair with at most `max_len` surfaces.
pub fn random_locations(rng: &mut TestRng, s: &Scenario, max_len: usize) -> Locations {
    let mut cells = s.candidate_cells();
    cells.shuffle(rng);
    let len = rng.gen_range(1..=max_len.min(cells.len()));
    let mut loc = Locations::default();
    for &c in &cells[..len] {
        if rng.gen_bool(0.35) {
            loc.active.insert(c);
        } else {
            loc.passive.insert(c);
        }
    }
    loc
}

/// Smallest per-cell SNR of a plan, or `None` if a cell is unreachable or the
/// routing fails.
pub fn min_snr(s: &Scenario, plan: &DeploymentPlan) -> Option<f64> {
    let cells = evaluate_plan(s, plan).ok()?;
    cells
        .iter()
        .map(|c| c.snr_linear)
        .try_fold(f64::INFINITY, |m, v| v.map(|v| m.min(v)))
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}
