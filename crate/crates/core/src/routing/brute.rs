//! Exhaustive path enumeration, used as a reference for the shortest-path
//! router on small instances.

use super::{PathKind, PathSolution};
use crate::error::{Error, Result};
use crate::plan::{CellId, DeploymentPlan, Role};
use crate::scenario::{LosGraph, Scenario, VertexId, BS_NODE};
use crate::snr::{all_passive_path_snr, direct_snr, hybrid_path_snr, path_hop_gains, path_tiles};

/// Most vertices (BS, deployed nodes and the target user) a brute-force query
/// may involve.
pub const BRUTE_FORCE_VERTEX_LIMIT: usize = 12;

/// All simple paths `from -> to` whose intermediate vertices satisfy `allow`.
pub fn enumerate_simple_paths(
    graph: &LosGraph,
    from: VertexId,
    to: VertexId,
    allow: &dyn Fn(VertexId) -> bool,
) -> Vec<Vec<VertexId>> {
    fn dfs(
        graph: &LosGraph,
        to: VertexId,
        allow: &dyn Fn(VertexId) -> bool,
        stack: &mut Vec<VertexId>,
        out: &mut Vec<Vec<VertexId>>,
    ) {
        let v = *stack.last().unwrap();
        for e in graph.out_edges(v) {
            if e.to == to {
                let mut p = stack.clone();
                p.push(to);
                out.push(p);
            } else if allow(e.to) && !stack.contains(&e.to) {
                stack.push(e.to);
                dfs(graph, to, allow, stack, out);
                stack.pop();
            }
        }
    }
    let mut out = Vec::new();
    if graph.contains(from) {
        dfs(graph, to, allow, &mut vec![from], &mut out);
    }
    out
}

fn consider(best: &mut PathSolution, cand: PathSolution) {
    if cand.compare(best) == std::cmp::Ordering::Greater {
        *best = cand;
    }
}

/// Best path for `cell` by enumerating every simple direct, all-passive and
/// hybrid path. The two hybrid sub-paths are enumerated independently.
pub fn brute_force_best_path(scenario: &Scenario, plan: &DeploymentPlan, cell: CellId) -> Result<PathSolution> {
    plan.validate(scenario)?;
    let involved = plan.passive.len() + plan.active.len() + 2;
    if involved > BRUTE_FORCE_VERTEX_LIMIT {
        return Err(Error::Budget(format!(
            "brute-force routing limited to {BRUTE_FORCE_VERTEX_LIMIT} vertices, got {involved}"
        )));
    }
    let graph = scenario.graph();
    let user = scenario.user_vertex(cell);
    let passive = |v: VertexId| plan.role(v) == Some(Role::Passive);
    let mut best = PathSolution::unreachable(cell);

    for path in enumerate_simple_paths(&graph, BS_NODE, user, &passive) {
        if path.len() < 3 {
            continue;
        }
        let snr = all_passive_path_snr(&scenario.radio, &path_hop_gains(scenario, &path)?, &path_tiles(plan, &path)?)?;
        consider(
            &mut best,
            PathSolution { cell, kind: PathKind::AllPassive, path, airs_vertex: None, snr_linear: Some(snr) },
        );
    }

    for &airs in plan.active.keys() {
        let ups = enumerate_simple_paths(&graph, BS_NODE, airs, &passive);
        let downs = enumerate_simple_paths(&graph, airs, user, &passive);
        for up in &ups {
            for down in &downs {
                let mut path = up.clone();
                path.extend_from_slice(&down[1..]);
                let snr = hybrid_path_snr(
                    &scenario.radio,
                    &path_hop_gains(scenario, &path)?,
                    &path_tiles(plan, &path)?,
                    up.len() - 1,
                )?;
                consider(
                    &mut best,
                    PathSolution { cell, kind: PathKind::Hybrid, path, airs_vertex: Some(airs), snr_linear: Some(snr) },
                );
            }
        }
    }

    if let Some(snr) = direct_snr(scenario, cell) {
        consider(
            &mut best,
            PathSolution { cell, kind: PathKind::Direct, path: vec![BS_NODE, user], airs_vertex: None, snr_linear: Some(snr) },
        );
    }
    Ok(best)
}
