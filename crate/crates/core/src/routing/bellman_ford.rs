use super::WeightedView;
use crate::error::{Error, Result};
use crate::scenario::VertexId;

/// Single-source shortest paths over one view.
#[derive(Debug, Clone)]
pub struct ShortestPathTree {
    source: VertexId,
    dist: Vec<Option<f64>>,
    pred: Vec<Option<VertexId>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShortestPathResult {
    pub weight: f64,
    /// Vertex sequence from the source to the target, both included.
    pub path: Vec<VertexId>,
}

impl ShortestPathTree {
    pub fn source(&self) -> VertexId {
        self.source
    }

    pub fn distance(&self, target: VertexId) -> Option<f64> {
        self.dist.get(target).copied().flatten()
    }

    /// Weight and path to `target`, or `None` if it is unreachable.
    pub fn result(&self, target: VertexId) -> Option<ShortestPathResult> {
        let weight = self.distance(target)?;
        let mut path = vec![target];
        let mut v = target;
        while v != self.source {
            v = self.pred[v].expect("reachable vertex has a predecessor");
            path.push(v);
            debug_assert!(path.len() <= self.dist.len());
        }
        path.reverse();
        Some(ShortestPathResult { weight, path })
    }
}

/// Bellman-Ford from `source`. Negative edges are allowed; a negative cycle
/// reachable from the source is reported as an error.
pub fn shortest_paths(view: &WeightedView<'_>, source: VertexId) -> Result<ShortestPathTree> {
    let n = view.id_space();
    let edges: Vec<(VertexId, VertexId, f64)> = view.weighted_edges().collect();
    let mut dist: Vec<Option<f64>> = vec![None; n];
    let mut pred = vec![None; n];
    dist[source] = Some(0.0);

    let relax = |dist: &mut Vec<Option<f64>>, pred: &mut Vec<Option<VertexId>>| {
        let mut changed = false;
        for &(u, v, w) in &edges {
            let Some(du) = dist[u] else { continue };
            let cand = du + w;
            if dist[v].is_none_or(|dv| cand < dv) {
                dist[v] = Some(cand);
                pred[v] = Some(u);
                changed = true;
            }
        }
        changed
    };

    let mut converged = false;
    for _ in 0..n.saturating_sub(1) {
        if !relax(&mut dist, &mut pred) {
            converged = true;
            break;
        }
    }
    if !converged && relax(&mut dist, &mut pred) {
        return Err(Error::NegativeCycle { source_vertex: source });
    }
    Ok(ShortestPathTree { source, dist, pred })
}
