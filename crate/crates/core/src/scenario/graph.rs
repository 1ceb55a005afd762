use super::{Scenario, VertexId, BS_NODE};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LosEdge {
    pub from: VertexId,
    pub to: VertexId,
    pub distance: f64,
}

/// Directed downlink LoS graph over the BS, candidate nodes and virtual user
/// vertices. Edges never enter vertex 0 and never leave a user vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct LosGraph {
    num_cells: usize,
    vertices: Vec<VertexId>,
    present: Vec<bool>,
    out: Vec<Vec<LosEdge>>,
}

impl LosGraph {
    pub fn build(scenario: &Scenario) -> Self {
        let j = scenario.num_cells();
        let mut present = vec![false; 2 * j];
        present[BS_NODE] = true;
        for &c in scenario.candidates.keys() {
            present[c] = true;
        }
        for cell in 0..j {
            present[j + cell] = true;
        }
        let vertices: Vec<VertexId> = (0..2 * j).filter(|&v| present[v]).collect();

        let mut out = vec![Vec::new(); 2 * j];
        for &(a, b) in &scenario.los_nodes {
            for (from, to) in [(a, b), (b, a)] {
                if to == BS_NODE {
                    continue;
                }
                let distance = scenario.edge_distance(from, to).expect("validated pair");
                out[from].push(LosEdge { from, to, distance });
            }
        }
        for &(node, cell) in &scenario.los_users {
            let to = j + cell;
            let distance = scenario.worst_case_distance(node, cell).expect("validated pair");
            out[node].push(LosEdge { from: node, to, distance });
        }
        for edges in &mut out {
            edges.sort_by_key(|e| e.to);
        }
        LosGraph {
            num_cells: j,
            vertices,
            present,
            out,
        }
    }

    pub fn num_cells(&self) -> usize {
        self.num_cells
    }

    /// Size of the vertex id space (`2J`); not every id is a vertex.
    pub fn id_space(&self) -> usize {
        self.present.len()
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.present.get(v).copied().unwrap_or(false)
    }

    pub fn out_edges(&self, v: VertexId) -> &[LosEdge] {
        &self.out[v]
    }

    pub fn edges(&self) -> impl Iterator<Item = &LosEdge> {
        self.out.iter().flatten()
    }

    pub fn num_edges(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn edge(&self, from: VertexId, to: VertexId) -> Option<&LosEdge> {
        self.out.get(from)?.iter().find(|e| e.to == to)
    }
}

#[cfg(test)]
mod tests {
    use super::super::*;
    use std::collections::BTreeSet;

    fn bs_only() -> Scenario {
        let doc = ScenarioDocument {
            grid: GridDoc { rows: 1, cols: 1, cell_size_m: 10.0, user_height_m: None },
            bs: BsDoc { cell: 0, pos: [5.0, 5.0, 0.0] },
            candidates: vec![],
            los_nodes: vec![],
            los_users: vec![],
            dmax_overrides: None,
            radio: RadioDoc::indoor_3_5ghz(),
            costs: CostsDoc::integers(5, 12, 1, 3),
            max_tiles: 9,
        };
        Scenario::from_document(&doc).unwrap()
    }

    #[test]
    fn bs_only_graph() {
        let g = bs_only().graph();
        assert_eq!(g.vertices(), &[0, 1]);
        assert_eq!(g.num_edges(), 1);
        assert!(g.edge(0, 1).is_some());
    }

    #[test]
    fn downlink_orientation() {
        let s = presets::office_floor();
        let g = s.graph();
        assert!(g.edge(0, 2).is_some());
        assert!(g.edge(2, 0).is_none());
        assert!(g.edges().all(|e| e.to != 0 && !s.is_user_vertex(e.from)));
        assert!(g.edges().all(|e| e.distance.is_finite() && e.distance > 0.0));
    }

    #[test]
    fn office_floor_vertex_count() {
        let s = presets::office_floor();
        let g = s.graph();
        // oracle: BS + candidates + one user vertex per cell
        let expected = 1 + s.candidates.len() + s.num_cells();
        assert_eq!(expected, 27);
        assert_eq!(g.vertices().len(), expected);
        // each unordered node pair yields two arcs unless one end is the BS
        let node_arcs: usize = s
            .los_nodes
            .iter()
            .map(|&(a, b)| if a == BS_NODE || b == BS_NODE { 1 } else { 2 })
            .sum();
        assert_eq!(g.num_edges(), node_arcs + s.los_users.len());
    }

    #[test]
    fn construction_is_deterministic() {
        let text = presets::OFFICE_FLOOR_JSON;
        let a = load_scenario(text).unwrap().graph();
        let b = load_scenario(text).unwrap().graph();
        assert_eq!(a, b);
    }

    #[test]
    fn restriction_never_adds_edges() {
        let s = presets::office_floor();
        let full: BTreeSet<(usize, usize)> = s.graph().edges().map(|e| (e.from, e.to)).collect();
        let all = s.candidate_cells();
        for drop in &all {
            let keep: BTreeSet<_> = all.iter().copied().filter(|c| c != drop).collect();
            let sub: BTreeSet<(usize, usize)> =
                s.restricted(&keep).graph().edges().map(|e| (e.from, e.to)).collect();
            assert!(sub.is_subset(&full));
            assert!(sub.len() < full.len());
        }
    }
}
