use super::*;
use crate::scenario::*;
use crate::snr::{all_passive_path_snr, hybrid_path_snr, path_hop_gains, path_tiles};

/// 1 x `cols` strip of 10 m cells, BS at the left edge of cell 0.
fn strip(cols: usize, cands: &[(usize, [f64; 3])], los_nodes: &[[usize; 2]], los_users: &[[usize; 2]]) -> Scenario {
    let doc = ScenarioDocument {
        grid: GridDoc { rows: 1, cols, cell_size_m: 10.0, user_height_m: Some(0.0) },
        bs: BsDoc { cell: 0, pos: [0.0, 5.0, 0.0] },
        candidates: cands.iter().map(|&(c, pos)| CandidateDoc { id: c, cell: c, pos }).collect(),
        los_nodes: los_nodes.to_vec(),
        los_users: los_users.to_vec(),
        dmax_overrides: None,
        radio: RadioDoc::indoor_3_5ghz(),
        costs: CostsDoc::integers(5, 12, 1, 3),
        max_tiles: 9,
    };
    Scenario::from_document(&doc).unwrap()
}

fn with_overrides(mut s: Scenario, o: &[(usize, usize, f64)]) -> Scenario {
    for &(n, c, d) in o {
        s.dmax_overrides.insert((n, c), d);
    }
    s
}

#[test]
fn direct_edge_excluded_in_all_passive_view() {
    let s = strip(1, &[], &[], &[]);
    let router = Router::new(&s);
    let view = PlanView::from_plan(&DeploymentPlan::default(), 1);
    let tree = shortest_paths(&router.view(&view, ViewMode::AllPassive), BS_NODE).unwrap();
    assert!(tree.result(1).is_none());
    let routed = router.route(&view).unwrap();
    assert!(routed.best_all_passive(0).is_none());
    assert_eq!(routed.overall(0).kind, PathKind::Direct);
}

/// BS -> p -> user with both hops exactly 10 m.
fn chain() -> (Scenario, DeploymentPlan) {
    let s = strip(3, &[(1, [10.0, 5.0, 0.0])], &[[0, 1]], &[[1, 2]]);
    let s = with_overrides(s, &[(1, 2, 10.0)]);
    let plan = DeploymentPlan { passive: [(1, 1)].into(), active: Default::default() };
    (s, plan)
}

#[test]
fn chain_weights_and_snr() {
    let (s, plan) = chain();
    let router = Router::new(&s);
    let view = PlanView::from_plan(&plan, s.num_cells());
    let tree = shortest_paths(&router.view(&view, ViewMode::AllPassive), BS_NODE).unwrap();
    assert!((tree.distance(1).unwrap() - 6.3 * 10f64.ln()).abs() < 1e-9);
    let r = tree.result(s.user_vertex(2)).unwrap();
    assert_eq!(r.path, vec![0, 1, 5]);
    let expected = 6.3 * 10f64.ln() + (10f64.powf(6.3) / 1e4).ln();
    assert!((r.weight - expected).abs() < 1e-9);
    assert!((r.weight - 19.81).abs() < 0.01);

    let best = router.route(&view).unwrap().best_all_passive(2).unwrap();
    let closed = all_passive_path_snr(&s.radio, &path_hop_gains(&s, &best.path).unwrap(), &path_tiles(&plan, &best.path).unwrap()).unwrap();
    let snr = best.snr_linear.unwrap();
    assert!((snr - closed).abs() / closed < 1e-9);
    assert!((snr - 25.1).abs() < 0.1, "{snr}");
}

#[test]
fn diamond_prefers_more_tiles() {
    // two relays equidistant from BS and target
    let s = strip(
        3,
        &[(1, [10.0, 2.0, 0.0])],
        &[[0, 1]],
        &[[1, 2]],
    );
    let mut doc = s.to_document();
    doc.grid.rows = 2;
    doc.candidates.push(CandidateDoc { id: 4, cell: 4, pos: [10.0, 18.0, 0.0] });
    doc.los_nodes.push([0, 4]);
    doc.los_users.push([4, 2]);
    let mut s = Scenario::from_document(&doc).unwrap();
    s.dmax_overrides.insert((1, 2), 12.0);
    s.dmax_overrides.insert((4, 2), 12.0);
    for (t1, t4, winner) in [(2, 5, 4), (5, 2, 1)] {
        let plan = DeploymentPlan { passive: [(1, t1), (4, t4)].into(), active: Default::default() };
        let best = overall_snr(&s, &plan, 2).unwrap();
        assert_eq!(best.kind, PathKind::AllPassive);
        assert_eq!(best.path[1], winner);
    }
}

#[test]
fn no_active_means_no_hybrid() {
    let (s, plan) = chain();
    assert!(best_hybrid(&s, &plan, 2).unwrap().is_none());
}

#[test]
fn single_active_matches_closed_form() {
    let (s, _) = chain();
    let plan = DeploymentPlan { passive: Default::default(), active: [(1, 3)].into() };
    let best = best_hybrid(&s, &plan, 2).unwrap().unwrap();
    assert_eq!(best.path, vec![0, 1, 5]);
    let closed = hybrid_path_snr(&s.radio, &path_hop_gains(&s, &best.path).unwrap(), &[3.0], 1).unwrap();
    assert!((best.snr_linear.unwrap() - closed).abs() / closed < 1e-9);
    assert_eq!(overall_snr(&s, &plan, 2).unwrap().kind, PathKind::Hybrid);
    // the active surface cannot act as a passive relay
    assert!(best_all_passive(&s, &plan, 2).unwrap().is_none());
}

#[test]
fn empty_plan_without_direct_is_unreachable() {
    let (s, _) = chain();
    let sol = overall_snr(&s, &DeploymentPlan::default(), 2).unwrap();
    assert_eq!(sol.kind, PathKind::Unreachable);
    assert!(sol.snr_linear.is_none());
    let direct = overall_snr(&s, &DeploymentPlan::default(), 0).unwrap();
    assert_eq!(direct.kind, PathKind::Direct);
    let closed = crate::snr::direct_snr(&s, 0).unwrap();
    assert!((direct.snr_linear.unwrap() - closed).abs() / closed < 1e-12);
}

#[test]
fn ties_prefer_hybrid_then_passive() {
    let a = PathSolution { cell: 0, kind: PathKind::Direct, path: vec![], airs_vertex: None, snr_linear: Some(5.0) };
    let b = PathSolution { kind: PathKind::AllPassive, ..a.clone() };
    let c = PathSolution { kind: PathKind::Hybrid, ..a.clone() };
    assert_eq!(b.compare(&a), Ordering::Greater);
    assert_eq!(c.compare(&b), Ordering::Greater);
    assert_eq!(a.compare(&PathSolution::unreachable(0)), Ordering::Greater);
}

#[test]
fn negative_cycle_is_reported() {
    // two passive surfaces 2 m apart with many tiles: the loop gains energy
    let s = strip(3, &[(1, [19.0, 5.0, 0.0]), (2, [21.0, 5.0, 0.0])], &[[0, 1], [1, 2]], &[[2, 2]]);
    let plan = DeploymentPlan { passive: [(1, 9), (2, 9)].into(), active: Default::default() };
    let err = overall_snr(&s, &plan, 2).unwrap_err();
    assert!(matches!(err, crate::Error::NegativeCycle { .. }));
}

#[test]
fn brute_force_single_edge_and_parallel_relays() {
    let s = strip(1, &[], &[], &[]);
    let sol = brute_force_best_path(&s, &DeploymentPlan::default(), 0).unwrap();
    assert_eq!(sol.kind, PathKind::Direct);
    assert_eq!(sol.path, vec![0, 1]);

    let (s, plan) = chain();
    let sol = brute_force_best_path(&s, &plan, 2).unwrap();
    assert_eq!(sol.path, vec![0, 1, 5]);
}

#[test]
fn brute_force_matches_router_on_bundled_scenario() {
    let s = presets::office_floor();
    let mut plan = DeploymentPlan {
        passive: s.candidate_cells().into_iter().map(|c| (c, 2)).collect(),
        active: Default::default(),
    };
    assert_eq!(plan.passive.len() + 2, BRUTE_FORCE_VERTEX_LIMIT);
    let t = plan.passive.remove(&3).unwrap();
    plan.active.insert(3, t);
    for cell in 0..s.num_cells() {
        let fast = overall_snr(&s, &plan, cell).unwrap();
        let slow = brute_force_best_path(&s, &plan, cell).unwrap();
        assert_eq!(fast.kind, slow.kind, "cell {cell}");
        let (a, b) = (fast.snr_linear.unwrap(), slow.snr_linear.unwrap());
        assert!((a - b).abs() / b < 1e-9, "cell {cell}");
    }
}

#[test]
fn path_weight_equals_edge_sum() {
    let s = presets::office_floor();
    let plan = DeploymentPlan { passive: [(2, 4), (6, 4), (8, 4)].into(), active: [(5, 2)].into() };
    let router = Router::new(&s);
    let view = PlanView::from_plan(&plan, s.num_cells());
    for mode in [ViewMode::AllPassive, ViewMode::Hybrid { airs: 5 }] {
        let v = router.view(&view, mode);
        let edges: Vec<_> = v.weighted_edges().collect();
        let tree = shortest_paths(&v, BS_NODE).unwrap();
        for target in 0..s.graph().id_space() {
            let Some(r) = tree.result(target) else { continue };
            let sum: f64 = r
                .path
                .windows(2)
                .map(|w| edges.iter().find(|e| e.0 == w[0] && e.1 == w[1]).unwrap().2)
                .sum();
            assert!((sum - r.weight).abs() < 1e-9);
        }
    }
}
