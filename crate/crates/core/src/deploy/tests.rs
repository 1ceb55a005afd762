use super::*;
use crate::scenario::*;
use crate::snr::{all_passive_path_snr, path_hop_gains};

/// 1x3 strip: BS in cell 0 sees cells 0 and 1 directly; cell 2 is only
/// reachable via a relay in cell 1.
fn strip() -> Scenario {
    let doc = ScenarioDocument {
        grid: GridDoc { rows: 1, cols: 3, cell_size_m: 10.0, user_height_m: Some(0.0) },
        bs: BsDoc { cell: 0, pos: [0.0, 5.0, 0.0] },
        candidates: vec![CandidateDoc { id: 1, cell: 1, pos: [10.0, 5.0, 0.0] }],
        los_nodes: vec![[0, 1]],
        los_users: vec![[0, 1], [1, 2]],
        dmax_overrides: Some(vec![(1, 2, 12.0)]),
        radio: RadioDoc::indoor_3_5ghz(),
        costs: CostsDoc::integers(5, 12, 1, 3),
        max_tiles: 9,
    };
    Scenario::from_document(&doc).unwrap()
}

fn relay_snr(s: &Scenario) -> f64 {
    let path = [0, 1, s.user_vertex(2)];
    all_passive_path_snr(&s.radio, &path_hop_gains(s, &path).unwrap(), &[1.0]).unwrap()
}

#[test]
fn direct_coverage_needs_no_surfaces() {
    let s = strip();
    // cell 2 has no direct LoS, so the relay is needed
    let report = optimize_deployment(&s, &SearchConfig::new(relay_snr(&s) * 0.5)).unwrap();
    let plan = report.plan.unwrap();
    assert_eq!(plan.passive.len() + plan.active.len(), 1);

    let mut doc = s.to_document();
    doc.los_users.push([0, 2]);
    doc.dmax_overrides = None;
    let covered = Scenario::from_document(&doc).unwrap();
    let report = optimize_deployment(&covered, &SearchConfig::new(1.0)).unwrap();
    assert_eq!(report.plan, Some(DeploymentPlan::default()));
    assert_eq!(report.total_cost(), Some(Cost::ZERO));
    assert_eq!(report.cells.len(), 3);
}

#[test]
fn single_relay_uses_smallest_sufficient_tiles() {
    let s = strip();
    let gamma0 = relay_snr(&s) * 4.5;
    let oracle = full_enumeration(&s, &SearchConfig::new(gamma0)).unwrap();
    let fast = optimize_deployment(&s, &SearchConfig::new(gamma0)).unwrap();
    let expected = DeploymentPlan { passive: [(1, 3)].into(), active: Default::default() };
    assert_eq!(oracle.plan.as_ref(), Some(&expected));
    assert_eq!(oracle.total_cost(), Some(Cost::from_integer(8)));
    assert_eq!(fast.total_cost(), oracle.total_cost());

    let hopeless = optimize_deployment(&s, &SearchConfig::new(relay_snr(&s) * 1e6)).unwrap();
    assert!(!hopeless.feasible());
    assert!(hopeless.cells.is_empty());
}

#[test]
fn bound_pruning_counts_add_up() {
    let s = strip();
    let r = optimize_deployment(&s, &SearchConfig::new(relay_snr(&s) * 2.0)).unwrap();
    assert_eq!(r.total_pairs, 3);
    assert_eq!(r.examined + r.pruned_bound, r.total_pairs);
    assert!(r.pruned_infeasible <= r.examined);
}

#[test]
fn scheme_registry() {
    let s = strip();
    let cfg = SearchConfig::new(1.0);
    for name in SCHEME_NAMES {
        assert_eq!(build_scheme(name, &cfg, &s).unwrap().name(), *name);
    }
    assert!(build_scheme("bench9", &cfg, &s).is_err());
    let mut big = cfg.clone();
    big.equal_tiles_passive = 10;
    assert!(build_scheme("bench2", &big, &s).is_err());
    assert!(!build_scheme("bench1", &cfg, &s).unwrap().allows_active());
}

#[test]
fn oracle_size_guard() {
    let s = presets::office_floor();
    assert!(matches!(full_enumeration(&s, &SearchConfig::new(1.0)), Err(Error::Budget(_))));
}
