//! Closed-form worst-case SNR for direct, hybrid (one active surface) and
//! all-passive LoS paths, plus the equal-spacing chain trade-off analysis.
//!
//! All quantities are linear; tile counts are real so the same expressions
//! serve the continuous relaxation.

use crate::error::{Error, Result};
use crate::plan::{CellId, DeploymentPlan};
use crate::scenario::{RadioParams, Scenario, VertexId, BS_NODE};

/// `kappa^2 = beta0 / d^alpha`.
pub fn path_gain_sq(distance: f64, radio: &RadioParams) -> Result<f64> {
    if !(distance.is_finite() && distance > 0.0) {
        return Err(Error::Argument(format!("distance must be positive, got {distance}")));
    }
    Ok(radio.ref_path_gain / distance.powf(radio.pathloss_exponent))
}

/// `C0 kappa^2` over the direct BS-to-cell link, or `None` without direct LoS.
pub fn direct_snr(scenario: &Scenario, cell: CellId) -> Option<f64> {
    let d = scenario.worst_case_distance(BS_NODE, cell).ok()?;
    Some(scenario.radio.c0() * path_gain_sq(d, &scenario.radio).ok()?)
}

fn check_hops(hop_gains_sq: &[f64], tiles: &[f64]) -> Result<()> {
    if tiles.is_empty() {
        return Err(Error::Argument("need at least one reflecting surface".into()));
    }
    if hop_gains_sq.len() != tiles.len() + 1 {
        return Err(Error::Argument(format!(
            "{} hop gains for {} surfaces; expected one more gain than surfaces",
            hop_gains_sq.len(),
            tiles.len()
        )));
    }
    if tiles.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::Argument("tile counts must be positive".into()));
    }
    if hop_gains_sq.iter().any(|&g| !(g > 0.0 && g.is_finite())) {
        return Err(Error::Argument("hop gains must be positive".into()));
    }
    Ok(())
}

/// Per-hop loss factor `kappa^-2 / (N^4 T^2)` of a reflection off a surface
/// with `tiles` tiles followed by a hop with gain `gain_sq`.
fn reflection_loss(gain_sq: f64, tiles: f64, radio: &RadioParams) -> f64 {
    let n2 = radio.tile_elements();
    1.0 / (gain_sq * n2 * n2 * tiles * tiles)
}

/// Hybrid path `0, b_1, .., b_L, J+j` with the active surface at position
/// `airs_position` (1-based). `hop_gains_sq[m]` is the gain of hop
/// `b_m -> b_{m+1}` and `tiles[m-1]` the tile count of `b_m`.
pub fn hybrid_path_snr(
    radio: &RadioParams,
    hop_gains_sq: &[f64],
    tiles: &[f64],
    airs_position: usize,
) -> Result<f64> {
    check_hops(hop_gains_sq, tiles)?;
    let l = airs_position;
    let big_l = tiles.len();
    if l == 0 || l > big_l {
        return Err(Error::Argument(format!("active position {l} outside 1..={big_l}")));
    }
    let (c0, ca, n2) = (radio.c0(), radio.ca(), radio.tile_elements());
    let first = 1.0 / hop_gains_sq[0];
    let upstream: f64 = (1..l).map(|m| reflection_loss(hop_gains_sq[m], tiles[m - 1], radio)).product();
    let downstream: f64 = (l..=big_l)
        .map(|m| reflection_loss(hop_gains_sq[m], tiles[m - 1], radio))
        .product();
    let inv = first * upstream / (c0 * n2 * tiles[l - 1])
        + downstream / ca
        + first * upstream * downstream / (c0 * ca);
    Ok(1.0 / inv)
}

/// All-passive path: `C0 kappa_0^2 prod kappa_m^2 N^4 T_m^2`.
pub fn all_passive_path_snr(radio: &RadioParams, hop_gains_sq: &[f64], tiles: &[f64]) -> Result<f64> {
    check_hops(hop_gains_sq, tiles)?;
    let inv: f64 = (1..=tiles.len())
        .map(|m| reflection_loss(hop_gains_sq[m], tiles[m - 1], radio))
        .product::<f64>()
        / hop_gains_sq[0];
    Ok(radio.c0() / inv)
}

/// Hop gains `kappa^2` along a vertex path.
pub fn path_hop_gains(scenario: &Scenario, path: &[VertexId]) -> Result<Vec<f64>> {
    path.windows(2)
        .map(|w| path_gain_sq(scenario.edge_distance(w[0], w[1])?, &scenario.radio))
        .collect()
}

/// Tile counts of the intermediate vertices of a path.
pub fn path_tiles(plan: &DeploymentPlan, path: &[VertexId]) -> Result<Vec<f64>> {
    path[1..path.len().saturating_sub(1)]
        .iter()
        .map(|&v| {
            plan.tiles(v)
                .map(|t| t as f64)
                .ok_or_else(|| Error::Path(format!("vertex {v} is not deployed")))
        })
        .collect()
}

/// Passive chain of `L` surfaces with equal spacing `d0` and `T0` tiles each.
pub fn equal_chain_passive_snr(hops: usize, d0: f64, t0: f64, radio: &RadioParams) -> f64 {
    let kappa_sq = radio.ref_path_gain / d0.powf(radio.pathloss_exponent);
    let n0 = radio.tile_elements() * t0;
    radio.c0() * kappa_sq.powi(hops as i32 + 1) * n0.powi(2 * hops as i32)
}

/// Same chain with surface `l` replaced by an active one carrying `c' T0`
/// tiles.
pub fn equal_chain_hybrid_snr(hops: usize, l: usize, d0: f64, t0: f64, cost_ratio: f64, radio: &RadioParams) -> f64 {
    let kappa_sq = radio.ref_path_gain / d0.powf(radio.pathloss_exponent);
    let n0 = radio.tile_elements() * t0;
    let (c0, ca) = (radio.c0(), radio.ca());
    let (li, big) = (l as i32, hops as i32);
    let inv = kappa_sq.powi(-li) / (c0 * cost_ratio * n0 * n0.powi(2 * (li - 1)))
        + kappa_sq.powi(-(big - li + 1)) / (ca * cost_ratio * cost_ratio * n0.powi(2 * (big - li + 1)))
        + kappa_sq.powi(-(big + 1)) / (c0 * ca * cost_ratio * cost_ratio * n0.powi(2 * big));
    1.0 / inv
}

/// Hybrid-to-passive SNR ratio of the equal-spacing chain in closed form.
pub fn tradeoff_ratio(hops: usize, l: usize, d0: f64, t0: f64, cost_ratio: f64, radio: &RadioParams) -> Result<f64> {
    if l == 0 || l > hops {
        return Err(Error::Argument(format!("active position {l} outside 1..={hops}")));
    }
    let kappa = (radio.ref_path_gain / d0.powf(radio.pathloss_exponent)).sqrt();
    let n0 = radio.tile_elements() * t0;
    let (c0, ca) = (radio.c0(), radio.ca());
    let kn = kappa * n0;
    let num = ca * cost_ratio * cost_ratio * n0 * n0;
    let den = ca * cost_ratio * n0 * kn.powi(2 * (hops + 1 - l) as i32) + c0 * kn.powi(2 * l as i32) + n0 * n0;
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{RadioDoc, RadioParams};
    use proptest::prelude::*;

    fn radio() -> RadioParams {
        RadioParams::from_doc(&RadioDoc::indoor_3_5ghz()).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn unit_distance_gain_is_reference() {
        let g = path_gain_sq(1.0, &radio()).unwrap();
        assert!(rel(g, 10f64.powf(-4.3)) < 1e-12);
    }

    #[test]
    fn ten_metres_is_minus_63_db() {
        // -43 dB - 20 log10(10)
        let g = path_gain_sq(10.0, &radio()).unwrap();
        assert!(rel(g, 10f64.powf(-6.3)) < 1e-12);
    }

    #[test]
    fn zero_exponent_ignores_distance() {
        let mut r = radio();
        r.pathloss_exponent = 0.0;
        assert_eq!(path_gain_sq(37.0, &r).unwrap(), r.ref_path_gain);
    }

    #[test]
    fn non_positive_distance_rejected() {
        assert!(path_gain_sq(0.0, &radio()).is_err());
        assert!(path_gain_sq(-1.0, &radio()).is_err());
    }

    #[test]
    fn direct_at_ten_metres_is_37_db() {
        let r = radio();
        let snr = r.c0() * path_gain_sq(10.0, &r).unwrap();
        // C0 = 1e10, kappa^2 = 10^-6.3
        assert!(rel(snr, 1e10 * 10f64.powf(-6.3)) < 1e-12);
        assert!((crate::units::linear_to_db(snr) - 37.0).abs() < 1e-9);
    }

    #[test]
    fn one_relay_passive_example() {
        let r = radio();
        let g = path_gain_sq(10.0, &r).unwrap();
        let snr = all_passive_path_snr(&r, &[g, g], &[9.0]).unwrap();
        let oracle = 1e10 * 10f64.powf(-6.3) * 10f64.powf(-6.3) * 1e4 * 81.0;
        assert!(rel(snr, oracle) < 1e-12);
        assert!(rel(snr, 2.03e3) < 5e-3);
    }

    #[test]
    fn passive_scaling_by_tiles() {
        let r = radio();
        let gains = [1e-7, 3e-7, 2e-7, 5e-7];
        let base = all_passive_path_snr(&r, &gains, &[1.0, 1.0, 1.0]).unwrap();
        let scaled = all_passive_path_snr(&r, &gains, &[2.5, 2.5, 2.5]).unwrap();
        assert!(rel(scaled / base, 2.5f64.powi(6)) < 1e-12);
    }

    #[test]
    fn length_mismatch_rejected() {
        let r = radio();
        assert!(all_passive_path_snr(&r, &[1e-6], &[1.0]).is_err());
        assert!(hybrid_path_snr(&r, &[1e-6, 1e-6], &[1.0], 2).is_err());
        assert!(hybrid_path_snr(&r, &[1e-6, 1e-6], &[0.0], 1).is_err());
    }

    #[test]
    fn single_active_relay_formula() {
        let r = radio();
        let (k0, k1, t) = (2e-7, 5e-7, 3.0);
        let n2 = 100.0;
        let expected = 1.0
            / (1.0 / (k0 * r.c0() * n2 * t)
                + 1.0 / (k1 * r.ca() * n2 * n2 * t * t)
                + 1.0 / (k0 * k1 * r.c0() * r.ca() * n2 * n2 * t * t));
        let got = hybrid_path_snr(&r, &[k0, k1], &[t], 1).unwrap();
        assert!(rel(got, expected) < 1e-12);
    }

    #[test]
    fn equal_chain_matches_general_formulas() {
        let r = radio();
        for hops in 1..=4usize {
            for l in 1..=hops {
                let (d0, t0, cprime) = (12.0, 3.0, 5.0 / 12.0);
                let g = path_gain_sq(d0, &r).unwrap();
                let gains = vec![g; hops + 1];
                let mut tiles = vec![t0; hops];
                let passive = all_passive_path_snr(&r, &gains, &tiles).unwrap();
                assert!(rel(passive, equal_chain_passive_snr(hops, d0, t0, &r)) < 1e-10);
                tiles[l - 1] = t0 * cprime;
                let hybrid = hybrid_path_snr(&r, &gains, &tiles, l).unwrap();
                assert!(rel(hybrid, equal_chain_hybrid_snr(hops, l, d0, t0, cprime, &r)) < 1e-10);
            }
        }
    }

    #[test]
    fn ratio_matches_two_formula_cross_check() {
        let r = radio();
        for hops in 1..=4usize {
            for l in 1..=hops {
                for &(d0, t0, cp) in &[(5.0, 1.0, 0.4), (15.0, 4.0, 1.0), (30.0, 9.0, 0.25)] {
                    let ratio = tradeoff_ratio(hops, l, d0, t0, cp, &r).unwrap();
                    let direct = equal_chain_hybrid_snr(hops, l, d0, t0, cp, &r) / equal_chain_passive_snr(hops, d0, t0, &r);
                    assert!(rel(ratio, direct) < 1e-9, "L={hops} l={l} d0={d0}: {ratio} vs {direct}");
                }
            }
        }
    }

    #[test]
    fn huge_amplifier_budget_leaves_first_term() {
        let mut r = radio();
        r.amp_power_per_element_watts = r.noise_power_watts * 1e15;
        let (k0, k1, k2, t1, t2) = (2e-7, 4e-7, 3e-7, 2.0, 5.0);
        let got = hybrid_path_snr(&r, &[k0, k1, k2], &[t1, t2], 2).unwrap();
        let first = r.c0() * 100.0 * t2 * k0 * (k1 * 1e4 * t1 * t1);
        assert!(rel(got, first) < 1e-6);
    }

    proptest! {
        #[test]
        fn doubling_tiles_increases_hybrid_snr(
            gains in proptest::collection::vec(1e-9f64..1e-5, 4),
            tiles in proptest::collection::vec(1.0f64..9.0, 3),
            l in 1usize..=3, which in 0usize..3,
        ) {
            let r = radio();
            let base = hybrid_path_snr(&r, &gains, &tiles, l).unwrap();
            let mut more = tiles.clone();
            more[which] *= 2.0;
            let up = hybrid_path_snr(&r, &gains, &more, l).unwrap();
            prop_assert!(up > base);
            prop_assert!(base.is_finite() && base > 0.0);
        }

        #[test]
        fn passive_snr_positive_finite(
            gains in proptest::collection::vec(1e-9f64..1e-5, 3),
            tiles in proptest::collection::vec(1.0f64..9.0, 2),
        ) {
            let s = all_passive_path_snr(&radio(), &gains, &tiles).unwrap();
            prop_assert!(s.is_finite() && s > 0.0);
        }
    }
}
