//! Explicit array-response channel model with optimal beamforming.
//!
//! This module builds every hop of a LoS path as a full complex matrix and
//! evaluates the received SNR by direct matrix products. It is the numerical
//! reference against which the closed-form SNR expressions in [`crate::snr`]
//! are checked; production code paths never call it.

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::plan::{DeploymentPlan, Role};
use crate::scenario::{distance, Scenario, VertexId, BS_NODE};

pub type C64 = Complex<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrayKind {
    /// ULA at the BS, laid along the x axis.
    Linear,
    /// UPA at a surface, parallel to the x-z plane.
    Planar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArrayGeometry {
    pub kind: ArrayKind,
    pub nx: usize,
    pub nz: usize,
}

impl ArrayGeometry {
    pub fn linear(n: usize) -> Self {
        ArrayGeometry { kind: ArrayKind::Linear, nx: n, nz: 1 }
    }

    /// Tiles are concatenated horizontally: `T` tiles of `N x N` elements
    /// form a `(T N) x N` array.
    pub fn tiled(tiles: u32, n: u32) -> Self {
        ArrayGeometry {
            kind: ArrayKind::Planar,
            nx: (tiles * n) as usize,
            nz: n as usize,
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.nz
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `u(s, M')`: entry `k` is `exp(-j pi k s)`.
pub fn steering_vector(spatial_freq: f64, length: usize) -> DVector<C64> {
    DVector::from_iterator(
        length,
        (0..length).map(|k| Complex::from_polar(1.0, -PI * k as f64 * spatial_freq)),
    )
}

/// UPA response as the Kronecker product of the x- and z-direction steering
/// vectors.
pub fn upa_response(
    azimuth: f64,
    elevation: f64,
    geometry: ArrayGeometry,
    spacing_over_wavelength: f64,
) -> DVector<C64> {
    let fx = 2.0 * spacing_over_wavelength * azimuth.cos() * elevation.sin();
    let fz = 2.0 * spacing_over_wavelength * elevation.cos();
    steering_vector(fx, geometry.nx).kronecker(&steering_vector(fz, geometry.nz))
}

/// Azimuth and elevation of `to` as seen from `from` in a frame whose x-z
/// plane is the array plane: `cos(az) sin(el)` is the x direction cosine and
/// `cos(el)` the z direction cosine.
pub fn angles(from: [f64; 3], to: [f64; 3]) -> (f64, f64) {
    let d = distance(from, to);
    let (ux, uy, uz) = ((to[0] - from[0]) / d, (to[1] - from[1]) / d, (to[2] - from[2]) / d);
    (uy.atan2(ux), uz.clamp(-1.0, 1.0).acos())
}

fn array_response(geometry: ArrayGeometry, from: [f64; 3], to: [f64; 3], spacing_over_wavelength: f64) -> DVector<C64> {
    match geometry.kind {
        ArrayKind::Linear => {
            let d = distance(from, to);
            let cos_phi = (to[0] - from[0]) / d;
            steering_vector(2.0 * spacing_over_wavelength * cos_phi, geometry.nx)
        }
        ArrayKind::Planar => {
            let (az, el) = angles(from, to);
            upa_response(az, el, geometry, spacing_over_wavelength)
        }
    }
}

#[derive(Debug, Clone)]
pub struct ComplexChannel {
    pub matrix: DMatrix<C64>,
    /// LoS amplitude gain `sqrt(beta0 / d^alpha)`.
    pub gain: f64,
    /// Transmit response of the sending array towards the receiver.
    pub tx_response: DVector<C64>,
    /// Receive response of the receiving array (all-ones for a single-antenna user).
    pub rx_response: DVector<C64>,
}

/// One hop `from -> to` of a path with the geometry implied by `plan`.
struct Hop {
    channel: ComplexChannel,
}

fn vertex_geometry(scenario: &Scenario, plan: &DeploymentPlan, v: VertexId) -> Result<ArrayGeometry> {
    if v == BS_NODE {
        return Ok(ArrayGeometry::linear(scenario.radio.bs_antennas as usize));
    }
    if scenario.is_user_vertex(v) {
        return Ok(ArrayGeometry::linear(1));
    }
    match plan.tiles(v) {
        Some(t) if t > 0 => Ok(ArrayGeometry::tiled(t, scenario.radio.elements_per_tile_dim)),
        _ => Err(Error::Path(format!("vertex {v} has no tiles in the plan"))),
    }
}

fn build_hop(scenario: &Scenario, plan: &DeploymentPlan, from: VertexId, to: VertexId) -> Result<Hop> {
    let graph_ok = if scenario.is_user_vertex(to) {
        scenario.los_users.contains(&(from, to - scenario.num_cells()))
    } else {
        to != BS_NODE && scenario.nodes_los(from, to)
    };
    if !graph_ok || scenario.is_user_vertex(from) {
        return Err(Error::MissingEdge { from, to });
    }
    let radio = &scenario.radio;
    let tx_geom = vertex_geometry(scenario, plan, from)?;
    let rx_geom = vertex_geometry(scenario, plan, to)?;
    let p_from = scenario.node_position(from).expect("existing node");
    let p_to = if scenario.is_user_vertex(to) {
        scenario.worst_case_user_position(from, to - scenario.num_cells())?
    } else {
        scenario.node_position(to).expect("existing node")
    };
    let d = scenario.edge_distance(from, to)?;
    let gain = (radio.ref_path_gain / d.powf(radio.pathloss_exponent)).sqrt();
    let sow = radio.element_spacing / radio.wavelength;
    let tx = array_response(tx_geom, p_from, p_to, sow);
    let rx = if scenario.is_user_vertex(to) {
        DVector::from_element(1, Complex::new(1.0, 0.0))
    } else {
        array_response(rx_geom, p_to, p_from, sow)
    };
    let phase = Complex::from_polar(gain, -2.0 * PI * d / radio.wavelength);
    let matrix = (&rx * tx.adjoint()) * phase;
    Ok(Hop {
        channel: ComplexChannel { matrix, gain, tx_response: tx, rx_response: rx },
    })
}

fn check_path(scenario: &Scenario, path: &[VertexId]) -> Result<()> {
    if path.len() < 2 {
        return Err(Error::Path("a path needs at least a source and a destination".into()));
    }
    if path[0] != BS_NODE {
        return Err(Error::Path("path must start at the BS (vertex 0)".into()));
    }
    if !scenario.is_user_vertex(*path.last().unwrap()) {
        return Err(Error::Path("path must end at a user vertex".into()));
    }
    Ok(())
}

/// Per-hop channels along `path`.
pub fn build_channels(scenario: &Scenario, plan: &DeploymentPlan, path: &[VertexId]) -> Result<Vec<ComplexChannel>> {
    if path.len() < 2 {
        return Err(Error::Path("a path needs at least two vertices".into()));
    }
    path.windows(2)
        .map(|w| build_hop(scenario, plan, w[0], w[1]).map(|h| h.channel))
        .collect()
}

/// Diagonal reflection phases aligning the incoming and outgoing responses.
fn aligned_phases(incoming_rx: &DVector<C64>, outgoing_tx: &DVector<C64>) -> DVector<C64> {
    DVector::from_iterator(
        incoming_rx.len(),
        incoming_rx
            .iter()
            .zip(outgoing_tx.iter())
            .map(|(r, t)| Complex::from_polar(1.0, (r.conj() * t).arg())),
    )
}

/// Received SNR over `path` with MRT at the BS, per-element phase alignment at
/// every surface, and (if `airs` is given) the amplification factor that
/// holds the active surface's per-element output power at `P_A`.
pub fn explicit_path_snr(
    scenario: &Scenario,
    plan: &DeploymentPlan,
    path: &[VertexId],
    airs: Option<VertexId>,
) -> Result<f64> {
    check_path(scenario, path)?;
    let intermediates = &path[1..path.len() - 1];
    let active_on_path: Vec<_> = intermediates
        .iter()
        .filter(|&&v| plan.role(v) == Some(Role::Active))
        .collect();
    let airs_pos = match airs {
        Some(a) => {
            let pos = intermediates
                .iter()
                .position(|&v| v == a)
                .ok_or_else(|| Error::Path(format!("active vertex {a} is not an intermediate of the path")))?;
            if intermediates.iter().filter(|&&v| v == a).count() > 1 {
                return Err(Error::Path(format!("active vertex {a} appears more than once")));
            }
            if active_on_path.iter().any(|&&v| v != a) {
                return Err(Error::Path("more than one active surface on the path".into()));
            }
            Some(pos + 1)
        }
        None => {
            if !active_on_path.is_empty() {
                return Err(Error::Path("path crosses an active surface but none was designated".into()));
            }
            None
        }
    };

    let radio = &scenario.radio;
    let sigma2 = radio.noise_power_watts;
    let hops: Vec<ComplexChannel> = build_channels(scenario, plan, path)?;

    // reflection matrices (as diagonals) for intermediates 1..=L
    let phases: Vec<DVector<C64>> = (1..path.len() - 1)
        .map(|m| aligned_phases(&hops[m - 1].rx_response, &hops[m].tx_response))
        .collect();

    // MRT towards the first hop
    let h_t = &hops[0].tx_response;
    let w: DVector<C64> = h_t * Complex::new(radio.tx_power_watts.sqrt() / h_t.norm(), 0.0);

    match airs_pos {
        None => {
            let mut v = &hops[0].matrix * &w;
            for m in 1..path.len() - 1 {
                v = v.component_mul(&phases[m - 1]);
                v = &hops[m].matrix * v;
            }
            Ok(v[0].norm_sqr() / sigma2)
        }
        Some(l) => {
            // incident signal at the active surface
            let mut h = &hops[0].matrix * &w;
            for m in 1..l {
                h = h.component_mul(&phases[m - 1]);
                h = &hops[m].matrix * h;
            }
            let eta2 = amplification_factor_sq(scenario, plan, path, l);
            let eta = eta2.sqrt();
            // downstream row vector from the active surface output to the user
            let last = path.len() - 2;
            let mut g: DVector<C64> = hops[last].matrix.row(0).transpose();
            for m in (l..last).rev() {
                let reflected = g.component_mul(&phases[m]);
                g = hops[m].matrix.transpose() * reflected;
            }
            let phi_a: DVector<C64> = phases[l - 1].map(|p| p * eta);
            let g_phi = g.component_mul(&phi_a);
            let signal = g_phi.iter().zip(h.iter()).map(|(a, b)| a * b).sum::<C64>().norm_sqr();
            let amp_noise = g_phi.norm_squared() * sigma2;
            Ok(signal / (amp_noise + sigma2))
        }
    }
}

/// Amplification factor squared for an active surface at path position `l`:
/// `P_A / (incident per-element power + sigma^2)`, with each upstream passive
/// surface contributing its aggregated gain `(N^2 T)^2`.
pub fn amplification_factor_sq(scenario: &Scenario, plan: &DeploymentPlan, path: &[VertexId], l: usize) -> f64 {
    let radio = &scenario.radio;
    let gain_sq = |a: VertexId, b: VertexId| {
        radio.ref_path_gain / scenario.edge_distance(a, b).expect("validated hop").powf(radio.pathloss_exponent)
    };
    let mut incident = radio.tx_power_watts * radio.bs_antennas as f64 * gain_sq(path[0], path[1]);
    for m in 1..l {
        let elems = radio.tile_elements() * plan.tiles(path[m]).expect("tiles checked") as f64;
        incident *= gain_sq(path[m], path[m + 1]) * elems * elems;
    }
    radio.amp_power_per_element_watts / (incident + radio.noise_power_watts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{BsDoc, CandidateDoc, CostsDoc, GridDoc, RadioDoc, ScenarioDocument};
    use crate::snr;
    use std::collections::BTreeMap;

    fn c(re: f64, im: f64) -> C64 {
        Complex::new(re, im)
    }

    #[test]
    fn zero_frequency_is_all_ones() {
        let u = steering_vector(0.0, 4);
        assert!(u.iter().all(|z| (z - c(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn unit_frequency_alternates() {
        let u = steering_vector(1.0, 2);
        assert!((u[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((u[1] - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn steering_vector_matches_term_formula() {
        let u = steering_vector(0.37, 8);
        for k in 0..8 {
            let angle = -PI * k as f64 * 0.37;
            assert!((u[k] - c(angle.cos(), angle.sin())).norm() < 1e-14);
        }
    }

    #[test]
    fn broadside_upa_is_all_ones() {
        let u = upa_response(PI / 2.0, PI / 2.0, ArrayGeometry::tiled(2, 3), 0.5);
        assert_eq!(u.len(), 18);
        assert!(u.iter().all(|z| (z - c(1.0, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn upa_two_by_two_kronecker_expansion() {
        let (az, el, sow) = (0.7, 1.1, 0.5);
        let g = ArrayGeometry { kind: ArrayKind::Planar, nx: 2, nz: 2 };
        let u = upa_response(az, el, g, sow);
        let fx = 2.0 * sow * az.cos() * el.sin();
        let fz = 2.0 * sow * el.cos();
        let e = |f: f64| Complex::from_polar(1.0, -PI * f);
        let expected = [c(1.0, 0.0), e(fz), e(fx), e(fx) * e(fz)];
        for (a, b) in u.iter().zip(expected) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    proptest::proptest! {
        #[test]
        fn upa_entries_have_unit_modulus(az in -3.0f64..3.0, el in 0.0f64..3.1, nx in 1usize..6, nz in 1usize..6) {
            let u = upa_response(az, el, ArrayGeometry { kind: ArrayKind::Planar, nx, nz }, 0.5);
            for z in u.iter() {
                proptest::prop_assert!((z.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    fn line_scenario(m: u32, n: u32) -> Scenario {
        // BS in cell 0, relay in cell 1, user cell 2; 1x3 grid of 10 m cells
        let mut radio = RadioDoc::indoor_3_5ghz();
        radio.m = m;
        radio.n = n;
        let doc = ScenarioDocument {
            grid: GridDoc { rows: 1, cols: 3, cell_size_m: 10.0, user_height_m: Some(1.0) },
            bs: BsDoc { cell: 0, pos: [5.0, 4.0, 3.0] },
            candidates: vec![CandidateDoc { id: 1, cell: 1, pos: [15.0, 6.0, 2.5] }],
            los_nodes: vec![[0, 1]],
            los_users: vec![[1, 2], [0, 1]],
            dmax_overrides: None,
            radio,
            costs: CostsDoc::integers(5, 12, 1, 3),
            max_tiles: 9,
        };
        Scenario::from_document(&doc).unwrap()
    }

    fn passive(cell: usize, t: u32) -> DeploymentPlan {
        DeploymentPlan { passive: BTreeMap::from([(cell, t)]), active: BTreeMap::new() }
    }

    #[test]
    fn scalar_hop_has_gain_magnitude() {
        let s = line_scenario(1, 1);
        let ch = build_channels(&s, &passive(1, 1), &[0, 1, 5]).unwrap();
        assert_eq!(ch[0].matrix.shape(), (1, 1));
        let d = s.edge_distance(0, 1).unwrap();
        let kappa = (s.radio.ref_path_gain / d.powi(2)).sqrt();
        assert!((ch[0].matrix[(0, 0)].norm() - kappa).abs() < 1e-15);
    }

    #[test]
    fn hops_are_rank_one() {
        let s = line_scenario(3, 2);
        let ch = build_channels(&s, &passive(1, 2), &[0, 1, 5]).unwrap();
        for hop in &ch {
            let (r, cdim) = hop.matrix.shape();
            let svd = hop.matrix.clone().svd(false, false);
            let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
            sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let expected = hop.gain * ((r * cdim) as f64).sqrt();
            assert!((sv[0] - expected).abs() / expected < 1e-10);
            assert!(sv[1..].iter().all(|&x| x < 1e-12 * expected));
        }
    }

    #[test]
    fn bs_to_user_entries_have_gain_magnitude() {
        let s = line_scenario(4, 2);
        let ch = build_channels(&s, &DeploymentPlan::default(), &[0, 4]).unwrap();
        assert_eq!(ch[0].matrix.shape(), (1, 4));
        assert!(ch[0].matrix.iter().all(|z| (z.norm() - ch[0].gain).abs() < 1e-15));
    }

    #[test]
    fn direct_path_matches_direct_formula() {
        let s = line_scenario(10, 10);
        let got = explicit_path_snr(&s, &DeploymentPlan::default(), &[0, 4], None).unwrap();
        let want = snr::direct_snr(&s, 1).unwrap();
        assert!((got - want).abs() / want < 1e-9);
    }

    #[test]
    fn missing_edge_and_zero_tiles_rejected() {
        let s = line_scenario(2, 2);
        assert!(matches!(
            build_channels(&s, &passive(1, 1), &[0, 5]),
            Err(Error::MissingEdge { .. })
        ));
        assert!(build_channels(&s, &DeploymentPlan::default(), &[0, 1, 5]).is_err());
        assert!(explicit_path_snr(&s, &passive(1, 1), &[], None).is_err());
    }

    #[test]
    fn two_active_surfaces_rejected() {
        let mut s = line_scenario(2, 2);
        s.candidates.insert(2, [25.0, 5.0, 2.0]);
        s.los_nodes.insert((1, 2));
        s.los_users.insert((2, 2));
        let plan = DeploymentPlan { passive: BTreeMap::new(), active: BTreeMap::from([(1, 1), (2, 1)]) };
        assert!(explicit_path_snr(&s, &plan, &[0, 1, 2, 5], Some(1)).is_err());
    }

    #[test]
    fn alignment_beats_random_phases() {
        use rand::{Rng, SeedableRng};
        let s = line_scenario(4, 2);
        let plan = passive(1, 2);
        let path = [0, 1, 5];
        let aligned = explicit_path_snr(&s, &plan, &path, None).unwrap();
        let hops = build_channels(&s, &plan, &path).unwrap();
        let h_t = &hops[0].tx_response;
        let w: DVector<C64> = h_t * Complex::new(s.radio.tx_power_watts.sqrt() / h_t.norm(), 0.0);
        let incident = &hops[0].matrix * &w;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let phi = DVector::from_fn(incident.len(), |_, _| Complex::from_polar(1.0, rng.gen_range(0.0..2.0 * PI)));
            let y = (&hops[1].matrix * incident.component_mul(&phi))[0];
            assert!(y.norm_sqr() / s.radio.noise_power_watts <= aligned * (1.0 + 1e-12));
        }
    }
}
