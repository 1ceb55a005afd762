//! Serde schema of the scenario JSON document.

use serde::{Deserialize, Serialize};

use crate::cost::Cost;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub grid: GridDoc,
    pub bs: BsDoc,
    #[serde(default)]
    pub candidates: Vec<CandidateDoc>,
    #[serde(default)]
    pub los_nodes: Vec<[usize; 2]>,
    #[serde(default)]
    pub los_users: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dmax_overrides: Option<Vec<(usize, usize, f64)>>,
    pub radio: RadioDoc,
    pub costs: CostsDoc,
    pub max_tiles: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridDoc {
    pub rows: usize,
    pub cols: usize,
    pub cell_size_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub user_height_m: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BsDoc {
    pub cell: usize,
    pub pos: [f64; 3],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateDoc {
    pub id: usize,
    pub cell: usize,
    pub pos: [f64; 3],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioDoc {
    pub p0_dbm: f64,
    pub pa_dbm: f64,
    pub noise_dbm: f64,
    pub m: u32,
    pub n: u32,
    pub beta0_db: f64,
    pub alpha: f64,
    pub wavelength_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing_m: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostsDoc {
    pub cp0: Cost,
    pub ca0: Cost,
    pub cp: Cost,
    pub ca: Cost,
}

impl RadioDoc {
    /// Radio settings used in the indoor 3.5 GHz planning study.
    pub fn indoor_3_5ghz() -> Self {
        RadioDoc {
            p0_dbm: 30.0,
            pa_dbm: -5.0,
            noise_dbm: -60.0,
            m: 10,
            n: 10,
            beta0_db: -43.0,
            alpha: 2.0,
            wavelength_m: 0.087,
            spacing_m: None,
        }
    }
}

impl CostsDoc {
    pub fn integers(cp0: i64, ca0: i64, cp: i64, ca: i64) -> Self {
        CostsDoc {
            cp0: Cost::from_integer(cp0),
            ca0: Cost::from_integer(ca0),
            cp: Cost::from_integer(cp),
            ca: Cost::from_integer(ca),
        }
    }
}
