//! Bundled scenarios.

use super::{load_scenario, Scenario};

/// 40 m x 40 m indoor floor split into a 4x4 grid of 10 m cells. The BS sits
/// near the centre in cell 5 and covers the four central cells directly; ten
/// candidate locations (cells 1-4, 7, 8, 11, 12, 14, 15) line the walls.
pub const OFFICE_FLOOR_JSON: &str = include_str!("../../data/office_floor.json");

pub fn office_floor() -> Scenario {
    load_scenario(OFFICE_FLOOR_JSON).expect("bundled scenario is valid")
}
