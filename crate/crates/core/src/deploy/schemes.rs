//! Deployment schemes: the joint search and the three restricted
//! benchmarks, looked up by name.

use super::SearchConfig;
use crate::cost::{total_cost, Cost};
use crate::error::{Error, Result};
use crate::plan::Locations;
use crate::scenario::Scenario;
use crate::tiles::{EqualTiles, Exhaustive, Refine, TileOptimizer};

pub const SCHEME_NAMES: &[&str] = &["joint", "bench1", "bench2", "bench3"];

/// A restriction of the location/tile search space together with the tile
/// strategy used inside it.
pub trait DeploymentScheme: Send + Sync {
    fn name(&self) -> &'static str;

    fn allows_active(&self) -> bool;

    /// Cheapest cost any plan on these locations can have under the scheme.
    fn lower_bound(&self, scenario: &Scenario, locations: &Locations) -> Cost;

    fn tile_optimizer(&self) -> &dyn TileOptimizer;

    /// Exact tile strategy for the full-enumeration oracle.
    fn oracle_tile_optimizer(&self) -> &dyn TileOptimizer;
}

/// Passive and active surfaces with optimized tiles.
struct Joint {
    refine: Refine,
}

/// Passive surfaces only, optimized tiles.
struct AllPassive {
    refine: Refine,
}

/// Fixed tile counts at every deployed surface.
struct Equal {
    name: &'static str,
    allows_active: bool,
    tiles: EqualTiles,
}

fn min_bound(scenario: &Scenario, loc: &Locations) -> Cost {
    scenario.costs.min_cost(loc.passive.len(), loc.active.len())
}

impl DeploymentScheme for Joint {
    fn name(&self) -> &'static str {
        "joint"
    }

    fn allows_active(&self) -> bool {
        true
    }

    fn lower_bound(&self, scenario: &Scenario, loc: &Locations) -> Cost {
        min_bound(scenario, loc)
    }

    fn tile_optimizer(&self) -> &dyn TileOptimizer {
        &self.refine
    }

    fn oracle_tile_optimizer(&self) -> &dyn TileOptimizer {
        &Exhaustive
    }
}

impl DeploymentScheme for AllPassive {
    fn name(&self) -> &'static str {
        "bench1"
    }

    fn allows_active(&self) -> bool {
        false
    }

    fn lower_bound(&self, scenario: &Scenario, loc: &Locations) -> Cost {
        min_bound(scenario, loc)
    }

    fn tile_optimizer(&self) -> &dyn TileOptimizer {
        &self.refine
    }

    fn oracle_tile_optimizer(&self) -> &dyn TileOptimizer {
        &Exhaustive
    }
}

impl DeploymentScheme for Equal {
    fn name(&self) -> &'static str {
        self.name
    }

    fn allows_active(&self) -> bool {
        self.allows_active
    }

    fn lower_bound(&self, scenario: &Scenario, loc: &Locations) -> Cost {
        total_cost(&loc.with_tiles(self.tiles.passive, self.tiles.active), &scenario.costs).total
    }

    fn tile_optimizer(&self) -> &dyn TileOptimizer {
        &self.tiles
    }

    fn oracle_tile_optimizer(&self) -> &dyn TileOptimizer {
        &self.tiles
    }
}

/// Look up a scheme by name, configured from `config`.
pub fn build_scheme(name: &str, config: &SearchConfig, scenario: &Scenario) -> Result<Box<dyn DeploymentScheme>> {
    let refine = Refine { options: config.solver };
    let check = |t: u32| {
        if t == 0 || t > scenario.max_tiles {
            Err(Error::Argument(format!(
                "equal tile count {t} outside 1..={}",
                scenario.max_tiles
            )))
        } else {
            Ok(t)
        }
    };
    Ok(match name {
        "joint" => Box::new(Joint { refine }),
        "bench1" => Box::new(AllPassive { refine }),
        "bench2" => Box::new(Equal {
            name: "bench2",
            allows_active: false,
            tiles: EqualTiles { passive: check(config.equal_tiles_passive)?, active: 1 },
        }),
        "bench3" => Box::new(Equal {
            name: "bench3",
            allows_active: true,
            tiles: EqualTiles {
                passive: check(config.equal_tiles_passive)?,
                active: check(config.equal_tiles_active)?,
            },
        }),
        other => {
            return Err(Error::Argument(format!(
                "unknown scheme {other:?}; expected one of {}",
                SCHEME_NAMES.join(", ")
            )))
        }
    })
}
