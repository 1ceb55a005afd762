//! Deployment plans: which candidate cells host a passive or an active
//! surface, and how many tiles each surface carries.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::Scenario;

pub type CellId = usize;

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
pub struct DeploymentPlan {
    pub passive: BTreeMap<CellId, u32>,
    pub active: BTreeMap<CellId, u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Passive,
    Active,
}

/// Deployed cells without tile counts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Locations {
    pub passive: BTreeSet<CellId>,
    pub active: BTreeSet<CellId>,
}

impl Locations {
    pub fn new(
        passive: impl IntoIterator<Item = CellId>,
        active: impl IntoIterator<Item = CellId>,
    ) -> Self {
        Locations {
            passive: passive.into_iter().collect(),
            active: active.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.passive.len() + self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Deployed cells in ascending id order.
    pub fn cells(&self) -> Vec<CellId> {
        self.passive.union(&self.active).copied().collect()
    }

    pub fn role(&self, cell: CellId) -> Option<Role> {
        if self.passive.contains(&cell) {
            Some(Role::Passive)
        } else if self.active.contains(&cell) {
            Some(Role::Active)
        } else {
            None
        }
    }

    pub fn with_uniform_tiles(&self, tiles: u32) -> DeploymentPlan {
        self.with_tiles(tiles, tiles)
    }

    pub fn with_tiles(&self, passive_tiles: u32, active_tiles: u32) -> DeploymentPlan {
        DeploymentPlan {
            passive: self.passive.iter().map(|&c| (c, passive_tiles)).collect(),
            active: self.active.iter().map(|&c| (c, active_tiles)).collect(),
        }
    }

    pub fn validate(&self, scenario: &Scenario) -> Result<()> {
        if let Some(c) = self.passive.intersection(&self.active).next() {
            return Err(Error::Plan(format!("cell {c} is both passive and active")));
        }
        for c in self.passive.iter().chain(&self.active) {
            if !scenario.is_candidate(*c) {
                return Err(Error::Plan(format!("cell {c} is not a candidate location")));
            }
        }
        Ok(())
    }
}

impl DeploymentPlan {
    pub fn locations(&self) -> Locations {
        Locations {
            passive: self.passive.keys().copied().collect(),
            active: self.active.keys().copied().collect(),
        }
    }

    pub fn tiles(&self, cell: CellId) -> Option<u32> {
        self.passive.get(&cell).or_else(|| self.active.get(&cell)).copied()
    }

    pub fn role(&self, cell: CellId) -> Option<Role> {
        if self.passive.contains_key(&cell) {
            Some(Role::Passive)
        } else if self.active.contains_key(&cell) {
            Some(Role::Active)
        } else {
            None
        }
    }

    pub fn passive_tiles(&self) -> u64 {
        self.passive.values().map(|&t| t as u64).sum()
    }

    pub fn active_tiles(&self) -> u64 {
        self.active.values().map(|&t| t as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.passive.is_empty() && self.active.is_empty()
    }

    pub fn set_tiles(&mut self, cell: CellId, tiles: u32) {
        if let Some(t) = self.passive.get_mut(&cell) {
            *t = tiles;
        } else if let Some(t) = self.active.get_mut(&cell) {
            *t = tiles;
        }
    }

    pub fn validate(&self, scenario: &Scenario) -> Result<()> {
        self.locations().validate(scenario)?;
        for (c, &t) in self.passive.iter().chain(&self.active) {
            if t == 0 || t > scenario.max_tiles {
                return Err(Error::Plan(format!(
                    "cell {c}: tile count {t} outside 1..={}",
                    scenario.max_tiles
                )));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: PlanDocument =
            serde_json::from_str(text).map_err(|e| Error::Plan(format!("malformed plan file: {e}")))?;
        let parse = |m: BTreeMap<String, u32>, what: &str| -> Result<BTreeMap<CellId, u32>> {
            m.into_iter()
                .map(|(k, v)| {
                    k.trim()
                        .parse::<CellId>()
                        .map(|c| (c, v))
                        .map_err(|_| Error::Plan(format!("{what}: cell key {k:?} is not an integer")))
                })
                .collect()
        };
        Ok(DeploymentPlan {
            passive: parse(doc.passive, "passive")?,
            active: parse(doc.active, "active")?,
        })
    }

    pub fn to_json(&self) -> String {
        let doc = PlanDocument {
            passive: self.passive.iter().map(|(c, t)| (c.to_string(), *t)).collect(),
            active: self.active.iter().map(|(c, t)| (c.to_string(), *t)).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("plan serialization is infallible")
    }
}

/// On-disk plan: `{"passive": {"2": 3}, "active": {"3": 2}}`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanDocument {
    #[serde(default)]
    passive: BTreeMap<String, u32>,
    #[serde(default)]
    active: BTreeMap<String, u32>,
}

/// Dense per-node view of a plan with real-valued tile counts, as used by
/// the closed-form SNR evaluators and the relaxation.
#[derive(Debug, Clone)]
pub struct PlanView {
    role: Vec<Option<Role>>,
    tiles: Vec<f64>,
}

impl PlanView {
    pub fn from_plan(plan: &DeploymentPlan, num_cells: usize) -> Self {
        let mut view = PlanView {
            role: vec![None; num_cells],
            tiles: vec![0.0; num_cells],
        };
        for (&c, &t) in &plan.passive {
            view.role[c] = Some(Role::Passive);
            view.tiles[c] = t as f64;
        }
        for (&c, &t) in &plan.active {
            view.role[c] = Some(Role::Active);
            view.tiles[c] = t as f64;
        }
        view
    }

    pub fn from_locations(locations: &Locations, num_cells: usize, tiles: f64) -> Self {
        let mut view = PlanView {
            role: vec![None; num_cells],
            tiles: vec![0.0; num_cells],
        };
        for &c in &locations.passive {
            view.role[c] = Some(Role::Passive);
            view.tiles[c] = tiles;
        }
        for &c in &locations.active {
            view.role[c] = Some(Role::Active);
            view.tiles[c] = tiles;
        }
        view
    }

    pub fn role(&self, cell: CellId) -> Option<Role> {
        self.role.get(cell).copied().flatten()
    }

    pub fn tiles(&self, cell: CellId) -> f64 {
        self.tiles[cell]
    }

    pub fn active_cells(&self) -> Vec<CellId> {
        (0..self.role.len())
            .filter(|&c| self.role[c] == Some(Role::Active))
            .collect()
    }
}
