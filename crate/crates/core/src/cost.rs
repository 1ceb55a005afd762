//! Deployment cost arithmetic.
//!
//! Costs are exact rationals so integer-valued cost models (the common case)
//! compare without rounding noise during enumeration.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Mul};

use num_rational::Rational64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::plan::DeploymentPlan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Cost(Rational64);

impl Cost {
    pub const ZERO: Cost = Cost(Rational64::new_raw(0, 1));

    pub fn from_integer(v: i64) -> Self {
        Cost(Rational64::from_integer(v))
    }

    /// Exact for integers and short decimal fractions.
    pub fn from_f64(v: f64) -> Option<Self> {
        if !v.is_finite() {
            return None;
        }
        if v.fract() == 0.0 && v.abs() < 1e15 {
            return Some(Cost::from_integer(v as i64));
        }
        // Decimal inputs like 2.5 or 0.125 are recovered exactly through a
        // power-of-ten denominator before falling back to a best approximation.
        for digits in 1..=9u32 {
            let scale = 10i64.pow(digits);
            let scaled = v * scale as f64;
            if (scaled - scaled.round()).abs() < 1e-9 * scaled.abs().max(1.0) {
                return Some(Cost(Rational64::new(scaled.round() as i64, scale)));
            }
        }
        Rational64::approximate_float(v).map(Cost)
    }

    pub fn as_f64(self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }

    pub fn is_integer(self) -> bool {
        self.0.is_integer()
    }
}

impl Add for Cost {
    type Output = Cost;
    fn add(self, rhs: Cost) -> Cost {
        Cost(self.0 + rhs.0)
    }
}

impl Mul<u64> for Cost {
    type Output = Cost;
    fn mul(self, rhs: u64) -> Cost {
        Cost(self.0 * Rational64::from_integer(rhs as i64))
    }
}

impl Sum for Cost {
    fn sum<I: Iterator<Item = Cost>>(iter: I) -> Cost {
        iter.fold(Cost::ZERO, Add::add)
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}", self.as_f64())
        }
    }
}

impl Serialize for Cost {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_integer() {
            s.serialize_i64(*self.0.numer())
        } else {
            s.serialize_f64(self.as_f64())
        }
    }
}

impl<'de> Deserialize<'de> for Cost {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        Cost::from_f64(v).ok_or_else(|| serde::de::Error::custom("cost must be finite"))
    }
}

/// Per-surface cell-use and per-tile hardware prices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub cell_use_passive: Cost,
    pub cell_use_active: Cost,
    pub per_tile_passive: Cost,
    pub per_tile_active: Cost,
}

impl CostModel {
    pub fn new(cp0: i64, ca0: i64, cp: i64, ca: i64) -> Self {
        CostModel {
            cell_use_passive: Cost::from_integer(cp0),
            cell_use_active: Cost::from_integer(ca0),
            per_tile_passive: Cost::from_integer(cp),
            per_tile_active: Cost::from_integer(ca),
        }
    }

    /// Active surfaces are normally pricier on both axes; anything else is
    /// allowed but worth flagging.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.per_tile_active <= self.per_tile_passive {
            out.push("active tile cost does not exceed passive tile cost".to_string());
        }
        if self.cell_use_active <= self.cell_use_passive {
            out.push("active cell-use cost does not exceed passive cell-use cost".to_string());
        }
        out
    }

    pub fn cell_use(&self, num_passive: usize, num_active: usize) -> Cost {
        self.cell_use_passive * num_passive as u64 + self.cell_use_active * num_active as u64
    }

    pub fn hardware(&self, passive_tiles: u64, active_tiles: u64) -> Cost {
        self.per_tile_passive * passive_tiles + self.per_tile_active * active_tiles
    }

    /// Cheapest possible cost of a location pair: every surface at one tile.
    pub fn min_cost(&self, num_passive: usize, num_active: usize) -> Cost {
        self.cell_use(num_passive, num_active)
            + self.hardware(num_passive as u64, num_active as u64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CostBreakdown {
    pub cell_use: Cost,
    pub hardware: Cost,
    pub total: Cost,
}

pub fn total_cost(plan: &DeploymentPlan, costs: &CostModel) -> CostBreakdown {
    let cell_use = costs.cell_use(plan.passive.len(), plan.active.len());
    let hardware = costs.hardware(plan.passive_tiles(), plan.active_tiles());
    CostBreakdown {
        cell_use,
        hardware,
        total: cell_use + hardware,
    }
}
