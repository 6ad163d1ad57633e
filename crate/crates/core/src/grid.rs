//! Versioned grid of pump parameters and interaction times used by the
//! oracle-agreement suites.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::MAX_KT;
use crate::error::{HopsError, Result};
use crate::moments::HopsInput;

pub const GRID_VERSION: u32 = 1;
const PINNED_GRID: &str = include_str!("../fixtures/grid_v1.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub version: u32,
    pub kt: Vec<f64>,
    pub points: Vec<HopsInput>,
}

impl Grid {
    /// The 12-point grid shipped with the crate.
    pub fn pinned() -> Self {
        Self::from_json(PINNED_GRID).expect("embedded grid fixture is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let grid: Grid = serde_json::from_str(text).map_err(|e| HopsError::Fixture(e.to_string()))?;
        grid.validate()?;
        Ok(grid)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HopsError::Fixture(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn validate(&self) -> Result<()> {
        if self.version != GRID_VERSION {
            return Err(HopsError::Fixture(format!("unsupported grid version {}", self.version)));
        }
        if self.points.is_empty() || self.kt.is_empty() {
            return Err(HopsError::Fixture("grid needs at least one point and one kt value".into()));
        }
        if let Some(kt) = self.kt.iter().find(|kt| !(kt.is_finite() && **kt >= 0.0 && **kt <= MAX_KT)) {
            return Err(HopsError::Fixture(format!("kt value {kt} outside [0, {MAX_KT}]")));
        }
        for p in &self.points {
            p.validate().map_err(|e| HopsError::Fixture(e.to_string()))?;
        }
        Ok(())
    }

    /// Every `(point, kt)` pair, points outermost.
    pub fn cases(&self) -> impl Iterator<Item = (HopsInput, f64)> + '_ {
        self.points.iter().flat_map(move |p| self.kt.iter().map(move |kt| (*p, *kt)))
    }
}
