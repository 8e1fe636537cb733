//! Switching regions read off a solved surface.

use serde::{Deserialize, Serialize};

use super::surface::ValueSurface;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Switch when the state is at or below the level.
    Below,
    /// Switch when the state is at or above the level.
    Above,
}

/// A maximal run of binding nodes sharing one target regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchRegion {
    pub k_lo: usize,
    pub k_hi: usize,
    pub x_lo: f64,
    pub x_hi: f64,
    pub target: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub direction: Direction,
    pub level: f64,
    pub target: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeRegions {
    pub regime: usize,
    pub regions: Vec<SwitchRegion>,
    /// Present when the single region touches exactly one end of the grid;
    /// the level is the midpoint between the last non-binding and the first
    /// binding node.
    pub threshold: Option<Threshold>,
    /// The whole grid is binding.
    pub always: bool,
}

impl RegimeRegions {
    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }
}

/// Regions of the time-zero slice.
pub fn extract_switching_regions(surface: &ValueSurface) -> Vec<RegimeRegions> {
    extract_slice(surface, 0)
}

pub fn extract_slice(surface: &ValueSurface, slice: usize) -> Vec<RegimeRegions> {
    let grid = &surface.grid;
    let nx = grid.nx;
    (0..surface.regime_count())
        .map(|i| {
            let mask = &surface.switch_mask[slice][i];
            let target = &surface.switch_target[slice][i];
            let mut regions: Vec<SwitchRegion> = Vec::new();
            let mut k = 0;
            while k < nx {
                if !mask[k] {
                    k += 1;
                    continue;
                }
                let start = k;
                let tgt = target[k];
                while k + 1 < nx && mask[k + 1] && target[k + 1] == tgt {
                    k += 1;
                }
                regions.push(SwitchRegion {
                    k_lo: start,
                    k_hi: k,
                    x_lo: grid.point(start),
                    x_hi: grid.point(k),
                    target: tgt,
                });
                k += 1;
            }
            let always = regions.len() == 1 && regions[0].k_lo == 0 && regions[0].k_hi == nx - 1;
            let threshold = match regions.as_slice() {
                [r] if r.k_lo == 0 && r.k_hi < nx - 1 => Some(Threshold {
                    direction: Direction::Below,
                    level: grid.midpoint(r.k_hi, r.k_hi + 1),
                    target: r.target,
                }),
                [r] if r.k_lo > 0 && r.k_hi == nx - 1 => Some(Threshold {
                    direction: Direction::Above,
                    level: grid.midpoint(r.k_lo - 1, r.k_lo),
                    target: r.target,
                }),
                _ => None,
            };
            RegimeRegions { regime: i, regions, threshold, always }
        })
        .collect()
}
