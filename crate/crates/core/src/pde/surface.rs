//! Discrete value functions and their exports.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::grid::Grid1D;

/// `v(t, x, i)` on a grid. Stationary solves carry a single slice at `t = 0`.
///
/// Layout: `values[slice][regime][node]`, slices ordered by increasing time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueSurface {
    pub grid: Grid1D,
    pub stationary: bool,
    pub times: Vec<f64>,
    pub values: Vec<Vec<Vec<f64>>>,
    /// True where the regime's value equals its switching obstacle.
    pub switch_mask: Vec<Vec<Vec<bool>>>,
    /// Regime attaining the obstacle maximum (lowest index on ties).
    pub switch_target: Vec<Vec<Vec<usize>>>,
    pub picard_iterations: usize,
    pub residual: f64,
    /// Time-zero slice of every Picard iterate, when requested.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub iterates: Vec<Vec<Vec<f64>>>,
}

impl ValueSurface {
    pub fn regime_count(&self) -> usize {
        self.values[0].len()
    }

    /// Values at `t = 0`, per regime.
    pub fn initial(&self) -> &[Vec<f64>] {
        &self.values[0]
    }

    pub fn slice_count(&self) -> usize {
        self.values.len()
    }

    /// Slice whose time is nearest to `t` (clamped).
    pub fn slice_at(&self, t: f64) -> usize {
        if self.times.len() <= 1 {
            return 0;
        }
        let dt = self.times[1] - self.times[0];
        let s = (t - self.times[0]) / dt;
        (s.round().max(0.0) as usize).min(self.times.len() - 1)
    }

    /// Interpolated value at `(t, x)` in regime `i`.
    pub fn value_at(&self, t: f64, x: f64, i: usize) -> f64 {
        let s = self.slice_at(t);
        self.grid.interpolate(&self.values[s][i], x)
    }

    /// Writes `t,x,regime,value,binding` rows, regimes numbered from 1.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,x,regime,value,binding")?;
        let xs = self.grid.points();
        for (s, t) in self.times.iter().enumerate() {
            for i in 0..self.regime_count() {
                for (k, x) in xs.iter().enumerate() {
                    writeln!(w, "{t},{x},{},{},{}", i + 1, self.values[s][i][k], u8::from(self.switch_mask[s][i][k]))?;
                }
            }
        }
        Ok(())
    }
}
