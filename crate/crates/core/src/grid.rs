//! Sampling grids for sweeps and time series.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

/// `points` samples from `min` to `max`, both included.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub scale: Scale,
}

impl GridSpec {
    pub fn linear(min: f64, max: f64, points: usize) -> Self {
        Self { min, max, points, scale: Scale::Linear }
    }

    pub fn log(min: f64, max: f64, points: usize) -> Self {
        Self { min, max, points, scale: Scale::Log }
    }

    /// Geometric τ grid from `10⁻²` to `20/Γ` for a slowest rate `Γ`.
    pub fn default_tau(slow_rate: f64, points: usize) -> Self {
        Self::log(1e-2, 20.0 / slow_rate, points)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(Error::InvalidParams(format!("a grid needs at least 2 points, got {}", self.points)));
        }
        if !(self.min.is_finite() && self.max.is_finite()) || self.min > self.max {
            return Err(Error::InvalidParams(format!("grid bounds [{}, {}] are invalid", self.min, self.max)));
        }
        if self.scale == Scale::Log && !(self.min > 0.0) {
            return Err(Error::InvalidParams("log grids need a positive lower bound".into()));
        }
        Ok(())
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let n = self.points - 1;
        let v = match self.scale {
            Scale::Linear => {
                // Symmetric formula so that ±r grids are exactly antisymmetric.
                let (c, h) = ((self.max + self.min) / 2.0, (self.max - self.min) / 2.0);
                (0..=n).map(|i| c + h * (2.0 * i as f64 - n as f64) / n as f64).collect()
            }
            Scale::Log => {
                let (a, b) = (self.min.ln(), self.max.ln());
                (0..=n).map(|i| (a + (b - a) * i as f64 / n as f64).exp()).collect::<Vec<_>>()
            }
        };
        let mut v: Vec<f64> = v;
        v[0] = self.min;
        v[n] = self.max;
        Ok(v)
    }

    /// Spacing of a linear grid.
    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.points.max(2) - 1) as f64
    }
}
