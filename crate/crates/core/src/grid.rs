//! Sample grids for wavenumber sweeps.

use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

/// `n` points from `min` to `max` inclusive, evenly spaced in `k` or `ln k`.
pub fn k_grid(min: f64, max: f64, n: usize, scale: Scale) -> Result<Vec<f64>> {
    if !(min.is_finite() && min > 0.0) {
        return Err(invalid_arg(format!("kmin must be finite and > 0, got {min}")));
    }
    if !(max.is_finite() && max > min) {
        return Err(invalid_arg(format!("kmax must be finite and > kmin, got {max}")));
    }
    if n < 2 {
        return Err(invalid_arg(format!("need at least 2 grid points, got {n}")));
    }
    let last = (n - 1) as f64;
    let points = match scale {
        Scale::Linear => (0..n).map(|i| min + (max - min) * i as f64 / last).collect(),
        Scale::Log => {
            let (a, b) = (min.ln(), max.ln());
            (0..n).map(|i| (a + (b - a) * i as f64 / last).exp()).collect::<Vec<_>>()
        }
    };
    let mut points: Vec<f64> = points;
    points[0] = min;
    points[n - 1] = max;
    Ok(points)
}

/// `n` evenly spaced values from `min` to `max`; `n = 1` yields `[min]`.
pub fn linspace(min: f64, max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![min],
        _ => (0..n).map(|i| min + (max - min) * i as f64 / (n - 1) as f64).collect(),
    }
}
