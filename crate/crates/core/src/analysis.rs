//! Derived studies: constant-area barrier heights, large-`k` reflection
//! scaling and saturation of the transmission profile with stage.

use std::ops::RangeInclusive;

use serde::Serialize;

use crate::error::{invalid_arg, Result};
use crate::geometry::UcpSpec;
use crate::grid::{k_grid, Scale};
use crate::scattering::{bloch_sequence, transmission_ucp};

/// Largest `V_G / k^2` for which the large-`k` reflection asymptote is used.
pub const LARGE_K_GUARD: f64 = 0.1;

/// Samples with `R` below this multiple of the local median are resonance dips.
pub const DIP_FACTOR: f64 = 1e-3;

/// Half-width (in samples) of the running-median window used for dip detection.
pub const MEDIAN_HALF_WINDOW: usize = 7;

pub const MIN_FIT_POINTS: usize = 10;

pub const MIN_SCAN_POINTS: usize = 50;

/// Barrier height keeping the total barrier area at `L * V0`:
/// `V_G = L V0 / (2^G l_G)`.
pub fn constant_area_height(spec: &UcpSpec, v0: f64) -> Result<f64> {
    if !(v0.is_finite() && v0 > 0.0) {
        return Err(invalid_arg(format!("V0 must be finite and > 0, got {v0}")));
    }
    let unit = spec.stage_lengths().unit_width();
    let barriers = 2f64.powi(spec.stage() as i32);
    Ok(spec.length() * v0 / (barriers * unit))
}

/// `spec` re-targeted to the constant-area height for `v0`.
pub fn constant_area_spec(spec: &UcpSpec, v0: f64) -> Result<UcpSpec> {
    spec.with_height(constant_area_height(spec, v0)?)
}

/// Exact reflection probability at the constant-area height.
pub fn constant_area_reflection(spec: &UcpSpec, v0: f64, k: f64) -> Result<f64> {
    Ok(transmission_ucp(&constant_area_spec(spec, v0)?, k)?.reflection)
}

/// Large-`k` approximation `R ~ 4^G (V_G l_G / 2)^2 k^-2 prod Omega_i^2`,
/// with the Bloch phases evaluated at height `V_G`.
///
/// Only `V_G / k^2 < 0.1` is enforced. The first-order expansion of
/// `|m12|` also assumes `kappa l_G` is small.
pub fn reflection_asymptote(spec: &UcpSpec, v0: f64, k: f64) -> Result<f64> {
    let scaled = constant_area_spec(spec, v0)?;
    let height = scaled.height();
    if !(k.is_finite() && k > 0.0) || height / (k * k) >= LARGE_K_GUARD {
        return Err(invalid_arg(format!(
            "large-k guard violated: V_G/k^2 = {} must be < {LARGE_K_GUARD}",
            height / (k * k)
        )));
    }
    let unit = scaled.stage_lengths().unit_width();
    let bloch = bloch_sequence(&scaled, k)?;
    let amplitude = bloch
        .omegas()
        .iter()
        .fold(0.5 * height * unit / k, |acc, w| acc * 2.0 * w);
    Ok(amplitude * amplitude)
}

/// Least-squares power law `log10 R = slope * log10 k + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingFit {
    pub k_window: (f64, f64),
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_points: usize,
    pub n_used: usize,
}

/// Fits a line to `(log10 k, log10 r)`; every `r` must be positive.
pub fn fit_power_law(ks: &[f64], rs: &[f64]) -> Result<ScalingFit> {
    if ks.len() != rs.len() {
        return Err(invalid_arg("k and R samples differ in length"));
    }
    if ks.len() < MIN_FIT_POINTS {
        return Err(invalid_arg(format!(
            "only {} points to fit, need at least {MIN_FIT_POINTS}",
            ks.len()
        )));
    }
    if ks.iter().chain(rs).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(invalid_arg("power-law fit needs finite positive samples"));
    }
    let xs: Vec<f64> = ks.iter().map(|k| k.log10()).collect();
    let ys: Vec<f64> = rs.iter().map(|r| r.log10()).collect();
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        let (dx, dy) = (x - mean_x, y - mean_y);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(invalid_arg("all k samples coincide"));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    let (lo, hi) = ks.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &k| (lo.min(k), hi.max(k)));
    Ok(ScalingFit {
        k_window: (lo, hi),
        slope,
        intercept,
        r_squared,
        n_points: ks.len(),
        n_used: ks.len(),
    })
}

/// Marks samples that sit in resonance dips: non-positive values, or values
/// below `DIP_FACTOR` times the running median of their neighbourhood.
pub fn resonance_mask(rs: &[f64]) -> Vec<bool> {
    let n = rs.len();
    (0..n)
        .map(|i| {
            let r = rs[i];
            if !(r.is_finite() && r > 0.0) {
                return true;
            }
            let lo = i.saturating_sub(MEDIAN_HALF_WINDOW);
            let hi = (i + MEDIAN_HALF_WINDOW + 1).min(n);
            let mut window: Vec<f64> = rs[lo..hi].to_vec();
            window.sort_by(f64::total_cmp);
            let median = window[window.len() / 2];
            r < DIP_FACTOR * median
        })
        .collect()
}

/// Log-log slope of the exact reflection at constant-area height over
/// `n_points` log-spaced wavenumbers, after dropping resonance dips.
pub fn fit_scaling(spec: &UcpSpec, v0: f64, k_window: (f64, f64), n_points: usize) -> Result<ScalingFit> {
    if n_points < MIN_SCAN_POINTS {
        return Err(invalid_arg(format!("need at least {MIN_SCAN_POINTS} points, got {n_points}")));
    }
    let scaled = constant_area_spec(spec, v0)?;
    let (k_min, k_max) = k_window;
    if !(k_min.is_finite() && k_min > 0.0) || scaled.height() / (k_min * k_min) >= LARGE_K_GUARD {
        return Err(invalid_arg(format!(
            "k window must start in the large-k regime (V_G/kmin^2 < {LARGE_K_GUARD}); V_G = {}",
            scaled.height()
        )));
    }
    let ks = k_grid(k_min, k_max, n_points, Scale::Log)?;
    let rs = ks
        .iter()
        .map(|&k| transmission_ucp(&scaled, k).map(|r| r.reflection))
        .collect::<Result<Vec<_>>>()?;
    let mask = resonance_mask(&rs);
    let (kept_k, kept_r): (Vec<f64>, Vec<f64>) = ks
        .iter()
        .zip(&rs)
        .zip(&mask)
        .filter(|(_, &dip)| !dip)
        .map(|((&k, &r), _)| (k, r))
        .unzip();
    if kept_k.len() < MIN_FIT_POINTS {
        return Err(invalid_arg(format!(
            "only {} of {n_points} samples survive resonance filtering",
            kept_k.len()
        )));
    }
    let mut fit = fit_power_law(&kept_k, &kept_r)?;
    fit.k_window = k_window;
    fit.n_points = n_points;
    Ok(fit)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StagePairMetric {
    pub stage: u32,
    pub next_stage: u32,
    /// `max_k |log10 T_G(k) - log10 T_{G+1}(k)|`.
    pub metric: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaturationReport {
    pub length: f64,
    pub height: f64,
    pub rho: f64,
    pub alpha: f64,
    pub beta: f64,
    pub k_min: f64,
    pub k_max: f64,
    pub n_k: usize,
    pub pairs: Vec<StagePairMetric>,
}

impl SaturationReport {
    pub fn metrics(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.metric).collect()
    }

    pub fn metric_for(&self, stage: u32) -> Option<f64> {
        self.pairs.iter().find(|p| p.stage == stage).map(|p| p.metric)
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        self.pairs.windows(2).all(|w| w[1].metric < w[0].metric)
    }
}

/// Sup-norm distance between `log10 T` profiles of consecutive stages.
///
/// `specs` must share every parameter but the stage, and their stages must
/// be consecutive and increasing.
pub fn saturation_scan(specs: &[UcpSpec], k_grid: &[f64]) -> Result<SaturationReport> {
    let first = specs.first().ok_or_else(|| invalid_arg("saturation scan needs at least two stages"))?;
    if specs.len() < 2 {
        return Err(invalid_arg("saturation scan needs at least two stages"));
    }
    if k_grid.is_empty() {
        return Err(invalid_arg("saturation scan needs a non-empty k grid"));
    }
    for pair in specs.windows(2) {
        if !pair[0].same_family(&pair[1]) {
            return Err(invalid_arg("saturation scan specs must share L, V, rho, alpha and beta"));
        }
        if pair[1].stage() != pair[0].stage() + 1 {
            return Err(invalid_arg("saturation scan stages must be consecutive and increasing"));
        }
    }
    let profiles = specs
        .iter()
        .map(|spec| {
            k_grid
                .iter()
                .map(|&k| transmission_ucp(spec, k).map(|r| r.log10_transmission))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let pairs = specs
        .windows(2)
        .zip(profiles.windows(2))
        .map(|(s, p)| StagePairMetric {
            stage: s[0].stage(),
            next_stage: s[1].stage(),
            metric: p[0]
                .iter()
                .zip(&p[1])
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        })
        .collect();
    let (k_min, k_max) = k_grid
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &k| (lo.min(k), hi.max(k)));
    Ok(SaturationReport {
        length: first.length(),
        height: first.height(),
        rho: first.rho(),
        alpha: first.alpha(),
        beta: first.beta(),
        k_min,
        k_max,
        n_k: k_grid.len(),
        pairs,
    })
}

/// [`saturation_scan`] over `stages` of the family of `base`.
pub fn saturation_scan_stages(base: &UcpSpec, stages: RangeInclusive<u32>, k_grid: &[f64]) -> Result<SaturationReport> {
    let specs = stages.map(|g| base.with_stage(g)).collect::<Result<Vec<_>>>()?;
    saturation_scan(&specs, k_grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn constant_area_examples() {
        let bare = UcpSpec::new(2.0, 1.0, 3.0, 1.0, 0.0, 0).unwrap();
        assert_eq!(constant_area_height(&bare, 7.0).unwrap(), 7.0);
        for g in 0..8 {
            let cantor = UcpSpec::general_cantor(1.0, 1.0, 3.0, g).unwrap();
            assert_relative_eq!(
                constant_area_height(&cantor, 10.0).unwrap(),
                10.0 * 1.5f64.powi(g as i32),
                max_relative = 1e-13
            );
        }
        let svc = UcpSpec::smith_volterra_cantor(1.0, 1.0, 4.0, 2).unwrap();
        assert_relative_eq!(constant_area_height(&svc, 10.0).unwrap(), 2560.0 / 180.0, max_relative = 1e-14);
        assert!(constant_area_height(&svc, 0.0).is_err());
    }

    #[test]
    fn asymptote_single_barrier() {
        let bare = UcpSpec::new(1.0, 1.0, 3.0, 1.0, 0.0, 0).unwrap();
        let k = 40.0;
        assert_relative_eq!(reflection_asymptote(&bare, 10.0, k).unwrap(), 25.0 / (k * k), max_relative = 1e-14);
        assert!(reflection_asymptote(&bare, 10.0, 5.0).is_err());
    }

    #[test]
    fn power_law_self_test() {
        let ks: Vec<f64> = (0..60).map(|i| 10f64.powf(1.0 + i as f64 / 59.0)).collect();
        let rs: Vec<f64> = ks.iter().map(|k| 3.7 / (k * k)).collect();
        let fit = fit_power_law(&ks, &rs).unwrap();
        assert!((fit.slope + 2.0).abs() <= 1e-12);
        assert!((fit.intercept - 3.7f64.log10()).abs() <= 1e-12);
        assert!((fit.r_squared - 1.0).abs() <= 1e-12);
        assert!(fit_power_law(&ks[..5], &rs[..5]).is_err());
    }

    #[test]
    fn dips_are_masked() {
        let mut rs = vec![1.0; 40];
        rs[10] = 1e-6;
        rs[20] = 0.0;
        rs[30] = 0.5e-3;
        let mask = resonance_mask(&rs);
        assert!(mask[10] && mask[20]);
        assert!(mask[30]);
        assert_eq!(mask.iter().filter(|&&m| m).count(), 3);
    }

    #[test]
    fn fit_scaling_guards() {
        let spec = UcpSpec::new(1.0, 10.0, 2.5, 0.5, 1.0, 4).unwrap();
        assert!(fit_scaling(&spec, 10.0, (50.0, 500.0), 20).is_err());
        assert!(fit_scaling(&spec, 10.0, (5.0, 500.0), 100).is_err());
    }

    #[test]
    fn saturation_rejects_mixed_specs() {
        let a = UcpSpec::new(5.0, 25.0, 2.5, 0.5, 1.0, 3).unwrap();
        let b = UcpSpec::new(5.0, 25.0, 2.5, 0.5, 2.0, 4).unwrap();
        let ks = [1.0, 2.0];
        assert!(saturation_scan(&[a, b], &ks).is_err());
        assert!(saturation_scan(&[a, a.with_stage(5).unwrap()], &ks).is_err());
        assert!(saturation_scan(&[a], &ks).is_err());
        let report = saturation_scan(&[a, a.with_stage(4).unwrap()], &ks).unwrap();
        assert_eq!(report.pairs.len(), 1);
        assert!(report.pairs[0].metric >= 0.0);
    }

    #[test]
    fn bare_barrier_asymptote_is_inverse_square() {
        let bare = UcpSpec::new(1.0, 10.0, 2.5, 0.5, 1.0, 0).unwrap();
        let ks = k_grid(50.0, 500.0, 80, Scale::Log).unwrap();
        let rs: Vec<f64> = ks.iter().map(|&k| reflection_asymptote(&bare, 10.0, k).unwrap()).collect();
        assert_relative_eq!(rs[0], 25.0 / 2500.0, max_relative = 1e-12);
        let fit = fit_power_law(&ks, &rs).unwrap();
        assert!((fit.slope + 2.0).abs() < 1e-6);
        assert!(reflection_asymptote(&bare, 10.0, 5.0).is_err());
    }

    #[test]
    fn saturation_validates_inputs() {
        let ks = k_grid(0.5, 10.0, 50, Scale::Linear).unwrap();
        let a = UcpSpec::new(5.0, 25.0, 2.5, 0.5, 2.0, 3).unwrap();
        let b = UcpSpec::new(5.0, 25.0, 2.5, 0.5, 1.0, 4).unwrap();
        assert!(saturation_scan(&[a, b], &ks).is_err());
        assert!(saturation_scan(&[a, a.with_stage(5).unwrap()], &ks).is_err());
        assert!(saturation_scan(&[a], &ks).is_err());
        let report = saturation_scan_stages(&a, 3..=5, &ks).unwrap();
        assert_eq!(report.pairs.len(), 2);
        assert!(report.metrics().iter().all(|&m| m >= 0.0));
        let same = saturation_scan(&[a, a.with_stage(4).unwrap()], &ks).unwrap();
        assert_eq!(same.metric_for(3), report.metric_for(3));
    }

    proptest! {
        #[test]
        fn area_is_conserved(
            rho in 1.1f64..6.0,
            alpha in 0.05f64..2.0,
            beta in 0.0f64..2.0,
            stage in 0u32..=20,
            v0 in 0.1f64..100.0,
        ) {
            let spec = UcpSpec::new(2.0, 1.0, rho, alpha, beta, stage).unwrap();
            let height = constant_area_height(&spec, v0).unwrap();
            let unit = spec.segment_length(stage).unwrap();
            let area = 2f64.powi(stage as i32) * unit * height;
            prop_assert!((area / (2.0 * v0) - 1.0).abs() < 1e-12);
        }
    }
}
