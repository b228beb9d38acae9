//! Brute-force transmission by multiplying one transfer matrix per region.
//!
//! No super-periodic algebra is involved: the explicit barrier list from
//! [`UcpSpec::build_segments`] is turned into alternating barrier and gap
//! regions whose matrices are multiplied in order.

use num_complex::Complex64;

use crate::error::{invalid_arg, Result, UcpError};
use crate::geometry::{SegmentGeometry, UcpSpec};
use crate::scattering::{barrier_matrix, ScatterResult, TransferMatrix};

/// Default largest stage the oracle accepts (65536 barriers).
pub const DEFAULT_ORACLE_CAP: u32 = 16;

const DET_DRIFT_WARN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionKind {
    Barrier,
    Gap,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub kind: RegionKind,
    pub width: f64,
}

/// Left-to-right regions covering `[0, L]`; zero-width regions are dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionSequence {
    pub regions: Vec<Region>,
}

impl RegionSequence {
    pub fn from_geometry(geometry: &SegmentGeometry) -> Self {
        let mut regions = Vec::with_capacity(2 * geometry.barriers.len() + 1);
        let mut push = |kind, width: f64| {
            if width > 0.0 {
                regions.push(Region { kind, width });
            }
        };
        let mut cursor = 0.0;
        for b in &geometry.barriers {
            push(RegionKind::Gap, b.offset - cursor);
            push(RegionKind::Barrier, b.width);
            cursor = b.end();
        }
        push(RegionKind::Gap, geometry.span - cursor);
        RegionSequence { regions }
    }

    pub fn total_width(&self) -> f64 {
        self.regions.iter().map(|r| r.width).sum()
    }

    pub fn reversed(&self) -> Self {
        RegionSequence { regions: self.regions.iter().rev().copied().collect() }
    }

    /// Left-to-right product of region matrices for barriers of height `height`.
    pub fn matrix(&self, k: f64, height: f64) -> Result<TransferMatrix> {
        if !(k.is_finite() && k > 0.0) {
            return Err(invalid_arg(format!("wavenumber must be finite and > 0, got {k}")));
        }
        let mut total = TransferMatrix::identity();
        for region in &self.regions {
            let m = match region.kind {
                RegionKind::Gap => advance(k, region.width)?,
                RegionKind::Barrier => barrier_region_matrix(k, height, region.width)?,
            };
            total = total * m;
        }
        let drift = (total.det() - Complex64::new(1.0, 0.0)).norm();
        if drift > DET_DRIFT_WARN {
            log::warn!("oracle: |det - 1| = {drift:e} after {} regions at k = {k}", self.regions.len());
        }
        if !total.is_finite() {
            return Err(UcpError::NonFinite("oracle matrix product"));
        }
        Ok(total)
    }
}

/// Free propagation over distance `d`: `diag(e^{ikd}, e^{-ikd})`.
pub fn propagation_matrix(k: f64, d: f64) -> Result<TransferMatrix> {
    if !(d.is_finite() && d >= 0.0) {
        return Err(invalid_arg(format!("propagation distance must be >= 0, got {d}")));
    }
    let phase = Complex64::from_polar(1.0, k * d);
    Ok(TransferMatrix::diagonal(phase, phase.conj()))
}

/// The unit-cell matrix relates amplitudes in the opposite sense to
/// [`propagation_matrix`], so stepping forward over `d` uses its inverse,
/// `diag(e^{-ikd}, e^{ikd})`.
fn advance(k: f64, d: f64) -> Result<TransferMatrix> {
    let p = propagation_matrix(k, d)?;
    Ok(TransferMatrix::diagonal(p.m22, p.m11))
}

/// The centred unit cell moved into the frame of its left edge.
fn barrier_region_matrix(k: f64, height: f64, width: f64) -> Result<TransferMatrix> {
    let half = advance(k, 0.5 * width)?;
    Ok(half * barrier_matrix(k, height, width)? * half)
}

/// Full transfer matrix of `spec`, refusing stages above `cap`.
pub fn oracle_matrix(spec: &UcpSpec, k: f64, cap: u32) -> Result<TransferMatrix> {
    if spec.stage() > cap {
        return Err(UcpError::OracleInfeasible { stage: spec.stage(), cap });
    }
    RegionSequence::from_geometry(&spec.build_segments()).matrix(k, spec.height())
}

/// Oracle transmission with the default stage cap.
pub fn transmission_oracle(spec: &UcpSpec, k: f64) -> Result<ScatterResult> {
    transmission_oracle_with_cap(spec, k, DEFAULT_ORACLE_CAP)
}

pub fn transmission_oracle_with_cap(spec: &UcpSpec, k: f64, cap: u32) -> Result<ScatterResult> {
    let m = oracle_matrix(spec, k, cap)?;
    Ok(result_from_matrix(&m))
}

/// `T = 1/|m22|^2` with `log10 T` taken from `|m22|` directly.
pub fn result_from_matrix(m: &TransferMatrix) -> ScatterResult {
    let abs22 = m.m22.norm();
    ScatterResult {
        transmission: 1.0 / (abs22 * abs22),
        reflection: 1.0 - 1.0 / (abs22 * abs22),
        log10_transmission: -2.0 * abs22.log10(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Barrier;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn close(a: &TransferMatrix, b: &TransferMatrix, tol: f64) -> bool {
        (a.m11 - b.m11).norm() <= tol
            && (a.m12 - b.m12).norm() <= tol
            && (a.m21 - b.m21).norm() <= tol
            && (a.m22 - b.m22).norm() <= tol
    }

    #[test]
    fn propagation_examples() {
        assert_eq!(propagation_matrix(3.0, 0.0).unwrap(), TransferMatrix::identity());
        let half_turn = propagation_matrix(PI, 1.0).unwrap();
        assert!(close(&half_turn, &TransferMatrix::identity().scale(-1.0), 1e-15));
        let (a, b) = (0.37, 1.9);
        let composed = propagation_matrix(2.1, a).unwrap() * propagation_matrix(2.1, b).unwrap();
        assert!(close(&composed, &propagation_matrix(2.1, a + b).unwrap(), 1e-12));
        assert!(propagation_matrix(1.0, -0.1).is_err());
    }

    #[test]
    fn region_sequence_covers_span() {
        let spec = UcpSpec::new(10.0, 25.0, 2.5, 0.5, 1.0, 5).unwrap();
        let seq = RegionSequence::from_geometry(&spec.build_segments());
        assert_eq!(seq.regions.len(), 2 * 32 - 1);
        assert_eq!(seq.regions[0].kind, RegionKind::Barrier);
        assert!((seq.total_width() - 10.0).abs() <= 1e-10 * 10.0);
        assert!(seq.regions.iter().all(|r| r.width > 0.0));
    }

    #[test]
    fn stage_zero_matches_single_barrier() {
        let spec = UcpSpec::general_cantor(1.0, 10.0, 3.0, 0).unwrap();
        for &k in &[0.5, 2.0, 3.1623, 8.0] {
            let oracle = transmission_oracle(&spec, k).unwrap();
            let single = barrier_matrix(k, 10.0, 1.0).unwrap().transmission();
            assert_relative_eq!(oracle.transmission, single, max_relative = 1e-12);
        }
    }

    #[test]
    fn zero_height_is_transparent() {
        let spec = UcpSpec::new(10.0, 0.0, 3.0, 1.0, 0.0, 6).unwrap();
        let r = transmission_oracle(&spec, 1.3).unwrap();
        assert!((r.transmission - 1.0).abs() < 1e-13);
    }

    #[test]
    fn cap_is_enforced() {
        let spec = UcpSpec::general_cantor(1.0, 10.0, 3.0, 5).unwrap();
        assert_eq!(
            transmission_oracle_with_cap(&spec, 1.0, 4),
            Err(UcpError::OracleInfeasible { stage: 5, cap: 4 })
        );
        assert!(transmission_oracle_with_cap(&spec, 1.0, 5).is_ok());
    }

    #[test]
    fn single_barrier_translation_invariance() {
        let reference = {
            let geo = SegmentGeometry { span: 0.6, barriers: vec![Barrier { offset: 0.0, width: 0.6 }] };
            RegionSequence::from_geometry(&geo).matrix(2.4, 9.0).unwrap().transmission()
        };
        for &x in &[0.1, 0.77, 3.0, 12.5] {
            let geo = SegmentGeometry { span: x + 2.0, barriers: vec![Barrier { offset: x, width: 0.6 }] };
            let t = RegionSequence::from_geometry(&geo).matrix(2.4, 9.0).unwrap().transmission();
            assert_relative_eq!(t, reference, max_relative = 1e-12);
        }
    }

    #[test]
    fn mirrored_reversed_order_is_equivalent() {
        let spec = UcpSpec::new(5.0, 25.0, 2.5, 0.5, 1.0, 6).unwrap();
        let geo = spec.build_segments();
        for &k in &[0.8, 3.3, 5.0001, 9.7] {
            let forward = RegionSequence::from_geometry(&geo).matrix(k, 25.0).unwrap().transmission();
            let reversed = RegionSequence::from_geometry(&geo).reversed().matrix(k, 25.0).unwrap().transmission();
            let mirrored = RegionSequence::from_geometry(&geo.mirrored()).matrix(k, 25.0).unwrap().transmission();
            assert!((forward - reversed).abs() <= 1e-11);
            assert!((forward - mirrored).abs() <= 1e-11);
        }
    }

    #[test]
    fn reversal_of_asymmetric_layout() {
        let geo = SegmentGeometry {
            span: 4.0,
            barriers: vec![
                Barrier { offset: 0.2, width: 0.3 },
                Barrier { offset: 0.9, width: 0.05 },
                Barrier { offset: 2.0, width: 1.1 },
            ],
        };
        let seq = RegionSequence::from_geometry(&geo);
        for &k in &[0.7, 2.9, 6.4] {
            let forward = seq.matrix(k, 4.0).unwrap().transmission();
            let reversed = seq.reversed().matrix(k, 4.0).unwrap().transmission();
            let mirrored = RegionSequence::from_geometry(&geo.mirrored()).matrix(k, 4.0).unwrap().transmission();
            assert!((forward - reversed).abs() <= 1e-11);
            assert!((forward - mirrored).abs() <= 1e-11);
        }
    }
}
