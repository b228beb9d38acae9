//! Closed-form transmission through super-periodic potentials.
//!
//! Natural units are used throughout (`hbar = 1`, `2m = 1`): the outside
//! wavenumber is `k = sqrt(E)` and the inside one `kappa = sqrt(k^2 - V)`.
//!
//! Transfer matrices act on plane-wave amplitudes written in one global
//! basis, `A e^{ikx} + B e^{-ikx}`, so a zero-height region has the identity
//! matrix and `T = 1/|m22|^2` for every symmetric unit cell.

use std::f64::consts::LN_10;
use std::ops::Mul;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid_arg, Result, UcpError};
use crate::geometry::{StageLengths, UcpSpec};
use crate::math::{chebyshev_u, softplus};

/// Below this `|kappa * width|` the barrier kernels switch to their Taylor series.
pub const SERIES_THRESHOLD: f64 = 1e-8;

/// Above this weight the transmission is evaluated purely in the log domain.
const DIRECT_WEIGHT_LIMIT: f64 = 1e150;

/// Complex 2x2 transfer matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub m11: Complex64,
    pub m12: Complex64,
    pub m21: Complex64,
    pub m22: Complex64,
}

impl TransferMatrix {
    pub fn new(m11: Complex64, m12: Complex64, m21: Complex64, m22: Complex64) -> Self {
        TransferMatrix { m11, m12, m21, m22 }
    }

    pub fn identity() -> Self {
        let (one, zero) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        TransferMatrix::new(one, zero, zero, one)
    }

    pub fn diagonal(d1: Complex64, d2: Complex64) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        TransferMatrix::new(d1, zero, zero, d2)
    }

    pub fn det(&self) -> Complex64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn trace(&self) -> Complex64 {
        self.m11 + self.m22
    }

    pub fn scale(&self, s: f64) -> Self {
        TransferMatrix::new(self.m11 * s, self.m12 * s, self.m21 * s, self.m22 * s)
    }

    /// `T = 1 / |m22|^2`.
    pub fn transmission(&self) -> f64 {
        1.0 / self.m22.norm_sqr()
    }

    pub fn is_finite(&self) -> bool {
        [self.m11, self.m12, self.m21, self.m22].iter().all(|z| z.is_finite())
    }
}

impl Mul for TransferMatrix {
    type Output = TransferMatrix;

    fn mul(self, rhs: TransferMatrix) -> TransferMatrix {
        TransferMatrix {
            m11: self.m11 * rhs.m11 + self.m12 * rhs.m21,
            m12: self.m11 * rhs.m12 + self.m12 * rhs.m22,
            m21: self.m21 * rhs.m11 + self.m22 * rhs.m21,
            m22: self.m21 * rhs.m12 + self.m22 * rhs.m22,
        }
    }
}

impl std::ops::Add for TransferMatrix {
    type Output = TransferMatrix;

    fn add(self, rhs: TransferMatrix) -> TransferMatrix {
        TransferMatrix {
            m11: self.m11 + rhs.m11,
            m12: self.m12 + rhs.m12,
            m21: self.m21 + rhs.m21,
            m22: self.m22 + rhs.m22,
        }
    }
}

/// Transmission and reflection probabilities of one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatterResult {
    pub transmission: f64,
    pub reflection: f64,
    /// `log10(T)`, valid even when `T` itself underflows.
    pub log10_transmission: f64,
}

impl ScatterResult {
    /// From `X = R/T`, the weight in `T = 1/(1 + X)`.
    pub fn from_weight(x: f64) -> Self {
        let denom = 1.0 + x;
        ScatterResult {
            transmission: 1.0 / denom,
            reflection: x / denom,
            log10_transmission: -x.ln_1p() / LN_10,
        }
    }

    /// From `ln X`; never overflows.
    pub fn from_log_weight(ln_x: f64) -> Self {
        let ln_denom = softplus(ln_x);
        ScatterResult {
            transmission: (-ln_denom).exp(),
            reflection: (ln_x - ln_denom).exp(),
            log10_transmission: -ln_denom / LN_10,
        }
    }

    /// From a transmission probability, with `R = 1 - T`.
    pub fn from_transmission(t: f64) -> Self {
        ScatterResult { transmission: t, reflection: 1.0 - t, log10_transmission: t.log10() }
    }

    fn checked(self, context: &'static str) -> Result<Self> {
        if self.transmission.is_finite() && self.reflection.is_finite() && !self.log10_transmission.is_nan() {
            Ok(self)
        } else {
            Err(UcpError::NonFinite(context))
        }
    }
}

/// Real combinations of a rectangular barrier's matrix elements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierKernel {
    /// `cos(kappa w)`.
    pub cos_kw: f64,
    /// `eps_+ sin(kappa w)`.
    pub eps_plus_sin: f64,
    /// `eps_- sin(kappa w)`.
    pub eps_minus_sin: f64,
}

impl BarrierKernel {
    /// `kappa` is taken as the principal complex root of `k^2 - V`, so below
    /// the barrier top the trigonometric functions continue to hyperbolic
    /// ones. Near `kappa = 0` the removable `1/kappa` pole of `eps_±` is
    /// cancelled with a three-term Taylor series of `sin(kappa w)/kappa`.
    pub fn new(k: f64, height: f64, width: f64) -> Result<Self> {
        check_wavenumber(k)?;
        if !(width.is_finite() && width > 0.0) {
            return Err(invalid_arg(format!("barrier width must be > 0, got {width}")));
        }
        if !height.is_finite() {
            return Err(invalid_arg(format!("barrier height must be finite, got {height}")));
        }
        let kappa_sq = k * k - height;
        let kappa = Complex64::new(kappa_sq, 0.0).sqrt();
        let phase = kappa * width;
        let (cos_kw, sinc_w) = if phase.norm() < SERIES_THRESHOLD {
            let x2 = kappa_sq * width * width;
            (
                1.0 - x2 / 2.0 + x2 * x2 / 24.0,
                width * (1.0 - x2 / 6.0 + x2 * x2 / 120.0),
            )
        } else {
            (phase.cos().re, (phase.sin() / kappa).re)
        };
        // eps_± sin(kappa w) = (k^2 ± kappa^2) S / (2k) with S = sin(kappa w)/kappa,
        // and k^2 - kappa^2 = V exactly.
        let eps_plus_sin = 0.5 * (k * k + kappa_sq) * sinc_w / k;
        let eps_minus_sin = 0.5 * height * sinc_w / k;
        Ok(BarrierKernel { cos_kw, eps_plus_sin, eps_minus_sin })
    }
}

fn check_wavenumber(k: f64) -> Result<()> {
    if k.is_finite() && k > 0.0 {
        Ok(())
    } else {
        Err(invalid_arg(format!("wavenumber must be finite and > 0, got {k}")))
    }
}

/// Unit-cell transfer matrix of a rectangular barrier of height `height`
/// and width `width`:
///
/// ```text
/// m11 = (cos kw - i eps+ sin kw) e^{ikw}    m12 =  i eps- sin kw
/// m21 = -i eps- sin kw                      m22 = (cos kw + i eps+ sin kw) e^{-ikw}
/// ```
pub fn barrier_matrix(k: f64, height: f64, width: f64) -> Result<TransferMatrix> {
    let kernel = BarrierKernel::new(k, height, width)?;
    Ok(matrix_from_kernel(&kernel, k, width))
}

pub(crate) fn matrix_from_kernel(kernel: &BarrierKernel, k: f64, width: f64) -> TransferMatrix {
    let phase = Complex64::from_polar(1.0, k * width);
    let inner = Complex64::new(kernel.cos_kw, kernel.eps_plus_sin);
    let off = Complex64::new(0.0, kernel.eps_minus_sin);
    TransferMatrix {
        m11: inner.conj() * phase,
        m12: off,
        m21: -off,
        m22: inner * phase.conj(),
    }
}

/// Modulus and argument of `m22`. At `m22 = 0` the argument is taken as 0.
fn polar_m22(m: &TransferMatrix) -> (f64, f64) {
    let (abs, theta) = m.m22.to_polar();
    if abs == 0.0 {
        (0.0, 0.0)
    } else {
        (abs, theta)
    }
}

/// Bloch phases `Omega_1..Omega_G` of a stage-`G` potential.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochSequence {
    omegas: Vec<f64>,
    prefix_products: Vec<f64>,
}

impl BlochSequence {
    /// Runs the two-fold recursion
    ///
    /// ```text
    /// Omega_q = 2^{q-1} |m22| cos(theta - k g1(q)) prod_{p<q} Omega_p
    ///         - sum_{r<q} 2^{q-r-1} cos(k g2(q, r)) prod_{r<p<q} Omega_p
    /// ```
    ///
    /// with caller-supplied `g1` and `g2`. Empty sums vanish and empty
    /// products are one. Cost is `O(G^2)`.
    pub fn from_gammas(
        m22_abs: f64,
        theta: f64,
        k: f64,
        stage: u32,
        gamma1: impl Fn(u32) -> f64,
        gamma2: impl Fn(u32, u32) -> f64,
    ) -> Self {
        let mut omegas: Vec<f64> = Vec::with_capacity(stage as usize);
        for q in 1..=stage {
            // `tail` walks prod_{p=r+1}^{q-1} 2 Omega_p as r goes down.
            let mut tail = 1.0;
            let mut coupling = 0.0;
            for r in (1..q).rev() {
                coupling += (k * gamma2(q, r)).cos() * tail;
                tail *= 2.0 * omegas[r as usize - 1];
            }
            let lead = m22_abs * (theta - k * gamma1(q)).cos() * tail;
            omegas.push(lead - coupling);
        }
        let mut prefix_products = Vec::with_capacity(omegas.len());
        let mut acc = 1.0;
        for &w in &omegas {
            acc *= w;
            prefix_products.push(acc);
        }
        BlochSequence { omegas, prefix_products }
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    /// `prefix_products()[q-1] = prod_{p<=q} Omega_p`.
    pub fn prefix_products(&self) -> &[f64] {
        &self.prefix_products
    }

    /// `prod_q Omega_q`, or 1 for stage 0.
    pub fn product(&self) -> f64 {
        self.prefix_products.last().copied().unwrap_or(1.0)
    }

    /// `sum_q ln|Omega_q|`; `-inf` when some phase vanishes.
    pub fn log_abs_product(&self) -> f64 {
        self.omegas.iter().map(|w| w.abs().ln()).sum()
    }
}

/// Bloch phases of `spec` at wavenumber `k`, from the unit cell of width `l_G`.
pub fn bloch_sequence(spec: &UcpSpec, k: f64) -> Result<BlochSequence> {
    let lengths = spec.stage_lengths();
    let unit = barrier_matrix(k, spec.height(), lengths.unit_width())?;
    Ok(bloch_from_lengths(&unit, &lengths, k))
}

fn bloch_from_lengths(unit: &TransferMatrix, lengths: &StageLengths, k: f64) -> BlochSequence {
    let (m22_abs, theta) = polar_m22(unit);
    BlochSequence::from_gammas(
        m22_abs,
        theta,
        k,
        lengths.stage(),
        |q| lengths.gamma1(q),
        |q, r| lengths.gamma2(q, r),
    )
}

/// Combines `ln|amplitude|` contributions into a `ScatterResult`.
///
/// `factors` multiply to the reflection amplitude `sqrt(X)`; small weights
/// are evaluated directly, large ones in the log domain.
fn result_from_amplitude_factors(factors: &[f64], context: &'static str) -> Result<ScatterResult> {
    let ln_x: f64 = 2.0 * factors.iter().map(|f| f.abs().ln()).sum::<f64>();
    if ln_x.is_nan() || ln_x == f64::INFINITY {
        return Err(UcpError::NonFinite(context));
    }
    if ln_x < DIRECT_WEIGHT_LIMIT.ln() {
        let amplitude: f64 = factors.iter().product();
        let x = amplitude * amplitude;
        if x.is_finite() {
            return ScatterResult::from_weight(x).checked(context);
        }
    }
    ScatterResult::from_log_weight(ln_x).checked(context)
}

/// Closed-form transmission through a unified Cantor potential:
///
/// `T_G = 1 / (1 + 4^G eps_-^2 sin^2(kappa l_G) prod_q Omega_q^2)`.
pub fn transmission_ucp(spec: &UcpSpec, k: f64) -> Result<ScatterResult> {
    let lengths = spec.stage_lengths();
    let width = lengths.unit_width();
    let kernel = BarrierKernel::new(k, spec.height(), width)?;
    let unit = matrix_from_kernel(&kernel, k, width);
    let bloch = bloch_from_lengths(&unit, &lengths, k);
    let mut factors = Vec::with_capacity(bloch.omegas().len() + 1);
    factors.push(kernel.eps_minus_sin);
    factors.extend(bloch.omegas().iter().map(|w| 2.0 * w));
    result_from_amplitude_factors(&factors, "transmission_ucp")
}

/// Bloch phases of a general super-periodic potential with repetition
/// counts `ns` at distances `ss`.
pub fn spp_bloch_phases(unit: &TransferMatrix, ns: &[u32], ss: &[f64], k: f64) -> Result<Vec<f64>> {
    check_wavenumber(k)?;
    if ns.len() != ss.len() {
        return Err(invalid_arg(format!(
            "repetition counts ({}) and distances ({}) differ in length",
            ns.len(),
            ss.len()
        )));
    }
    if let Some(pos) = ns.iter().position(|&n| n == 0) {
        return Err(invalid_arg(format!("repetition count at level {} must be >= 1", pos + 1)));
    }
    let (m22_abs, theta) = polar_m22(unit);
    let order = ns.len();
    let n = |p: usize| ns[p - 1] as f64;
    let s = |p: usize| ss[p - 1];
    let mut omegas: Vec<f64> = Vec::with_capacity(order);
    // Chebyshev factors U_{N_p - 1}(Omega_p), filled as each level completes.
    let mut cheb: Vec<f64> = Vec::with_capacity(order);
    for q in 1..=order {
        let shift: f64 = (1..q).map(|p| (n(p) - 1.0) * s(p)).sum::<f64>() - s(q);
        let lead_product: f64 = cheb.iter().product();
        let mut omega = m22_abs * (theta - k * shift).cos() * lead_product;
        // r = q-1 is the trailing standalone term; it joins the sum with an
        // empty product.
        for r in 1..q {
            let forward: f64 = (r..q).map(|p| n(p) * s(p)).sum();
            let back: f64 = (r + 1..=q).map(s).sum();
            let inner: f64 = cheb[r..q - 1].iter().product();
            let u_lower = chebyshev_u(ns[r - 1] as i64 - 2, omegas[r - 1]);
            omega -= (k * (forward - back)).cos() * u_lower * inner;
        }
        omegas.push(omega);
        cheb.push(chebyshev_u(ns[q - 1] as i64 - 1, omega));
    }
    Ok(omegas)
}

/// Transmission of a super-periodic potential of arbitrary order:
///
/// `T = 1 / (1 + [|m12| prod_p U_{N_p - 1}(Omega_p)]^2)`.
pub fn transmission_spp(unit: &TransferMatrix, ns: &[u32], ss: &[f64], k: f64) -> Result<ScatterResult> {
    let omegas = spp_bloch_phases(unit, ns, ss, k)?;
    let mut factors = Vec::with_capacity(omegas.len() + 1);
    factors.push(unit.m12.norm());
    factors.extend(ns.iter().zip(&omegas).map(|(&n, &w)| chebyshev_u(n as i64 - 1, w)));
    result_from_amplitude_factors(&factors, "transmission_spp")
}

/// Repetition counts and distances that rebuild `spec` as a super-periodic potential.
pub fn ucp_as_spp(spec: &UcpSpec) -> Result<(Vec<u32>, Vec<f64>)> {
    let ss = (1..=spec.stage()).map(|f| spec.super_period(f)).collect::<Result<Vec<_>>>()?;
    Ok((vec![2; spec.stage() as usize], ss))
}
