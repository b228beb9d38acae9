//! Unified Cantor potential geometry.
//!
//! A stage-`G` potential starts from one rectangular barrier of span `L` and
//! height `V`. At every stage `g = 1..=G` the fraction `rho^-(alpha + beta*g)`
//! is removed from the middle of each remaining segment, which leaves `2^G`
//! equal barriers of width `l_G`. `alpha = 1, beta = 0` is the general Cantor
//! potential and `alpha = 0, beta = 1` the Smith-Volterra-Cantor potential.

use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Result, SpecViolation};
use crate::math::{one_minus_inv_pow, q_pochhammer};

/// Parameters of a unified Cantor potential together with its stage.
///
/// Construction validates every invariant, so a `UcpSpec` value is always
/// well formed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UcpSpec {
    length: f64,
    height: f64,
    rho: f64,
    alpha: f64,
    beta: f64,
    stage: u32,
}

/// Largest stage for which a given `(alpha, beta)` pair stays well formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StageLimit {
    /// Every stage is well formed.
    Unbounded,
    /// Stages `0..=n` are well formed; `MaxStage(0)` means only the bare barrier.
    MaxStage(u32),
}

impl StageLimit {
    pub fn allows(self, stage: u32) -> bool {
        match self {
            StageLimit::Unbounded => true,
            StageLimit::MaxStage(n) => stage <= n,
        }
    }
}

/// Exponent of the removal fraction at stage `g`.
fn removal_exponent(alpha: f64, beta: f64, g: u32) -> f64 {
    alpha + beta * g as f64
}

/// Largest `G` such that `alpha + beta*g > 0` for every `g` in `1..=G`.
///
/// Since the exponent is linear in `g`, only `g = 1` binds when `beta >= 0`
/// and only `g = G` binds when `beta < 0`.
pub fn max_valid_stage(alpha: f64, beta: f64) -> StageLimit {
    if removal_exponent(alpha, beta, 1) <= 0.0 {
        return StageLimit::MaxStage(0);
    }
    if beta >= 0.0 {
        return StageLimit::Unbounded;
    }
    let estimate = (alpha / -beta).floor();
    if estimate >= u32::MAX as f64 {
        return StageLimit::MaxStage(u32::MAX);
    }
    let mut g = estimate.max(1.0) as u32;
    while g > 1 && removal_exponent(alpha, beta, g) <= 0.0 {
        g -= 1;
    }
    while g < u32::MAX && removal_exponent(alpha, beta, g + 1) > 0.0 {
        g += 1;
    }
    StageLimit::MaxStage(g)
}

impl UcpSpec {
    pub fn new(length: f64, height: f64, rho: f64, alpha: f64, beta: f64, stage: u32) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(SpecViolation::Length(length).into());
        }
        if !height.is_finite() {
            return Err(SpecViolation::Height(height).into());
        }
        if !(rho.is_finite() && rho > 1.0) {
            return Err(SpecViolation::Rho(rho).into());
        }
        if !(alpha.is_finite() && beta.is_finite()) {
            return Err(SpecViolation::NonFiniteExponent { alpha, beta }.into());
        }
        if alpha == 0.0 && beta == 0.0 {
            return Err(SpecViolation::AlphaBetaZero.into());
        }
        if let StageLimit::MaxStage(max) = max_valid_stage(alpha, beta) {
            if stage > max {
                let first_bad = max + 1;
                return Err(SpecViolation::StageIllFormed {
                    stage: first_bad,
                    exponent: removal_exponent(alpha, beta, first_bad),
                }
                .into());
            }
        }
        Ok(UcpSpec { length, height, rho, alpha, beta, stage })
    }

    /// General Cantor potential: `alpha = 1, beta = 0`.
    pub fn general_cantor(length: f64, height: f64, rho: f64, stage: u32) -> Result<Self> {
        Self::new(length, height, rho, 1.0, 0.0, stage)
    }

    /// Smith-Volterra-Cantor potential: `alpha = 0, beta = 1`.
    pub fn smith_volterra_cantor(length: f64, height: f64, rho: f64, stage: u32) -> Result<Self> {
        Self::new(length, height, rho, 0.0, 1.0, stage)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn stage(&self) -> u32 {
        self.stage
    }

    pub fn with_stage(&self, stage: u32) -> Result<Self> {
        Self::new(self.length, self.height, self.rho, self.alpha, self.beta, stage)
    }

    pub fn with_height(&self, height: f64) -> Result<Self> {
        Self::new(self.length, height, self.rho, self.alpha, self.beta, self.stage)
    }

    /// True when both specs describe the same family and differ at most in stage.
    pub fn same_family(&self, other: &UcpSpec) -> bool {
        self.length == other.length
            && self.height == other.height
            && self.rho == other.rho
            && self.alpha == other.alpha
            && self.beta == other.beta
    }

    /// Fraction of a segment removed from its middle at stage `g`.
    pub fn removal_fraction(&self, g: u32) -> f64 {
        self.rho.powf(-removal_exponent(self.alpha, self.beta, g))
    }

    fn kept_fraction(&self, g: u32) -> f64 {
        one_minus_inv_pow(self.rho, removal_exponent(self.alpha, self.beta, g))
    }

    fn check_stage(&self, g: u32, min: u32, what: &str) -> Result<()> {
        if g < min || g > self.stage {
            return Err(invalid_arg(format!(
                "{what}: index {g} outside {min}..={}",
                self.stage
            )));
        }
        Ok(())
    }

    /// Segment width `l_g = L/2^g * prod_{j=1}^{g} (1 - rho^-(alpha+beta*j))`.
    pub fn segment_length(&self, g: u32) -> Result<f64> {
        self.check_stage(g, 0, "segment_length")?;
        Ok(self.segment_length_unchecked(g))
    }

    fn segment_length_unchecked(&self, g: u32) -> f64 {
        let product: f64 = (1..=g).map(|j| self.kept_fraction(j)).product();
        self.length * 0.5f64.powi(g as i32) * product
    }

    /// `l_g` through the q-Pochhammer symbol,
    /// `L rho^alpha / (2^g (rho^alpha - 1)) * (rho^-alpha; rho^-beta)_{g+1}`.
    ///
    /// This form is singular at `alpha = 0`, which is rejected.
    pub fn segment_length_pochhammer(&self, g: u32) -> Result<f64> {
        self.check_stage(g, 0, "segment_length_pochhammer")?;
        let prefactor = self.pochhammer_prefactor()?;
        let q = q_pochhammer(self.rho.powf(-self.alpha), self.rho.powf(-self.beta), g + 1);
        Ok(self.length * prefactor * 0.5f64.powi(g as i32) * q)
    }

    fn pochhammer_prefactor(&self) -> Result<f64> {
        if self.alpha == 0.0 {
            return Err(invalid_arg("q-Pochhammer form is singular at alpha = 0"));
        }
        let r_alpha = self.rho.powf(self.alpha);
        Ok(r_alpha / (r_alpha - 1.0))
    }

    /// Gap `d_g = l_{g-1} * rho^-(alpha+beta*g)` opened at stage `g`.
    pub fn gap_length(&self, g: u32) -> Result<f64> {
        self.check_stage(g, 1, "gap_length")?;
        Ok(self.segment_length_unchecked(g - 1) * self.removal_fraction(g))
    }

    /// Super-periodic distance `s_f`, `f = 1..=G`.
    ///
    /// `s_f = L/2^{G+1-f} (1 + rho^-(alpha+beta(G+1-f))) prod_{j=1}^{G-f} (1 - rho^-(alpha+beta j))`.
    pub fn super_period(&self, f: u32) -> Result<f64> {
        self.check_stage(f, 1, "super_period")?;
        let m = self.stage + 1 - f;
        let product: f64 = (1..m).map(|j| self.kept_fraction(j)).product();
        Ok(self.length * 0.5f64.powi(m as i32) * (1.0 + self.removal_fraction(m)) * product)
    }

    /// `s_f` through the q-Pochhammer symbol; singular at `alpha = 0`.
    pub fn super_period_pochhammer(&self, f: u32) -> Result<f64> {
        self.check_stage(f, 1, "super_period_pochhammer")?;
        let prefactor = self.pochhammer_prefactor()?;
        let m = self.stage + 1 - f;
        let q = q_pochhammer(self.rho.powf(-self.alpha), self.rho.powf(-self.beta), m);
        Ok(self.length * prefactor * 0.5f64.powi(m as i32) * (1.0 + self.removal_fraction(m)) * q)
    }

    /// `gamma_1(q) = -(l_G + d_{G-q+1})`, always negative.
    pub fn gamma1(&self, q: u32) -> Result<f64> {
        self.check_stage(q, 1, "gamma1")?;
        let lengths = self.stage_lengths();
        Ok(lengths.gamma1(q))
    }

    /// `gamma_2(q, r) = d_{G-r+1} - d_{G-q+1}` for `1 <= r < q <= G`.
    pub fn gamma2(&self, q: u32, r: u32) -> Result<f64> {
        self.check_stage(q, 1, "gamma2")?;
        if r < 1 || r >= q {
            return Err(invalid_arg(format!("gamma2 requires 1 <= r < q, got q={q}, r={r}")));
        }
        Ok(self.stage_lengths().gamma2(q, r))
    }

    /// All segment widths `l_0..=l_G` and gaps `d_1..=d_G` in one pass.
    pub fn stage_lengths(&self) -> StageLengths {
        let mut segments = Vec::with_capacity(self.stage as usize + 1);
        let mut gaps = Vec::with_capacity(self.stage as usize);
        let mut l = self.length;
        segments.push(l);
        for g in 1..=self.stage {
            gaps.push(l * self.removal_fraction(g));
            l = 0.5 * l * self.kept_fraction(g);
            segments.push(l);
        }
        StageLengths { segments, gaps }
    }

    /// Explicit barrier intervals, built by recursive middle removal.
    pub fn build_segments(&self) -> SegmentGeometry {
        let mut barriers = vec![Barrier { offset: 0.0, width: self.length }];
        for g in 1..=self.stage {
            let kept = self.kept_fraction(g);
            let mut next = Vec::with_capacity(barriers.len() * 2);
            for b in &barriers {
                let w = 0.5 * b.width * kept;
                next.push(Barrier { offset: b.offset, width: w });
                next.push(Barrier { offset: b.offset + b.width - w, width: w });
            }
            barriers = next;
        }
        SegmentGeometry { span: self.length, barriers }
    }
}

/// Per-stage widths of one spec.
#[derive(Debug, Clone, PartialEq)]
pub struct StageLengths {
    /// `l_0..=l_G`.
    pub segments: Vec<f64>,
    /// `d_1..=d_G`, stored at index `g - 1`.
    pub gaps: Vec<f64>,
}

impl StageLengths {
    pub fn stage(&self) -> u32 {
        self.gaps.len() as u32
    }

    pub fn unit_width(&self) -> f64 {
        *self.segments.last().expect("segments always holds l_0")
    }

    pub fn gap(&self, g: u32) -> f64 {
        self.gaps[g as usize - 1]
    }

    pub fn gamma1(&self, q: u32) -> f64 {
        let g = self.stage();
        -(self.unit_width() + self.gap(g - q + 1))
    }

    pub fn gamma2(&self, q: u32, r: u32) -> f64 {
        let g = self.stage();
        self.gap(g - r + 1) - self.gap(g - q + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Barrier {
    pub offset: f64,
    pub width: f64,
}

impl Barrier {
    pub fn end(&self) -> f64 {
        self.offset + self.width
    }
}

/// Ordered, disjoint barrier intervals inside `[0, span]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentGeometry {
    pub span: f64,
    pub barriers: Vec<Barrier>,
}

impl SegmentGeometry {
    pub fn total_barrier_width(&self) -> f64 {
        self.barriers.iter().map(|b| b.width).sum()
    }

    pub fn total_gap_width(&self) -> f64 {
        let mut cursor = 0.0;
        let mut gaps = 0.0;
        for b in &self.barriers {
            gaps += b.offset - cursor;
            cursor = b.end();
        }
        gaps + (self.span - cursor)
    }

    /// Same intervals reflected about `span / 2`, in increasing order.
    pub fn mirrored(&self) -> SegmentGeometry {
        let barriers = self
            .barriers
            .iter()
            .rev()
            .map(|b| Barrier { offset: self.span - b.end(), width: b.width })
            .collect();
        SegmentGeometry { span: self.span, barriers }
    }
}
