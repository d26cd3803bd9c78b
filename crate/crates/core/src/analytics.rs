//! Closed-form distributions of SINR and PU interference under equal power,
//! the probability `Q_K` of serving all K SUs, and its maximization over the
//! equal power level.
//!
//! Under MEB the SINR is `1 / (C + Z)` with `Z` a moment-matched gamma sum of
//! PU and inter-stream terms; `C + Z` is then matched to a single gamma, so
//! the SINR is inverse-gamma. Under ZFB the SINR is a ratio of two gammas,
//! i.e. generalized-F. PU interference is gamma with shape K under both
//! schemes, with scale `P_eq sigma2_h` (MEB) or `P_eq sigma2_delta` (ZFB).
//! The principal singular value is replaced by its mean throughout.

use crate::beamforming::Scheme;
use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::special::{regularized_incomplete_beta, regularized_lower_gamma, regularized_upper_gamma};
use crate::wishart::expected_max_eig;

/// Grid size of the coarse scan in [`optimize_equal_power`].
pub const OPT_GRID_POINTS: usize = 256;
const GOLDEN_ITERS: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaParams {
    pub shape: f64,
    pub scale: f64,
}

impl GammaParams {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        if shape > 0.0 && scale > 0.0 && shape.is_finite() && scale.is_finite() {
            Ok(Self { shape, scale })
        } else {
            Err(Error::Domain(format!(
                "gamma parameters must be positive, got ({shape}, {scale})"
            )))
        }
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::Domain(format!(
                "gamma CDF argument must be nonnegative, got {x}"
            )));
        }
        regularized_lower_gamma(self.shape, x / self.scale)
    }

    pub fn mean(&self) -> f64 {
        self.shape * self.scale
    }
}

/// Inverse-gamma law of `1 / Y` with `Y ~ Gamma(shape, theta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseGammaParams {
    pub shape: f64,
    pub theta: f64,
}

impl InverseGammaParams {
    /// `Pr(1/Y <= s) = Pr(Y >= 1/s)`.
    pub fn cdf(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::Domain(format!("SINR threshold must be nonnegative, got {s}")));
        }
        if s == 0.0 {
            return Ok(0.0);
        }
        regularized_upper_gamma(self.shape, 1.0 / (s * self.theta))
    }

    /// `Pr(1/Y >= s)`, evaluated without cancellation.
    pub fn exceedance(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::Domain(format!("SINR threshold must be nonnegative, got {s}")));
        }
        if s == 0.0 {
            return Ok(1.0);
        }
        regularized_lower_gamma(self.shape, 1.0 / (s * self.theta))
    }
}

/// Generalized-F law of `W / D` with `W ~ Gamma(k_n, theta_n)`,
/// `D ~ Gamma(k_d, theta_d)` and `lambda = theta_d / theta_n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenFParams {
    pub k_n: f64,
    pub k_d: f64,
    pub lambda: f64,
}

impl GenFParams {
    pub fn cdf(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::Domain(format!("SINR threshold must be nonnegative, got {s}")));
        }
        if s.is_infinite() {
            return Ok(1.0);
        }
        let ls = self.lambda * s;
        regularized_incomplete_beta(ls / (1.0 + ls), self.k_n, self.k_d)
    }

    pub fn exceedance(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::Domain(format!("SINR threshold must be nonnegative, got {s}")));
        }
        if s.is_infinite() {
            return Ok(0.0);
        }
        let ls = self.lambda * s;
        regularized_incomplete_beta(1.0 / (1.0 + ls), self.k_d, self.k_n)
    }
}

/// Intermediate quantities of the MEB SINR model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MebSinrInputs {
    /// Mean of the PU plus inter-stream term `Z`.
    pub a: f64,
    /// Variance of `Z`.
    pub b: f64,
    /// Normalized noise `sigma2_w / (P_eq E[sigma2_k1])`.
    pub c: f64,
    pub k_z: f64,
    pub theta_z: f64,
    pub mean_sigma2: f64,
    pub params: InverseGammaParams,
}

/// SINR law of one SU under equal power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SinrModel {
    InverseGamma(InverseGammaParams),
    GenF(GenFParams),
    /// ZFB without PU transmitters: `W / sigma2_w`.
    Gamma(GammaParams),
    /// MEB with a single SU and no PU transmitters: SINR is `1 / C`.
    PointMass(f64),
}

impl SinrModel {
    pub fn cdf(&self, s: f64) -> Result<f64> {
        match self {
            SinrModel::InverseGamma(p) => p.cdf(s),
            SinrModel::GenF(p) => p.cdf(s),
            SinrModel::Gamma(p) => p.cdf(s),
            SinrModel::PointMass(v) => {
                if !(s >= 0.0) {
                    return Err(Error::Domain(format!("SINR threshold must be nonnegative, got {s}")));
                }
                Ok(if s >= *v { 1.0 } else { 0.0 })
            }
        }
    }

    /// `Pr(SINR >= s)`.
    pub fn exceedance(&self, s: f64) -> Result<f64> {
        match self {
            SinrModel::InverseGamma(p) => p.exceedance(s),
            SinrModel::GenF(p) => p.exceedance(s),
            SinrModel::Gamma(p) => {
                if !(s >= 0.0) {
                    return Err(Error::Domain(format!("SINR threshold must be nonnegative, got {s}")));
                }
                regularized_upper_gamma(p.shape, s / p.scale)
            }
            SinrModel::PointMass(v) => {
                if !(s >= 0.0) {
                    return Err(Error::Domain(format!("SINR threshold must be nonnegative, got {s}")));
                }
                Ok(if *v >= s { 1.0 } else { 0.0 })
            }
        }
    }
}

/// Interference law at one PU receiver under equal power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InterferenceModel {
    Gamma(GammaParams),
    /// Identically zero (ZFB with perfect CSI).
    Zero,
}

impl InterferenceModel {
    pub fn cdf(&self, x: f64) -> Result<f64> {
        match self {
            InterferenceModel::Gamma(g) => g.cdf(x),
            InterferenceModel::Zero => {
                if !(x >= 0.0) {
                    return Err(Error::Domain(format!("interference must be nonnegative, got {x}")));
                }
                Ok(1.0)
            }
        }
    }
}

fn check_power(p_eq: f64) -> Result<()> {
    if p_eq > 0.0 && p_eq.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "equal power must be positive and finite, got {p_eq}"
        )))
    }
}

fn mean_sigma2(config: &NetworkConfig) -> Result<f64> {
    expected_max_eig(config.m_u, config.m_b, config.sigma2_h)
}

pub fn meb_sinr_params(config: &NetworkConfig, p_eq: f64) -> Result<MebSinrInputs> {
    check_power(p_eq)?;
    let e = mean_sigma2(config)?;
    let k = config.k_su as f64;
    let m_b = config.m_b as f64;
    let l_tx = config.l_tx as f64;
    let pu = config.p_p * config.sigma2_h / (p_eq * e);
    let a = l_tx * pu + (k - 1.0) / m_b;
    let b = l_tx * pu * pu + (k - 1.0) / (m_b * m_b);
    let c = config.sigma2_w / (p_eq * e);
    if !(b > 0.0) {
        return Err(Error::DegenerateDenominator);
    }
    let shape = (c + a) * (c + a) / b;
    let theta = b / (c + a);
    Ok(MebSinrInputs {
        a,
        b,
        c,
        k_z: a * a / b,
        theta_z: b / a,
        mean_sigma2: e,
        params: InverseGammaParams { shape, theta },
    })
}

pub fn meb_sinr_cdf(params: &InverseGammaParams, s: f64) -> Result<f64> {
    params.cdf(s)
}

pub fn meb_sinr_model(config: &NetworkConfig, p_eq: f64) -> Result<SinrModel> {
    match meb_sinr_params(config, p_eq) {
        Ok(inputs) => Ok(SinrModel::InverseGamma(inputs.params)),
        Err(Error::DegenerateDenominator) => {
            let e = mean_sigma2(config)?;
            Ok(SinrModel::PointMass(p_eq * e / config.sigma2_w))
        }
        Err(e) => Err(e),
    }
}

pub fn meb_interference_model(config: &NetworkConfig, p_eq: f64) -> Result<InterferenceModel> {
    check_power(p_eq)?;
    Ok(InterferenceModel::Gamma(GammaParams::new(
        config.k_su as f64,
        p_eq * config.sigma2_h,
    )?))
}

pub fn meb_interference_cdf(config: &NetworkConfig, p_eq: f64, x: f64) -> Result<f64> {
    meb_interference_model(config, p_eq)?.cdf(x)
}

fn zfb_numerator_shape(config: &NetworkConfig) -> Result<f64> {
    let dof = config.m_b as i64 - config.k_su as i64 - config.l_tx as i64 + 1;
    if dof < 1 {
        return Err(Error::Domain(format!(
            "ZFB SINR model needs M_b >= K + L_tx (M_b={}, K={}, L_tx={})",
            config.m_b, config.k_su, config.l_tx
        )));
    }
    Ok(dof as f64)
}

pub fn zfb_sinr_params(config: &NetworkConfig, p_eq: f64) -> Result<GenFParams> {
    check_power(p_eq)?;
    let k_n = zfb_numerator_shape(config)?;
    if config.l_tx == 0 || config.p_p == 0.0 {
        return Err(Error::NoPuTransmitters);
    }
    let e = mean_sigma2(config)?;
    let l_tx = config.l_tx as f64;
    let q_mean = l_tx * config.p_p * config.sigma2_h;
    let q_var = l_tx * (config.p_p * config.sigma2_h).powi(2);
    let d_mean = config.sigma2_w + q_mean;
    let theta_n = p_eq * e / config.m_b as f64;
    let theta_d = q_var / d_mean;
    Ok(GenFParams {
        k_n,
        k_d: d_mean * d_mean / q_var,
        lambda: theta_d / theta_n,
    })
}

pub fn zfb_sinr_cdf(params: &GenFParams, s: f64) -> Result<f64> {
    params.cdf(s)
}

pub fn zfb_sinr_model(config: &NetworkConfig, p_eq: f64) -> Result<SinrModel> {
    match zfb_sinr_params(config, p_eq) {
        Ok(p) => Ok(SinrModel::GenF(p)),
        Err(Error::NoPuTransmitters) => {
            let k_n = zfb_numerator_shape(config)?;
            let e = mean_sigma2(config)?;
            let scale = p_eq * e / (config.m_b as f64 * config.sigma2_w);
            Ok(SinrModel::Gamma(GammaParams::new(k_n, scale)?))
        }
        Err(e) => Err(e),
    }
}

pub fn zfb_interference_model(config: &NetworkConfig, p_eq: f64) -> Result<InterferenceModel> {
    check_power(p_eq)?;
    if config.sigma2_delta == 0.0 {
        return Ok(InterferenceModel::Zero);
    }
    Ok(InterferenceModel::Gamma(GammaParams::new(
        config.k_su as f64,
        p_eq * config.sigma2_delta,
    )?))
}

pub fn zfb_interference_cdf(config: &NetworkConfig, p_eq: f64, x: f64) -> Result<f64> {
    zfb_interference_model(config, p_eq)?.cdf(x)
}

pub fn sinr_model(scheme: Scheme, config: &NetworkConfig, p_eq: f64) -> Result<SinrModel> {
    match scheme {
        Scheme::Meb => meb_sinr_model(config, p_eq),
        Scheme::Zfb => zfb_sinr_model(config, p_eq),
    }
}

pub fn interference_model(scheme: Scheme, config: &NetworkConfig, p_eq: f64) -> Result<InterferenceModel> {
    match scheme {
        Scheme::Meb => meb_interference_model(config, p_eq),
        Scheme::Zfb => zfb_interference_model(config, p_eq),
    }
}

/// Probability of serving all K SUs with equal power `p_eq`:
/// `Pr(SINR >= 2^R0 - 1)^K * Pr(I <= I^0)^L_rx`.
pub fn q_k(scheme: Scheme, config: &NetworkConfig, p_eq: f64) -> Result<f64> {
    let served = sinr_model(scheme, config, p_eq)?.exceedance(config.sinr_threshold())?;
    let compliant = interference_model(scheme, config, p_eq)?.cdf(config.i0)?;
    Ok(served.powi(config.k_su as i32) * compliant.powi(config.l_rx as i32))
}

/// Admissible range of the equal power level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EqualPowerRange {
    /// Noise-limited minimum `sigma2_w (2^R0 - 1) / E[sigma2_k1]`.
    pub p_min: f64,
    /// Power-budget maximum `P^0 / K`.
    pub p_max: f64,
}

impl EqualPowerRange {
    pub fn is_empty(&self) -> bool {
        self.p_min > self.p_max
    }
}

pub fn equal_power_bounds(config: &NetworkConfig) -> Result<EqualPowerRange> {
    let e = mean_sigma2(config)?;
    Ok(EqualPowerRange {
        p_min: config.sigma2_w * config.sinr_threshold() / e,
        p_max: config.p0 / config.k_su as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EqualPowerOptimum {
    pub p_eq: f64,
    pub q: f64,
    pub range: EqualPowerRange,
    /// Set when `p_min > p_max`; the result is then evaluated at `p_max`.
    pub range_infeasible: bool,
}

/// Maximizes [`q_k`] over `[p_min, p_max]`.
///
/// A log-spaced grid scan locates the best cell (lowest power wins ties),
/// then golden-section search refines within the neighbouring cells. The
/// refinement is kept only if it strictly improves on the grid.
pub fn optimize_equal_power(scheme: Scheme, config: &NetworkConfig) -> Result<EqualPowerOptimum> {
    let range = equal_power_bounds(config)?;
    if range.is_empty() || range.p_min == range.p_max || !(range.p_min > 0.0) {
        let p = range.p_max;
        return Ok(EqualPowerOptimum {
            p_eq: p,
            q: q_k(scheme, config, p)?,
            range,
            range_infeasible: range.is_empty(),
        });
    }

    let lo = range.p_min.ln();
    let hi = range.p_max.ln();
    let n = OPT_GRID_POINTS;
    let grid: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
    let q_at = |t: f64| q_k(scheme, config, t.exp());

    let mut best_i = 0;
    let mut best_q = f64::NEG_INFINITY;
    for (i, &t) in grid.iter().enumerate() {
        let q = q_at(t)?;
        if q > best_q {
            best_q = q;
            best_i = i;
        }
    }

    let mut a = grid[best_i.saturating_sub(1)];
    let mut b = grid[(best_i + 1).min(n - 1)];
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = q_at(x1)?;
    let mut f2 = q_at(x2)?;
    for _ in 0..GOLDEN_ITERS {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = q_at(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = q_at(x2)?;
        }
    }
    let (t_gs, q_gs) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };

    let (t, q) = if q_gs > best_q {
        (t_gs, q_gs)
    } else {
        (grid[best_i], best_q)
    };
    // Endpoints are returned exactly rather than through exp(ln(.)).
    let p_eq = if t == lo {
        range.p_min
    } else if t == hi {
        range.p_max
    } else {
        t.exp()
    };
    Ok(EqualPowerOptimum {
        p_eq,
        q,
        range,
        range_infeasible: false,
    })
}
