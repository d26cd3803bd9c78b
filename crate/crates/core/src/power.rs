//! Power allocation for fixed beams.
//!
//! With the beams fixed, every constraint of the downlink feasibility problem
//! is linear in the powers. Under MEB the resulting system is solved with the
//! phase-1 simplex in [`crate::lp`]. Under ZFB the equal-rate allocation is
//! feasible whenever any allocation is, so feasibility reduces to comparing
//! its total power against `min(P^0, I^0 / sigma2_delta)`.

use std::fmt;

use crate::beamforming::{BeamformingSolution, Scheme};
use crate::channel::ChannelRealization;
use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::lp::{find_feasible_point, LinearSystem};
use crate::metrics::{self, inner_power};

/// Slack below which a constraint counts as violated.
pub const SLACK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AllocationScheme {
    LfMeb,
    LfZfbEqualRate,
    EqualPower,
}

impl AllocationScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            AllocationScheme::LfMeb => "LF_MEB",
            AllocationScheme::LfZfbEqualRate => "LF_ZFB_EQUAL_RATE",
            AllocationScheme::EqualPower => "EQUAL_POWER",
        }
    }
}

impl fmt::Display for AllocationScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Signed margins of every constraint; negative means violated.
#[derive(Debug, Clone, PartialEq)]
pub struct SlackReport {
    /// `I^0 - I_l` per PU receiver.
    pub interference: Vec<f64>,
    /// `log2(1 + SINR_k) - R^0` per SU.
    pub rate: Vec<f64>,
    /// `P^0 - sum_k P_k`.
    pub power: f64,
}

impl SlackReport {
    pub fn min(&self) -> f64 {
        self.interference
            .iter()
            .chain(&self.rate)
            .copied()
            .fold(self.power, f64::min)
    }

    pub fn satisfied(&self) -> bool {
        self.min() >= -SLACK_TOL
    }

    pub fn rates_satisfied(&self) -> bool {
        self.rate.iter().all(|&s| s >= -SLACK_TOL)
    }

    pub fn interference_satisfied(&self) -> bool {
        self.interference.iter().all(|&s| s >= -SLACK_TOL)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintFamily {
    Interference,
    Rate,
    Power,
}

/// Why a linear-feasibility problem has no solution, measured at the
/// phase-1 optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct InfeasibilityReport {
    pub blocking: ConstraintFamily,
    pub residual: f64,
    pub interference_weight: f64,
    pub rate_weight: f64,
    pub power_weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    pub p: Vec<f64>,
    pub feasible: bool,
    pub scheme: AllocationScheme,
    /// Margins under the estimated channels.
    pub slack: SlackReport,
    pub infeasibility: Option<InfeasibilityReport>,
}

impl PowerAllocation {
    pub fn total_power(&self) -> f64 {
        self.p.iter().sum()
    }
}

fn require_scheme(beams: &BeamformingSolution, expected: Scheme) -> Result<()> {
    if beams.scheme == expected {
        Ok(())
    } else {
        Err(Error::WrongScheme {
            expected: expected.as_str(),
            got: beams.scheme.as_str(),
        })
    }
}

/// Recomputes every constraint for the powers `p`, from estimated channels
/// when `use_estimates` and from true channels otherwise.
pub fn slack_report(
    real: &ChannelRealization,
    beams: &BeamformingSolution,
    p: &[f64],
    config: &NetworkConfig,
    use_estimates: bool,
) -> Result<SlackReport> {
    let (sinr, interference) = if use_estimates {
        (
            metrics::estimated_sinr(real, &beams.v, &beams.u, p, config)?,
            metrics::estimated_interference_to_pu(real, &beams.v, p, config)?,
        )
    } else {
        (
            metrics::true_sinr(real, &beams.v, &beams.u, p, config)?,
            metrics::true_interference_to_pu(real, &beams.v, p)?,
        )
    };
    Ok(SlackReport {
        interference: interference.iter().map(|i| config.i0 - i).collect(),
        rate: sinr
            .iter()
            .map(|s| s.ln_1p() / std::f64::consts::LN_2 - config.r0)
            .collect(),
        power: config.p0 - p.iter().sum::<f64>(),
    })
}

pub fn verify_allocation(
    real: &ChannelRealization,
    beams: &BeamformingSolution,
    alloc: &PowerAllocation,
    config: &NetworkConfig,
    use_estimates: bool,
) -> Result<SlackReport> {
    slack_report(real, beams, &alloc.p, config, use_estimates)
}

/// Inequality system of the MEB linear-feasibility problem.
///
/// Row labels: `interference_<l>` per PU receiver, `rate_<k>` per SU and a
/// final `power` row.
pub fn lf_meb_system(
    real: &ChannelRealization,
    beams: &BeamformingSolution,
    config: &NetworkConfig,
) -> Result<LinearSystem> {
    require_scheme(beams, Scheme::Meb)?;
    let k = beams.k_su();
    let gamma = config.sinr_threshold();
    let from_pu = metrics::estimated_interference_from_pu(real, &beams.u, config)?;
    let mut sys = LinearSystem::new();

    for l in real.roles.receivers() {
        let row = beams
            .v
            .iter()
            .map(|vk| inner_power(vk, &real.hhat_pu_sbs[l]) + config.sigma2_delta)
            .collect();
        sys.push(format!("interference_{l}"), row, config.i0);
    }
    for kk in 0..k {
        let s2 = beams.sigma2_k1[kk];
        let row = (0..k)
            .map(|j| {
                if j == kk {
                    -s2 / gamma
                } else {
                    s2 * inner_power(&beams.v[kk], &beams.v[j])
                }
            })
            .collect();
        sys.push(format!("rate_{kk}"), row, -(config.sigma2_w + from_pu[kk]));
    }
    sys.push("power", vec![1.0; k], config.p0);
    Ok(sys)
}

fn family_of(label: &str) -> ConstraintFamily {
    if label.starts_with("interference") {
        ConstraintFamily::Interference
    } else if label.starts_with("rate") {
        ConstraintFamily::Rate
    } else {
        ConstraintFamily::Power
    }
}

pub fn solve_lf_meb(
    real: &ChannelRealization,
    beams: &BeamformingSolution,
    config: &NetworkConfig,
) -> Result<PowerAllocation> {
    let sys = lf_meb_system(real, beams, config)?;
    let sol = find_feasible_point(&sys);
    let slack = slack_report(real, beams, &sol.x, config, true)?;
    let feasible = sol.feasible && slack.satisfied();

    let infeasibility = (!feasible).then(|| {
        let mut weights = [0.0; 3];
        for (label, w) in sys.labels.iter().zip(&sol.dual_weights) {
            let idx = match family_of(label) {
                ConstraintFamily::Interference => 0,
                ConstraintFamily::Rate => 1,
                ConstraintFamily::Power => 2,
            };
            weights[idx] += w;
        }
        let families = [
            ConstraintFamily::Interference,
            ConstraintFamily::Rate,
            ConstraintFamily::Power,
        ];
        let (best, _) = weights.iter().enumerate().fold(
            (1, f64::NEG_INFINITY),
            |acc, (i, &w)| if w > acc.1 { (i, w) } else { acc },
        );
        InfeasibilityReport {
            blocking: families[best],
            residual: sol.residual,
            interference_weight: weights[0],
            rate_weight: weights[1],
            power_weight: weights[2],
        }
    });

    Ok(PowerAllocation {
        p: sol.x,
        feasible,
        scheme: AllocationScheme::LfMeb,
        slack,
        infeasibility,
    })
}

/// Largest total power the ZFB linear-feasibility problem admits,
/// `min(P^0, I^0 / sigma2_delta)`; the interference bound is infinite with
/// perfect CSI.
pub fn zfb_power_bound(config: &NetworkConfig) -> f64 {
    if config.sigma2_delta > 0.0 {
        config.p0.min(config.i0 / config.sigma2_delta)
    } else {
        config.p0
    }
}

/// The LF ZFB feasibility test `sum_k P_k <= min(P^0, I^0 / sigma2_delta)`.
pub fn check_zfb_condition(p: &[f64], config: &NetworkConfig) -> bool {
    p.iter().sum::<f64>() <= zfb_power_bound(config)
}

/// Powers giving every SU an estimated rate of exactly `R^0` under ZFB.
pub fn equal_rate_zfb(
    real: &ChannelRealization,
    beams: &BeamformingSolution,
    config: &NetworkConfig,
) -> Result<PowerAllocation> {
    require_scheme(beams, Scheme::Zfb)?;
    if let Some(su) = beams.gain.iter().position(|&g| !(g > 0.0)) {
        return Err(Error::ZeroGain { su });
    }
    let gamma = config.sinr_threshold();
    let from_pu = metrics::estimated_interference_from_pu(real, &beams.u, config)?;
    let p: Vec<f64> = beams
        .gain
        .iter()
        .zip(&from_pu)
        .map(|(g, i)| gamma * (config.sigma2_w + i) / g)
        .collect();
    let feasible = check_zfb_condition(&p, config);
    let slack = slack_report(real, beams, &p, config, true)?;
    Ok(PowerAllocation {
        p,
        feasible,
        scheme: AllocationScheme::LfZfbEqualRate,
        slack,
        infeasibility: None,
    })
}

pub fn solve_lf_zfb(
    real: &ChannelRealization,
    beams: &BeamformingSolution,
    config: &NetworkConfig,
) -> Result<PowerAllocation> {
    equal_rate_zfb(real, beams, config)
}

/// The same power `p_eq` on every stream; feasible when every estimated
/// constraint holds.
pub fn equal_power(
    real: &ChannelRealization,
    beams: &BeamformingSolution,
    p_eq: f64,
    config: &NetworkConfig,
) -> Result<PowerAllocation> {
    let p = vec![p_eq; beams.k_su()];
    let slack = slack_report(real, beams, &p, config, true)?;
    Ok(PowerAllocation {
        p,
        feasible: slack.satisfied(),
        scheme: AllocationScheme::EqualPower,
        slack,
        infeasibility: None,
    })
}
