//! Seeded, parallel Monte Carlo evaluation of the probability of serving all
//! K SUs, empirical CDFs, and the maximum-SU search.
//!
//! Trial `i` draws its channels from [`trial_rng`]`(seed, i)`, so results do
//! not depend on the number of worker threads. Outcomes are merged in trial
//! order.

use std::fmt;

use rayon::prelude::*;

use crate::analytics::optimize_equal_power;
use crate::beamforming::{self, Scheme};
use crate::channel::{generate_channels_with, trial_rng};
use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::metrics;
use crate::power::{self, PowerAllocation};

/// Cap on the number of SUs explored by [`max_sus_at_confidence`].
pub const MAX_SUS_CAP: usize = 64;
/// Number of per-trial error messages kept in an [`ExperimentResult`].
pub const MAX_DIAGNOSTICS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Policy {
    /// Linear-feasibility allocation of the scheme (LP for MEB, equal rate
    /// for ZFB).
    Lf,
    EqualPower(f64),
    /// Equal power at the analytical optimum, computed once per config.
    EqualPowerOpt,
}

impl Policy {
    pub fn label(&self) -> &'static str {
        match self {
            Policy::Lf => "LF",
            Policy::EqualPower(_) => "EQUAL_POWER",
            Policy::EqualPowerOpt => "EQUAL_POWER_OPT",
        }
    }

    /// Accepts `LF`, `EQUAL_POWER_OPT` and `EQUAL_POWER:<linear power>`.
    pub fn parse(s: &str) -> Option<Self> {
        let upper = s.trim().to_ascii_uppercase();
        match upper.as_str() {
            "LF" => Some(Policy::Lf),
            "EQUAL_POWER_OPT" | "EQ_OPT" => Some(Policy::EqualPowerOpt),
            _ => {
                let (name, value) = upper.split_once(':')?;
                if name != "EQUAL_POWER" && name != "EQ" {
                    return None;
                }
                let p: f64 = value.trim().parse().ok()?;
                (p > 0.0 && p.is_finite()).then_some(Policy::EqualPower(p))
            }
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Policy::EqualPower(p) => write!(f, "EQUAL_POWER:{p:e}"),
            other => f.write_str(other.label()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub index: usize,
    /// Every estimated constraint holds.
    pub served: bool,
    /// Every constraint holds on the true channels.
    pub served_true: bool,
    pub sinr_est: Vec<f64>,
    pub sinr_true: Vec<f64>,
    pub int_to_pu_true: Vec<f64>,
    pub total_power: f64,
    pub error: Option<Error>,
}

impl TrialOutcome {
    fn failed(index: usize, error: Error) -> Self {
        Self {
            index,
            served: false,
            served_true: false,
            sinr_est: Vec::new(),
            sinr_true: Vec::new(),
            int_to_pu_true: Vec::new(),
            total_power: 0.0,
            error: Some(error),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub config: NetworkConfig,
    pub scheme: Scheme,
    pub policy: Policy,
    /// Equal power actually used, when the policy has one.
    pub p_eq: Option<f64>,
    pub n_trials: usize,
    pub seed: u64,
    pub n_served: usize,
    pub n_served_true: usize,
    /// Trials served on the estimates but violating a true constraint.
    pub n_csi_violations: usize,
    pub n_errors: usize,
    /// First few per-trial errors as `(trial index, error)`.
    pub diagnostics: Vec<(usize, Error)>,
    pub p_served: f64,
    pub stderr: f64,
    pub p_served_true: f64,
    /// Sorted pooled samples over trials and SUs.
    pub sinr_est: Vec<f64>,
    pub sinr_true: Vec<f64>,
    /// Sorted pooled true interference over trials and PU receivers.
    pub int_to_pu_true: Vec<f64>,
}

fn allocate(
    real: &crate::channel::ChannelRealization,
    beams: &beamforming::BeamformingSolution,
    policy: Policy,
    p_eq: Option<f64>,
    config: &NetworkConfig,
) -> Result<PowerAllocation> {
    match (policy, beams.scheme) {
        (Policy::Lf, Scheme::Meb) => power::solve_lf_meb(real, beams, config),
        (Policy::Lf, Scheme::Zfb) => power::solve_lf_zfb(real, beams, config),
        _ => power::equal_power(real, beams, p_eq.unwrap_or(0.0), config),
    }
}

/// Runs one trial. Deterministic in `(config, scheme, policy, seed, index)`.
pub fn run_trial(
    config: &NetworkConfig,
    scheme: Scheme,
    policy: Policy,
    p_eq: Option<f64>,
    seed: u64,
    index: usize,
) -> TrialOutcome {
    let mut rng = trial_rng(seed, index as u64);
    let real = generate_channels_with(config, &mut rng);
    let run = || -> Result<TrialOutcome> {
        let beams = beamforming::compute(&real, scheme)?;
        let alloc = allocate(&real, &beams, policy, p_eq, config)?;
        let served = alloc.feasible && alloc.slack.satisfied();
        let truth = power::slack_report(&real, &beams, &alloc.p, config, false)?;
        Ok(TrialOutcome {
            index,
            served,
            served_true: truth.satisfied(),
            sinr_est: metrics::estimated_sinr(&real, &beams.v, &beams.u, &alloc.p, config)?,
            sinr_true: metrics::true_sinr(&real, &beams.v, &beams.u, &alloc.p, config)?,
            int_to_pu_true: metrics::true_interference_to_pu(&real, &beams.v, &alloc.p)?,
            total_power: alloc.total_power(),
            error: None,
        })
    };
    run().unwrap_or_else(|e| TrialOutcome::failed(index, e))
}

/// Equal power implied by `policy` for `config`.
pub fn resolve_equal_power(config: &NetworkConfig, scheme: Scheme, policy: Policy) -> Result<Option<f64>> {
    match policy {
        Policy::Lf => Ok(None),
        Policy::EqualPower(p) => {
            if p > 0.0 && p.is_finite() {
                Ok(Some(p))
            } else {
                Err(Error::InvalidConfig(format!("equal power must be positive, got {p}")))
            }
        }
        Policy::EqualPowerOpt => Ok(Some(optimize_equal_power(scheme, config)?.p_eq)),
    }
}

pub fn run_trials(
    config: &NetworkConfig,
    scheme: Scheme,
    policy: Policy,
    n_trials: usize,
    seed: u64,
) -> Result<ExperimentResult> {
    config.validate()?;
    if n_trials == 0 {
        return Err(Error::InvalidConfig("n_trials must be at least 1".into()));
    }
    let p_eq = resolve_equal_power(config, scheme, policy)?;
    let outcomes: Vec<TrialOutcome> = (0..n_trials)
        .into_par_iter()
        .map(|i| run_trial(config, scheme, policy, p_eq, seed, i))
        .collect();
    Ok(summarize(config, scheme, policy, p_eq, seed, &outcomes))
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn summarize(
    config: &NetworkConfig,
    scheme: Scheme,
    policy: Policy,
    p_eq: Option<f64>,
    seed: u64,
    outcomes: &[TrialOutcome],
) -> ExperimentResult {
    let n = outcomes.len();
    let n_served = outcomes.iter().filter(|o| o.served).count();
    let n_served_true = outcomes.iter().filter(|o| o.served_true).count();
    let n_csi_violations = outcomes.iter().filter(|o| o.served && !o.served_true).count();
    let errors: Vec<(usize, Error)> = outcomes
        .iter()
        .filter_map(|o| o.error.clone().map(|e| (o.index, e)))
        .collect();
    let p = n_served as f64 / n as f64;
    ExperimentResult {
        config: config.clone(),
        scheme,
        policy,
        p_eq,
        n_trials: n,
        seed,
        n_served,
        n_served_true,
        n_csi_violations,
        n_errors: errors.len(),
        diagnostics: errors.into_iter().take(MAX_DIAGNOSTICS).collect(),
        p_served: p,
        stderr: (p * (1.0 - p) / n as f64).sqrt(),
        p_served_true: n_served_true as f64 / n as f64,
        sinr_est: sorted(outcomes.iter().flat_map(|o| o.sinr_est.iter().copied()).collect()),
        sinr_true: sorted(outcomes.iter().flat_map(|o| o.sinr_true.iter().copied()).collect()),
        int_to_pu_true: sorted(outcomes.iter().flat_map(|o| o.int_to_pu_true.iter().copied()).collect()),
    }
}

/// Right-continuous empirical CDF.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySamples);
        }
        if let Some(bad) = samples.iter().find(|x| x.is_nan()) {
            return Err(Error::Domain(format!("sample {bad} is not a number")));
        }
        Ok(Self {
            sorted: sorted(samples.to_vec()),
        })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    /// Fraction of samples `<= x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s <= x) as f64 / self.sorted.len() as f64
    }

    /// `sup_x |F_n(x) - F(x)|` for a continuous (or right-continuous) `F`.
    pub fn ks_distance<F>(&self, mut cdf: F) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let n = self.sorted.len() as f64;
        let mut d: f64 = 0.0;
        let mut i = 0;
        while i < self.sorted.len() {
            let x = self.sorted[i];
            let mut j = i;
            while j < self.sorted.len() && self.sorted[j] == x {
                j += 1;
            }
            let f = cdf(x)?;
            d = d.max((f - i as f64 / n).abs()).max((j as f64 / n - f).abs());
            i = j;
        }
        Ok(d)
    }

    /// Two-sample KS distance.
    pub fn ks_two_sample(&self, other: &EmpiricalCdf) -> f64 {
        self.sorted
            .iter()
            .chain(&other.sorted)
            .map(|&x| (self.eval(x) - other.eval(x)).abs())
            .fold(0.0, f64::max)
    }
}

pub fn empirical_cdf(samples: &[f64]) -> Result<EmpiricalCdf> {
    EmpiricalCdf::new(samples)
}

/// Largest K with estimated `p_served >= confidence` at one config point.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxSusPoint {
    pub value: f64,
    pub max_k: usize,
    /// `p_served` at `max_k` (`None` when `max_k == 0`).
    pub p_served: Option<f64>,
    /// Number of `run_trials` calls made for this point.
    pub evaluations: usize,
}

/// Parameter swept by [`max_sus_at_confidence`].
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub key: String,
    pub values: Vec<f64>,
}

impl SweepAxis {
    pub fn new(key: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            key: key.into(),
            values,
        }
    }

    /// Applies one value to a copy of `base`.
    pub fn apply(&self, base: &NetworkConfig, value: f64) -> Result<NetworkConfig> {
        if !value.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "sweep value {value} for `{}` is not finite",
                self.key
            )));
        }
        let mut c = base.clone();
        c.set(&self.key, &format!("{value:e}"))?;
        Ok(c)
    }
}

/// Largest K such that trials can run for `scheme`.
pub fn k_upper_limit(config: &NetworkConfig, scheme: Scheme) -> usize {
    let limit = match scheme {
        Scheme::Meb => config.m_b,
        Scheme::Zfb => config.m_b.saturating_sub(config.l_rx),
    };
    limit.min(MAX_SUS_CAP)
}

fn serves(
    config: &NetworkConfig,
    scheme: Scheme,
    policy: Policy,
    k: usize,
    n_trials: usize,
    seed: u64,
    confidence: f64,
) -> Result<(bool, f64)> {
    let mut c = config.clone();
    c.k_su = k;
    let p = match run_trials(&c, scheme, policy, n_trials, seed) {
        Ok(r) => r.p_served,
        // The equal-power model has no solution for this K.
        Err(Error::Domain(_)) => 0.0,
        Err(e) => return Err(e),
    };
    Ok((p >= confidence, p))
}

/// Maximum number of SUs served with probability at least `confidence`.
///
/// For each axis value, K is searched over `1..=k_upper_limit` by doubling
/// and then bisection, assuming `p_served` is nonincreasing in K. Every K
/// uses the same seed.
pub fn max_sus_at_confidence(
    base: &NetworkConfig,
    scheme: Scheme,
    policy: Policy,
    confidence: f64,
    axis: &SweepAxis,
    n_trials: usize,
    seed: u64,
) -> Result<Vec<MaxSusPoint>> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "confidence must lie in (0, 1), got {confidence}"
        )));
    }
    let mut table = Vec::with_capacity(axis.values.len());
    for &value in &axis.values {
        let config = axis.apply(base, value)?;
        let mut probe = config.clone();
        probe.k_su = 1;
        probe.validate()?;
        let limit = k_upper_limit(&config, scheme);
        let mut evaluations = 0;
        let mut eval = |k: usize| {
            evaluations += 1;
            serves(&config, scheme, policy, k, n_trials, seed, confidence)
        };

        let mut good = 0;
        let mut good_p = None;
        let mut bad = limit + 1;
        let mut k = 1;
        while k <= limit {
            let (ok, p) = eval(k)?;
            if ok {
                good = k;
                good_p = Some(p);
                if k == limit {
                    break;
                }
                k = (2 * k).min(limit);
            } else {
                bad = k;
                break;
            }
        }
        while bad - good > 1 {
            let mid = good + (bad - good) / 2;
            let (ok, p) = eval(mid)?;
            if ok {
                good = mid;
                good_p = Some(p);
            } else {
                bad = mid;
            }
        }
        table.push(MaxSusPoint {
            value,
            max_k: good,
            p_served: good_p,
            evaluations,
        });
    }
    Ok(table)
}

/// Direction in which max-K should move along an axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trend {
    NonIncreasing,
    NonDecreasing,
}

/// Expected trend of max-K for the standard constraint axes.
pub fn expected_trend(key: &str) -> Option<Trend> {
    match key {
        "r0" => Some(Trend::NonIncreasing),
        "i0" | "i0_db" | "p0" | "p0_db" => Some(Trend::NonDecreasing),
        _ => None,
    }
}

/// Whether a table ordered by ascending axis value follows `trend`.
pub fn follows_trend(table: &[MaxSusPoint], trend: Trend) -> bool {
    let mut rows: Vec<&MaxSusPoint> = table.iter().collect();
    rows.sort_by(|a, b| a.value.total_cmp(&b.value));
    rows.windows(2).all(|w| match trend {
        Trend::NonIncreasing => w[1].max_k <= w[0].max_k,
        Trend::NonDecreasing => w[1].max_k >= w[0].max_k,
    })
}
