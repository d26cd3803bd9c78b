//! Interference and SINR evaluators.
//!
//! "True" evaluators use the real PU channels; "estimated" evaluators use the
//! SBS/SU estimates and add the `sigma2_delta` error floor per PU link.

use crate::channel::{CVector, ChannelRealization};
use crate::config::NetworkConfig;
use crate::error::{Error, Result};

/// `|a^H b|^2`.
pub fn inner_power(a: &CVector, b: &CVector) -> f64 {
    a.dotc(b).norm_sqr()
}

/// `|u^H H v|^2`.
fn bilinear_power(u: &CVector, h: &crate::channel::CMatrix, v: &CVector) -> f64 {
    u.dotc(&(h * v)).norm_sqr()
}

fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { what, expected, got })
    }
}

fn check_beams(real: &ChannelRealization, v: &[CVector], p: &[f64]) -> Result<()> {
    let k = real.k_su();
    check_len("transmit beams", k, v.len())?;
    check_len("powers", k, p.len())?;
    for beam in v {
        check_len("transmit beam length", real.m_b(), beam.len())?;
    }
    Ok(())
}

fn check_receive(real: &ChannelRealization, u: &[CVector]) -> Result<()> {
    check_len("receive beams", real.k_su(), u.len())?;
    for beam in u {
        check_len("receive beam length", real.m_u(), beam.len())?;
    }
    Ok(())
}

/// Interference at each PU receiver, `sum_k P_k |v_k^H h_l0|^2`.
pub fn true_interference_to_pu(real: &ChannelRealization, v: &[CVector], p: &[f64]) -> Result<Vec<f64>> {
    check_beams(real, v, p)?;
    Ok(real
        .roles
        .receivers()
        .map(|l| {
            let h = &real.h_pu_sbs[l];
            v.iter().zip(p).map(|(vk, &pk)| pk * inner_power(vk, h)).sum()
        })
        .collect())
}

/// Expected interference given the estimates,
/// `sum_k P_k (|v_k^H hhat_l0|^2 + sigma2_delta)`.
pub fn estimated_interference_to_pu(
    real: &ChannelRealization,
    v: &[CVector],
    p: &[f64],
    config: &NetworkConfig,
) -> Result<Vec<f64>> {
    check_beams(real, v, p)?;
    Ok(real
        .roles
        .receivers()
        .map(|l| {
            let h = &real.hhat_pu_sbs[l];
            v.iter()
                .zip(p)
                .map(|(vk, &pk)| pk * (inner_power(vk, h) + config.sigma2_delta))
                .sum()
        })
        .collect())
}

/// Estimated interference from the PU transmitters at SU-k,
/// `sum_l P_p (|u_k^H hhat_lk|^2 + sigma2_delta)`.
pub fn estimated_interference_from_pu(
    real: &ChannelRealization,
    u: &[CVector],
    config: &NetworkConfig,
) -> Result<Vec<f64>> {
    check_receive(real, u)?;
    Ok(u.iter()
        .enumerate()
        .map(|(k, uk)| {
            real.roles
                .transmitters()
                .map(|l| config.p_p * (inner_power(uk, &real.hhat_pu_su[l][k]) + config.sigma2_delta))
                .sum()
        })
        .collect())
}

/// True interference from the PU transmitters at SU-k.
pub fn true_interference_from_pu(real: &ChannelRealization, u: &[CVector], config: &NetworkConfig) -> Result<Vec<f64>> {
    check_receive(real, u)?;
    Ok(u.iter()
        .enumerate()
        .map(|(k, uk)| {
            real.roles
                .transmitters()
                .map(|l| config.p_p * inner_power(uk, &real.h_pu_su[l][k]))
                .sum()
        })
        .collect())
}

/// Inter-stream interference `sum_{j != k} P_j |u_k^H H_k v_j|^2` at each SU.
pub fn inter_stream_interference(
    real: &ChannelRealization,
    v: &[CVector],
    u: &[CVector],
    p: &[f64],
) -> Result<Vec<f64>> {
    check_beams(real, v, p)?;
    check_receive(real, u)?;
    Ok((0..real.k_su())
        .map(|k| {
            let row = real.h_su[k].adjoint() * &u[k];
            (0..real.k_su())
                .filter(|&j| j != k)
                .map(|j| p[j] * row.dotc(&v[j]).norm_sqr())
                .sum()
        })
        .collect())
}

fn sinr_with(
    real: &ChannelRealization,
    v: &[CVector],
    u: &[CVector],
    p: &[f64],
    config: &NetworkConfig,
    pu_interference: Vec<f64>,
) -> Result<Vec<f64>> {
    let inter = inter_stream_interference(real, v, u, p)?;
    Ok((0..real.k_su())
        .map(|k| {
            let signal = p[k] * bilinear_power(&u[k], &real.h_su[k], &v[k]);
            signal / (config.sigma2_w + pu_interference[k] + inter[k])
        })
        .collect())
}

/// SINR at each SU as seen with true channels.
pub fn true_sinr(
    real: &ChannelRealization,
    v: &[CVector],
    u: &[CVector],
    p: &[f64],
    config: &NetworkConfig,
) -> Result<Vec<f64>> {
    let pu = true_interference_from_pu(real, u, config)?;
    sinr_with(real, v, u, p, config, pu)
}

/// SINR at each SU as predicted by the SBS from its estimates.
pub fn estimated_sinr(
    real: &ChannelRealization,
    v: &[CVector],
    u: &[CVector],
    p: &[f64],
    config: &NetworkConfig,
) -> Result<Vec<f64>> {
    let pu = estimated_interference_from_pu(real, u, config)?;
    sinr_with(real, v, u, p, config, pu)
}

/// Every link quantity for one realization, beam set and power vector.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkMetrics {
    pub sinr_true: Vec<f64>,
    pub sinr_est: Vec<f64>,
    pub int_to_pu_true: Vec<f64>,
    pub int_to_pu_est: Vec<f64>,
    pub int_from_pu_est: Vec<f64>,
    pub int_inter_stream: Vec<f64>,
}

impl LinkMetrics {
    pub fn evaluate(
        real: &ChannelRealization,
        v: &[CVector],
        u: &[CVector],
        p: &[f64],
        config: &NetworkConfig,
    ) -> Result<Self> {
        Ok(Self {
            sinr_true: true_sinr(real, v, u, p, config)?,
            sinr_est: estimated_sinr(real, v, u, p, config)?,
            int_to_pu_true: true_interference_to_pu(real, v, p)?,
            int_to_pu_est: estimated_interference_to_pu(real, v, p, config)?,
            int_from_pu_est: estimated_interference_from_pu(real, u, config)?,
            int_inter_stream: inter_stream_interference(real, v, u, p)?,
        })
    }
}
