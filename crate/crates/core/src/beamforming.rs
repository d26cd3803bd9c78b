//! Maximum eigenmode (MEB) and zero-forcing (ZFB) beamforming.
//!
//! Both schemes receive on the principal left singular vector of `H_k`.
//! MEB transmits on the principal right singular vector; ZFB transmits on the
//! normalized columns of `G (G^H G)^{-1}`, where `G` stacks the equivalent SU
//! channels `g_k = H_k^H u_k` and the estimated channels to the PU receivers.

use std::fmt;
use std::fmt::Write as _;

use nalgebra::{Complex, DMatrix};

use crate::channel::{CMatrix, CVector, ChannelRealization, C64};
use crate::error::{Error, Result};
use crate::metrics::inner_power;

/// Smallest admissible ratio between the extreme singular values of `G`.
pub const ZF_CONDITION_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Meb,
    Zfb,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Meb => "MEB",
            Scheme::Zfb => "ZFB",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "MEB" => Some(Scheme::Meb),
            "ZFB" | "ZF" => Some(Scheme::Zfb),
            _ => None,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Beams for all SUs plus the per-link gains the power allocation needs.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingSolution {
    pub scheme: Scheme,
    /// Unit-norm transmit beams, length `M_b`.
    pub v: Vec<CVector>,
    /// Unit-norm receive beams, length `M_u`.
    pub u: Vec<CVector>,
    /// Squared principal singular value of each `H_k`.
    pub sigma2_k1: Vec<f64>,
    /// `|u_k^H H_k v_k|^2`.
    pub gain: Vec<f64>,
    /// Principal right singular vectors `v_{k,1}` (equal to `v` under MEB).
    pub v_principal: Vec<CVector>,
}

/// Principal singular triple `(sigma^2, u, v)` of `h`.
///
/// The phase is fixed by making the largest-magnitude entry of `v` real and
/// positive; `u` is rotated by the same factor so `u^H h v` stays real.
pub fn principal_singular_pair(h: &CMatrix) -> (f64, CVector, CVector) {
    let svd = h.clone().svd(true, true);
    let (idx, &sigma) = svd
        .singular_values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("channel matrix has at least one singular value");
    let u_mat = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut u = u_mat.column(idx).into_owned();
    let mut v = v_t.row(idx).adjoint();

    let (imax, _) = v
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
        .expect("nonempty vector");
    let pivot = v[imax];
    if pivot.norm() > 0.0 {
        let rot = pivot.conj() / pivot.norm();
        v *= rot;
        u *= rot;
    }
    // Polish the normalization left over by the decomposition.
    v /= Complex::from(v.norm());
    u /= Complex::from(u.norm());
    (sigma * sigma, u, v)
}

pub fn compute_meb(real: &ChannelRealization) -> BeamformingSolution {
    let mut sol = BeamformingSolution {
        scheme: Scheme::Meb,
        v: Vec::with_capacity(real.k_su()),
        u: Vec::with_capacity(real.k_su()),
        sigma2_k1: Vec::with_capacity(real.k_su()),
        gain: Vec::with_capacity(real.k_su()),
        v_principal: Vec::with_capacity(real.k_su()),
    };
    for h in &real.h_su {
        let (s2, u, v) = principal_singular_pair(h);
        sol.sigma2_k1.push(s2);
        sol.gain.push(s2);
        sol.u.push(u);
        sol.v_principal.push(v.clone());
        sol.v.push(v);
    }
    sol
}

pub fn compute_zfb(real: &ChannelRealization) -> Result<BeamformingSolution> {
    let k = real.k_su();
    let m_b = real.m_b();
    let receivers = real.roles.receivers();
    let required = k - 1 + receivers.len();
    if m_b <= required {
        return Err(Error::AntennaShortage { m_b, required });
    }

    let mut sigma2_k1 = Vec::with_capacity(k);
    let mut u = Vec::with_capacity(k);
    let mut v_principal = Vec::with_capacity(k);
    let n_cols = k + receivers.len();
    let mut g = DMatrix::<C64>::zeros(m_b, n_cols);
    for (idx, h) in real.h_su.iter().enumerate() {
        let (s2, uk, vk) = principal_singular_pair(h);
        g.set_column(idx, &(h.adjoint() * &uk));
        sigma2_k1.push(s2);
        u.push(uk);
        v_principal.push(vk);
    }
    for (offset, l) in receivers.enumerate() {
        g.set_column(k + offset, &real.hhat_pu_sbs[l]);
    }

    // G (G^H G)^{-1} = U S^{-1} V^H from the thin SVD of G.
    let svd = g.svd(true, true);
    let s = &svd.singular_values;
    let s_max = s.max();
    let s_min = s.min();
    let ratio = if s_max > 0.0 { s_min / s_max } else { 0.0 };
    if !(ratio >= ZF_CONDITION_FLOOR) {
        return Err(Error::IllConditioned { ratio });
    }
    let mut left = svd.u.expect("left singular vectors requested");
    for (j, &sj) in s.iter().enumerate() {
        left.column_mut(j).scale_mut(1.0 / sj);
    }
    let pinv_cols = left * svd.v_t.expect("right singular vectors requested");

    let mut v = Vec::with_capacity(k);
    let mut gain = Vec::with_capacity(k);
    for idx in 0..k {
        let col = pinv_cols.column(idx);
        let vk = col / Complex::from(col.norm());
        gain.push(sigma2_k1[idx] * inner_power(&v_principal[idx], &vk));
        v.push(vk);
    }

    Ok(BeamformingSolution {
        scheme: Scheme::Zfb,
        v,
        u,
        sigma2_k1,
        gain,
        v_principal,
    })
}

pub fn compute(real: &ChannelRealization, scheme: Scheme) -> Result<BeamformingSolution> {
    match scheme {
        Scheme::Meb => Ok(compute_meb(real)),
        Scheme::Zfb => compute_zfb(real),
    }
}

/// Per-SU nulling residuals: `max_l |v_k^H hhat_l0|^2` over PU receivers and
/// `max_{j != k} |u_k^H H_k v_j|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct NullingResiduals {
    pub pu: Vec<f64>,
    pub inter_stream: Vec<f64>,
}

impl BeamformingSolution {
    pub fn k_su(&self) -> usize {
        self.v.len()
    }

    pub fn residuals(&self, real: &ChannelRealization) -> NullingResiduals {
        let k = self.k_su();
        let pu = self
            .v
            .iter()
            .map(|vk| {
                real.roles
                    .receivers()
                    .map(|l| inner_power(vk, &real.hhat_pu_sbs[l]))
                    .fold(0.0, f64::max)
            })
            .collect();
        let inter_stream = (0..k)
            .map(|kk| {
                let g = real.h_su[kk].adjoint() * &self.u[kk];
                (0..k)
                    .filter(|&j| j != kk)
                    .map(|j| g.dotc(&self.v[j]).norm_sqr())
                    .fold(0.0, f64::max)
            })
            .collect();
        NullingResiduals { pu, inter_stream }
    }

    /// Diagnostic CSV, one row per SU.
    pub fn to_csv(&self, real: &ChannelRealization) -> String {
        let res = self.residuals(real);
        let mut out = String::from("su,scheme,gain,sigma2_k1,pu_null_residual,inter_stream_residual\n");
        for k in 0..self.k_su() {
            let _ = writeln!(
                out,
                "{k},{},{:e},{:e},{:e},{:e}",
                self.scheme, self.gain[k], self.sigma2_k1[k], res.pu[k], res.inter_stream[k]
            );
        }
        out
    }
}
