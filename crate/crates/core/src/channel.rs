//! Rayleigh channel realizations with imperfect PU-side CSI.

use std::ops::Range;

use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::config::NetworkConfig;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// PU index partition: the first `l_tx` indices are transmitters, the next
/// `l_rx` are receivers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PuRoles {
    pub l_tx: usize,
    pub l_rx: usize,
}

impl PuRoles {
    pub fn from_config(config: &NetworkConfig) -> Self {
        Self {
            l_tx: config.l_tx,
            l_rx: config.l_rx,
        }
    }

    pub fn total(&self) -> usize {
        self.l_tx + self.l_rx
    }

    pub fn transmitters(&self) -> Range<usize> {
        0..self.l_tx
    }

    pub fn receivers(&self) -> Range<usize> {
        self.l_tx..self.l_tx + self.l_rx
    }
}

/// One draw of every channel in the network.
///
/// PU-side channels and their estimates are indexed by PU first; SU-side
/// vectors are `[pu][su]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// SBS to SU-k channels, each `M_u x M_b`.
    pub h_su: Vec<CMatrix>,
    /// PU-l to SBS channels, each of length `M_b`.
    pub h_pu_sbs: Vec<CVector>,
    /// PU-l to SU-k channels, each of length `M_u`.
    pub h_pu_su: Vec<Vec<CVector>>,
    pub hhat_pu_sbs: Vec<CVector>,
    pub hhat_pu_su: Vec<Vec<CVector>>,
    pub roles: PuRoles,
}

/// RNG for trial `index` of a run seeded with `master`.
///
/// Each trial owns a distinct ChaCha stream, so trials can be generated in
/// any order or in parallel.
pub fn trial_rng(master: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng
}

/// Draws one `CN(0, variance)` sample: each real part has variance
/// `variance / 2`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let scale = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(scale * re, scale * im)
}

fn complex_normal_vector<R: Rng + ?Sized>(rng: &mut R, len: usize, variance: f64) -> CVector {
    DVector::from_fn(len, |_, _| complex_normal(rng, variance))
}

/// Draws a true channel and its estimate.
///
/// The estimate and the error are independent, `h = hhat + delta`, with
/// `hhat ~ CN(0, sigma2_h - sigma2_delta)` so that `h ~ CN(0, sigma2_h)`.
fn channel_with_estimate<R: Rng + ?Sized>(
    rng: &mut R,
    len: usize,
    sigma2_h: f64,
    sigma2_delta: f64,
) -> (CVector, CVector) {
    let estimate = complex_normal_vector(rng, len, sigma2_h - sigma2_delta);
    let error = complex_normal_vector(rng, len, sigma2_delta);
    let truth = &estimate + &error;
    (truth, estimate)
}

pub fn generate_channels(config: &NetworkConfig, seed: u64) -> ChannelRealization {
    generate_channels_with(config, &mut ChaCha20Rng::seed_from_u64(seed))
}

pub fn generate_channels_with<R: Rng + ?Sized>(config: &NetworkConfig, rng: &mut R) -> ChannelRealization {
    let roles = PuRoles::from_config(config);
    let l = roles.total();

    let h_su = (0..config.k_su)
        .map(|_| DMatrix::from_fn(config.m_u, config.m_b, |_, _| complex_normal(rng, config.sigma2_h)))
        .collect();

    let mut h_pu_sbs = Vec::with_capacity(l);
    let mut hhat_pu_sbs = Vec::with_capacity(l);
    for _ in 0..l {
        let (h, hhat) = channel_with_estimate(rng, config.m_b, config.sigma2_h, config.sigma2_delta);
        h_pu_sbs.push(h);
        hhat_pu_sbs.push(hhat);
    }

    let mut h_pu_su = Vec::with_capacity(l);
    let mut hhat_pu_su = Vec::with_capacity(l);
    for _ in 0..l {
        let (row, row_hat): (Vec<_>, Vec<_>) = (0..config.k_su)
            .map(|_| channel_with_estimate(rng, config.m_u, config.sigma2_h, config.sigma2_delta))
            .unzip();
        h_pu_su.push(row);
        hhat_pu_su.push(row_hat);
    }

    ChannelRealization {
        h_su,
        h_pu_sbs,
        h_pu_su,
        hhat_pu_sbs,
        hhat_pu_su,
        roles,
    }
}

impl ChannelRealization {
    pub fn k_su(&self) -> usize {
        self.h_su.len()
    }

    pub fn m_b(&self) -> usize {
        self.h_su.first().map_or(0, |h| h.ncols())
    }

    pub fn m_u(&self) -> usize {
        self.h_su.first().map_or(0, |h| h.nrows())
    }

    /// True when every array has the shape implied by `config`.
    pub fn matches(&self, config: &NetworkConfig) -> bool {
        let l = config.l_tx + config.l_rx;
        self.roles == PuRoles::from_config(config)
            && self.h_su.len() == config.k_su
            && self
                .h_su
                .iter()
                .all(|h| h.nrows() == config.m_u && h.ncols() == config.m_b)
            && self.h_pu_sbs.len() == l
            && self.hhat_pu_sbs.len() == l
            && self
                .h_pu_sbs
                .iter()
                .chain(&self.hhat_pu_sbs)
                .all(|h| h.len() == config.m_b)
            && self.h_pu_su.len() == l
            && self.hhat_pu_su.len() == l
            && self
                .h_pu_su
                .iter()
                .chain(&self.hhat_pu_su)
                .all(|row| row.len() == config.k_su && row.iter().all(|h| h.len() == config.m_u))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_power<'a>(vs: impl Iterator<Item = &'a C64>) -> (f64, usize) {
        let mut sum = 0.0;
        let mut n = 0;
        for v in vs {
            sum += v.norm_sqr();
            n += 1;
        }
        (sum / n as f64, n)
    }

    #[test]
    fn shapes_match_config() {
        let c = NetworkConfig::baseline();
        let r = generate_channels(&c, 7);
        assert!(r.matches(&c));
        assert_eq!(r.m_b(), 64);
        assert_eq!(r.m_u(), 4);
        assert_eq!(r.roles.receivers(), 1..2);
    }

    #[test]
    fn deterministic_per_seed() {
        let c = NetworkConfig::baseline();
        assert_eq!(generate_channels(&c, 11), generate_channels(&c, 11));
        assert_ne!(generate_channels(&c, 11), generate_channels(&c, 12));
        assert_eq!(trial_rng(3, 5).random::<u64>(), trial_rng(3, 5).random::<u64>());
        assert_ne!(trial_rng(3, 5).random::<u64>(), trial_rng(3, 6).random::<u64>());
    }

    #[test]
    fn channel_variance_close_to_nominal() {
        let mut c = NetworkConfig::baseline();
        c.m_b = 256;
        let r = generate_channels(&c, 1);
        let (var, n) = mean_power(r.h_su.iter().flat_map(|h| h.iter()));
        assert!(n >= 10_000);
        assert!((var - 1.0).abs() < 0.05, "{var}");

        // Errors: pool over many draws of the PU channels.
        let mut c = NetworkConfig::baseline();
        c.sigma2_delta = 0.1;
        c.l_tx = 80;
        c.l_rx = 80;
        let r = generate_channels(&c, 2);
        let err: Vec<C64> = r
            .h_pu_sbs
            .iter()
            .zip(&r.hhat_pu_sbs)
            .flat_map(|(h, hh)| (h - hh).iter().copied().collect::<Vec<_>>())
            .collect();
        let (var, n) = mean_power(err.iter());
        assert!(n >= 10_000);
        assert!((var - 0.1).abs() < 0.1 * 0.05, "{var}");
        let (var, _) = mean_power(r.h_pu_sbs.iter().flat_map(|h| h.iter()));
        assert!((var - 1.0).abs() < 0.05, "{var}");
    }

    #[test]
    fn perfect_csi_estimates_are_exact() {
        let mut c = NetworkConfig::baseline();
        c.sigma2_delta = 0.0;
        let r = generate_channels(&c, 9);
        assert_eq!(r.h_pu_sbs, r.hhat_pu_sbs);
        assert_eq!(r.h_pu_su, r.hhat_pu_su);
    }
}
