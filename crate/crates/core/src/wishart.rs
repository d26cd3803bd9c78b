//! Mean of the largest eigenvalue of a complex Wishart matrix `H H^H`.
//!
//! `H` is `M_u x M_b` with i.i.d. `CN(0, 1)` entries. The mean is estimated
//! once per `(M_u, M_b)` by Monte Carlo and kept in a process-wide cache;
//! other channel variances scale it linearly. The cache can be persisted as
//! plain text lines `m_u m_b mean stderr n_samples`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::channel::{complex_normal, trial_rng, C64};
use crate::error::{Error, Result};

pub const DEFAULT_SAMPLES: usize = 100_000;
const CHUNK: usize = 1_000;
const SEED_BASE: u64 = 0x005e_ed0f_1a3b_5c7d;

/// Estimated largest-eigenvalue mean for unit channel variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WishartMean {
    pub m_u: usize,
    pub m_b: usize,
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: usize,
}

/// Largest eigenvalue of `H H^H`.
pub fn largest_eigenvalue(h: &DMatrix<C64>) -> f64 {
    if h.nrows() == 1 {
        return h.norm_squared();
    }
    let gram = h * h.adjoint();
    gram.symmetric_eigenvalues().max()
}

/// Monte Carlo estimate of `E[lambda_max(H H^H)]` with `n_samples` draws.
pub fn estimate_max_eig(m_u: usize, m_b: usize, n_samples: usize, seed: u64) -> WishartMean {
    let chunks = n_samples.div_ceil(CHUNK);
    let partial: Vec<(f64, f64, usize)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = trial_rng(seed, c as u64);
            let count = CHUNK.min(n_samples - c * CHUNK);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..count {
                let h = DMatrix::from_fn(m_u, m_b, |_, _| complex_normal(&mut rng, 1.0));
                let lam = largest_eigenvalue(&h);
                sum += lam;
                sum_sq += lam * lam;
            }
            (sum, sum_sq, count)
        })
        .collect();
    let (sum, sum_sq, n) = partial
        .iter()
        .fold((0.0, 0.0, 0usize), |acc, p| (acc.0 + p.0, acc.1 + p.1, acc.2 + p.2));
    let nf = n as f64;
    let mean = sum / nf;
    let var = ((sum_sq - nf * mean * mean) / (nf - 1.0).max(1.0)).max(0.0);
    WishartMean {
        m_u,
        m_b,
        mean,
        stderr: (var / nf).sqrt(),
        n_samples: n,
    }
}

type Slot = Arc<OnceLock<WishartMean>>;

fn cache() -> &'static Mutex<HashMap<(usize, usize), Slot>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Slot>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn slot(m_u: usize, m_b: usize) -> Slot {
    let mut map = cache().lock().unwrap_or_else(|e| e.into_inner());
    map.entry((m_u, m_b)).or_default().clone()
}

/// Cached unit-variance estimate for `(m_u, m_b)`; computed on first use.
pub fn cached_mean(m_u: usize, m_b: usize) -> WishartMean {
    *slot(m_u, m_b).get_or_init(|| {
        if m_u == 1 {
            // Chi-square with 2 M_b degrees of freedom, scaled by 1/2.
            WishartMean {
                m_u,
                m_b,
                mean: m_b as f64,
                stderr: 0.0,
                n_samples: 0,
            }
        } else {
            let seed = SEED_BASE ^ ((m_u as u64) << 32 | m_b as u64);
            estimate_max_eig(m_u, m_b, DEFAULT_SAMPLES, seed)
        }
    })
}

/// `E[sigma_{k,1}^2]` for an `m_u x m_b` channel with entry variance
/// `sigma2_h`.
pub fn expected_max_eig(m_u: usize, m_b: usize, sigma2_h: f64) -> Result<f64> {
    if m_u == 0 || m_u > m_b {
        return Err(Error::Domain(format!("need 1 <= m_u <= m_b, got m_u={m_u}, m_b={m_b}")));
    }
    if !(sigma2_h >= 0.0) || !sigma2_h.is_finite() {
        return Err(Error::Domain(format!(
            "channel variance must be finite and nonnegative, got {sigma2_h}"
        )));
    }
    Ok(sigma2_h * cached_mean(m_u, m_b).mean)
}

pub fn format_cache_lines(entries: &[WishartMean]) -> String {
    let mut out = String::new();
    for e in entries {
        let _ = writeln!(out, "{} {} {:e} {:e} {}", e.m_u, e.m_b, e.mean, e.stderr, e.n_samples);
    }
    out
}

pub fn parse_cache_lines(text: &str) -> Result<Vec<WishartMean>> {
    let mut entries = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        let bad = || Error::ParseValue {
            key: "wishart cache".into(),
            value: line.to_string(),
        };
        if f.len() != 5 {
            return Err(bad());
        }
        entries.push(WishartMean {
            m_u: f[0].parse().map_err(|_| bad())?,
            m_b: f[1].parse().map_err(|_| bad())?,
            mean: f[2].parse().map_err(|_| bad())?,
            stderr: f[3].parse().map_err(|_| bad())?,
            n_samples: f[4].parse().map_err(|_| bad())?,
        });
    }
    Ok(entries)
}

/// Seeds the cache from a file. Entries already computed in this process
/// are kept. Returns the number of entries read.
pub fn load_cache(path: impl AsRef<Path>) -> Result<usize> {
    let entries = parse_cache_lines(&std::fs::read_to_string(path)?)?;
    for e in &entries {
        let _ = slot(e.m_u, e.m_b).set(*e);
    }
    Ok(entries.len())
}

/// Every computed entry, sorted by `(m_u, m_b)`.
pub fn cache_entries() -> Vec<WishartMean> {
    let map = cache().lock().unwrap_or_else(|e| e.into_inner());
    let mut entries: Vec<WishartMean> = map.values().filter_map(|s| s.get().copied()).collect();
    entries.sort_by_key(|e| (e.m_u, e.m_b));
    entries
}

pub fn save_cache(path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_cache_lines(&cache_entries()))?;
    Ok(())
}
