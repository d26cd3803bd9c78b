//! Network configuration and its flat `key = value` text form.
//!
//! All quantities are stored as linear powers. The text form additionally
//! accepts `p0_db`, `i0_db` and `pp_db`, converted with `10^(dB/10)`.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Scalar parameters of the secondary network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    /// SBS antenna count.
    pub m_b: usize,
    /// Antennas per SU.
    pub m_u: usize,
    /// Number of SUs.
    pub k_su: usize,
    /// Number of PU transmitters.
    pub l_tx: usize,
    /// Number of PU receivers.
    pub l_rx: usize,
    /// Per-entry channel variance.
    pub sigma2_h: f64,
    /// Per-entry CSI error variance.
    pub sigma2_delta: f64,
    /// Noise power at the SUs.
    pub sigma2_w: f64,
    /// PU transmit power.
    pub p_p: f64,
    /// SBS total power budget.
    pub p0: f64,
    /// Interference cap at every PU receiver.
    pub i0: f64,
    /// Minimum rate per SU in bps/Hz.
    pub r0: f64,
}

/// Keys accepted by [`NetworkConfig::set`].
pub const CONFIG_KEYS: &[&str] = &[
    "m_b",
    "m_u",
    "k_su",
    "l_tx",
    "l_rx",
    "sigma2_h",
    "sigma2_delta",
    "sigma2_w",
    "p_p",
    "p0",
    "i0",
    "r0",
    "p0_db",
    "i0_db",
    "pp_db",
];

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self::baseline()
    }
}

impl NetworkConfig {
    /// Simulation baseline: 64 SBS antennas, ten 4-antenna SUs, one PU
    /// transmitter at 0 dB, one PU receiver, I^0 = -3 dB, R^0 = 1 bps/Hz,
    /// P^0 = 10 dB, CSI error variance 0.01.
    pub fn baseline() -> Self {
        Self {
            m_b: 64,
            m_u: 4,
            k_su: 10,
            l_tx: 1,
            l_rx: 1,
            sigma2_h: 1.0,
            sigma2_delta: 0.01,
            sigma2_w: 1.0,
            p_p: 1.0,
            p0: db_to_linear(10.0),
            i0: db_to_linear(-3.0),
            r0: 1.0,
        }
    }

    pub fn l_total(&self) -> usize {
        self.l_tx + self.l_rx
    }

    /// SINR threshold `2^R0 - 1`.
    pub fn sinr_threshold(&self) -> f64 {
        self.r0.exp2() - 1.0
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.m_b == 0 || self.m_u == 0 || self.k_su == 0 {
            return bad("m_b, m_u and k_su must be positive".into());
        }
        if self.m_u > self.m_b {
            return bad(format!("m_u = {} exceeds m_b = {}", self.m_u, self.m_b));
        }
        let reals = [
            ("sigma2_h", self.sigma2_h),
            ("sigma2_delta", self.sigma2_delta),
            ("sigma2_w", self.sigma2_w),
            ("p_p", self.p_p),
            ("p0", self.p0),
            ("i0", self.i0),
            ("r0", self.r0),
        ];
        for (name, value) in reals {
            if !value.is_finite() || value < 0.0 {
                return bad(format!("{name} must be finite and nonnegative, got {value}"));
            }
        }
        for (name, value) in [
            ("sigma2_h", self.sigma2_h),
            ("sigma2_w", self.sigma2_w),
            ("p0", self.p0),
            ("i0", self.i0),
            ("r0", self.r0),
        ] {
            if value <= 0.0 {
                return bad(format!("{name} must be strictly positive"));
            }
        }
        // The estimate is drawn independently of the error, so its variance
        // sigma2_h - sigma2_delta must not be negative.
        if self.sigma2_delta > self.sigma2_h {
            return bad(format!(
                "sigma2_delta = {} exceeds sigma2_h = {}",
                self.sigma2_delta, self.sigma2_h
            ));
        }
        Ok(())
    }

    /// Sets one field from its textual value. Does not validate.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let parse_err = || Error::ParseValue {
            key: key.to_string(),
            value: value.to_string(),
        };
        let int = || value.parse::<usize>().map_err(|_| parse_err());
        let real = || {
            value
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(parse_err)
        };
        match key {
            "m_b" => self.m_b = int()?,
            "m_u" => self.m_u = int()?,
            "k_su" => self.k_su = int()?,
            "l_tx" => self.l_tx = int()?,
            "l_rx" => self.l_rx = int()?,
            "sigma2_h" => self.sigma2_h = real()?,
            "sigma2_delta" => self.sigma2_delta = real()?,
            "sigma2_w" => self.sigma2_w = real()?,
            "p_p" => self.p_p = real()?,
            "p0" => self.p0 = real()?,
            "i0" => self.i0 = real()?,
            "r0" => self.r0 = real()?,
            "p0_db" => self.p0 = db_to_linear(real()?),
            "i0_db" => self.i0 = db_to_linear(real()?),
            "pp_db" => self.p_p = db_to_linear(real()?),
            other => return Err(Error::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Parses the `key = value` form on top of [`baseline`](Self::baseline).
    /// `#` starts a comment; blank lines are ignored.
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let mut config = Self::baseline();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("expected `key = value`, got `{line}`")))?;
            config.set(key.trim(), value)?;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn to_kv_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "m_b = {}", self.m_b);
        let _ = writeln!(out, "m_u = {}", self.m_u);
        let _ = writeln!(out, "k_su = {}", self.k_su);
        let _ = writeln!(out, "l_tx = {}", self.l_tx);
        let _ = writeln!(out, "l_rx = {}", self.l_rx);
        let _ = writeln!(out, "sigma2_h = {:e}", self.sigma2_h);
        let _ = writeln!(out, "sigma2_delta = {:e}", self.sigma2_delta);
        let _ = writeln!(out, "sigma2_w = {:e}", self.sigma2_w);
        let _ = writeln!(out, "p_p = {:e}", self.p_p);
        let _ = writeln!(out, "p0 = {:e}", self.p0);
        let _ = writeln!(out, "i0 = {:e}", self.i0);
        let _ = writeln!(out, "r0 = {:e}", self.r0);
        out
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_kv_str(&text)
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_kv_string())?;
        Ok(())
    }
}
