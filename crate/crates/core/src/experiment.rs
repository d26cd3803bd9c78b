//! Experiment presets, CSV output and plot-data conversion.
//!
//! Every experiment writes `<out>/<id>.csv`: comment lines starting with
//! `#` (the first is `# schema=1`), a header row, then one row per point.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::analytics::{interference_model, optimize_equal_power, q_k, sinr_model};
use crate::beamforming::{self, Scheme};
use crate::channel::generate_channels;
use crate::config::{db_to_linear, linear_to_db, NetworkConfig, CONFIG_KEYS};
use crate::error::{Error, Result};
use crate::metrics;
use crate::montecarlo::{max_sus_at_confidence, run_trials, EmpiricalCdf, Policy, SweepAxis};
use crate::power;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 0;
/// KS tolerances of the distribution checks.
pub const KS_TOL_SINR: f64 = 0.05;
pub const KS_TOL_INTERFERENCE: f64 = 0.03;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExperimentId {
    Fig2EqPowerSweep,
    Fig3MebCompare,
    Fig4ZfbCompare,
    Fig5MaxSus,
    CdfValidation,
    SingleSolve,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 6] = [
        ExperimentId::Fig2EqPowerSweep,
        ExperimentId::Fig3MebCompare,
        ExperimentId::Fig4ZfbCompare,
        ExperimentId::Fig5MaxSus,
        ExperimentId::CdfValidation,
        ExperimentId::SingleSolve,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentId::Fig2EqPowerSweep => "fig2_eq_power_sweep",
            ExperimentId::Fig3MebCompare => "fig3_meb_compare",
            ExperimentId::Fig4ZfbCompare => "fig4_zfb_compare",
            ExperimentId::Fig5MaxSus => "fig5_max_sus",
            ExperimentId::CdfValidation => "cdf_validation",
            ExperimentId::SingleSolve => "single_solve",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|id| id.as_str() == s)
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Equal power used by distribution checks when no policy is given.
pub fn reference_equal_power(scheme: Scheme) -> f64 {
    match scheme {
        Scheme::Meb => db_to_linear(-12.74),
        Scheme::Zfb => 1.0,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub id: ExperimentId,
    pub base: NetworkConfig,
    /// Swept parameter: a config key, `p_eq` or `p_eq_db`.
    pub sweep: Option<SweepAxis>,
    /// Antenna counts run as separate blocks.
    pub m_b_values: Vec<usize>,
    pub schemes: Vec<Scheme>,
    /// Empty means the preset's default policy.
    pub policies: Vec<Policy>,
    pub n_trials: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Confidence of the max-SU search.
    pub confidence: f64,
    /// Also write sorted raw samples for distribution checks.
    pub dump_samples: bool,
}

fn db_range(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + step * i as f64).collect()
}

impl ExperimentSpec {
    /// Preset for `id`. `large` selects the 512/1024-antenna blocks.
    pub fn preset(id: ExperimentId, large: bool) -> Self {
        let m_b_values = if large { vec![512, 1024] } else { vec![64, 128] };
        let mut base = NetworkConfig::baseline();
        let both = vec![Scheme::Meb, Scheme::Zfb];
        let compare = vec![Policy::Lf, Policy::EqualPowerOpt];
        let rate_axis = || Some(SweepAxis::new("r0", vec![1.0, 2.0, 3.0, 4.0]));
        let (sweep, schemes, policies, n_trials) = match id {
            ExperimentId::Fig2EqPowerSweep => (
                Some(SweepAxis::new("p_eq_db", db_range(-20.0, 0.0, 1.0))),
                both,
                Vec::new(),
                1000,
            ),
            ExperimentId::Fig3MebCompare => (rate_axis(), vec![Scheme::Meb], compare, 1000),
            ExperimentId::Fig4ZfbCompare => (rate_axis(), vec![Scheme::Zfb], compare, 1000),
            ExperimentId::Fig5MaxSus => {
                base.sigma2_delta = 0.1;
                (rate_axis(), both, vec![Policy::Lf], 500)
            }
            ExperimentId::CdfValidation => (None, both, Vec::new(), 10_000),
            ExperimentId::SingleSolve => (None, vec![Scheme::Zfb], vec![Policy::Lf], 1),
        };
        let m_b_values = if id == ExperimentId::SingleSolve {
            vec![base.m_b]
        } else {
            m_b_values
        };
        Self {
            id,
            base,
            sweep,
            m_b_values,
            schemes,
            policies,
            n_trials,
            seed: DEFAULT_SEED,
            out_dir: PathBuf::from("."),
            confidence: 0.95,
            dump_samples: false,
        }
    }

    pub fn csv_path(&self) -> PathBuf {
        self.out_dir.join(format!("{}.csv", self.id))
    }

    pub fn validate(&self) -> Result<()> {
        let mut probe = self.base.clone();
        for &m_b in &self.m_b_values {
            probe.m_b = m_b;
            probe.validate()?;
        }
        if let Some(axis) = &self.sweep {
            let key = axis.key.as_str();
            let known = CONFIG_KEYS.contains(&key) || key == "p_eq" || key == "p_eq_db";
            if !known {
                return Err(Error::UnknownKey(axis.key.clone()));
            }
            if self.id == ExperimentId::Fig2EqPowerSweep && !key.starts_with("p_eq") {
                return Err(Error::InvalidConfig(format!(
                    "{} sweeps the equal power; got sweep parameter `{key}`",
                    self.id
                )));
            }
            if self.id != ExperimentId::Fig2EqPowerSweep && key.starts_with("p_eq") {
                return Err(Error::InvalidConfig(format!("{} cannot sweep `{key}`", self.id)));
            }
            if axis.values.is_empty() {
                return Err(Error::InvalidConfig(format!("sweep `{key}` has no values")));
            }
            if let Some(v) = axis.values.iter().find(|v| !v.is_finite()) {
                return Err(Error::InvalidConfig(format!("sweep `{key}` value {v} is not finite")));
            }
            if !key.starts_with("p_eq") {
                for &v in &axis.values {
                    axis.apply(&self.base, v)?;
                }
            } else if key == "p_eq" && axis.values.iter().any(|&v| v <= 0.0) {
                return Err(Error::InvalidConfig("p_eq values must be positive".into()));
            }
        } else if self.id == ExperimentId::Fig2EqPowerSweep {
            return Err(Error::InvalidConfig(format!("{} needs a p_eq_db sweep", self.id)));
        }
        if self.m_b_values.is_empty() {
            return Err(Error::InvalidConfig("no antenna counts given".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::InvalidConfig("no schemes given".into()));
        }
        if self.n_trials == 0 {
            return Err(Error::InvalidConfig("n_trials must be at least 1".into()));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "confidence must lie in (0, 1), got {}",
                self.confidence
            )));
        }
        Ok(())
    }
}

/// Shortest text that parses back to the same value.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == 0.0 || (x.abs() >= 1e-4 && x.abs() < 1e15) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn to_csv(&self, spec: &ExperimentSpec) -> Result<String> {
        let mut out = Vec::new();
        writeln!(out, "# schema={SCHEMA_VERSION}")?;
        writeln!(
            out,
            "# experiment={} seed={} n_trials={}",
            spec.id, spec.seed, spec.n_trials
        )?;
        for line in spec.base.to_kv_string().lines() {
            writeln!(out, "# {line}")?;
        }
        {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(&self.header).map_err(csv_err)?;
            for row in &self.rows {
                w.write_record(row).map_err(csv_err)?;
            }
            w.flush()?;
        }
        String::from_utf8(out).map_err(|e| Error::Io(e.to_string()))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Files written by [`run`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub rows: usize,
}

/// Runs `spec`, writes its outputs and prints one summary line per point to
/// `log`.
pub fn run(spec: &ExperimentSpec, log: &mut dyn Write) -> Result<RunReport> {
    spec.validate()?;
    let mut extra = Vec::new();
    let table = match spec.id {
        ExperimentId::Fig2EqPowerSweep => probability_sweep(spec, log)?,
        ExperimentId::Fig3MebCompare | ExperimentId::Fig4ZfbCompare => probability_sweep(spec, log)?,
        ExperimentId::Fig5MaxSus => max_sus_sweep(spec, log)?,
        ExperimentId::CdfValidation => cdf_validation(spec, log, &mut extra)?,
        ExperimentId::SingleSolve => single_solve(spec, log, &mut extra)?,
    };
    std::fs::create_dir_all(&spec.out_dir)?;
    let path = spec.csv_path();
    std::fs::write(&path, table.to_csv(spec)?)?;
    let mut files = vec![path];
    for (name, contents) in extra {
        let p = spec.out_dir.join(name);
        std::fs::write(&p, contents)?;
        files.push(p);
    }
    Ok(RunReport {
        files,
        rows: table.rows.len(),
    })
}

fn policies_or(spec: &ExperimentSpec, default: Vec<Policy>) -> Vec<Policy> {
    if spec.policies.is_empty() {
        default
    } else {
        spec.policies.clone()
    }
}

/// Probability of serving all SUs along the sweep axis. The equal-power
/// sweep overrides each policy with `EQUAL_POWER` at the swept level.
fn probability_sweep(spec: &ExperimentSpec, log: &mut dyn Write) -> Result<Table> {
    let axis = spec.sweep.clone().expect("validated");
    let mut table = Table::new(vec![
        "m_b",
        "axis",
        "value",
        "scheme",
        "policy",
        "p_eq_db",
        "p_served_analytical",
        "p_served_empirical",
        "stderr",
        "p_served_true",
        "n_csi_violations",
        "n_errors",
        "n_trials",
        "seed",
    ]);
    let eq_sweep = axis.key.starts_with("p_eq");
    for &m_b in &spec.m_b_values {
        let mut base = spec.base.clone();
        base.m_b = m_b;
        for &value in &axis.values {
            let (config, forced) = if eq_sweep {
                let p = if axis.key == "p_eq_db" {
                    db_to_linear(value)
                } else {
                    value
                };
                (base.clone(), Some(Policy::EqualPower(p)))
            } else {
                (axis.apply(&base, value)?, None)
            };
            config.validate()?;
            for &scheme in &spec.schemes {
                let policies = match forced {
                    Some(p) => vec![p],
                    None => policies_or(spec, vec![Policy::Lf, Policy::EqualPowerOpt]),
                };
                for policy in policies {
                    let analytical = match policy {
                        Policy::Lf => f64::NAN,
                        Policy::EqualPower(p) => q_k(scheme, &config, p).unwrap_or(f64::NAN),
                        Policy::EqualPowerOpt => optimize_equal_power(scheme, &config).map(|o| o.q).unwrap_or(f64::NAN),
                    };
                    let r = match run_trials(&config, scheme, policy, spec.n_trials, spec.seed) {
                        Ok(r) => r,
                        Err(Error::Domain(msg)) => {
                            writeln!(
                                log,
                                "m_b={m_b} {}={} {scheme} {}: skipped ({msg})",
                                axis.key,
                                fmt_num(value),
                                policy.label()
                            )?;
                            continue;
                        }
                        Err(e) => return Err(e),
                    };
                    let p_eq_db = r.p_eq.map_or(f64::NAN, linear_to_db);
                    writeln!(
                        log,
                        "m_b={m_b} {}={} {scheme} {}: p_served={:.4} (+-{:.4}) analytical={}",
                        axis.key,
                        fmt_num(value),
                        policy.label(),
                        r.p_served,
                        r.stderr,
                        fmt_num(analytical)
                    )?;
                    table.push(vec![
                        m_b.to_string(),
                        axis.key.clone(),
                        fmt_num(value),
                        scheme.to_string(),
                        policy.label().to_string(),
                        fmt_num(p_eq_db),
                        fmt_num(analytical),
                        fmt_num(r.p_served),
                        fmt_num(r.stderr),
                        fmt_num(r.p_served_true),
                        r.n_csi_violations.to_string(),
                        r.n_errors.to_string(),
                        r.n_trials.to_string(),
                        r.seed.to_string(),
                    ]);
                }
            }
        }
    }
    Ok(table)
}

fn max_sus_sweep(spec: &ExperimentSpec, log: &mut dyn Write) -> Result<Table> {
    let axis = spec
        .sweep
        .clone()
        .unwrap_or_else(|| SweepAxis::new("r0", vec![spec.base.r0]));
    let mut table = Table::new(vec![
        "m_b",
        "axis",
        "value",
        "scheme",
        "policy",
        "confidence",
        "max_k",
        "p_served_at_max",
        "n_trials",
        "seed",
    ]);
    for &m_b in &spec.m_b_values {
        let mut base = spec.base.clone();
        base.m_b = m_b;
        for &scheme in &spec.schemes {
            for policy in policies_or(spec, vec![Policy::Lf]) {
                let points =
                    max_sus_at_confidence(&base, scheme, policy, spec.confidence, &axis, spec.n_trials, spec.seed)?;
                for pt in points {
                    writeln!(
                        log,
                        "m_b={m_b} {}={} {scheme} {}: max_k={}",
                        axis.key,
                        fmt_num(pt.value),
                        policy.label(),
                        pt.max_k
                    )?;
                    table.push(vec![
                        m_b.to_string(),
                        axis.key.clone(),
                        fmt_num(pt.value),
                        scheme.to_string(),
                        policy.label().to_string(),
                        fmt_num(spec.confidence),
                        pt.max_k.to_string(),
                        fmt_num(pt.p_served.unwrap_or(f64::NAN)),
                        spec.n_trials.to_string(),
                        spec.seed.to_string(),
                    ]);
                }
            }
        }
    }
    Ok(table)
}

/// KS distances of one distribution check.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfCheck {
    pub config: NetworkConfig,
    pub scheme: Scheme,
    pub p_eq: f64,
    pub ks_sinr: f64,
    pub ks_interference: f64,
    pub sinr_samples: Vec<f64>,
    pub interference_samples: Vec<f64>,
}

impl CdfCheck {
    pub fn sinr_passes(&self) -> bool {
        self.ks_sinr <= KS_TOL_SINR
    }

    pub fn interference_passes(&self) -> bool {
        self.ks_interference <= KS_TOL_INTERFERENCE
    }
}

/// Compares the analytical SINR and PU-interference CDFs with the pooled
/// true SINR and true interference of `n_trials` equal-power trials.
pub fn check_cdfs(config: &NetworkConfig, scheme: Scheme, p_eq: f64, n_trials: usize, seed: u64) -> Result<CdfCheck> {
    let r = run_trials(config, scheme, Policy::EqualPower(p_eq), n_trials, seed)?;
    let sinr = sinr_model(scheme, config, p_eq)?;
    let interference = interference_model(scheme, config, p_eq)?;
    let ks_sinr = EmpiricalCdf::new(&r.sinr_true)?.ks_distance(|s| sinr.cdf(s))?;
    let ks_interference = EmpiricalCdf::new(&r.int_to_pu_true)?.ks_distance(|x| interference.cdf(x))?;
    Ok(CdfCheck {
        config: config.clone(),
        scheme,
        p_eq,
        ks_sinr,
        ks_interference,
        sinr_samples: r.sinr_true,
        interference_samples: r.int_to_pu_true,
    })
}

/// Configurations of the distribution-check grid at one antenna count.
pub fn cdf_grid(base: &NetworkConfig, m_b: usize) -> Vec<NetworkConfig> {
    let mut out = Vec::new();
    for k_su in [5, 10] {
        for sigma2_delta in [0.01, 0.1] {
            let mut c = base.clone();
            c.m_b = m_b;
            c.k_su = k_su;
            c.sigma2_delta = sigma2_delta;
            out.push(c);
        }
    }
    out
}

fn cdf_validation(spec: &ExperimentSpec, log: &mut dyn Write, extra: &mut Vec<(String, String)>) -> Result<Table> {
    let mut table = Table::new(vec![
        "m_b",
        "k_su",
        "sigma2_delta",
        "axis",
        "value",
        "scheme",
        "p_eq_db",
        "quantity",
        "ks",
        "tolerance",
        "pass",
        "n_samples",
        "n_trials",
        "seed",
    ]);
    let mut configs = Vec::new();
    for &m_b in &spec.m_b_values {
        match &spec.sweep {
            None => configs.extend(
                cdf_grid(&spec.base, m_b)
                    .into_iter()
                    .map(|c| (c, String::new(), f64::NAN)),
            ),
            Some(axis) => {
                for &v in &axis.values {
                    let mut c = axis.apply(&spec.base, v)?;
                    c.m_b = m_b;
                    configs.push((c, axis.key.clone(), v));
                }
            }
        }
    }
    for (config, key, value) in configs {
        config.validate()?;
        for &scheme in &spec.schemes {
            let p_eq = match spec.policies.first() {
                None | Some(Policy::Lf) => reference_equal_power(scheme),
                Some(Policy::EqualPower(p)) => *p,
                Some(Policy::EqualPowerOpt) => optimize_equal_power(scheme, &config)?.p_eq,
            };
            let check = check_cdfs(&config, scheme, p_eq, spec.n_trials, spec.seed)?;
            writeln!(
                log,
                "m_b={} k={} sigma2_delta={} {scheme}: ks_sinr={:.4} ks_interference={:.4}",
                config.m_b,
                config.k_su,
                fmt_num(config.sigma2_delta),
                check.ks_sinr,
                check.ks_interference
            )?;
            for (quantity, ks, tol, n) in [
                ("sinr", check.ks_sinr, KS_TOL_SINR, check.sinr_samples.len()),
                (
                    "interference",
                    check.ks_interference,
                    KS_TOL_INTERFERENCE,
                    check.interference_samples.len(),
                ),
            ] {
                table.push(vec![
                    config.m_b.to_string(),
                    config.k_su.to_string(),
                    fmt_num(config.sigma2_delta),
                    key.clone(),
                    fmt_num(value),
                    scheme.to_string(),
                    fmt_num(linear_to_db(p_eq)),
                    quantity.to_string(),
                    fmt_num(ks),
                    fmt_num(tol),
                    (ks <= tol).to_string(),
                    n.to_string(),
                    spec.n_trials.to_string(),
                    spec.seed.to_string(),
                ]);
            }
            if spec.dump_samples {
                let tag = format!(
                    "{}_samples_mb{}_k{}_d{}_{}",
                    spec.id,
                    config.m_b,
                    config.k_su,
                    fmt_num(config.sigma2_delta),
                    scheme
                );
                for (quantity, samples) in [
                    ("sinr", &check.sinr_samples),
                    ("interference", &check.interference_samples),
                ] {
                    let mut body = format!("# schema={SCHEMA_VERSION}\n# sorted {quantity} samples\n");
                    for s in samples.iter() {
                        body.push_str(&fmt_num(*s));
                        body.push('\n');
                    }
                    extra.push((format!("{tag}_{quantity}.txt"), body));
                }
            }
        }
    }
    Ok(table)
}

fn single_solve(spec: &ExperimentSpec, log: &mut dyn Write, extra: &mut Vec<(String, String)>) -> Result<Table> {
    let mut table = Table::new(vec![
        "scheme",
        "policy",
        "su",
        "power",
        "gain",
        "sigma2_k1",
        "sinr_est",
        "sinr_true",
        "feasible",
        "served_true",
    ]);
    let mut config = spec.base.clone();
    config.m_b = spec.m_b_values[0];
    config.validate()?;
    let real = generate_channels(&config, spec.seed);
    for &scheme in &spec.schemes {
        let beams = match beamforming::compute(&real, scheme) {
            Ok(b) => b,
            Err(e @ (Error::AntennaShortage { .. } | Error::IllConditioned { .. })) => {
                writeln!(log, "{scheme}: {e}")?;
                continue;
            }
            Err(e) => return Err(e),
        };
        for policy in policies_or(spec, vec![Policy::Lf]) {
            let alloc = match (policy, scheme) {
                (Policy::Lf, Scheme::Meb) => {
                    extra.push((
                        format!("{}_lf_meb_system.txt", spec.id),
                        power::lf_meb_system(&real, &beams, &config)?.to_text(),
                    ));
                    power::solve_lf_meb(&real, &beams, &config)?
                }
                (Policy::Lf, Scheme::Zfb) => power::solve_lf_zfb(&real, &beams, &config)?,
                (Policy::EqualPower(p), _) => power::equal_power(&real, &beams, p, &config)?,
                (Policy::EqualPowerOpt, _) => {
                    let p = optimize_equal_power(scheme, &config)?.p_eq;
                    power::equal_power(&real, &beams, p, &config)?
                }
            };
            let served_true = power::verify_allocation(&real, &beams, &alloc, &config, false)?.satisfied();
            let sinr_est = metrics::estimated_sinr(&real, &beams.v, &beams.u, &alloc.p, &config)?;
            let sinr_true = metrics::true_sinr(&real, &beams.v, &beams.u, &alloc.p, &config)?;
            let powers: Vec<String> = alloc.p.iter().map(|p| fmt_num(*p)).collect();
            writeln!(
                log,
                "{scheme} {}: feasible={} served_true={served_true} total_power={} powers=[{}]",
                policy.label(),
                alloc.feasible,
                fmt_num(alloc.total_power()),
                powers.join(", ")
            )?;
            if let Some(rep) = &alloc.infeasibility {
                writeln!(
                    log,
                    "{scheme} {}: blocking constraint family {:?}",
                    policy.label(),
                    rep.blocking
                )?;
            }
            for k in 0..alloc.p.len() {
                table.push(vec![
                    scheme.to_string(),
                    policy.label().to_string(),
                    k.to_string(),
                    fmt_num(alloc.p[k]),
                    fmt_num(beams.gain[k]),
                    fmt_num(beams.sigma2_k1[k]),
                    fmt_num(sinr_est[k]),
                    fmt_num(sinr_true[k]),
                    alloc.feasible.to_string(),
                    served_true.to_string(),
                ]);
            }
        }
    }
    Ok(table)
}

/// Parsed experiment CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<CsvTable> {
    let text = std::fs::read_to_string(path)?;
    parse_csv(&text)
}

pub fn parse_csv(text: &str) -> Result<CsvTable> {
    let comments = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .map(|l| l.to_string())
        .collect();
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(csv_err)?.iter().map(String::from).collect();
    let rows = reader
        .records()
        .map(|r| r.map(|rec| rec.iter().map(String::from).collect()).map_err(csv_err))
        .collect::<Result<Vec<Vec<String>>>>()?;
    Ok(CsvTable { comments, header, rows })
}

/// Writes one whitespace-delimited `.dat` file per `(scheme, policy)`
/// series next to `csv_path`. Values are copied verbatim; the `scheme`,
/// `policy` and `axis` label columns go into the file name and header. Rows of different
/// antenna counts are separated by two blank lines (gnuplot `index` blocks).
/// A CSV without rows yields a single header-only `.dat`.
pub fn emit_plot_data(csv_path: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let csv_path = csv_path.as_ref();
    let table = read_csv(csv_path)?;
    let stem = csv_path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("data")
        .to_string();
    let dir = csv_path.parent().unwrap_or_else(|| Path::new("."));
    let col = |name: &str| table.header.iter().position(|h| h == name);
    let scheme_col = col("scheme");
    let policy_col = col("policy");
    let block_col = col("m_b");
    let axis_col = col("axis");
    let keep: Vec<usize> = (0..table.header.len())
        .filter(|&i| Some(i) != scheme_col && Some(i) != policy_col && Some(i) != axis_col)
        .collect();
    let mut header_line = String::new();
    if let (Some(i), Some(first)) = (axis_col, table.rows.first()) {
        header_line.push_str(&format!("# axis={}\n", first[i]));
    }
    header_line.push_str(&format!(
        "# {}\n",
        keep.iter()
            .map(|&i| table.header[i].as_str())
            .collect::<Vec<_>>()
            .join(" ")
    ));

    let mut series: BTreeMap<String, Vec<&Vec<String>>> = BTreeMap::new();
    for row in &table.rows {
        let mut parts = Vec::new();
        if let Some(i) = scheme_col {
            parts.push(row[i].clone());
        }
        if let Some(i) = policy_col {
            parts.push(row[i].clone());
        }
        series.entry(parts.join("_")).or_default().push(row);
    }

    let mut files = Vec::new();
    if series.is_empty() {
        let p = dir.join(format!("{stem}.dat"));
        std::fs::write(&p, &header_line)?;
        files.push(p);
        return Ok(files);
    }
    for (name, rows) in series {
        let mut body = header_line.clone();
        let mut last_block: Option<&str> = None;
        for row in rows {
            if let Some(b) = block_col {
                if last_block.is_some_and(|lb| lb != row[b]) {
                    body.push_str("\n\n");
                }
                last_block = Some(&row[b]);
            }
            let fields: Vec<&str> = keep.iter().map(|&i| row[i].as_str()).collect();
            body.push_str(&fields.join(" "));
            body.push('\n');
        }
        let file = if name.is_empty() {
            format!("{stem}.dat")
        } else {
            format!("{stem}_{}.dat", name.to_ascii_lowercase())
        };
        let p = dir.join(file);
        std::fs::write(&p, body)?;
        files.push(p);
    }
    Ok(files)
}

/// Reads a `.dat` file back as rows of fields, skipping comments and blank
/// lines.
pub fn read_plot_data(path: impl AsRef<Path>) -> Result<Vec<Vec<String>>> {
    Ok(std::fs::read_to_string(path)?
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| l.split_whitespace().map(String::from).collect())
        .collect())
}
