//! Phase-1 simplex for dense feasibility problems `A x <= b, x >= 0`.
//!
//! Rows with a negative right-hand side get a surplus and an artificial
//! variable; the sum of artificials is minimized with Bland's rule. The
//! system is feasible iff that minimum is zero. No phase 2 is run: any
//! feasible basic point is returned.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Smallest pivot magnitude accepted in the ratio test.
pub const PIVOT_TOL: f64 = 1e-12;
/// Phase-1 objective below which the system is declared feasible
/// (measured on the equilibrated rows).
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Labelled inequality system `A x <= b` over `x >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub labels: Vec<String>,
    /// Row-major coefficients, one inner vector per constraint.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

/// Phase-1 result.
#[derive(Debug, Clone, PartialEq)]
pub struct Phase1Solution {
    pub feasible: bool,
    /// Basic point reached at the phase-1 optimum. Feasible when `feasible`.
    pub x: Vec<f64>,
    /// Optimal sum of artificials on the equilibrated rows.
    pub residual: f64,
    /// Magnitude of the phase-1 dual of each row (equilibrated units).
    pub dual_weights: Vec<f64>,
    pub pivots: usize,
}

impl LinearSystem {
    pub fn new() -> Self {
        Self {
            labels: Vec::new(),
            a: Vec::new(),
            b: Vec::new(),
        }
    }

    pub fn push(&mut self, label: impl Into<String>, row: Vec<f64>, rhs: f64) {
        self.labels.push(label.into());
        self.a.push(row);
        self.b.push(rhs);
    }

    pub fn n_rows(&self) -> usize {
        self.a.len()
    }

    pub fn n_vars(&self) -> usize {
        self.a.first().map_or(0, Vec::len)
    }

    /// `b - A x` per row.
    pub fn slacks(&self, x: &[f64]) -> Vec<f64> {
        self.a
            .iter()
            .zip(&self.b)
            .map(|(row, &bi)| bi - row.iter().zip(x).map(|(a, x)| a * x).sum::<f64>())
            .collect()
    }

    /// Dense text form: `#` header lines, then one `label a_1 .. a_n b` line
    /// per row. Values use the shortest round-trip representation.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# A x <= b, x >= 0");
        let _ = writeln!(out, "# rows={} cols={}", self.n_rows(), self.n_vars());
        for ((label, row), b) in self.labels.iter().zip(&self.a).zip(&self.b) {
            out.push_str(label);
            for v in row {
                let _ = write!(out, " {v:e}");
            }
            let _ = writeln!(out, " {b:e}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut sys = Self::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split_whitespace();
            let label = fields.next().unwrap_or_default().to_string();
            let values = fields
                .map(|f| {
                    f.parse::<f64>().map_err(|_| Error::ParseValue {
                        key: label.clone(),
                        value: f.to_string(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let (rhs, row) = values
                .split_last()
                .ok_or_else(|| Error::InvalidConfig(format!("row `{label}` has no values")))?;
            if let Some(first) = sys.a.first() {
                if first.len() != row.len() {
                    return Err(Error::DimensionMismatch {
                        what: "constraint row",
                        expected: first.len(),
                        got: row.len(),
                    });
                }
            }
            sys.push(label, row.to_vec(), *rhs);
        }
        Ok(sys)
    }
}

impl Default for LinearSystem {
    fn default() -> Self {
        Self::new()
    }
}

struct Tableau {
    /// `rows x (cols + 1)`, last column is the right-hand side.
    t: Vec<Vec<f64>>,
    /// Reduced-cost row, `cols + 1` wide; last entry is minus the objective.
    cost: Vec<f64>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let width = self.cols + 1;
        let p = self.t[row][col];
        for v in self.t[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[row].clone();
        for (i, r) in self.t.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[col];
            if f != 0.0 {
                for j in 0..width {
                    r[j] -= f * pivot_row[j];
                }
                r[col] = 0.0;
            }
        }
        let f = self.cost[col];
        if f != 0.0 {
            for (c, p) in self.cost.iter_mut().zip(&pivot_row).take(width) {
                *c -= f * p;
            }
            self.cost[col] = 0.0;
        }
        self.basis[row] = col;
    }
}

/// Finds a point of `{x >= 0 : A x <= b}` or certifies (numerically) that
/// none exists.
pub fn find_feasible_point(sys: &LinearSystem) -> Phase1Solution {
    let m = sys.n_rows();
    let n = sys.n_vars();

    // Row equilibration; does not change the feasible set.
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for (row, &b) in sys.a.iter().zip(&sys.b) {
        let scale = row.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let scale = if scale > 0.0 { scale } else { b.abs().max(1.0) };
        rows.push(row.iter().map(|v| v / scale).collect::<Vec<_>>());
        rhs.push(b / scale);
    }

    let negated: Vec<bool> = rhs.iter().map(|&b| b < 0.0).collect();
    let n_art = negated.iter().filter(|&&neg| neg).count();
    let cols = n + m + n_art;
    let mut t = vec![vec![0.0; cols + 1]; m];
    let mut basis = vec![0; m];
    // Column of the variable that is basic in row i at the start.
    let mut initial_basic = vec![0; m];
    let mut is_artificial = vec![false; cols];
    let mut next_art = n + m;
    for i in 0..m {
        let sign = if negated[i] { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = sign * rows[i][j];
        }
        t[i][n + i] = sign;
        t[i][cols] = sign * rhs[i];
        if negated[i] {
            t[i][next_art] = 1.0;
            is_artificial[next_art] = true;
            basis[i] = next_art;
            next_art += 1;
        } else {
            basis[i] = n + i;
        }
        initial_basic[i] = basis[i];
    }

    let mut cost = vec![0.0; cols + 1];
    for j in 0..cols {
        if is_artificial[j] {
            cost[j] = 1.0;
        }
    }
    for i in 0..m {
        if negated[i] {
            for j in 0..=cols {
                cost[j] -= t[i][j];
            }
        }
    }

    let mut tab = Tableau { t, cost, basis, cols };
    let max_pivots = 50 * (m + cols) + 1000;
    let mut pivots = 0;
    while pivots < max_pivots {
        let Some(enter) = (0..cols).find(|&j| tab.cost[j] < -PIVOT_TOL) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = tab.t[i][enter];
            if a > PIVOT_TOL {
                let ratio = tab.t[i][cols] / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - 1e-15 || (ratio <= lr + 1e-15 && tab.basis[i] < tab.basis[li]) {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
        }
        let Some((row, _)) = leave else {
            // Phase-1 objective is bounded below; a column with no positive
            // entry can only appear through round-off.
            tab.cost[enter] = 0.0;
            continue;
        };
        tab.pivot(row, enter);
        pivots += 1;
    }

    let residual = (-tab.cost[cols]).max(0.0);
    let mut x = vec![0.0; n];
    for (i, &bv) in tab.basis.iter().enumerate() {
        if bv < n {
            x[bv] = tab.t[i][cols].max(0.0);
        }
    }
    let dual_weights = initial_basic
        .iter()
        .map(|&j| {
            let c = if is_artificial[j] { 1.0 } else { 0.0 };
            (c - tab.cost[j]).abs()
        })
        .collect();

    Phase1Solution {
        feasible: residual <= FEASIBILITY_TOL,
        x,
        residual,
        dual_weights,
        pivots,
    }
}
