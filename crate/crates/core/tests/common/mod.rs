//! Independent numerical oracles shared by the integration tests.
//!
//! Regularized incomplete gamma and beta values are computed as
//! `lower / (lower + upper)` from two adaptive Gauss-Kronrod integrals, so no
//! gamma or beta function value is needed. Integrands are evaluated in log
//! space with a per-piece offset to avoid overflow.

#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::LN_2;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Globally adaptive Gauss-Kronrod (7/15) integral of `f` over `[a, b]`:
/// the piece with the largest error estimate is bisected until the summed
/// estimate falls below `rel` times the integral. Starts from 64 pieces.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel: f64) -> f64 {
    const PIECES: usize = 64;
    const MAX_PIECES: usize = 20_000;
    let mut heap = BinaryHeap::new();
    let h = (b - a) / PIECES as f64;
    for i in 0..PIECES {
        let (lo, hi) = (a + h * i as f64, a + h * (i + 1) as f64);
        let (v, e) = gk15(&f, lo, hi);
        heap.push(Piece {
            err: e,
            lo,
            hi,
            value: v,
        });
    }
    loop {
        let total: f64 = heap.iter().map(|p| p.value).sum();
        let err: f64 = heap.iter().map(|p| p.err).sum();
        if err <= rel * total.abs() || heap.len() >= MAX_PIECES {
            return total;
        }
        for _ in 0..32 {
            let p = heap.pop().unwrap();
            let mid = 0.5 * (p.lo + p.hi);
            for (lo, hi) in [(p.lo, mid), (mid, p.hi)] {
                let (v, e) = gk15(&f, lo, hi);
                heap.push(Piece {
                    err: e,
                    lo,
                    hi,
                    value: v,
                });
            }
        }
    }
}

struct Piece {
    err: f64,
    lo: f64,
    hi: f64,
    value: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err).is_eq()
    }
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// `ln` of `integral_0^y t^(p-1) e^(-t) dt` (`beta_q = None`) or of
/// `integral_0^y t^(p-1) (1-t)^(q-1) dt`, via `t = y w^m` with `m` chosen so the
/// transformed integrand is smooth at zero.
fn ln_lower_piece(y: f64, p: f64, beta_q: Option<f64>) -> f64 {
    let m = if p < 2.0 { 2.0 / p } else { 1.0 };
    let base = p * y.ln() + m.ln();
    let log_f = |w: f64| -> f64 {
        if w <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let t = y * w.powf(m);
        let tail = match beta_q {
            None => -t,
            Some(q) => (q - 1.0) * (-t).ln_1p(),
        };
        (m * p - 1.0) * w.ln() + tail
    };
    let offset = (1..=512)
        .map(|i| log_f(i as f64 / 512.0))
        .fold(f64::NEG_INFINITY, f64::max);
    let v = integrate(|w| (log_f(w) - offset).exp(), 0.0, 1.0, 1e-14);
    base + offset + v.ln()
}

/// `ln integral_x^inf t^(k-1) e^(-t) dt` via `t = x + u / (1 - u)`.
fn ln_gamma_upper_piece(x: f64, k: f64) -> f64 {
    let log_f = |u: f64| -> f64 {
        if u >= 1.0 {
            return f64::NEG_INFINITY;
        }
        let s = u / (1.0 - u);
        let t = x + s;
        (k - 1.0) * t.ln() - t - 2.0 * (1.0 - u).ln()
    };
    let offset = (0..512)
        .map(|i| log_f(i as f64 / 512.0))
        .fold(f64::NEG_INFINITY, f64::max);
    let v = integrate(|u| (log_f(u) - offset).exp(), 0.0, 1.0, 1e-14);
    offset + v.ln()
}

/// `1 / (1 + exp(b - a))` without overflow.
fn share(ln_a: f64, ln_b: f64) -> f64 {
    let d = ln_b - ln_a;
    if d > 0.0 {
        let e = (-d).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + d.exp())
    }
}

/// Regularized lower incomplete gamma `P(k, x)` by quadrature.
pub fn lower_gamma_oracle(k: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    share(ln_lower_piece(x, k, None), ln_gamma_upper_piece(x, k))
}

/// Regularized upper incomplete gamma `Q(k, x)` by quadrature.
pub fn upper_gamma_oracle(k: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    share(ln_gamma_upper_piece(x, k), ln_lower_piece(x, k, None))
}

/// Regularized incomplete beta `I_x(a, b)` by quadrature.
pub fn incomplete_beta_oracle(x: f64, a: f64, b: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if x == 1.0 {
        return 1.0;
    }
    share(ln_lower_piece(x, a, Some(b)), ln_lower_piece(1.0 - x, b, Some(a)))
}

/// `Pr(1/Y <= s)` for `Y ~ Gamma(shape, theta)`, by integrating the
/// inverse-gamma density of `1/Y` over `[0, s]` and `[s, inf)`.
pub fn inverse_gamma_cdf_oracle(shape: f64, theta: f64, s: f64) -> f64 {
    // Density of Z = 1/Y is proportional to z^(-shape-1) exp(-1/(theta z)).
    let log_f = |z: f64| -(shape + 1.0) * z.ln() - 1.0 / (theta * z);
    let mode = 1.0 / (theta * (shape + 1.0));
    let offset = log_f(mode);
    let lower = if s <= 0.0 {
        0.0
    } else {
        integrate(
            |z| if z <= 0.0 { 0.0 } else { (log_f(z) - offset).exp() },
            0.0,
            s,
            1e-14,
        )
    };
    // Upper tail through z = s / u.
    let upper = integrate(
        |u| {
            if u <= 0.0 {
                0.0
            } else {
                let z = s / u;
                (log_f(z) - offset).exp() * s / (u * u)
            }
        },
        0.0,
        1.0,
        1e-14,
    );
    lower / (lower + upper)
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

pub fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / LN_2
}
