//! Finite-key rates: two-universal hashing versus random-sampling parameter
//! estimation, plus the upper bound on the latter.

mod compare;
mod sampling;
mod tuh;

pub use compare::{compare_curves, curves_csv, CurveRow, CSV_HEADER};
pub use sampling::{
    eps_pe, eps_pe_floor, eps_pe_inf, sampling_epsilons, sampling_optimize, sampling_upper_bound,
    stationary_eps_ec, BoundReport, SamplingEpsilons, SamplingQuery, SamplingReport,
};
pub use tuh::{min_blocksize, tuh_report, Rounding, TuhQuery, TuhReport};

use crate::error::{Error, Result};
use crate::hashball::entropy_unchecked as h;

/// `1 − 2h(δ)`, the asymptotic rate.
pub fn asymptotic_rate(delta: f64) -> f64 {
    1.0 - 2.0 * h(delta)
}

fn check_delta(delta: f64) -> Result<()> {
    if !(0.0..0.5).contains(&delta) {
        return Err(Error::Domain(format!("delta = {delta} outside [0, 1/2)")));
    }
    Ok(())
}

fn check_epsilon(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Domain(format!("epsilon = {eps} outside (0, 1]")));
    }
    Ok(())
}

/// Minimise a unimodal `f` on `[a, b]`; returns `(x, f(x))`.
pub(crate) fn golden_min(
    mut a: f64,
    mut b: f64,
    iters: usize,
    f: impl Fn(f64) -> f64,
) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
