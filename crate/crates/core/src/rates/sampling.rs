//! Random-sampling parameter estimation: ε budget, optimised key length and
//! the upper bound on its rate.

use serde::Serialize;

use super::{asymptotic_rate, check_delta, golden_min};
use crate::error::{Error, Result};
use crate::hashball::entropy_unchecked as h;

/// `ε_pe(ν, ξ)`, from `(ε_pe/2)² = exp(−2n·n_pe·ξ²/(n_rk+1)) +
/// exp(−2(n+2)(n_rk²(ν−ξ)²−1) / ((n(δ+ξ)+1)(n(1−δ−ξ)+1)))`.
pub fn eps_pe(n: u64, n_pe: u64, delta: f64, nu: f64, xi: f64) -> f64 {
    let nf = n as f64;
    let pe = n_pe as f64;
    let rk = (n - n_pe) as f64;
    let a = (-2.0 * nf * pe * xi * xi / (rk + 1.0)).exp();
    let num = 2.0 * (nf + 2.0) * (rk * rk * (nu - xi) * (nu - xi) - 1.0);
    let den = (nf * (delta + xi) + 1.0) * (nf * (1.0 - delta - xi) + 1.0);
    let b = (-num / den).exp();
    2.0 * (a + b).sqrt()
}

const XI_GRID: usize = 19;
const GOLDEN_ITERS: usize = 80;

/// `inf_{0<ξ<ν} ε_pe(ν, ξ)`: a scan of `ξ = cν` for `c = 0.05, 0.10, …, 0.95`
/// refined by golden section around the best point. Returns `(ξ, ε_pe)`.
pub fn eps_pe_inf(n: u64, n_pe: u64, delta: f64, nu: f64) -> (f64, f64) {
    let f = |xi: f64| eps_pe(n, n_pe, delta, nu, xi);
    let step = nu / (XI_GRID + 1) as f64;
    let (mut best_i, mut best) = (1, f64::INFINITY);
    for i in 1..=XI_GRID {
        let v = f(step * i as f64);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let lo = step * (best_i - 1) as f64;
    let hi = step * (best_i + 1) as f64;
    let (x, fx) = golden_min(
        lo.max(nu * 1e-9),
        hi.min(nu * (1.0 - 1e-9)),
        GOLDEN_ITERS,
        f,
    );
    if fx < best {
        (x, fx)
    } else {
        (step * best_i as f64, best)
    }
}

/// `2·exp(−2·n_pe·ν²)`, a lower bound on `ε_pe(ν)` when `n_rk ≥ n/2`.
pub fn eps_pe_floor(n_pe: u64, nu: f64) -> f64 {
    2.0 * (-2.0 * n_pe as f64 * nu * nu).exp()
}

/// `n_rk(1 − h(δ+ν) − h(δ))`.
fn extractable(n_rk: u64, delta: f64, nu: f64) -> f64 {
    n_rk as f64 * (1.0 - h(delta + nu) - h(delta))
}

/// The `ε_ec` minimising `ε_ec + ε_pa`: `2^{−4/3}·2^{(−n_rk(1−h(δ+ν)−h(δ)) + n_out)/3}`.
pub fn stationary_eps_ec(n_rk: u64, delta: f64, nu: f64, n_out: f64) -> f64 {
    2f64.powf(-4.0 / 3.0 + (n_out - extractable(n_rk, delta, nu)) / 3.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SamplingEpsilons {
    pub eps_pa: f64,
    pub eps_pe: f64,
    pub eps_qkd: f64,
}

/// Evaluate the three security terms at one parameter point.
pub fn sampling_epsilons(
    n: u64,
    n_pe: u64,
    delta: f64,
    nu: f64,
    xi: f64,
    eps_ec: f64,
    n_out: f64,
) -> Result<SamplingEpsilons> {
    check_delta(delta)?;
    if !(n_pe >= 1 && n_pe < n) {
        return Err(Error::Domain(format!(
            "need 1 <= n_pe < n, got n_pe={n_pe}, n={n}"
        )));
    }
    if !(0.0 < xi && xi < nu && nu < 0.5 - delta) {
        return Err(Error::Domain(format!(
            "need 0 < xi < nu < 1/2 - delta, got xi={xi}, nu={nu}, delta={delta}"
        )));
    }
    if eps_ec.is_nan() || eps_ec <= 0.0 {
        return Err(Error::Domain(format!("eps_ec = {eps_ec} must be positive")));
    }
    let n_rk = n - n_pe;
    let eps_pa = 2f64.powf((n_out - extractable(n_rk, delta, nu)) / 2.0) / (2.0 * eps_ec.sqrt());
    let eps_pe = eps_pe(n, n_pe, delta, nu, xi);
    Ok(SamplingEpsilons {
        eps_pa,
        eps_pe,
        eps_qkd: eps_ec + eps_pa + eps_pe,
    })
}

/// Search controls for [`sampling_optimize`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SamplingQuery {
    pub n: u64,
    pub delta: f64,
    pub eps_qkd: f64,
    /// Interior points of the `ν` grid on `(0, 1/2 − δ)`.
    pub nu_grid: usize,
    /// Number of coarse `n_pe` points; each refinement shrinks the stride tenfold.
    pub n_pe_grid: u64,
}

impl SamplingQuery {
    pub fn new(n: u64, delta: f64, eps_qkd: f64) -> Self {
        Self {
            n,
            delta,
            eps_qkd,
            nu_grid: 200,
            n_pe_grid: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SamplingReport {
    pub query: SamplingQuery,
    pub feasible: bool,
    /// Largest integer key length meeting the budget; 0 when infeasible.
    pub n_out: u64,
    pub rate: f64,
    pub n_pe: u64,
    pub n_rk: u64,
    pub nu: f64,
    pub xi: f64,
    pub eps_ec: f64,
    pub eps_pa: f64,
    pub eps_pe: f64,
    pub eps_qkd_achieved: f64,
    /// Error-correction leakage `n_rk·h(δ) − log₂(ε_ec)`.
    pub leakage: f64,
}

#[derive(Clone, Copy, Debug)]
struct Point {
    value: f64,
    n_pe: u64,
    nu: f64,
    xi: f64,
}

/// Real-valued key length for fixed `(n_pe, ν)` with `ε_ec` at its stationary
/// point: `n_rk(1−h(δ+ν)−h(δ)) + 3·log₂((ε_qkd − ε_pe)·2^{4/3}/3)`.
fn point(q: &SamplingQuery, n_pe: u64, nu: f64) -> Point {
    let (xi, pe) = eps_pe_inf(q.n, n_pe, q.delta, nu);
    let slack = q.eps_qkd - pe;
    let value = if slack > 0.0 {
        extractable(q.n - n_pe, q.delta, nu) + 3.0 * (slack * 2f64.powf(4.0 / 3.0) / 3.0).log2()
    } else {
        f64::NEG_INFINITY
    };
    Point {
        value,
        n_pe,
        nu,
        xi,
    }
}

/// Best `ν` for a fixed `n_pe`: grid, then golden section on the bracket.
fn best_nu(q: &SamplingQuery, n_pe: u64) -> Point {
    let top = 0.5 - q.delta;
    let m = q.nu_grid.max(3);
    let step = top / (m + 1) as f64;
    let mut best = point(q, n_pe, step);
    let mut best_i = 1;
    for i in 2..=m {
        let p = point(q, n_pe, step * i as f64);
        if p.value > best.value {
            best = p;
            best_i = i;
        }
    }
    if best.value == f64::NEG_INFINITY {
        return best;
    }
    let lo = step * (best_i - 1) as f64;
    let hi = step * (best_i + 1) as f64;
    let (nu, _) = golden_min(
        lo.max(top * 1e-9),
        hi.min(top * (1.0 - 1e-9)),
        GOLDEN_ITERS,
        |nu| -point(q, n_pe, nu).value,
    );
    let refined = point(q, n_pe, nu);
    if refined.value > best.value {
        refined
    } else {
        best
    }
}

/// Maximise the integer key length over `n_pe`, `ν`, `ξ` and `ε_ec`.
///
/// `n_pe` is scanned on a coarse grid, then repeatedly on `±stride` around the
/// incumbent with a tenfold smaller stride until the stride is 1. Ties keep
/// the smaller `n_pe`, then the smaller `ν`.
pub fn sampling_optimize(q: &SamplingQuery) -> Result<SamplingReport> {
    check_delta(q.delta)?;
    if q.delta == 0.0 {
        return Err(Error::Domain("delta must be positive".into()));
    }
    if q.n < 2 {
        return Err(Error::Domain("n must be at least 2".into()));
    }
    if !(q.eps_qkd > 0.0 && q.eps_qkd < 1.0) {
        return Err(Error::Domain(format!(
            "eps_qkd = {} outside (0, 1)",
            q.eps_qkd
        )));
    }
    let max_pe = q.n - 1;
    let mut stride = (max_pe / q.n_pe_grid.max(1)).max(1);
    let mut best: Option<Point> = None;
    let consider = |best: &mut Option<Point>, p: Point| {
        let better = match best {
            None => true,
            Some(b) => p.value > b.value || (p.value == b.value && (p.n_pe, p.nu) < (b.n_pe, b.nu)),
        };
        if better {
            *best = Some(p);
        }
    };
    let mut n_pe = 1;
    while n_pe <= max_pe {
        consider(&mut best, best_nu(q, n_pe));
        n_pe += stride;
    }
    while stride > 1 {
        let centre = best.expect("grid is nonempty").n_pe;
        let lo = centre.saturating_sub(stride).max(1);
        let hi = (centre + stride).min(max_pe);
        stride = (stride / 10).max(1);
        let mut n_pe = lo;
        while n_pe <= hi {
            consider(&mut best, best_nu(q, n_pe));
            n_pe += stride;
        }
    }
    let b = best.expect("grid is nonempty");
    let n_rk = q.n - b.n_pe;

    let mut n_out = if b.value.is_finite() && b.value >= 1.0 {
        b.value.floor() as u64
    } else {
        0
    };
    // confirm the budget with the verbatim formulas; rounding can only help
    let eval = |n_out: u64| -> Result<(f64, SamplingEpsilons)> {
        let eps_ec = stationary_eps_ec(n_rk, q.delta, b.nu, n_out as f64);
        let e = sampling_epsilons(q.n, b.n_pe, q.delta, b.nu, b.xi, eps_ec, n_out as f64)?;
        Ok((eps_ec, e))
    };
    while n_out > 0 && eval(n_out)?.1.eps_qkd > q.eps_qkd {
        n_out -= 1;
    }
    let (eps_ec, e) = eval(n_out)?;
    let feasible = n_out > 0;
    Ok(SamplingReport {
        query: *q,
        feasible,
        n_out,
        rate: n_out as f64 / q.n as f64,
        n_pe: b.n_pe,
        n_rk,
        nu: b.nu,
        xi: b.xi,
        eps_ec,
        eps_pa: e.eps_pa,
        eps_pe: e.eps_pe,
        eps_qkd_achieved: e.eps_qkd,
        leakage: n_rk as f64 * h(q.delta) - eps_ec.log2(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub n: u64,
    pub delta: f64,
    pub eps_qkd: f64,
    pub c1: f64,
    pub c2: f64,
    /// `max((1−2h(δ))/2, (1−2h(δ)) − c₁n^{−1/3} − c₂n^{−1})`.
    pub bound_rate: f64,
}

/// Upper bound on the rate of any protocol of the sampling family.
pub fn sampling_upper_bound(n: u64, delta: f64, eps_qkd: f64) -> Result<BoundReport> {
    check_delta(delta)?;
    if delta == 0.0 || n == 0 {
        return Err(Error::Domain("need delta > 0 and n >= 1".into()));
    }
    if !(eps_qkd > 0.0 && eps_qkd <= 1.0) {
        return Err(Error::Domain(format!("eps_qkd = {eps_qkd} outside (0, 1]")));
    }
    let asym = asymptotic_rate(delta);
    if asym <= 0.0 {
        return Err(Error::Domain(format!("1 - 2h({delta}) <= 0")));
    }
    let hd = h(delta);
    let c1 = 3.0 / 2f64.powf(5.0 / 3.0)
        * asym.cbrt()
        * ((1.0 - hd) / (0.5 - delta)).powf(2.0 / 3.0)
        * (2.0 / eps_qkd).ln().cbrt();
    let c2 = 3.0 * (1.0 / eps_qkd).log2() + 3.0 * 3f64.log2() - 4.0;
    let nf = n as f64;
    let bound_rate = (asym / 2.0).max(asym - c1 / nf.cbrt() - c2 / nf);
    Ok(BoundReport {
        n,
        delta,
        eps_qkd,
        c1,
        c2,
        bound_rate,
    })
}
