use serde::Serialize;

use super::{asymptotic_rate, check_delta, check_epsilon};
use crate::error::{Error, Result};
use crate::hashball::entropy_unchecked as h;

/// How the tolerated flip count `r` is derived from an error rate `δ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub enum Rounding {
    /// `r = ⌊δn⌋`, entropy term `h(r/n)`.
    #[default]
    #[serde(rename = "floor_r")]
    Floor,
    /// `r = ⌈δn⌉`, entropy term `h(r/n)`.
    #[serde(rename = "ceil_r")]
    Ceil,
    /// No integer `r`; entropy term `h(δ)`.
    #[serde(rename = "rate_direct")]
    Direct,
}

impl Rounding {
    pub fn as_str(&self) -> &'static str {
        match self {
            Rounding::Floor => "floor_r",
            Rounding::Ceil => "ceil_r",
            Rounding::Direct => "rate_direct",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "floor_r" | "floor" => Ok(Rounding::Floor),
            "ceil_r" | "ceil" => Ok(Rounding::Ceil),
            "rate_direct" | "direct" => Ok(Rounding::Direct),
            _ => Err(Error::InvalidParams(format!(
                "unknown rounding '{s}' (floor_r, ceil_r, rate_direct)"
            ))),
        }
    }

    /// `(r, h(r/n))`, with `r = None` for [`Rounding::Direct`].
    fn entropy(&self, n: u64, delta: f64) -> (Option<u64>, f64) {
        let x = delta * n as f64;
        let r = match self {
            Rounding::Floor => x.floor() as u64,
            Rounding::Ceil => x.ceil() as u64,
            Rounding::Direct => return (None, h(delta)),
        };
        (Some(r), h(r as f64 / n as f64))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TuhQuery {
    pub n: u64,
    pub delta: f64,
    pub epsilon: f64,
    pub rounding: Rounding,
}

impl TuhQuery {
    pub fn new(n: u64, delta: f64, epsilon: f64, rounding: Rounding) -> Self {
        Self {
            n,
            delta,
            epsilon,
            rounding,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TuhReport {
    pub query: TuhQuery,
    pub r: Option<u64>,
    /// Syndrome length `⌈n·h + 2log₂(1/ε) + 5⌉`.
    pub k: i64,
    /// `n − 2k`; may be non-positive.
    pub output_size: i64,
    pub rate: f64,
    /// `2^{−k/2 + n·h/2 + 5/2}`.
    pub security_achieved: f64,
    /// `(1 − 2h(δ)) − rate`.
    pub deviation: f64,
    /// `1 − 2h(δ) > 0`.
    pub positive_asymptotic_rate: bool,
    pub feasible: bool,
}

pub fn tuh_report(q: &TuhQuery) -> Result<TuhReport> {
    if q.n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    check_delta(q.delta)?;
    check_epsilon(q.epsilon)?;
    let n = q.n as f64;
    let (r, hr) = q.rounding.entropy(q.n, q.delta);
    let log_inv_eps = -q.epsilon.log2();
    let k = (n * hr + 2.0 * log_inv_eps + 5.0).ceil() as i64;
    let output_size = q.n as i64 - 2 * k;
    let rate = output_size as f64 / n;
    let security_achieved = 2f64.powf(-(k as f64) / 2.0 + n * hr / 2.0 + 2.5);
    let asym = asymptotic_rate(q.delta);
    Ok(TuhReport {
        query: *q,
        r,
        k,
        output_size,
        rate,
        security_achieved,
        deviation: asym - rate,
        positive_asymptotic_rate: asym > 0.0,
        feasible: output_size > 0,
    })
}

/// Smallest `n` whose report yields at least `target_bits` output bits.
///
/// The output size is not monotone in `n` under integer rounding, so after
/// doubling to some feasible `n` the range below it is scanned in full.
pub fn min_blocksize(
    delta: f64,
    epsilon: f64,
    target_bits: u64,
    rounding: Rounding,
) -> Result<u64> {
    if target_bits == 0 {
        return Err(Error::InvalidParams(
            "target_bits must be at least 1".into(),
        ));
    }
    check_delta(delta)?;
    check_epsilon(epsilon)?;
    if asymptotic_rate(delta) <= 0.0 {
        return Err(Error::Infeasible(format!(
            "1 - 2h({delta}) <= 0: no positive key rate"
        )));
    }
    let out = |n: u64| -> Result<i64> {
        Ok(tuh_report(&TuhQuery::new(n, delta, epsilon, rounding))?.output_size)
    };
    let target = target_bits as i64;
    let mut hi = target_bits.max(1);
    while out(hi)? < target {
        hi = hi
            .checked_mul(2)
            .ok_or_else(|| Error::Infeasible("block size search overflowed".into()))?;
    }
    for n in 1..hi {
        if out(n)? >= target {
            return Ok(n);
        }
    }
    Ok(hi)
}
