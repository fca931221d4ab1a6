use serde::Serialize;

use super::{
    sampling_optimize, sampling_upper_bound, tuh_report, Rounding, SamplingQuery, TuhQuery,
};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "n,delta,epsilon,tuh_k,tuh_out,tuh_rate,samp_out,samp_rate,bound_rate";

/// One block size of the two-universal versus sampling comparison.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveRow {
    pub n: u64,
    pub delta: f64,
    pub epsilon: f64,
    pub tuh_k: i64,
    pub tuh_out: i64,
    pub tuh_rate: f64,
    pub samp_out: u64,
    pub samp_rate: f64,
    pub bound_rate: f64,
}

/// Both protocols at the same `δ` and security `ε` over a grid of block sizes.
pub fn compare_curves(
    delta: f64,
    epsilon: f64,
    ns: &[u64],
    rounding: Rounding,
) -> Result<Vec<CurveRow>> {
    if ns.is_empty() {
        return Err(Error::InvalidParams("empty block-size grid".into()));
    }
    ns.iter()
        .map(|&n| {
            let t = tuh_report(&TuhQuery::new(n, delta, epsilon, rounding))?;
            let s = sampling_optimize(&SamplingQuery::new(n, delta, epsilon))?;
            let b = sampling_upper_bound(n, delta, epsilon)?;
            Ok(CurveRow {
                n,
                delta,
                epsilon,
                tuh_k: t.k,
                tuh_out: t.output_size,
                tuh_rate: t.rate,
                samp_out: s.n_out,
                samp_rate: s.rate,
                bound_rate: b.bound_rate,
            })
        })
        .collect()
}

pub fn curves_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{:e},{},{},{},{},{},{}\n",
            r.n,
            r.delta,
            r.epsilon,
            r.tuh_k,
            r.tuh_out,
            r.tuh_rate,
            r.samp_out,
            r.samp_rate,
            r.bound_rate
        ));
    }
    out
}
