//! The π(n,k,r) key-agreement protocol over an authenticated classical
//! channel, driven by a Pauli-error adversary.
//!
//! Two backends produce the measured strings. `Fast` samples the announced
//! syndromes from their exact law: `u_A, v_A, w_A` independent and uniform,
//! with `u_B = u_A + L₁α`, `v_B = v_A + M₂β`, `w_B = w_A + M₃β`.
//! `Statevector` measures an actual Bell state (n ≤ 4).

mod batch;
mod transcript;

pub use batch::{run_batch, BatchSummary, SUMMARY_SCHEMA};
pub use transcript::{parse_transcript, serialize_transcript, TRANSCRIPT_HEADER};

use num_bigint::BigUint;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::f2::{BitMatrix, BitVector, KeySchedule};
use crate::hashball::{ball_size, entropy_unchecked, BallSpec, DecodeResult, SyndromeDecoder};
use crate::pauli::{oracle_protocol_run, BellIndex, MAX_ORACLE_N};
use crate::rng::stream;

/// Balls up to this size are decoded by exhaustive search under [`Decoder::Auto`].
pub const EXHAUSTIVE_BALL_LIMIT: u64 = 1 << 22;

/// Largest collision bound `2^{−k+n·h(r/n)}` for which [`Decoder::Auto`]
/// falls back to the known-pattern decoder.
pub const KNOWN_PATTERN_MAX_COLLISION: f64 = 1.0 / (1u64 << 20) as f64;

const PROB_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ProtocolParams {
    pub n: usize,
    pub k: usize,
    pub r: usize,
}

impl ProtocolParams {
    pub fn new(n: usize, k: usize, r: usize) -> Result<Self> {
        if k == 0 || 2 * k >= n {
            return Err(Error::InvalidParams(format!(
                "need 1 <= k and 2k < n, got n={n}, k={k}"
            )));
        }
        if 2 * r > n {
            return Err(Error::InvalidParams(format!(
                "need 2r <= n, got n={n}, r={r}"
            )));
        }
        Ok(Self { n, k, r })
    }

    pub fn key_len(&self) -> usize {
        self.n - 2 * self.k
    }

    pub fn ball(&self) -> BallSpec {
        BallSpec {
            n: self.n,
            r: self.r,
        }
    }

    /// `−k + n·h(r/n)`, the log₂ of the per-syndrome collision bound.
    pub fn collision_exponent(&self) -> f64 {
        -(self.k as f64) + self.n as f64 * entropy_unchecked(self.r as f64 / self.n as f64)
    }

    /// `2n·h(r/n) < 2k`; reported, never enforced.
    pub fn meets_security_condition(&self) -> bool {
        self.collision_exponent() < 0.0
    }

    /// Bound on `Pr(key_A ≠ key_B ∧ accept)`: `2·2^{−k+n·h(r/n)}`.
    pub fn correctness_bound(&self) -> f64 {
        2f64.powf(1.0 + self.collision_exponent())
    }

    /// Distance between the real and ideal acceptance probabilities:
    /// `2^{−k/2 + n·h(r/n)/2 + 3/2}`.
    pub fn robustness_slack(&self) -> f64 {
        2f64.powf(self.collision_exponent() / 2.0 + 1.5)
    }
}

/// Bit-flip pattern `alpha` and phase-flip pattern `beta`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ErrorPattern {
    pub alpha: BitVector,
    pub beta: BitVector,
}

impl ErrorPattern {
    pub fn new(alpha: BitVector, beta: BitVector) -> Result<Self> {
        if alpha.len() != beta.len() {
            return Err(Error::DimensionMismatch(format!(
                "alpha has {} bits, beta has {}",
                alpha.len(),
                beta.len()
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            alpha: BitVector::zeros(n),
            beta: BitVector::zeros(n),
        }
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    /// Both flip counts within `r`.
    pub fn in_ball(&self, spec: BallSpec) -> bool {
        spec.contains(&self.alpha) && spec.contains(&self.beta)
    }

    pub fn bell_index(&self) -> BellIndex {
        BellIndex {
            alpha: self.alpha.clone(),
            beta: self.beta.clone(),
        }
    }
}

/// Distribution of the Bell label the adversary prepares.
#[derive(Clone, Debug, PartialEq)]
pub enum EveModel {
    None,
    Fixed(ErrorPattern),
    /// Each qubit independently suffers a bit flip with probability `p` and,
    /// independently, a phase flip with probability `p`.
    Iid(f64),
    Custom(Vec<(ErrorPattern, f64)>),
}

impl EveModel {
    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            EveModel::None => Ok(()),
            EveModel::Fixed(p) => check_len(p, n),
            EveModel::Iid(p) => {
                if (0.0..=1.0).contains(p) {
                    Ok(())
                } else {
                    Err(Error::InvalidEve(format!(
                        "flip probability {p} outside [0, 1]"
                    )))
                }
            }
            EveModel::Custom(dist) => {
                if dist.is_empty() {
                    return Err(Error::InvalidEve("empty distribution".into()));
                }
                let mut total = 0.0;
                for (pat, p) in dist {
                    check_len(pat, n)?;
                    if !(p.is_finite() && *p >= 0.0) {
                        return Err(Error::InvalidEve(format!("bad probability {p}")));
                    }
                    total += p;
                }
                if (total - 1.0).abs() > PROB_TOL {
                    return Err(Error::InvalidEve(format!("probabilities sum to {total}")));
                }
                Ok(())
            }
        }
    }

    /// Draw one pattern; assumes [`EveModel::validate`] passed.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> ErrorPattern {
        match self {
            EveModel::None => ErrorPattern::zero(n),
            EveModel::Fixed(p) => p.clone(),
            EveModel::Iid(p) => {
                let mut draw = || {
                    let mut v = BitVector::zeros(n);
                    for i in 0..n {
                        if rng.gen_bool(*p) {
                            v.set(i, true);
                        }
                    }
                    v
                };
                let alpha = draw();
                let beta = draw();
                ErrorPattern { alpha, beta }
            }
            EveModel::Custom(dist) => {
                let x: f64 = rng.gen();
                let mut acc = 0.0;
                for (pat, p) in dist {
                    acc += p;
                    if x < acc {
                        return pat.clone();
                    }
                }
                dist.iter()
                    .rev()
                    .find(|(_, p)| *p > 0.0)
                    .map(|(pat, _)| pat.clone())
                    .expect("validated distribution has positive mass")
            }
        }
    }
}

fn check_len(p: &ErrorPattern, n: usize) -> Result<()> {
    if p.n() != n {
        return Err(Error::InvalidEve(format!(
            "pattern has {} bits, n = {n}",
            p.n()
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[default]
    Fast,
    Statevector,
}

/// How `s` and `t` are computed from the announced syndromes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decoder {
    /// Brute-force search of the ball in canonical order.
    Exhaustive,
    /// Returns the true pattern if it lies in the ball, else ⊥. Differs from
    /// the exhaustive decoder only when another ball element shares the
    /// syndrome, which happens with probability at most `2^{−k+n·h(r/n)}`.
    KnownPattern,
    /// Exhaustive for balls up to [`EXHAUSTIVE_BALL_LIMIT`], known-pattern
    /// beyond that when the collision bound is below
    /// [`KNOWN_PATTERN_MAX_COLLISION`], otherwise a resource error.
    #[default]
    Auto,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunConfig {
    pub backend: Backend,
    pub decoder: Decoder,
}

impl RunConfig {
    pub fn new(backend: Backend) -> Self {
        Self {
            backend,
            decoder: Decoder::Auto,
        }
    }

    fn resolve(&self, params: &ProtocolParams) -> Result<Decoder> {
        if self.backend == Backend::Statevector && params.n > MAX_ORACLE_N {
            return Err(Error::Resource(format!(
                "statevector backend needs n <= {MAX_ORACLE_N}, got {}",
                params.n
            )));
        }
        match self.decoder {
            Decoder::Auto => {
                if ball_size(params.ball()) <= BigUint::from(EXHAUSTIVE_BALL_LIMIT) {
                    Ok(Decoder::Exhaustive)
                } else if 2f64.powf(params.collision_exponent()) <= KNOWN_PATTERN_MAX_COLLISION {
                    Ok(Decoder::KnownPattern)
                } else {
                    Err(Error::Resource(format!(
                        "ball B_{}(0,{}) too large to search and collision bound not negligible",
                        params.n, params.r
                    )))
                }
            }
            d => Ok(d),
        }
    }
}

/// Which syndrome test failed when the protocol aborts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rejection {
    BitFlip,
    PhaseFlip,
    Both,
}

impl Rejection {
    pub fn as_str(&self) -> &'static str {
        match self {
            Rejection::BitFlip => "bit",
            Rejection::PhaseFlip => "phase",
            Rejection::Both => "both",
        }
    }

    fn from_decodes(s: &DecodeResult, t: &DecodeResult) -> Option<Self> {
        match (s.is_bottom(), t.is_bottom()) {
            (false, false) => None,
            (true, false) => Some(Rejection::BitFlip),
            (false, true) => Some(Rejection::PhaseFlip),
            (true, true) => Some(Rejection::Both),
        }
    }
}

/// Everything announced, decoded and output in one protocol run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunRecord {
    pub params: ProtocolParams,
    /// Seed of the stream `L` was drawn from; `None` when `L` was supplied.
    pub l_seed: Option<u64>,
    pub l: BitMatrix,
    pub pattern: ErrorPattern,
    pub u_a: BitVector,
    pub u_b: BitVector,
    pub v_a: BitVector,
    pub v_b: BitVector,
    pub w_a: BitVector,
    pub w_b: BitVector,
    pub s: DecodeResult,
    pub t: DecodeResult,
    pub rejection: Option<Rejection>,
    pub key_a: Option<BitVector>,
    pub key_b: Option<BitVector>,
}

impl RunRecord {
    pub fn accepted(&self) -> bool {
        self.rejection.is_none()
    }

    /// `Some(key_A == key_B)` for accepted runs.
    pub fn keys_match(&self) -> Option<bool> {
        match (&self.key_a, &self.key_b) {
            (Some(a), Some(b)) => Some(a == b),
            _ => None,
        }
    }
}

/// One run with the default decoder.
pub fn run<R: Rng + ?Sized>(
    params: &ProtocolParams,
    eve: &EveModel,
    backend: Backend,
    rng: &mut R,
) -> Result<RunRecord> {
    run_with(params, eve, RunConfig::new(backend), rng)
}

/// Draws the pattern, then a seed for `L`, then the measured strings, all
/// from `rng`.
pub fn run_with<R: Rng + ?Sized>(
    params: &ProtocolParams,
    eve: &EveModel,
    cfg: RunConfig,
    rng: &mut R,
) -> Result<RunRecord> {
    eve.validate(params.n)?;
    let decoder = cfg.resolve(params)?;
    let pattern = eve.sample(params.n, rng);
    let l_seed: u64 = rng.gen();
    let ks = KeySchedule::sample(params.n, params.k, &mut stream(l_seed))?;
    let mut rec = execute(params, &ks, &pattern, cfg.backend, decoder, rng)?;
    rec.l_seed = Some(l_seed);
    Ok(rec)
}

/// One run with a caller-supplied key schedule and error pattern.
pub fn run_with_schedule<R: Rng + ?Sized>(
    params: &ProtocolParams,
    ks: &KeySchedule,
    pattern: &ErrorPattern,
    cfg: RunConfig,
    rng: &mut R,
) -> Result<RunRecord> {
    if ks.n != params.n || ks.k != params.k {
        return Err(Error::DimensionMismatch(format!(
            "schedule is for n={}, k={}",
            ks.n, ks.k
        )));
    }
    check_len(pattern, params.n)?;
    let decoder = cfg.resolve(params)?;
    execute(params, ks, pattern, cfg.backend, decoder, rng)
}

fn execute<R: Rng + ?Sized>(
    params: &ProtocolParams,
    ks: &KeySchedule,
    pattern: &ErrorPattern,
    backend: Backend,
    decoder: Decoder,
    rng: &mut R,
) -> Result<RunRecord> {
    let (u_a, u_b, v_a, v_b, w_a, w_b) = match backend {
        Backend::Fast => {
            let u_a = BitVector::random(params.k, rng);
            let v_a = BitVector::random(params.k, rng);
            let w_a = BitVector::random(params.key_len(), rng);
            let u_b = u_a.xor(&ks.l1.mul_vec(&pattern.alpha)?)?;
            let v_b = v_a.xor(&ks.m2.mul_vec(&pattern.beta)?)?;
            let w_b = w_a.xor(&ks.m3.mul_vec(&pattern.beta)?)?;
            (u_a, u_b, v_a, v_b, w_a, w_b)
        }
        Backend::Statevector => {
            let raw = oracle_protocol_run(ks, &pattern.bell_index(), rng)?;
            (raw.u_a, raw.u_b, raw.v_a, raw.v_b, raw.w_a, raw.w_b)
        }
    };
    let du = u_a.xor(&u_b)?;
    let dv = v_a.xor(&v_b)?;
    let (s, t) = match decoder {
        Decoder::KnownPattern => known_pattern_decode(ks, pattern, params.ball(), &du, &dv)?,
        _ => decide(ks, params.ball(), &du, &dv)?,
    };
    let rejection = Rejection::from_decodes(&s, &t);
    let (key_a, key_b) = match (&rejection, t.pattern()) {
        (None, Some(tp)) => (Some(w_a.clone()), Some(w_b.xor(&ks.m3.mul_vec(tp)?)?)),
        _ => (None, None),
    };
    Ok(RunRecord {
        params: *params,
        l_seed: None,
        l: ks.l.clone(),
        pattern: pattern.clone(),
        u_a,
        u_b,
        v_a,
        v_b,
        w_a,
        w_b,
        s,
        t,
        rejection,
        key_a,
        key_b,
    })
}

/// `s = g(L₁, u_A+u_B)` and `t = g(M₂, v_A+v_B)` by exhaustive search; the
/// accept decision depends on nothing else.
pub fn decide(
    ks: &KeySchedule,
    spec: BallSpec,
    du: &BitVector,
    dv: &BitVector,
) -> Result<(DecodeResult, DecodeResult)> {
    let s = SyndromeDecoder::new(&ks.l1, spec)?.decode(du)?;
    let t = SyndromeDecoder::new(&ks.m2, spec)?.decode(dv)?;
    Ok((s, t))
}

fn known_pattern_decode(
    ks: &KeySchedule,
    pattern: &ErrorPattern,
    spec: BallSpec,
    du: &BitVector,
    dv: &BitVector,
) -> Result<(DecodeResult, DecodeResult)> {
    let guess = |h: &BitMatrix, e: &BitVector, y: &BitVector| -> Result<DecodeResult> {
        Ok(if spec.contains(e) && h.mul_vec(e)? == *y {
            DecodeResult::Pattern(e.clone())
        } else {
            DecodeResult::Bottom
        })
    };
    Ok((
        guess(&ks.l1, &pattern.alpha, du)?,
        guess(&ks.m2, &pattern.beta, dv)?,
    ))
}

/// Ideal acceptance probability `Σ_{wt(α)≤r, wt(β)≤r} p(α,β)`.
///
/// The real protocol accepts with a probability within
/// [`ProtocolParams::robustness_slack`] of this value.
pub fn accept_probability(params: &ProtocolParams, eve: &EveModel) -> Result<f64> {
    eve.validate(params.n)?;
    let spec = params.ball();
    Ok(match eve {
        EveModel::None => 1.0,
        EveModel::Fixed(p) => {
            if p.in_ball(spec) {
                1.0
            } else {
                0.0
            }
        }
        EveModel::Iid(p) => {
            let one = binomial_cdf(params.n, params.r, *p);
            one * one
        }
        EveModel::Custom(dist) => dist
            .iter()
            .filter(|(pat, _)| pat.in_ball(spec))
            .map(|(_, p)| p)
            .sum(),
    })
}

/// `Pr(Bin(n, p) ≤ r)`.
fn binomial_cdf(n: usize, r: usize, p: f64) -> f64 {
    if p == 0.0 {
        return 1.0;
    }
    if p == 1.0 {
        return if r >= n { 1.0 } else { 0.0 };
    }
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let mut log_choose = 0.0;
    let mut total = 0.0;
    for j in 0..=r.min(n) {
        if j > 0 {
            log_choose += ((n - j + 1) as f64).ln() - (j as f64).ln();
        }
        total += (log_choose + j as f64 * lp + (n - j) as f64 * lq).exp();
    }
    total.min(1.0)
}
