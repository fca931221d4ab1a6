//! Desk-scale verification suites: exhaustive GF(2) counts, the ball decoder,
//! the Pauli/Bell identities on the dense oracle, protocol invariants and the
//! rate formulas. Each suite is a list of named checks; the CLI prints them.

use std::collections::HashMap;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::Rng;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::f2::{
    count_full_rank, exact_collision_probability, full_rank_matrices, sample_invertible,
    two_universal_lower_bound, BitMatrix, BitVector, KeySchedule,
};
use crate::hashball::{ball_iter, ball_size, binary_entropy, f_ball, g_ball, BallSpec};
use crate::pauli::{
    accept_projection_weight, bell_action_deviation, combination_deviation,
    max_entangled_deviation, partial_bell_sum_deviation, pauli_shift_deviation, random_full_rank,
    random_tuple, random_y_free_pauli, BellIndex,
};
use crate::protocol::{
    accept_probability, parse_transcript, run_batch, run_with, run_with_schedule,
    serialize_transcript, Backend, Decoder, ErrorPattern, EveModel, ProtocolParams, RunConfig,
};
use crate::rates::{
    asymptotic_rate, eps_pe_floor, eps_pe_inf, min_blocksize, sampling_optimize,
    sampling_upper_bound, tuh_report, Rounding, SamplingQuery, TuhQuery,
};
use crate::rng::{child_seed, stream, DEFAULT_SEED};

pub const SELFTEST_SCHEMA: &str = "uhqkd.selftest.v1";

/// Suite names in the order they run.
pub const SUITES: &[&str] = &["f2", "hashball", "pauli", "protocol", "rates"];

const OP_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Default)]
pub struct SelftestOptions {
    pub seed: u64,
    /// Run only these suites; all when empty.
    pub suites: Vec<String>,
    /// Negative control: swap in an entropy function with a mutated
    /// log-base constant. Every run with this set must fail.
    pub inject_fault: bool,
}

impl SelftestOptions {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteResult {
    pub suite: String,
    pub passed: bool,
    pub elapsed_ms: u64,
    pub checks: Vec<CheckResult>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelftestReport {
    pub schema: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub fault_injected: bool,
    pub passed: bool,
    pub failed_suites: Vec<String>,
    pub suites: Vec<SuiteResult>,
}

impl SelftestReport {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "uhqkd selftest {} seed={:#x}{}\n",
            self.version,
            self.seed,
            if self.fault_injected {
                " (fault injected)"
            } else {
                ""
            }
        );
        for s in &self.suites {
            for c in &s.checks {
                out.push_str(&format!(
                    "{} {}/{}: {}\n",
                    if c.passed { "PASS" } else { "FAIL" },
                    s.suite,
                    c.name,
                    c.detail
                ));
            }
        }
        if self.passed {
            out.push_str("all suites passed\n");
        } else {
            out.push_str(&format!(
                "failed suites: {}\n",
                self.failed_suites.join(", ")
            ));
        }
        out
    }
}

/// Run the selected suites. Unknown suite names are an error, not a skip.
pub fn run_selftest(opts: &SelftestOptions) -> Result<SelftestReport> {
    for s in &opts.suites {
        if !SUITES.contains(&s.as_str()) {
            return Err(Error::InvalidParams(format!(
                "unknown suite '{s}' (expected one of {})",
                SUITES.join(", ")
            )));
        }
    }
    let selected: Vec<&str> = SUITES
        .iter()
        .copied()
        .filter(|s| opts.suites.is_empty() || opts.suites.iter().any(|x| x == s))
        .collect();
    let mut suites = Vec::new();
    for (i, name) in selected.iter().enumerate() {
        let mut ctx = Ctx {
            seed: child_seed(opts.seed, i as u64),
            fault: opts.inject_fault,
            checks: Vec::new(),
        };
        let start = Instant::now();
        match *name {
            "f2" => suite_f2(&mut ctx),
            "hashball" => suite_hashball(&mut ctx),
            "pauli" => suite_pauli(&mut ctx),
            "protocol" => suite_protocol(&mut ctx),
            _ => suite_rates(&mut ctx),
        }
        let passed = ctx.checks.iter().all(|c| c.passed);
        suites.push(SuiteResult {
            suite: name.to_string(),
            passed,
            elapsed_ms: start.elapsed().as_millis() as u64,
            checks: ctx.checks,
        });
    }
    let failed_suites: Vec<String> = suites
        .iter()
        .filter(|s| !s.passed)
        .map(|s| s.suite.clone())
        .collect();
    Ok(SelftestReport {
        schema: SELFTEST_SCHEMA,
        version: crate::VERSION,
        seed: opts.seed,
        fault_injected: opts.inject_fault,
        passed: failed_suites.is_empty(),
        failed_suites,
        suites,
    })
}

/// All suites with the default seed.
pub fn run_all() -> Result<SelftestReport> {
    run_selftest(&SelftestOptions::new(DEFAULT_SEED))
}

struct Ctx {
    seed: u64,
    fault: bool,
    checks: Vec<CheckResult>,
}

impl Ctx {
    /// Record a check; an `Err` from the body counts as a failure.
    fn check(&mut self, name: &str, body: impl FnOnce() -> Result<(bool, String)>) {
        let (passed, detail) = body().unwrap_or_else(|e| (false, format!("error: {e}")));
        self.checks.push(CheckResult {
            name: name.into(),
            passed,
            detail,
        });
    }
}

fn entropy(fault: bool, p: f64) -> Result<f64> {
    if fault {
        // log₂ through a corrupted ln 2
        let term = |q: f64| if q <= 0.0 { 0.0 } else { -q * q.ln() / 0.69 };
        Ok(term(p) + term(1.0 - p))
    } else {
        binary_entropy(p)
    }
}

fn suite_f2(ctx: &mut Ctx) {
    let seed = ctx.seed;
    ctx.check("collision-probability-exhaustive", || {
        let mut cases = 0;
        for n in 1..=4usize {
            for k in 1..=n {
                let mats = full_rank_matrices(k, n)?;
                let total = count_full_rank(k, n)?;
                if num_bigint::BigUint::from(mats.len()) != total {
                    return Ok((false, format!("k={k} n={n}: {} matrices", mats.len())));
                }
                let want = exact_collision_probability(k, n)?;
                let lower = two_universal_lower_bound(
                    &(num_bigint::BigUint::from(1u8) << n),
                    &(num_bigint::BigUint::from(1u8) << k),
                )?;
                if want != lower {
                    return Ok((
                        false,
                        format!("k={k} n={n}: closed form off the lower bound"),
                    ));
                }
                for x in 1..(1u64 << n) {
                    let x = BitVector::from_u64(n, x);
                    let mut zero = 0usize;
                    for l in &mats {
                        if l.mul_vec(&x)?.is_zero() {
                            zero += 1;
                        }
                    }
                    let got = num_rational::BigRational::new(zero.into(), mats.len().into());
                    if got != want {
                        return Ok((false, format!("k={k} n={n} x={x}: {got} != {want}")));
                    }
                    cases += 1;
                }
            }
        }
        Ok((true, format!("{cases} (k, n, x) cases exact")))
    });

    ctx.check("invert-roundtrip", || {
        let mut rng = stream(seed);
        for n in [1, 2, 7, 63, 64, 65, 130, 200] {
            let a = sample_invertible(n, &mut rng);
            let inv = a.invert()?;
            if a.mul(&inv)? != BitMatrix::identity(n) || inv.mul(&a)? != BitMatrix::identity(n) {
                return Ok((false, format!("n={n}")));
            }
            let r = BitMatrix::random(n, n, &mut rng);
            if r.is_invertible() != (r.rank() == n) {
                return Ok((false, format!("rank/invertibility disagree at n={n}")));
            }
        }
        Ok((true, "A·A⁻¹ = A⁻¹·A = I up to n=200".into()))
    });

    ctx.check("gl3-uniform", || {
        let mut rng = stream(seed ^ 1);
        let per_cell = 60usize;
        let draws = 168 * per_cell;
        let mut counts: HashMap<BitMatrix, usize> = HashMap::new();
        for _ in 0..draws {
            *counts.entry(sample_invertible(3, &mut rng)).or_default() += 1;
        }
        if counts.len() != 168 {
            return Ok((false, format!("{} distinct matrices", counts.len())));
        }
        let e = per_cell as f64;
        let chi: f64 = counts.values().map(|&c| (c as f64 - e).powi(2) / e).sum();
        let p = 1.0 - ChiSquared::new(167.0).expect("dof").cdf(chi);
        Ok((p > 1e-3, format!("chi2={chi:.1} p={p:.3}")))
    });

    ctx.check("key-schedule-duality", || {
        let mut rng = stream(seed ^ 2);
        for (n, k) in [(5, 2), (16, 6), (100, 40)] {
            let ks = KeySchedule::sample(n, k, &mut rng)?;
            if ks.l.mul(&ks.m.transpose())? != BitMatrix::identity(n) {
                return Ok((false, format!("L·Mᵀ ≠ I at n={n}")));
            }
            let l1m2 = ks.l1.mul(&ks.m2.transpose())?;
            let l1m3 = ks.l1.mul(&ks.m3.transpose())?;
            if !l1m2.is_zero() || !l1m3.is_zero() {
                return Ok((false, format!("L₁ not orthogonal to M₂, M₃ at n={n}")));
            }
        }
        Ok((true, "L·Mᵀ = I and L₁ ⟂ M₂, M₃".into()))
    });
}

fn suite_hashball(ctx: &mut Ctx) {
    let fault = ctx.fault;
    let h = |p: f64| entropy(fault, p);

    ctx.check("entropy-reference", || {
        let refs = [
            (0.5, 1.0),
            (0.25, 2.0 - 0.75 * 3f64.log2()),
            (0.125, 3.0 - 0.875 * 7f64.log2()),
            (0.0, 0.0),
            (1.0, 0.0),
        ];
        let mut worst: f64 = 0.0;
        for (p, want) in refs {
            worst = worst.max((h(p)? - want).abs());
        }
        Ok((worst < 1e-12, format!("max error {worst:.2e}")))
    });

    ctx.check("ball-size-entropy-bound", || {
        for n in [8usize, 20, 64, 256] {
            for r in 0..=n / 2 {
                let size = ball_size(BallSpec::new(n, r)?)
                    .to_f64()
                    .unwrap_or(f64::INFINITY);
                let bound = 2f64.powf(n as f64 * h(r as f64 / n as f64)?);
                let lower = bound / (n as f64 + 1.0);
                if size > bound * (1.0 + 1e-9) || size < lower * (1.0 - 1e-9) {
                    return Ok((
                        false,
                        format!("n={n} r={r}: |B|={size:.4e}, 2^(nh)={bound:.4e}"),
                    ));
                }
            }
        }
        Ok((true, "2^(nh)/(n+1) <= |B| <= 2^(nh)".into()))
    });

    ctx.check("ball-enumeration", || {
        for (n, r) in [(6, 2), (10, 3), (12, 6)] {
            let spec = BallSpec::new(n, r)?;
            let items: Vec<BitVector> = ball_iter(spec).collect();
            let size = ball_size(spec).to_usize().unwrap_or(0);
            let mut sorted = items.clone();
            sorted.sort();
            sorted.dedup();
            let ordered = items
                .windows(2)
                .all(|w| (w[0].weight(), w[0].to_u64()) < (w[1].weight(), w[1].to_u64()));
            if items.len() != size || sorted.len() != size || !ordered {
                return Ok((false, format!("n={n} r={r}")));
            }
        }
        Ok((true, "sizes, distinctness and canonical order".into()))
    });

    ctx.check("f-vs-g-exhaustive-n4-k3-r1", || {
        let (n, k, r) = (4usize, 3usize, 1usize);
        let spec = BallSpec::new(n, r)?;
        let mats = full_rank_matrices(k, n)?;
        let coll = exact_collision_probability(k, n)?.to_f64().unwrap_or(1.0);
        let per_alpha_bound = coll * ball_size(spec).to_f64().unwrap_or(f64::INFINITY);
        let thm_bound = 2f64.powf(-(k as f64) + n as f64 * h(r as f64 / n as f64)?);
        let mut worst: f64 = 0.0;
        let mut total_fail = 0usize;
        for a in 0..(1u64 << n) {
            let alpha = BitVector::from_u64(n, a);
            let f = f_ball(&alpha, spec)?;
            let mut fail = 0usize;
            for l in &mats {
                if g_ball(l, &l.mul_vec(&alpha)?, spec)? != f {
                    fail += 1;
                }
            }
            if spec.contains(&alpha) {
                worst = worst.max(fail as f64 / mats.len() as f64);
            }
            total_fail += fail;
        }
        let ok = worst <= per_alpha_bound + 1e-12 && worst < thm_bound;
        Ok((
            ok,
            format!(
                "{} matrices, worst in-ball failure {worst:.4} <= {per_alpha_bound:.4}, < {thm_bound:.4}; {total_fail} total mismatches",
                mats.len()
            ),
        ))
    });
}

fn suite_pauli(ctx: &mut Ctx) {
    const INSTANCES: usize = 50;
    let seed = ctx.seed;

    ctx.check("pauli-shift", || {
        let mut rng = stream(seed);
        let mut worst: f64 = 0.0;
        for i in 0..INSTANCES {
            let n = 1 + i % 3;
            let t = random_tuple(n, &mut rng);
            let (u, v) = random_y_free_pauli(n, &mut rng);
            worst = worst.max(pauli_shift_deviation(&t, &u, &v)?);
        }
        Ok((
            worst < OP_TOL,
            format!("max deviation {worst:.1e} over {INSTANCES}"),
        ))
    });

    ctx.check("linear-combination", || {
        let mut rng = stream(seed ^ 1);
        let mut worst: f64 = 0.0;
        for i in 0..INSTANCES {
            let n = 1 + i % 3;
            let t = random_tuple(n, &mut rng);
            let k = rng.gen_range(1..=t.m());
            let l = random_full_rank(k, t.m(), &mut rng);
            worst = worst.max(combination_deviation(&t, &l)?);
        }
        Ok((
            worst < OP_TOL,
            format!("max deviation {worst:.1e} over {INSTANCES}"),
        ))
    });

    ctx.check("partial-bell-sums", || {
        let mut rng = stream(seed ^ 2);
        let mut worst: f64 = 0.0;
        for i in 0..INSTANCES {
            let n = 1 + i % 3;
            let a = BitVector::random(n, &mut rng);
            let b = BitVector::random(n, &mut rng);
            worst = worst.max(partial_bell_sum_deviation(&a, &b)?);
        }
        Ok((
            worst < OP_TOL,
            format!("max deviation {worst:.1e} over {INSTANCES}"),
        ))
    });

    ctx.check("maximally-entangled", || {
        let mut rng = stream(seed ^ 3);
        let mut worst: f64 = 0.0;
        for i in 0..INSTANCES {
            let dim = 1usize << (1 + i % 3);
            let m = DMatrix::from_fn(dim, dim, |_, _| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            worst = worst.max(max_entangled_deviation(&m)?);
        }
        Ok((
            worst < OP_TOL,
            format!("max deviation {worst:.1e} over {INSTANCES}"),
        ))
    });

    ctx.check("bell-action", || {
        let mut rng = stream(seed ^ 4);
        let mut worst: f64 = 0.0;
        for i in 0..INSTANCES {
            let n = 1 + i % 3;
            let t = random_tuple(n, &mut rng);
            let idx = BellIndex::new(
                BitVector::random(n, &mut rng),
                BitVector::random(n, &mut rng),
            )?;
            worst = worst.max(bell_action_deviation(&t, &idx)?);
        }
        Ok((
            worst < OP_TOL,
            format!("max deviation {worst:.1e} over {INSTANCES}"),
        ))
    });

    ctx.check("accept-projector-weight", || {
        let mut rng = stream(seed ^ 5);
        let spec = BallSpec::new(3, 1)?;
        let mut worst: f64 = 0.0;
        for _ in 0..10 {
            let mut dist = Vec::new();
            let mut total = 0.0;
            for a in 0..8u64 {
                for b in 0..8u64 {
                    let p: f64 = rng.gen();
                    total += p;
                    dist.push((
                        BellIndex::new(BitVector::from_u64(3, a), BitVector::from_u64(3, b))?,
                        p,
                    ));
                }
            }
            for d in dist.iter_mut() {
                d.1 /= total;
            }
            let (direct, traced) = accept_projection_weight(&dist, spec)?;
            worst = worst.max((direct - traced).abs());
        }
        Ok((worst < OP_TOL, format!("|Σp − Tr(ΠρΠ)| <= {worst:.1e}")))
    });
}

fn suite_protocol(ctx: &mut Ctx) {
    let seed = ctx.seed;

    ctx.check("statevector-offsets-and-law", || {
        let params = ProtocolParams::new(3, 1, 1)?;
        let cfg = RunConfig::new(Backend::Statevector);
        let ks = KeySchedule::sample(3, 1, &mut stream(seed))?;
        let runs = 2000;
        let mut rng = stream(seed ^ 1);
        let mut worst_tv: f64 = 0.0;
        for (a, b) in [(0u64, 0u64), (1, 0), (0, 4), (3, 6)] {
            let pat = ErrorPattern::new(BitVector::from_u64(3, a), BitVector::from_u64(3, b))?;
            let mut counts = [0usize; 8];
            for _ in 0..runs {
                let rec = run_with_schedule(&params, &ks, &pat, cfg, &mut rng)?;
                let ok = rec.u_b == rec.u_a.xor(&ks.l1.mul_vec(&pat.alpha)?)?
                    && rec.v_b == rec.v_a.xor(&ks.m2.mul_vec(&pat.beta)?)?
                    && rec.w_b == rec.w_a.xor(&ks.m3.mul_vec(&pat.beta)?)?;
                if !ok {
                    return Ok((
                        false,
                        format!("offset relation broken for α={a:03b} β={b:03b}"),
                    ));
                }
                let cell = rec.u_a.to_u64() << 2 | rec.v_a.to_u64() << 1 | rec.w_a.to_u64();
                counts[cell as usize] += 1;
            }
            let tv = counts
                .iter()
                .map(|&c| (c as f64 / runs as f64 - 0.125).abs())
                .sum::<f64>()
                / 2.0;
            worst_tv = worst_tv.max(tv);
        }
        Ok((
            worst_tv < 0.06,
            format!("offsets exact; max TV vs uniform law {worst_tv:.4}"),
        ))
    });

    ctx.check("in-ball-correctness-n64", || {
        let params = ProtocolParams::new(64, 24, 2)?;
        let cfg = RunConfig {
            backend: Backend::Fast,
            decoder: Decoder::Exhaustive,
        };
        let mut rng = stream(seed ^ 2);
        let trials = 300;
        for _ in 0..trials {
            let pat = ErrorPattern::new(
                random_weight(64, rng.gen_range(0..=2), &mut rng),
                random_weight(64, rng.gen_range(0..=2), &mut rng),
            )?;
            let rec = run_with(&params, &EveModel::Fixed(pat), cfg, &mut rng)?;
            if rec.keys_match() != Some(true) {
                return Ok((false, "in-ball run rejected or mismatched".into()));
            }
        }
        Ok((
            true,
            format!("{trials} in-ball runs accepted with equal keys"),
        ))
    });

    ctx.check("robustness-custom-eve", || {
        let params = ProtocolParams::new(64, 24, 2)?;
        let mut rng = stream(seed ^ 3);
        let inside = ErrorPattern::new(
            random_weight(64, 1, &mut rng),
            random_weight(64, 2, &mut rng),
        )?;
        let outside = ErrorPattern::new(random_weight(64, 9, &mut rng), BitVector::zeros(64))?;
        let eve = EveModel::Custom(vec![
            (ErrorPattern::zero(64), 0.4),
            (inside, 0.3),
            (outside, 0.3),
        ]);
        let ideal = accept_probability(&params, &eve)?;
        let trials = 2000u64;
        let cfg = RunConfig {
            backend: Backend::Fast,
            decoder: Decoder::Exhaustive,
        };
        let sum = run_batch(&params, &eve, cfg, trials, seed ^ 4)?;
        let sigma = (ideal * (1.0 - ideal) / trials as f64).sqrt();
        let tol = (4.0 * sigma).max(params.robustness_slack());
        let gap = (sum.accept_rate() - ideal).abs();
        Ok((
            gap <= tol && sum.mismatches == 0,
            format!(
                "rate {:.4} vs {ideal:.4} (tol {tol:.4}), {} mismatches",
                sum.accept_rate(),
                sum.mismatches
            ),
        ))
    });

    ctx.check("transcript-roundtrip", || {
        let params = ProtocolParams::new(8, 3, 1)?;
        let mut rng = stream(seed ^ 5);
        for _ in 0..50 {
            let rec = run_with(
                &params,
                &EveModel::Iid(0.08),
                RunConfig::new(Backend::Fast),
                &mut rng,
            )?;
            let text = serialize_transcript(&rec);
            if parse_transcript(&text)? != rec {
                return Ok((false, "parsed record differs".into()));
            }
        }
        Ok((true, "50 transcripts serialize and parse back".into()))
    });

    ctx.check("batch-determinism", || {
        let params = ProtocolParams::new(32, 10, 1)?;
        let cfg = RunConfig::new(Backend::Fast);
        let eve = EveModel::Iid(0.02);
        let a = run_batch(&params, &eve, cfg, 200, seed)?;
        let b = run_batch(&params, &eve, cfg, 200, seed)?;
        Ok((
            a.same_outcome(&b),
            format!("{} accepts in both batches", a.accepts),
        ))
    });
}

fn random_weight<R: Rng + ?Sized>(n: usize, w: usize, rng: &mut R) -> BitVector {
    let support = rand::seq::index::sample(rng, n, w).into_vec();
    BitVector::from_support(n, &support)
}

fn suite_rates(ctx: &mut Ctx) {
    let seed = ctx.seed;

    ctx.check("tuh-headline", || {
        let mut outs = Vec::new();
        for mode in [Rounding::Floor, Rounding::Ceil, Rounding::Direct] {
            let rep = tuh_report(&TuhQuery::new(3100, 0.0451, 1e-80, mode))?;
            outs.push(rep.output_size);
        }
        let ok = outs.iter().all(|o| (o - 385).abs() <= 8);
        Ok((ok, format!("output sizes floor/ceil/direct = {outs:?}")))
    });

    ctx.check("min-blocksize", || {
        let n = min_blocksize(0.0451, 1e-6, 6, Rounding::Floor)?;
        Ok(((190..=215).contains(&n), format!("n = {n}")))
    });

    ctx.check("rate-sandwich", || {
        let mut rng = stream(seed);
        let mut done = 0;
        while done < 100 {
            let n = rng.gen_range(500u64..200_000);
            let d = rng.gen_range(0.001..0.1);
            let e = 2f64.powf(-rng.gen_range(1.0..60.0));
            let rep = tuh_report(&TuhQuery::new(n, d, e, Rounding::Direct))?;
            if !rep.feasible {
                continue;
            }
            let l = -e.log2();
            let dn = rep.deviation * n as f64;
            if dn < 4.0 * l + 10.0 - 1e-9 || dn > 4.0 * l + 12.0 + 1e-9 {
                return Ok((false, format!("n={n} δ={d} ε={e:e}: n·dev = {dn}")));
            }
            done += 1;
        }
        Ok((
            true,
            "100 feasible triples inside [4log(1/ε)+10, 4log(1/ε)+12]/n".into(),
        ))
    });

    ctx.check("sampling-below-bound", || {
        let mut detail = Vec::new();
        for n in [3100u64, 10_000, 100_000] {
            let s = sampling_optimize(&SamplingQuery::new(n, 0.0451, 1e-6))?;
            let b = sampling_upper_bound(n, 0.0451, 1e-6)?;
            if s.rate > b.bound_rate || s.rate > asymptotic_rate(0.0451) {
                return Ok((
                    false,
                    format!("n={n}: rate {} above bound {}", s.rate, b.bound_rate),
                ));
            }
            detail.push(format!("n={n}: {}", s.n_out));
        }
        Ok((true, format!("optimised outputs {}", detail.join(", "))))
    });

    ctx.check("eps-pe-floor-grid", || {
        let n = 3100u64;
        let mut points = 0;
        for i in 0..10 {
            let n_pe = 50 + 130 * i;
            for j in 1..=5 {
                let nu = 0.01 * j as f64;
                let (_, v) = eps_pe_inf(n, n_pe, 0.0451, nu);
                if v < eps_pe_floor(n_pe, nu) {
                    return Ok((false, format!("n_pe={n_pe} ν={nu}")));
                }
                points += 1;
            }
        }
        Ok((true, format!("{points} grid points")))
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cheap_suites_pass() {
        let mut opts = SelftestOptions::new(DEFAULT_SEED);
        opts.suites = vec!["hashball".into(), "pauli".into()];
        let rep = run_selftest(&opts).unwrap();
        assert!(rep.passed, "{}", rep.to_text());
        assert_eq!(rep.suites.len(), 2);
    }

    #[test]
    fn fault_is_detected() {
        let mut opts = SelftestOptions::new(DEFAULT_SEED);
        opts.suites = vec!["hashball".into()];
        opts.inject_fault = true;
        let rep = run_selftest(&opts).unwrap();
        assert!(!rep.passed);
        assert_eq!(rep.failed_suites, vec!["hashball".to_string()]);
    }

    #[test]
    fn unknown_suite_rejected() {
        let mut opts = SelftestOptions::new(1);
        opts.suites = vec!["nope".into()];
        assert!(run_selftest(&opts).is_err());
    }
}
