use std::fs;
use std::path::Path;
use std::time::Instant;

use serde_json::{json, Map, Value};
use uhqkd::f2::{BitMatrix, BitVector, KeySchedule};
use uhqkd::protocol::{
    run_with, run_with_schedule, serialize_transcript, Backend, BatchSummary, Decoder,
    ErrorPattern, EveModel, ProtocolParams, RunConfig, RunRecord, SUMMARY_SCHEMA,
};
use uhqkd::rates::{
    asymptotic_rate, compare_curves, curves_csv, min_blocksize, sampling_optimize,
    sampling_upper_bound, tuh_report, Rounding, SamplingQuery, TuhQuery,
};
use uhqkd::rng::{child_seed, stream};
use uhqkd::selftest::{run_selftest, SelftestOptions};
use uhqkd::{Error, VERSION};

use crate::emit::{write_out, Output, Table};
use crate::{
    BackendArg, Cli, Command, CompareArgs, DecoderArg, Rates2uhArgs, SamplingArgs, SelftestArgs,
    SimulateArgs, EXIT_INFEASIBLE, EXIT_IO, EXIT_OK, EXIT_SELFTEST_FAILED, EXIT_USAGE,
};

/// Run the command, write its report and return the exit code.
pub fn dispatch(cli: &Cli) -> u8 {
    let seed = cli.common.seed;
    let result = match &cli.command {
        Command::Rates2uh(a) => rates_2uh(a, seed),
        Command::RatesSampling(a) => rates_sampling(a, seed),
        Command::Compare(a) => compare(a, seed),
        Command::Simulate(a) => simulate(a, seed),
        Command::Selftest(a) => selftest(a, seed),
    };
    let out = match result {
        Ok(out) => out,
        Err(e) => {
            eprintln!("uhqkd: {e}");
            let code = exit_code(&e);
            Output::new(
                json!({
                    "schema": "uhqkd.error.v1",
                    "version": VERSION,
                    "seed": seed,
                    "error": error_kind(&e),
                    "message": e.to_string(),
                }),
                code,
            )
        }
    };
    if let Err(e) = write_out(&cli.common.out, &out.render(cli.common.format)) {
        eprintln!("uhqkd: cannot write {}: {e}", cli.common.out.display());
        return EXIT_IO;
    }
    out.exit
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Infeasible(_) | Error::Resource(_) | Error::BallTooLarge { .. } => EXIT_INFEASIBLE,
        _ => EXIT_USAGE,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Infeasible(_) => "infeasible",
        Error::Resource(_) | Error::BallTooLarge { .. } => "resource",
        Error::Parse { .. } => "parse",
        _ => "usage",
    }
}

fn header(schema: &str, seed: u64) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("schema".into(), json!(schema));
    m.insert("version".into(), json!(VERSION));
    m.insert("seed".into(), json!(seed));
    m
}

fn extend(m: &mut Map<String, Value>, v: Value) {
    if let Value::Object(o) = v {
        m.extend(o);
    }
}

fn rates_2uh(a: &Rates2uhArgs, seed: u64) -> Result<Output, Error> {
    let rounding = Rounding::parse(&a.rounding)?;
    let rep = tuh_report(&TuhQuery::new(a.n, a.delta, a.epsilon, rounding))?;
    let mut m = header("uhqkd.rates-2uh.v1", seed);
    extend(
        &mut m,
        json!({
            "n": a.n,
            "delta": a.delta,
            "epsilon": a.epsilon,
            "rounding": rounding.as_str(),
            "r": rep.r,
            "k": rep.k,
            "out": rep.output_size,
            "rate": rep.rate,
            "security_achieved": rep.security_achieved,
            "asymptotic_rate": asymptotic_rate(a.delta),
            "deviation": rep.deviation,
            "feasible": rep.feasible,
        }),
    );
    let mut exit = EXIT_OK;
    if !rep.feasible {
        let reason = if rep.positive_asymptotic_rate {
            format!(
                "syndrome length k={} leaves n-2k={} key bits",
                rep.k, rep.output_size
            )
        } else {
            format!(
                "asymptotic rate 1-2h(delta) = {:.4} is not positive",
                asymptotic_rate(a.delta)
            )
        };
        m.insert("reason".into(), json!(reason));
        exit = EXIT_INFEASIBLE;
    }
    if let Some(t) = a.target_bits {
        match min_blocksize(a.delta, a.epsilon, t, rounding) {
            Ok(n) => {
                m.insert("min_blocksize".into(), json!({"target_bits": t, "n": n}));
            }
            Err(Error::Infeasible(why)) => {
                m.insert("min_blocksize".into(), json!({"target_bits": t, "n": null}));
                m.entry("reason").or_insert(json!(why));
                exit = EXIT_INFEASIBLE;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Output::new(Value::Object(m), exit))
}

fn rates_sampling(a: &SamplingArgs, seed: u64) -> Result<Output, Error> {
    if a.nu_grid < 2 || a.n_pe_grid < 2 {
        return Err(Error::InvalidParams("grids need at least 2 points".into()));
    }
    let mut q = SamplingQuery::new(a.n, a.delta, a.epsilon);
    q.nu_grid = a.nu_grid;
    q.n_pe_grid = a.n_pe_grid;
    let rep = sampling_optimize(&q)?;
    let bound = sampling_upper_bound(a.n, a.delta, a.epsilon)?;
    let mut m = header("uhqkd.rates-sampling.v1", seed);
    let mut body = serde_json::to_value(&rep).expect("report serializes");
    if let Value::Object(o) = &mut body {
        o.remove("query");
    }
    extend(
        &mut m,
        json!({"n": a.n, "delta": a.delta, "eps_qkd": a.epsilon}),
    );
    extend(&mut m, body);
    m.insert(
        "bound".into(),
        json!({"c1": bound.c1, "c2": bound.c2, "rate": bound.bound_rate}),
    );
    m.insert("asymptotic_rate".into(), json!(asymptotic_rate(a.delta)));
    let exit = if rep.feasible {
        EXIT_OK
    } else {
        m.insert(
            "reason".into(),
            json!("no (n_pe, nu, eps_ec) split leaves a positive key within eps_qkd"),
        );
        EXIT_INFEASIBLE
    };
    Ok(Output::new(Value::Object(m), exit))
}

/// `1000,3100,...` or `log:START:END:POINTS` (inclusive, deduplicated).
pub fn parse_grid(spec: &str) -> Result<Vec<u64>, Error> {
    let bad = |msg: String| Error::InvalidParams(format!("grid '{spec}': {msg}"));
    let num = |s: &str| -> Result<f64, Error> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| bad(format!("'{s}' is not a number")))?;
        if !(v.is_finite() && v >= 1.0) {
            return Err(bad(format!("block size {v} must be >= 1")));
        }
        Ok(v)
    };
    let mut ns: Vec<u64> = if let Some(rest) = spec.strip_prefix("log:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected log:START:END:POINTS".into()));
        }
        let (lo, hi) = (num(parts[0])?, num(parts[1])?);
        let points: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| bad("POINTS must be an integer".into()))?;
        if hi < lo {
            return Err(bad("END below START".into()));
        }
        match points {
            0 => Vec::new(),
            1 => vec![lo.round() as u64],
            p => (0..p)
                .map(|i| {
                    let t = i as f64 / (p - 1) as f64;
                    (lo.ln() + t * (hi.ln() - lo.ln())).exp().round() as u64
                })
                .collect(),
        }
    } else {
        spec.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| num(s).map(|v| v.round() as u64))
            .collect::<Result<_, _>>()?
    };
    ns.dedup();
    if ns.is_empty() {
        return Err(bad("empty".into()));
    }
    Ok(ns)
}

fn compare(a: &CompareArgs, seed: u64) -> Result<Output, Error> {
    let rounding = Rounding::parse(&a.rounding)?;
    let ns = parse_grid(&a.grid)?;
    let rows = compare_curves(a.delta, a.epsilon, &ns, rounding)?;
    let below_bound = rows.iter().all(|r| r.samp_rate <= r.bound_rate);
    let mut m = header("uhqkd.compare.v1", seed);
    extend(
        &mut m,
        json!({
            "delta": a.delta,
            "epsilon": a.epsilon,
            "rounding": rounding.as_str(),
            "asymptotic_rate": asymptotic_rate(a.delta),
            "sampling_below_bound": below_bound,
            "rows": rows,
        }),
    );
    if !below_bound {
        eprintln!("uhqkd: warning: a sampling rate exceeds its upper bound");
    }
    Ok(Output {
        value: Value::Object(m),
        table: Some(Table {
            preamble: format!(
                "# uhqkd {VERSION} seed={seed} delta={} epsilon={:e} rounding={}",
                a.delta,
                a.epsilon,
                rounding.as_str()
            ),
            csv: curves_csv(&rows),
        }),
        text: None,
        exit: EXIT_OK,
    })
}

/// `none`, `fixed:alpha=BITS,beta=BITS`, `iid:P` or
/// `custom:ALPHA/BETA=P;ALPHA/BETA=P;...`, bit strings entry 0 first.
pub fn parse_eve(spec: &str) -> Result<EveModel, Error> {
    let bad = |msg: &str| Error::InvalidEve(format!("'{spec}': {msg}"));
    let bits = |s: &str| -> Result<BitVector, Error> {
        s.trim().parse().map_err(|_| bad("bit strings use 0 and 1"))
    };
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    match kind {
        "none" if rest.is_empty() => Ok(EveModel::None),
        "fixed" => {
            let mut alpha = None;
            let mut beta = None;
            for part in rest.split(',') {
                match part.split_once('=') {
                    Some(("alpha", v)) => alpha = Some(bits(v)?),
                    Some(("beta", v)) => beta = Some(bits(v)?),
                    _ => return Err(bad("expected alpha=BITS,beta=BITS")),
                }
            }
            match (alpha, beta) {
                (Some(a), Some(b)) => Ok(EveModel::Fixed(ErrorPattern::new(a, b)?)),
                _ => Err(bad("both alpha and beta are required")),
            }
        }
        "iid" => rest
            .trim()
            .parse()
            .map(EveModel::Iid)
            .map_err(|_| bad("expected iid:P")),
        "custom" => {
            let mut dist = Vec::new();
            for item in rest.split(';').filter(|s| !s.trim().is_empty()) {
                let (pat, p) = item
                    .split_once('=')
                    .ok_or_else(|| bad("expected ALPHA/BETA=P"))?;
                let (a, b) = pat
                    .split_once('/')
                    .ok_or_else(|| bad("expected ALPHA/BETA=P"))?;
                let p: f64 = p.trim().parse().map_err(|_| bad("bad probability"))?;
                dist.push((ErrorPattern::new(bits(a)?, bits(b)?)?, p));
            }
            Ok(EveModel::Custom(dist))
        }
        _ => Err(bad("unknown model (none, fixed, iid, custom)")),
    }
}

fn simulate(a: &SimulateArgs, seed: u64) -> Result<Output, Error> {
    let params = ProtocolParams::new(a.n, a.k, a.r)?;
    if a.trials == 0 {
        return Err(Error::InvalidParams("trials must be at least 1".into()));
    }
    let eve = parse_eve(&a.eve)?;
    eve.validate(params.n)?;
    let cfg = RunConfig {
        backend: match a.backend {
            BackendArg::Fast => Backend::Fast,
            BackendArg::Statevector => Backend::Statevector,
        },
        decoder: match a.decoder {
            DecoderArg::Auto => Decoder::Auto,
            DecoderArg::Exhaustive => Decoder::Exhaustive,
            DecoderArg::KnownPattern => Decoder::KnownPattern,
        },
    };
    let schedule = match &a.matrix_file {
        Some(path) => {
            let l = BitMatrix::from_text(&read(path)?)?;
            if l.rows() != params.n {
                return Err(Error::DimensionMismatch(format!(
                    "matrix file has {} rows, n = {}",
                    l.rows(),
                    params.n
                )));
            }
            Some(KeySchedule::new(l, params.k)?)
        }
        None => None,
    };
    if let Some(dir) = &a.transcripts {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    }

    let start = Instant::now();
    let (mut accepts, mut mismatches, mut relations_hold) = (0u64, 0u64, true);
    let width = (a.trials - 1).to_string().len();
    for i in 0..a.trials {
        let mut rng = stream(child_seed(seed, i));
        let rec = match &schedule {
            Some(ks) => {
                let pattern = eve.sample(params.n, &mut rng);
                run_with_schedule(&params, ks, &pattern, cfg, &mut rng)?
            }
            None => run_with(&params, &eve, cfg, &mut rng)?,
        };
        relations_hold &= offsets_hold(&rec, params.k)?;
        if let Some(same) = rec.keys_match() {
            accepts += 1;
            mismatches += u64::from(!same);
        }
        if let Some(dir) = &a.transcripts {
            let path = dir.join(format!("run-{i:0width$}.txt"));
            fs::write(&path, serialize_transcript(&rec)).map_err(|e| io_error(&path, e))?;
        }
    }
    let summary = BatchSummary {
        schema: SUMMARY_SCHEMA,
        params,
        seed,
        trials: a.trials,
        accepts,
        mismatches,
        bound_2uh: params.correctness_bound(),
        wallclock_ms: start.elapsed().as_millis() as u64,
    };
    let mut m = Map::new();
    extend(
        &mut m,
        serde_json::to_value(&summary).expect("summary serializes"),
    );
    m.insert("version".into(), json!(VERSION));
    m.insert("accept_rate".into(), json!(summary.accept_rate()));
    m.insert("eve".into(), json!(a.eve));
    m.insert("backend".into(), json!(cfg.backend));
    m.insert("decoder".into(), json!(cfg.decoder));
    m.insert("fixed_matrix".into(), json!(schedule.is_some()));
    m.insert("offset_relations_hold".into(), json!(relations_hold));
    if let Some(dir) = &a.transcripts {
        m.insert("transcripts".into(), json!(dir.display().to_string()));
    }
    Ok(Output::new(Value::Object(m), EXIT_OK))
}

/// `u_B = u_A + L₁α`, `v_B = v_A + M₂β`, `w_B = w_A + M₃β` for the run's `L`.
fn offsets_hold(rec: &RunRecord, k: usize) -> Result<bool, Error> {
    let ks = KeySchedule::new(rec.l.clone(), k)?;
    let p = &rec.pattern;
    Ok(rec.u_b == rec.u_a.xor(&ks.l1.mul_vec(&p.alpha)?)?
        && rec.v_b == rec.v_a.xor(&ks.m2.mul_vec(&p.beta)?)?
        && rec.w_b == rec.w_a.xor(&ks.m3.mul_vec(&p.beta)?)?)
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| io_error(path, e))
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::InvalidParams(format!("{}: {e}", path.display()))
}

fn selftest(a: &SelftestArgs, seed: u64) -> Result<Output, Error> {
    let opts = SelftestOptions {
        seed,
        suites: a.suites.clone(),
        inject_fault: a.inject_fault,
    };
    let rep = run_selftest(&opts)?;
    let exit = if rep.passed {
        EXIT_OK
    } else {
        eprintln!("uhqkd: selftest failed: {}", rep.failed_suites.join(", "));
        EXIT_SELFTEST_FAILED
    };
    let mut out = Output::new(serde_json::to_value(&rep).expect("report serializes"), exit);
    let mut csv = String::from("suite,check,passed,detail\n");
    for s in &rep.suites {
        for c in &s.checks {
            csv.push_str(&format!(
                "{},{},{},\"{}\"\n",
                s.suite,
                c.name,
                c.passed,
                c.detail.replace('"', "\"\"")
            ));
        }
    }
    out.table = Some(Table {
        preamble: format!(
            "# uhqkd {VERSION} seed={seed} passed={} failed_suites={}",
            rep.passed,
            rep.failed_suites.join(";")
        ),
        csv,
    });
    out.text = Some(rep.to_text());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_forms() {
        assert_eq!(parse_grid("1000, 3100").unwrap(), vec![1000, 3100]);
        assert_eq!(
            parse_grid("log:1e3:1e6:4").unwrap(),
            vec![1000, 10_000, 100_000, 1_000_000]
        );
        assert_eq!(parse_grid("log:500:500:1").unwrap(), vec![500]);
        assert!(parse_grid("").is_err());
        assert!(parse_grid("log:1e3:1e6:0").is_err());
        assert!(parse_grid("log:1e6:1e3:3").is_err());
        assert!(parse_grid("12,abc").is_err());
    }

    #[test]
    fn eve_forms() {
        assert_eq!(parse_eve("none").unwrap(), EveModel::None);
        assert_eq!(parse_eve("iid:0.05").unwrap(), EveModel::Iid(0.05));
        let fixed = parse_eve("fixed:alpha=100,beta=000").unwrap();
        let EveModel::Fixed(p) = fixed else { panic!() };
        assert!(p.alpha.get(0) && p.alpha.weight() == 1 && p.beta.is_zero());
        let EveModel::Custom(d) = parse_eve("custom:10/00=0.7;11/01=0.3").unwrap() else {
            panic!()
        };
        assert_eq!(d.len(), 2);
        assert!(parse_eve("fixed:alpha=100").is_err());
        assert!(parse_eve("gauss:1").is_err());
        assert!(parse_eve("none:1").is_err());
    }
}
