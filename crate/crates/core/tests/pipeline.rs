use proptest::prelude::*;
use rand::seq::index::sample;
use rand::Rng;
use uhqkd::f2::{BitMatrix, BitVector, KeySchedule};
use uhqkd::hashball::{ball_size, g_ball, BallSpec, SyndromeDecoder};
use uhqkd::protocol::{
    accept_probability, parse_transcript, run_batch, run_with, run_with_schedule,
    serialize_transcript, Backend, Decoder, ErrorPattern, EveModel, ProtocolParams, RunConfig,
};
use uhqkd::rates::{compare_curves, tuh_report, Rounding, TuhQuery};
use uhqkd::rng::stream;

fn weight_w<R: Rng>(n: usize, w: usize, rng: &mut R) -> BitVector {
    BitVector::from_support(n, &sample(rng, n, w).into_vec())
}

const EXHAUSTIVE: RunConfig = RunConfig {
    backend: Backend::Fast,
    decoder: Decoder::Exhaustive,
};

#[test]
fn decoder_table_agrees_with_linear_scan() {
    let mut rng = stream(11);
    for (n, k, r) in [(12, 5, 1), (20, 9, 2), (31, 12, 2)] {
        let spec = BallSpec::new(n, r).unwrap();
        let h = BitMatrix::random(k, n, &mut rng);
        let dec = SyndromeDecoder::new(&h, spec).unwrap();
        for _ in 0..200 {
            let y = BitVector::random(k, &mut rng);
            assert_eq!(dec.decode(&y).unwrap(), g_ball(&h, &y, spec).unwrap());
        }
    }
}

#[test]
fn in_ball_runs_agree_across_decoders_when_secure() {
    let params = ProtocolParams::new(64, 24, 2).unwrap();
    assert!(params.meets_security_condition());
    let mut rng = stream(12);
    let known = RunConfig {
        backend: Backend::Fast,
        decoder: Decoder::KnownPattern,
    };
    for i in 0..200u64 {
        let pattern = ErrorPattern::new(
            weight_w(64, rng.gen_range(0..=2), &mut rng),
            weight_w(64, rng.gen_range(0..=2), &mut rng),
        )
        .unwrap();
        let ks = KeySchedule::sample(64, 24, &mut stream(i)).unwrap();
        let a = run_with_schedule(&params, &ks, &pattern, EXHAUSTIVE, &mut stream(i)).unwrap();
        let b = run_with_schedule(&params, &ks, &pattern, known, &mut stream(i)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.keys_match(), Some(true));
    }
}

#[test]
fn out_of_ball_bit_flips_are_mostly_rejected() {
    let params = ProtocolParams::new(64, 24, 2).unwrap();
    let mut rng = stream(13);
    let mut accepted = 0;
    let trials = 400;
    for _ in 0..trials {
        let pattern = ErrorPattern::new(weight_w(64, 10, &mut rng), BitVector::zeros(64)).unwrap();
        let rec = run_with(&params, &EveModel::Fixed(pattern), EXHAUSTIVE, &mut rng).unwrap();
        accepted += u32::from(rec.accepted());
    }
    // a wrong syndrome lands in the ball's image with probability about |B|/2^k
    let image = ball_size(params.ball()).to_string().parse::<f64>().unwrap() / (1u64 << 24) as f64;
    assert!(
        (accepted as f64) < trials as f64 * image * 4.0 + 4.0,
        "{accepted}"
    );
}

#[test]
fn batch_rate_tracks_ideal_acceptance() {
    let params = ProtocolParams::new(40, 16, 2).unwrap();
    let eve = EveModel::Iid(0.03);
    let ideal = accept_probability(&params, &eve).unwrap();
    let sum = run_batch(&params, &eve, EXHAUSTIVE, 3000, 99).unwrap();
    let sigma = (ideal * (1.0 - ideal) / 3000.0).sqrt();
    let tol = 4.0 * sigma + params.robustness_slack();
    assert!((sum.accept_rate() - ideal).abs() <= tol);
}

#[test]
fn compare_rows_match_individual_reports() {
    let ns = [900u64, 3100, 12_000];
    let rows = compare_curves(0.03, 1e-9, &ns, Rounding::Ceil).unwrap();
    for (row, n) in rows.iter().zip(ns) {
        let t = tuh_report(&TuhQuery::new(n, 0.03, 1e-9, Rounding::Ceil)).unwrap();
        assert_eq!((row.tuh_k, row.tuh_out), (t.k, t.output_size));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transcripts_roundtrip(seed in any::<u64>(), n in 5usize..40, p in 0.0f64..0.2) {
        let k = 1 + (n - 1) / 4;
        let r = (n / 10).min(2);
        let params = ProtocolParams::new(n, k, r).unwrap();
        let rec = run_with(&params, &EveModel::Iid(p), EXHAUSTIVE, &mut stream(seed)).unwrap();
        let text = serialize_transcript(&rec);
        prop_assert_eq!(parse_transcript(&text).unwrap(), rec);
    }

    #[test]
    fn fast_law_offsets(seed in any::<u64>(), n in 5usize..80) {
        let k = (n - 1) / 3;
        prop_assume!(k >= 1);
        let params = ProtocolParams::new(n, k, 1).unwrap();
        let rec = run_with(&params, &EveModel::Iid(0.1), RunConfig::new(Backend::Fast), &mut stream(seed)).unwrap();
        let ks = KeySchedule::new(rec.l.clone(), k).unwrap();
        let p = &rec.pattern;
        prop_assert_eq!(&rec.u_b, &rec.u_a.xor(&ks.l1.mul_vec(&p.alpha).unwrap()).unwrap());
        prop_assert_eq!(&rec.v_b, &rec.v_a.xor(&ks.m2.mul_vec(&p.beta).unwrap()).unwrap());
        prop_assert_eq!(&rec.w_b, &rec.w_a.xor(&ks.m3.mul_vec(&p.beta).unwrap()).unwrap());
    }
}
