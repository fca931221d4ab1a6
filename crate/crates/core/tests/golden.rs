//! Byte-exact transcripts for n=8, k=3, r=1 under fixed seeds. A change here
//! means the random stream layout, the sampler or the wire format moved.

use uhqkd::f2::{BitVector, KeySchedule};
use uhqkd::protocol::{
    parse_transcript, run_with, serialize_transcript, Backend, ErrorPattern, EveModel,
    ProtocolParams, RunConfig,
};
use uhqkd::rng::{child_seed, stream, DEFAULT_SEED};

const ACCEPT: &str = include_str!("data/golden_accept_n8_k3_r1.txt");
const MISCORRECT: &str = include_str!("data/golden_miscorrect_n8_k3_r1.txt");

fn regenerate(seed: u64) -> String {
    let params = ProtocolParams::new(8, 3, 1).unwrap();
    let pattern =
        ErrorPattern::new("00100000".parse().unwrap(), "00000010".parse().unwrap()).unwrap();
    let rec = run_with(
        &params,
        &EveModel::Fixed(pattern),
        RunConfig::new(Backend::Fast),
        &mut stream(child_seed(seed, 0)),
    )
    .unwrap();
    serialize_transcript(&rec)
}

#[test]
fn golden_accept_reproduces() {
    assert_eq!(regenerate(6), ACCEPT);
}

#[test]
fn golden_miscorrect_reproduces() {
    assert_eq!(regenerate(DEFAULT_SEED), MISCORRECT);
}

#[test]
fn golden_accept_decodes_true_pattern() {
    let rec = parse_transcript(ACCEPT).unwrap();
    assert!(rec.accepted());
    assert_eq!(rec.s.pattern(), Some(&rec.pattern.alpha));
    assert_eq!(rec.t.pattern(), Some(&rec.pattern.beta));
    assert_eq!(rec.keys_match(), Some(true));
    assert_eq!(serialize_transcript(&rec), ACCEPT);
}

#[test]
fn golden_miscorrect_is_consistent() {
    // k=3 gives 8 syndromes for 9 ball elements, so every syndrome decodes;
    // here t is an in-ball pattern other than β and the keys differ.
    let rec = parse_transcript(MISCORRECT).unwrap();
    assert!(rec.accepted());
    assert_ne!(rec.t.pattern(), Some(&rec.pattern.beta));
    assert_eq!(rec.keys_match(), Some(false));
    let ks = KeySchedule::new(rec.l.clone(), 3).unwrap();
    let t = rec.t.pattern().unwrap();
    assert_eq!(
        ks.m2.mul_vec(t).unwrap(),
        rec.v_a.xor(&rec.v_b).unwrap(),
        "t explains the announced phase syndrome"
    );
    let diff = rec
        .key_a
        .as_ref()
        .unwrap()
        .xor(rec.key_b.as_ref().unwrap())
        .unwrap();
    let err = t.xor(&rec.pattern.beta).unwrap();
    assert_eq!(diff, ks.m3.mul_vec(&err).unwrap());
    assert_ne!(diff, BitVector::zeros(2));
}

#[test]
fn tampered_golden_rejected() {
    let tampered = ACCEPT.replace("key key_A=0 key_B=0", "key key_A=0 key_B=4");
    assert!(parse_transcript(&tampered).is_err());
    let reordered = ACCEPT.replace("announce alice u_A", "announce bob u_A");
    assert!(parse_transcript(&reordered).is_err());
}
