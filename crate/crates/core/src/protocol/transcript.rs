//! Line-oriented text rendering of a [`RunRecord`].
//!
//! ```text
//! uhqkd-transcript v1
//! params n=<n> k=<k> r=<r>
//! l-seed <16 hex digits | none>
//! pattern alpha=<hex> beta=<hex>
//! confirm alice received
//! confirm bob received
//! hash alice L=<row>,<row>,...
//! announce alice u_A=<hex>
//! announce bob u_B=<hex>
//! announce alice v_A=<hex>
//! announce bob v_B=<hex>
//! decision accept | decision reject <bit|phase|both>
//! decode s=<hex|bot> t=<hex|bot>
//! measure w_A=<hex> w_B=<hex>
//! key key_A=<hex|bot> key_B=<hex|bot>
//! ```
//!
//! Bit strings are lowercase hex with entry 0 as the most significant bit of
//! the first digit, zero-padded at the end.

use super::{ErrorPattern, ProtocolParams, Rejection, RunRecord};
use crate::error::{Error, Result};
use crate::f2::{BitMatrix, BitVector, KeySchedule};
use crate::hashball::DecodeResult;

pub const TRANSCRIPT_HEADER: &str = "uhqkd-transcript v1";

const BOTTOM: &str = "bot";

fn decode_hex(d: &DecodeResult) -> String {
    match d {
        DecodeResult::Pattern(p) => p.to_hex(),
        DecodeResult::Bottom => BOTTOM.to_string(),
    }
}

fn opt_hex(v: &Option<BitVector>) -> String {
    v.as_ref()
        .map_or_else(|| BOTTOM.to_string(), BitVector::to_hex)
}

pub fn serialize_transcript(rec: &RunRecord) -> String {
    let p = &rec.params;
    let rows: Vec<String> = (0..rec.l.rows()).map(|i| rec.l.row(i).to_hex()).collect();
    let seed = rec
        .l_seed
        .map_or_else(|| "none".to_string(), |s| format!("{s:016x}"));
    let decision = match rec.rejection {
        None => "accept".to_string(),
        Some(r) => format!("reject {}", r.as_str()),
    };
    let lines = [
        TRANSCRIPT_HEADER.to_string(),
        format!("params n={} k={} r={}", p.n, p.k, p.r),
        format!("l-seed {seed}"),
        format!(
            "pattern alpha={} beta={}",
            rec.pattern.alpha.to_hex(),
            rec.pattern.beta.to_hex()
        ),
        "confirm alice received".to_string(),
        "confirm bob received".to_string(),
        format!("hash alice L={}", rows.join(",")),
        format!("announce alice u_A={}", rec.u_a.to_hex()),
        format!("announce bob u_B={}", rec.u_b.to_hex()),
        format!("announce alice v_A={}", rec.v_a.to_hex()),
        format!("announce bob v_B={}", rec.v_b.to_hex()),
        format!("decision {decision}"),
        format!("decode s={} t={}", decode_hex(&rec.s), decode_hex(&rec.t)),
        format!("measure w_A={} w_B={}", rec.w_a.to_hex(), rec.w_b.to_hex()),
        format!(
            "key key_A={} key_B={}",
            opt_hex(&rec.key_a),
            opt_hex(&rec.key_b)
        ),
    ];
    let mut out = lines.join("\n");
    out.push('\n');
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            msg: msg.into(),
        }
    }

    /// Next line with the given space-separated leading words; returns the rest.
    fn expect(&mut self, prefix: &str) -> Result<&'a str> {
        let (i, text) = self.inner.next().ok_or_else(|| Error::Parse {
            line: self.line + 1,
            msg: format!("missing line '{prefix} ...'"),
        })?;
        self.line = i + 1;
        if text == prefix {
            return Ok("");
        }
        text.strip_prefix(prefix)
            .and_then(|rest| rest.strip_prefix(' '))
            .ok_or_else(|| self.err(format!("expected '{prefix}', found '{text}'")))
    }

    /// Parse `name=value` fields in order.
    fn fields(&self, rest: &'a str, names: &[&str]) -> Result<Vec<&'a str>> {
        let parts: Vec<&str> = rest.split(' ').collect();
        if parts.len() != names.len() {
            return Err(self.err(format!("expected fields {names:?}")));
        }
        parts
            .iter()
            .zip(names)
            .map(|(part, name)| {
                part.strip_prefix(name)
                    .and_then(|v| v.strip_prefix('='))
                    .ok_or_else(|| self.err(format!("expected '{name}=...', found '{part}'")))
            })
            .collect()
    }

    fn hex(&self, len: usize, s: &str) -> Result<BitVector> {
        BitVector::from_hex(len, s).map_err(|e| self.err(e.to_string()))
    }

    fn decode(&self, len: usize, s: &str) -> Result<DecodeResult> {
        if s == BOTTOM {
            Ok(DecodeResult::Bottom)
        } else {
            Ok(DecodeResult::Pattern(self.hex(len, s)?))
        }
    }

    fn opt(&self, len: usize, s: &str) -> Result<Option<BitVector>> {
        if s == BOTTOM {
            Ok(None)
        } else {
            Ok(Some(self.hex(len, s)?))
        }
    }

    fn number(&self, s: &str) -> Result<usize> {
        s.parse()
            .map_err(|_| self.err(format!("bad integer '{s}'")))
    }
}

/// Parse and validate a transcript; errors carry 1-based line numbers.
pub fn parse_transcript(text: &str) -> Result<RunRecord> {
    let mut it = Lines {
        inner: text.lines().enumerate(),
        line: 0,
    };
    it.expect(TRANSCRIPT_HEADER)?;

    let rest = it.expect("params")?;
    let f = it.fields(rest, &["n", "k", "r"])?;
    let params = ProtocolParams::new(it.number(f[0])?, it.number(f[1])?, it.number(f[2])?)
        .map_err(|e| it.err(e.to_string()))?;
    let (n, k, key_len) = (params.n, params.k, params.key_len());

    let rest = it.expect("l-seed")?;
    let l_seed = if rest == "none" {
        None
    } else {
        if rest.len() != 16 {
            return Err(it.err("l-seed must be 16 hex digits or 'none'"));
        }
        Some(u64::from_str_radix(rest, 16).map_err(|_| it.err("bad l-seed"))?)
    };

    let rest = it.expect("pattern")?;
    let f = it.fields(rest, &["alpha", "beta"])?;
    let pattern = ErrorPattern {
        alpha: it.hex(n, f[0])?,
        beta: it.hex(n, f[1])?,
    };

    for who in ["alice", "bob"] {
        let rest = it.expect(&format!("confirm {who}"))?;
        if rest != "received" {
            return Err(it.err("expected 'received'"));
        }
    }

    let rest = it.expect("hash alice")?;
    let f = it.fields(rest, &["L"])?;
    let rows = f[0]
        .split(',')
        .map(|r| it.hex(n, r))
        .collect::<Result<Vec<_>>>()?;
    if rows.len() != n {
        return Err(it.err(format!("L has {} rows, expected {n}", rows.len())));
    }
    let l = BitMatrix::from_rows(&rows).map_err(|e| it.err(e.to_string()))?;
    let ks = KeySchedule::new(l.clone(), k).map_err(|e| it.err(e.to_string()))?;

    let mut announce = |who: &str, name: &str| -> Result<BitVector> {
        let rest = it.expect(&format!("announce {who}"))?;
        let f = it.fields(rest, &[name])?;
        it.hex(k, f[0])
    };
    let u_a = announce("alice", "u_A")?;
    let u_b = announce("bob", "u_B")?;
    let v_a = announce("alice", "v_A")?;
    let v_b = announce("bob", "v_B")?;

    let rest = it.expect("decision")?;
    let rejection = match rest {
        "accept" => None,
        "reject bit" => Some(Rejection::BitFlip),
        "reject phase" => Some(Rejection::PhaseFlip),
        "reject both" => Some(Rejection::Both),
        other => return Err(it.err(format!("bad decision '{other}'"))),
    };
    let decision_line = it.line;

    let rest = it.expect("decode")?;
    let f = it.fields(rest, &["s", "t"])?;
    let s = it.decode(n, f[0])?;
    let t = it.decode(n, f[1])?;
    if Rejection::from_decodes(&s, &t) != rejection {
        return Err(Error::Parse {
            line: decision_line,
            msg: "decision disagrees with decoded s, t".into(),
        });
    }

    let rest = it.expect("measure")?;
    let f = it.fields(rest, &["w_A", "w_B"])?;
    let w_a = it.hex(key_len, f[0])?;
    let w_b = it.hex(key_len, f[1])?;

    let rest = it.expect("key")?;
    let f = it.fields(rest, &["key_A", "key_B"])?;
    let key_a = it.opt(key_len, f[0])?;
    let key_b = it.opt(key_len, f[1])?;
    let expected = match t.pattern() {
        Some(tp) if rejection.is_none() => {
            let kb = w_b.xor(&ks.m3.mul_vec(tp)?)?;
            (Some(w_a.clone()), Some(kb))
        }
        _ => (None, None),
    };
    if (key_a.clone(), key_b.clone()) != expected {
        return Err(it.err("keys inconsistent with w_A, w_B, t and the decision"));
    }

    if let Some((i, extra)) = it.inner.next() {
        if !extra.is_empty() || it.inner.next().is_some() {
            return Err(Error::Parse {
                line: i + 1,
                msg: "trailing content".into(),
            });
        }
    }

    Ok(RunRecord {
        params,
        l_seed,
        l,
        pattern,
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{run, Backend, EveModel};
    use crate::rng::stream;

    #[test]
    fn round_trip_fixed_point() {
        let params = ProtocolParams::new(10, 3, 1).unwrap();
        let mut rng = stream(21);
        let mut saw_reject = false;
        for _ in 0..200 {
            let rec = run(&params, &EveModel::Iid(0.12), Backend::Fast, &mut rng).unwrap();
            saw_reject |= !rec.accepted();
            let text = serialize_transcript(&rec);
            let back = parse_transcript(&text).unwrap();
            assert_eq!(back, rec);
            assert_eq!(serialize_transcript(&back), text);
        }
        assert!(saw_reject);
    }

    #[test]
    fn markers() {
        let params = ProtocolParams::new(8, 3, 1).unwrap();
        let mut rng = stream(22);
        let ok = run(&params, &EveModel::None, Backend::Fast, &mut rng).unwrap();
        let text = serialize_transcript(&ok);
        assert!(text.contains("decision accept\n"));
        assert!(text.contains("decode s=00 t=00\n"));
        let all = ErrorPattern::new(
            BitVector::from_support(8, &[0, 1, 2, 3, 4, 5, 6, 7]),
            BitVector::zeros(8),
        )
        .unwrap();
        let rec = loop {
            let rec = run(
                &params,
                &EveModel::Fixed(all.clone()),
                Backend::Fast,
                &mut rng,
            )
            .unwrap();
            if !rec.accepted() {
                break rec;
            }
        };
        let text = serialize_transcript(&rec);
        assert!(text.contains("decision reject bit\n"));
        assert!(text.contains("s=bot"));
        assert!(text.contains("key key_A=bot key_B=bot\n"));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let params = ProtocolParams::new(8, 3, 1).unwrap();
        let rec = run(&params, &EveModel::None, Backend::Fast, &mut stream(23)).unwrap();
        let text = serialize_transcript(&rec);
        let lines: Vec<&str> = text.lines().collect();

        let bad = |idx: usize, repl: &str| {
            let mut l = lines.clone();
            l[idx] = repl;
            parse_transcript(&(l.join("\n") + "\n")).unwrap_err()
        };
        assert!(matches!(
            bad(1, "params n=8 k=x r=1"),
            Error::Parse { line: 2, .. }
        ));
        assert!(matches!(
            bad(7, "announce alice u_A=zz"),
            Error::Parse { line: 8, .. }
        ));
        assert!(matches!(
            bad(11, "decision maybe"),
            Error::Parse { line: 12, .. }
        ));
        assert!(matches!(
            bad(11, "decision reject bit"),
            Error::Parse { line: 12, .. }
        ));
        assert!(matches!(
            parse_transcript(&lines[..5].join("\n")).unwrap_err(),
            Error::Parse { line: 6, .. }
        ));
        let tampered = text.replace(
            &format!("key_B={}", rec.key_b.as_ref().unwrap().to_hex()),
            &format!(
                "key_B={}",
                rec.key_b
                    .as_ref()
                    .unwrap()
                    .xor(&BitVector::from_support(2, &[0]))
                    .unwrap()
                    .to_hex()
            ),
        );
        assert!(matches!(
            parse_transcript(&tampered).unwrap_err(),
            Error::Parse { line: 15, .. }
        ));
    }
}
