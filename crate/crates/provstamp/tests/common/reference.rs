//! Independent reference implementations used as oracles. These are
//! deliberately written from the primary definitions (FIPS 180-4 for
//! SHA-256, the bitwise CRC-32 recurrence, a naive tree-walking query
//! evaluator) and share no code with the crate under test.

use provstamp::json::Json;
use provstamp::query::{CompareOp, Literal, Path, PathSegment, QueryExpr};

// ---------------------------------------------------------------------------
// CRC-32 (ISO-HDLC), bit by bit
// ---------------------------------------------------------------------------

pub fn crc32(data: &[u8]) -> u32 {
    let mut c: u32 = 0xFFFF_FFFF;
    for &byte in data {
        c ^= byte as u32;
        for _ in 0..8 {
            c = if c & 1 != 0 {
                0xEDB8_8320 ^ (c >> 1)
            } else {
                c >> 1
            };
        }
    }
    c ^ 0xFFFF_FFFF
}

// ---------------------------------------------------------------------------
// SHA-256, straight from FIPS 180-4
// ---------------------------------------------------------------------------

const K: [u32; 64] = [
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4,
    0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe,
    0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f,
    0x4a7484aa, 0x5cb0a9dc, 0x76f988da, 0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7,
    0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc,
    0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
    0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070, 0x19a4c116,
    0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
    0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7,
    0xc67178f2,
];

pub fn sha256_hex(data: &[u8]) -> String {
    let mut h: [u32; 8] = [
        0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a, 0x510e527f, 0x9b05688c, 0x1f83d9ab,
        0x5be0cd19,
    ];
    let mut message = data.to_vec();
    let bit_len = (data.len() as u64) * 8;
    message.push(0x80);
    while message.len() % 64 != 56 {
        message.push(0);
    }
    message.extend_from_slice(&bit_len.to_be_bytes());

    for block in message.chunks_exact(64) {
        let mut w = [0u32; 64];
        for (i, word) in block.chunks_exact(4).enumerate() {
            w[i] = u32::from_be_bytes(word.try_into().unwrap());
        }
        for i in 16..64 {
            let s0 = w[i - 15].rotate_right(7) ^ w[i - 15].rotate_right(18) ^ (w[i - 15] >> 3);
            let s1 = w[i - 2].rotate_right(17) ^ w[i - 2].rotate_right(19) ^ (w[i - 2] >> 10);
            w[i] = w[i - 16]
                .wrapping_add(s0)
                .wrapping_add(w[i - 7])
                .wrapping_add(s1);
        }
        let [mut a, mut b, mut c, mut d, mut e, mut f, mut g, mut hh] = h;
        for i in 0..64 {
            let s1 = e.rotate_right(6) ^ e.rotate_right(11) ^ e.rotate_right(25);
            let ch = (e & f) ^ (!e & g);
            let temp1 = hh
                .wrapping_add(s1)
                .wrapping_add(ch)
                .wrapping_add(K[i])
                .wrapping_add(w[i]);
            let s0 = a.rotate_right(2) ^ a.rotate_right(13) ^ a.rotate_right(22);
            let maj = (a & b) ^ (a & c) ^ (b & c);
            let temp2 = s0.wrapping_add(maj);
            hh = g;
            g = f;
            f = e;
            e = d.wrapping_add(temp1);
            d = c;
            c = b;
            b = a;
            a = temp1.wrapping_add(temp2);
        }
        for (slot, add) in h.iter_mut().zip([a, b, c, d, e, f, g, hh]) {
            *slot = slot.wrapping_add(add);
        }
    }
    h.iter().map(|word| format!("{word:08x}")).collect()
}

// ---------------------------------------------------------------------------
// Naive query evaluator
// ---------------------------------------------------------------------------

fn looks_numeric(s: &str) -> Option<f64> {
    if s.is_empty() {
        return None;
    }
    for c in s.chars() {
        if !(c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || c == '+' || c == '-') {
            return None;
        }
    }
    match s.parse::<f64>() {
        Ok(f) if f.is_finite() => Some(f),
        _ => None,
    }
}

fn as_utc(s: &str) -> Option<chrono::DateTime<chrono::Utc>> {
    chrono::DateTime::parse_from_rfc3339(s)
        .ok()
        .map(|dt| dt.with_timezone(&chrono::Utc))
}

/// Every value reachable through `path`, collected by cloning.
fn gather(doc: &Json, segments: &[PathSegment]) -> Vec<Json> {
    let Some(segment) = segments.first() else {
        return vec![doc.clone()];
    };
    let mut out = Vec::new();
    match segment {
        PathSegment::Key(key) => {
            if let Json::Object(members) = doc {
                // Mirror the parser's duplicate rule: the last wins.
                if let Some((_, value)) = members.iter().rev().find(|(k, _)| k == key) {
                    out.extend(gather(value, &segments[1..]));
                }
            }
        }
        PathSegment::Wildcard => {
            if let Json::Array(items) = doc {
                for item in items {
                    out.extend(gather(item, &segments[1..]));
                }
            }
        }
    }
    out
}

fn number_of(value: &Json) -> Option<f64> {
    match value {
        Json::Number(n) => Some(n.as_f64()),
        Json::String(s) => looks_numeric(s),
        _ => None,
    }
}

fn equals(value: &Json, literal: &Literal) -> bool {
    match (value, literal) {
        (v, Literal::Num(n)) => number_of(v) == Some(*n),
        (Json::String(s), Literal::Str(t)) => s == t,
        (Json::Number(v), Literal::Str(t)) => match looks_numeric(t) {
            Some(n) => v.as_f64() == n,
            None => false,
        },
        (Json::Bool(v), Literal::Bool(b)) => v == b,
        _ => false,
    }
}

fn same_domain(value: &Json, literal: &Literal) -> bool {
    match literal {
        Literal::Num(_) => number_of(value).is_some(),
        Literal::Str(t) => match value {
            Json::String(_) => true,
            Json::Number(_) => looks_numeric(t).is_some(),
            _ => false,
        },
        Literal::Bool(_) => matches!(value, Json::Bool(_)),
    }
}

fn ordered(value: &Json, op: CompareOp, literal: &Literal) -> bool {
    let cmp = match literal {
        Literal::Num(n) => match number_of(value) {
            Some(v) => v.partial_cmp(n),
            None => None,
        },
        Literal::Str(t) => match (value, as_utc(t)) {
            (Json::String(s), Some(bound)) => as_utc(s).map(|v| v.cmp(&bound)),
            _ => None,
        },
        Literal::Bool(_) => None,
    };
    match (cmp, op) {
        (Some(ordering), CompareOp::Lt) => ordering == std::cmp::Ordering::Less,
        (Some(ordering), CompareOp::Le) => ordering != std::cmp::Ordering::Greater,
        (Some(ordering), CompareOp::Gt) => ordering == std::cmp::Ordering::Greater,
        (Some(ordering), CompareOp::Ge) => ordering != std::cmp::Ordering::Less,
        _ => false,
    }
}

fn satisfied(value: &Json, op: CompareOp, literal: &Literal) -> bool {
    match op {
        CompareOp::Eq => equals(value, literal),
        CompareOp::Ne => same_domain(value, literal) && !equals(value, literal),
        CompareOp::Lt | CompareOp::Le | CompareOp::Gt | CompareOp::Ge => {
            ordered(value, op, literal)
        }
        CompareOp::Contains => match (value, literal) {
            (Json::String(s), Literal::Str(t)) => s.contains(t.as_str()),
            (Json::Array(items), literal) => items.iter().any(|item| equals(item, literal)),
            _ => false,
        },
    }
}

fn exists(doc: &Json, path: &Path) -> bool {
    !gather(doc, &path.segments).is_empty()
}

/// The oracle: same pinned semantics, independently coded.
pub fn eval(expr: &QueryExpr, doc: &Json) -> bool {
    match expr {
        QueryExpr::Or(items) => {
            let mut result = false;
            for item in items {
                if eval(item, doc) {
                    result = true;
                }
            }
            result
        }
        QueryExpr::And(items) => {
            let mut result = true;
            for item in items {
                if !eval(item, doc) {
                    result = false;
                }
            }
            result
        }
        QueryExpr::Not(inner) => !eval(inner, doc),
        QueryExpr::Exists(path) => exists(doc, path),
        QueryExpr::Compare { path, op, literal } => {
            let mut any = false;
            for value in gather(doc, &path.segments) {
                if satisfied(&value, *op, literal) {
                    any = true;
                }
            }
            any
        }
    }
}
