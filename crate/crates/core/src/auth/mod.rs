//! Keyed embedding of a BCH-protected authentication message into the coded
//! source stream, and the legal/illegal decision.

mod config;
mod keyfile;
mod locations;

pub use config::{AuthConfig, Granularity, Strategy, DEFAULT_DELTA};
pub use keyfile::{read_key, write_key, KeyMetadata};
pub use locations::{admissible_bits, derive_locations, derive_locations_from_digest, source_digest, EmbedLocations};

use serde::{Deserialize, Serialize};

use crate::bits::{hamming, Bits};
use crate::coding::BchCode;
use crate::error::{invalid_input, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Legal,
    Illegal,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Legal => "legal",
            Verdict::Illegal => "illegal",
        })
    }
}

/// Per-product secret shared between sender and receiver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretBundle {
    pub key: Vec<u8>,
    pub s_a1: Bits,
    /// Digest of the source message the key was issued for.
    pub source_digest: [u8; 32],
}

impl SecretBundle {
    pub fn new(key: Vec<u8>, s_a1: Bits, s_c1: &[u8]) -> Self {
        Self { key, s_a1, source_digest: source_digest(s_c1) }
    }

    /// Fresh 32-byte key and random authentication message.
    pub fn random<R: rand::Rng + ?Sized>(rng: &mut R, k_a: usize, s_c1: &[u8]) -> Self {
        let key: Vec<u8> = (0..32).map(|_| rng.random()).collect();
        let s_a1 = crate::bits::random_bits(rng, k_a);
        Self::new(key, s_a1, s_c1)
    }
}

pub fn bch_encode(s_a1: &[u8], cfg: &AuthConfig) -> Result<Bits> {
    cfg.code()?.encode(s_a1)
}

/// Returns the message part and a failure flag; on failure the systematic
/// bits are returned uncorrected.
pub fn bch_decode(word: &[u8], cfg: &AuthConfig) -> Result<(Bits, bool)> {
    decode_with(&cfg.code()?, word)
}

pub(crate) fn decode_with(code: &BchCode, word: &[u8]) -> Result<(Bits, bool)> {
    if word.len() != code.n() {
        return Err(invalid_input(format!("BCH word has {} bits, expected {}", word.len(), code.n())));
    }
    let mut w = word.to_vec();
    let failed = code.decode(&mut w).is_none();
    w.truncate(code.k());
    Ok((w, failed))
}

/// Overwrite the bits at `loc` with `s_a2`.
pub fn embed(s_c2: &[u8], s_a2: &[u8], loc: &EmbedLocations) -> Result<Bits> {
    if s_a2.len() != loc.positions.len() {
        return Err(invalid_input(format!("{} authentication bits for {} positions", s_a2.len(), loc.positions.len())));
    }
    if let Some(&p) = loc.positions.iter().find(|&&p| p >= s_c2.len()) {
        return Err(invalid_input(format!("position {p} outside stream of {}", s_c2.len())));
    }
    let mut out = s_c2.to_vec();
    for (&p, &b) in loc.positions.iter().zip(s_a2) {
        out[p] = b;
    }
    Ok(out)
}

pub fn extract(s_c2_hat: &[u8], loc: &EmbedLocations) -> Result<Bits> {
    loc.positions
        .iter()
        .map(|&p| {
            s_c2_hat
                .get(p)
                .copied()
                .ok_or_else(|| invalid_input(format!("position {p} outside stream of {}", s_c2_hat.len())))
        })
        .collect()
}

/// Bit error rate against the issued message and the verdict: illegal iff it exceeds `delta`.
pub fn authenticate(s_a1_hat: &[u8], s_a1: &[u8], delta: f64) -> Result<(f64, Verdict)> {
    if s_a1_hat.len() != s_a1.len() || s_a1.is_empty() {
        return Err(invalid_input("authentication messages differ in length"));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(invalid_input(format!("threshold {delta} outside [0, 1)")));
    }
    let eps = hamming(s_a1_hat, s_a1) as f64 / s_a1.len() as f64;
    Ok((eps, if eps > delta { Verdict::Illegal } else { Verdict::Legal }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_boundaries() {
        let a = vec![0u8; 1000];
        let mut b = a.clone();
        assert_eq!(authenticate(&b, &a, 0.012).unwrap().1, Verdict::Legal);
        for bit in b.iter_mut().take(12) {
            *bit = 1;
        }
        assert_eq!(authenticate(&b, &a, 0.012).unwrap(), (0.012, Verdict::Legal));
        b[12] = 1;
        assert_eq!(authenticate(&b, &a, 0.012).unwrap().1, Verdict::Illegal);
        assert!(authenticate(&b[..10], &a, 0.012).is_err());
    }

    #[test]
    fn extract_inverts_embed() {
        let loc = EmbedLocations { positions: vec![5, 0, 9] };
        let s = vec![0u8; 10];
        let e = embed(&s, &[1, 1, 0], &loc).unwrap();
        assert_eq!(extract(&e, &loc).unwrap(), vec![1, 1, 0]);
        assert_eq!(hamming(&e, &s), 2);
        assert!(extract(&s[..5], &loc).is_err());
    }
}
