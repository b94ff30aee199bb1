//! Narrow-sense binary BCH codes of length up to 255, built from the
//! minimal polynomials of alpha^1 .. alpha^(2t) in GF(256).
//!
//! Codewords are systematic bit vectors `[message | parity]`.

use super::gf256::{self, berlekamp_massey, poly_eval};
use crate::error::{invalid_config, invalid_input, Result};

/// (n, k, t) of the supported length-255 designs.
pub const PRESETS: [(usize, usize, usize); 3] = [(255, 147, 14), (255, 179, 10), (255, 247, 1)];

#[derive(Debug, Clone)]
pub struct BchCode {
    n: usize,
    k: usize,
    t: usize,
    /// Generator bits in descending degree order, leading 1 included.
    generator: Vec<u8>,
}

fn cyclotomic_coset(j: usize) -> Vec<usize> {
    let mut coset = vec![j % 255];
    let mut c = (2 * j) % 255;
    while c != coset[0] {
        coset.push(c);
        c = (2 * c) % 255;
    }
    coset
}

fn minimal_polynomial(coset: &[usize]) -> Vec<u8> {
    let mut p = vec![1u8];
    for &c in coset {
        p = gf256::poly_mul(&p, &[gf256::exp(c as i64), 1]);
    }
    debug_assert!(p.iter().all(|&c| c <= 1));
    p
}

impl BchCode {
    /// Length-`n` (shortened when `n < 255`) code correcting `t` bit errors.
    pub fn new(n: usize, t: usize) -> Result<Self> {
        if n == 0 || n > 255 || t == 0 {
            return Err(invalid_config(format!("BCH n={n}, t={t} unsupported")));
        }
        let mut used = [false; 255];
        let mut g = vec![1u8];
        for j in 1..=2 * t {
            let j = j % 255;
            if used[j] {
                continue;
            }
            let coset = cyclotomic_coset(j);
            for &c in &coset {
                used[c] = true;
            }
            g = gf256::poly_mul(&g, &minimal_polynomial(&coset));
        }
        let deg = g.len() - 1;
        if deg >= n {
            return Err(invalid_config(format!("BCH n={n}, t={t} leaves no message bits")));
        }
        g.reverse();
        Ok(Self { n, k: n - deg, t, generator: g })
    }

    /// Look up a preset by `(n, k)`.
    pub fn preset(n: usize, k: usize) -> Result<Self> {
        let &(_, _, t) = PRESETS
            .iter()
            .find(|p| p.0 == n && p.1 == k)
            .ok_or_else(|| invalid_config(format!("no BCH preset ({n},{k})")))?;
        Self::new(n, t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn encode(&self, msg: &[u8]) -> Result<Vec<u8>> {
        if msg.len() != self.k {
            return Err(invalid_input(format!("BCH message has {} bits, expected {}", msg.len(), self.k)));
        }
        let mut buf = msg.to_vec();
        buf.resize(self.n, 0);
        for i in 0..self.k {
            if buf[i] & 1 == 1 {
                for (j, &g) in self.generator.iter().enumerate().skip(1) {
                    buf[i + j] ^= g;
                }
            }
        }
        buf[..self.k].copy_from_slice(msg);
        Ok(buf)
    }

    fn syndromes(&self, word: &[u8]) -> Vec<u8> {
        let ones: Vec<i64> =
            word.iter().enumerate().filter(|(_, &b)| b & 1 == 1).map(|(i, _)| (self.n - 1 - i) as i64).collect();
        (1..=2 * self.t as i64).map(|j| ones.iter().fold(0u8, |acc, &p| acc ^ gf256::exp(j * p))).collect()
    }

    /// Correct `word` in place. Returns the number of flipped bits, or `None`
    /// on decoding failure with `word` left untouched.
    pub fn decode(&self, word: &mut [u8]) -> Option<usize> {
        assert_eq!(word.len(), self.n, "BCH word length");
        let synd = self.syndromes(word);
        if synd.iter().all(|&s| s == 0) {
            return Some(0);
        }
        let lambda = berlekamp_massey(&synd);
        let nu = lambda.len() - 1;
        if nu == 0 || nu > self.t {
            return None;
        }
        let positions: Vec<usize> =
            (0..self.n).filter(|&i| poly_eval(&lambda, gf256::exp(-((self.n - 1 - i) as i64))) == 0).collect();
        if positions.len() != nu {
            return None;
        }
        for &i in &positions {
            word[i] ^= 1;
        }
        if self.syndromes(word).iter().any(|&s| s != 0) {
            for &i in &positions {
                word[i] ^= 1;
            }
            return None;
        }
        Some(nu)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{seq::index::sample, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn preset_dimensions() {
        for (n, k, t) in PRESETS {
            let c = BchCode::new(n, t).unwrap();
            assert_eq!((c.n(), c.k(), c.t()), (n, k, t));
        }
    }

    #[test]
    fn hamming_code_generator() {
        // t = 1 gives the minimal polynomial of alpha, i.e. the field polynomial.
        let c = BchCode::new(255, 1).unwrap();
        assert_eq!(c.generator, vec![1, 0, 0, 0, 1, 1, 1, 0, 1]);
    }

    #[test]
    fn corrects_t_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (n, k, t) in PRESETS {
            let code = BchCode::new(n, t).unwrap();
            let msg = crate::bits::random_bits(&mut rng, k);
            let cw = code.encode(&msg).unwrap();
            assert!(code.syndromes(&cw).iter().all(|&s| s == 0));
            let mut w = cw.clone();
            for p in sample(&mut rng, n, t) {
                w[p] ^= 1;
            }
            assert_eq!(code.decode(&mut w), Some(t));
            assert_eq!(w, cw);
        }
    }
}
