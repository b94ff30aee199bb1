//! Systematic Reed-Solomon codes over GF(256), codeword laid out as
//! `[message | parity]` with byte `i` the coefficient of `x^(n-1-i)`.

use super::gf256::{self, berlekamp_massey, mul, poly_eval};
use crate::error::{invalid_config, invalid_input, Result};

#[derive(Debug, Clone)]
pub struct ReedSolomon {
    n: usize,
    k: usize,
    /// Generator in descending degree order, monic.
    generator: Vec<u8>,
}

impl ReedSolomon {
    /// Code of length `n <= 255` symbols carrying `k` message symbols.
    /// Roots of the generator are alpha^0 .. alpha^(n-k-1).
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if n > 255 || k == 0 || k >= n {
            return Err(invalid_config(format!("RS({n},{k}) is not a valid GF(256) code")));
        }
        let mut g = vec![1u8];
        for j in 0..(n - k) {
            g = gf256::poly_mul(&g, &[gf256::exp(j as i64), 1]);
        }
        g.reverse();
        Ok(Self { n, k, generator: g })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Guaranteed symbol-error correction capability.
    pub fn t(&self) -> usize {
        (self.n - self.k) / 2
    }

    pub fn encode(&self, msg: &[u8]) -> Result<Vec<u8>> {
        if msg.len() != self.k {
            return Err(invalid_input(format!("RS message has {} symbols, expected {}", msg.len(), self.k)));
        }
        let nk = self.n - self.k;
        let mut buf = msg.to_vec();
        buf.resize(self.n, 0);
        for i in 0..self.k {
            let coef = buf[i];
            if coef != 0 {
                for j in 1..=nk {
                    buf[i + j] ^= mul(self.generator[j], coef);
                }
            }
        }
        buf[..self.k].copy_from_slice(msg);
        Ok(buf)
    }

    fn syndromes(&self, word: &[u8]) -> Vec<u8> {
        (0..self.n - self.k)
            .map(|j| {
                let x = gf256::exp(j as i64);
                word.iter().fold(0u8, |acc, &c| mul(acc, x) ^ c)
            })
            .collect()
    }

    /// Correct `word` in place. Returns the number of corrected symbols, or
    /// `None` when decoding fails, in which case `word` is left untouched.
    pub fn decode(&self, word: &mut [u8]) -> Option<usize> {
        assert_eq!(word.len(), self.n, "RS word length");
        let synd = self.syndromes(word);
        if synd.iter().all(|&s| s == 0) {
            return Some(0);
        }
        let lambda = berlekamp_massey(&synd);
        let nu = lambda.len() - 1;
        if nu == 0 || nu > self.t() {
            return None;
        }

        let mut positions = Vec::with_capacity(nu);
        for i in 0..self.n {
            let xinv = gf256::exp(-((self.n - 1 - i) as i64));
            if poly_eval(&lambda, xinv) == 0 {
                positions.push(i);
            }
        }
        if positions.len() != nu {
            return None;
        }

        let two_t = synd.len();
        let mut omega = gf256::poly_mul(&synd, &lambda);
        omega.truncate(two_t);
        let dlambda: Vec<u8> = (1..lambda.len()).map(|i| if i % 2 == 1 { lambda[i] } else { 0 }).collect();

        let original = word.to_vec();
        for &i in &positions {
            let power = (self.n - 1 - i) as i64;
            let xinv = gf256::exp(-power);
            let den = poly_eval(&dlambda, xinv);
            if den == 0 {
                word.copy_from_slice(&original);
                return None;
            }
            let mag = mul(gf256::exp(power), gf256::div(poly_eval(&omega, xinv), den));
            word[i] ^= mag;
        }
        if self.syndromes(word).iter().any(|&s| s != 0) {
            word.copy_from_slice(&original);
            return None;
        }
        Some(nu)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{seq::index::sample, Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_message_zero_codeword() {
        let rs = ReedSolomon::new(255, 55).unwrap();
        assert_eq!(rs.encode(&[0; 55]).unwrap(), vec![0; 255]);
        assert_eq!(rs.t(), 100);
    }

    #[test]
    fn codeword_has_zero_syndromes() {
        let rs = ReedSolomon::new(255, 55).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let msg: Vec<u8> = (0..55).map(|_| rng.random()).collect();
        let cw = rs.encode(&msg).unwrap();
        assert!(rs.syndromes(&cw).iter().all(|&s| s == 0));
        assert_eq!(&cw[..55], &msg[..]);
    }

    #[test]
    fn corrects_up_to_t_and_flags_beyond() {
        let rs = ReedSolomon::new(255, 55).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for errs in [1usize, 37, 99, 100] {
            let msg: Vec<u8> = (0..55).map(|_| rng.random()).collect();
            let cw = rs.encode(&msg).unwrap();
            let mut w = cw.clone();
            for p in sample(&mut rng, 255, errs) {
                w[p] ^= rng.random_range(1..=255u8);
            }
            assert_eq!(rs.decode(&mut w), Some(errs));
            assert_eq!(w, cw);
        }
        let msg: Vec<u8> = (0..55).map(|_| rng.random()).collect();
        let cw = rs.encode(&msg).unwrap();
        let mut w = cw.clone();
        for p in sample(&mut rng, 255, 101) {
            w[p] ^= rng.random_range(1..=255u8);
        }
        let before = w.clone();
        assert_eq!(rs.decode(&mut w), None);
        assert_eq!(w, before);
    }

    #[test]
    fn small_code_exhaustive_single_errors() {
        let rs = ReedSolomon::new(15, 9).unwrap();
        let msg: Vec<u8> = (1..=9).collect();
        let cw = rs.encode(&msg).unwrap();
        for pos in 0..15 {
            for v in [1u8, 0x80, 0xff] {
                let mut w = cw.clone();
                w[pos] ^= v;
                assert_eq!(rs.decode(&mut w), Some(1));
                assert_eq!(w, cw);
            }
        }
    }
}
