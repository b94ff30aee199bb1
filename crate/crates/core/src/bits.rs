//! Bit strings stored one bit per byte (values 0 or 1), MSB-first when packed.

use rand::Rng;

pub type Bits = Vec<u8>;

/// Number of positions where `a` and `b` differ. Panics on length mismatch.
pub fn hamming(a: &[u8], b: &[u8]) -> usize {
    assert_eq!(a.len(), b.len(), "hamming distance of unequal lengths");
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

pub fn random_bits<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Bits {
    (0..len).map(|_| rng.random::<bool>() as u8).collect()
}

/// Pack bits into bytes, MSB first. The length must be a multiple of 8.
pub fn pack(bits: &[u8]) -> Vec<u8> {
    assert!(bits.len().is_multiple_of(8), "bit length not byte aligned");
    bits.chunks(8).map(|c| c.iter().fold(0u8, |acc, &b| (acc << 1) | (b & 1))).collect()
}

pub fn unpack(bytes: &[u8]) -> Bits {
    bytes.iter().flat_map(|&byte| (0..8).rev().map(move |i| (byte >> i) & 1)).collect()
}

/// Pack an arbitrary-length bit string, zero padding the last byte.
pub fn pack_padded(bits: &[u8]) -> Vec<u8> {
    let mut v = bits.to_vec();
    v.resize(bits.len().div_ceil(8) * 8, 0);
    pack(&v)
}

pub fn to_string(bits: &[u8]) -> String {
    bits.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect()
}

/// Parse a string of '0'/'1' characters, ignoring whitespace.
pub fn parse(s: &str) -> Option<Bits> {
    s.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            '0' => Some(0),
            '1' => Some(1),
            _ => None,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pack_roundtrip() {
        let b = parse("1000 0001 0110 1111").unwrap();
        assert_eq!(pack(&b), vec![0x81, 0x6f]);
        assert_eq!(unpack(&pack(&b)), b);
    }

    #[test]
    fn hamming_counts() {
        assert_eq!(hamming(&[0, 1, 1, 0], &[1, 1, 0, 0]), 2);
    }
}
