use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{AuthConfig, Granularity, Strategy};
use crate::bits;
use crate::error::{invalid_config, Result};
use crate::layout::BarcodeSpec;

/// Bit indices into the coded stream s_c2 that carry s_a2, in order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbedLocations {
    pub positions: Vec<usize>,
}

/// SHA-256 over the bit length and the packed bits of `s_c1`.
pub fn source_digest(s_c1: &[u8]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update((s_c1.len() as u64).to_le_bytes());
    h.update(bits::pack_padded(s_c1));
    h.finalize().into()
}

fn admissible_range(strategy: Strategy, spec: &BarcodeSpec) -> Vec<usize> {
    match strategy {
        Strategy::Strategy1 => spec.parity_ranges().into_iter().flatten().collect(),
        Strategy::Strategy2 => (0..spec.coded_bits()).collect(),
    }
}

/// Number of stream bits a strategy may write to.
pub fn admissible_bits(strategy: Strategy, spec: &BarcodeSpec) -> usize {
    match strategy {
        Strategy::Strategy1 => spec.parity_bits(),
        Strategy::Strategy2 => spec.coded_bits(),
    }
}

pub fn derive_locations(s_c1: &[u8], key: &[u8], cfg: &AuthConfig, spec: &BarcodeSpec) -> Result<EmbedLocations> {
    derive_locations_from_digest(&source_digest(s_c1), key, cfg, spec)
}

/// Positions drawn without replacement from the strategy's admissible
/// range by a generator seeded with SHA-256(key || digest).
pub fn derive_locations_from_digest(
    digest: &[u8; 32],
    key: &[u8],
    cfg: &AuthConfig,
    spec: &BarcodeSpec,
) -> Result<EmbedLocations> {
    let mut h = Sha256::new();
    h.update(key);
    h.update(digest);
    let mut rng = ChaCha20Rng::from_seed(h.finalize().into());

    let range = admissible_range(cfg.strategy, spec);
    if cfg.n_a > range.len() {
        return Err(invalid_config(format!("n_a = {} exceeds {} admissible positions", cfg.n_a, range.len())));
    }
    let positions = match cfg.granularity {
        Granularity::Bit => sample(&mut rng, range.len(), cfg.n_a).into_iter().map(|i| range[i]).collect(),
        Granularity::Module => {
            let bps = spec.bits_per_symbol();
            let modules: Vec<usize> = range.iter().filter(|&&b| b % bps == 0).copied().collect();
            let mut pos: Vec<usize> = sample(&mut rng, modules.len(), cfg.n_a.div_ceil(bps))
                .into_iter()
                .flat_map(|i| modules[i]..modules[i] + bps)
                .collect();
            pos.truncate(cfg.n_a);
            pos
        }
    };
    Ok(EmbedLocations { positions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn strategy1_stays_in_parity() {
        let spec = BarcodeSpec::default();
        let cfg = AuthConfig::default();
        let loc = derive_locations(&[1, 0, 1], b"key", &cfg, &spec).unwrap();
        assert_eq!(loc.positions.len(), 255);
        assert_eq!(loc.positions.iter().collect::<HashSet<_>>().len(), 255);
        assert!(loc.positions.iter().all(|&p| (440..2040).contains(&p) || (2480..4080).contains(&p)));
        assert_eq!(loc, derive_locations(&[1, 0, 1], b"key", &cfg, &spec).unwrap());
        assert_ne!(loc, derive_locations(&[1, 0, 0], b"key", &cfg, &spec).unwrap());
    }

    #[test]
    fn module_granularity_uses_whole_modules() {
        let spec = BarcodeSpec::default();
        let cfg = AuthConfig { granularity: Granularity::Module, ..AuthConfig::default() };
        let loc = derive_locations(&[0; 8], b"k", &cfg, &spec).unwrap();
        assert_eq!(loc.positions.len(), 255);
        let modules: HashSet<usize> = loc.positions.iter().map(|p| p / 2).collect();
        assert_eq!(modules.len(), 128);
    }

    #[test]
    fn oversized_request_rejected() {
        let spec = BarcodeSpec::default();
        let cfg = AuthConfig { n_a: 3201, ..AuthConfig::default() };
        assert!(derive_locations(&[0], b"k", &cfg, &spec).is_err());
    }
}
