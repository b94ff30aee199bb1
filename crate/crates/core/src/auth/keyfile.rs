//! Key file: hex-encoded key bytes, with a JSON sidecar for the rest of the bundle.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::SecretBundle;
use crate::bits;
use crate::error::{invalid_input, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyMetadata {
    pub k_a: usize,
    /// s_a1 packed MSB first, zero padded, hex.
    pub s_a1: String,
    pub source_digest: String,
}

fn sidecar(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

pub fn write_key(bundle: &SecretBundle, path: &Path) -> Result<()> {
    let meta = KeyMetadata {
        k_a: bundle.s_a1.len(),
        s_a1: hex::encode(bits::pack_padded(&bundle.s_a1)),
        source_digest: hex::encode(bundle.source_digest),
    };
    fs::write(path, format!("{}\n", hex::encode(&bundle.key)))?;
    fs::write(sidecar(path), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

pub fn read_key(path: &Path) -> Result<SecretBundle> {
    let bad = |what: &str| invalid_input(format!("{}: malformed {what}", path.display()));
    let key = hex::decode(fs::read_to_string(path)?.trim()).map_err(|_| bad("key"))?;
    let meta: KeyMetadata = serde_json::from_str(&fs::read_to_string(sidecar(path))?)?;
    let mut s_a1 = bits::unpack(&hex::decode(&meta.s_a1).map_err(|_| bad("s_a1"))?);
    if s_a1.len() < meta.k_a {
        return Err(bad("s_a1 length"));
    }
    s_a1.truncate(meta.k_a);
    let source_digest: [u8; 32] =
        hex::decode(&meta.source_digest).map_err(|_| bad("digest"))?.try_into().map_err(|_| bad("digest length"))?;
    Ok(SecretBundle { key, s_a1, source_digest })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn roundtrip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let b = SecretBundle::random(&mut rng, 147, &[1, 0, 1, 1]);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("product.key");
        write_key(&b, &p).unwrap();
        assert_eq!(read_key(&p).unwrap(), b);
    }
}
