//! Stable content hashing.

use sha2::{Digest, Sha256};

/// First 64 bits of the SHA-256 digest, big-endian.
pub fn content_hash(bytes: &[u8]) -> u64 {
    let digest = Sha256::digest(bytes);
    u64::from_be_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}

/// Combines hashes in order into one.
pub fn combine(parts: &[u64]) -> u64 {
    let mut hasher = Sha256::new();
    for p in parts {
        hasher.update(p.to_be_bytes());
    }
    let digest = hasher.finalize();
    u64::from_be_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}

pub fn hex(h: u64) -> String {
    format!("{h:016x}")
}
