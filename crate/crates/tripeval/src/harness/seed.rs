//! Deterministic seed derivation for experiment runs.
//!
//! Every RNG seed used by the harness is derived from the master seed with
//! FNV-1a 64 over a canonical string, so runs are reproducible and adding,
//! removing or reordering generators never shifts another generator's
//! seeds.

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = FNV_OFFSET;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Seed for one purpose within one run: hashes
/// `"tripeval/1|<master>|<generator>|<fit>|<sample>|<purpose>"`.
pub fn derive_seed(master: u64, generator: &str, fit: usize, sample: usize, purpose: &str) -> u64 {
    let canonical = format!("tripeval/1|{master}|{generator}|{fit}|{sample}|{purpose}");
    fnv1a(canonical.as_bytes())
}
