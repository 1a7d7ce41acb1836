//! Replication-indexed random streams.
//!
//! Each `(seed, n)` cell gets its own ChaCha8 key and each replication its own
//! stream within that key, so a replication's draws never depend on which
//! worker runs it or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const DOMAIN_TAG: [u8; 8] = *b"skewadj1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamKey([u8; 32]);

impl StreamKey {
    pub fn new(seed: u64, n: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&n.to_le_bytes());
        key[16..24].copy_from_slice(&DOMAIN_TAG);
        StreamKey(key)
    }

    pub fn replication(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.0);
        rng.set_stream(index);
        rng
    }
}
