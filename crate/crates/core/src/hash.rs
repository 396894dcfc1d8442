//! Deterministic 64-bit hashing and seed derivation.
//!
//! Fingerprint environments are hashed by feeding a canonical byte encoding
//! through FNV-1a and finishing with the splitmix64 mixer. Seeds for
//! per-tree and per-iteration random streams are derived the same way, so
//! results never depend on scheduling.

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// splitmix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Streaming FNV-1a with a splitmix64 finish.
#[derive(Clone, Debug)]
pub struct EnvHasher {
    state: u64,
}

impl Default for EnvHasher {
    fn default() -> Self {
        Self { state: FNV_OFFSET }
    }
}

impl EnvHasher {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn write_bytes(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.state ^= u64::from(b);
            self.state = self.state.wrapping_mul(FNV_PRIME);
        }
    }

    pub fn write_u64(&mut self, v: u64) {
        self.write_bytes(&v.to_le_bytes());
    }

    pub fn write_u32(&mut self, v: u32) {
        self.write_bytes(&v.to_le_bytes());
    }

    pub fn finish(&self) -> u64 {
        mix64(self.state)
    }
}

/// Derives an independent seed for sub-stream `index` of `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(master ^ mix64(index.wrapping_add(0x9e37_79b9_7f4a_7c15)))
}
