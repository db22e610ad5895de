//! Counter-based random streams.
//!
//! Every replicate owns a stream identified by `(base_seed, replicate)`. The
//! k-th draw of a stream is a pure function of `(key, gamma, k)`, so the
//! values a replicate sees do not depend on which worker runs it or in which
//! order replicates are scheduled.
//!
//! The construction is the SplitMix64 output function evaluated at
//! `key + (k + 1) * gamma`, with a per-stream odd increment `gamma` (the
//! same idea as Java's `SplittableRandom`), so distinct streams walk
//! distinct Weyl sequences.

use serde::{Deserialize, Serialize};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const REPLICATE_SALT: u64 = 0xD1B5_4A32_D192_ED03;

/// SplitMix64 / Stafford "variant 13" finalizer.
#[inline(always)]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Variant of the finalizer used to derive stream increments.
#[inline]
fn mix_gamma(z: u64) -> u64 {
    let mut z = z;
    z = (z ^ (z >> 33)).wrapping_mul(0xFF51_AFD7_ED55_8CCD);
    z = (z ^ (z >> 33)).wrapping_mul(0xC4CE_B9FE_1A85_EC53);
    z = (z ^ (z >> 33)) | 1;
    // Increments with too few bit transitions give visibly correlated
    // Weyl sequences; flip them like SplittableRandom does.
    if (z ^ (z >> 1)).count_ones() < 24 {
        z ^= 0xAAAA_AAAA_AAAA_AAAA;
    }
    z
}

/// Identity of a random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamId {
    pub base_seed: u64,
    pub replicate: u64,
}

/// A positioned counter-based stream.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stream {
    id: StreamId,
    key: u64,
    gamma: u64,
    counter: u64,
}

impl Stream {
    pub fn new(base_seed: u64, replicate: u64) -> Self {
        let r = mix64(replicate.wrapping_mul(REPLICATE_SALT).wrapping_add(GOLDEN_GAMMA));
        let key = mix64(base_seed ^ r);
        let gamma = mix_gamma(key.wrapping_add(r).wrapping_add(GOLDEN_GAMMA));
        Stream {
            id: StreamId {
                base_seed,
                replicate,
            },
            key,
            gamma,
            counter: 0,
        }
    }

    pub fn id(&self) -> StreamId {
        self.id
    }

    /// Number of draws consumed so far.
    pub fn position(&self) -> u64 {
        self.counter
    }

    /// Value of the `k`-th draw, independent of the current position.
    #[inline(always)]
    pub fn draw_at(&self, k: u64) -> u64 {
        mix64(self.key.wrapping_add(k.wrapping_add(1).wrapping_mul(self.gamma)))
    }

    #[inline(always)]
    pub fn next_u64(&mut self) -> u64 {
        let v = self.draw_at(self.counter);
        self.counter += 1;
        v
    }

    /// Uniform on [0, 1) with 53 bits of resolution.
    #[inline(always)]
    pub fn next_f64(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        (self.next_u64() >> 11) as f64 * SCALE
    }

    /// `(key, gamma)`: draw k is `mix64(key + (k + 1) * gamma)`.
    pub(crate) fn weyl_parts(&self) -> (u64, u64) {
        (self.key, self.gamma)
    }

    /// Jump to an absolute position.
    pub fn seek(&mut self, position: u64) {
        self.counter = position;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_position_independent() {
        let mut a = Stream::new(42, 7);
        let mut b = Stream::new(42, 7);
        let xs: Vec<u64> = (0..100).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..100).map(|_| b.next_u64()).collect();
        assert_eq!(xs, ys);
        let c = Stream::new(42, 7);
        assert_eq!(c.draw_at(57), xs[57]);
        let mut d = Stream::new(42, 7);
        d.seek(57);
        assert_eq!(d.next_u64(), xs[57]);
    }

    #[test]
    fn streams_differ_across_seed_and_replicate() {
        let s0: Vec<u64> = {
            let mut s = Stream::new(1, 0);
            (0..8).map(|_| s.next_u64()).collect()
        };
        let s1: Vec<u64> = {
            let mut s = Stream::new(1, 1);
            (0..8).map(|_| s.next_u64()).collect()
        };
        let s2: Vec<u64> = {
            let mut s = Stream::new(2, 0);
            (0..8).map(|_| s.next_u64()).collect()
        };
        assert_ne!(s0, s1);
        assert_ne!(s0, s2);
        assert_ne!(s1, s2);
    }

    #[test]
    fn uniform_moments() {
        let mut s = Stream::new(123, 0);
        let n = 1_000_000;
        let (mut m1, mut m2) = (0.0, 0.0);
        for _ in 0..n {
            let u = s.next_f64();
            assert!((0.0..1.0).contains(&u));
            m1 += u;
            m2 += u * u;
        }
        m1 /= n as f64;
        m2 /= n as f64;
        // SE of the mean is ~2.9e-4.
        assert!((m1 - 0.5).abs() < 2e-3, "{m1}");
        assert!((m2 - 1.0 / 3.0).abs() < 2e-3, "{m2}");
    }

    #[test]
    fn bit_balance() {
        let mut s = Stream::new(9, 3);
        let mut counts = [0u32; 64];
        let n = 20_000;
        for _ in 0..n {
            let v = s.next_u64();
            for (b, c) in counts.iter_mut().enumerate() {
                *c += ((v >> b) & 1) as u32;
            }
        }
        for c in counts {
            let f = c as f64 / n as f64;
            assert!((f - 0.5).abs() < 0.02, "{f}");
        }
    }
}
