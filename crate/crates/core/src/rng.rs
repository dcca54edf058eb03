//! Replica streams.
//!
//! Replica `r` of an experiment with master seed `s` always draws from
//! ChaCha8 keyed by `s` on stream `r`, so a replica's numbers never depend on
//! which thread ran it or in what order.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Streams at the top of the id space are reserved for resampling, so they
/// cannot collide with replica ids.
pub const BOOTSTRAP_STREAM: u64 = u64::MAX;
pub const SPARSE_STREAM_BASE: u64 = 1 << 62;

pub fn stream(master_seed: u64, id: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(id);
    rng
}

/// Uniform on the open interval (0, 1).
#[inline]
pub fn open01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(Open01)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| stream(7, 3).random()).collect();
        let b: Vec<u64> = (0..4).map(|_| stream(7, 3).random()).collect();
        assert_eq!(a, b);
        let mut r1 = stream(7, 3);
        let mut r2 = stream(7, 4);
        assert_ne!(r1.random::<u64>(), r2.random::<u64>());
    }

    #[test]
    fn open01_never_hits_the_endpoints() {
        let mut rng = stream(1, 0);
        for _ in 0..100_000 {
            let u = open01(&mut rng);
            assert!(u > 0.0 && u < 1.0);
        }
    }
}
