//! Counter-based seed derivation.
//!
//! A trial's seed is a pure function of the experiment's master seed and the
//! trial's coordinates (grid index, trial index, ...), so trials can run in any
//! order or on any thread and still see the same random stream.

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from `master` and a path of counters.
///
/// `derive(m, &[a, b])` is `splitmix64(splitmix64(m ^ mix(a)) ^ mix(b))` where
/// each counter is itself passed through the finalizer first, so neighbouring
/// counters produce unrelated seeds.
pub fn derive(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &c| splitmix64(acc ^ splitmix64(c)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_values() {
        // Reference stream of SplitMix64 seeded with 0: state advances by the
        // golden gamma and the output is the finalized state.
        assert_eq!(splitmix64(0), 0xe220_a839_7b1d_cdaf);
        assert_eq!(splitmix64(GOLDEN_GAMMA), 0x6e78_9e6a_a1b9_65f4);
    }

    #[test]
    fn derive_separates_paths() {
        let a = derive(7, &[0, 1]);
        let b = derive(7, &[1, 0]);
        let c = derive(8, &[0, 1]);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, derive(7, &[0, 1]));
    }
}
