/// Purpose of a derived seed. Each role gets its own stream so, for
/// example, changing the SMOTE seed never perturbs the data split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum SeedRole {
    Split = 0,
    Folds = 1,
    Model = 2,
    Shuffle = 3,
    Smote = 4,
    Embedding = 5,
    InnerSplit = 6,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `seed = mix(mix(mix(master) + role) + index)`. The same master, role
/// and fold index always produce the same seed, independent of which
/// grid cell asks.
pub fn derive_seed(master: u64, role: SeedRole, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master).wrapping_add(role as u64)).wrapping_add(index))
}
