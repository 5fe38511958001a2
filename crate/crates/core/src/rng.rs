//! Seeded RNG streams. Every consumer of randomness gets its own stream so
//! that, for example, exploration noise never shifts episode setups.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub const SETUP: u64 = 1;
pub const EXPLORE: u64 = 2;
pub const REPLAY: u64 = 3;
pub const INIT: u64 = 4;
pub const MOTION: u64 = 5;
pub const EVAL: u64 = 6;

/// Independent stream `stream` of the generator seeded with `seed`.
pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Stream for work item `index` (an evaluation episode, a grid cell...).
pub fn item_stream(seed: u64, stream_id: u64, index: u64) -> Rng {
    let mixed = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    stream(mixed, stream_id)
}
