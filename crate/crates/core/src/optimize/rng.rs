use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Counter-based generator for one particle, individual or chain.
///
/// All streams of a run share the seed and differ in the ChaCha stream
/// id, so draws for index `i` never depend on how other indices were
/// scheduled.
pub(crate) fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}
