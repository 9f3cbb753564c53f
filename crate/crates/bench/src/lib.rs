//! Fixtures shared by the benchmarks under `benches/`.

use ladder_core::model::sample_params;
use ladder_core::{catalog, CbnParams, CgteSpec, GraphName};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A catalog graph with seeded random parameters.
pub fn fixture(g: GraphName, seed: u64) -> (CgteSpec, CbnParams) {
    let spec = catalog(g);
    let params = sample_params(&mut ChaCha8Rng::seed_from_u64(seed), &spec.dag);
    (spec, params)
}
