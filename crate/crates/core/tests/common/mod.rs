#![allow(dead_code)]

use cfmimo::scenario::{ArrayConfig, PathGenerator, PathSet, PathlossModel, Position, Scenario};
use cfmimo::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const C: f64 = 299_792_458.0;

/// `e^{-j2π x}` without range reduction.
pub fn expj_neg(cycles: f64) -> Complex64 {
    Complex64::from_polar(1.0, -std::f64::consts::TAU * cycles)
}

pub struct Dims {
    pub aps: usize,
    pub antennas: usize,
    pub paths: usize,
}

/// Random deployment in a 200 m square with random path draws.
pub fn random_paths(seed: u64, dims: &Dims) -> PathSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fc = [28e9, 39e9, 73e9][rng.gen_range(0..3)];
    let array =
        ArrayConfig::with_spacing_wavelengths(dims.antennas, rng.gen_range(0.3..1.0), fc).unwrap();
    let point = |rng: &mut ChaCha8Rng| {
        Position::new(rng.gen_range(-100.0..100.0), rng.gen_range(-100.0..100.0))
    };
    let aps = (0..dims.aps).map(|_| point(&mut rng)).collect();
    let ues = vec![point(&mut rng), point(&mut rng)];
    let scenario = Scenario::new(aps, ues, array, dims.paths).unwrap();
    let profile = PathGenerator::exponential_profile(dims.paths, 0.7);
    PathGenerator::new(profile, PathlossModel::default())
        .unwrap()
        .generate(&scenario, rng.gen())
        .unwrap()
}

/// Relative error of `got` against `want`, scaled by the magnitude of the
/// individual path terms that were summed into `want`.
pub fn rel_err(got: Complex64, want: Complex64, scale: f64) -> f64 {
    (got - want).norm() / scale.max(f64::MIN_POSITIVE)
}

pub fn gain_scale(paths: &PathSet, k: usize, l: usize) -> f64 {
    paths.paths(k, l).iter().map(|p| p.gain.norm()).sum()
}
