//! Seeded random sampling helpers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::vector::Vector;

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent stream seed from a master seed and a label.
pub fn derive_seed(master: u64, label: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = master ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn unit_sphere(rng: &mut impl Rng, dim: usize) -> Vector {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        if let Some(u) = Vector::raw(v).normalized() {
            return u;
        }
    }
}

/// Uniform sample of the closed ball of the given radius.
pub fn in_ball(rng: &mut impl Rng, center: &Vector, radius: f64) -> Vector {
    let dim = center.dim();
    let u = unit_sphere(rng, dim);
    let t: f64 = rng.random::<f64>().powf(1.0 / dim as f64);
    center.axpy(radius * t, &u)
}

/// Flat Dirichlet weights of the given length.
pub fn simplex_weights(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..len)
        .map(|_| -(1.0 - rng.random::<f64>()).ln())
        .collect();
    let s: f64 = w.iter().sum();
    for x in &mut w {
        *x /= s;
    }
    w
}

pub fn uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}
