//! Seeded fixtures shared by the benchmarks.

use opmult::linalg::random_gaussian;
use opmult::{CTensor, ElementaryTensorSum, KernelTuple};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Sum of `terms` elementary tensors with Gaussian square factors.
pub fn random_sum(dims: &[usize], terms: usize, seed: u64) -> ElementaryTensorSum {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let t = (0..terms).map(|_| dims.iter().map(|&d| random_gaussian(d, d, &mut r)).collect()).collect();
    ElementaryTensorSum::new(dims.to_vec(), t).expect("factor shapes follow dims")
}

/// Gaussian kernels `T_i : d_{i+1} -> d_i` chaining along `dims`.
pub fn random_kernels(dims: &[usize], seed: u64) -> KernelTuple {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let ks = dims.windows(2).map(|w| random_gaussian(w[0], w[1], &mut r)).collect();
    KernelTuple::new(ks).expect("kernels chain")
}

/// Gaussian Schur function on a product of index sets.
pub fn random_schur(dims: &[usize], seed: u64) -> CTensor {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let len: usize = dims.iter().product();
    let v = random_gaussian(len, 1, &mut r);
    CTensor::from_fn(dims.to_vec(), |x| v[(x.iter().zip(dims).fold(0, |acc, (&i, &d)| acc * d + i), 0)])
}

/// `2^{-(i+j)}` on `d x d`, a Schur multiplier with geometric tails.
pub fn geometric_schur(d: usize) -> CTensor {
    CTensor::from_fn(vec![d, d], |x| opmult::C64::new(0.5f64.powi((x[0] + x[1]) as i32), 0.0))
}
