#![allow(dead_code)]

use std::sync::Arc;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use troptheta::exact::rational::{q, qf, Rational};
use troptheta::theta::{make_theta, DeltaFunction, ThetaFunction};
use troptheta::torus::{coset_system, Polarization};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform rational in `[lo, hi]` with denominator `den`.
pub fn rand_q(r: &mut ChaCha8Rng, lo: i64, hi: i64, den: i64) -> Rational {
    qf(r.gen_range(lo * den..=hi * den), den)
}

pub fn rand_vec(r: &mut ChaCha8Rng, n: usize, lo: i64, hi: i64, den: i64) -> Vec<Rational> {
    (0..n).map(|_| rand_q(r, lo, hi, den)).collect()
}

pub fn ints(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

pub fn random_theta(p: &Polarization, k: u64, r: &mut ChaCha8Rng) -> ThetaFunction {
    let cosets = Arc::new(coset_system(p, k).unwrap());
    let delta = (0..cosets.len()).map(|_| rand_q(r, 0, 1, 997) / q(8 * k as i64)).collect();
    let w = rand_vec(r, p.dim(), -1, 1, 101);
    make_theta(p, k, DeltaFunction::new(cosets, delta).unwrap(), w).unwrap()
}
