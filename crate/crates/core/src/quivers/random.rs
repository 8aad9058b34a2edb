use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::spec::{CompanionMatrix, Permutation};
use super::QuiverError;
use crate::coeffs::CycScalar;
use crate::linalg::Matrix;
use crate::series::Series;

/// Largest degree the generator draws.
pub const MAX_RANDOM_DEGREE: u32 = 6;

fn mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Deterministic per `(seed, n, σ, s)`.
pub fn derive_seed(seed: u64, n: usize, sigma: &Permutation, s: u32) -> u64 {
    let mut h = mix(seed ^ n as u64);
    for &j in sigma.one_line() {
        h = mix(h ^ j as u64);
    }
    mix(h ^ ((s as u64) << 32))
}

/// Degrees `s ∈ 1..=6` whose top slots `σ(i) − j ≡ s` form an n-cycle, so
/// the top coefficient matrix has the distinct eigenvalues `β ζ_n^j`.
pub fn valid_degrees(sigma: &Permutation) -> Vec<u32> {
    let n = sigma.n();
    (1..=MAX_RANDOM_DEGREE)
        .filter(|&s| {
            let top: Vec<usize> = (0..n)
                .map(|i| (sigma.apply(i) as i64 - s as i64).rem_euclid(n as i64) as usize)
                .collect();
            Permutation::from_one_line(top).is_ok_and(|p| p.is_n_cycle())
        })
        .collect()
}

/// A seeded element of `B(σ, s)`: top coefficient 1 and integer
/// coefficients in `−9..=9` at every other permitted monomial.
pub fn random_valid_b(sigma: &Permutation, s: u32, seed: u64) -> CompanionMatrix {
    let n = sigma.n();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, n, sigma, s));
    let b = Matrix::from_fn(n, n, |i, j| {
        let class = (sigma.apply(i) as i64 - j as i64).rem_euclid(n as i64);
        let terms: Vec<(i64, CycScalar)> = (0..=s as i64)
            .filter(|k| k.rem_euclid(n as i64) == class)
            .map(|k| {
                let c = if k == s as i64 { 1 } else { rng.gen_range(-9..=9) };
                (k, CycScalar::from_int(c))
            })
            .collect();
        Series::polynomial(&terms)
    });
    CompanionMatrix {
        n,
        sigma: sigma.clone(),
        s,
        b,
    }
}

/// A random element of `B(σ, s)` with `s` drawn from [`valid_degrees`].
pub fn random_instance(sigma: &Permutation, seed: u64) -> Result<CompanionMatrix, QuiverError> {
    let degrees = valid_degrees(sigma);
    if degrees.is_empty() {
        return Err(QuiverError::IncompatibleLeading(format!(
            "no degree up to {MAX_RANDOM_DEGREE} makes the top slots of {sigma} an n-cycle"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, sigma.n(), sigma, 0));
    let s = degrees[rng.gen_range(0..degrees.len())];
    Ok(random_valid_b(sigma, s, seed))
}
