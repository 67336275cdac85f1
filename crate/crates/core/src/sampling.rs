//! Deterministic low-discrepancy sample sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::jets::DomainBox;

const PRIMES: [u32; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as f64;
    let mut inv = 1.0 / b;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base as u64) as f64 * inv;
        i /= base as u64;
        inv /= b;
    }
    out
}

/// Halton points in `bx`, shifted by a seeded Cranley-Patterson rotation.
/// Points rejected by `keep` are skipped; at most `64·n` candidates are tried.
pub fn halton_box(
    bx: &DomainBox,
    n: usize,
    seed: u64,
    keep: impl Fn(&[f64]) -> bool,
) -> Vec<Vec<f64>> {
    let d = bx.dim();
    assert!(d <= PRIMES.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
    let mut out = Vec::with_capacity(n);
    let mut i = 1u64;
    while out.len() < n && i <= 64 * n as u64 + 64 {
        let p: Vec<f64> = (0..d)
            .map(|k| {
                let u = (radical_inverse(i, PRIMES[k]) + shift[k]).fract();
                bx.lo[k] + u * (bx.hi[k] - bx.lo[k])
            })
            .collect();
        if keep(&p) {
            out.push(p);
        }
        i += 1;
    }
    out
}

pub fn halton_all(bx: &DomainBox, n: usize, seed: u64) -> Vec<Vec<f64>> {
    halton_box(bx, n, seed, |_| true)
}
