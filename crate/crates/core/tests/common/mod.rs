#![allow(dead_code)]

use hydrodetect::shape::make_c147;
use hydrodetect::{Complex64, Configuration, ShapeSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn polar(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Complex64 {
    Complex64::from_polar(rng.gen_range(lo..hi), rng.gen_range(0.0..TAU))
}

pub fn in_box(rng: &mut ChaCha8Rng, half: f64) -> Complex64 {
    c(rng.gen_range(-half..half), rng.gen_range(-half..half))
}

/// Tail of length 1..=6 scaled so that `Σ k|c₋ₖ| ≤ 0.6|c₁|`: positive area
/// and a univalent map.
pub fn random_shape(rng: &mut ChaCha8Rng) -> ShapeSpec {
    let c1 = polar(rng, 0.8, 1.5);
    let len = rng.gen_range(1..=6);
    let mut tail: Vec<Complex64> = (0..len).map(|_| polar(rng, 0.1, 1.0)).collect();
    let weight: f64 = tail.iter().enumerate().map(|(j, v)| (j + 1) as f64 * v.norm()).sum();
    let s = rng.gen_range(0.2..0.6) * c1.norm() / weight;
    tail.iter_mut().for_each(|v| *v *= s);
    ShapeSpec::new(c1, tail).unwrap()
}

/// Only `c₁`, `c₋₃`, `c₋₇` nonzero: fourfold symmetric.
pub fn random_quarter(rng: &mut ChaCha8Rng) -> ShapeSpec {
    let c1 = polar(rng, 0.8, 1.5);
    let mut tail = vec![c(0.0, 0.0); 7];
    tail[2] = polar(rng, 0.05, 0.12) * c1.norm();
    tail[6] = polar(rng, 0.01, 0.04) * c1.norm();
    ShapeSpec::new(c1, tail).unwrap()
}

pub fn random_c147(rng: &mut ChaCha8Rng) -> ShapeSpec {
    let c1 = polar(rng, 0.8, 1.5);
    make_c147(c1, polar(rng, 0.05, 0.12) * c1.norm(), polar(rng, 0.01, 0.05) * c1.norm()).unwrap()
}

pub fn random_config(rng: &mut ChaCha8Rng) -> Configuration {
    Configuration::new(
        rng.gen_range(0.0..TAU),
        in_box(rng, 1.0),
        rng.gen_range(0.3..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 },
        polar(rng, 0.3, 1.5),
    )
}

/// One pass/fail line per check with the measured value and the pinned bound.
pub fn report(id: &str, what: &str, measured: f64, bound: f64) -> bool {
    let ok = measured <= bound;
    println!(
        "[{id}] {} {what}: measured {measured:.3e}, bound {bound:.1e}",
        if ok { "PASS" } else { "FAIL" }
    );
    ok
}

pub fn report_flag(id: &str, what: &str, ok: bool) -> bool {
    println!("[{id}] {} {what}", if ok { "PASS" } else { "FAIL" });
    ok
}
