//! Deterministic point clouds and per-sample random streams.

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};

use crate::geometry::{CPoint, Disk};

/// Random stream for one Monte Carlo sample, keyed by `(seed, index)`.
///
/// ChaCha is counter based, so each index selects an independent stream and
/// results do not depend on how samples are scheduled across threads.
pub struct StreamRng(ChaCha8Rng);

impl StreamRng {
    pub fn new(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        Self(rng)
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn angle(&mut self) -> f64 {
        TAU * self.uniform()
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }
}

const GOLDEN_ANGLE: f64 = PI * (3.0 - 2.236_067_977_499_79);

/// `n` sunflower points filling the closed disk, center included first.
pub fn sunflower(disk: &Disk, n: usize) -> Vec<CPoint> {
    (0..n)
        .map(|k| {
            let r = disk.radius * (k as f64 / n.max(1) as f64).sqrt();
            disk.center + Complex64::from_polar(r, k as f64 * GOLDEN_ANGLE)
        })
        .collect()
}

/// `n` equally spaced points on `∂D(center, radius)`.
pub fn circle_points(center: CPoint, radius: f64, n: usize) -> Vec<CPoint> {
    (0..n)
        .map(|k| center + Complex64::from_polar(radius, TAU * k as f64 / n as f64))
        .collect()
}

/// Van der Corput radical inverse in the given base.
pub fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
        if f < 1e-300 {
            inv = 0.0;
            f = inv;
        }
    }
    r
}

/// Halton point in the unit square.
pub fn halton2(i: u64) -> (f64, f64) {
    (radical_inverse(i + 1, 2), radical_inverse(i + 1, 3))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<f64> = (0..4).map(|_| 0.0).scan(StreamRng::new(7, 3), |r, _| Some(r.uniform())).collect();
        let b: Vec<f64> = (0..4).map(|_| 0.0).scan(StreamRng::new(7, 3), |r, _| Some(r.uniform())).collect();
        let c: Vec<f64> = (0..4).map(|_| 0.0).scan(StreamRng::new(7, 4), |r, _| Some(r.uniform())).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.iter().all(|x| (0.0..1.0).contains(x)));
    }

    #[test]
    fn sunflower_stays_in_disk() {
        let d = Disk::new(CPoint::new(1.0, -2.0), 0.5).unwrap();
        let pts = sunflower(&d, 500);
        assert_eq!(pts[0], d.center);
        assert!(pts.iter().all(|p| d.contains_closed(*p)));
    }

    #[test]
    fn halton_first_points() {
        assert_eq!(halton2(0), (0.5, 1.0 / 3.0));
        assert_eq!(halton2(1), (0.25, 2.0 / 3.0));
    }
}
