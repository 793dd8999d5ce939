//! Sums `Σ ±cₙ √((z − aₙ)(z − bₙ))` with the branch `≈ z` at infinity.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{geometry, Error, Result};
use crate::geometry::{check_finite, segment_distance, segment_segment_distance, CPoint};

/// The branch of `√((z − a)(z − b))` with its cut on `[a, b]` and `w − z → −(a+b)/2` at infinity.
///
/// Both factors are evaluated in coordinates where the segment is `[0, L]`
/// on the positive real axis; their principal cuts then cancel left of `0`.
pub fn eval_sqrt_branch(a: CPoint, b: CPoint, z: CPoint) -> Result<Complex64> {
    check_finite(z, "evaluation point")?;
    let len = (b - a).norm();
    if !(len > 0.0) {
        return Err(Error::Parameter("branch points must differ".into()));
    }
    if segment_distance(a, b, z) <= 1e-12 {
        return Err(Error::BranchCut(z));
    }
    let e = (b - a) / len;
    let za = (z - a) * e.conj();
    let zb = za - len;
    Ok(e * za.sqrt() * zb.sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqrtBranchSumFn {
    pub segments: Vec<(CPoint, CPoint)>,
    pub coeffs: Vec<Complex64>,
    pub signs: Vec<i8>,
}

impl SqrtBranchSumFn {
    /// Checks pairwise disjoint segments outside the closed unit disk.
    pub fn new(segments: Vec<(CPoint, CPoint)>, coeffs: Vec<Complex64>) -> Result<Self> {
        let n = segments.len();
        Self::with_signs(segments, coeffs, vec![1; n])
    }

    pub fn with_signs(segments: Vec<(CPoint, CPoint)>, coeffs: Vec<Complex64>, signs: Vec<i8>) -> Result<Self> {
        if coeffs.len() != segments.len() || signs.len() != segments.len() {
            return Err(Error::Parameter("segments, coefficients and signs must have equal length".into()));
        }
        if signs.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::Parameter("signs must be ±1".into()));
        }
        let zero = CPoint::new(0.0, 0.0);
        for (i, &(a, b)) in segments.iter().enumerate() {
            if a == b {
                return Err(Error::Parameter(format!("segment {i} is degenerate")));
            }
            if segment_distance(a, b, zero) <= 1.0 {
                return geometry(format!("segment {i} meets the closed unit disk"));
            }
            for (j, &(c, d)) in segments[..i].iter().enumerate() {
                if segment_segment_distance(a, b, c, d) <= 0.0 {
                    return geometry(format!("segments {j} and {i} meet"));
                }
            }
        }
        Ok(Self { segments, coeffs, signs })
    }

    /// The same sum with sign `n` negated.
    pub fn flipped(&self, n: usize) -> Self {
        let mut out = self.clone();
        out.signs[n] = -out.signs[n];
        out
    }

    /// Distance from `z` to the nearest cut.
    pub fn cut_distance(&self, z: CPoint) -> f64 {
        self.segments.iter().map(|&(a, b)| segment_distance(a, b, z)).fold(f64::INFINITY, f64::min)
    }

    /// Sum of the first `n` terms.
    pub fn partial(&self, n: usize, z: CPoint) -> Result<Complex64> {
        let mut s = Complex64::new(0.0, 0.0);
        for k in 0..n.min(self.segments.len()) {
            let (a, b) = self.segments[k];
            s += self.coeffs[k] * f64::from(self.signs[k]) * eval_sqrt_branch(a, b, z)?;
        }
        Ok(s)
    }
}

pub fn eval_sqrt_sum(f: &SqrtBranchSumFn, z: CPoint) -> Result<Complex64> {
    f.partial(f.segments.len(), z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::StreamRng;

    fn c(re: f64, im: f64) -> CPoint {
        CPoint::new(re, im)
    }

    #[test]
    fn positive_branch_right_of_cut() {
        let w = eval_sqrt_branch(c(-1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)).unwrap();
        assert!((w - c(3.0f64.sqrt(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn normalization_at_infinity() {
        for k in 0..8 {
            let dir = CPoint::from_polar(1.0, 0.3 + k as f64 * 0.8);
            let z = dir * 1e7;
            let w = eval_sqrt_branch(c(-1.0, 0.0), c(1.0, 0.0), z).unwrap();
            assert!((w - z).norm() < 1e-6);
            let (a, b) = (c(2.0, 1.0), c(3.0, -0.5));
            let w = eval_sqrt_branch(a, b, z).unwrap();
            assert!((w - z + (a + b) / 2.0).norm() < 1e-6);
        }
    }

    #[test]
    fn agrees_with_continuation_from_infinity() {
        // continue w from z = 10i down the imaginary axis in small steps
        let (a, b) = (c(-1.0, 0.0), c(1.0, 0.0));
        let mut z = c(0.0, 10.0);
        let mut w = eval_sqrt_branch(a, b, z).unwrap();
        assert!((w - c(0.0, 101.0f64.sqrt())).norm() < 1e-12);
        while z.im > 0.5 + 1e-12 {
            z -= c(0.0, 0.001);
            let sq = ((z - a) * (z - b)).sqrt();
            w = if (sq - w).norm() < (sq + w).norm() { sq } else { -sq };
        }
        let direct = eval_sqrt_branch(a, b, c(0.0, 0.5)).unwrap();
        assert!((direct - w).norm() < 1e-12);
        assert!(direct.im > 0.0);
    }

    #[test]
    fn cut_is_rejected() {
        assert!(matches!(eval_sqrt_branch(c(-1.0, 0.0), c(1.0, 0.0), c(0.3, 0.0)), Err(Error::BranchCut(_))));
        assert!(eval_sqrt_branch(c(-1.0, 0.0), c(1.0, 0.0), c(-1.5, 0.0)).is_ok());
    }

    #[test]
    fn jump_across_the_cut_is_a_sign_flip() {
        let (a, b) = (c(1.5, 0.5), c(2.5, 1.5));
        let e = (b - a) / (b - a).norm();
        let n = e * Complex64::i();
        for t in [0.1, 0.35, 0.5, 0.9] {
            let m = a + (b - a) * t;
            let up = eval_sqrt_branch(a, b, m + n * 1e-9).unwrap();
            let down = eval_sqrt_branch(a, b, m - n * 1e-9).unwrap();
            assert!((up + down).norm() < 1e-6, "{up} {down}");
        }
        // continuous across the extension of the segment beyond a
        let beyond = a - e * 0.3;
        let up = eval_sqrt_branch(a, b, beyond + n * 1e-9).unwrap();
        let down = eval_sqrt_branch(a, b, beyond - n * 1e-9).unwrap();
        assert!((up - down).norm() < 1e-6);
    }

    #[test]
    fn flipping_changes_by_twice_the_term() {
        let f = SqrtBranchSumFn::new(
            vec![(c(2.0, 0.0), c(3.0, 0.0)), (c(0.0, 2.0), c(0.5, 3.0))],
            vec![c(0.5, 0.1), c(-0.2, 0.3)],
        )
        .unwrap();
        let z = c(0.3, -0.4);
        let base = eval_sqrt_sum(&f, z).unwrap();
        let flip = eval_sqrt_sum(&f.flipped(1), z).unwrap();
        let term = f.coeffs[1] * eval_sqrt_branch(f.segments[1].0, f.segments[1].1, z).unwrap();
        assert!((flip - base + 2.0 * term).norm() < 1e-15);
        assert_eq!(eval_sqrt_sum(&f.flipped(1).flipped(1), z).unwrap(), base);
    }

    #[test]
    fn rejects_bad_segments() {
        assert!(SqrtBranchSumFn::new(vec![(c(0.5, 0.0), c(3.0, 0.0))], vec![c(1.0, 0.0)]).is_err());
        assert!(SqrtBranchSumFn::new(
            vec![(c(2.0, -1.0), c(2.0, 1.0)), (c(1.5, 0.0), c(3.0, 0.0))],
            vec![c(1.0, 0.0), c(1.0, 0.0)]
        )
        .is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn square_matches_product(ax in -3.0f64..3.0, ay in -3.0f64..3.0, bx in -3.0f64..3.0, by in -3.0f64..3.0,
                                      zx in -5.0f64..5.0, zy in -5.0f64..5.0) {
                let (a, b, z) = (c(ax, ay), c(bx, by), c(zx, zy));
                prop_assume!((a - b).norm() > 1e-3 && segment_distance(a, b, z) > 1e-6);
                let w = eval_sqrt_branch(a, b, z).unwrap();
                let p = (z - a) * (z - b);
                prop_assert!((w * w - p).norm() <= 1e-10 * p.norm().max(1e-300));
            }

            #[test]
            fn continuity_along_short_steps(seed in 0u64..1000) {
                let mut rng = StreamRng::new(seed, 0);
                let (a, b) = (c(-0.7, 0.2), c(0.9, -0.4));
                let z = c(rng.range(-3.0, 3.0), rng.range(-3.0, 3.0));
                let h = CPoint::from_polar(1e-6, rng.angle());
                prop_assume!(segment_distance(a, b, z) > 1e-3);
                let w0 = eval_sqrt_branch(a, b, z).unwrap();
                let w1 = eval_sqrt_branch(a, b, z + h).unwrap();
                // |w'| = |2z − a − b| / (2|w|)
                let dw = (2.0 * z - a - b).norm() / (2.0 * w0.norm());
                prop_assert!((w1 - w0).norm() <= 2.0 * h.norm() * dw * 1.01 + 1e-13);
            }
        }
    }
}
