//! Finely analytic test functions and their analytic approximants.

mod borel;
mod cauchy;
mod saw;
mod sqrt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use borel::{borel_tail_bound, eval_borel, BorelSeriesFn, BorelTerm};
pub use cauchy::{
    cauchy_partial, cauchy_resolution_error, eval_cauchy_transform, nonextendibility_test, CauchyTransformFn, Cell,
    Density, ExtensionVerdict, NonextendibilityReport, PartialValue, AGREEMENT_TOLERANCE,
};
pub use saw::{
    hoelder_constant, hoelder_tail_estimate, hoelder_tail_measured, saw_cauchy_decomposition, symmetric_arc_integral,
    SawDecomposition, SawGeometry,
};
pub use sqrt::{eval_sqrt_branch, eval_sqrt_sum, SqrtBranchSumFn};

use crate::error::{Error, Result};
use crate::geometry::{CPoint, DiskUnion};

/// One of the function families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FineFunction {
    Borel(BorelSeriesFn),
    Cauchy(CauchyTransformFn),
    SqrtSum(SqrtBranchSumFn),
    /// Entire: `Σ coeffs[k]·zᵏ`.
    Polynomial { coeffs: Vec<Complex64> },
}

impl FineFunction {
    pub fn eval(&self, z: CPoint) -> Result<Complex64> {
        match self {
            FineFunction::Borel(f) => eval_borel(f, z),
            FineFunction::Cauchy(f) => Ok(eval_cauchy_transform(f, z)),
            FineFunction::SqrtSum(f) => eval_sqrt_sum(f, z),
            FineFunction::Polynomial { coeffs } => {
                Ok(coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a))
            }
        }
    }
}

/// Analytic functions `Fₙ`, each analytic off an excluded compact `Kₙ`,
/// approximating a limit with `sup|Fₙ| ≤ C` on the sampled set.
pub trait ApproximantSeq: Sync {
    fn stages(&self) -> usize;

    /// `Fₙ(z)`; a domain error when `z ∈ Kₙ`.
    fn eval_stage(&self, n: usize, z: CPoint) -> Result<Complex64>;

    fn eval_limit(&self, z: CPoint) -> Result<Complex64>;

    fn uniform_bound(&self) -> f64;

    /// A certified bound on `|Fₙ(z) − limit(z)|`, when one is known.
    fn gap_bound(&self, _n: usize, _z: CPoint) -> Option<f64> {
        None
    }
}

/// Partial sums of a Borel series; stage `n` keeps `n + 1` terms.
pub struct BorelPartials<'a>(pub &'a BorelSeriesFn);

impl ApproximantSeq for BorelPartials<'_> {
    fn stages(&self) -> usize {
        self.0.len()
    }

    fn eval_stage(&self, n: usize, z: CPoint) -> Result<Complex64> {
        self.0.partial(n + 1, z)
    }

    fn eval_limit(&self, z: CPoint) -> Result<Complex64> {
        eval_borel(self.0, z)
    }

    fn uniform_bound(&self) -> f64 {
        (1..=self.0.len()).map(|k| 1.0 / (k as f64 * k as f64)).sum()
    }

    fn gap_bound(&self, n: usize, _z: CPoint) -> Option<f64> {
        Some(borel_tail_bound(self.0, n + 1))
    }
}

/// Cauchy transforms restricted to growing stage compacts, on points at
/// distance at least `separation` from the support.
pub struct CauchyPartials<'a> {
    pub f: &'a CauchyTransformFn,
    pub stages: Vec<DiskUnion>,
    pub separation: f64,
}

impl CauchyPartials<'_> {
    fn check(&self, z: CPoint) -> Result<()> {
        if self.f.support.distance(z) < self.separation {
            return Err(Error::Precondition(format!("{z} is closer than the separation to the support")));
        }
        Ok(())
    }
}

impl ApproximantSeq for CauchyPartials<'_> {
    fn stages(&self) -> usize {
        self.stages.len()
    }

    fn eval_stage(&self, n: usize, z: CPoint) -> Result<Complex64> {
        self.check(z)?;
        Ok(cauchy_partial(self.f, &self.stages[n], z)?.value)
    }

    fn eval_limit(&self, z: CPoint) -> Result<Complex64> {
        self.check(z)?;
        Ok(eval_cauchy_transform(self.f, z))
    }

    fn uniform_bound(&self) -> f64 {
        let sep = self.separation;
        self.f.cells().iter().map(|c| c.mass.norm() / (sep - c.side).max(c.side / std::f64::consts::PI.sqrt())).sum::<f64>()
            / std::f64::consts::PI
    }

    fn gap_bound(&self, n: usize, z: CPoint) -> Option<f64> {
        cauchy_partial(self.f, &self.stages[n], z).ok().map(|p| p.bound)
    }
}

/// Partial sums of a square-root sum on `|z| ≤ radius`; stage `n` keeps `n + 1` terms.
pub struct SqrtPartials<'a> {
    pub f: &'a SqrtBranchSumFn,
    pub radius: f64,
}

impl SqrtPartials<'_> {
    fn term_bound(&self, k: usize) -> f64 {
        let (a, b) = self.f.segments[k];
        self.f.coeffs[k].norm() * ((self.radius + a.norm()) * (self.radius + b.norm())).sqrt()
    }

    fn check(&self, z: CPoint) -> Result<()> {
        if z.norm() > self.radius {
            return Err(Error::Precondition(format!("{z} lies outside the sampled disk")));
        }
        Ok(())
    }
}

impl ApproximantSeq for SqrtPartials<'_> {
    fn stages(&self) -> usize {
        self.f.segments.len()
    }

    fn eval_stage(&self, n: usize, z: CPoint) -> Result<Complex64> {
        self.check(z)?;
        self.f.partial(n + 1, z)
    }

    fn eval_limit(&self, z: CPoint) -> Result<Complex64> {
        self.check(z)?;
        eval_sqrt_sum(self.f, z)
    }

    fn uniform_bound(&self) -> f64 {
        (0..self.f.segments.len()).map(|k| self.term_bound(k)).sum()
    }

    fn gap_bound(&self, n: usize, _z: CPoint) -> Option<f64> {
        Some((n + 1..self.f.segments.len()).map(|k| self.term_bound(k)).sum())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub stage: usize,
    pub sup_gap: f64,
    pub sup_abs: f64,
    /// Largest certified gap bound over the samples, if the sequence has one.
    pub bound: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub rows: Vec<GapRow>,
    pub uniform_bound: f64,
    pub bounded: bool,
    pub within_bounds: bool,
    pub pass: bool,
}

/// Sup-norm gaps `sup_V |Fₙ − limit|` for the first `stages` stages.
/// Passes when the last gap is at most `tolerance`, every `sup|Fₙ| ≤ C` and
/// every gap respects the certified bound.
pub fn uniform_convergence_check(
    seq: &dyn ApproximantSeq,
    samples: &[CPoint],
    stages: usize,
    tolerance: f64,
) -> Result<ConvergenceTable> {
    let stages = stages.min(seq.stages());
    let limits = samples.iter().map(|&z| seq.eval_limit(z)).collect::<Result<Vec<_>>>()?;
    let c = seq.uniform_bound();
    let mut rows = Vec::with_capacity(stages);
    for n in 0..stages {
        let per = crate::par::map_indexed(samples.len(), |i| -> Result<(f64, f64, Option<f64>)> {
            let v = seq.eval_stage(n, samples[i])?;
            Ok(((v - limits[i]).norm(), v.norm(), seq.gap_bound(n, samples[i])))
        });
        let mut row = GapRow { stage: n, sup_gap: 0.0, sup_abs: 0.0, bound: None };
        for r in per {
            let (gap, abs, bound) = r?;
            row.sup_gap = row.sup_gap.max(gap);
            row.sup_abs = row.sup_abs.max(abs);
            if let Some(b) = bound {
                row.bound = Some(row.bound.map_or(b, |x: f64| x.max(b)));
            }
        }
        rows.push(row);
    }
    // per-point bounds: a gap may only exceed another point's bound
    let mut within_bounds = true;
    for n in 0..stages {
        for (i, &z) in samples.iter().enumerate() {
            if let Some(b) = seq.gap_bound(n, z) {
                let gap = (seq.eval_stage(n, z)? - limits[i]).norm();
                if gap > b * (1.0 + 1e-12) + 1e-15 {
                    within_bounds = false;
                }
            }
        }
    }
    let bounded = rows.iter().all(|r| r.sup_abs <= c * (1.0 + 1e-12));
    let converged = rows.last().is_none_or(|r| r.sup_gap <= tolerance);
    Ok(ConvergenceTable { pass: converged && bounded && within_bounds, rows, uniform_bound: c, bounded, within_bounds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Disk;
    use crate::sampling::sunflower;

    struct Constant;

    impl ApproximantSeq for Constant {
        fn stages(&self) -> usize {
            5
        }
        fn eval_stage(&self, _n: usize, _z: CPoint) -> Result<Complex64> {
            Ok(Complex64::new(2.0, -1.0))
        }
        fn eval_limit(&self, _z: CPoint) -> Result<Complex64> {
            Ok(Complex64::new(2.0, -1.0))
        }
        fn uniform_bound(&self) -> f64 {
            3.0
        }
    }

    fn c(re: f64, im: f64) -> CPoint {
        CPoint::new(re, im)
    }

    #[test]
    fn constant_sequence_has_zero_gaps() {
        let t = uniform_convergence_check(&Constant, &[c(0.0, 0.0), c(0.5, 0.1)], 5, 0.0).unwrap();
        assert!(t.rows.iter().all(|r| r.sup_gap == 0.0));
        assert!(t.pass);
    }

    #[test]
    fn borel_partials_converge() {
        let disks: Vec<Disk> = (1..=100)
            .map(|n| Disk { center: CPoint::from_polar(1.0 + 1.5 / n as f64, 2.0 / n as f64), radius: 0.1 / (n * n) as f64 })
            .collect();
        let f = BorelSeriesFn::on_disks(&disks).unwrap();
        let v: Vec<CPoint> = sunflower(&Disk { center: c(0.0, 0.0), radius: 1.0 }, 200);
        let t = uniform_convergence_check(&BorelPartials(&f), &v, 100, 1e-12).unwrap();
        assert!(t.pass && t.within_bounds && t.bounded);
        assert!(t.rows[49].sup_gap <= borel_tail_bound(&f, 50));
        assert!(t.rows[49].sup_gap < 0.02);
    }

    #[test]
    fn cauchy_partials_within_bounds() {
        let disks: Vec<Disk> = (0..6)
            .map(|k| Disk { center: CPoint::from_polar(1.3 + 0.05 * k as f64, 0.5 * k as f64), radius: 0.08 })
            .collect();
        let u = DiskUnion::new(disks.clone());
        let f = CauchyTransformFn::new(u, Density::Bump { amplitude: c(1.0, 0.0) }, 32).unwrap();
        let stages: Vec<DiskUnion> = (1..=6).map(|k| DiskUnion::new(disks[..k].to_vec())).collect();
        let seq = CauchyPartials { f: &f, stages, separation: 0.1 };
        let v = sunflower(&Disk { center: c(0.0, 0.0), radius: 1.0 }, 100);
        let t = uniform_convergence_check(&seq, &v, 6, 1e-14).unwrap();
        assert!(t.pass, "{t:?}");
        assert!(t.rows[0].sup_gap > 0.0);
        assert_eq!(t.rows[5].sup_gap, 0.0);
    }

    #[test]
    fn sqrt_partials_within_bounds() {
        let f = SqrtBranchSumFn::new(
            (0..5).map(|k| {
                let d = CPoint::from_polar(1.0, 1.2 * k as f64);
                (d * 1.5, d * 1.8)
            }).collect(),
            (0..5).map(|k| c(0.5f64.powi(k), 0.0)).collect(),
        )
        .unwrap();
        let v = sunflower(&Disk { center: c(0.0, 0.0), radius: 1.0 }, 100);
        let t = uniform_convergence_check(&SqrtPartials { f: &f, radius: 1.0 }, &v, 5, 0.0).unwrap();
        assert!(t.pass && t.within_bounds);
        assert!(matches!(
            uniform_convergence_check(&SqrtPartials { f: &f, radius: 0.5 }, &v, 5, 0.0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn evaluation_is_pure() {
        let f = FineFunction::SqrtSum(SqrtBranchSumFn::new(vec![(c(2.0, 0.0), c(3.0, 1.0))], vec![c(0.3, 0.2)]).unwrap());
        let z = c(0.1, 0.7);
        assert_eq!(f.eval(z).unwrap().re.to_bits(), f.eval(z).unwrap().re.to_bits());
    }
}
