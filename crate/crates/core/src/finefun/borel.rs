//! Series `Σ cₙ/(z − aₙ)` with `|cₙ| ≤ ρₙ/n²`, bounded off the disks `D(aₙ, ρₙ)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, geometry, Error, Result};
use crate::geometry::{check_finite, CPoint, Disk, DiskUnion};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BorelTerm {
    pub pole: CPoint,
    pub radius: f64,
    pub coeff: Complex64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BorelSeriesFn {
    terms: Vec<BorelTerm>,
}

impl BorelSeriesFn {
    /// Checks `|aₙ| − ρₙ > 1`, `|cₙ| ≤ ρₙ/n²` and pairwise disjoint closed disks.
    pub fn new(terms: Vec<BorelTerm>) -> Result<Self> {
        for (i, t) in terms.iter().enumerate() {
            let n = (i + 1) as f64;
            check_finite(t.pole, "pole")?;
            check_finite(t.coeff, "coefficient")?;
            if !(t.radius > 0.0) {
                return Err(Error::Parameter(format!("term {} needs a positive radius", i + 1)));
            }
            if t.pole.norm() - t.radius <= 1.0 {
                return geometry(format!("disk of term {} meets the closed unit disk", i + 1));
            }
            if t.coeff.norm() > t.radius / (n * n) * (1.0 + 1e-12) {
                return Err(Error::Parameter(format!("|c_{}| exceeds ρ/n²", i + 1)));
            }
        }
        let disks: Vec<Disk> = terms.iter().map(|t| Disk { center: t.pole, radius: t.radius }).collect();
        DiskUnion::disjoint(disks)?;
        Ok(Self { terms })
    }

    /// Terms on the given disks with the largest admissible coefficients `ρₙ/n²`.
    pub fn on_disks(disks: &[Disk]) -> Result<Self> {
        Self::new(
            disks
                .iter()
                .enumerate()
                .map(|(i, d)| {
                    let n = (i + 1) as f64;
                    BorelTerm { pole: d.center, radius: d.radius, coeff: Complex64::new(d.radius / (n * n), 0.0) }
                })
                .collect(),
        )
    }

    pub fn terms(&self) -> &[BorelTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn disks(&self) -> DiskUnion {
        DiskUnion::new(self.terms.iter().map(|t| Disk { center: t.pole, radius: t.radius }).collect())
    }

    /// Sum of the first `n` terms.
    pub fn partial(&self, n: usize, z: CPoint) -> Result<Complex64> {
        let mut s = Complex64::new(0.0, 0.0);
        for (i, t) in self.terms.iter().take(n).enumerate() {
            if (z - t.pole).norm() < t.radius {
                return domain(format!("{z} lies in the disk of term {}", i + 1));
            }
            s += t.coeff / (z - t.pole);
        }
        Ok(s)
    }
}

pub fn eval_borel(f: &BorelSeriesFn, z: CPoint) -> Result<Complex64> {
    f.partial(f.terms.len(), z)
}

/// `Σ_{N<n≤len} 1/n²`, a sup-norm bound for the tail off the disks.
pub fn borel_tail_bound(f: &BorelSeriesFn, n: usize) -> f64 {
    (n + 1..=f.terms.len()).rev().map(|k| 1.0 / (k as f64 * k as f64)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::sunflower;

    fn c(re: f64, im: f64) -> CPoint {
        CPoint::new(re, im)
    }

    fn hundred_terms() -> BorelSeriesFn {
        let disks: Vec<Disk> = (1..=100)
            .map(|n| {
                let a = CPoint::from_polar(1.0 + 2.0 / n as f64, 0.7 * n as f64);
                Disk { center: a, radius: 0.2 / (n as f64 * n as f64) }
            })
            .collect();
        BorelSeriesFn::on_disks(&disks).unwrap()
    }

    #[test]
    fn one_term() {
        let f = BorelSeriesFn::new(vec![BorelTerm { pole: c(2.0, 0.0), radius: 0.5, coeff: c(0.5, 0.0) }]).unwrap();
        assert_eq!(eval_borel(&f, c(0.0, 0.0)).unwrap(), c(-0.25, 0.0));
        assert!(matches!(eval_borel(&f, c(2.0, 0.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn coefficient_limit_is_enforced() {
        let t = BorelTerm { pole: c(3.0, 0.0), radius: 0.5, coeff: c(0.2, 0.0) };
        assert!(BorelSeriesFn::new(vec![t, t]).is_err());
        let near = BorelTerm { pole: c(1.2, 0.0), radius: 0.5, coeff: c(0.1, 0.0) };
        assert!(BorelSeriesFn::new(vec![near]).is_err());
    }

    #[test]
    fn tail_bounds() {
        let f = hundred_terms();
        assert_eq!(borel_tail_bound(&f, 100), 0.0);
        assert_eq!(borel_tail_bound(&f, 200), 0.0);
        let two = BorelSeriesFn::on_disks(&[Disk { center: c(3.0, 0.0), radius: 0.5 }, Disk { center: c(-3.0, 0.0), radius: 0.5 }]).unwrap();
        assert_eq!(borel_tail_bound(&two, 1), 0.25);
        let gap = (eval_borel(&f, c(0.0, 0.0)).unwrap() - f.partial(50, c(0.0, 0.0)).unwrap()).norm();
        assert!(gap <= borel_tail_bound(&f, 50));
        assert!(borel_tail_bound(&f, 50) < 1.0 / 50.0);
    }

    #[test]
    fn measured_tails_never_exceed_the_bound() {
        let f = hundred_terms();
        let pts: Vec<CPoint> = sunflower(&Disk { center: c(0.0, 0.0), radius: 4.0 }, 1000)
            .into_iter()
            .filter(|z| !f.disks().contains(*z))
            .collect();
        for n in [0, 1, 5, 20, 50, 99] {
            let bound = borel_tail_bound(&f, n);
            for &z in &pts {
                let gap = (eval_borel(&f, z).unwrap() - f.partial(n, z).unwrap()).norm();
                assert!(gap <= bound * (1.0 + 1e-12), "n={n} z={z}");
            }
        }
    }
}
