//! Cauchy transforms `−(1/π)∬ g(ξ) dm₂(ξ)/(ξ − z)` of cell-sampled densities on a disk union.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{domain, geometry, Error, Result};
use crate::geometry::{check_finite, CPoint, Contour, DiskUnion, QuadratureOptions};
use crate::par;

/// Density on the support; zero outside.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Density {
    Constant { value: Complex64 },
    /// `amplitude · (1 − |ξ − c|²/r²)` on each disk `D(c, r)` of the support.
    Bump { amplitude: Complex64 },
}

impl Density {
    fn at(&self, disk: &crate::geometry::Disk, xi: CPoint) -> Complex64 {
        match *self {
            Density::Constant { value } => value,
            Density::Bump { amplitude } => {
                let t = (xi - disk.center).norm_sqr() / (disk.radius * disk.radius);
                amplitude * (1.0 - t).max(0.0)
            }
        }
    }

    fn sup(&self) -> f64 {
        match *self {
            Density::Constant { value } => value.norm(),
            Density::Bump { amplitude } => amplitude.norm(),
        }
    }
}

/// One grid cell: the density is integrated as a constant over the disk
/// of equal area centered at `center`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub center: CPoint,
    pub side: f64,
    /// `∬_cell g dm₂`, with partial cells weighted by their covered fraction.
    pub mass: Complex64,
    /// Index of the support disk the cell was cut from.
    pub source: usize,
}

impl Cell {
    fn disk_radius(&self) -> f64 {
        self.side / PI.sqrt()
    }

    /// Mean of `1/(ξ − z)` over the equal-area disk.
    fn kernel(&self, z: CPoint) -> Complex64 {
        let s = self.disk_radius();
        let d = z - self.center;
        if d.norm() >= s {
            1.0 / (self.center - z)
        } else {
            -d.conj() / (s * s)
        }
    }
}

const SUPERSAMPLE: usize = 8;
const CHUNK: usize = 8192;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchyTransformFn {
    pub support: DiskUnion,
    pub density: Density,
    /// Cells across the diameter of each support disk.
    pub grid_resolution: usize,
    cells: Vec<Cell>,
}

impl CauchyTransformFn {
    pub fn new(support: DiskUnion, density: Density, grid_resolution: usize) -> Result<Self> {
        if grid_resolution < 2 {
            return Err(Error::Parameter("grid resolution must be at least 2".into()));
        }
        let support = DiskUnion::disjoint(support.disks)?;
        let mut cells = Vec::new();
        for (source, disk) in support.disks.iter().enumerate() {
            check_finite(disk.center, "support center")?;
            let n = grid_resolution;
            let h = 2.0 * disk.radius / n as f64;
            let half_diag = h * std::f64::consts::FRAC_1_SQRT_2;
            for i in 0..n {
                for j in 0..n {
                    let c = disk.center
                        + Complex64::new((i as f64 + 0.5 - n as f64 / 2.0) * h, (j as f64 + 0.5 - n as f64 / 2.0) * h);
                    let dist = (c - disk.center).norm();
                    let mass = if dist + half_diag <= disk.radius {
                        density.at(disk, c) * (h * h)
                    } else if dist - half_diag >= disk.radius {
                        continue;
                    } else {
                        let m = SUPERSAMPLE;
                        let sub = h / m as f64;
                        let mut acc = Complex64::new(0.0, 0.0);
                        for a in 0..m {
                            for b in 0..m {
                                let x = c + Complex64::new(
                                    (a as f64 + 0.5) * sub - h / 2.0,
                                    (b as f64 + 0.5) * sub - h / 2.0,
                                );
                                if disk.contains(x) {
                                    acc += density.at(disk, x);
                                }
                            }
                        }
                        acc * (sub * sub)
                    };
                    if mass != Complex64::new(0.0, 0.0) {
                        cells.push(Cell { center: c, side: h, mass, source });
                    }
                }
            }
        }
        Ok(Self { support, density, grid_resolution, cells })
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn sup_density(&self) -> f64 {
        self.density.sup()
    }

    /// True for a real, nonnegative, not identically zero density.
    pub fn is_nonnegative(&self) -> bool {
        let v = match self.density {
            Density::Constant { value } => value,
            Density::Bump { amplitude } => amplitude,
        };
        v.im == 0.0 && v.re > 0.0 && !self.support.is_empty()
    }

    pub fn total_mass(&self) -> Complex64 {
        self.cells.iter().map(|c| c.mass).sum()
    }

    /// The same density at twice the resolution.
    pub fn refined(&self) -> Result<Self> {
        Self::new(self.support.clone(), self.density, 2 * self.grid_resolution)
    }

    fn sum_cells<F>(&self, keep: F, z: CPoint) -> Complex64
    where
        F: Fn(&Cell) -> bool + Sync,
    {
        let chunks = self.cells.len().div_ceil(CHUNK);
        let parts = par::map_indexed(chunks, |k| {
            let lo = k * CHUNK;
            let hi = (lo + CHUNK).min(self.cells.len());
            self.cells[lo..hi]
                .iter()
                .filter(|c| keep(c))
                .map(|c| c.mass * c.kernel(z))
                .sum::<Complex64>()
        });
        parts.into_iter().sum::<Complex64>() * (-1.0 / PI)
    }
}

pub fn eval_cauchy_transform(f: &CauchyTransformFn, z: CPoint) -> Complex64 {
    f.sum_cells(|_| true, z)
}

/// `|𝒻_N(z) − 𝒻_{2N}(z)|`, the resolution-doubling error estimate.
pub fn cauchy_resolution_error(f: &CauchyTransformFn, z: CPoint) -> Result<f64> {
    let fine = f.refined()?;
    Ok((eval_cauchy_transform(&fine, z) - eval_cauchy_transform(f, z)).norm())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialValue {
    pub value: Complex64,
    /// Bound on `|value − 𝒻(z)|` from the omitted cells.
    pub bound: f64,
}

/// The transform restricted to the stage compact: cells whose support disk
/// lies in the stage, or whose centers do.
pub fn cauchy_partial(f: &CauchyTransformFn, stage: &DiskUnion, z: CPoint) -> Result<PartialValue> {
    check_finite(z, "evaluation point")?;
    if stage.contains_closed(z) {
        return domain(format!("{z} lies in the stage compact"));
    }
    let whole: Vec<bool> = f
        .support
        .disks
        .iter()
        .map(|d| stage.disks.iter().any(|s| (s.center - d.center).norm() + d.radius <= s.radius))
        .collect();
    let inside = |c: &Cell| whole[c.source] || stage.contains_closed(c.center);
    let value = f.sum_cells(inside, z);
    let bound = f
        .cells
        .iter()
        .filter(|c| !inside(c))
        .map(|c| c.mass.norm() / (z - c.center).norm().max(c.disk_radius()))
        .sum::<f64>()
        / PI;
    Ok(PartialValue { value, bound })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum ExtensionVerdict {
    Obstructed,
    NotObstructed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonextendibilityReport {
    pub contour_value: Complex64,
    pub contour_error: f64,
    /// `2i · ∬_{U ∩ D(p,ρ)} g dm₂`.
    pub area_value: Complex64,
    pub verdict: ExtensionVerdict,
}

/// Relative agreement required between the contour and area values.
pub const AGREEMENT_TOLERANCE: f64 = 0.05;

/// Compares `∮_{|z−p|=ρ} 𝒻 dz` with `2i·∬_{U∩D(p,ρ)} g`; a nonzero common
/// value witnesses that `𝒻` has no analytic extension across the disk.
pub fn nonextendibility_test(f: &CauchyTransformFn, p: CPoint, rho: f64) -> Result<NonextendibilityReport> {
    check_finite(p, "circle center")?;
    if !(rho > 0.0) {
        return Err(Error::Parameter("circle radius must be positive".into()));
    }
    if !f.support.circle_avoids(p, rho) {
        return geometry("the circle meets the support");
    }
    let contour = Contour::circle(p, rho)?.with_options(QuadratureOptions {
        nodes: 16,
        initial_panels: 8,
        abs_tol: 1e-13,
        rel_tol: 1e-11,
        max_depth: 20,
    })?;
    let ci = crate::geometry::contour_integral(&contour, |z| eval_cauchy_transform(f, z))?;
    let inner: Complex64 = f.cells.iter().filter(|c| (c.center - p).norm() < rho).map(|c| c.mass).sum();
    let area_value = Complex64::new(0.0, 2.0) * inner;
    let diff = (ci.value - area_value).norm();
    let agree = diff <= AGREEMENT_TOLERANCE * area_value.norm() + ci.error;
    let nonzero = area_value.norm() > 10.0 * ci.error + 1e-14;
    let verdict = if agree && nonzero { ExtensionVerdict::Obstructed } else { ExtensionVerdict::NotObstructed };
    Ok(NonextendibilityReport { contour_value: ci.value, contour_error: ci.error, area_value, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Disk;

    fn c(re: f64, im: f64) -> CPoint {
        CPoint::new(re, im)
    }

    fn unit(res: usize) -> CauchyTransformFn {
        let u = DiskUnion::new(vec![Disk { center: c(0.0, 0.0), radius: 1.0 }]);
        CauchyTransformFn::new(u, Density::Constant { value: c(1.0, 0.0) }, res).unwrap()
    }

    #[test]
    fn unit_disk_outside_and_inside() {
        let f = unit(256);
        assert!((f.total_mass().re - PI).abs() < 1e-3);
        let out = eval_cauchy_transform(&f, c(2.0, 0.0));
        assert!((out - c(0.5, 0.0)).norm() < 1e-4, "{out}");
        let inn = eval_cauchy_transform(&f, c(0.0, 0.3));
        assert!((inn - c(0.0, -0.3)).norm() < 1e-3, "{inn}");
        // the 4× resolution oracle agrees
        let fine = unit(1024);
        assert!((eval_cauchy_transform(&fine, c(0.0, 0.3)) - c(0.0, -0.3)).norm() < 3e-4);
        assert!(cauchy_resolution_error(&f, c(2.0, 0.0)).unwrap() < 1e-4);
    }

    #[test]
    fn zero_density_is_zero() {
        let u = DiskUnion::new(vec![Disk { center: c(2.0, 0.0), radius: 0.5 }]);
        let f = CauchyTransformFn::new(u, Density::Constant { value: c(0.0, 0.0) }, 32).unwrap();
        assert_eq!(eval_cauchy_transform(&f, c(2.0, 0.1)), c(0.0, 0.0));
        let r = nonextendibility_test(&f, c(2.0, 0.0), 1.0).unwrap();
        assert_eq!(r.verdict, ExtensionVerdict::NotObstructed);
        assert_eq!(r.contour_value, c(0.0, 0.0));
    }

    #[test]
    fn partial_stages() {
        let u = DiskUnion::new(vec![
            Disk { center: c(2.0, 0.0), radius: 0.3 },
            Disk { center: c(0.0, 2.0), radius: 0.2 },
        ]);
        let f = CauchyTransformFn::new(u.clone(), Density::Bump { amplitude: c(1.0, 0.5) }, 64).unwrap();
        let z = c(-0.5, 0.2);
        let full = cauchy_partial(&f, &u, z).unwrap();
        assert_eq!(full.value, eval_cauchy_transform(&f, z));
        assert_eq!(full.bound, 0.0);
        let empty = cauchy_partial(&f, &DiskUnion::default(), z).unwrap();
        assert_eq!(empty.value, c(0.0, 0.0));
        let half = DiskUnion::new(vec![u.disks[0]]);
        let h = cauchy_partial(&f, &half, z).unwrap();
        let gap = (h.value - eval_cauchy_transform(&f, z)).norm();
        assert!(gap > 0.0 && gap <= h.bound, "{gap} {}", h.bound);
        assert!(matches!(cauchy_partial(&f, &half, c(2.0, 0.1)), Err(Error::Domain(_))));
    }

    #[test]
    fn residue_case_is_exact() {
        let (a, r) = (c(3.0, 0.5), 0.2);
        let u = DiskUnion::new(vec![Disk { center: a, radius: r }]);
        let f = CauchyTransformFn::new(u, Density::Constant { value: c(1.0, 0.0) }, 128).unwrap();
        let rep = nonextendibility_test(&f, c(3.0, 0.0), 1.0).unwrap();
        let exact = c(0.0, 2.0 * PI * r * r);
        assert!((rep.contour_value - exact).norm() < 1e-3 * exact.norm());
        assert!((rep.area_value - exact).norm() < 1e-3 * exact.norm());
        assert_eq!(rep.verdict, ExtensionVerdict::Obstructed);
        assert!(matches!(nonextendibility_test(&f, c(3.0, 0.0), 0.5), Err(Error::Geometry(_))));
    }

    #[test]
    fn dbar_recovers_density() {
        let disk = Disk { center: c(2.0, 0.0), radius: 0.5 };
        let f = CauchyTransformFn::new(DiskUnion::new(vec![disk]), Density::Bump { amplitude: c(2.0, 1.0) }, 64).unwrap();
        let dbar = |z: CPoint, d: f64| {
            let fx = (eval_cauchy_transform(&f, z + d) - eval_cauchy_transform(&f, z - d)) / (2.0 * d);
            let fy = (eval_cauchy_transform(&f, z + c(0.0, d)) - eval_cauchy_transform(&f, z - c(0.0, d))) / (2.0 * d);
            0.5 * (fx + Complex64::i() * fy)
        };
        let h = 1.0 / 64.0;
        for cell in f.cells().iter().step_by(97) {
            let g = cell.mass / (h * h);
            if g.norm() < 0.2 {
                continue;
            }
            let est = dbar(cell.center, h / 4.0);
            assert!((est - g).norm() <= 0.1 * g.norm(), "{est} {g}");
        }
        for z in [c(2.0, 0.7), c(1.2, -0.3), c(2.6, 0.5)] {
            assert!(dbar(z, 1e-3).norm() <= 1e-3 * f.sup_density());
        }
    }
}
