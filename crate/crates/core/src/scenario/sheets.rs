//! Sheets of a square-root sum: every sign choice within a flip budget.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::finefun::{eval_sqrt_branch, eval_sqrt_sum, SqrtBranchSumFn};
use crate::geometry::{segment_distance, CPoint};
use crate::sampling::StreamRng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sheet {
    pub signs: Vec<i8>,
    /// Indices whose sign differs from the base sheet.
    pub flipped: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SheetAtlas {
    pub base: SqrtBranchSumFn,
    pub sheets: Vec<Sheet>,
    /// `(aₙ, bₙ)`: the two branch points where sheets `s` and `s` flipped at `n` meet.
    pub branch_points: Vec<(CPoint, CPoint)>,
}

impl SheetAtlas {
    pub fn sheet_fn(&self, k: usize) -> SqrtBranchSumFn {
        SqrtBranchSumFn { signs: self.sheets[k].signs.clone(), ..self.base.clone() }
    }

    pub fn eval(&self, k: usize, z: CPoint) -> Result<Complex64> {
        eval_sqrt_sum(&self.sheet_fn(k), z)
    }

    /// Index of the sheet with the given signs.
    pub fn find(&self, signs: &[i8]) -> Option<usize> {
        self.sheets.iter().position(|s| s.signs == signs)
    }
}

fn subsets(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for i in start..n {
        cur.push(i);
        subsets(n, k, i + 1, cur, out);
        cur.pop();
    }
}

/// All sign vectors differing from the base in at most `flips` places,
/// ordered by flip count.
pub fn branched_cover_enumerate(f: &SqrtBranchSumFn, flips: usize) -> Result<SheetAtlas> {
    let n = f.segments.len();
    if flips > n {
        return Err(Error::Parameter(format!("{flips} flips exceed the {n} segments")));
    }
    let mut sheets = Vec::new();
    for k in 0..=flips {
        let mut sets = Vec::new();
        subsets(n, k, 0, &mut Vec::new(), &mut sets);
        for flipped in sets {
            let mut signs = f.signs.clone();
            for &i in &flipped {
                signs[i] = -signs[i];
            }
            sheets.push(Sheet { signs, flipped });
        }
    }
    Ok(SheetAtlas { base: f.clone(), sheets, branch_points: f.segments.clone() })
}

/// Largest relative residual of `(w − Σ_{l≠n} c_l√(…))² = cₙ²(z−aₙ)(z−bₙ)` over `n`.
pub fn sheet_identity_residual(atlas: &SheetAtlas, k: usize, z: CPoint) -> Result<f64> {
    let f = atlas.sheet_fn(k);
    let terms: Vec<Complex64> = (0..f.segments.len())
        .map(|l| {
            let (a, b) = f.segments[l];
            Ok(f.coeffs[l] * f64::from(f.signs[l]) * eval_sqrt_branch(a, b, z)?)
        })
        .collect::<Result<_>>()?;
    let w: Complex64 = terms.iter().sum();
    let mut worst: f64 = 0.0;
    for n in 0..terms.len() {
        let rest: Complex64 = terms.iter().enumerate().filter(|(l, _)| *l != n).map(|(_, t)| t).sum();
        let (a, b) = f.segments[n];
        let rhs = f.coeffs[n] * f.coeffs[n] * (z - a) * (z - b);
        let lhs = (w - rest) * (w - rest);
        if rhs.norm() > 0.0 {
            worst = worst.max((lhs - rhs).norm() / rhs.norm());
        }
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonodromyCheck {
    pub index: usize,
    pub loop_radius: f64,
    pub steps: usize,
    /// `|continued value − value on the sheet flipped at index|` back at the start.
    pub error: f64,
    /// Distance of the continued value from the starting sheet's value.
    pub separation: f64,
    pub pass: bool,
}

const MONODROMY_STEPS: usize = 4000;
pub const MONODROMY_TOLERANCE: f64 = 1e-8;

/// Continues the base sheet in small steps once around a circle enclosing
/// only `aₙ`, choosing at each step the square-root sign nearest the last value.
pub fn monodromy_check(f: &SqrtBranchSumFn, n: usize) -> Result<MonodromyCheck> {
    if n >= f.segments.len() {
        return Err(Error::Parameter(format!("segment {n} does not exist")));
    }
    let (a, b) = f.segments[n];
    let clearance = f
        .segments
        .iter()
        .enumerate()
        .filter(|(l, _)| *l != n)
        .map(|(_, &(c, d))| segment_distance(c, d, a))
        .fold((b - a).norm(), f64::min);
    let radius = 0.3 * clearance;
    // start on the extension of the segment beyond a, away from the cut
    let theta0 = (a - b).arg();
    let z0 = a + Complex64::from_polar(radius, theta0);
    let mut roots: Vec<Complex64> = f
        .segments
        .iter()
        .map(|&(c, d)| eval_sqrt_branch(c, d, z0))
        .collect::<Result<_>>()?;
    for step in 1..=MONODROMY_STEPS {
        let z = a + Complex64::from_polar(radius, theta0 + TAU * step as f64 / MONODROMY_STEPS as f64);
        for (l, &(c, d)) in f.segments.iter().enumerate() {
            let s = ((z - c) * (z - d)).sqrt();
            roots[l] = if (s - roots[l]).norm() <= (s + roots[l]).norm() { s } else { -s };
        }
    }
    let value: Complex64 = (0..roots.len()).map(|l| f.coeffs[l] * f64::from(f.signs[l]) * roots[l]).sum();
    let flipped = eval_sqrt_sum(&f.flipped(n), z0)?;
    let start = eval_sqrt_sum(f, z0)?;
    let error = (value - flipped).norm();
    let separation = (value - start).norm();
    Ok(MonodromyCheck {
        index: n,
        loop_radius: radius,
        steps: MONODROMY_STEPS,
        error,
        separation,
        pass: error <= MONODROMY_TOLERANCE && separation > 0.0,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SheetRow {
    pub sheet: usize,
    pub flipped: Vec<usize>,
    pub points: usize,
    pub max_residual: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SheetStudy {
    pub atlas: SheetAtlas,
    pub rows: Vec<SheetRow>,
    pub monodromy: Vec<MonodromyCheck>,
    pub involution_pass: bool,
    pub pass: bool,
}

pub const SHEET_POINTS: usize = 1000;
pub const SHEET_TOLERANCE: f64 = 1e-10;

/// Random points of the disk holding every segment, at least `10⁻⁶` from the cuts.
pub fn sheet_points(f: &SqrtBranchSumFn, seed: u64, stream: u64, count: usize) -> Vec<CPoint> {
    let reach = f.segments.iter().map(|(a, b)| a.norm().max(b.norm())).fold(1.0, f64::max) + 1.0;
    let mut rng = StreamRng::new(seed, stream);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let z = Complex64::from_polar(reach * rng.uniform().sqrt(), rng.range(-PI, PI));
        if f.cut_distance(z) > 1e-6 {
            out.push(z);
        }
    }
    out
}

/// Sheet identity on random points of each sheet, the two-fold flip
/// involution, and monodromy around each first branch point.
pub fn sheet_study(atlas: &SheetAtlas, seed: u64) -> Result<SheetStudy> {
    let mut rows = Vec::with_capacity(atlas.sheets.len());
    for (k, sheet) in atlas.sheets.iter().enumerate() {
        let pts = sheet_points(&atlas.base, seed, k as u64, SHEET_POINTS);
        let mut worst: f64 = 0.0;
        for &z in &pts {
            worst = worst.max(sheet_identity_residual(atlas, k, z)?);
        }
        rows.push(SheetRow {
            sheet: k,
            flipped: sheet.flipped.clone(),
            points: pts.len(),
            max_residual: worst,
            pass: worst <= SHEET_TOLERANCE,
        });
    }
    let mut involution_pass = true;
    for &z in &sheet_points(&atlas.base, seed, u64::MAX, 64) {
        let base = eval_sqrt_sum(&atlas.base, z)?;
        for n in 0..atlas.base.segments.len() {
            let twice = eval_sqrt_sum(&atlas.base.flipped(n).flipped(n), z)?;
            involution_pass &= twice == base;
        }
    }
    let monodromy = (0..atlas.base.segments.len()).map(|n| monodromy_check(&atlas.base, n)).collect::<Result<Vec<_>>>()?;
    let pass = rows.iter().all(|r| r.pass) && monodromy.iter().all(|m| m.pass) && involution_pass;
    Ok(SheetStudy { atlas: atlas.clone(), rows, monodromy, involution_pass, pass })
}
