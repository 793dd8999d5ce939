//! Plain Rust versions of the exported functions, usable off the browser.

use finehull::finefun::{eval_sqrt_sum, SqrtBranchSumFn};
use finehull::geometry::{CircArc, Disk, Obstacle, Segment};
use finehull::harmonic::{hm_disk_arc_exact, hm_wos, SlitDomain, Target, WoSConfig};
use finehull::{CPoint, Error, Result};

/// Exact harmonic measure of an arc of the unit disk on an `n × n` grid over
/// `[−1, 1]²`, row-major from the bottom row. Points outside the disk are NaN.
pub fn hm_field(arc_mid: f64, arc_sweep: f64, n: usize) -> Result<Vec<f64>> {
    if !(2..=1024).contains(&n) {
        return Err(Error::Parameter("grid size must lie in [2, 1024]".into()));
    }
    let disk = Disk::new(CPoint::new(0.0, 0.0), 1.0)?;
    let arc = CircArc::centered(disk.center, 1.0, arc_mid, arc_sweep)?;
    let h = 2.0 / (n - 1) as f64;
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let z = CPoint::new(-1.0 + i as f64 * h, -1.0 + j as f64 * h);
            out.push(if disk.contains(z) { hm_disk_arc_exact(&disk, &arc, z)? } else { f64::NAN });
        }
    }
    Ok(out)
}

/// Walk-on-spheres estimate of the measure of the arc in the unit disk slit
/// along `[a, b]`, seen from `z`. Returns `[estimate, std_error, unslit exact]`.
#[allow(clippy::too_many_arguments)]
pub fn wos_slit(
    ax: f64,
    ay: f64,
    bx: f64,
    by: f64,
    arc_mid: f64,
    arc_sweep: f64,
    zx: f64,
    zy: f64,
    samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let disk = Disk::new(CPoint::new(0.0, 0.0), 1.0)?;
    let arc = CircArc::centered(disk.center, 1.0, arc_mid, arc_sweep)?;
    let seg = Segment::new(CPoint::new(ax, ay), CPoint::new(bx, by))?;
    let z = CPoint::new(zx, zy);
    let dom = SlitDomain::new(disk, vec![Obstacle::Segment(seg)], "demo")?;
    let est = hm_wos(&dom, &Target::Arc { arc }, z, &WoSConfig::new(samples, seed))?;
    let exact = hm_disk_arc_exact(&disk, &arc, z)?;
    Ok(vec![est.value, est.std_error, exact])
}

/// A fixed three-term square-root sum outside the unit disk.
fn demo_sum() -> SqrtBranchSumFn {
    SqrtBranchSumFn::new(
        vec![
            (CPoint::new(1.4, 0.2), CPoint::new(2.2, 0.9)),
            (CPoint::new(-1.3, 0.7), CPoint::new(-2.1, 1.3)),
            (CPoint::new(0.3, -1.5), CPoint::new(-0.2, -2.3)),
        ],
        vec![CPoint::new(1.0, 0.0), CPoint::new(0.6, 0.2), CPoint::new(0.35, -0.1)],
    )
    .expect("demo segments are valid")
}

/// Segment endpoints of the demo sum as `[ax, ay, bx, by, ...]`.
pub fn sheet_segments() -> Vec<f64> {
    demo_sum().segments.iter().flat_map(|(a, b)| [a.re, a.im, b.re, b.im]).collect()
}

/// Phase of the demo sum on the sheet whose flipped terms are the set bits of
/// `mask`, on an `n × n` grid over `[−extent, extent]²`. Cut points are NaN.
pub fn sheet_phase(mask: u32, n: usize, extent: f64) -> Result<Vec<f64>> {
    if !(2..=1024).contains(&n) || !(extent > 0.0) {
        return Err(Error::Parameter("need a grid size in [2, 1024] and a positive extent".into()));
    }
    let mut f = demo_sum();
    for k in 0..f.segments.len() {
        if mask >> k & 1 == 1 {
            f = f.flipped(k);
        }
    }
    let h = 2.0 * extent / (n - 1) as f64;
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let z = CPoint::new(-extent + i as f64 * h, -extent + j as f64 * h);
            out.push(eval_sqrt_sum(&f, z).map_or(f64::NAN, |w| w.arg()));
        }
    }
    Ok(out)
}
