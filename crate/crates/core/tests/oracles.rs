//! Independent oracles: a finite-difference Dirichlet solve for walk-on-spheres
//! in a slit disk, and direct sampling of the normalized certificate.

use std::f64::consts::PI;

use finehull::geometry::{CircArc, Disk, Obstacle, Segment};
use finehull::harmonic::{hm_wos, SlitDomain, Target, WoSConfig};
use finehull::sampling::sunflower;
use finehull::scenario::{certify_fine_continuation, Overrides, Profile, Scenario, ScenarioFile, Verdict};
use finehull::CPoint;

/// Jacobi-SOR on an n×n grid over [−1, 1]²: boundary values 1 on the arc,
/// 0 on the rest of the circle and on the slit.
fn dirichlet_fd(n: usize, arc: &CircArc, slit: (CPoint, CPoint), z: CPoint) -> f64 {
    let h = 2.0 / (n - 1) as f64;
    let pt = |i: usize, j: usize| CPoint::new(-1.0 + i as f64 * h, -1.0 + j as f64 * h);
    let (a, b) = slit;
    let on_slit = |w: CPoint| {
        let t = ((w - a) * (b - a).conj()).re / (b - a).norm_sqr();
        (0.0..=1.0).contains(&t) && (w - (a + (b - a) * t)).norm() <= 0.5 * h
    };
    // fixed: Some(value), free: None
    let fixed: Vec<Option<f64>> = (0..n * n)
        .map(|k| {
            let w = pt(k % n, k / n);
            if w.norm() >= 1.0 {
                Some(if arc.contains_angle(w.arg()) { 1.0 } else { 0.0 })
            } else if on_slit(w) {
                Some(0.0)
            } else {
                None
            }
        })
        .collect();
    let mut u: Vec<f64> = fixed.iter().map(|f| f.unwrap_or(0.3)).collect();
    let omega = 2.0 / (1.0 + (PI / n as f64).sin());
    for _ in 0..20 * n {
        let mut delta: f64 = 0.0;
        for j in 1..n - 1 {
            for i in 1..n - 1 {
                let k = j * n + i;
                if fixed[k].is_some() {
                    continue;
                }
                let avg = 0.25 * (u[k - 1] + u[k + 1] + u[k - n] + u[k + n]);
                let new = u[k] + omega * (avg - u[k]);
                delta = delta.max((new - u[k]).abs());
                u[k] = new;
            }
        }
        if delta < 1e-10 {
            break;
        }
    }
    // bilinear interpolation
    let x = (z.re + 1.0) / h;
    let y = (z.im + 1.0) / h;
    let (i, j) = (x.floor() as usize, y.floor() as usize);
    let (fx, fy) = (x - i as f64, y - j as f64);
    let at = |i: usize, j: usize| u[j * n + i];
    at(i, j) * (1.0 - fx) * (1.0 - fy) + at(i + 1, j) * fx * (1.0 - fy) + at(i, j + 1) * (1.0 - fx) * fy + at(i + 1, j + 1) * fx * fy
}

#[test]
fn wos_matches_finite_differences_in_a_slit_disk() {
    let outer = Disk::new(CPoint::new(0.0, 0.0), 1.0).unwrap();
    let arc = CircArc::centered(outer.center, 1.0, PI / 2.0, 2.0).unwrap();
    let slit = (CPoint::new(-0.4, 0.3), CPoint::new(0.35, 0.3));
    let dom = SlitDomain::new(outer, vec![Obstacle::Segment(Segment::new(slit.0, slit.1).unwrap())], "slit").unwrap();
    let coarse = 161;
    for (k, z) in [CPoint::new(0.0, 0.0), CPoint::new(0.1, 0.55), CPoint::new(-0.5, -0.2)].into_iter().enumerate() {
        let fd = dirichlet_fd(coarse, &arc, slit, z);
        let fine = dirichlet_fd(2 * coarse - 1, &arc, slit, z);
        // the grid error is estimated from the two resolutions
        let grid_err = 2.0 * (fd - fine).abs() + 2e-3;
        let est = hm_wos(&dom, &Target::Arc { arc }, z, &WoSConfig::new(100_000, 40 + k as u64)).unwrap();
        assert!(
            (est.value - fine).abs() <= 3.0 * est.std_error + grid_err,
            "z = {z}: wos {} ± {}, fd {fine} (coarse {fd})",
            est.value,
            est.std_error
        );
    }
}

#[test]
fn normalized_certificate_is_thin_on_samples() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/borel.scenario");
    let file = ScenarioFile::load(&path).unwrap();
    let s = Scenario::build(file, &Overrides { profile: Some(Profile::Fast), ..Default::default() }).unwrap();
    let cert = certify_fine_continuation(&s);
    assert_eq!(cert.verdict, Verdict::Certified);
    let norm = cert.normalized.as_ref().unwrap();
    let u = &norm.certificate;
    let disk = Disk::new(cert.p, norm.rho).unwrap();
    for z in sunflower(&disk, 4000) {
        assert!(u.eval(z) <= 0.0, "𝒰({z}) = {}", u.eval(z));
    }
    for d in s.fine_nbhd.union.disks.iter().filter(|d| (d.center - cert.p).norm() + d.radius <= norm.rho) {
        for k in 0..64 {
            let z = d.point_at(k as f64 * PI / 32.0);
            assert!(u.eval(z) <= -1.0 + 1e-9, "{}", u.eval(z));
        }
    }
    assert!(u.eval(cert.p) >= -1.0 / 12.0 - 1e-12);
}
