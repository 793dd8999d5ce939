use finehull_web::demo::{hm_field, sheet_phase, sheet_segments, wos_slit};

#[test]
fn field_is_a_probability_inside_the_disk() {
    let v = hm_field(0.3, 2.0, 41).unwrap();
    assert_eq!(v.len(), 41 * 41);
    assert!(v.iter().filter(|x| !x.is_nan()).all(|x| (0.0..=1.0).contains(x)));
    // the center sees the arc fraction
    assert!((v[20 * 41 + 20] - 2.0 / std::f64::consts::TAU).abs() < 1e-12);
}

#[test]
fn slit_lowers_the_measure() {
    let r = wos_slit(-0.5, 0.4, 0.5, 0.4, std::f64::consts::FRAC_PI_2, 1.5, 0.0, 0.0, 20_000, 3).unwrap();
    assert!(r[0] + 3.0 * r[1] < r[2], "{r:?}");
}

#[test]
fn sheets_have_different_phases() {
    let a = sheet_phase(0, 32, 3.0).unwrap();
    let b = sheet_phase(0b101, 32, 3.0).unwrap();
    assert_ne!(a.iter().filter(|x| !x.is_nan()).count(), 0);
    assert!(a.iter().zip(&b).any(|(x, y)| (x - y).abs() > 1e-6));
    assert_eq!(sheet_segments().len(), 12);
    assert!(hm_field(0.0, 1.0, 1).is_err());
}
