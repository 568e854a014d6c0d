use subfit_web::Demo;

fn demo() -> Demo {
    Demo::new(3000, 0.45, 0.3, 0.25, 0.0, 1).unwrap()
}

#[test]
fn fitting_lowers_the_energy() {
    let mut d = demo();
    let first = d.fit(30).unwrap();
    let second = d.fit(200).unwrap();
    assert!(second < first, "{first} -> {second}");
    let h = d.energy_history();
    assert!(h.len() > 30 && h.len() <= 230);
    assert!(h.iter().all(|e| e.is_finite()));
    assert_eq!(d.control_points().len(), 42 * 3);
    assert_eq!(d.control_faces().len(), 80 * 3);
}

#[test]
fn limit_surface_buffers_agree() {
    let d = demo();
    let pts = d.limit_points(2).unwrap();
    let faces = d.limit_faces(2).unwrap();
    assert_eq!(faces.len(), 80 * 16 * 3);
    let nv = pts.len() / 3;
    assert_eq!(nv, 10 * 16 * 4 + 2);
    assert!(faces.iter().all(|&v| (v as usize) < nv));
}

#[test]
fn field_slice_changes_sign_across_the_surface() {
    let d = demo();
    let res = 41;
    let f = d.field_slice(res, 0.5).unwrap();
    assert_eq!(f.len(), res * res);
    let at = |i: usize, j: usize| f[j * res + i];
    // grid center is inside the ellipsoid, x = 0.5 + 0.45 lies on it
    assert!(at(20, 20).is_nan() || at(20, 20) < 0.0);
    let near_inside = at(38, 20);
    let near_outside = at(40, 20);
    assert!(near_inside < 0.0 && near_outside > 0.0, "{near_inside} {near_outside}");
    assert!(at(0, 0).is_nan());
}

#[test]
fn cloud_lies_on_the_ellipsoid() {
    let d = demo();
    let pts = d.cloud_points();
    for p in pts.chunks(3) {
        let q = ((p[0] - 0.5) / 0.45).powi(2) + ((p[1] - 0.5) / 0.3).powi(2) + ((p[2] - 0.5) / 0.25).powi(2);
        assert!((q - 1.0).abs() < 1e-9);
    }
}
