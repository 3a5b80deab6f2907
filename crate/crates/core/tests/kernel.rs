use fatslit::kernel::{green_odd, green_odd_normal, p_of_z, pg_velocity, poisson_extend, DeformationProfile};
use fatslit::{CutDensity, Error, C64};
use proptest::prelude::*;

// exterior map of the unit half disk
fn joukowski(z: C64) -> C64 {
    z + 1.0 / z
}

fn disk() -> CutDensity {
    CutDensity::half_disk(1.0, 64).unwrap()
}

#[test]
fn green_examples() {
    let empty = CutDensity::empty();
    let g = green_odd(&empty, C64::new(0.0, 1.0), C64::new(0.0, 2.0)).unwrap();
    assert!((g - (1.0f64 / 3.0).ln()).abs() < 1e-14);
    let g = green_odd(&disk(), C64::new(0.0, 2.0), C64::new(0.0, 3.0)).unwrap();
    assert!((g - 0.28f64.ln()).abs() < 1e-12, "{g}");
}

#[test]
fn green_vanishes_on_real_rays() {
    let st = disk();
    let w = C64::new(0.4, 1.7);
    for x in [-5.0, -1.3, 1.01, 2.5] {
        assert!(green_odd(&st, C64::new(x, 0.0), w).unwrap().abs() < 1e-12);
    }
}

#[test]
fn normal_derivative_examples() {
    let st = disk();
    let v = green_odd_normal(&st, C64::new(0.0, 10.0), 0.0).unwrap();
    // p(a) = 9.9 i, p(i) = 0, |p'(i)| = 2
    assert!((v + 2.0 * 9.9 * 2.0 / (9.9 * 9.9)).abs() < 1e-10, "{v}");
}

#[test]
fn normal_derivative_matches_finite_difference() {
    let st = disk();
    let a = C64::new(-0.7, 1.9);
    for theta in [0.4f64, 1.1, 2.3] {
        let n = C64::from_polar(1.0, theta);
        let g = |d: f64| green_odd(&st, a, n * (1.0 + d)).unwrap() / d;
        let d = 1e-4;
        let fd = 2.0 * g(d / 2.0) - g(d);
        let v = green_odd_normal(&st, a, 2.0 * theta.cos()).unwrap();
        assert!((v - fd).abs() < 1e-6 * v.abs().max(1.0), "{theta}: {v} vs {fd}");
    }
}

#[test]
fn preimage_errors() {
    let st = disk();
    assert!(matches!(p_of_z(&st, C64::new(0.1, 0.3)), Err(Error::InsideSlit(_))));
    assert!(matches!(p_of_z(&st, C64::from_polar(1.0, 0.9)), Err(Error::OnBoundary(_))));
    assert!(p_of_z(&st, C64::new(0.5, -1.0)).is_err());
    assert!(p_of_z(&st, C64::new(f64::NAN, 1.0)).is_err());
}

#[test]
fn poisson_zero_data() {
    assert_eq!(poisson_extend(&disk(), |_| 0.0, C64::new(0.3, 2.0)).unwrap(), 0.0);
}

#[test]
fn poisson_square_root_oracle() {
    // Im(sqrt((P+2)(P-2)) - P) is bounded, harmonic, zero on the real rays
    // and equals sqrt(4 - p^2) on the cut
    let st = disk();
    let f = |p: f64| (4.0 - p * p).max(0.0).sqrt();
    for z in [C64::new(0.0, 1.5), C64::new(1.2, 0.4), C64::new(-2.0, 3.0), C64::new(0.3, 8.0)] {
        let pz = joukowski(z);
        let exact = ((pz + 2.0).sqrt() * (pz - 2.0).sqrt() - pz).im;
        let v = poisson_extend(&st, f, z).unwrap();
        assert!((v - exact).abs() < 1e-8, "{z}: {v} vs {exact}");
    }
}

#[test]
fn velocity_has_prescribed_normal_component() {
    let st = CutDensity::from_profile(-6.0, 6.0, 0.35, 0.35, 64, |s| 1.0 + 0.2 * s).unwrap();
    for prof in [DeformationProfile::darcy(&st).unwrap(), DeformationProfile::faber(&st, 2).unwrap()] {
        let v = pg_velocity(&st, &prof).unwrap();
        let cv = st.cut_values();
        for i in 8..56 {
            let tau = cv.z_t(i) / cv.z_t(i).norm();
            let vn = (tau.conj() * v.dz_dt[i]).im;
            assert!((vn - prof.values[i]).abs() < 1e-10 * (1.0 + prof.values[i].abs()), "{i}");
        }
    }
}

#[test]
fn darcy_profile_vanishes_at_corners() {
    let st = CutDensity::from_profile(-6.0, 6.0, 0.35, 0.35, 64, |s| 1.0 + 0.2 * s).unwrap();
    let v = DeformationProfile::darcy(&st).unwrap().values;
    let mid = v[32];
    assert!(v[0].abs() < 1e-3 * mid && v[63].abs() < 1e-3 * mid);
}

fn exterior() -> impl Strategy<Value = C64> {
    (1.15f64..4.0, 0.05f64..3.09).prop_map(|(r, a)| C64::from_polar(r, a))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn preimage_matches_closed_form(z in exterior()) {
        let p = p_of_z(&disk(), z).unwrap();
        prop_assert!((p - joukowski(z)).norm() < 1e-10 * (1.0 + z.norm()));
    }

    #[test]
    fn green_symmetric_and_negative(z in exterior(), w in exterior()) {
        prop_assume!((z - w).norm() > 1e-3);
        let st = disk();
        let a = green_odd(&st, z, w).unwrap();
        let b = green_odd(&st, w, z).unwrap();
        prop_assert!(a < 0.0);
        prop_assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
        let c = green_odd(&st, z, w.conj()).unwrap();
        prop_assert!((a + c).abs() < 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn poisson_is_odd(z in exterior()) {
        let st = disk();
        let f = |p: f64| 1.0 + 0.3 * p;
        let a = poisson_extend(&st, f, z).unwrap();
        let b = poisson_extend(&st, f, z.conj()).unwrap();
        prop_assert!((a + b).abs() < 1e-12);
    }

    #[test]
    fn cut_jump_is_twice_height(s in -0.98f64..0.98) {
        let st = disk();
        let p = 2.0 * s;
        let up = st.eval_cut(p, true).unwrap();
        let lo = st.eval_cut(p, false).unwrap();
        prop_assert!((up - lo - C64::new(0.0, 2.0 * st.height(p))).norm() < 1e-11);
    }
}
