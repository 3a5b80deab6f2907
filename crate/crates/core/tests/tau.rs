use fatslit::growth::density_from_explicit;
use fatslit::quadrature::gauss_legendre;
use fatslit::tau::{area, hirota_suite, potential, tau, tau_monte_carlo};
use fatslit::{CutDensity, IntegratorConfig, C64};
use std::f64::consts::PI;

// Stored in fixtures/regression.txt.
const F_HALF_DISK: f64 = 0.138799791230;

/// `-(2/pi) int_B log|(z - w)/(z - conj w)| d^2w` over the unit half disk by
/// polar Gauss-Legendre around `center`, where `reach(phi)` is the distance
/// to the edge of the half disk along direction `phi`. The angular range is
/// split where the ray switches from the arc to the base.
fn brute_potential(z: C64, center: C64, reach: impl Fn(f64) -> f64, n: usize) -> f64 {
    let rule = gauss_legendre(n);
    let mut cuts = vec![0.0, PI, 2.0 * PI];
    if center.im > 0.0 {
        cuts.push((C64::new(1.0, 0.0) - center).arg().rem_euclid(2.0 * PI));
        cuts.push((C64::new(-1.0, 0.0) - center).arg().rem_euclid(2.0 * PI));
    } else {
        cuts.truncate(2);
    }
    cuts.sort_by(f64::total_cmp);
    let mut total = 0.0;
    for span in cuts.windows(2) {
        let (lo, hi) = (span[0], span[1]);
        for (a, wa) in rule.nodes.iter().zip(&rule.weights) {
            let phi = lo + 0.5 * (hi - lo) * (a + 1.0);
            let dir = C64::from_polar(1.0, phi);
            let rmax = reach(phi);
            let mut inner = 0.0;
            for (b, wb) in rule.nodes.iter().zip(&rule.weights) {
                let r = 0.5 * rmax * (b + 1.0);
                let w = center + dir * r;
                inner += wb * r * ((z - w).norm() / (z - w.conj()).norm()).ln();
            }
            total += wa * 0.5 * (hi - lo) * inner * 0.5 * rmax;
        }
    }
    -(2.0 / PI) * total
}

/// Distance from `c` (inside the closed half disk) to its edge along `phi`.
fn half_disk_reach(c: C64) -> impl Fn(f64) -> f64 {
    move |phi: f64| {
        let d = C64::from_polar(1.0, phi);
        // circle |c + r d| = 1
        let b = (c.conj() * d).re;
        let circle = -b + (b * b - c.norm_sqr() + 1.0).sqrt();
        // real axis
        if d.im < 0.0 {
            circle.min(-c.im / d.im)
        } else {
            circle
        }
    }
}

#[test]
fn potential_matches_direct_quadrature_outside() {
    let st = CutDensity::half_disk(1.0, 64).unwrap();
    for z in [C64::new(0.3, 1.6), C64::new(-1.8, 0.4), C64::new(2.5, 2.5)] {
        let direct = brute_potential(z, C64::new(0.0, 0.0), half_disk_reach(C64::new(0.0, 0.0)), 160);
        let v = potential(&st, z).unwrap();
        assert!((v - direct).abs() < 1e-9, "{z}: {v} vs {direct}");
    }
}

#[test]
fn potential_matches_direct_quadrature_inside() {
    let st = CutDensity::half_disk(1.0, 64).unwrap();
    let z = C64::new(0.2, 0.45);
    let direct = brute_potential(z, z, half_disk_reach(z), 200);
    let v = potential(&st, z).unwrap();
    assert!((v - direct).abs() < 1e-6, "{v} vs {direct}");
}

#[test]
fn potential_vanishes_on_real_rays_and_decays() {
    let st = CutDensity::half_disk(1.0, 64).unwrap();
    for x in [-3.0, 1.5, 0.37 + 2.0] {
        assert!(potential(&st, C64::new(x, 0.0)).unwrap().abs() < 1e-12);
    }
    // dipole far field: (2/pi) * 2 y * (V_1 area moment) / |z|^2
    let y: f64 = 40.0;
    let v = potential(&st, C64::new(0.0, y)).unwrap();
    let lead = 4.0 / PI * (2.0 / 3.0) / y;
    assert!((v - lead).abs() < 1e-3 * lead, "{v} {lead}");
}

#[test]
fn half_disk_tau_and_scaling() {
    let st = CutDensity::half_disk(1.0, 64).unwrap();
    let f = tau(&st).unwrap();
    assert!((f - F_HALF_DISK).abs() < 1e-10, "{f}");
    let r: f64 = 0.7;
    let g = tau(&CutDensity::half_disk(r, 64).unwrap()).unwrap();
    assert!((g / f - r.powi(4)).abs() < 1e-10);
    assert!((area(&st) - PI / 2.0).abs() < 1e-12);
    assert_eq!(tau(&CutDensity::empty()).unwrap(), 0.0);
}

#[test]
fn monte_carlo_is_reproducible() {
    let st = CutDensity::half_disk(1.0, 64).unwrap();
    let a = tau_monte_carlo(&st, 100_000, 7, 1.0).unwrap();
    let b = tau_monte_carlo(&st, 100_000, 7, 1.0).unwrap();
    let c = tau_monte_carlo(&st, 100_000, 8, 1.0).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.value, c.value);
    assert!((a.value - F_HALF_DISK).abs() < 5.0 * a.std_error);
    assert!(tau_monte_carlo(&st, 1000, 7, 1e-6).is_err());
}

#[test]
fn hirota_on_explicit_state() {
    let t = 0.5;
    let st = density_from_explicit(t, 64).unwrap();
    let rep = hirota_suite(&st, 1e-3, 1, &IntegratorConfig::default()).unwrap();
    assert_eq!(rep.residuals.keys().cloned().collect::<Vec<_>>(), vec!["a", "b"]);
    // V_1 = T^3/2 and dV_1/dT = 3T^2/2 = u along this solution
    assert!((rep.v[0] - t * t * t / 2.0).abs() < 1e-12);
    assert!((rep.mixed[0][0] - 1.5 * t * t).abs() < 1e-6);
    assert!(rep.residuals["a"] < 1e-2 && rep.residuals["b"] < 1e-3);
}
