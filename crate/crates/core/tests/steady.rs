use std::sync::Arc;

use rhdg::mesh::{generate_unit_square, kovasznay_mesh};
use rhdg::scenarios::*;
use rhdg::solvers::StokesVariant;

#[test]
fn conforming_pair_tracks_the_relaxed_pair() {
    let mesh = Arc::new(kovasznay_mesh(20));
    let cases = kovasznay_study(&mesh, &[2, 3, 4, 5], &[StokesVariant::B], 1.0 / 40.0, 4.0, true).unwrap();
    for k in 2..=5 {
        let get = |label: &str| {
            cases
                .iter()
                .find(|c| c.report.k == k && c.label == label)
                .unwrap()
                .report
                .h1_u
        };
        let (relaxed, conf) = (get("B"), get("conf"));
        assert!(conf <= 2.0 * relaxed && relaxed <= 2.0 * conf, "k={k}: {relaxed:e} vs {conf:e}");
    }
}

#[test]
fn manufactured_rates_match_the_order() {
    // k = 1 is left out: the default penalty is not coercive there on these meshes
    for (k, ns) in [(2, [4, 8, 16]), (4, [2, 4, 8])] {
        let study = manufactured_study(k, &ns, StokesVariant::PR, 4.0).unwrap();
        let rate = study.h1_rate.unwrap();
        assert!((rate - k as f64).abs() < 0.3, "k={k} rate {rate}");
    }
}

#[test]
fn pressure_robust_variant_ignores_gradient_forcing() {
    let mesh = Arc::new(generate_unit_square(4, false));
    for nu in [1.0, 1e-4] {
        let r = gradient_response(&mesh, 3, nu, 4.0).unwrap();
        assert!(r.norm_pr < 1e-12, "nu={nu}: {:e}", r.norm_pr);
        // the plain load pollutes the velocity like 1 / nu
        assert!(r.norm_b > 1e-6 / nu);
    }
}

#[test]
fn reconstructed_solutions_are_solenoidal() {
    let mesh = Arc::new(generate_unit_square(3, false));
    for k in 1..=4 {
        let d = divergence_check(&mesh, k, 4.0).unwrap();
        assert!(d.div_max < 1e-10 && d.normal_jump_max < 1e-10, "k={k}: {d:?}");
    }
}
