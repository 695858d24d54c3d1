use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rhdg::assembly::{assemble_divergence, assemble_mass, assemble_viscosity, Discretization};
use rhdg::mesh::generate_unit_square;
use rhdg::reconstruction::build_reconstruction;
use rhdg::space::SpaceKind;

fn random(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn reconstruction_keeps_discrete_divergence(k in 1usize..5, n in 1usize..4, periodic in any::<bool>(), seed in any::<u64>()) {
        let mesh = Arc::new(generate_unit_square(n, periodic));
        let disc = Discretization::new(mesh.clone(), k, SpaceKind::WRelaxed).unwrap();
        let op = build_reconstruction(&mesh, &disc.w).unwrap();
        let b = assemble_divergence(&disc).unwrap();
        let mut u = random(disc.nw(), seed);
        let mut ru = op.project_relaxed(&u);
        u.resize(disc.nv(), 0.0);
        ru.resize(disc.nv(), 0.0);
        let (bu, bru) = (b.mul_vec(&u), b.mul_vec(&ru));
        for (x, y) in bu.iter().zip(&bru) {
            prop_assert!((x - y).abs() < 1e-11 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn mass_and_viscosity_are_nonnegative(k in 1usize..5, periodic in any::<bool>(), seed in any::<u64>()) {
        let disc = Discretization::new(Arc::new(generate_unit_square(2, periodic)), k, SpaceKind::WRelaxed).unwrap();
        let m = assemble_mass(&disc).unwrap();
        // penalty large enough for every order on right-angled meshes
        let a = assemble_viscosity(&disc, 1.0, 8.0).unwrap();
        let x = random(disc.nv(), seed);
        prop_assert!(m.bilinear(&x, &x) >= 0.0);
        prop_assert!(a.bilinear(&x, &x) >= -1e-10);
    }

    #[test]
    fn forms_scale_linearly(k in 1usize..4, alpha in -3.0f64..3.0, seed in any::<u64>()) {
        let disc = Discretization::new(Arc::new(generate_unit_square(2, false)), k, SpaceKind::WRelaxed).unwrap();
        let a = assemble_viscosity(&disc, 1.0, 4.0).unwrap();
        let (x, y) = (random(disc.nv(), seed), random(disc.nv(), seed ^ 1));
        let z: Vec<f64> = x.iter().zip(&y).map(|(x, y)| alpha * x + y).collect();
        let lhs = a.mul_vec(&z);
        let (ax, ay) = (a.mul_vec(&x), a.mul_vec(&y));
        for i in 0..lhs.len() {
            prop_assert!((lhs[i] - alpha * ax[i] - ay[i]).abs() < 1e-10 * (1.0 + lhs[i].abs()));
        }
    }
}
