use dicke_atlas::analytic::analytic_ground_energy;
use dicke_atlas::exact::{build_hamiltonian, finite_size_scan, solve, EdConfig};
use dicke_atlas::ModelParams;
use proptest::prelude::*;

#[test]
fn approaches_the_mean_field_energy() {
    let points = [(0.2, 0.2), (0.3, -0.1), (1.0, 1.0), (0.8, 0.3), (1.0, -0.5), (0.4, -1.0)];
    for (l, k) in points {
        let p = ModelParams::new(1.0, 1.0, l, k, 0.0).unwrap();
        let mf = analytic_ground_energy(&p).unwrap();
        let scan = finite_size_scan(&p, &[4, 8, 12, 16], &EdConfig::new(4, 16)).unwrap();
        let errs: Vec<f64> = scan.iter().map(|r| (r.e0_per_atom - mf).abs()).collect();
        assert!(errs.windows(2).all(|w| w[1] <= w[0]), "({l}, {k}): {errs:?}");
        assert!(errs[3] < 0.08);
        for r in &scan {
            assert!(r.n_photon_per_atom * r.n_atoms as f64 <= r.cutoff_used as f64 / 2.0);
        }
    }
}

#[test]
fn transverse_spin_approaches_the_mean_field_value() {
    let p = ModelParams::with_ratio(1.0, 1.0, 1.0, 1.0).unwrap();
    let scan = finite_size_scan(&p, &[4, 8, 16], &EdConfig::new(4, 16)).unwrap();
    let errs: Vec<f64> = scan.iter().map(|r| (r.jperp2 - 0.234375).abs()).collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}

#[test]
fn doubling_the_converged_cutoff_changes_nothing() {
    let p = ModelParams::new(1.0, 1.0, 0.9, 0.4, 0.0).unwrap();
    let a = solve(&p, &EdConfig::new(6, 40)).unwrap();
    assert!(a.top_weight < 1e-10);
    let b = solve(&p, &EdConfig::new(6, 80)).unwrap();
    assert!((a.e0_per_atom - b.e0_per_atom).abs() < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn variational_bound_and_parity(l in -1.5..1.5f64, k in -1.5..1.5f64, u in -0.5..0.5f64, n in 2usize..7) {
        let p = ModelParams::new(1.0, 1.0, l, k, u).unwrap();
        let cfg = EdConfig::new(n, 40);
        prop_assert_eq!(build_hamiltonian(&p, &cfg).unwrap().parity_commutator_norm(), 0.0);
        let r = solve(&p, &cfg).unwrap();
        prop_assert!(r.e0_per_atom <= -0.5 + 1e-12);
        prop_assert!((r.parity.abs() - 1.0).abs() <= 1e-8);
    }
}
