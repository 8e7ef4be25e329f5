use std::sync::OnceLock;

use nalgebra::Vector3;
use odtsim::par::{with_threads, Execution};
use odtsim::thermo::{
    analytic_populations, exact_populations, incomplete_gamma_p32, BeamLandscape, HarmonicLandscape,
    TruncatedThermalState, VolumeTable,
};
use odtsim::trapcore::constants::BOLTZMANN;
use odtsim::{AtomSpecies, GaussianBeam, TrapConfig};
use proptest::prelude::*;
use statrs::function::gamma::gamma_lr;

fn crossed() -> TrapConfig {
    TrapConfig::new(
        AtomSpecies::rubidium87(),
        vec![
            GaussianBeam::new(5.0, 40e-6, 1.06e-6),
            GaussianBeam::new(5.0, 40e-6, 1.06e-6).with_orientation(Vector3::y(), Vector3::z()),
        ],
    )
}

fn shared() -> &'static (BeamLandscape, VolumeTable) {
    static CELL: OnceLock<(BeamLandscape, VolumeTable)> = OnceLock::new();
    CELL.get_or_init(|| {
        let landscape = BeamLandscape::new(&crossed()).unwrap();
        let table = VolumeTable::build(&landscape, 1.9, 10_000_000, 3, Execution::Parallel).unwrap();
        (landscape, table)
    })
}

fn harmonic() -> HarmonicLandscape {
    HarmonicLandscape::new(30e-6, 50e-6 * BOLTZMANN, AtomSpecies::rubidium87().mass).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn analytic_wing_fraction_falls_with_eta(eta in 2.5f64..19.0, d in 0.01f64..3.0, w in 5e-6f64..100e-6, l in 0.5e-6f64..11e-6) {
        let a = analytic_populations(2e6, eta, w, l).wing_fraction;
        let b = analytic_populations(2e6, eta + d, w, l).wing_fraction;
        prop_assert!(b < a);
    }

    #[test]
    fn analytic_wing_fraction_rises_with_waist_over_wavelength(eta in 2.5f64..19.0, w in 5e-6f64..100e-6, k in 1.01f64..5.0, l in 0.5e-6f64..11e-6) {
        let a = analytic_populations(2e6, eta, w, l).wing_fraction;
        prop_assert!(analytic_populations(2e6, eta, k * w, l).wing_fraction > a);
        prop_assert!(analytic_populations(2e6, eta, w, l / k).wing_fraction > a);
    }

    #[test]
    fn analytic_populations_partition_n(eta in 2.5f64..19.0, n in 1.0f64..1e9) {
        let r = analytic_populations(n, eta, 40e-6, 1.06e-6);
        prop_assert!(((r.center + r.wing) / n - 1.0).abs() < 1e-12);
    }

    #[test]
    fn incomplete_gamma_matches_reference(x in 0.0f64..60.0) {
        let ours = incomplete_gamma_p32(x).unwrap();
        let reference = gamma_lr(1.5, x);
        prop_assert!((ours - reference).abs() < 1e-12, "{ours} vs {reference}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn exact_wing_fraction_falls_with_eta(eta in 4.0f64..13.0, d in 0.25f64..2.0) {
        let (landscape, table) = shared();
        let at = |e: f64| {
            let state = TruncatedThermalState::from_eta(2e6, e, 1.9, landscape.characterization().clone()).unwrap();
            exact_populations(&state, table).unwrap()
        };
        let (a, b) = (at(eta), at(eta + d));
        prop_assert!(b.wing_fraction < a.wing_fraction);
        prop_assert!(((a.center + a.wing) / 2e6 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn volume_table_is_thread_count_independent(seed in any::<u64>(), threads in 1usize..5) {
        let h = harmonic();
        let reference = VolumeTable::build(&h, 1.5, 40_000, seed, Execution::Sequential).unwrap().to_csv();
        let parallel = with_threads(threads, || VolumeTable::build(&h, 1.5, 40_000, seed, Execution::Parallel)).unwrap().to_csv();
        prop_assert_eq!(reference, parallel);
    }

    #[test]
    fn volume_is_non_decreasing_and_round_trips(seed in any::<u64>()) {
        let table = VolumeTable::build(&harmonic(), 1.2, 20_000, seed, Execution::Sequential).unwrap();
        prop_assert!(table.volume.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(table.density.iter().all(|&d| d >= 0.0));
        let back = VolumeTable::from_csv(&table.to_csv()).unwrap();
        prop_assert_eq!(back.to_csv(), table.to_csv());
    }
}

#[test]
fn crossed_beam_table_is_byte_identical_across_thread_counts() {
    let landscape = BeamLandscape::new(&crossed()).unwrap();
    let build = |threads| {
        with_threads(threads, || VolumeTable::build(&landscape, 1.9, 300_000, 9, Execution::Parallel)).unwrap()
    };
    let one = build(1).to_csv();
    assert_eq!(one, build(3).to_csv());
    assert_eq!(one, VolumeTable::build(&landscape, 1.9, 300_000, 9, Execution::Sequential).unwrap().to_csv());
}
