mod common;

use common::{pure_state_entropy, state_params};
use interface_sim::dynamics::{
    run_protocol_observed, single_pass, NoiseModel, Orientation, PassParams, Scheme,
};
use interface_sim::gaussian::{
    condition_on_quadrature, rotate_quadratures, symplectic_eigenvalues, ModeIndex, QuadratureIndex,
};
use interface_sim::measures::{epr_variance, geof, log_negativity, standard_form};
use interface_sim::physical::{derive_model_params, ExperimentalSetup};
use proptest::prelude::*;

const MODES: [ModeIndex; 2] = [ModeIndex::Atoms, ModeIndex::Light];
const QUADS: [QuadratureIndex; 2] = [QuadratureIndex::X, QuadratureIndex::P];

fn scheme() -> impl Strategy<Value = Scheme> {
    prop_oneof![Just(Scheme::Unswitched), Just(Scheme::Switched)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn random_states_are_physical(p in state_params()) {
        let g = p.state();
        prop_assert!(g.min_symplectic_eigenvalue().unwrap() >= 1.0 - 1e-9);
        prop_assert!((g.matrix() - g.matrix().transpose()).amax() <= 1e-12);
    }

    #[test]
    fn single_pass_keeps_states_physical(
        p in state_params(),
        kappa in -1.5..1.5f64,
        eta in 0.0..=1.0f64,
        zeta in 0.0..=1.0f64,
        transposed in any::<bool>(),
    ) {
        let orientation = if transposed { Orientation::Transposed } else { Orientation::Plain };
        let out = single_pass(&p.state(), kappa, eta, zeta, orientation).unwrap();
        prop_assert!(out.min_symplectic_eigenvalue().unwrap() >= 1.0 - 1e-9);
        prop_assert!((out.matrix() - out.matrix().transpose()).amax() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn conditioning_never_raises_a_variance(p in state_params()) {
        let g = p.state();
        for mode in MODES {
            let kept = g.local_block(mode.partner());
            for quad in QUADS {
                let cond = condition_on_quadrature(&g, mode, quad).unwrap();
                for i in 0..2 {
                    prop_assert!(cond.matrix()[(i, i)] <= kept[(i, i)] * (1.0 + 1e-12));
                }
                prop_assert!(cond.symplectic_eigenvalue() >= 1.0 - 1e-9);
            }
        }
    }

    #[test]
    fn rotations_preserve_symplectic_spectrum(p in state_params(), a in -7.0..7.0f64, b in -7.0..7.0f64) {
        let g = p.state();
        let (hi, lo) = symplectic_eigenvalues(&g).unwrap();
        let (rhi, rlo) = symplectic_eigenvalues(&rotate_quadratures(&g, a, b)).unwrap();
        prop_assert!((hi - rhi).abs() <= 1e-10 * hi.max(1.0));
        prop_assert!((lo - rlo).abs() <= 1e-10 * lo.max(1.0));
    }

    #[test]
    fn standard_form_preserves_local_invariants(p in state_params()) {
        let g = p.state();
        let sf = standard_form(&g).unwrap();
        let s = sf.covariance();
        let pairs = [
            (g.local_block(ModeIndex::Atoms).determinant(), s.local_block(ModeIndex::Atoms).determinant()),
            (g.local_block(ModeIndex::Light).determinant(), s.local_block(ModeIndex::Light).determinant()),
            (g.coupling_block().determinant(), s.coupling_block().determinant()),
            (g.matrix().determinant(), s.matrix().determinant()),
        ];
        for (orig, std) in pairs {
            prop_assert!((orig - std).abs() <= 1e-10 * orig.abs().max(1.0), "{orig} vs {std}");
        }
        prop_assert!(sf.c_x >= sf.c_p.abs());
    }

    #[test]
    fn epr_below_one_witnesses_entanglement(
        scheme in scheme(),
        n in 1usize..=20,
        kappa in 0.0..1.5f64,
        eta in 0.0..0.3f64,
        zeta in 0.0..0.3f64,
    ) {
        let params = PassParams::new(kappa, eta, 0.0, zeta).unwrap();
        run_protocol_observed(n, &params, scheme, None, &NoiseModel::default(), |s| {
            let e = epr_variance(&s.gamma);
            assert!(e >= 0.0);
            if e < 1.0 - 1e-9 {
                assert!(log_negativity(&s.gamma).unwrap() > 0.0, "EPR {e} without negativity");
            }
        }).unwrap();
    }

    #[test]
    fn model_identities_hold_for_random_setups(
        sigma in 1e-10..1e-8f64,
        gamma in 1e6..1e7f64,
        ratio in 20.0..500.0f64,
        diameter in 20e-4..500e-4f64,
        n_atoms in 1e5..1e7f64,
        n_photons in 1e5..1e8f64,
    ) {
        let setup = ExperimentalSetup {
            sigma_cm2: sigma,
            gamma_hwhm_hz: gamma,
            detuning_hz: gamma * ratio,
            area_cm2: interface_sim::physical::cylinder_cross_section(diameter),
            n_atoms,
            n_photons,
            reflectivity: 0.02,
        };
        let depth = setup.optical_depth();
        prop_assume!(n_photons * sigma / (setup.area_cm2 * ratio * ratio) < 1.0);
        prop_assume!(depth / (ratio * ratio) < 0.9);
        let p = derive_model_params(&setup).unwrap();
        prop_assert!((p.kappa * p.kappa / (p.eta * p.alpha0) - 1.0).abs() < 1e-12);
        prop_assert!((p.epsilon / (p.alpha0 / (ratio * ratio)) - 1.0).abs() < 1e-12);
        let mut other = setup;
        other.n_photons *= 3.0;
        other.detuning_hz *= 1.7;
        other.gamma_hwhm_hz *= 0.6;
        prop_assert_eq!(other.optical_depth(), depth);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn geof_is_invariant_under_local_rotations(p in state_params(), a in -3.2..3.2f64, b in -3.2..3.2f64) {
        let g = p.state();
        let e = geof(&g).unwrap();
        let r = geof(&rotate_quadratures(&g, a, b)).unwrap();
        prop_assert!((e - r).abs() <= 1e-4, "{e} vs {r}");
    }

    #[test]
    fn geof_vanishes_exactly_with_log_negativity(p in state_params()) {
        let g = p.state();
        let ln = log_negativity(&g).unwrap();
        let e = geof(&g).unwrap();
        if ln == 0.0 {
            prop_assert!(e <= 1e-6, "GEOF {e} on a PPT state");
        }
        if ln > 1e-4 {
            prop_assert!(e > 0.0, "GEOF vanishes with negativity {ln}");
        }
    }

    #[test]
    fn geof_is_bounded_by_any_pure_decomposition(p in state_params()) {
        let g = p.state();
        let pure = p.pure_part();
        let nu = pure.local_block(ModeIndex::Atoms).determinant().max(1.0).sqrt();
        let bound = pure_state_entropy(nu);
        prop_assert!(geof(&g).unwrap() <= bound + 1e-6);
    }
}
