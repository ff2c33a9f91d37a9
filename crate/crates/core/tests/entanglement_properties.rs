use dtqw_core::coin::{Complex2x2, C64};
use dtqw_core::entanglement::{
    entanglement_entropy, entropy_curve, reduced_coin_density, site_decomposition, von_neumann_entropy,
    DensityMatrix2,
};
use dtqw_core::walk::{evolve, final_state, CoinPolicy, InitialCoin, WalkState};
use nalgebra::{Matrix2, SymmetricEigen};
use proptest::prelude::*;

const CASES: u32 = 1000;

/// Random density matrix `M M† / Tr(M M†)`.
fn density_strategy() -> impl Strategy<Value = DensityMatrix2> {
    prop::array::uniform8(-1.0..1.0f64).prop_filter_map("degenerate", |x| {
        let m = Complex2x2::new(
            C64::new(x[0], x[1]),
            C64::new(x[2], x[3]),
            C64::new(x[4], x[5]),
            C64::new(x[6], x[7]),
        );
        let g = m * m.adjoint();
        let tr = g.trace().re;
        if tr < 1e-6 {
            return None;
        }
        let mut rho = g.scale(C64::new(1.0 / tr, 0.0));
        // exact Hermitian symmetry for the validator
        rho.0[1][0] = rho.0[0][1].conj();
        rho.0[0][0].im = 0.0;
        rho.0[1][1].im = 0.0;
        DensityMatrix2::new(rho).ok()
    })
}

fn init_strategy() -> impl Strategy<Value = InitialCoin> {
    (0.0..=180.0f64, 0.0..360.0f64).prop_map(|(t, p)| InitialCoin::new(t, p).unwrap())
}

fn policy_strategy(steps: usize) -> impl Strategy<Value = CoinPolicy> {
    prop_oneof![
        Just(CoinPolicy::hadamard()),
        any::<u64>().prop_map(|seed| CoinPolicy::DynamicRandom {
            alphabet: CoinPolicy::hf_alphabet(),
            seed
        }),
        any::<u64>().prop_map(|seed| CoinPolicy::StaticRandom {
            alphabet: CoinPolicy::hf_alphabet(),
            seed
        }),
        prop::collection::vec(any::<bool>(), steps).prop_map(|bits| {
            let text: String = bits.iter().map(|&b| if b { 'H' } else { 'F' }).collect();
            CoinPolicy::DynamicSequence(text.parse().unwrap())
        }),
    ]
}

fn to_nalgebra(rho: &DensityMatrix2) -> Matrix2<C64> {
    Matrix2::new(rho.get(0, 0), rho.get(0, 1), rho.get(1, 0), rho.get(1, 1))
}

fn with_global_phase(state: &WalkState, angle: f64) -> WalkState {
    let phase = C64::from_polar(1.0, angle);
    let amps = state.amplitudes().iter().map(|s| [s[0] * phase, s[1] * phase]).collect();
    WalkState::from_amplitudes(state.t(), amps).unwrap()
}

#[test]
fn fixed_points_of_the_entropy() {
    assert_eq!(von_neumann_entropy(&DensityMatrix2::maximally_mixed()), 1.0);
    assert_eq!(von_neumann_entropy(&DensityMatrix2::diagonal(1.0).unwrap()), 0.0);
    let init = InitialCoin::new(51.0, 0.0).unwrap();
    let curve = entropy_curve(&init, &CoinPolicy::hadamard(), 3).unwrap();
    assert_eq!(curve[0].entropy, 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(CASES))]

    #[test]
    fn closed_form_eigenvalues_match_iterative_solver(rho in density_strategy()) {
        let oracle = SymmetricEigen::new(to_nalgebra(&rho)).eigenvalues;
        let (lo, hi) = if oracle[0] <= oracle[1] { (oracle[0], oracle[1]) } else { (oracle[1], oracle[0]) };
        let [a, b] = rho.eigenvalues();
        prop_assert!((a - lo).abs() < 1e-12 && (b - hi).abs() < 1e-12, "{a} {b} vs {lo} {hi}");
    }

    #[test]
    fn entropy_lies_in_unit_interval(rho in density_strategy()) {
        let s = von_neumann_entropy(&rho);
        prop_assert!((0.0..=1.0).contains(&s));
        let [lo, _] = rho.eigenvalues();
        if lo < 1e-10 {
            prop_assert!(s < 1e-8);
        } else {
            prop_assert!(s > 0.0);
        }
    }

    #[test]
    fn walk_density_matrices_are_physical(
        (steps, policy) in (1usize..40).prop_flat_map(|n| (Just(n), policy_strategy(n))),
        init in init_strategy(),
    ) {
        for state in evolve(&init, &policy, steps).unwrap() {
            let rho = reduced_coin_density(&state).unwrap();
            let [lo, hi] = rho.eigenvalues();
            prop_assert!(lo >= -1e-12);
            prop_assert!((lo + hi - 1.0).abs() < 1e-12);
            prop_assert!((rho.get(0, 1) - rho.get(1, 0).conj()).norm() < 1e-15);
            let s = von_neumann_entropy(&rho);
            prop_assert!((0.0..=1.0).contains(&s));
            for record in site_decomposition(&state).unwrap().records {
                let [lo, hi] = record.rho.eigenvalues();
                prop_assert!(lo >= -1e-12 && (lo + hi - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn site_mixture_reproduces_the_entropy(
        (steps, policy) in (1usize..40).prop_flat_map(|n| (Just(n), policy_strategy(n))),
        init in init_strategy(),
    ) {
        let state = final_state(&init, &policy, steps).unwrap();
        let direct = entanglement_entropy(&state).unwrap();
        let mixed = von_neumann_entropy(&site_decomposition(&state).unwrap().mixture().unwrap());
        prop_assert!((direct - mixed).abs() < 1e-12);
    }

    #[test]
    fn entropy_ignores_global_phase(
        (steps, policy) in (1usize..40).prop_flat_map(|n| (Just(n), policy_strategy(n))),
        init in init_strategy(),
        angle in 0.0..std::f64::consts::TAU,
    ) {
        let state = final_state(&init, &policy, steps).unwrap();
        let a = entanglement_entropy(&state).unwrap();
        let b = entanglement_entropy(&with_global_phase(&state, angle)).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn ordered_entropy_is_symmetric_under_phi_reflection(
        theta in 0.0..=180.0f64,
        phi in 0.0..360.0f64,
        steps in 1usize..60,
    ) {
        let reflected = if phi == 0.0 { 0.0 } else { 360.0 - phi };
        let a = entropy_curve(&InitialCoin::new(theta, phi).unwrap(), &CoinPolicy::hadamard(), steps).unwrap();
        let b = entropy_curve(&InitialCoin::new(theta, reflected).unwrap(), &CoinPolicy::hadamard(), steps).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x.entropy - y.entropy).abs() < 1e-12);
        }
    }
}
