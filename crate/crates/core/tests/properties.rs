use proptest::prelude::*;
use qgibbs::hamiltonian::EigenSystem;
use qgibbs::linalg::C64;
use qgibbs::qpe::{kernel_row, rounded_distribution};
use qgibbs::state::{CompressedState, FullState, RegisterLayout};

fn state_from(layout: RegisterLayout, raw: &[(f64, f64)]) -> CompressedState {
    let amps: Vec<C64> = raw.iter().map(|&(a, b)| C64::new(a, b)).collect();
    let n = amps.iter().map(C64::norm_sqr).sum::<f64>().sqrt().max(1e-300);
    CompressedState::from_amplitudes(layout, amps.into_iter().map(|z| z / n).collect()).unwrap()
}

fn amp_strategy(len: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len).prop_filter("nonzero", |v| v.iter().any(|&(a, b)| a.abs() + b.abs() > 1e-3))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unitaries_preserve_norm(raw in amp_strategy(4 * 4 * 4), axis_raw in amp_strategy(64), beta in 0.0f64..5.0, flag in 0u32..2) {
        let layout = RegisterLayout::grid(4, 2, 2, 1.5).unwrap();
        let mut s = state_from(layout.clone(), &raw);
        let axis = state_from(layout, &axis_raw);
        for _ in 0..5 {
            s.conditional_rotation(beta, flag).unwrap();
            s.reflect_flag(flag).unwrap();
            s.reflect_about(&axis).unwrap();
            s.phase_flag_zero(flag, C64::from_polar(1.0, std::f64::consts::FRAC_PI_3)).unwrap();
            s.phase_about(&axis, C64::from_polar(1.0, std::f64::consts::FRAC_PI_3)).unwrap();
        }
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn reflections_are_involutions(raw in amp_strategy(32), flag in 0u32..2) {
        let layout = RegisterLayout::grid(2, 2, 2, 1.0).unwrap();
        let s = state_from(layout, &raw);
        let mut t = s.clone();
        t.reflect_flag(flag).unwrap();
        t.reflect_flag(flag).unwrap();
        let mut u = s.clone();
        u.reflect_about(&s).unwrap();
        prop_assert!((u.inner(&s).unwrap().re + 1.0).abs() < 1e-12);
        prop_assert_eq!(t, s);
    }

    #[test]
    fn compress_expand_round_trip(raw in amp_strategy(3 * 4 * 2), e in prop::collection::vec(0.1f64..0.9, 3)) {
        let layout = RegisterLayout::grid(3, 2, 1, 1.0).unwrap();
        let s = state_from(layout.clone(), &raw);
        let eig = EigenSystem::diagonal(e);
        let back = FullState::expand(&s, &eig).unwrap().compress(layout, &eig).unwrap();
        let d: f64 = back.amplitudes().iter().zip(s.amplitudes()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(d < 1e-12);
    }

    #[test]
    fn kernel_rows_are_distributions(energy in 0.0f64..2.0, bits in 1u32..9) {
        let s: f64 = kernel_row(energy, bits, 2.0).iter().sum();
        prop_assert!((s - 1.0).abs() < 1e-12);
        let r: f64 = rounded_distribution(energy, bits.min(6), 4, 2.0).iter().sum();
        prop_assert!((r - 1.0).abs() < 1e-12);
    }
}

#[test]
fn ten_thousand_applications_keep_unit_norm() {
    let layout = RegisterLayout::grid(4, 2, 2, 1.5).unwrap();
    let raw: Vec<(f64, f64)> = (0..64).map(|i| ((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect();
    let mut s = state_from(layout.clone(), &raw);
    let axis = state_from(layout, &raw.iter().rev().copied().collect::<Vec<_>>());
    for k in 0..10_000 {
        match k % 3 {
            0 => s.conditional_rotation(0.3, (k % 2) as u32).unwrap(),
            1 => s.reflect_about(&axis).unwrap(),
            _ => s.reflect_flag((k % 2) as u32).unwrap(),
        }
    }
    assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
}

#[test]
fn identical_inputs_give_identical_amplitudes() {
    use qgibbs::gibbs::{prepare_purified_gibbs, PrepareOptions};
    use qgibbs::hamiltonian::{build_ising, eigendecompose, shift_positive, Boundary, ShiftPolicy, DEFAULT_DENSE_LIMIT};
    let h = shift_positive(&build_ising(2, 1.0, 1.0, Boundary::Open, DEFAULT_DENSE_LIMIT).unwrap(), ShiftPolicy::ExactGround).unwrap();
    let eig = eigendecompose(&h).unwrap();
    let run = || prepare_purified_gibbs(&eig, &eig.energies, h.emax(), 0.5, 0.2, &PrepareOptions::default()).unwrap().0;
    let (a, b) = (run(), run());
    let bits = |s: &CompressedState| s.amplitudes().iter().flat_map(|z| [z.re.to_bits(), z.im.to_bits()]).collect::<Vec<_>>();
    assert_eq!(bits(&a.state), bits(&b.state));
}

#[test]
fn kernel_row_sums_near_grid() {
    for energy in [0.8750833101841676, 0.875 + 1e-7, 0.875 + 1e-9] {
        let s: f64 = kernel_row(energy, 7, 2.0).iter().sum();
        assert!((s - 1.0).abs() < 1e-12, "{energy}: {s}");
    }
}
