use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use weakbayes::estimators::{
    complex_wv, eta, reconstruct_state, tomography, tomography_best, wv_ratio_across_arms,
    xi_from_runs, ComplexShift,
};
use weakbayes::mc::ProtocolRuns;
use weakbayes::mzi::{port_probability, theoretical_weak_value, Arm, MziState, Port};
use weakbayes::probe::GaussianProbe;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn arb_state() -> impl Strategy<Value = MziState<f64>> {
    (0.15f64..1.4, 0.0f64..std::f64::consts::TAU)
        .prop_map(|(theta, phi)| MziState::new(c(theta.cos(), 0.0), Complex64::from_polar(theta.sin(), phi)).unwrap())
}

fn fidelity(a: &MziState<f64>, b: &MziState<f64>) -> f64 {
    (a.amplitude(Arm::B).conj() * b.amplitude(Arm::B) + a.amplitude(Arm::C).conj() * b.amplitude(Arm::C)).norm_sqr()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // First-order expected shifts: the ratio estimators carry no g.
    #[test]
    fn expected_shift_estimators_are_g_free(state in arb_state(), g in 0.005f64..0.02) {
        let probe = GaussianProbe::default();
        let n = 1_000_000;
        let xb = ComplexShift::expected(&state, Arm::B, g, &probe, n);
        let xc = ComplexShift::expected(&state, Arm::C, g, &probe, n);
        let tol = 10.0 * g * g;
        // First order needs g² ≪ P(port); near-dark ports are outside that regime.
        for port in Port::BOTH.into_iter().filter(|&p| port_probability::<f64>(&state, p) > 0.05) {
            let Ok(wv) = theoretical_weak_value(&state, Arm::B, port) else { continue };
            if let Ok(r) = complex_wv(&xb, &xc, port) {
                prop_assert!((r.point() - wv).norm() <= tol * (1.0 + wv.norm()), "{port:?}: {r:?} vs {wv}");
            }
        }
        let ratio = state.amplitude(Arm::C) / state.amplitude(Arm::B);
        let bright = if port_probability::<f64>(&state, Port::D) >= 0.5 { Port::D } else { Port::DPrime };
        let t = tomography(&xb, &xc, bright).unwrap();
        prop_assert!((t.point() - ratio).norm() <= tol * (1.0 + ratio.norm()));
        prop_assert!(eta(&xb).is_ok() || eta(&xc).is_ok());
    }

    #[test]
    fn shard_count_does_not_change_runs(state in arb_state(), seed in any::<u64>(), n in 1u64..3000, shards in 2usize..9) {
        let probe = GaussianProbe::default();
        let one = ProtocolRuns::run(&state, &probe, 0.1, n, seed, 1).unwrap();
        let many = ProtocolRuns::run(&state, &probe, 0.1, n, seed, shards).unwrap();
        prop_assert_eq!(one, many);
    }

    #[test]
    fn arm_ratios_sum_to_one(state in arb_state(), seed in any::<u64>()) {
        let probe = GaussianProbe::default();
        let runs = ProtocolRuns::run(&state, &probe, 0.05, 20_000, seed, 1).unwrap();
        for port in Port::BOTH {
            let b = wv_ratio_across_arms(runs.position(Arm::B), runs.position(Arm::C), port, Arm::B);
            let cc = wv_ratio_across_arms(runs.position(Arm::B), runs.position(Arm::C), port, Arm::C);
            if let (Ok(b), Ok(cc)) = (b, cc) {
                prop_assert_eq!(cc.point_re.to_bits(), (1.0 - b.point_re).to_bits());
            }
        }
    }
}

#[test]
fn tomography_round_trip_over_random_states() {
    let probe = GaussianProbe::default();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(314);
    let mut worst = 1.0f64;
    let states = 100;
    let mut inside = 0;
    for i in 0..states {
        let (beta, gamma) = loop {
            let b = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let g = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let n = (b.norm_sqr() + g.norm_sqr()).sqrt();
            if n > 0.1 && b.norm() / n >= 0.1 {
                break (b / n, g / n);
            }
        };
        let truth = MziState::new(beta, gamma).unwrap();
        let runs = ProtocolRuns::run(&truth, &probe, 0.05, 1_000_000, 1000 + i, 1).unwrap();
        let xb = xi_from_runs(runs.position(Arm::B), runs.momentum(Arm::B), &probe).unwrap();
        let xc = xi_from_runs(runs.position(Arm::C), runs.momentum(Arm::C), &probe).unwrap();
        let est = tomography_best(&xb, &xc).unwrap();
        let rec = reconstruct_state(est.point()).unwrap();
        worst = worst.min(fidelity(&rec, &truth));
        if est.within(gamma / beta, 4.0) {
            inside += 1;
        }
    }
    // Fidelity loss is pure sampling noise here, of order 1e-3 at N = 1e6;
    // the ratio itself must sit inside its error bars.
    assert_eq!(inside, states, "ratios outside 4 se");
    assert!(worst >= 0.98, "worst fidelity {worst}");
}
