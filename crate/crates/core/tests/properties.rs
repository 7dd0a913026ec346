use duality_core::lcu::{
    apply_direct, make_duality_gate, run_duality_circuit, BlockEncoding, Divider,
};
use duality_core::numerics::log_log_slope;
use duality_core::product_formulas::{multiproduct_gate, simulate_multiproduct, suzuki};
use duality_core::taylor::{
    build_segment_circuit, index_set_size, plan_segments, simulate_taylor, simulate_taylor_with,
    taylor_gate, Backend, SegmentPlan,
};
use duality_core::{
    expm_hermitian, random, spectral_norm, DenseOperator, HamiltonianSpec, Statevector, C64,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn three_term() -> HamiltonianSpec {
    HamiltonianSpec::parse("1.0 ZZ\n0.5 XI\n0.5 IX").unwrap()
}

fn slope<F: Fn(f64) -> DenseOperator>(spec: &HamiltonianSpec, ts: &[f64], approx: F) -> f64 {
    let h = spec.matrix();
    let errs: Vec<f64> = ts
        .iter()
        .map(|&t| spectral_norm(&(&approx(t) - &expm_hermitian(&h, t).unwrap())).unwrap())
        .collect();
    log_log_slope(ts, &errs).unwrap()
}

fn taylor_partial(spec: &HamiltonianSpec, tau: f64, order: usize) -> DenseOperator {
    let a = spec.matrix().scale(C64::new(0.0, -tau));
    let mut term = DenseOperator::identity(spec.dim());
    let mut sum = term.clone();
    for k in 1..=order {
        term = (&term * &a).scale_real(1.0 / k as f64);
        sum = &sum + &term;
    }
    sum
}

fn spec_strategy() -> impl Strategy<Value = HamiltonianSpec> {
    (1usize..=3).prop_flat_map(|n| {
        prop::collection::vec(
            (
                prop_oneof![-1.5f64..-0.1, 0.1f64..1.5],
                prop::collection::vec(prop::sample::select(vec!['I', 'X', 'Y', 'Z']), n),
            ),
            1..=3,
        )
        .prop_map(|terms| {
            let text: Vec<String> = terms
                .into_iter()
                .map(|(c, s)| format!("{c} {}", s.into_iter().collect::<String>()))
                .collect();
            HamiltonianSpec::parse(&text.join("\n")).unwrap()
        })
    })
}

#[test]
fn low_order_slopes() {
    let spec = three_term();
    let ts = [0.05, 0.1, 0.2, 0.4];
    let s1 = slope(&spec, &ts, |t| suzuki(&spec, t, 1).unwrap());
    let s2 = slope(&spec, &ts, |t| suzuki(&spec, t, 2).unwrap());
    let m11 = slope(&spec, &ts, |t| {
        let (g, scale) = multiproduct_gate(&spec, t, 1, 0.8).unwrap();
        g.matrix().scale_real(scale)
    });
    assert!((s1 - 3.0).abs() <= 0.3, "S_1 slope {s1}");
    assert!((s2 - 5.0).abs() <= 0.3, "S_2 slope {s2}");
    assert!((m11 - 5.0).abs() <= 0.3, "M_11 slope {m11}");
}

/// The Lagrange weights cancel the first k even error orders of S_k, which
/// leaves a t^{2k+3} leading error. Guards against silent changes to the
/// weights or step counts.
#[test]
fn m22_measured_slope_is_seven() {
    let spec = three_term();
    let ts: Vec<f64> = (0..5).map(|i| 0.2 * 2f64.powf(i as f64 / 2.0)).collect();
    let m22 = slope(&spec, &ts, |t| {
        let (g, scale) = multiproduct_gate(&spec, t, 2, 0.8).unwrap();
        g.matrix().scale_real(scale)
    });
    assert!((m22 - 7.0).abs() <= 0.3, "M_22 slope {m22}");
}

#[test]
fn multiproduct_simulation_converges_in_r() {
    let spec = three_term();
    let psi = random::state(vec![4], &mut ChaCha8Rng::seed_from_u64(3));
    let errs: Vec<f64> = [1, 2, 4]
        .iter()
        .map(|&r| {
            simulate_multiproduct(&spec, 1.0, r, 1, 0.8, &psi)
                .unwrap()
                .error_vs_oracle
        })
        .collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    let run = simulate_multiproduct(&spec, 1.0, 4, 1, 0.8, &psi).unwrap();
    assert!(run.cumulative_success > 0.0 && run.cumulative_success <= 1.0);
    assert_eq!(run.success_probs.len(), 4);
}

#[test]
fn lcu_circuit_matches_direct_over_seeds() {
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = 1 + (seed as usize % 8);
        let dim = 1 << (1 + seed as usize % 4);
        let coeffs = random::coefficients(d, 0.9, &mut rng);
        let unitaries = (0..d).map(|_| random::unitary(dim, &mut rng)).collect();
        let gate = make_duality_gate(coeffs, unitaries).unwrap();
        let psi = random::state(vec![dim], &mut rng);
        let direct = apply_direct(&gate, &psi).unwrap();
        let p = direct.norm_squared() / gate.s_bar().powi(2);
        let out = run_duality_circuit(&gate, &psi, &Divider::Default).unwrap();
        let expected = Statevector::normalized(direct, vec![dim]).unwrap();
        assert!(1.0 - out.state.fidelity(&expected) <= 1e-10, "seed {seed}");
        assert!((out.success_prob - p).abs() <= 1e-10, "seed {seed}");
    }
}

#[test]
fn per_segment_error_within_budget() {
    let specs = ["1.0 ZZ\n0.5 XI\n0.5 IX", "0.5 Z", "0.3 XY\n-0.8 ZI\n0.2 YY"];
    for text in specs {
        let spec = HamiltonianSpec::parse(text).unwrap();
        for (t, eps) in [(0.5, 1e-5), (1.0, 1e-6), (2.0, 1e-4)] {
            let plan = plan_segments(&spec, t, eps).unwrap();
            let explicit = taylor_gate(&spec, &plan).unwrap().matrix();
            let exact = expm_hermitian(&spec.matrix(), plan.tau).unwrap();
            let err = spectral_norm(&(&explicit - &exact)).unwrap();
            assert!(err <= eps / plan.r as f64, "{text} t={t}: {err}");
            assert!(plan.s <= 2.0 + 1e-12);
        }
    }
}

#[test]
fn taylor_backends_agree_end_to_end() {
    let spec = three_term();
    let psi = random::state(vec![4], &mut ChaCha8Rng::seed_from_u64(9));
    let reg = simulate_taylor_with(&spec, 0.3, 1e-3, &psi, Backend::Register).unwrap();
    let con = simulate_taylor_with(&spec, 0.3, 1e-3, &psi, Backend::Contracted).unwrap();
    assert!(reg.state.distance(&con.state) < 1e-10);
    assert!(reg.diagnostics.total_error <= 1e-3);
}

#[test]
fn taylor_order_grows_sublinearly() {
    let spec = three_term();
    let orders: Vec<usize> = [1e-2, 1e-4, 1e-8, 1e-12]
        .iter()
        .map(|&eps| plan_segments(&spec, 1.0, eps).unwrap().order)
        .collect();
    assert!(orders.windows(2).all(|w| w[0] <= w[1]), "{orders:?}");
    // log(1/ε) grows 6x from 1e-2 to 1e-12; K must grow by less.
    assert!((orders[3] as f64) < 6.0 * orders[0] as f64, "{orders:?}");
}

#[test]
fn gate_count_ratio_for_doubled_terms() {
    let strings = ["XI", "IX", "ZZ", "YY", "XZ", "ZX", "YI", "IY"];
    for order in 1..=5 {
        let count = |l: usize| {
            let text: Vec<String> = strings[..l].iter().map(|s| format!("0.25 {s}")).collect();
            let spec = HamiltonianSpec::parse(&text.join("\n")).unwrap();
            let plan = SegmentPlan::with_order(&spec, 0.1, 1, order).unwrap();
            build_segment_circuit(&spec, &plan).unwrap().gate_count()
        };
        let ratio = count(8) as f64 / count(4) as f64;
        assert!((1.8..=2.6).contains(&ratio), "K={order}: {ratio}");
    }
}

#[test]
fn index_set_size_matches_enumeration() {
    let spec = three_term();
    for order in 0..=4 {
        let plan = SegmentPlan::with_order(&spec, 0.2, 1, order).unwrap();
        let gate = taylor_gate(&spec, &plan).unwrap();
        assert_eq!(Some(gate.len()), index_set_size(3, order));
    }
}

#[test]
fn zero_time_is_identity() {
    let spec = three_term();
    let psi = random::state(vec![4], &mut ChaCha8Rng::seed_from_u64(1));
    let run = simulate_taylor(&spec, 0.0, 1e-6, &psi).unwrap();
    assert!(run.state.distance(&psi) < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn taylor_gate_is_partial_sum(spec in spec_strategy(), order in 0usize..=4, tau in 0.05f64..0.6) {
        let plan = SegmentPlan::with_order(&spec, tau, 1, order).unwrap();
        let gate = taylor_gate(&spec, &plan).unwrap();
        prop_assert!(gate.matrix().max_abs_diff(&taylor_partial(&spec, tau, order)) <= 1e-12);
        prop_assert!((gate.normalization() - plan.s).abs() <= 1e-12);
    }

    #[test]
    fn segment_block_is_gate_over_s(spec in spec_strategy(), order in 0usize..=3, tau in 0.05f64..0.6) {
        let plan = SegmentPlan::with_order(&spec, tau, 1, order).unwrap();
        let circ = build_segment_circuit(&spec, &plan).unwrap();
        let expected = taylor_partial(&spec, tau, order).scale_real(1.0 / plan.s);
        prop_assert!(circ.block().max_abs_diff(&expected) <= 1e-12);
    }

    #[test]
    fn multiproduct_scaled_gate_tracks_propagator(spec in spec_strategy(), t in 0.01f64..0.1) {
        let (gate, scale) = multiproduct_gate(&spec, t, 1, 0.8).unwrap();
        let exact = expm_hermitian(&spec.matrix(), t).unwrap();
        let err = spectral_norm(&(&gate.matrix().scale_real(scale) - &exact)).unwrap();
        // Leading error is O((g t)^5) with a modest constant.
        prop_assert!(err <= 1e-2 * (spec.g() * t).powi(5) + 1e-13, "err {}", err);
    }
}
