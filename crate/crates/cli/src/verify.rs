use std::fmt;

use duality_core::lcu::BlockEncoding;
use duality_core::lcu::{
    apply_direct, make_duality_gate, run_duality_circuit, Divider, LcuCircuit,
};
use duality_core::numerics::log_log_slope;
use duality_core::pauli::{alpha_normalize, parse_hamiltonian};
use duality_core::product_formulas::{multiproduct_gate, multiproduct_params, suzuki};
use duality_core::taylor::{
    build_segment_circuit, oaa_round_with, plan_segments, taylor_gate, Backend, SegmentPlan,
};
use duality_core::tolerance::Tolerances;
use duality_core::{
    expm_hermitian, random, spectral_norm, tensor, DenseOperator, HamiltonianSpec, SimError,
    Statevector, C64,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CliError, Result};

pub const SUITES: [&str; 7] = [
    "numerics",
    "pauli",
    "lcu",
    "product-formulas",
    "slopes",
    "taylor",
    "all",
];

const THREE_TERM: &str = "1.0 ZZ\n0.5 XI\n0.5 IX";

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub measured: f64,
    /// Human-readable acceptance condition.
    pub bound: String,
    pub pass: bool,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}: {} = {:.6e} (want {})",
            if self.pass { "PASS" } else { "FAIL" },
            self.suite,
            self.name,
            self.measured,
            self.bound
        )
    }
}

fn at_most(suite: &'static str, name: &str, measured: f64, tol: f64) -> Check {
    Check {
        suite,
        name: name.to_string(),
        measured,
        bound: format!("≤ {tol:.1e}"),
        pass: measured <= tol,
    }
}

fn near(suite: &'static str, name: &str, measured: f64, nominal: f64, tol: f64) -> Check {
    Check {
        suite,
        name: name.to_string(),
        measured,
        bound: format!("{nominal} ± {tol}"),
        pass: (measured - nominal).abs() <= tol,
    }
}

fn failed(suite: &'static str, name: &str, err: SimError) -> Check {
    Check {
        suite,
        name: format!("{name} ({err})"),
        measured: f64::NAN,
        bound: "no error".into(),
        pass: false,
    }
}

fn three_term() -> HamiltonianSpec {
    HamiltonianSpec::parse(THREE_TERM).expect("built-in spec parses")
}

/// Runs one suite, or every suite for `"all"`.
pub fn verify(suite: &str, tol: &Tolerances, seed: u64) -> Result<Vec<Check>> {
    let names: Vec<&str> = match suite {
        "all" => SUITES[..SUITES.len() - 1].to_vec(),
        s if SUITES.contains(&s) => vec![s],
        other => {
            return Err(CliError::Usage(format!(
                "unknown suite `{other}`; expected one of {}",
                SUITES.join(", ")
            )))
        }
    };
    let mut checks = Vec::new();
    for name in names {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let result = match name {
            "numerics" => numerics(tol, &mut rng),
            "pauli" => pauli(tol),
            "lcu" => lcu(tol, &mut rng),
            "product-formulas" => product_formulas(tol),
            "slopes" => slopes(tol),
            _ => taylor(tol, &mut rng),
        };
        match result {
            Ok(mut c) => checks.append(&mut c),
            Err(e) => checks.push(failed(static_name(name), "suite aborted", e)),
        }
    }
    Ok(checks)
}

fn static_name(name: &str) -> &'static str {
    SUITES
        .iter()
        .copied()
        .find(|s| *s == name)
        .unwrap_or("unknown")
}

type Checks = std::result::Result<Vec<Check>, SimError>;

fn numerics(tol: &Tolerances, rng: &mut ChaCha8Rng) -> Checks {
    const S: &str = "numerics";
    let (mut unit, mut group, mut herm) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..20 {
        let h = random::hermitian(8, rng);
        herm = herm.max(h.hermiticity_deviation());
        let u = expm_hermitian(&h, 0.7)?;
        unit = unit.max(u.unitarity_deviation());
        let split = &expm_hermitian(&h, 0.3)? * &expm_hermitian(&h, 0.4)?;
        group = group.max(split.max_abs_diff(&u));
    }
    let a = random::unitary(2, rng);
    let b = random::unitary(4, rng);
    let c = random::unitary(2, rng);
    let d = random::unitary(4, rng);
    let mixed =
        (&tensor(&a, &b)? * &tensor(&c, &d)?).max_abs_diff(&tensor(&(&a * &c), &(&b * &d))?);
    let norm = spectral_norm(&tensor(&a.scale_real(2.0), &b)?)?;
    Ok(vec![
        at_most(S, "random Hermitian deviation", herm, tol.unitarity),
        at_most(S, "expm unitarity deviation", unit, tol.unitarity),
        at_most(S, "expm group property", group, tol.unitarity),
        at_most(S, "tensor mixed product", mixed, tol.unitarity),
        at_most(S, "‖2U⊗V‖ − 2", (norm - 2.0).abs(), tol.unitarity),
    ])
}

fn pauli(tol: &Tolerances) -> Checks {
    const S: &str = "pauli";
    let spec = HamiltonianSpec::parse("0.7 XYZ\n-0.4 ZZI\n1.1 IYX\n0.25 III")?;
    let recon = spec
        .terms()
        .iter()
        .fold(DenseOperator::zeros(spec.dim()), |acc, t| {
            &acc + &t.unitary.scale_real(t.alpha)
        });
    let alpha_sum = alpha_normalize(&parse_hamiltonian(THREE_TERM)?)?.g();
    let mut worst_unitary = 0.0f64;
    let mut worst_herm = 0.0f64;
    for t in spec.terms() {
        worst_unitary = worst_unitary.max(t.unitary.unitarity_deviation());
        worst_herm = worst_herm.max(t.unitary.hermiticity_deviation());
    }
    Ok(vec![
        at_most(
            S,
            "Σ α_ℓ H_ℓ − H",
            recon.max_abs_diff(&spec.matrix()),
            tol.equality,
        ),
        at_most(S, "term unitarity deviation", worst_unitary, tol.equality),
        at_most(S, "term hermiticity deviation", worst_herm, tol.equality),
        at_most(S, "|Σ α_ℓ − 2|", (alpha_sum - 2.0).abs(), tol.equality),
    ])
}

fn lcu(tol: &Tolerances, rng: &mut ChaCha8Rng) -> Checks {
    const S: &str = "lcu";
    let (mut fid, mut prob) = (0.0f64, 0.0f64);
    for trial in 0..100usize {
        let d = 1 + trial % 8;
        let dim = 1 << (1 + trial % 4);
        let coeffs = random::coefficients(d, 0.95, rng);
        let unitaries = (0..d).map(|_| random::unitary(dim, rng)).collect();
        let gate = make_duality_gate(coeffs, unitaries)?;
        let psi = random::state(vec![dim], rng);
        let direct = apply_direct(&gate, &psi)?;
        let expected = direct.norm_squared() / gate.s_bar().powi(2);
        let out = run_duality_circuit(&gate, &psi, &Divider::Default)?;
        fid = fid.max(
            1.0 - out
                .state
                .fidelity(&Statevector::normalized(direct, vec![dim])?),
        );
        prob = prob.max((out.success_prob - expected).abs());
    }
    let z = DenseOperator::from_real_rows(2, &[1.0, 0.0, 0.0, -1.0])?;
    let half = C64::new(0.5, 0.0);
    let projector = make_duality_gate(vec![half, half], vec![DenseOperator::identity(2), z])?;
    let zero_wave = matches!(
        run_duality_circuit(
            &projector,
            &Statevector::basis(vec![2], 1)?,
            &Divider::Default
        ),
        Err(SimError::ZeroWaveOutcome { .. })
    );
    Ok(vec![
        at_most(
            S,
            "circuit≡direct fidelity deficit (100 gates)",
            fid,
            tol.fidelity,
        ),
        at_most(
            S,
            "circuit≡direct success_prob deviation",
            prob,
            tol.fidelity,
        ),
        Check {
            suite: S,
            name: "zero-wave outcome reported".into(),
            measured: if zero_wave { 1.0 } else { 0.0 },
            bound: "1".into(),
            pass: zero_wave,
        },
    ])
}

fn product_formulas(tol: &Tolerances) -> Checks {
    const S: &str = "product-formulas";
    let mut weight_sum = 0.0f64;
    for k in 1..=4 {
        for gamma in [0.6, 0.8, 1.0] {
            let p = multiproduct_params(k, gamma)?;
            weight_sum = weight_sum.max((p.coeffs.iter().sum::<f64>() - 1.0).abs());
        }
    }
    let spec = three_term();
    let mut unit = 0.0f64;
    for chi in 1..=3 {
        unit = unit.max(suzuki(&spec, 0.3, chi)?.unitarity_deviation());
    }
    Ok(vec![
        at_most(S, "max |Σ C_q − 1|", weight_sum, tol.equality),
        at_most(S, "S_χ unitarity deviation", unit, tol.unitarity),
    ])
}

fn slope(
    spec: &HamiltonianSpec,
    ts: &[f64],
    approx: impl Fn(f64) -> std::result::Result<DenseOperator, SimError>,
) -> std::result::Result<f64, SimError> {
    let h = spec.matrix();
    let mut errors = Vec::with_capacity(ts.len());
    for &t in ts {
        errors.push(spectral_norm(&(&approx(t)? - &expm_hermitian(&h, t)?))?);
    }
    log_log_slope(ts, &errors)
}

fn slopes(tol: &Tolerances) -> Checks {
    const S: &str = "slopes";
    let spec = three_term();
    let low = [0.05, 0.1, 0.2, 0.4];
    let high: Vec<f64> = (0..5).map(|i| 0.2 * 2f64.powf(i as f64 / 2.0)).collect();
    let mp = |k: u32| {
        let spec = &spec;
        move |t: f64| {
            let (gate, scale) = multiproduct_gate(spec, t, k, 0.8)?;
            Ok(gate.matrix().scale_real(scale))
        }
    };
    Ok(vec![
        near(
            S,
            "S_1 slope",
            slope(&spec, &low, |t| suzuki(&spec, t, 1))?,
            3.0,
            tol.slope,
        ),
        near(
            S,
            "S_2 slope",
            slope(&spec, &low, |t| suzuki(&spec, t, 2))?,
            5.0,
            tol.slope,
        ),
        near(S, "M_11 slope", slope(&spec, &low, mp(1))?, 5.0, tol.slope),
        near(
            S,
            "M_22 slope",
            slope(&spec, &high, mp(2))?,
            9.0,
            tol.high_order_slope,
        ),
    ])
}

fn taylor(tol: &Tolerances, rng: &mut ChaCha8Rng) -> Checks {
    const S: &str = "taylor";
    let spec = three_term();
    let mut identity = 0.0f64;
    for order in 0..=4 {
        let plan = SegmentPlan::with_order(&spec, 0.3, 1, order)?;
        let a = spec.matrix().scale(C64::new(0.0, -0.3));
        let mut term = DenseOperator::identity(4);
        let mut partial = term.clone();
        for k in 1..=order {
            term = (&term * &a).scale_real(1.0 / k as f64);
            partial = &partial + &term;
        }
        identity = identity.max(taylor_gate(&spec, &plan)?.matrix().max_abs_diff(&partial));
    }
    let mut checks = vec![at_most(
        S,
        "Σβ_jV_j − Taylor partial sum",
        identity,
        tol.equality,
    )];
    for eps in [1e-4, 1e-6] {
        let plan = plan_segments(&spec, 1.0, eps)?;
        let err = spectral_norm(
            &(&taylor_gate(&spec, &plan)?.matrix() - &expm_hermitian(&spec.matrix(), plan.tau)?),
        )?;
        checks.push(at_most(
            S,
            &format!("segment error at ε={eps:.0e}"),
            err,
            eps / plan.r as f64,
        ));
    }
    let u = random::unitary(4, rng);
    let omega = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    let circ = LcuCircuit::new(vec![1.0, 1.0], vec![u.clone(), u.scale(omega)])?;
    let psi = random::state(vec![4], rng);
    let p = oaa_round_with(&circ, &psi, Backend::Register)?.success_prob;
    checks.push(at_most(
        S,
        "OAA at s=2: |p − 1|",
        (p - 1.0).abs(),
        tol.fidelity,
    ));
    let strings = ["XI", "IX", "ZZ", "YY", "XZ", "ZX", "YI", "IY"];
    let count = |l: usize| -> std::result::Result<usize, SimError> {
        let text: Vec<String> = strings[..l].iter().map(|s| format!("0.25 {s}")).collect();
        let spec = HamiltonianSpec::parse(&text.join("\n"))?;
        let plan = SegmentPlan::with_order(&spec, 0.1, 1, 3)?;
        Ok(build_segment_circuit(&spec, &plan)?.gate_count())
    };
    let ratio = count(8)? as f64 / count(4)? as f64;
    checks.push(Check {
        suite: S,
        name: "gate count ratio L=8 / L=4".into(),
        measured: ratio,
        bound: "in [1.8, 2.6]".into(),
        pass: (1.8..=2.6).contains(&ratio),
    });
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;
    const DEFAULT: Tolerances = Tolerances::DEFAULT;

    #[test]
    fn unknown_suite_is_usage_error() {
        assert!(matches!(
            verify("nosuch", &DEFAULT, 1),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn lcu_suite_passes() {
        let checks = verify("lcu", &DEFAULT, 7).unwrap();
        assert!(checks.iter().all(|c| c.pass), "{checks:?}");
        assert!(checks
            .iter()
            .any(|c| c.to_string().contains("circuit≡direct fidelity")));
    }

    #[test]
    fn slopes_suite_reports_four() {
        let checks = verify("slopes", &DEFAULT, 7).unwrap();
        assert_eq!(checks.len(), 4);
        assert!(checks[..3].iter().all(|c| c.pass));
    }
}
