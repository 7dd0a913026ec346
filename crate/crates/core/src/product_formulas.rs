//! Suzuki product formulas and multi-product formulas realized as
//! generalized gates.

use crate::error::{Result, SimError};
use crate::lcu::{make_scaled_gate, run_duality_circuit, Divider, GeneralizedGate};
use crate::numerics::{expm_hermitian, DenseOperator, Statevector, C64};
use crate::pauli::{HamiltonianSpec, WeightedUnitary};
use crate::tolerance;

/// Largest `ℓ_{k+1}` accepted; `S_k(t/ℓ)^ℓ` costs `ℓ` products.
pub const MAX_ELL: u64 = 1 << 20;

/// Default `γ` for the last multi-product step count `⌈e^{γ(k+1)}⌉`.
pub const DEFAULT_GAMMA: f64 = 0.8;

/// `e^{-iα H_ℓ t}` in closed form; `H_ℓ` is an involution.
fn term_exponential(term: &WeightedUnitary, t: f64) -> DenseOperator {
    let theta = term.alpha * t;
    let dim = term.unitary.dim();
    &DenseOperator::identity(dim).scale_real(theta.cos())
        + &term.unitary.scale(C64::new(0.0, -theta.sin()))
}

/// `s_{χ−1} = (4 − 4^{1/(2χ−1)})^{−1}`, the outer step fraction used when
/// building `S_χ` from `S_{χ−1}`.
pub fn suzuki_parameter(chi: u32) -> f64 {
    1.0 / (4.0 - 4f64.powf(1.0 / (2.0 * chi as f64 - 1.0)))
}

/// Symmetric Suzuki formula `S_χ(t)` of order `2χ`.
pub fn suzuki(spec: &HamiltonianSpec, t: f64, chi: u32) -> Result<DenseOperator> {
    if chi < 1 {
        return Err(SimError::Parameter("chi must be at least 1".into()));
    }
    if !t.is_finite() {
        return Err(SimError::Numeric {
            context: "suzuki time",
        });
    }
    Ok(suzuki_unchecked(spec, t, chi))
}

fn suzuki_unchecked(spec: &HamiltonianSpec, t: f64, chi: u32) -> DenseOperator {
    if chi == 1 {
        let terms = spec.terms();
        let mut u = DenseOperator::identity(spec.dim());
        for term in terms.iter().chain(terms.iter().rev()) {
            u = &u * &term_exponential(term, t / 2.0);
        }
        return u;
    }
    let s = suzuki_parameter(chi);
    let outer = suzuki_unchecked(spec, s * t, chi - 1);
    let middle = suzuki_unchecked(spec, (1.0 - 4.0 * s) * t, chi - 1);
    let outer2 = &outer * &outer;
    &(&outer2 * &middle) * &outer2
}

/// Number of term exponentials in one `S_χ`.
pub fn suzuki_exponential_count(num_terms: usize, chi: u32) -> usize {
    2 * num_terms * 5usize.pow(chi.saturating_sub(1))
}

/// Step counts `ℓ_q` and weights `C_q` of `M_{k,k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiProductParams {
    pub k: u32,
    pub gamma: f64,
    pub ells: Vec<u64>,
    pub coeffs: Vec<f64>,
}

impl MultiProductParams {
    /// `Σ|C_q|`, the factor by which `M_{k,k}` overshoots a valid gate.
    pub fn abs_sum(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }
}

/// `ℓ_q = q` for `q ≤ k`, `ℓ_{k+1} = ⌈e^{γ(k+1)}⌉`, and Lagrange weights
/// `C_q = Π_{j≠q} ℓ_q² / (ℓ_q² − ℓ_j²)` over the actual step counts.
pub fn multiproduct_params(k: u32, gamma: f64) -> Result<MultiProductParams> {
    if k < 1 {
        return Err(SimError::Parameter("k must be at least 1".into()));
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(SimError::Parameter(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    let last = (gamma * (k as f64 + 1.0)).exp().ceil();
    if last > MAX_ELL as f64 {
        return Err(SimError::Parameter(format!(
            "ℓ_(k+1) = {last} exceeds the supported maximum {MAX_ELL}"
        )));
    }
    let last = last as u64;
    if last <= k as u64 {
        return Err(SimError::Parameter(format!(
            "ℓ_(k+1) = {last} collides with 1..={k}; increase gamma"
        )));
    }
    let ells: Vec<u64> = (1..=k as u64).chain(std::iter::once(last)).collect();
    let coeffs: Vec<f64> = ells
        .iter()
        .map(|&lq| {
            let lq2 = (lq * lq) as f64;
            ells.iter()
                .filter(|&&lj| lj != lq)
                .map(|&lj| lq2 / (lq2 - (lj * lj) as f64))
                .product()
        })
        .collect();
    let sum: f64 = coeffs.iter().sum();
    if (sum - 1.0).abs() > tolerance::EQUALITY {
        return Err(SimError::Numeric {
            context: "multi-product weights do not sum to one",
        });
    }
    Ok(MultiProductParams {
        k,
        gamma,
        ells,
        coeffs,
    })
}

/// `M_{k,k}(t)` as a gate with weights `C_q / Σ|C_q|` over the unitaries
/// `S_k(t/ℓ_q)^{ℓ_q}`, plus the scale `Σ|C_q|`.
pub fn multiproduct_gate(
    spec: &HamiltonianSpec,
    t: f64,
    k: u32,
    gamma: f64,
) -> Result<(GeneralizedGate, f64)> {
    let params = multiproduct_params(k, gamma)?;
    multiproduct_gate_with(spec, t, &params)
}

pub fn multiproduct_gate_with(
    spec: &HamiltonianSpec,
    t: f64,
    params: &MultiProductParams,
) -> Result<(GeneralizedGate, f64)> {
    let unitaries = params
        .ells
        .iter()
        .map(|&l| Ok(suzuki(spec, t / l as f64, params.k)?.pow(l)))
        .collect::<Result<Vec<_>>>()?;
    let coeffs = params.coeffs.iter().map(|&c| C64::new(c, 0.0)).collect();
    make_scaled_gate(coeffs, unitaries)
}

/// Term exponentials needed for one application of `M_{k,k}`.
pub fn multiproduct_exponential_count(num_terms: usize, params: &MultiProductParams) -> usize {
    let per = suzuki_exponential_count(num_terms, params.k);
    params.ells.iter().map(|&l| l as usize * per).sum()
}

/// Result of [`simulate_multiproduct`].
#[derive(Debug, Clone, PartialEq)]
pub struct MultiproductRun {
    pub state: Statevector,
    /// Product of the per-segment post-selection probabilities.
    pub cumulative_success: f64,
    pub success_probs: Vec<f64>,
    /// `‖ψ_out − e^{−iHt}ψ‖`.
    pub error_vs_oracle: f64,
}

/// Applies the `M_{k,k}(t/r)` duality circuit `r` times, post-selecting and
/// renormalizing after every segment.
pub fn simulate_multiproduct(
    spec: &HamiltonianSpec,
    t: f64,
    r: usize,
    k: u32,
    gamma: f64,
    psi: &Statevector,
) -> Result<MultiproductRun> {
    if r < 1 {
        return Err(SimError::Parameter(
            "segment count r must be at least 1".into(),
        ));
    }
    let (gate, _scale) = multiproduct_gate(spec, t / r as f64, k, gamma)?;
    let mut state = psi.clone();
    let mut success_probs = Vec::with_capacity(r);
    for segment in 0..r {
        let out = run_duality_circuit(&gate, &state, &Divider::Default).map_err(|e| match e {
            SimError::ZeroWaveOutcome { probability, .. } => SimError::ZeroWaveOutcome {
                probability,
                segment: Some(segment),
            },
            other => other,
        })?;
        success_probs.push(out.success_prob);
        state = out.state;
    }
    let exact = expm_hermitian(&spec.matrix(), t)?.apply(psi.amplitudes())?;
    let error_vs_oracle = (state.amplitudes() - exact).norm();
    Ok(MultiproductRun {
        state,
        cumulative_success: success_probs.iter().product(),
        success_probs,
        error_vs_oracle,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lcu::apply_direct;
    use crate::numerics::spectral_norm;
    use crate::random;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const THREE_TERM: &str = "1.0 ZZ\n0.5 XI\n0.5 IX";

    fn spec() -> HamiltonianSpec {
        HamiltonianSpec::parse(THREE_TERM).unwrap()
    }

    fn oracle_error(u: &DenseOperator, spec: &HamiltonianSpec, t: f64) -> f64 {
        let exact = expm_hermitian(&spec.matrix(), t).unwrap();
        spectral_norm(&(u - &exact)).unwrap()
    }

    #[test]
    fn single_term_s1_is_exact() {
        let s = HamiltonianSpec::parse("0.7 XY").unwrap();
        for &t in &[0.3, 1.7, -2.2] {
            let u = suzuki(&s, t, 1).unwrap();
            assert!(oracle_error(&u, &s, t) < 1e-12);
        }
    }

    #[test]
    fn zero_time_is_identity() {
        for chi in 1..=3 {
            let u = suzuki(&spec(), 0.0, chi).unwrap();
            assert!(u.max_abs_diff(&DenseOperator::identity(4)) < 1e-15);
        }
        assert!(matches!(
            suzuki(&spec(), 0.1, 0),
            Err(SimError::Parameter(_))
        ));
    }

    #[test]
    fn suzuki_parameter_value() {
        let s1 = suzuki_parameter(2);
        assert!((s1 - 1.0 / (4.0 - 4f64.cbrt())).abs() < 1e-15);
        assert!((s1 - 0.414490771794375).abs() < 1e-12);
    }

    #[test]
    fn suzuki_unitary_and_time_reversal() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..4 {
            let terms: Vec<String> = (0..3)
                .map(|i| {
                    let letters = ["XY", "ZI", "YY", "IX", "ZX"];
                    format!(
                        "{} {}",
                        0.3 + 0.2 * i as f64,
                        letters[rand::Rng::random_range(&mut rng, 0..5)]
                    )
                })
                .collect();
            let s = HamiltonianSpec::parse(&terms.join("\n")).unwrap();
            for chi in 1..=3 {
                for &t in &[0.4, -0.9, 1.0] {
                    let u = suzuki(&s, t, chi).unwrap();
                    assert!(u.unitarity_deviation() < 1e-10);
                    let back = suzuki(&s, -t, chi).unwrap();
                    assert!(back.max_abs_diff(&u.adjoint()) < 1e-10);
                }
            }
        }
    }

    #[test]
    fn k1_params_by_hand() {
        let p = multiproduct_params(1, 0.8).unwrap();
        assert_eq!(p.ells, vec![1, 5]);
        assert!((p.coeffs[0] + 1.0 / 24.0).abs() < 1e-15);
        assert!((p.coeffs[1] - 25.0 / 24.0).abs() < 1e-15);
        assert!((p.abs_sum() - 26.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn coefficient_identity_and_collisions() {
        for k in 1..=4 {
            for &gamma in &[0.6, 0.8, 1.0] {
                let p = multiproduct_params(k, gamma).unwrap();
                let sum: f64 = p.coeffs.iter().sum();
                assert!((sum - 1.0).abs() <= 1e-12);
                assert_eq!(p.ells.len(), k as usize + 1);
            }
        }
        assert_eq!(multiproduct_params(1, 0.05).unwrap().ells, vec![1, 2]);
        assert!(matches!(
            multiproduct_params(2, 0.05),
            Err(SimError::Parameter(_))
        ));
        assert!(matches!(
            multiproduct_params(0, 0.8),
            Err(SimError::Parameter(_))
        ));
        assert!(matches!(
            multiproduct_params(1, -1.0),
            Err(SimError::Parameter(_))
        ));
    }

    /// Unrounded weights as written in closed form, valid when
    /// `ℓ_{k+1} = e^{γ(k+1)}` exactly.
    fn closed_form_weights(k: u32, gamma: f64) -> Vec<f64> {
        let e2 = (2.0 * gamma * (k as f64 + 1.0)).exp();
        let mut out: Vec<f64> = (1..=k)
            .map(|q| {
                let q2 = (q * q) as f64;
                let rest: f64 = (1..=k)
                    .filter(|&j| j != q)
                    .map(|j| q2 / (q2 - (j * j) as f64))
                    .product();
                q2 / (q2 - e2) * rest
            })
            .collect();
        out.push((1..=k).map(|j| e2 / (e2 - (j * j) as f64)).product());
        out
    }

    #[test]
    fn lagrange_weights_reduce_to_closed_form_for_integral_last_step() {
        // γ = ln(6)/2 makes e^{2γ} = 6 exactly an integer step count.
        let gamma = 6f64.ln() / 2.0;
        let p = multiproduct_params(1, gamma).unwrap();
        assert_eq!(p.ells, vec![1, 6]);
        for (a, b) in p.coeffs.iter().zip(closed_form_weights(1, gamma)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn multiproduct_at_zero_time_is_identity() {
        let (gate, scale) = multiproduct_gate(&spec(), 0.0, 2, 0.8).unwrap();
        let m = gate.matrix().scale_real(scale);
        assert!(m.max_abs_diff(&DenseOperator::identity(4)) < 1e-12);
    }

    #[test]
    fn m11_beats_s1() {
        let s = spec();
        let (gate, scale) = multiproduct_gate(&s, 0.1, 1, 0.8).unwrap();
        let m_err = oracle_error(&gate.matrix().scale_real(scale), &s, 0.1);
        let s_err = oracle_error(&suzuki(&s, 0.1, 1).unwrap(), &s, 0.1);
        assert!(m_err < s_err, "{m_err} vs {s_err}");
    }

    #[test]
    fn circuit_output_matches_direct_for_multiproduct_gate() {
        let s = spec();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for k in 1..=2 {
            let (gate, _) = multiproduct_gate(&s, 0.3, k, 0.8).unwrap();
            let psi = random::state(vec![4], &mut rng);
            let out = run_duality_circuit(&gate, &psi, &Divider::Default).unwrap();
            let direct =
                Statevector::normalized(apply_direct(&gate, &psi).unwrap(), vec![4]).unwrap();
            assert!(out.state.fidelity(&direct) >= 1.0 - 1e-10);
        }
    }

    #[test]
    fn single_term_simulation_is_exact() {
        let s = HamiltonianSpec::parse("0.5 ZX").unwrap();
        let psi = random::state(vec![4], &mut ChaCha8Rng::seed_from_u64(1));
        for r in [1, 3] {
            let run = simulate_multiproduct(&s, 0.8, r, 1, 0.8, &psi).unwrap();
            assert!(run.error_vs_oracle <= 1e-10, "{}", run.error_vs_oracle);
        }
    }

    #[test]
    fn segmented_simulation_beats_trotter_and_converges() {
        let s = spec();
        let psi = random::state(vec![4], &mut ChaCha8Rng::seed_from_u64(5));
        let run10 = simulate_multiproduct(&s, 1.0, 10, 1, 0.8, &psi).unwrap();
        let trotter = suzuki(&s, 0.1, 1)
            .unwrap()
            .pow(10)
            .apply(psi.amplitudes())
            .unwrap();
        let exact = expm_hermitian(&s.matrix(), 1.0)
            .unwrap()
            .apply(psi.amplitudes())
            .unwrap();
        let trotter_err = (trotter - &exact).norm();
        assert!(run10.error_vs_oracle < trotter_err);

        let run20 = simulate_multiproduct(&s, 1.0, 20, 1, 0.8, &psi).unwrap();
        let ratio = run10.error_vs_oracle / run20.error_vs_oracle;
        assert!(ratio >= 10.0, "ratio {ratio}");
        assert_eq!(run10.success_probs.len(), 10);
        let product: f64 = run10.success_probs.iter().product();
        assert!((run10.cumulative_success - product).abs() < 1e-15);
        assert!(matches!(
            simulate_multiproduct(&s, 1.0, 0, 1, 0.8, &psi),
            Err(SimError::Parameter(_))
        ));
    }

    #[test]
    fn exponential_counts() {
        assert_eq!(suzuki_exponential_count(3, 1), 6);
        assert_eq!(suzuki_exponential_count(3, 2), 30);
        let p = multiproduct_params(1, 0.8).unwrap();
        assert_eq!(multiproduct_exponential_count(3, &p), 6 * (1 + 5));
    }
}
