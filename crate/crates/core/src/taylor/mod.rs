//! Truncated-Taylor Hamiltonian simulation.
//!
//! Each of `r` segments approximates `e^{−iHτ}` by
//! `Ũ = Σ_{k≤K} Σ_{ℓ⃗} (τ^k/k!) α_{ℓ₁}⋯α_{ℓ_k} (−i)^k H_{ℓ₁}⋯H_{ℓ_k}`,
//! realizes `Ũ/s` as the ancilla-zero block of a segment circuit, and boosts
//! it to near-certain success with one amplitude amplification round.

mod circuit;
mod gate;
mod oaa;
mod plan;

pub use circuit::{build_segment_circuit, SegmentCircuit};
pub use gate::{index_set_size, taylor_gate, TaylorGate, TaylorIndex, MAX_INDEX_TERMS};
pub use oaa::{
    amplified_gate_count, amplified_register, oaa_round, oaa_round_with, Backend, OaaOutcome,
    AMPLIFIED_NORMALIZATION,
};
pub use plan::{exp_partial_sum, plan_segments, SegmentPlan, MAX_ORDER};

use crate::error::{Result, SimError};
use crate::lcu::BlockEncoding;
use crate::numerics::{expm_hermitian, spectral_norm, Statevector};
use crate::pauli::HamiltonianSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct TaylorDiagnostics {
    pub r: usize,
    pub order: usize,
    pub tau: f64,
    pub s: f64,
    /// `‖Ũ − e^{−iHτ}‖`; every segment shares it.
    pub per_segment_error: f64,
    /// `ε / r`.
    pub per_segment_target: f64,
    /// `‖ψ_out − e^{−iHt}ψ‖`.
    pub total_error: f64,
    pub success_probs: Vec<f64>,
    /// Elementary gates over all amplified segments.
    pub gate_count: usize,
    pub backend: Option<Backend>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaylorRun {
    pub state: Statevector,
    pub diagnostics: TaylorDiagnostics,
}

/// Runs the planned amplified segments on `psi`, post-selecting and
/// renormalizing after each.
pub fn simulate_taylor(
    spec: &HamiltonianSpec,
    t: f64,
    epsilon: f64,
    psi: &Statevector,
) -> Result<TaylorRun> {
    simulate_taylor_with(spec, t, epsilon, psi, Backend::Auto)
}

pub fn simulate_taylor_with(
    spec: &HamiltonianSpec,
    t: f64,
    epsilon: f64,
    psi: &Statevector,
    backend: Backend,
) -> Result<TaylorRun> {
    if psi.dim() != spec.dim() {
        return Err(SimError::Dimension(format!(
            "Hamiltonian of dim {} applied to state of dim {}",
            spec.dim(),
            psi.dim()
        )));
    }
    let plan = plan_segments(spec, t, epsilon)?;
    if plan.r == 0 {
        return Ok(TaylorRun {
            state: psi.clone(),
            diagnostics: TaylorDiagnostics {
                r: 0,
                order: 0,
                tau: 0.0,
                s: 1.0,
                per_segment_error: 0.0,
                per_segment_target: epsilon,
                total_error: 0.0,
                success_probs: vec![],
                gate_count: 0,
                backend: None,
            },
        });
    }
    let circuit = build_segment_circuit(spec, &plan)?;
    let h = spec.matrix();
    let u_tilde = circuit.block().scale_real(circuit.normalization());
    let per_segment_error = spectral_norm(&(&u_tilde - &expm_hermitian(&h, plan.tau)?))?;

    let mut state = psi.clone();
    let mut success_probs = Vec::with_capacity(plan.r);
    let mut used = None;
    for segment in 0..plan.r {
        let out = oaa_round_with(&circuit, &state, backend).map_err(|e| match e {
            SimError::ZeroWaveOutcome { probability, .. } => SimError::ZeroWaveOutcome {
                probability,
                segment: Some(segment),
            },
            other => other,
        })?;
        success_probs.push(out.success_prob);
        used = Some(out.backend);
        state = out.state;
    }
    let exact = expm_hermitian(&h, t)?.apply(psi.amplitudes())?;
    let total_error = (state.amplitudes() - exact).norm();
    Ok(TaylorRun {
        state,
        diagnostics: TaylorDiagnostics {
            r: plan.r,
            order: plan.order,
            tau: plan.tau,
            s: plan.s,
            per_segment_error,
            per_segment_target: epsilon / plan.r as f64,
            total_error,
            success_probs,
            gate_count: plan.r * amplified_gate_count(&circuit)?,
            backend: used,
        },
    })
}
