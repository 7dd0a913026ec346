use crate::error::{Result, SimError};
use crate::lcu::{make_duality_gate, GeneralizedGate};
use crate::numerics::{DenseOperator, C64};
use crate::pauli::HamiltonianSpec;

use super::plan::SegmentPlan;

/// Largest index set `|J|` materialized as explicit terms.
pub const MAX_INDEX_TERMS: usize = 1 << 20;

/// One element `(k, ℓ₁, …, ℓ_k)` of the index set; `k = ells.len()` and the
/// `ℓ` are zero-based term positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TaylorIndex {
    pub ells: Vec<usize>,
}

impl TaylorIndex {
    pub fn order(&self) -> usize {
        self.ells.len()
    }
}

/// `Ũ = Σ_{j∈J} β_j V_j` with `V_j = (−i)^k H_{ℓ₁}⋯H_{ℓ_k}`.
#[derive(Debug, Clone)]
pub struct TaylorGate {
    pub indices: Vec<TaylorIndex>,
    pub betas: Vec<f64>,
    pub unitaries: Vec<DenseOperator>,
}

impl TaylorGate {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// `s = Σ β_j`.
    pub fn normalization(&self) -> f64 {
        self.betas.iter().sum()
    }

    /// Dense `Ũ` (not normalized).
    pub fn matrix(&self) -> DenseOperator {
        let dim = self.unitaries[0].dim();
        self.betas
            .iter()
            .zip(&self.unitaries)
            .fold(DenseOperator::zeros(dim), |acc, (&b, v)| {
                &acc + &v.scale_real(b)
            })
    }

    /// `Ũ / s` as a generalized gate.
    pub fn to_generalized_gate(&self) -> Result<GeneralizedGate> {
        let s = self.normalization();
        let coeffs = self.betas.iter().map(|&b| C64::new(b / s, 0.0)).collect();
        make_duality_gate(coeffs, self.unitaries.clone())
    }
}

/// `|J| = Σ_{k≤K} L^k`, `None` on overflow.
pub fn index_set_size(num_terms: usize, order: usize) -> Option<usize> {
    let mut total = 0usize;
    let mut layer = 1usize;
    for k in 0..=order {
        if k > 0 {
            layer = layer.checked_mul(num_terms)?;
        }
        total = total.checked_add(layer)?;
    }
    Some(total)
}

/// Enumerates `J` in lexicographic `(k, ℓ⃗)` order.
pub fn taylor_gate(spec: &HamiltonianSpec, plan: &SegmentPlan) -> Result<TaylorGate> {
    let l = spec.len();
    let required = index_set_size(l, plan.order).unwrap_or(usize::MAX);
    if required > MAX_INDEX_TERMS {
        return Err(SimError::Capacity {
            required,
            cap: MAX_INDEX_TERMS,
        });
    }
    let alphas = spec.alphas();
    let minus_i_h: Vec<DenseOperator> = spec
        .terms()
        .iter()
        .map(|t| t.unitary.scale(C64::new(0.0, -1.0)))
        .collect();

    let mut indices = vec![TaylorIndex { ells: vec![] }];
    let mut betas = vec![1.0];
    let mut unitaries = vec![DenseOperator::identity(spec.dim())];
    // Layer k is built from layer k−1 by appending one more factor.
    let mut layer_start = 0;
    for k in 1..=plan.order {
        let layer_end = indices.len();
        for parent in layer_start..layer_end {
            for ell in 0..l {
                let mut ells = indices[parent].ells.clone();
                ells.push(ell);
                let beta = betas[parent] * plan.tau / k as f64 * alphas[ell];
                let v = &unitaries[parent] * &minus_i_h[ell];
                indices.push(TaylorIndex { ells });
                betas.push(beta);
                unitaries.push(v);
            }
        }
        layer_start = layer_end;
    }
    Ok(TaylorGate {
        indices,
        betas,
        unitaries,
    })
}
