use crate::error::{Result, SimError};
use crate::lcu::{complete_unitary, BlockEncoding};
use crate::numerics::{DenseOperator, Statevector, C64};
use crate::pauli::HamiltonianSpec;

use super::plan::SegmentPlan;

/// One truncated-Taylor segment as a prepare/select/unprepare circuit.
///
/// Registers: `[system, unary (2^K), slot_1 (L), …, slot_K (L)]`. The unary
/// register holds `1^k 0^{K−k}` with amplitude `√((gτ)^k / (k!·s))`; slot
/// register `j` holds `ℓ` with amplitude `√(α_ℓ / g)`. The select network
/// applies `−iH_ℓ` to the system when unary qubit `j` is set and slot `j`
/// holds `ℓ`. Unpreparation is the adjoint of preparation, so the
/// ancilla-zero block is `Ũ / s`.
#[derive(Debug, Clone)]
pub struct SegmentCircuit {
    order: usize,
    system_dim: usize,
    /// `(−i)·H_ℓ` for every term.
    select_ops: Vec<DenseOperator>,
    /// Pauli weight of every term, for gate counting.
    weights: Vec<usize>,
    /// Amplitudes of `1^k 0^{K−k}`, indexed by `k`.
    unary_amplitudes: Vec<f64>,
    slot_amplitudes: Vec<f64>,
    normalization: f64,
}

impl SegmentCircuit {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn num_terms(&self) -> usize {
        self.select_ops.len()
    }

    pub fn unary_amplitudes(&self) -> &[f64] {
        &self.unary_amplitudes
    }

    pub fn slot_amplitudes(&self) -> &[f64] {
        &self.slot_amplitudes
    }

    /// Basis index of `1^k 0^{K−k}` in the unary register.
    pub fn unary_pattern(&self, k: usize) -> usize {
        (1usize << self.order) - (1usize << (self.order - k))
    }

    /// Amplitude the preparations give to index `(k, ℓ⃗)`; its square times
    /// `s` is `β_j`.
    pub fn index_amplitude(&self, ells: &[usize]) -> f64 {
        self.unary_amplitudes[ells.len()]
            * ells
                .iter()
                .map(|&l| self.slot_amplitudes[l])
                .product::<f64>()
    }

    fn unary_column(&self) -> Vec<C64> {
        let mut col = vec![C64::new(0.0, 0.0); 1 << self.order];
        for (k, &a) in self.unary_amplitudes.iter().enumerate() {
            col[self.unary_pattern(k)] = C64::new(a, 0.0);
        }
        col
    }

    fn slot_column(&self) -> Vec<C64> {
        self.slot_amplitudes
            .iter()
            .map(|&a| C64::new(a, 0.0))
            .collect()
    }
}

/// Builds the circuit for one segment of `plan`.
pub fn build_segment_circuit(spec: &HamiltonianSpec, plan: &SegmentPlan) -> Result<SegmentCircuit> {
    if plan.order >= usize::BITS as usize - 1 {
        return Err(SimError::Capacity {
            required: usize::MAX,
            cap: crate::numerics::max_dim(),
        });
    }
    let g = spec.g();
    let x = g * plan.tau;
    let mut weights_k = Vec::with_capacity(plan.order + 1);
    let mut term = 1.0;
    for k in 0..=plan.order {
        if k > 0 {
            term *= x / k as f64;
        }
        weights_k.push(term);
    }
    let s: f64 = weights_k.iter().sum();
    Ok(SegmentCircuit {
        order: plan.order,
        system_dim: spec.dim(),
        select_ops: spec
            .terms()
            .iter()
            .map(|t| t.unitary.scale(C64::new(0.0, -1.0)))
            .collect(),
        weights: spec.terms().iter().map(|t| t.string.weight()).collect(),
        unary_amplitudes: weights_k.iter().map(|w| (w / s).sqrt()).collect(),
        slot_amplitudes: spec.alphas().iter().map(|a| (a / g).sqrt()).collect(),
        normalization: s,
    })
}

impl BlockEncoding for SegmentCircuit {
    fn system_dim(&self) -> usize {
        self.system_dim
    }

    fn ancilla_dims(&self) -> Vec<usize> {
        let mut dims = vec![1usize << self.order];
        dims.extend(std::iter::repeat_n(self.select_ops.len(), self.order));
        dims
    }

    fn normalization(&self) -> f64 {
        self.normalization
    }

    fn apply(&self, state: &mut Statevector, adjoint: bool) -> Result<()> {
        let k_max = self.order;
        let unary_prep = complete_unitary(&self.unary_column())?;
        let slot_prep = complete_unitary(&self.slot_column())?;
        state.apply_on_register(1, &unary_prep)?;
        for slot in 0..k_max {
            state.apply_on_register(2 + slot, &slot_prep)?;
        }
        let slots: Box<dyn Iterator<Item = usize>> = if adjoint {
            Box::new((0..k_max).rev())
        } else {
            Box::new(0..k_max)
        };
        for slot in slots {
            let bit = k_max - 1 - slot;
            for (ell, op) in self.select_ops.iter().enumerate() {
                let op = if adjoint { op.adjoint() } else { op.clone() };
                state.apply_controlled(0, &op, |d| (d[1] >> bit) & 1 == 1 && d[2 + slot] == ell)?;
            }
        }
        let slot_unprep = slot_prep.adjoint();
        for slot in 0..k_max {
            state.apply_on_register(2 + slot, &slot_unprep)?;
        }
        state.apply_on_register(1, &unary_prep.adjoint())
    }

    /// `Σ_k |unary_k|² B^k` with `B = Σ_ℓ |slot_ℓ|² (−iH_ℓ)`; idle slots
    /// contract to the identity.
    fn block(&self) -> DenseOperator {
        let b = self
            .select_ops
            .iter()
            .zip(&self.slot_amplitudes)
            .fold(DenseOperator::zeros(self.system_dim), |acc, (op, &a)| {
                &acc + &op.scale_real(a * a)
            });
        let mut power = DenseOperator::identity(self.system_dim);
        let mut sum = DenseOperator::zeros(self.system_dim);
        for (k, &a) in self.unary_amplitudes.iter().enumerate() {
            if k > 0 {
                power = &power * &b;
            }
            sum = &sum + &power.scale_real(a * a);
        }
        sum
    }

    /// Elementary gates: `K` for the unary preparation and `L − 1` per slot
    /// preparation (each counted twice for unpreparation), plus, for every
    /// (slot, term) pair, one slot-controlled Pauli per non-identity factor
    /// and one controlled phase.
    fn gate_count(&self) -> usize {
        let l = self.select_ops.len();
        let k = self.order;
        let prep = k + k * (l - 1);
        let select: usize = self.weights.iter().map(|w| w + 1).sum::<usize>() * k;
        2 * prep + select
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taylor::gate::taylor_gate;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn smallest_instance_layout() {
        let spec = HamiltonianSpec::parse("1.0 X").unwrap();
        let plan = SegmentPlan::with_order(&spec, 0.4, 1, 1).unwrap();
        let circ = build_segment_circuit(&spec, &plan).unwrap();
        assert_eq!(circ.ancilla_dims(), vec![2, 1]);
        assert_eq!(circ.unary_pattern(0), 0);
        assert_eq!(circ.unary_pattern(1), 1);
        // Controlled −iX between preparations: block = (I − 0.4·iX)/1.4.
        let expected = taylor_gate(&spec, &plan)
            .unwrap()
            .matrix()
            .scale_real(1.0 / 1.4);
        assert!(circ.block().max_abs_diff(&expected) < 1e-15);
        assert_eq!(circ.gate_count(), 2 + 2);
    }

    #[test]
    fn unary_patterns() {
        let spec = HamiltonianSpec::parse("1.0 X").unwrap();
        let plan = SegmentPlan::with_order(&spec, 0.4, 1, 3).unwrap();
        let circ = build_segment_circuit(&spec, &plan).unwrap();
        let patterns: Vec<usize> = (0..=3).map(|k| circ.unary_pattern(k)).collect();
        assert_eq!(patterns, vec![0b000, 0b100, 0b110, 0b111]);
    }

    #[test]
    fn factorized_amplitudes_reproduce_betas() {
        let spec = HamiltonianSpec::parse("0.7 ZX\n0.4 YI").unwrap();
        for order in 1..=2 {
            let plan = SegmentPlan::with_order(&spec, 0.35, 1, order).unwrap();
            let circ = build_segment_circuit(&spec, &plan).unwrap();
            let gate = taylor_gate(&spec, &plan).unwrap();
            assert!((circ.normalization() - gate.normalization()).abs() < 1e-12);
            assert!((circ.normalization() - plan.s).abs() < 1e-12);
            for (idx, beta) in gate.indices.iter().zip(&gate.betas) {
                let amp = circ.index_amplitude(&idx.ells);
                assert!((amp * amp - beta / plan.s).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn register_simulation_matches_contracted_block() {
        let spec = HamiltonianSpec::parse("1.0 ZZ\n0.5 XI\n0.5 IX").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for order in 0..=2 {
            let plan = SegmentPlan::with_order(&spec, 0.3, 1, order).unwrap();
            let circ = build_segment_circuit(&spec, &plan).unwrap();
            let psi = crate::random::state(vec![4], &mut rng);
            let mut full = psi.with_ancillas(&circ.ancilla_dims()).unwrap();
            circ.apply(&mut full, false).unwrap();
            assert!((full.norm() - 1.0).abs() < 1e-12);
            let expected = circ.block().apply(psi.amplitudes()).unwrap();
            assert!((full.project_ancillas_zero() - expected).norm() < 1e-12);
            circ.apply(&mut full, true).unwrap();
            let back = psi.with_ancillas(&circ.ancilla_dims()).unwrap();
            assert!(full.distance(&back) < 1e-12);
        }
    }

    #[test]
    fn gate_count_monotone() {
        let specs = ["1.0 ZZ\n0.5 XI", "1.0 ZZ\n0.5 XI\n0.5 IX\n0.3 YY"];
        let count = |text: &str, order: usize| {
            let spec = HamiltonianSpec::parse(text).unwrap();
            let plan = SegmentPlan::with_order(&spec, 0.1, 1, order).unwrap();
            build_segment_circuit(&spec, &plan).unwrap().gate_count()
        };
        assert!(count(specs[1], 3) > count(specs[0], 3));
        assert!(count(specs[0], 4) > count(specs[0], 3));
    }
}
