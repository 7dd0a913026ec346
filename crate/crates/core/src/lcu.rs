//! Generalized (duality) gates `Σ c_i U_i` and their realization as
//! ancilla-controlled divider/combiner circuits with post-selection.
//!
//! The circuit acts on `|ψ⟩|0⟩_d`: the divider `V` spreads the ancilla over
//! `d` slits with amplitudes `p_i = V_{i0}`, slit `i` applies `U_i` to the
//! system, the combiner `W` recombines with weights `q_i = W_{0i}`, and the
//! ancilla is projected back onto `|0⟩`. The surviving system amplitude is
//! `Σ q_i p_i U_i |ψ⟩`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SimError};
use crate::numerics::{DenseOperator, Statevector, C64};
use crate::tolerance;

/// `L_c = Σ c_i U_i` with `Σ|c_i| ≤ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedGate {
    coeffs: Vec<C64>,
    unitaries: Vec<DenseOperator>,
    s_bar: f64,
}

impl GeneralizedGate {
    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn unitaries(&self) -> &[DenseOperator] {
        &self.unitaries
    }

    /// `Σ|c_i|`.
    pub fn s_bar(&self) -> f64 {
        self.s_bar
    }

    pub fn dim(&self) -> usize {
        self.unitaries[0].dim()
    }

    /// Number of slits `d`.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Dense `Σ c_i U_i`.
    pub fn matrix(&self) -> DenseOperator {
        self.coeffs
            .iter()
            .zip(&self.unitaries)
            .fold(DenseOperator::zeros(self.dim()), |acc, (&c, u)| {
                &acc + &u.scale(c)
            })
    }
}

/// Validates a generalized gate.
pub fn make_duality_gate(
    coeffs: Vec<C64>,
    unitaries: Vec<DenseOperator>,
) -> Result<GeneralizedGate> {
    if coeffs.is_empty() || coeffs.len() != unitaries.len() {
        return Err(SimError::Dimension(format!(
            "{} coefficients for {} unitaries",
            coeffs.len(),
            unitaries.len()
        )));
    }
    if coeffs
        .iter()
        .any(|c| !c.re.is_finite() || !c.im.is_finite())
    {
        return Err(SimError::Numeric {
            context: "gate coefficients",
        });
    }
    for u in &unitaries[1..] {
        unitaries[0].check_same_dim(u)?;
    }
    for u in &unitaries {
        let deviation = u.unitarity_deviation();
        if deviation > tolerance::UNITARITY {
            return Err(SimError::Unitarity { deviation });
        }
    }
    let s_bar: f64 = coeffs.iter().map(|c| c.norm()).sum();
    if s_bar > 1.0 + tolerance::EQUALITY {
        return Err(SimError::CoefficientBound { sum: s_bar });
    }
    Ok(GeneralizedGate {
        coeffs,
        unitaries,
        s_bar,
    })
}

/// Rescales `coeffs` by `1/Σ|c_i|` and returns the gate together with that
/// scale, so that `scale · L = Σ c_i U_i`.
pub fn make_scaled_gate(
    coeffs: Vec<C64>,
    unitaries: Vec<DenseOperator>,
) -> Result<(GeneralizedGate, f64)> {
    let scale: f64 = coeffs.iter().map(|c| c.norm()).sum();
    if scale == 0.0 || !scale.is_finite() {
        return Err(SimError::Parameter(format!(
            "coefficient sum {scale} cannot be rescaled"
        )));
    }
    let coeffs = coeffs.into_iter().map(|c| c / scale).collect();
    Ok((make_duality_gate(coeffs, unitaries)?, scale))
}

fn as_single_register(psi: &Statevector, dim: usize) -> Result<Statevector> {
    if psi.dim() != dim {
        return Err(SimError::Dimension(format!(
            "gate of dim {dim} applied to state of dim {}",
            psi.dim()
        )));
    }
    Statevector::new(psi.amplitudes().clone(), vec![dim])
}

/// `Σ c_i U_i |ψ⟩`, not normalized.
pub fn apply_direct(gate: &GeneralizedGate, psi: &Statevector) -> Result<DVector<C64>> {
    if psi.dim() != gate.dim() {
        return Err(SimError::Dimension(format!(
            "gate of dim {} applied to state of dim {}",
            gate.dim(),
            psi.dim()
        )));
    }
    let mut out = DVector::zeros(gate.dim());
    for (&c, u) in gate.coeffs.iter().zip(&gate.unitaries) {
        out += u.apply(psi.amplitudes())? * c;
    }
    Ok(out)
}

/// Unitary whose column 0 is `first_column`, built from one Householder
/// reflection. Deterministic in its input.
pub fn complete_unitary(first_column: &[C64]) -> Result<DenseOperator> {
    let v = DVector::from_column_slice(first_column);
    let norm = v.norm();
    if first_column.is_empty() {
        return Err(SimError::Dimension("empty column".into()));
    }
    if !norm.is_finite() || (norm - 1.0).abs() > tolerance::NORMALIZATION {
        return Err(SimError::Normalization { norm });
    }
    let d = v.len();
    let v0 = v[0];
    let phase = if v0.norm() > 0.0 {
        v0 / v0.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    // w = conj(phase)·v has a real nonnegative first entry, so the reflection
    // about u = e₀ − w maps e₀ onto w exactly.
    let w = &v * phase.conj();
    let mut u = -w.clone();
    u[0] += C64::new(1.0, 0.0);
    let u_norm_sqr = u.norm_squared();
    let mut h = DMatrix::identity(d, d);
    if u_norm_sqr > 1e-30 {
        h -= (&u * u.adjoint()) * C64::new(2.0 / u_norm_sqr, 0.0);
    }
    let mut m = h * phase;
    // Pin column 0 to the input bit-for-bit.
    m.set_column(0, &v);
    DenseOperator::new(m)
}

/// Divider amplitudes `p_i = V_{i0}` and combiner amplitudes `q_i = W_{0i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DividerSpec {
    p: Vec<C64>,
    q: Vec<C64>,
}

impl DividerSpec {
    pub fn new(p: Vec<C64>, q: Vec<C64>) -> Result<Self> {
        if p.len() != q.len() || p.is_empty() {
            return Err(SimError::Dimension(format!(
                "divider has {} entries, combiner has {}",
                p.len(),
                q.len()
            )));
        }
        for v in [&p, &q] {
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > tolerance::NORMALIZATION {
                return Err(SimError::Normalization { norm });
            }
        }
        Ok(Self { p, q })
    }

    /// `W = V†` divider for `gate`: `p_i = q_i = √(|c_i| / Σ|c|)`. The phase
    /// of each `c_i` is carried by the slit unitary instead.
    pub fn default_for(gate: &GeneralizedGate) -> Self {
        let p: Vec<C64> = gate
            .coeffs
            .iter()
            .map(|c| C64::new((c.norm() / gate.s_bar).sqrt(), 0.0))
            .collect();
        Self { q: p.clone(), p }
    }

    pub fn p(&self) -> &[C64] {
        &self.p
    }

    pub fn q(&self) -> &[C64] {
        &self.q
    }

    /// Effective slit weights `q_i p_i`.
    pub fn coefficients(&self) -> Vec<C64> {
        self.p.iter().zip(&self.q).map(|(p, q)| p * q).collect()
    }

    /// Divider unitary `V` with `V_{i0} = p_i`.
    pub fn divider(&self) -> Result<DenseOperator> {
        complete_unitary(&self.p)
    }

    /// Combiner unitary `W` with `W_{0i} = q_i`.
    pub fn combiner(&self) -> Result<DenseOperator> {
        let conj: Vec<C64> = self.q.iter().map(|z| z.conj()).collect();
        Ok(complete_unitary(&conj)?.adjoint())
    }
}

/// Divider choice for [`run_duality_circuit`].
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Divider {
    /// `W = V†` with phases pushed into the slit unitaries.
    #[default]
    Default,
    /// Explicit `(p, q)`; `q_i p_i` must be a positive multiple of `c_i`.
    Custom(DividerSpec),
}

/// Post-selected result of a circuit run.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitOutcome {
    pub state: Statevector,
    pub success_prob: f64,
}

/// Simulates the four-step divider / controlled-slit / combiner / detect
/// protocol on `|ψ⟩|0⟩_d` and post-selects the ancilla on `|0⟩`.
pub fn run_duality_circuit(
    gate: &GeneralizedGate,
    psi: &Statevector,
    divider: &Divider,
) -> Result<CircuitOutcome> {
    let system = as_single_register(psi, gate.dim())?;
    let (spec, slit_unitaries) = match divider {
        Divider::Default => {
            let phased: Vec<DenseOperator> = gate
                .coeffs
                .iter()
                .zip(&gate.unitaries)
                .map(|(c, u)| {
                    if c.norm() > 0.0 {
                        u.scale(c / c.norm())
                    } else {
                        u.clone()
                    }
                })
                .collect();
            (DividerSpec::default_for(gate), phased)
        }
        Divider::Custom(spec) => {
            check_proportional(&spec.coefficients(), &gate.coeffs)?;
            (spec.clone(), gate.unitaries.clone())
        }
    };
    if spec.p.len() != gate.len() {
        return Err(SimError::Dimension(format!(
            "divider has {} slits, gate has {}",
            spec.p.len(),
            gate.len()
        )));
    }
    let v = spec.divider()?;
    let w = spec.combiner()?;

    let mut state = system.with_ancillas(&[gate.len()])?;
    state.apply_on_register(1, &v)?;
    for (i, u) in slit_unitaries.iter().enumerate() {
        state.apply_controlled(0, u, |digits| digits[1] == i)?;
    }
    state.apply_on_register(1, &w)?;
    post_select(state.project_ancillas_zero(), psi.shape().to_vec(), None)
}

pub(crate) fn post_select(
    amplitudes: DVector<C64>,
    shape: Vec<usize>,
    segment: Option<usize>,
) -> Result<CircuitOutcome> {
    let success_prob = amplitudes.norm_squared();
    if !success_prob.is_finite() {
        return Err(SimError::Numeric {
            context: "post-selection amplitude",
        });
    }
    if success_prob < tolerance::ZERO_WAVE {
        return Err(SimError::ZeroWaveOutcome {
            probability: success_prob,
            segment,
        });
    }
    Ok(CircuitOutcome {
        state: Statevector::normalized(amplitudes, shape)?,
        success_prob,
    })
}

fn check_proportional(effective: &[C64], target: &[C64]) -> Result<()> {
    if effective.len() != target.len() {
        return Err(SimError::Dimension(format!(
            "divider has {} slits, gate has {}",
            effective.len(),
            target.len()
        )));
    }
    let denom: f64 = target.iter().map(|c| c.norm_sqr()).sum();
    let lambda: C64 = effective
        .iter()
        .zip(target)
        .map(|(e, c)| e * c.conj())
        .sum::<C64>()
        / denom;
    let residual = effective
        .iter()
        .zip(target)
        .map(|(e, c)| (e - c * lambda).norm())
        .fold(0.0, f64::max);
    if lambda.re <= 0.0 || lambda.im.abs() > tolerance::UNITARITY || residual > tolerance::UNITARITY
    {
        return Err(SimError::Parameter(
            "divider weights q_i·p_i are not a positive multiple of the gate coefficients".into(),
        ));
    }
    Ok(())
}

/// A circuit whose ancilla-`|0…0⟩` block encodes `Σ β_j V_j / s`.
///
/// Register 0 of the states it acts on is the system, registers
/// `1..=ancilla_dims().len()` its ancillas; any further registers are left
/// alone.
pub trait BlockEncoding {
    fn system_dim(&self) -> usize;
    fn ancilla_dims(&self) -> Vec<usize>;
    /// The normalization `s`.
    fn normalization(&self) -> f64;
    fn apply(&self, state: &mut Statevector, adjoint: bool) -> Result<()>;
    /// The ancilla-zero block, obtained by contracting the ancilla
    /// preparations instead of simulating the full register.
    fn block(&self) -> DenseOperator;
    fn gate_count(&self) -> usize;

    /// System plus ancilla dimension, `None` on overflow.
    fn register_dim(&self) -> Option<usize> {
        self.ancilla_dims()
            .iter()
            .try_fold(self.system_dim(), |acc, &d| acc.checked_mul(d))
    }
}

/// Prepare-select-unprepare circuit for `Σ β_j V_j` with `β_j ≥ 0`, one
/// ancilla qudit of dimension `d`.
#[derive(Debug, Clone)]
pub struct LcuCircuit {
    betas: Vec<f64>,
    unitaries: Vec<DenseOperator>,
    prepare: DenseOperator,
    normalization: f64,
}

impl LcuCircuit {
    pub fn new(betas: Vec<f64>, unitaries: Vec<DenseOperator>) -> Result<Self> {
        if betas.iter().any(|&b| b < 0.0 || !b.is_finite()) {
            return Err(SimError::Parameter(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let normalization: f64 = betas.iter().sum();
        let coeffs = betas
            .iter()
            .map(|&b| C64::new(b / normalization, 0.0))
            .collect();
        let gate = make_duality_gate(coeffs, unitaries)?;
        let prepare = DividerSpec::default_for(&gate).divider()?;
        Ok(Self {
            betas,
            unitaries: gate.unitaries,
            prepare,
            normalization,
        })
    }
}

impl BlockEncoding for LcuCircuit {
    fn system_dim(&self) -> usize {
        self.unitaries[0].dim()
    }

    fn ancilla_dims(&self) -> Vec<usize> {
        vec![self.betas.len()]
    }

    fn normalization(&self) -> f64 {
        self.normalization
    }

    fn apply(&self, state: &mut Statevector, adjoint: bool) -> Result<()> {
        state.apply_on_register(1, &self.prepare)?;
        for (i, u) in self.unitaries.iter().enumerate() {
            let u = if adjoint { u.adjoint() } else { u.clone() };
            state.apply_controlled(0, &u, |digits| digits[1] == i)?;
        }
        state.apply_on_register(1, &self.prepare.adjoint())
    }

    fn block(&self) -> DenseOperator {
        self.betas
            .iter()
            .zip(&self.unitaries)
            .fold(DenseOperator::zeros(self.system_dim()), |acc, (&b, u)| {
                &acc + &u.scale_real(b / self.normalization)
            })
    }

    fn gate_count(&self) -> usize {
        let d = self.betas.len();
        2 * (d - 1) + d
    }
}
