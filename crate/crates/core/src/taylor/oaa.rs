use crate::error::{Result, SimError};
use crate::lcu::{complete_unitary, post_select, BlockEncoding};
use crate::numerics::{DenseOperator, Statevector, C64};

/// Normalization at which one amplification round is exact.
pub const AMPLIFIED_NORMALIZATION: f64 = 2.0;

/// How an amplification round is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    /// Full state-vector simulation of system and ancillas.
    Register,
    /// Ancilla-zero block `A` only, using `P₀(−W R W† R W)P₀ = 3A − 4AA†A`.
    Contracted,
    /// `Register` when the joint dimension fits the cap, else `Contracted`.
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OaaOutcome {
    pub state: Statevector,
    pub success_prob: f64,
    pub backend: Backend,
}

/// Lowers a block encoding with `s < 2` to exactly `s = 2` by appending a
/// flag qubit prepared with amplitude `s/2` on `|0⟩` and never unprepared.
struct Padded<'a, B: BlockEncoding> {
    inner: &'a B,
    flag: Option<DenseOperator>,
}

impl<'a, B: BlockEncoding> Padded<'a, B> {
    fn new(inner: &'a B) -> Result<Self> {
        let s = inner.normalization();
        if !(s.is_finite() && s > 0.0) || s > AMPLIFIED_NORMALIZATION + 1e-9 {
            return Err(SimError::Parameter(format!(
                "amplification needs normalization in (0, 2], got {s}"
            )));
        }
        let flag = if s < AMPLIFIED_NORMALIZATION - 1e-15 {
            let a = s / AMPLIFIED_NORMALIZATION;
            Some(complete_unitary(&[
                C64::new(a, 0.0),
                C64::new((1.0 - a * a).sqrt(), 0.0),
            ])?)
        } else {
            None
        };
        Ok(Self { inner, flag })
    }

    fn flag_register(&self) -> usize {
        1 + self.inner.ancilla_dims().len()
    }

    fn ancilla_dims(&self) -> Vec<usize> {
        let mut dims = self.inner.ancilla_dims();
        if self.flag.is_some() {
            dims.push(2);
        }
        dims
    }

    fn apply(&self, state: &mut Statevector, adjoint: bool) -> Result<()> {
        self.inner.apply(state, adjoint)?;
        if let Some(flag) = &self.flag {
            let op = if adjoint {
                flag.adjoint()
            } else {
                flag.clone()
            };
            state.apply_on_register(self.flag_register(), &op)?;
        }
        Ok(())
    }

    fn block(&self) -> DenseOperator {
        let block = self.inner.block();
        match &self.flag {
            Some(flag) => block.scale(flag.entry(0, 0)),
            None => block,
        }
    }

    fn gate_count(&self) -> usize {
        self.inner.gate_count() + usize::from(self.flag.is_some())
    }
}

/// Elementary gates in one amplified segment: three circuit applications,
/// two reflections.
pub fn amplified_gate_count<B: BlockEncoding>(circuit: &B) -> Result<usize> {
    Ok(3 * Padded::new(circuit)?.gate_count() + 2)
}

/// One oblivious amplitude amplification round, `−W R W† R W` with
/// `R = I − 2P₀`, followed by post-selection of every ancilla on `|0⟩`.
pub fn oaa_round<B: BlockEncoding>(circuit: &B, psi: &Statevector) -> Result<OaaOutcome> {
    oaa_round_with(circuit, psi, Backend::Auto)
}

pub fn oaa_round_with<B: BlockEncoding>(
    circuit: &B,
    psi: &Statevector,
    backend: Backend,
) -> Result<OaaOutcome> {
    let padded = Padded::new(circuit)?;
    if psi.dim() != circuit.system_dim() {
        return Err(SimError::Dimension(format!(
            "circuit system dim {} applied to state of dim {}",
            circuit.system_dim(),
            psi.dim()
        )));
    }
    let backend = match backend {
        Backend::Auto => {
            let fits = padded
                .ancilla_dims()
                .iter()
                .try_fold(psi.dim(), |acc, &d| acc.checked_mul(d))
                .is_some_and(|dim| dim <= crate::numerics::max_dim());
            if fits {
                Backend::Register
            } else {
                Backend::Contracted
            }
        }
        other => other,
    };
    let system = Statevector::new(psi.amplitudes().clone(), vec![psi.dim()])?;
    let amplitudes = match backend {
        Backend::Register => amplified_register_state(&padded, &system)?.project_ancillas_zero(),
        Backend::Contracted => {
            let a = padded.block();
            let v = a.apply(system.amplitudes())?;
            let aav = a.apply(&a.adjoint().apply(&v)?)?;
            v * C64::new(3.0, 0.0) - aav * C64::new(4.0, 0.0)
        }
        Backend::Auto => unreachable!("resolved above"),
    };
    let out = post_select(amplitudes, psi.shape().to_vec(), None)?;
    Ok(OaaOutcome {
        state: out.state,
        success_prob: out.success_prob,
        backend,
    })
}

fn amplified_register_state<B: BlockEncoding>(
    padded: &Padded<'_, B>,
    system: &Statevector,
) -> Result<Statevector> {
    let mut state = system.with_ancillas(&padded.ancilla_dims())?;
    padded.apply(&mut state, false)?;
    state.reflect_about_ancilla_zero();
    padded.apply(&mut state, true)?;
    state.reflect_about_ancilla_zero();
    padded.apply(&mut state, false)?;
    let minus = DenseOperator::identity(system.dim()).scale_real(-1.0);
    state.apply_on_register(0, &minus)?;
    Ok(state)
}

/// Full system-plus-ancilla state after one amplification round, before
/// post-selection. Subject to the dimension cap.
pub fn amplified_register<B: BlockEncoding>(circuit: &B, psi: &Statevector) -> Result<Statevector> {
    let padded = Padded::new(circuit)?;
    let system = Statevector::new(psi.amplitudes().clone(), vec![psi.dim()])?;
    amplified_register_state(&padded, &system)
}
