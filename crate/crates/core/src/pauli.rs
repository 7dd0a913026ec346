//! Pauli-sum Hamiltonians.
//!
//! Input format, one term per line:
//!
//! ```text
//! # transverse-field pair
//! 1.0 ZZ
//! 0.5 XI
//! 0.5 IX
//! ```
//!
//! The leftmost letter acts on the most significant qubit. Term order is
//! preserved because product formulas depend on it.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Result, SimError};
use crate::numerics::{check_cap, DenseOperator, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A tensor product of single-qubit Paulis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString(Vec<Pauli>);

impl PauliString {
    pub fn new(ops: Vec<Pauli>) -> Self {
        Self(ops)
    }

    pub fn num_qubits(&self) -> usize {
        self.0.len()
    }

    pub fn ops(&self) -> &[Pauli] {
        &self.0
    }

    /// Number of non-identity factors.
    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&p| p != Pauli::I).count()
    }

    /// Dense matrix of the string. Entry `(row, col)` is nonzero only for
    /// `row = col ^ xmask`.
    pub fn matrix(&self) -> Result<DenseOperator> {
        let n = self.0.len();
        if n >= usize::BITS as usize {
            return Err(SimError::Capacity {
                required: usize::MAX,
                cap: crate::numerics::max_dim(),
            });
        }
        let dim = 1usize << n;
        check_cap(dim)?;
        let mut m = DMatrix::zeros(dim, dim);
        for col in 0..dim {
            let mut row = col;
            let mut value = C64::new(1.0, 0.0);
            for (q, op) in self.0.iter().enumerate() {
                let bit = n - 1 - q;
                let set = (col >> bit) & 1 == 1;
                match op {
                    Pauli::I => {}
                    Pauli::X => row ^= 1 << bit,
                    Pauli::Y => {
                        row ^= 1 << bit;
                        // Y|0> = i|1>, Y|1> = -i|0>
                        value *= if set {
                            C64::new(0.0, -1.0)
                        } else {
                            C64::new(0.0, 1.0)
                        };
                    }
                    Pauli::Z => {
                        if set {
                            value = -value;
                        }
                    }
                }
            }
            m[(row, col)] = value;
        }
        Ok(DenseOperator::from_matrix_unchecked(m))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|p| write!(f, "{}", p.as_char()))
    }
}

impl FromStr for PauliString {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s.is_empty() {
            return Err("empty Pauli string".into());
        }
        s.chars()
            .map(|c| Pauli::from_char(c).ok_or_else(|| format!("unknown Pauli letter '{c}'")))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(PauliString)
    }
}

/// `coefficient · string`.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub string: PauliString,
}

impl PauliTerm {
    pub fn new(coefficient: f64, string: PauliString) -> Self {
        Self {
            coefficient,
            string,
        }
    }
}

/// Parses a term list. Errors carry the 1-based line number.
pub fn parse_hamiltonian(text: &str) -> Result<Vec<PauliTerm>> {
    let mut terms: Vec<PauliTerm> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |message: String| SimError::Parse { line, message };
        let mut fields = content.split_whitespace();
        let (Some(coef), Some(string), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(err(format!(
                "expected '<coefficient> <pauli-string>', got '{content}'"
            )));
        };
        let coefficient: f64 = coef
            .parse()
            .map_err(|_| err(format!("invalid coefficient '{coef}'")))?;
        if !coefficient.is_finite() {
            return Err(err(format!("non-finite coefficient '{coef}'")));
        }
        if coefficient == 0.0 {
            return Err(err("zero coefficient".into()));
        }
        let string: PauliString = string.parse().map_err(err)?;
        if let Some(first) = terms.first() {
            if first.string.num_qubits() != string.num_qubits() {
                return Err(err(format!(
                    "string has {} qubits, earlier terms have {}",
                    string.num_qubits(),
                    first.string.num_qubits()
                )));
            }
        }
        terms.push(PauliTerm::new(coefficient, string));
    }
    Ok(terms)
}

/// `coefficient · P` as a dense Hermitian matrix.
pub fn term_matrix(term: &PauliTerm) -> Result<DenseOperator> {
    Ok(term.string.matrix()?.scale_real(term.coefficient))
}

/// One `α_ℓ H_ℓ` summand: positive weight times a signed Pauli string.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedUnitary {
    pub alpha: f64,
    /// `+1` or `−1`; folded into `unitary`.
    pub sign: f64,
    pub string: PauliString,
    pub unitary: DenseOperator,
}

/// `H = Σ α_ℓ H_ℓ` with every `α_ℓ > 0` and every `H_ℓ` a signed Pauli
/// string (unitary, Hermitian and an involution).
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    terms: Vec<WeightedUnitary>,
    num_qubits: usize,
}

impl HamiltonianSpec {
    pub fn terms(&self) -> &[WeightedUnitary] {
        &self.terms
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.num_qubits
    }

    /// Number of terms `L`.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.alpha).collect()
    }

    /// `g = Σ α_ℓ`.
    pub fn g(&self) -> f64 {
        self.terms.iter().map(|t| t.alpha).sum()
    }

    /// Per-term norm bound `h = max_ℓ ‖α_ℓ H_ℓ‖ = max α_ℓ`.
    pub fn h(&self) -> f64 {
        self.terms.iter().map(|t| t.alpha).fold(0.0, f64::max)
    }

    /// `Σ α_ℓ H_ℓ`.
    pub fn matrix(&self) -> DenseOperator {
        let dim = self.dim();
        self.terms.iter().fold(DenseOperator::zeros(dim), |acc, t| {
            &acc + &t.unitary.scale_real(t.alpha)
        })
    }

    /// Convenience: parse then normalize.
    pub fn parse(text: &str) -> Result<Self> {
        alpha_normalize(&parse_hamiltonian(text)?)
    }
}

/// Moves each coefficient's sign into its unitary so that every `α_ℓ > 0`.
pub fn alpha_normalize(terms: &[PauliTerm]) -> Result<HamiltonianSpec> {
    let first = terms.first().ok_or(SimError::EmptyHamiltonian)?;
    let num_qubits = first.string.num_qubits();
    let terms = terms
        .iter()
        .map(|t| {
            if t.string.num_qubits() != num_qubits {
                return Err(SimError::Dimension(format!(
                    "term {} acts on {} qubits, expected {num_qubits}",
                    t.string,
                    t.string.num_qubits()
                )));
            }
            if !t.coefficient.is_finite() || t.coefficient == 0.0 {
                return Err(SimError::Parameter(format!(
                    "coefficient {} of {} must be finite and nonzero",
                    t.coefficient, t.string
                )));
            }
            let sign = t.coefficient.signum();
            Ok(WeightedUnitary {
                alpha: t.coefficient.abs(),
                sign,
                string: t.string.clone(),
                unitary: t.string.matrix()?.scale_real(sign),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HamiltonianSpec { terms, num_qubits })
}
