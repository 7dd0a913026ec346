//! Dense complex linear algebra: operators, multi-register state vectors and
//! the exact evolution oracle the rest of the crate is checked against.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Result, SimError};
use crate::tolerance;

pub type C64 = Complex64;

/// Default cap on any dense dimension (system and ancillas combined).
pub const DEFAULT_MAX_DIM: usize = 1 << 16;
/// Environment variable overriding [`DEFAULT_MAX_DIM`].
pub const MAX_DIM_ENV: &str = "DUALITY_SIM_MAX_DIM";

/// Current dimension cap, honoring `DUALITY_SIM_MAX_DIM`.
pub fn max_dim() -> usize {
    std::env::var(MAX_DIM_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&v| v > 0)
        .unwrap_or(DEFAULT_MAX_DIM)
}

pub(crate) fn check_cap(required: usize) -> Result<()> {
    let cap = max_dim();
    if required > cap {
        Err(SimError::Capacity { required, cap })
    } else {
        Ok(())
    }
}

/// A square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    matrix: DMatrix<C64>,
}

impl DenseOperator {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(SimError::Dimension(format!(
                "operator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.nrows() == 0 {
            return Err(SimError::Dimension("operator is empty".into()));
        }
        Ok(Self { matrix })
    }

    pub(crate) fn from_matrix_unchecked(matrix: DMatrix<C64>) -> Self {
        debug_assert!(matrix.is_square() && matrix.nrows() > 0);
        Self { matrix }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_matrix_unchecked(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_matrix_unchecked(DMatrix::zeros(dim, dim))
    }

    /// Builds an operator from row-major real entries.
    pub fn from_real_rows(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(SimError::Dimension(format!(
                "expected {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Self::new(DMatrix::from_row_iterator(
            dim,
            dim,
            entries.iter().map(|&x| C64::new(x, 0.0)),
        ))
    }

    pub fn diagonal(entries: &[C64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(entries)))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_matrix_unchecked(self.matrix.adjoint())
    }

    pub fn is_finite(&self) -> bool {
        self.matrix
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `‖A†A − I‖_max`.
    pub fn unitarity_deviation(&self) -> f64 {
        let gram = self.matrix.adjoint() * &self.matrix;
        max_abs(&(gram - DMatrix::identity(self.dim(), self.dim())))
    }

    /// `‖A − A†‖_max`.
    pub fn hermiticity_deviation(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_deviation() <= tolerance::UNITARITY
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_deviation() <= tolerance::HERMITICITY
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self::from_matrix_unchecked(&self.matrix * factor)
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(C64::new(factor, 0.0))
    }

    /// Integer power by repeated squaring.
    pub fn pow(&self, mut exponent: u64) -> Self {
        let mut base = self.matrix.clone();
        let mut acc = DMatrix::identity(self.dim(), self.dim());
        while exponent > 0 {
            if exponent & 1 == 1 {
                acc = &acc * &base;
            }
            exponent >>= 1;
            if exponent > 0 {
                base = &base * &base;
            }
        }
        Self::from_matrix_unchecked(acc)
    }

    pub fn apply(&self, v: &DVector<C64>) -> Result<DVector<C64>> {
        if v.len() != self.dim() {
            return Err(SimError::Dimension(format!(
                "operator of dim {} applied to vector of length {}",
                self.dim(),
                v.len()
            )));
        }
        Ok(&self.matrix * v)
    }

    /// Largest entry-wise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &DenseOperator) -> f64 {
        assert_eq!(self.dim(), other.dim(), "max_abs_diff dimension mismatch");
        max_abs(&(&self.matrix - &other.matrix))
    }

    pub(crate) fn check_same_dim(&self, other: &DenseOperator) -> Result<()> {
        if self.dim() != other.dim() {
            Err(SimError::Dimension(format!(
                "operator dims differ: {} vs {}",
                self.dim(),
                other.dim()
            )))
        } else {
            Ok(())
        }
    }
}

impl Mul for &DenseOperator {
    type Output = DenseOperator;

    fn mul(self, rhs: &DenseOperator) -> DenseOperator {
        assert_eq!(self.dim(), rhs.dim(), "operator product dimension mismatch");
        DenseOperator::from_matrix_unchecked(&self.matrix * &rhs.matrix)
    }
}

impl Add for &DenseOperator {
    type Output = DenseOperator;

    fn add(self, rhs: &DenseOperator) -> DenseOperator {
        assert_eq!(self.dim(), rhs.dim(), "operator sum dimension mismatch");
        DenseOperator::from_matrix_unchecked(&self.matrix + &rhs.matrix)
    }
}

impl Sub for &DenseOperator {
    type Output = DenseOperator;

    fn sub(self, rhs: &DenseOperator) -> DenseOperator {
        assert_eq!(
            self.dim(),
            rhs.dim(),
            "operator difference dimension mismatch"
        );
        DenseOperator::from_matrix_unchecked(&self.matrix - &rhs.matrix)
    }
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Exact `e^{-iHt}` for Hermitian `H` via eigendecomposition.
pub fn expm_hermitian(h: &DenseOperator, t: f64) -> Result<DenseOperator> {
    if !h.is_finite() || !t.is_finite() {
        return Err(SimError::Numeric {
            context: "expm_hermitian input",
        });
    }
    let deviation = h.hermiticity_deviation();
    if deviation > tolerance::HERMITICITY {
        return Err(SimError::Hermiticity { deviation });
    }
    // Symmetrize so the eigensolver sees an exactly Hermitian matrix.
    let sym = (h.matrix() + h.matrix().adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let phases = eig
        .eigenvalues
        .map(|lambda| C64::from_polar(1.0, -lambda * t));
    let q = &eig.eigenvectors;
    let mut scaled = q.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= phases[j];
    }
    Ok(DenseOperator::from_matrix_unchecked(scaled * q.adjoint()))
}

/// Largest singular value.
pub fn spectral_norm(a: &DenseOperator) -> Result<f64> {
    if a.dim() == 0 {
        return Err(SimError::Dimension("spectral norm of empty matrix".into()));
    }
    if !a.is_finite() {
        return Err(SimError::Numeric {
            context: "spectral_norm input",
        });
    }
    Ok(a.matrix()
        .clone()
        .singular_values()
        .iter()
        .copied()
        .fold(0.0, f64::max))
}

/// Kronecker product `A ⊗ B`; `A` indexes the more significant factor.
pub fn tensor(a: &DenseOperator, b: &DenseOperator) -> Result<DenseOperator> {
    let dim = a.dim().checked_mul(b.dim()).ok_or(SimError::Capacity {
        required: usize::MAX,
        cap: max_dim(),
    })?;
    check_cap(dim)?;
    if !a.is_finite() || !b.is_finite() {
        return Err(SimError::Numeric {
            context: "tensor input",
        });
    }
    Ok(DenseOperator::from_matrix_unchecked(
        a.matrix().kronecker(b.matrix()),
    ))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(SimError::Dimension(format!(
            "slope fit needs at least two paired points, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.iter().chain(ys).any(|&v| !(v.is_finite() && v > 0.0)) {
        return Err(SimError::Numeric {
            context: "log-log fit requires positive finite data",
        });
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(SimError::Numeric {
            context: "log-log fit with identical abscissae",
        });
    }
    Ok(sxy / sxx)
}

/// Amplitudes over an ordered list of registers. Register 0 is the most
/// significant digit of the flat index; by convention it is the system.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    amplitudes: DVector<C64>,
    shape: Vec<usize>,
}

impl Statevector {
    pub fn new(amplitudes: DVector<C64>, shape: Vec<usize>) -> Result<Self> {
        check_shape(&shape, amplitudes.len())?;
        let norm = amplitudes.norm();
        if !norm.is_finite() {
            return Err(SimError::Numeric {
                context: "state amplitudes",
            });
        }
        if (norm - 1.0).abs() > tolerance::NORMALIZATION {
            return Err(SimError::Normalization { norm });
        }
        Ok(Self { amplitudes, shape })
    }

    /// Single-register state from raw amplitudes.
    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Result<Self> {
        let n = amplitudes.len();
        Self::new(DVector::from_vec(amplitudes), vec![n])
    }

    /// Normalizes `amplitudes`; a zero vector is rejected.
    pub fn normalized(amplitudes: DVector<C64>, shape: Vec<usize>) -> Result<Self> {
        check_shape(&shape, amplitudes.len())?;
        let norm = amplitudes.norm();
        if !norm.is_finite() || norm == 0.0 {
            return Err(SimError::Normalization { norm });
        }
        Ok(Self {
            amplitudes: amplitudes / C64::new(norm, 0.0),
            shape,
        })
    }

    pub fn basis(shape: Vec<usize>, index: usize) -> Result<Self> {
        let dim: usize = shape.iter().product();
        if index >= dim {
            return Err(SimError::Dimension(format!(
                "basis index {index} out of range for dim {dim}"
            )));
        }
        let mut amplitudes = DVector::zeros(dim);
        amplitudes[index] = C64::new(1.0, 0.0);
        Self::new(amplitudes, shape)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Statevector) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &Statevector) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Euclidean distance, phase-sensitive.
    pub fn distance(&self, other: &Statevector) -> f64 {
        (&self.amplitudes - &other.amplitudes).norm()
    }

    /// Appends the registers of `other` as less significant digits.
    pub fn tensor(&self, other: &Statevector) -> Result<Statevector> {
        let dim = self
            .dim()
            .checked_mul(other.dim())
            .ok_or(SimError::Capacity {
                required: usize::MAX,
                cap: max_dim(),
            })?;
        check_cap(dim)?;
        let amplitudes = self.amplitudes.kronecker(&other.amplitudes);
        let mut shape = self.shape.clone();
        shape.extend_from_slice(&other.shape);
        Ok(Self { amplitudes, shape })
    }

    /// Appends registers prepared in `|0⟩`.
    pub fn with_ancillas(&self, dims: &[usize]) -> Result<Statevector> {
        let anc = Statevector::basis(dims.to_vec(), 0)?;
        self.tensor(&anc)
    }

    /// Applies `op` to register `reg`.
    pub fn apply_on_register(&mut self, reg: usize, op: &DenseOperator) -> Result<()> {
        self.apply_controlled(reg, op, |_| true)
    }

    /// Applies `op` to register `target` on every fiber whose digits satisfy
    /// `control`. The target digit passed to `control` is always zero.
    pub fn apply_controlled<F>(
        &mut self,
        target: usize,
        op: &DenseOperator,
        control: F,
    ) -> Result<()>
    where
        F: Fn(&[usize]) -> bool,
    {
        let d = *self
            .shape
            .get(target)
            .ok_or_else(|| SimError::Dimension(format!("register {target} does not exist")))?;
        if op.dim() != d {
            return Err(SimError::Dimension(format!(
                "operator of dim {} applied to register of dim {d}",
                op.dim()
            )));
        }
        let inner: usize = self.shape[target + 1..].iter().product();
        let outer: usize = self.shape[..target].iter().product();
        let m = op.matrix();
        let mut digits = vec![0usize; self.shape.len()];
        let mut fiber = vec![C64::new(0.0, 0.0); d];
        for o in 0..outer {
            for i in 0..inner {
                let base = o * d * inner + i;
                decompose(base, &self.shape, &mut digits);
                if !control(&digits) {
                    continue;
                }
                for (a, slot) in fiber.iter_mut().enumerate() {
                    *slot = self.amplitudes[base + a * inner];
                }
                for r in 0..d {
                    let mut acc = C64::new(0.0, 0.0);
                    for (c, &f) in fiber.iter().enumerate() {
                        acc += m[(r, c)] * f;
                    }
                    self.amplitudes[base + r * inner] = acc;
                }
            }
        }
        Ok(())
    }

    /// `(I − 2P₀)` where `P₀` projects every non-system register onto `|0⟩`.
    pub fn reflect_about_ancilla_zero(&mut self) {
        let anc: usize = self.shape[1..].iter().product();
        for s in 0..self.shape[0] {
            self.amplitudes[s * anc] = -self.amplitudes[s * anc];
        }
    }

    /// Unnormalized system amplitudes with every other register in `|0⟩`.
    pub fn project_ancillas_zero(&self) -> DVector<C64> {
        let anc: usize = self.shape[1..].iter().product();
        DVector::from_iterator(
            self.shape[0],
            (0..self.shape[0]).map(|s| self.amplitudes[s * anc]),
        )
    }
}

fn check_shape(shape: &[usize], len: usize) -> Result<()> {
    if shape.is_empty() || shape.contains(&0) {
        return Err(SimError::Dimension(format!(
            "invalid register shape {shape:?}"
        )));
    }
    let product = shape
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| SimError::Dimension("register shape overflows".into()))?;
    if product != len {
        return Err(SimError::Dimension(format!(
            "register shape {shape:?} has product {product}, amplitude length is {len}"
        )));
    }
    Ok(())
}

fn decompose(mut index: usize, shape: &[usize], digits: &mut [usize]) {
    for (k, &d) in shape.iter().enumerate().rev() {
        digits[k] = index % d;
        index /= d;
    }
}
