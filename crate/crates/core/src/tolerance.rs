//! Numerical tolerances shared by the library, the test suites and the CLI.

/// Max-entry deviation of `A†A` from the identity accepted as unitary.
pub const UNITARITY: f64 = 1e-10;
/// Max-entry deviation of `A` from `A†` accepted as Hermitian.
pub const HERMITICITY: f64 = 1e-10;
/// Entry-wise equality for algebraic identities.
pub const EQUALITY: f64 = 1e-12;
/// Allowed deviation of a fitted log-log slope from its nominal order.
pub const SLOPE: f64 = 0.3;
/// Normalization check for input vectors.
pub const NORMALIZATION: f64 = 1e-10;
/// Success probabilities below this are reported as zero-wave outcomes.
pub const ZERO_WAVE: f64 = 1e-14;
/// Post-selected fidelity deficit accepted between two routes.
pub const FIDELITY: f64 = 1e-10;

/// A named set of tolerances, selectable from the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub unitarity: f64,
    pub equality: f64,
    pub fidelity: f64,
    pub slope: f64,
    /// Slope tolerance for the eighth/ninth-order checks, which sit close
    /// to the floating-point floor.
    pub high_order_slope: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        unitarity: UNITARITY,
        equality: EQUALITY,
        fidelity: FIDELITY,
        slope: SLOPE,
        high_order_slope: 0.5,
    };

    pub const STRICT: Tolerances = Tolerances {
        unitarity: 1e-12,
        equality: 1e-13,
        fidelity: 1e-12,
        slope: 0.15,
        high_order_slope: 0.3,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
