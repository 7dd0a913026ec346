use crate::error::{Result, SimError};
use crate::pauli::HamiltonianSpec;

/// Largest truncation order the planner will consider.
pub const MAX_ORDER: usize = 64;

/// Segmentation of `e^{−iHt}` into `r` truncated-Taylor segments.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentPlan {
    pub t: f64,
    pub r: usize,
    /// Segment time `t / r`.
    pub tau: f64,
    /// Truncation order `K`.
    pub order: usize,
    /// `s = Σ_j β_j = Σ_{k≤K} (gτ)^k / k!`.
    pub s: f64,
    /// `f = Σ_{k≤K} τ^k / k!`.
    pub f: f64,
    /// `g = Σ_ℓ α_ℓ`.
    pub g: f64,
}

impl SegmentPlan {
    /// A plan with an explicit segment count and order.
    pub fn with_order(spec: &HamiltonianSpec, t: f64, r: usize, order: usize) -> Result<Self> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(SimError::Parameter(format!(
                "evolution time must be nonnegative, got {t}"
            )));
        }
        if r == 0 && t > 0.0 {
            return Err(SimError::Parameter(
                "positive time needs at least one segment".into(),
            ));
        }
        let tau = if r == 0 { 0.0 } else { t / r as f64 };
        let g = spec.g();
        Ok(Self {
            t,
            r,
            tau,
            order,
            s: exp_partial_sum(g * tau, order),
            f: exp_partial_sum(tau, order),
            g,
        })
    }

    /// Bound on `‖Ũ − e^{−iHτ}‖` from the exponential series tail,
    /// valid while `gτ ≤ ln 2`.
    pub fn tail_bound(&self) -> f64 {
        tail_bound(self.g * self.tau, self.order)
    }
}

/// `Σ_{k≤K} x^k / k!`.
pub fn exp_partial_sum(x: f64, order: usize) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=order {
        term *= x / k as f64;
        sum += term;
    }
    sum
}

/// `2·x^{K+1}/(K+1)!`, which dominates `Σ_{k>K} x^k/k!` for `x ≤ ln 2`.
fn tail_bound(x: f64, order: usize) -> f64 {
    let mut term = 1.0;
    for k in 1..=order + 1 {
        term *= x / k as f64;
    }
    2.0 * term
}

/// Picks `r = ⌈gt / ln 2⌉` (so `s ≤ 2`) and the smallest `K` whose tail
/// bound is at most `ε / r`.
pub fn plan_segments(spec: &HamiltonianSpec, t: f64, epsilon: f64) -> Result<SegmentPlan> {
    if !(epsilon.is_finite() && epsilon > 0.0 && epsilon < 1.0) {
        return Err(SimError::Parameter(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(SimError::Parameter(format!(
            "evolution time must be nonnegative, got {t}"
        )));
    }
    if t == 0.0 {
        return SegmentPlan::with_order(spec, 0.0, 0, 0);
    }
    let r = (spec.g() * t / std::f64::consts::LN_2).ceil().max(1.0) as usize;
    let x = spec.g() * t / r as f64;
    let target = epsilon / r as f64;
    let order = (0..=MAX_ORDER)
        .find(|&k| tail_bound(x, k) <= target)
        .ok_or_else(|| {
            SimError::Parameter(format!(
                "no order up to {MAX_ORDER} reaches epsilon {epsilon}"
            ))
        })?;
    SegmentPlan::with_order(spec, t, r, order)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_weight_at_ln2_needs_one_segment() {
        let spec = HamiltonianSpec::parse("1.0 X").unwrap();
        for eps in [1e-2, 1e-6, 1e-10] {
            let plan = plan_segments(&spec, std::f64::consts::LN_2, eps).unwrap();
            assert_eq!(plan.r, 1);
            assert!((plan.tau - std::f64::consts::LN_2).abs() < 1e-15);
            assert!(plan.s <= 2.0 + 1e-9);
            assert!(plan.tail_bound() <= eps);
        }
    }

    #[test]
    fn zero_time_plan() {
        let spec = HamiltonianSpec::parse("1.0 X").unwrap();
        let plan = plan_segments(&spec, 0.0, 1e-3).unwrap();
        assert_eq!((plan.r, plan.order), (0, 0));
        assert_eq!(plan.s, 1.0);
    }

    #[test]
    fn order_grows_slowly_with_precision() {
        let spec = HamiltonianSpec::parse("1.0 ZZ\n0.5 XI\n0.5 IX").unwrap();
        let coarse = plan_segments(&spec, 1.0, 1e-4).unwrap();
        let fine = plan_segments(&spec, 1.0, 1e-8).unwrap();
        assert_eq!(coarse.r, fine.r);
        assert!(fine.order > coarse.order);
        assert!(fine.order - coarse.order <= coarse.order);
        // g = 2, t = 1: r = ⌈2/ln 2⌉ = 3.
        assert_eq!(coarse.r, 3);
        assert!(coarse.s <= 2.0);
    }

    #[test]
    fn chosen_order_is_minimal() {
        let spec = HamiltonianSpec::parse("0.3 XY\n0.9 ZZ").unwrap();
        for eps in [1e-3, 1e-7, 1e-12] {
            let plan = plan_segments(&spec, 2.5, eps).unwrap();
            let target = eps / plan.r as f64;
            assert!(plan.tail_bound() <= target);
            if plan.order > 0 {
                let lower = SegmentPlan::with_order(&spec, 2.5, plan.r, plan.order - 1).unwrap();
                assert!(lower.tail_bound() > target);
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let spec = HamiltonianSpec::parse("1.0 X").unwrap();
        assert!(matches!(
            plan_segments(&spec, 1.0, 1.0),
            Err(SimError::Parameter(_))
        ));
        assert!(matches!(
            plan_segments(&spec, 1.0, 0.0),
            Err(SimError::Parameter(_))
        ));
        assert!(matches!(
            plan_segments(&spec, -1.0, 0.1),
            Err(SimError::Parameter(_))
        ));
    }
}
