//! Closed-form lower bound on the effective conductivity of an isotropic
//! mixture of `k1`, `k2` and an ideal conductor, the fields that an optimal
//! structure must carry, and the dual bound on resistivity.
//!
//! The bound is the maximum over the translation parameter `t` of
//!
//! ```text
//! B(t) = -t + (m1 / (2 k1) + m2 / (k2 + t))^-1,     k1 <= t <= k2,
//! ```
//!
//! which is attained at `t = k1` (branch `B1`), at an interior stationary
//! point (branch `B2`) or at `t = k2` (branch `B3`).

use serde::Serialize;

use crate::phases::{
    classify_regime, thresholds, ConductorSet, Fractions, Phase, Regime, ResistorSet,
};

/// A lower bound together with the data that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundResult {
    pub value: f64,
    pub regime: Regime,
    /// Translation parameter at which the bound is attained, in `[k1, k2]`.
    pub t_opt: f64,
    pub m11: f64,
    pub m12: f64,
}

/// `B1 = -k1 + (m1 / (2 k1) + m2 / (k1 + k2))^-1`.
pub fn hashin_shtrikman_branch(c: &ConductorSet, f: &Fractions) -> f64 {
    let (k1, k2) = (c.k1(), c.k2());
    -k1 + 1.0 / (f.m1() / (2.0 * k1) + f.m2() / (k1 + k2))
}

/// `B2 = k2 + 2 k1 (1 - sqrt m2)^2 / m1`. Infinite at `m1 = 0`.
pub fn intermediate_branch(c: &ConductorSet, f: &Fractions) -> f64 {
    let g = 1.0 - f.m2().sqrt();
    c.k2() + 2.0 * c.k1() * g * g / f.m1()
}

/// `B3 = -k2 + (m1 / (2 k1) + m2 / (2 k2))^-1`.
pub fn small_m1_branch(c: &ConductorSet, f: &Fractions) -> f64 {
    let (k1, k2) = (c.k1(), c.k2());
    -k2 + 1.0 / (f.m1() / (2.0 * k1) + f.m2() / (2.0 * k2))
}

/// The translated estimate `B(t)` for a fixed `t` in `[k1, k2]`.
pub fn bound_at_translation(c: &ConductorSet, f: &Fractions, t: f64) -> f64 {
    -t + 1.0 / (f.m1() / (2.0 * c.k1()) + f.m2() / (c.k2() + t))
}

/// Stationary point of `B(t)` in the intermediate regime:
/// `t = 2 k1 (sqrt m2 - m2) / m1 - k2`.
pub fn intermediate_translation(c: &ConductorSet, f: &Fractions) -> f64 {
    2.0 * c.k1() * (f.m2().sqrt() - f.m2()) / f.m1() - c.k2()
}

/// Exact lower bound on the effective conductivity.
pub fn lower_bound(c: &ConductorSet, f: &Fractions) -> BoundResult {
    let th = thresholds(c, f.m2());
    let regime = classify_regime(c, f);
    let (value, t_opt) = match regime {
        Regime::LargeM1 => (hashin_shtrikman_branch(c, f), c.k1()),
        Regime::Intermediate => (
            intermediate_branch(c, f),
            intermediate_translation(c, f).clamp(c.k1(), c.k2()),
        ),
        Regime::SmallM1 => (small_m1_branch(c, f), c.k2()),
    };
    BoundResult {
        value,
        regime,
        t_opt,
        m11: th.m11,
        m12: th.m12,
    }
}

/// Lower bound on the effective resistivity of two resistors and an ideal
/// insulator. The energy has the same form as for conductors, so this is
/// [`lower_bound`] with every `k_i` read as `rho_i`.
pub fn dual_resistivity_bound(r: &ResistorSet, f: &Fractions) -> BoundResult {
    lower_bound(&r.as_conductors(), f)
}

/// Two-material (`m3 = 0`) Hashin-Shtrikman lower bound,
/// `k1 + m2 / (1 / (k2 - k1) + m1 / (2 k1))`.
pub fn two_phase_hashin_shtrikman(k1: f64, k2: f64, m1: f64) -> f64 {
    let m2 = 1.0 - m1;
    if k1 == k2 {
        return k1;
    }
    k1 + m2 / (1.0 / (k2 - k1) + m1 / (2.0 * k1))
}

/// Constraint on `det E` in a phase of an optimal structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DetCondition {
    Zero,
    NonNegative,
    Unconstrained,
}

/// Field that an optimal structure carries in one phase, for the unit
/// average field `E0 = I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldSpec {
    pub phase: Phase,
    /// Prescribed `Tr E`.
    pub trace_value: f64,
    pub det_condition: DetCondition,
    /// Full field when it is determined (`E` proportional to `I`).
    pub matrix_value: Option<[[f64; 2]; 2]>,
}

fn scaled_identity(a: f64) -> [[f64; 2]; 2] {
    [[a, 0.0], [0.0, a]]
}

/// Optimal fields for each phase, ordered `[One, Two, Ideal]`.
pub fn optimal_fields(c: &ConductorSet, f: &Fractions) -> Vec<FieldSpec> {
    let (k1, k2) = (c.k1(), c.k2());
    let (m1, m2) = (f.m1(), f.m2());
    let (one, two) = match classify_regime(c, f) {
        Regime::LargeM1 => {
            let h1 = 1.0 / (m1 / (2.0 * k1) + m2 / (k1 + k2));
            let a = h1 / (k1 + k2);
            (
                FieldSpec {
                    phase: Phase::One,
                    trace_value: h1 / k1,
                    det_condition: DetCondition::NonNegative,
                    matrix_value: None,
                },
                FieldSpec {
                    phase: Phase::Two,
                    trace_value: 2.0 * a,
                    det_condition: DetCondition::NonNegative,
                    matrix_value: Some(scaled_identity(a)),
                },
            )
        }
        Regime::Intermediate => {
            let a = 1.0 / m2.sqrt();
            (
                FieldSpec {
                    phase: Phase::One,
                    trace_value: 2.0 * (1.0 - m2.sqrt()) / m1,
                    det_condition: DetCondition::Zero,
                    matrix_value: None,
                },
                FieldSpec {
                    phase: Phase::Two,
                    trace_value: 2.0 * a,
                    det_condition: DetCondition::NonNegative,
                    matrix_value: Some(scaled_identity(a)),
                },
            )
        }
        Regime::SmallM1 => {
            let h2 = 1.0 / (m1 / k1 + m2 / k2);
            (
                FieldSpec {
                    phase: Phase::One,
                    trace_value: 2.0 * h2 / k1,
                    det_condition: DetCondition::Zero,
                    matrix_value: None,
                },
                FieldSpec {
                    phase: Phase::Two,
                    trace_value: 2.0 * h2 / k2,
                    det_condition: DetCondition::Unconstrained,
                    matrix_value: None,
                },
            )
        }
    };
    let ideal = FieldSpec {
        phase: Phase::Ideal,
        trace_value: 0.0,
        det_condition: DetCondition::Zero,
        matrix_value: Some(scaled_identity(0.0)),
    };
    vec![one, two, ideal]
}
