//! Plane-elasticity analogue: two elastic materials and void, bounded in
//! the compliance parameter `kappa` (the reciprocal plane bulk modulus).
//!
//! With `kappa` and `eta` the reciprocals of the plane bulk and shear moduli,
//! the bound reads
//!
//! ```text
//! kappa_* >= max_{eta1 <= t <= eta2} [ -t + (m1 / (kappa1 + eta1) + m2 / (kappa2 + t))^-1 ]
//! ```
//!
//! and is evaluated here by one-dimensional maximization. The three regimes
//! mirror the conductivity bound: the maximizer sits at `t = eta1`, at an
//! interior stationary point, or at `t = eta2`.
//!
//! The interior branch is `kappa2 + (1 - sqrt m2)^2 (kappa1 + eta1) / m1`.
//! A variant without the square on `1 - sqrt m2` is kept as
//! [`printed_intermediate_value`] so that its disagreement with the
//! maximization can be tested; it fails continuity at both thresholds.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::optimize::{bisect, golden_section_max};
use crate::phases::{Fractions, Phase, Regime};

/// Bracket width at which the golden-section search stops.
pub const T_TOL: f64 = 1e-12;

/// Compliance parameters `(kappa, eta)` of the two finite materials; the
/// void has `kappa3 = eta3 = inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ElasticSet {
    kappa1: f64,
    eta1: f64,
    kappa2: f64,
    eta2: f64,
}

fn check_modulus(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::BadModuli(format!(
            "{name} = {v} must be positive and finite"
        )))
    }
}

impl ElasticSet {
    /// Requires `kappa1 <= kappa2` and `eta1 <= eta2`.
    pub fn new(kappa1: f64, eta1: f64, kappa2: f64, eta2: f64) -> Result<Self> {
        for (name, v) in [
            ("kappa1", kappa1),
            ("eta1", eta1),
            ("kappa2", kappa2),
            ("eta2", eta2),
        ] {
            check_modulus(name, v)?;
        }
        if kappa1 > kappa2 || eta1 > eta2 {
            return Err(Error::BadModuli(format!(
                "moduli must be ordered: kappa {kappa1} <= {kappa2}, eta {eta1} <= {eta2}"
            )));
        }
        Ok(Self {
            kappa1,
            eta1,
            kappa2,
            eta2,
        })
    }

    /// From Young's moduli and Poisson ratios of the two materials.
    pub fn from_young(e1: f64, nu1: f64, e2: f64, nu2: f64) -> Result<Self> {
        let (k1, h1) = elastic_moduli(e1, nu1)?;
        let (k2, h2) = elastic_moduli(e2, nu2)?;
        Self::new(k1, h1, k2, h2)
    }

    pub fn kappa1(&self) -> f64 {
        self.kappa1
    }

    pub fn eta1(&self) -> f64 {
        self.eta1
    }

    pub fn kappa2(&self) -> f64 {
        self.kappa2
    }

    pub fn eta2(&self) -> f64 {
        self.eta2
    }

    /// `kappa1 + eta1 = 1 / E1`.
    pub fn compliance1(&self) -> f64 {
        self.kappa1 + self.eta1
    }
}

/// Plane bulk moduli `K = 1 / kappa` and shear moduli `mu = 1 / eta` of two
/// materials mixed with a rigid phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StiffnessSet {
    pub bulk1: f64,
    pub shear1: f64,
    pub bulk2: f64,
    pub shear2: f64,
}

impl StiffnessSet {
    /// Requires `bulk1 <= bulk2` and `shear1 <= shear2`.
    pub fn new(bulk1: f64, shear1: f64, bulk2: f64, shear2: f64) -> Result<Self> {
        ElasticSet::new(bulk1, shear1, bulk2, shear2)?;
        Ok(Self {
            bulk1,
            shear1,
            bulk2,
            shear2,
        })
    }

    /// Reciprocals of a compliance set, `K = 1 / kappa`, `mu = 1 / eta`.
    /// The order of the materials is swapped so that the stiffer one stays
    /// second.
    pub fn reciprocal_of(s: &ElasticSet) -> Result<Self> {
        Self::new(1.0 / s.kappa2, 1.0 / s.eta2, 1.0 / s.kappa1, 1.0 / s.eta1)
    }
}

/// Normalized trace `sigma1` and deviator magnitude `sigma2 >= 0` of a
/// plane stress.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StressState {
    pub sigma1: f64,
    pub sigma2: f64,
}

impl StressState {
    pub fn new(sigma1: f64, sigma2: f64) -> Result<Self> {
        if !(sigma1.is_finite() && sigma2.is_finite() && sigma2 >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "stress ({sigma1}, {sigma2})"
            )));
        }
        Ok(Self { sigma1, sigma2 })
    }

    /// `Tr sigma^2 = 2 (sigma1^2 + sigma2^2)`.
    pub fn trace_sq(&self) -> f64 {
        2.0 * (self.sigma1 * self.sigma1 + self.sigma2 * self.sigma2)
    }

    /// `det sigma = (sigma1^2 - sigma2^2)`, zero for a uniaxial stress.
    pub fn det(&self) -> f64 {
        self.sigma1 * self.sigma1 - self.sigma2 * self.sigma2
    }

    /// Stored energy `(kappa sigma1^2 + eta sigma2^2) / 2`.
    pub fn energy(&self, kappa: f64, eta: f64) -> f64 {
        0.5 * (kappa * self.sigma1 * self.sigma1 + eta * self.sigma2 * self.sigma2)
    }
}

/// `kappa = (1 - nu) / (2 E)`, `eta = (1 + nu) / (2 E)`.
pub fn elastic_moduli(young: f64, poisson: f64) -> Result<(f64, f64)> {
    if !(young > 0.0 && young.is_finite()) {
        return Err(Error::BadModuli(format!("Young's modulus {young}")));
    }
    if !(poisson > -1.0 && poisson < 1.0) {
        return Err(Error::BadModuli(format!(
            "Poisson ratio {poisson} outside (-1, 1)"
        )));
    }
    Ok((
        (1.0 - poisson) / (2.0 * young),
        (1.0 + poisson) / (2.0 * young),
    ))
}

/// Regime thresholds on `m1`:
/// `m11 = sqrt(m2)(1 - sqrt m2)(kappa1 + eta1) / (kappa2 + eta1)` and
/// `m12 = sqrt(m2)(1 - sqrt m2)(kappa1 + eta1) / (kappa2 + eta2)`.
pub fn elastic_thresholds(s: &ElasticSet, m2: f64) -> (f64, f64) {
    let g = m2.sqrt() * (1.0 - m2.sqrt()) * s.compliance1();
    (g / (s.kappa2 + s.eta1), g / (s.kappa2 + s.eta2))
}

/// The translated estimate for a fixed `t`.
pub fn elastic_estimate(s: &ElasticSet, f: &Fractions, t: f64) -> f64 {
    -t + 1.0 / (f.m1() / s.compliance1() + f.m2() / (s.kappa2 + t))
}

fn estimate_slope(s: &ElasticSet, f: &Fractions, t: f64) -> f64 {
    let q = f.m1() / s.compliance1() * (s.kappa2 + t) + f.m2();
    -1.0 + f.m2() / (q * q)
}

/// Branch at `t = eta1`.
pub fn elastic_hs_branch(s: &ElasticSet, f: &Fractions) -> f64 {
    elastic_estimate(s, f, s.eta1)
}

/// Branch at `t = eta2`.
pub fn elastic_small_branch(s: &ElasticSet, f: &Fractions) -> f64 {
    elastic_estimate(s, f, s.eta2)
}

/// Interior branch `kappa2 + (1 - sqrt m2)^2 (kappa1 + eta1) / m1`.
pub fn corrected_intermediate_value(s: &ElasticSet, f: &Fractions) -> f64 {
    let g = 1.0 - f.m2().sqrt();
    s.kappa2 + g * g * s.compliance1() / f.m1()
}

/// Interior stationary point `sqrt(m2)(1 - sqrt m2)(kappa1 + eta1) / m1 - kappa2`.
pub fn corrected_intermediate_translation(s: &ElasticSet, f: &Fractions) -> f64 {
    let r = f.m2().sqrt();
    r * (1.0 - r) * s.compliance1() / f.m1() - s.kappa2
}

/// `kappa2 + (1 - sqrt m2)(kappa1 + eta1) / m1`, which disagrees with the
/// maximization.
pub fn printed_intermediate_value(s: &ElasticSet, f: &Fractions) -> f64 {
    s.kappa2 + (1.0 - f.m2().sqrt()) * s.compliance1() / f.m1()
}

/// `(1 - sqrt m2)(kappa1 + eta1) / m1 - eta2`, the translation that goes
/// with [`printed_intermediate_value`].
pub fn printed_intermediate_translation(s: &ElasticSet, f: &Fractions) -> f64 {
    (1.0 - f.m2().sqrt()) * s.compliance1() / f.m1() - s.eta2
}

/// Outcome of the bulk-modulus bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ElasticBoundResult {
    pub value: f64,
    pub regime: Regime,
    /// Maximizer in `[eta1, eta2]`.
    pub t_opt: f64,
    pub m11: f64,
    pub m12: f64,
    /// The value is the interior branch, which differs from
    /// [`printed_intermediate_value`].
    pub corrected_b2_flag: bool,
}

/// Lower bound on the effective `kappa_*` by golden-section search over
/// `t` in `[eta1, eta2]`, polished by bisection on the slope.
///
/// ```
/// use wheelbound::elastic::{bulk_bound, ElasticSet};
/// use wheelbound::Fractions;
///
/// let s = ElasticSet::new(0.5, 0.5, 2.0, 1.0)?;
/// let b = bulk_bound(&s, &Fractions::new(0.09, 0.16)?)?;
/// assert!((b.value - 6.0).abs() < 1e-12);
/// # Ok::<(), wheelbound::Error>(())
/// ```
pub fn bulk_bound(s: &ElasticSet, f: &Fractions) -> Result<ElasticBoundResult> {
    if f.m1() + f.m2() == 0.0 {
        return Err(Error::Degenerate);
    }
    let (lo, hi) = (s.eta1, s.eta2);
    let best = golden_section_max(|t| elastic_estimate(s, f, t), lo, hi, T_TOL);
    let slope = |t: f64| estimate_slope(s, f, t);
    let t_opt = if slope(lo) <= 0.0 {
        lo
    } else if slope(hi) >= 0.0 {
        hi
    } else {
        // the value is flat to rounding near the top, so golden section
        // pins t only to about sqrt(eps); the slope finishes the job
        let w = 1e-6 * (hi - lo) + 4.0 * T_TOL;
        let (a, b) = ((best.x - w).max(lo), (best.x + w).min(hi));
        bisect(slope, a, b, 0.0)
            .or_else(|_| bisect(slope, lo, hi, 0.0))
            .unwrap_or(best.x)
    };
    let (m11, m12) = elastic_thresholds(s, f.m2());
    let regime = if t_opt <= lo {
        Regime::LargeM1
    } else if t_opt >= hi {
        Regime::SmallM1
    } else {
        Regime::Intermediate
    };
    Ok(ElasticBoundResult {
        value: elastic_estimate(s, f, t_opt),
        regime,
        t_opt,
        m11,
        m12,
        corrected_b2_flag: regime == Regime::Intermediate,
    })
}

/// Bound on the plane bulk modulus of a mixture with a rigid phase: the
/// same maximization with `kappa -> K` and `eta -> mu`.
pub fn dual_rigid_bound(s: &StiffnessSet, f: &Fractions) -> Result<ElasticBoundResult> {
    let renamed = ElasticSet::new(s.bulk1, s.shear1, s.bulk2, s.shear2)?;
    bulk_bound(&renamed, f)
}

/// Which tensor an optimality condition constrains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Tensor {
    Stress,
    Strain,
}

/// Pointwise condition that an optimal structure satisfies in one phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Condition {
    /// `det = 0`: uniaxial.
    Uniaxial,
    /// `det >= 0` only.
    DetNonNegative,
    /// Proportional to the identity.
    Hydrostatic,
    /// Identically zero.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ElasticFieldSpec {
    pub phase: Phase,
    pub tensor: Tensor,
    pub condition: Condition,
}

fn field_spec(
    r: &ElasticBoundResult,
    tensor: Tensor,
    third: (Tensor, Condition),
) -> Vec<ElasticFieldSpec> {
    let one = if r.regime == Regime::LargeM1 {
        Condition::DetNonNegative
    } else {
        Condition::Uniaxial
    };
    vec![
        ElasticFieldSpec {
            phase: Phase::One,
            tensor,
            condition: one,
        },
        ElasticFieldSpec {
            phase: Phase::Two,
            tensor,
            condition: Condition::Hydrostatic,
        },
        ElasticFieldSpec {
            phase: Phase::Ideal,
            tensor: third.0,
            condition: third.1,
        },
    ]
}

/// Stress conditions for the void problem, ordered `[One, Two, Ideal]`:
/// uniaxial stress in material 1 once `t_opt > eta1`, hydrostatic stress in
/// the hub, no stress in the void.
pub fn elastic_field_spec(s: &ElasticSet, f: &Fractions) -> Result<Vec<ElasticFieldSpec>> {
    let r = bulk_bound(s, f)?;
    Ok(field_spec(
        &r,
        Tensor::Stress,
        (Tensor::Stress, Condition::Zero),
    ))
}

/// Strain conditions for the rigid-phase problem: the rigid phase moves as
/// a whole and passes a hydrostatic deformation to the hub.
pub fn dual_field_spec(s: &StiffnessSet, f: &Fractions) -> Result<Vec<ElasticFieldSpec>> {
    let r = dual_rigid_bound(s, f)?;
    Ok(field_spec(
        &r,
        Tensor::Strain,
        (Tensor::Strain, Condition::Hydrostatic),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::lower_bound;
    use crate::phases::{thresholds, ConductorSet};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// `kappa1 + eta1 = 1`, `kappa2 = 2`, `eta1 = 0.5`, `eta2 = 1`.
    fn reference() -> ElasticSet {
        ElasticSet::new(0.5, 0.5, 2.0, 1.0).unwrap()
    }

    fn fr(m1: f64, m2: f64) -> Fractions {
        Fractions::new(m1, m2).unwrap()
    }

    #[test]
    fn moduli_conversion() {
        assert_eq!(elastic_moduli(1.0, 0.0).unwrap(), (0.5, 0.5));
        assert_eq!(elastic_moduli(2.0, 0.5).unwrap(), (0.125, 0.375));
        assert!(matches!(elastic_moduli(1.0, 1.0), Err(Error::BadModuli(_))));
        assert!(matches!(elastic_moduli(0.0, 0.2), Err(Error::BadModuli(_))));
        let (k, e) = elastic_moduli(3.0, 0.3).unwrap();
        assert_relative_eq!(k + e, 1.0 / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn set_validation() {
        assert!(ElasticSet::new(2.0, 0.5, 1.0, 1.0).is_err());
        assert!(ElasticSet::new(0.5, 2.0, 1.0, 1.0).is_err());
        assert!(ElasticSet::new(0.5, -1.0, 1.0, 1.0).is_err());
        let s = ElasticSet::from_young(2.0, 0.2, 1.0, 0.3).unwrap();
        assert_relative_eq!(s.compliance1(), 0.5, max_relative = 1e-15);
        assert!(ElasticSet::from_young(1.0, 0.3, 2.0, 0.2).is_err());
        assert!(StressState::new(1.0, -0.1).is_err());
        let st = StressState::new(1.0, 1.0).unwrap();
        assert_eq!(st.det(), 0.0);
        assert_eq!(st.trace_sq(), 4.0);
        assert_eq!(st.energy(1.0, 3.0), 2.0);
    }

    #[test]
    fn thresholds_at_reference() {
        let (m11, m12) = elastic_thresholds(&reference(), 0.16);
        assert_relative_eq!(m11, 0.096, max_relative = 1e-14);
        assert_relative_eq!(m12, 0.08, max_relative = 1e-14);
        assert_eq!(elastic_thresholds(&reference(), 0.0), (0.0, 0.0));
        assert_eq!(elastic_thresholds(&reference(), 1.0), (0.0, 0.0));
    }

    #[test]
    fn reference_bound_values() {
        let s = reference();
        let b = bulk_bound(&s, &fr(0.09, 0.16)).unwrap();
        assert_eq!(b.regime, Regime::Intermediate);
        assert!(b.corrected_b2_flag);
        assert_relative_eq!(b.value, 6.0, max_relative = 1e-12);
        assert_relative_eq!(b.t_opt, 2.0 / 3.0, max_relative = 1e-12);

        let b = bulk_bound(&s, &fr(0.096, 0.16)).unwrap();
        assert_relative_eq!(b.value, 5.75, max_relative = 1e-12);
        assert_relative_eq!(b.t_opt, 0.5, max_relative = 1e-12);
        assert!(!b.corrected_b2_flag);

        let b = bulk_bound(&s, &fr(0.08, 0.16)).unwrap();
        assert_relative_eq!(b.value, 6.5, max_relative = 1e-12);
        assert_relative_eq!(b.t_opt, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn printed_interior_branch_disagrees() {
        let s = reference();
        let f = fr(0.09, 0.16);
        let b = bulk_bound(&s, &f).unwrap();
        assert_relative_eq!(
            corrected_intermediate_value(&s, &f),
            b.value,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            corrected_intermediate_translation(&s, &f),
            b.t_opt,
            max_relative = 1e-12
        );
        let printed = printed_intermediate_value(&s, &f);
        assert_relative_eq!(printed, 2.0 + 0.6 / 0.09, max_relative = 1e-14);
        assert!((printed - b.value).abs() > 2.0);
        // the printed translation leaves the admissible bracket
        let t = printed_intermediate_translation(&s, &f);
        assert!(t > s.eta2());
        // and the printed branch is discontinuous at both thresholds
        let (m11, m12) = elastic_thresholds(&s, 0.16);
        assert!(
            (printed_intermediate_value(&s, &fr(m11, 0.16))
                - elastic_hs_branch(&s, &fr(m11, 0.16)))
            .abs()
                > 1.0
        );
        assert!(
            (printed_intermediate_value(&s, &fr(m12, 0.16))
                - elastic_small_branch(&s, &fr(m12, 0.16)))
            .abs()
                > 1.0
        );
    }

    #[test]
    fn pure_phases_and_void_free_mixtures() {
        let s = reference();
        // pure material 1: 1 / (kappa1 + eta1) compliance sum minus eta1
        assert_relative_eq!(
            bulk_bound(&s, &fr(1.0, 0.0)).unwrap().value,
            0.5,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            bulk_bound(&s, &fr(0.0, 1.0)).unwrap().value,
            2.0,
            max_relative = 1e-12
        );
        // void around material 2 only
        let b = bulk_bound(&s, &fr(0.0, 0.5)).unwrap();
        assert_eq!(b.t_opt, 1.0);
        assert_relative_eq!(b.value, 3.0 / 0.5 - 1.0, max_relative = 1e-12);
        assert!(Fractions::new(0.0, 0.0).is_err());
    }

    #[test]
    fn dual_is_a_renaming() {
        let k = StiffnessSet::new(0.5, 0.5, 2.0, 1.0).unwrap();
        for (m1, m2) in [(0.09, 0.16), (0.096, 0.16), (0.08, 0.16), (0.4, 0.3)] {
            let f = fr(m1, m2);
            assert_eq!(
                dual_rigid_bound(&k, &f).unwrap(),
                bulk_bound(&reference(), &f).unwrap()
            );
        }
        assert_relative_eq!(
            dual_rigid_bound(&k, &fr(1.0, 0.0)).unwrap().value,
            0.5,
            max_relative = 1e-12
        );
        let r = StiffnessSet::reciprocal_of(&reference()).unwrap();
        assert_eq!((r.bulk1, r.shear1, r.bulk2, r.shear2), (0.5, 1.0, 2.0, 2.0));
    }

    #[test]
    fn field_conditions() {
        let s = reference();
        let mid = elastic_field_spec(&s, &fr(0.09, 0.16)).unwrap();
        assert_eq!(mid[0].condition, Condition::Uniaxial);
        assert_eq!(mid[1].condition, Condition::Hydrostatic);
        assert_eq!(mid[2].condition, Condition::Zero);
        let large = elastic_field_spec(&s, &fr(0.4, 0.16)).unwrap();
        assert_eq!(large[0].condition, Condition::DetNonNegative);
        let small = elastic_field_spec(&s, &fr(0.05, 0.16)).unwrap();
        assert_eq!(small[0].condition, Condition::Uniaxial);
        let k = StiffnessSet::new(0.5, 0.5, 2.0, 1.0).unwrap();
        let dual = dual_field_spec(&k, &fr(0.09, 0.16)).unwrap();
        assert!(dual.iter().all(|c| c.tensor == Tensor::Strain));
        assert_eq!(dual[2].condition, Condition::Hydrostatic);
    }

    fn ordered_set() -> impl Strategy<Value = ElasticSet> {
        (0.05..5.0f64, 0.05..5.0f64, 1.0..20.0f64, 1.0..20.0f64)
            .prop_map(|(k1, e1, rk, re)| ElasticSet::new(k1, e1, k1 * rk, e1 * re).unwrap())
    }

    proptest! {
        #[test]
        fn continuous_at_thresholds(s in ordered_set(), m2 in 0.01..0.99f64) {
            let (m11, m12) = elastic_thresholds(&s, m2);
            for m1 in [m11, m12] {
                if m1 + m2 > 1.0 || m1 <= 0.0 {
                    continue;
                }
                let at = bulk_bound(&s, &fr(m1, m2)).unwrap().value;
                let corr = corrected_intermediate_value(&s, &fr(m1, m2));
                prop_assert!((at - corr).abs() <= 1e-10 * at.abs());
            }
            if m11 + m2 <= 1.0 {
                let f = fr(m11, m2);
                let (a, b) = (elastic_hs_branch(&s, &f), corrected_intermediate_value(&s, &f));
                prop_assert!((a - b).abs() <= 1e-10 * a.abs());
            }
            if m12 + m2 <= 1.0 && m12 > 0.0 {
                let f = fr(m12, m2);
                let (a, b) = (elastic_small_branch(&s, &f), corrected_intermediate_value(&s, &f));
                prop_assert!((a - b).abs() <= 1e-10 * a.abs());
            }
        }

        #[test]
        fn maximizer_matches_branches(s in ordered_set(), m1 in 0.0..1.0f64, m2 in 0.0..1.0f64) {
            prop_assume!(m1 + m2 <= 1.0 && m1 + m2 > 1e-3);
            let f = fr(m1, m2);
            let b = bulk_bound(&s, &f).unwrap();
            prop_assert!(b.t_opt >= s.eta1() && b.t_opt <= s.eta2());
            let (m11, m12) = elastic_thresholds(&s, m2);
            if m1 > m11 * (1.0 + 1e-9) {
                prop_assert_eq!(b.t_opt, s.eta1());
                prop_assert!((b.value - elastic_hs_branch(&s, &f)).abs() <= 1e-12 * b.value.abs());
            } else if m1 < m12 * (1.0 - 1e-9) {
                prop_assert_eq!(b.t_opt, s.eta2());
                prop_assert!((b.value - elastic_small_branch(&s, &f)).abs() <= 1e-12 * b.value.abs());
            } else if m1 > m12 * (1.0 + 1e-9) && m1 < m11 * (1.0 - 1e-9) {
                prop_assert!((b.value - corrected_intermediate_value(&s, &f)).abs() <= 1e-10 * b.value.abs());
            }
            for k in 0..=20 {
                let t = s.eta1() + (s.eta2() - s.eta1()) * k as f64 / 20.0;
                prop_assert!(elastic_estimate(&s, &f, t) <= b.value * (1.0 + 1e-14));
            }
        }

        #[test]
        fn conductivity_is_a_special_case(k1 in 0.05..5.0f64, r in 1.0..20.0f64, m1 in 0.0..1.0f64, m2 in 0.0..1.0f64) {
            prop_assume!(m1 + m2 <= 1.0 && m1 + m2 > 1e-3);
            let k2 = k1 * r;
            let c = ConductorSet::new(k1, k2).unwrap();
            let s = ElasticSet::new(k1, k1, k2, k2).unwrap();
            let th = thresholds(&c, m2);
            let (m11, m12) = elastic_thresholds(&s, m2);
            prop_assert!((m11 - th.m11).abs() <= 1e-14 * th.m11.max(1e-300));
            prop_assert!((m12 - th.m12).abs() <= 1e-14 * th.m12.max(1e-300));
            let f = fr(m1, m2);
            let (a, b) = (bulk_bound(&s, &f).unwrap().value, lower_bound(&c, &f).value);
            prop_assert!((a - b).abs() <= 1e-10 * b.abs());
        }
    }
}
