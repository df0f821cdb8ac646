//! Materials, volume fractions and the regime map.
//!
//! A composite here is made of two finite conductors `k1 <= k2` and an ideal
//! conductor `k3 = inf` that carries no stored value. Fractions live on the
//! simplex `m1 + m2 + m3 = 1`; the bound is split into three regimes by the
//! thresholds `m12 <= m11`, which depend on `m2` and the conductivity ratio.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Slack allowed when `m1 + m2` overshoots one through rounding.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// One of the three constituents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Phase {
    One,
    Two,
    /// The ideal conductor (or, in the dual problems, the ideal insulator).
    Ideal,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::One, Phase::Two, Phase::Ideal];

    /// One-based index as used in the formulas (1, 2, 3).
    pub fn index(self) -> usize {
        match self {
            Phase::One => 1,
            Phase::Two => 2,
            Phase::Ideal => 3,
        }
    }
}

fn check_ordered_pair(a: f64, b: f64) -> Result<()> {
    for v in [a, b] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::NonPositive(v));
        }
    }
    if a > b {
        return Err(Error::Unordered {
            first: a,
            second: b,
        });
    }
    Ok(())
}

/// Two finite conductivities `0 < k1 <= k2`; the third phase is ideal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConductorSet {
    k1: f64,
    k2: f64,
}

impl ConductorSet {
    pub fn new(k1: f64, k2: f64) -> Result<Self> {
        check_ordered_pair(k1, k2)?;
        Ok(Self { k1, k2 })
    }

    pub fn k1(&self) -> f64 {
        self.k1
    }

    pub fn k2(&self) -> f64 {
        self.k2
    }

    /// Conductivity of a phase; the ideal phase reports `f64::INFINITY`.
    pub fn of(&self, phase: Phase) -> f64 {
        match phase {
            Phase::One => self.k1,
            Phase::Two => self.k2,
            Phase::Ideal => f64::INFINITY,
        }
    }
}

/// Shorthand for [`ConductorSet::new`].
pub fn make_conductors(k1: f64, k2: f64) -> Result<ConductorSet> {
    ConductorSet::new(k1, k2)
}

/// Two finite resistivities `0 < rho1 <= rho2`; the third phase is an ideal
/// insulator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResistorSet {
    rho1: f64,
    rho2: f64,
}

impl ResistorSet {
    pub fn new(rho1: f64, rho2: f64) -> Result<Self> {
        check_ordered_pair(rho1, rho2)?;
        Ok(Self { rho1, rho2 })
    }

    pub fn rho1(&self) -> f64 {
        self.rho1
    }

    pub fn rho2(&self) -> f64 {
        self.rho2
    }

    /// The same two numbers read as conductivities. The resistivity problem
    /// has the same energy form, so every conductivity formula applies to it
    /// verbatim.
    pub fn as_conductors(&self) -> ConductorSet {
        ConductorSet {
            k1: self.rho1,
            k2: self.rho2,
        }
    }
}

/// A point `(m1, m2, m3)` of the volume-fraction simplex with `m1 + m2 > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fractions {
    m1: f64,
    m2: f64,
    m3: f64,
}

impl Fractions {
    /// Builds the point from `m1` and `m2`; `m3 = 1 - m1 - m2`.
    pub fn new(m1: f64, m2: f64) -> Result<Self> {
        if !(m1.is_finite() && m2.is_finite()) || m1 < 0.0 || m2 < 0.0 {
            return Err(Error::OutOfSimplex { m1, m2 });
        }
        let mut m3 = 1.0 - m1 - m2;
        if m3 < 0.0 {
            if m3 < -SIMPLEX_TOL {
                return Err(Error::OutOfSimplex { m1, m2 });
            }
            m3 = 0.0;
        }
        if m1 + m2 == 0.0 {
            return Err(Error::Degenerate);
        }
        Ok(Self { m1, m2, m3 })
    }

    pub fn m1(&self) -> f64 {
        self.m1
    }

    pub fn m2(&self) -> f64 {
        self.m2
    }

    pub fn m3(&self) -> f64 {
        self.m3
    }

    pub fn of(&self, phase: Phase) -> f64 {
        match phase {
            Phase::One => self.m1,
            Phase::Two => self.m2,
            Phase::Ideal => self.m3,
        }
    }
}

/// Shorthand for [`Fractions::new`].
pub fn make_fractions(m1: f64, m2: f64) -> Result<Fractions> {
    Fractions::new(m1, m2)
}

/// Which branch of the bound is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Regime {
    /// `m1 >= m11`: the Hashin-Shtrikman branch, `B1`.
    LargeM1,
    /// `m12 <= m1 < m11`: the intermediate branch, `B2`.
    Intermediate,
    /// `m1 < m12`: the small-`m1` branch, `B3`.
    SmallM1,
}

impl Regime {
    /// Short label `B1`, `B2` or `B3`.
    pub fn label(self) -> &'static str {
        match self {
            Regime::LargeM1 => "B1",
            Regime::Intermediate => "B2",
            Regime::SmallM1 => "B3",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// The two regime thresholds on `m1` at fixed `m2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub m11: f64,
    pub m12: f64,
}

/// `m11 = 2 k1 / (k1 + k2) (sqrt(m2) - m2)` and `m12 = k1 / k2 (sqrt(m2) - m2)`.
pub fn thresholds(c: &ConductorSet, m2: f64) -> Thresholds {
    let g = m2.sqrt() - m2;
    Thresholds {
        m11: 2.0 * c.k1 / (c.k1 + c.k2) * g,
        m12: c.k1 / c.k2 * g,
    }
}

/// Locates `m1` relative to the thresholds. Ties go to the larger-`m1`
/// regime: `m1 == m11` is `LargeM1`, `m1 == m12` is `Intermediate`.
pub fn classify_regime(c: &ConductorSet, f: &Fractions) -> Regime {
    let th = thresholds(c, f.m2);
    if f.m1 >= th.m11 {
        Regime::LargeM1
    } else if f.m1 >= th.m12 {
        Regime::Intermediate
    } else {
        Regime::SmallM1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn k12() -> ConductorSet {
        ConductorSet::new(1.0, 2.0).unwrap()
    }

    #[test]
    fn conductor_validation() {
        assert!(make_conductors(1.0, 2.0).is_ok());
        assert!(matches!(
            make_conductors(2.0, 1.0),
            Err(Error::Unordered { .. })
        ));
        assert_eq!(make_conductors(0.0, 1.0), Err(Error::NonPositive(0.0)));
        assert!(make_conductors(1.0, f64::INFINITY).is_err());
        // coincident materials are allowed
        assert!(make_conductors(1.5, 1.5).is_ok());
    }

    #[test]
    fn fraction_validation() {
        let f = make_fractions(0.14, 0.25).unwrap();
        assert_relative_eq!(f.m3(), 0.61, epsilon = 1e-15);
        assert!(matches!(
            make_fractions(0.7, 0.4),
            Err(Error::OutOfSimplex { .. })
        ));
        assert_eq!(make_fractions(0.0, 0.0), Err(Error::Degenerate));
        assert!(make_fractions(-0.1, 0.5).is_err());
        // rounding overshoot is absorbed
        let f = make_fractions(0.7, 0.3 + 1e-14).unwrap();
        assert_eq!(f.m3(), 0.0);
    }

    #[test]
    fn reference_thresholds() {
        let th = thresholds(&k12(), 0.25);
        assert_relative_eq!(th.m11, 1.0 / 6.0, max_relative = 1e-15);
        assert_relative_eq!(th.m12, 0.125, max_relative = 1e-15);
    }

    #[test]
    fn reference_regimes() {
        let c = k12();
        let reg = |m1, m2| classify_regime(&c, &Fractions::new(m1, m2).unwrap());
        assert_eq!(reg(0.3, 0.25), Regime::LargeM1);
        assert_eq!(reg(0.14, 0.25), Regime::Intermediate);
        assert_eq!(reg(0.1, 0.25), Regime::SmallM1);
        // tie conventions
        assert_eq!(reg(0.125, 0.25), Regime::Intermediate);
        let m11 = thresholds(&c, 0.25).m11;
        assert_eq!(reg(m11, 0.25), Regime::LargeM1);
    }

    #[test]
    fn thresholds_vanish_at_simplex_edges() {
        let c = k12();
        for m2 in [0.0, 1.0] {
            let th = thresholds(&c, m2);
            assert_eq!(th.m11, 0.0);
            assert_eq!(th.m12, 0.0);
        }
        assert_eq!(
            classify_regime(&c, &Fractions::new(0.3, 0.0).unwrap()),
            Regime::LargeM1
        );
        assert_eq!(
            classify_regime(&c, &Fractions::new(0.0, 1.0).unwrap()),
            Regime::LargeM1
        );
    }

    fn ordered_pair() -> impl Strategy<Value = (f64, f64)> {
        (1e-3..1e3f64, 1.0..1e3f64).prop_map(|(k1, ratio)| (k1, k1 * ratio))
    }

    proptest! {
        #[test]
        fn m12_never_exceeds_m11((k1, k2) in ordered_pair(), m2 in 0.0..1.0f64) {
            let th = thresholds(&ConductorSet::new(k1, k2).unwrap(), m2);
            prop_assert!(th.m12 <= th.m11 * (1.0 + 1e-15));
            prop_assert!(th.m12 >= 0.0);
        }

        #[test]
        fn regime_is_monotone_in_m1((k1, k2) in ordered_pair(), m2 in 0.01..0.99f64) {
            let c = ConductorSet::new(k1, k2).unwrap();
            let rank = |r: Regime| match r {
                Regime::SmallM1 => 0,
                Regime::Intermediate => 1,
                Regime::LargeM1 => 2,
            };
            let mut last = 0;
            for i in 0..=100 {
                let m1 = (1.0 - m2) * i as f64 / 100.0;
                let Ok(f) = Fractions::new(m1, m2) else { continue };
                let r = rank(classify_regime(&c, &f));
                prop_assert!(r >= last);
                last = r;
            }
        }
    }
}
