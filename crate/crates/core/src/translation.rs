//! Numerical reconstruction of the bound from translated energy wells.
//!
//! A 2x2 field `E` is described by the conformal and anticonformal magnitudes
//! `s`, `d` with `Tr(E E^T) = (s^2 + d^2) / 2` and `det E = (s^2 - d^2) / 4`.
//! Adding `t det E` to the energy `k/2 Tr(E E^T)` of a phase gives the
//! translated well
//!
//! ```text
//! W_i(s, d; t) = ((k_i + t) s^2 + (k_i - t) d^2) / 4,    |d| <= s,
//! ```
//!
//! which is `+inf` outside the cone `det E >= 0`. For `t > k_i` the well is
//! concave in `d`; its convex envelope on the cone is the on-cone value
//! `k_i s^2 / 2`. The ideal phase only admits `E = 0`.
//!
//! For fixed `t` the phase states are chosen to minimize the fraction-weighted
//! envelope energy subject to the averages of the unit field `E0 = I`
//! (`s0 = 2`, `d0 = 0`, `det E0 = 1`). Subtracting `t det E0` gives a lower
//! bound for every `t`; maximizing over `t` recovers the exact bound.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::optimize::{bisect, golden_section_max};
use crate::phases::{ConductorSet, Fractions, Phase};

/// Average conformal magnitude of the unit field.
pub const S0: f64 = 2.0;
/// Determinant of the unit field.
pub const DET_E0: f64 = 1.0;

/// Golden-section tolerance on `t`.
pub const T_TOL: f64 = 1e-10;

/// The translated well, `+inf` off the cone.
pub fn translated_well(phase: Phase, s: f64, d: f64, t: f64, c: &ConductorSet) -> f64 {
    match phase {
        Phase::Ideal => {
            if s == 0.0 && d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        }
        _ => {
            if s * s < d * d || s < 0.0 {
                return f64::INFINITY;
            }
            let k = c.of(phase);
            0.25 * ((k + t) * s * s + (k - t) * d * d)
        }
    }
}

/// Convex envelope of [`translated_well`] restricted to the cone.
pub fn envelope_well(phase: Phase, s: f64, d: f64, t: f64, c: &ConductorSet) -> Result<f64> {
    if s * s < d * d || s < 0.0 {
        return Err(Error::ConeViolation { s, d });
    }
    if phase == Phase::Ideal {
        return Ok(translated_well(phase, s, d, t, c));
    }
    let k = c.of(phase);
    if t <= k {
        Ok(translated_well(phase, s, d, t, c))
    } else {
        Ok(0.5 * k * s * s)
    }
}

/// Which piece of its envelope a finite phase sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WellBranch {
    /// `t <= k_i`: the translated well is convex and is its own envelope.
    Convex,
    /// `t > k_i`: the state lies on the flat-in-`d` envelope `k_i s^2 / 2`.
    Envelope,
}

/// Per-phase states of the finite phases (index 0 is phase 1); the ideal
/// phase is pinned at `s = d = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TranslationState {
    pub s: [f64; 2],
    pub d: [f64; 2],
    pub t: f64,
    /// Cost offsets; fractions are imposed directly, so these stay zero.
    pub gamma: [f64; 3],
}

impl TranslationState {
    /// `det E` of each finite phase.
    pub fn det(&self) -> [f64; 2] {
        [0, 1].map(|i| 0.25 * (self.s[i] * self.s[i] - self.d[i] * self.d[i]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleResult {
    pub bound_value: f64,
    pub t_opt: f64,
    pub minimizer: TranslationState,
    pub branch: [WellBranch; 2],
}

fn branch_of(k: f64, t: f64) -> WellBranch {
    if t <= k {
        WellBranch::Convex
    } else {
        WellBranch::Envelope
    }
}

/// Second-derivative coefficients `(h_s, h_d)` of the envelope of a finite
/// phase, so that the envelope is `(h_s s^2 + h_d d^2) / 2`.
fn curvatures(k: f64, t: f64) -> (f64, f64) {
    match branch_of(k, t) {
        WellBranch::Convex => (0.5 * (k + t), 0.5 * (k - t)),
        WellBranch::Envelope => (k, 0.0),
    }
}

/// Minimizes `sum_i m_i h_i x_i^2 / 2` subject to `sum_i m_i x_i = target`
/// over the phases with `m_i > 0`. Returns the optimum and the `x_i`.
///
/// Stationarity gives `h_i x_i = lambda` for every active phase. A phase
/// with `h_i = 0` costs nothing, so it alone absorbs the constraint.
fn diagonal_kkt(m: [f64; 2], h: [f64; 2], target: f64) -> (f64, [f64; 2]) {
    let active: Vec<usize> = (0..2).filter(|&i| m[i] > 0.0).collect();
    if let Some(&free) = active.iter().find(|&&i| h[i] == 0.0) {
        let mut x = [0.0; 2];
        x[free] = target / m[free];
        return (0.0, x);
    }
    let compliance: f64 = active.iter().map(|&i| m[i] / h[i]).sum();
    let lambda = target / compliance;
    let mut x = [0.0; 2];
    for &i in &active {
        x[i] = lambda / h[i];
    }
    (0.5 * lambda * target, x)
}

/// Minimum of the fraction-weighted envelope energy at fixed `t`, subject to
/// `m1 s1 + m2 s2 = 2` and `m1 d1 + m2 d2 = 0`.
pub fn constrained_min(c: &ConductorSet, f: &Fractions, t: f64) -> Result<(f64, TranslationState)> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTranslation(t));
    }
    let m = [f.m1(), f.m2()];
    if m[0] + m[1] == 0.0 {
        return Err(Error::Degenerate);
    }
    let k = [c.k1(), c.k2()];
    let (hs0, hd0) = curvatures(k[0], t);
    let (hs1, hd1) = curvatures(k[1], t);

    // the s- and d-problems decouple because the envelopes are diagonal
    let (es, s) = diagonal_kkt(m, [hs0, hs1], S0);
    let (ed, d) = diagonal_kkt(m, [hd0, hd1], 0.0);
    for i in 0..2 {
        if m[i] > 0.0 && d[i].abs() > s[i] {
            return Err(Error::ConeViolation { s: s[i], d: d[i] });
        }
    }
    let state = TranslationState {
        s,
        d,
        t,
        gamma: [0.0; 3],
    };
    Ok((es + ed, state))
}

/// The translation estimate `constrained_min(t) - t det E0` for one `t`.
pub fn translation_estimate(c: &ConductorSet, f: &Fractions, t: f64) -> Result<f64> {
    Ok(constrained_min(c, f, t)?.0 - t * DET_E0)
}

/// Slope of the estimate in `t` (Danskin): only the wells still convex at
/// `t` depend on it, giving `sum_convex m_i det E_i - det E0`.
fn estimate_slope(c: &ConductorSet, f: &Fractions, t: f64) -> Result<f64> {
    let (_, st) = constrained_min(c, f, t)?;
    let det = st.det();
    let m = [f.m1(), f.m2()];
    let k = [c.k1(), c.k2()];
    let convex: f64 = (0..2)
        .filter(|&i| branch_of(k[i], t) == WellBranch::Convex)
        .map(|i| m[i] * det[i])
        .sum();
    Ok(convex - DET_E0)
}

/// Maximizes the translation estimate over `t` in `[0, 2 k2]`.
///
/// The estimate is concave in `t` (a minimum of functions affine in `t`),
/// so golden-section search converges to the global maximizer. For a pure
/// phase-1 composite the estimate is flat on `[0, k1]` and any point of that
/// plateau may be returned.
pub fn maximize_over_t(c: &ConductorSet, f: &Fractions) -> Result<OracleResult> {
    if f.m1() + f.m2() == 0.0 {
        return Err(Error::Degenerate);
    }
    let hi = 2.0 * c.k2();
    let best = golden_section_max(
        |t| translation_estimate(c, f, t).unwrap_or(f64::NEG_INFINITY),
        0.0,
        hi,
        T_TOL,
    );
    // golden section stalls near sqrt(eps) on the flat top; the slope
    // pins the maximizer to rounding
    let w = 1e-6 * hi;
    let t_opt = bisect(
        |t| estimate_slope(c, f, t).unwrap_or(f64::NAN),
        (best.x - w).max(0.0),
        (best.x + w).min(hi),
        0.0,
    )
    .unwrap_or(best.x);
    let value = translation_estimate(c, f, t_opt)?;
    let (t_opt, value) = if value >= best.value {
        (t_opt, value)
    } else {
        (best.x, best.value)
    };
    let (_, minimizer) = constrained_min(c, f, t_opt)?;
    Ok(OracleResult {
        bound_value: value,
        t_opt,
        minimizer,
        branch: [branch_of(c.k1(), best.x), branch_of(c.k2(), best.x)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::lower_bound;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn k12() -> ConductorSet {
        ConductorSet::new(1.0, 2.0).unwrap()
    }

    fn fr(m1: f64, m2: f64) -> Fractions {
        Fractions::new(m1, m2).unwrap()
    }

    #[test]
    fn wells() {
        let c = k12();
        assert_eq!(translated_well(Phase::One, 1.0, 0.0, 0.0, &c), 0.25);
        assert_eq!(
            translated_well(Phase::One, 1.0, 2.0, 0.5, &c),
            f64::INFINITY
        );
        assert_eq!(translated_well(Phase::Ideal, 0.0, 0.0, 7.0, &c), 0.0);
        assert_eq!(
            translated_well(Phase::Ideal, 0.1, 0.0, 7.0, &c),
            f64::INFINITY
        );
    }

    #[test]
    fn envelopes() {
        let c = k12();
        assert_relative_eq!(envelope_well(Phase::One, 2.0, 0.0, 1.5, &c).unwrap(), 2.0);
        assert_relative_eq!(envelope_well(Phase::One, 2.0, 0.0, 0.5, &c).unwrap(), 1.5);
        assert_relative_eq!(envelope_well(Phase::Two, 1.0, 1.0, 3.0, &c).unwrap(), 1.0);
        assert!(matches!(
            envelope_well(Phase::One, 1.0, 2.0, 0.5, &c),
            Err(Error::ConeViolation { .. })
        ));
        // on the cone edge the envelope touches the well
        for t in [1.5, 2.5, 4.0] {
            let w = translated_well(Phase::One, 1.3, 1.3, t, &c);
            let e = envelope_well(Phase::One, 1.3, 1.3, t, &c).unwrap();
            assert_relative_eq!(w, e, max_relative = 1e-14);
        }
    }

    #[test]
    fn constrained_min_reference_values() {
        let c = k12();
        let (v, st) = constrained_min(&c, &fr(0.1, 0.25), 2.0).unwrap();
        assert_relative_eq!(v, 2.0 / (0.1 + 0.125), max_relative = 1e-14);
        assert_relative_eq!(0.1 * st.s[0] + 0.25 * st.s[1], 2.0, max_relative = 1e-14);

        let (v, _) = constrained_min(&c, &fr(0.3, 0.25), 1.0).unwrap();
        assert_relative_eq!(v, 1.0 / (0.15 + 0.25 / 3.0), max_relative = 1e-14);

        let (v, st) = constrained_min(&c, &fr(1.0, 0.0), 0.0).unwrap();
        assert_relative_eq!(v, 1.0, max_relative = 1e-14);
        assert_relative_eq!(st.s[0], 2.0);

        assert!(constrained_min(&c, &fr(0.3, 0.25), -0.1).is_err());
    }

    #[test]
    fn oracle_reference_values() {
        let c = k12();
        let r = maximize_over_t(&c, &fr(0.14, 0.25)).unwrap();
        assert_relative_eq!(r.bound_value, 39.0 / 7.0, max_relative = 1e-10);
        assert!((r.t_opt - 11.0 / 7.0).abs() < 1e-6);
        assert_eq!(r.branch, [WellBranch::Envelope, WellBranch::Convex]);

        let r = maximize_over_t(&c, &fr(0.3, 0.25)).unwrap();
        assert_relative_eq!(r.bound_value, 23.0 / 7.0, max_relative = 1e-10);
        assert!((r.t_opt - 1.0).abs() < 1e-9);

        let r = maximize_over_t(&c, &fr(0.1, 0.25)).unwrap();
        assert_relative_eq!(r.bound_value, 62.0 / 9.0, max_relative = 1e-10);
        assert!((r.t_opt - 2.0).abs() < 1e-9);
    }

    #[test]
    fn optimal_states_reproduce_the_optimal_fields() {
        // phase 2 in the intermediate regime carries E = I / sqrt(m2): s = 2 / sqrt(m2), d = 0
        let c = k12();
        let r = maximize_over_t(&c, &fr(0.14, 0.25)).unwrap();
        assert_relative_eq!(r.minimizer.s[1], 4.0, max_relative = 1e-6);
        assert_eq!(r.minimizer.d, [0.0, 0.0]);
        // at an interior optimum the t-slope vanishes: only the convex well
        // depends on t, and its averaged determinant balances det E0
        let det = r.minimizer.det();
        assert_relative_eq!(0.25 * det[1], 1.0, max_relative = 1e-5);
    }

    fn case() -> impl Strategy<Value = (ConductorSet, Fractions)> {
        (0.1..10.0f64, 1.0..20.0f64, 0.02..0.95f64, 0.0..1.0f64).prop_map(|(k1, r, m2, s)| {
            let c = ConductorSet::new(k1, k1 * r).unwrap();
            let f = Fractions::new((1.0 - m2) * s * 0.999 + 1e-4, m2).unwrap();
            (c, f)
        })
    }

    proptest! {
        #[test]
        fn every_translation_gives_a_lower_bound((c, f) in case(), u in 0.0..1.0f64) {
            let t = 2.0 * c.k2() * u;
            let est = translation_estimate(&c, &f, t).unwrap();
            let b = lower_bound(&c, &f).value;
            prop_assert!(est <= b + 1e-9 * b.abs().max(1.0));
        }

        #[test]
        fn maximization_matches_closed_form((c, f) in case()) {
            let r = maximize_over_t(&c, &f).unwrap();
            let b = lower_bound(&c, &f);
            prop_assert!((r.bound_value - b.value).abs() <= 1e-8 * b.value);
            prop_assert!(r.t_opt >= c.k1() * (1.0 - 1e-9) && r.t_opt <= c.k2() * (1.0 + 1e-9));
        }

        #[test]
        fn splitting_a_phase_never_helps(
            (c, f) in case(),
            u in 0.0..1.0f64,
            split in 0.05..0.95f64,
            ds in -1.0..1.0f64,
            dd in -1.0..1.0f64,
        ) {
            // two sub-states per finite phase with the same phase averages
            let t = 2.0 * c.k2() * u;
            let (best, st) = constrained_min(&c, &f, t).unwrap();
            let mut total = 0.0;
            for (i, phase) in [Phase::One, Phase::Two].into_iter().enumerate() {
                let m = f.of(phase);
                if m == 0.0 {
                    continue;
                }
                let (s, d) = (st.s[i], st.d[i]);
                // keep both sub-states inside the cone
                let sa = s * (1.0 + 0.5 * ds);
                let sb = (s - split * sa) / (1.0 - split);
                let da = 0.5 * dd * sa.min(sb);
                let db = (d - split * da) / (1.0 - split);
                prop_assume!(sb >= 0.0 && db.abs() <= sb);
                total += m * (split * envelope_well(phase, sa, da, t, &c).unwrap()
                    + (1.0 - split) * envelope_well(phase, sb, db, t, &c).unwrap());
            }
            prop_assert!(total >= best - 1e-9 * best.abs().max(1.0));
        }
    }
}
