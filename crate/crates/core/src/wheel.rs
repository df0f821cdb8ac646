//! Wheel assemblages and their homogenized radial profiles.
//!
//! Every wheel is a coated circle of unit radius: a central hub of `k2`,
//! an annulus `r0 < r < r_env` of thin constant-width radial spikes with the
//! ideal phase filling the wedges between them, and (for the large-`m1`
//! wheel) an outer annulus of pure `k1`.
//!
//! Spike widths are absolute, so the angular fraction of a spike material
//! with area `A` (in units of the disk area) decays like
//! `f(r) = A / (2 r (r_env - r0))`, which integrates to `A` over the annulus.
//! Circumferentially the spikes are in series with ideal wedges, radially
//! the ideal phase short-circuits them:
//!
//! ```text
//! K_theta(r) = (f1/k1 + f2/k2)^-1 = alpha r,    K_r = inf.
//! ```

use serde::Serialize;

use crate::error::{Error, Result};
use crate::optimize::bisect;
use crate::phases::{classify_regime, thresholds, ConductorSet, Fractions, Regime};

/// Bisection tolerance for the envelope fraction of the large-`m1` wheel.
pub const ENVELOPE_TOL: f64 = 1e-12;

/// The three optimal assemblages.
#[allow(non_camel_case_types)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WheelKind {
    /// Hub `k2`, spikes of `k1` (intermediate regime).
    W2_13,
    /// A `W2_13` wheel sitting at its own threshold, enveloped by `k1`
    /// (large-`m1` regime).
    W2_13_1,
    /// Hub `k2`, spikes of both `k1` and `k2` (small-`m1` regime).
    W2_123,
}

impl WheelKind {
    pub fn label(self) -> &'static str {
        match self {
            WheelKind::W2_13 => "W(2,13)",
            WheelKind::W2_13_1 => "W(2,13,1)",
            WheelKind::W2_123 => "W(2,123)",
        }
    }
}

/// Geometry of an ideal wheel (infinitely many spikes).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WheelSpec {
    pub kind: WheelKind,
    /// Hub radius.
    pub r0: f64,
    /// Outer radius of the spiky annulus; `1` unless enveloped.
    pub r_env: f64,
    /// Area of the `k1` spikes.
    pub spike_area_k1: f64,
    /// Area of the `k2` spikes; nonzero only for `W2_123`.
    pub spike_area_k2: f64,
    /// Area of the pure-`k1` outer annulus, `1 - r_env^2`.
    pub envelope_fraction: f64,
}

impl WheelSpec {
    fn spike_fraction(&self, area: f64, r: f64) -> f64 {
        if r <= self.r0 || r >= self.r_env {
            0.0
        } else {
            area / (2.0 * r * (self.r_env - self.r0))
        }
    }

    /// Angular fraction of `k1` spikes at radius `r` (zero outside the annulus).
    pub fn spike_fraction_k1(&self, r: f64) -> f64 {
        self.spike_fraction(self.spike_area_k1, r)
    }

    /// Angular fraction of `k2` spikes at radius `r` (zero outside the annulus).
    pub fn spike_fraction_k2(&self, r: f64) -> f64 {
        self.spike_fraction(self.spike_area_k2, r)
    }

    /// Angular fractions `[k1, k2, ideal]` of the full structure at radius
    /// `r` in `(0, 1]`.
    pub fn phase_fractions_at(&self, r: f64) -> [f64; 3] {
        if r <= self.r0 {
            [0.0, 1.0, 0.0]
        } else if r >= self.r_env {
            [1.0, 0.0, 0.0]
        } else {
            let f1 = self.spike_fraction_k1(r);
            let f2 = self.spike_fraction_k2(r);
            [f1, f2, (1.0 - f1 - f2).max(0.0)]
        }
    }

    /// Exact phase areas `[k1, k2, ideal]` in units of the disk area.
    pub fn phase_areas(&self) -> [f64; 3] {
        let a1 = self.spike_area_k1 + self.envelope_fraction;
        let a2 = self.r0 * self.r0 + self.spike_area_k2;
        let annulus = self.r_env * self.r_env - self.r0 * self.r0;
        [a1, a2, annulus - self.spike_area_k1 - self.spike_area_k2]
    }

    /// Phase areas `[k1, k2, ideal]` inside the ring `ra < r < rb`.
    pub fn ring_areas(&self, ra: f64, rb: f64) -> [f64; 3] {
        let mut out = [0.0; 3];
        // hub
        let (ha, hb) = (ra.min(self.r0), rb.min(self.r0));
        out[1] += hb * hb - ha * ha;
        // envelope
        let (ea, eb) = (ra.max(self.r_env), rb.max(self.r_env));
        out[0] += eb * eb - ea * ea;
        // spikes: the area density 2 r f(r) is constant across the annulus
        let (sa, sb) = (ra.clamp(self.r0, self.r_env), rb.clamp(self.r0, self.r_env));
        if sb > sa {
            let w = (sb - sa) / (self.r_env - self.r0);
            let s1 = self.spike_area_k1 * w;
            let s2 = self.spike_area_k2 * w;
            out[0] += s1;
            out[1] += s2;
            out[2] += sb * sb - sa * sa - s1 - s2;
        }
        out
    }

    fn check_feasible(&self) -> Result<()> {
        let width = self.r_env - self.r0;
        if self.spike_area_k1 < 0.0 || self.spike_area_k2 < 0.0 {
            return Err(Error::InfeasibleFractions(format!(
                "negative spike area ({}, {})",
                self.spike_area_k1, self.spike_area_k2
            )));
        }
        let spikes = self.spike_area_k1 + self.spike_area_k2;
        if width <= 0.0 {
            if spikes > 1e-12 {
                return Err(Error::InfeasibleFractions(
                    "spikes in an annulus of zero width".into(),
                ));
            }
            return Ok(());
        }
        // the fraction is largest at the hub rim
        let fill = spikes / (2.0 * self.r0.max(0.0) * width);
        if fill > 1.0 + 1e-12 {
            return Err(Error::InfeasibleFractions(format!(
                "spikes would cover {fill} of the circumference at the hub"
            )));
        }
        Ok(())
    }
}

/// Constructs the optimal wheel for the regime of `(c, f)`.
///
/// A composite without `k2` has no hub; it is rejected as degenerate (the
/// optimal structure is then a plain coated circle).
pub fn build_wheel(c: &ConductorSet, f: &Fractions) -> Result<WheelSpec> {
    if f.m2() == 0.0 {
        return Err(Error::Degenerate);
    }
    let w = match classify_regime(c, f) {
        Regime::Intermediate => w2_13(f.m1(), f.m2()),
        Regime::SmallM1 => w2_123_at(f, c.k2() * (f.m1() / c.k1() + f.m2() / c.k2()))?,
        Regime::LargeM1 => w2_13_1(c, f)?,
    };
    w.check_feasible()?;
    Ok(w)
}

fn w2_13(m1: f64, m2: f64) -> WheelSpec {
    WheelSpec {
        kind: WheelKind::W2_13,
        r0: m2.sqrt(),
        r_env: 1.0,
        spike_area_k1: m1,
        spike_area_k2: 0.0,
        envelope_fraction: 0.0,
    }
}

/// A `W2_123` wheel with an arbitrary hub radius. The `k2` spikes take
/// whatever `k2` the hub leaves over, so `r0 <= sqrt(m2)` is required.
pub fn w2_123_at(f: &Fractions, r0: f64) -> Result<WheelSpec> {
    if !(r0 > 0.0 && r0 < 1.0) {
        return Err(Error::InfeasibleFractions(format!("hub radius {r0}")));
    }
    let mut w = w2_123_unchecked(f, r0);
    // m1 = m12 gives r0 = sqrt(m2) up to rounding
    if w.spike_area_k2 < 0.0 && w.spike_area_k2 > -1e-14 {
        w.spike_area_k2 = 0.0;
    }
    w.check_feasible()?;
    Ok(w)
}

/// Same as [`w2_123_at`] but without feasibility checks. Past `r0 = sqrt(m2)`
/// the `k2` spike area turns negative; the homogenized profile still makes
/// sense as long as `K_theta` stays positive, which is what one-sided
/// derivatives of the energy at the feasibility edge need.
pub fn w2_123_unchecked(f: &Fractions, r0: f64) -> WheelSpec {
    WheelSpec {
        kind: WheelKind::W2_123,
        r0,
        r_env: 1.0,
        spike_area_k1: f.m1(),
        spike_area_k2: f.m2() - r0 * r0,
        envelope_fraction: 0.0,
    }
}

/// Threshold residual of the core of an enveloped wheel whose envelope takes
/// a fraction `ce` of the disk.
///
/// With `y = 1/(1 - ce)` and `beta = 2 k1/(k1 + k2)` the residual reads
/// `1 - y (1 - m1 - beta m2) - beta sqrt(m2 y)`, decreasing in `y` because
/// `1 - m1 - beta m2 >= m3 >= 0`.
fn envelope_residual(c: &ConductorSet, f: &Fractions, ce: f64) -> f64 {
    let m1c = (f.m1() - ce) / (1.0 - ce);
    let m2c = f.m2() / (1.0 - ce);
    m1c - thresholds(c, m2c).m11
}

fn w2_13_1(c: &ConductorSet, f: &Fractions) -> Result<WheelSpec> {
    let g = |ce: f64| envelope_residual(c, f, ce);
    let ce = if g(0.0) <= 0.0 {
        0.0
    } else {
        let hi = f.m1();
        debug_assert!(g(hi) <= 0.0);
        debug_assert!({
            let probe: Vec<f64> = (0..=8).map(|i| g(hi * i as f64 / 8.0)).collect();
            probe.windows(2).all(|p| p[1] <= p[0] + 1e-12)
        });
        bisect(g, 0.0, hi, ENVELOPE_TOL)?
    };
    let r_env = (1.0 - ce).sqrt();
    let r0 = f.m2().sqrt().min(r_env);
    Ok(WheelSpec {
        kind: WheelKind::W2_13_1,
        r0,
        r_env,
        spike_area_k1: (f.m1() - ce).max(0.0),
        spike_area_k2: 0.0,
        envelope_fraction: ce,
    })
}

/// Effective conductivity of a coated circle: a nucleus `k_nucl` (may be
/// infinite) occupying the fraction `1 - c` and an envelope `k_env` of
/// fraction `c`.
pub fn coated_circles(k_env: f64, k_nucl: f64, c: f64) -> f64 {
    let inv_n = if k_nucl.is_infinite() {
        0.0
    } else {
        1.0 / (k_nucl + k_env)
    };
    let rhs = c * (0.5 / k_env - inv_n) + inv_n;
    1.0 / rhs - k_env
}

/// Local behaviour of a radial segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SegmentKind {
    /// Isotropic conductor.
    Isotropic(f64),
    /// `K_r = inf`, `K_theta = alpha r`.
    Spiky { alpha: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub r_a: f64,
    pub r_b: f64,
    pub kind: SegmentKind,
}

/// Radial conductivity profile on `(0, r_max]`; the exterior medium is
/// supplied when solving.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialProfile {
    pub segments: Vec<Segment>,
}

impl RadialProfile {
    /// A homogeneous disk of radius one.
    pub fn homogeneous(k: f64) -> Self {
        Self {
            segments: vec![Segment {
                r_a: 0.0,
                r_b: 1.0,
                kind: SegmentKind::Isotropic(k),
            }],
        }
    }

    /// Outer radius.
    pub fn radius(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.r_b)
    }

    /// Shrinks the structure into `r < sqrt(1 - c)` and surrounds it by an
    /// isotropic annulus `k` of area fraction `c`.
    pub fn enveloped(&self, k: f64, c: f64) -> Self {
        let scale = (1.0 - c).sqrt() / self.radius();
        let mut segments: Vec<Segment> = self
            .segments
            .iter()
            .map(|s| Segment {
                r_a: s.r_a * scale,
                r_b: s.r_b * scale,
                // K_theta = alpha r must keep its value at corresponding points
                kind: match s.kind {
                    SegmentKind::Spiky { alpha } => SegmentKind::Spiky {
                        alpha: alpha / scale,
                    },
                    iso => iso,
                },
            })
            .collect();
        if c > 0.0 {
            segments.push(Segment {
                r_a: (1.0 - c).sqrt(),
                r_b: 1.0,
                kind: SegmentKind::Isotropic(k),
            });
        }
        Self { segments }
    }
}

/// Homogenized profile of a wheel: hub `k2`, spiky annulus, `k1` envelope.
/// Zero-width pieces are dropped.
pub fn radial_profile(w: &WheelSpec, c: &ConductorSet) -> RadialProfile {
    let mut segments = Vec::with_capacity(3);
    if w.r0 > 0.0 {
        segments.push(Segment {
            r_a: 0.0,
            r_b: w.r0,
            kind: SegmentKind::Isotropic(c.k2()),
        });
    }
    if w.r_env > w.r0 {
        let resistance = w.spike_area_k1 / c.k1() + w.spike_area_k2 / c.k2();
        segments.push(Segment {
            r_a: w.r0,
            r_b: w.r_env,
            kind: SegmentKind::Spiky {
                alpha: 2.0 * (w.r_env - w.r0) / resistance,
            },
        });
    }
    if w.r_env < 1.0 {
        segments.push(Segment {
            r_a: w.r_env,
            r_b: 1.0,
            kind: SegmentKind::Isotropic(c.k1()),
        });
    }
    RadialProfile { segments }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn k12() -> ConductorSet {
        ConductorSet::new(1.0, 2.0).unwrap()
    }

    fn fr(m1: f64, m2: f64) -> Fractions {
        Fractions::new(m1, m2).unwrap()
    }

    fn alpha(p: &RadialProfile) -> f64 {
        p.segments
            .iter()
            .find_map(|s| match s.kind {
                SegmentKind::Spiky { alpha } => Some(alpha),
                _ => None,
            })
            .unwrap()
    }

    #[test]
    fn intermediate_wheel() {
        let w = build_wheel(&k12(), &fr(0.14, 0.25)).unwrap();
        assert_eq!(w.kind, WheelKind::W2_13);
        assert_relative_eq!(w.r0, 0.5);
        assert_relative_eq!(w.spike_fraction_k1(0.5 + 1e-15), 0.28, max_relative = 1e-12);
        assert_relative_eq!(
            alpha(&radial_profile(&w, &k12())),
            1.0 / 0.14,
            max_relative = 1e-14
        );
    }

    #[test]
    fn small_m1_wheel() {
        let w = build_wheel(&k12(), &fr(0.1, 0.25)).unwrap();
        assert_eq!(w.kind, WheelKind::W2_123);
        assert_relative_eq!(w.r0, 0.45, max_relative = 1e-14);
        let r = 0.45 * (1.0 + 1e-14);
        assert_relative_eq!(w.spike_fraction_k1(r), 0.1 / 0.495, max_relative = 1e-12);
        assert_relative_eq!(w.spike_fraction_k2(r), 0.0475 / 0.495, max_relative = 1e-12);
        assert_relative_eq!(
            alpha(&radial_profile(&w, &k12())),
            1.1 / 0.12375,
            max_relative = 1e-13
        );
    }

    #[test]
    fn large_m1_wheel() {
        let c = k12();
        let f = fr(0.3, 0.25);
        let w = build_wheel(&c, &f).unwrap();
        assert_eq!(w.kind, WheelKind::W2_13_1);
        assert!((w.envelope_fraction - 0.1615).abs() < 1e-3);
        assert!(envelope_residual(&c, &f, w.envelope_fraction).abs() < 1e-10);
        assert_relative_eq!(w.r_env, (1.0 - w.envelope_fraction).sqrt());
        assert_relative_eq!(w.r0, 0.5);
    }

    #[test]
    fn boundary_between_small_and_intermediate() {
        let c = k12();
        let w = build_wheel(&c, &fr(0.125, 0.25)).unwrap();
        assert_eq!(w.kind, WheelKind::W2_13);
        // just below the threshold the W2_123 wheel has vanishing k2 spikes
        let w = build_wheel(&c, &fr(0.125 - 1e-13, 0.25)).unwrap();
        assert_eq!(w.kind, WheelKind::W2_123);
        assert!(w.spike_area_k2.abs() < 1e-12);
        assert!((w.r0 - 0.5).abs() < 1e-12);
        let f = fr(0.125, 0.25);
        let w = w2_123_at(&f, 2.0 * (0.125 + 0.125)).unwrap();
        assert_eq!(w.spike_area_k2, 0.0);
        let p123 = radial_profile(&w, &c);
        let p13 = radial_profile(&w2_13(0.125, 0.25), &c);
        assert_eq!(p123, p13);
    }

    #[test]
    fn envelope_vanishes_at_the_upper_threshold() {
        let c = k12();
        let m11 = thresholds(&c, 0.25).m11;
        let w = build_wheel(&c, &fr(m11, 0.25)).unwrap();
        assert_eq!(w.envelope_fraction, 0.0);
        let w = build_wheel(&c, &fr(m11 + 1e-6, 0.25)).unwrap();
        assert!(w.envelope_fraction < 1e-5);
    }

    #[test]
    fn two_material_envelope_takes_all_of_k1() {
        let w = build_wheel(&k12(), &fr(0.6, 0.4)).unwrap();
        assert!((w.envelope_fraction - 0.6).abs() < 1e-11);
        assert!(w.spike_area_k1 < 1e-11);
    }

    #[test]
    fn missing_k2_is_degenerate() {
        assert_eq!(build_wheel(&k12(), &fr(0.3, 0.0)), Err(Error::Degenerate));
    }

    #[test]
    fn coated_circle_values() {
        assert_relative_eq!(
            coated_circles(1.0, f64::INFINITY, 0.5),
            3.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(coated_circles(1.0, 7.0, 0.0), 7.0, max_relative = 1e-14);
        for c in [0.0, 0.3, 1.0] {
            assert_relative_eq!(coated_circles(1.0, 1.0, c), 1.0, max_relative = 1e-14);
        }
        // ideal core of fraction p in k2: k2 (1 + p) / (1 - p)
        assert_relative_eq!(
            coated_circles(2.0, f64::INFINITY, 0.25),
            14.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn ring_areas_sum_to_phase_areas() {
        let w = build_wheel(&k12(), &fr(0.3, 0.25)).unwrap();
        let n = 37;
        let mut tot = [0.0; 3];
        for i in 0..n {
            let a = w.ring_areas(i as f64 / n as f64, (i + 1) as f64 / n as f64);
            for p in 0..3 {
                tot[p] += a[p];
            }
        }
        let exact = w.phase_areas();
        for p in 0..3 {
            assert!((tot[p] - exact[p]).abs() < 1e-14);
        }
    }

    fn case() -> impl Strategy<Value = (ConductorSet, Fractions)> {
        (0.1..10.0f64, 1.0..20.0f64, 0.01..0.95f64, 0.0..1.0f64).prop_map(|(k1, r, m2, s)| {
            let c = ConductorSet::new(k1, k1 * r).unwrap();
            (c, Fractions::new((1.0 - m2) * s, m2).unwrap())
        })
    }

    proptest! {
        #[test]
        fn areas_match_fractions((c, f) in case()) {
            let w = build_wheel(&c, &f).unwrap();
            let a = w.phase_areas();
            prop_assert!((a[0] - f.m1()).abs() < 1e-10);
            prop_assert!((a[1] - f.m2()).abs() < 1e-10);
            prop_assert!((a[2] - f.m3()).abs() < 1e-10);
        }

        #[test]
        fn angular_fractions_stay_in_range((c, f) in case(), u in 0.0..1.0f64) {
            let w = build_wheel(&c, &f).unwrap();
            let fr = w.phase_fractions_at(1e-6 + (1.0 - 1e-6) * u);
            prop_assert!(fr.iter().all(|&x| (0.0..=1.0 + 1e-12).contains(&x)));
            prop_assert!((fr.iter().sum::<f64>() - 1.0).abs() < 1e-12
                || fr[0] + fr[1] > 1.0 - 1e-12);
        }

        #[test]
        fn spike_density_integrates_to_area((c, f) in case()) {
            // midpoint rule on the constant density 2 r f(r)
            let w = build_wheel(&c, &f).unwrap();
            let n = 50;
            let h = (w.r_env - w.r0) / n as f64;
            let s: f64 = (0..n)
                .map(|i| {
                    let r = w.r0 + (i as f64 + 0.5) * h;
                    2.0 * r * w.spike_fraction_k1(r) * h
                })
                .sum();
            prop_assert!((s - w.spike_area_k1).abs() < 1e-12);
        }
    }
}
