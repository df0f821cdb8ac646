//! Axisymmetric conduction in a radial profile embedded in an effective
//! medium.
//!
//! Under the far field `u -> r cos(theta)` the potential is `u(r) cos(theta)`
//! with
//!
//! ```text
//! (r K_r u')' = K_theta u / r,    u(0) = 0.
//! ```
//!
//! Isotropic pieces have `u = A r + C / r`. In a spiky piece `K_r = inf`
//! freezes `u`, while the radial flux `F = r K_r u'` picks up
//! `alpha u` per unit radius from the circumferential current. Outside,
//! `u = r + B / r` in the medium `k_star`; the profile is invisible when the
//! dipole `B` vanishes.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::optimize::{bisect, central_derivative, golden_section_min, illinois};
use crate::phases::{classify_regime, ConductorSet, Fractions, Regime};
use crate::wheel::{radial_profile, w2_123_unchecked, RadialProfile, SegmentKind};

/// Relative tolerance of the invisibility iteration.
pub const INVISIBILITY_TOL: f64 = 1e-12;
/// Iteration cap of the invisibility iteration.
pub const MAX_SECANT_ITER: usize = 100;

/// General solution on one segment, scaled to the far field `u -> r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SegmentSolution {
    /// `u = a r + c / r`.
    Isotropic { a: f64, c: f64 },
    /// `u` constant; the radial flux grows from `flux_in` to `flux_out`.
    Spiky { u: f64, flux_in: f64, flux_out: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialSolution {
    pub segments: Vec<SegmentSolution>,
    /// Coefficient of `1/r` in the exterior potential.
    pub dipole_coefficient: f64,
    /// `F(R) / u(R)` at the outer radius `R`: the energy of the profile per
    /// unit squared boundary potential.
    pub admittance: f64,
    /// Normalized energy of the profile, see [`assemblage_energy`].
    pub energy: f64,
    pub k_star: f64,
}

/// Value and flux at the end of each segment for the hub solution `u = r`
/// near the origin, before scaling.
struct Sweep {
    segments: Vec<SegmentSolution>,
    u: f64,
    flux: f64,
}

fn check_profile(p: &RadialProfile) -> Result<()> {
    let Some(first) = p.segments.first() else {
        return Err(Error::SingularProfile("no segments".into()));
    };
    if first.r_a != 0.0 {
        return Err(Error::SingularProfile("profile must start at r = 0".into()));
    }
    if !matches!(first.kind, SegmentKind::Isotropic(_)) {
        return Err(Error::SingularProfile(
            "a spiky core carries no potential".into(),
        ));
    }
    for (i, s) in p.segments.iter().enumerate() {
        if !(s.r_b > s.r_a) {
            return Err(Error::SingularProfile(format!(
                "segment {i} has zero measure [{}, {}]",
                s.r_a, s.r_b
            )));
        }
        if i > 0 && s.r_a != p.segments[i - 1].r_b {
            return Err(Error::SingularProfile(format!("gap before segment {i}")));
        }
        let ok = match s.kind {
            SegmentKind::Isotropic(k) => k > 0.0 && k.is_finite(),
            SegmentKind::Spiky { alpha } => alpha > 0.0 && alpha.is_finite(),
        };
        if !ok {
            return Err(Error::SingularProfile(format!(
                "segment {i} has a nonpositive modulus"
            )));
        }
    }
    Ok(())
}

fn sweep(p: &RadialProfile) -> Sweep {
    let mut segments = Vec::with_capacity(p.segments.len());
    let (mut u, mut flux) = (0.0, 0.0);
    for (i, s) in p.segments.iter().enumerate() {
        match s.kind {
            SegmentKind::Isotropic(k) => {
                let (a, c) = if i == 0 {
                    (1.0, 0.0)
                } else {
                    ((u + flux / k) / (2.0 * s.r_a), s.r_a * (u - flux / k) / 2.0)
                };
                u = a * s.r_b + c / s.r_b;
                flux = k * (a * s.r_b - c / s.r_b);
                segments.push(SegmentSolution::Isotropic { a, c });
            }
            SegmentKind::Spiky { alpha } => {
                let flux_in = flux;
                flux += alpha * u * (s.r_b - s.r_a);
                segments.push(SegmentSolution::Spiky {
                    u,
                    flux_in,
                    flux_out: flux,
                });
            }
        }
    }
    Sweep { segments, u, flux }
}

fn scale(s: SegmentSolution, by: f64) -> SegmentSolution {
    match s {
        SegmentSolution::Isotropic { a, c } => SegmentSolution::Isotropic {
            a: a * by,
            c: c * by,
        },
        SegmentSolution::Spiky {
            u,
            flux_in,
            flux_out,
        } => SegmentSolution::Spiky {
            u: u * by,
            flux_in: flux_in * by,
            flux_out: flux_out * by,
        },
    }
}

/// Solves the profile inside an exterior medium `k_star` with far field
/// `u -> r`.
pub fn solve_radial(p: &RadialProfile, k_star: f64) -> Result<RadialSolution> {
    check_profile(p)?;
    if !(k_star > 0.0 && k_star.is_finite()) {
        return Err(Error::NonPositive(k_star));
    }
    let sw = sweep(p);
    let big_r = p.radius();
    let admittance = sw.flux / sw.u;
    // exterior u = r + b / r matches value and flux at R:
    // s u(R) = R + b/R,  s F(R) = k_star (R - b/R)
    let b_over_r = big_r * (k_star - admittance) / (k_star + admittance);
    let s = (big_r + b_over_r) / sw.u;
    let segments: Vec<_> = sw.segments.iter().map(|&x| scale(x, s)).collect();
    let mut sol = RadialSolution {
        segments,
        dipole_coefficient: b_over_r * big_r,
        admittance,
        energy: 0.0,
        k_star,
    };
    sol.energy = assemblage_energy(p, &sol);
    Ok(sol)
}

/// The normalized energy `int (K_r u'^2 + K_theta u^2 / r^2) r dr / u(R)^2`
/// of the profile, integrated segment by segment. A homogeneous disk of
/// conductivity `k` gives `k`.
pub fn assemblage_energy(p: &RadialProfile, sol: &RadialSolution) -> f64 {
    let mut total = 0.0;
    let mut u_end = 0.0;
    for (seg, s) in p.segments.iter().zip(&sol.segments) {
        let (ra, rb) = (seg.r_a, seg.r_b);
        match (*s, seg.kind) {
            (SegmentSolution::Isotropic { a, c }, SegmentKind::Isotropic(k)) => {
                let inner = if c == 0.0 { 0.0 } else { c * c / (ra * ra) };
                total += k * (a * a * (rb * rb - ra * ra) + inner - c * c / (rb * rb));
                u_end = a * rb + c / rb;
            }
            (SegmentSolution::Spiky { u, .. }, SegmentKind::Spiky { alpha }) => {
                total += alpha * u * u * (rb - ra);
                u_end = u;
            }
            _ => unreachable!("solution does not match its profile"),
        }
    }
    total / (u_end * u_end)
}

/// The `k_star` that makes the profile invisible, by a bracketing secant
/// iteration on the dipole coefficient.
pub fn effective_conductivity(p: &RadialProfile) -> Result<f64> {
    check_profile(p)?;
    let dipole = |k: f64| solve_radial(p, k).map_or(f64::NAN, |s| s.dipole_coefficient);
    // the admittance lies between the extreme local conductivities, but
    // spiky pieces have no isotropic value to bound it; expand instead
    let k_min = p
        .segments
        .iter()
        .filter_map(|s| match s.kind {
            SegmentKind::Isotropic(k) => Some(k),
            SegmentKind::Spiky { .. } => None,
        })
        .fold(f64::INFINITY, f64::min);
    let mut lo = 0.5 * k_min;
    let mut hi = 2.0 * k_min;
    while dipole(lo) > 0.0 {
        lo *= 0.5;
    }
    let mut last = dipole(hi);
    while last < 0.0 {
        hi *= 2.0;
        let next = dipole(hi);
        // the dipole increases with k_star
        assert!(next >= last, "dipole is not monotone in k_star");
        last = next;
        if !hi.is_finite() {
            return Err(Error::NoConvergence {
                what: "invisibility bracket",
                iterations: 0,
            });
        }
    }
    illinois(dipole, lo, hi, INVISIBILITY_TOL, MAX_SECANT_ITER)
}

/// Energy of the homogenized `W2_123` wheel with hub radius `r0`; `NaN` where
/// the continued profile stops being meaningful.
pub fn w2_123_energy(c: &ConductorSet, f: &Fractions, r0: f64) -> f64 {
    if !(r0 > 0.0 && r0 < 1.0) {
        return f64::NAN;
    }
    let p = radial_profile(&w2_123_unchecked(f, r0), c);
    solve_radial(&p, 1.0).map_or(f64::NAN, |s| s.energy)
}

/// Optimal hub radius of the small-`m1` wheel, found by minimizing the
/// radial-solver energy.
///
/// Golden-section search on the energy only locates the minimizer to about
/// the square root of machine precision, so it is followed by bisection on
/// a five-point derivative. The derivative stencil may step slightly past
/// `sqrt(m2)`, where the profile is continued analytically.
pub fn optimize_r0(c: &ConductorSet, f: &Fractions) -> Result<f64> {
    let regime = classify_regime(c, f);
    if regime != Regime::SmallM1 {
        return Err(Error::RegimeMismatch {
            expected: Regime::SmallM1.label(),
            actual: regime.label(),
        });
    }
    // the k2 spikes need r0 <= sqrt(m2); all spikes fit at the hub rim iff
    // r0 >= 1 - sqrt(m3)
    let hi = f.m2().sqrt();
    let lo = (1.0 - f.m3().sqrt()).max(1e-9 * hi);
    let w = |r: f64| w2_123_energy(c, f, r);
    let coarse = golden_section_min(w, lo, hi, 1e-9 * hi);

    let mut h = 1e-4 * hi;
    let slope = |r: f64, h: f64| central_derivative(&mut |x| w(x), r, h);
    while !slope(coarse.x, h).is_finite() {
        h *= 0.5;
        if h < 1e-12 {
            return Ok(coarse.x);
        }
    }
    let mut d = 4.0 * (1e-9 * hi).max(1e-12);
    let (mut a, mut b) = (coarse.x - d, coarse.x + d);
    while !(slope(a, h) < 0.0 && slope(b, h) > 0.0) {
        d *= 4.0;
        if d > 1e-3 * hi {
            return Ok(coarse.x);
        }
        a = coarse.x - d;
        b = coarse.x + d;
    }
    bisect(|r| slope(r, h), a, b, 1e-15)
}

/// Finite-volume cross-check of [`effective_conductivity`]: spiky segments
/// get the large finite radial conductivity `contrast`, every segment is
/// cut into uniform cells of width about `h`, and the tridiagonal system
/// with `u(0) = 0`, `u(R) = R` is solved directly.
///
/// Converges as `O(h^2) + O(1/contrast)`.
pub fn radial_fd(p: &RadialProfile, contrast: f64, h: f64) -> Result<f64> {
    check_profile(p)?;
    if !(h > 0.0) || !(contrast > 0.0) {
        return Err(Error::InvalidResolution(format!(
            "h = {h}, contrast = {contrast}"
        )));
    }
    let mut nodes = vec![0.0];
    let mut kinds = Vec::new();
    for s in &p.segments {
        let n = ((s.r_b - s.r_a) / h).ceil().max(1.0) as usize;
        for i in 1..=n {
            nodes.push(s.r_a + (s.r_b - s.r_a) * i as f64 / n as f64);
            kinds.push(s.kind);
        }
    }
    let n = nodes.len() - 1;
    if n < 2 {
        return Err(Error::InvalidResolution(format!(
            "h = {h} leaves no interior node"
        )));
    }
    // cell i joins nodes i and i+1
    let trans: Vec<f64> = (0..n)
        .map(|i| {
            let kr = match kinds[i] {
                SegmentKind::Isotropic(k) => k,
                SegmentKind::Spiky { .. } => contrast,
            };
            kr * 0.5 * (nodes[i] + nodes[i + 1]) / (nodes[i + 1] - nodes[i])
        })
        .collect();
    // midpoint rule for K_theta u / r over the half of cell i next to node j
    let half_source = |i: usize, j: usize| -> f64 {
        let len = 0.5 * (nodes[i + 1] - nodes[i]);
        match kinds[i] {
            SegmentKind::Isotropic(k) => k * len / nodes[j],
            SegmentKind::Spiky { alpha } => alpha * len,
        }
    };
    // unknowns are the interior nodes 1..n-1
    let m = n - 1;
    let source: Vec<f64> = (1..n)
        .map(|i| half_source(i - 1, i) + half_source(i, i))
        .collect();
    let big_r = nodes[n];
    let mut rhs = vec![0.0; m];
    rhs[m - 1] = trans[n - 1] * big_r;
    let u = chain_solve(&trans, &source, &rhs);
    // the outer current is the sum of all sources; differencing nearly equal
    // potentials across stiff faces would lose it to cancellation
    let mut flux = trans[0] * u[0] + half_source(n - 1, n) * big_r;
    for j in 0..m {
        flux += (half_source(j, j + 1) + half_source(j + 1, j + 1)) * u[j];
    }
    Ok(flux / big_r)
}

/// Solves the chain `-T[j] u[j-1] + (T[j] + T[j+1] + S[j]) u[j] - T[j+1] u[j+1] = b[j]`
/// with `u[-1] = u[m] = 0`, where `T` has one more entry than `S`.
///
/// Plain Thomas elimination forms `den - T` and loses the small sources to
/// cancellation once `T` is stiff, so the excess `den - T[j+1]` is carried
/// instead; every update is then a sum of positive terms.
pub(crate) fn chain_solve(t: &[f64], s: &[f64], b: &[f64]) -> Vec<f64> {
    let m = s.len();
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    let mut q = 1.0;
    let mut d_prev = 0.0;
    for j in 0..m {
        let excess = s[j] + t[j] * q;
        let den = t[j + 1] + excess;
        c[j] = t[j + 1] / den;
        d[j] = (b[j] + t[j] * d_prev) / den;
        q = excess / den;
        d_prev = d[j];
    }
    let mut u = d;
    for j in (0..m - 1).rev() {
        u[j] += c[j] * u[j + 1];
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::lower_bound;
    use crate::wheel::{build_wheel, coated_circles, Segment};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn k12() -> ConductorSet {
        ConductorSet::new(1.0, 2.0).unwrap()
    }

    fn fr(m1: f64, m2: f64) -> Fractions {
        Fractions::new(m1, m2).unwrap()
    }

    fn wheel_profile(m1: f64, m2: f64) -> RadialProfile {
        radial_profile(&build_wheel(&k12(), &fr(m1, m2)).unwrap(), &k12())
    }

    #[test]
    fn homogeneous_is_invisible() {
        let p = RadialProfile::homogeneous(2.0);
        let s = solve_radial(&p, 2.0).unwrap();
        assert!(s.dipole_coefficient.abs() < 1e-15);
        assert_eq!(s.segments[0], SegmentSolution::Isotropic { a: 1.0, c: 0.0 });
        assert_relative_eq!(s.energy, 2.0, max_relative = 1e-15);
    }

    #[test]
    fn reference_wheels_attain_the_bound() {
        for (m1, want) in [(0.14, 39.0 / 7.0), (0.1, 62.0 / 9.0), (0.3, 23.0 / 7.0)] {
            let k = effective_conductivity(&wheel_profile(m1, 0.25)).unwrap();
            assert_relative_eq!(k, want, max_relative = 1e-12);
        }
        let s = solve_radial(&wheel_profile(0.14, 0.25), 39.0 / 7.0).unwrap();
        assert!(s.dipole_coefficient.abs() < 1e-12);
    }

    #[test]
    fn small_m1_energy_closed_form() {
        // k2 (2 / r0 - 1) at the optimal hub radius
        let s = solve_radial(&wheel_profile(0.1, 0.25), 1.0).unwrap();
        assert_relative_eq!(s.energy, 2.0 * (2.0 / 0.45 - 1.0), max_relative = 1e-13);
    }

    #[test]
    fn energy_decomposition() {
        let p = wheel_profile(0.14, 0.25);
        let s = solve_radial(&p, 3.0).unwrap();
        let SegmentSolution::Isotropic { a, c } = s.segments[0] else {
            panic!()
        };
        assert_eq!(c, 0.0);
        let SegmentSolution::Spiky { u, .. } = s.segments[1] else {
            panic!()
        };
        // hub u = r / r0 relative to the boundary value
        assert_relative_eq!(a / u, 2.0, max_relative = 1e-14);
        let hub = 2.0 * (a / u).powi(2) * 0.25;
        assert_relative_eq!(hub, 2.0, max_relative = 1e-14);
        assert_relative_eq!(s.energy - hub, 2.0 * 0.25 / 0.14, max_relative = 1e-13);
    }

    #[test]
    fn coated_circle_consistency() {
        // k2 core of fraction 0.5 in k1: invisibility reproduces the recursion
        let p = RadialProfile {
            segments: vec![
                Segment {
                    r_a: 0.0,
                    r_b: 0.5f64.sqrt(),
                    kind: SegmentKind::Isotropic(2.0),
                },
                Segment {
                    r_a: 0.5f64.sqrt(),
                    r_b: 1.0,
                    kind: SegmentKind::Isotropic(1.0),
                },
            ],
        };
        let k = effective_conductivity(&p).unwrap();
        assert_relative_eq!(k, coated_circles(1.0, 2.0, 0.5), max_relative = 1e-12);
        // enveloping a wheel by k1
        let inner = wheel_profile(0.14, 0.25);
        let kn = effective_conductivity(&inner).unwrap();
        for c in [0.1, 0.4, 0.9] {
            let k = effective_conductivity(&inner.enveloped(1.0, c)).unwrap();
            assert_relative_eq!(k, coated_circles(1.0, kn, c), max_relative = 1e-10);
        }
    }

    #[test]
    fn vanishing_m1_gives_ideal_core_coated_circle() {
        let k = effective_conductivity(&wheel_profile(0.0, 0.25)).unwrap();
        assert_relative_eq!(k, 14.0, max_relative = 1e-12);
    }

    #[test]
    fn optimal_hub_radius() {
        let c = k12();
        assert_relative_eq!(
            optimize_r0(&c, &fr(0.1, 0.25)).unwrap(),
            0.45,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            optimize_r0(&c, &fr(0.125 - 1e-12, 0.25)).unwrap(),
            0.5,
            epsilon = 1e-10
        );
        let same = ConductorSet::new(1.0, 1.0).unwrap();
        let f = fr(0.1, 0.25);
        assert_eq!(classify_regime(&same, &f), Regime::SmallM1);
        let r0 = optimize_r0(&same, &f).unwrap();
        assert_relative_eq!(r0, 0.35, epsilon = 1e-12);
        assert_relative_eq!(
            w2_123_energy(&same, &f, r0),
            lower_bound(&same, &f).value,
            max_relative = 1e-12
        );
        assert!(matches!(
            optimize_r0(&c, &fr(0.14, 0.25)),
            Err(Error::RegimeMismatch { .. })
        ));
    }

    #[test]
    fn singular_profiles() {
        let spiky = RadialProfile {
            segments: vec![Segment {
                r_a: 0.0,
                r_b: 1.0,
                kind: SegmentKind::Spiky { alpha: 1.0 },
            }],
        };
        assert!(matches!(
            solve_radial(&spiky, 1.0),
            Err(Error::SingularProfile(_))
        ));
        let empty = RadialProfile {
            segments: vec![Segment {
                r_a: 0.0,
                r_b: 0.0,
                kind: SegmentKind::Isotropic(1.0),
            }],
        };
        assert!(solve_radial(&empty, 1.0).is_err());
        let p = wheel_profile(0.14, 0.25);
        let mut bad = p.clone();
        bad.segments[1].kind = SegmentKind::Spiky { alpha: 0.0 };
        assert!(solve_radial(&bad, 1.0).is_err());
    }

    #[test]
    fn finite_volume_converges() {
        // the midpoint scheme is exact on u = A r and on frozen spikes, so
        // the grid error shows up only through the k1 envelope
        let p = wheel_profile(0.3, 0.25);
        let exact = 23.0 / 7.0;
        let err = |h: f64| (radial_fd(&p, 1e9, h).unwrap() - exact).abs();
        let (e1, e2) = (err(5e-3), err(2.5e-3));
        assert!(e1 < 1e-4);
        assert!((e1 / e2 - 4.0).abs() < 0.5, "ratio {}", e1 / e2);
        let p = wheel_profile(0.14, 0.25);
        let gap = |k: f64| radial_fd(&p, k, 1e-3).unwrap() - 39.0 / 7.0;
        let (g3, g4) = (gap(1e3), gap(1e4));
        assert!(g3 < 0.0 && g4 < 0.0);
        assert!((g3 / g4 - 10.0).abs() < 1.0, "ratio {}", g3 / g4);
    }

    fn case() -> impl Strategy<Value = (ConductorSet, Fractions)> {
        (0.1..10.0f64, 1.0..20.0f64, 0.01..0.95f64, 0.0..1.0f64).prop_map(|(k1, r, m2, s)| {
            let c = ConductorSet::new(k1, k1 * r).unwrap();
            (c, Fractions::new((1.0 - m2) * s, m2).unwrap())
        })
    }

    proptest! {
        #[test]
        fn energy_equals_invisible_medium((c, f) in case()) {
            let p = radial_profile(&build_wheel(&c, &f).unwrap(), &c);
            let k = effective_conductivity(&p).unwrap();
            let s = solve_radial(&p, k).unwrap();
            prop_assert!((s.energy - k).abs() <= 1e-10 * k);
            prop_assert!((k - lower_bound(&c, &f).value).abs() <= 1e-9 * k);
        }

        #[test]
        fn dipole_increases_with_k_star((c, f) in case(), a in 0.1..10.0f64, b in 0.1..10.0f64) {
            let p = radial_profile(&build_wheel(&c, &f).unwrap(), &c);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let d = |k| solve_radial(&p, k * c.k2()).unwrap().dipole_coefficient;
            prop_assert!(d(lo) <= d(hi));
        }
    }
}
