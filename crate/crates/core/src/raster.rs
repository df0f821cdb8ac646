//! Finite-spike rasterizations of wheels on a polar grid, and their plain
//! PGM (P2) exchange format.
//!
//! The unit disk is cut into `nr` rings of equal width and `ntheta` equal
//! sectors. Each cell carries a phase code `0` (`k1`), `1` (`k2`) or `2`
//! (ideal conductor, stood in for by a large finite `contrast`).

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::phases::{ConductorSet, Fractions};
use crate::wheel::WheelSpec;

/// Largest allowed deviation of a measured phase fraction from its target.
pub const AREA_TOL: f64 = 2e-3;

/// Conjugate golden ratio, used for low-discrepancy spike dithering.
const DITHER_STEP: f64 = 0.618_033_988_749_894_8;

/// Cell-wise phase layout of a disk with the conductivities of its phases.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseMap {
    pub nr: usize,
    pub ntheta: usize,
    /// Phase code per cell, ring-major.
    pub cells: Vec<u8>,
    /// Conductivity of each phase code.
    pub values: [f64; 3],
    /// Number of spikes the map was built with, if any.
    pub n_spikes: Option<usize>,
    /// Target fractions `(m1, m2)`, if known.
    pub target: Option<(f64, f64)>,
}

impl PhaseMap {
    /// A disk made of one material.
    pub fn homogeneous(nr: usize, ntheta: usize, k: f64) -> Result<Self> {
        check_grid(nr, ntheta)?;
        Ok(Self {
            nr,
            ntheta,
            cells: vec![0; nr * ntheta],
            values: [k, k, k],
            n_spikes: None,
            target: None,
        })
    }

    /// Phase code of cell `(ring, sector)`.
    pub fn phase(&self, ring: usize, sector: usize) -> u8 {
        self.cells[ring * self.ntheta + sector]
    }

    /// Conductivity of cell `(ring, sector)`.
    pub fn conductivity(&self, ring: usize, sector: usize) -> f64 {
        self.values[self.phase(ring, sector) as usize]
    }

    /// Ring edges `0, 1/nr, ..., 1`.
    pub fn ring_edges(&self) -> Vec<f64> {
        (0..=self.nr).map(|i| i as f64 / self.nr as f64).collect()
    }

    /// Area fractions of the three phase codes.
    pub fn measured_fractions(&self) -> [f64; 3] {
        let mut out = [0.0; 3];
        let n2 = (self.nr * self.nr) as f64;
        for i in 0..self.nr {
            // ring area over disk area, shared by ntheta cells
            let cell = (2 * i + 1) as f64 / n2 / self.ntheta as f64;
            for j in 0..self.ntheta {
                out[self.phase(i, j) as usize] += cell;
            }
        }
        out
    }

    /// Whether a quarter turn maps the layout onto itself.
    pub fn quarter_symmetric(&self) -> bool {
        if self.ntheta % 4 != 0 {
            return false;
        }
        let q = self.ntheta / 4;
        (0..self.nr).all(|i| {
            (0..self.ntheta).all(|j| self.phase(i, j) == self.phase(i, (j + q) % self.ntheta))
        })
    }

    /// Plain-text PGM with one image row per ring (innermost first).
    pub fn to_pgm(&self) -> String {
        let mut s = String::from("P2\n");
        let (m1, m2) = self.target.unwrap_or((f64::NAN, f64::NAN));
        let _ = writeln!(
            s,
            "# k1={} k2={} contrast={} m1={} m2={} n_spikes={}",
            self.values[0],
            self.values[1],
            self.values[2],
            m1,
            m2,
            self.n_spikes.map_or(0, |n| n)
        );
        let _ = writeln!(s, "{} {}\n2", self.ntheta, self.nr);
        for i in 0..self.nr {
            let row: Vec<String> = (0..self.ntheta)
                .map(|j| self.phase(i, j).to_string())
                .collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }

    /// Parses the output of [`PhaseMap::to_pgm`]. Conductivities come from
    /// the comment line; without it the phase codes are kept and all
    /// conductivities are `NaN`, so the caller must assign them.
    pub fn from_pgm(text: &str) -> Result<Self> {
        let mut values = [f64::NAN; 3];
        let (mut m1, mut m2, mut n_spikes) = (f64::NAN, f64::NAN, 0usize);
        let mut tokens = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if let Some(comment) = line.strip_prefix('#') {
                for kv in comment.split_whitespace() {
                    let Some((k, v)) = kv.split_once('=') else {
                        continue;
                    };
                    let parse = || {
                        v.parse::<f64>()
                            .map_err(|e| Error::Pgm(format!("{k}: {e}")))
                    };
                    match k {
                        "k1" => values[0] = parse()?,
                        "k2" => values[1] = parse()?,
                        "contrast" => values[2] = parse()?,
                        "m1" => m1 = parse()?,
                        "m2" => m2 = parse()?,
                        "n_spikes" => n_spikes = parse()? as usize,
                        _ => {}
                    }
                }
                continue;
            }
            tokens.extend(line.split_whitespace());
        }
        let mut it = tokens.into_iter();
        if it.next() != Some("P2") {
            return Err(Error::Pgm("missing P2 magic".into()));
        }
        let mut num = |what: &str| -> Result<usize> {
            it.next()
                .ok_or_else(|| Error::Pgm(format!("missing {what}")))?
                .parse()
                .map_err(|e| Error::Pgm(format!("{what}: {e}")))
        };
        let ntheta = num("width")?;
        let nr = num("height")?;
        let maxval = num("maxval")?;
        if maxval != 2 {
            return Err(Error::Pgm(format!("maxval must be 2, got {maxval}")));
        }
        let mut cells = Vec::with_capacity(nr * ntheta);
        for _ in 0..nr * ntheta {
            let v = num("pixel")?;
            if v > 2 {
                return Err(Error::Pgm(format!("phase code {v} out of range")));
            }
            cells.push(v as u8);
        }
        if it.next().is_some() {
            return Err(Error::Pgm("trailing data".into()));
        }
        Ok(Self {
            nr,
            ntheta,
            cells,
            values,
            n_spikes: (n_spikes > 0).then_some(n_spikes),
            target: (m1.is_finite() && m2.is_finite()).then_some((m1, m2)),
        })
    }
}

fn check_grid(nr: usize, ntheta: usize) -> Result<()> {
    if nr < 2 || ntheta < 4 {
        return Err(Error::InvalidResolution(format!(
            "grid {nr} x {ntheta} is too small"
        )));
    }
    Ok(())
}

/// Builds a map whose ring `i` holds, as closely as whole cells allow, the
/// exact phase areas `areas(r_i, r_{i+1})` (in units of the disk area).
///
/// Every sector of `ntheta / n_spikes` cells holds one spike: a run of code
/// `0`, then code `1`, then code `2`. Per-sector counts are dithered so
/// their average matches the ring target, and the rounding left over in one
/// ring is carried into the next. The dither depends on the sector index
/// modulo `n_spikes / 4` when that divides evenly, which makes the layout
/// invariant under a quarter turn.
pub fn from_ring_areas<F>(
    nr: usize,
    ntheta: usize,
    n_spikes: usize,
    mut areas: F,
) -> Result<Vec<u8>>
where
    F: FnMut(f64, f64) -> [f64; 3],
{
    check_grid(nr, ntheta)?;
    if n_spikes < 4 {
        return Err(Error::InvalidResolution(format!(
            "need at least 4 spikes, got {n_spikes}"
        )));
    }
    if ntheta % (2 * n_spikes) != 0 {
        return Err(Error::InvalidResolution(format!(
            "ntheta = {ntheta} is not a multiple of 2 n_spikes = {}",
            2 * n_spikes
        )));
    }
    let width = ntheta / n_spikes;
    let period = if n_spikes % 4 == 0 {
        n_spikes / 4
    } else {
        n_spikes
    };
    let repeats = n_spikes / period;
    let dither: Vec<f64> = (0..period)
        .map(|s| (s as f64 * DITHER_STEP).fract())
        .collect();

    let mut cells = vec![2u8; nr * ntheta];
    let mut carry = [0.0f64; 2];
    let n2 = (nr * nr) as f64;
    for i in 0..nr {
        let (ra, rb) = (i as f64 / nr as f64, (i + 1) as f64 / nr as f64);
        let a = areas(ra, rb);
        let cell_area = (2 * i + 1) as f64 / n2 / ntheta as f64;
        let mut per_sector = [0.0; 2];
        for p in 0..2 {
            per_sector[p] = (a[p] / cell_area + carry[p]) / n_spikes as f64;
        }
        let mut placed = [0usize; 2];
        let row = &mut cells[i * ntheta..(i + 1) * ntheta];
        for (s, &phi) in dither.iter().enumerate() {
            let c0 = ((per_sector[0] + phi).floor().max(0.0) as usize).min(width);
            let c1 = ((per_sector[1] + phi).floor().max(0.0) as usize).min(width - c0);
            for rep in 0..repeats {
                let start = (rep * period + s) * width;
                row[start..start + c0].fill(0);
                row[start + c0..start + c0 + c1].fill(1);
            }
            placed[0] += c0 * repeats;
            placed[1] += c1 * repeats;
        }
        for p in 0..2 {
            carry[p] += a[p] / cell_area - placed[p] as f64;
        }
    }
    Ok(cells)
}

/// Rasterizes a wheel with `n_spikes` spikes; the ideal phase gets the
/// conductivity `contrast`.
pub fn rasterize_sector(
    w: &WheelSpec,
    c: &ConductorSet,
    n_spikes: usize,
    nr: usize,
    ntheta: usize,
    contrast: f64,
) -> Result<PhaseMap> {
    if !(contrast > c.k2()) {
        return Err(Error::BadContrast {
            contrast,
            k_max: c.k2(),
        });
    }
    let cells = from_ring_areas(nr, ntheta, n_spikes, |a, b| w.ring_areas(a, b))?;
    let areas = w.phase_areas();
    let map = PhaseMap {
        nr,
        ntheta,
        cells,
        values: [c.k1(), c.k2(), contrast],
        n_spikes: Some(n_spikes),
        target: Some((areas[0], areas[1])),
    };
    check_fractions(&map, areas)?;
    Ok(map)
}

/// A coated circle: ideal core of area fraction `core`, shell `k_shell`.
/// The shell is stored under code `1`.
pub fn rasterize_coated_circle(
    core: f64,
    k_shell: f64,
    n_spikes: usize,
    nr: usize,
    ntheta: usize,
    contrast: f64,
) -> Result<PhaseMap> {
    if !(contrast > k_shell) {
        return Err(Error::BadContrast {
            contrast,
            k_max: k_shell,
        });
    }
    let rc = core.sqrt();
    let cells = from_ring_areas(nr, ntheta, n_spikes, |a, b| {
        let (ca, cb) = (a.min(rc), b.min(rc));
        let inner = cb * cb - ca * ca;
        [0.0, b * b - a * a - inner, inner]
    })?;
    let map = PhaseMap {
        nr,
        ntheta,
        cells,
        values: [k_shell, k_shell, contrast],
        n_spikes: Some(n_spikes),
        target: Some((0.0, 1.0 - core)),
    };
    check_fractions(&map, [0.0, 1.0 - core, core])?;
    Ok(map)
}

fn check_fractions(map: &PhaseMap, target: [f64; 3]) -> Result<()> {
    let got = map.measured_fractions();
    for p in 0..3 {
        if (got[p] - target[p]).abs() > AREA_TOL {
            return Err(Error::ResolutionTooCoarse(format!(
                "phase {p} covers {:.6}, target {:.6}",
                got[p], target[p]
            )));
        }
    }
    Ok(())
}

/// Target fractions as a [`Fractions`] value, when the map records them.
pub fn target_fractions(map: &PhaseMap) -> Option<Fractions> {
    map.target.and_then(|(m1, m2)| Fractions::new(m1, m2).ok())
}
