//! Brute-force attainment check: a rasterized wheel with finitely many
//! spikes and a finite stand-in for the ideal phase is embedded in a
//! candidate effective medium and the conduction problem is solved on a
//! polar finite-volume grid.
//!
//! The rim carries `u = r_out cos(theta)`. If the medium conductivity
//! `k_star` equals the effective conductivity of the inclusion, the outside
//! potential stays `r cos(theta)` and the dipole measured at the probe
//! radius vanishes; [`measure_effective`] searches for that `k_star`.

mod cg;
mod grid;

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::bounds::{DetCondition, FieldSpec};
use crate::error::{Error, Result};
use crate::phases::Phase;
use crate::raster::PhaseMap;
use crate::wheel::WheelSpec;

pub use cg::{pcg, pcg_deflated, CgStats, Csr, Preconditioner};
pub use grid::PolarGrid;

/// Solver settings for the embedded problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverOptions {
    /// Radius of the Dirichlet rim.
    pub r_out: f64,
    /// Width ratio of consecutive exterior rings.
    pub growth: f64,
    /// Relative residual at which conjugate gradients stop.
    pub tol: f64,
    /// Iteration cap; `None` means `50 sqrt(unknowns)`.
    pub max_iter: Option<usize>,
    pub preconditioner: Preconditioner,
    /// Deflate the connected high-conductivity groups.
    pub deflate: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            r_out: 4.0,
            growth: 1.08,
            tol: 1e-10,
            max_iter: None,
            preconditioner: Preconditioner::IncompleteCholesky,
            deflate: true,
        }
    }
}

/// A converged potential on the polar grid.
#[derive(Debug, Clone)]
pub struct SectorField {
    pub grid: PolarGrid,
    /// Phase code of every inclusion cell, as in the map.
    pub phases: Vec<u8>,
    /// Potential per unknown (index `0` is the center cell).
    pub potential: Vec<f64>,
    /// Direction of the applied field.
    pub phi: f64,
    /// Estimated coefficient `B` of the exterior `B cos(theta) / r`.
    pub dipole_amplitude: f64,
    pub residual_norm: f64,
    pub iterations: usize,
    /// Relative mismatch between the energy of the field and the current
    /// through the rim (discrete Green identity).
    pub green_mismatch: f64,
}

impl SectorField {
    pub fn k_star(&self) -> f64 {
        self.grid.k_star
    }

    /// Potential of cell `(i, j)`; ring `0` returns the center value.
    pub fn u(&self, i: usize, j: usize) -> f64 {
        if i == 0 {
            self.potential[0]
        } else {
            self.potential[self.grid.index(i, j)]
        }
    }

    /// First cosine coefficient of ring `i` relative to the field direction.
    pub fn cos_amplitude(&self, i: usize) -> f64 {
        let g = &self.grid;
        let s: f64 = (0..g.ntheta)
            .map(|j| self.u(i, j) * (g.theta(j) - self.phi).cos())
            .sum();
        2.0 * s / g.ntheta as f64
    }

    /// Cartesian gradient in cell `(i, j)`, `1 <= i`, from the one-sided
    /// normal derivatives on its four faces. Each face current is divided
    /// by this cell's own conductivity, which keeps the estimate local to
    /// the phase even next to a high-contrast neighbour.
    pub fn gradient(&self, i: usize, j: usize) -> [f64; 2] {
        let g = &self.grid;
        let nt = g.ntheta;
        let k = g.k_at(i, j);
        let u = self.u(i, j);
        let dth = g.dtheta();
        let (a, b) = (g.edges[i], g.edges[i + 1]);
        let inner = g.radial_trans(i - 1, j) * (u - self.u(i - 1, j)) / (k * a * dth);
        let outer = if i + 1 < g.rings() {
            g.radial_trans(i, j) * (self.u(i + 1, j) - u) / (k * b * dth)
        } else {
            let rim = g.r_out() * (g.theta(j) - self.phi).cos();
            g.boundary_trans(j) * (rim - u) / (k * g.r_out() * dth)
        };
        let jl = (j + nt - 1) % nt;
        let jr = (j + 1) % nt;
        let left = g.angular_trans(i, jl) * (u - self.u(i, jl)) / (k * (b - a));
        let right = g.angular_trans(i, j) * (self.u(i, jr) - u) / (k * (b - a));
        let er = 0.5 * (inner + outer);
        let et = 0.5 * (left + right);
        let th = g.theta(j);
        [er * th.cos() - et * th.sin(), er * th.sin() + et * th.cos()]
    }
}

fn check_inputs(map: &PhaseMap, k_star: f64, opts: &SolverOptions) -> Result<()> {
    if !(k_star > 0.0 && k_star.is_finite()) {
        return Err(Error::NonPositive(k_star));
    }
    if !(opts.r_out >= 2.0) {
        return Err(Error::InvalidArgument(format!(
            "r_out = {} must be at least 2",
            opts.r_out
        )));
    }
    if !(opts.growth >= 1.0) {
        return Err(Error::InvalidArgument(format!("growth = {}", opts.growth)));
    }
    if map.values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidArgument(format!(
            "phase conductivities {:?}",
            map.values
        )));
    }
    if map.cells.contains(&2) {
        let k_max = map.values[0].max(map.values[1]);
        if map.values[2] <= k_max {
            return Err(Error::BadContrast {
                contrast: map.values[2],
                k_max,
            });
        }
    }
    Ok(())
}

/// Solves the embedded problem with the field along `x`.
pub fn solve_embedded(map: &PhaseMap, k_star: f64, opts: &SolverOptions) -> Result<SectorField> {
    solve_embedded_from(map, k_star, opts, 0.0, None)
}

/// As [`solve_embedded`], with the field along `(cos phi, sin phi)` and an
/// optional initial potential.
pub fn solve_embedded_from(
    map: &PhaseMap,
    k_star: f64,
    opts: &SolverOptions,
    phi: f64,
    warm: Option<&[f64]>,
) -> Result<SectorField> {
    check_inputs(map, k_star, opts)?;
    let grid = PolarGrid::new(map, k_star, opts.r_out, opts.growth);
    let a = grid.assemble();
    let b = grid.rhs(phi);
    let n = grid.unknowns();
    let mut x = match warm {
        Some(w) if w.len() == n => w.to_vec(),
        _ => vec![0.0; n],
    };
    let cap = opts
        .max_iter
        .unwrap_or_else(|| (50.0 * (n as f64).sqrt()).ceil() as usize);
    let groups = if opts.deflate {
        grid.stiff_groups(&a)
    } else {
        Vec::new()
    };
    let st = pcg_deflated(&a, &b, &mut x, opts.tol, cap, opts.preconditioner, &groups);
    if !st.converged {
        return Err(Error::NoConvergence {
            what: "conjugate gradients",
            iterations: st.iterations,
        });
    }
    // energy minus rim current is u . (A u - b)
    let mut ax = vec![0.0; n];
    a.mul(&x, &mut ax);
    let energy_gap: f64 = x
        .iter()
        .zip(ax.iter().zip(&b))
        .map(|(u, (p, q))| u * (p - q))
        .sum();
    let rim = grid.rings() - 1;
    let rim_current: f64 = (0..grid.ntheta)
        .map(|j| {
            let g = grid.r_out() * (grid.theta(j) - phi).cos();
            grid.boundary_trans(j) * (g - x[grid.index(rim, j)]) * g
        })
        .sum();
    let mut field = SectorField {
        grid,
        phases: map.cells.clone(),
        potential: x,
        phi,
        dipole_amplitude: 0.0,
        residual_norm: st.relative_residual,
        iterations: st.iterations,
        green_mismatch: (energy_gap / rim_current).abs(),
    };
    field.dipole_amplitude = dipole(&field);
    Ok(field)
}

/// Dipole estimate at the probe radius `(1 + r_out) / 2`. The exterior
/// solution is `A r + B / r` with `A r_out + B / r_out = r_out`, so the
/// departure of the cosine coefficient from the homogeneous grid's reference
/// is `B (1/rho - rho / r_out^2)`.
fn dipole(field: &SectorField) -> f64 {
    let g = &field.grid;
    let reference = g.homogeneous_reference();
    let r_out = g.r_out();
    let rho = 0.5 * (1.0 + r_out);
    let rings = g.rings();
    let mut i = g.nr;
    while i + 2 < rings && g.center(i + 1) < rho {
        i += 1;
    }
    let (ra, rb) = (g.center(i), g.center(i + 1));
    let w = ((rho - ra) / (rb - ra)).clamp(0.0, 1.0);
    let da = field.cos_amplitude(i) - reference[i];
    let db = field.cos_amplitude(i + 1) - reference[i + 1];
    let d = (1.0 - w) * da + w * db;
    d / (1.0 / rho - rho / (r_out * r_out))
}

/// Outcome of the search for the invisible medium.
#[derive(Debug, Clone)]
pub struct Measurement {
    pub k_num: f64,
    /// The field at the final `k_star`.
    pub field: SectorField,
    pub solves: usize,
    /// Conjugate-gradient iterations over all solves.
    pub iterations: usize,
}

/// Conductivity of a homogeneous disk with the dipole `b` measured in a
/// medium `k` with the rim at `r_out`. The exterior solution `a r + b / r`
/// with `a r_out + b / r_out = r_out` and the disk's flux `k_e (a + b) =
/// k (a - b)` give `k_e = k (1 - beta) / (1 + beta)`, `beta = b / a`.
fn invisible_estimate(k: f64, b: f64, r_out: f64) -> f64 {
    let beta = b / (1.0 - b / (r_out * r_out));
    k * (1.0 - beta) / (1.0 + beta)
}

/// Secant iteration on `k_star` that nulls the measured dipole, starting
/// from `k_guess` and the homogeneous-disk estimate it implies, and
/// warm-starting each solve from the previous potential.
pub fn measure_effective(
    map: &PhaseMap,
    k_guess: f64,
    opts: &SolverOptions,
) -> Result<Measurement> {
    const KTOL: f64 = 1e-6;
    const MAX_SOLVES: usize = 30;
    let iterations = std::cell::Cell::new(0);
    let solves = std::cell::Cell::new(0);
    let run = |k: f64, warm: Option<&[f64]>| -> Result<SectorField> {
        let f = solve_embedded_from(map, k, opts, 0.0, warm)?;
        iterations.set(iterations.get() + f.iterations);
        solves.set(solves.get() + 1);
        Ok(f)
    };
    let mut ka = k_guess;
    let mut fa = run(ka, None)?;
    if fa.dipole_amplitude == 0.0 {
        return Ok(Measurement {
            k_num: ka,
            field: fa,
            solves: solves.get(),
            iterations: iterations.get(),
        });
    }
    let mut kb = invisible_estimate(ka, fa.dipole_amplitude, opts.r_out).clamp(0.25 * ka, 4.0 * ka);
    if (kb - ka).abs() <= KTOL * ka {
        kb = ka * (1.0 + 10.0 * KTOL);
    }
    let mut fb = run(kb, Some(&fa.potential))?;
    loop {
        let (da, db) = (fa.dipole_amplitude, fb.dipole_amplitude);
        if db == 0.0 || (kb - ka).abs() <= KTOL * kb {
            break;
        }
        if da == db {
            return Err(Error::NoConvergence {
                what: "invisibility secant (flat dipole)",
                iterations: solves.get(),
            });
        }
        let next = (kb - db * (kb - ka) / (db - da)).clamp(0.25 * kb, 4.0 * kb);
        let fnext = run(next, Some(&fb.potential))?;
        ka = kb;
        fa = fb;
        kb = next;
        fb = fnext;
        if solves.get() >= MAX_SOLVES {
            return Err(Error::NoConvergence {
                what: "invisibility secant",
                iterations: solves.get(),
            });
        }
    }
    Ok(Measurement {
        k_num: kb,
        field: fb,
        solves: solves.get(),
        iterations: iterations.get(),
    })
}

/// The field under the loading turned by a quarter turn. For a map that a
/// quarter turn leaves unchanged it is read off the given field; otherwise
/// the problem is solved again.
pub fn quarter_turn(
    map: &PhaseMap,
    field: &SectorField,
    opts: &SolverOptions,
) -> Result<SectorField> {
    if map.quarter_symmetric() && field.phi == 0.0 {
        let g = &field.grid;
        let nt = g.ntheta;
        let q = nt / 4;
        let mut potential = field.potential.clone();
        for i in 1..g.rings() {
            for j in 0..nt {
                potential[g.index(i, j)] = field.potential[g.index(i, (j + nt - q) % nt)];
            }
        }
        let mut rotated = field.clone();
        rotated.potential = potential;
        rotated.phi = FRAC_PI_2;
        return Ok(rotated);
    }
    solve_embedded_from(map, field.k_star(), opts, field.phi + FRAC_PI_2, None)
}

/// One point of an extrapolation series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Run {
    pub n_spikes: usize,
    pub contrast: f64,
    /// Radial cell width inside the inclusion.
    pub h: f64,
    pub k_num: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extrapolation {
    pub k_inf: f64,
    /// Fitted coefficients in the order of `terms`.
    pub coefficients: Vec<f64>,
    /// Names of the fitted terms: `1`, `1/n`, `1/contrast`, `h^2`.
    pub terms: Vec<&'static str>,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
}

/// Least-squares fit of `k_num = k_inf + a / n + b / contrast + c h^2`,
/// keeping only the terms whose variable actually varies in the series.
pub fn extrapolate(runs: &[Run]) -> Result<Extrapolation> {
    if runs.len() < 3 {
        return Err(Error::IllConditionedFit(format!(
            "{} runs, need at least 3",
            runs.len()
        )));
    }
    type Term = (&'static str, fn(&Run) -> f64);
    let candidates: [Term; 3] = [
        ("1/n", |r| 1.0 / r.n_spikes as f64),
        ("1/contrast", |r| 1.0 / r.contrast),
        ("h^2", |r| r.h * r.h),
    ];
    let mut terms: Vec<Term> = vec![("1", |_| 1.0)];
    for t in candidates {
        let first = (t.1)(&runs[0]);
        if runs
            .iter()
            .any(|r| ((t.1)(r) - first).abs() > 1e-12 * first.abs().max(1e-300))
        {
            terms.push(t);
        }
    }
    if terms.len() > runs.len() {
        return Err(Error::IllConditionedFit(format!(
            "{} terms from {} runs",
            terms.len(),
            runs.len()
        )));
    }
    // scale each column to unit size before the SVD
    let m = runs.len();
    let n = terms.len();
    let mut a = DMatrix::zeros(m, n);
    let mut scales = vec![0.0; n];
    for (c, t) in terms.iter().enumerate() {
        let col: Vec<f64> = runs.iter().map(|r| (t.1)(r)).collect();
        scales[c] = col.iter().map(|x| x.abs()).fold(0.0, f64::max);
        for (rix, v) in col.iter().enumerate() {
            a[(rix, c)] = v / scales[c];
        }
    }
    let y = DVector::from_iterator(m, runs.iter().map(|r| r.k_num));
    let svd = a.clone().svd(true, true);
    let sv = &svd.singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    if !(smin > 1e-10 * smax) {
        return Err(Error::IllConditionedFit(format!(
            "singular values {smax:e} .. {smin:e}"
        )));
    }
    let x = svd
        .solve(&y, 0.0)
        .map_err(|e| Error::IllConditionedFit(e.to_string()))?;
    let resid = &y - &a * &x;
    let coefficients: Vec<f64> = x.iter().zip(&scales).map(|(v, s)| v / s).collect();
    Ok(Extrapolation {
        k_inf: coefficients[0],
        coefficients,
        terms: terms.iter().map(|t| t.0).collect(),
        residual: (resid.norm_squared() / m as f64).sqrt(),
    })
}

/// Summary of one phase's reconstructed fields.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseFieldStats {
    pub phase: Phase,
    /// Number of cells that entered the statistics.
    pub cells: usize,
    pub median_trace: f64,
    pub target_trace: f64,
    /// Share of cells whose trace is off by more than 5 %.
    pub trace_violation_rate: f64,
    /// Median of `|det E| / (|E|^2 / 2)`.
    pub median_det_ratio: f64,
    /// Share of cells violating the determinant condition at 5 % of
    /// `|E|^2 / 2`.
    pub det_violation_rate: f64,
    pub det_condition: DetCondition,
    /// Median and largest `|E - M| / |M|` where the field is prescribed.
    pub median_matrix_error: Option<f64>,
    pub max_matrix_error: Option<f64>,
    /// Median Frobenius norm.
    pub median_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldReport {
    pub phases: Vec<PhaseFieldStats>,
}

impl FieldReport {
    pub fn of(&self, phase: Phase) -> Option<&PhaseFieldStats> {
        self.phases.iter().find(|p| p.phase == phase)
    }
}

fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Reconstructs the 2x2 field `E` (columns: gradients under the `x` and `y`
/// loadings) in every inclusion cell and compares it with the optimality
/// conditions in `spec`.
///
/// Cells near interfaces are left out where the conditions only hold in the
/// bulk: the hub is sampled on `r < 0.8 r0`, the spiky annulus on rings at
/// least two cells away from its rims, and the outer envelope (if any) on
/// rings at least two cells inside it. The ideal phase uses every cell.
pub fn field_conditions_check(
    fx: &SectorField,
    fy: &SectorField,
    spec: &[FieldSpec],
    wheel: &WheelSpec,
) -> FieldReport {
    let g = &fx.grid;
    let dr = 1.0 / g.nr as f64;
    let mut phases = Vec::new();
    for fs in spec {
        let code = match fs.phase {
            Phase::One => 0u8,
            Phase::Two => 1,
            Phase::Ideal => 2,
        };
        let keep = |rho: f64| -> bool {
            match fs.phase {
                Phase::Ideal => true,
                Phase::Two => {
                    rho < 0.8 * wheel.r0
                        || (rho > wheel.r0 + 2.0 * dr && rho < wheel.r_env - 2.0 * dr)
                }
                Phase::One => {
                    (rho > wheel.r0 + 2.0 * dr && rho < wheel.r_env - 2.0 * dr)
                        || (rho > wheel.r_env + 2.0 * dr && rho < 1.0 - 2.0 * dr)
                }
            }
        };
        let mut traces = Vec::new();
        let mut det_ratios = Vec::new();
        let mut norms = Vec::new();
        let mut matrix_err = Vec::new();
        let (mut trace_bad, mut det_bad) = (0usize, 0usize);
        for i in 1..g.nr {
            let rho = g.center(i);
            if !keep(rho) {
                continue;
            }
            for j in 0..g.ntheta {
                if fx.phases[i * g.ntheta + j] != code {
                    continue;
                }
                let ga = fx.gradient(i, j);
                let gb = fy.gradient(i, j);
                let e = [[ga[0], gb[0]], [ga[1], gb[1]]];
                let tr = e[0][0] + e[1][1];
                let det = e[0][0] * e[1][1] - e[0][1] * e[1][0];
                let nrm2 = e.iter().flatten().map(|x| x * x).sum::<f64>();
                let half = 0.5 * nrm2;
                traces.push(tr);
                norms.push(nrm2.sqrt());
                det_ratios.push(if half > 0.0 { det.abs() / half } else { 0.0 });
                if fs.trace_value != 0.0 && ((tr - fs.trace_value) / fs.trace_value).abs() > 0.05 {
                    trace_bad += 1;
                }
                let det_ok = match fs.det_condition {
                    DetCondition::Zero => det.abs() <= 0.05 * half,
                    DetCondition::NonNegative => det >= -0.05 * half,
                    DetCondition::Unconstrained => true,
                };
                if !det_ok {
                    det_bad += 1;
                }
                if let Some(m) = fs.matrix_value {
                    // the hub carries the prescribed field; k2 spikes need not
                    if fs.phase != Phase::Two || rho < wheel.r0 {
                        let mn = m.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
                        let d = (0..2)
                            .flat_map(|r| (0..2).map(move |c| (r, c)))
                            .map(|(r, c)| (e[r][c] - m[r][c]).powi(2))
                            .sum::<f64>()
                            .sqrt();
                        matrix_err.push(if mn > 0.0 { d / mn } else { d });
                    }
                }
            }
        }
        let n = traces.len();
        let rate = |bad: usize| if n == 0 { 0.0 } else { bad as f64 / n as f64 };
        let max_err = matrix_err.iter().copied().fold(f64::NAN, f64::max);
        let has_matrix = fs.matrix_value.is_some() && !matrix_err.is_empty();
        phases.push(PhaseFieldStats {
            phase: fs.phase,
            cells: n,
            median_trace: median(&mut traces),
            target_trace: fs.trace_value,
            trace_violation_rate: rate(trace_bad),
            median_det_ratio: median(&mut det_ratios),
            det_violation_rate: rate(det_bad),
            det_condition: fs.det_condition,
            median_matrix_error: has_matrix.then(|| median(&mut matrix_err)),
            max_matrix_error: has_matrix.then_some(max_err),
            median_norm: median(&mut norms),
        });
    }
    FieldReport { phases }
}

/// Machine-readable summary of a verification run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub k_num: f64,
    pub bound: f64,
    pub rel_err: f64,
    pub grid: [usize; 2],
    pub n_spikes: Option<usize>,
    pub contrast: f64,
    pub solves: usize,
    pub iterations: usize,
    /// Dipole left at `k_num`.
    pub dipole_amplitude: f64,
    pub green_mismatch: f64,
}

impl VerificationReport {
    /// Summarizes a measurement against the reference value `bound`.
    pub fn new(map: &PhaseMap, m: &Measurement, bound: f64) -> Self {
        Self {
            k_num: m.k_num,
            bound,
            rel_err: (m.k_num - bound) / bound,
            grid: [map.nr, map.ntheta],
            n_spikes: map.n_spikes,
            contrast: map.values[2],
            solves: m.solves,
            iterations: m.iterations,
            dipole_amplitude: m.field.dipole_amplitude,
            green_mismatch: m.field.green_mismatch,
        }
    }
}
