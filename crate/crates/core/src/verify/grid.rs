//! The polar finite-volume grid: a phase map inside `r < 1`, the effective
//! medium out to `r_out`, and a single polygonal cell at the origin.

use std::f64::consts::PI;

use crate::radial::chain_solve;
use crate::raster::PhaseMap;

use super::cg::Csr;

/// Ring edges and cell conductivities of the embedded problem.
///
/// Ring `0` of the map collapses into the center cell, index `0`. Cell
/// `(i, j)` with `i >= 1` has unknown index `1 + (i - 1) ntheta + j`.
#[derive(Debug, Clone)]
pub struct PolarGrid {
    /// Number of inclusion rings (including the center ring).
    pub nr: usize,
    pub ntheta: usize,
    /// Ring edges from `0` to `r_out`.
    pub edges: Vec<f64>,
    /// Conductivity per unknown.
    pub k: Vec<f64>,
    pub k_star: f64,
}

impl PolarGrid {
    /// Exterior rings start with the inclusion's ring width and grow
    /// geometrically by about `growth`, rescaled to end exactly at `r_out`.
    pub fn new(map: &PhaseMap, k_star: f64, r_out: f64, growth: f64) -> Self {
        let nr = map.nr;
        let nt = map.ntheta;
        let mut edges: Vec<f64> = (0..=nr).map(|i| i as f64 / nr as f64).collect();
        let dr = 1.0 / nr as f64;
        let mut widths = Vec::new();
        let mut total = 0.0;
        let mut w = dr;
        while total < r_out - 1.0 {
            widths.push(w);
            total += w;
            w *= growth;
        }
        let scale = (r_out - 1.0) / total;
        let mut r = 1.0;
        for (n, w) in widths.iter().enumerate() {
            r += w * scale;
            edges.push(if n + 1 == widths.len() { r_out } else { r });
        }
        let rings = edges.len() - 1;
        let mut k = vec![0.0; 1 + (rings - 1) * nt];
        k[0] = (0..nt).map(|j| map.conductivity(0, j)).sum::<f64>() / nt as f64;
        for i in 1..rings {
            for j in 0..nt {
                k[1 + (i - 1) * nt + j] = if i < nr {
                    map.conductivity(i, j)
                } else {
                    k_star
                };
            }
        }
        Self {
            nr,
            ntheta: nt,
            edges,
            k,
            k_star,
        }
    }

    pub fn rings(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn unknowns(&self) -> usize {
        self.k.len()
    }

    pub fn r_out(&self) -> f64 {
        *self.edges.last().unwrap()
    }

    pub fn dtheta(&self) -> f64 {
        2.0 * PI / self.ntheta as f64
    }

    /// Angle of the middle of sector `j`.
    pub fn theta(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dtheta()
    }

    /// Radius of the middle of ring `i`.
    pub fn center(&self, i: usize) -> f64 {
        0.5 * (self.edges[i] + self.edges[i + 1])
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i >= 1);
        1 + (i - 1) * self.ntheta + j
    }

    /// Conductivity of cell `(i, j)` (the center cell for `i = 0`).
    pub fn k_at(&self, i: usize, j: usize) -> f64 {
        if i == 0 {
            self.k[0]
        } else {
            self.k[self.index(i, j)]
        }
    }

    /// Transmissibility across the edge between rings `i` and `i + 1` in
    /// sector `j`, each half integrated exactly for a radial current.
    pub fn radial_trans(&self, i: usize, j: usize) -> f64 {
        let b = self.edges[i + 1];
        let outer = (self.center(i + 1) / b).ln() / self.k_at(i + 1, j);
        let inner = if i == 0 {
            // linear potential in the center polygon
            1.0 / self.k[0]
        } else {
            (b / self.center(i)).ln() / self.k_at(i, j)
        };
        self.dtheta() / (inner + outer)
    }

    /// Transmissibility between sectors `j` and `j + 1` of ring `i >= 1`.
    pub fn angular_trans(&self, i: usize, j: usize) -> f64 {
        let jn = (j + 1) % self.ntheta;
        let h = 0.5 * self.dtheta();
        (self.edges[i + 1] / self.edges[i]).ln() / (h / self.k_at(i, j) + h / self.k_at(i, jn))
    }

    /// Transmissibility from the outermost ring to the Dirichlet rim.
    pub fn boundary_trans(&self, j: usize) -> f64 {
        let i = self.rings() - 1;
        self.dtheta() * self.k_at(i, j) / (self.r_out() / self.center(i)).ln()
    }

    /// The symmetric system matrix.
    pub fn assemble(&self) -> Csr {
        let nt = self.ntheta;
        let rings = self.rings();
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.unknowns()];
        let mut center_diag = 0.0;
        for i in 1..rings {
            for j in 0..nt {
                let me = self.index(i, j);
                let mut diag = 0.0;
                // inward
                let t = self.radial_trans(i - 1, j);
                diag += t;
                if i == 1 {
                    rows[me].push((0, -t));
                    rows[0].push((me, -t));
                    center_diag += t;
                } else {
                    rows[me].push((self.index(i - 1, j), -t));
                }
                // outward
                if i + 1 < rings {
                    let t = self.radial_trans(i, j);
                    diag += t;
                    rows[me].push((self.index(i + 1, j), -t));
                } else {
                    diag += self.boundary_trans(j);
                }
                // sideways
                for jn in [(j + nt - 1) % nt, (j + 1) % nt] {
                    let t = if jn == (j + 1) % nt {
                        self.angular_trans(i, j)
                    } else {
                        self.angular_trans(i, jn)
                    };
                    diag += t;
                    rows[me].push((self.index(i, jn), -t));
                }
                rows[me].push((me, diag));
            }
        }
        rows[0].push((0, center_diag));
        Csr::from_rows(rows)
    }

    /// Connected groups of two or more cells whose conductivity is at least
    /// the geometric mean of the extremes, when those differ by `100` or
    /// more. Empty for low-contrast grids.
    pub fn stiff_groups(&self, a: &Csr) -> Vec<Vec<usize>> {
        let lo = self.k.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.k.iter().copied().fold(0.0, f64::max);
        if hi < 100.0 * lo {
            return Vec::new();
        }
        let cut = (lo * hi).sqrt();
        let mut seen = vec![false; self.unknowns()];
        let mut groups = Vec::new();
        for start in 0..self.unknowns() {
            if seen[start] || self.k[start] < cut {
                continue;
            }
            seen[start] = true;
            let mut group = vec![start];
            let mut next = 0;
            while next < group.len() {
                let i = group[next];
                next += 1;
                for e in a.row_ptr[i]..a.row_ptr[i + 1] {
                    let j = a.col[e];
                    if !seen[j] && self.k[j] >= cut {
                        seen[j] = true;
                        group.push(j);
                    }
                }
            }
            if group.len() > 1 {
                group.sort_unstable();
                groups.push(group);
            }
        }
        groups
    }

    /// Right-hand side for the rim potential `r_out cos(theta - phi)`.
    pub fn rhs(&self, phi: f64) -> Vec<f64> {
        let mut b = vec![0.0; self.unknowns()];
        let i = self.rings() - 1;
        for j in 0..self.ntheta {
            b[self.index(i, j)] =
                self.boundary_trans(j) * self.r_out() * (self.theta(j) - phi).cos();
        }
        b
    }

    /// Exact discrete solution for a homogeneous grid under the cosine
    /// loading, as ring amplitudes `a_i` of `a_i cos(theta_j)` for rings
    /// `1..rings`. The cosine is an eigenvector of the periodic angular
    /// difference, so the problem reduces to one tridiagonal chain.
    pub fn homogeneous_reference(&self) -> Vec<f64> {
        let mut unit = self.clone();
        unit.k.fill(1.0);
        let rings = self.rings();
        let eig = 2.0 - 2.0 * self.dtheta().cos();
        let t: Vec<f64> = (0..rings)
            .map(|i| {
                if i + 1 < rings {
                    unit.radial_trans(i, 0)
                } else {
                    unit.boundary_trans(0)
                }
            })
            .collect();
        let s: Vec<f64> = (1..rings).map(|i| unit.angular_trans(i, 0) * eig).collect();
        let mut b = vec![0.0; rings - 1];
        b[rings - 2] = t[rings - 1] * self.r_out();
        let mut a = vec![0.0];
        a.extend(chain_solve(&t, &s, &b));
        a
    }
}
