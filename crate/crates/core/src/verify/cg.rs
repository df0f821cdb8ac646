//! Compressed sparse rows and preconditioned conjugate gradients.

/// Symmetric matrix in compressed sparse row form (both triangles stored).
#[derive(Debug, Clone)]
pub struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col: Vec<usize>,
    pub val: Vec<f64>,
}

impl Csr {
    /// Builds the matrix from rows given as `(column, value)` lists.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let nnz = rows.iter().map(Vec::len).sum();
        let mut col = Vec::with_capacity(nnz);
        let mut val = Vec::with_capacity(nnz);
        row_ptr.push(0);
        for mut r in rows {
            r.sort_by_key(|e| e.0);
            for (c, v) in r {
                col.push(c);
                val.push(v);
            }
            row_ptr.push(col.len());
        }
        Self {
            n,
            row_ptr,
            col,
            val,
        }
    }

    pub fn mul(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.val[k] * x[self.col[k]];
            }
            y[i] = s;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1])
                    .find(|&k| self.col[k] == i)
                    .map_or(0.0, |k| self.val[k])
            })
            .collect()
    }
}

/// Which preconditioner the solver applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Preconditioner {
    /// Diagonal scaling.
    Jacobi,
    /// Zero fill-in incomplete Cholesky.
    IncompleteCholesky,
}

enum Applied {
    Jacobi(Vec<f64>),
    Ic0(Ic0),
}

impl Applied {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        match self {
            Applied::Jacobi(inv) => {
                for i in 0..r.len() {
                    z[i] = inv[i] * r[i];
                }
            }
            Applied::Ic0(ic) => ic.solve(r, z),
        }
    }
}

/// `L L^T` with `L` on the lower-triangular pattern of the matrix.
struct Ic0 {
    /// Strictly lower entries of `L`, row-wise.
    lower_ptr: Vec<usize>,
    lower_col: Vec<usize>,
    lower_val: Vec<f64>,
    diag: Vec<f64>,
}

impl Ic0 {
    fn new(a: &Csr) -> Self {
        let n = a.n;
        let mut lower_ptr = vec![0];
        let mut lower_col = Vec::new();
        let mut lower_val = Vec::new();
        let mut diag = vec![0.0; n];
        for i in 0..n {
            for k in a.row_ptr[i]..a.row_ptr[i + 1] {
                let j = a.col[k];
                if j < i {
                    lower_col.push(j);
                    lower_val.push(a.val[k]);
                } else if j == i {
                    diag[i] = a.val[k];
                }
            }
            lower_ptr.push(lower_col.len());
        }
        // row-oriented factorization restricted to the pattern
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            let (s, e) = (lower_ptr[i], lower_ptr[i + 1]);
            for k in s..e {
                pos[lower_col[k]] = k;
            }
            for k in s..e {
                let j = lower_col[k];
                // l_ij = (a_ij - sum_{m < j} l_im l_jm) / l_jj
                let mut sum = lower_val[k];
                for kk in lower_ptr[j]..lower_ptr[j + 1] {
                    let m = lower_col[kk];
                    let p = pos[m];
                    if p != usize::MAX && p < k {
                        sum -= lower_val[p] * lower_val[kk];
                    }
                }
                lower_val[k] = sum / diag[j];
            }
            let mut d = diag[i];
            for k in s..e {
                d -= lower_val[k] * lower_val[k];
            }
            // an M-matrix keeps the pivots positive; guard against rounding
            diag[i] = d.max(1e-300 * diag[i].abs()).sqrt();
            for k in s..e {
                pos[lower_col[k]] = usize::MAX;
            }
        }
        Self {
            lower_ptr,
            lower_col,
            lower_val,
            diag,
        }
    }

    fn solve(&self, r: &[f64], z: &mut [f64]) {
        let n = r.len();
        // L y = r
        for i in 0..n {
            let mut s = r[i];
            for k in self.lower_ptr[i]..self.lower_ptr[i + 1] {
                s -= self.lower_val[k] * z[self.lower_col[k]];
            }
            z[i] = s / self.diag[i];
        }
        // L^T z = y, column sweep
        for i in (0..n).rev() {
            z[i] /= self.diag[i];
            let zi = z[i];
            for k in self.lower_ptr[i]..self.lower_ptr[i + 1] {
                z[self.lower_col[k]] -= self.lower_val[k] * zi;
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Outcome of a conjugate-gradient solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgStats {
    pub iterations: usize,
    /// `|b - A x| / |b|` at exit.
    pub relative_residual: f64,
    pub converged: bool,
}

/// Coarse space spanned by indicator vectors of disjoint index groups,
/// projected out of the Krylov space (deflated conjugate gradients).
struct Deflation {
    groups: Vec<Vec<usize>>,
    /// Columns of `A Z` as sparse `(row, value)` lists.
    az: Vec<Vec<(usize, f64)>>,
    coarse: nalgebra::Cholesky<f64, nalgebra::Dyn>,
}

impl Deflation {
    fn new(a: &Csr, groups: &[Vec<usize>]) -> Option<Self> {
        let m = groups.len();
        let mut owner = vec![usize::MAX; a.n];
        for (g, idx) in groups.iter().enumerate() {
            for &i in idx {
                owner[i] = g;
            }
        }
        let mut acc = vec![0.0; a.n];
        let mut touched = Vec::new();
        let mut az = Vec::with_capacity(m);
        for idx in groups {
            for &c in idx {
                for k in a.row_ptr[c]..a.row_ptr[c + 1] {
                    let r = a.col[k];
                    if acc[r] == 0.0 {
                        touched.push(r);
                    }
                    acc[r] += a.val[k];
                }
            }
            let mut col: Vec<(usize, f64)> = touched.iter().map(|&r| (r, acc[r])).collect();
            col.sort_by_key(|e| e.0);
            for &r in &touched {
                acc[r] = 0.0;
            }
            touched.clear();
            az.push(col);
        }
        let mut e = nalgebra::DMatrix::zeros(m, m);
        for (g, col) in az.iter().enumerate() {
            for &(r, v) in col {
                if owner[r] != usize::MAX {
                    e[(owner[r], g)] += v;
                }
            }
        }
        let e = 0.5 * (&e + e.transpose());
        let coarse = nalgebra::Cholesky::new(e)?;
        Some(Self {
            groups: groups.to_vec(),
            az,
            coarse,
        })
    }

    /// `E^-1 (A Z)^T v`.
    fn coeffs_az(&self, v: &[f64]) -> nalgebra::DVector<f64> {
        let y = nalgebra::DVector::from_iterator(
            self.az.len(),
            self.az
                .iter()
                .map(|col| col.iter().map(|&(r, w)| w * v[r]).sum::<f64>()),
        );
        self.coarse.solve(&y)
    }

    /// `E^-1 Z^T v`.
    fn coeffs_z(&self, v: &[f64]) -> nalgebra::DVector<f64> {
        let y = nalgebra::DVector::from_iterator(
            self.groups.len(),
            self.groups
                .iter()
                .map(|idx| idx.iter().map(|&i| v[i]).sum::<f64>()),
        );
        self.coarse.solve(&y)
    }

    /// `v += s Z c`.
    fn add_z(&self, c: &nalgebra::DVector<f64>, s: f64, v: &mut [f64]) {
        for (g, idx) in self.groups.iter().enumerate() {
            for &i in idx {
                v[i] += s * c[g];
            }
        }
    }

    /// `v += s A Z c`.
    fn add_az(&self, c: &nalgebra::DVector<f64>, s: f64, v: &mut [f64]) {
        for (g, col) in self.az.iter().enumerate() {
            for &(r, w) in col {
                v[r] += s * c[g] * w;
            }
        }
    }
}

/// Solves `A x = b` from the initial guess in `x` until the residual drops
/// below `tol |b|` or `max_iter` iterations pass.
pub fn pcg(
    a: &Csr,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
    pre: Preconditioner,
) -> CgStats {
    pcg_deflated(a, b, x, tol, max_iter, pre, &[])
}

/// As [`pcg`], with the indicator vectors of `groups` deflated. Groups of
/// cells tied together by very large conductances produce one tiny
/// eigenvalue each; removing them restores the convergence rate of the
/// low-contrast problem. An empty list gives plain preconditioned CG.
pub fn pcg_deflated(
    a: &Csr,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
    pre: Preconditioner,
    groups: &[Vec<usize>],
) -> CgStats {
    let n = a.n;
    let defl = if groups.is_empty() {
        None
    } else {
        Deflation::new(a, groups)
    };
    let applied = match pre {
        Preconditioner::Jacobi => Applied::Jacobi(a.diagonal().iter().map(|d| 1.0 / d).collect()),
        Preconditioner::IncompleteCholesky => Applied::Ic0(Ic0::new(a)),
    };
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        x.fill(0.0);
        return CgStats {
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        };
    }
    let mut r = vec![0.0; n];
    a.mul(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    if let Some(d) = &defl {
        let c = d.coeffs_z(&r);
        d.add_z(&c, 1.0, x);
        d.add_az(&c, -1.0, &mut r);
    }
    let mut z = vec![0.0; n];
    applied.apply(&r, &mut z);
    let mut p = z.clone();
    if let Some(d) = &defl {
        d.add_z(&d.coeffs_az(&z), -1.0, &mut p);
    }
    let mut q = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let mut res = dot(&r, &r).sqrt() / bnorm;
    let mut it = 0;
    while res > tol && it < max_iter {
        a.mul(&p, &mut q);
        let alpha = rz / dot(&p, &q);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        it += 1;
        res = dot(&r, &r).sqrt() / bnorm;
        if res <= tol {
            break;
        }
        applied.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        if let Some(d) = &defl {
            d.add_z(&d.coeffs_az(&z), -1.0, &mut p);
        }
    }
    // the recursive residual drifts from the true one over long runs
    a.mul(x, &mut q);
    let true_res = b
        .iter()
        .zip(&q)
        .map(|(bi, qi)| (bi - qi).powi(2))
        .sum::<f64>()
        .sqrt()
        / bnorm;
    CgStats {
        iterations: it,
        relative_residual: true_res,
        converged: res <= tol,
    }
}
