//! Shared numeric kernels: discrete Fourier coefficients on circle and torus
//! grids, Hermitian spectra, and nonnegative least squares with equality
//! constraints.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Default number of points on a circle grid.
pub const DEFAULT_CIRCLE_GRID: usize = 512;
/// Default number of points per axis on a torus grid.
pub const DEFAULT_TORUS_GRID: usize = 256;
/// Tolerance used for positive-semidefiniteness checks.
pub const PSD_TOL: f64 = 1e-10;

const HERMITIAN_TOL: f64 = 1e-12;

/// Angle of the `k`-th point of a uniform `n`-point grid on the circle.
#[inline]
pub fn grid_angle(k: usize, n: usize) -> f64 {
    std::f64::consts::TAU * k as f64 / n as f64
}

/// The `k`-th point of a uniform `n`-point grid on the unit circle.
#[inline]
pub fn grid_point(k: usize, n: usize) -> Complex64 {
    Complex64::from_polar(1.0, grid_angle(k, n))
}

/// Discrete Fourier coefficients over the index box `[-N, N]^d`.
///
/// The coefficient at multi-index `m` is `(1/G) Σ samples · e^{-i m·θ}` where
/// `G` is the total number of grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierTable {
    dims: usize,
    max_index: usize,
    coeffs: Vec<Complex64>,
}

impl FourierTable {
    pub fn zeros(dims: usize, max_index: usize) -> Self {
        let side = 2 * max_index + 1;
        FourierTable { dims, max_index, coeffs: vec![Complex64::new(0.0, 0.0); side.pow(dims as u32)] }
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn max_index(&self) -> usize {
        self.max_index
    }

    fn offset(&self, index: &[i64]) -> Option<usize> {
        if index.len() != self.dims {
            return None;
        }
        let n = self.max_index as i64;
        let side = 2 * n + 1;
        let mut off = 0i64;
        for &i in index {
            if i < -n || i > n {
                return None;
            }
            off = off * side + (i + n);
        }
        Some(off as usize)
    }

    pub fn get(&self, index: &[i64]) -> Option<Complex64> {
        self.offset(index).map(|o| self.coeffs[o])
    }

    pub fn set(&mut self, index: &[i64], value: Complex64) {
        let o = self.offset(index).expect("index outside Fourier table");
        self.coeffs[o] = value;
    }

    /// All multi-indices of the box in row-major order.
    pub fn indices(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        box_indices(self.dims, self.max_index as i64)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Vec<i64>, Complex64)> + '_ {
        self.indices().zip(self.coeffs.iter().copied())
    }
}

/// Enumerates `[-n, n]^dims` in row-major order (last axis fastest).
pub fn box_indices(dims: usize, n: i64) -> impl Iterator<Item = Vec<i64>> {
    let side = (2 * n + 1) as usize;
    let total = side.pow(dims as u32);
    (0..total).map(move |mut flat| {
        let mut idx = vec![0i64; dims];
        for d in (0..dims).rev() {
            idx[d] = (flat % side) as i64 - n;
            flat /= side;
        }
        idx
    })
}

/// Fourier coefficients of samples on a uniform circle grid.
pub fn fourier_coefficients(samples: &[Complex64], max_index: usize) -> Result<FourierTable> {
    fourier_coefficients_nd(samples, samples.len(), 1, max_index)
}

/// Fourier coefficients of samples on a uniform torus grid with `grid`
/// points per axis, stored row-major (axis 0 slowest).
pub fn fourier_coefficients_nd(
    samples: &[Complex64],
    grid: usize,
    dims: usize,
    max_index: usize,
) -> Result<FourierTable> {
    if dims == 0 {
        return Err(Error::validation("torus dimension must be positive"));
    }
    if samples.len() != grid.pow(dims as u32) {
        return Err(Error::validation(format!(
            "expected {} samples for a {grid}^{dims} grid, got {}",
            grid.pow(dims as u32),
            samples.len()
        )));
    }
    if grid < 2 * max_index + 1 {
        return Err(Error::Aliasing { grid, max_index });
    }
    let mut data = samples.to_vec();
    fft_axes(&mut data, grid, dims, false);
    let scale = 1.0 / data.len() as f64;
    let mut table = FourierTable::zeros(dims, max_index);
    let n = max_index as i64;
    for (slot, idx) in box_indices(dims, n).enumerate() {
        let mut off = 0usize;
        for &i in &idx {
            off = off * grid + i.rem_euclid(grid as i64) as usize;
        }
        table.coeffs[slot] = data[off] * scale;
    }
    Ok(table)
}

/// Samples `Σ c_m e^{i m·θ}` on a uniform grid; inverse of
/// [`fourier_coefficients_nd`] for band-limited data.
pub fn synthesize(table: &FourierTable, grid: usize) -> Result<Vec<Complex64>> {
    if grid < 2 * table.max_index + 1 {
        return Err(Error::Aliasing { grid, max_index: table.max_index });
    }
    let dims = table.dims;
    let mut data = vec![Complex64::new(0.0, 0.0); grid.pow(dims as u32)];
    for (idx, c) in table.iter() {
        let mut off = 0usize;
        for &i in &idx {
            off = off * grid + i.rem_euclid(grid as i64) as usize;
        }
        data[off] = c;
    }
    fft_axes(&mut data, grid, dims, true);
    Ok(data)
}

fn fft_axes(data: &mut [Complex64], grid: usize, dims: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse { planner.plan_fft_inverse(grid) } else { planner.plan_fft_forward(grid) };
    let mut line = vec![Complex64::new(0.0, 0.0); grid];
    for axis in 0..dims {
        let stride = grid.pow((dims - 1 - axis) as u32);
        let block = stride * grid;
        for start in (0..data.len()).step_by(block) {
            for inner in 0..stride {
                for k in 0..grid {
                    line[k] = data[start + inner + k * stride];
                }
                fft.process(&mut line);
                for k in 0..grid {
                    data[start + inner + k * stride] = line[k];
                }
            }
        }
    }
}

/// A square complex matrix that is conjugate-symmetric within `1e-12`
/// (relative to its largest entry).
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(DMatrix<Complex64>);

impl HermitianMatrix {
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::validation(format!("matrix is {}x{}, not square", m.nrows(), m.ncols())));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::validation("matrix has non-finite entries"));
        }
        let scale = m.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
        let n = m.nrows();
        for j in 0..n {
            for k in j..n {
                let dev = (m[(j, k)] - m[(k, j)].conj()).norm();
                if dev > HERMITIAN_TOL * scale {
                    return Err(Error::validation(format!(
                        "matrix is not Hermitian: |A[{j}][{k}] - conj(A[{k}][{j}])| = {dev:.3e}"
                    )));
                }
            }
        }
        Ok(HermitianMatrix(m))
    }

    /// Builds from a real symmetric matrix.
    pub fn from_real(m: &DMatrix<f64>) -> Result<Self> {
        Self::new(m.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<Complex64> {
        self.0
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.dim() == 0 {
            return Vec::new();
        }
        let sym = (&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Eigen-decomposition `(values, vectors)` with ascending eigenvalues.
    pub fn eigen(&self) -> (Vec<f64>, DMatrix<Complex64>) {
        let sym = (&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = sym.symmetric_eigen();
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(self.dim(), self.dim(), |r, c| eig.eigenvectors[(r, order[c])]);
        (values, vectors)
    }
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eig_hermitian(a: &HermitianMatrix) -> f64 {
    a.eigenvalues().first().copied().unwrap_or(f64::INFINITY)
}

/// Validates `m` as Hermitian and returns its smallest eigenvalue.
pub fn min_eig(m: &DMatrix<Complex64>) -> Result<f64> {
    Ok(min_eig_hermitian(&HermitianMatrix::new(m.clone())?))
}

/// Projects a Hermitian matrix onto the PSD cone by clipping negative
/// eigenvalues to zero. Matrices that are already PSD are returned unchanged.
pub fn clip_psd(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let h = HermitianMatrix((m + m.adjoint()) * Complex64::new(0.5, 0.0));
    let (values, vectors) = h.eigen();
    if values.first().map_or(true, |&v| v >= 0.0) {
        return m.clone();
    }
    let clipped = DMatrix::from_diagonal(&DVector::from_iterator(
        values.len(),
        values.iter().map(|&v| Complex64::new(v.max(0.0), 0.0)),
    ));
    &vectors * clipped * vectors.adjoint()
}

/// Result of [`nnls_with_equalities`].
#[derive(Debug, Clone)]
pub struct NnlsSolution {
    pub x: DVector<f64>,
    /// `‖A x − b‖₂`.
    pub residual: f64,
    /// `‖C x − d‖₂`.
    pub equality_residual: f64,
    pub iterations: usize,
}

/// Minimises `‖A x − b‖` over `x ≥ 0` subject to `C x = d` (within `tol`).
///
/// A feasible start comes from a Lawson–Hanson solve of `min ‖C x − d‖`.
/// From there a primal active-set method re-solves the equality-constrained
/// least squares problem on the current support, stepping back to the
/// boundary whenever a coordinate would turn negative and adding the
/// coordinate with the largest projected descent otherwise. Iterations are
/// capped at `10 · unknowns`.
pub fn nnls_with_equalities(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    ceq: &DMatrix<f64>,
    deq: &DVector<f64>,
    tol: f64,
) -> Result<NnlsSolution> {
    let n = a.ncols();
    if a.nrows() != b.len() {
        return Err(Error::validation(format!("A has {} rows but b has {}", a.nrows(), b.len())));
    }
    if ceq.nrows() != deq.len() {
        return Err(Error::validation(format!("C has {} rows but d has {}", ceq.nrows(), deq.len())));
    }
    if ceq.nrows() > 0 && ceq.ncols() != n {
        return Err(Error::validation(format!("C has {} columns, A has {n}", ceq.ncols())));
    }
    let max_iter = 10 * n.max(1);

    if ceq.nrows() == 0 {
        let (x, iterations) = lawson_hanson(a, b, max_iter);
        let residual = (a * &x - b).norm();
        return Ok(NnlsSolution { x, residual, equality_residual: 0.0, iterations });
    }

    let (x0, mut iterations) = lawson_hanson(ceq, deq, max_iter);
    let start_residual = (ceq * &x0 - deq).norm();
    if start_residual > tol {
        return Err(Error::Infeasible { residual: start_residual, tol });
    }
    let mut x = x0;
    let mut passive: Vec<bool> = x.iter().map(|&v| v > 0.0).collect();
    let mut blocked = vec![false; n];
    let grad_tol = 1e-14 * a.norm().max(1.0) * b.norm().max(1.0);
    let mut entered: Option<usize> = None;
    while iterations < max_iter {
        iterations += 1;
        let set: Vec<usize> = (0..n).filter(|&i| passive[i]).collect();
        let y = equality_lstsq(a, b, ceq, deq, &set);
        let y = match y {
            Some(y) if (&columns(ceq, &set) * &y - deq).norm() <= tol => y,
            _ => {
                // The support cannot satisfy the equalities on its own; stop here.
                break;
            }
        };
        let scale = y.amax().max(1e-300);
        if let Some(j) = entered.take() {
            let pos = set.iter().position(|&i| i == j).expect("entered index is passive");
            if y[pos] <= 0.0 {
                // Degenerate entry: the new column cannot carry positive mass.
                passive[j] = false;
                continue;
            }
            blocked.iter_mut().for_each(|f| *f = false);
        }
        if y.iter().all(|&v| v >= -1e-14 * scale) {
            x.fill(0.0);
            for (k, &i) in set.iter().enumerate() {
                x[i] = y[k].max(0.0);
            }
            let g = a.transpose() * (a * &x - b);
            let cp = columns(ceq, &set);
            let gp = DVector::from_iterator(set.len(), set.iter().map(|&i| -g[i]));
            let lambda = lstsq(&cp.transpose(), &gp);
            let w = -(g + ceq.transpose() * lambda);
            let entering = (0..n)
                .filter(|&j| !passive[j] && !blocked[j] && w[j] > grad_tol)
                .max_by(|&i, &j| w[i].total_cmp(&w[j]));
            let Some(j) = entering else { break };
            passive[j] = true;
            blocked[j] = true;
            entered = Some(j);
            continue;
        }
        let mut alpha: f64 = 1.0;
        for (k, &i) in set.iter().enumerate() {
            if y[k] < 0.0 {
                alpha = alpha.min(x[i] / (x[i] - y[k]));
            }
        }
        for (k, &i) in set.iter().enumerate() {
            x[i] += alpha * (y[k] - x[i]);
        }
        let xmax = x.amax().max(1e-300);
        for &i in &set {
            if x[i] <= 1e-15 * xmax {
                x[i] = 0.0;
                passive[i] = false;
            }
        }
        blocked.iter_mut().for_each(|f| *f = false);
    }
    let residual = (a * &x - b).norm();
    let equality_residual = (ceq * &x - deq).norm();
    if equality_residual > tol {
        return Err(Error::Infeasible { residual: equality_residual, tol });
    }
    Ok(NnlsSolution { x, residual, equality_residual, iterations })
}

fn columns(a: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), cols.len(), |r, c| a[(r, cols[c])])
}

fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    if a.ncols() == 0 {
        return DVector::zeros(0);
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = smax * 1e-13 * (a.nrows().max(a.ncols()) as f64);
    svd.solve(b, eps).unwrap_or_else(|_| DVector::zeros(a.ncols()))
}

/// Lawson–Hanson active-set NNLS.
fn lawson_hanson(a: &DMatrix<f64>, b: &DVector<f64>, max_iter: usize) -> (DVector<f64>, usize) {
    let n = a.ncols();
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let mut blocked = vec![false; n];
    let grad_tol = 1e-13 * a.norm().max(1.0) * b.norm().max(1.0);
    let mut iter = 0;

    loop {
        let w = a.transpose() * (b - a * &x);
        let entering = (0..n)
            .filter(|&j| !passive[j] && !blocked[j] && w[j] > grad_tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = entering else { break };
        if iter >= max_iter {
            break;
        }
        passive[j] = true;
        let mut first = true;
        loop {
            iter += 1;
            let set: Vec<usize> = (0..n).filter(|&i| passive[i]).collect();
            let s_p = lstsq(&columns(a, &set), b);
            if first && s_p[set.iter().position(|&i| i == j).unwrap()] <= 0.0 {
                // Degenerate entry: the new column cannot carry positive mass.
                passive[j] = false;
                blocked[j] = true;
                break;
            }
            first = false;
            if s_p.iter().all(|&v| v > 0.0) {
                for v in x.iter_mut() {
                    *v = 0.0;
                }
                for (k, &i) in set.iter().enumerate() {
                    x[i] = s_p[k];
                }
                blocked.iter_mut().for_each(|f| *f = false);
                break;
            }
            let mut alpha = f64::INFINITY;
            for (k, &i) in set.iter().enumerate() {
                if s_p[k] <= 0.0 {
                    let denom = x[i] - s_p[k];
                    if denom > 0.0 {
                        alpha = alpha.min(x[i] / denom);
                    }
                }
            }
            if !alpha.is_finite() {
                alpha = 0.0;
            }
            for (k, &i) in set.iter().enumerate() {
                x[i] += alpha * (s_p[k] - x[i]);
            }
            for &i in &set {
                if x[i] <= 1e-15 * x.amax().max(1.0) {
                    x[i] = 0.0;
                    passive[i] = false;
                }
            }
            blocked.iter_mut().for_each(|f| *f = false);
            if iter >= max_iter || !passive.iter().any(|&p| p) {
                break;
            }
        }
        if iter >= max_iter {
            break;
        }
    }
    (x, iter)
}

/// `argmin ‖A_P y − b‖` subject to `C_P y = d` on the columns `set`; the
/// minimum-norm solution when either system is rank deficient.
fn equality_lstsq(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    c: &DMatrix<f64>,
    d: &DVector<f64>,
    set: &[usize],
) -> Option<DVector<f64>> {
    let k = set.len();
    if k == 0 {
        return None;
    }
    let ap = columns(a, set);
    let cp = columns(c, set);
    let svd = cp.svd(true, true);
    let smax = svd.singular_values.max();
    let cut = smax * 1e-12;
    let rank = svd.singular_values.iter().filter(|&&s| s > cut).count();
    let y0 = svd.solve(d, cut).ok()?;
    if rank == k {
        return Some(y0);
    }
    let v_t = svd.v_t.as_ref()?;
    let rows: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > cut).collect();
    let vr = DMatrix::from_fn(k, rows.len(), |i, j| v_t[(rows[j], i)]);
    let proj = DMatrix::<f64>::identity(k, k) - &vr * vr.transpose();
    let r = b - &ap * &y0;
    let t = lstsq(&(&ap * &proj), &r);
    Some(y0 + proj * t)
}
