//! Hardy space of the annulus `q < |z| < 1` with respect to harmonic measure
//! at a real base point: the harmonic measure, a numeric orthonormal basis of
//! Laurent monomials, the Szegő kernel it induces, the one-dimensional
//! defect space, and measure recovery by constrained least squares.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::FunctionSpec;
use crate::herglotz_disc::NEGATIVITY_TOL;
use crate::measures::{Boundary, BoundaryMeasure};
use crate::numerics::{grid_angle, grid_point, nnls_with_equalities, HermitianMatrix};

pub const DEFAULT_TRUNCATION: usize = 32;
pub const DEFAULT_GRID: usize = 512;
/// Scaled Gram matrices with a larger condition number are rejected.
pub const MAX_GRAM_COND: f64 = 1e14;
/// Relative singular-value threshold for the defect space.
pub const WPERP_TOL: f64 = 1e-8;
/// Equality tolerance for recovery (mass and `∫Q dμ`).
pub const EQUALITY_TOL: f64 = 1e-10;
/// Weight of the rows that pull the kernel moments `∫ conj(e_j) dμ` toward
/// those of the harmonic measure. Forty fitting points do not determine all
/// `2N+1` moments, so this picks one minimizer among many.
pub const TIE_BREAK: f64 = 1e-3;
const MAGIC: &[u8; 8] = b"HARDYB01";

/// Harmonic measure of the annulus at `z0`, as densities against normalized
/// arclength on the outer (`|ζ| = 1`) and inner (`|ζ| = q`) circles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicMeasure {
    pub q: f64,
    pub z0: f64,
    pub grid: usize,
    pub outer: Vec<f64>,
    pub inner: Vec<f64>,
}

impl HarmonicMeasure {
    /// Cell masses: outer circle first.
    pub fn cell_masses(&self) -> Vec<f64> {
        let g = self.grid as f64;
        self.outer.iter().chain(self.inner.iter()).map(|v| v / g).collect()
    }

    pub fn outer_mass(&self) -> f64 {
        self.outer.iter().sum::<f64>() / self.grid as f64
    }

    pub fn to_measure(&self) -> Result<BoundaryMeasure> {
        let values = self.outer.iter().chain(self.inner.iter()).cloned().collect();
        BoundaryMeasure::density(Boundary::Annulus { q: self.q }, self.grid, values)
    }
}

fn check_annulus(q: f64, z0: f64) -> Result<()> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::validation(format!("annulus needs 0 < q < 1, got {q}")));
    }
    if !(z0 > q && z0 < 1.0) {
        return Err(Error::Domain(format!("base point {z0} must lie in ({q}, 1)")));
    }
    Ok(())
}

/// Fourier coefficients of the harmonic measure: the value at `z0` of the
/// harmonic function equal to `e^{inθ}` on one circle and 0 on the other.
/// Returns `(outer, inner)` coefficients for `n = 0, 1, …` until both fall
/// below `1e-18`.
pub fn harmonic_modes(q: f64, z0: f64) -> (Vec<f64>, Vec<f64>) {
    let lq = (1.0 / q).ln();
    let mut u = vec![(z0 / q).ln() / lq];
    let mut v = vec![(1.0 / z0).ln() / lq];
    let mut n = 1;
    loop {
        let nf = n as i32;
        let q2n = q.powi(2 * nf);
        let un = z0.powi(nf) * (1.0 - (q / z0).powi(2 * nf)) / (1.0 - q2n);
        let vn = (q / z0).powi(nf) * (1.0 - z0.powi(2 * nf)) / (1.0 - q2n);
        if un.abs() < 1e-18 && vn.abs() < 1e-18 {
            break;
        }
        u.push(un);
        v.push(vn);
        n += 1;
        if n > 100_000 {
            break;
        }
    }
    (u, v)
}

fn cosine_series(coef: &[f64], grid: usize) -> Vec<f64> {
    (0..grid)
        .map(|k| {
            let t = grid_angle(k, grid);
            coef[0] + 2.0 * coef.iter().enumerate().skip(1).map(|(n, c)| c * (n as f64 * t).cos()).sum::<f64>()
        })
        .collect()
}

/// Harmonic measure at real `z0 ∈ (q, 1)` sampled on `grid` points per
/// circle.
pub fn harmonic_measure(q: f64, z0: f64, grid: usize) -> Result<HarmonicMeasure> {
    check_annulus(q, z0)?;
    if grid == 0 {
        return Err(Error::validation("grid must be positive"));
    }
    let (u, v) = harmonic_modes(q, z0);
    let outer = cosine_series(&u, grid);
    let inner = cosine_series(&v, grid);
    if let Some(x) = outer.iter().chain(inner.iter()).find(|x| **x < 0.0) {
        return Err(Error::Quadrature(format!("harmonic density is negative ({x}); the grid is too coarse")));
    }
    Ok(HarmonicMeasure { q, z0, grid, outer, inner })
}

/// Numeric Hardy-space data for the annulus. The basis functions are the
/// scaled monomials `φ_n = ζ^n / ‖ζ^n‖`, `|n| ≤ N`, in the order
/// `n = −N, …, N`; `gram` is their Gram matrix in `L²(ω)` and
/// `coeffs = conj(L)^{-1}` for `gram = L L*`, so `e = coeffs · φ` is
/// orthonormal.
#[derive(Debug, Clone, PartialEq)]
pub struct HardyBasisNumeric {
    pub harmonic: HarmonicMeasure,
    pub truncation: usize,
    pub norms: Vec<f64>,
    pub gram: DMatrix<Complex64>,
    pub coeffs: DMatrix<Complex64>,
    /// Samples of the unit-norm real defect function, outer circle first.
    pub q_samples: Vec<f64>,
    /// `e_j(ζ_c)` for every boundary cell (columns).
    boundary_values: DMatrix<Complex64>,
}

impl HardyBasisNumeric {
    pub fn q(&self) -> f64 {
        self.harmonic.q
    }

    pub fn z0(&self) -> f64 {
        self.harmonic.z0
    }

    pub fn grid(&self) -> usize {
        self.harmonic.grid
    }

    pub fn len(&self) -> usize {
        2 * self.truncation + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Boundary cell points, outer circle first.
    pub fn boundary_points(&self) -> Vec<Complex64> {
        boundary_points(self.q(), self.grid())
    }

    /// `φ(z)`: the scaled monomials at `z`.
    pub fn monomials(&self, z: Complex64) -> DVector<Complex64> {
        scaled_monomials(z, self.truncation, &self.norms)
    }

    /// `e(z) = coeffs · φ(z)`.
    pub fn orthonormal_values(&self, z: Complex64) -> DVector<Complex64> {
        &self.coeffs * self.monomials(z)
    }

    /// `S_N(z, w) = Σ e_j(z) conj(e_j(w))`.
    pub fn szego(&self, z: Complex64, w: Complex64) -> Complex64 {
        let a = self.orthonormal_values(z);
        let b = self.orthonormal_values(w);
        a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum()
    }

    /// `S_N(z, ζ_c)` for every boundary cell.
    pub fn szego_row(&self, z: Complex64) -> Vec<Complex64> {
        let e = self.orthonormal_values(z);
        (self.boundary_values.adjoint() * e).iter().cloned().collect()
    }

    /// `∫ (2 S_N(z, ζ) − 1) dμ(ζ)` for an annulus measure on the basis grid.
    pub fn herglotz(&self, mu: &BoundaryMeasure, z: Complex64) -> Result<Complex64> {
        let masses = self.cell_masses_of(mu)?;
        Ok(self.herglotz_masses(&masses, z))
    }

    fn herglotz_masses(&self, masses: &[f64], z: Complex64) -> Complex64 {
        self.szego_row(z).iter().zip(masses).map(|(s, m)| (s * 2.0 - 1.0) * *m).sum()
    }

    /// `L²(ω)` inner product of boundary samples (outer circle first).
    pub fn inner_product(&self, f: &[Complex64], g: &[Complex64]) -> Complex64 {
        self.harmonic.cell_masses().iter().zip(f.iter().zip(g)).map(|(w, (a, b))| a * b.conj() * *w).sum()
    }

    fn cell_masses_of(&self, mu: &BoundaryMeasure) -> Result<Vec<f64>> {
        if mu.boundary() != (Boundary::Annulus { q: self.q() }) {
            return Err(Error::UnsupportedBoundary(format!("expected an annulus measure with q = {}", self.q())));
        }
        match mu.as_density() {
            Some(d) if d.grid == self.grid() => Ok(d.values.iter().map(|v| v / d.grid as f64).collect()),
            _ => Err(Error::validation("annulus measure must be a density on the basis grid")),
        }
    }

    /// `∫ Q dμ`.
    pub fn q_moment(&self, mu: &BoundaryMeasure) -> Result<f64> {
        Ok(self.cell_masses_of(mu)?.iter().zip(&self.q_samples).map(|(m, q)| m * q).sum())
    }
}

fn boundary_points(q: f64, grid: usize) -> Vec<Complex64> {
    (0..2 * grid).map(|c| if c < grid { grid_point(c, grid) } else { grid_point(c - grid, grid) * q }).collect()
}

fn scaled_monomials(z: Complex64, n: usize, norms: &[f64]) -> DVector<Complex64> {
    let ni = n as i32;
    DVector::from_iterator(2 * n + 1, (-ni..=ni).zip(norms).map(|(k, s)| z.powi(k) / *s))
}

/// Builds the orthonormal basis for truncation `n` on `grid` points per
/// circle, then the defect function.
pub fn build_basis(q: f64, z0: f64, n: usize, grid: usize) -> Result<HardyBasisNumeric> {
    if n == 0 || 4 * n > grid {
        return Err(Error::validation(format!("truncation must satisfy 1 ≤ N ≤ grid/4, got N = {n}, grid = {grid}")));
    }
    let hm = harmonic_measure(q, z0, grid)?;
    let w = hm.cell_masses();
    let pts = boundary_points(q, grid);
    let m = 2 * n + 1;
    let ni = n as i32;
    let norms: Vec<f64> = (-ni..=ni)
        .map(|k| {
            let s: f64 = pts.iter().zip(&w).map(|(p, wc)| p.norm().powi(2 * k) * wc).sum();
            s.sqrt()
        })
        .collect();
    // phi[(j, c)] = φ_j(ζ_c)
    let phi = DMatrix::from_fn(m, pts.len(), |j, c| pts[c].powi(j as i32 - ni) / norms[j]);
    let weighted = DMatrix::from_fn(m, pts.len(), |j, c| phi[(j, c)] * w[c]);
    // gram[(a, b)] = ⟨φ_b, φ_a⟩ = Σ φ_b conj(φ_a) w
    let gram = (phi.conjugate() * weighted.transpose()).transpose();
    let gram = (&gram + gram.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = HermitianMatrix::new(gram.clone())?.eigenvalues();
    let (lo, hi) = (eig[0], eig[eig.len() - 1]);
    let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if cond > MAX_GRAM_COND {
        return Err(Error::IllConditioned { cond });
    }
    let chol = gram.clone().cholesky().ok_or(Error::IllConditioned { cond })?;
    let l = chol.l();
    let coeffs = l
        .conjugate()
        .solve_lower_triangular(&DMatrix::identity(m, m))
        .ok_or(Error::IllConditioned { cond })?;
    let boundary_values = &coeffs * &phi;
    let mut basis = HardyBasisNumeric { harmonic: hm, truncation: n, norms, gram, coeffs, q_samples: Vec::new(), boundary_values };
    basis.q_samples = wperp_basis(&basis, WPERP_TOL)?.samples;
    Ok(basis)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WperpBasis {
    pub dimension: usize,
    /// Unit-norm real samples, outer circle first.
    pub samples: Vec<f64>,
    /// Singular values of the row-normalized constraint map, descending.
    pub singular_values: Vec<f64>,
}

/// Null space of `g ↦ (⟨g, ζ^n⟩, ⟨g, conj(ζ)^n⟩)_{|n| ≤ N}` over pairs of
/// trigonometric polynomials of degree `N` on the two circles.
pub fn wperp_basis(basis: &HardyBasisNumeric, tol: f64) -> Result<WperpBasis> {
    let n = basis.truncation;
    let g = basis.grid();
    let q = basis.q();
    let w = basis.harmonic.cell_masses();
    let ni = n as i64;
    let modes: Vec<i64> = (-ni..=ni).collect();
    let cols = 2 * modes.len();
    let tests: Vec<Box<dyn Fn(Complex64) -> Complex64 + Sync>> = modes
        .iter()
        .flat_map(|&k| {
            let a: Box<dyn Fn(Complex64) -> Complex64 + Sync> = Box::new(move |z: Complex64| z.powi(k as i32));
            let b: Box<dyn Fn(Complex64) -> Complex64 + Sync> = Box::new(move |z: Complex64| z.conj().powi(k as i32));
            [a, b]
        })
        .collect();
    let pts = boundary_points(q, g);
    let rows: Vec<Vec<Complex64>> = tests
        .par_iter()
        .map(|t| {
            let mut row = vec![Complex64::new(0.0, 0.0); cols];
            for (c, p) in pts.iter().enumerate() {
                let tc = t(*p).conj() * w[c];
                let (k, off) = if c < g { (c, 0) } else { (c - g, modes.len()) };
                let theta = grid_angle(k, g);
                for (j, &m) in modes.iter().enumerate() {
                    row[off + j] += Complex64::from_polar(1.0, m as f64 * theta) * tc;
                }
            }
            let norm = row.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            row.iter().map(|x| x / norm).collect()
        })
        .collect();
    let a = DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]);
    let svd = a.svd(false, true);
    let v_t = svd.v_t.ok_or_else(|| Error::validation("SVD failed"))?;
    let sv: Vec<f64> = svd.singular_values.iter().cloned().collect();
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&x, &y| sv[y].total_cmp(&sv[x]));
    let sorted: Vec<f64> = order.iter().map(|&i| sv[i]).collect();
    let smax = sorted[0];
    // Square system: the count of (near) zero singular values plus the rank deficit.
    let dimension = sorted.iter().filter(|&&s| s <= tol * smax).count() + cols.saturating_sub(sorted.len());
    if dimension != 1 {
        return Err(Error::WperpDimension { dim: dimension, singular_values: sorted });
    }
    let null = v_t.row(order[sv.len() - 1]).adjoint();
    // Samples of the null vector on both circles.
    let mut samples: Vec<Complex64> = (0..2 * g)
        .map(|c| {
            let (k, off) = if c < g { (c, 0) } else { (c - g, modes.len()) };
            let theta = grid_angle(k, g);
            modes.iter().enumerate().map(|(j, &m)| null[off + j] * Complex64::from_polar(1.0, m as f64 * theta)).sum()
        })
        .collect();
    // Rotate to a real function, positive on the outer circle.
    let s2: Complex64 = samples.iter().zip(&w).map(|(x, wc)| x * x * *wc).sum();
    let phase = Complex64::from_polar(1.0, -s2.arg() / 2.0);
    for x in samples.iter_mut() {
        *x *= phase;
    }
    let mut real: Vec<f64> = samples.iter().map(|x| x.re).collect();
    let outer_sum: f64 = real[..g].iter().sum();
    let norm = real.iter().zip(&w).map(|(x, wc)| x * x * wc).sum::<f64>().sqrt();
    let sign = if outer_sum < 0.0 { -1.0 } else { 1.0 };
    for x in real.iter_mut() {
        *x *= sign / norm;
    }
    Ok(WperpBasis { dimension, samples: real, singular_values: sorted })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusRecovery {
    pub measure: BoundaryMeasure,
    /// Held-out residual within `tol`.
    pub pass: bool,
    pub tol: f64,
    /// Max `|∫(2S_N − 1)dμ − f|` over the fitting points.
    pub fit_residual: f64,
    /// The same over the held-out points.
    pub test_residual: f64,
    pub mass: f64,
    pub q_moment: f64,
    pub fit_points: usize,
    pub test_points: usize,
    pub iterations: usize,
}

/// 20 points on each of the circles of radii `(q+z0)/2` and `(1+z0)/2`.
pub fn default_fit_points(q: f64, z0: f64) -> Vec<Complex64> {
    let mut pts = Vec::with_capacity(40);
    for r in [(q + z0) / 2.0, (1.0 + z0) / 2.0] {
        pts.extend((0..20).map(|k| grid_point(k, 20) * r));
    }
    pts
}

/// 20 points on the circle between the fitting circles, at angles midway
/// between fitting angles.
pub fn default_test_points(q: f64, z0: f64) -> Vec<Complex64> {
    let r = ((q + z0) / 2.0 + (1.0 + z0) / 2.0) / 2.0;
    (0..20).map(|k| Complex64::from_polar(r, std::f64::consts::TAU * (k as f64 + 0.5) / 20.0)).collect()
}

/// Polar grid strictly inside the annulus.
pub fn interior_grid(q: f64, radii: usize, angles: usize) -> Vec<Complex64> {
    let mut pts = Vec::with_capacity(radii * angles);
    for i in 1..=radii {
        let r = q + (1.0 - q) * i as f64 / (radii + 1) as f64;
        pts.extend((0..angles).map(|k| Complex64::from_polar(r, std::f64::consts::TAU * (k as f64 + 0.25) / angles as f64)));
    }
    pts
}

pub fn annulus_recover(f: &FunctionSpec, basis: &HardyBasisNumeric, tol: f64) -> Result<AnnulusRecovery> {
    annulus_recover_with(f, basis, &default_fit_points(basis.q(), basis.z0()), &default_test_points(basis.q(), basis.z0()), tol)
}

/// Nonnegative cell masses with total 1 and `∫Q dμ = 0` whose Herglotz
/// integral best matches `f` at the fitting points.
pub fn annulus_recover_with(
    f: &FunctionSpec,
    basis: &HardyBasisNumeric,
    fit: &[Complex64],
    test: &[Complex64],
    tol: f64,
) -> Result<AnnulusRecovery> {
    let z0 = Complex64::new(basis.z0(), 0.0);
    let f0 = f.at(z0)?;
    if (f0 - 1.0).norm() > 1e-8 {
        return Err(Error::validation(format!("f must be normalized so that f(z0) = 1, got {f0}")));
    }
    let fit_vals: Vec<Complex64> = fit.iter().map(|&z| f.at(z)).collect::<Result<_>>()?;
    let test_vals: Vec<Complex64> = test.iter().map(|&z| f.at(z)).collect::<Result<_>>()?;
    for (z, v) in fit.iter().zip(&fit_vals).chain(test.iter().zip(&test_vals)) {
        if v.re < -NEGATIVITY_TOL {
            return Err(Error::NotHerglotz { witness: vec![*z], value: v.re });
        }
    }
    let cells = 2 * basis.grid();
    let rows: Vec<Vec<Complex64>> = fit.par_iter().map(|&z| basis.szego_row(z)).collect();
    let m = basis.len();
    let nfit = 2 * fit.len();
    let mut a = DMatrix::zeros(nfit + 2 * m, cells);
    let mut b = DVector::zeros(nfit + 2 * m);
    for (i, row) in rows.iter().enumerate() {
        for (c, s) in row.iter().enumerate() {
            let h = s * 2.0 - 1.0;
            a[(2 * i, c)] = h.re;
            a[(2 * i + 1, c)] = h.im;
        }
        b[2 * i] = fit_vals[i].re;
        b[2 * i + 1] = fit_vals[i].im;
    }
    let omega = basis.harmonic.cell_masses();
    for j in 0..m {
        let mut target = Complex64::new(0.0, 0.0);
        for c in 0..cells {
            let e = basis.boundary_values[(j, c)].conj() * TIE_BREAK;
            a[(nfit + 2 * j, c)] = e.re;
            a[(nfit + 2 * j + 1, c)] = e.im;
            target += e * omega[c];
        }
        b[nfit + 2 * j] = target.re;
        b[nfit + 2 * j + 1] = target.im;
    }
    let ceq = DMatrix::from_fn(2, cells, |r, c| if r == 0 { 1.0 } else { basis.q_samples[c] });
    let deq = DVector::from_vec(vec![1.0, 0.0]);
    let sol = nnls_with_equalities(&a, &b, &ceq, &deq, EQUALITY_TOL)?;
    let masses: Vec<f64> = sol.x.iter().map(|x| x.max(0.0)).collect();
    let g = basis.grid() as f64;
    let measure = BoundaryMeasure::density(Boundary::Annulus { q: basis.q() }, basis.grid(), masses.iter().map(|m| m * g).collect())?;
    let max_err = |pts: &[Complex64], vals: &[Complex64]| -> f64 {
        pts.iter().zip(vals).map(|(&z, v)| (basis.herglotz_masses(&masses, z) - v).norm()).fold(0.0, f64::max)
    };
    let fit_residual = max_err(fit, &fit_vals);
    let test_residual = max_err(test, &test_vals);
    let mass: f64 = masses.iter().sum();
    let q_moment: f64 = masses.iter().zip(&basis.q_samples).map(|(m, q)| m * q).sum();
    let pass = test_residual <= tol;
    Ok(AnnulusRecovery {
        measure,
        pass,
        tol,
        fit_residual,
        test_residual,
        mass,
        q_moment,
        fit_points: fit.len(),
        test_points: test.len(),
        iterations: sol.iterations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusVerifyReport {
    pub pass: bool,
    pub tol: f64,
    pub mass: f64,
    pub mass_ok: bool,
    pub nonnegative: bool,
    pub q_moment: f64,
    /// `|∫Q dμ| ≤ tol`.
    pub determining: bool,
    /// Max reconstruction error against `f` on the test grid.
    pub residual: f64,
    /// Min of `Re ∫(2S_N − 1)dμ` on a denser interior grid.
    pub min_real_part: f64,
}

/// Checks mass, nonnegativity, the defect constraint, the reconstruction of
/// `f` on `test` and positivity of the reconstruction's real part.
pub fn annulus_verify(basis: &HardyBasisNumeric, mu: &BoundaryMeasure, f: &FunctionSpec, test: &[Complex64], tol: f64) -> Result<AnnulusVerifyReport> {
    let masses = basis.cell_masses_of(mu)?;
    let mass: f64 = masses.iter().sum();
    let nonnegative = masses.iter().all(|m| *m >= 0.0);
    let q_moment = basis.q_moment(mu)?;
    let errs: Vec<Result<f64>> = test.par_iter().map(|&z| Ok((basis.herglotz_masses(&masses, z) - f.at(z)?).norm())).collect();
    let mut residual: f64 = 0.0;
    for e in errs {
        residual = residual.max(e?);
    }
    let dense = interior_grid(basis.q(), 12, 48);
    let min_real_part = dense.par_iter().map(|&z| basis.herglotz_masses(&masses, z).re).reduce(|| f64::INFINITY, f64::min);
    let mass_ok = (mass - 1.0).abs() <= tol;
    let determining = q_moment.abs() <= tol;
    let pass = mass_ok && nonnegative && determining && residual <= tol && min_real_part >= -NEGATIVITY_TOL;
    Ok(AnnulusVerifyReport { pass, tol, mass, mass_ok, nonnegative, q_moment, determining, residual, min_real_part })
}

// Binary container: "HARDYB01", q (f64), z0 (f64), N (u64), grid (u64), then
// little-endian f64 arrays: outer density (grid), inner density (grid),
// norms (2N+1), gram and coeffs as row-major (re, im) pairs, Q (2·grid).

fn put_f64(out: &mut Vec<u8>, x: f64) {
    out.extend_from_slice(&x.to_le_bytes());
}

fn put_complex_matrix(out: &mut Vec<u8>, m: &DMatrix<Complex64>) {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            put_f64(out, m[(i, j)].re);
            put_f64(out, m[(i, j)].im);
        }
    }
}

impl HardyBasisNumeric {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        put_f64(&mut out, self.q());
        put_f64(&mut out, self.z0());
        out.extend_from_slice(&(self.truncation as u64).to_le_bytes());
        out.extend_from_slice(&(self.grid() as u64).to_le_bytes());
        for x in self.harmonic.outer.iter().chain(&self.harmonic.inner).chain(&self.norms) {
            put_f64(&mut out, *x);
        }
        put_complex_matrix(&mut out, &self.gram);
        put_complex_matrix(&mut out, &self.coeffs);
        for x in &self.q_samples {
            put_f64(&mut out, *x);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(Error::validation("not a Hardy basis file (bad magic)"));
        }
        let q = r.f64()?;
        let z0 = r.f64()?;
        let n = r.u64()? as usize;
        let grid = r.u64()? as usize;
        check_annulus(q, z0)?;
        if n == 0 || 4 * n > grid {
            return Err(Error::validation("corrupt header: truncation and grid are inconsistent"));
        }
        let m = 2 * n + 1;
        let expected = 40 + 8 * (2 * grid + m + 4 * m * m + 2 * grid);
        if bytes.len() != expected {
            return Err(Error::validation(format!("basis file has {} bytes, expected {expected}", bytes.len())));
        }
        let outer = r.vec(grid)?;
        let inner = r.vec(grid)?;
        let norms = r.vec(m)?;
        let gram = r.matrix(m)?;
        let coeffs = r.matrix(m)?;
        let q_samples = r.vec(2 * grid)?;
        let pts = boundary_points(q, grid);
        let phi = DMatrix::from_fn(m, pts.len(), |j, c| pts[c].powi(j as i32 - n as i32) / norms[j]);
        let boundary_values = &coeffs * &phi;
        Ok(HardyBasisNumeric {
            harmonic: HarmonicMeasure { q, z0, grid, outer, inner },
            truncation: n,
            norms,
            gram,
            coeffs,
            q_samples,
            boundary_values,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut buf = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut buf)?;
        Self::from_bytes(&buf)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(Error::validation("basis file is truncated"));
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn vec(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|_| self.f64()).collect()
    }

    fn matrix(&mut self, m: usize) -> Result<DMatrix<Complex64>> {
        let mut out = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                out[(i, j)] = Complex64::new(self.f64()?, self.f64()?);
            }
        }
        Ok(out)
    }
}
