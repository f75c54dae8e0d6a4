//! Matrix-valued Herglotz functions: the operator-valued measure is built from
//! scalar recoveries of `⟨F h, h⟩` over a polarization family of vectors.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::{FunctionSpec, MatrixValue};
use crate::herglotz_disc::NEGATIVITY_TOL;
use crate::kernels::{check_interior, herglotz_kernel, DomainKind, DomainSpec};
use crate::measures::{torus_grid_point, Boundary, MatrixAtom, MatrixBoundaryMeasure};
use crate::numerics::{clip_psd, HermitianMatrix};
use crate::serde_complex as cx;

/// Cells whose smallest eigenvalue falls below this are projected to PSD.
pub const CLIP_TOL: f64 = -1e-12;

/// `F(z) = skew + ∫ H(z, ζ) dE(ζ)` with `skew = (F(z0) − F(z0)*)/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixHerglotzRep {
    pub domain: DomainSpec,
    pub measure: MatrixBoundaryMeasure,
    #[serde(with = "cx::vec_vec")]
    pub skew: Vec<Vec<Complex64>>,
}

impl MatrixHerglotzRep {
    pub fn skew_matrix(&self) -> MatrixValue {
        let n = self.skew.len();
        DMatrix::from_fn(n, n, |i, j| self.skew[i][j])
    }
}

pub(crate) fn matrix_rows(m: &MatrixValue) -> Vec<Vec<Complex64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

/// The polarization family: `e_i`, then `e_i + e_j` and `e_i + i e_j` for
/// `i < j`.
pub fn polarization_vectors(n: usize) -> Vec<Vec<Complex64>> {
    let mut out = Vec::new();
    let unit = |i: usize| {
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[i] = Complex64::new(1.0, 0.0);
        v
    };
    for i in 0..n {
        out.push(unit(i));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let mut a = unit(i);
            a[j] = Complex64::new(1.0, 0.0);
            out.push(a);
            let mut b = unit(i);
            b[j] = Complex64::new(0.0, 1.0);
            out.push(b);
        }
    }
    out
}

/// `h* M h`.
pub fn quadratic(m: &MatrixValue, h: &[Complex64]) -> Complex64 {
    let n = h.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += h[i].conj() * m[(i, j)] * h[j];
        }
    }
    acc
}

/// Rebuilds the Hermitian matrix whose quadratic forms on
/// [`polarization_vectors`] are `q`.
pub fn depolarize(n: usize, q: &[f64]) -> MatrixValue {
    let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for i in 0..n {
        m[(i, i)] = Complex64::new(q[i], 0.0);
    }
    let mut idx = n;
    for i in 0..n {
        for j in (i + 1)..n {
            let re = (q[idx] - q[i] - q[j]) / 2.0;
            let im = -(q[idx + 1] - q[i] - q[j]) / 2.0;
            m[(i, j)] = Complex64::new(re, im);
            m[(j, i)] = Complex64::new(re, -im);
            idx += 2;
        }
    }
    m
}

/// Hermitian square root and inverse square root of a positive definite
/// matrix.
pub fn sqrt_and_inv_sqrt(m: &MatrixValue) -> Result<(MatrixValue, MatrixValue)> {
    let h = HermitianMatrix::new((m + m.adjoint()) * Complex64::new(0.5, 0.0))?;
    let (vals, vecs) = h.eigen();
    if vals[0] <= 0.0 {
        return Err(Error::IllConditioned { cond: f64::INFINITY });
    }
    let diag = |f: fn(f64) -> f64| {
        DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(vals.len(), vals.iter().map(|&v| Complex64::new(f(v), 0.0))))
    };
    let s = &vecs * diag(f64::sqrt) * vecs.adjoint();
    let si = &vecs * diag(|v| 1.0 / v.sqrt()) * vecs.adjoint();
    Ok((s, si))
}

/// Boundary nodes (unit-modulus coordinates) for a disc or polydisc lift.
fn lift_nodes(domain: &DomainSpec, grid: usize) -> Result<Vec<Vec<Complex64>>> {
    let d = match domain.kind {
        DomainKind::Disc => 1,
        DomainKind::Polydisc { d } if d <= 3 => d,
        _ => return Err(Error::UnsupportedBoundary("matrix lift supports the disc and polydiscs of dimension ≤ 3".into())),
    };
    let total = grid.checked_pow(d as u32).ok_or_else(|| Error::validation("grid too large"))?;
    Ok((0..total).map(|k| torus_grid_point(k, grid, d)).collect())
}

/// Recovers the operator-valued measure of a matrix Herglotz function by
/// running the scalar dilation recovery on `⟨F h, h⟩` for each polarization
/// vector, depolarizing cell by cell, clipping cells to PSD and normalizing
/// by congruence so that the total mass is `Re F(0)`.
pub fn lift(f: &FunctionSpec, domain: &DomainSpec, r: f64, grid: usize) -> Result<MatrixHerglotzRep> {
    lift_with(|z| f.eval_matrix(z), domain, r, grid)
}

/// [`lift`] for a function given as a closure.
pub fn lift_with<F>(f: F, domain: &DomainSpec, r: f64, grid: usize) -> Result<MatrixHerglotzRep>
where
    F: Fn(&[Complex64]) -> Result<MatrixValue> + Sync,
{
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::validation(format!("recovery radius must lie in (0, 1), got {r}")));
    }
    if grid == 0 {
        return Err(Error::validation("grid must be positive"));
    }
    domain.validate()?;
    let nodes = lift_nodes(domain, grid)?;
    let d = nodes[0].len();
    let origin = vec![Complex64::new(0.0, 0.0); d];
    let f0 = f(&origin)?;
    let n = f0.nrows();
    let re0 = (&f0 + f0.adjoint()) * Complex64::new(0.5, 0.0);
    let skew = (&f0 - f0.adjoint()) * Complex64::new(0.5, 0.0);
    let hs = polarization_vectors(n);

    // Q[k][h] = Re ⟨F(rζ_k) h, h⟩.
    let samples: Vec<Result<Vec<f64>>> = nodes
        .par_iter()
        .map(|zeta| {
            let z: Vec<Complex64> = zeta.iter().map(|u| u * r).collect();
            let fz = f(&z)?;
            Ok(hs.iter().map(|h| quadratic(&fz, h).re).collect())
        })
        .collect();
    let cells = nodes.len();
    let mut cell_mats = Vec::with_capacity(cells);
    for (k, s) in samples.into_iter().enumerate() {
        let mut q = s?;
        let witness = || -> Vec<Complex64> { nodes[k].iter().map(|u| u * r).collect() };
        for v in q.iter_mut().take(n) {
            if !v.is_finite() || *v < -NEGATIVITY_TOL {
                return Err(not_matrix_herglotz(&f, &witness()));
            }
            *v = v.max(0.0);
        }
        let mut m = depolarize(n, &q);
        if n > 1 {
            let (vals, vecs) = HermitianMatrix::new(m.clone())?.eigen();
            if vals[0] < -NEGATIVITY_TOL * (1.0 + vals[vals.len() - 1].abs()) {
                return Err(Error::NotMatrixHerglotz {
                    witness: witness()[0],
                    eigenvalue: vals[0],
                    eigenvector: vecs.column(0).iter().cloned().collect(),
                });
            }
            if vals[0] < CLIP_TOL {
                m = clip_psd(&m);
            }
        }
        cell_mats.push(m);
    }

    let inv = 1.0 / cells as f64;
    let raw_total = cell_mats.iter().fold(DMatrix::from_element(n, n, Complex64::new(0.0, 0.0)), |a, m| a + m) * Complex64::new(inv, 0.0);
    let atoms: Vec<MatrixAtom> = if n == 1 {
        // Same arithmetic as the scalar path.
        let mass = raw_total[(0, 0)].re;
        let factor = if mass > 0.0 { re0[(0, 0)].re / mass } else { 1.0 };
        nodes
            .iter()
            .zip(cell_mats.iter())
            .map(|(p, m)| MatrixAtom { point: p.clone(), matrix: DMatrix::from_element(1, 1, Complex64::new(m[(0, 0)].re * factor * inv, 0.0)) })
            .collect()
    } else {
        let (_, m_inv_sqrt) = sqrt_and_inv_sqrt(&raw_total)?;
        let r_sqrt = psd_sqrt(&re0)?;
        let s = r_sqrt * m_inv_sqrt;
        let sa = s.adjoint();
        nodes
            .iter()
            .zip(cell_mats.iter())
            .map(|(p, m)| MatrixAtom { point: p.clone(), matrix: &s * m * &sa * Complex64::new(inv, 0.0) })
            .collect()
    };
    let boundary = if d == 1 { Boundary::Circle } else { Boundary::Torus { d } };
    Ok(MatrixHerglotzRep {
        domain: domain.clone(),
        measure: MatrixBoundaryMeasure::new_unchecked(boundary, atoms)?,
        skew: matrix_rows(&skew),
    })
}

/// Square root of a PSD matrix (eigenvalues clipped at zero).
fn psd_sqrt(m: &MatrixValue) -> Result<MatrixValue> {
    let h = HermitianMatrix::new((m + m.adjoint()) * Complex64::new(0.5, 0.0))?;
    let (vals, vecs) = h.eigen();
    let d = nalgebra::DVector::from_iterator(vals.len(), vals.iter().map(|&v| Complex64::new(v.max(0.0).sqrt(), 0.0)));
    Ok(&vecs * DMatrix::from_diagonal(&d) * vecs.adjoint())
}

fn not_matrix_herglotz<F>(f: &F, z: &[Complex64]) -> Error
where
    F: Fn(&[Complex64]) -> Result<MatrixValue>,
{
    match f(z) {
        Ok(fz) => {
            let re = (&fz + fz.adjoint()) * Complex64::new(0.5, 0.0);
            match HermitianMatrix::new(re) {
                Ok(h) => {
                    let (vals, vecs) = h.eigen();
                    Error::NotMatrixHerglotz { witness: z[0], eigenvalue: vals[0], eigenvector: vecs.column(0).iter().cloned().collect() }
                }
                Err(e) => e,
            }
        }
        Err(e) => e,
    }
}

/// `skew + Σ_k H(z, ζ_k) E_k`.
pub fn eval(rep: &MatrixHerglotzRep, z: &[Complex64]) -> Result<MatrixValue> {
    check_interior(&rep.domain, z)?;
    let mut acc = rep.skew_matrix();
    for atom in rep.measure.atoms() {
        let k = herglotz_kernel(&rep.domain, z, &atom.point)?;
        acc += &atom.matrix * k;
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdReport {
    pub pass: bool,
    /// Smallest eigenvalue over all atoms.
    pub min_eigenvalue: f64,
    pub worst_atom: usize,
    /// Smallest eigenvalue of `Re F(z0) − Σ_{k ≤ K} E_k` over all prefixes
    /// (only when a target total is supplied).
    pub min_prefix_slack: Option<f64>,
    /// `‖Σ E_k − Re F(z0)‖`, when a target total is supplied.
    pub total_deviation: Option<f64>,
    pub tol: f64,
}

/// Every atom PSD within `tol`; with a target total, every partial sum stays
/// below it and the full sum matches it.
pub fn psd_atom_check(e: &MatrixBoundaryMeasure, target_total: Option<&MatrixValue>, tol: f64) -> Result<PsdReport> {
    let mut min_eigenvalue = f64::INFINITY;
    let mut worst_atom = 0;
    for (k, atom) in e.atoms().iter().enumerate() {
        let m = &atom.matrix;
        let v = HermitianMatrix::new((m + m.adjoint()) * Complex64::new(0.5, 0.0))?.eigenvalues()[0];
        if v < min_eigenvalue {
            min_eigenvalue = v;
            worst_atom = k;
        }
    }
    let (min_prefix_slack, total_deviation) = match target_total {
        None => (None, None),
        Some(t) => {
            let n = t.nrows();
            if n != e.dim() {
                return Err(Error::validation("target total has the wrong size"));
            }
            let mut acc = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
            let mut slack = f64::INFINITY;
            for atom in e.atoms() {
                acc += &atom.matrix;
                let diff = t - &acc;
                let v = HermitianMatrix::new((&diff + diff.adjoint()) * Complex64::new(0.5, 0.0))?.eigenvalues()[0];
                slack = slack.min(v);
            }
            let dev = crate::functions::operator_norm(&(&acc - t));
            (Some(slack), Some(dev))
        }
    };
    let pass = min_eigenvalue >= -tol && min_prefix_slack.is_none_or(|s| s >= -tol) && total_deviation.is_none_or(|d| d <= tol);
    Ok(PsdReport { pass, min_eigenvalue, worst_atom, min_prefix_slack, total_deviation, tol })
}
