//! Rational inner approximation of Schur functions through the Cayley
//! transform and an atomic discretization of the representing measure, and
//! the reverse route from a finite Blaschke product to atoms.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::{
    cayley, disc_sample_points, inverse_cayley_scalar, operator_norm, poly_derivative, poly_eval, poly_mul, poly_roots,
    FunctionSpec, MatrixValue, DEFAULT_SHRINK,
};
use crate::herglotz_disc::{eval_rep, HerglotzDiscRep};
use crate::kernels::DomainSpec;
use crate::measures::{Atom, Boundary, BoundaryMeasure, MatrixAtom, MatrixBoundaryMeasure};
use crate::numerics::{clip_psd, grid_point, HermitianMatrix};
use crate::operator_lift::{lift_with, matrix_rows};
use crate::serde_complex as cx;

/// `sup ‖φ‖` at or above this needs a positive shrink.
pub const SHRINK_TRIGGER: f64 = 1.0 - 1e-8;
/// Schur test slack.
pub const SCHUR_TOL: f64 = 1e-10;
/// Accepted `|B(α) + 1|` for a computed root.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaraConfig {
    /// Dilation radius for recovering the measure of `θ`.
    pub recovery_radius: f64,
    pub recovery_grid: usize,
    /// Points on the boundary certificate grid (offset by half a cell).
    pub certificate_grid: usize,
    /// Sup-error against `φ` is measured on `|z| ≤ sup_radius`.
    pub sup_radius: f64,
    /// Schur preservation is checked on `|z| ≤ schur_radius`.
    pub schur_radius: f64,
}

impl Default for CaraConfig {
    fn default() -> Self {
        CaraConfig { recovery_radius: 0.9999, recovery_grid: 65536, certificate_grid: 1024, sup_radius: 0.6, schur_radius: 0.9 }
    }
}

/// `f_n = (I − θ_n)(I + θ_n)^{-1}` with `θ_n(z) = skew + Σ A_j (α_j+z)/(α_j−z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalInnerSpec {
    pub dim: usize,
    pub shrink: f64,
    /// Atoms `(α_j, A_j)`.
    pub atoms: MatrixBoundaryMeasure,
    /// `i Im θ(0)`.
    #[serde(with = "cx::vec_vec")]
    pub skew: Vec<Vec<Complex64>>,
    /// Scalar case: `f_n` as a rational function.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<FunctionSpec>,
    /// Max over the certificate grid of `|‖f_n(ζ)‖ − 1|` (scalar) or
    /// `‖f_n*f_n − I‖` (matrix).
    pub boundary_deviation: f64,
    /// `sup ‖f_n − φ‖` on `|z| ≤ sup_radius`.
    pub sup_error: f64,
    /// `sup ‖f_n‖` on `|z| ≤ schur_radius`.
    pub schur_max_norm: f64,
    /// `‖Σ A_j − Re θ(0)‖`.
    pub weight_deviation: f64,
}

impl RationalInnerSpec {
    pub fn skew_matrix(&self) -> MatrixValue {
        let n = self.skew.len();
        DMatrix::from_fn(n, n, |i, j| self.skew[i][j])
    }

    pub fn theta(&self, z: Complex64) -> Result<MatrixValue> {
        let mut acc = self.skew_matrix();
        for a in self.atoms.atoms() {
            let alpha = a.point[0];
            if alpha == z {
                return Err(Error::Pole { at: vec![z] });
            }
            acc += &a.matrix * ((alpha + z) / (alpha - z));
        }
        Ok(acc)
    }

    pub fn eval(&self, z: Complex64) -> Result<MatrixValue> {
        match &self.spec {
            Some(s) => s.eval_matrix(&[z]),
            None => cayley(&self.theta(z)?),
        }
    }
}

/// Product of `(α_j − z)` over a balanced even/odd split, which keeps the
/// coefficients of the partial products small for equispaced points.
fn root_product(alphas: &[Complex64]) -> Vec<Complex64> {
    match alphas.len() {
        0 => vec![Complex64::new(1.0, 0.0)],
        1 => vec![alphas[0], Complex64::new(-1.0, 0.0)],
        _ => {
            let evens: Vec<Complex64> = alphas.iter().step_by(2).cloned().collect();
            let odds: Vec<Complex64> = alphas.iter().skip(1).step_by(2).cloned().collect();
            poly_mul(&root_product(&evens), &root_product(&odds))
        }
    }
}

/// `D(z) / (α − z)` for a root `α` of `D`.
fn deflate(d: &[Complex64], alpha: Complex64) -> Vec<Complex64> {
    let n = d.len() - 1;
    let mut q = vec![Complex64::new(0.0, 0.0); n];
    let mut prev = Complex64::new(0.0, 0.0);
    for k in 0..n {
        q[k] = (d[k] + prev) / alpha;
        prev = q[k];
    }
    q
}

/// The scalar `f_n = (D − N)/(D + N)` with `D = Π(α_j − z)` and
/// `N = D θ_n`, normalized so the denominator has constant term 1.
pub fn scalar_inner_spec(imag: f64, atoms: &[(Complex64, f64)]) -> FunctionSpec {
    let alphas: Vec<Complex64> = atoms.iter().map(|a| a.0).collect();
    let d = root_product(&alphas);
    let mut n: Vec<Complex64> = d.iter().map(|c| c * Complex64::new(0.0, imag)).collect();
    for &(alpha, w) in atoms {
        let term = poly_mul(&[alpha, Complex64::new(1.0, 0.0)], &deflate(&d, alpha));
        for (k, c) in term.iter().enumerate() {
            n[k] += c * w;
        }
    }
    let num: Vec<Complex64> = d.iter().zip(&n).map(|(a, b)| a - b).collect();
    let den: Vec<Complex64> = d.iter().zip(&n).map(|(a, b)| a + b).collect();
    let s = den[0];
    FunctionSpec::rational(num.iter().map(|c| c / s).collect(), den.iter().map(|c| c / s).collect())
}

/// Sum of matrix cells over `n` equal arcs centred at `2πj/n`; a cell lying
/// exactly on an arc boundary is split evenly between its two arcs.
fn bin_cells(cells: &[MatrixAtom], n: usize) -> Vec<(MatrixValue, Complex64)> {
    let g = cells.len();
    let dim = cells[0].matrix.nrows();
    let mut bins = vec![(DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0)), Complex64::new(0.0, 0.0)); n];
    let mut add = |j: usize, m: &MatrixValue, zeta: Complex64, share: f64| {
        let b = &mut bins[j % n];
        b.0 += m * Complex64::new(share, 0.0);
        let tr: f64 = (0..dim).map(|i| m[(i, i)].re).sum();
        b.1 += zeta * (tr * share);
    };
    for (k, cell) in cells.iter().enumerate() {
        // Position in bin units: t = k n / g; fractional part rem / g.
        let kn = k * n;
        let (whole, rem) = (kn / g, kn % g);
        let zeta = cell.point[0];
        if 2 * rem < g {
            add(whole, &cell.matrix, zeta, 1.0);
        } else if 2 * rem > g {
            add(whole + 1, &cell.matrix, zeta, 1.0);
        } else {
            add(whole, &cell.matrix, zeta, 0.5);
            add(whole + 1, &cell.matrix, zeta, 0.5);
        }
    }
    bins
}

fn max_norm_on<F>(points: &[Complex64], f: F) -> Result<f64>
where
    F: Fn(Complex64) -> Result<MatrixValue> + Sync,
{
    let vals: Vec<Result<f64>> = points.par_iter().map(|&z| f(z).map(|m| operator_norm(&m))).collect();
    let mut best: f64 = 0.0;
    for v in vals {
        best = best.max(v?);
    }
    Ok(best)
}

/// Points used to decide whether `φ` is Schur and whether a shrink is
/// needed: a polar grid out to 0.99 and a circle just inside the boundary.
pub fn schur_test_points() -> Vec<Complex64> {
    let mut pts = disc_sample_points(0.99, 11, 64);
    pts.extend((0..256).map(|k| grid_point(k, 256) * (1.0 - 1e-9)));
    pts
}

/// Approximates a scalar or matrix Schur function by a rational inner
/// function with `n` atoms.
pub fn approximate_schur(phi: &FunctionSpec, n: usize, shrink: f64) -> Result<RationalInnerSpec> {
    approximate_schur_with(|z| phi.eval_matrix(&[z]), n, shrink, &CaraConfig::default())
}

pub fn approximate_schur_with<F>(phi: F, n: usize, shrink: f64, config: &CaraConfig) -> Result<RationalInnerSpec>
where
    F: Fn(Complex64) -> Result<MatrixValue> + Sync,
{
    if n == 0 {
        return Err(Error::validation("at least one atom is required"));
    }
    if !(0.0..1.0).contains(&shrink) {
        return Err(Error::validation(format!("shrink must lie in [0, 1), got {shrink}")));
    }
    let sup = max_norm_on(&schur_test_points(), &phi)?;
    if sup > 1.0 + SCHUR_TOL {
        return Err(Error::NotSchur { max_norm: sup });
    }
    let shrink = if shrink == 0.0 && sup >= SHRINK_TRIGGER { DEFAULT_SHRINK } else { shrink };
    let scale = Complex64::new(1.0 - shrink, 0.0);
    let theta = |z: &[Complex64]| -> Result<MatrixValue> { cayley(&(phi(z[0])? * scale)) };

    let theta0 = theta(&[Complex64::new(0.0, 0.0)])?;
    let dim = theta0.nrows();
    let re0 = (&theta0 + theta0.adjoint()) * Complex64::new(0.5, 0.0);
    let rep = lift_with(theta, &DomainSpec::disc(), config.recovery_radius, config.recovery_grid)?;
    let skew = rep.skew_matrix();

    let mut atoms = Vec::new();
    for (j, (m, centroid)) in bin_cells(rep.measure.atoms(), n).into_iter().enumerate() {
        let mass: f64 = (0..dim).map(|i| m[(i, i)].re).sum();
        if mass <= 0.0 {
            continue;
        }
        let alpha = if centroid.norm() > 1e-12 * mass { centroid / centroid.norm() } else { grid_point(j, n) };
        let m = if dim > 1 && HermitianMatrix::new((&m + m.adjoint()) * Complex64::new(0.5, 0.0))?.eigenvalues()[0] < 0.0 {
            clip_psd(&m)
        } else {
            m
        };
        atoms.push(MatrixAtom { point: vec![alpha], matrix: m });
    }
    let total = atoms.iter().fold(DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0)), |a, x| a + &x.matrix);
    let weight_deviation = operator_norm(&(total - &re0));

    let spec = (dim == 1).then(|| {
        let scalar: Vec<(Complex64, f64)> = atoms.iter().map(|a| (a.point[0], a.matrix[(0, 0)].re)).collect();
        scalar_inner_spec(skew[(0, 0)].im, &scalar)
    });
    let mut out = RationalInnerSpec {
        dim,
        shrink,
        atoms: MatrixBoundaryMeasure::new_unchecked(Boundary::Circle, atoms)?,
        skew: matrix_rows(&skew),
        spec,
        boundary_deviation: 0.0,
        sup_error: 0.0,
        schur_max_norm: 0.0,
        weight_deviation,
    };

    let g = config.certificate_grid;
    let cert: Vec<Complex64> = (0..g).map(|k| Complex64::from_polar(1.0, std::f64::consts::TAU * (k as f64 + 0.5) / g as f64)).collect();
    let devs: Vec<Result<f64>> = cert
        .par_iter()
        .map(|&z| {
            let m = out.eval(z)?;
            Ok(if dim == 1 { (m[(0, 0)].norm() - 1.0).abs() } else { operator_norm(&(m.adjoint() * &m - DMatrix::identity(dim, dim))) })
        })
        .collect();
    for d in devs {
        out.boundary_deviation = out.boundary_deviation.max(d?);
    }
    let sup_pts = disc_sample_points(config.sup_radius, 6, 32);
    let errs: Vec<Result<f64>> = sup_pts.par_iter().map(|&z| Ok(operator_norm(&(out.eval(z)? - phi(z)?)))).collect();
    for e in errs {
        out.sup_error = out.sup_error.max(e?);
    }
    out.schur_max_norm = max_norm_on(&disc_sample_points(config.schur_radius, 9, 32), |z| out.eval(z))?;
    Ok(out)
}

fn blaschke_parts(b: &FunctionSpec) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    match b {
        FunctionSpec::Blaschke { c, zeros, .. } => Ok(crate::functions::blaschke_polys(*c, zeros)),
        FunctionSpec::Rational { num, den, var: 0 } => Ok((num.clone(), den.clone())),
        _ => Err(Error::validation("expected a Blaschke product or a rational function of one variable")),
    }
}

/// Atoms at the solutions of `B(α) = −1` with weights from the partial
/// fractions of `(1 − B)/(1 + B)`.
pub fn blaschke_to_atoms(b: &FunctionSpec) -> Result<BoundaryMeasure> {
    b.validate()?;
    let (num, den) = blaschke_parts(b)?;
    let zero = Complex64::new(0.0, 0.0);
    let b0 = b.at(zero)?;
    if b0.norm() > 1e-10 {
        return Err(Error::validation(format!("B(0) must vanish, got |B(0)| = {}", b0.norm())));
    }
    let len = num.len().max(den.len());
    let mut p = vec![zero; len];
    for (k, c) in num.iter().enumerate() {
        p[k] += c;
    }
    for (k, c) in den.iter().enumerate() {
        p[k] += c;
    }
    let dp = poly_derivative(&p);
    let mut atoms = Vec::new();
    let mut worst: f64 = 0.0;
    for mut a in poly_roots(&p)? {
        for _ in 0..3 {
            let d = poly_eval(&dp, a);
            if d.norm() == 0.0 {
                break;
            }
            a -= poly_eval(&p, a) / d;
        }
        a /= a.norm();
        let residual = (poly_eval(&num, a) / poly_eval(&den, a) + 1.0).norm();
        worst = worst.max(residual);
        let lambda = -poly_eval(&den, a) / (a * poly_eval(&dp, a));
        atoms.push(Atom { point: vec![a], weight: lambda.re });
    }
    if !(worst < ROOT_RESIDUAL_TOL) {
        return Err(Error::RootSolver { residual: worst });
    }
    if atoms.iter().any(|a| !(a.weight > 0.0)) {
        return Err(Error::RootSolver { residual: worst });
    }
    atoms.sort_by(|x, y| x.point[0].arg().total_cmp(&y.point[0].arg()));
    BoundaryMeasure::atoms(Boundary::Circle, atoms)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryConvergence {
    pub degrees: Vec<usize>,
    /// `sup |eval_rep(μ_n, z) − f(z)|` over the test grid, per degree.
    pub errors: Vec<f64>,
    pub measures: Vec<BoundaryMeasure>,
}

impl RecoveryConvergence {
    pub fn last(&self) -> Option<&BoundaryMeasure> {
        self.measures.last()
    }
}

/// Herglotz `f` with `f(0) = 1` → Schur `φ = (1 − f)/(1 + f)` → rational
/// inner `B_n` → atoms of `B_n = −1`, for each degree in turn.
pub fn caratheodory_recover(f: &FunctionSpec, degrees: &[usize]) -> Result<RecoveryConvergence> {
    caratheodory_recover_with(f, degrees, &CaraConfig::default())
}

pub fn caratheodory_recover_with(f: &FunctionSpec, degrees: &[usize], config: &CaraConfig) -> Result<RecoveryConvergence> {
    let f0 = f.at(Complex64::new(0.0, 0.0))?;
    if (f0 - 1.0).norm() > 1e-10 {
        return Err(Error::validation(format!("f(0) must equal 1, got {f0}")));
    }
    let phi = |z: Complex64| -> Result<MatrixValue> { Ok(DMatrix::from_element(1, 1, inverse_cayley_scalar(f.at(z)?)?)) };
    let test = disc_sample_points(config.sup_radius, 6, 32);
    let mut out = RecoveryConvergence { degrees: degrees.to_vec(), errors: Vec::new(), measures: Vec::new() };
    for &n in degrees {
        let inner = approximate_schur_with(phi, n, 0.0, config)?;
        let b = inner.spec.as_ref().ok_or_else(|| Error::validation("scalar output expected"))?;
        let mu = blaschke_to_atoms(b)?;
        let rep = HerglotzDiscRep::new(mu.clone(), 0.0)?;
        let mut err: f64 = 0.0;
        for &z in &test {
            err = err.max((eval_rep(&rep, z)? - f.at(z)?).norm());
        }
        out.errors.push(err);
        out.measures.push(mu);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::poly_trim;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn small() -> CaraConfig {
        CaraConfig { recovery_grid: 8192, recovery_radius: 0.999, ..CaraConfig::default() }
    }

    fn zero_fn() -> FunctionSpec {
        FunctionSpec::constant(c(0.0, 0.0))
    }

    #[test]
    fn zero_gives_minus_z_to_the_n() {
        for n in [1usize, 2, 4, 8, 16, 32] {
            let out = approximate_schur(&zero_fn(), n, 0.0).unwrap();
            let (num, den) = match out.spec.as_ref().unwrap() {
                FunctionSpec::Rational { num, den, .. } => (num.clone(), den.clone()),
                _ => unreachable!(),
            };
            assert_eq!(num.len(), n + 1);
            for (k, v) in num.iter().enumerate() {
                let expect = if k == n { -1.0 } else { 0.0 };
                assert!((v - c(expect, 0.0)).norm() < 1e-12, "n={n} k={k} {v}");
            }
            for (k, v) in den.iter().enumerate() {
                let expect = if k == 0 { 1.0 } else { 0.0 };
                assert!((v - c(expect, 0.0)).norm() < 1e-12, "n={n} k={k} {v}");
            }
            assert!(out.boundary_deviation < 1e-8);
        }
    }

    #[test]
    fn identity_gives_single_atom_at_minus_one() {
        let phi = FunctionSpec::taylor(vec![c(0.0, 0.0), c(1.0, 0.0)]);
        let out = approximate_schur_with(|z| phi.eval_matrix(&[z]), 1, 0.0, &small()).unwrap();
        assert_eq!(out.shrink, DEFAULT_SHRINK);
        let a = &out.atoms.atoms()[0];
        assert!((a.point[0] - c(-1.0, 0.0)).norm() < 1e-12);
        for z in [c(0.3, 0.1), c(-0.5, 0.4)] {
            assert!((out.eval(z).unwrap()[(0, 0)] - z).norm() < 1e-10);
        }
    }

    #[test]
    fn diagonal_matrix_example() {
        let zero = zero_fn();
        let phi = FunctionSpec::Matrix {
            entries: vec![vec![FunctionSpec::taylor(vec![c(0.0, 0.0), c(1.0, 0.0)]), zero.clone()], vec![zero.clone(), zero]],
        };
        let out = approximate_schur_with(|z| phi.eval_matrix(&[z]), 16, 0.0, &small()).unwrap();
        assert!(out.boundary_deviation < 1e-8, "{}", out.boundary_deviation);
        let mut err: f64 = 0.0;
        for z in disc_sample_points(0.5, 5, 32) {
            err = err.max(operator_norm(&(out.eval(z).unwrap() - phi.eval_matrix(&[z]).unwrap())));
        }
        assert!(err < 0.1, "{err}");
        assert!(out.schur_max_norm <= 1.0 + 1e-10);
    }

    #[test]
    fn not_schur_is_rejected() {
        let phi = FunctionSpec::taylor(vec![c(0.0, 0.0), c(1.5, 0.0)]);
        assert!(matches!(approximate_schur(&phi, 4, 0.0), Err(Error::NotSchur { .. })));
    }

    #[test]
    fn weights_sum_to_re_theta0() {
        let phi = FunctionSpec::taylor(vec![c(0.2, 0.1), c(0.0, 0.0), c(0.5, 0.0)]);
        let out = approximate_schur_with(|z| phi.eval_matrix(&[z]), 8, 0.0, &small()).unwrap();
        assert!(out.weight_deviation < 1e-12);
        assert!(out.boundary_deviation < 1e-8);
        assert!(out.skew[0][0].im != 0.0);
    }

    #[test]
    fn blaschke_examples() {
        let b1 = blaschke_to_atoms(&FunctionSpec::blaschke(c(1.0, 0.0), vec![c(0.0, 0.0)])).unwrap();
        let a = b1.as_atoms().unwrap();
        assert_eq!(a.len(), 1);
        assert!((a[0].point[0] - c(-1.0, 0.0)).norm() < 1e-12);
        assert!((a[0].weight - 1.0).abs() < 1e-12);

        let b2 = blaschke_to_atoms(&FunctionSpec::blaschke(c(1.0, 0.0), vec![c(0.0, 0.0); 2])).unwrap();
        let a = b2.as_atoms().unwrap();
        assert_eq!(a.len(), 2);
        assert!((a[0].point[0] - c(0.0, -1.0)).norm() < 1e-12);
        assert!((a[1].point[0] - c(0.0, 1.0)).norm() < 1e-12);
        assert!(a.iter().all(|x| (x.weight - 0.5).abs() < 1e-12));

        let b3 = blaschke_to_atoms(&FunctionSpec::blaschke(c(1.0, 0.0), vec![c(0.0, 0.0); 3])).unwrap();
        for atom in b3.as_atoms().unwrap() {
            assert!((atom.point[0].powi(3) + 1.0).norm() < 1e-12);
            assert!((atom.weight - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn blaschke_requires_zero_at_origin() {
        assert!(blaschke_to_atoms(&FunctionSpec::blaschke(c(1.0, 0.0), vec![c(0.5, 0.0)])).is_err());
    }

    fn check_reconstruction(b: &FunctionSpec) {
        let mu = blaschke_to_atoms(b).unwrap();
        let total: f64 = mu.as_atoms().unwrap().iter().map(|a| a.weight).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(mu.as_atoms().unwrap().iter().all(|a| a.weight > 0.0));
        let rep = HerglotzDiscRep::new(mu, 0.0).unwrap();
        for z in disc_sample_points(0.8, 8, 24) {
            let bz = b.at(z).unwrap();
            let expect = (1.0 - bz) / (1.0 + bz);
            assert!((eval_rep(&rep, z).unwrap() - expect).norm() < 1e-10);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn blaschke_weights_and_reconstruction(zs in proptest::collection::vec((0.0f64..0.9, 0.0f64..6.28), 0..6),
                                                rot in 0.0f64..6.28) {
            let mut zeros = vec![c(0.0, 0.0)];
            zeros.extend(zs.iter().map(|&(r, t)| Complex64::from_polar(r, t)));
            check_reconstruction(&FunctionSpec::blaschke(Complex64::from_polar(1.0, rot), zeros));
        }

        #[test]
        fn inner_certificate_and_schur(a in -0.6f64..0.6, b in -0.3f64..0.3, n in 1usize..12) {
            let phi = FunctionSpec::taylor(vec![c(a, b), c(0.0, 0.0), c(0.3, 0.0)]);
            let cfg = CaraConfig { recovery_grid: 2048, recovery_radius: 0.99, ..CaraConfig::default() };
            let out = approximate_schur_with(|z| phi.eval_matrix(&[z]), n, 0.0, &cfg).unwrap();
            prop_assert!(out.boundary_deviation <= 1e-8);
            prop_assert!(out.schur_max_norm <= 1.0 + 1e-10);
        }
    }

    #[test]
    fn round_trip_through_blaschke() {
        let phi = FunctionSpec::taylor(vec![c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)]);
        let out = approximate_schur_with(|z| phi.eval_matrix(&[z]), 8, 0.0, &small()).unwrap();
        let mu = blaschke_to_atoms(out.spec.as_ref().unwrap()).unwrap();
        let mut from_roots: Vec<Complex64> = mu.as_atoms().unwrap().iter().map(|a| a.point[0]).collect();
        let mut from_bins: Vec<Complex64> = out.atoms.atoms().iter().map(|a| a.point[0]).collect();
        from_roots.sort_by(|x, y| x.arg().total_cmp(&y.arg()));
        from_bins.sort_by(|x, y| x.arg().total_cmp(&y.arg()));
        for (x, y) in from_roots.iter().zip(&from_bins) {
            assert!((x - y).norm() < 1e-10);
        }
    }

    #[test]
    fn recover_unit_kernel_concentrates_at_one() {
        let cv = caratheodory_recover_with(&FunctionSpec::herglotz_unit(0), &[4, 16], &small()).unwrap();
        let mu = cv.last().unwrap();
        assert!(mu.window_mass(0.0, 0.1).unwrap() > 0.99);
    }

    #[test]
    fn recover_two_point_measure() {
        let f = FunctionSpec::rational_real(&[1.0, 0.0, 1.0], &[1.0, 0.0, -1.0]);
        let cv = caratheodory_recover_with(&f, &[8, 32], &small()).unwrap();
        let mu = cv.last().unwrap();
        assert!((mu.window_mass(0.0, 0.1).unwrap() - 0.5).abs() < 1e-2);
        assert!((mu.window_mass(PI, 0.1).unwrap() - 0.5).abs() < 1e-2);
    }

    #[test]
    fn recover_constant_equidistributes() {
        let cv = caratheodory_recover_with(&FunctionSpec::constant(c(1.0, 0.0)), &[16], &small()).unwrap();
        let m = cv.last().unwrap().moments(3).unwrap();
        for n in 1..=3i64 {
            assert!(m.get(&[n]).unwrap().norm() < 1e-10);
        }
    }

    #[test]
    fn balanced_product_matches_naive() {
        let alphas: Vec<Complex64> = (0..7).map(|k| Complex64::from_polar(1.0, 0.3 + k as f64)).collect();
        let mut naive = vec![c(1.0, 0.0)];
        for a in &alphas {
            naive = poly_mul(&naive, &[*a, c(-1.0, 0.0)]);
        }
        let fast = root_product(&alphas);
        for (x, y) in poly_trim(&naive).iter().zip(fast.iter()) {
            assert!((x - y).norm() < 1e-12);
        }
        let q = deflate(&fast, alphas[3]);
        let back = poly_mul(&q, &[alphas[3], c(-1.0, 0.0)]);
        for (x, y) in back.iter().zip(fast.iter()) {
            assert!((x - y).norm() < 1e-12);
        }
    }
}
