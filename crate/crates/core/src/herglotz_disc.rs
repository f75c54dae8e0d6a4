//! Herglotz representation on the disc: evaluation from a measure, the
//! resolvent (realization) form, recovery by boundary dilation, and the
//! Toeplitz positivity test.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::{taylor_coefficients, FunctionSpec};
use crate::measures::{Atom, Boundary, BoundaryMeasure};
use crate::numerics::{grid_point, min_eig_hermitian, HermitianMatrix};

/// Values of `Re f` below this count as genuinely negative.
pub const NEGATIVITY_TOL: f64 = 1e-10;

/// The pair `(μ, Im f(0))` with `f(z) = i Im f(0) + ∫ (α+z)/(α−z) dμ(α)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HerglotzDiscRep {
    pub measure: BoundaryMeasure,
    pub imaginary_part: f64,
}

impl HerglotzDiscRep {
    pub fn new(measure: BoundaryMeasure, imaginary_part: f64) -> Result<Self> {
        if measure.boundary() != Boundary::Circle {
            return Err(Error::UnsupportedBoundary(format!("disc representation needs a circle measure, got {:?}", measure.boundary())));
        }
        Ok(HerglotzDiscRep { measure, imaginary_part })
    }

    /// As a `herglotz_from_measure` function spec.
    pub fn to_spec(&self) -> FunctionSpec {
        FunctionSpec::HerglotzFromMeasure { measure: Box::new(self.measure.clone()), imag: self.imaginary_part }
    }
}

fn check_disc(z: Complex64) -> Result<()> {
    if z.norm() < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("|z| = {} is not inside the unit disc", z.norm())))
    }
}

/// `i·Im f(0) + ∫ (α+z)/(α−z) dμ(α)`.
pub fn eval_rep(rep: &HerglotzDiscRep, z: Complex64) -> Result<Complex64> {
    check_disc(z)?;
    Ok(Complex64::new(0.0, rep.imaginary_part) + rep.measure.integrate(|a| (a[0] + z) / (a[0] - z)))
}

/// `i·Im f(0) + ⟨(U+z)(U−z)^{-1} 1, 1⟩ · Re f(0)` with `U = diag(α_j)` acting
/// on `L²(μ/‖μ‖)`.
pub fn eval_realization(rep: &HerglotzDiscRep, z: Complex64) -> Result<Complex64> {
    check_disc(z)?;
    let atoms = rep
        .measure
        .as_atoms()
        .ok_or_else(|| Error::validation("the realization formula needs an atomic measure"))?;
    let mass: f64 = atoms.iter().map(|a| a.weight).sum();
    let imag = Complex64::new(0.0, rep.imaginary_part);
    if mass == 0.0 {
        return Ok(imag);
    }
    let k = atoms.len();
    let u = DVector::from_iterator(k, atoms.iter().map(|a| a.point[0]));
    let zc = Complex64::new(z.re, z.im);
    let resolvent_arg = DMatrix::from_diagonal(&u.map(|a| a - zc));
    let ones = DVector::from_element(k, Complex64::new(1.0, 0.0));
    let x = resolvent_arg
        .lu()
        .solve(&ones)
        .ok_or_else(|| Error::Domain("U − z is singular".into()))?;
    let y = DMatrix::from_diagonal(&u.map(|a| a + zc)) * x;
    let inner: Complex64 = atoms.iter().zip(y.iter()).map(|(a, v)| v * (a.weight / mass)).sum();
    Ok(imag + inner * mass)
}

/// `Re f(r ζ_k)` on the `grid`-point circle, with negatives below
/// [`NEGATIVITY_TOL`] reported and tiny negatives clamped to zero.
pub(crate) fn dilation_samples<F>(f: F, grid: usize, r: f64) -> Result<Vec<f64>>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    let raw: Vec<Result<f64>> = (0..grid).into_par_iter().map(|k| f(grid_point(k, grid) * r).map(|v| v.re)).collect();
    let mut vals = Vec::with_capacity(grid);
    for (k, v) in raw.into_iter().enumerate() {
        let v = v?;
        if !v.is_finite() || v < -NEGATIVITY_TOL {
            return Err(Error::NotHerglotz { witness: vec![grid_point(k, grid) * r], value: v });
        }
        vals.push(v.max(0.0));
    }
    Ok(vals)
}

/// Rescales samples so that the discrete mass equals `target`.
pub(crate) fn quadrature_normalize(values: &mut [f64], target: f64) {
    let mass = values.iter().sum::<f64>() / values.len() as f64;
    if mass > 0.0 {
        let factor = target / mass;
        for v in values.iter_mut() {
            *v *= factor;
        }
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r < 1.0 {
        Ok(())
    } else {
        Err(Error::validation(format!("recovery radius must lie in (0, 1), got {r}")))
    }
}

/// Density `Re f(r ζ)` on a `grid`-point circle, rescaled so its mass is
/// exactly `Re f(0)`; `Im f(0)` is taken from `f` at 0.
pub fn recover_measure(f: &FunctionSpec, grid: usize, r: f64) -> Result<HerglotzDiscRep> {
    check_radius(r)?;
    if grid == 0 {
        return Err(Error::validation("grid must be positive"));
    }
    let f0 = f.at(Complex64::new(0.0, 0.0))?;
    if f0.re < -NEGATIVITY_TOL {
        return Err(Error::NotHerglotz { witness: vec![Complex64::new(0.0, 0.0)], value: f0.re });
    }
    let mut values = dilation_samples(|z| f.at(z), grid, r)?;
    quadrature_normalize(&mut values, f0.re.max(0.0));
    HerglotzDiscRep::new(BoundaryMeasure::density(Boundary::Circle, grid, values)?, f0.im)
}

/// Smallest eigenvalue of the Toeplitz matrix `T_{jk} = m_{j−k}` with
/// `m_0 = Re a_0`, `m_n = a_n/2`, `m_{−n} = conj(a_n)/2`.
pub fn toeplitz_psd_test(f: &FunctionSpec, order: usize) -> Result<f64> {
    let a = taylor_coefficients(f, order)?;
    Ok(min_eig_hermitian(&toeplitz_matrix(&a)?))
}

pub fn toeplitz_matrix(a: &[Complex64]) -> Result<HermitianMatrix> {
    let n = a.len();
    let m = |d: i64| -> Complex64 {
        if d == 0 {
            Complex64::new(a[0].re, 0.0)
        } else if d > 0 {
            a[d as usize] * 0.5
        } else {
            a[(-d) as usize].conj() * 0.5
        }
    };
    HermitianMatrix::new(DMatrix::from_fn(n, n, |j, k| m(j as i64 - k as i64)))
}

/// Converts a circle density into atoms by greedy peak clustering: the
/// heaviest remaining cell seeds a window of half-width `window`; windows
/// holding at least `threshold` of the total mass become atoms placed at the
/// window's circular mean.
pub fn cluster_peaks(mu: &BoundaryMeasure, window: f64, threshold: f64) -> Result<BoundaryMeasure> {
    let d = mu
        .as_density()
        .filter(|_| mu.boundary() == Boundary::Circle)
        .ok_or_else(|| Error::validation("peak clustering needs a circle density"))?;
    let g = d.grid;
    let total = mu.mass();
    let half = ((window / std::f64::consts::TAU) * g as f64).round() as i64;
    let mut taken = vec![false; g];
    let mut order: Vec<usize> = (0..g).collect();
    order.sort_by(|&a, &b| d.values[b].total_cmp(&d.values[a]).then(a.cmp(&b)));
    let mut atoms = Vec::new();
    for &k in &order {
        if taken[k] || d.values[k] == 0.0 {
            continue;
        }
        let mut mass = 0.0;
        let mut centroid = Complex64::new(0.0, 0.0);
        let mut cells = Vec::new();
        for off in -half..=half {
            let j = (k as i64 + off).rem_euclid(g as i64) as usize;
            if !taken[j] {
                mass += d.values[j] / g as f64;
                centroid += grid_point(j, g) * (d.values[j] / g as f64);
                cells.push(j);
            }
        }
        if mass < threshold * total {
            break;
        }
        for j in cells {
            taken[j] = true;
        }
        let point = if centroid.norm() > 1e-12 * mass { centroid / centroid.norm() } else { grid_point(k, g) };
        atoms.push(Atom { point: vec![point], weight: mass });
    }
    BoundaryMeasure::atoms(Boundary::Circle, atoms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rep(atoms: &[(f64, f64)], imag: f64) -> HerglotzDiscRep {
        HerglotzDiscRep::new(BoundaryMeasure::circle_atoms(atoms).unwrap(), imag).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_abs_diff_eq!(eval_rep(&rep(&[(0.0, 1.0)], 0.0), c(0.5, 0.0)).unwrap().re, 3.0, epsilon = 1e-14);
        let haar = HerglotzDiscRep::new(BoundaryMeasure::haar(Boundary::Circle, 64).unwrap(), 0.0).unwrap();
        let v = eval_rep(&haar, c(0.3, -0.4)).unwrap();
        assert!((v - c(1.0, 0.0)).norm() < 1e-14);
        let two = rep(&[(0.0, 0.5), (PI, 0.5)], 0.0);
        assert_abs_diff_eq!(eval_rep(&two, c(0.5, 0.0)).unwrap().re, 5.0 / 3.0, epsilon = 1e-14);
        assert!(eval_rep(&two, c(1.0, 0.0)).is_err());
    }

    #[test]
    fn realization_examples() {
        assert_abs_diff_eq!(eval_realization(&rep(&[(0.0, 1.0)], 0.0), c(0.5, 0.0)).unwrap().re, 3.0, epsilon = 1e-14);
        let two = rep(&[(0.0, 0.5), (PI, 0.5)], 0.0);
        assert_abs_diff_eq!(eval_realization(&two, c(0.5, 0.0)).unwrap().re, 5.0 / 3.0, epsilon = 1e-14);
        let i_atom = rep(&[(PI / 2.0, 1.0)], 0.0);
        assert!((eval_realization(&i_atom, c(0.0, 0.0)).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn recovery_of_constant_is_uniform() {
        let f = FunctionSpec::constant(c(1.0, 0.0));
        let r = recover_measure(&f, 128, 0.9).unwrap();
        assert!(r.measure.as_density().unwrap().values.iter().all(|&v| (v - 1.0).abs() < 1e-15));
        assert_abs_diff_eq!(r.measure.mass(), 1.0, epsilon = 1e-14);
        assert_eq!(r.imaginary_part, 0.0);
    }

    #[test]
    fn recovery_of_poisson_kernel() {
        let f = FunctionSpec::herglotz_unit(0);
        let r = recover_measure(&f, 512, 0.99).unwrap();
        assert_abs_diff_eq!(r.measure.mass(), 1.0, epsilon = 1e-12);
        let d = r.measure.as_density().unwrap();
        let peak = d.values.iter().cloned().fold(0.0, f64::max);
        assert_eq!(d.values[0], peak);
        assert!(r.measure.window_mass(0.0, 0.1).unwrap() > 0.9);
    }

    #[test]
    fn recovery_reads_imaginary_part_exactly() {
        let f = FunctionSpec::Sum { terms: vec![FunctionSpec::herglotz_unit(0), FunctionSpec::constant(c(0.0, 0.7))] };
        assert_eq!(recover_measure(&f, 64, 0.9).unwrap().imaginary_part, 0.7);
    }

    #[test]
    fn recovery_rejects_negative_real_part() {
        let f = FunctionSpec::taylor(vec![c(1.0, 0.0), c(3.0, 0.0)]);
        assert!(matches!(recover_measure(&f, 64, 0.9), Err(Error::NotHerglotz { .. })));
    }

    #[test]
    fn moment_consistency_at_moderate_radius() {
        // a_n r^n / 2 matches the discrete coefficients once r^N is negligible.
        let f = FunctionSpec::rational_real(&[1.0, 0.0, 1.0], &[1.0, 0.0, -1.0]);
        let r = 0.9;
        let rep = recover_measure(&f, 512, r).unwrap();
        let a = taylor_coefficients(&f, 16).unwrap();
        let m = rep.measure.moments(16).unwrap();
        for n in 1..=16i64 {
            // Fourier coefficient at n is the moment at −n.
            let coef = m.get(&[-n]).unwrap();
            assert!((coef - a[n as usize] * r.powi(n as i32) / 2.0).norm() < 1e-10);
        }
    }

    #[test]
    fn toeplitz_examples() {
        assert_abs_diff_eq!(toeplitz_psd_test(&FunctionSpec::constant(c(1.0, 0.0)), 4).unwrap(), 1.0, epsilon = 1e-12);
        assert!(toeplitz_psd_test(&FunctionSpec::herglotz_unit(0), 6).unwrap().abs() < 1e-12);
        let bad = FunctionSpec::taylor(vec![c(1.0, 0.0), c(3.0, 0.0)]);
        assert_abs_diff_eq!(toeplitz_psd_test(&bad, 1).unwrap(), -0.5, epsilon = 1e-12);
    }

    #[test]
    fn peak_clustering_finds_two_atoms() {
        let f = FunctionSpec::rational_real(&[1.0, 0.0, 1.0], &[1.0, 0.0, -1.0]);
        let rep = recover_measure(&f, 4096, 0.999).unwrap();
        let atoms = cluster_peaks(&rep.measure, 0.1, 0.01).unwrap();
        let a = atoms.as_atoms().unwrap();
        assert_eq!(a.len(), 2);
        for atom in a {
            assert!((atom.weight - 0.5).abs() < 1e-2);
            assert!(atom.point[0].im.abs() < 1e-9);
        }
    }

    fn arb_atoms() -> impl Strategy<Value = Vec<(f64, f64)>> {
        proptest::collection::vec((0.0f64..std::f64::consts::TAU, 0.01f64..1.0), 1..8)
    }

    proptest! {
        #[test]
        fn realization_equals_integral(atoms in arb_atoms(), imag in -2.0f64..2.0,
                                       zr in 0.0f64..0.9, zt in 0.0f64..6.3) {
            let rp = rep(&atoms, imag);
            let z = Complex64::from_polar(zr, zt);
            let a = eval_rep(&rp, z).unwrap();
            let b = eval_realization(&rp, z).unwrap();
            prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
        }

        #[test]
        fn real_part_is_nonnegative(atoms in arb_atoms(), zr in 0.0f64..0.99, zt in 0.0f64..6.3) {
            let z = Complex64::from_polar(zr, zt);
            prop_assert!(eval_rep(&rep(&atoms, 0.0), z).unwrap().re >= -1e-10);
        }

        #[test]
        fn toeplitz_of_herglotz_is_psd(atoms in arb_atoms(), order in 1usize..12) {
            let f = rep(&atoms, 0.3).to_spec();
            let a: Vec<Complex64> = (0..=order).map(|n| {
                if n == 0 {
                    c(atoms.iter().map(|x| x.1).sum(), 0.3)
                } else {
                    atoms.iter().map(|&(t, w)| Complex64::from_polar(2.0 * w, -(n as f64) * t)).sum()
                }
            }).collect();
            prop_assert!(min_eig_hermitian(&toeplitz_matrix(&a).unwrap()) >= -1e-10);
            // The sampled Taylor path agrees on small orders.
            if order <= 4 {
                prop_assert!(toeplitz_psd_test(&f, order).unwrap() >= -1e-8);
            }
        }
    }

    #[test]
    fn window_masses_converge_at_fine_resolution() {
        // Atoms separated by ≥ 0.2 rad; window masses at r = 0.999, N = 4096.
        let atoms = [(0.3, 0.2), (1.5, 0.5), (4.0, 0.3)];
        let f = rep(&atoms, 0.0).to_spec();
        let rec = recover_measure(&f, 4096, 0.999).unwrap();
        for &(t, w) in &atoms {
            assert!((rec.measure.window_mass(t, 0.1).unwrap() - w).abs() < 1e-2);
        }
    }
}
