//! Closed-form examples with exact answers, run by `herglotz selftest`.

use anyhow::Result;
use herglotz_core::annulus::{self, harmonic_measure};
use herglotz_core::caratheodory::{blaschke_to_atoms, caratheodory_recover};
use herglotz_core::functions::{cayley_scalar, inverse_cayley_scalar, schur_check};
use herglotz_core::herglotz_disc::{eval_rep, recover_measure, toeplitz_psd_test};
use herglotz_core::kernels::{self, reinhardt_nu_hat, NuHatBackend, NuHatSource};
use herglotz_core::measures::{is_determining_polydisc, wstar_distance, MatrixAtom};
use herglotz_core::numerics::{fourier_coefficients, grid_point, min_eig_hermitian, nnls_with_equalities};
use herglotz_core::operator_lift::{self, psd_atom_check};
use herglotz_core::polydisc_kp::{kp_eval, kp_recover, sym_bidisc_reproduce};
use herglotz_core::{
    Boundary, BoundaryMeasure, Complex64, DomainSpec, Error, FunctionSpec, HermitianMatrix, HerglotzDiscRep, KpRep,
    MatrixBoundaryMeasure, MatrixValue,
};
use nalgebra::{DMatrix, DVector};
use serde_json::json;

use crate::commands::Ctx;

type Case = (&'static str, f64, fn() -> Result<f64>);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn one() -> Complex64 {
    c(1.0, 0.0)
}

/// Max deviation of a Fourier table from `expected(index)` over `|n| ≤ m`.
fn fourier_case(samples: Vec<Complex64>, m: usize, expected: fn(i64) -> f64) -> Result<f64> {
    let t = fourier_coefficients(&samples, m)?;
    Ok((-(m as i64)..=m as i64).map(|n| (t.get(&[n]).unwrap_or_default() - expected(n)).norm()).fold(0.0, f64::max))
}

fn constant_modes() -> Result<f64> {
    fourier_case(vec![one(); 8], 2, |n| if n == 0 { 1.0 } else { 0.0 })
}

fn pure_mode() -> Result<f64> {
    fourier_case((0..8).map(|k| grid_point(k, 8)).collect(), 1, |n| if n == 1 { 1.0 } else { 0.0 })
}

fn cosine_modes() -> Result<f64> {
    let s = (0..8).map(|k| grid_point(k, 8) + grid_point(k, 8).conj()).collect();
    fourier_case(s, 2, |n| if n.abs() == 1 { 1.0 } else { 0.0 })
}

fn identity_min_eig() -> Result<f64> {
    Ok((min_eig_hermitian(&HermitianMatrix::new(MatrixValue::identity(3, 3))?) - 1.0).abs())
}

fn nnls_feasible_optimum() -> Result<f64> {
    let a = DMatrix::identity(2, 2);
    let b = DVector::from_vec(vec![0.5, 0.5]);
    let sol = nnls_with_equalities(&a, &b, &DMatrix::from_row_slice(1, 2, &[1.0, 1.0]), &DVector::from_vec(vec![1.0]), 1e-12)?;
    Ok((sol.x - b).norm())
}

fn nnls_negative_mass() -> Result<f64> {
    let r = nnls_with_equalities(
        &DMatrix::identity(2, 2),
        &DVector::from_vec(vec![0.5, 0.5]),
        &DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
        &DVector::from_vec(vec![-1.0]),
        1e-12,
    );
    Ok(if matches!(r, Err(Error::Infeasible { .. })) { 0.0 } else { 1.0 })
}

fn blaschke_identity() -> Result<f64> {
    let b = FunctionSpec::blaschke(one(), vec![c(0.0, 0.0)]);
    Ok((b.at(c(0.5, 0.0))? - 0.5).norm())
}

fn taylor_arithmetic() -> Result<f64> {
    let f = FunctionSpec::taylor(vec![one(), c(3.0, 0.0)]);
    Ok((f.at(c(-0.5, 0.0))? + 0.5).norm())
}

fn cayley_values() -> Result<f64> {
    let e = [
        (cayley_scalar(c(0.0, 0.0))? - 1.0).norm(),
        (cayley_scalar(c(0.5, 0.0))? - 1.0 / 3.0).norm(),
        inverse_cayley_scalar(one())?.norm(),
        (inverse_cayley_scalar(c(1.0 / 3.0, 0.0))? - 0.5).norm(),
    ];
    Ok(e.into_iter().fold(0.0, f64::max))
}

fn blaschke_factor_is_inner() -> Result<f64> {
    let b = FunctionSpec::blaschke(one(), vec![c(0.0, 0.0)]);
    let interior: Vec<Complex64> = (0..16).map(|k| grid_point(k, 16) * 0.9).collect();
    let r = schur_check(&b, 256, &interior, 1e-12);
    Ok(if r.interior_max_norm < 1.0 { r.boundary_max_deviation } else { 1.0 })
}

fn haar_and_delta_moments() -> Result<f64> {
    let haar = BoundaryMeasure::haar(Boundary::Circle, 16)?.moments(3)?;
    let delta = BoundaryMeasure::circle_atoms(&[(0.0, 1.0)])?.moments(3)?;
    let h = haar.iter().map(|(n, v)| (v - if n[0] == 0 { 1.0 } else { 0.0 }).norm()).fold(0.0, f64::max);
    let d = delta.iter().map(|(_, v)| (v - 1.0).norm()).fold(0.0, f64::max);
    Ok(h.max(d))
}

fn haar_torus_is_determining() -> Result<f64> {
    let r = is_determining_polydisc(&BoundaryMeasure::haar(Boundary::Torus { d: 2 }, 16)?, 4, 1e-12)?;
    Ok(if r.pass { r.worst_abs() } else { 1.0 })
}

fn wstar_self_distance() -> Result<f64> {
    let mu = BoundaryMeasure::circle_atoms(&[(0.3, 0.4), (2.0, 0.6)])?;
    Ok(wstar_distance(&mu, &mu, 6)?)
}

fn kernels_at_base_point() -> Result<f64> {
    let p2 = DomainSpec::polydisc(2);
    let disc = DomainSpec::disc();
    let w = [c(0.3, 0.1), c(-0.2, 0.4)];
    let zeta = [grid_point(3, 17), grid_point(5, 11)];
    let zero = [c(0.0, 0.0); 2];
    let e = [
        (kernels::szego(&p2, &zero, &w)? - 1.0).norm(),
        (kernels::poisson_szego(&p2, &zero, &zeta)? - 1.0).abs(),
        (kernels::herglotz_kernel(&p2, &zero, &zeta)? - 1.0).norm(),
        kernels::psi_defect(&p2, &zero, &zeta)?.abs(),
        (kernels::herglotz_kernel(&disc, &[c(0.5, 0.0)], &[one()])? - 3.0).norm(),
    ];
    Ok(e.into_iter().fold(0.0, f64::max))
}

fn nu_hat_values() -> Result<f64> {
    let ball = NuHatSource::BallSurface { backend: NuHatBackend::Quadrature };
    Ok((reinhardt_nu_hat(&NuHatSource::PolydiscHaar, &[2, 3])? - 1.0).abs().max((reinhardt_nu_hat(&ball, &[1, 0])? - 0.5).abs()))
}

fn disc_rep_values() -> Result<f64> {
    let haar = HerglotzDiscRep::new(BoundaryMeasure::haar(Boundary::Circle, 64)?, 0.0)?;
    let delta = HerglotzDiscRep::new(BoundaryMeasure::circle_atoms(&[(std::f64::consts::FRAC_PI_2, 1.0)])?, 0.0)?;
    Ok((eval_rep(&haar, c(0.4, -0.3))? - 1.0).norm().max((eval_rep(&delta, c(0.0, 0.0))? - 1.0).norm()))
}

fn recover_constant() -> Result<f64> {
    let rep = recover_measure(&FunctionSpec::constant(one()), 64, 0.9)?;
    let d = rep.measure.as_density().map(|d| d.values.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max)).unwrap_or(1.0);
    Ok(d.max((rep.measure.mass() - 1.0).abs()))
}

fn toeplitz_constant() -> Result<f64> {
    Ok((toeplitz_psd_test(&FunctionSpec::constant(one()), 2)? - 1.0).abs())
}

fn kp_constant() -> Result<f64> {
    let d = DomainSpec::polydisc(2);
    let rep = kp_recover(&FunctionSpec::constant(one()), &d, 0.9, 16)?;
    let density = rep.measure.as_density().map(|d| d.values.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max)).unwrap_or(1.0);
    let haar = KpRep { domain: d, measure: BoundaryMeasure::haar(Boundary::Torus { d: 2 }, 64)? };
    Ok(density.max((kp_eval(&haar, &[c(0.3, 0.2), c(-0.1, 0.4)])? - 1.0).norm()))
}

fn sym_reproduce() -> Result<f64> {
    let t = c(0.3, 0.1);
    let p = t * (0.2 / t.norm());
    let s = FunctionSpec::taylor(vec![c(0.0, 0.0), one()]);
    let e1 = (sym_bidisc_reproduce(&FunctionSpec::constant(one()), [t, p], 64)? - 1.0).norm();
    let e2 = (sym_bidisc_reproduce(&s, [t, p], 64)? - t).norm();
    Ok(e1.max(e2))
}

fn harmonic_measure_moments() -> Result<f64> {
    let mu = harmonic_measure(0.3, 0.5, 256)?.to_measure()?;
    Ok((mu.mass() - 1.0).abs().max((mu.integrate(|p| p[0]) - 0.5).norm()))
}

fn lift_identity() -> Result<f64> {
    let id = FunctionSpec::Matrix {
        entries: vec![
            vec![FunctionSpec::constant(one()), FunctionSpec::constant(c(0.0, 0.0))],
            vec![FunctionSpec::constant(c(0.0, 0.0)), FunctionSpec::constant(one())],
        ],
    };
    let rep = operator_lift::lift(&id, &DomainSpec::disc(), 0.9, 64)?;
    let diff = operator_lift::eval(&rep, &[c(0.2, 0.5)])? - MatrixValue::identity(2, 2);
    Ok(diff.iter().map(|x| x.norm()).fold(0.0, f64::max))
}

fn psd_atoms() -> Result<f64> {
    let atom = |k: usize, m: MatrixValue| MatrixAtom { point: vec![grid_point(k, 4)], matrix: m };
    let good = MatrixBoundaryMeasure::new(Boundary::Circle, vec![atom(0, MatrixValue::identity(2, 2)), atom(1, MatrixValue::identity(2, 2))])?;
    let mut bad_m = MatrixValue::identity(2, 2);
    bad_m[(1, 1)] = c(-1e-3, 0.0);
    let bad = MatrixBoundaryMeasure::new_unchecked(Boundary::Circle, vec![atom(0, MatrixValue::identity(2, 2)), atom(2, bad_m)])?;
    let g = psd_atom_check(&good, None, 1e-10)?;
    let b = psd_atom_check(&bad, None, 1e-10)?;
    Ok(if g.pass && !b.pass && b.worst_atom == 1 { 0.0 } else { 1.0 })
}

fn annulus_basis() -> Result<f64> {
    let basis = annulus::build_basis(0.3, 0.5, 8, 128)?;
    let z0 = c(0.5, 0.0);
    let mono = |k: i32| -> Vec<Complex64> { basis.boundary_points().iter().map(|z| z.powi(k)).collect() };
    let qs: Vec<Complex64> = basis.q_samples.iter().map(|&v| c(v, 0.0)).collect();
    let orth = (-8..=8)
        .map(|k| {
            let m = mono(k);
            basis.inner_product(&qs, &m).norm() / basis.inner_product(&m, &m).re.sqrt()
        })
        .fold(0.0, f64::max);
    Ok(orth.max((basis.szego(z0, z0) - 1.0).norm()))
}

fn annulus_constant() -> Result<f64> {
    let basis = annulus::build_basis(0.3, 0.5, 8, 128)?;
    let rec = annulus::annulus_recover(&FunctionSpec::constant(one()), &basis, 1e-6)?;
    Ok(rec.test_residual)
}

fn cara_constant_equidistributes() -> Result<f64> {
    let conv = caratheodory_recover(&FunctionSpec::constant(one()), &[8])?;
    let mu = conv.last().ok_or_else(|| anyhow::anyhow!("no measure"))?;
    let m = mu.moments(3)?;
    Ok(m.iter().map(|(n, v)| (v - if n[0] == 0 { 1.0 } else { 0.0 }).norm()).fold(0.0, f64::max))
}

fn blaschke_z_atom() -> Result<f64> {
    let mu = blaschke_to_atoms(&FunctionSpec::blaschke(one(), vec![c(0.0, 0.0)]))?;
    let a = mu.as_atoms().ok_or_else(|| anyhow::anyhow!("not atomic"))?;
    Ok(if a.len() == 1 { (a[0].point[0] + 1.0).norm().max((a[0].weight - 1.0).abs()) } else { 1.0 })
}

const QUICK: &[Case] = &[
    ("fourier_constant", 1e-12, constant_modes),
    ("fourier_pure_mode", 1e-12, pure_mode),
    ("fourier_cosine", 1e-12, cosine_modes),
    ("min_eig_identity", 1e-12, identity_min_eig),
    ("nnls_feasible_optimum", 1e-10, nnls_feasible_optimum),
    ("nnls_negative_mass_infeasible", 0.0, nnls_negative_mass),
    ("blaschke_identity", 1e-15, blaschke_identity),
    ("taylor_arithmetic", 1e-15, taylor_arithmetic),
    ("cayley_values", 1e-15, cayley_values),
    ("blaschke_factor_inner", 1e-12, blaschke_factor_is_inner),
    ("blaschke_z_atom", 1e-12, blaschke_z_atom),
    ("haar_delta_moments", 1e-12, haar_and_delta_moments),
    ("haar_torus_determining", 1e-12, haar_torus_is_determining),
    ("wstar_self_distance", 0.0, wstar_self_distance),
    ("kernels_at_base_point", 1e-12, kernels_at_base_point),
    ("nu_hat_values", 1e-12, nu_hat_values),
    ("disc_rep_values", 1e-12, disc_rep_values),
    ("recover_constant", 1e-12, recover_constant),
    ("toeplitz_constant", 1e-12, toeplitz_constant),
    ("kp_constant", 1e-12, kp_constant),
    ("sym_bidisc_reproduce", 1e-10, sym_reproduce),
    ("harmonic_measure_moments", 1e-10, harmonic_measure_moments),
    ("lift_identity", 1e-12, lift_identity),
    ("psd_atoms", 0.0, psd_atoms),
];

const FULL: &[Case] = &[
    ("annulus_basis", 1e-6, annulus_basis),
    ("annulus_recover_constant", 1e-6, annulus_constant),
    ("cara_constant_equidistributes", 1e-8, cara_constant_equidistributes),
];

pub fn run(quick: bool, ctx: &mut Ctx) -> Result<()> {
    let cases: Vec<&Case> = if quick { QUICK.iter().collect() } else { QUICK.iter().chain(FULL).collect() };
    let mut rows = Vec::with_capacity(cases.len());
    for (name, tol, case) in cases {
        let value = match case() {
            Ok(v) => v,
            Err(e) => {
                ctx.report.notes.push(format!("{name}: {e:#}"));
                f64::NAN
            }
        };
        let pass = ctx.report.check_le(name, value, *tol);
        rows.push(json!({ "name": name, "value": value, "tol": tol, "pass": pass }));
    }
    println!("{}", serde_json::to_string_pretty(&rows)?);
    Ok(())
}
