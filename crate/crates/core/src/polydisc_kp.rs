//! Korányi–Pukánszky representations `f(z) = ∫ (2S(z, ζ) − 1) dμ(ζ)` on the
//! polydisc and the symmetrized bidisc: evaluation, recovery by dilation and
//! verification of the recovered measure.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::FunctionSpec;
use crate::herglotz_disc::{quadrature_normalize, NEGATIVITY_TOL};
use crate::kernels::{check_interior, herglotz_integral, sym_root_radius, szego_sym, DomainKind, DomainSpec, NuHatSource};
use crate::measures::{
    is_determining_polydisc, is_determining_sym_bidisc, symmetrize, torus_grid_point, Boundary, BoundaryMeasure, MomentReport,
};

/// Largest torus dimension with a stored grid.
pub const MAX_TORUS_DIM: usize = 3;
/// Interior points for reproduction must keep this distance from `∂𝔾`.
pub const SYM_MARGIN: f64 = 0.05;
/// Accepted `|f(z0) − 1|`.
pub const NORMALIZATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpRep {
    pub domain: DomainSpec,
    pub measure: BoundaryMeasure,
}

/// Torus dimension for domains whose measure lives on a torus.
fn torus_dim(domain: &DomainSpec) -> Result<usize> {
    match &domain.kind {
        DomainKind::Disc => Ok(1),
        DomainKind::Polydisc { d } | DomainKind::Reinhardt { d, source: NuHatSource::PolydiscHaar } => Ok(*d),
        other => Err(Error::UnsupportedBoundary(format!("no torus measure for {other:?}"))),
    }
}

/// `∫ (2S(z, ζ) − 1) dμ(ζ)`.
pub fn kp_eval(rep: &KpRep, z: &[Complex64]) -> Result<Complex64> {
    check_interior(&rep.domain, z)?;
    let want = rep.domain.measure_boundary();
    if want != Some(rep.measure.boundary()) {
        return Err(Error::UnsupportedBoundary(format!(
            "measure on {:?} does not match domain {:?}",
            rep.measure.boundary(),
            rep.domain.kind
        )));
    }
    herglotz_integral(&rep.measure, z)
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r < 1.0 {
        Ok(())
    } else {
        Err(Error::validation(format!("recovery radius must lie in (0, 1), got {r}")))
    }
}

fn check_normalized(f: &FunctionSpec, d: usize) -> Result<Complex64> {
    let f0 = f.eval_scalar(&vec![Complex64::new(0.0, 0.0); d])?;
    if (f0 - 1.0).norm() > NORMALIZATION_TOL {
        return Err(Error::validation(format!("f must be normalized so that f(0) = 1, got {f0}")));
    }
    Ok(f0)
}

/// Samples `Re f(r ζ_k)·w_k` over the cells; the most negative value of
/// `Re f` below tolerance is reported with its point.
fn sample_cells<P, W>(f: &FunctionSpec, cells: usize, point: P, weight: W) -> Result<Vec<f64>>
where
    P: Fn(usize) -> Vec<Complex64> + Sync,
    W: Fn(usize) -> f64 + Sync,
{
    let raw: Vec<Result<f64>> = (0..cells).into_par_iter().map(|k| f.eval_scalar(&point(k)).map(|v| v.re)).collect();
    let mut vals = Vec::with_capacity(cells);
    let mut worst: Option<(usize, f64)> = None;
    for (k, v) in raw.into_iter().enumerate() {
        let v = v?;
        if !v.is_finite() || v < -NEGATIVITY_TOL {
            if worst.is_none_or(|(_, w)| v < w || v.is_nan()) {
                worst = Some((k, v));
            }
        }
        vals.push(v.max(0.0) * weight(k));
    }
    if let Some((k, v)) = worst {
        return Err(Error::NotHerglotz { witness: point(k), value: v });
    }
    Ok(vals)
}

/// Density `Re f(r ζ)` on the `grid^d` torus grid, normalized to mass 1.
pub fn kp_recover(f: &FunctionSpec, domain: &DomainSpec, r: f64, grid: usize) -> Result<KpRep> {
    check_radius(r)?;
    domain.validate()?;
    let d = torus_dim(domain)?;
    if d > MAX_TORUS_DIM {
        return Err(Error::validation(format!("torus grids are limited to d ≤ {MAX_TORUS_DIM}, got {d}")));
    }
    if grid == 0 {
        return Err(Error::validation("grid must be positive"));
    }
    let f0 = check_normalized(f, d)?;
    let cells = grid.pow(d as u32);
    let mut vals = sample_cells(
        f,
        cells,
        |k| torus_grid_point(k, grid, d).into_iter().map(|u| u * r).collect(),
        |_| 1.0,
    )?;
    quadrature_normalize(&mut vals, f0.re);
    let boundary = if d == 1 { Boundary::Circle } else { Boundary::Torus { d } };
    Ok(KpRep { domain: domain.clone(), measure: BoundaryMeasure::density(boundary, grid, vals)? })
}

/// `f_r(s, p) = f(r s, r² p)`.
pub fn sym_bidisc_dilate(f: &FunctionSpec, r: f64) -> Result<FunctionSpec> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::validation(format!("dilation radius must lie in (0, 1], got {r}")));
    }
    if r == 1.0 {
        return Ok(f.clone());
    }
    Ok(FunctionSpec::Dilate { scales: vec![r, r * r], f: Box::new(f.clone()) })
}

/// `⟨f, s_w⟩ = ∫ f(π ζ) S_𝔾(w, π ζ) ½|J(ζ)|² dm(ζ)` over the `grid²` torus.
pub fn sym_bidisc_reproduce(fpoly: &FunctionSpec, w: [Complex64; 2], grid: usize) -> Result<Complex64> {
    let radius = sym_root_radius(w[0], w[1]);
    if radius > 1.0 - SYM_MARGIN {
        return Err(Error::Domain(format!(
            "({}, {}) is within {SYM_MARGIN} of the boundary (root radius {radius})",
            w[0], w[1]
        )));
    }
    let base = BoundaryMeasure::haar(Boundary::SymTorus, grid)?;
    base.try_integrate(|sp| Ok(fpoly.eval_scalar(sp)? * szego_sym(w[0], w[1], sp[0], sp[1])))
}

/// Pullback density `Re f(π(r ζ))·½|z₁ − z₂|²` on the `grid²` torus,
/// normalized to mass 1.
pub fn kp_recover_sym(f: &FunctionSpec, r: f64, grid: usize) -> Result<KpRep> {
    check_radius(r)?;
    if grid == 0 {
        return Err(Error::validation("grid must be positive"));
    }
    let f0 = check_normalized(f, 2)?;
    let mut vals = sample_cells(
        f,
        grid * grid,
        |k| {
            let z = torus_grid_point(k, grid, 2);
            symmetrize(z[0] * r, z[1] * r).to_vec()
        },
        |k| {
            let z = torus_grid_point(k, grid, 2);
            0.5 * (z[0] - z[1]).norm_sqr()
        },
    )?;
    quadrature_normalize(&mut vals, f0.re);
    Ok(KpRep { domain: DomainSpec::sym_bidisc(), measure: BoundaryMeasure::density(Boundary::SymTorus, grid, vals)? })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpVerifyReport {
    pub pass: bool,
    pub mass: f64,
    pub mass_ok: bool,
    pub determining: MomentReport,
    /// Max `|kp_eval − f|` over the test points.
    pub reconstruction_error: f64,
    pub test_points: usize,
}

/// Coordinates `0, ±½, ±½i`, combined over `d` axes.
fn test_points(d: usize) -> Vec<Vec<Complex64>> {
    let axis = [
        Complex64::new(0.0, 0.0),
        Complex64::new(0.5, 0.0),
        Complex64::new(-0.5, 0.0),
        Complex64::new(0.0, 0.5),
        Complex64::new(0.0, -0.5),
    ];
    let mut pts = vec![Vec::new()];
    for _ in 0..d {
        pts = pts.into_iter().flat_map(|p: Vec<Complex64>| axis.iter().map(move |&a| [p.clone(), vec![a]].concat())).collect();
    }
    pts
}

/// Mass, the domain's determining test at `degree`, and the reconstruction
/// error against `f` on test points with `‖z‖∞ ≤ ½` (symmetrized through `π`
/// on `𝔾`).
pub fn kp_verify(rep: &KpRep, f: &FunctionSpec, degree: usize, tol: f64) -> Result<KpVerifyReport> {
    let mass = rep.measure.mass();
    let sym = rep.measure.boundary() == Boundary::SymTorus;
    let determining = if sym {
        is_determining_sym_bidisc(&rep.measure, degree, degree, tol)?
    } else {
        is_determining_polydisc(&rep.measure, degree, tol)?
    };
    let pts: Vec<Vec<Complex64>> = if sym {
        test_points(2).into_iter().map(|z| symmetrize(z[0], z[1]).to_vec()).collect()
    } else {
        test_points(rep.measure.boundary().coord_dim())
    };
    let mut err: f64 = 0.0;
    for z in &pts {
        err = err.max((kp_eval(rep, z)? - f.eval_scalar(z)?).norm());
    }
    let mass_ok = (mass - 1.0).abs() <= 1e-10;
    Ok(KpVerifyReport { pass: mass_ok && determining.pass, mass, mass_ok, determining, reconstruction_error: err, test_points: pts.len() })
}
