use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use herglotz_core::annulus::{self, HardyBasisNumeric};
use herglotz_core::caratheodory::{approximate_schur, blaschke_to_atoms, caratheodory_recover_with};
use herglotz_core::functions::{disc_sample_points, operator_norm};
use herglotz_core::herglotz_disc::{eval_realization, eval_rep, recover_measure, toeplitz_psd_test};
use herglotz_core::kernels::{self, DomainKind, NuHatBackend, NuHatSource};
use herglotz_core::measures::{is_determining_polydisc, is_determining_sym_bidisc};
use herglotz_core::numerics::grid_angle;
use herglotz_core::operator_lift::{self, psd_atom_check};
use herglotz_core::polydisc_kp::{kp_eval, kp_recover, kp_recover_sym, kp_verify};
use herglotz_core::{
    Boundary, BoundaryMeasure, CaraConfig, Complex64, DomainSpec, FunctionSpec, HerglotzDiscRep, KpRep, MatrixValue,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::cli::{AnnulusCmd, CaraCmd, Command, DiscCmd, GlobalOpts, KernelCmd, KernelKind, KpCmd, LiftArgs};
use crate::input::{has_key, parse, usage, Inputs, Point};
use crate::report::RunReport;
use crate::selftest;

/// Mass of a recovered measure against its target.
const MASS_TOL: f64 = 1e-10;
/// Default PSD tolerance for matrix measures.
const PSD_TOL: f64 = 1e-10;

pub struct Ctx {
    pub global: GlobalOpts,
    pub inputs: Inputs,
    pub report: RunReport,
}

impl Ctx {
    /// The command's primary tolerance (`--tol` or `default`), recorded.
    fn tol(&mut self, name: &str, default: f64) -> f64 {
        let t = self.global.tol.unwrap_or(default);
        self.fixed_tol(name, t)
    }

    fn fixed_tol(&mut self, name: &str, t: f64) -> f64 {
        self.report.tolerances.insert(name.to_string(), t);
        t
    }

    fn grid(&self, default: usize) -> usize {
        self.global.grid.unwrap_or(default)
    }

    /// Pretty JSON to `out`, or to stdout.
    fn emit<T: Serialize>(&mut self, out: Option<&Path>, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        match out {
            Some(path) => {
                std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
                self.report.artifacts.push(path.display().to_string());
            }
            None => print!("{text}"),
        }
        Ok(())
    }

    fn note(&mut self, msg: String) {
        self.report.notes.push(msg);
    }

    fn function(&mut self, flag: &str, arg: &str) -> Result<FunctionSpec> {
        let f: FunctionSpec = self.inputs.json(flag, arg)?;
        f.validate()?;
        Ok(f)
    }

    /// Named domain (`disc`, `polydiscN`, `symbidisc`) or domain JSON; `--seed`
    /// replaces the seed of a Monte Carlo ν̂ backend.
    fn domain(&mut self, arg: &str) -> Result<DomainSpec> {
        let mut d = match arg {
            "disc" => DomainSpec::disc(),
            "symbidisc" | "sym_bidisc" => DomainSpec::sym_bidisc(),
            other => match other.strip_prefix("polydisc").map(str::parse::<usize>) {
                Some(Ok(n)) => DomainSpec::polydisc(n),
                _ => self.inputs.json("domain", arg)?,
            },
        };
        let backend = match &mut d.kind {
            DomainKind::Ball { backend, .. } => Some(backend),
            DomainKind::Reinhardt { source: NuHatSource::BallSurface { backend }, .. } => Some(backend),
            _ => None,
        };
        if let Some(NuHatBackend::MonteCarlo { seed, .. }) = backend {
            match self.global.seed {
                Some(s) => *seed = s,
                None => self.report.seed = *seed,
            }
        }
        d.validate()?;
        Ok(d)
    }
}

pub fn dispatch(cmd: &Command, ctx: &mut Ctx) -> Result<()> {
    match cmd {
        Command::Kernel { cmd } => kernel(cmd, ctx),
        Command::Herglotz { cmd } => disc(cmd, ctx),
        Command::Cara { cmd } => cara(cmd, ctx),
        Command::Kp { cmd } => kp(cmd, ctx),
        Command::Annulus { cmd } => annulus_cmd(cmd, ctx),
        Command::Lift(args) => lift(args, ctx),
        Command::Selftest { quick } => selftest::run(*quick, ctx),
    }
}

fn cx(c: Complex64) -> Value {
    json!([c.re, c.im])
}

fn point_json(z: &[Complex64]) -> Value {
    if z.len() == 1 {
        cx(z[0])
    } else {
        Value::Array(z.iter().map(|&c| cx(c)).collect())
    }
}

fn kernel(cmd: &KernelCmd, ctx: &mut Ctx) -> Result<()> {
    match cmd {
        KernelCmd::Eval { domain, z, w, kind } => {
            let d = ctx.domain(domain)?;
            let value = match kind {
                KernelKind::Szego => kernels::szego(&d, &z.0, &w.0)?,
                KernelKind::Poisson => Complex64::new(kernels::poisson_szego(&d, &z.0, &w.0)?, 0.0),
                KernelKind::Herglotz => kernels::herglotz_kernel(&d, &z.0, &w.0)?,
                KernelKind::Psi => Complex64::new(kernels::psi_defect(&d, &z.0, &w.0)?, 0.0),
            };
            ctx.emit(None, &cx(value))
        }
        KernelCmd::Admissibility { domain } => {
            let d = ctx.domain(domain)?;
            let tol = ctx.tol("admissibility", 1e-10);
            let rep = kernels::admissibility_check(&d, ctx.grid(64), tol)?;
            ctx.report.check_le("worst_deviation", rep.worst_deviation, tol);
            ctx.report.info("continuity_modulus", rep.continuity_modulus);
            ctx.emit(None, &rep)
        }
    }
}

/// Disc representation: `{measure, imaginary_part}` or a bare circle measure.
fn disc_rep(ctx: &mut Ctx, arg: &str) -> Result<HerglotzDiscRep> {
    let (source, text) = ctx.inputs.text("rep", arg)?;
    if has_key(&source, &text, "measure")? {
        parse(&source, &text)
    } else {
        let mu: BoundaryMeasure = parse(&source, &text)?;
        Ok(HerglotzDiscRep::new(mu, 0.0)?)
    }
}

fn scalar_point(p: &Point) -> Result<Complex64> {
    match p.0.as_slice() {
        [z] => Ok(*z),
        _ => Err(usage(format!("expected a point with one coordinate, got {}", p.0.len()))),
    }
}

/// Density vs angle(s) of a grid measure; one row per cell.
fn density_rows(mu: &BoundaryMeasure) -> Option<(Vec<&'static str>, Vec<Vec<f64>>)> {
    let d = mu.as_density()?;
    let g = d.grid;
    let rows = |dims: usize| -> Vec<Vec<f64>> {
        d.values
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                let mut row = vec![0.0; dims + 1];
                let mut idx = k;
                for j in (0..dims).rev() {
                    row[j] = grid_angle(idx % g, g);
                    idx /= g;
                }
                row[dims] = v;
                row
            })
            .collect()
    };
    Some(match mu.boundary() {
        Boundary::Circle => (vec!["angle", "density"], rows(1)),
        Boundary::Torus { d: 1 } => (vec!["angle", "density"], rows(1)),
        Boundary::Torus { d: 2 } | Boundary::SymTorus => (vec!["theta1", "theta2", "density"], rows(2)),
        Boundary::Torus { d: 3 } => (vec!["theta1", "theta2", "theta3", "density"], rows(3)),
        Boundary::Torus { .. } => return None,
        Boundary::Annulus { .. } => {
            let rows = d.values.iter().enumerate().map(|(k, &v)| vec![(k / g) as f64, grid_angle(k % g, g), v]).collect();
            (vec!["circle", "angle", "density"], rows)
        }
    })
}

fn add_density_series(ctx: &mut Ctx, mu: &BoundaryMeasure) {
    if let Some((cols, rows)) = density_rows(mu) {
        ctx.report.add_series("density", &cols, rows);
    }
}

fn disc(cmd: &DiscCmd, ctx: &mut Ctx) -> Result<()> {
    match cmd {
        DiscCmd::Eval { rep, z, realization } => {
            let rep = disc_rep(ctx, rep)?;
            let mut out = Vec::with_capacity(z.len());
            for p in z {
                let zz = scalar_point(p)?;
                let v = if *realization { eval_realization(&rep, zz)? } else { eval_rep(&rep, zz)? };
                out.push(json!({ "z": cx(zz), "value": cx(v) }));
            }
            ctx.emit(None, &out)
        }
        DiscCmd::Recover { f, r, out } => {
            let f = ctx.function("f", f)?;
            let tol = ctx.tol("mass", MASS_TOL);
            let rep = recover_measure(&f, ctx.grid(512), *r)?;
            let target = f.at(Complex64::new(0.0, 0.0))?.re;
            let mass = rep.measure.mass();
            ctx.report.info("mass", mass);
            ctx.report.check_le("mass_error", (mass - target).abs(), tol);
            add_density_series(ctx, &rep.measure);
            ctx.emit(out.as_deref(), &rep)
        }
        DiscCmd::Toeplitz { f, order } => {
            let f = ctx.function("f", f)?;
            let tol = ctx.tol("min_eigenvalue", PSD_TOL);
            let min = toeplitz_psd_test(&f, *order)?;
            if !ctx.report.check_ge("min_eigenvalue", min, tol) {
                ctx.note(format!("Toeplitz matrix of order {order} has eigenvalue {min:.6e}: f is not Herglotz"));
            }
            ctx.emit(None, &json!({ "order": order, "size": order + 1, "min_eigenvalue": min }))
        }
    }
}

fn cara(cmd: &CaraCmd, ctx: &mut Ctx) -> Result<()> {
    match cmd {
        CaraCmd::Approx { f, atoms, shrink, out } => {
            let phi = ctx.function("f", f)?;
            let tol = ctx.tol("boundary_deviation", 1e-8);
            let schur_tol = ctx.fixed_tol("schur_slack", 1e-10);
            let spec = approximate_schur(&phi, *atoms, *shrink)?;
            ctx.report.check_le("boundary_deviation", spec.boundary_deviation, tol);
            ctx.report.check_le("schur_excess", spec.schur_max_norm - 1.0, schur_tol);
            ctx.report.check_le("weight_deviation", spec.weight_deviation, schur_tol);
            ctx.report.info("sup_error", spec.sup_error);
            ctx.emit(out.as_deref(), &spec)
        }
        CaraCmd::BlaschkeAtoms { b, out } => {
            let b = ctx.function("B", b)?;
            let tol = ctx.tol("mass", 1e-12);
            let mu = blaschke_to_atoms(&b)?;
            ctx.report.check_le("mass_error", (mu.mass() - 1.0).abs(), tol);
            if let Some(atoms) = mu.as_atoms() {
                let rows = atoms.iter().map(|a| vec![a.point[0].arg().rem_euclid(std::f64::consts::TAU), a.weight]).collect();
                ctx.report.add_series("atoms", &["angle", "weight"], rows);
            }
            ctx.emit(out.as_deref(), &mu)
        }
        CaraCmd::Recover { f, degrees, out } => {
            let f = ctx.function("f", f)?;
            let config = CaraConfig { recovery_grid: ctx.grid(CaraConfig::default().recovery_grid), ..CaraConfig::default() };
            let conv = caratheodory_recover_with(&f, degrees, &config)?;
            for (n, e) in conv.degrees.iter().zip(&conv.errors) {
                ctx.report.info(&format!("error_n{n}"), *e);
            }
            if ctx.global.tol.is_some() {
                let tol = ctx.tol("final_error", 0.0);
                ctx.report.check_le("final_error", conv.errors.last().copied().unwrap_or(f64::NAN), tol);
            }
            let rows = conv.degrees.iter().zip(&conv.errors).map(|(&n, &e)| vec![n as f64, e]).collect();
            ctx.report.add_series("error_vs_n", &["n", "error"], rows);
            ctx.emit(out.as_deref(), &conv)
        }
    }
}

/// A `{domain, measure}` representation, or a bare measure whose boundary
/// fixes the domain.
fn kp_rep(ctx: &mut Ctx, arg: &str) -> Result<KpRep> {
    let (source, text) = ctx.inputs.text("rep", arg)?;
    if has_key(&source, &text, "measure")? {
        return parse(&source, &text);
    }
    let measure: BoundaryMeasure = parse(&source, &text)?;
    let domain = match measure.boundary() {
        Boundary::Circle => DomainSpec::disc(),
        Boundary::Torus { d } => DomainSpec::polydisc(d),
        Boundary::SymTorus => DomainSpec::sym_bidisc(),
        Boundary::Annulus { .. } => return Err(usage("annulus measures go through `annulus verify`")),
    };
    Ok(KpRep { domain, measure })
}

fn kp(cmd: &KpCmd, ctx: &mut Ctx) -> Result<()> {
    match cmd {
        KpCmd::Recover { domain, f, r, out } => {
            let d = ctx.domain(domain)?;
            let f = ctx.function("f", f)?;
            let tol = ctx.tol("mass", MASS_TOL);
            let grid = ctx.grid(256);
            let rep = match d.kind {
                DomainKind::SymBidisc => kp_recover_sym(&f, *r, grid)?,
                _ => kp_recover(&f, &d, *r, grid)?,
            };
            ctx.report.check_le("mass_error", (rep.measure.mass() - 1.0).abs(), tol);
            add_density_series(ctx, &rep.measure);
            ctx.emit(out.as_deref(), &rep)
        }
        KpCmd::Eval { rep, z } => {
            let rep = kp_rep(ctx, rep)?;
            let mut out = Vec::with_capacity(z.len());
            for p in z {
                out.push(json!({ "z": point_json(&p.0), "value": cx(kp_eval(&rep, &p.0)?) }));
            }
            ctx.emit(None, &out)
        }
        KpCmd::Verify { rep, f, degree } => {
            let rep = kp_rep(ctx, rep)?;
            let tol = ctx.tol("determining", 1e-6);
            let mass_tol = ctx.fixed_tol("mass", MASS_TOL);
            let value = match f {
                Some(f) => {
                    let f = ctx.function("f", f)?;
                    let v = kp_verify(&rep, &f, *degree, tol)?;
                    ctx.report.info("reconstruction_error", v.reconstruction_error);
                    serde_json::to_value(&v)?
                }
                None => {
                    let determining = if rep.measure.boundary() == Boundary::SymTorus {
                        is_determining_sym_bidisc(&rep.measure, *degree, *degree, tol)?
                    } else {
                        is_determining_polydisc(&rep.measure, *degree, tol)?
                    };
                    let mass = rep.measure.mass();
                    let mass_ok = (mass - 1.0).abs() <= mass_tol;
                    json!({ "pass": mass_ok && determining.pass, "mass": mass, "mass_ok": mass_ok, "determining": determining })
                }
            };
            let mass = value["mass"].as_f64().unwrap_or(f64::NAN);
            ctx.report.check_le("mass_error", (mass - 1.0).abs(), mass_tol);
            let det: herglotz_core::measures::MomentReport = serde_json::from_value(value["determining"].clone())?;
            if !ctx.report.check_le("determining", det.worst_abs(), tol) {
                ctx.note(format!(
                    "moment {:?} = {} exceeds {tol:e}: the measure is not determining",
                    det.worst_index, det.worst_value
                ));
            }
            ctx.emit(None, &value)
        }
    }
}

fn load_basis(ctx: &mut Ctx, path: &Path) -> Result<HardyBasisNumeric> {
    let bytes = ctx.inputs.bytes(path)?;
    HardyBasisNumeric::from_bytes(&bytes).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn annulus_cmd(cmd: &AnnulusCmd, ctx: &mut Ctx) -> Result<()> {
    match cmd {
        AnnulusCmd::Build { q, z0, n, out } => {
            let tol = ctx.tol("kernel_normalization", 1e-6);
            let orth_tol = ctx.fixed_tol("wperp_orthogonality", 1e-8);
            let basis = annulus::build_basis(*q, *z0, *n, ctx.grid(annulus::DEFAULT_GRID))?;
            let z0c = Complex64::new(*z0, 0.0);
            ctx.report.check_le("kernel_normalization", (basis.szego(z0c, z0c) - 1.0).norm(), tol);
            let pts = basis.boundary_points();
            let qs: Vec<Complex64> = basis.q_samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            let mut worst: f64 = 0.0;
            for k in -(*n as i32)..=(*n as i32) {
                let mono: Vec<Complex64> = pts.iter().map(|z| z.powi(k)).collect();
                let norm = basis.inner_product(&mono, &mono).re.sqrt();
                worst = worst.max(basis.inner_product(&qs, &mono).norm() / norm);
            }
            ctx.report.check_le("wperp_orthogonality", worst, orth_tol);
            let bytes = basis.to_bytes();
            std::fs::write(out, &bytes).with_context(|| format!("cannot write {}", out.display()))?;
            ctx.report.artifacts.push(out.display().to_string());
            ctx.emit(
                None,
                &json!({
                    "q": q, "z0": z0, "truncation": n, "grid": basis.grid(), "dimension": basis.len(),
                    "outer_mass": basis.harmonic.outer_mass(), "bytes": bytes.len(),
                }),
            )
        }
        AnnulusCmd::Recover { basis, f, out } => {
            let basis = load_basis(ctx, basis)?;
            let f = ctx.function("f", f)?;
            let tol = ctx.tol("test_residual", 1e-3);
            let mass_tol = ctx.fixed_tol("mass", MASS_TOL);
            let rec = annulus::annulus_recover(&f, &basis, tol)?;
            ctx.report.info("fit_residual", rec.fit_residual);
            ctx.report.check_le("test_residual", rec.test_residual, tol);
            ctx.report.check_le("mass_error", (rec.mass - 1.0).abs(), mass_tol);
            ctx.report.check_le("q_moment", rec.q_moment.abs(), annulus::EQUALITY_TOL);
            add_density_series(ctx, &rec.measure);
            ctx.emit(out.as_deref(), &rec.measure)
        }
        AnnulusCmd::Verify { basis, measure, f } => {
            let basis = load_basis(ctx, basis)?;
            let mu: BoundaryMeasure = ctx.inputs.json("measure", measure)?;
            let f = ctx.function("f", f)?;
            let tol = ctx.tol("residual", 1e-3);
            let test = annulus::default_test_points(basis.q(), basis.z0());
            let v = annulus::annulus_verify(&basis, &mu, &f, &test, tol)?;
            ctx.report.check_le("residual", v.residual, tol);
            ctx.report.check_le("mass_error", (v.mass - 1.0).abs(), MASS_TOL);
            ctx.report.check_flag("nonnegative", v.nonnegative);
            ctx.report.check_flag("determining", v.determining);
            ctx.report.info("q_moment", v.q_moment);
            ctx.report.info("min_real_part", v.min_real_part);
            ctx.emit(None, &v)
        }
    }
}

/// Sample points for the reconstruction check of a lift.
fn lift_test_points(d: usize) -> Vec<Vec<Complex64>> {
    let base = disc_sample_points(0.5, 5, 32);
    if d == 1 {
        return base.into_iter().map(|z| vec![z]).collect();
    }
    base.iter()
        .step_by(4)
        .flat_map(|&z| [vec![z; d], (0..d).map(|j| if j % 2 == 0 { z } else { -z.conj() }).collect()])
        .collect()
}

fn lift(args: &LiftArgs, ctx: &mut Ctx) -> Result<()> {
    let d = ctx.domain(&args.domain)?;
    let f = ctx.function("F", &args.f)?;
    let tol = ctx.tol("psd", PSD_TOL);
    let total_tol = ctx.fixed_tol("total", 1e-8);
    let rep = operator_lift::lift(&f, &d, args.r, ctx.grid(4096))?;
    let f0: MatrixValue = f.eval_matrix(&d.base())?;
    let re0 = (&f0 + f0.adjoint()).map(|x| x * 0.5);
    let psd = psd_atom_check(&rep.measure, Some(&re0), tol)?;
    if !ctx.report.check_ge("min_eigenvalue", psd.min_eigenvalue, tol) {
        ctx.note(format!("atom {} has eigenvalue {:.6e}", psd.worst_atom, psd.min_eigenvalue));
    }
    if let Some(dev) = psd.total_deviation {
        ctx.report.check_le("total_deviation", dev, total_tol);
    }
    if let Some(slack) = psd.min_prefix_slack {
        ctx.report.info("min_prefix_slack", slack);
    }
    let mut err: f64 = 0.0;
    for z in lift_test_points(d.dim()) {
        let diff = operator_lift::eval(&rep, &z)? - f.eval_matrix(&z)?;
        err = err.max(operator_norm(&diff));
    }
    ctx.report.info("reconstruction_error", err);
    ctx.emit(args.out.as_deref(), &rep)
}

pub fn write_report(report: &RunReport, path: &PathBuf) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}
