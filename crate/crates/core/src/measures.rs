//! Nonnegative boundary measures, their moments, and the determining-measure
//! tests on the torus and the symmetrized torus.
//!
//! Densities are stored against the normalized Haar measure of the boundary:
//! a grid cell carries mass `value / grid^d`. On the symmetrized torus the
//! density lives on the 𝕋² pullback grid and already includes the `½|J|²`
//! factor. On the annulus the `2·grid` values list the outer circle first,
//! then the inner circle, each against normalized arclength of its circle.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{self, box_indices, grid_point, FourierTable, PSD_TOL};
use crate::serde_complex as cx;

const ON_BOUNDARY_TOL: f64 = 1e-12;
const PAR_THRESHOLD: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "boundary", rename_all = "snake_case")]
pub enum Boundary {
    Circle,
    Torus { d: usize },
    SymTorus,
    Annulus { q: f64 },
}

impl Boundary {
    /// Number of complex coordinates of a boundary point.
    pub fn coord_dim(&self) -> usize {
        match self {
            Boundary::Circle | Boundary::Annulus { .. } => 1,
            Boundary::Torus { d } => *d,
            Boundary::SymTorus => 2,
        }
    }

    /// Number of density values for a grid with `grid` points per axis.
    pub fn grid_len(&self, grid: usize) -> usize {
        match self {
            Boundary::Circle => grid,
            Boundary::Torus { d } => grid.pow(*d as u32),
            Boundary::SymTorus => grid * grid,
            Boundary::Annulus { .. } => 2 * grid,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Boundary::Torus { d } if d == 0 => Err(Error::validation("torus dimension must be positive")),
            Boundary::Annulus { q } if !(q > 0.0 && q < 1.0) => {
                Err(Error::validation(format!("annulus needs 0 < q < 1, got {q}")))
            }
            _ => Ok(()),
        }
    }

    /// Checks that a point lies on the boundary to `1e-12`.
    pub fn contains(&self, point: &[Complex64]) -> bool {
        if point.len() != self.coord_dim() {
            return false;
        }
        match *self {
            Boundary::Circle | Boundary::Torus { .. } => {
                point.iter().all(|z| (z.norm() - 1.0).abs() <= ON_BOUNDARY_TOL)
            }
            Boundary::SymTorus => on_sym_torus(point[0], point[1]),
            Boundary::Annulus { q } => {
                let r = point[0].norm();
                (r - 1.0).abs() <= ON_BOUNDARY_TOL || (r - q).abs() <= ON_BOUNDARY_TOL
            }
        }
    }
}

/// `(s, p)` lies on the distinguished boundary of the symmetrized bidisc:
/// `|p| = 1`, `s = conj(s)·p`, `|s| ≤ 2`.
pub fn on_sym_torus(s: Complex64, p: Complex64) -> bool {
    (p.norm() - 1.0).abs() <= ON_BOUNDARY_TOL
        && (s - s.conj() * p).norm() <= 10.0 * ON_BOUNDARY_TOL
        && s.norm() <= 2.0 + ON_BOUNDARY_TOL
}

/// The symmetrization map `π(z₁, z₂) = (z₁ + z₂, z₁ z₂)`.
#[inline]
pub fn symmetrize(z1: Complex64, z2: Complex64) -> [Complex64; 2] {
    [z1 + z2, z1 * z2]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    #[serde(with = "cx::point")]
    pub point: Vec<Complex64>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Density {
    pub grid: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    Atoms(Vec<Atom>),
    Density(Density),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure", into = "RawMeasure")]
pub struct BoundaryMeasure {
    boundary: Boundary,
    repr: Representation,
}

#[derive(Serialize, Deserialize)]
struct RawMeasure {
    #[serde(flatten)]
    boundary: Boundary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    atoms: Option<Vec<Atom>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    density: Option<Density>,
}

impl TryFrom<RawMeasure> for BoundaryMeasure {
    type Error = Error;

    fn try_from(raw: RawMeasure) -> Result<Self> {
        match (raw.atoms, raw.density) {
            (Some(atoms), None) => BoundaryMeasure::atoms(raw.boundary, atoms),
            (None, Some(d)) => BoundaryMeasure::density(raw.boundary, d.grid, d.values),
            _ => Err(Error::validation("measure needs exactly one of \"atoms\" or \"density\"")),
        }
    }
}

impl From<BoundaryMeasure> for RawMeasure {
    fn from(m: BoundaryMeasure) -> Self {
        let (atoms, density) = match m.repr {
            Representation::Atoms(a) => (Some(a), None),
            Representation::Density(d) => (None, Some(d)),
        };
        RawMeasure { boundary: m.boundary, atoms, density }
    }
}

impl BoundaryMeasure {
    pub fn atoms(boundary: Boundary, atoms: Vec<Atom>) -> Result<Self> {
        let m = BoundaryMeasure { boundary, repr: Representation::Atoms(atoms) };
        m.validate()?;
        Ok(m)
    }

    pub fn density(boundary: Boundary, grid: usize, values: Vec<f64>) -> Result<Self> {
        let m = BoundaryMeasure { boundary, repr: Representation::Density(Density { grid, values }) };
        m.validate()?;
        Ok(m)
    }

    /// Atomic measure on the circle from `(angle, weight)` pairs.
    pub fn circle_atoms(atoms: &[(f64, f64)]) -> Result<Self> {
        Self::atoms(
            Boundary::Circle,
            atoms.iter().map(|&(t, w)| Atom { point: vec![Complex64::from_polar(1.0, t)], weight: w }).collect(),
        )
    }

    /// Normalized Haar measure as a constant density.
    pub fn haar(boundary: Boundary, grid: usize) -> Result<Self> {
        if let Boundary::SymTorus = boundary {
            return Self::density(boundary, grid, sym_torus_base_density(grid));
        }
        Self::density(boundary, grid, vec![1.0; boundary.grid_len(grid)])
    }

    /// A measure with no mass.
    pub fn zero(boundary: Boundary) -> Self {
        BoundaryMeasure { boundary, repr: Representation::Atoms(Vec::new()) }
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn as_density(&self) -> Option<&Density> {
        match &self.repr {
            Representation::Density(d) => Some(d),
            _ => None,
        }
    }

    pub fn as_atoms(&self) -> Option<&[Atom]> {
        match &self.repr {
            Representation::Atoms(a) => Some(a),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.boundary.validate()?;
        match &self.repr {
            Representation::Atoms(atoms) => {
                for (k, a) in atoms.iter().enumerate() {
                    if !(a.weight.is_finite() && a.weight >= 0.0) {
                        return Err(Error::validation(format!("atom {k} has weight {}", a.weight)));
                    }
                    if !self.boundary.contains(&a.point) {
                        return Err(Error::validation(format!(
                            "atom {k} at {:?} is not on the {:?} boundary",
                            a.point, self.boundary
                        )));
                    }
                }
            }
            Representation::Density(d) => {
                if d.grid == 0 {
                    return Err(Error::validation("density grid must be positive"));
                }
                let want = self.boundary.grid_len(d.grid);
                if d.values.len() != want {
                    return Err(Error::validation(format!(
                        "density on a grid of {} needs {want} values, got {}",
                        d.grid,
                        d.values.len()
                    )));
                }
                if let Some(k) = d.values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(Error::validation(format!("density value {k} is {}", d.values[k])));
                }
            }
        }
        Ok(())
    }

    /// Quadrature weight of one density cell.
    fn cell_weight(&self, grid: usize) -> f64 {
        match self.boundary {
            Boundary::Annulus { .. } => 1.0 / grid as f64,
            b => 1.0 / b.grid_len(grid) as f64,
        }
    }

    /// Native coordinates of density cell `k`.
    fn cell_point(&self, grid: usize, k: usize) -> Vec<Complex64> {
        match self.boundary {
            Boundary::Circle => vec![grid_point(k, grid)],
            Boundary::Torus { d } => torus_grid_point(k, grid, d),
            Boundary::SymTorus => {
                let z = torus_grid_point(k, grid, 2);
                symmetrize(z[0], z[1]).to_vec()
            }
            Boundary::Annulus { q } => {
                if k < grid {
                    vec![grid_point(k, grid)]
                } else {
                    vec![grid_point(k - grid, grid) * q]
                }
            }
        }
    }

    /// Support points and masses, in storage order.
    pub fn points_and_masses(&self) -> Vec<(Vec<Complex64>, f64)> {
        match &self.repr {
            Representation::Atoms(atoms) => atoms.iter().map(|a| (a.point.clone(), a.weight)).collect(),
            Representation::Density(d) => {
                let w = self.cell_weight(d.grid);
                d.values.iter().enumerate().map(|(k, &v)| (self.cell_point(d.grid, k), v * w)).collect()
            }
        }
    }

    /// `∫ g dμ` with `g` evaluated in native boundary coordinates (for the
    /// symmetrized torus: at `π(ζ)`). Summation order is fixed, so parallel
    /// evaluation does not change the result.
    pub fn integrate<F>(&self, g: F) -> Complex64
    where
        F: Fn(&[Complex64]) -> Complex64 + Sync,
    {
        match &self.repr {
            Representation::Atoms(atoms) => atoms.iter().map(|a| g(&a.point) * a.weight).sum(),
            Representation::Density(d) => {
                let w = self.cell_weight(d.grid);
                let term = |k: usize| {
                    let v = d.values[k];
                    if v == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        g(&self.cell_point(d.grid, k)) * v
                    }
                };
                let terms: Vec<Complex64> = if d.values.len() >= PAR_THRESHOLD {
                    (0..d.values.len()).into_par_iter().map(term).collect()
                } else {
                    (0..d.values.len()).map(term).collect()
                };
                terms.iter().sum::<Complex64>() * w
            }
        }
    }

    /// Fallible variant of [`integrate`](Self::integrate).
    pub fn try_integrate<F>(&self, g: F) -> Result<Complex64>
    where
        F: Fn(&[Complex64]) -> Result<Complex64> + Sync,
    {
        let pts = self.points_and_masses();
        let vals: Vec<Result<Complex64>> = if pts.len() >= PAR_THRESHOLD {
            pts.par_iter().map(|(p, m)| if *m == 0.0 { Ok(Complex64::new(0.0, 0.0)) } else { g(p).map(|v| v * *m) }).collect()
        } else {
            pts.iter().map(|(p, m)| if *m == 0.0 { Ok(Complex64::new(0.0, 0.0)) } else { g(p).map(|v| v * *m) }).collect()
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for v in vals {
            acc += v?;
        }
        Ok(acc)
    }

    pub fn mass(&self) -> f64 {
        match &self.repr {
            Representation::Atoms(atoms) => atoms.iter().map(|a| a.weight).sum(),
            Representation::Density(d) => d.values.iter().sum::<f64>() * self.cell_weight(d.grid),
        }
    }

    /// Same measure with every weight multiplied by `factor ≥ 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let repr = match &self.repr {
            Representation::Atoms(atoms) => Representation::Atoms(
                atoms.iter().map(|a| Atom { point: a.point.clone(), weight: a.weight * factor }).collect(),
            ),
            Representation::Density(d) => Representation::Density(Density {
                grid: d.grid,
                values: d.values.iter().map(|v| v * factor).collect(),
            }),
        };
        let m = BoundaryMeasure { boundary: self.boundary, repr };
        m.validate()?;
        Ok(m)
    }

    /// Density converted to atoms at the grid points (zero cells dropped).
    pub fn to_atoms(&self) -> BoundaryMeasure {
        let atoms = self
            .points_and_masses()
            .into_iter()
            .filter(|(_, m)| *m > 0.0)
            .map(|(point, weight)| Atom { point, weight })
            .collect();
        BoundaryMeasure { boundary: self.boundary, repr: Representation::Atoms(atoms) }
    }

    /// Mass within angular distance `half_width` of `angle` (circle only).
    pub fn window_mass(&self, angle: f64, half_width: f64) -> Result<f64> {
        if self.boundary != Boundary::Circle {
            return Err(Error::UnsupportedBoundary("window masses are defined on the circle".into()));
        }
        Ok(self
            .points_and_masses()
            .into_iter()
            .filter(|(p, _)| angle_distance(p[0].arg(), angle) <= half_width + 1e-12)
            .map(|(_, m)| m)
            .sum())
    }

    /// Moments `∫ u^n dμ` over the box `|n_j| ≤ max_index` (circle and torus).
    pub fn moments(&self, max_index: usize) -> Result<MomentTable> {
        let d = match self.boundary {
            Boundary::Circle => 1,
            Boundary::Torus { d } => d,
            other => {
                return Err(Error::UnsupportedBoundary(format!("moments need a circle or torus, got {other:?}")))
            }
        };
        let mut table = FourierTable::zeros(d, max_index);
        match &self.repr {
            Representation::Atoms(atoms) => {
                let idx: Vec<Vec<i64>> = table.indices().collect();
                for n in idx {
                    let v: Complex64 = atoms.iter().map(|a| monomial(&a.point, &n) * a.weight).sum();
                    table.set(&n, v);
                }
            }
            Representation::Density(den) => {
                let samples: Vec<Complex64> = den.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                let coeffs = numerics::fourier_coefficients_nd(&samples, den.grid, d, max_index)?;
                // ∫ u^n dμ is the coefficient at −n; for real data that is conj(c_n).
                for (n, c) in coeffs.iter() {
                    table.set(&n, c.conj());
                }
            }
        }
        // Real measures: make ∫u^{-n} = conj(∫u^n) hold bit for bit.
        let idx: Vec<Vec<i64>> = table.indices().collect();
        for n in idx {
            match n.iter().find(|&&x| x != 0) {
                None => {
                    let m0 = table.get(&n).unwrap();
                    table.set(&n, Complex64::new(m0.re, 0.0));
                }
                Some(&x) if x < 0 => {
                    let neg: Vec<i64> = n.iter().map(|x| -x).collect();
                    let v = table.get(&neg).unwrap().conj();
                    table.set(&n, v);
                }
                _ => {}
            }
        }
        Ok(MomentTable { table })
    }
}

fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}

/// Point `k` of a row-major `grid^d` torus grid.
pub fn torus_grid_point(mut k: usize, grid: usize, d: usize) -> Vec<Complex64> {
    let mut z = vec![Complex64::new(0.0, 0.0); d];
    for j in (0..d).rev() {
        z[j] = grid_point(k % grid, grid);
        k /= grid;
    }
    z
}

/// `u^n = ∏ u_j^{n_j}` for integer exponents on the torus.
pub fn monomial(u: &[Complex64], n: &[i64]) -> Complex64 {
    u.iter().zip(n).fold(Complex64::new(1.0, 0.0), |acc, (&z, &e)| acc * z.powi(e as i32))
}

/// `½|z₁ − z₂|²` on the 𝕋² grid: the pullback of the symmetrized-bidisc
/// boundary measure, with total mass 1.
pub fn sym_torus_base_density(grid: usize) -> Vec<f64> {
    (0..grid * grid)
        .map(|k| {
            let z = torus_grid_point(k, grid, 2);
            0.5 * (z[0] - z[1]).norm_sqr()
        })
        .collect()
}

/// Moments `∫ u^n dμ` over a multi-index box.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentTable {
    table: FourierTable,
}

impl MomentTable {
    pub fn dims(&self) -> usize {
        self.table.dims()
    }

    pub fn max_index(&self) -> usize {
        self.table.max_index()
    }

    pub fn get(&self, n: &[i64]) -> Option<Complex64> {
        self.table.get(n)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Vec<i64>, Complex64)> + '_ {
        self.table.iter()
    }

    /// CSV with columns `n1..nd,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for j in 1..=self.dims() {
            out.push_str(&format!("n{j},"));
        }
        out.push_str("re,im\n");
        for (n, v) in self.iter() {
            for e in &n {
                out.push_str(&format!("{e},"));
            }
            out.push_str(&format!("{:e},{:e}\n", v.re, v.im));
        }
        out
    }
}

/// Outcome of a determining-measure or uniqueness test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub pass: bool,
    /// Index (or `[α…, β…]` for uniqueness checks) of the largest entry.
    pub worst_index: Vec<i64>,
    #[serde(with = "cx")]
    pub worst_value: Complex64,
    pub tol: f64,
}

impl MomentReport {
    pub fn worst_abs(&self) -> f64 {
        self.worst_value.norm()
    }
}

fn is_mixed_sign(n: &[i64]) -> bool {
    n.iter().any(|&x| x > 0) && n.iter().any(|&x| x < 0)
}

/// Whether moment `(n, v)` should replace the current witness: larger modulus,
/// or a tie (to rounding) at lower degree, then lexicographically larger index.
fn beats(n: &[i64], v: Complex64, worst: &(Vec<i64>, Complex64)) -> bool {
    if worst.0.is_empty() {
        return true;
    }
    let (a, b) = (v.norm(), worst.1.norm());
    if (a - b).abs() > 1e-12 * a.max(b) {
        return a > b;
    }
    let rank = |m: &[i64]| (m.iter().map(|x| x.abs()).max().unwrap_or(0), m.iter().map(|x| x.abs()).sum::<i64>());
    match rank(n).cmp(&rank(&worst.0)) {
        std::cmp::Ordering::Equal => n > worst.0.as_slice(),
        o => o == std::cmp::Ordering::Less,
    }
}

/// Vanishing of all mixed-sign moments with `max|n_j| ≤ degree`. The witness
/// is the largest moment, lowest degree first among ties.
pub fn is_determining_polydisc(mu: &BoundaryMeasure, degree: usize, tol: f64) -> Result<MomentReport> {
    let moments = mu.moments(degree)?;
    let mut worst = (Vec::new(), Complex64::new(0.0, 0.0));
    for (n, v) in moments.iter() {
        if is_mixed_sign(&n) && beats(&n, v, &worst) {
            worst = (n, v);
        }
    }
    Ok(MomentReport { pass: worst.1.norm() <= tol, worst_index: worst.0, worst_value: worst.1, tol })
}

/// `e_{(k,0)}∘π = (z₁^k − z₂^k)/(z₁ − z₂)` written in `(s, p)`:
/// `h₀ = 1`, `h₁ = s`, `h_m = s·h_{m−1} − p·h_{m−2}`, and `e_{(k,0)} = h_{k−1}`.
pub fn sym_basis(s: Complex64, p: Complex64, kmax: usize) -> Vec<Complex64> {
    let mut h = vec![Complex64::new(1.0, 0.0); kmax.max(1)];
    if kmax > 1 {
        h[1] = s;
    }
    for m in 2..kmax {
        h[m] = s * h[m - 1] - p * h[m - 2];
    }
    h
}

/// Checks `∫ conj(p)^j e_{(k,0)} dμ = 0` for `1 ≤ j ≤ jmax`, `1 ≤ k ≤ kmax`,
/// `k − j > 1`, on the symmetrized torus.
pub fn is_determining_sym_bidisc(mu: &BoundaryMeasure, jmax: usize, kmax: usize, tol: f64) -> Result<MomentReport> {
    if mu.boundary() != Boundary::SymTorus {
        return Err(Error::UnsupportedBoundary(format!("expected sym_torus, got {:?}", mu.boundary())));
    }
    let pairs: Vec<(usize, usize)> =
        (1..=jmax).flat_map(|j| (1..=kmax).map(move |k| (j, k))).filter(|&(j, k)| k > j + 1).collect();
    let pts = mu.points_and_masses();
    let mut sums = vec![Complex64::new(0.0, 0.0); pairs.len()];
    for (pt, m) in &pts {
        if *m == 0.0 {
            continue;
        }
        let (s, p) = (pt[0], pt[1]);
        let h = sym_basis(s, p, kmax);
        let pc = p.conj();
        for (slot, &(j, k)) in pairs.iter().enumerate() {
            sums[slot] += pc.powu(j as u32) * h[k - 1] * *m;
        }
    }
    let mut worst = (Vec::new(), Complex64::new(0.0, 0.0));
    for (slot, &(j, k)) in pairs.iter().enumerate() {
        let idx = vec![j as i64, k as i64];
        if beats(&idx, sums[slot], &worst) {
            worst = (idx, sums[slot]);
        }
    }
    Ok(MomentReport { pass: worst.1.norm() <= tol, worst_index: worst.0, worst_value: worst.1, tol })
}

/// Max over trigonometric test monomials of degree `≤ test_degree` of the
/// difference of integrals. On the annulus each circle is tested separately.
pub fn wstar_distance(mu1: &BoundaryMeasure, mu2: &BoundaryMeasure, test_degree: usize) -> Result<f64> {
    if mu1.boundary() != mu2.boundary() {
        return Err(Error::validation(format!(
            "measures live on different boundaries: {:?} vs {:?}",
            mu1.boundary(),
            mu2.boundary()
        )));
    }
    match mu1.boundary() {
        Boundary::Circle | Boundary::Torus { .. } => {
            let a = mu1.moments(test_degree)?;
            let b = mu2.moments(test_degree)?;
            Ok(a.iter().map(|(n, v)| (v - b.get(&n).unwrap()).norm()).fold(0.0, f64::max))
        }
        Boundary::Annulus { q } => {
            let mut worst: f64 = 0.0;
            for outer in [true, false] {
                for n in -(test_degree as i64)..=test_degree as i64 {
                    let g = |z: &[Complex64]| {
                        let on_outer = (z[0].norm() - 1.0).abs() < (z[0].norm() - q).abs();
                        if on_outer == outer {
                            Complex64::from_polar(1.0, n as f64 * z[0].arg())
                        } else {
                            Complex64::new(0.0, 0.0)
                        }
                    };
                    worst = worst.max((mu1.integrate(g) - mu2.integrate(g)).norm());
                }
            }
            Ok(worst)
        }
        Boundary::SymTorus => Err(Error::UnsupportedBoundary("weak* distance on the symmetrized torus".into())),
    }
}

/// Compares `∫ ζ̄^α ζ^β d(μ₁ − μ₂)` for `|α|, |β| ≤ degree`.
pub fn reinhardt_uniqueness_check(
    mu1: &BoundaryMeasure,
    mu2: &BoundaryMeasure,
    degree: usize,
    tol: f64,
) -> Result<MomentReport> {
    if mu1.boundary() != mu2.boundary() {
        return Err(Error::validation("measures live on different boundaries"));
    }
    let d = mu1.boundary().coord_dim();
    let a = mu1.moments(degree)?;
    let b = mu2.moments(degree)?;
    let multi: Vec<Vec<i64>> = box_indices(d, degree as i64)
        .filter(|n| n.iter().all(|&x| x >= 0) && n.iter().sum::<i64>() <= degree as i64)
        .collect();
    let mut worst = (Vec::new(), Complex64::new(0.0, 0.0));
    for alpha in &multi {
        for beta in &multi {
            let n: Vec<i64> = beta.iter().zip(alpha).map(|(b, a)| b - a).collect();
            let v = a.get(&n).unwrap() - b.get(&n).unwrap();
            if worst.0.is_empty() || v.norm() > worst.1.norm() {
                worst = (alpha.iter().chain(beta).copied().collect(), v);
            }
        }
    }
    Ok(MomentReport { pass: worst.1.norm() <= tol, worst_index: worst.0, worst_value: worst.1, tol })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixAtom {
    pub point: Vec<Complex64>,
    pub matrix: DMatrix<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct RawMatrixAtom {
    #[serde(with = "cx::point")]
    point: Vec<Complex64>,
    #[serde(with = "cx::vec_vec")]
    matrix: Vec<Vec<Complex64>>,
}

impl Serialize for MatrixAtom {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows = (0..self.matrix.nrows()).map(|i| self.matrix.row(i).iter().copied().collect()).collect();
        RawMatrixAtom { point: self.point.clone(), matrix: rows }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MatrixAtom {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawMatrixAtom::deserialize(d)?;
        let n = raw.matrix.len();
        if raw.matrix.iter().any(|r| r.len() != n) {
            return Err(serde::de::Error::custom("atom matrix is not square"));
        }
        Ok(MatrixAtom { point: raw.point, matrix: DMatrix::from_fn(n, n, |i, j| raw.matrix[i][j]) })
    }
}

/// Atomic measure with PSD matrix weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrixMeasure", into = "RawMatrixMeasure")]
pub struct MatrixBoundaryMeasure {
    boundary: Boundary,
    atoms: Vec<MatrixAtom>,
}

#[derive(Serialize, Deserialize)]
struct RawMatrixMeasure {
    #[serde(flatten)]
    boundary: Boundary,
    atoms: Vec<MatrixAtom>,
}

impl TryFrom<RawMatrixMeasure> for MatrixBoundaryMeasure {
    type Error = Error;
    fn try_from(raw: RawMatrixMeasure) -> Result<Self> {
        MatrixBoundaryMeasure::new(raw.boundary, raw.atoms)
    }
}

impl From<MatrixBoundaryMeasure> for RawMatrixMeasure {
    fn from(m: MatrixBoundaryMeasure) -> Self {
        RawMatrixMeasure { boundary: m.boundary, atoms: m.atoms }
    }
}

impl MatrixBoundaryMeasure {
    /// Validates boundary membership, a common square size and PSD weights
    /// (min eigenvalue `≥ −1e-10`).
    pub fn new(boundary: Boundary, atoms: Vec<MatrixAtom>) -> Result<Self> {
        let m = Self::new_unchecked(boundary, atoms)?;
        for (k, a) in m.atoms.iter().enumerate() {
            let ev = numerics::min_eig(&a.matrix)?;
            if ev < -PSD_TOL {
                return Err(Error::validation(format!("atom {k} has eigenvalue {ev:e}")));
            }
        }
        Ok(m)
    }

    /// Checks shapes and boundary membership only; positivity is left to
    /// [`psd_atom_check`](crate::operator_lift::psd_atom_check).
    pub fn new_unchecked(boundary: Boundary, atoms: Vec<MatrixAtom>) -> Result<Self> {
        boundary.validate()?;
        let n = atoms.first().map_or(0, |a| a.matrix.nrows());
        for (k, a) in atoms.iter().enumerate() {
            if a.matrix.nrows() != n || a.matrix.ncols() != n {
                return Err(Error::validation(format!("atom {k} has a different matrix size")));
            }
            if !boundary.contains(&a.point) {
                return Err(Error::validation(format!("atom {k} is not on the boundary")));
            }
        }
        Ok(MatrixBoundaryMeasure { boundary, atoms })
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn atoms(&self) -> &[MatrixAtom] {
        &self.atoms
    }

    pub fn dim(&self) -> usize {
        self.atoms.first().map_or(0, |a| a.matrix.nrows())
    }

    /// `Σ_k E_k`.
    pub fn total(&self) -> DMatrix<Complex64> {
        let n = self.dim();
        self.atoms.iter().fold(DMatrix::zeros(n, n), |acc, a| acc + &a.matrix)
    }

    /// Scalar measure `⟨E(·) h, h⟩`.
    pub fn quadratic_form(&self, h: &[Complex64]) -> Result<BoundaryMeasure> {
        let hv = nalgebra::DVector::from_column_slice(h);
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom { point: a.point.clone(), weight: (hv.adjoint() * &a.matrix * &hv)[(0, 0)].re.max(0.0) })
            .collect();
        BoundaryMeasure::atoms(self.boundary, atoms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn one_zero() -> Vec<Complex64> {
        vec![Complex64::new(1.0, 0.0)]
    }

    #[test]
    fn circle_moment_examples() {
        let haar = BoundaryMeasure::haar(Boundary::Circle, 64).unwrap();
        let m = haar.moments(3).unwrap();
        for (n, v) in m.iter() {
            assert_abs_diff_eq!(v.re, if n[0] == 0 { 1.0 } else { 0.0 }, epsilon = 1e-15);
        }
        let delta = BoundaryMeasure::circle_atoms(&[(0.0, 1.0)]).unwrap();
        for (_, v) in delta.moments(3).unwrap().iter() {
            assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-15);
        }
        let two = BoundaryMeasure::circle_atoms(&[(0.0, 0.5), (PI, 0.5)]).unwrap();
        for (n, v) in two.moments(4).unwrap().iter() {
            assert_abs_diff_eq!(v.re, if n[0] % 2 == 0 { 1.0 } else { 0.0 }, epsilon = 1e-15);
        }
    }

    #[test]
    fn density_moments_match_direct_sums() {
        let values: Vec<f64> = (0..32).map(|k| 1.0 + (grid_point(k, 32).re * 0.5) + (k % 3) as f64 * 0.1).collect();
        let mu = BoundaryMeasure::density(Boundary::Circle, 32, values).unwrap();
        let m = mu.moments(5).unwrap();
        for (n, v) in m.iter() {
            let direct = mu.integrate(|u| monomial(u, &n));
            assert!((v - direct).norm() < 1e-14);
        }
    }

    fn slice_measure() -> BoundaryMeasure {
        // ½(δ₁⊗Haar + Haar⊗δ₁) as atoms on a grid of 16 in the free variable.
        let g = 16;
        let mut atoms = Vec::new();
        for k in 0..g {
            let z = grid_point(k, g);
            atoms.push(Atom { point: vec![Complex64::new(1.0, 0.0), z], weight: 0.5 / g as f64 });
            atoms.push(Atom { point: vec![z, Complex64::new(1.0, 0.0)], weight: 0.5 / g as f64 });
        }
        BoundaryMeasure::atoms(Boundary::Torus { d: 2 }, atoms).unwrap()
    }

    #[test]
    fn polydisc_determining_examples() {
        let haar = BoundaryMeasure::haar(Boundary::Torus { d: 2 }, 32).unwrap();
        assert!(is_determining_polydisc(&haar, 8, 1e-12).unwrap().pass);
        let delta =
            BoundaryMeasure::atoms(Boundary::Torus { d: 2 }, vec![Atom { point: vec![one_zero()[0]; 2], weight: 1.0 }])
                .unwrap();
        let r = is_determining_polydisc(&delta, 8, 1e-12).unwrap();
        assert!(!r.pass);
        assert_abs_diff_eq!(r.worst_abs(), 1.0, epsilon = 1e-15);
        assert_eq!(r.worst_index.iter().filter(|&&x| x > 0).count(), 1);
        assert!(is_determining_polydisc(&slice_measure(), 8, 1e-12).unwrap().pass);
    }

    #[test]
    fn first_mixed_moment_of_point_mass() {
        let delta = BoundaryMeasure::atoms(
            Boundary::Torus { d: 2 },
            vec![Atom { point: vec![Complex64::new(1.0, 0.0); 2], weight: 1.0 }],
        )
        .unwrap();
        for degree in [1, 8] {
            let r = is_determining_polydisc(&delta, degree, 1e-12).unwrap();
            assert!(!r.pass);
            assert_eq!(r.worst_index, vec![1, -1]);
        }
    }

    #[test]
    fn haar_is_determining_in_low_dimensions() {
        for (d, g) in [(1usize, 32usize), (2, 32), (3, 20)] {
            let haar = BoundaryMeasure::haar(Boundary::Torus { d }, g).unwrap();
            assert!(is_determining_polydisc(&haar, 8, 1e-12).unwrap().pass);
        }
    }

    #[test]
    fn sym_bidisc_determining_examples() {
        let base = BoundaryMeasure::haar(Boundary::SymTorus, 64).unwrap();
        assert_abs_diff_eq!(base.mass(), 1.0, epsilon = 1e-13);
        assert!(is_determining_sym_bidisc(&base, 6, 8, 1e-12).unwrap().pass);

        let two = Complex64::new(2.0, 0.0);
        let delta =
            BoundaryMeasure::atoms(Boundary::SymTorus, vec![Atom { point: vec![two, Complex64::new(1.0, 0.0)], weight: 1.0 }])
                .unwrap();
        let r = is_determining_sym_bidisc(&delta, 6, 8, 1e-12).unwrap();
        assert!(!r.pass);
        // The integrand at (2, 1) is k; the largest k in range is 8.
        assert_abs_diff_eq!(r.worst_abs(), 8.0, epsilon = 1e-12);

        assert!(is_determining_sym_bidisc(&BoundaryMeasure::zero(Boundary::SymTorus), 6, 8, 1e-12).unwrap().pass);
    }

    #[test]
    fn sym_basis_matches_divided_difference() {
        let (z1, z2) = (Complex64::from_polar(1.0, 0.4), Complex64::from_polar(1.0, 2.1));
        let [s, p] = symmetrize(z1, z2);
        let h = sym_basis(s, p, 7);
        for k in 1..=7u32 {
            let want = (z1.powu(k) - z2.powu(k)) / (z1 - z2);
            assert!((h[k as usize - 1] - want).norm() < 1e-13);
        }
    }

    #[test]
    fn wstar_examples() {
        let haar = BoundaryMeasure::haar(Boundary::Circle, 64).unwrap();
        let delta = BoundaryMeasure::circle_atoms(&[(0.0, 1.0)]).unwrap();
        let two = BoundaryMeasure::circle_atoms(&[(0.0, 0.5), (PI, 0.5)]).unwrap();
        assert_eq!(wstar_distance(&delta, &delta, 4).unwrap(), 0.0);
        assert_abs_diff_eq!(wstar_distance(&delta, &haar, 1).unwrap(), 1.0, epsilon = 1e-14);
        assert!(wstar_distance(&two, &haar, 1).unwrap() < 1e-15);
        assert_abs_diff_eq!(wstar_distance(&two, &haar, 2).unwrap(), 1.0, epsilon = 1e-14);
        let torus = BoundaryMeasure::haar(Boundary::Torus { d: 2 }, 8).unwrap();
        assert!(wstar_distance(&haar, &torus, 1).is_err());
    }

    #[test]
    fn uniqueness_examples() {
        let a = BoundaryMeasure::circle_atoms(&[(0.0, 1.0)]).unwrap();
        let b = BoundaryMeasure::circle_atoms(&[(PI, 1.0)]).unwrap();
        assert!(reinhardt_uniqueness_check(&a, &a, 4, 1e-12).unwrap().pass);
        let r = reinhardt_uniqueness_check(&a, &b, 4, 1e-12).unwrap();
        assert!(!r.pass);
        assert_eq!(r.worst_index, vec![0, 1]);
        assert_abs_diff_eq!(r.worst_abs(), 2.0, epsilon = 1e-14);

        let haar = BoundaryMeasure::haar(Boundary::Circle, 64).unwrap();
        let two = BoundaryMeasure::circle_atoms(&[(0.0, 0.5), (PI, 0.5)]).unwrap();
        let r = reinhardt_uniqueness_check(&haar, &two, 4, 1e-12).unwrap();
        assert_eq!(r.worst_index, vec![0, 2]);
        assert_abs_diff_eq!(r.worst_abs(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"boundary":"torus","d":2,"atoms":[{"point":[[1,0],[0,1]],"weight":0.5}]}"#;
        let m: BoundaryMeasure = serde_json::from_str(text).unwrap();
        assert_eq!(m.boundary(), Boundary::Torus { d: 2 });
        let back: BoundaryMeasure = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(m, back);
        let c: BoundaryMeasure =
            serde_json::from_str(r#"{"boundary":"circle","density":{"grid":4,"values":[1,1,1,1]}}"#).unwrap();
        assert_abs_diff_eq!(c.mass(), 1.0, epsilon = 1e-15);
        assert!(serde_json::from_str::<BoundaryMeasure>(r#"{"boundary":"circle","atoms":[{"point":[2,0],"weight":1}]}"#)
            .is_err());
    }

    #[test]
    fn moment_csv_header() {
        let m = BoundaryMeasure::haar(Boundary::Torus { d: 2 }, 8).unwrap().moments(1).unwrap();
        let csv = m.to_csv();
        assert!(csv.starts_with("n1,n2,re,im\n"));
        assert_eq!(csv.lines().count(), 1 + 9);
    }

    fn random_measure(ws: &[f64], ts: &[f64]) -> BoundaryMeasure {
        BoundaryMeasure::circle_atoms(&ts.iter().zip(ws).map(|(&t, &w)| (t, w)).collect::<Vec<_>>()).unwrap()
    }

    proptest! {
        #[test]
        fn zeroth_moment_is_mass(ws in proptest::collection::vec(0.0f64..2.0, 1..8),
                                 ts in proptest::collection::vec(0.0f64..6.3, 8),
                                 vals in proptest::collection::vec(0.0f64..3.0, 16)) {
            let a = random_measure(&ws, &ts);
            prop_assert!((a.moments(2).unwrap().get(&[0]).unwrap().re - a.mass()).abs() < 1e-12);
            let d = BoundaryMeasure::density(Boundary::Circle, 16, vals).unwrap();
            prop_assert!((d.moments(2).unwrap().get(&[0]).unwrap().re - d.mass()).abs() < 1e-12);
        }

        #[test]
        fn moment_conjugate_symmetry(ws in proptest::collection::vec(0.0f64..2.0, 1..8),
                                     ts in proptest::collection::vec(0.0f64..6.3, 8),
                                     vals in proptest::collection::vec(0.0f64..3.0, 64)) {
            let a = random_measure(&ws, &ts);
            let d = BoundaryMeasure::density(Boundary::Torus { d: 2 }, 8, vals).unwrap();
            for m in [a.moments(3).unwrap(), d.moments(3).unwrap()] {
                for (n, v) in m.iter() {
                    let neg: Vec<i64> = n.iter().map(|x| -x).collect();
                    let w = m.get(&neg).unwrap();
                    prop_assert_eq!(w, v.conj());
                }
            }
        }

        #[test]
        fn pushforward_consistency(vals in proptest::collection::vec(0.0f64..2.0, 64 * 64)) {
            // A symmetric density on 𝕋², integrated on 𝕋² and as atoms on b𝔾.
            let g = 64;
            let sym: Vec<f64> = (0..g * g).map(|k| {
                let (a, b) = (k / g, k % g);
                0.5 * (vals[a * g + b] + vals[b * g + a])
            }).collect();
            let mu = BoundaryMeasure::density(Boundary::SymTorus, g, sym.clone()).unwrap();
            let atoms = mu.to_atoms();
            for j in 0..=3u32 {
                for k in 0..=3u32 {
                    let f = |z: &[Complex64]| z[0].powu(j) * z[1].conj().powu(k);
                    let on_torus: Complex64 = (0..g * g).map(|i| {
                        let z = torus_grid_point(i, g, 2);
                        let [s, p] = symmetrize(z[0], z[1]);
                        s.powu(j) * p.conj().powu(k) * sym[i]
                    }).sum::<Complex64>() / (g * g) as f64;
                    prop_assert!((mu.integrate(f) - on_torus).norm() < 1e-10);
                    prop_assert!((atoms.integrate(f) - on_torus).norm() < 1e-10);
                }
            }
        }
    }
}
