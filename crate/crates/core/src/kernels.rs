//! Closed-form Szegő, Poisson–Szegő and Herglotz kernels, the defect `ψ`,
//! and the monomial moments `ν̂(α, α)` behind Reinhardt kernels.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{on_sym_torus, symmetrize, Boundary, BoundaryMeasure};
use crate::numerics::grid_point;
use crate::serde_complex as cx;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const BOUNDARY_TOL: f64 = 1e-10;
/// Truncation target for Reinhardt series.
pub const REINHARDT_TAIL_TOL: f64 = 1e-10;
/// Relative standard error above which a Monte Carlo `ν̂` is rejected.
pub const MC_MAX_REL_STDERR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "snake_case")]
pub enum NuHatBackend {
    /// Gauss–Legendre quadrature on the simplex of `(|z₁|², …, |z_d|²)`.
    #[default]
    Quadrature,
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuHatEntry {
    pub alpha: Vec<u32>,
    pub value: f64,
}

/// Where `ν̂(α, α) = ∫ |z^α|² dν` comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum NuHatSource {
    PolydiscHaar,
    BallSurface {
        #[serde(default, flatten)]
        backend: NuHatBackend,
    },
    Table { entries: Vec<NuHatEntry> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainKind {
    Disc,
    Polydisc { d: usize },
    /// Unit ball with normalized surface measure; its kernel goes through the
    /// Reinhardt series.
    Ball {
        d: usize,
        #[serde(default, flatten)]
        backend: NuHatBackend,
    },
    SymBidisc,
    Reinhardt {
        d: usize,
        #[serde(flatten)]
        source: NuHatSource,
    },
    Annulus { q: f64, z0: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    #[serde(flatten)]
    pub kind: DomainKind,
    /// Empty means the origin (or `z₀` on the annulus).
    #[serde(default, with = "cx::vec", skip_serializing_if = "Vec::is_empty")]
    pub base_point: Vec<Complex64>,
}

impl DomainSpec {
    pub fn new(kind: DomainKind) -> Self {
        DomainSpec { kind, base_point: Vec::new() }
    }

    pub fn disc() -> Self {
        Self::new(DomainKind::Disc)
    }

    pub fn polydisc(d: usize) -> Self {
        Self::new(DomainKind::Polydisc { d })
    }

    pub fn sym_bidisc() -> Self {
        Self::new(DomainKind::SymBidisc)
    }

    pub fn with_base_point(mut self, z0: Vec<Complex64>) -> Self {
        self.base_point = z0;
        self
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            DomainKind::Disc | DomainKind::Annulus { .. } => 1,
            DomainKind::Polydisc { d } | DomainKind::Ball { d, .. } | DomainKind::Reinhardt { d, .. } => *d,
            DomainKind::SymBidisc => 2,
        }
    }

    pub fn base(&self) -> Vec<Complex64> {
        if !self.base_point.is_empty() {
            return self.base_point.clone();
        }
        match self.kind {
            DomainKind::Annulus { z0, .. } => vec![Complex64::new(z0, 0.0)],
            _ => vec![Complex64::new(0.0, 0.0); self.dim()],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            DomainKind::Polydisc { d } | DomainKind::Ball { d, .. } | DomainKind::Reinhardt { d, .. } if *d == 0 => {
                return Err(Error::validation("domain dimension must be positive"))
            }
            DomainKind::Annulus { q, z0 } => {
                if !(*q > 0.0 && *q < 1.0) {
                    return Err(Error::validation(format!("annulus needs 0 < q < 1, got {q}")));
                }
                if !(*z0 > *q && *z0 < 1.0) {
                    return Err(Error::validation(format!("annulus base point {z0} is outside (q, 1)")));
                }
            }
            DomainKind::Reinhardt { source: NuHatSource::Table { entries }, d } => {
                for e in entries {
                    if e.alpha.len() != *d || !(e.value > 0.0 && e.value.is_finite()) {
                        return Err(Error::validation(format!("bad ν̂ table entry {e:?}")));
                    }
                }
            }
            _ => {}
        }
        if !self.base_point.is_empty() {
            if self.base_point.len() != self.dim() {
                return Err(Error::validation("base point has the wrong number of coordinates"));
            }
            check_interior(self, &self.base_point)?;
        }
        Ok(())
    }

    /// The boundary carrying the kernel's measure, when it is one of the
    /// stored measure boundaries.
    pub fn measure_boundary(&self) -> Option<Boundary> {
        match &self.kind {
            DomainKind::Disc => Some(Boundary::Circle),
            DomainKind::Polydisc { d } => Some(Boundary::Torus { d: *d }),
            DomainKind::Reinhardt { d, source: NuHatSource::PolydiscHaar } => Some(Boundary::Torus { d: *d }),
            DomainKind::SymBidisc => Some(Boundary::SymTorus),
            DomainKind::Annulus { q, .. } => Some(Boundary::Annulus { q: *q }),
            _ => None,
        }
    }
}

fn annulus_error() -> Error {
    Error::Domain("annulus kernels are numeric; build a HardyBasisNumeric with the annulus module".into())
}

/// Largest root modulus of `x² − s x + p`; `(s, p) ∈ 𝔾` iff it is `< 1`.
pub fn sym_root_radius(s: Complex64, p: Complex64) -> f64 {
    let disc = (s * s - p * 4.0).sqrt();
    let r1 = (s + disc) * 0.5;
    let r2 = (s - disc) * 0.5;
    r1.norm().max(r2.norm())
}

fn check_dims(domain: &DomainSpec, z: &[Complex64]) -> Result<()> {
    if z.len() != domain.dim() {
        return Err(Error::validation(format!(
            "point has {} coordinates, domain needs {}",
            z.len(),
            domain.dim()
        )));
    }
    Ok(())
}

/// Errors unless `z` lies in the open domain.
pub fn check_interior(domain: &DomainSpec, z: &[Complex64]) -> Result<()> {
    check_dims(domain, z)?;
    let inside = match &domain.kind {
        DomainKind::Disc | DomainKind::Polydisc { .. } => z.iter().all(|x| x.norm() < 1.0),
        DomainKind::Ball { .. } | DomainKind::Reinhardt { source: NuHatSource::BallSurface { .. }, .. } => {
            z.iter().map(|x| x.norm_sqr()).sum::<f64>() < 1.0
        }
        DomainKind::Reinhardt { .. } => z.iter().all(|x| x.norm() < 1.0),
        DomainKind::SymBidisc => sym_root_radius(z[0], z[1]) < 1.0,
        DomainKind::Annulus { q, .. } => z[0].norm() > *q && z[0].norm() < 1.0,
    };
    if inside {
        Ok(())
    } else {
        Err(Error::Domain(format!("{z:?} is not an interior point")))
    }
}

fn check_closure(domain: &DomainSpec, w: &[Complex64]) -> Result<()> {
    check_dims(domain, w)?;
    let ok = match &domain.kind {
        DomainKind::Disc | DomainKind::Polydisc { .. } | DomainKind::Reinhardt { .. } => {
            w.iter().all(|x| x.norm() <= 1.0 + BOUNDARY_TOL)
        }
        DomainKind::Ball { .. } => w.iter().map(|x| x.norm_sqr()).sum::<f64>() <= 1.0 + BOUNDARY_TOL,
        DomainKind::SymBidisc => sym_root_radius(w[0], w[1]) <= 1.0 + 1e-6,
        DomainKind::Annulus { .. } => return Err(annulus_error()),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Domain(format!("{w:?} is outside the closed domain")))
    }
}

/// Errors unless `zeta` lies on the support of the boundary measure.
pub fn check_support(domain: &DomainSpec, zeta: &[Complex64]) -> Result<()> {
    check_dims(domain, zeta)?;
    let ok = match &domain.kind {
        DomainKind::Disc | DomainKind::Polydisc { .. } | DomainKind::Reinhardt { source: NuHatSource::PolydiscHaar, .. } => {
            zeta.iter().all(|x| (x.norm() - 1.0).abs() <= BOUNDARY_TOL)
        }
        DomainKind::Ball { .. } | DomainKind::Reinhardt { source: NuHatSource::BallSurface { .. }, .. } => {
            (zeta.iter().map(|x| x.norm_sqr()).sum::<f64>() - 1.0).abs() <= BOUNDARY_TOL
        }
        DomainKind::Reinhardt { .. } => zeta.iter().all(|x| x.norm() <= 1.0 + BOUNDARY_TOL),
        DomainKind::SymBidisc => on_sym_torus(zeta[0], zeta[1]),
        DomainKind::Annulus { .. } => return Err(annulus_error()),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Domain(format!("{zeta:?} is not on the distinguished boundary")))
    }
}

/// Szegő kernel of the symmetrized bidisc at `(s, p)`, `(t, q)`.
#[inline]
pub fn szego_sym(s: Complex64, p: Complex64, t: Complex64, q: Complex64) -> Complex64 {
    let a = ONE - p * q.conj();
    ONE / (a * a - (s - p * t.conj()) * (t.conj() - s * q.conj()))
}

/// `Π 1/(1 − z_j conj(w_j))`.
#[inline]
pub fn szego_polydisc(z: &[Complex64], w: &[Complex64]) -> Complex64 {
    z.iter().zip(w).fold(ONE, |acc, (a, b)| acc / (ONE - a * b.conj()))
}

/// Value of the Szegő kernel and the reported truncation tail (zero for
/// closed forms).
pub fn szego_with_tail(domain: &DomainSpec, z: &[Complex64], w: &[Complex64]) -> Result<(Complex64, f64)> {
    check_interior(domain, z)?;
    check_closure(domain, w)?;
    Ok(match &domain.kind {
        DomainKind::Disc | DomainKind::Polydisc { .. } => (szego_polydisc(z, w), 0.0),
        DomainKind::SymBidisc => (szego_sym(z[0], z[1], w[0], w[1]), 0.0),
        DomainKind::Ball { d, backend } => {
            reinhardt_series(&NuHatSource::BallSurface { backend: *backend }, *d, z, w)?
        }
        DomainKind::Reinhardt { d, source } => reinhardt_series(source, *d, z, w)?,
        DomainKind::Annulus { .. } => return Err(annulus_error()),
    })
}

pub fn szego(domain: &DomainSpec, z: &[Complex64], w: &[Complex64]) -> Result<Complex64> {
    szego_with_tail(domain, z, w).map(|(v, _)| v)
}

/// `P(z, ζ) = |S(z, ζ)|² / S(z, z)`.
pub fn poisson_szego(domain: &DomainSpec, z: &[Complex64], zeta: &[Complex64]) -> Result<f64> {
    check_support(domain, zeta)?;
    let s = szego(domain, z, zeta)?;
    let d = szego(domain, z, z)?;
    Ok(s.norm_sqr() / d.re)
}

/// `H(z, ζ) = 2 S(z, ζ) − 1`, with `ζ` on the support of the boundary
/// measure.
pub fn herglotz_kernel(domain: &DomainSpec, z: &[Complex64], zeta: &[Complex64]) -> Result<Complex64> {
    check_support(domain, zeta)?;
    Ok(szego(domain, z, zeta)? * 2.0 - ONE)
}

/// `ψ(z, ζ) = P(z, ζ) − Re H(z, ζ)`.
pub fn psi_defect(domain: &DomainSpec, z: &[Complex64], zeta: &[Complex64]) -> Result<f64> {
    Ok(poisson_szego(domain, z, zeta)? - herglotz_kernel(domain, z, zeta)?.re)
}

/// `∫ H(z, ζ) dμ(ζ)` using the kernel of the domain carried by the
/// measure's boundary (disc, polydisc or symmetrized bidisc).
pub fn herglotz_integral(mu: &BoundaryMeasure, z: &[Complex64]) -> Result<Complex64> {
    let domain = match mu.boundary() {
        Boundary::Circle => DomainSpec::disc(),
        Boundary::Torus { d } => DomainSpec::polydisc(d),
        Boundary::SymTorus => DomainSpec::sym_bidisc(),
        Boundary::Annulus { .. } => return Err(annulus_error()),
    };
    check_interior(&domain, z)?;
    Ok(match mu.boundary() {
        Boundary::Circle => {
            let x = z[0];
            mu.integrate(|a| (a[0] + x) / (a[0] - x))
        }
        Boundary::Torus { .. } => mu.integrate(|u| szego_polydisc(z, u) * 2.0 - ONE),
        _ => mu.integrate(|u| szego_sym(z[0], z[1], u[0], u[1]) * 2.0 - ONE),
    })
}

/// All `α ∈ ℕ^d` with `|α| = m`, in lexicographic order.
pub fn multi_indices_of_degree(d: usize, m: u32) -> Vec<Vec<u32>> {
    fn rec(d: usize, m: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if d == 1 {
            prefix.push(m);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for a in (0..=m).rev() {
            prefix.push(a);
            rec(d - 1, m - a, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if d > 0 {
        rec(d, m, &mut Vec::new(), &mut out);
    }
    out
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
            let dt = p1 / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        x[i] = 0.5 * (1.0 - t);
        w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
    }
    (x, w)
}

/// `∫_Δ ∏ t_j^{α_j} dt` over the simplex, normalized so `α = 0` gives 1,
/// by stick-breaking and Gauss–Legendre in each coordinate.
fn simplex_moment(alpha: &[u32]) -> f64 {
    let d = alpha.len();
    if d == 1 {
        return 1.0;
    }
    let total: u32 = alpha.iter().sum();
    let n = (total as usize + d) / 2 + 2;
    let (x, w) = gauss_legendre(n);
    // t_1 = u_1, t_j = u_j ∏_{i<j}(1−u_i), last t_d = ∏(1−u_i). Jacobian
    // ∏ (1−u_i)^{d−1−i}, times (d−1)! for normalization.
    fn rec(j: usize, alpha: &[u32], x: &[f64], w: &[f64], rest: f64) -> f64 {
        let d = alpha.len();
        if j == d - 1 {
            return rest.powi(alpha[j] as i32);
        }
        let mut acc = 0.0;
        for (&u, &wt) in x.iter().zip(w) {
            let jac = (1.0 - u).powi((d - 2 - j) as i32);
            let t = u * rest;
            acc += wt * jac * t.powi(alpha[j] as i32) * rec(j + 1, alpha, x, w, rest * (1.0 - u));
        }
        acc
    }
    let raw = rec(0, alpha, &x, &w, 1.0);
    let fact: f64 = (1..d).map(|k| k as f64).product();
    raw * fact
}

/// `ν̂(α, α)` for a Reinhardt source.
pub fn reinhardt_nu_hat(source: &NuHatSource, alpha: &[u32]) -> Result<f64> {
    match source {
        NuHatSource::PolydiscHaar => Ok(1.0),
        NuHatSource::BallSurface { backend: NuHatBackend::Quadrature } => Ok(simplex_moment(alpha)),
        NuHatSource::BallSurface { backend: NuHatBackend::MonteCarlo { samples, seed } } => {
            ball_nu_hat_monte_carlo(alpha, *samples, *seed).map(|(v, _)| v)
        }
        NuHatSource::Table { entries } => entries
            .iter()
            .find(|e| e.alpha == alpha)
            .map(|e| e.value)
            .ok_or_else(|| Error::validation(format!("ν̂ table has no entry for {alpha:?}"))),
    }
}

/// Monte Carlo estimate of `∫_S |z^α|² dσ` from normalized complex
/// Gaussians; returns `(mean, relative standard error)`.
pub fn ball_nu_hat_monte_carlo(alpha: &[u32], samples: usize, seed: u64) -> Result<(f64, f64)> {
    if samples < 2 {
        return Err(Error::validation("Monte Carlo needs at least two samples"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = alpha.len();
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    let mut abs2 = vec![0.0; d];
    for _ in 0..samples {
        let mut norm = 0.0;
        for v in abs2.iter_mut() {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            *v = a * a + b * b;
            norm += *v;
        }
        let val: f64 = abs2.iter().zip(alpha).map(|(v, &e)| (v / norm).powi(e as i32)).product();
        sum += val;
        sum_sq += val * val;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0);
    let rel = (var / n).sqrt() / mean;
    if !(rel <= MC_MAX_REL_STDERR) {
        return Err(Error::MonteCarlo { rel_stderr: rel });
    }
    Ok((mean, rel))
}

type NuHatCache = Mutex<HashMap<(String, usize, u32), Arc<Vec<f64>>>>;

fn nu_hat_degree(source: &NuHatSource, d: usize, m: u32) -> Result<Arc<Vec<f64>>> {
    static CACHE: OnceLock<NuHatCache> = OnceLock::new();
    let key = (serde_json::to_string(source)?, d, m);
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().expect("cache lock").get(&key) {
        return Ok(v.clone());
    }
    let vals: Vec<f64> =
        multi_indices_of_degree(d, m).iter().map(|a| reinhardt_nu_hat(source, a)).collect::<Result<_>>()?;
    if let Some(bad) = vals.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::validation(format!("ν̂ must be strictly positive, got {bad}")));
    }
    let arc = Arc::new(vals);
    cache.lock().expect("cache lock").insert(key, arc.clone());
    Ok(arc)
}

fn max_series_degree(source: &NuHatSource, d: usize) -> u32 {
    if let NuHatSource::Table { entries } = source {
        return entries.iter().map(|e| e.alpha.iter().sum::<u32>()).max().unwrap_or(0);
    }
    match d {
        1 => 4000,
        2 => 600,
        3 => 150,
        _ => 60,
    }
}

/// `Σ_α z^α conj(w^α) / ν̂(α, α)` truncated once the geometric tail estimate
/// of the absolute series drops below [`REINHARDT_TAIL_TOL`].
fn reinhardt_series(source: &NuHatSource, d: usize, z: &[Complex64], w: &[Complex64]) -> Result<(Complex64, f64)> {
    let mmax = max_series_degree(source, d);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut abs_terms: Vec<f64> = Vec::new();
    let prod: Vec<Complex64> = z.iter().zip(w).map(|(a, b)| a * b.conj()).collect();
    let mut tail = f64::INFINITY;
    for m in 0..=mmax {
        let nu = nu_hat_degree(source, d, m)?;
        let mut t_abs = 0.0;
        for (alpha, &v) in multi_indices_of_degree(d, m).iter().zip(nu.iter()) {
            let term = prod.iter().zip(alpha).fold(ONE, |acc, (p, &e)| acc * p.powu(e)) / v;
            sum += term;
            t_abs += term.norm();
        }
        abs_terms.push(t_abs);
        if m >= 4 {
            tail = geometric_tail(&abs_terms);
            if tail < REINHARDT_TAIL_TOL {
                return Ok((sum, tail));
            }
        }
    }
    Err(Error::Truncation { tail })
}

fn geometric_tail(a: &[f64]) -> f64 {
    let n = a.len();
    let last = a[n - 1];
    if a[n - 3..].iter().all(|&x| x == 0.0) {
        return 0.0;
    }
    let mut ratio: f64 = 0.0;
    for k in n - 3..n {
        if a[k - 1] > 0.0 {
            ratio = ratio.max(a[k] / a[k - 1]);
        } else if a[k] > 0.0 {
            return f64::INFINITY;
        }
    }
    if ratio >= 1.0 {
        f64::INFINITY
    } else {
        last * ratio / (1.0 - ratio)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub pass: bool,
    /// `max |S(w, z₀) − 1|` over the interior samples.
    pub worst_deviation: f64,
    #[serde(with = "cx::vec")]
    pub worst_point: Vec<Complex64>,
    /// Largest finite-difference slope of `ζ ↦ S(z, ζ)` along boundary paths.
    pub continuity_modulus: f64,
    pub tol: f64,
}

/// Deterministic interior sample points of a domain.
pub fn interior_samples(domain: &DomainSpec) -> Vec<Vec<Complex64>> {
    let disc: Vec<Complex64> = [0.0, 0.3, 0.6, 0.85]
        .iter()
        .flat_map(|&r| (0..6).map(move |k| Complex64::from_polar(r, 0.4 + k as f64 * 1.047)))
        .collect();
    match &domain.kind {
        DomainKind::Disc => disc.iter().map(|&z| vec![z]).collect(),
        DomainKind::Annulus { q, .. } => [0.25, 0.5, 0.75]
            .iter()
            .flat_map(|&t| (0..6).map(move |k| vec![Complex64::from_polar(q + t * (1.0 - q), 0.3 + k as f64)]))
            .collect(),
        DomainKind::SymBidisc => {
            let mut out = Vec::new();
            for (i, &a) in disc.iter().enumerate() {
                let b = disc[(i * 7 + 3) % disc.len()] * 0.9;
                out.push(symmetrize(a, b).to_vec());
            }
            out
        }
        _ => {
            let d = domain.dim();
            let ball = matches!(
                domain.kind,
                DomainKind::Ball { .. } | DomainKind::Reinhardt { source: NuHatSource::BallSurface { .. }, .. }
            );
            let scale = if ball { 0.9 / (d as f64).sqrt() } else { 1.0 };
            (0..disc.len())
                .map(|i| (0..d).map(|j| disc[(i + 5 * j) % disc.len()] * scale).collect())
                .collect()
        }
    }
}

/// A closed path on the support boundary, `θ ↦ ζ(θ)`.
fn boundary_path(domain: &DomainSpec, theta: f64) -> Vec<Complex64> {
    let e = |k: f64| Complex64::from_polar(1.0, k * theta);
    match &domain.kind {
        DomainKind::Disc | DomainKind::Annulus { .. } => vec![e(1.0)],
        DomainKind::SymBidisc => symmetrize(e(1.0), e(-2.0)).to_vec(),
        DomainKind::Ball { d, .. } | DomainKind::Reinhardt { d, source: NuHatSource::BallSurface { .. } } => {
            (0..*d).map(|j| e(j as f64 + 1.0) / (*d as f64).sqrt()).collect()
        }
        DomainKind::Polydisc { d } | DomainKind::Reinhardt { d, .. } => (0..*d).map(|j| e(j as f64 + 1.0)).collect(),
    }
}

/// Checks `S(w, z₀) = 1` on interior samples and boundary continuity of the
/// kernel sections.
pub fn admissibility_check(domain: &DomainSpec, boundary_grid: usize, tol: f64) -> Result<AdmissibilityReport> {
    domain.validate()?;
    if matches!(domain.kind, DomainKind::Annulus { .. }) {
        return Err(annulus_error());
    }
    let z0 = domain.base();
    let mut worst_deviation: f64 = 0.0;
    let mut worst_point = z0.clone();
    for w in interior_samples(domain) {
        let dev = (szego(domain, &w, &z0)? - ONE).norm();
        if dev > worst_deviation {
            worst_deviation = dev;
            worst_point = w;
        }
    }
    let mut continuity_modulus: f64 = 0.0;
    let h = std::f64::consts::TAU / boundary_grid.max(1) as f64;
    for z in interior_samples(domain).iter().step_by(5) {
        let mut prev = szego(domain, z, &boundary_path(domain, 0.0))?;
        for k in 1..=boundary_grid {
            let cur = szego(domain, z, &boundary_path(domain, k as f64 * h))?;
            continuity_modulus = continuity_modulus.max((cur - prev).norm() / h);
            prev = cur;
        }
    }
    Ok(AdmissibilityReport {
        pass: worst_deviation <= tol && continuity_modulus.is_finite(),
        worst_deviation,
        worst_point,
        continuity_modulus,
        tol,
    })
}

/// Points on the support boundary used as quadrature nodes for the disc and
/// polydisc: the full `grid^d` torus grid.
pub fn torus_nodes(d: usize, grid: usize) -> Vec<Vec<Complex64>> {
    (0..grid.pow(d as u32)).map(|k| crate::measures::torus_grid_point(k, grid, d)).collect()
}

/// Point `k` of the unit-circle grid.
pub fn circle_node(k: usize, grid: usize) -> Complex64 {
    grid_point(k, grid)
}
