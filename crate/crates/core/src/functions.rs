//! Symbolic function specifications, pointwise evaluation and Cayley
//! transforms.
//!
//! Univariate kinds (`blaschke`, `rational`, `taylor`) act on one coordinate
//! of the evaluation point, selected by `var` (default 0). Combinators
//! (`sum`, `product`, `scaled`, `const`, `dilate`, `poly`) build the
//! multivariate test functions used on the polydisc and symmetrized bidisc.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::BoundaryMeasure;
use crate::serde_complex as cx;

/// A square complex matrix value `F(z)`.
pub type MatrixValue = DMatrix<Complex64>;

/// Reciprocal-condition threshold below which `I + F` counts as singular.
pub const CAYLEY_RCOND: f64 = 1e-12;
/// Shrink factor applied automatically when a Schur function touches the
/// unit sphere.
pub const DEFAULT_SHRINK: f64 = 1e-6;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

fn one() -> Complex64 {
    ONE
}

fn is_zero(v: &usize) -> bool {
    *v == 0
}

/// One monomial `coef · z₁^{e₁} ⋯ z_d^{e_d}` of a multivariate polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyTerm {
    #[serde(with = "cx")]
    pub coef: Complex64,
    pub exps: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionSpec {
    /// `c ∏ (z − a_j)/(1 − conj(a_j) z)`.
    Blaschke {
        #[serde(with = "cx", default = "one")]
        c: Complex64,
        #[serde(with = "cx::vec")]
        zeros: Vec<Complex64>,
        /// Asserts `B(0) = 0`; checked by [`FunctionSpec::validate`].
        #[serde(default)]
        vanish_at_origin: bool,
        #[serde(default, skip_serializing_if = "is_zero")]
        var: usize,
    },
    /// `num(z)/den(z)`, coefficients in increasing powers.
    Rational {
        #[serde(with = "cx::vec")]
        num: Vec<Complex64>,
        #[serde(with = "cx::vec")]
        den: Vec<Complex64>,
        #[serde(default, skip_serializing_if = "is_zero")]
        var: usize,
    },
    Taylor {
        #[serde(with = "cx::vec")]
        coeffs: Vec<Complex64>,
        #[serde(default, skip_serializing_if = "is_zero")]
        var: usize,
    },
    /// `i·imag + ∫ H(z, ζ) dμ(ζ)` with the Herglotz kernel of the domain
    /// carried by the measure's boundary.
    HerglotzFromMeasure {
        measure: Box<BoundaryMeasure>,
        #[serde(default)]
        imag: f64,
    },
    Matrix { entries: Vec<Vec<FunctionSpec>> },
    Poly { terms: Vec<PolyTerm> },
    Sum { terms: Vec<FunctionSpec> },
    Product { factors: Vec<FunctionSpec> },
    Scaled {
        #[serde(with = "cx")]
        factor: Complex64,
        f: Box<FunctionSpec>,
    },
    Const {
        #[serde(with = "cx")]
        value: Complex64,
    },
    /// `f(s₁ z₁, …, s_d z_d)`.
    Dilate { scales: Vec<f64>, f: Box<FunctionSpec> },
}

impl FunctionSpec {
    pub fn blaschke(c: Complex64, zeros: Vec<Complex64>) -> Self {
        FunctionSpec::Blaschke { c, zeros, vanish_at_origin: false, var: 0 }
    }

    pub fn rational(num: Vec<Complex64>, den: Vec<Complex64>) -> Self {
        FunctionSpec::Rational { num, den, var: 0 }
    }

    pub fn rational_real(num: &[f64], den: &[f64]) -> Self {
        Self::rational(real_vec(num), real_vec(den))
    }

    pub fn taylor(coeffs: Vec<Complex64>) -> Self {
        FunctionSpec::Taylor { coeffs, var: 0 }
    }

    pub fn constant(value: Complex64) -> Self {
        FunctionSpec::Const { value }
    }

    pub fn scaled(factor: Complex64, f: FunctionSpec) -> Self {
        FunctionSpec::Scaled { factor, f: Box::new(f) }
    }

    pub fn in_var(self, v: usize) -> Self {
        match self {
            FunctionSpec::Blaschke { c, zeros, vanish_at_origin, .. } => {
                FunctionSpec::Blaschke { c, zeros, vanish_at_origin, var: v }
            }
            FunctionSpec::Rational { num, den, .. } => FunctionSpec::Rational { num, den, var: v },
            FunctionSpec::Taylor { coeffs, .. } => FunctionSpec::Taylor { coeffs, var: v },
            other => other,
        }
    }

    /// `(1 + z)/(1 − z)` in coordinate `v`.
    pub fn herglotz_unit(v: usize) -> Self {
        Self::rational_real(&[1.0, 1.0], &[1.0, -1.0]).in_var(v)
    }

    pub fn is_matrix(&self) -> bool {
        match self {
            FunctionSpec::Matrix { .. } => true,
            FunctionSpec::Sum { terms: fs } | FunctionSpec::Product { factors: fs } => fs.iter().any(Self::is_matrix),
            FunctionSpec::Scaled { f, .. } | FunctionSpec::Dilate { f, .. } => f.is_matrix(),
            _ => false,
        }
    }

    /// Matrix size of the value (1 for scalar specs).
    pub fn dim(&self) -> usize {
        match self {
            FunctionSpec::Matrix { entries } => entries.len(),
            FunctionSpec::Sum { terms: fs } | FunctionSpec::Product { factors: fs } => {
                fs.iter().map(Self::dim).max().unwrap_or(1)
            }
            FunctionSpec::Scaled { f, .. } | FunctionSpec::Dilate { f, .. } => f.dim(),
            _ => 1,
        }
    }

    /// Number of coordinates the spec reads (at least 1).
    pub fn arity(&self) -> usize {
        match self {
            FunctionSpec::Blaschke { var, .. } | FunctionSpec::Rational { var, .. } | FunctionSpec::Taylor { var, .. } => {
                var + 1
            }
            FunctionSpec::HerglotzFromMeasure { measure, .. } => measure.boundary().coord_dim(),
            FunctionSpec::Matrix { entries } => entries.iter().flatten().map(Self::arity).max().unwrap_or(1),
            FunctionSpec::Poly { terms } => terms.iter().map(|t| t.exps.len()).max().unwrap_or(1).max(1),
            FunctionSpec::Sum { terms: fs } | FunctionSpec::Product { factors: fs } => {
                fs.iter().map(Self::arity).max().unwrap_or(1)
            }
            FunctionSpec::Scaled { f, .. } => f.arity(),
            FunctionSpec::Dilate { scales, f } => f.arity().max(scales.len()),
            FunctionSpec::Const { .. } => 1,
        }
    }

    /// Structural checks: unimodular Blaschke constants, zeros inside the
    /// disc, square matrix grids, nonzero denominators.
    pub fn validate(&self) -> Result<()> {
        match self {
            FunctionSpec::Blaschke { c, zeros, vanish_at_origin, .. } => {
                if (c.norm() - 1.0).abs() > 1e-12 {
                    return Err(Error::validation(format!("Blaschke constant has modulus {}, not 1", c.norm())));
                }
                if let Some(a) = zeros.iter().find(|a| !(a.norm() < 1.0)) {
                    return Err(Error::validation(format!("Blaschke zero {a} is not inside the unit disc")));
                }
                if *vanish_at_origin && !zeros.iter().any(|a| a.norm() < 1e-14) {
                    return Err(Error::validation("Blaschke product flagged vanish_at_origin has no zero at 0"));
                }
                Ok(())
            }
            FunctionSpec::Rational { num, den, .. } => {
                if num.is_empty() || den.is_empty() {
                    return Err(Error::validation("rational spec needs nonempty num and den"));
                }
                if den.iter().all(|c| c.norm() == 0.0) {
                    return Err(Error::validation("rational denominator is identically zero"));
                }
                Ok(())
            }
            FunctionSpec::Taylor { coeffs, .. } => {
                if coeffs.is_empty() {
                    return Err(Error::validation("taylor spec needs at least one coefficient"));
                }
                Ok(())
            }
            FunctionSpec::HerglotzFromMeasure { measure, .. } => measure.validate(),
            FunctionSpec::Matrix { entries } => {
                let n = entries.len();
                if n == 0 || entries.iter().any(|row| row.len() != n) {
                    return Err(Error::validation("matrix spec must be a nonempty square grid"));
                }
                for e in entries.iter().flatten() {
                    if e.is_matrix() {
                        return Err(Error::validation("matrix entries must be scalar specs"));
                    }
                    e.validate()?;
                }
                Ok(())
            }
            FunctionSpec::Sum { terms: fs } | FunctionSpec::Product { factors: fs } => {
                if fs.is_empty() {
                    return Err(Error::validation("sum/product needs at least one operand"));
                }
                let dims: Vec<usize> = fs.iter().filter(|f| f.is_matrix()).map(Self::dim).collect();
                if dims.windows(2).any(|w| w[0] != w[1]) {
                    return Err(Error::validation("matrix operands have different sizes"));
                }
                fs.iter().try_for_each(Self::validate)
            }
            FunctionSpec::Scaled { f, .. } => f.validate(),
            FunctionSpec::Dilate { scales, f } => {
                if scales.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
                    return Err(Error::validation("dilation scales must be positive"));
                }
                f.validate()
            }
            FunctionSpec::Poly { .. } | FunctionSpec::Const { .. } => Ok(()),
        }
    }

    /// Scalar value at `z`. Matrix specs are accepted only when 1×1.
    pub fn eval_scalar(&self, z: &[Complex64]) -> Result<Complex64> {
        match self {
            FunctionSpec::Blaschke { c, zeros, var, .. } => {
                let x = coord(z, *var)?;
                let mut v = *c;
                for a in zeros {
                    let den = ONE - a.conj() * x;
                    if den.norm() < 1e-15 {
                        return Err(Error::Pole { at: z.to_vec() });
                    }
                    v *= (x - a) / den;
                }
                Ok(v)
            }
            FunctionSpec::Rational { num, den, var } => {
                let x = coord(z, *var)?;
                let d = poly_eval(den, x);
                let scale = poly_abs_eval(den, x.norm()).max(f64::MIN_POSITIVE);
                if d.norm() <= 1e-14 * scale {
                    return Err(Error::Pole { at: z.to_vec() });
                }
                Ok(poly_eval(num, x) / d)
            }
            FunctionSpec::Taylor { coeffs, var } => Ok(poly_eval(coeffs, coord(z, *var)?)),
            FunctionSpec::HerglotzFromMeasure { measure, imag } => {
                Ok(Complex64::new(0.0, *imag) + crate::kernels::herglotz_integral(measure, z)?)
            }
            FunctionSpec::Matrix { .. } => {
                let m = self.eval_matrix(z)?;
                if m.nrows() != 1 {
                    return Err(Error::validation("scalar evaluation of a matrix-valued spec"));
                }
                Ok(m[(0, 0)])
            }
            FunctionSpec::Poly { terms } => {
                let mut acc = ZERO;
                for t in terms {
                    let mut m = t.coef;
                    for (j, &e) in t.exps.iter().enumerate() {
                        if e > 0 {
                            m *= coord(z, j)?.powu(e);
                        }
                    }
                    acc += m;
                }
                Ok(acc)
            }
            FunctionSpec::Sum { terms } => terms.iter().try_fold(ZERO, |acc, f| Ok(acc + f.eval_scalar(z)?)),
            FunctionSpec::Product { factors } => factors.iter().try_fold(ONE, |acc, f| Ok(acc * f.eval_scalar(z)?)),
            FunctionSpec::Scaled { factor, f } => Ok(factor * f.eval_scalar(z)?),
            FunctionSpec::Const { value } => Ok(*value),
            FunctionSpec::Dilate { scales, f } => f.eval_scalar(&dilate_point(scales, z)),
        }
    }

    /// Matrix value at `z`; scalar specs give a 1×1 matrix.
    pub fn eval_matrix(&self, z: &[Complex64]) -> Result<MatrixValue> {
        match self {
            FunctionSpec::Matrix { entries } => {
                let n = entries.len();
                let mut m = DMatrix::zeros(n, n);
                for (i, row) in entries.iter().enumerate() {
                    if row.len() != n {
                        return Err(Error::validation("matrix spec is not square"));
                    }
                    for (j, e) in row.iter().enumerate() {
                        m[(i, j)] = e.eval_scalar(z)?;
                    }
                }
                Ok(m)
            }
            FunctionSpec::Sum { terms } if self.is_matrix() => {
                let n = self.dim();
                let mut acc = DMatrix::zeros(n, n);
                for f in terms {
                    acc += broadcast(f.eval_matrix(z)?, n)?;
                }
                Ok(acc)
            }
            FunctionSpec::Product { factors } if self.is_matrix() => {
                let n = self.dim();
                let mut acc = DMatrix::identity(n, n);
                for f in factors {
                    acc *= broadcast(f.eval_matrix(z)?, n)?;
                }
                Ok(acc)
            }
            FunctionSpec::Scaled { factor, f } if self.is_matrix() => Ok(f.eval_matrix(z)? * *factor),
            FunctionSpec::Dilate { scales, f } if self.is_matrix() => f.eval_matrix(&dilate_point(scales, z)),
            _ => Ok(DMatrix::from_element(1, 1, self.eval_scalar(z)?)),
        }
    }

    /// Convenience for univariate specs.
    pub fn at(&self, z: Complex64) -> Result<Complex64> {
        self.eval_scalar(&[z])
    }
}

fn real_vec(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

fn coord(z: &[Complex64], var: usize) -> Result<Complex64> {
    z.get(var).copied().ok_or_else(|| {
        Error::validation(format!("spec reads coordinate {var} but the point has {} coordinates", z.len()))
    })
}

fn dilate_point(scales: &[f64], z: &[Complex64]) -> Vec<Complex64> {
    z.iter().enumerate().map(|(j, &x)| x * scales.get(j).copied().unwrap_or(1.0)).collect()
}

fn broadcast(m: MatrixValue, n: usize) -> Result<MatrixValue> {
    if m.nrows() == n {
        Ok(m)
    } else if m.nrows() == 1 {
        Ok(DMatrix::identity(n, n) * m[(0, 0)])
    } else {
        Err(Error::validation("matrix operands have different sizes"))
    }
}

/// Horner evaluation of `Σ c_k x^k`.
pub fn poly_eval(coeffs: &[Complex64], x: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(ZERO, |acc, &c| acc * x + c)
}

fn poly_abs_eval(coeffs: &[Complex64], r: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
}

pub fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn poly_add(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let n = a.len().max(b.len());
    (0..n).map(|k| a.get(k).copied().unwrap_or(ZERO) + b.get(k).copied().unwrap_or(ZERO)).collect()
}

pub fn poly_derivative(a: &[Complex64]) -> Vec<Complex64> {
    a.iter().enumerate().skip(1).map(|(k, &c)| c * k as f64).collect()
}

/// Drops trailing coefficients that are negligible relative to the largest.
pub fn poly_trim(a: &[Complex64]) -> Vec<Complex64> {
    let scale = a.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut n = a.len();
    while n > 1 && a[n - 1].norm() <= 1e-14 * scale {
        n -= 1;
    }
    a[..n].to_vec()
}

/// Roots of `Σ c_k x^k` as eigenvalues of the companion matrix.
pub fn poly_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let c = poly_trim(coeffs);
    let n = c.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = c[n];
    if lead.norm() == 0.0 {
        return Err(Error::validation("polynomial is identically zero"));
    }
    let mut comp = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        comp[(i, i - 1)] = ONE;
    }
    for i in 0..n {
        comp[(i, n - 1)] = -c[i] / lead;
    }
    let ev = comp
        .schur()
        .eigenvalues()
        .ok_or(Error::RootSolver { residual: f64::INFINITY })?;
    Ok(ev.iter().copied().collect())
}

/// Numerator and denominator (increasing powers) of a finite Blaschke
/// product.
pub fn blaschke_polys(c: Complex64, zeros: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut num = vec![c];
    let mut den = vec![ONE];
    for &a in zeros {
        num = poly_mul(&num, &[-a, ONE]);
        den = poly_mul(&den, &[ONE, -a.conj()]);
    }
    (num, den)
}

/// Power series of `num/den` to order `m`.
pub fn series_divide(num: &[Complex64], den: &[Complex64], m: usize) -> Result<Vec<Complex64>> {
    let d0 = den.first().copied().unwrap_or(ZERO);
    if d0.norm() == 0.0 {
        return Err(Error::Pole { at: vec![ZERO] });
    }
    let mut out = vec![ZERO; m + 1];
    for k in 0..=m {
        let mut acc = num.get(k).copied().unwrap_or(ZERO);
        for j in 1..=k.min(den.len().saturating_sub(1)) {
            acc -= den[j] * out[k - j];
        }
        out[k] = acc / d0;
    }
    Ok(out)
}

/// Taylor coefficients `a_0..a_m` of a scalar univariate spec at the origin.
///
/// Exact for `taylor`, `rational` and `blaschke`; other kinds are sampled on
/// the circle of radius 1/2 and transformed.
pub fn taylor_coefficients(spec: &FunctionSpec, m: usize) -> Result<Vec<Complex64>> {
    match spec {
        FunctionSpec::Taylor { coeffs, .. } => {
            Ok((0..=m).map(|k| coeffs.get(k).copied().unwrap_or(ZERO)).collect())
        }
        FunctionSpec::Rational { num, den, .. } => series_divide(num, den, m),
        FunctionSpec::Blaschke { c, zeros, .. } => {
            let (num, den) = blaschke_polys(*c, zeros);
            series_divide(&num, &den, m)
        }
        _ if spec.is_matrix() => Err(Error::validation("taylor coefficients of a matrix-valued spec")),
        _ => {
            let rho: f64 = 0.5;
            let grid = (4 * (m + 1)).next_power_of_two().max(1024);
            let samples: Vec<Complex64> = (0..grid)
                .map(|k| spec.at(crate::numerics::grid_point(k, grid) * rho))
                .collect::<Result<_>>()?;
            let table = crate::numerics::fourier_coefficients(&samples, m)?;
            Ok((0..=m).map(|k| table.get(&[k as i64]).unwrap() / rho.powi(k as i32)).collect())
        }
    }
}

fn norm1(m: &MatrixValue) -> f64 {
    (0..m.ncols()).map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// `(I + F)^{-1}` together with its reciprocal condition number in the
/// 1-norm.
fn inverse_with_rcond(a: &MatrixValue) -> (Option<MatrixValue>, f64) {
    let lu = a.clone().lu();
    match lu.try_inverse() {
        Some(inv) => {
            let denom = norm1(a) * norm1(&inv);
            let rcond = if denom > 0.0 && denom.is_finite() { 1.0 / denom } else { 0.0 };
            (Some(inv), rcond)
        }
        None => (None, 0.0),
    }
}

/// `θ = (I − F)(I + F)^{-1}`.
pub fn cayley(f: &MatrixValue) -> Result<MatrixValue> {
    let n = f.nrows();
    if f.ncols() != n {
        return Err(Error::validation("Cayley transform of a non-square matrix"));
    }
    let id = DMatrix::<Complex64>::identity(n, n);
    let (inv, rcond) = inverse_with_rcond(&(&id + f));
    match inv {
        Some(inv) if rcond >= CAYLEY_RCOND => Ok((&id - f) * inv),
        _ => Err(Error::CayleySingular { rcond }),
    }
}

/// `f = (I − Θ)(I + Θ)^{-1}`; the Cayley transform is an involution.
pub fn inverse_cayley(theta: &MatrixValue) -> Result<MatrixValue> {
    cayley(theta)
}

pub fn cayley_scalar(f: Complex64) -> Result<Complex64> {
    Ok(cayley(&DMatrix::from_element(1, 1, f))?[(0, 0)])
}

pub fn inverse_cayley_scalar(theta: Complex64) -> Result<Complex64> {
    cayley_scalar(theta)
}

/// Largest singular value.
pub fn operator_norm(m: &MatrixValue) -> f64 {
    if m.nrows() == 1 && m.ncols() == 1 {
        return m[(0, 0)].norm();
    }
    m.singular_values().max()
}

/// Points `r e^{iθ}` on a polar grid with `radii` equally spaced radii in
/// `(0, radius]` and `angles` angles each, plus the origin.
pub fn disc_sample_points(radius: f64, radii: usize, angles: usize) -> Vec<Complex64> {
    let mut pts = vec![ZERO];
    for i in 1..=radii {
        let r = radius * i as f64 / radii as f64;
        for k in 0..angles {
            pts.push(crate::numerics::grid_point(k, angles) * r);
        }
    }
    pts
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchurReport {
    /// Max operator norm over the interior samples.
    pub interior_max_norm: f64,
    #[serde(with = "cx")]
    pub interior_witness: Complex64,
    /// Max of `|‖F(ζ)‖ − 1|` (scalar) or `‖F*F − I‖` (matrix) on the
    /// boundary grid.
    pub boundary_max_deviation: f64,
    pub is_schur: bool,
    pub is_inner: bool,
}

/// Samples `‖F‖` inside the disc and the unitarity defect on the circle.
pub fn schur_check(spec: &FunctionSpec, boundary_grid: usize, interior: &[Complex64], tol: f64) -> SchurReport {
    let mut interior_max_norm: f64 = 0.0;
    let mut interior_witness = ZERO;
    for &z in interior {
        let n = spec.eval_matrix(&[z]).map(|m| operator_norm(&m)).unwrap_or(f64::INFINITY);
        if n > interior_max_norm || n.is_nan() {
            interior_max_norm = n;
            interior_witness = z;
        }
    }
    let mut boundary_max_deviation: f64 = 0.0;
    for k in 0..boundary_grid {
        let zeta = crate::numerics::grid_point(k, boundary_grid);
        let dev = match spec.eval_matrix(&[zeta]) {
            Ok(m) if m.nrows() == 1 => (m[(0, 0)].norm() - 1.0).abs(),
            Ok(m) => {
                let n = m.nrows();
                operator_norm(&(m.adjoint() * &m - DMatrix::identity(n, n)))
            }
            Err(_) => f64::INFINITY,
        };
        boundary_max_deviation = boundary_max_deviation.max(dev);
    }
    SchurReport {
        interior_max_norm,
        interior_witness,
        boundary_max_deviation,
        is_schur: interior_max_norm <= 1.0 + tol,
        is_inner: boundary_max_deviation <= tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::min_eig;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn scalar(v: Complex64) -> MatrixValue {
        DMatrix::from_element(1, 1, v)
    }

    #[test]
    fn evaluation_examples() {
        let b = FunctionSpec::blaschke(ONE, vec![ZERO]);
        assert_abs_diff_eq!(b.at(c(0.5, 0.0)).unwrap().re, 0.5, epsilon = 1e-15);
        let h = FunctionSpec::herglotz_unit(0);
        assert_abs_diff_eq!(h.at(c(0.5, 0.0)).unwrap().re, 3.0, epsilon = 1e-15);
        let t = FunctionSpec::taylor(vec![ONE, c(3.0, 0.0)]);
        assert_abs_diff_eq!(t.at(c(-0.5, 0.0)).unwrap().re, -0.5, epsilon = 1e-15);
    }

    #[test]
    fn pole_is_reported() {
        let h = FunctionSpec::herglotz_unit(0);
        assert!(matches!(h.at(ONE), Err(Error::Pole { .. })));
    }

    #[test]
    fn json_forms() {
        let f: FunctionSpec = serde_json::from_str(r#"{"kind":"rational","num":[1,1],"den":[1,-1]}"#).unwrap();
        assert_eq!(f, FunctionSpec::herglotz_unit(0));
        let b: FunctionSpec = serde_json::from_str(r#"{"kind":"blaschke","c":[1,0],"zeros":[[0.5,0.1]]}"#).unwrap();
        let back: FunctionSpec = serde_json::from_str(&serde_json::to_string(&b).unwrap()).unwrap();
        assert_eq!(b, back);
        let m: FunctionSpec = serde_json::from_str(
            r#"{"kind":"matrix","entries":[[{"kind":"taylor","coeffs":[0,1]},{"kind":"const","value":0}],
                                          [{"kind":"const","value":0},{"kind":"const","value":0}]]}"#,
        )
        .unwrap();
        assert_eq!(m.dim(), 2);
        assert!(m.validate().is_ok());
    }

    #[test]
    fn validation_catches_bad_specs() {
        assert!(FunctionSpec::blaschke(c(2.0, 0.0), vec![]).validate().is_err());
        assert!(FunctionSpec::blaschke(ONE, vec![c(1.0, 0.0)]).validate().is_err());
        let flagged = FunctionSpec::Blaschke { c: ONE, zeros: vec![c(0.5, 0.0)], vanish_at_origin: true, var: 0 };
        assert!(flagged.validate().is_err());
        let ragged = FunctionSpec::Matrix { entries: vec![vec![FunctionSpec::constant(ONE)], vec![]] };
        assert!(ragged.validate().is_err());
    }

    #[test]
    fn cayley_examples() {
        assert_abs_diff_eq!(cayley_scalar(ZERO).unwrap().re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(cayley_scalar(c(0.5, 0.0)).unwrap().re, 1.0 / 3.0, epsilon = 1e-15);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.5, 0.0), c(-0.5, 0.0)]));
        let t = cayley(&d).unwrap();
        assert_abs_diff_eq!(t[(0, 0)].re, 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t[(1, 1)].re, 3.0, epsilon = 1e-14);
        assert!(t[(0, 1)].norm() < 1e-15);

        assert!(inverse_cayley_scalar(ONE).unwrap().norm() < 1e-15);
        assert_abs_diff_eq!(inverse_cayley_scalar(c(1.0 / 3.0, 0.0)).unwrap().re, 0.5, epsilon = 1e-15);
        let v = inverse_cayley_scalar(c(0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(v.re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v.im, -1.0, epsilon = 1e-15);
    }

    #[test]
    fn cayley_singular() {
        assert!(matches!(cayley(&scalar(c(-1.0, 0.0))), Err(Error::CayleySingular { .. })));
    }

    #[test]
    fn schur_check_examples() {
        let interior = disc_sample_points(0.9, 9, 32);
        let b = FunctionSpec::blaschke(ONE, vec![ZERO]);
        let r = schur_check(&b, 256, &interior, 1e-12);
        assert!(r.interior_max_norm < 1.0 && r.is_schur);
        assert!(r.boundary_max_deviation < 1e-15);

        let f = FunctionSpec::taylor(vec![ONE, c(3.0, 0.0)]);
        let r = schur_check(&f, 256, &interior, 1e-12);
        assert!(!r.is_schur);
        assert_abs_diff_eq!(r.interior_max_norm, 3.7, epsilon = 1e-12);

        let m = FunctionSpec::taylor(vec![ZERO, ZERO, ZERO, ZERO, ZERO, ZERO, ZERO, ZERO, c(-1.0, 0.0)]);
        let r = schur_check(&m, 1024, &interior, 1e-12);
        assert!(r.boundary_max_deviation <= 1e-14);
    }

    #[test]
    fn taylor_coefficients_of_rational_and_sampled() {
        let h = FunctionSpec::herglotz_unit(0);
        let a = taylor_coefficients(&h, 5).unwrap();
        assert_abs_diff_eq!(a[0].re, 1.0, epsilon = 1e-15);
        for k in 1..=5 {
            assert_abs_diff_eq!(a[k].re, 2.0, epsilon = 1e-15);
        }
        let s = FunctionSpec::Sum { terms: vec![h.clone(), FunctionSpec::constant(ONE)] };
        let a = taylor_coefficients(&s, 6).unwrap();
        assert_abs_diff_eq!(a[0].re, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a[6].re, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn roots_of_cubic() {
        // z³ + 1 has roots at the cube roots of −1.
        let r = poly_roots(&[ONE, ZERO, ZERO, ONE]).unwrap();
        for x in r {
            assert!((x.powu(3) + ONE).norm() < 1e-13);
        }
    }

    fn contraction(vals: &[f64]) -> MatrixValue {
        let m = DMatrix::from_fn(3, 3, |i, j| c(vals[2 * (3 * i + j)], vals[2 * (3 * i + j) + 1]));
        let n = operator_norm(&m);
        m * Complex64::new(0.95 / n.max(1e-3), 0.0)
    }

    proptest! {
        #[test]
        fn cayley_is_an_involution(vals in proptest::collection::vec(-1.0f64..1.0, 18)) {
            let f = contraction(&vals);
            let back = inverse_cayley(&cayley(&f).unwrap()).unwrap();
            prop_assert!((back - &f).norm() < 1e-12);
        }

        #[test]
        fn cayley_of_contraction_has_psd_real_part(vals in proptest::collection::vec(-1.0f64..1.0, 18)) {
            let t = cayley(&contraction(&vals)).unwrap();
            let re = (&t + t.adjoint()) * c(0.5, 0.0);
            prop_assert!(min_eig(&re).unwrap() >= -1e-10);
        }

        #[test]
        fn blaschke_modulus(zr in proptest::collection::vec(0.0f64..0.95, 4),
                            za in proptest::collection::vec(0.0f64..6.3, 4),
                            r in 0.0f64..1.0, t in 0.0f64..6.3) {
            let zeros: Vec<_> = zr.iter().zip(&za).map(|(&m, &a)| Complex64::from_polar(m, a)).collect();
            let b = FunctionSpec::blaschke(Complex64::from_polar(1.0, 0.3), zeros);
            let inside = b.at(Complex64::from_polar(r, t)).unwrap().norm();
            prop_assert!(inside <= 1.0 + 1e-12);
            let edge = b.at(Complex64::from_polar(1.0, t)).unwrap().norm();
            prop_assert!((edge - 1.0).abs() <= 1e-12);
        }
    }
}
