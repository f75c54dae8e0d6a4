//! Shared fixtures for the benchmarks.

use herglotz_core::{Atom, Boundary, BoundaryMeasure, Complex64, FunctionSpec, HerglotzDiscRep};

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `(1+z)/(1−z)` in variable `v`.
pub fn cayley_unit(v: usize) -> FunctionSpec {
    FunctionSpec::herglotz_unit(v)
}

/// `(1+z²)/(1−z²)`: atoms of mass ½ at ±1.
pub fn two_atom() -> FunctionSpec {
    FunctionSpec::rational_real(&[1.0, 0.0, 1.0], &[1.0, 0.0, -1.0])
}

/// `½ Σ_j (1+z_j)/(1−z_j)` on the polydisc.
pub fn factor_sum(d: usize) -> FunctionSpec {
    FunctionSpec::scaled(c(1.0 / d as f64, 0.0), FunctionSpec::Sum { terms: (0..d).map(cayley_unit).collect() })
}

/// `diag((1+z)/(1−z), 1)`.
pub fn diag_matrix() -> FunctionSpec {
    let zero = FunctionSpec::constant(c(0.0, 0.0));
    FunctionSpec::Matrix {
        entries: vec![vec![cayley_unit(0), zero.clone()], vec![zero, FunctionSpec::constant(c(1.0, 0.0))]],
    }
}

/// Atomic probability measure on the circle with `k` atoms at golden-angle
/// positions and unequal weights.
pub fn golden_atoms(k: usize) -> HerglotzDiscRep {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let raw: Vec<f64> = (0..k).map(|j| 1.0 + (j % 3) as f64).collect();
    let total: f64 = raw.iter().sum();
    let atoms = raw
        .iter()
        .enumerate()
        .map(|(j, w)| Atom { point: vec![Complex64::from_polar(1.0, golden * j as f64)], weight: w / total })
        .collect();
    HerglotzDiscRep::new(BoundaryMeasure::atoms(Boundary::Circle, atoms).expect("valid atoms"), 0.25).expect("circle")
}

/// Points on a few circles inside the disc.
pub fn disc_points(n: usize) -> Vec<Complex64> {
    (0..n).map(|k| Complex64::from_polar(0.1 + 0.8 * (k % 7) as f64 / 7.0, 2.399 * k as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use herglotz_core::herglotz_disc::{eval_realization, eval_rep};

    #[test]
    fn fixtures_are_consistent() {
        let rep = golden_atoms(8);
        assert!((rep.measure.mass() - 1.0).abs() < 1e-14);
        for z in disc_points(10) {
            assert!(z.norm() < 0.95);
            assert!((eval_rep(&rep, z).unwrap() - eval_realization(&rep, z).unwrap()).norm() < 1e-12);
        }
        assert!((factor_sum(2).eval_scalar(&[c(0.0, 0.0), c(0.0, 0.0)]).unwrap() - 1.0).norm() < 1e-15);
        assert!((two_atom().at(c(0.5, 0.0)).unwrap().re - 1.25 / 0.75).abs() < 1e-14);
        assert_eq!(diag_matrix().dim(), 2);
    }
}
