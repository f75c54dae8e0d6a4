//! Serde helpers: complex numbers are written as `[re, im]` and read from
//! either `[re, im]` or a bare real number.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Deserialize)]
#[serde(untagged)]
enum Repr {
    Real(f64),
    Pair([f64; 2]),
}

impl From<Repr> for Complex64 {
    fn from(r: Repr) -> Self {
        match r {
            Repr::Real(x) => Complex64::new(x, 0.0),
            Repr::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Serialize)]
struct Pair([f64; 2]);

impl From<&Complex64> for Pair {
    fn from(c: &Complex64) -> Self {
        Pair([c.re, c.im])
    }
}

pub fn serialize<S: Serializer>(c: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    Pair::from(c).serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
    Repr::deserialize(d).map(Into::into)
}

pub mod vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(Pair::from))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        Ok(Vec::<Repr>::deserialize(d)?.into_iter().map(Into::into).collect())
    }
}

pub mod vec_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Vec<Complex64>], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|row| row.iter().map(Pair::from).collect::<Vec<_>>()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Complex64>>, D::Error> {
        Ok(Vec::<Vec<Repr>>::deserialize(d)?
            .into_iter()
            .map(|row| row.into_iter().map(Into::into).collect())
            .collect())
    }
}

/// A single point: either one complex number (circle/annulus) or a list of
/// coordinates (torus, symmetrized torus).
pub mod point {
    use super::*;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum PointRepr {
        Many(Vec<Repr>),
        One(Repr),
    }

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        if v.len() == 1 {
            Pair::from(&v[0]).serialize(s)
        } else {
            s.collect_seq(v.iter().map(Pair::from))
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        Ok(match PointRepr::deserialize(d)? {
            // `[a, b]` with two reals is ambiguous; treat it as one complex number.
            PointRepr::Many(v) if v.len() == 2 && v.iter().all(|r| matches!(r, Repr::Real(_))) => {
                let re = match v[0] {
                    Repr::Real(x) => x,
                    _ => unreachable!(),
                };
                let im = match v[1] {
                    Repr::Real(x) => x,
                    _ => unreachable!(),
                };
                vec![Complex64::new(re, im)]
            }
            PointRepr::Many(v) => v.into_iter().map(Into::into).collect(),
            PointRepr::One(r) => vec![r.into()],
        })
    }
}
