use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of R^n with the Euclidean norm.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid("vector must have positive dimension"));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::invalid(format!("non-finite coordinate {bad}")));
        }
        Ok(Vector(coords))
    }

    /// Unchecked constructor for internal arithmetic.
    pub(crate) fn raw(coords: Vec<f64>) -> Self {
        Vector(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim])
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        Vector(v)
    }

    pub fn from_slice(coords: &[f64]) -> Self {
        Vector(coords.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        // hypot-style scaling is unnecessary at the magnitudes used here
        self.norm_sq().sqrt()
    }

    pub fn dist(&self, other: &Vector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&self, c: f64) -> Vector {
        Vector(self.0.iter().map(|a| a * c).collect())
    }

    /// `self + c * other`
    pub fn axpy(&self, c: f64, other: &Vector) -> Vector {
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| a + c * b).collect())
    }

    /// `(1 - t) * self + t * other`
    pub fn lerp(&self, other: &Vector, t: f64) -> Vector {
        Vector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| (1.0 - t) * a + t * b)
                .collect(),
        )
    }

    pub fn midpoint(&self, other: &Vector) -> Vector {
        Vector(self.0.iter().zip(&other.0).map(|(a, b)| 0.5 * (a + b)).collect())
    }

    pub fn normalized(&self) -> Option<Vector> {
        let n = self.norm();
        (n > 0.0).then(|| self.scale(1.0 / n))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() == dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: dim,
                got: self.dim(),
            })
        }
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        Vector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &Vector {
    type Output = Vector;
    fn mul(self, c: f64) -> Vector {
        self.scale(c)
    }
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Vector(v)
    }
}

/// Dense row-major linear map R^n -> R^m.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    pub rows: Vec<Vector>,
}

impl Matrix {
    pub fn new(rows: Vec<Vector>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::invalid("matrix needs at least one row"));
        };
        let n = first.dim();
        for r in &rows {
            r.check_dim(n)?;
        }
        Ok(Matrix { rows })
    }

    pub fn identity(n: usize) -> Self {
        Matrix {
            rows: (0..n).map(|i| Vector::basis(n, i)).collect(),
        }
    }

    pub fn out_dim(&self) -> usize {
        self.rows.len()
    }

    pub fn in_dim(&self) -> usize {
        self.rows[0].dim()
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        Vector(self.rows.iter().map(|r| r.dot(x)).collect())
    }

    pub fn apply_transpose(&self, y: &Vector) -> Vector {
        let mut out = Vector::zeros(self.in_dim());
        for (r, c) in self.rows.iter().zip(y.coords()) {
            out = out.axpy(*c, r);
        }
        out
    }

    /// Spectral norm via power iteration on A^T A.
    pub fn operator_norm(&self) -> f64 {
        let n = self.in_dim();
        let mut v = Vector(vec![1.0 / (n as f64).sqrt(); n]);
        let mut est = 0.0;
        for _ in 0..200 {
            let w = self.apply_transpose(&self.apply(&v));
            let nw = w.norm();
            if nw == 0.0 {
                // v fell into the kernel; try a basis vector instead
                let fallback = (0..n)
                    .map(|i| self.apply(&Vector::basis(n, i)).norm())
                    .fold(0.0, f64::max);
                return fallback;
            }
            let next = nw.sqrt();
            v = w.scale(1.0 / nw);
            if (next - est).abs() <= 1e-14 * next {
                return next;
            }
            est = next;
        }
        est
    }
}

/// Gram-Schmidt on the given vectors, dropping (near-)dependent ones.
pub fn orthonormalize(vectors: &[Vector], tol: f64) -> Vec<Vector> {
    let mut basis: Vec<Vector> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        // two passes for numerical orthogonality
        for _ in 0..2 {
            for b in &basis {
                w = w.axpy(-w.dot(b), b);
            }
        }
        let n = w.norm();
        if n > tol {
            basis.push(w.scale(1.0 / n));
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_and_empty() {
        assert!(Vector::new(vec![]).is_err());
        assert!(Vector::new(vec![1.0, f64::NAN]).is_err());
        assert!(Vector::new(vec![1.0, 2.0]).is_ok());
    }

    #[test]
    fn arithmetic() {
        let a = Vector::from_slice(&[3.0, 4.0]);
        let b = Vector::from_slice(&[1.0, 0.0]);
        assert_eq!(a.norm(), 5.0);
        assert_eq!(&a - &b, Vector::from_slice(&[2.0, 4.0]));
        assert_eq!(a.lerp(&b, 0.5), a.midpoint(&b));
        assert_eq!(a.dot(&b), 3.0);
    }

    #[test]
    fn operator_norm_of_diagonal() {
        let m = Matrix::new(vec![
            Vector::from_slice(&[3.0, 0.0]),
            Vector::from_slice(&[0.0, -5.0]),
        ])
        .unwrap();
        assert!((m.operator_norm() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn gram_schmidt_drops_dependent() {
        let b = orthonormalize(
            &[
                Vector::from_slice(&[1.0, 1.0, 0.0]),
                Vector::from_slice(&[2.0, 2.0, 0.0]),
                Vector::from_slice(&[0.0, 1.0, 0.0]),
            ],
            1e-12,
        );
        assert_eq!(b.len(), 2);
        assert!(b[0].dot(&b[1]).abs() < 1e-15);
    }
}
