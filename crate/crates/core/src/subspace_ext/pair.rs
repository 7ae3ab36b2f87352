use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ConvexSet;
use crate::vector::{orthonormalize, Matrix, Vector};

/// A subspace `Y ⊂ ℝⁿ` together with an orthonormal basis of its orthogonal complement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubspacePair {
    dim: usize,
    y_basis: Vec<Vector>,
    complement: Vec<Vector>,
}

impl SubspacePair {
    /// `Y = span(rows)`; the rows need not be orthonormal but must be independent.
    pub fn new(dim: usize, rows: &[Vector]) -> Result<Self> {
        for r in rows {
            r.check_dim(dim)?;
        }
        let y_basis = orthonormalize(rows, 1e-10);
        if y_basis.len() != rows.len() {
            return Err(Error::invalid("subspace basis rows are linearly dependent"));
        }
        if y_basis.is_empty() {
            return Err(Error::invalid("subspace must have positive dimension"));
        }
        let mut all = y_basis.clone();
        all.extend((0..dim).map(|i| Vector::basis(dim, i)));
        let complement = orthonormalize(&all, 1e-10).split_off(y_basis.len());
        Ok(SubspacePair {
            dim,
            y_basis,
            complement,
        })
    }

    /// `span{e_0, …, e_{k-1}}` in ℝⁿ.
    pub fn coordinate(dim: usize, k: usize) -> Result<Self> {
        if k > dim {
            return Err(Error::invalid("subspace dimension exceeds ambient dimension"));
        }
        SubspacePair::new(dim, &(0..k).map(|i| Vector::basis(dim, i)).collect::<Vec<_>>())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn y_dim(&self) -> usize {
        self.y_basis.len()
    }

    pub fn y_basis(&self) -> &[Vector] {
        &self.y_basis
    }

    pub fn complement(&self) -> &[Vector] {
        &self.complement
    }

    /// `Σ y_i b_i`.
    pub fn lift(&self, y: &Vector) -> Vector {
        combine(&self.y_basis, y, self.dim)
    }

    pub fn lift_perp(&self, z: &Vector) -> Vector {
        combine(&self.complement, z, self.dim)
    }

    /// Coordinates of the orthogonal projection onto `Y`.
    pub fn coords(&self, x: &Vector) -> Vector {
        Vector::from(self.y_basis.iter().map(|b| b.dot(x)).collect::<Vec<_>>())
    }

    pub fn perp_coords(&self, x: &Vector) -> Vector {
        Vector::from(self.complement.iter().map(|b| b.dot(x)).collect::<Vec<_>>())
    }

    pub fn perp_norm(&self, x: &Vector) -> f64 {
        self.perp_coords(x).norm()
    }

    /// Matrix of `x -> coords(x)`.
    pub fn coords_matrix(&self) -> Matrix {
        Matrix {
            rows: self.y_basis.clone(),
        }
    }

    /// Corners of the cube `[-nw, nw]^c` of the complement, in ambient coordinates.
    /// Their hulls `Z_n` increase and exhaust the complement.
    pub fn quotient_points(&self, n: usize, w: f64) -> Vec<Vector> {
        let c = self.complement.len();
        if n == 0 {
            return Vec::new();
        }
        if c == 0 {
            return vec![Vector::zeros(self.dim)];
        }
        (0..1usize << c)
            .map(|mask| {
                let z: Vec<f64> = (0..c)
                    .map(|i| if mask >> i & 1 == 1 { n as f64 * w } else { -(n as f64) * w })
                    .collect();
                self.lift_perp(&Vector::from(z))
            })
            .collect()
    }

    /// `A ∩ Y` in `Y` coordinates.
    pub fn slice(&self, set: &ConvexSet) -> Result<ConvexSet> {
        crate::geometry::slice_subspace(set, &self.y_basis)
    }
}

fn combine(basis: &[Vector], c: &Vector, dim: usize) -> Vector {
    basis
        .iter()
        .zip(c.coords())
        .fold(Vector::zeros(dim), |acc, (b, t)| acc.axpy(*t, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_is_orthonormal() {
        let p = SubspacePair::new(3, &[Vector::from_slice(&[1.0, 1.0, 0.0])]).unwrap();
        assert_eq!(p.complement().len(), 2);
        for a in p.y_basis().iter().chain(p.complement()) {
            for b in p.y_basis().iter().chain(p.complement()) {
                let d = a.dot(b);
                assert!(d.abs() < 1e-12 || (d - 1.0).abs() < 1e-12);
            }
        }
        let x = Vector::from_slice(&[1.0, 2.0, 3.0]);
        let back = &p.lift(&p.coords(&x)) + &p.lift_perp(&p.perp_coords(&x));
        assert!(back.dist(&x) < 1e-12);
    }

    #[test]
    fn cube_corners() {
        let p = SubspacePair::coordinate(3, 1).unwrap();
        let z = p.quotient_points(2, 1.0);
        assert_eq!(z.len(), 4);
        assert!(z.iter().all(|q| q[0] == 0.0 && q[1].abs() == 2.0 && q[2].abs() == 2.0));
        assert!(p.quotient_points(0, 1.0).is_empty());
    }
}
