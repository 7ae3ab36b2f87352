use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::convex_fn::ConvexFn;
use crate::error::{Error, Result};
use crate::geometry::SetRef;
use crate::tolerance::Tolerances;
use crate::vector::{Matrix, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Elementwise {
    Reciprocal,
    Sin,
    Cos,
    Exp,
}

impl Elementwise {
    fn apply(self, t: f64) -> f64 {
        match self {
            Elementwise::Reciprocal => 1.0 / t,
            Elementwise::Sin => t.sin(),
            Elementwise::Cos => t.cos(),
            Elementwise::Exp => t.exp(),
        }
    }
}

/// Bilinear maps of norm one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BilinearForm {
    /// `B(t, v) = t v` with scalar `t`.
    ScalarVector,
    /// `B(u, v) = <u, v>`
    Inner,
}

impl BilinearForm {
    pub fn norm(self) -> f64 {
        1.0
    }

    pub fn apply(self, u: &Vector, v: &Vector) -> Result<Vector> {
        match self {
            BilinearForm::ScalarVector => {
                u.check_dim(1)?;
                Ok(v.scale(u[0]))
            }
            BilinearForm::Inner => {
                v.check_dim(u.dim())?;
                Ok(Vector::from_slice(&[u.dot(v)]))
            }
        }
    }
}

pub type MapClosure = Arc<dyn Fn(&Vector) -> Result<Vector> + Send + Sync>;

/// A mapping known only as a closure. Trees containing one cannot be serialized.
#[derive(Clone)]
pub struct CustomMap {
    pub name: String,
    pub out_dim: usize,
    pub f: MapClosure,
}

impl fmt::Debug for CustomMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CustomMap({})", self.name)
    }
}

impl Serialize for CustomMap {
    fn serialize<S: serde::Serializer>(&self, _: S) -> std::result::Result<S::Ok, S::Error> {
        Err(serde::ser::Error::custom(format!("custom mapping '{}' has no structured form", self.name)))
    }
}

impl<'de> Deserialize<'de> for CustomMap {
    fn deserialize<D: serde::Deserializer<'de>>(_: D) -> std::result::Result<Self, D::Error> {
        Err(serde::de::Error::custom("custom mappings cannot be read from text"))
    }
}

/// A mapping R^n -> R^m as an expression tree.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "map", rename_all = "snake_case")]
pub enum Mapping {
    Identity,
    Affine {
        matrix: Matrix,
        offset: Vector,
    },
    /// Componentwise convex functions.
    Convex {
        components: Vec<ConvexFn>,
    },
    Compose {
        outer: Box<Mapping>,
        inner: Box<Mapping>,
    },
    Elementwise {
        func: Elementwise,
        inner: Box<Mapping>,
    },
    Bilinear {
        form: BilinearForm,
        left: Box<Mapping>,
        right: Box<Mapping>,
    },
    /// Concatenated outputs.
    Stack {
        parts: Vec<Mapping>,
    },
    Difference {
        plus: Box<Mapping>,
        minus: Box<Mapping>,
    },
    /// `inner` evaluated at the nearest point of `set`.
    OnClosure {
        inner: Box<Mapping>,
        set: SetRef,
    },
    /// The first piece whose set contains the point; the last piece otherwise.
    Piecewise {
        pieces: Vec<(SetRef, Mapping)>,
    },
    Custom(CustomMap),
}

impl Mapping {
    pub fn scalar(f: ConvexFn) -> Self {
        Mapping::Convex { components: vec![f] }
    }

    pub fn affine(matrix: Matrix, offset: Vector) -> Self {
        Mapping::Affine { matrix, offset }
    }

    /// `x -> x + c`
    pub fn shift(c: Vector) -> Self {
        Mapping::Affine {
            matrix: Matrix::identity(c.dim()),
            offset: c,
        }
    }

    pub fn custom(name: impl Into<String>, out_dim: usize, f: impl Fn(&Vector) -> Result<Vector> + Send + Sync + 'static) -> Self {
        Mapping::Custom(CustomMap {
            name: name.into(),
            out_dim,
            f: Arc::new(f),
        })
    }

    pub fn compose(outer: Mapping, inner: Mapping) -> Self {
        Mapping::Compose {
            outer: Box::new(outer),
            inner: Box::new(inner),
        }
    }

    pub fn elementwise(func: Elementwise, inner: Mapping) -> Self {
        Mapping::Elementwise {
            func,
            inner: Box::new(inner),
        }
    }

    pub fn bilinear(form: BilinearForm, left: Mapping, right: Mapping) -> Self {
        Mapping::Bilinear {
            form,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn eval(&self, x: &Vector) -> Result<Vector> {
        let y = match self {
            Mapping::Identity => x.clone(),
            Mapping::Affine { matrix, offset } => {
                x.check_dim(matrix.in_dim())?;
                &matrix.apply(x) + offset
            }
            Mapping::Convex { components } => Vector::raw(
                components
                    .iter()
                    .map(|f| f.eval(x))
                    .collect::<Result<Vec<_>>>()?,
            ),
            Mapping::Compose { outer, inner } => outer.eval(&inner.eval(x)?)?,
            Mapping::Elementwise { func, inner } => {
                let y = inner.eval(x)?;
                Vector::raw(y.coords().iter().map(|t| func.apply(*t)).collect())
            }
            Mapping::Bilinear { form, left, right } => form.apply(&left.eval(x)?, &right.eval(x)?)?,
            Mapping::Stack { parts } => {
                let mut out = Vec::new();
                for p in parts {
                    out.extend_from_slice(p.eval(x)?.coords());
                }
                Vector::raw(out)
            }
            Mapping::Difference { plus, minus } => {
                let a = plus.eval(x)?;
                let b = minus.eval(x)?;
                b.check_dim(a.dim())?;
                &a - &b
            }
            Mapping::OnClosure { inner, set } => {
                let p = set.0.project(x, Tolerances::global().dist)?;
                inner.eval(&p.point)?
            }
            Mapping::Piecewise { pieces } => {
                let tol = Tolerances::global().dist;
                let piece = pieces
                    .iter()
                    .find(|(s, _)| s.0.contains(x, tol))
                    .or(pieces.last())
                    .ok_or_else(|| Error::invalid("piecewise mapping without pieces"))?;
                piece.1.eval(x)?
            }
            Mapping::Custom(c) => (c.f)(x)?,
        };
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::NonFinite {
                point: x.coords().to_vec(),
            })
        }
    }
}
