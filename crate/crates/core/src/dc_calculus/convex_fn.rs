use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::mapping::Mapping;
use crate::error::{Error, Result};
use crate::extension_ops::InfConvolution;
use crate::geometry::{SetRef, ConvexSet};
use crate::subspace_ext::{HartmanLimit, MajorantExtension, SeparatingSeries};
use crate::tolerance::Tolerances;
use crate::vector::{Matrix, Vector};

/// Scalar functions applied on top of a child node. `InvOneMinus`, `Exp` and `PosPart`
/// are nondecreasing and keep any convex child convex; the others need an affine child
/// (or, for `Reciprocal`, a concave positive one).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Univariate {
    Square,
    Cosh,
    Exp,
    Abs,
    PosPart,
    /// `1/(1 - t)` for `t < 1`
    InvOneMinus,
    /// `1/t` for `t > 0`
    Reciprocal,
}

impl Univariate {
    pub fn apply(self, t: f64) -> Option<f64> {
        Some(match self {
            Univariate::Square => t * t,
            Univariate::Cosh => t.cosh(),
            Univariate::Exp => t.exp(),
            Univariate::Abs => t.abs(),
            Univariate::PosPart => t.max(0.0),
            Univariate::InvOneMinus => {
                if t < 1.0 {
                    1.0 / (1.0 - t)
                } else {
                    return None;
                }
            }
            Univariate::Reciprocal => {
                if t > 0.0 {
                    1.0 / t
                } else {
                    return None;
                }
            }
        })
    }
}

/// Closed-form suprema of affine families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `sup_t a_t(x, y)` with `a_t(x, y) = t^2 + 2t(x - t) + t^2 y`, equal to `x^2/(1 - y)` for `y < 1`.
    Strip,
}

impl Family {
    pub fn member(self, t: f64, x: &Vector) -> f64 {
        match self {
            Family::Strip => t * t + 2.0 * t * (x[0] - t) + t * t * x[1],
        }
    }

    pub fn closed_form(self, x: &Vector) -> Option<f64> {
        match self {
            Family::Strip => (x[1] < 1.0).then(|| x[0] * x[0] / (1.0 - x[1])),
        }
    }

    /// Maximizing parameter, where known.
    pub fn argmax(self, x: &Vector) -> Option<f64> {
        match self {
            Family::Strip => (x[1] < 1.0).then(|| x[0] / (1.0 - x[1])),
        }
    }

    /// Grid supremum over `ts`, the cross-validation oracle.
    pub fn grid_sup(self, x: &Vector, ts: impl IntoIterator<Item = f64>) -> f64 {
        ts.into_iter().map(|t| self.member(t, x)).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// A continuous convex function given as an expression tree.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum ConvexFn {
    Constant {
        value: f64,
    },
    Affine {
        w: Vector,
        b: f64,
    },
    Max {
        children: Vec<ConvexFn>,
    },
    Sum {
        children: Vec<ConvexFn>,
    },
    Scale {
        c: f64,
        child: Box<ConvexFn>,
    },
    DistToSet {
        set: SetRef,
    },
    /// `||A x + b||^power` with `power` 1 or 2; `A = I` when absent.
    NormOfAffine {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        matrix: Option<Matrix>,
        offset: Vector,
        power: u8,
    },
    /// Minkowski functional of `set` about `center`.
    Gauge {
        set: SetRef,
        center: Vector,
    },
    Univariate {
        func: Univariate,
        child: Box<ConvexFn>,
    },
    SupFamily {
        family: Family,
    },
    /// `child(A x + b)`
    Precompose {
        child: Box<ConvexFn>,
        matrix: Matrix,
        offset: Vector,
    },
    InfConvExtension(Arc<InfConvolution>),
    HartmanLimit(Arc<HartmanLimit>),
    MajorantExtension(Arc<MajorantExtension>),
    SeparatingSeries(Arc<SeparatingSeries>),
    /// `outer(F(x)) + weight * control(x)`, convex when `outer` is convex with
    /// Lipschitz constant at most `weight` and `control` controls `F`.
    ComposedWith {
        outer: Box<ConvexFn>,
        inner: Box<Mapping>,
        control: Box<ConvexFn>,
        weight: f64,
    },
    /// `coef * |F(x)|^2 + weight * control(x)`, convex when `weight >= 2 coef sup|F|`.
    MappingQuadratic {
        map: Box<Mapping>,
        coef: f64,
        control: Box<ConvexFn>,
        weight: f64,
    },
}

impl PartialEq for ConvexFn {
    fn eq(&self, other: &Self) -> bool {
        match (serde_json::to_value(self), serde_json::to_value(other)) {
            (Ok(a), Ok(b)) => a == b,
            _ => false,
        }
    }
}

fn outside(x: &Vector, reason: &str) -> Error {
    Error::OutsideDomain {
        point: x.coords().to_vec(),
        reason: reason.to_string(),
    }
}

impl ConvexFn {
    pub fn constant(value: f64) -> Self {
        ConvexFn::Constant { value }
    }

    pub fn affine(w: Vector, b: f64) -> Self {
        ConvexFn::Affine { w, b }
    }

    /// `||x - c||`
    pub fn norm_from(c: Vector) -> Self {
        ConvexFn::NormOfAffine {
            matrix: None,
            offset: c.scale(-1.0),
            power: 1,
        }
    }

    /// `||x - c||^2`
    pub fn squared_norm_from(c: Vector) -> Self {
        ConvexFn::NormOfAffine {
            matrix: None,
            offset: c.scale(-1.0),
            power: 2,
        }
    }

    pub fn dist_to(set: ConvexSet) -> Self {
        ConvexFn::DistToSet { set: SetRef(set) }
    }

    pub fn gauge(set: ConvexSet, center: Vector) -> Self {
        ConvexFn::Gauge {
            set: SetRef(set),
            center,
        }
    }

    pub fn max(children: Vec<ConvexFn>) -> Self {
        ConvexFn::Max { children }
    }

    pub fn sum(children: Vec<ConvexFn>) -> Self {
        ConvexFn::Sum { children }
    }

    pub fn scale(self, c: f64) -> Self {
        ConvexFn::Scale {
            c,
            child: Box::new(self),
        }
    }

    pub fn plus(self, other: ConvexFn) -> Self {
        match self {
            ConvexFn::Sum { mut children } => {
                children.push(other);
                ConvexFn::Sum { children }
            }
            f => ConvexFn::Sum {
                children: vec![f, other],
            },
        }
    }

    pub fn then(self, func: Univariate) -> Self {
        ConvexFn::Univariate {
            func,
            child: Box::new(self),
        }
    }

    pub fn strip() -> Self {
        ConvexFn::SupFamily {
            family: Family::Strip,
        }
    }

    pub fn precompose(self, matrix: Matrix, offset: Vector) -> Self {
        ConvexFn::Precompose {
            child: Box::new(self),
            matrix,
            offset,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ConvexFn::Constant { value } if *value == 0.0)
    }

    pub fn eval(&self, x: &Vector) -> Result<f64> {
        let v = self.eval_raw(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite {
                point: x.coords().to_vec(),
            })
        }
    }

    fn eval_raw(&self, x: &Vector) -> Result<f64> {
        Ok(match self {
            ConvexFn::Constant { value } => *value,
            ConvexFn::Affine { w, b } => {
                x.check_dim(w.dim())?;
                w.dot(x) + b
            }
            ConvexFn::Max { children } => {
                let mut m = f64::NEG_INFINITY;
                for c in children {
                    m = m.max(c.eval_raw(x)?);
                }
                m
            }
            ConvexFn::Sum { children } => {
                let mut s = 0.0;
                for c in children {
                    s += c.eval_raw(x)?;
                }
                s
            }
            ConvexFn::Scale { c, child } => {
                if *c == 0.0 {
                    0.0
                } else {
                    c * child.eval_raw(x)?
                }
            }
            ConvexFn::DistToSet { set } => set.0.project(x, Tolerances::global().dist)?.dist,
            ConvexFn::NormOfAffine {
                matrix,
                offset,
                power,
            } => {
                let y = match matrix {
                    Some(m) => &m.apply(x) + offset,
                    None => x + offset,
                };
                match power {
                    1 => y.norm(),
                    2 => y.norm_sq(),
                    p => return Err(Error::invalid(format!("norm power {p} not supported"))),
                }
            }
            ConvexFn::Gauge { set, center } => set.0.gauge(center, x)?,
            ConvexFn::Univariate { func, child } => {
                let t = child.eval_raw(x)?;
                func.apply(t).ok_or_else(|| outside(x, "argument outside the univariate domain"))?
            }
            ConvexFn::SupFamily { family } => {
                x.check_dim(2)?;
                family
                    .closed_form(x)
                    .ok_or_else(|| outside(x, "supremum is infinite"))?
            }
            ConvexFn::Precompose {
                child,
                matrix,
                offset,
            } => child.eval_raw(&(&matrix.apply(x) + offset))?,
            ConvexFn::InfConvExtension(f) => f.eval(x)?,
            ConvexFn::HartmanLimit(g) => g.eval(x)?,
            ConvexFn::MajorantExtension(f) => f.eval(x)?,
            ConvexFn::SeparatingSeries(f) => f.eval(x)?,
            ConvexFn::ComposedWith {
                outer,
                inner,
                control,
                weight,
            } => {
                let y = inner.eval(x)?;
                outer.eval_raw(&y)? + if *weight == 0.0 { 0.0 } else { weight * control.eval_raw(x)? }
            }
            ConvexFn::MappingQuadratic {
                map,
                coef,
                control,
                weight,
            } => {
                let y = map.eval(x)?;
                coef * y.norm_sq() + if *weight == 0.0 { 0.0 } else { weight * control.eval_raw(x)? }
            }
        })
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::NotSerializable(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<ConvexFn> {
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("function spec: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector {
        Vector::from_slice(c)
    }

    #[test]
    fn basic_nodes() {
        let f = ConvexFn::max(vec![
            ConvexFn::affine(v(&[1.0, 0.0]), 0.0),
            ConvexFn::squared_norm_from(v(&[0.0, 0.0])),
        ]);
        assert_eq!(f.eval(&v(&[0.5, 0.0])).unwrap(), 0.5);
        assert_eq!(f.eval(&v(&[2.0, 0.0])).unwrap(), 4.0);
        let g = ConvexFn::norm_from(v(&[0.0, 0.0])).then(Univariate::InvOneMinus);
        assert_eq!(g.eval(&v(&[0.5, 0.0])).unwrap(), 2.0);
        assert!(g.eval(&v(&[1.5, 0.0])).is_err());
    }

    #[test]
    fn strip_family_matches_grid() {
        let x = v(&[2.0, -1.0]);
        let grid = Family::Strip.grid_sup(&x, (-4000..=4000).map(|i| i as f64 * 1e-3));
        assert!((grid - 2.0).abs() < 1e-6);
        assert_eq!(ConvexFn::strip().eval(&x).unwrap(), 2.0);
    }

    #[test]
    fn json_round_trip() {
        let f = ConvexFn::dist_to(crate::geometry::ConvexSet::ball(v(&[0.0, 0.0]), 1.0).unwrap()).plus(ConvexFn::strip());
        let text = f.to_json().unwrap();
        let g = ConvexFn::from_json(&text).unwrap();
        assert_eq!(f, g);
        assert_eq!(g.eval(&v(&[3.0, 0.0])).unwrap(), 11.0);
    }
}
