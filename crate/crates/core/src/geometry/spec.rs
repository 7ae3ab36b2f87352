//! Structured-text form of convex sets.
//!
//! Generator sets use the bare form `{"points": [[..]], "balls": [{"center": [..], "radius": r}]}`.
//! Everything else carries a `"kind"` tag.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::generator::{Ball, GeneratorSet};
use super::set::{ConvexSet, Halfspace, ImplicitSet};
use crate::dc_calculus::ConvexFn;
use crate::error::{Error, Result};
use crate::vector::Vector;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallSpec {
    pub center: Vector,
    pub radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<Vec<Vector>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    #[serde(default)]
    pub points: Vec<Vector>,
    #[serde(default)]
    pub balls: Vec<BallSpec>,
}

/// Named builders for sets that only have a membership oracle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builder", rename_all = "snake_case", deny_unknown_fields)]
pub enum ImplicitSpec {
    /// `{x : f(x) < level}`, numerically its closure.
    Sublevel {
        function: ConvexFn,
        level: f64,
        interior_point: Vector,
        margin: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bounding_radius: Option<f64>,
    },
    /// Open Euclidean ball given only by membership.
    OpenBall { center: Vector, radius: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TaggedSpec {
    Empty { dim: usize },
    Ball { center: Vector, radius: f64 },
    Generators(GeneratorSpec),
    Implicit(ImplicitSpec),
    Polyhedron {
        halfspaces: Vec<Halfspace>,
        interior_point: Vector,
    },
    Intersection {
        parts: Vec<SetSpec>,
        #[serde(default)]
        halfspaces: Vec<Halfspace>,
        #[serde(default)]
        interior_point: Option<Vector>,
    },
    Scaled {
        base: Box<SetSpec>,
        center: Vector,
        factor: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SetSpec {
    Generators(GeneratorSpec),
    Tagged(TaggedSpec),
}

impl ImplicitSpec {
    pub fn build(&self) -> Result<ImplicitSet> {
        let set = match self {
            ImplicitSpec::Sublevel {
                function,
                level,
                interior_point,
                margin,
                bounding_radius,
            } => {
                let f = function.clone();
                let level = *level;
                ImplicitSet::new(
                    format!("sublevel<{level}"),
                    Arc::new(move |x: &Vector| f.eval(x).map_or(false, |v| v <= level)),
                    interior_point.clone(),
                    *margin,
                    bounding_radius.unwrap_or(f64::INFINITY),
                )?
            }
            ImplicitSpec::OpenBall { center, radius } => {
                let c = center.clone();
                let r = *radius;
                ImplicitSet::new(
                    "open_ball",
                    Arc::new(move |x: &Vector| x.dist(&c) <= r),
                    center.clone(),
                    r,
                    r,
                )?
            }
        };
        Ok(set.with_open(true).with_spec(self.clone()))
    }
}

impl GeneratorSpec {
    pub fn build(&self) -> Result<GeneratorSet> {
        let balls = self
            .balls
            .iter()
            .map(|b| match &b.span {
                None => Ball::new(b.center.clone(), b.radius),
                Some(dirs) => Ball::flat(b.center.clone(), b.radius, dirs),
            })
            .collect::<Result<Vec<_>>>()?;
        GeneratorSet::new(self.points.clone(), balls)
    }

    pub fn from_set(g: &GeneratorSet) -> Self {
        GeneratorSpec {
            points: g.point_generators().to_vec(),
            balls: g
                .ball_generators()
                .iter()
                .map(|b| BallSpec {
                    center: b.center.clone(),
                    radius: b.radius,
                    span: b.span.clone(),
                })
                .collect(),
        }
    }
}

impl SetSpec {
    pub fn build(&self) -> Result<ConvexSet> {
        match self {
            SetSpec::Generators(g) => Ok(ConvexSet::Generator(g.build()?)),
            SetSpec::Tagged(t) => match t {
                TaggedSpec::Empty { dim } => Ok(ConvexSet::Empty { dim: *dim }),
                TaggedSpec::Ball { center, radius } => ConvexSet::ball(center.clone(), *radius),
                TaggedSpec::Generators(g) => Ok(ConvexSet::Generator(g.build()?)),
                TaggedSpec::Implicit(s) => Ok(ConvexSet::Implicit(s.build()?)),
                TaggedSpec::Polyhedron {
                    halfspaces,
                    interior_point,
                } => ConvexSet::polyhedron(halfspaces.clone(), interior_point.clone()),
                TaggedSpec::Intersection {
                    parts,
                    halfspaces,
                    interior_point,
                } => ConvexSet::intersection(
                    parts.iter().map(SetSpec::build).collect::<Result<_>>()?,
                    halfspaces.clone(),
                    interior_point.clone(),
                ),
                TaggedSpec::Scaled {
                    base,
                    center,
                    factor,
                } => ConvexSet::scaled(base.build()?, center.clone(), *factor),
            },
        }
    }

    pub fn from_json(text: &str) -> Result<SetSpec> {
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("set spec: {e}")))
    }
}

impl ConvexSet {
    /// Structured form of the set. Implicit sets built from a bare closure have none.
    pub fn to_spec(&self) -> Result<SetSpec> {
        Ok(match self {
            ConvexSet::Empty { dim } => SetSpec::Tagged(TaggedSpec::Empty { dim: *dim }),
            ConvexSet::Generator(g) => SetSpec::Generators(GeneratorSpec::from_set(g)),
            ConvexSet::Implicit(s) => match s.spec() {
                Some(spec) => SetSpec::Tagged(TaggedSpec::Implicit(spec.clone())),
                None => {
                    return Err(Error::NotSerializable(format!(
                        "implicit set '{}' has no named builder",
                        s.label()
                    )))
                }
            },
            ConvexSet::Intersection(i) => SetSpec::Tagged(TaggedSpec::Intersection {
                parts: i.parts.iter().map(ConvexSet::to_spec).collect::<Result<_>>()?,
                halfspaces: i.halfspaces.clone(),
                interior_point: self.reference_point(),
            }),
            ConvexSet::Scaled {
                base,
                center,
                factor,
            } => SetSpec::Tagged(TaggedSpec::Scaled {
                base: Box::new(base.to_spec()?),
                center: center.clone(),
                factor: *factor,
            }),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(&self.to_spec()?).map_err(|e| Error::NotSerializable(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<ConvexSet> {
        SetSpec::from_json(text)?.build()
    }
}

/// A set embedded in a serializable tree, written out through its [`SetSpec`].
#[derive(Clone, Debug)]
pub struct SetRef(pub ConvexSet);

impl Serialize for SetRef {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.to_spec().map_err(serde::ser::Error::custom)?.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SetRef {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let spec = SetSpec::deserialize(d)?;
        spec.build().map(SetRef).map_err(serde::de::Error::custom)
    }
}

impl From<ConvexSet> for SetRef {
    fn from(s: ConvexSet) -> Self {
        SetRef(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bare_generator_form() {
        let s = ConvexSet::from_json(r#"{"points": [[3.0, 0.0]], "balls": [{"center": [0.0, 0.0], "radius": 1.0}]}"#)
            .unwrap();
        assert!(s.contains(&Vector::from_slice(&[2.0, 0.0]), 1e-9));
        let back = ConvexSet::from_json(&s.to_json().unwrap()).unwrap();
        assert_eq!(back.to_spec().unwrap(), s.to_spec().unwrap());
    }

    #[test]
    fn unknown_field_rejected() {
        assert!(SetSpec::from_json(r#"{"points": [[1.0]], "bals": []}"#).is_err());
    }

    #[test]
    fn tagged_polyhedron() {
        let s = ConvexSet::from_json(
            r#"{"kind": "polyhedron", "halfspaces": [{"normal": [0.0, 1.0], "offset": 0.0},
               {"normal": [0.0, -1.0], "offset": 1.0}], "interior_point": [0.0, -0.5]}"#,
        )
        .unwrap();
        assert!(!s.is_bounded());
        assert!(s.contains(&Vector::from_slice(&[100.0, -0.2]), 0.0));
    }

    #[test]
    fn closure_sets_are_not_serializable() {
        let s = ConvexSet::Implicit(
            ImplicitSet::new("anon", Arc::new(|_: &Vector| true), Vector::zeros(1), 1.0, f64::INFINITY).unwrap(),
        );
        assert!(matches!(s.to_json(), Err(Error::NotSerializable(_))));
    }
}
