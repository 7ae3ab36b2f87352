use std::fmt;
use std::sync::Arc;

use rand::Rng;

use super::generator::{GeneratorSet, Projection};
use super::spec::ImplicitSpec;
use crate::error::{Error, Result};
use crate::sampling;
use crate::tolerance::Tolerances;
use crate::vector::Vector;

/// `{x : <normal, x> <= offset}`
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Halfspace {
    pub normal: Vector,
    pub offset: f64,
}

impl Halfspace {
    pub fn new(normal: Vector, offset: f64) -> Result<Self> {
        if normal.norm() == 0.0 {
            return Err(Error::invalid("halfspace normal must be non-zero"));
        }
        Ok(Halfspace { normal, offset })
    }

    pub fn violation(&self, x: &Vector) -> f64 {
        (self.normal.dot(x) - self.offset) / self.normal.norm()
    }

    pub fn project(&self, x: &Vector) -> Vector {
        let excess = self.normal.dot(x) - self.offset;
        if excess <= 0.0 {
            x.clone()
        } else {
            x.axpy(-excess / self.normal.norm_sq(), &self.normal)
        }
    }

    /// Gauge of the halfspace about an interior `center`.
    fn gauge(&self, center: &Vector, x: &Vector) -> f64 {
        let slack = self.offset - self.normal.dot(center);
        (self.normal.dot(&(x - center)) / slack).max(0.0)
    }
}

pub type MembershipOracle = Arc<dyn Fn(&Vector) -> bool + Send + Sync>;

/// A convex set known only through a membership oracle.
#[derive(Clone)]
pub struct ImplicitSet {
    dim: usize,
    membership: MembershipOracle,
    interior_point: Vector,
    /// Radius of a ball around `interior_point` that lies inside the set.
    margin: f64,
    /// Radius of a ball around `interior_point` containing the set (may be infinite).
    bounding_radius: f64,
    open: bool,
    spec: Option<Box<ImplicitSpec>>,
    label: String,
}

impl fmt::Debug for ImplicitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ImplicitSet")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("interior_point", &self.interior_point)
            .field("margin", &self.margin)
            .field("bounding_radius", &self.bounding_radius)
            .finish()
    }
}

impl ImplicitSet {
    pub fn new(
        label: impl Into<String>,
        membership: MembershipOracle,
        interior_point: Vector,
        margin: f64,
        bounding_radius: f64,
    ) -> Result<Self> {
        if !(margin > 0.0) {
            return Err(Error::invalid("implicit set needs a positive interior margin"));
        }
        if !(bounding_radius > 0.0) {
            return Err(Error::invalid("bounding radius must be positive"));
        }
        if !membership(&interior_point) {
            return Err(Error::invalid("interior point rejected by the membership oracle"));
        }
        Ok(ImplicitSet {
            dim: interior_point.dim(),
            membership,
            interior_point,
            margin,
            bounding_radius,
            open: false,
            spec: None,
            label: label.into(),
        })
    }

    pub fn with_open(mut self, open: bool) -> Self {
        self.open = open;
        self
    }

    pub(crate) fn with_spec(mut self, spec: ImplicitSpec) -> Self {
        self.spec = Some(Box::new(spec));
        self
    }

    pub fn spec(&self) -> Option<&ImplicitSpec> {
        self.spec.as_deref()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn interior_point(&self) -> &Vector {
        &self.interior_point
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn bounding_radius(&self) -> f64 {
        self.bounding_radius
    }

    pub fn is_open(&self) -> bool {
        self.open
    }

    pub fn member(&self, x: &Vector) -> bool {
        (self.membership)(x)
    }
}

#[derive(Clone, Debug)]
pub struct Intersection {
    pub parts: Vec<ConvexSet>,
    pub halfspaces: Vec<Halfspace>,
    interior_point: Vector,
}

/// A convex subset of R^n.
#[derive(Clone, Debug)]
pub enum ConvexSet {
    Empty { dim: usize },
    Generator(GeneratorSet),
    Implicit(ImplicitSet),
    Intersection(Box<Intersection>),
    /// `center + factor * (base - center)`
    Scaled {
        base: Box<ConvexSet>,
        center: Vector,
        factor: f64,
    },
}

const DYKSTRA_MAX_ITER: usize = 20_000;
const RECESSION_SCALE: f64 = 1e-12;

impl ConvexSet {
    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        Ok(ConvexSet::Generator(GeneratorSet::ball(center, radius)?))
    }

    pub fn polyhedron(halfspaces: Vec<Halfspace>, interior_point: Vector) -> Result<Self> {
        ConvexSet::intersection(Vec::new(), halfspaces, Some(interior_point))
    }

    /// Intersection of sets and halfspaces. Without an explicit interior point, the
    /// reference points of the parts are tried in turn.
    pub fn intersection(
        parts: Vec<ConvexSet>,
        halfspaces: Vec<Halfspace>,
        interior_point: Option<Vector>,
    ) -> Result<Self> {
        let dim = parts
            .first()
            .map(ConvexSet::dim)
            .or_else(|| halfspaces.first().map(|h| h.normal.dim()))
            .or_else(|| interior_point.as_ref().map(Vector::dim))
            .ok_or_else(|| Error::invalid("empty intersection specification"))?;
        for p in &parts {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.dim(),
                });
            }
            if p.is_empty() {
                return Ok(ConvexSet::Empty { dim });
            }
        }
        for h in &halfspaces {
            h.normal.check_dim(dim)?;
        }
        let tmp = Intersection {
            parts,
            halfspaces,
            interior_point: Vector::zeros(dim),
        };
        let candidates: Vec<Vector> = match interior_point {
            Some(p) => vec![p],
            None => tmp.parts.iter().filter_map(ConvexSet::reference_point).collect(),
        };
        let tol = Tolerances::global().dist;
        let inside = |x: &Vector| {
            tmp.halfspaces.iter().all(|h| h.violation(x) < 0.0)
                && tmp.parts.iter().all(|p| p.contains(x, tol))
        };
        match candidates.into_iter().find(|c| inside(c)) {
            Some(c) => Ok(ConvexSet::Intersection(Box::new(Intersection {
                interior_point: c,
                ..tmp
            }))),
            None => Err(Error::invalid("intersection: no interior point supplied or found")),
        }
    }

    pub fn scaled(base: ConvexSet, center: Vector, factor: f64) -> Result<Self> {
        if !(factor > 0.0) || !factor.is_finite() {
            return Err(Error::invalid("scale factor must be positive"));
        }
        center.check_dim(base.dim())?;
        Ok(ConvexSet::Scaled {
            base: Box::new(base),
            center,
            factor,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Empty { dim } => *dim,
            ConvexSet::Generator(g) => g.dim(),
            ConvexSet::Implicit(s) => s.dim,
            ConvexSet::Intersection(i) => i.interior_point.dim(),
            ConvexSet::Scaled { center, .. } => center.dim(),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, ConvexSet::Empty { .. })
    }

    /// A point of the (relative) interior.
    pub fn reference_point(&self) -> Option<Vector> {
        match self {
            ConvexSet::Empty { .. } => None,
            ConvexSet::Generator(g) => Some(g.centroid()),
            ConvexSet::Implicit(s) => Some(s.interior_point.clone()),
            ConvexSet::Intersection(i) => Some(i.interior_point.clone()),
            ConvexSet::Scaled {
                base,
                center,
                factor,
            } => base
                .reference_point()
                .map(|r| center.axpy(*factor, &(&r - center))),
        }
    }

    /// A ball `(center, radius)` containing the set, if bounded.
    pub fn bounds(&self) -> Option<(Vector, f64)> {
        match self {
            ConvexSet::Empty { .. } => None,
            ConvexSet::Generator(g) => Some((g.centroid(), g.bounding_radius())),
            ConvexSet::Implicit(s) => s
                .bounding_radius
                .is_finite()
                .then(|| (s.interior_point.clone(), s.bounding_radius)),
            ConvexSet::Intersection(i) => i
                .parts
                .iter()
                .filter_map(ConvexSet::bounds)
                .min_by(|a, b| a.1.total_cmp(&b.1)),
            ConvexSet::Scaled {
                base,
                center,
                factor,
            } => base
                .bounds()
                .map(|(c, r)| (center.axpy(*factor, &(&c - center)), r * factor)),
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.is_empty() || self.bounds().is_some()
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        match self {
            ConvexSet::Empty { .. } => false,
            ConvexSet::Generator(g) => g.contains(x, tol),
            ConvexSet::Implicit(s) => s.member(x),
            ConvexSet::Intersection(i) => {
                i.halfspaces.iter().all(|h| h.violation(x) <= tol)
                    && i.parts.iter().all(|p| p.contains(x, tol))
            }
            ConvexSet::Scaled {
                base,
                center,
                factor,
            } => base.contains(&center.axpy(1.0 / factor, &(x - center)), tol / factor),
        }
    }

    /// Support function, where the representation supports it exactly.
    pub fn support(&self, dir: &Vector) -> Option<Result<(f64, Vector)>> {
        match self {
            ConvexSet::Generator(g) => Some(g.support(dir)),
            ConvexSet::Scaled {
                base,
                center,
                factor,
            } => base.support(dir).map(|r| {
                r.map(|(v, w)| {
                    let c = dir.dot(center);
                    (c + factor * (v - c), center.axpy(*factor, &(&w - center)))
                })
            }),
            _ => None,
        }
    }

    /// Euclidean projection onto the closure of the set.
    pub fn project(&self, x: &Vector, tol: f64) -> Result<Projection> {
        x.check_dim(self.dim())?;
        match self {
            ConvexSet::Empty { .. } => Ok(Projection {
                point: x.clone(),
                dist: f64::INFINITY,
            }),
            ConvexSet::Generator(g) => g.project(x, tol),
            ConvexSet::Implicit(_) => self.project_radial(x, tol),
            ConvexSet::Intersection(i) => i.project(x, tol),
            ConvexSet::Scaled {
                base,
                center,
                factor,
            } => {
                let y = center.axpy(1.0 / factor, &(x - center));
                let p = base.project(&y, tol / factor)?;
                Ok(Projection {
                    point: center.axpy(*factor, &(&p.point - center)),
                    dist: p.dist * factor,
                })
            }
        }
    }

    /// Minkowski functional of the set about `center` (assumed interior).
    /// Recession directions of unbounded sets give 0.
    pub fn gauge(&self, center: &Vector, x: &Vector) -> Result<f64> {
        x.check_dim(self.dim())?;
        let v = x - center;
        if v.norm() == 0.0 {
            return Ok(0.0);
        }
        match self {
            ConvexSet::Empty { .. } => Err(Error::invalid("gauge of the empty set")),
            ConvexSet::Generator(g) => {
                if let ([], [b]) = (g.point_generators(), g.ball_generators()) {
                    if b.is_full() {
                        return ball_gauge(&b.center, b.radius, center, x);
                    }
                }
                let tol = Tolerances::global();
                gauge_by_bisection(|y| g.contains(y, 0.0), center, x, tol.mink, None)
            }
            ConvexSet::Implicit(s) => {
                let tol = Tolerances::global().mink;
                let hint = s.bounding_radius.is_finite().then(|| {
                    // any point at distance > 2R from the interior point is outside
                    v.norm() / (2.0 * s.bounding_radius + center.dist(&s.interior_point))
                });
                gauge_by_bisection(|y| s.member(y), center, x, tol, hint)
            }
            ConvexSet::Intersection(i) => {
                let mut m = 0.0f64;
                for h in &i.halfspaces {
                    m = m.max(h.gauge(center, x));
                }
                for p in &i.parts {
                    m = m.max(p.gauge(center, x)?);
                }
                Ok(m)
            }
            ConvexSet::Scaled {
                base,
                center: c0,
                factor,
            } => {
                let c_base = c0.axpy(1.0 / factor, &(center - c0));
                base.gauge(&c_base, &c_base.axpy(1.0 / factor, &v))
            }
        }
    }

    /// Distance from `from` to the boundary along unit direction `u` (infinite on recession rays).
    pub fn radial_extent(&self, from: &Vector, u: &Vector) -> Result<f64> {
        let g = self.gauge(from, &(from + u))?;
        Ok(if g <= 0.0 { f64::INFINITY } else { 1.0 / g })
    }

    /// Nearest point through a radial parametrization of the boundary, for sets that
    /// only offer membership. The boundary point in direction `u` from the reference
    /// point is found by bisection; `u` is then polished by compass search on the sphere.
    fn project_radial(&self, x: &Vector, tol: f64) -> Result<Projection> {
        let c = self
            .reference_point()
            .ok_or_else(|| Error::invalid("projection onto empty set"))?;
        if self.contains(x, 0.0) {
            return Ok(Projection {
                point: x.clone(),
                dist: 0.0,
            });
        }
        let n = self.dim();
        let boundary = |u: &Vector| -> Result<Option<Vector>> {
            let r = self.radial_extent(&c, u)?;
            Ok(r.is_finite().then(|| c.axpy(r, u)))
        };
        let objective = |u: &Vector| -> Result<(f64, Option<Vector>)> {
            Ok(match boundary(u)? {
                Some(b) => (b.dist(x), Some(b)),
                None => (f64::INFINITY, None),
            })
        };
        let mut starts = Vec::new();
        if let Some(u) = (x - &c).normalized() {
            starts.push(u);
        }
        for i in 0..n {
            starts.push(Vector::basis(n, i));
            starts.push(Vector::basis(n, i).scale(-1.0));
        }
        let mut scored = Vec::new();
        for u in starts {
            let (val, b) = objective(&u)?;
            scored.push((val, u, b));
        }
        scored.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut best: Option<(f64, Vector)> = None;
        for (val, u0, b0) in scored.into_iter().take(3) {
            if !val.is_finite() {
                continue;
            }
            let mut u = u0;
            let mut cur = val;
            let mut cur_b = b0.expect("finite objective has a boundary point");
            let mut step = 0.5;
            while step > tol.min(1e-10) && n > 1 {
                let tangents = crate::vector::orthonormalize(
                    &std::iter::once(u.clone())
                        .chain((0..n).map(|i| Vector::basis(n, i)))
                        .collect::<Vec<_>>(),
                    1e-9,
                );
                let mut improved = false;
                for t in tangents.iter().skip(1) {
                    for sign in [1.0, -1.0] {
                        let cand = u.axpy(sign * step, t).normalized().expect("non-zero");
                        let (val, b) = objective(&cand)?;
                        if val < cur {
                            cur = val;
                            u = cand;
                            cur_b = b.expect("finite");
                            improved = true;
                        }
                    }
                }
                if !improved {
                    step *= 0.5;
                }
            }
            if best.as_ref().map_or(true, |(bv, _)| cur < *bv) {
                best = Some((cur, cur_b));
            }
        }
        match best {
            Some((dist, point)) => Ok(Projection { point, dist }),
            None => Err(Error::NotConverged {
                what: "radial projection".into(),
                iterations: 0,
                best: f64::INFINITY,
                best_point: x.coords().to_vec(),
            }),
        }
    }

    /// A point of the set, drawn from a seeded generator. Unbounded sets are
    /// sampled within `cap` of their reference point.
    pub fn sample(&self, rng: &mut impl Rng, cap: f64) -> Result<Vector> {
        match self {
            ConvexSet::Empty { .. } => Err(Error::invalid("cannot sample the empty set")),
            ConvexSet::Generator(g) => Ok(sample_generator(g, rng)),
            ConvexSet::Scaled {
                base,
                center,
                factor,
            } => {
                let p = base.sample(rng, cap / factor)?;
                Ok(center.axpy(*factor, &(&p - center)))
            }
            ConvexSet::Intersection(i) => {
                let tol = Tolerances::global().dist;
                if let Some(g) = i.parts.iter().find_map(|p| match p {
                    ConvexSet::Generator(g) => Some(g),
                    _ => None,
                }) {
                    for _ in 0..64 {
                        let p = sample_generator(g, rng);
                        if self.contains(&p, tol * 1e-3) {
                            return Ok(p);
                        }
                    }
                }
                self.sample_radial(rng, cap)
            }
            ConvexSet::Implicit(_) => self.sample_radial(rng, cap),
        }
    }

    fn sample_radial(&self, rng: &mut impl Rng, cap: f64) -> Result<Vector> {
        let c = self.reference_point().expect("non-empty");
        let n = self.dim();
        let u = sampling::unit_sphere(rng, n);
        let r = self.radial_extent(&c, &u)?.min(cap);
        let t: f64 = rng.random::<f64>().powf(1.0 / n as f64);
        Ok(c.axpy(r * t * (1.0 - 1e-12), &u))
    }
}

impl Intersection {
    fn project(&self, x: &Vector, tol: f64) -> Result<Projection> {
        let inside = self.halfspaces.iter().all(|h| h.violation(x) <= 0.0)
            && self.parts.iter().all(|p| p.contains(x, 0.0));
        if inside {
            return Ok(Projection {
                point: x.clone(),
                dist: 0.0,
            });
        }
        if self.parts.is_empty() && self.halfspaces.len() == 1 {
            let point = self.halfspaces[0].project(x);
            return Ok(Projection {
                dist: point.dist(x),
                point,
            });
        }
        if self.halfspaces.is_empty() && self.parts.len() == 1 {
            return self.parts[0].project(x, tol);
        }
        // Dykstra's alternating projections
        let k = self.halfspaces.len() + self.parts.len();
        let mut increments = vec![Vector::zeros(x.dim()); k];
        let mut p = x.clone();
        for _ in 0..DYKSTRA_MAX_ITER {
            let before = p.clone();
            for (j, inc) in increments.iter_mut().enumerate() {
                let y = &p + inc;
                let q = if j < self.halfspaces.len() {
                    self.halfspaces[j].project(&y)
                } else {
                    self.parts[j - self.halfspaces.len()]
                        .project(&y, tol * 1e-2)?
                        .point
                };
                *inc = &y - &q;
                p = q;
            }
            if p.dist(&before) <= tol * 1e-3 {
                return Ok(Projection {
                    dist: p.dist(x),
                    point: p,
                });
            }
        }
        Err(Error::NotConverged {
            what: "Dykstra projection".into(),
            iterations: DYKSTRA_MAX_ITER,
            best: p.dist(x),
            best_point: p.into_inner(),
        })
    }
}

fn sample_generator(g: &GeneratorSet, rng: &mut impl Rng) -> Vector {
    let total = g.generator_count();
    let k = total.min(g.dim() + 1);
    let picks = rand::seq::index::sample(rng, total, k);
    let w = sampling::simplex_weights(rng, k);
    let mut out = Vector::zeros(g.dim());
    let np = g.point_generators().len();
    for (idx, wi) in picks.iter().zip(w) {
        let p = if idx < np {
            g.point_generators()[idx].clone()
        } else {
            let b = &g.ball_generators()[idx - np];
            match &b.span {
                None => sampling::in_ball(rng, &b.center, b.radius),
                Some(basis) if !basis.is_empty() => {
                    let local = sampling::in_ball(rng, &Vector::zeros(basis.len()), b.radius);
                    basis
                        .iter()
                        .zip(local.coords())
                        .fold(b.center.clone(), |acc, (e, c)| acc.axpy(*c, e))
                }
                Some(_) => b.center.clone(),
            }
        };
        out = out.axpy(wi, &p);
    }
    out
}

/// Exact gauge of the ball `B(ball_center, radius)` about an interior `center`.
fn ball_gauge(ball_center: &Vector, radius: f64, center: &Vector, x: &Vector) -> Result<f64> {
    let v = x - center;
    let w = center - ball_center;
    let slack = radius * radius - w.norm_sq();
    if !(slack > 0.0) {
        return Err(Error::invalid("gauge center is not interior to the ball"));
    }
    let vv = v.norm_sq();
    let wv = w.dot(&v);
    // |w + s v| = radius, positive root s = 1/t
    let s = (-wv + (wv * wv + vv * slack).sqrt()) / vv;
    Ok(1.0 / s)
}

/// Gauge by bisection on `t`, using that `center + (x - center)/t` moves inward as `t` grows.
pub(crate) fn gauge_by_bisection(
    member: impl Fn(&Vector) -> bool,
    center: &Vector,
    x: &Vector,
    rel_tol: f64,
    lower_hint: Option<f64>,
) -> Result<f64> {
    let v = x - center;
    let at = |t: f64| member(&center.axpy(1.0 / t, &v));
    let (mut lo, mut hi);
    if at(1.0) {
        hi = 1.0;
        let floor = lower_hint.unwrap_or(0.0);
        let mut t = 0.5;
        loop {
            if t <= floor || !at(t) {
                lo = t;
                break;
            }
            hi = t;
            if t < RECESSION_SCALE {
                return Ok(0.0);
            }
            t *= 0.5;
        }
    } else {
        lo = 1.0;
        let mut t = 2.0;
        loop {
            if at(t) {
                hi = t;
                break;
            }
            lo = t;
            t *= 2.0;
            if t > 1e300 {
                return Err(Error::invalid("gauge center is not interior to the set"));
            }
        }
    }
    for _ in 0..200 {
        if hi - lo <= rel_tol * hi {
            break;
        }
        let mid = if hi / lo > 4.0 { (hi * lo).sqrt() } else { 0.5 * (lo + hi) };
        if at(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
