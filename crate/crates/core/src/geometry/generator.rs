//! Sets given as the closed convex hull of finitely many points and balls.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::vector::{orthonormalize, Vector};

/// A closed ball, optionally restricted to the affine subspace `center + span`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub center: Vector,
    pub radius: f64,
    /// Orthonormal basis of the directions the ball extends in; `None` means full-dimensional.
    pub span: Option<Vec<Vector>>,
}

impl Ball {
    pub fn new(center: Vector, radius: f64) -> Result<Self> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::invalid(format!("ball radius must be finite and >= 0, got {radius}")));
        }
        Ok(Ball {
            center,
            radius,
            span: None,
        })
    }

    /// A ball lying in `center + span(directions)`; the directions are orthonormalized.
    pub fn flat(center: Vector, radius: f64, directions: &[Vector]) -> Result<Self> {
        let mut b = Ball::new(center, radius)?;
        for d in directions {
            d.check_dim(b.center.dim())?;
        }
        b.span = Some(orthonormalize(directions, 1e-12));
        Ok(b)
    }

    pub fn is_full(&self) -> bool {
        self.span.is_none()
    }

    /// Component of `u` along the ball's directions.
    fn along(&self, u: &Vector) -> Vector {
        match &self.span {
            None => u.clone(),
            Some(basis) => basis
                .iter()
                .fold(Vector::zeros(u.dim()), |acc, b| acc.axpy(u.dot(b), b)),
        }
    }

    pub fn support(&self, dir: &Vector) -> (f64, Vector) {
        let a = self.along(dir);
        let n = a.norm();
        let base = dir.dot(&self.center);
        if n == 0.0 || self.radius == 0.0 {
            (base, self.center.clone())
        } else {
            (base + self.radius * n, self.center.axpy(self.radius / n, &a))
        }
    }

    /// Exact Euclidean projection onto this ball.
    pub fn project(&self, x: &Vector) -> Vector {
        let rel = x - &self.center;
        let inplane = self.along(&rel);
        let n = inplane.norm();
        if n <= self.radius {
            self.center.axpy(1.0, &inplane)
        } else {
            self.center.axpy(self.radius / n, &inplane)
        }
    }
}

/// conv(points ∪ balls), closed.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSet {
    points: Vec<Vector>,
    balls: Vec<Ball>,
    dim: usize,
}

/// Result of a projection onto a convex set.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    pub point: Vector,
    pub dist: f64,
}

const FW_MAX_ITER: usize = 10_000;

enum FwEnd {
    Member,
    Outside,
    Undecided,
    Projected(Projection),
}
/// Distances below this (relative) count as membership.
pub(crate) const MEMBER_SLACK: f64 = 1e-12;

impl GeneratorSet {
    pub fn new(points: Vec<Vector>, balls: Vec<Ball>) -> Result<Self> {
        let dim = points
            .first()
            .map(Vector::dim)
            .or_else(|| balls.first().map(|b| b.center.dim()))
            .ok_or_else(|| Error::invalid("generator set needs at least one generator"))?;
        for p in &points {
            p.check_dim(dim)?;
            if !p.is_finite() {
                return Err(Error::invalid("non-finite generator point"));
            }
        }
        for b in &balls {
            b.center.check_dim(dim)?;
        }
        Ok(GeneratorSet { points, balls, dim })
    }

    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        GeneratorSet::new(Vec::new(), vec![Ball::new(center, radius)?])
    }

    pub fn points(points: Vec<Vector>) -> Result<Self> {
        GeneratorSet::new(points, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point_generators(&self) -> &[Vector] {
        &self.points
    }

    pub fn ball_generators(&self) -> &[Ball] {
        &self.balls
    }

    pub fn generator_count(&self) -> usize {
        self.points.len() + self.balls.len()
    }

    /// Hull of the union of two generator sets.
    pub fn union(&self, other: &GeneratorSet) -> Result<GeneratorSet> {
        other.points.first().map_or(Ok(()), |p| p.check_dim(self.dim))?;
        let mut points = self.points.clone();
        points.extend(other.points.iter().cloned());
        let mut balls = self.balls.clone();
        balls.extend(other.balls.iter().cloned());
        GeneratorSet::new(points, balls)
    }

    /// `(1 - t) * self + t * other` as a generator set (pairwise sums of generators).
    pub fn minkowski_combination(&self, other: &GeneratorSet, t: f64) -> Result<GeneratorSet> {
        let mut points = Vec::new();
        let mut balls = Vec::new();
        for a in self.generator_iter() {
            for b in other.generator_iter() {
                let center = a.0.lerp(b.0, t);
                let (radius, span) = match (a.1, b.1) {
                    (None, None) => {
                        points.push(center);
                        continue;
                    }
                    (Some(x), None) => ((1.0 - t) * x.radius, x.span.clone()),
                    (None, Some(y)) => (t * y.radius, y.span.clone()),
                    (Some(x), Some(y)) => {
                        if x.span.is_some() || y.span.is_some() {
                            return Err(Error::invalid(
                                "Minkowski combination of flat balls is not supported",
                            ));
                        }
                        ((1.0 - t) * x.radius + t * y.radius, None)
                    }
                };
                balls.push(Ball {
                    center,
                    radius,
                    span,
                });
            }
        }
        GeneratorSet::new(points, balls)
    }

    fn generator_iter(&self) -> impl Iterator<Item = (&Vector, Option<&Ball>)> {
        self.points
            .iter()
            .map(|p| (p, None))
            .chain(self.balls.iter().map(|b| (&b.center, Some(b))))
    }

    /// Centers of all generators (points and ball centers).
    pub fn centers(&self) -> impl Iterator<Item = &Vector> {
        self.generator_iter().map(|(c, _)| c)
    }

    pub fn centroid(&self) -> Vector {
        let n = self.generator_count() as f64;
        self.centers()
            .fold(Vector::zeros(self.dim), |acc, c| acc.axpy(1.0 / n, c))
    }

    /// Radius of a ball around the centroid containing the set.
    pub fn bounding_radius(&self) -> f64 {
        let c = self.centroid();
        self.generator_iter()
            .map(|(g, b)| g.dist(&c) + b.map_or(0.0, |b| b.radius))
            .fold(0.0, f64::max)
    }

    /// Support function value and a maximizer. `dir` must be non-zero.
    pub fn support(&self, dir: &Vector) -> Result<(f64, Vector)> {
        dir.check_dim(self.dim)?;
        if dir.norm() == 0.0 {
            return Err(Error::invalid("support direction must be non-zero"));
        }
        Ok(self.support_unchecked(dir))
    }

    pub(crate) fn support_unchecked(&self, dir: &Vector) -> (f64, Vector) {
        let mut best: Option<(f64, Vector)> = None;
        for p in &self.points {
            let v = dir.dot(p);
            if best.as_ref().map_or(true, |(b, _)| v > *b) {
                best = Some((v, p.clone()));
            }
        }
        for ball in &self.balls {
            let (v, w) = ball.support(dir);
            if best.as_ref().map_or(true, |(b, _)| v > *b) {
                best = Some((v, w));
            }
        }
        best.expect("generator set is non-empty")
    }

    /// Euclidean projection. `tol` is the target distance accuracy.
    pub fn project(&self, x: &Vector, tol: f64) -> Result<Projection> {
        x.check_dim(self.dim)?;
        if let Some(p) = self.project_closed_form(x) {
            return Ok(p);
        }
        // conv(centers) + rB when every generator is a full ball of the same radius
        if self.points.is_empty() && self.balls.len() > 1 {
            let r = self.balls[0].radius;
            if self.balls.iter().all(|b| b.is_full() && b.radius == r) {
                let centers = GeneratorSet::points(self.balls.iter().map(|b| b.center.clone()).collect())?;
                let q = centers.project(x, tol)?;
                if q.dist <= r {
                    return Ok(Projection {
                        point: x.clone(),
                        dist: 0.0,
                    });
                }
                let point = q.point.axpy(r / q.dist, &(x - &q.point));
                return Ok(Projection {
                    dist: q.dist - r,
                    point,
                });
            }
        }
        if self.is_cone() {
            return self.project_cone(x, tol);
        }
        match self.frank_wolfe(x, tol, None)? {
            FwEnd::Projected(p) => Ok(p),
            _ => Ok(Projection {
                point: x.clone(),
                dist: 0.0,
            }),
        }
    }

    /// The last ball is full and something else remains once it is removed.
    fn is_cone(&self) -> bool {
        self.balls.last().is_some_and(Ball::is_full) && self.generator_count() > 1
    }

    /// With `B(c, r)` the last ball and `A` the hull of the other generators,
    /// `conv(A ∪ B(c, r)) = ⋃_t (1-t) A + t c + B(0, t r)`, so the distance is the minimum
    /// over `t` of `dist(x, (1-t) A + t c) - t r`, a convex function of `t`. `(1-t) A + t c`
    /// is again a generator set, projected recursively.
    fn project_cone(&self, x: &Vector, tol: f64) -> Result<Projection> {
        let (b, rest) = self.balls.split_last().expect("at least one ball");
        let phi = |t: f64| -> Result<(f64, Projection)> {
            let q = if t >= 1.0 {
                Projection {
                    point: b.center.clone(),
                    dist: x.dist(&b.center),
                }
            } else {
                let shrink = |v: &Vector| v.scale(1.0 - t).axpy(t, &b.center);
                let balls = rest
                    .iter()
                    .map(|r| Ball {
                        center: shrink(&r.center),
                        radius: (1.0 - t) * r.radius,
                        span: r.span.clone(),
                    })
                    .collect();
                GeneratorSet::new(self.points.iter().map(shrink).collect(), balls)?.project(x, tol * 1e-2)?
            };
            Ok((q.dist - t * b.radius, q))
        };
        let mut best = phi(0.0)?;
        let mut best_t = 0.0;
        let at_one = phi(1.0)?;
        if at_one.0 < best.0 {
            best = at_one;
            best_t = 1.0;
        }
        let ratio = 0.5 * (5f64.sqrt() - 1.0);
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut t1 = hi - ratio * (hi - lo);
        let mut t2 = lo + ratio * (hi - lo);
        let (mut f1, mut f2) = (phi(t1)?, phi(t2)?);
        while hi - lo > 1e-10 && best.0 > 0.0 {
            if f1.0 <= f2.0 {
                hi = t2;
                t2 = t1;
                f2 = f1;
                t1 = hi - ratio * (hi - lo);
                f1 = phi(t1)?;
            } else {
                lo = t1;
                t1 = t2;
                f1 = f2;
                t2 = lo + ratio * (hi - lo);
                f2 = phi(t2)?;
            }
            for (t, f) in [(t1, &f1), (t2, &f2)] {
                if f.0 < best.0 {
                    best = f.clone();
                    best_t = t;
                }
            }
        }
        let (d, q) = best;
        if d <= 0.0 {
            return Ok(Projection {
                point: x.clone(),
                dist: 0.0,
            });
        }
        let point = q.point.axpy(best_t * b.radius / q.dist, &(x - &q.point));
        Ok(Projection { dist: d, point })
    }

    fn project_closed_form(&self, x: &Vector) -> Option<Projection> {
        match (self.points.as_slice(), self.balls.as_slice()) {
            ([], [b]) => {
                let point = b.project(x);
                Some(Projection {
                    dist: point.dist(x),
                    point,
                })
            }
            ([p], []) => Some(Projection {
                dist: p.dist(x),
                point: p.clone(),
            }),
            ([a, b], []) => {
                let d = b - a;
                let dd = d.norm_sq();
                let t = if dd == 0.0 {
                    0.0
                } else {
                    ((x - a).dot(&d) / dd).clamp(0.0, 1.0)
                };
                let point = a.axpy(t, &d);
                Some(Projection {
                    dist: point.dist(x),
                    point,
                })
            }
            _ => None,
        }
    }

    /// Wolfe's minimum-norm-point method on `conv(generators) - x`: Frank-Wolfe atoms
    /// from the exact support oracle, with the weights re-optimized over the active atoms
    /// after every step.
    ///
    /// Stops when the Frank-Wolfe gap drops below `tol²`, or when the duality gap on
    /// the distance itself (gap / ‖p − x‖) falls below `tol / 100`. With `member`, stops
    /// as soon as the distance is known to be on one side of that threshold.
    fn frank_wolfe(&self, x: &Vector, tol: f64, member: Option<f64>) -> Result<FwEnd> {
        let tol = tol.max(1e-13 * (1.0 + x.norm()));
        let mut start: Option<(f64, Vector)> = None;
        for (c, b) in self.generator_iter() {
            let q = match b {
                Some(b) => b.project(x),
                None => c.clone(),
            };
            let d = q.dist(x);
            if start.as_ref().map_or(true, |(bd, _)| d < *bd) {
                start = Some((d, q));
            }
        }
        let (_, p0) = start.expect("non-empty");
        // atoms relative to x, with weights
        let mut atoms: Vec<Vector> = vec![&p0 - x];
        let mut lambda: Vec<f64> = vec![1.0];
        let mut g = atoms[0].clone();
        let mut best_gap = f64::INFINITY;
        let mut stalled = 0;

        for _ in 0..FW_MAX_ITER {
            let gn = g.norm();
            if gn <= tol * 1e-3 || member.is_some_and(|m| gn <= m) {
                return Ok(FwEnd::Member);
            }
            let (s_val, s) = self.support_unchecked(&g.scale(-1.0));
            // <g, p> + h(-g) with p = x + g
            let gap = g.dot(&g) + g.dot(x) + s_val;
            best_gap = best_gap.min(gap);
            if let Some(m) = member {
                // the supporting hyperplane keeps x at distance >= gn - gap/gn
                if gn - gap / gn > m {
                    return Ok(FwEnd::Outside);
                }
                if gap / gn <= m * 1e-2 {
                    return Ok(if gn - 0.5 * gap / gn <= m { FwEnd::Member } else { FwEnd::Outside });
                }
            }
            if gap <= tol * tol || gap / gn <= tol * 1e-2 {
                return Ok(FwEnd::Projected(Projection { dist: gn, point: x + &g }));
            }
            atoms.push(&s - x);
            lambda.push(0.0);
            for _ in 0..atoms.len() + 2 {
                let Some(alpha) = affine_minimizer(&atoms) else {
                    // drop the lightest old atom
                    let k = lambda[..lambda.len() - 1]
                        .iter()
                        .enumerate()
                        .min_by(|a, b| a.1.total_cmp(b.1))
                        .map(|(k, _)| k)
                        .expect("at least two atoms");
                    lambda.remove(k);
                    atoms.remove(k);
                    let total: f64 = lambda.iter().sum::<f64>().max(f64::MIN_POSITIVE);
                    lambda.iter_mut().for_each(|l| *l /= total);
                    continue;
                };
                if alpha.iter().all(|&a| a > 0.0) {
                    lambda = alpha;
                    break;
                }
                let mut theta = 1.0f64;
                for (l, a) in lambda.iter().zip(&alpha) {
                    if *a <= 0.0 && l - a > 0.0 {
                        theta = theta.min(l / (l - a));
                    }
                }
                for (l, a) in lambda.iter_mut().zip(&alpha) {
                    *l += theta * (a - *l);
                }
                let k = lambda
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.total_cmp(b.1))
                    .map(|(k, _)| k)
                    .expect("non-empty");
                let mut keep = lambda.iter().map(|&l| l > 1e-15).collect::<Vec<_>>();
                keep[k] = false;
                let mut i = 0;
                atoms.retain(|_| {
                    i += 1;
                    keep[i - 1]
                });
                let mut i = 0;
                lambda.retain(|_| {
                    i += 1;
                    keep[i - 1]
                });
                let total: f64 = lambda.iter().sum();
                lambda.iter_mut().for_each(|l| *l /= total);
            }
            let next = atoms
                .iter()
                .zip(&lambda)
                .fold(Vector::zeros(self.dim), |acc, (a, l)| acc.axpy(*l, a));
            if next.norm() >= gn * (1.0 - 1e-15) {
                stalled += 1;
                if stalled > 20 {
                    break;
                }
            } else {
                stalled = 0;
            }
            if next.norm() < gn {
                g = next;
            }
        }
        let dist = g.norm();
        if let Some(m) = member {
            return Ok(if dist <= m { FwEnd::Member } else { FwEnd::Undecided });
        }
        if dist <= tol || best_gap / dist.max(1e-300) <= tol {
            return Ok(FwEnd::Projected(Projection { dist, point: x + &g }));
        }
        Err(Error::NotConverged {
            what: "Frank-Wolfe projection".into(),
            iterations: FW_MAX_ITER,
            best: dist,
            best_point: (x + &g).into_inner(),
        })
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        if x.dim() != self.dim {
            return false;
        }
        let slack = tol.max(MEMBER_SLACK * (1.0 + x.norm()));
        if let Some(p) = self.project_closed_form(x) {
            return p.dist <= slack;
        }
        if self.points.is_empty() && self.balls.len() > 1 {
            return self.project(x, tol.max(1e-10)).is_ok_and(|p| p.dist <= slack);
        }
        match self.frank_wolfe(x, tol.max(1e-10), Some(slack)) {
            Ok(FwEnd::Member) => true,
            Ok(FwEnd::Undecided) if self.is_cone() => self.project_cone(x, tol.max(1e-10)).is_ok_and(|p| p.dist <= slack),
            _ => false,
        }
    }

    /// Image under an affine map `f` that scales lengths by `scale`; `span_map` is its
    /// linear part, applied to the directions of flat balls. Full balls stay full.
    pub fn map_affine(&self, f: impl Fn(&Vector) -> Vector, scale: f64, span_map: impl Fn(&Vector) -> Vector) -> Result<GeneratorSet> {
        let points = self.points.iter().map(&f).collect();
        let balls = self
            .balls
            .iter()
            .map(|b| Ball {
                center: f(&b.center),
                radius: b.radius * scale,
                span: b.span.as_ref().map(|s| orthonormalize(&s.iter().map(&span_map).collect::<Vec<_>>(), 1e-12)),
            })
            .collect();
        GeneratorSet::new(points, balls)
    }
}

impl GeneratorSet {
    /// Image of a set given in coordinates of `basis` under `y -> origin + Σ y_i basis_i`.
    /// Full balls become flat balls spanning the basis.
    pub fn embed(&self, origin: &Vector, basis: &[Vector]) -> Result<GeneratorSet> {
        if basis.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: basis.len(),
            });
        }
        let lin = |y: &Vector| {
            basis
                .iter()
                .zip(y.coords())
                .fold(Vector::zeros(origin.dim()), |acc, (b, c)| acc.axpy(*c, b))
        };
        let points = self.points.iter().map(|p| origin + &lin(p)).collect();
        let balls = self
            .balls
            .iter()
            .map(|b| {
                let dirs: Vec<Vector> = match &b.span {
                    None => basis.to_vec(),
                    Some(s) => s.iter().map(lin).collect(),
                };
                Ball::flat(origin + &lin(&b.center), b.radius, &dirs)
            })
            .collect::<Result<Vec<_>>>()?;
        GeneratorSet::new(points, balls)
    }
}

/// Affine weights (summing to 1) of the minimum-norm point of the affine hull of `atoms`,
/// or `None` when the atoms are affinely dependent.
fn affine_minimizer(atoms: &[Vector]) -> Option<Vec<f64>> {
    let k = atoms.len();
    let mut m = DMatrix::<f64>::zeros(k + 1, k + 1);
    let mut scale: f64 = 0.0;
    for i in 0..k {
        for j in 0..=i {
            let v = atoms[i].dot(&atoms[j]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
        scale = scale.max(m[(i, i)]);
    }
    let scale = scale.max(f64::MIN_POSITIVE);
    for i in 0..k {
        for j in 0..k {
            m[(i, j)] /= scale;
        }
        m[(i, k)] = 1.0;
        m[(k, i)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(k + 1);
    rhs[k] = 1.0;
    let lu = m.full_piv_lu();
    let diag = lu.u().diagonal();
    let big = diag.iter().fold(0.0f64, |a, d| a.max(d.abs()));
    if diag.iter().any(|d| d.abs() <= 1e-13 * big) {
        return None;
    }
    let sol = lu.solve(&rhs)?;
    let alpha: Vec<f64> = sol.iter().take(k).copied().collect();
    let total: f64 = alpha.iter().sum();
    if !alpha.iter().all(|a| a.is_finite()) || (total - 1.0).abs() > 1e-6 || alpha.iter().any(|a| a.abs() > 1e12) {
        return None;
    }
    Some(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector {
        Vector::from_slice(c)
    }

    #[test]
    fn support_unit_ball() {
        let s = GeneratorSet::ball(v(&[0.0, 0.0]), 1.0).unwrap();
        let (val, w) = s.support(&v(&[1.0, 0.0])).unwrap();
        assert_eq!(val, 1.0);
        assert_eq!(w, v(&[1.0, 0.0]));
    }

    #[test]
    fn support_vertex_max() {
        let s = GeneratorSet::points(vec![v(&[0.0, 0.0]), v(&[2.0, 0.0])]).unwrap();
        let (val, w) = s.support(&v(&[1.0, 0.0])).unwrap();
        assert_eq!(val, 2.0);
        assert_eq!(w, v(&[2.0, 0.0]));
    }

    #[test]
    fn zero_direction_rejected() {
        let s = GeneratorSet::ball(v(&[0.0]), 1.0).unwrap();
        assert!(s.support(&v(&[0.0])).is_err());
    }

    #[test]
    fn flat_ball_support() {
        let b = Ball::flat(v(&[0.0, 0.0, 0.0]), 2.0, &[v(&[1.0, 0.0, 0.0])]).unwrap();
        let (val, _) = b.support(&v(&[0.0, 1.0, 0.0]));
        assert_eq!(val, 0.0);
        let (val, w) = b.support(&v(&[3.0, 4.0, 0.0]));
        assert_eq!(val, 6.0);
        assert_eq!(w, v(&[2.0, 0.0, 0.0]));
    }

    #[test]
    fn projection_onto_triangle() {
        let s = GeneratorSet::points(vec![v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap();
        let p = s.project(&v(&[1.0, 1.0]), 1e-10).unwrap();
        assert!((p.dist - 0.5f64.sqrt()).abs() < 1e-9);
        assert!(p.point.dist(&v(&[0.5, 0.5])) < 1e-8);
        let inside = s.project(&v(&[0.2, 0.2]), 1e-10).unwrap();
        assert!(inside.dist < 1e-10);
    }

    #[test]
    fn projection_onto_hull_of_ball_and_point() {
        // ice-cream cone: conv(B(0,1) ∪ {(3,0)})
        let s = GeneratorSet::new(vec![v(&[3.0, 0.0])], vec![Ball::new(v(&[0.0, 0.0]), 1.0).unwrap()]).unwrap();
        // the tangent from (3,0) touches the unit circle at (1/3, sqrt(8)/3)
        let t = v(&[1.0 / 3.0, 8f64.sqrt() / 3.0]);
        let normal = t.clone();
        let x = t.axpy(2.0, &normal);
        let p = s.project(&x, 1e-10).unwrap();
        assert!((p.dist - 2.0).abs() < 1e-7, "{}", p.dist);
    }

    #[test]
    fn equal_radius_balls_use_sweep() {
        let s = GeneratorSet::new(
            vec![],
            vec![Ball::new(v(&[0.0, 0.0]), 1.0).unwrap(), Ball::new(v(&[4.0, 0.0]), 1.0).unwrap()],
        )
        .unwrap();
        let p = s.project(&v(&[2.0, 3.0]), 1e-12).unwrap();
        assert!((p.dist - 2.0).abs() < 1e-12);
        assert!(p.point.dist(&v(&[2.0, 1.0])) < 1e-12);
    }

    /// `dist(x, K) = max_u <u, x> - h_K(u)` over unit `u`: angle grid, then ternary search
    /// around the best angle.
    fn dual_dist_2d(h: impl Fn(f64, f64) -> f64, x: &Vector) -> f64 {
        let f = |a: f64| a.cos() * x[0] + a.sin() * x[1] - h(a.cos(), a.sin());
        let step = std::f64::consts::TAU / 20_000.0;
        let a0 = (0..20_000).map(|i| i as f64 * step).max_by(|a, b| f(*a).total_cmp(&f(*b))).unwrap();
        let (mut lo, mut hi) = (a0 - step, a0 + step);
        for _ in 0..200 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if f(m1) < f(m2) {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        f(0.5 * (lo + hi)).max(0.0)
    }

    #[test]
    fn ice_cream_cone_distance() {
        let s = GeneratorSet::new(vec![v(&[5.0, 0.0])], vec![Ball::new(v(&[0.0, 0.0]), 1.0).unwrap()]).unwrap();
        let h = |c: f64, _s: f64| (5.0 * c).max(1.0);
        for x in [[0.0, 3.0], [4.0, 2.0], [-3.0, -1.0], [9.0, 0.5], [1e4, -3e4]] {
            let x = v(&x);
            let p = s.project(&x, 1e-10).unwrap();
            let want = dual_dist_2d(h, &x);
            assert!((p.dist - want).abs() < 1e-6 * (1.0 + want), "{x:?}: {} vs {want}", p.dist);
            assert!((p.point.dist(&x) - p.dist).abs() < 1e-9 * (1.0 + want));
            assert!(s.contains(&p.point, 1e-9));
        }
        assert!(s.contains(&v(&[4.9, 0.0]), 0.0));
        assert!(!s.contains(&v(&[0.0, 1.01]), 0.0));
    }

    #[test]
    fn polytope_with_two_balls() {
        let s = GeneratorSet::new(
            vec![v(&[4.0, 4.0]), v(&[4.0, -4.0])],
            vec![Ball::new(v(&[0.0, 0.0]), 1.0).unwrap(), Ball::new(v(&[-3.0, 0.0]), 2.0).unwrap()],
        )
        .unwrap();
        let h = |c: f64, s: f64| (4.0 * c + 4.0 * s).max(4.0 * c - 4.0 * s).max(1.0).max(-3.0 * c + 2.0);
        for x in [[0.0, 6.0], [-6.0, 3.0], [7.0, 1.0], [-1.0, -5.0]] {
            let x = v(&x);
            let want = dual_dist_2d(h, &x);
            let got = s.project(&x, 1e-10).unwrap().dist;
            assert!((got - want).abs() < 1e-6 * (1.0 + want), "{x:?}: {got} vs {want}");
        }
    }

    #[test]
    fn affine_minimizer_on_a_segment() {
        let a = affine_minimizer(&[v(&[1.0, 1.0]), v(&[1.0, -3.0])]).unwrap();
        assert!((a[0] - 0.75).abs() < 1e-12 && (a[1] - 0.25).abs() < 1e-12);
        assert!(affine_minimizer(&[v(&[1.0, 0.0]), v(&[2.0, 0.0]), v(&[3.0, 0.0])]).is_none());
    }
}
