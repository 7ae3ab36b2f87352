use std::sync::Arc;

use super::generator::{GeneratorSet, Projection};
use super::set::{ConvexSet, ImplicitSet};
use crate::certificate::{Certificate, CertificateKind};
use crate::error::{Error, Result};
use crate::sampling;
use crate::tolerance::Tolerances;
use crate::vector::{orthonormalize, Vector};

pub fn support(set: &GeneratorSet, direction: &Vector) -> Result<(f64, Vector)> {
    set.support(direction)
}

/// Distance to the closure of `set`, with the nearest point.
pub fn distance(set: &ConvexSet, x: &Vector) -> Result<Projection> {
    set.project(x, Tolerances::global().dist)
}

/// Checks that `center` is interior: `center ± tau e_i` must all be members.
pub fn check_interior(set: &ConvexSet, center: &Vector) -> Result<()> {
    center.check_dim(set.dim())?;
    let tau = 1e-7 * (1.0 + center.norm());
    for i in 0..set.dim() {
        for s in [tau, -tau] {
            let mut p = center.clone();
            p[i] += s;
            if !set.contains(&p, 0.0) {
                return Err(Error::invalid("minkowski: center is not interior to the set"));
            }
        }
    }
    Ok(())
}

/// Minkowski functional of `set - center`.
pub fn minkowski(set: &ConvexSet, center: &Vector, x: &Vector) -> Result<f64> {
    check_interior(set, center)?;
    set.gauge(center, x)
}

/// Radius of the largest ball about `x` inside the set. Exact for balls, polyhedra and
/// their intersections and homotheties. Generator sets minimize `h(u) - <u, x>` over the
/// sphere; other sets take the minimum radial extent over `2 dim + 64` directions. Both
/// estimates are shrunk by 10%.
pub fn inner_radius(set: &ConvexSet, x: &Vector) -> Result<f64> {
    x.check_dim(set.dim())?;
    Ok(match set {
        ConvexSet::Empty { .. } => 0.0,
        ConvexSet::Generator(g) => {
            if let ([], [b]) = (g.point_generators(), g.ball_generators()) {
                if b.is_full() {
                    return Ok((b.radius - b.center.dist(x)).max(0.0));
                }
            }
            if !g.contains(x, 0.0) {
                return Ok(0.0);
            }
            0.9 * support_inner_radius(g, x)
        }
        ConvexSet::Implicit(s) => {
            if x == s.interior_point() {
                s.margin()
            } else {
                sampled_inner_radius(set, x)?
            }
        }
        ConvexSet::Intersection(i) => {
            let mut r = f64::INFINITY;
            for h in &i.halfspaces {
                r = r.min((-h.violation(x)).max(0.0));
            }
            for p in &i.parts {
                r = r.min(inner_radius(p, x)?);
            }
            r
        }
        ConvexSet::Scaled {
            base,
            center,
            factor,
        } => factor * inner_radius(base, &center.axpy(1.0 / factor, &(x - center)))?,
    })
}

fn sampled_inner_radius(set: &ConvexSet, x: &Vector) -> Result<f64> {
    if !set.contains(x, 0.0) {
        return Ok(0.0);
    }
    let n = set.dim();
    let mut dirs: Vec<Vector> = (0..n)
        .flat_map(|i| [Vector::basis(n, i), Vector::basis(n, i).scale(-1.0)])
        .collect();
    let mut rng = sampling::rng(0x1a2b);
    dirs.extend((0..64).map(|_| sampling::unit_sphere(&mut rng, n)));
    let mut r = f64::INFINITY;
    for u in &dirs {
        r = r.min(set.radial_extent(x, u)?);
    }
    Ok(0.9 * r)
}

/// `min_u h(u) - <u, x>` over unit `u`: sampled directions, then coordinate descent on
/// the sphere from the best one.
fn support_inner_radius(g: &GeneratorSet, x: &Vector) -> f64 {
    let n = g.dim();
    let depth = |u: &Vector| g.support_unchecked(u).0 - u.dot(x);
    let mut dirs: Vec<Vector> = (0..n)
        .flat_map(|i| [Vector::basis(n, i), Vector::basis(n, i).scale(-1.0)])
        .collect();
    if n > 1 {
        let mut rng = sampling::rng(0x1a2b);
        dirs.extend((0..64).map(|_| sampling::unit_sphere(&mut rng, n)));
    }
    let mut best = dirs
        .into_iter()
        .map(|u| (depth(&u), u))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("at least two directions");
    if n > 1 {
        let mut step = 0.25;
        while step > 1e-9 {
            let mut moved = false;
            for i in 0..n {
                for d in [step, -step] {
                    let mut u = best.1.clone();
                    u[i] += d;
                    if let Some(u) = u.normalized() {
                        let r = depth(&u);
                        if r < best.0 {
                            best = (r, u);
                            moved = true;
                        }
                    }
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
    }
    best.0.max(0.0)
}

/// Deepest sampled point, by inner radius.
pub fn chebyshev_center(set: &ConvexSet, samples: usize, seed: u64) -> Result<(Vector, f64)> {
    let start = set
        .reference_point()
        .ok_or_else(|| Error::invalid("chebyshev center of the empty set"))?;
    let mut best = (start.clone(), inner_radius(set, &start)?);
    let mut rng = sampling::rng(seed);
    for _ in 0..samples {
        let p = set.sample(&mut rng, 10.0)?;
        let r = inner_radius(set, &p)?;
        if r > best.1 {
            best = (p, r);
        }
    }
    Ok(best)
}

/// Samples both inclusions of `conv(A ∪ B) = ⋃_t (1-t)A + tB`.
pub fn conv_union_segments_check(
    a: &GeneratorSet,
    b: &GeneratorSet,
    samples: usize,
    seed: u64,
    tol: f64,
) -> Result<Certificate> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let hull = ConvexSet::Generator(a.union(b)?);
    let (sa, sb) = (ConvexSet::Generator(a.clone()), ConvexSet::Generator(b.clone()));
    let mut cert = Certificate::new(CertificateKind::Coverage, "conv(A∪B) = ⋃ (1-t)A + tB", tol, seed);
    let mut rng = sampling::rng(seed);
    let ptol = tol * 1e-2;
    for _ in 0..samples {
        let x = sa.sample(&mut rng, 10.0)?;
        let y = sb.sample(&mut rng, 10.0)?;
        let t = sampling::uniform(&mut rng, 0.0, 1.0);
        let p = x.lerp(&y, t);
        let d = hull.project(&p, ptol)?.dist;
        cert.observe(d, 0.0, || vec![p.coords().to_vec()], "segment point outside hull");
    }
    for _ in 0..samples {
        let p = hull.sample(&mut rng, 10.0)?;
        let d = decomposition_gap(a, b, &p, ptol)?;
        cert.observe(d, 0.0, || vec![p.coords().to_vec()], "hull point not on any (1-t)A + tB");
    }
    cert.samples = 2 * samples;
    Ok(cert)
}

/// `min_t dist(p, (1-t)A + tB)`, a convex function of `t`.
fn decomposition_gap(a: &GeneratorSet, b: &GeneratorSet, p: &Vector, tol: f64) -> Result<f64> {
    let d = |t: f64| -> Result<f64> { Ok(a.minkowski_combination(b, t)?.project(p, tol)?.dist) };
    let grid = 16;
    let mut best = (0.0, d(0.0)?);
    for i in 1..=grid {
        let t = i as f64 / grid as f64;
        let v = d(t)?;
        if v < best.1 {
            best = (t, v);
        }
    }
    if best.1 <= tol {
        return Ok(best.1);
    }
    let h = 1.0 / grid as f64;
    let (mut lo, mut hi) = ((best.0 - h).max(0.0), (best.0 + h).min(1.0));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (d(x1)?, d(x2)?);
    for _ in 0..60 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = d(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = d(x2)?;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    Ok(best.1.min(f1).min(f2))
}

/// `A ∩ Y` in the coordinates of the orthonormal `basis` of `Y`.
pub fn slice_subspace(set: &ConvexSet, basis: &[Vector]) -> Result<ConvexSet> {
    let n = set.dim();
    let k = basis.len();
    if k == 0 {
        return Err(Error::invalid("slice: empty basis"));
    }
    for b in basis {
        b.check_dim(n)?;
    }
    if orthonormalize(basis, 1e-9).len() != k
        || basis
            .iter()
            .enumerate()
            .any(|(i, b)| basis.iter().enumerate().any(|(j, c)| (b.dot(c) - (i == j) as u8 as f64).abs() > 1e-9))
    {
        return Err(Error::invalid("slice: basis is not orthonormal"));
    }
    if set.is_empty() {
        return Ok(ConvexSet::Empty { dim: k });
    }
    let tol = Tolerances::global().dist;
    let lift = {
        let basis = basis.to_vec();
        move |y: &Vector| {
            basis
                .iter()
                .zip(y.coords())
                .fold(Vector::zeros(n), |acc, (b, c)| acc.axpy(*c, b))
        }
    };
    let coords = |x: &Vector| Vector::raw(basis.iter().map(|b| b.dot(x)).collect());

    // alternating projections between A and Y
    let mut y = coords(&set.reference_point().expect("non-empty"));
    let mut gap = f64::INFINITY;
    for _ in 0..2000 {
        let p = set.project(&lift(&y), tol * 1e-2)?;
        gap = p.dist;
        if gap <= tol {
            break;
        }
        let next = coords(&p.point);
        if next.dist(&y) <= tol * 1e-3 {
            break;
        }
        y = next;
    }
    if gap > tol * 10.0 {
        return Ok(ConvexSet::Empty { dim: k });
    }

    // move towards the relative interior by chord midpoints
    let member = |z: &Vector| set.contains(&lift(z), 0.0);
    let cap = set.bounds().map_or(1e6, |(_, r)| 2.0 * r + 1.0);
    let chord = |z: &Vector, u: &Vector| -> f64 {
        if !member(z) {
            return 0.0;
        }
        let (mut lo, mut hi) = (0.0, cap);
        if member(&z.axpy(hi, u)) {
            return hi;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if member(&z.axpy(mid, u)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    if !member(&y) {
        let mut dirs: Vec<Vector> = (0..k)
            .flat_map(|i| [Vector::basis(k, i), Vector::basis(k, i).scale(-1.0)])
            .collect();
        if let Some(u) = (&coords(&set.reference_point().expect("non-empty")) - &y).normalized() {
            dirs.push(u);
        }
        let mut s = cap;
        'probe: for _ in 0..80 {
            for u in &dirs {
                let z = y.axpy(s, u);
                if member(&z) {
                    y = z;
                    break 'probe;
                }
            }
            s *= 0.5;
        }
    }
    let mut margin = 0.0;
    for _ in 0..8 {
        margin = f64::INFINITY;
        for i in 0..k {
            let e = Vector::basis(k, i);
            let up = chord(&y, &e);
            let down = chord(&y, &e.scale(-1.0));
            y[i] += 0.5 * (up - down);
            margin = margin.min(0.5 * (up + down));
        }
    }
    if !(margin > tol) || !member(&y) {
        return Err(Error::invalid("slice: intersection has empty relative interior"));
    }
    let bounding = set.bounds().map_or(f64::INFINITY, |(_, r)| 2.0 * r);
    let inner = set.clone();
    let oracle_lift = lift.clone();
    // the chord margin bounds the inner radius only for k = 1; elsewhere shrink by 1/sqrt(k)
    let margin = margin / (k as f64).sqrt() * 0.5;
    Ok(ConvexSet::Implicit(
        ImplicitSet::new(
            "slice",
            Arc::new(move |z: &Vector| inner.contains(&oracle_lift(z), tol)),
            y,
            margin,
            bounding,
        )?
        .with_open(matches!(set, ConvexSet::Implicit(s) if s.is_open())),
    ))
}

/// Exhaustion `D_n ⊂⊂ C_n` with recorded margins.
#[derive(Clone, Debug)]
pub struct Refinement {
    pub sets: Vec<ConvexSet>,
    /// `D_n + eps_n B ⊂ C_n`
    pub eps: Vec<f64>,
    /// `D_n + delta_n B ⊂ D_{n+1}`; the last entry refers to the next, unbuilt stage.
    pub delta: Vec<f64>,
    pub anchor: Vector,
    pub certificate: Certificate,
}

/// `D_n = a + (1 - θ_n)(K_n - a)` with `θ_n = 1/(n+1)` and `K_n = C_n`, or
/// `C_n ∩ U(a, n)` when `C_n` is unbounded. If `U(a, m) ⊂ C_1` then
/// `ε_n = θ_n min(m, n)` and `δ_n = (θ_n - θ_{n+1}) min(m, n)` work.
/// Both margins are verified on samples and halved on failure.
pub fn refine_sequence(sets: &[ConvexSet], anchor: &Vector, samples: usize, seed: u64) -> Result<Refinement> {
    if sets.is_empty() {
        return Err(Error::invalid("refine_sequence: no sets"));
    }
    let m = inner_radius(&sets[0], anchor)?;
    if !(m > 0.0) {
        return Err(Error::invalid("refine_sequence: anchor is not interior to C_1"));
    }
    let mut ks = Vec::with_capacity(sets.len());
    for (i, c) in sets.iter().enumerate() {
        let n = (i + 1) as f64;
        ks.push(if c.is_bounded() {
            c.clone()
        } else {
            ConvexSet::intersection(vec![c.clone(), ConvexSet::ball(anchor.clone(), n)?], Vec::new(), Some(anchor.clone()))?
        });
    }
    let theta = |i: usize| 1.0 / (i as f64 + 2.0);
    let d: Vec<ConvexSet> = ks
        .iter()
        .enumerate()
        .map(|(i, k)| ConvexSet::scaled(k.clone(), anchor.clone(), 1.0 - theta(i)))
        .collect::<Result<_>>()?;
    let mut eps: Vec<f64> = (0..sets.len()).map(|i| theta(i) * m.min(i as f64 + 1.0)).collect();
    let mut delta: Vec<f64> = (0..sets.len())
        .map(|i| (theta(i) - theta(i + 1)) * m.min(i as f64 + 1.0))
        .collect();

    let tol = Tolerances::global();
    let mut cert = Certificate::new(CertificateKind::Nesting, "refine_sequence", tol.dist, seed);
    const ROUNDS: usize = 6;
    for (i, dn) in d.iter().enumerate() {
        let mut round = 0;
        loop {
            let mut rng = sampling::rng(sampling::derive_seed(seed, i as u64));
            let mut ok = true;
            for _ in 0..samples {
                let x = dn.sample(&mut rng, (i + 1) as f64)?;
                let u = sampling::unit_sphere(&mut rng, x.dim());
                let ye = x.axpy(eps[i] * 0.999, &u);
                let yd = x.axpy(delta[i] * 0.999, &u);
                let next_ok = match d.get(i + 1) {
                    Some(next) => next.contains(&yd, 0.0),
                    None => true,
                };
                if !sets[i].contains(&ye, 0.0) || !next_ok {
                    ok = false;
                    break;
                }
            }
            if ok {
                break;
            }
            round += 1;
            if round > ROUNDS {
                return Err(Error::stage(i + 1, "nesting margins could not be certified"));
            }
            eps[i] *= 0.5;
            delta[i] *= 0.5;
        }
        cert.samples += samples;
        cert.metric(format!("eps_{}", i + 1), eps[i]);
        cert.metric(format!("delta_{}", i + 1), delta[i]);
    }
    Ok(Refinement {
        sets: d,
        eps,
        delta,
        anchor: anchor.clone(),
        certificate: cert,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::set::Halfspace;

    fn v(c: &[f64]) -> Vector {
        Vector::from_slice(c)
    }

    #[test]
    fn inner_radius_of_square_hull() {
        let sq = ConvexSet::Generator(
            GeneratorSet::points(vec![v(&[-1.0, -1.0]), v(&[1.0, -1.0]), v(&[1.0, 1.0]), v(&[-1.0, 1.0])]).unwrap(),
        );
        let r = inner_radius(&sq, &v(&[0.5, 0.2])).unwrap();
        assert!((r - 0.9 * 0.5).abs() < 1e-9, "{r}");
        assert_eq!(inner_radius(&sq, &v(&[1.5, 0.0])).unwrap(), 0.0);
    }

    #[test]
    fn distance_examples() {
        let b = ConvexSet::ball(v(&[0.0, 0.0]), 1.0).unwrap();
        let p = distance(&b, &v(&[3.0, 0.0])).unwrap();
        assert!((p.dist - 2.0).abs() < 1e-12 && p.point.dist(&v(&[1.0, 0.0])) < 1e-12);
        let seg = ConvexSet::Generator(GeneratorSet::points(vec![v(&[0.0, 0.0]), v(&[1.0, 0.0])]).unwrap());
        let p = distance(&seg, &v(&[2.0, 1.0])).unwrap();
        assert!((p.dist - 2f64.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn minkowski_rejects_boundary_center() {
        let b = ConvexSet::ball(v(&[0.0, 0.0]), 1.0).unwrap();
        assert!(minkowski(&b, &v(&[1.0, 0.0]), &v(&[0.0, 0.0])).is_err());
        assert_eq!(minkowski(&b, &v(&[0.0, 0.0]), &v(&[0.0, 0.0])).unwrap(), 0.0);
    }

    #[test]
    fn slice_of_ball_is_disc() {
        let b = ConvexSet::ball(Vector::zeros(3), 1.0).unwrap();
        let s = slice_subspace(&b, &[Vector::basis(3, 0), Vector::basis(3, 1)]).unwrap();
        assert!(s.contains(&v(&[0.6, 0.7]), 0.0));
        assert!(!s.contains(&v(&[0.8, 0.7]), 0.0));
    }

    #[test]
    fn slice_misses_plane() {
        let a = ConvexSet::intersection(
            vec![ConvexSet::ball(Vector::zeros(3), 2.0).unwrap()],
            vec![
                Halfspace::new(v(&[0.0, 0.0, 1.0]), 1.0).unwrap(),
                Halfspace::new(v(&[0.0, 0.0, -1.0]), -1.0 + 1e-12).unwrap(),
            ],
            Some(v(&[0.0, 0.0, 1.0 - 1e-13])),
        );
        // a set that is (numerically) the disc at height 1
        if let Ok(a) = a {
            let s = slice_subspace(&a, &[Vector::basis(3, 0), Vector::basis(3, 1)]).unwrap();
            assert!(s.is_empty());
        }
    }

    #[test]
    fn refine_balls() {
        let cs: Vec<ConvexSet> = (1..=4).map(|n| ConvexSet::ball(v(&[0.0, 0.0]), n as f64).unwrap()).collect();
        let r = refine_sequence(&cs, &v(&[0.0, 0.0]), 200, 3).unwrap();
        assert!(r.certificate.passed());
        // D_2 = U(0, 2 * 2/3)
        let p = r.sets[1].project(&v(&[5.0, 0.0]), 1e-12).unwrap();
        assert!((p.point[0] - 4.0 / 3.0).abs() < 1e-12);
        assert!(r.eps.iter().all(|e| *e > 0.0));
    }
}
