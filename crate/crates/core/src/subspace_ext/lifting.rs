use super::pair::SubspacePair;
use super::sequences::SetSequence;
use crate::certificate::{Certificate, CertificateKind};
use crate::dc_calculus::ConvexFn;
use crate::error::{Error, Result};
use crate::geometry::{inner_radius, Ball, ConvexSet, GeneratorSet, ImplicitSpec};
use crate::sampling;
use crate::tolerance::Tolerances;
use crate::vector::Vector;

const RADIAL_CAP: f64 = 1e6;

/// `sup{t : f(p + t u) < level}`, by doubling then bisection; infinite past `RADIAL_CAP`.
fn radial_level(f: &ConvexFn, p: &Vector, u: &Vector, level: f64) -> Result<f64> {
    let below = |t: f64| -> Result<bool> { Ok(f.eval(&p.axpy(t, u))? < level) };
    let mut hi = 1.0;
    while below(hi)? {
        hi *= 2.0;
        if hi > RADIAL_CAP {
            return Ok(f64::INFINITY);
        }
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if below(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Sublevel sets `D_n = {x : f̂(x) < n}`, `n = 1..=count`, with margins estimated
/// from sampled boundary points. Levels not exceeding `f̂(anchor)` give empty sets.
pub fn sets_from_extension(fhat: &ConvexFn, anchor: &Vector, count: usize, directions: usize, seed: u64) -> Result<SetSequence> {
    let f0 = fhat.eval(anchor)?;
    let dim = anchor.dim();
    let mut rng = sampling::rng(seed);
    let dirs: Vec<Vector> = (0..dim)
        .flat_map(|i| [Vector::basis(dim, i), Vector::basis(dim, i).scale(-1.0)])
        .chain((0..directions).map(|_| sampling::unit_sphere(&mut rng, dim)))
        .collect();
    let mut sets = Vec::with_capacity(count);
    for n in 1..=count {
        let level = n as f64;
        if f0 >= level {
            sets.push(ConvexSet::Empty { dim });
            continue;
        }
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for u in &dirs {
            let r = radial_level(fhat, anchor, u, level)?;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        let spec = ImplicitSpec::Sublevel {
            function: fhat.clone(),
            level,
            interior_point: anchor.clone(),
            // the distance to the complement is the least radial extent
            margin: 0.9 * lo,
            bounding_radius: hi.is_finite().then_some(1.1 * hi),
        };
        sets.push(ConvexSet::Implicit(spec.build()?));
    }
    let seq = SetSequence::new(sets)?;
    let margins = sampled_margins(&seq, directions, seed)?;
    seq.with_margins(margins)
}

/// Like [`SetSequence::margins_or_estimate`] but empty sets get an infinite margin.
fn sampled_margins(seq: &SetSequence, directions: usize, seed: u64) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, w) in seq.sets.windows(2).enumerate() {
        if w[0].is_empty() {
            out.push(f64::INFINITY);
            continue;
        }
        let pair = SetSequence::new(w.to_vec())?;
        out.push(pair.margins_or_estimate(directions, sampling::derive_seed(seed, i as u64))?[0]);
    }
    Ok(out)
}

fn as_generator(set: &ConvexSet, what: &str) -> Result<Option<GeneratorSet>> {
    match set {
        ConvexSet::Empty { .. } => Ok(None),
        ConvexSet::Generator(g) => Ok(Some(g.clone())),
        _ => Err(Error::invalid(format!("{what} must be given by generators"))),
    }
}

/// `C̃_n = conv(D_n ∪ C_n)` from the first `n_0` with `D_{n_0} ∩ Y ≠ ∅`; before that,
/// `conv(U(c, r) ∪ C_n)` from the first nonempty `C_{n_1}`, and empty sets before `n_1`.
/// `C` lives in `Y` coordinates. Both `C_n` and `D_n` must be generator sets.
pub fn lift_sequence(c: &SetSequence, d: &SetSequence, pair: &SubspacePair, samples: usize, seed: u64) -> Result<(SetSequence, Certificate)> {
    if c.len() != d.len() {
        return Err(Error::invalid("lift_sequence: sequences differ in length"));
    }
    let tol = Tolerances::global().dist.max(1e-7);
    let origin = Vector::zeros(pair.dim());
    let mut cert = Certificate::new(CertificateKind::Membership, "lifted sets meet Y in C_n", tol, seed);
    let mut rng = sampling::rng(seed);

    let mut slices = Vec::with_capacity(d.len());
    for (i, dn) in d.sets.iter().enumerate() {
        let s = pair.slice(dn)?;
        if !s.is_empty() {
            for _ in 0..samples {
                let y = s.sample(&mut rng, (i + 1) as f64)?;
                if !c.sets[i].contains(&y, tol) {
                    return Err(Error::stage(i + 1, format!("D_n ∩ Y ⊄ C_n at {y}")));
                }
            }
            cert.samples += samples;
        }
        slices.push(s);
    }
    let n0 = slices
        .iter()
        .position(|s| !s.is_empty())
        .ok_or_else(|| Error::invalid("lift_sequence: every D_n misses Y"))?;
    let n1 = c
        .sets
        .iter()
        .position(|s| !s.is_empty())
        .ok_or_else(|| Error::invalid("lift_sequence: every C_n is empty"))?;

    let embedded = |i: usize| -> Result<Option<GeneratorSet>> {
        as_generator(&c.sets[i], "C_n")?
            .map(|g| g.embed(&origin, pair.y_basis()))
            .transpose()
    };
    let mut lifted = vec![ConvexSet::Empty { dim: pair.dim() }; c.len()];
    for i in n0..c.len() {
        let dn = as_generator(&d.sets[i], "D_n")?.expect("D_n meets Y");
        let hull = match embedded(i)? {
            Some(cn) => dn.union(&cn)?,
            None => dn,
        };
        lifted[i] = ConvexSet::Generator(hull);
    }
    if n1 < n0 {
        let cy = c.sets[n1].reference_point().expect("non-empty");
        let cx = pair.lift(&cy);
        let r = 0.9 * inner_radius(&c.sets[n1], &cy)?.min(inner_radius(&lifted[n0], &cx)?);
        if !(r > 0.0) {
            return Err(Error::stage(n1 + 1, "no ball around c fits in both C_{n1} and the first lifted set"));
        }
        let ball = GeneratorSet::new(Vec::new(), vec![Ball::new(cx, r)?])?;
        for i in n1..n0 {
            let cn = embedded(i)?.expect("C_n nonempty from n1 on");
            lifted[i] = ConvexSet::Generator(ball.union(&cn)?);
        }
        cert.metric("patch_radius", r);
    }
    cert.metric("n0", (n0 + 1) as f64);
    cert.metric("n1", (n1 + 1) as f64);

    // C̃_n ∩ Y = C_n, both directions
    for (i, ln) in lifted.iter().enumerate() {
        if ln.is_empty() {
            cert.require(c.sets[i].is_empty(), Vec::new, &format!("C̃_{} empty but C_{} is not", i + 1, i + 1));
            continue;
        }
        let s = pair.slice(ln)?;
        for _ in 0..samples {
            let y = s.sample(&mut rng, (i + 1) as f64)?;
            cert.require(c.sets[i].contains(&y, tol), || vec![y.coords().to_vec()], "slice point outside C_n");
            let y = c.sets[i].sample(&mut rng, (i + 1) as f64)?;
            let x = pair.lift(&y);
            cert.require(ln.contains(&x, tol), || vec![x.coords().to_vec()], "C_n point outside the lifted set");
        }
    }
    Ok((SetSequence::new(lifted)?, cert))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector {
        Vector::from_slice(c)
    }

    #[test]
    fn norm_sublevels_are_balls() {
        let f = ConvexFn::norm_from(Vector::zeros(2));
        let s = sets_from_extension(&f, &Vector::zeros(2), 3, 32, 0).unwrap();
        assert!(s.sets[1].contains(&v(&[1.9, 0.0]), 0.0));
        assert!(!s.sets[1].contains(&v(&[0.0, 2.1]), 0.0));
        let m = s.margins.unwrap();
        assert!(m.iter().all(|x| *x > 0.5 && *x <= 1.0));
        let sq = ConvexFn::squared_norm_from(Vector::zeros(2));
        let s = sets_from_extension(&sq, &Vector::zeros(2), 4, 16, 0).unwrap();
        assert!(s.sets[3].contains(&v(&[1.99, 0.0]), 0.0) && !s.sets[3].contains(&v(&[2.01, 0.0]), 0.0));
    }

    #[test]
    fn lift_interval_through_discs() {
        let pair = SubspacePair::coordinate(2, 1).unwrap();
        let c = SetSequence::new(
            (1..=3)
                .map(|n| ConvexSet::Generator(GeneratorSet::points(vec![v(&[-(n as f64)]), v(&[n as f64])]).unwrap()))
                .collect(),
        )
        .unwrap();
        let d = SetSequence::new((1..=3).map(|n| ConvexSet::ball(Vector::zeros(2), n as f64).unwrap()).collect()).unwrap();
        let (l, cert) = lift_sequence(&c, &d, &pair, 100, 0).unwrap();
        assert!(cert.passed(), "{cert}");
        assert!(l.sets[2].contains(&v(&[0.0, 2.9]), 1e-9));
    }

    #[test]
    fn early_empty_sets_are_patched() {
        let pair = SubspacePair::coordinate(2, 1).unwrap();
        let seg = |n: f64| ConvexSet::Generator(GeneratorSet::points(vec![v(&[-n]), v(&[n])]).unwrap());
        let c = SetSequence::new(vec![ConvexSet::Empty { dim: 1 }, seg(2.0), seg(3.0), seg(4.0)]).unwrap();
        let off = |n: f64| ConvexSet::ball(v(&[0.0, 5.0]), n).unwrap();
        let d = SetSequence::new(vec![off(1.0), off(2.0), ConvexSet::ball(Vector::zeros(2), 3.0).unwrap(), ConvexSet::ball(Vector::zeros(2), 4.0).unwrap()]).unwrap();
        let (l, cert) = lift_sequence(&c, &d, &pair, 100, 0).unwrap();
        assert!(cert.passed(), "{cert}");
        assert!(l.sets[0].is_empty());
        assert!(!l.sets[1].is_empty());
        assert_eq!(cert.get_metric("n0"), Some(3.0));
    }
}
