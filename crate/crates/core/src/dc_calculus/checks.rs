use rand::Rng;

use super::convex_fn::ConvexFn;
use super::mapping::Mapping;
use crate::certificate::{Certificate, CertificateKind};
use crate::error::{Error, Result};
use crate::geometry::ConvexSet;
use crate::sampling::{self, SeededRng};
use crate::tolerance::Tolerances;
use crate::vector::Vector;

/// Sample cap for unbounded domains.
pub const UNBOUNDED_CAP: f64 = 10.0;

/// Sampling budget and tolerance for certificate-producing checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckOptions {
    pub pairs: usize,
    pub functionals: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            pairs: 400,
            functionals: 16,
            seed: 0,
            tol: Tolerances::global().cert,
        }
    }
}

impl CheckOptions {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Point pairs in `domain`: alternately independent and close together.
pub(crate) fn sample_pairs(domain: &ConvexSet, count: usize, rng: &mut SeededRng) -> Result<Vec<(Vector, Vector)>> {
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let x = domain.sample(rng, UNBOUNDED_CAP)?;
        let z = domain.sample(rng, UNBOUNDED_CAP)?;
        let y = if i % 2 == 0 {
            z
        } else {
            let s = 10f64.powf(sampling::uniform(rng, -4.0, -1.0));
            x.lerp(&z, s)
        };
        out.push((x, y));
    }
    Ok(out)
}

/// Midpoint convexity of an arbitrary scalar function on sampled pairs.
pub fn convexity_check_with(
    f: impl Fn(&Vector) -> Result<f64>,
    domain: &ConvexSet,
    samples: usize,
    seed: u64,
    tol: f64,
    label: &str,
) -> Result<Certificate> {
    if domain.is_empty() {
        return Err(Error::invalid("convexity check on the empty set"));
    }
    let mut rng = sampling::rng(seed);
    let mut cert = Certificate::new(CertificateKind::Convexity, label, tol, seed);
    for (x, y) in sample_pairs(domain, samples, &mut rng)? {
        let m = x.midpoint(&y);
        let (fx, fy, fm) = (f(&x)?, f(&y)?, f(&m)?);
        cert.observe(fm, 0.5 * (fx + fy), || vec![x.coords().to_vec(), y.coords().to_vec()], "midpoint above chord");
    }
    Ok(cert)
}

pub fn convexity_check(f: &ConvexFn, domain: &ConvexSet, samples: usize, seed: u64, tol: f64) -> Result<Certificate> {
    convexity_check_with(|x| f.eval(x), domain, samples, seed, tol, "convexity")
}

/// Largest sampled difference quotient: a lower bound on the Lipschitz constant.
pub fn lipschitz_estimate_with(f: impl Fn(&Vector) -> Result<f64>, domain: &ConvexSet, samples: usize, seed: u64) -> Result<f64> {
    if !domain.is_bounded() || domain.is_empty() {
        return Err(Error::invalid("Lipschitz estimate needs a bounded non-empty domain"));
    }
    let mut rng = sampling::rng(seed);
    let mut best = 0.0f64;
    for (x, y) in sample_pairs(domain, samples, &mut rng)? {
        let d = x.dist(&y);
        if d > 0.0 {
            best = best.max((f(&x)? - f(&y)?).abs() / d);
        }
    }
    Ok(best)
}

pub fn lipschitz_estimate(f: &ConvexFn, domain: &ConvexSet, samples: usize, seed: u64) -> Result<f64> {
    lipschitz_estimate_with(|x| f.eval(x), domain, samples, seed)
}

/// Lipschitz estimate of a vector mapping.
pub fn mapping_lipschitz_estimate(f: &Mapping, domain: &ConvexSet, samples: usize, seed: u64) -> Result<f64> {
    if !domain.is_bounded() || domain.is_empty() {
        return Err(Error::invalid("Lipschitz estimate needs a bounded non-empty domain"));
    }
    let mut rng = sampling::rng(seed);
    let mut best = 0.0f64;
    for (x, y) in sample_pairs(domain, samples, &mut rng)? {
        let d = x.dist(&y);
        if d > 0.0 {
            best = best.max(f.eval(&x)?.dist(&f.eval(&y)?) / d);
        }
    }
    Ok(best)
}

/// Sampled `sup |F|` over the domain.
pub fn sup_norm_estimate(f: &Mapping, domain: &ConvexSet, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = sampling::rng(seed);
    let mut best = 0.0f64;
    for _ in 0..samples {
        let x = domain.sample(&mut rng, UNBOUNDED_CAP)?;
        best = best.max(f.eval(&x)?.norm());
    }
    Ok(best)
}

/// Unit functionals on R^m: the `2m` signed coordinate functionals plus `extra` random ones.
pub(crate) fn functionals(m: usize, extra: usize, rng: &mut impl Rng) -> Vec<Vector> {
    let mut out: Vec<Vector> = (0..m)
        .flat_map(|i| [Vector::basis(m, i), Vector::basis(m, i).scale(-1.0)])
        .collect();
    out.extend((0..extra).map(|_| sampling::unit_sphere(rng, m)));
    out
}

/// Checks that `y*∘F + control` is midpoint convex on `domain` for sampled unit `y*`.
pub fn control_check_parts(map: &Mapping, control: &ConvexFn, domain: &ConvexSet, opts: &CheckOptions) -> Result<Certificate> {
    if domain.is_empty() {
        return Err(Error::invalid("control check on the empty set"));
    }
    let mut rng = sampling::rng(opts.seed);
    let pairs = sample_pairs(domain, opts.pairs, &mut rng)?;
    let m = map.eval(&pairs[0].0)?.dim();
    let ys = functionals(m, opts.functionals, &mut rng);
    let mut cert = Certificate::new(CertificateKind::Control, "control", opts.tol, opts.seed);
    for (x, y) in &pairs {
        let mid = x.midpoint(y);
        let (fx, fy, fm) = (map.eval(x)?, map.eval(y)?, map.eval(&mid)?);
        let (cx, cy, cm) = (control.eval(x)?, control.eval(y)?, control.eval(&mid)?);
        for u in &ys {
            let lhs = u.dot(&fm) + cm;
            let rhs = 0.5 * (u.dot(&fx) + cx + u.dot(&fy) + cy);
            cert.observe(
                lhs,
                rhs,
                || vec![x.coords().to_vec(), y.coords().to_vec(), u.coords().to_vec()],
                "y*F + control not midpoint convex",
            );
        }
    }
    cert.metric("functionals", ys.len() as f64);
    Ok(cert)
}

/// A d.c. mapping with a control function that passed [`control_check_parts`].
#[derive(Clone, Debug)]
pub struct DcFn {
    map: Mapping,
    control: ConvexFn,
    domain: ConvexSet,
    certificate: Certificate,
}

impl DcFn {
    pub fn new(map: Mapping, control: ConvexFn, domain: ConvexSet, opts: &CheckOptions) -> Result<DcFn> {
        let certificate = control_check_parts(&map, &control, &domain, opts)?;
        if !certificate.passed() {
            return Err(Error::CertificationFailed(Box::new(certificate)));
        }
        Ok(DcFn {
            map,
            control,
            domain,
            certificate,
        })
    }

    /// A scalar convex function, controlled by itself.
    pub fn from_convex(f: ConvexFn, domain: ConvexSet, opts: &CheckOptions) -> Result<DcFn> {
        DcFn::new(Mapping::scalar(f.clone()), f, domain, opts)
    }

    pub fn eval(&self, x: &Vector) -> Result<Vector> {
        self.map.eval(x)
    }

    pub fn map(&self) -> &Mapping {
        &self.map
    }

    pub fn control(&self) -> &ConvexFn {
        &self.control
    }

    pub fn domain(&self) -> &ConvexSet {
        &self.domain
    }

    pub fn certificate(&self) -> &Certificate {
        &self.certificate
    }

    pub fn out_dim(&self) -> Result<usize> {
        let p = self
            .domain
            .reference_point()
            .ok_or_else(|| Error::invalid("empty domain"))?;
        Ok(self.map.eval(&p)?.dim())
    }
}

pub fn control_check(f: &DcFn, opts: &CheckOptions) -> Result<Certificate> {
    control_check_parts(&f.map, &f.control, &f.domain, opts)
}

/// One witness ball `B(center, radius)` with probe points inside it.
#[derive(Clone, Debug)]
pub struct WitnessBall {
    pub center: Vector,
    pub radius: f64,
    pub probes: Vec<Vector>,
}

/// Finite-scale hypotheses of the non-d.c. criterion: centres in `lambda * A`, balls inside
/// `A` with non-increasing radii, and a probe in every ball where `f` exceeds `threshold`.
pub fn ndc_witness_check(
    f: impl Fn(&Vector) -> Result<f64>,
    a: &ConvexSet,
    lambda: f64,
    balls: &[WitnessBall],
    threshold: f64,
) -> Result<Certificate> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::invalid("lambda must lie in (0, 1)"));
    }
    if balls.is_empty() {
        return Err(Error::invalid("no witness balls"));
    }
    let zero = Vector::zeros(a.dim());
    crate::geometry::check_interior(a, &zero)?;
    let tol = Tolerances::global();
    let mut cert = Certificate::new(CertificateKind::NdcWitness, "non-d.c. witness", 0.0, 0);
    let mut prev = f64::INFINITY;
    let mut min_peak = f64::INFINITY;
    for (i, b) in balls.iter().enumerate() {
        let mu = a.gauge(&zero, &b.center)?;
        if mu > lambda + tol.mink {
            return Err(Error::stage(i + 1, format!("centre has gauge {mu} > lambda")));
        }
        if crate::geometry::inner_radius(a, &b.center)? < b.radius {
            return Err(Error::stage(i + 1, "witness ball is not inside A"));
        }
        cert.require(b.radius > 0.0 && b.radius <= prev, || vec![b.center.coords().to_vec()], "radii must be positive and non-increasing");
        prev = b.radius;
        let mut peak = f64::NEG_INFINITY;
        for p in &b.probes {
            if p.dist(&b.center) <= b.radius * (1.0 + 1e-12) {
                peak = peak.max(f(p)?);
            }
        }
        min_peak = min_peak.min(peak);
        cert.observe(threshold, peak, || vec![b.center.coords().to_vec()], "no probe above the threshold");
    }
    cert.tolerance = 0.0;
    cert.metric("threshold", threshold);
    cert.metric("min_peak", min_peak);
    cert.metric("last_radius", prev);
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball(r: f64) -> ConvexSet {
        ConvexSet::ball(Vector::zeros(2), r).unwrap()
    }

    #[test]
    fn convexity_examples() {
        let q = ConvexFn::squared_norm_from(Vector::zeros(2));
        assert!(convexity_check(&q, &ball(1.0), 500, 1, 1e-12).unwrap().passed());
        let neg = q.clone().scale(-1.0);
        let c = convexity_check(&neg, &ball(1.0), 500, 1, 1e-12).unwrap();
        assert!(!c.passed());
        assert_eq!(c.worst.unwrap().points.len(), 2);
    }

    #[test]
    fn lipschitz_examples() {
        let w = Vector::from_slice(&[3.0, 4.0]);
        let l = lipschitz_estimate(&ConvexFn::affine(w, 1.0), &ball(1.0), 10_000, 2).unwrap();
        assert!(l <= 5.0 + 1e-9 && l >= 0.95 * 5.0);
        let l = lipschitz_estimate(&ConvexFn::squared_norm_from(Vector::zeros(2)), &ball(1.0), 10_000, 2).unwrap();
        assert!(l > 1.8 && l <= 2.0 + 1e-9);
        assert_eq!(lipschitz_estimate(&ConvexFn::constant(3.0), &ball(1.0), 100, 2).unwrap(), 0.0);
    }

    #[test]
    fn control_of_scalar_convex() {
        let f = ConvexFn::squared_norm_from(Vector::zeros(2));
        let opts = CheckOptions::default();
        assert!(DcFn::from_convex(f.clone(), ball(1.0), &opts).is_ok());
        let bad = DcFn::new(Mapping::scalar(f), ConvexFn::constant(0.0), ball(1.0), &opts);
        assert!(matches!(bad, Err(Error::CertificationFailed(_))));
    }

    #[test]
    fn witness_for_bounded_function_fails_above_bound() {
        let a = ball(2.0);
        let balls = vec![WitnessBall {
            center: Vector::from_slice(&[0.5, 0.0]),
            radius: 0.1,
            probes: vec![Vector::from_slice(&[0.55, 0.0])],
        }];
        let c = ndc_witness_check(|_| Ok(1.0), &a, 0.5, &balls, 10.0).unwrap();
        assert!(!c.passed());
        let far = vec![WitnessBall {
            center: Vector::from_slice(&[1.5, 0.0]),
            radius: 0.1,
            probes: vec![],
        }];
        assert!(ndc_witness_check(|_| Ok(1.0), &a, 0.5, &far, 10.0).is_err());
    }
}
