use serde::{Deserialize, Serialize};

use crate::certificate::{Certificate, CertificateKind};
use crate::dc_calculus::{convexity_check, lipschitz_estimate, ConvexFn};
use crate::error::{Error, Result};
use crate::geometry::{ConvexSet, SetRef};
use crate::sampling;
use crate::tolerance::Tolerances;
use crate::vector::Vector;

const STARTS_RANDOM: usize = 8;
const MAX_ITER: usize = 500;

/// `x -> inf_{c ∈ C} f(c) + L ||x - c||`
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InfConvolution {
    pub child: ConvexFn,
    pub lipschitz: f64,
    pub domain: SetRef,
}

impl InfConvolution {
    pub fn new(child: ConvexFn, lipschitz: f64, domain: ConvexSet) -> Self {
        InfConvolution {
            child,
            lipschitz,
            domain: SetRef(domain),
        }
    }

    /// Exact on the domain. Elsewhere the best value found by projected descent from
    /// the nearest point, the reference point and a few seeded random points, so an
    /// upper bound.
    pub fn eval(&self, x: &Vector) -> Result<f64> {
        let set = &self.domain.0;
        let tol = Tolerances::global().dist;
        if set.contains(x, 0.0) {
            return self.child.eval(x);
        }
        let l = self.lipschitz;
        let phi = |c: &Vector| -> Result<f64> { Ok(self.child.eval(c)? + l * c.dist(x)) };
        let nearest = set.project(x, tol)?;
        let mut starts = vec![nearest.point.clone()];
        starts.extend(set.reference_point());
        let mut rng = sampling::rng(0x1c0f);
        for _ in 0..STARTS_RANDOM {
            starts.push(set.sample(&mut rng, nearest.dist + 1.0)?);
        }
        let mut best = f64::INFINITY;
        for (i, s) in starts.into_iter().enumerate() {
            // the nearest point is usually optimal; random starts only matter when it is far off
            let iters = if i == 0 { MAX_ITER } else { MAX_ITER / 10 };
            best = best.min(self.descend(s, &phi, iters, nearest.dist.max(1e-3))?);
        }
        if best.is_finite() {
            Ok(best)
        } else {
            Err(Error::NotConverged {
                what: "inf-convolution".into(),
                iterations: MAX_ITER,
                best,
                best_point: x.coords().to_vec(),
            })
        }
    }

    fn descend(&self, start: Vector, phi: &impl Fn(&Vector) -> Result<f64>, iters: usize, scale: f64) -> Result<f64> {
        let set = &self.domain.0;
        let tol = Tolerances::global().dist;
        let mut c = start;
        let mut val = phi(&c)?;
        let mut step = 0.1 * scale;
        let h = 1e-7 * (1.0 + scale);
        for _ in 0..iters {
            let mut g = Vector::zeros(c.dim());
            for i in 0..c.dim() {
                let mut p = c.clone();
                let mut q = c.clone();
                p[i] += h;
                q[i] -= h;
                g[i] = (phi(&p)? - phi(&q)?) / (2.0 * h);
            }
            let gn = g.norm();
            if gn == 0.0 {
                break;
            }
            let cand = set.project(&c.axpy(-step / gn, &g), tol)?.point;
            let cv = phi(&cand)?;
            if cv < val {
                c = cand;
                val = cv;
                step *= 1.5;
            } else {
                step *= 0.5;
                if step < 1e-12 * scale {
                    break;
                }
            }
        }
        Ok(val)
    }
}

/// Lipschitz convex extension of `f` from `domain` to the whole space.
pub fn lipschitz_convex_extend(
    f: &ConvexFn,
    domain: &ConvexSet,
    lipschitz: f64,
    samples: usize,
    seed: u64,
) -> Result<(ConvexFn, Certificate)> {
    let mut cert = Certificate::new(CertificateKind::Lipschitz, "extension hypotheses", Tolerances::global().cert, seed);
    let est = lipschitz_estimate(f, domain, samples, seed)?;
    cert.observe(est, lipschitz, Vec::new, "sampled Lipschitz constant exceeds L");
    cert.metric("lipschitz_estimate", est);
    cert.absorb(&convexity_check(f, domain, samples, seed, Tolerances::global().cert)?);
    if !cert.passed() {
        return Err(Error::CertificationFailed(Box::new(cert)));
    }
    let ext = ConvexFn::InfConvExtension(std::sync::Arc::new(InfConvolution::new(f.clone(), lipschitz, domain.clone())));
    Ok((ext, cert))
}
