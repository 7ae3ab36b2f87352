use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::pair::SubspacePair;
use crate::certificate::{Certificate, CertificateKind};
use crate::dc_calculus::{convexity_check, ConvexFn};
use crate::error::{Error, Result};
use crate::geometry::ConvexSet;
use crate::sampling;
use crate::tolerance::Tolerances;
use crate::vector::Vector;

const GOLDEN: f64 = 0.618_033_988_749_895;
const LAMBDA_FLOOR: f64 = 1e-10;

/// `f̃(x) = inf{λ g(u) + (1-λ) f(y) : x = λu + (1-λ)y, y ∈ Y, λ ∈ [0,1]}` for convex `f`
/// on `Y` (in `Y` coordinates) and convex `g ≥ f` on `X`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MajorantExtension {
    pub f: ConvexFn,
    pub g: ConvexFn,
    pub pair: SubspacePair,
    /// Golden-section iterations per search level.
    pub iters: usize,
}

/// Grid scan followed by golden section around the best grid point; errors count as `+∞`.
fn minimize_1d(h: impl Fn(f64) -> f64, lo: f64, hi: f64, grid: usize, iters: usize) -> (f64, f64) {
    let ts: Vec<f64> = (0..=grid).map(|i| lo + (hi - lo) * i as f64 / grid as f64).collect();
    let vals: Vec<f64> = ts.iter().map(|&t| h(t)).collect();
    let i = (0..vals.len()).fold(0, |b, j| if vals[j] < vals[b] { j } else { b });
    let mut best = (vals[i], ts[i]);
    let (mut a, mut b) = (ts[i.saturating_sub(1)], ts[(i + 1).min(grid)]);
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let (mut f1, mut f2) = (h(x1), h(x2));
    for _ in 0..iters {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN * (b - a);
            f1 = h(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (b - a);
            f2 = h(x2);
        }
    }
    for (v, t) in [(f1, x1), (f2, x2)] {
        if v < best.0 {
            best = (v, t);
        }
    }
    best
}

impl MajorantExtension {
    pub fn new(f: ConvexFn, g: ConvexFn, pair: SubspacePair) -> Self {
        MajorantExtension { f, g, pair, iters: 50 }
    }

    /// On `Y` the infimum is attained at `λ = 0`: any admissible `u` lies in `Y`, where
    /// `g ≥ f`, and convexity of `f` does the rest. Off `Y` it is searched for numerically.
    pub fn eval(&self, x: &Vector) -> Result<f64> {
        x.check_dim(self.pair.dim())?;
        if self.pair.perp_norm(x) <= 1e-12 * (1.0 + x.norm()) {
            return self.f.eval(&self.pair.coords(x));
        }
        self.eval_search(x)
    }

    fn phi(&self, x: &Vector, lam: f64, w: &Vector) -> f64 {
        let u = (x - &self.pair.lift(w)).scale(1.0 / lam);
        let y = w.scale(1.0 / (1.0 - lam));
        match (self.g.eval(&u), self.f.eval(&y)) {
            (Ok(gu), Ok(fy)) => lam * gu + (1.0 - lam) * fy,
            _ => f64::INFINITY,
        }
    }

    fn inner(&self, x: &Vector, lam: f64) -> (f64, Vector) {
        let k = self.pair.y_dim();
        let mut w = self.pair.coords(x).scale(1.0 - lam);
        let half = 2.0 * (x.norm() + 1.0);
        let mut val = self.phi(x, lam, &w);
        let cycles = if k == 1 { 1 } else { 3 };
        for _ in 0..cycles {
            for i in 0..k {
                let c = w[i];
                let (v, t) = minimize_1d(
                    |t| {
                        let mut z = w.clone();
                        z[i] = t;
                        self.phi(x, lam, &z)
                    },
                    c - half,
                    c + half,
                    12,
                    self.iters,
                );
                if v < val {
                    val = v;
                    w[i] = t;
                }
            }
        }
        (val, w)
    }

    /// The numerical infimum over `(λ, w)` with `w = (1-λ)y`, capped by `g(x)` (`λ = 1`).
    /// An upper bound for the exact value.
    pub fn eval_search(&self, x: &Vector) -> Result<f64> {
        x.check_dim(self.pair.dim())?;
        let (v, lam) = minimize_1d(|l| self.inner(x, l).0, LAMBDA_FLOOR, 1.0 - LAMBDA_FLOOR, 12, self.iters);
        let gx = self.g.eval(x);
        match gx {
            Ok(gx) => Ok(v.min(gx)),
            Err(_) if v.is_finite() => Ok(v),
            Err(e) => Err(Error::NotConverged {
                what: format!("majorant extension search ({e})"),
                iterations: self.iters,
                best: v,
                best_point: vec![lam],
            }),
        }
    }
}

#[derive(Clone, Debug)]
pub struct MajorantOptions {
    /// `Y` samples for `f ≤ g` and agreement.
    pub samples: usize,
    /// Off-`Y` points evaluated by search for `f̃ ≤ g` and convexity.
    pub search_samples: usize,
    /// Radius of the sampled region.
    pub radius: f64,
    pub seed: u64,
}

impl Default for MajorantOptions {
    fn default() -> Self {
        MajorantOptions {
            samples: 1000,
            search_samples: 16,
            radius: 2.0,
            seed: 0,
        }
    }
}

/// `f ≤ g` on `Y`, sampled in the ball of radius `radius` of `Y`.
pub fn domination_certificate(f: &ConvexFn, g: &ConvexFn, pair: &SubspacePair, samples: usize, radius: f64, seed: u64) -> Result<Certificate> {
    let tol = Tolerances::global().cert;
    let mut cert = Certificate::new(CertificateKind::Domination, "f <= g on Y", tol, seed);
    let mut rng = sampling::rng(seed);
    for _ in 0..samples {
        let y = sampling::in_ball(&mut rng, &Vector::zeros(pair.y_dim()), radius);
        let x = pair.lift(&y);
        cert.observe(f.eval(&y)?, g.eval(&x)?, || vec![x.coords().to_vec()], "f > g");
    }
    Ok(cert)
}

/// The convex extension of `f` below the majorant `g`, with a certificate covering
/// `f̃ = f` on `Y`, `f̃ ≤ g` and convexity of `f̃` on samples.
pub fn majorant_to_extension(f: &ConvexFn, g: &ConvexFn, pair: &SubspacePair, opts: &MajorantOptions) -> Result<(ConvexFn, Certificate)> {
    let pre = domination_certificate(f, g, pair, opts.samples, opts.radius, opts.seed)?;
    if !pre.passed() {
        return Err(Error::CertificationFailed(Box::new(pre)));
    }
    let ext = Arc::new(MajorantExtension::new(f.clone(), g.clone(), pair.clone()));
    let fe = ConvexFn::MajorantExtension(ext.clone());
    let tol = Tolerances::global().cert;
    let mut cert = Certificate::new(CertificateKind::Agreement, "majorant extension", tol, opts.seed);
    cert.absorb(&pre);

    let mut rng = sampling::rng(sampling::derive_seed(opts.seed, 1));
    for _ in 0..opts.samples {
        let y = sampling::in_ball(&mut rng, &Vector::zeros(pair.y_dim()), opts.radius);
        let x = pair.lift(&y);
        let (a, b) = (fe.eval(&x)?, f.eval(&y)?);
        cert.observe((a - b).abs(), 0.0, || vec![x.coords().to_vec()], "extension differs from f on Y");
    }
    for _ in 0..opts.search_samples {
        let x = sampling::in_ball(&mut rng, &Vector::zeros(pair.dim()), opts.radius);
        cert.observe(ext.eval_search(&x)?, g.eval(&x)?, || vec![x.coords().to_vec()], "extension exceeds g");
    }
    let ball = ConvexSet::ball(Vector::zeros(pair.dim()), opts.radius)?;
    let conv = convexity_check(&fe, &ball, opts.search_samples, sampling::derive_seed(opts.seed, 2), 1e-5)?;
    cert.absorb(&conv);
    Ok((fe, cert))
}

/// `g = u - a` for an affine minorant `a` of `v` touching it at `at`, so that
/// `(u - v)|_Y ≤ g|_Y`. The slope is a central-difference gradient of `v`.
pub fn dc_to_majorant(u: &ConvexFn, v: &ConvexFn, at: &Vector, radius: f64, samples: usize, seed: u64) -> Result<(ConvexFn, Certificate)> {
    let n = at.dim();
    let h = 1e-6 * (1.0 + at.norm());
    let mut slope = Vector::zeros(n);
    for i in 0..n {
        let e = Vector::basis(n, i);
        slope[i] = (v.eval(&at.axpy(h, &e))? - v.eval(&at.axpy(-h, &e))?) / (2.0 * h);
    }
    let v0 = v.eval(at)?;
    let a = ConvexFn::affine(slope.clone(), v0 - slope.dot(at));
    let tol = Tolerances::global().cert.max(10.0 * h);
    let mut cert = Certificate::new(CertificateKind::Domination, "affine minorant a <= v", tol, seed);
    let mut rng = sampling::rng(seed);
    for _ in 0..samples {
        let x = sampling::in_ball(&mut rng, at, radius);
        cert.observe(a.eval(&x)?, v.eval(&x)?, || vec![x.coords().to_vec()], "a > v");
    }
    if !cert.passed() {
        return Err(Error::CertificationFailed(Box::new(cert)));
    }
    Ok((u.clone().plus(ConvexFn::affine(slope.scale(-1.0), slope.dot(at) - v0)), cert))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector {
        Vector::from_slice(c)
    }

    fn square_plus_ten() -> (ConvexFn, ConvexFn, SubspacePair) {
        let f = ConvexFn::squared_norm_from(Vector::zeros(1));
        let g = ConvexFn::squared_norm_from(Vector::zeros(2)).plus(ConvexFn::constant(10.0));
        (f, g, SubspacePair::coordinate(2, 1).unwrap())
    }

    #[test]
    fn search_matches_closed_form() {
        // minimizing over w gives s², over λ gives 2√10|t| for |t| ≤ √10
        let (f, g, pair) = square_plus_ten();
        let e = MajorantExtension::new(f, g, pair);
        for (s, t) in [(0.0, 0.5), (1.0, 1.0), (-0.7, 2.0), (0.3, -0.2)] {
            let want = s * s + 2.0 * 10f64.sqrt() * f64::abs(t);
            let got = e.eval(&v(&[s, t])).unwrap();
            assert!((got - want).abs() < 1e-6, "{s} {t}: {got} vs {want}");
        }
        let t = 5.0;
        assert!((e.eval(&v(&[0.0, t])).unwrap() - (t * t + 10.0)).abs() < 1e-6);
    }

    #[test]
    fn agrees_on_y() {
        let (f, g, pair) = square_plus_ten();
        let e = MajorantExtension::new(f, g, pair);
        assert_eq!(e.eval(&v(&[1.5, 0.0])).unwrap(), 2.25);
        assert!((e.eval_search(&v(&[1.5, 0.0])).unwrap() - 2.25).abs() < 1e-6);
    }

    #[test]
    fn certified_extension() {
        let (f, g, pair) = square_plus_ten();
        let opts = MajorantOptions {
            samples: 200,
            search_samples: 8,
            ..Default::default()
        };
        let (_, cert) = majorant_to_extension(&f, &g, &pair, &opts).unwrap();
        assert!(cert.passed(), "{cert}");
    }

    #[test]
    fn linear_below_constant() {
        let f = ConvexFn::affine(v(&[1.0]), 0.0);
        let g = ConvexFn::constant(100.0);
        let pair = SubspacePair::coordinate(2, 1).unwrap();
        let e = MajorantExtension::new(f, g, pair);
        assert_eq!(e.eval(&v(&[-3.0, 0.0])).unwrap(), -3.0);
        assert!(e.eval(&v(&[1.0, 1.0])).unwrap() <= 100.0);
    }

    #[test]
    fn norm_minorant_at_e1() {
        let u = ConvexFn::squared_norm_from(Vector::zeros(2));
        let nv = ConvexFn::norm_from(Vector::zeros(2));
        let (g, cert) = dc_to_majorant(&u, &nv, &v(&[1.0, 0.0]), 3.0, 500, 0).unwrap();
        assert!(cert.passed());
        // g = |x|² - x_1
        assert!((g.eval(&v(&[2.0, 1.0])).unwrap() - 3.0).abs() < 1e-6);
        let pair = SubspacePair::coordinate(2, 1).unwrap();
        let f = ConvexFn::squared_norm_from(Vector::zeros(1));
        let dom = domination_certificate(&f.plus(ConvexFn::norm_from(Vector::zeros(1)).scale(-1.0)), &g, &pair, 200, 3.0, 1).unwrap();
        assert!(dom.passed());
    }
}
