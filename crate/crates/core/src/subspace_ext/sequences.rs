use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::certificate::{Certificate, CertificateKind};
use crate::dc_calculus::ConvexFn;
use crate::error::{Error, Result};
use crate::geometry::{inner_radius, ConvexSet, SetRef};
use crate::sampling;
use crate::tolerance::Tolerances;
use crate::vector::Vector;

/// A nondecreasing list of convex sets. `margins[n]` is a lower bound for
/// `dist(C_n, X ∖ C_{n+1})`, i.e. `C_n + margins[n] B ⊂ C_{n+1}`.
#[derive(Clone, Debug)]
pub struct SetSequence {
    pub sets: Vec<ConvexSet>,
    pub margins: Option<Vec<f64>>,
}

impl SetSequence {
    pub fn new(sets: Vec<ConvexSet>) -> Result<Self> {
        if sets.is_empty() {
            return Err(Error::invalid("set sequence is empty"));
        }
        let dim = sets[0].dim();
        if let Some(s) = sets.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: s.dim(),
            });
        }
        Ok(SetSequence { sets, margins: None })
    }

    pub fn with_margins(mut self, margins: Vec<f64>) -> Result<Self> {
        if margins.len() + 1 < self.sets.len() || margins.iter().any(|m| !(*m > 0.0)) {
            return Err(Error::invalid("margins must be positive, one per consecutive pair"));
        }
        self.margins = Some(margins);
        Ok(self)
    }

    /// Open balls `U(center, radius(n))`, `n = 1..=count`.
    pub fn balls(center: &Vector, count: usize, radius: impl Fn(usize) -> f64) -> Result<Self> {
        let sets = (1..=count)
            .map(|n| ConvexSet::ball(center.clone(), radius(n)))
            .collect::<Result<Vec<_>>>()?;
        let margins = (1..count).map(|n| radius(n + 1) - radius(n)).collect();
        SetSequence::new(sets)?.with_margins(margins)
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.sets[0].dim()
    }

    /// Recorded margins, or sampled estimates `0.9 · min inner_radius(C_{n+1}, b)` over
    /// boundary points `b` of `C_n`.
    pub fn margins_or_estimate(&self, directions: usize, seed: u64) -> Result<Vec<f64>> {
        if let Some(m) = &self.margins {
            return Ok(m.clone());
        }
        let mut out = Vec::with_capacity(self.sets.len().saturating_sub(1));
        for (i, pair) in self.sets.windows(2).enumerate() {
            let (a, b) = (&pair[0], &pair[1]);
            let c = a
                .reference_point()
                .ok_or_else(|| Error::stage(i + 1, "empty set in sequence"))?;
            let mut rng = sampling::rng(sampling::derive_seed(seed, i as u64));
            let mut m = f64::INFINITY;
            for _ in 0..directions {
                let u = sampling::unit_sphere(&mut rng, a.dim());
                let r = a.radial_extent(&c, &u)?;
                if !r.is_finite() {
                    return Err(Error::stage(i + 1, "margin estimate needs bounded sets"));
                }
                m = m.min(inner_radius(b, &c.axpy(r, &u))?);
            }
            if !(m > 0.0) {
                return Err(Error::stage(i + 1, "consecutive sets are not uniformly nested"));
            }
            out.push(0.9 * m);
        }
        Ok(out)
    }

    /// Samples `C_n ⊂ C_{n+1}`.
    pub fn check_nested(&self, samples: usize, seed: u64) -> Result<Certificate> {
        let tol = Tolerances::global().dist;
        let mut cert = Certificate::new(CertificateKind::Nesting, "set sequence nesting", tol, seed);
        for (i, pair) in self.sets.windows(2).enumerate() {
            if pair[0].is_empty() {
                continue;
            }
            let mut rng = sampling::rng(sampling::derive_seed(seed, i as u64));
            for _ in 0..samples {
                let x = pair[0].sample(&mut rng, (i + 1) as f64)?;
                cert.require(pair[1].contains(&x, tol), || vec![x.coords().to_vec()], &format!("C_{} ⊄ C_{}", i + 1, i + 2));
            }
        }
        Ok(cert)
    }

    /// Checks that every point of a regular grid of spacing `step` in `[-radius, radius]^n`
    /// with norm `≤ radius` lies in some set of the sequence.
    pub fn coverage_check(&self, radius: f64, step: f64) -> Result<Certificate> {
        let tol = Tolerances::global().dist;
        let mut cert = Certificate::new(CertificateKind::Coverage, "set sequence coverage", tol, 0);
        let Some(last) = self.sets.iter().rev().find(|s| !s.is_empty()) else {
            cert.fail("all sets are empty");
            return Ok(cert);
        };
        for x in grid(self.dim(), radius, step) {
            cert.require(last.contains(&x, tol), || vec![x.coords().to_vec()], "grid point not covered");
        }
        Ok(cert)
    }
}

/// Points of `step·ℤⁿ` with norm at most `radius`.
pub fn grid(dim: usize, radius: f64, step: f64) -> Vec<Vector> {
    let m = (radius / step).floor() as i64;
    let mut idx = vec![-m; dim];
    let mut out = Vec::new();
    loop {
        let x = Vector::from(idx.iter().map(|&i| i as f64 * step).collect::<Vec<_>>());
        if x.norm() <= radius {
            out.push(x);
        }
        let mut j = 0;
        while j < dim {
            idx[j] += 1;
            if idx[j] <= m {
                break;
            }
            idx[j] = -m;
            j += 1;
        }
        if j == dim {
            return out;
        }
    }
}

/// `f(y) = Σ_n (1/ε_n) dist(y, C_n)` over `C_0 = {anchor}, C_1, …`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeparatingSeries {
    pub anchor: Vector,
    /// `ε_0`, with `anchor + ε_0 B ⊂ C_1`.
    pub eps0: f64,
    pub sets: Vec<SetRef>,
    /// `ε_n` for `C_n`, `n ≥ 1`.
    pub eps: Vec<f64>,
}

impl SeparatingSeries {
    /// Terms vanish from the first set containing `y` on, since the sets increase.
    pub fn eval(&self, y: &Vector) -> Result<f64> {
        y.check_dim(self.anchor.dim())?;
        let tol = Tolerances::global().dist;
        let mut total = y.dist(&self.anchor) / self.eps0;
        for (set, eps) in self.sets.iter().zip(&self.eps) {
            let p = set.0.project(y, tol * 1e-2)?;
            if p.dist <= 1e-12 * (1.0 + y.norm()) {
                return Ok(total);
            }
            total += p.dist / eps;
        }
        if self.sets.last().is_some_and(|s| !s.0.is_bounded()) {
            return Ok(total);
        }
        Err(Error::OutsideDomain {
            point: y.coords().to_vec(),
            reason: "point lies beyond every set of the truncated series".into(),
        })
    }
}

/// Builds the separating series of an increasing sequence with margins `C_n + ε_n B ⊂ C_{n+1}`.
pub fn seq_separating_function(c: &SetSequence, anchor: &Vector) -> Result<ConvexFn> {
    let margins = c
        .margins
        .as_ref()
        .ok_or_else(|| Error::invalid("separating series needs recorded margins"))?;
    let eps0 = inner_radius(&c.sets[0], anchor)?;
    if !(eps0 > 0.0) {
        return Err(Error::invalid("anchor must be interior to C_1"));
    }
    let mut eps: Vec<f64> = margins.clone();
    eps.truncate(c.sets.len());
    while eps.len() < c.sets.len() {
        eps.push(*eps.last().unwrap_or(&eps0));
    }
    Ok(ConvexFn::SeparatingSeries(Arc::new(SeparatingSeries {
        anchor: anchor.clone(),
        eps0,
        sets: c.sets.iter().cloned().map(SetRef).collect(),
        eps,
    })))
}

/// Checks `f(y) ≥ n` whenever `y ∉ C_n`, with no tolerance, on samples of the last set
/// of the sequence (within `cap` of its reference point).
pub fn separation_certificate(f: &ConvexFn, c: &SetSequence, samples: usize, cap: f64, seed: u64) -> Result<Certificate> {
    let mut cert = Certificate::new(CertificateKind::Domination, "f(y) >= n off C_n", 0.0, seed);
    let last = c.sets.last().expect("non-empty sequence");
    let mut rng = sampling::rng(seed);
    let mut outside = 0usize;
    for _ in 0..samples {
        let y = last.sample(&mut rng, cap)?;
        let n = c.sets.iter().take_while(|s| !s.contains(&y, 0.0)).count();
        if n == 0 {
            cert.samples += 1;
            continue;
        }
        outside += 1;
        let v = f.eval(&y)?;
        cert.require(v >= n as f64, || vec![y.coords().to_vec()], &format!("f = {v} < {n}"));
    }
    cert.metric("points_outside_c1", outside as f64);
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_counts() {
        assert_eq!(grid(1, 1.0, 0.5).len(), 5);
        assert_eq!(grid(2, 1.0, 1.0).len(), 5);
    }

    #[test]
    fn separating_series_examples() {
        let c = SetSequence::balls(&Vector::zeros(2), 6, |n| n as f64).unwrap();
        let f = seq_separating_function(&c, &Vector::zeros(2)).unwrap();
        assert_eq!(f.eval(&Vector::zeros(2)).unwrap(), 0.0);
        let y = Vector::from_slice(&[0.5, 0.0]);
        assert!((f.eval(&y).unwrap() - 0.5).abs() < 1e-15);
        for r in [1.0, 2.5, 4.0, 5.5] {
            let y = Vector::from_slice(&[0.0, r]);
            let n = r.floor();
            assert!(f.eval(&y).unwrap() >= n);
        }
        assert!(separation_certificate(&f, &c, 500, 6.0, 3).unwrap().passed());
    }

    #[test]
    fn margins_of_balls_are_recorded() {
        let c = SetSequence::balls(&Vector::zeros(2), 3, |n| n as f64).unwrap();
        assert_eq!(c.margins_or_estimate(8, 0).unwrap(), vec![1.0, 1.0]);
        let plain = SetSequence::new(c.sets.clone()).unwrap();
        let est = plain.margins_or_estimate(16, 0).unwrap();
        assert!(est.iter().all(|m| *m > 0.5 && *m <= 1.0));
    }
}
