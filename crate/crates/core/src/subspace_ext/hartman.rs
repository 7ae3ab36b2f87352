use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::pair::SubspacePair;
use super::sequences::SetSequence;
use crate::certificate::{Certificate, CertificateKind};
use crate::dc_calculus::ConvexFn;
use crate::error::{Error, Result};
use crate::geometry::{ConvexSet, SetRef};
use crate::sampling;
use crate::tolerance::Tolerances;
use crate::vector::Vector;

/// Constants of `g_k = max{g_{k-1}, a + b dist(·, D_{k-1})}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HartmanStage {
    pub stage: usize,
    /// Estimate of `M_{k+1} = sup f on D_{k+1} ∩ Y`.
    pub sup_next: f64,
    pub a: f64,
    pub b: f64,
    /// `d_{k-1} = dist(D_{k-1}, X ∖ D_k)`.
    pub margin: f64,
}

/// The last function `g_K` of a finite Hartman sequence.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HartmanLimit {
    /// `g_1`.
    pub base: f64,
    /// `D_1, D_2, …`
    pub sets: Vec<SetRef>,
    pub stages: Vec<HartmanStage>,
}

impl HartmanLimit {
    pub fn max_stage(&self) -> usize {
        self.stages.len() + 1
    }

    fn dist(&self, x: &Vector, set_index: usize) -> Result<f64> {
        let d = self.sets[set_index].0.project(x, Tolerances::global().dist * 1e-2)?.dist;
        Ok(if d <= 1e-12 * (1.0 + x.norm()) { 0.0 } else { d })
    }

    /// `g_k(x)`.
    pub fn eval_stage(&self, x: &Vector, k: usize) -> Result<f64> {
        let mut g = self.base;
        for st in self.stages.iter().take_while(|s| s.stage <= k) {
            g = g.max(st.a + st.b * self.dist(x, st.stage - 2)?);
        }
        Ok(g)
    }

    /// `g_K(x)`. Once `x ∈ D_{k-1}` every later stage contributes `a < g_1`, so the
    /// loop stops there.
    pub fn eval(&self, x: &Vector) -> Result<f64> {
        let mut g = self.base;
        for st in &self.stages {
            let d = self.dist(x, st.stage - 2)?;
            if d == 0.0 {
                break;
            }
            g = g.max(st.a + st.b * d);
        }
        Ok(g)
    }

    /// Smallest `n` with `x ∈ D_n`, if any; `g_m(x)` is constant for `m ≥ n`.
    pub fn entry_stage(&self, x: &Vector) -> Result<Option<usize>> {
        for i in 0..self.sets.len() {
            if self.dist(x, i)? == 0.0 {
                return Ok(Some(i + 1));
            }
        }
        Ok(None)
    }
}

#[derive(Clone, Debug)]
pub struct HartmanOptions {
    /// Directions used for suprema over slices of dimension ≥ 2 and for margin estimates.
    pub directions: usize,
    pub samples: usize,
    pub seed: u64,
    /// Relative inflation of the sampled suprema.
    pub inflation: f64,
}

impl Default for HartmanOptions {
    fn default() -> Self {
        HartmanOptions {
            directions: 64,
            samples: 10_000,
            seed: 0,
            inflation: 0.05,
        }
    }
}

#[derive(Clone, Debug)]
pub struct HartmanResult {
    pub g: ConvexFn,
    pub limit: Arc<HartmanLimit>,
    /// Estimates of `M_n`, `n = 1..=N`.
    pub sups: Vec<f64>,
    pub certificate: Certificate,
    pub repairs: usize,
}

impl HartmanResult {
    pub const CSV_HEADER: &'static str = "stage,M_n,a,b,d_n";

    pub fn table_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for s in &self.limit.stages {
            out.push_str(&format!("{},{},{},{},{}\n", s.stage, s.sup_next, s.a, s.b, s.margin));
        }
        out
    }
}

/// Sampled `sup f` over a bounded convex set given in `Y` coordinates. Convex
/// maxima sit on the boundary, so only boundary points along rays are visited.
pub fn sup_on_set(f: &ConvexFn, set: &ConvexSet, directions: usize, seed: u64) -> Result<f64> {
    let c = set
        .reference_point()
        .ok_or_else(|| Error::invalid("supremum over the empty set"))?;
    let k = c.dim();
    let at = |u: &Vector| -> Result<f64> {
        let u = u.normalized().ok_or_else(|| Error::invalid("zero direction"))?;
        let r = set.radial_extent(&c, &u)?;
        if !r.is_finite() {
            return Err(Error::invalid("f must be bounded on the slice; the slice is unbounded"));
        }
        f.eval(&c.axpy(r, &u))
    };
    let mut dirs: Vec<Vector> = (0..k)
        .flat_map(|i| [Vector::basis(k, i), Vector::basis(k, i).scale(-1.0)])
        .collect();
    if k > 1 {
        let mut rng = sampling::rng(seed);
        dirs.extend((0..directions).map(|_| sampling::unit_sphere(&mut rng, k)));
    }
    let mut best = (f64::NEG_INFINITY, dirs[0].clone());
    for u in dirs {
        let v = at(&u)?;
        if v > best.0 {
            best = (v, u);
        }
    }
    if k > 1 {
        let mut step = 0.5;
        while step > 1e-6 {
            let mut moved = false;
            for i in 0..k {
                for s in [step, -step] {
                    let mut u = best.1.clone();
                    u[i] += s;
                    if let Some(u) = u.normalized() {
                        let v = at(&u)?;
                        if v > best.0 {
                            best = (v, u);
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
    Ok(best.0)
}

/// Convex `g` on `X` with `f ≤ g` on `D_N ∩ Y`, built from a sequence `D_1 ⊂ D_2 ⊂ …`
/// with margins. `f` takes `Y` coordinates of `pair`.
pub fn hartman_majorant(f: &ConvexFn, pair: &SubspacePair, d: &SetSequence, opts: &HartmanOptions) -> Result<HartmanResult> {
    if d.len() < 2 {
        return Err(Error::invalid("hartman_majorant needs at least two sets"));
    }
    if d.dim() != pair.dim() {
        return Err(Error::DimensionMismatch {
            expected: pair.dim(),
            got: d.dim(),
        });
    }
    let tol = Tolerances::global();
    let margins = d.margins_or_estimate(opts.directions, sampling::derive_seed(opts.seed, 1))?;
    let slices = d.sets.iter().map(|s| pair.slice(s)).collect::<Result<Vec<_>>>()?;
    let mut sups = Vec::with_capacity(slices.len());
    for (i, s) in slices.iter().enumerate() {
        sups.push(if s.is_empty() {
            f64::NEG_INFINITY
        } else {
            let m = sup_on_set(f, s, opts.directions, sampling::derive_seed(opts.seed, 100 + i as u64))
                .map_err(|e| Error::stage(i + 1, e.to_string()))?;
            m + opts.inflation * m.abs() + tol.cert
        });
    }
    let sets: Vec<SetRef> = d.sets.iter().cloned().map(SetRef).collect();
    let build = |sups: &[f64]| -> Result<HartmanLimit> {
        // g ≥ g_1 everywhere, so a = g_1 - tol bounds g_{k-1} from below on D_{k-1}
        let base = sups[..2].iter().cloned().fold(sups[1], f64::max);
        if !base.is_finite() {
            return Err(Error::stage(2, "D_2 ∩ Y is empty"));
        }
        let a = base - tol.cert;
        let stages = (2..sups.len())
            .map(|k| {
                let margin = margins[k - 2];
                HartmanStage {
                    stage: k,
                    sup_next: sups[k],
                    a,
                    b: ((sups[k] - a) / margin).max(1e-12),
                    margin,
                }
            })
            .collect();
        Ok(HartmanLimit {
            base,
            sets: sets.clone(),
            stages,
        })
    };

    let last = &slices[slices.len() - 1];
    let mut repairs = 0;
    loop {
        let limit = Arc::new(build(&sups)?);
        let g = ConvexFn::HartmanLimit(limit.clone());
        let mut cert = Certificate::new(CertificateKind::Domination, "hartman f <= g on D_N ∩ Y", tol.cert, opts.seed);
        let mut worst: Option<(usize, Vector)> = None;
        if !last.is_empty() {
            let mut rng = sampling::rng(sampling::derive_seed(opts.seed, 2));
            let cap = last.bounds().map_or(1e3, |(_, r)| r);
            for _ in 0..opts.samples {
                let y = last.sample(&mut rng, cap)?;
                let x = pair.lift(&y);
                let (fy, gx) = (f.eval(&y)?, g.eval(&x)?);
                cert.observe(fy, gx, || vec![x.coords().to_vec()], "f > g");
                if fy > gx + tol.cert && worst.is_none() {
                    let n = limit.entry_stage(&x)?.unwrap_or(d.len());
                    worst = Some((n, y));
                }
            }
        }
        cert.metric("repairs", repairs as f64);
        match worst {
            None => {
                return Ok(HartmanResult {
                    g,
                    limit,
                    sups,
                    certificate: cert,
                    repairs,
                })
            }
            Some((n, _)) if repairs < 6 => {
                repairs += 1;
                for m in sups.iter_mut().skip(n.saturating_sub(1)) {
                    *m += m.abs().max(1.0) * opts.inflation * (1 << repairs) as f64;
                }
            }
            Some((n, y)) => {
                return Err(Error::Stage {
                    stage: n,
                    reason: format!("domination f <= g still fails at {y} after 6 repairs"),
                })
            }
        }
    }
}
