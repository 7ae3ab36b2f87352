//! The strip function with no convex extension, and the ℓ₂ example truncated to ℝᴺ.

use crate::certificate::{Certificate, CertificateKind};
use crate::dc_calculus::{convexity_check, lipschitz_estimate, ndc_witness_check, ConvexFn, Family, Univariate, WitnessBall};
use crate::error::{Error, Result};
use crate::geometry::{Ball, ConvexSet, GeneratorSet};
use crate::vector::Vector;

/// `sup_t a_t(x, y) = x²/(1-y)` on `ℝ × [-1, 0]`.
pub fn strip_eval(x: f64, y: f64) -> Result<f64> {
    if !(-1.0..=0.0).contains(&y) || !x.is_finite() {
        return Err(Error::OutsideDomain {
            point: vec![x, y],
            reason: "the strip is ℝ × [-1, 0]".into(),
        });
    }
    Ok(x * x / (1.0 - y))
}

/// `max_t a_t(x, y)` over a uniform grid on `[-t_max, t_max]`, refined around the best
/// grid point by golden section.
pub fn strip_grid_sup(x: f64, y: f64, t_max: f64, points: usize) -> f64 {
    let p = Vector::from_slice(&[x, y]);
    let a = |t: f64| Family::Strip.member(t, &p);
    let step = 2.0 * t_max / points as f64;
    let ts = (0..=points).map(|i| -t_max + i as f64 * step);
    let (best_t, best) = ts.map(|t| (t, a(t))).fold((0.0, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b });
    let (mut lo, mut hi) = (best_t - step, best_t + step);
    const G: f64 = 0.618_033_988_749_895;
    for _ in 0..200 {
        let (m1, m2) = (hi - G * (hi - lo), lo + G * (hi - lo));
        if a(m1) >= a(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    best.max(a(0.5 * (lo + hi)))
}

/// One-sided derivative of the strip function at `(τ, 0)` along `direction`, from
/// difference quotients at `h = 2^-i / 8` combined by Richardson extrapolation.
pub fn strip_directional_derivative(tau: f64, direction: &Vector, h_steps: usize) -> Result<f64> {
    direction.check_dim(2)?;
    if direction[1] > 0.0 {
        return Err(Error::OutsideDomain {
            point: vec![tau, 0.0],
            reason: "direction leaves the strip".into(),
        });
    }
    let steps = h_steps.max(2);
    let f0 = strip_eval(tau, 0.0)?;
    let h0 = 0.125;
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(steps);
    for i in 0..steps {
        let h = h0 / (1u64 << i) as f64;
        let q = (strip_eval(tau + h * direction[0], h * direction[1])? - f0) / h;
        let mut row = vec![q];
        for j in 1..=i {
            let p = (1u64 << j) as f64;
            let v = (p * row[j - 1] - table[i - 1][j - 1]) / (p - 1.0);
            row.push(v);
        }
        table.push(row);
    }
    Ok(*table.last().and_then(|r| r.last()).expect("non-empty table"))
}

/// Row of the strip certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct StripBound {
    pub tau: f64,
    /// Lower bound any convex extension must take at the target.
    pub lb: f64,
}

/// For each `τ`, the target, `(τ, 0)` and a point of `y = -1` are collinear, with `(τ, 0)`
/// at weight `λ` from the target. Convexity forces
/// `f̃(target) ≥ (f(τ,0) - (1-λ) f(far)) / λ`. The certificate passes when these bounds
/// strictly increase and the last exceeds `cap` (if given).
pub fn no_convex_extension_certificate(tau_list: &[f64], target: &Vector, cap: Option<f64>) -> Result<(Certificate, Vec<StripBound>)> {
    target.check_dim(2)?;
    if !(target[1] > 0.0) {
        return Err(Error::invalid("target must lie above the strip"));
    }
    if tau_list.iter().any(|t| !(*t > 0.0)) || tau_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("tau list must be positive and increasing"));
    }
    let (a, t) = (target[0], target[1]);
    let lambda = 1.0 / (t + 1.0);
    let mut cert = Certificate::new(CertificateKind::NonExtendability, "no convex extension of the strip function", 0.0, 0);
    let mut rows = Vec::with_capacity(tau_list.len());
    for &tau in tau_list {
        let far = Vector::from_slice(&[(tau - lambda * a) / (1.0 - lambda), -1.0]);
        let mid = target.scale(lambda).axpy(1.0 - lambda, &far);
        let scale = 1.0 + tau.abs();
        cert.require(
            (mid[0] - tau).abs() <= 1e-12 * scale && mid[1].abs() <= 1e-12,
            || vec![mid.coords().to_vec()],
            "points are not collinear",
        );
        let lb = (strip_eval(tau, 0.0)? - (1.0 - lambda) * strip_eval(far[0], far[1])?) / lambda;
        if let Some(prev) = rows.last().map(|r: &StripBound| r.lb) {
            cert.require(lb > prev, || vec![vec![tau, lb]], "bounds do not increase");
        }
        rows.push(StripBound { tau, lb });
    }
    if let (Some(cap), Some(last)) = (cap, rows.last()) {
        cert.require(last.lb > cap, || vec![vec![last.tau, last.lb]], "bound stays below the cap");
    }
    cert.metric("lambda", lambda);
    Ok((cert, rows))
}

pub fn strip_csv(rows: &[StripBound]) -> String {
    let mut out = String::from("tau,lb\n");
    for r in rows {
        out.push_str(&format!("{},{}\n", r.tau, r.lb));
    }
    out
}

/// The ℓ₂ example truncated to `ℝᴺ`.
#[derive(Clone, Debug)]
pub struct EllTwoExample {
    pub n: usize,
    /// `h[i] = h_{i+1}`.
    pub h: Vec<f64>,
    /// `((n, k), z_{n,k})` for `1 ≤ n < k ≤ N`.
    pub z: Vec<((usize, usize), Vector)>,
    pub set: GeneratorSet,
    /// `1/(1 - ||x||)`.
    pub g: ConvexFn,
}

pub fn h_n(n: usize) -> f64 {
    let n = n as f64;
    (2.0 / n - 1.0 / (n * n)).sqrt()
}

pub fn build_elltwo(n: usize) -> Result<EllTwoExample> {
    if n < 2 {
        return Err(Error::invalid("truncation N must be at least 2"));
    }
    let h: Vec<f64> = (1..=n).map(h_n).collect();
    let mut z = Vec::with_capacity(n * (n - 1) / 2);
    for i in 1..n {
        for k in i + 1..=n {
            let mut p = Vector::zeros(n);
            p[i - 1] = 1.0 - 1.0 / i as f64;
            p[k - 1] = h[i - 1] * (1.0 - 1.0 / k as f64);
            z.push(((i, k), p));
        }
    }
    if let Some(((i, k), p)) = z.iter().find(|(_, p)| !(p.norm() < 1.0)) {
        return Err(Error::invalid(format!("z_{{{i},{k}}} has norm {} >= 1", p.norm())));
    }
    let set = GeneratorSet::new(z.iter().map(|(_, p)| p.clone()).collect(), vec![Ball::new(Vector::zeros(n), 0.5)?])?;
    let g = ConvexFn::norm_from(Vector::zeros(n)).then(Univariate::InvOneMinus);
    Ok(EllTwoExample { n, h, z, set, g })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlowupRow {
    pub n: usize,
    pub k: usize,
    pub norm: f64,
    pub g_value: f64,
    pub cluster_diam: f64,
}

impl BlowupRow {
    pub const CSV_HEADER: &'static str = "n,k,norm,g_value,cluster_diam";
}

pub fn blowup_csv(rows: &[BlowupRow]) -> String {
    let mut out = format!("{}\n", BlowupRow::CSV_HEADER);
    for r in rows {
        out.push_str(&format!("{},{},{},{},{}\n", r.n, r.k, r.norm, r.g_value, r.cluster_diam));
    }
    out
}

#[derive(Clone, Debug)]
pub struct BlowupOptions {
    /// `A = U(0, radius)`, `radius > 1`.
    pub radius: f64,
    pub lambda: f64,
    pub threshold: f64,
}

impl Default for BlowupOptions {
    fn default() -> Self {
        BlowupOptions {
            radius: 1.5,
            lambda: 0.95,
            threshold: 1e3,
        }
    }
}

/// Norms, values of `g` and cluster diameters of the `z_{n,k}`, and a non-d.c. witness
/// built from the clusters `{z_{n,k} : k > n}` whose peak exceeds the threshold.
pub fn elltwo_blowup_report(ex: &EllTwoExample, opts: &BlowupOptions) -> Result<(Certificate, Vec<BlowupRow>)> {
    let mut cert = Certificate::new(CertificateKind::NdcWitness, "ℓ₂ example blow-up", 1e-9, 0);
    let mut rows = Vec::with_capacity(ex.z.len());
    let mut balls = Vec::new();
    for n in 1..ex.n {
        let hn = ex.h[n - 1];
        let cluster: Vec<(usize, &Vector)> = ex.z.iter().filter(|((i, _), _)| *i == n).map(|((_, k), p)| (*k, p)).collect();
        let mut diam: f64 = 0.0;
        for (a, (_, p)) in cluster.iter().enumerate() {
            for (_, q) in &cluster[a + 1..] {
                diam = diam.max(p.dist(q));
            }
        }
        cert.observe(diam, 2f64.sqrt() * hn, || vec![vec![n as f64, diam]], "cluster wider than √2 h_n");
        let mut prev = f64::NEG_INFINITY;
        for (k, p) in &cluster {
            let hk = ex.h[k - 1];
            let norm_sq = p.norm_sq();
            let exact = 1.0 - hn * hn * hk * hk;
            cert.require((norm_sq - exact).abs() <= 1e-12, || vec![p.coords().to_vec()], "||z||² differs from 1 - h_n² h_k²");
            let gv = ex.g.eval(p)?;
            cert.require(gv > prev, || vec![vec![n as f64, *k as f64]], "g(z_{n,k}) not increasing in k");
            prev = gv;
            rows.push(BlowupRow {
                n,
                k: *k,
                norm: norm_sq.sqrt(),
                g_value: gv,
                cluster_diam: diam,
            });
        }
        let center = cluster[0].1;
        let radius = (2f64.sqrt() * hn).max(diam) * (1.0 + 1e-9);
        if prev > opts.threshold && center.norm() + radius < opts.radius {
            let probes: Vec<Vector> = cluster.iter().map(|(_, p)| (*p).clone()).collect();
            balls.push(WitnessBall {
                center: center.clone(),
                radius,
                probes,
            });
        }
    }
    cert.metric("witness_balls", balls.len() as f64);
    if balls.is_empty() {
        cert.fail("no cluster reaches the threshold at this truncation");
        return Ok((cert, rows));
    }
    let a = ConvexSet::ball(Vector::zeros(ex.n), opts.radius)?;
    let w = ndc_witness_check(|x| ex.g.eval(x), &a, opts.lambda, &balls, opts.threshold)?;
    cert.absorb(&w);
    Ok((cert, rows))
}

/// Convexity of `g` on `U(0, 0.9)` and its Lipschitz constants on `U(0, 1 - 1/n) ⊃ A_n ∩ C`,
/// which stay below `n²`.
pub fn elltwo_positive_side(ex: &EllTwoExample, pairs: usize, seed: u64) -> Result<Certificate> {
    let zero = Vector::zeros(ex.n);
    let inner = ConvexSet::ball(zero.clone(), 0.9)?;
    let mut cert = convexity_check(&ex.g, &inner, pairs, seed, 1e-9)?;
    cert.label = "ℓ₂ example positive side".into();
    for n in 2..=5usize {
        let a = ConvexSet::ball(zero.clone(), 1.0 - 1.0 / n as f64)?;
        let l = lipschitz_estimate(&ex.g, &a, pairs.min(4000), seed + n as u64)?;
        let bound = (n * n) as f64;
        cert.observe(l, bound * (1.0 + 1e-9), Vec::new, "Lipschitz estimate above 1/(1-ρ)²");
        cert.metric(format!("lipschitz_A{n}"), l);
    }
    Ok(cert)
}
