use serde::Serialize;

use crate::certificate::{Certificate, CertificateKind};
use crate::dc_calculus::{
    bilinear_combine, compose_dc, lipschitz_estimate, mapping_lipschitz_estimate, BilinearForm, CheckOptions,
    ConvexFn, DcFn, Elementwise, FactorBounds, Mapping, OuterConstants, Univariate, ESTIMATE_INFLATION,
};
use crate::error::{Error, Result};
use crate::geometry::{chebyshev_center, check_interior, ConvexSet, GeneratorSet, SetRef};
use crate::sampling;
use crate::tolerance::Tolerances;
use crate::vector::{orthonormalize, Matrix, Vector};

/// Fixes the closure of `set` and moves outside points to the boundary along rays from `center`.
#[derive(Clone, Debug)]
pub struct RadialProjection {
    set: ConvexSet,
    center: Vector,
}

impl RadialProjection {
    pub fn new(set: ConvexSet, center: Vector) -> Result<Self> {
        check_interior(&set, &center)?;
        Ok(RadialProjection { set, center })
    }

    pub fn set(&self) -> &ConvexSet {
        &self.set
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn gauge(&self, x: &Vector) -> Result<f64> {
        self.set.gauge(&self.center, x)
    }

    /// `max{1, μ}` as a convex function.
    pub fn gauge_floor_fn(&self) -> ConvexFn {
        ConvexFn::max(vec![
            ConvexFn::constant(1.0),
            ConvexFn::gauge(self.set.clone(), self.center.clone()),
        ])
    }

    /// `P(x) = c + (x - c) / max{1, μ(x)}` as a mapping tree.
    pub fn mapping(&self) -> Mapping {
        let n = self.center.dim();
        Mapping::compose(
            Mapping::shift(self.center.clone()),
            Mapping::bilinear(BilinearForm::ScalarVector, self.reciprocal_gauge(), self.centered(n)),
        )
    }

    fn reciprocal_gauge(&self) -> Mapping {
        Mapping::elementwise(Elementwise::Reciprocal, Mapping::scalar(self.gauge_floor_fn()))
    }

    fn centered(&self, n: usize) -> Mapping {
        Mapping::affine(Matrix::identity(n), self.center.scale(-1.0))
    }

    /// `P` as a d.c. mapping on `domain`, assembled by the composition and bilinear rules:
    /// `1/t ∘ max{1, μ}` times `x - c`, shifted by `c`.
    pub fn dc_mapping(&self, domain: &ConvexSet, opts: &CheckOptions) -> Result<DcFn> {
        let n = self.center.dim();
        let (bc, br) = domain
            .bounds()
            .ok_or_else(|| Error::invalid("radial projection stages must be bounded"))?;
        let radius = bc.dist(&self.center) + br;
        let m = self.gauge_floor_fn();
        let inner = DcFn::from_convex(m.clone(), domain.clone(), opts)?;
        // 1/t on [1, T], with T an upper bound of max{1, μ} on the domain
        let top = 1.0 + ESTIMATE_INFLATION * sup_on(&m, domain, opts.seed)?;
        let recip = DcFn::new(
            Mapping::elementwise(Elementwise::Reciprocal, Mapping::Identity),
            ConvexFn::affine(Vector::from_slice(&[1.0]), 0.0).then(Univariate::Reciprocal),
            ConvexSet::Generator(GeneratorSet::points(vec![
                Vector::from_slice(&[1.0]),
                Vector::from_slice(&[top]),
            ])?),
            opts,
        )?;
        let scalar = compose_dc(&recip, &inner, Some(OuterConstants { map: 1.0, control: 1.0 }), opts)?;
        let affine = DcFn::new(self.centered(n), ConvexFn::constant(0.0), domain.clone(), opts)?;
        let product = bilinear_combine(
            BilinearForm::ScalarVector,
            &scalar,
            &affine,
            Some(FactorBounds { left: 1.0, right: radius }),
            opts,
        )?;
        // translation leaves controls unchanged
        DcFn::new(
            Mapping::compose(Mapping::shift(self.center.clone()), product.map().clone()),
            product.control().clone(),
            domain.clone(),
            opts,
        )
    }
}

fn sup_on(f: &ConvexFn, domain: &ConvexSet, seed: u64) -> Result<f64> {
    let mut rng = sampling::rng(seed);
    let mut best = f64::NEG_INFINITY;
    for _ in 0..2000 {
        best = best.max(f.eval(&domain.sample(&mut rng, crate::dc_calculus::UNBOUNDED_CAP)?)?);
    }
    Ok(best)
}

pub fn radial_project(p: &RadialProjection, x: &Vector) -> Result<Vector> {
    let mu = p.gauge(x)?;
    Ok(if mu <= 1.0 {
        x.clone()
    } else {
        p.center.axpy(1.0 / mu, &(x - &p.center))
    })
}

/// One stage of an extension.
#[derive(Clone, Debug, Serialize)]
pub struct StageRecord {
    pub stage: usize,
    /// Radius of the ball `U(center, n)` cutting the stage set.
    pub radius: f64,
    pub lipschitz_map: f64,
    pub lipschitz_control: f64,
    pub certificate: Certificate,
}

#[derive(Clone, Debug)]
pub struct ExtensionResult {
    pub extended: DcFn,
    pub agreement: Certificate,
    pub log: Vec<StageRecord>,
    pub center: Vector,
}

impl ExtensionResult {
    pub fn log_json(&self) -> String {
        serde_json::to_string_pretty(&self.log).expect("stage records serialize")
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ExtendOptions {
    pub check: CheckOptions,
    /// Number of stages for unbounded `A`.
    pub stages: usize,
    pub agreement_samples: usize,
}

impl Default for ExtendOptions {
    fn default() -> Self {
        ExtendOptions {
            check: CheckOptions::default(),
            stages: 4,
            agreement_samples: 2000,
        }
    }
}

/// Extends the d.c. mapping `f` from its domain `C` to `A ⊇ C` as `F*∘P`, where `P` is
/// the radial projection onto `C` and `F*` evaluates `F` at nearest points of `C̄`.
/// Stages are `A_n = D_n ∩ U(center, n)`; the returned mapping lives on the last stage.
pub fn dc_extend_radial(
    f: &DcFn,
    a: &ConvexSet,
    exhaustion: Option<&[ConvexSet]>,
    opts: &ExtendOptions,
) -> Result<ExtensionResult> {
    let c_set = f.domain();
    if c_set.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: c_set.dim(),
            got: a.dim(),
        });
    }
    let (center, margin) = chebyshev_center(c_set, 200, opts.check.seed)?;
    if !(margin > 0.0) {
        return Err(Error::invalid("the domain has empty interior"));
    }
    if !a.contains(&center, 0.0) {
        return Err(Error::invalid("A does not contain the domain"));
    }
    let p = RadialProjection::new(c_set.clone(), center.clone())?;
    let stages = match (a.bounds(), exhaustion) {
        (_, Some(d)) => d.len(),
        (Some((ac, ar)), None) => (ac.dist(&center) + ar).ceil().max(1.0) as usize,
        (None, None) => opts.stages,
    };
    if stages == 0 {
        return Err(Error::invalid("no stages"));
    }
    let fstar_map = Mapping::OnClosure {
        inner: Box::new(f.map().clone()),
        set: SetRef(c_set.clone()),
    };
    let mut log = Vec::with_capacity(stages);
    let mut last = None;
    for n in 1..=stages {
        let radius = n as f64;
        let d_n = exhaustion.map_or(a, |d| &d[n - 1]);
        let covered = d_n.bounds().is_some_and(|(c, r)| c.dist(&center) + r <= radius);
        let ball = ConvexSet::ball(center.clone(), radius)?;
        let stage = if covered {
            d_n.clone()
        } else {
            ConvexSet::intersection(vec![d_n.clone(), ball.clone()], Vec::new(), Some(center.clone()))
                .map_err(|e| Error::stage(n, e.to_string()))?
        };
        let c_n = if c_set.bounds().is_some_and(|(c, r)| c.dist(&center) + r <= radius) {
            c_set.clone()
        } else {
            ConvexSet::intersection(vec![c_set.clone(), ball], Vec::new(), Some(center.clone()))?
        };
        let stage_opts = opts.check.with_seed(sampling::derive_seed(opts.check.seed, n as u64));
        let wrap = |e: Error| match e {
            Error::CertificationFailed(c) => Error::stage(n, format!("control certification failed: {}", c.report_line())),
            other => Error::stage(n, other.to_string()),
        };
        let p_n = p.dc_mapping(&stage, &stage_opts).map_err(wrap)?;
        let fstar = DcFn::new(fstar_map.clone(), f.control().clone(), c_n.clone(), &stage_opts).map_err(wrap)?;
        let consts = OuterConstants {
            map: ESTIMATE_INFLATION * mapping_lipschitz_estimate(f.map(), &c_n, 2000, stage_opts.seed).map_err(wrap)?,
            control: ESTIMATE_INFLATION * lipschitz_estimate(f.control(), &c_n, 2000, stage_opts.seed).map_err(wrap)?,
        };
        let ext = compose_dc(&fstar, &p_n, Some(consts), &stage_opts).map_err(wrap)?;
        log.push(StageRecord {
            stage: n,
            radius,
            lipschitz_map: consts.map,
            lipschitz_control: consts.control,
            certificate: ext.certificate().clone(),
        });
        last = Some(ext);
    }
    let extended = last.expect("at least one stage");
    let agreement = agreement_certificate(f, &extended, opts.agreement_samples, opts.check.seed)?;
    Ok(ExtensionResult {
        extended,
        agreement,
        log,
        center,
    })
}

/// Compares `extended` with `original` on samples of the original domain that lie in the
/// extension's domain.
pub fn agreement_certificate(original: &DcFn, extended: &DcFn, samples: usize, seed: u64) -> Result<Certificate> {
    let tol = Tolerances::global().cert;
    let mut cert = Certificate::new(CertificateKind::Agreement, "extension agrees on the domain", tol, seed);
    let mut rng = sampling::rng(sampling::derive_seed(seed, 0xa9));
    let mut taken = 0;
    let mut tries = 0;
    while taken < samples && tries < 20 * samples {
        tries += 1;
        let x = original.domain().sample(&mut rng, crate::dc_calculus::UNBOUNDED_CAP)?;
        if !extended.domain().contains(&x, 0.0) {
            continue;
        }
        taken += 1;
        let d = original.eval(&x)?.dist(&extended.eval(&x)?);
        cert.observe(d, 0.0, || vec![x.coords().to_vec()], "extension differs from the original");
    }
    if taken == 0 {
        cert.fail("no samples of the original domain inside the extension's domain");
    }
    Ok(cert)
}

/// Extends a d.c. mapping from a compact set `C` by working in the affine span `X₀` of `C`
/// and composing with the orthogonal projection onto it. The result lives on `U(c, radius)`.
pub fn finite_dim_extend(f: &DcFn, radius: f64, opts: &ExtendOptions) -> Result<ExtensionResult> {
    let c_set = f.domain();
    let n = c_set.dim();
    let gen = match c_set {
        ConvexSet::Generator(g) => g,
        _ => return Err(Error::invalid("finite_dim_extend expects a generator set")),
    };
    let origin = gen.centroid();
    let mut dirs: Vec<Vector> = gen.centers().map(|c| c - &origin).collect();
    for b in gen.ball_generators() {
        match &b.span {
            None if b.radius > 0.0 => dirs.extend((0..n).map(|i| Vector::basis(n, i))),
            Some(span) if b.radius > 0.0 => dirs.extend(span.iter().cloned()),
            _ => {}
        }
    }
    let basis = orthonormalize(&dirs, 1e-10);
    let k = basis.len();
    let big = ConvexSet::ball(origin.clone(), radius)?;
    if k == 0 {
        let value = f.eval(&origin)?;
        let out = value.dim();
        let map = Mapping::affine(
            Matrix::new(vec![Vector::zeros(n); out])?,
            value,
        );
        let extended = DcFn::new(map, ConvexFn::constant(0.0), big, &opts.check)?;
        let agreement = agreement_certificate(f, &extended, opts.agreement_samples.min(16), opts.check.seed)?;
        return Ok(ExtensionResult {
            extended,
            agreement,
            log: Vec::new(),
            center: origin,
        });
    }
    // lift: R^k -> R^n, y -> origin + B y ; pi: R^n -> R^k, x -> B^T (x - origin)
    let lift_m = Matrix::new((0..n).map(|i| Vector::raw(basis.iter().map(|b| b[i]).collect())).collect())?;
    let pi_m = Matrix::new(basis.clone())?;
    let pi_off = pi_m.apply(&origin).scale(-1.0);
    let c0 = ConvexSet::Generator(gen.map_affine(|p| &pi_m.apply(p) + &pi_off, 1.0, |d| pi_m.apply(d))?);
    let f0 = DcFn::new(
        Mapping::compose(f.map().clone(), Mapping::affine(lift_m.clone(), origin.clone())),
        f.control().clone().precompose(lift_m.clone(), origin.clone()),
        c0,
        &opts.check,
    )?;
    let a0 = ConvexSet::ball(Vector::zeros(k), radius)?;
    let inner = dc_extend_radial(&f0, &a0, None, opts)?;
    let map = Mapping::compose(inner.extended.map().clone(), Mapping::affine(pi_m.clone(), pi_off.clone()));
    let control = inner.extended.control().clone().precompose(pi_m, pi_off);
    let extended = DcFn::new(map, control, big, &opts.check)?;
    let agreement = agreement_certificate(f, &extended, opts.agreement_samples, opts.check.seed)?;
    Ok(ExtensionResult {
        extended,
        agreement,
        log: inner.log,
        center: inner.center,
    })
}
