use std::sync::Arc;

use super::checks::{
    lipschitz_estimate, mapping_lipschitz_estimate, sup_norm_estimate, CheckOptions, DcFn, UNBOUNDED_CAP,
};
use super::convex_fn::ConvexFn;
use super::mapping::{BilinearForm, Mapping};
use crate::error::{Error, Result};
use crate::extension_ops::InfConvolution;
use crate::geometry::{ConvexSet, SetRef};
use crate::sampling;
use crate::tolerance::Tolerances;
use crate::vector::Vector;

/// Inflation applied to sampled constants, which are lower bounds.
pub const ESTIMATE_INFLATION: f64 = 1.25;
/// Control constants are doubled up to this many times when certification fails.
pub const MAX_ESCALATIONS: u32 = 6;

/// Runs `build(factor)` for factor 1, 2, 4, ... until the result certifies.
fn escalate(mut build: impl FnMut(f64) -> Result<DcFn>) -> Result<DcFn> {
    let mut last = None;
    for k in 0..=MAX_ESCALATIONS {
        match build(2f64.powi(k as i32)) {
            Ok(f) => return Ok(f),
            Err(Error::CertificationFailed(c)) => last = Some(c),
            Err(e) => return Err(e),
        }
    }
    Err(Error::CertificationFailed(last.expect("at least one attempt")))
}

/// Lipschitz constants of `G` and of its control on the domain of `G`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OuterConstants {
    pub map: f64,
    pub control: f64,
}

/// `G∘F` with control `g∘F + (L_G + L_g) f`.
pub fn compose_dc(g: &DcFn, f: &DcFn, constants: Option<OuterConstants>, opts: &CheckOptions) -> Result<DcFn> {
    let tol = Tolerances::global().dist;
    let mut rng = sampling::rng(sampling::derive_seed(opts.seed, 0xc0));
    for _ in 0..opts.pairs.max(16) {
        let x = f.domain().sample(&mut rng, UNBOUNDED_CAP)?;
        let y = f.eval(&x)?;
        if !g.domain().contains(&y, tol) {
            return Err(Error::OutsideDomain {
                point: y.into_inner(),
                reason: "range of the inner mapping leaves the domain of the outer one".into(),
            });
        }
    }
    let c = match constants {
        Some(c) => c,
        None => OuterConstants {
            map: ESTIMATE_INFLATION * mapping_lipschitz_estimate(g.map(), g.domain(), 2000, opts.seed)?,
            control: ESTIMATE_INFLATION * lipschitz_estimate(g.control(), g.domain(), 2000, opts.seed)?,
        },
    };
    let map = Mapping::compose(g.map().clone(), f.map().clone());
    escalate(|factor| {
        let control = ConvexFn::ComposedWith {
            outer: Box::new(g.control().clone()),
            inner: Box::new(f.map().clone()),
            control: Box::new(f.control().clone()),
            weight: factor * (c.map + c.control),
        };
        DcFn::new(map.clone(), control, f.domain().clone(), opts)
    })
}

/// Bounds `sup|F|`, `sup|G|` on the common domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FactorBounds {
    pub left: f64,
    pub right: f64,
}

/// `x -> B(F(x), G(x))` with control
/// `½|F|² + ½‖B‖²|G|² + 2S (f + ‖B‖ g)`, `S = sup|F| + ‖B‖ sup|G|`.
pub fn bilinear_combine(
    form: BilinearForm,
    f: &DcFn,
    g: &DcFn,
    bounds: Option<FactorBounds>,
    opts: &CheckOptions,
) -> Result<DcFn> {
    if f.domain().dim() != g.domain().dim() {
        return Err(Error::DimensionMismatch {
            expected: f.domain().dim(),
            got: g.domain().dim(),
        });
    }
    let kb = match bounds {
        Some(b) => b,
        None => FactorBounds {
            left: ESTIMATE_INFLATION * sup_norm_estimate(f.map(), f.domain(), 2000, opts.seed)?,
            right: ESTIMATE_INFLATION * sup_norm_estimate(g.map(), f.domain(), 2000, opts.seed)?,
        },
    };
    let nb = form.norm();
    let s = kb.left + nb * kb.right;
    let map = Mapping::bilinear(form, f.map().clone(), g.map().clone());
    escalate(|factor| {
        let control = ConvexFn::sum(vec![
            ConvexFn::MappingQuadratic {
                map: Box::new(f.map().clone()),
                coef: 0.5,
                control: Box::new(f.control().clone()),
                weight: factor * 2.0 * s,
            },
            ConvexFn::MappingQuadratic {
                map: Box::new(g.map().clone()),
                coef: 0.5 * nb * nb,
                control: Box::new(g.control().clone()),
                weight: factor * 2.0 * s * nb,
            },
        ]);
        DcFn::new(map.clone(), control, f.domain().clone(), opts)
    })
}

/// Glues `F_n` on nested `D_n` into one mapping on `domain`. The control is the sum of
/// the Lipschitz convex extensions of the stage controls.
pub fn glue_dc(pieces: &[(ConvexSet, DcFn)], margins: &[f64], domain: ConvexSet, opts: &CheckOptions) -> Result<DcFn> {
    if pieces.is_empty() {
        return Err(Error::invalid("glue_dc: no pieces"));
    }
    if margins.len() + 1 < pieces.len() || margins.iter().any(|m| !(*m > 0.0)) {
        return Err(Error::invalid("glue_dc: every stage needs a positive margin"));
    }
    let tol = Tolerances::global();
    let mut rng = sampling::rng(sampling::derive_seed(opts.seed, 0x91));
    for (n, w) in pieces.windows(2).enumerate() {
        let ((d0, f0), (d1, f1)) = (&w[0], &w[1]);
        for _ in 0..opts.pairs.max(16) {
            let x = d0.sample(&mut rng, UNBOUNDED_CAP)?;
            let u = sampling::unit_sphere(&mut rng, x.dim());
            if !d1.contains(&x.axpy(margins[n] * 0.999, &u), 0.0) {
                return Err(Error::stage(n + 1, "stage is not compactly inside the next one"));
            }
            if f0.eval(&x)?.dist(&f1.eval(&x)?) > opts.tol.max(tol.cert) {
                return Err(Error::stage(n + 1, "pieces disagree on the overlap"));
            }
        }
    }
    let mut controls = Vec::with_capacity(pieces.len());
    for (n, (d, f)) in pieces.iter().enumerate() {
        let l = lipschitz_estimate(f.control(), d, 2000, sampling::derive_seed(opts.seed, n as u64))?;
        controls.push((f.control().clone(), l * ESTIMATE_INFLATION, d.clone()));
    }
    let map = Mapping::Piecewise {
        pieces: pieces
            .iter()
            .map(|(d, f)| (SetRef(d.clone()), f.map().clone()))
            .collect(),
    };
    escalate(|factor| {
        let control = ConvexFn::sum(
            controls
                .iter()
                .map(|(c, l, d)| ConvexFn::InfConvExtension(Arc::new(InfConvolution::new(c.clone(), l * factor, d.clone()))))
                .collect(),
        );
        DcFn::new(map.clone(), control, domain.clone(), opts)
    })
}

/// A mapping whose derivative is `k`-Lipschitz, controlled by `(k/2)|x - c|²`.
pub fn c11_to_dc(map: Mapping, k: f64, domain: ConvexSet, opts: &CheckOptions) -> Result<DcFn> {
    if !(k >= 0.0) {
        return Err(Error::invalid("derivative Lipschitz constant must be non-negative"));
    }
    let c = domain
        .reference_point()
        .unwrap_or_else(|| Vector::zeros(domain.dim()));
    let control = ConvexFn::squared_norm_from(c).scale(0.5 * k);
    DcFn::new(map, control, domain, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dc_calculus::{control_check, Elementwise};
    use crate::geometry::Halfspace;
    use crate::vector::Matrix;

    fn ball(r: f64) -> ConvexSet {
        ConvexSet::ball(Vector::zeros(2), r).unwrap()
    }

    #[test]
    fn inner_product_of_identities_is_square_norm() {
        let opts = CheckOptions::default();
        let id = DcFn::new(Mapping::Identity, ConvexFn::constant(0.0), ball(1.0), &opts).unwrap();
        let b = bilinear_combine(BilinearForm::Inner, &id, &id, None, &opts).unwrap();
        let x = Vector::from_slice(&[0.3, 0.4]);
        assert_eq!(b.eval(&x).unwrap()[0], 0.25);
        assert!(control_check(&b, &opts.with_seed(9)).unwrap().passed());
    }

    #[test]
    fn composition_with_affine() {
        let opts = CheckOptions::default();
        let inner = DcFn::from_convex(ConvexFn::squared_norm_from(Vector::zeros(2)), ball(1.0), &opts).unwrap();
        let outer = DcFn::new(
            Mapping::affine(Matrix::new(vec![Vector::from_slice(&[-3.0])]).unwrap(), Vector::from_slice(&[1.0])),
            ConvexFn::constant(0.0),
            ConvexSet::ball(Vector::from_slice(&[0.5]), 0.6).unwrap(),
            &opts,
        )
        .unwrap();
        let c = compose_dc(&outer, &inner, Some(OuterConstants { map: 3.0, control: 0.0 }), &opts).unwrap();
        let x = Vector::from_slice(&[0.5, 0.5]);
        assert!((c.eval(&x).unwrap()[0] - (1.0 - 3.0 * 0.5)).abs() < 1e-15);
    }

    #[test]
    fn sine_is_c11() {
        let boxed = ConvexSet::polyhedron(
            (0..2)
                .flat_map(|i| {
                    [
                        Halfspace::new(Vector::basis(2, i), 3.0).unwrap(),
                        Halfspace::new(Vector::basis(2, i).scale(-1.0), 3.0).unwrap(),
                    ]
                })
                .collect(),
            Vector::zeros(2),
        )
        .unwrap();
        let opts = CheckOptions::default();
        let sin = Mapping::elementwise(Elementwise::Sin, Mapping::Identity);
        assert!(c11_to_dc(sin.clone(), 1.0, boxed.clone(), &opts).is_ok());
        assert!(matches!(c11_to_dc(sin, 0.0, boxed, &opts), Err(Error::CertificationFailed(_))));
    }

    #[test]
    fn glue_restrictions_of_one_function() {
        let opts = CheckOptions::default();
        let q = ConvexFn::squared_norm_from(Vector::zeros(2));
        let pieces: Vec<(ConvexSet, DcFn)> = [1.0, 2.0]
            .iter()
            .map(|r| (ball(*r), DcFn::from_convex(q.clone(), ball(*r), &opts).unwrap()))
            .collect();
        let g = glue_dc(&pieces, &[0.5], ball(2.0), &opts).unwrap();
        let x = Vector::from_slice(&[1.2, 0.3]);
        assert_eq!(g.eval(&x).unwrap()[0], q.eval(&x).unwrap());
        assert!(glue_dc(&pieces, &[0.0], ball(2.0), &opts).is_err());
    }
}
