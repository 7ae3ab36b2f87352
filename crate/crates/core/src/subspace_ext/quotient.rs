use super::pair::SubspacePair;
use super::sequences::SetSequence;
use crate::certificate::{Certificate, CertificateKind};
use crate::error::{Error, Result};
use crate::geometry::{inner_radius, Ball, ConvexSet, GeneratorSet};
use crate::sampling;
use crate::vector::Vector;

#[derive(Clone, Debug)]
pub struct KuzelikyOptions {
    pub directions: usize,
    /// Samples of `P` for the inclusion certificate; 0 skips it.
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for KuzelikyOptions {
    fn default() -> Self {
        KuzelikyOptions {
            directions: 64,
            samples: 1000,
            tol: 1e-6,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct KuzelikyPoint {
    /// `y_x = 8 u_0`, ambient coordinates.
    pub y: Vector,
    /// `Y` coordinates.
    pub u0: Vector,
    /// Sampled `sup{||y|| : y ∈ P}`.
    pub s: f64,
    pub certificate: Option<Certificate>,
}

/// Farthest-from-origin boundary point of `set` (in `Y` coordinates) along rays from its
/// reference point, returned as `(norm, direction, extent)`.
fn farthest(set: &ConvexSet, directions: usize, seed: u64) -> Result<(f64, Vector, f64)> {
    let c = set.reference_point().expect("non-empty slice");
    let k = c.dim();
    let at = |u: &Vector| -> Result<(f64, f64)> {
        let r = set.radial_extent(&c, u)?;
        if !r.is_finite() {
            return Err(Error::invalid("P is unbounded"));
        }
        Ok((c.axpy(r, u).norm(), r))
    };
    let mut dirs: Vec<Vector> = (0..k)
        .flat_map(|i| [Vector::basis(k, i), Vector::basis(k, i).scale(-1.0)])
        .collect();
    if k > 1 {
        let mut rng = sampling::rng(seed);
        dirs.extend((0..directions).map(|_| sampling::unit_sphere(&mut rng, k)));
    }
    let mut best = (f64::NEG_INFINITY, dirs[0].clone(), 0.0);
    for u in dirs {
        let (s, r) = at(&u)?;
        if s > best.0 {
            best = (s, u, r);
        }
    }
    if k > 1 {
        let mut step = 0.25;
        while step > 1e-6 {
            let mut moved = false;
            for i in 0..k {
                for d in [step, -step] {
                    let mut u = best.1.clone();
                    u[i] += d;
                    if let Some(u) = u.normalized() {
                        let (s, r) = at(&u)?;
                        if s > best.0 {
                            best = (s, u, r);
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
    Ok(best)
}

/// A point `y_x ∈ Y` with `conv[(x+B) ∪ B] ∩ Y ⊂ conv[{y_x} ∪ 8B]`, `B = rB_X`.
pub fn kuzeliky_point(pair: &SubspacePair, r: f64, x: &Vector, opts: &KuzelikyOptions) -> Result<KuzelikyPoint> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::invalid("kuzeliky_point: r must be positive"));
    }
    x.check_dim(pair.dim())?;
    let n = pair.dim();
    let origin = Vector::zeros(n);
    let (y, u0, s) = if x.norm() == 0.0 {
        (origin.clone(), Vector::zeros(pair.y_dim()), r)
    } else {
        let hull = GeneratorSet::new(Vec::new(), vec![Ball::new(x.clone(), r)?, Ball::new(origin.clone(), r)?])?;
        let p = pair.slice(&ConvexSet::Generator(hull))?;
        let (s, u, ext) = farthest(&p, opts.directions, opts.seed)?;
        if pair.y_dim() > 1 {
            let (s2, _, _) = farthest(&p, 2 * opts.directions, sampling::derive_seed(opts.seed, 1))?;
            if (s2 - s).abs() > r / 10.0 {
                return Err(Error::NotConverged {
                    what: "sup of the norm over P".into(),
                    iterations: 2 * opts.directions,
                    best: s2,
                    best_point: x.coords().to_vec(),
                });
            }
        }
        // stepping back by at most r/4 keeps u_0 inside P with ||u_0|| > s - r
        let c = p.reference_point().expect("non-empty slice");
        let u0 = c.axpy(ext - (r / 4.0).min(ext / 2.0), &u);
        (pair.lift(&u0.scale(8.0)), u0, s)
    };

    let certificate = if opts.samples > 0 {
        let target = ConvexSet::Generator(GeneratorSet::new(vec![y.clone()], vec![Ball::new(origin.clone(), 8.0 * r)?])?);
        let hull = GeneratorSet::new(Vec::new(), vec![Ball::new(x.clone(), r)?, Ball::new(origin, r)?])?;
        let p = pair.slice(&ConvexSet::Generator(hull))?;
        let mut cert = Certificate::new(CertificateKind::Membership, "P ⊂ conv[{y_x} ∪ 8B]", opts.tol, opts.seed);
        let mut rng = sampling::rng(sampling::derive_seed(opts.seed, 2));
        let cap = x.norm() + 2.0 * r;
        for _ in 0..opts.samples {
            let q = pair.lift(&p.sample(&mut rng, cap)?);
            let d = target.project(&q, opts.tol * 1e-2)?.dist;
            cert.observe(d, 0.0, || vec![q.coords().to_vec()], "sample of P outside the target hull");
        }
        cert.metric("s", s);
        Some(cert)
    } else {
        None
    };
    Ok(KuzelikyPoint { y, u0, s, certificate })
}

#[derive(Clone, Debug)]
pub struct QuotientOptions {
    /// `B = rB_X` with `8r B_Y ⊂ C_1`; defaults to 0.99/8 of the inner radius of `C_1` at 0.
    pub r: Option<f64>,
    /// Half-width growth of the cubes `Z_n`.
    pub z_width: f64,
    pub samples: usize,
    pub seed: u64,
}

impl Default for QuotientOptions {
    fn default() -> Self {
        QuotientOptions {
            r: None,
            z_width: 1.0,
            samples: 200,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct QuotientConstruction {
    /// `D_j = conv(Z_{n(j)} ∪ B ∪ C_j)` (closures), `j = 1..=C.len()`.
    pub d: SetSequence,
    /// `k_0, k_1, …` as computed (the last may exceed the number of sets).
    pub k: Vec<usize>,
    /// `n(j)` for `j = 1..`.
    pub n_of_j: Vec<usize>,
    pub cover_sizes: Vec<usize>,
    pub r: f64,
    pub certificate: Certificate,
}

/// Grid `F ⊂ Z_n` with `Z_n ⊂ F + B`.
fn cube_cover(pair: &SubspacePair, half: f64, r: f64) -> Vec<Vector> {
    let c = pair.complement().len();
    if c == 0 {
        return vec![Vector::zeros(pair.dim())];
    }
    let h = 2.0 * r / (c as f64).sqrt() * 0.99;
    let m = (2.0 * half / h).ceil() as usize;
    let ticks: Vec<f64> = (0..=m).map(|i| (-half + i as f64 * h).min(half)).collect();
    let mut idx = vec![0usize; c];
    let mut out = Vec::new();
    loop {
        out.push(pair.lift_perp(&Vector::from(idx.iter().map(|&i| ticks[i]).collect::<Vec<_>>())));
        let mut j = 0;
        while j < c {
            idx[j] += 1;
            if idx[j] <= m {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
        if j == c {
            return out;
        }
    }
}

/// Sets `D_j` on `X` with `D_j ∩ Y ⊂ C_j` for an increasing sequence `C` on `Y`
/// (generator sets in `Y` coordinates, `0` interior to `C_1`).
pub fn separable_quotient_extend_sets(pair: &SubspacePair, c: &SetSequence, opts: &QuotientOptions) -> Result<QuotientConstruction> {
    if c.dim() != pair.y_dim() {
        return Err(Error::DimensionMismatch {
            expected: pair.y_dim(),
            got: c.dim(),
        });
    }
    let gens = c
        .sets
        .iter()
        .enumerate()
        .map(|(i, s)| match s {
            ConvexSet::Generator(g) => Ok(g.clone()),
            _ => Err(Error::stage(i + 1, "C_n must be given by generators")),
        })
        .collect::<Result<Vec<_>>>()?;
    let zero_y = Vector::zeros(pair.y_dim());
    let r = match opts.r {
        Some(r) => r,
        None => 0.99 * inner_radius(&c.sets[0], &zero_y)? / 8.0,
    };
    if !(r > 0.0) {
        return Err(Error::invalid("0 must be interior to C_1"));
    }
    let j_max = c.len();
    let kz = KuzelikyOptions {
        samples: 0,
        seed: opts.seed,
        ..Default::default()
    };

    let mut cert = Certificate::new(CertificateKind::Membership, "D_j ∩ Y ⊂ C_j", 1e-7, opts.seed);
    // 8rB_Y ⊂ C_1
    let mut rng = sampling::rng(opts.seed);
    for _ in 0..opts.samples {
        let y = sampling::in_ball(&mut rng, &zero_y, 8.0 * r);
        cert.require(c.sets[0].contains(&y, 0.0), || vec![y.coords().to_vec()], "8rB_Y ⊄ C_1");
    }

    let mut k = vec![1usize];
    let mut cover_sizes = vec![0usize];
    while *k.last().unwrap() <= j_max {
        let n = k.len();
        let cover = cube_cover(pair, n as f64 * opts.z_width, r);
        let mut ys = Vec::with_capacity(cover.len());
        for x in &cover {
            let p = kuzeliky_point(pair, r, x, &kz).map_err(|e| Error::stage(n, format!("kuzeliky point: {e}")))?;
            ys.push(pair.coords(&p.y));
        }
        let prev = *k.last().unwrap();
        let found = (prev + 1..=j_max).find(|&kn| ys.iter().all(|y| c.sets[kn - 1].contains(y, 0.0)));
        cover_sizes.push(cover.len());
        match found {
            Some(kn) => k.push(kn),
            None => {
                k.push(j_max + 1);
                break;
            }
        }
    }
    let n_of_j: Vec<usize> = (1..=j_max)
        .map(|j| k.iter().rposition(|&kn| kn <= j).expect("k_0 = 1"))
        .collect();

    let origin = Vector::zeros(pair.dim());
    let mut sets = Vec::with_capacity(j_max);
    for j in 1..=j_max {
        let cj = gens[j - 1].embed(&origin, pair.y_basis())?;
        let z = GeneratorSet::new(pair.quotient_points(n_of_j[j - 1], opts.z_width), vec![Ball::new(origin.clone(), r)?])?;
        sets.push(ConvexSet::Generator(z.union(&cj)?));
    }
    for (j, dj) in sets.iter().enumerate() {
        let s = pair.slice(dj)?;
        let cap = dj.bounds().map_or(1e3, |(_, b)| b);
        for _ in 0..opts.samples {
            let y = s.sample(&mut rng, cap)?;
            cert.require(c.sets[j].contains(&y, 1e-7), || vec![pair.lift(&y).coords().to_vec()], &format!("D_{} ∩ Y ⊄ C_{}", j + 1, j + 1));
        }
    }
    cert.metric("r", r);
    Ok(QuotientConstruction {
        d: SetSequence::new(sets)?,
        k,
        n_of_j,
        cover_sizes,
        r,
        certificate: cert,
    })
}
