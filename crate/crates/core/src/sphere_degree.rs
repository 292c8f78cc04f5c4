//! Degree of `s ↦ F(s)/‖F(s)‖` on spheres `‖s‖ = r`, the Poincaré index at
//! infinity, and the radial decomposition of `F(s)·s`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibria::{equilibria_of, Equilibrium};
use crate::error::{Error, Result};
use crate::linalg::{orthonormal_frame, sphere_grid, Vec3};
use crate::polyfield::{PolyVectorField, TriPolynomial};

pub const GRID_AZIMUTH: usize = 128;
pub const GRID_POLAR: usize = 64;
/// Angular margin (radians) an omitted direction must keep from every sample.
pub const DEFAULT_MARGIN: f64 = 0.2;
const NEWTON_TOL: f64 = 1e-12;
const DEDUPE_ANGLE: f64 = 1e-5;
/// Preimages whose induced tangent determinant (unit-sphere normalised)
/// falls below this force a new direction.
const SINGULAR_TOL: f64 = 1e-8;
const MAX_ATTEMPTS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegreeMethod {
    RegularValue,
    OmittedDirection,
}

impl FromStr for DegreeMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "regular-value" | "regular_value" => Ok(DegreeMethod::RegularValue),
            "omitted-direction" | "omitted_direction" => Ok(DegreeMethod::OmittedDirection),
            _ => Err(Error::InvalidArgument(format!("unknown degree method `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Preimage {
    pub point: Vec3,
    pub sign: i8,
    /// Determinant of the induced map between unit tangent frames.
    pub tangent_determinant: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DegreeEvidence {
    Preimages { direction: Vec3, preimages: Vec<Preimage>, attempts: usize },
    OmittedDirection { witness: Vec3, margin: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeReport {
    pub radius: f64,
    pub method: DegreeMethod,
    pub degree: i32,
    pub evidence: DegreeEvidence,
    /// Azimuth × polar sample grid.
    pub sample_resolution: [usize; 2],
}

#[derive(Clone, Copy, Debug)]
pub struct DegreeOptions {
    pub n_azimuth: usize,
    pub n_polar: usize,
    pub margin: f64,
}

impl Default for DegreeOptions {
    fn default() -> Self {
        Self { n_azimuth: GRID_AZIMUTH, n_polar: GRID_POLAR, margin: DEFAULT_MARGIN }
    }
}

fn samples(field: &PolyVectorField, r: f64, o: &DegreeOptions) -> Result<Vec<(Vec3, Vec3)>> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {r}")));
    }
    if o.n_azimuth < 4 || o.n_polar < 1 {
        return Err(Error::InvalidArgument("sample grid too coarse".into()));
    }
    let pts: Vec<(Vec3, Vec3)> =
        sphere_grid(o.n_azimuth, o.n_polar).into_par_iter().map(|u| (u * r, field.evaluate(&(u * r)))).collect();
    let fmax = pts.iter().map(|(_, f)| f.norm()).fold(0.0, f64::max);
    if let Some((s, _)) = pts.iter().find(|(_, f)| f.norm() <= 1e-12 * (1.0 + fmax)) {
        return Err(Error::FixedPoint(format!("field vanishes on the sphere near {s:?}")));
    }
    Ok(pts)
}

/// Orientation data of `G = F/‖F‖` at `s`: the determinant of `dG` between
/// right-handed unit tangent frames of the unit sphere and of `S²` at `G(s)`.
fn tangent_determinant(field: &PolyVectorField, s: &Vec3) -> f64 {
    let r = s.norm();
    let f = field.evaluate(s);
    let d = f / f.norm();
    let (e1, e2) = orthonormal_frame(s);
    let j = field.jacobian_at(s);
    r * r * d.dot(&(j * e1).cross(&(j * e2))) / f.norm_squared()
}

/// Solves `F(s) ∥ d`, `‖s‖ = r` by damped Newton from `seed`.
fn preimage_newton(field: &PolyVectorField, d: &Vec3, t: &(Vec3, Vec3), r: f64, seed: Vec3) -> Option<Vec3> {
    let (t1, t2) = t;
    let mut s = seed;
    for _ in 0..60 {
        let f = field.evaluate(&s);
        let fn_ = f.norm();
        if !(fn_ > 0.0 && fn_.is_finite()) {
            return None;
        }
        let j = field.jacobian_at(&s);
        let g = Vec3::new(t1.dot(&f) / fn_, t2.dot(&f) / fn_, (s.norm_squared() - r * r) / (2.0 * r));
        let row1 = j.transpose() * t1 / fn_;
        let row2 = j.transpose() * t2 / fn_;
        let m = nalgebra::Matrix3::from_rows(&[row1.transpose(), row2.transpose(), (s / r).transpose()]);
        let mut step = m.lu().solve(&g)?;
        let cap = 0.25 * r;
        if step.norm() > cap {
            step *= cap / step.norm();
        }
        s -= step;
        s *= r / s.norm();
        if step.norm() <= NEWTON_TOL * r {
            let f = field.evaluate(&s);
            let resid = (t1.dot(&f).powi(2) + t2.dot(&f).powi(2)).sqrt() / f.norm();
            return (resid < 1e-9 && d.dot(&f) > 0.0).then_some(s);
        }
    }
    None
}

/// Deduplicated solutions of `F(s)/‖F(s)‖ = d` on the sphere, Newton-seeded
/// from every grid sample (not only those whose image is near `d`).
fn find_preimages(field: &PolyVectorField, r: f64, pts: &[(Vec3, Vec3)], d: &Vec3) -> Vec<Vec3> {
    let frame = orthonormal_frame(d);
    let found: Vec<Vec3> = pts.par_iter().filter_map(|(s, _)| preimage_newton(field, d, &frame, r, *s)).collect();
    let mut unique: Vec<Vec3> = Vec::new();
    for s in found {
        let u = s / r;
        if !unique.iter().any(|w| (w / r - u).norm() < DEDUPE_ANGLE) {
            unique.push(s);
        }
    }
    unique.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)).then(a.z.total_cmp(&b.z)));
    unique
}

fn random_direction(rng: &mut ChaCha8Rng) -> Vec3 {
    let z: f64 = rng.gen_range(-1.0..1.0);
    let th: f64 = rng.gen_range(0.0..2.0 * PI);
    let q = (1.0 - z * z).sqrt();
    Vec3::new(q * th.cos(), q * th.sin(), z)
}

fn regular_value_degree(
    field: &PolyVectorField,
    r: f64,
    pts: &[(Vec3, Vec3)],
    seed: u64,
) -> Result<(i32, DegreeEvidence)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last_err = String::new();
    for attempt in 1..=MAX_ATTEMPTS {
        let d = random_direction(&mut rng);
        let unique = find_preimages(field, r, pts, &d);
        let pre: Vec<Preimage> = unique
            .iter()
            .map(|s| {
                let det = tangent_determinant(field, s);
                Preimage { point: *s, sign: if det > 0.0 { 1 } else { -1 }, tangent_determinant: det }
            })
            .collect();
        if let Some(bad) = pre.iter().find(|p| p.tangent_determinant.abs() < SINGULAR_TOL) {
            last_err = format!("near-critical preimage at {:?}", bad.point);
            continue;
        }
        let degree = pre.iter().map(|p| p.sign as i32).sum();
        return Ok((degree, DegreeEvidence::Preimages { direction: d, preimages: pre, attempts: attempt }));
    }
    Err(Error::Degree(format!(
        "no regular direction after {MAX_ATTEMPTS} attempts ({last_err}); try the omitted-direction method"
    )))
}

fn min_angle(dirs: &[Vec3], w: &Vec3) -> f64 {
    let best = dirs.iter().map(|u| u.dot(w)).fold(f64::NEG_INFINITY, f64::max);
    best.clamp(-1.0, 1.0).acos()
}

fn unit_images(pts: &[(Vec3, Vec3)]) -> Vec<Vec3> {
    pts.iter().map(|(_, f)| f / f.norm()).collect()
}

/// Sampled angular distance (radians) between direction `d` and the image of
/// `F/‖F‖` on the sphere of radius `r`.
pub fn omitted_direction_margin(field: &PolyVectorField, r: f64, d: &Vec3, opts: &DegreeOptions) -> Result<f64> {
    let pts = samples(field, r, opts)?;
    Ok(min_angle(&unit_images(&pts), &d.normalize()))
}

fn fibonacci_sphere(n: usize) -> Vec<Vec3> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
            let q = (1.0 - z * z).sqrt();
            let th = golden * k as f64;
            Vec3::new(q * th.cos(), q * th.sin(), z)
        })
        .collect()
}

/// Direction farthest (in sampled angle) from the image, with its margin.
fn best_omitted(images: &[Vec3]) -> (Vec3, f64) {
    let mut cands = fibonacci_sphere(4000);
    for k in 0..3 {
        let mut e = Vec3::zeros();
        e[k] = 1.0;
        cands.push(e);
        cands.push(-e);
    }
    let scored: Vec<(Vec3, f64)> = cands.par_iter().map(|c| (*c, min_angle(images, c))).collect();
    let (mut w, mut m) = scored.into_iter().fold((Vec3::z(), f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    // Pattern search on the sphere.
    let mut step = 0.05;
    while step > 1e-7 {
        let (t1, t2) = orthonormal_frame(&w);
        let mut improved = false;
        for k in 0..8 {
            let a = PI * k as f64 / 4.0;
            let c = (w + (t1 * a.cos() + t2 * a.sin()) * step).normalize();
            let mc = min_angle(images, &c);
            if mc > m {
                w = c;
                m = mc;
                improved = true;
                break;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (w, m)
}

/// Best omitted direction found on the sphere and its sampled margin,
/// whether or not the margin reaches the certification threshold.
pub fn omitted_direction_search(field: &PolyVectorField, r: f64, opts: &DegreeOptions) -> Result<(Vec3, f64)> {
    let pts = samples(field, r, opts)?;
    Ok(best_omitted(&unit_images(&pts)))
}

pub fn sphere_map_degree(field: &PolyVectorField, r: f64, method: DegreeMethod, rng_seed: u64) -> Result<DegreeReport> {
    sphere_map_degree_with(field, r, method, rng_seed, &DegreeOptions::default())
}

pub fn sphere_map_degree_with(
    field: &PolyVectorField,
    r: f64,
    method: DegreeMethod,
    rng_seed: u64,
    opts: &DegreeOptions,
) -> Result<DegreeReport> {
    let pts = samples(field, r, opts)?;
    let (degree, evidence) = match method {
        DegreeMethod::RegularValue => regular_value_degree(field, r, &pts, rng_seed)?,
        DegreeMethod::OmittedDirection => {
            let (w, m) = best_omitted(&unit_images(&pts));
            if m <= opts.margin {
                return Err(Error::Inconclusive(format!(
                    "best omitted direction {:?} keeps only {m:.3e} rad from the sampled image (need {})",
                    [w.x, w.y, w.z],
                    opts.margin
                )));
            }
            // Thin regions of the sphere can map onto large caps the grid never
            // samples, so the witness must also survive a preimage search.
            if let Some(p) = find_preimages(field, r, &pts, &w).first() {
                return Err(Error::Inconclusive(format!(
                    "sampled gap around {:?} is spurious: preimage at {:?}",
                    [w.x, w.y, w.z],
                    [p.x, p.y, p.z]
                )));
            }
            (0, DegreeEvidence::OmittedDirection { witness: w, margin: m })
        }
    };
    Ok(DegreeReport { radius: r, method, degree, evidence, sample_resolution: [opts.n_azimuth, opts.n_polar] })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexAtInfinityReport {
    /// `-degree` at the reference radius.
    pub index: i32,
    pub radii: Vec<f64>,
    pub degrees: Vec<i32>,
    pub stable: bool,
    /// Sampled margin of the omitted-direction method per radius, when conclusive.
    pub omitted_direction_margins: Vec<Option<f64>>,
    /// False when a conclusive omitted-direction run contradicts the regular-value degree.
    pub methods_agree: bool,
    pub rng_seed: u64,
}

/// Reference radius enclosing every equilibrium with room to spare.
pub fn reference_radius(equilibria: &[Equilibrium]) -> f64 {
    let m = equilibria.iter().map(|e| e.location.norm()).fold(0.0, f64::max);
    (10.0 * m).max(50.0)
}

pub fn index_at_infinity(field: &PolyVectorField) -> Result<IndexAtInfinityReport> {
    let eqs = equilibria_of(field)?;
    index_at_infinity_with(field, &eqs, 0)
}

/// Index at infinity from the degree at `r` and `4r`, `r = reference_radius`.
pub fn index_at_infinity_with(
    field: &PolyVectorField,
    equilibria: &[Equilibrium],
    rng_seed: u64,
) -> Result<IndexAtInfinityReport> {
    let r = reference_radius(equilibria);
    let radii = vec![r, 4.0 * r];
    let mut degrees = Vec::new();
    let mut margins = Vec::new();
    let mut agree = true;
    for &rad in &radii {
        let rep = sphere_map_degree(field, rad, DegreeMethod::RegularValue, rng_seed)?;
        let om = sphere_map_degree(field, rad, DegreeMethod::OmittedDirection, rng_seed).ok();
        if om.is_some() && rep.degree != 0 {
            agree = false;
        }
        margins.push(om.and_then(|o| match o.evidence {
            DegreeEvidence::OmittedDirection { margin, .. } => Some(margin),
            _ => None,
        }));
        degrees.push(rep.degree);
    }
    let stable = degrees.windows(2).all(|w| w[0] == w[1]);
    Ok(IndexAtInfinityReport {
        index: -degrees[0],
        radii,
        degrees,
        stable,
        omitted_direction_margins: margins,
        methods_agree: agree,
        rng_seed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoincareHopfAudit {
    pub local_indices: Vec<i8>,
    pub index_at_infinity: i32,
    /// Sum of local indices plus the index at infinity; zero passes.
    pub residual: i32,
    pub stable: bool,
    /// The well-definedness lemma only covers degrees in {-1, 0, 1}.
    pub within_stated_range: bool,
}

pub fn poincare_hopf_audit(field: &PolyVectorField) -> Result<PoincareHopfAudit> {
    let eqs = equilibria_of(field)?;
    let idx = index_at_infinity_with(field, &eqs, 0)?;
    poincare_hopf_from(&eqs, &idx)
}

pub fn poincare_hopf_from(equilibria: &[Equilibrium], index: &IndexAtInfinityReport) -> Result<PoincareHopfAudit> {
    let local = equilibria
        .iter()
        .map(|e| {
            e.local_index.ok_or_else(|| Error::Degenerate(format!("equilibrium at {:?} is degenerate", e.location)))
        })
        .collect::<Result<Vec<i8>>>()?;
    let sum: i32 = local.iter().map(|&v| v as i32).sum();
    Ok(PoincareHopfAudit {
        residual: sum + index.index,
        local_indices: local,
        index_at_infinity: index.index,
        stable: index.stable,
        within_stated_range: index.index.abs() <= 1,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialDominanceReport {
    /// `P = F(s)·s`.
    pub p: TriPolynomial,
    pub homogeneous_parts: BTreeMap<u32, TriPolynomial>,
    pub top_degree: u32,
    pub g_top: TriPolynomial,
    pub fraction_positive: f64,
    pub fraction_negative: f64,
    pub fraction_near_zero: f64,
    /// The homogeneous parts sum back to `P` term for term.
    pub reconstructs: bool,
}

pub fn radial_dominance(field: &PolyVectorField) -> Result<RadialDominanceReport> {
    if field.is_zero() {
        return Err(Error::InvalidArgument("field is identically zero".into()));
    }
    let p = field.radial_polynomial();
    if p.is_zero() {
        return Err(Error::Degenerate("F(s)·s vanishes identically: the field is tangent to every sphere".into()));
    }
    let parts = p.homogeneous_components();
    let (&k, g) = parts.iter().next_back().expect("non-zero polynomial has a component");
    let sum = parts.values().fold(TriPolynomial::zero(), |acc, q| &acc + q);
    let vals: Vec<f64> = sphere_grid(GRID_AZIMUTH, GRID_POLAR).iter().map(|u| g.eval(u)).collect();
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let band = 1e-9 * scale;
    let n = vals.len() as f64;
    let count = |pred: &dyn Fn(f64) -> bool| vals.iter().filter(|v| pred(**v)).count() as f64 / n;
    Ok(RadialDominanceReport {
        fraction_positive: count(&|v| v > band),
        fraction_negative: count(&|v| v < -band),
        fraction_near_zero: count(&|v| v.abs() <= band),
        reconstructs: sum == p,
        top_degree: k,
        g_top: g.clone(),
        homogeneous_parts: parts.clone(),
        p,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JacobianRange {
    pub radius: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JacobianRangeReport {
    pub ranges: Vec<JacobianRange>,
    /// The width of the det J range grows by more than 10x across the radii.
    pub non_smooth_at_infinity: bool,
}

pub const DEFAULT_PROBE_RADII: [f64; 3] = [10.0, 100.0, 1000.0];

pub fn jacobian_range_probe(field: &PolyVectorField, radii: &[f64]) -> Result<JacobianRangeReport> {
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidArgument("radii must be positive and finite".into()));
    }
    let grid = sphere_grid(GRID_AZIMUTH, GRID_POLAR);
    let ranges: Vec<JacobianRange> = radii
        .iter()
        .map(|&r| {
            let (lo, hi) = grid
                .par_iter()
                .map(|u| field.jacobian_at(&(u * r)).determinant())
                .fold(|| (f64::INFINITY, f64::NEG_INFINITY), |(a, b), d| (a.min(d), b.max(d)))
                .reduce(|| (f64::INFINITY, f64::NEG_INFINITY), |x, y| (x.0.min(y.0), x.1.max(y.1)));
            JacobianRange { radius: r, min: lo, max: hi }
        })
        .collect();
    let w0 = ranges.first().map(|r| r.max - r.min).unwrap_or(0.0);
    let w1 = ranges.last().map(|r| r.max - r.min).unwrap_or(0.0);
    let non_smooth = ranges.len() > 1 && w1 > 10.0 * w0.max(1e-12 * (1.0 + w1.abs()));
    Ok(JacobianRangeReport { ranges, non_smooth_at_infinity: non_smooth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat3;
    use crate::polyfield::{parse_system, zoo, SystemId};

    fn default(id: SystemId) -> PolyVectorField {
        zoo(id, &BTreeMap::new()).unwrap()
    }

    #[test]
    fn identity_and_antipodal() {
        let id = PolyVectorField::linear("id", &Mat3::identity());
        let neg = PolyVectorField::linear("neg", &(-Mat3::identity()));
        for r in [1.0, 37.0] {
            assert_eq!(sphere_map_degree(&id, r, DegreeMethod::RegularValue, 3).unwrap().degree, 1);
            assert_eq!(sphere_map_degree(&neg, r, DegreeMethod::RegularValue, 3).unwrap().degree, -1);
        }
        assert!(matches!(
            sphere_map_degree(&id, 5.0, DegreeMethod::OmittedDirection, 0),
            Err(Error::Inconclusive(_))
        ));
    }

    #[test]
    fn michelson_omits_up() {
        let f = default(SystemId::Michelson);
        let rep = sphere_map_degree(&f, 100.0, DegreeMethod::OmittedDirection, 0).unwrap();
        assert_eq!(rep.degree, 0);
        let m = omitted_direction_margin(&f, 100.0, &Vec3::z(), &DegreeOptions::default()).unwrap();
        assert!(m > DEFAULT_MARGIN, "margin {m}");
        assert_eq!(sphere_map_degree(&f, 100.0, DegreeMethod::RegularValue, 0).unwrap().degree, 0);
    }

    #[test]
    fn bz_degree_zero() {
        let f = default(SystemId::Bz);
        let rep = sphere_map_degree(&f, 100.0, DegreeMethod::RegularValue, 0).unwrap();
        assert_eq!(rep.degree, 0);
        if let DegreeEvidence::Preimages { preimages, .. } = &rep.evidence {
            assert_eq!(preimages.iter().map(|p| p.sign as i32).sum::<i32>(), 0);
        }
    }

    #[test]
    fn sprott_index_plus_one() {
        let f = default(SystemId::SprottEVariant);
        let rep = index_at_infinity(&f).unwrap();
        assert_eq!(rep.index, 1);
        assert!(rep.stable);
        assert_eq!(poincare_hopf_audit(&f).unwrap().residual, 0);
    }

    #[test]
    fn radial_parts() {
        let f = PolyVectorField::linear("id", &Mat3::identity());
        let rep = radial_dominance(&f).unwrap();
        assert_eq!(rep.top_degree, 2);
        assert_eq!(rep.fraction_positive, 1.0);
        let m = radial_dominance(&default(SystemId::Michelson)).unwrap();
        assert_eq!(m.top_degree, 3);
        assert_eq!(m.g_top, parse_system("dx=-0.5*x^2*z\ndy=0\ndz=0").unwrap().component(0).clone());
        assert!(m.reconstructs);
        let b = radial_dominance(&default(SystemId::Bz)).unwrap();
        assert_eq!(b.top_degree, 4);
        assert_eq!(b.g_top, TriPolynomial::monomial(-1.0, [2, 0, 2]));
    }

    #[test]
    fn rotation_field_is_tangent() {
        let f = parse_system("dx=-y\ndy=x\ndz=0").unwrap();
        assert!(matches!(radial_dominance(&f), Err(Error::Degenerate(_))));
    }

    #[test]
    fn dumm_determinant_range() {
        let f = default(SystemId::Dumm);
        let rep = jacobian_range_probe(&f, &[100.0]).unwrap();
        let r = &rep.ranges[0];
        assert!((r.min + 21.0).abs() < 1e-2 && (r.max - 19.0).abs() < 1e-2, "{r:?}");
        let id = PolyVectorField::linear("id", &Mat3::identity());
        let rep = jacobian_range_probe(&id, &DEFAULT_PROBE_RADII).unwrap();
        assert!(!rep.non_smooth_at_infinity);
        assert!(rep.ranges.iter().all(|r| (r.min - 1.0).abs() < 1e-12 && (r.max - 1.0).abs() < 1e-12));
        let rep = jacobian_range_probe(&default(SystemId::Michelson), &DEFAULT_PROBE_RADII).unwrap();
        assert!(rep.non_smooth_at_infinity);
    }

    #[test]
    fn fixed_point_on_sphere_rejected() {
        let f = parse_system("dx=x-1\ndy=y\ndz=z").unwrap();
        let opts = DegreeOptions { n_azimuth: 8, n_polar: 1, margin: 0.2 };
        assert!(matches!(
            sphere_map_degree_with(&f, 1.0, DegreeMethod::RegularValue, 0, &opts),
            Err(Error::FixedPoint(_))
        ));
    }
}
