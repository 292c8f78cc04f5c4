//! One-dimensional invariant manifolds of equilibria with a complex pair,
//! sign and trapping checks along them, and connection shooting.

use std::collections::{BTreeMap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibria::{equilibria_of, Equilibrium};
use crate::error::{Error, Result};
use crate::flowkit::{
    check_component, integrate, integrate_observed, poly_event, Crossing, IntegrationOptions, Involution, Termination,
    Trajectory, DEFAULT_R_ESCAPE,
};
use crate::level_sets::{march, CurveSystem, SegmentEnd};
use crate::linalg::{orthonormal_frame, Mat3, Vec3};
use crate::polyfield::{PolyVectorField, TriPolynomial};

pub const CONVERGENCE_DIST: f64 = 1e-6;
/// Accepted steps over which the distance must shrink before convergence is declared.
pub const CONVERGENCE_WINDOW: usize = 100;
pub const DEFAULT_TRACE_TMAX: f64 = 1e3;
pub const REGION_SLACK: f64 = 1e-6;
pub const CONNECTION_TOL: f64 = 1e-4;
pub const TRANSVERSE_TOL: f64 = 1e-8;
/// Samples per integrator step used by the sign and region checks.
const SAMPLES_PER_STEP: usize = 4;
/// Relative node thinning for stored traces (see `IntegrationOptions::thin`).
const TRACE_THIN: f64 = 1e-5;

pub fn default_eps(location: &Vec3) -> f64 {
    1e-6 * (1.0 + location.norm())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    fn of(x: f64) -> Branch {
        if x >= 0.0 {
            Branch::Plus
        } else {
            Branch::Minus
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Unstable,
}

impl Stability {
    /// Time direction in which the manifold is traced away from the equilibrium.
    pub fn time_sign(self) -> f64 {
        match self {
            Stability::Stable => -1.0,
            Stability::Unstable => 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceStatus {
    Escaped,
    ConvergedTo { location: Vec3 },
    BoundedMaxtime,
    Failed { reason: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignVerdict {
    ConstantPositive,
    ConstantNegative,
    Mixed,
    /// Every sample fell inside the tolerance band.
    Zero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignInvariance {
    pub component: usize,
    pub verdict: SignVerdict,
    pub first_violation: Option<Vec3>,
    pub samples: usize,
}

impl SignInvariance {
    /// Constant sign agreeing with `sigma` (±1).
    pub fn matches(&self, sigma: i8) -> bool {
        matches!(
            (self.verdict, sigma),
            (SignVerdict::ConstantPositive, 1) | (SignVerdict::ConstantNegative, -1)
        )
    }
}

/// How the trace was obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Construction {
    /// Integrated from `location ± ε·v`.
    Seeded,
    /// Orbit from a far point of a curve through the equilibrium that
    /// arrives tangent to `±v`, reversed.
    FarSeed { curve: String, far_point: Vec3, approach_cosine: f64 },
}

#[derive(Clone, Debug)]
pub struct ManifoldTrace {
    pub field_name: String,
    pub parameters: BTreeMap<String, f64>,
    pub equilibrium: Equilibrium,
    /// Unit real eigenvector, largest component positive.
    pub eigenvector: Vec3,
    pub branch: Branch,
    pub stability: Stability,
    pub eps: f64,
    pub seed: Vec3,
    /// Radius around the equilibrium excluded from sign and region checks.
    pub seed_ball: f64,
    pub polyline: Trajectory,
    pub status: TraceStatus,
    pub sign_record: [SignInvariance; 3],
    pub construction: Construction,
}

impl ManifoldTrace {
    /// Dense samples outside the seed ball.
    pub fn samples(&self) -> Vec<Vec3> {
        let c = self.equilibrium.location;
        self.polyline
            .dense_samples(SAMPLES_PER_STEP)
            .into_iter()
            .map(|(_, s)| s)
            .filter(|s| (s - c).norm() > self.seed_ball)
            .collect()
    }

    pub fn end_point(&self) -> Vec3 {
        self.polyline.last_point()
    }

    pub fn summary(&self) -> TraceSummary {
        TraceSummary {
            equilibrium: self.equilibrium.location,
            eigenvector: self.eigenvector,
            branch: self.branch,
            stability: self.stability,
            eps: self.eps,
            seed: self.seed,
            status: self.status.clone(),
            sign_record: self.sign_record.clone(),
            construction: self.construction.clone(),
            n_nodes: self.polyline.len(),
            t_final: self.polyline.last_time(),
            end_point: self.end_point(),
            end_radius: self.end_point().norm(),
        }
    }
}

/// Serializable digest of a trace (the polyline itself goes to CSV).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub equilibrium: Vec3,
    pub eigenvector: Vec3,
    pub branch: Branch,
    pub stability: Stability,
    pub eps: f64,
    pub seed: Vec3,
    pub status: TraceStatus,
    pub sign_record: [SignInvariance; 3],
    pub construction: Construction,
    pub n_nodes: usize,
    pub t_final: f64,
    pub end_point: Vec3,
    pub end_radius: f64,
}

#[derive(Clone, Debug)]
pub struct TraceOptions {
    /// Seed offset; `None` means `default_eps`.
    pub eps: Option<f64>,
    pub t_max: f64,
    pub r_escape: f64,
    /// Equilibria a trace may converge to; `None` means all equilibria of the field.
    pub targets: Option<Vec<Vec3>>,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self { eps: None, t_max: DEFAULT_TRACE_TMAX, r_escape: DEFAULT_R_ESCAPE, targets: None }
    }
}

/// Unit eigenvector of the real eigenvalue, largest component positive.
pub fn real_eigenvector(eq: &Equilibrium) -> Result<Vec3> {
    let lam = eq
        .real_eigenvalue()
        .ok_or_else(|| Error::InvalidArgument(format!("{:?} equilibrium has no isolated real eigenvalue", eq.classification)))?;
    if lam.abs() <= 1e-8 {
        return Err(Error::Degenerate(format!("real eigenvalue {lam:e} too close to zero")));
    }
    let m = eq.jacobian_matrix() - Mat3::identity() * lam;
    let rows: Vec<Vec3> = (0..3).map(|k| m.row(k).transpose()).collect();
    let best = [rows[0].cross(&rows[1]), rows[0].cross(&rows[2]), rows[1].cross(&rows[2])]
        .into_iter()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .expect("three candidates");
    let scale = m.norm().max(1e-300);
    if best.norm() <= 1e-10 * scale * scale {
        return Err(Error::Degenerate("real eigenvector ill-conditioned".into()));
    }
    let mut v = best.normalize();
    if (m * v).norm() > 1e-7 * scale {
        return Err(Error::Degenerate("real eigenvector ill-conditioned".into()));
    }
    let k = v.iamax();
    if v[k] < 0.0 {
        v = -v;
    }
    Ok(v)
}

fn stability_of(eq: &Equilibrium) -> Result<(f64, Stability)> {
    let lam = eq.real_eigenvalue().ok_or_else(|| {
        Error::InvalidArgument(format!("{:?} equilibrium has no isolated real eigenvalue", eq.classification))
    })?;
    Ok((lam, if lam < 0.0 { Stability::Stable } else { Stability::Unstable }))
}

/// Both branches of the 1D manifold of `eq`, seeded at `±ε·v`.
pub fn trace_1d_manifolds(
    field: &PolyVectorField,
    eq: &Equilibrium,
    eps: Option<f64>,
    t_max: f64,
) -> Result<[ManifoldTrace; 2]> {
    trace_1d_manifolds_with(field, eq, &TraceOptions { eps, t_max, ..TraceOptions::default() })
}

pub fn trace_1d_manifolds_with(field: &PolyVectorField, eq: &Equilibrium, opts: &TraceOptions) -> Result<[ManifoldTrace; 2]> {
    let targets = match &opts.targets {
        Some(t) => t.clone(),
        None => equilibria_of(field)?.into_iter().map(|e| e.location).collect(),
    };
    let v = real_eigenvector(eq)?;
    let plus = trace_branch(field, eq, v, Branch::Plus, opts, &targets)?;
    let minus = trace_branch(field, eq, v, Branch::Minus, opts, &targets)?;
    Ok([plus, minus])
}

fn trace_branch(
    field: &PolyVectorField,
    eq: &Equilibrium,
    v: Vec3,
    branch: Branch,
    opts: &TraceOptions,
    targets: &[Vec3],
) -> Result<ManifoldTrace> {
    if !(opts.t_max > 0.0) {
        return Err(Error::InvalidArgument("t_max must be positive".into()));
    }
    let (_, stability) = stability_of(eq)?;
    let loc = eq.location;
    let eps = opts.eps.unwrap_or_else(|| default_eps(&loc));
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    let seed = loc + v * (eps * branch.sign());
    let io = IntegrationOptions {
        r_escape: opts.r_escape * (1.0 + 1e-6),
        thin: Some(TRACE_THIN),
        ..IntegrationOptions::default()
    };
    let mut left_home = false;
    let mut history: Vec<VecDeque<f64>> = vec![VecDeque::with_capacity(CONVERGENCE_WINDOW + 1); targets.len()];
    let mut observer = |_: f64, s: &Vec3| {
        if !left_home && (s - loc).norm() > 100.0 * eps {
            left_home = true;
        }
        for (j, p) in targets.iter().enumerate() {
            let is_home = (p - loc).norm() <= 1e-9 * (1.0 + loc.norm());
            if is_home && !left_home {
                continue;
            }
            let d = (s - p).norm();
            let h = &mut history[j];
            h.push_back(d);
            if h.len() > CONVERGENCE_WINDOW + 1 {
                h.pop_front();
            }
            if d < CONVERGENCE_DIST && h.len() == CONVERGENCE_WINDOW + 1 && d < h[0] {
                return Some(format!("converged:{j}"));
            }
        }
        None
    };
    let tr = integrate_observed(field, seed, (0.0, stability.time_sign() * opts.t_max), &io, &[], &mut observer)?;
    let status = match &tr.termination {
        Termination::Escape => TraceStatus::Escaped,
        Termination::TEnd => TraceStatus::BoundedMaxtime,
        Termination::StiffFailure(m) => TraceStatus::Failed { reason: m.clone() },
        Termination::Event(r) => match r.strip_prefix("converged:").and_then(|j| j.parse::<usize>().ok()) {
            Some(j) => TraceStatus::ConvergedTo { location: targets[j] },
            None => TraceStatus::Failed { reason: r.clone() },
        },
    };
    Ok(finish_trace(field, eq, v, branch, stability, eps, seed, 10.0 * eps, tr, status, Construction::Seeded))
}

#[allow(clippy::too_many_arguments)]
fn finish_trace(
    field: &PolyVectorField,
    eq: &Equilibrium,
    v: Vec3,
    branch: Branch,
    stability: Stability,
    eps: f64,
    seed: Vec3,
    seed_ball: f64,
    polyline: Trajectory,
    status: TraceStatus,
    construction: Construction,
) -> ManifoldTrace {
    let mut t = ManifoldTrace {
        field_name: field.name.clone(),
        parameters: field.parameters.clone(),
        equilibrium: eq.clone(),
        eigenvector: v,
        branch,
        stability,
        eps,
        seed,
        seed_ball,
        polyline,
        status,
        sign_record: std::array::from_fn(|k| SignInvariance {
            component: k + 1,
            verdict: SignVerdict::Zero,
            first_violation: None,
            samples: 0,
        }),
        construction,
    };
    let samples = t.samples();
    t.sign_record = std::array::from_fn(|k| sign_of_samples(field, k, &samples));
    t
}

fn sign_of_samples(field: &PolyVectorField, k: usize, samples: &[Vec3]) -> SignInvariance {
    let mut reference = 0.0;
    let mut violation = None;
    for s in samples {
        let f = field.component(k).eval(s);
        if f.abs() <= 1e-9 * (1.0 + s.norm()) {
            continue;
        }
        if reference == 0.0 {
            reference = f.signum();
        } else if f.signum() != reference {
            violation = Some(*s);
            break;
        }
    }
    let verdict = match (violation, reference) {
        (Some(_), _) => SignVerdict::Mixed,
        (None, r) if r > 0.0 => SignVerdict::ConstantPositive,
        (None, r) if r < 0.0 => SignVerdict::ConstantNegative,
        _ => SignVerdict::Zero,
    };
    SignInvariance { component: k + 1, verdict, first_violation: violation, samples: samples.len() }
}

/// Sign behaviour of `F_i` (1-based) along the trace, outside the seed ball.
pub fn sign_invariance(trace: &ManifoldTrace, field: &PolyVectorField, i: usize) -> Result<SignInvariance> {
    check_component(i)?;
    if trace.polyline.is_empty() {
        return Err(Error::InvalidArgument("empty trace".into()));
    }
    Ok(sign_of_samples(field, i - 1, &trace.samples()))
}

/// `{σ F_i ≥ 0} ∩ {d (s_i − c) ≥ 0}` with `i` 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrappingRegion {
    pub component: usize,
    pub sigma: i8,
    pub anchor: f64,
    pub direction: i8,
}

impl TrappingRegion {
    /// Smallest of the two constraint values; non-negative inside.
    pub fn margin(&self, field: &PolyVectorField, s: &Vec3) -> f64 {
        let k = self.component - 1;
        let a = f64::from(self.sigma) * field.component(k).eval(s);
        let b = f64::from(self.direction) * (s[k] - self.anchor);
        a.min(b)
    }

    pub fn describe(&self) -> String {
        let names = ["x", "y", "z"];
        let k = self.component - 1;
        format!(
            "{{F{} {} 0}} ∩ {{{} {} {}}}",
            self.component,
            if self.sigma > 0 { "≥" } else { "≤" },
            names[k],
            if self.direction > 0 { "≥" } else { "≤" },
            self.anchor
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Containment {
    pub contained: bool,
    /// Smallest region margin over the samples; `None` without samples.
    pub worst_margin: Option<f64>,
    pub first_violation: Option<Vec3>,
    pub samples: usize,
}

/// Whether every sample of the trace outside its seed ball lies in `region` within `slack`.
pub fn region_containment(trace: &ManifoldTrace, field: &PolyVectorField, region: &TrappingRegion, slack: f64) -> Containment {
    let samples = trace.samples();
    let mut worst: Option<f64> = None;
    let mut first = None;
    for s in &samples {
        let m = region.margin(field, s);
        worst = Some(worst.map_or(m, |w| w.min(m)));
        if m < -slack && first.is_none() {
            first = Some(*s);
        }
    }
    Containment { contained: first.is_none() && !samples.is_empty(), worst_margin: worst, first_violation: first, samples: samples.len() }
}

/// Alternative construction when seeded tracing of the real direction is
/// numerically hopeless (a sink or source whose real eigenvalue is the weak
/// one). Curves through `eq` (nullcline pairs and tangency curves) are
/// continued out past `r_escape`; orbits started there that arrive at `eq`
/// tangent to `±v` are reversed and cut at `r_escape`.
pub fn trace_far_seeded(field: &PolyVectorField, eq: &Equilibrium, opts: &TraceOptions) -> Result<Vec<ManifoldTrace>> {
    let (_, stability) = stability_of(eq)?;
    let v = real_eigenvector(eq)?;
    let loc = eq.location;
    let r_far = 1.05 * opts.r_escape.max(loc.norm() + 1.0);
    let delta = 1e-5 * (1.0 + loc.norm());
    let mut curves: Vec<(String, TriPolynomial, TriPolynomial)> = Vec::new();
    for (a, b) in [(0, 1), (0, 2), (1, 2)] {
        curves.push((format!("F{}=F{}=0", a + 1, b + 1), field.component(a).clone(), field.component(b).clone()));
    }
    for i in 0..3 {
        let fi = field.component(i).clone();
        let li = field.lie_derivative(&fi);
        curves.push((format!("F{0}=LF{0}=0", i + 1), fi, li));
    }
    let jobs: Vec<(usize, f64)> = (0..curves.len()).flat_map(|c| [(c, 1.0), (c, -1.0)]).collect();
    let t_far = opts.t_max.max(1e4);
    let found: Vec<Option<ManifoldTrace>> = jobs
        .par_iter()
        .map(|&(c, dir)| {
            let (name, g1, g2) = &curves[c];
            if g1.is_zero() || g2.is_zero() {
                return None;
            }
            let cs = CurveSystem { g1, g2 };
            cs.tangent(&loc)?;
            let step = |s: &Vec3| 0.02 * (1.0 + s.norm());
            let stop = |s: &Vec3| s.norm() >= r_far;
            let (pts, end) = march(&cs, loc, dir, &step, &stop);
            if !matches!(end, SegmentEnd::WindowBoundary(_)) {
                return None;
            }
            let q = *pts.last()?;
            let io = IntegrationOptions { r_escape: 100.0 * r_far, thin: Some(TRACE_THIN), ..IntegrationOptions::default() };
            let mut arrive = |_: f64, s: &Vec3| ((s - loc).norm() < delta).then(|| "arrived".to_string());
            let tr = integrate_observed(field, q, (0.0, -stability.time_sign() * t_far), &io, &[], &mut arrive).ok()?;
            if tr.termination != Termination::Event("arrived".into()) {
                return None;
            }
            let cos = (tr.last_point() - loc).normalize().dot(&v);
            if cos.abs() < 0.99 {
                return None;
            }
            let mut rev = tr.reversed().truncated_at_radius(opts.r_escape * (1.0 + 1e-6))?;
            let end_s = rev.last_point();
            let outward = stability.time_sign() * end_s.dot(&field.evaluate(&end_s)) > 0.0;
            let status = if outward {
                TraceStatus::Escaped
            } else {
                TraceStatus::Failed { reason: "crossing of the escape sphere is not outward".into() }
            };
            rev.termination = Termination::Escape;
            let seed = rev.s[0];
            Some(finish_trace(
                field,
                eq,
                v,
                Branch::of(cos),
                stability,
                (seed - loc).norm(),
                seed,
                delta,
                rev,
                status,
                Construction::FarSeed { curve: name.clone(), far_point: q, approach_cosine: cos },
            ))
        })
        .collect();
    Ok(found.into_iter().flatten().collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransversalityVerdict {
    Transverse,
    Tangent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transversality {
    pub verdict: TransversalityVerdict,
    /// Largest component of `Ju`, `Jw` along the unit normal of H.
    pub normal_component: f64,
    pub jacobian_norm: f64,
    /// `normal_component / jacobian_norm`.
    pub conditioning: f64,
    pub has_complex_pair: bool,
}

/// Whether the Jacobian at `eq` moves the plane `H = {F_i = 0}` off itself.
pub fn transversality_2d(field: &PolyVectorField, eq: &Equilibrium, i: usize) -> Result<Transversality> {
    check_component(i)?;
    let fi = field.component(i - 1);
    if fi.degree() != 1 {
        return Err(Error::Unsupported(format!("H = {{F{i} = 0}} is not a plane")));
    }
    let n = fi.eval_gradient(&Vec3::zeros()).normalize();
    let (u, w) = orthonormal_frame(&n);
    let j = eq.jacobian_matrix();
    let normal = n.dot(&(j * u)).abs().max(n.dot(&(j * w)).abs());
    let jn = j.norm();
    let transverse = normal > TRANSVERSE_TOL * jn;
    Ok(Transversality {
        verdict: if transverse { TransversalityVerdict::Transverse } else { TransversalityVerdict::Tangent },
        normal_component: normal,
        jacobian_norm: jn,
        conditioning: if jn > 0.0 { normal / jn } else { 0.0 },
        has_complex_pair: eq.classification.has_complex_pair(),
    })
}

#[derive(Clone, Debug)]
pub struct ConnectionDistance {
    pub distance: f64,
    pub closest_point: Vec3,
    pub trace: ManifoldTrace,
}

/// Closest approach to `to_eq` of either branch of `from_eq`'s 1D manifold,
/// counted after the branch first leaves the ball of radius `100ε`.
pub fn connection_distance(
    field: &PolyVectorField,
    from_eq: &Equilibrium,
    to_eq: &Equilibrium,
    eps: Option<f64>,
    t_max: f64,
) -> Result<ConnectionDistance> {
    let opts = TraceOptions { eps, t_max, targets: Some(vec![to_eq.location]), ..TraceOptions::default() };
    let traces = trace_1d_manifolds_with(field, from_eq, &opts)?;
    let mut best: Option<ConnectionDistance> = None;
    for tr in traces {
        let (d, p) = closest_approach(&tr, &to_eq.location);
        if best.as_ref().is_none_or(|b| d < b.distance) {
            best = Some(ConnectionDistance { distance: d, closest_point: p, trace: tr });
        }
    }
    Ok(best.expect("two branches"))
}

fn closest_approach(tr: &ManifoldTrace, target: &Vec3) -> (f64, Vec3) {
    let home = tr.equilibrium.location;
    let mut left = false;
    let mut best = (f64::INFINITY, tr.end_point());
    for (_, s) in tr.polyline.dense_samples(8) {
        if !left {
            left = (s - home).norm() > 100.0 * tr.eps;
            if !left {
                continue;
            }
        }
        let d = (s - target).norm();
        if d < best.0 {
            best = (d, s);
        }
    }
    best
}

/// One evaluation of the shooting functional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub c: f64,
    /// `z` at the first falling crossing of `{x = 0}`; `None` if never reached.
    pub g: Option<f64>,
    pub crossing: Option<Vec3>,
    pub note: Option<String>,
}

/// The pair `(p₋, p₊ = σ(p₋))` of a reversible field: `p₋` is the equilibrium
/// with smallest `x` whose real eigenvalue is positive.
fn reversible_pair(field: &PolyVectorField, sigma: &Involution) -> Result<(Equilibrium, Equilibrium)> {
    let eqs = equilibria_of(field)?;
    let minus = eqs
        .iter()
        .filter(|e| e.real_eigenvalue().is_some_and(|l| l > 0.0))
        .min_by(|a, b| a.location.x.total_cmp(&b.location.x))
        .ok_or_else(|| Error::InvalidArgument("no equilibrium with a 1D unstable manifold".into()))?
        .clone();
    let image = sigma.apply(&minus.location);
    let plus = eqs
        .iter()
        .find(|e| (e.location - image).norm() < 1e-8 * (1.0 + image.norm()))
        .ok_or_else(|| Error::InvalidArgument("equilibrium set is not symmetric".into()))?
        .clone();
    Ok((minus, plus))
}

/// Branch of `p₋` heading towards `+x`.
fn shooting_branch(v: &Vec3) -> Result<Branch> {
    if v.x.abs() < 1e-12 {
        return Err(Error::Degenerate("unstable direction has no x component".into()));
    }
    Ok(Branch::of(v.x))
}

const SHOOT_TMAX: f64 = 200.0;

pub fn shooting_value(field: &PolyVectorField, c: f64) -> Result<ShotRecord> {
    let (minus, _) = reversible_pair(field, &Involution::michelson())?;
    let v = real_eigenvector(&minus)?;
    let branch = shooting_branch(&v)?;
    let seed = minus.location + v * (branch.sign() * default_eps(&minus.location));
    let x = TriPolynomial::var(0);
    let ev = [poly_event("x=0", &x).crossing(Crossing::Falling)];
    let tr = integrate(field, seed, (0.0, SHOOT_TMAX), &IntegrationOptions::default(), &ev)?;
    Ok(match tr.termination {
        Termination::Event(_) => {
            let p = tr.last_point();
            ShotRecord { c, g: Some(p.z), crossing: Some(p), note: None }
        }
        Termination::Escape => ShotRecord { c, g: None, crossing: None, note: Some("branch escapes".into()) },
        Termination::TEnd => ShotRecord { c, g: None, crossing: None, note: Some("no crossing before t_max".into()) },
        Termination::StiffFailure(m) => ShotRecord { c, g: None, crossing: None, note: Some(m) },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectionCertificate {
    pub c_star: f64,
    pub g: f64,
    pub from: Vec3,
    pub to: Vec3,
    pub from_branch: Branch,
    /// Branch of `to`'s stable manifold carrying the same orbit.
    pub to_branch: Branch,
    pub distance: f64,
    /// Crossing of the symmetry line `{x = 0, z = 0}` closing the orbit.
    pub crossing_point: Vec3,
    pub certified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BracketOutcome {
    pub lo: f64,
    pub hi: f64,
    pub outcome: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectionSearch {
    pub scan: Vec<ShotRecord>,
    pub brackets: Vec<BracketOutcome>,
    pub c_star: f64,
    pub bracket_width: f64,
    pub certificate: ConnectionCertificate,
}

/// Shoots `p₋`'s `+x` unstable branch at `{x = 0}` across a parameter scan,
/// bisects the first genuine sign change of `z` there to width `tol` and
/// certifies the resulting symmetric heteroclinic orbit.
pub fn find_connection<F>(family: F, c_interval: (f64, f64), step: f64, tol: f64) -> Result<ConnectionSearch>
where
    F: Fn(f64) -> Result<PolyVectorField> + Sync,
{
    let (lo, hi) = c_interval;
    if !(lo < hi && step > 0.0 && tol > 0.0) {
        return Err(Error::InvalidArgument("need c_lo < c_hi, step > 0, tol > 0".into()));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    let cs: Vec<f64> = (0..=n).map(|k| lo + step * k as f64).collect();
    let shoot = |c: f64| -> Result<ShotRecord> { shooting_value(&family(c)?, c) };
    let scan: Vec<ShotRecord> = cs.par_iter().map(|&c| shoot(c)).collect::<Result<_>>()?;
    let mut brackets = Vec::new();
    for w in scan.windows(2) {
        let (Some(ga), Some(gb)) = (w[0].g, w[1].g) else { continue };
        if ga.signum() == gb.signum() && ga != 0.0 && gb != 0.0 {
            continue;
        }
        match refine(&shoot, (w[0].c, ga), (w[1].c, gb), tol)? {
            Ok((c_star, g, width)) => {
                brackets.push(BracketOutcome { lo: w[0].c, hi: w[1].c, outcome: format!("root at {c_star}") });
                let field = family(c_star)?;
                let certificate = certify(&field, c_star, g)?;
                return Ok(ConnectionSearch { scan, brackets, c_star, bracket_width: width, certificate });
            }
            Err(reason) => brackets.push(BracketOutcome { lo: w[0].c, hi: w[1].c, outcome: reason }),
        }
    }
    if brackets.is_empty() {
        Err(Error::NoSignChange(format!("shooting functional keeps its sign on [{lo}, {hi}]")))
    } else {
        Err(Error::Inconclusive(format!("{} sign changes, none a root: {:?}", brackets.len(), brackets)))
    }
}

type Shoot<'a> = dyn Fn(f64) -> Result<ShotRecord> + 'a;

/// Bisection then regula falsi inside the bracket. The inner `Err` carries
/// the reason a bracket was discarded.
fn refine(shoot: &Shoot<'_>, a: (f64, f64), b: (f64, f64), tol: f64) -> Result<std::result::Result<(f64, f64, f64), String>> {
    let (mut a, mut b) = (a, b);
    if a.1 == 0.0 {
        return Ok(Ok((a.0, 0.0, 0.0)));
    }
    while b.0 - a.0 > tol {
        let m = 0.5 * (a.0 + b.0);
        let Some(gm) = shoot(m)?.g else {
            return Ok(Err(format!("crossing lost at c = {m}")));
        };
        if gm == 0.0 {
            return Ok(Ok((m, 0.0, b.0 - a.0)));
        }
        if gm.signum() == a.1.signum() {
            a = (m, gm);
        } else {
            b = (m, gm);
        }
    }
    let width = b.0 - a.0;
    let mut best = if a.1.abs() < b.1.abs() { a } else { b };
    for _ in 0..8 {
        if best.1.abs() < 1e-12 || b.1 == a.1 {
            break;
        }
        let c = a.0 - a.1 * (b.0 - a.0) / (b.1 - a.1);
        if !(c > a.0 && c < b.0) {
            break;
        }
        let Some(gc) = shoot(c)?.g else { break };
        if gc.abs() < best.1.abs() {
            best = (c, gc);
        }
        if gc.signum() == a.1.signum() {
            a = (c, gc);
        } else {
            b = (c, gc);
        }
    }
    if best.1.abs() < 1e-6 {
        Ok(Ok((best.0, best.1, width)))
    } else {
        Ok(Err(format!("jump discontinuity (|g| = {:.3e} at width {width:.1e})", best.1.abs())))
    }
}

fn certify(field: &PolyVectorField, c_star: f64, g: f64) -> Result<ConnectionCertificate> {
    let sigma = Involution::michelson();
    let (minus, plus) = reversible_pair(field, &sigma)?;
    let v = real_eigenvector(&minus)?;
    let from_branch = shooting_branch(&v)?;
    let shot = shooting_value(field, c_star)?;
    let crossing = shot.crossing.ok_or_else(|| Error::Inconclusive("crossing lost at c*".into()))?;
    let opts = TraceOptions { targets: Some(vec![plus.location]), ..TraceOptions::default() };
    let traces = trace_1d_manifolds_with(field, &minus, &opts)?;
    let tr = traces.iter().find(|t| t.branch == from_branch).expect("both branches traced");
    let (distance, _) = closest_approach(tr, &plus.location);
    let offset = sigma.apply(&(v * from_branch.sign()));
    let to_branch = Branch::of(offset.dot(&real_eigenvector(&plus)?));
    Ok(ConnectionCertificate {
        c_star,
        g,
        from: minus.location,
        to: plus.location,
        from_branch,
        to_branch,
        distance,
        crossing_point: crossing,
        certified: distance < CONNECTION_TOL && g.abs() < 1e-6,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphNode {
    Equilibrium { location: Vec3 },
    Infinity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Escaping,
    Converging,
    /// Bounded orbit certified by a connection certificate.
    Connection,
    /// The straight closing segment between the two anchor equilibria.
    Segment,
    /// Trace ended without reaching a node.
    Unresolved,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub from: usize,
    pub to: Option<usize>,
    pub kind: EdgeKind,
    pub trace: Option<usize>,
    pub branch: Option<Branch>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphClass {
    HeteroclinicKnotCandidate,
    HomoclinicNooseCandidate,
    UnknotCertified,
    Unresolved,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantGraph {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
    pub classification: GraphClass,
    pub reasons: Vec<String>,
}

/// One of the two curves in the monotone-coordinate closure argument.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaSpec {
    /// Index into the trace list.
    pub trace: usize,
    pub region: TrappingRegion,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClosureRule {
    /// Γ₁, Γ₂ monotone in `s_i`, in opposite half-spaces, closed by the
    /// segment between their equilibria.
    MonotoneSegment { gamma1: GammaSpec, gamma2: GammaSpec },
    Connection(ConnectionCertificate),
    None,
}

pub fn assemble_invariant_graph(
    field: &PolyVectorField,
    traces: &[ManifoldTrace],
    rule: &ClosureRule,
) -> Result<InvariantGraph> {
    for t in traces {
        if t.field_name != field.name || t.parameters != field.parameters {
            return Err(Error::InvalidArgument(format!(
                "trace from field `{}` {:?} mixed with `{}` {:?}",
                t.field_name, t.parameters, field.name, field.parameters
            )));
        }
    }
    let mut nodes = vec![GraphNode::Infinity];
    let node_of = |p: &Vec3, nodes: &mut Vec<GraphNode>| -> usize {
        let tol = 1e-8 * (1.0 + p.norm());
        if let Some(k) = nodes.iter().position(|n| matches!(n, GraphNode::Equilibrium { location } if (location - p).norm() < tol)) {
            return k;
        }
        nodes.push(GraphNode::Equilibrium { location: *p });
        nodes.len() - 1
    };
    let cert = match rule {
        ClosureRule::Connection(c) => Some(c),
        _ => None,
    };
    let on_connection = |t: &ManifoldTrace, c: &ConnectionCertificate| {
        let near = |a: &Vec3, b: &Vec3| (a - b).norm() < 1e-8 * (1.0 + b.norm());
        (t.stability == Stability::Unstable && near(&t.equilibrium.location, &c.from) && t.branch == c.from_branch)
            || (t.stability == Stability::Stable && near(&t.equilibrium.location, &c.to) && t.branch == c.to_branch)
    };
    let mut edges = Vec::new();
    let mut reasons = Vec::new();
    for (k, t) in traces.iter().enumerate() {
        let from = node_of(&t.equilibrium.location, &mut nodes);
        let (to, kind) = if let Some(c) = cert.filter(|c| c.certified && on_connection(t, c)) {
            let (a, b) = (node_of(&c.from, &mut nodes), node_of(&c.to, &mut nodes));
            (Some(if from == a { b } else { a }), EdgeKind::Connection)
        } else {
            match &t.status {
                TraceStatus::Escaped => (Some(0), EdgeKind::Escaping),
                TraceStatus::ConvergedTo { location } => (Some(node_of(location, &mut nodes)), EdgeKind::Converging),
                TraceStatus::BoundedMaxtime | TraceStatus::Failed { .. } => {
                    reasons.push(format!("trace {k} ended without reaching a node ({:?})", t.status));
                    (None, EdgeKind::Unresolved)
                }
            }
        };
        edges.push(GraphEdge { from, to, kind, trace: Some(k), branch: Some(t.branch) });
    }
    let classification = match rule {
        ClosureRule::MonotoneSegment { gamma1, gamma2 } => {
            let ok = monotone_closure(field, traces, gamma1, gamma2, &mut reasons)?;
            let complete = !edges.iter().any(|e| e.kind == EdgeKind::Unresolved);
            if ok && complete {
                let a = node_of(&traces[gamma1.trace].equilibrium.location, &mut nodes);
                let b = node_of(&traces[gamma2.trace].equilibrium.location, &mut nodes);
                if a != b {
                    edges.push(GraphEdge { from: a, to: Some(b), kind: EdgeKind::Segment, trace: None, branch: None });
                }
                GraphClass::UnknotCertified
            } else {
                GraphClass::Unresolved
            }
        }
        ClosureRule::Connection(c) => {
            let a = node_of(&c.from, &mut nodes);
            let b = node_of(&c.to, &mut nodes);
            let escapes = |n: usize| edges.iter().any(|e| e.from == n && e.kind == EdgeKind::Escaping);
            let linked = edges.iter().any(|e| e.kind == EdgeKind::Connection);
            if !c.certified {
                reasons.push("connection certificate not certified".into());
                GraphClass::Unresolved
            } else if edges.iter().any(|e| e.kind == EdgeKind::Unresolved) {
                GraphClass::Unresolved
            } else if !linked {
                reasons.push("no trace follows the certified connection".into());
                GraphClass::Unresolved
            } else if a == b && escapes(a) {
                GraphClass::HomoclinicNooseCandidate
            } else if a != b && escapes(a) && escapes(b) {
                GraphClass::HeteroclinicKnotCandidate
            } else {
                reasons.push("connected equilibria lack an escaping branch".into());
                GraphClass::Unresolved
            }
        }
        ClosureRule::None => GraphClass::Unresolved,
    };
    Ok(InvariantGraph { nodes, edges, classification, reasons })
}

fn monotone_closure(
    field: &PolyVectorField,
    traces: &[ManifoldTrace],
    g1: &GammaSpec,
    g2: &GammaSpec,
    reasons: &mut Vec<String>,
) -> Result<bool> {
    for g in [g1, g2] {
        if g.trace >= traces.len() {
            return Err(Error::InvalidArgument(format!("trace index {} out of range", g.trace)));
        }
        check_component(g.region.component)?;
    }
    let (r1, r2) = (&g1.region, &g2.region);
    if r1.component != r2.component {
        reasons.push("Γ₁ and Γ₂ regions use different coordinates".into());
        return Ok(false);
    }
    if r1.direction != -r2.direction {
        reasons.push("half-spaces point the same way".into());
        return Ok(false);
    }
    // {d s ≥ a1} and {-d s ≥ -a2} meet at most in a plane when d a1 ≥ d a2.
    if f64::from(r1.direction) * (r1.anchor - r2.anchor) < 0.0 {
        reasons.push("half-spaces overlap".into());
        return Ok(false);
    }
    let mut ok = true;
    for (name, g) in [("Γ₁", g1), ("Γ₂", g2)] {
        let t = &traces[g.trace];
        if t.status != TraceStatus::Escaped {
            reasons.push(format!("{name} does not escape ({:?})", t.status));
            ok = false;
        }
        if t.status == TraceStatus::BoundedMaxtime {
            continue;
        }
        let s = sign_invariance(t, field, g.region.component)?;
        if !s.matches(g.region.sigma) {
            reasons.push(format!("{name}: F{} sign is {:?}", g.region.component, s.verdict));
            ok = false;
        }
        let c = region_containment(t, field, &g.region, REGION_SLACK);
        if !c.contained {
            reasons.push(format!("{name} leaves {} (margin {:?})", g.region.describe(), c.worst_margin));
            ok = false;
        }
    }
    Ok(ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::classify_equilibrium;
    use crate::polyfield::{parse_system, zoo, SystemId};

    fn zoo_default(id: SystemId) -> PolyVectorField {
        zoo(id, &BTreeMap::new()).unwrap()
    }

    #[test]
    fn linear_saddle_axis() {
        // x unstable, complex sink in (y, z).
        let f = parse_system("dx=x\ndy=-y+z\ndz=-y-z").unwrap();
        let eq = classify_equilibrium(&f, &Vec3::zeros()).unwrap();
        let [p, m] = trace_1d_manifolds(&f, &eq, None, 100.0).unwrap();
        for t in [&p, &m] {
            assert_eq!(t.status, TraceStatus::Escaped);
            assert!(t.polyline.s.iter().all(|s| s.y == 0.0 && s.z == 0.0));
            assert!(t.end_point().norm() > DEFAULT_R_ESCAPE);
        }
        assert_eq!(p.sign_record[0].verdict, SignVerdict::ConstantPositive);
        assert_eq!(m.sign_record[0].verdict, SignVerdict::ConstantNegative);
        let d = connection_distance(&f, &eq, &eq, None, 100.0).unwrap();
        assert!(d.distance >= 100.0 * default_eps(&Vec3::zeros()) * 0.999);
    }

    #[test]
    fn wrong_time_direction_diverges() {
        // Tracing the unstable axis backward leaves it for the sink plane.
        let f = parse_system("dx=x\ndy=-y+z\ndz=-y-z").unwrap();
        let seed = Vec3::new(1e-6, 1e-9, 0.0);
        let tr = integrate(&f, seed, (0.0, -20.0), &IntegrationOptions::default(), &[]).unwrap();
        let end = tr.last_point();
        assert!(end.y.abs() + end.z.abs() > 1e3 * end.x.abs());
    }

    #[test]
    fn transversality_cases() {
        let m = zoo_default(SystemId::Michelson);
        for eq in equilibria_of(&m).unwrap() {
            let t = transversality_2d(&m, &eq, 1).unwrap();
            assert_eq!(t.verdict, TransversalityVerdict::Transverse);
        }
        let d = parse_system("dx=x\ndy=y\ndz=-z").unwrap();
        let eq = classify_equilibrium(&d, &Vec3::zeros()).unwrap();
        assert_eq!(transversality_2d(&d, &eq, 3).unwrap().verdict, TransversalityVerdict::Tangent);
        let bz = zoo_default(SystemId::Bz);
        let eq = classify_equilibrium(&bz, &Vec3::zeros()).unwrap();
        assert!(matches!(transversality_2d(&bz, &eq, 3), Err(Error::Unsupported(_))));
    }

    #[test]
    fn mixed_sign_on_generic_orbit() {
        let f = zoo_default(SystemId::Michelson);
        let eq = classify_equilibrium(&f, &Vec3::new(2f64.sqrt(), 0.0, 0.0)).unwrap();
        let tr = integrate(&f, Vec3::new(0.0, 0.1, 0.0), (0.0, 30.0), &IntegrationOptions::default(), &[]).unwrap();
        let v = real_eigenvector(&eq).unwrap();
        let t = finish_trace(&f, &eq, v, Branch::Plus, Stability::Stable, 1e-6, tr.s[0], 1e-5, tr, TraceStatus::BoundedMaxtime, Construction::Seeded);
        let s = sign_invariance(&t, &f, 1).unwrap();
        assert_eq!(s.verdict, SignVerdict::Mixed);
        let p = s.first_violation.unwrap();
        assert!(p.norm().is_finite());
    }

    #[test]
    fn bz_branches() {
        let f = zoo_default(SystemId::Bz);
        let eqs = equilibria_of(&f).unwrap();
        for eq in &eqs {
            let traces = trace_1d_manifolds(&f, eq, None, DEFAULT_TRACE_TMAX).unwrap();
            assert!(traces.iter().any(|t| t.status == TraceStatus::Escaped), "{:?}", eq.location);
        }
    }

    #[test]
    fn inconsistent_fields_rejected() {
        let a = zoo_default(SystemId::Michelson);
        let b = zoo(SystemId::Michelson, &[("c".to_string(), 2.0)].into_iter().collect()).unwrap();
        let eq = equilibria_of(&a).unwrap().remove(0);
        let traces = trace_1d_manifolds(&a, &eq, None, 100.0).unwrap();
        assert!(assemble_invariant_graph(&b, &traces, &ClosureRule::None).is_err());
    }
}
