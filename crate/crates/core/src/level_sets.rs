//! The velocity level set `H = {F_i = 0}`, its tangency curve
//! `l = H ∩ {L = 0}` with `L = ∇F_i·F`, and the crossing structure of `H`.

use serde::{Deserialize, Serialize};

use crate::equilibria::{find_equilibria, SearchBox, DEFAULT_GRID_N};
use crate::error::{Error, Result};
use crate::flowkit::{check_component, integrate, IntegrationOptions, Termination};
use crate::linalg::{orthonormal_frame, Vec3};
use crate::polyfield::{PolyVectorField, TriPolynomial};

/// Residual bound for reported tangency samples.
pub const RESIDUAL_TOL: f64 = 1e-9;
const CORRECT_TOL: f64 = 1e-12;
const SINGULAR_TOL: f64 = 1e-8;
pub const DEFAULT_SEEDS_PER_AXIS: usize = 12;
/// Duration of the two-sided check in `tangency_local_behavior`.
const SIDE_CHECK_T: f64 = 1e-3;

/// `normal · s + offset = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneEquation {
    pub normal: Vec3,
    pub offset: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HDescriptor {
    pub planar: bool,
    pub plane: Option<PlaneEquation>,
    /// Certified for planes; for curved `H`, a sign change of `F_i` on the window boundary.
    pub unbounded: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "point", rename_all = "snake_case")]
pub enum SegmentEnd {
    WindowBoundary(Vec3),
    FixedPoint(Vec3),
    Singular(Vec3),
    StepFailure(Vec3),
    Closed,
}

/// One piece of the tangency curve between fixed points, singular points
/// and the window boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangencyBranch {
    /// Connected component of `l` (within the window) this piece belongs to.
    pub component: usize,
    pub points: Vec<Vec3>,
    pub start: SegmentEnd,
    pub end: SegmentEnd,
    /// Coordinate `i` strictly increases along `points`.
    pub monotone: bool,
    pub note: String,
}

impl TangencyBranch {
    pub fn touches_fixed_point(&self, p: &Vec3, tol: f64) -> bool {
        [self.start, self.end].iter().any(|e| matches!(e, SegmentEnd::FixedPoint(q) if (q - p).norm() <= tol))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchTopology {
    SingleLine,
    Branched,
    Empty,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSetAnalysis {
    /// 1-based component index.
    pub component: usize,
    pub h: HDescriptor,
    pub l: TriPolynomial,
    pub l2: TriPolynomial,
    pub branches: Vec<TangencyBranch>,
    pub n_components: usize,
    pub singular_points: Vec<Vec3>,
    pub fixed_points_on_l: Vec<Vec3>,
    pub monotone: bool,
    /// `H` is transverse to every plane `{s_i = c}`; `None` for curved `H`.
    pub plane_transversal: Option<bool>,
    /// Every sampled plane `{s_i = c}` meets `l` exactly once.
    pub singleton_lc: bool,
    pub topology: BranchTopology,
    pub window: SearchBox,
}

impl LevelSetAnalysis {
    pub fn all_points(&self) -> impl Iterator<Item = &Vec3> {
        self.branches.iter().flat_map(|b| b.points.iter())
    }
}

/// The curve `{g1 = 0} ∩ {g2 = 0}`.
pub(crate) struct CurveSystem<'a> {
    pub g1: &'a TriPolynomial,
    pub g2: &'a TriPolynomial,
}

impl CurveSystem<'_> {
    fn residual(&self, s: &Vec3) -> (f64, f64) {
        (self.g1.eval(s), self.g2.eval(s))
    }

    fn grads(&self, s: &Vec3) -> (Vec3, Vec3) {
        (self.g1.eval_gradient(s), self.g2.eval_gradient(s))
    }

    /// Sine of the angle between the two gradients; zero at singular points.
    fn regularity(&self, s: &Vec3) -> f64 {
        let (a, b) = self.grads(s);
        let d = a.norm() * b.norm();
        if d == 0.0 {
            0.0
        } else {
            a.cross(&b).norm() / d
        }
    }

    pub(crate) fn tangent(&self, s: &Vec3) -> Option<Vec3> {
        let (a, b) = self.grads(s);
        let t = a.cross(&b);
        (t.norm() > 0.0).then(|| t.normalize())
    }

    /// Minimum-norm Gauss–Newton projection onto the curve.
    pub(crate) fn project(&self, s0: Vec3, max_iter: usize) -> Option<Vec3> {
        let mut s = s0;
        for _ in 0..max_iter {
            let (r1, r2) = self.residual(&s);
            let scale = 1.0 + s.norm();
            if r1.abs() < CORRECT_TOL * scale && r2.abs() < CORRECT_TOL * scale {
                return Some(s);
            }
            let (a, b) = self.grads(&s);
            let (aa, ab, bb) = (a.dot(&a), a.dot(&b), b.dot(&b));
            let det = aa * bb - ab * ab;
            if !(det.abs() > 1e-300) {
                return None;
            }
            let l1 = (bb * r1 - ab * r2) / det;
            let l2 = (aa * r2 - ab * r1) / det;
            let step = a * l1 + b * l2;
            if !step.iter().all(|v| v.is_finite()) {
                return None;
            }
            s -= step;
        }
        let (r1, r2) = self.residual(&s);
        let scale = 1.0 + s.norm();
        (r1.abs() < 1e-11 * scale && r2.abs() < 1e-11 * scale).then_some(s)
    }
}

fn inside(w: &SearchBox, s: &Vec3) -> bool {
    w.contains(s, 0.0)
}

struct Traced {
    points: Vec<Vec3>,
    ends: [SegmentEnd; 2],
    closed: bool,
}

/// Pseudo-arclength continuation from `start` along `dir · (∇g1 × ∇g2)`
/// with step `step(s)`, stopping just before `stop(s)` first holds.
pub(crate) fn march(
    cs: &CurveSystem,
    start: Vec3,
    dir: f64,
    step: &dyn Fn(&Vec3) -> f64,
    stop: &dyn Fn(&Vec3) -> bool,
) -> (Vec<Vec3>, SegmentEnd) {
    let mut pts = vec![start];
    let mut s = start;
    let Some(mut t) = cs.tangent(&s).map(|t| t * dir) else {
        return (pts, SegmentEnd::Singular(s));
    };
    let mut h = step(&s);
    for _ in 0..200_000 {
        let h_cap = step(&s);
        let h_min = 1e-7 * h_cap;
        let pred = s + t * h;
        let next = cs.project(pred, 12).filter(|q| (q - s).norm() < 2.0 * h);
        let next = next.and_then(|q| cs.tangent(&q).map(|tq| (q, if tq.dot(&t) < 0.0 { -tq } else { tq })));
        match next {
            Some((q, tq)) if tq.dot(&t) > 0.8 => {
                if stop(&q) {
                    let b = boundary_point(cs, stop, s, t, h);
                    if (b - s).norm() > 1e-9 * h_cap {
                        pts.push(b);
                    }
                    return (pts, SegmentEnd::WindowBoundary(b));
                }
                if pts.len() > 3 && (q - start).norm() < 0.75 * h {
                    return (pts, SegmentEnd::Closed);
                }
                if cs.regularity(&q) < SINGULAR_TOL {
                    pts.push(q);
                    return (pts, SegmentEnd::Singular(q));
                }
                pts.push(q);
                s = q;
                t = tq;
                h = (h * 1.5).min(step(&s));
            }
            _ => {
                h *= 0.5;
                if h < h_min {
                    return (pts, SegmentEnd::StepFailure(s));
                }
            }
        }
    }
    (pts, SegmentEnd::StepFailure(s))
}

/// Last curve point before `stop` holds along the step from `s`.
fn boundary_point(cs: &CurveSystem, stop: &dyn Fn(&Vec3) -> bool, s: Vec3, t: Vec3, h: f64) -> Vec3 {
    let (mut lo, mut hi) = (0.0, h);
    let mut best = s;
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        match cs.project(s + t * mid, 12) {
            Some(q) if !stop(&q) => {
                best = q;
                lo = mid;
            }
            _ => hi = mid,
        }
    }
    best
}

fn trace_component(cs: &CurveSystem, w: &SearchBox, seed: Vec3, h0: f64) -> Traced {
    let step = |_: &Vec3| h0;
    let stop = |q: &Vec3| !inside(w, q);
    let (fwd, end_f) = march(cs, seed, 1.0, &step, &stop);
    if end_f == SegmentEnd::Closed {
        return Traced { points: fwd, ends: [SegmentEnd::Closed, SegmentEnd::Closed], closed: true };
    }
    let (bwd, end_b) = march(cs, seed, -1.0, &step, &stop);
    let mut points: Vec<Vec3> = bwd.into_iter().rev().collect();
    points.extend(fwd.into_iter().skip(1));
    Traced { points, ends: [end_b, end_f], closed: false }
}

/// Distance from `p` to the polyline, with the nearest segment and the
/// position along it in [0, 1].
fn locate_on_polyline(p: &Vec3, pts: &[Vec3]) -> (f64, usize, f64) {
    let mut best = (f64::INFINITY, 0, 0.0);
    if pts.len() == 1 {
        return ((p - pts[0]).norm(), 0, 0.0);
    }
    for (k, w) in pts.windows(2).enumerate() {
        let d = w[1] - w[0];
        let l2 = d.norm_squared();
        let tau = if l2 > 0.0 { ((p - w[0]).dot(&d) / l2).clamp(0.0, 1.0) } else { 0.0 };
        let dist = (w[0] + d * tau - p).norm();
        if dist < best.0 {
            best = (dist, k, tau);
        }
    }
    best
}

fn strictly_increasing(pts: &[Vec3], k: usize) -> bool {
    pts.windows(2).all(|w| w[1][k] > w[0][k])
}

fn h_descriptor(fi: &TriPolynomial, w: &SearchBox) -> HDescriptor {
    if fi.degree() == 1 {
        let normal = Vec3::new(fi.coefficient([1, 0, 0]), fi.coefficient([0, 1, 0]), fi.coefficient([0, 0, 1]));
        let offset = fi.coefficient([0, 0, 0]);
        return HDescriptor { planar: true, plane: Some(PlaneEquation { normal, offset }), unbounded: true };
    }
    // Sign change of F_i over the window's boundary grid.
    let n = 16;
    let (mut pos, mut neg) = (false, false);
    for a in 0..=n {
        for b in 0..=n {
            for face in 0..6 {
                let axis = face / 2;
                let mut s = Vec3::zeros();
                s[axis] = if face % 2 == 0 { w.lo[axis] } else { w.hi[axis] };
                let (p, q) = ((axis + 1) % 3, (axis + 2) % 3);
                s[p] = w.lo[p] + (w.hi[p] - w.lo[p]) * a as f64 / n as f64;
                s[q] = w.lo[q] + (w.hi[q] - w.lo[q]) * b as f64 / n as f64;
                let v = fi.eval(&s);
                pos |= v > 0.0;
                neg |= v < 0.0;
            }
        }
    }
    HDescriptor { planar: false, plane: None, unbounded: pos && neg }
}

/// Extracts and splits the tangency curve of `F_i` inside `window`.
///
/// `seeds_per_axis` sets the lattice of starting points projected onto the
/// curve; continuation uses steps of 1% of the window diameter.
pub fn level_set_analysis(
    field: &PolyVectorField,
    i: usize,
    window: &SearchBox,
    seeds_per_axis: usize,
) -> Result<LevelSetAnalysis> {
    check_component(i)?;
    let k = i - 1;
    let fi = field.component(k);
    if fi.is_zero() {
        return Err(Error::InvalidArgument(format!("F_{i} is identically zero")));
    }
    if fi.as_constant().is_some() {
        return Err(Error::LevelSet(format!("H = {{F_{i} = 0}} is empty")));
    }
    if seeds_per_axis < 2 {
        return Err(Error::InvalidArgument("seeds_per_axis must be at least 2".into()));
    }
    let h = h_descriptor(fi, window);
    let l = field.lie_derivative(fi);
    let l2 = field.lie_derivative(&l);
    if l.is_zero() {
        return Err(Error::LevelSet(format!("L vanishes identically: every point of H is a tangency of F_{i}")));
    }
    let cs = CurveSystem { g1: fi, g2: &l };
    let diam = window.diameter();
    let h0 = 1e-2 * diam;

    let n = seeds_per_axis;
    let mut seeds = Vec::new();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let t = |m: usize, ax: usize| window.lo[ax] + (window.hi[ax] - window.lo[ax]) * (m as f64 + 0.5) / n as f64;
                let s0 = Vec3::new(t(a, 0), t(b, 1), t(c, 2));
                if let Some(s) = cs.project(s0, 40) {
                    if inside(window, &s) && cs.regularity(&s) >= SINGULAR_TOL {
                        seeds.push(s);
                    }
                }
            }
        }
    }
    if seeds.is_empty() && !h.planar {
        let mut signs = [false; 2];
        for a in 0..=n {
            for b in 0..=n {
                for c in 0..=n {
                    let t = |m: usize, ax: usize| window.lo[ax] + (window.hi[ax] - window.lo[ax]) * m as f64 / n as f64;
                    let v = fi.eval(&Vec3::new(t(a, 0), t(b, 1), t(c, 2)));
                    signs[0] |= v > 0.0;
                    signs[1] |= v < 0.0;
                }
            }
        }
        if !(signs[0] && signs[1]) {
            return Err(Error::LevelSet(format!("H = {{F_{i} = 0}} does not meet the window")));
        }
    }

    let mut comps: Vec<Traced> = Vec::new();
    for s in seeds {
        if comps.iter().any(|c| locate_on_polyline(&s, &c.points).0 < h0) {
            continue;
        }
        comps.push(trace_component(&cs, window, s, h0));
    }
    comps.sort_by(|a, b| {
        let ka = a.points.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
        let kb = b.points.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
        ka.total_cmp(&kb)
    });

    // Fixed points on l split components into segments.
    let eqs = find_equilibria(field, window, DEFAULT_GRID_N)?;
    let mut fixed_on_l = Vec::new();
    let mut branches = Vec::new();
    let mut singular = Vec::new();
    for (ci, c) in comps.iter().enumerate() {
        for e in &c.ends {
            if let SegmentEnd::Singular(p) = e {
                singular.push(*p);
            }
        }
        let pts = &c.points;
        let mut cuts: Vec<(usize, f64, Vec3)> = Vec::new();
        for e in &eqs {
            let (d, seg, tau) = locate_on_polyline(&e.location, pts);
            if d < 1e-2 * h0 {
                cuts.push((seg, tau, e.location));
                fixed_on_l.push(e.location);
            }
        }
        cuts.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let near = 1e-3 * h0;
        let mut pieces: Vec<(Vec<Vec3>, SegmentEnd, SegmentEnd)> = Vec::new();
        let mut cur = vec![pts[0]];
        let mut start_end = c.ends[0];
        let mut cut_iter = cuts.iter().peekable();
        for seg in 0..pts.len().saturating_sub(1) {
            while let Some(&&(cs_, _, p)) = cut_iter.peek() {
                if cs_ != seg {
                    break;
                }
                cut_iter.next();
                cur.retain(|q| (q - p).norm() > near);
                cur.push(p);
                pieces.push((std::mem::take(&mut cur), start_end, SegmentEnd::FixedPoint(p)));
                cur.push(p);
                start_end = SegmentEnd::FixedPoint(p);
            }
            let q = pts[seg + 1];
            if let SegmentEnd::FixedPoint(p) = start_end {
                if (q - p).norm() <= near {
                    continue;
                }
            }
            cur.push(q);
        }
        pieces.push((cur, start_end, c.ends[1]));
        for (mut p, mut a, mut b) in pieces {
            if p.len() < 2 {
                continue;
            }
            if p.first().unwrap()[k] > p.last().unwrap()[k] {
                p.reverse();
                std::mem::swap(&mut a, &mut b);
            }
            let monotone = strictly_increasing(&p, k);
            let note = describe(&a, &b, i, monotone);
            branches.push(TangencyBranch { component: ci, points: p, start: a, end: b, monotone, note });
        }
    }

    let monotone = !branches.is_empty() && branches.iter().all(|b| b.monotone);
    let plane_transversal = h.plane.map(|pl| {
        let mut e = Vec3::zeros();
        e[k] = 1.0;
        pl.normal.cross(&e).norm() > 1e-12 * pl.normal.norm()
    });
    let singleton_lc = singleton_check(&branches, k);
    let topology = if comps.is_empty() {
        BranchTopology::Empty
    } else if comps.len() == 1
        && !comps[0].closed
        && singular.is_empty()
        && comps[0].ends.iter().all(|e| matches!(e, SegmentEnd::WindowBoundary(_)))
    {
        BranchTopology::SingleLine
    } else {
        BranchTopology::Branched
    };
    Ok(LevelSetAnalysis {
        component: i,
        h,
        l,
        l2,
        branches,
        n_components: comps.len(),
        singular_points: singular,
        fixed_points_on_l: fixed_on_l,
        monotone,
        plane_transversal,
        singleton_lc,
        topology,
        window: *window,
    })
}

fn describe(a: &SegmentEnd, b: &SegmentEnd, i: usize, monotone: bool) -> String {
    let name = |e: &SegmentEnd| match e {
        SegmentEnd::WindowBoundary(_) => "window boundary",
        SegmentEnd::FixedPoint(_) => "fixed point",
        SegmentEnd::Singular(_) => "singular point",
        SegmentEnd::StepFailure(_) => "continuation failure",
        SegmentEnd::Closed => "closed loop",
    };
    format!(
        "{} to {}, {}",
        name(a),
        name(b),
        if monotone { format!("parameterised by s_{i}") } else { format!("not monotone in s_{i}") }
    )
}

/// Counts crossings of sampled planes `{s_k = c}` with the sampled curve.
fn singleton_check(branches: &[TangencyBranch], k: usize) -> bool {
    let all: Vec<f64> = branches.iter().flat_map(|b| b.points.iter().map(|p| p[k])).collect();
    if all.is_empty() {
        return false;
    }
    let lo = all.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = all.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return false;
    }
    (0..64).all(|m| {
        let c = lo + (hi - lo) * (m as f64 + 0.5) / 64.0;
        let count: usize = branches
            .iter()
            .map(|b| b.points.windows(2).filter(|w| (w[0][k] - c) * (w[1][k] - c) < 0.0).count())
            .sum();
        count == 1
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingClass {
    HPlus,
    HMinus,
    Tangency,
}

fn on_h(field: &PolyVectorField, i: usize, s: &Vec3) -> Result<(TriPolynomial, f64)> {
    check_component(i)?;
    let fi = field.component(i - 1);
    let tol = RESIDUAL_TOL * (1.0 + s.norm());
    let v = fi.eval(s);
    if v.abs() >= tol {
        return Err(Error::NotOnLevelSet(format!("F_{i}({s:?}) = {v:e}")));
    }
    Ok((field.lie_derivative(fi), tol))
}

/// Crossing class of a point of `H` from the sign of `L`.
pub fn classify_crossing(field: &PolyVectorField, i: usize, s: &Vec3) -> Result<CrossingClass> {
    let (l, tol) = on_h(field, i, s)?;
    let v = l.eval(s);
    Ok(if v > tol {
        CrossingClass::HPlus
    } else if v < -tol {
        CrossingClass::HMinus
    } else {
        CrossingClass::Tangency
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TangencySide {
    StaysNonneg,
    StaysNonpos,
    Degenerate,
}

impl TangencySide {
    pub fn flipped(self) -> Self {
        match self {
            TangencySide::StaysNonneg => TangencySide::StaysNonpos,
            TangencySide::StaysNonpos => TangencySide::StaysNonneg,
            TangencySide::Degenerate => TangencySide::Degenerate,
        }
    }
}

/// Side of `H` the flow line through a tangency point stays on, from the sign
/// of the second Lie derivative, confirmed by integrating `±1e-3` in time.
pub fn tangency_local_behavior(field: &PolyVectorField, i: usize, s: &Vec3) -> Result<TangencySide> {
    let (l, tol) = on_h(field, i, s)?;
    if l.eval(s).abs() >= tol {
        return Err(Error::NotOnLevelSet(format!("{s:?} is not a tangency point (L = {:e})", l.eval(s))));
    }
    let f = field.evaluate(s);
    if f.norm() <= 1e-12 * (1.0 + s.norm()) {
        return Err(Error::FixedPoint(format!("{s:?}")));
    }
    let l2 = field.lie_derivative(&l).eval(s);
    if l2.abs() <= tol {
        return Ok(TangencySide::Degenerate);
    }
    let fi = field.component(i - 1);
    let opts = IntegrationOptions::default();
    for t in [SIDE_CHECK_T, -SIDE_CHECK_T] {
        let tr = integrate(field, *s, (0.0, t), &opts, &[])?;
        if tr.termination != Termination::TEnd {
            return Ok(TangencySide::Degenerate);
        }
        if fi.eval(&tr.last_point()).signum() != l2.signum() {
            return Ok(TangencySide::Degenerate);
        }
    }
    Ok(if l2 > 0.0 { TangencySide::StaysNonneg } else { TangencySide::StaysNonpos })
}

/// Connected regions of `{L > 0}` and `{L < 0}` on a planar `H`, counted by
/// flood fill on an `n × n` grid spanning the window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfPlaneStructure {
    pub plus_regions: usize,
    pub minus_regions: usize,
    pub grid: usize,
}

pub fn half_plane_structure(field: &PolyVectorField, i: usize, window: &SearchBox, n: usize) -> Result<HalfPlaneStructure> {
    check_component(i)?;
    let fi = field.component(i - 1);
    let h = h_descriptor(fi, window);
    let Some(pl) = h.plane else {
        return Err(Error::Unsupported(format!("H = {{F_{i} = 0}} is not a plane")));
    };
    let l = field.lie_derivative(fi);
    let nn = pl.normal.norm_squared();
    let centre = (window.lo + window.hi) * 0.5;
    // Foot of the window centre on the plane.
    let base = centre - pl.normal * ((pl.normal.dot(&centre) + pl.offset) / nn);
    let (u, v) = orthonormal_frame(&pl.normal);
    let half = 0.5 * window.diameter();
    let mut sign = vec![0i8; n * n];
    for a in 0..n {
        for b in 0..n {
            let x = -half + 2.0 * half * (a as f64 + 0.5) / n as f64;
            let y = -half + 2.0 * half * (b as f64 + 0.5) / n as f64;
            let s = base + u * x + v * y;
            let val = l.eval(&s);
            let tol = 1e-12 * (1.0 + s.norm());
            sign[a * n + b] = if val > tol { 1 } else if val < -tol { -1 } else { 0 };
        }
    }
    let count = |target: i8| {
        let mut seen = vec![false; n * n];
        let mut regions = 0;
        for start in 0..n * n {
            if seen[start] || sign[start] != target {
                continue;
            }
            regions += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(c) = stack.pop() {
                let (a, b) = (c / n, c % n);
                let nbrs = [(a.wrapping_sub(1), b), (a + 1, b), (a, b.wrapping_sub(1)), (a, b + 1)];
                for (p, q) in nbrs {
                    if p < n && q < n {
                        let m = p * n + q;
                        if !seen[m] && sign[m] == target {
                            seen[m] = true;
                            stack.push(m);
                        }
                    }
                }
            }
        }
        regions
    };
    Ok(HalfPlaneStructure { plus_regions: count(1), minus_regions: count(-1), grid: n })
}
