//! Hypothesis checks for the level-set criterion, the predicted manifold
//! structure, and its numerical verification.

use serde::{Deserialize, Serialize};

use crate::equilibria::{default_search_box, equilibria_of, Classification, Equilibrium};
use crate::error::{Error, Result};
use crate::flowkit::check_component;
use crate::level_sets::{
    half_plane_structure, level_set_analysis, tangency_local_behavior, BranchTopology, CurveSystem, LevelSetAnalysis,
    SegmentEnd, TangencyBranch, TangencySide, DEFAULT_SEEDS_PER_AXIS,
};
use crate::linalg::Vec3;
use crate::manifolds::{
    assemble_invariant_graph, region_containment, sign_invariance, trace_1d_manifolds_with, trace_far_seeded,
    transversality_2d, ClosureRule, Containment, GammaSpec, GraphClass, InvariantGraph, ManifoldTrace, SignInvariance,
    TraceOptions, TraceStatus, TraceSummary, Transversality, TrappingRegion, REGION_SLACK,
};
use crate::polyfield::PolyVectorField;
use crate::sphere_degree::{index_at_infinity_with, IndexAtInfinityReport};

/// Interior samples per fixed-point-free segment of `l`.
pub const SEGMENT_SAMPLES: usize = 64;
const HALF_PLANE_GRID: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HypothesisStatus {
    Pass,
    Fail,
    NumericalEvidence,
    Unsupported,
}

impl HypothesisStatus {
    pub fn acceptable(self) -> bool {
        matches!(self, HypothesisStatus::Pass | HypothesisStatus::NumericalEvidence)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisEntry {
    pub id: String,
    pub status: HypothesisStatus,
    pub details: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub component: usize,
    pub entries: Vec<HypothesisEntry>,
    /// `Pass` iff every entry is `Pass` or `NumericalEvidence`, else `Fail`.
    pub overall: HypothesisStatus,
    pub diagnostics: Vec<String>,
    /// Inputs reused by the prediction step; serialized separately by reports.
    #[serde(skip)]
    pub equilibria: Vec<Equilibrium>,
    #[serde(skip)]
    pub index: Option<IndexAtInfinityReport>,
    #[serde(skip)]
    pub level_sets: Option<LevelSetAnalysis>,
}

impl HypothesisReport {
    pub fn entry(&self, id: &str) -> Option<&HypothesisEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn passed(&self) -> bool {
        self.overall == HypothesisStatus::Pass
    }

    /// Ids of entries that are neither pass nor numerical evidence.
    pub fn failures(&self) -> Vec<&str> {
        self.entries.iter().filter(|e| !e.status.acceptable()).map(|e| e.id.as_str()).collect()
    }
}

pub fn check_hypotheses(field: &PolyVectorField, i: usize) -> Result<HypothesisReport> {
    check_hypotheses_with(field, i, 0)
}

pub fn check_hypotheses_with(field: &PolyVectorField, i: usize, rng_seed: u64) -> Result<HypothesisReport> {
    check_component(i)?;
    let equilibria = equilibria_of(field);
    let index = match &equilibria {
        Ok(e) => index_at_infinity_with(field, e, rng_seed),
        Err(_) => Err(Error::Inconclusive("no equilibria to enclose".into())),
    };
    check_hypotheses_from(field, i, equilibria, index)
}

/// As `check_hypotheses`, reusing an equilibrium search and index computation.
pub fn check_hypotheses_from(
    field: &PolyVectorField,
    i: usize,
    equilibria: Result<Vec<Equilibrium>>,
    index: Result<IndexAtInfinityReport>,
) -> Result<HypothesisReport> {
    check_component(i)?;
    let mut entries = Vec::new();
    let mut diagnostics = Vec::new();
    let mut push = |id: &str, status, details: String| entries.push(HypothesisEntry { id: id.into(), status, details });

    let equilibria = match equilibria {
        Ok(e) => e,
        Err(e) => {
            diagnostics.push(format!("equilibrium search failed: {e}"));
            Vec::new()
        }
    };
    let index = match index {
        Ok(r) => Some(r),
        Err(e) => {
            diagnostics.push(format!("index at infinity failed: {e}"));
            None
        }
    };
    match &index {
        Some(r) if !r.stable => push("h1", HypothesisStatus::Fail, format!("degree unstable across radii {:?}: {:?}", r.radii, r.degrees)),
        Some(r) if r.index.abs() <= 1 => push("h1", HypothesisStatus::Pass, format!("index at infinity {}", r.index)),
        Some(r) => push("h1", HypothesisStatus::Fail, format!("index at infinity {} outside {{-1, 0, 1}}", r.index)),
        None => push("h1", HypothesisStatus::Fail, "index at infinity unavailable".into()),
    }

    if equilibria.is_empty() {
        push("h2", HypothesisStatus::Fail, "no equilibria found".into());
    } else {
        let bad: Vec<String> = equilibria
            .iter()
            .filter(|e| e.local_index.is_none() || !e.classification.has_complex_pair())
            .map(|e| format!("{:?} is {:?}", e.location, e.classification))
            .collect();
        if bad.is_empty() {
            push("h2", HypothesisStatus::Pass, format!("{} non-degenerate equilibria with complex pairs", equilibria.len()));
        } else {
            push("h2", HypothesisStatus::Fail, bad.join("; "));
        }
    }

    let window = default_search_box(field);
    let ls = match level_set_analysis(field, i, &window, DEFAULT_SEEDS_PER_AXIS) {
        Ok(ls) => Some(ls),
        Err(e) => {
            diagnostics.push(format!("level set analysis failed: {e}"));
            None
        }
    };
    let Some(ls) = ls else {
        for id in ["h3a", "h3b", "h3c", "h3d", "h3e", "h3f"] {
            push(id, HypothesisStatus::Fail, "level set analysis unavailable".into());
        }
        return Ok(finish(i, entries, diagnostics, equilibria, index, None));
    };
    let planar = ls.h.planar;
    let certified = |ok: bool| match (ok, planar) {
        (false, _) => HypothesisStatus::Fail,
        (true, true) => HypothesisStatus::Pass,
        (true, false) => HypothesisStatus::NumericalEvidence,
    };

    push(
        "h3a",
        if planar {
            HypothesisStatus::Pass
        } else if ls.h.unbounded {
            HypothesisStatus::NumericalEvidence
        } else {
            HypothesisStatus::Fail
        },
        if planar { "H is a plane".into() } else { format!("H curved, unbounded evidence: {}", ls.h.unbounded) },
    );

    let single = ls.topology == BranchTopology::SingleLine;
    let single_status = if single && planar { HypothesisStatus::Pass } else { certified(single) };
    push(
        "h3b",
        single_status,
        format!("{:?}, {} component(s), {} singular point(s)", ls.topology, ls.n_components, ls.singular_points.len()),
    );
    if !single {
        diagnostics.push(format!(
            "tangency curve is {:?}; the branched path (predict_structure_branched) follows the arcs of l leaving each equilibrium separately",
            ls.topology
        ));
    }

    let mono_status = if single {
        certified(ls.monotone)
    } else if ls.monotone {
        HypothesisStatus::NumericalEvidence
    } else {
        HypothesisStatus::Fail
    };
    push("h3c", mono_status, format!("s_{i} monotone along l: {}", ls.monotone));

    let h3d = match ls.plane_transversal {
        Some(t) => {
            let ok = t && ls.singleton_lc;
            if ok && single {
                HypothesisStatus::Pass
            } else if ok {
                HypothesisStatus::NumericalEvidence
            } else {
                HypothesisStatus::Fail
            }
        }
        None if ls.singleton_lc => HypothesisStatus::NumericalEvidence,
        None => HypothesisStatus::Fail,
    };
    push("h3d", h3d, format!("plane transversal {:?}, singleton l_c ∩ l {}", ls.plane_transversal, ls.singleton_lc));

    let (h3e, h3e_details) = tangency_side_check(field, &ls);
    push("h3e", h3e, h3e_details);

    let (h3f, h3f_details) = half_plane_check(field, i, &ls);
    push("h3f", h3f, h3f_details);

    Ok(finish(i, entries, diagnostics, equilibria, index, Some(ls)))
}

fn finish(
    component: usize,
    entries: Vec<HypothesisEntry>,
    diagnostics: Vec<String>,
    equilibria: Vec<Equilibrium>,
    index: Option<IndexAtInfinityReport>,
    level_sets: Option<LevelSetAnalysis>,
) -> HypothesisReport {
    let overall = if entries.iter().all(|e| e.status.acceptable()) { HypothesisStatus::Pass } else { HypothesisStatus::Fail };
    HypothesisReport { component, entries, overall, diagnostics, equilibria, index, level_sets }
}

/// Points of `l` at evenly spaced arclength fractions strictly inside the
/// branch, projected back onto the curve.
fn arc_samples(field: &PolyVectorField, i: usize, branch: &TangencyBranch, n: usize) -> Vec<Vec3> {
    let pts = &branch.points;
    if pts.len() < 2 {
        return Vec::new();
    }
    let fi = field.component(i - 1);
    let l = field.lie_derivative(fi);
    let cs = CurveSystem { g1: fi, g2: &l };
    let mut cum = vec![0.0];
    for w in pts.windows(2) {
        cum.push(cum.last().unwrap() + (w[1] - w[0]).norm());
    }
    let total = *cum.last().unwrap();
    (0..n)
        .filter_map(|j| {
            let target = total * (j as f64 + 0.5) / n as f64;
            let k = cum.partition_point(|&c| c <= target).clamp(1, pts.len() - 1);
            let seg = cum[k] - cum[k - 1];
            let tau = if seg > 0.0 { (target - cum[k - 1]) / seg } else { 0.0 };
            cs.project(pts[k - 1] + (pts[k] - pts[k - 1]) * tau, 20)
        })
        .collect()
}

fn tangency_side_check(field: &PolyVectorField, ls: &LevelSetAnalysis) -> (HypothesisStatus, String) {
    if ls.branches.is_empty() {
        return (HypothesisStatus::Fail, "no tangency curve in the window".into());
    }
    let mut parts = Vec::new();
    for (b, branch) in ls.branches.iter().enumerate() {
        let samples = arc_samples(field, ls.component, branch, SEGMENT_SAMPLES);
        if samples.len() < SEGMENT_SAMPLES / 2 {
            return (HypothesisStatus::Fail, format!("segment {b}: only {} samples projected onto l", samples.len()));
        }
        let mut side = None;
        for s in &samples {
            let r = match tangency_local_behavior(field, ls.component, s) {
                Ok(r) => r,
                Err(e) => return (HypothesisStatus::Fail, format!("segment {b}: {e}")),
            };
            if r == TangencySide::Degenerate {
                return (HypothesisStatus::Fail, format!("segment {b}: degenerate tangency at {s:?}"));
            }
            match side {
                None => side = Some(r),
                Some(prev) if prev != r => {
                    return (HypothesisStatus::Fail, format!("segment {b}: tangency side changes near {s:?}"));
                }
                _ => {}
            }
        }
        parts.push(format!("segment {b}: {:?}", side.expect("samples present")));
    }
    (HypothesisStatus::NumericalEvidence, parts.join(", "))
}

fn half_plane_check(field: &PolyVectorField, i: usize, ls: &LevelSetAnalysis) -> (HypothesisStatus, String) {
    let Some(plane) = ls.h.plane else {
        return (HypothesisStatus::Unsupported, "H is not a plane".into());
    };
    // A non-constant affine L restricted to a plane splits it into two half-planes.
    if ls.l.degree() == 1 {
        let g = ls.l.eval_gradient(&Vec3::zeros());
        if g.cross(&plane.normal).norm() > 1e-12 * g.norm() * plane.normal.norm() {
            return (HypothesisStatus::Pass, "L is affine on H: H₊ and H₋ are half-planes".into());
        }
    }
    match half_plane_structure(field, i, &ls.window, HALF_PLANE_GRID) {
        Ok(h) if h.plus_regions == 1 && h.minus_regions == 1 => {
            (HypothesisStatus::NumericalEvidence, format!("one H₊ and one H₋ region on a {0}×{0} grid", h.grid))
        }
        Ok(h) => (HypothesisStatus::Fail, format!("{} H₊ and {} H₋ regions", h.plus_regions, h.minus_regions)),
        Err(e) => (HypothesisStatus::Fail, e.to_string()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Case {
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionPath {
    SingleLine,
    Branched,
}

/// Prediction for one of Γ₁, Γ₂.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaPrediction {
    pub equilibrium: Equilibrium,
    pub case: Case,
    /// Sign of `L2` on the arc of `l` leaving the equilibrium.
    pub sigma: i8,
    /// Direction of `s_i` along that arc.
    pub arc_direction: i8,
    pub region: TrappingRegion,
    pub arc_samples: usize,
    /// `F` is parallel to `l` along the whole arc; the arc is then the manifold.
    pub non_generic: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructurePrediction {
    pub component: usize,
    pub x1: Equilibrium,
    pub x2: Equilibrium,
    pub gamma1: GammaPrediction,
    pub gamma2: GammaPrediction,
    pub path: PredictionPath,
}

/// Prediction along the single tangency line: `x1`, `x2` extremal in `s_i`,
/// with the case of each Γ read off the `L2` sign on the outer arcs of `l`.
pub fn predict_structure(field: &PolyVectorField, i: usize, report: &HypothesisReport) -> Result<StructurePrediction> {
    check_component(i)?;
    if report.component != i {
        return Err(Error::InvalidArgument(format!("report is for component {}, not {i}", report.component)));
    }
    if !report.passed() {
        return Err(Error::InvalidArgument(format!("hypotheses not satisfied: {:?}", report.failures())));
    }
    let ls = report.level_sets.as_ref().expect("passing report has level sets");
    let k = i - 1;
    let by_coord = |a: &&Equilibrium, b: &&Equilibrium| a.location[k].total_cmp(&b.location[k]);
    let x1 = report.equilibria.iter().min_by(by_coord).expect("passing report has equilibria").clone();
    let x2 = report.equilibria.iter().max_by(by_coord).expect("passing report has equilibria").clone();
    let gamma1 = gamma_prediction(field, i, ls, &x1, -1)?;
    let gamma2 = gamma_prediction(field, i, ls, &x2, 1)?;
    Ok(StructurePrediction { component: i, x1, x2, gamma1, gamma2, path: PredictionPath::SingleLine })
}

/// Prediction for a single equilibrium on a branched tangency curve: each
/// arc of `l` leaving the equilibrium is treated on its own. Γ₁ follows the
/// arc along which `s_i` increases, Γ₂ the other.
pub fn predict_structure_branched(field: &PolyVectorField, i: usize, report: &HypothesisReport) -> Result<StructurePrediction> {
    check_component(i)?;
    for id in ["h1", "h2", "h3a"] {
        if !report.entry(id).is_some_and(|e| e.status.acceptable()) {
            return Err(Error::InvalidArgument(format!("branched path needs {id}")));
        }
    }
    if report.equilibria.len() != 1 {
        return Err(Error::Unsupported(format!(
            "branched path handles one equilibrium, found {}",
            report.equilibria.len()
        )));
    }
    let ls = report.level_sets.as_ref().ok_or_else(|| Error::LevelSet("no level set analysis".into()))?;
    let p = report.equilibria[0].clone();
    let gamma1 = gamma_prediction(field, i, ls, &p, 1)?;
    let gamma2 = gamma_prediction(field, i, ls, &p, -1)?;
    Ok(StructurePrediction { component: i, x1: p.clone(), x2: p, gamma1, gamma2, path: PredictionPath::Branched })
}

/// The arc of `l` from `eq` to the window boundary along which `s_i` moves
/// in `direction`, with its unanimous `L2` sign.
fn gamma_prediction(
    field: &PolyVectorField,
    i: usize,
    ls: &LevelSetAnalysis,
    eq: &Equilibrium,
    direction: i8,
) -> Result<GammaPrediction> {
    let k = i - 1;
    let c = eq.location[k];
    let tol = 1e-6 * (1.0 + eq.location.norm());
    let arc = ls
        .branches
        .iter()
        .filter(|b| b.touches_fixed_point(&eq.location, tol))
        .find(|b| {
            let far = if matches!(b.start, SegmentEnd::FixedPoint(q) if (q - eq.location).norm() <= tol) {
                b.points.last()
            } else {
                b.points.first()
            };
            far.is_some_and(|q| f64::from(direction) * (q[k] - c) > 0.0)
        })
        .ok_or_else(|| Error::LevelSet(format!("no arc of l leaves {:?} with s_{i} moving {direction:+}", eq.location)))?;
    if !matches!(arc.start, SegmentEnd::WindowBoundary(_)) && !matches!(arc.end, SegmentEnd::WindowBoundary(_)) {
        return Err(Error::LevelSet(format!("arc from {:?} does not reach the window boundary", eq.location)));
    }
    let samples = arc_samples(field, i, arc, SEGMENT_SAMPLES);
    if samples.is_empty() {
        return Err(Error::LevelSet("arc has no interior samples".into()));
    }
    let l2 = &ls.l2;
    let mut sigma = 0i8;
    for s in &samples {
        let v = l2.eval(s);
        let sg = if v > 1e-9 * (1.0 + s.norm()) {
            1
        } else if v < -1e-9 * (1.0 + s.norm()) {
            -1
        } else {
            0
        };
        if sg == 0 || (sigma != 0 && sg != sigma) {
            return Err(Error::Inconclusive(format!("L2 sign not unanimous on the arc from {:?} (at {s:?})", eq.location)));
        }
        sigma = sg;
    }
    let fi = field.component(k);
    let l = field.lie_derivative(fi);
    let cs = CurveSystem { g1: fi, g2: &l };
    let non_generic = samples.iter().all(|s| {
        let f = field.evaluate(s);
        cs.tangent(s).is_some_and(|t| f.cross(&t).norm() < 1e-8 * f.norm().max(1e-300))
    });
    Ok(GammaPrediction {
        equilibrium: eq.clone(),
        case: if sigma > 0 { Case::A } else { Case::B },
        sigma,
        arc_direction: direction,
        region: TrappingRegion { component: i, sigma, anchor: c, direction },
        arc_samples: samples.len(),
        non_generic,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaCandidate {
    /// Index into `VerificationReport::trace_summaries`.
    pub trace: usize,
    pub escaped: bool,
    pub sign: SignInvariance,
    pub containment: Containment,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaVerification {
    pub equilibrium: Vec3,
    pub region: TrappingRegion,
    pub candidates: Vec<GammaCandidate>,
    pub accepted: Option<usize>,
    pub used_far_seed: bool,
    pub non_generic: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransversalityRecord {
    pub location: Vec3,
    pub result: Transversality,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationReport {
    pub component: usize,
    pub gamma1: GammaVerification,
    pub gamma2: GammaVerification,
    pub verified: bool,
    pub graph: Option<InvariantGraph>,
    pub unknot_certified: bool,
    /// Plane transversality of the 2D manifolds at `x1`, `x2` (planar `H` only).
    pub transversality: Vec<TransversalityRecord>,
    pub trace_summaries: Vec<TraceSummary>,
    #[serde(skip)]
    pub traces: Vec<ManifoldTrace>,
}

/// Traces the 1D manifolds at `x1` and `x2` and checks each predicted Γ:
/// some branch must escape, keep the sign of `F_i` and stay in its region.
pub fn verify_prediction(field: &PolyVectorField, pred: &StructurePrediction, t_max: f64) -> Result<VerificationReport> {
    let i = pred.component;
    let mut traces: Vec<ManifoldTrace> = Vec::new();
    let opts = TraceOptions { t_max, ..TraceOptions::default() };
    let g1 = verify_gamma(field, &pred.gamma1, &opts, &mut traces)?;
    let g2 = verify_gamma(field, &pred.gamma2, &opts, &mut traces)?;
    if traces.iter().all(|t| t.status == TraceStatus::BoundedMaxtime) {
        let longest = traces.iter().max_by(|a, b| a.polyline.last_time().abs().total_cmp(&b.polyline.last_time().abs()));
        return Err(Error::Inconclusive(format!(
            "every branch stayed bounded up to t_max = {t_max}; longest ends at {:?}",
            longest.map(|t| t.end_point())
        )));
    }
    let verified = (g1.accepted.is_some() || g1.non_generic) && (g2.accepted.is_some() || g2.non_generic);
    let graph = match (g1.accepted, g2.accepted) {
        (Some(a), Some(b)) => {
            let pair = [traces[g1.candidates[a].trace].clone(), traces[g2.candidates[b].trace].clone()];
            let rule = ClosureRule::MonotoneSegment {
                gamma1: GammaSpec { trace: 0, region: g1.region },
                gamma2: GammaSpec { trace: 1, region: g2.region },
            };
            Some(assemble_invariant_graph(field, &pair, &rule)?)
        }
        _ => None,
    };
    let unknot_certified = graph.as_ref().is_some_and(|g| g.classification == GraphClass::UnknotCertified);
    let mut transversality = Vec::new();
    if field.component(i - 1).degree() == 1 {
        for eq in [&pred.x1, &pred.x2] {
            if transversality.iter().any(|r: &TransversalityRecord| r.location == eq.location) {
                continue;
            }
            transversality.push(TransversalityRecord { location: eq.location, result: transversality_2d(field, eq, i)? });
        }
    }
    Ok(VerificationReport {
        component: i,
        gamma1: g1,
        gamma2: g2,
        verified,
        graph,
        unknot_certified,
        transversality,
        trace_summaries: traces.iter().map(ManifoldTrace::summary).collect(),
        traces,
    })
}

fn verify_gamma(
    field: &PolyVectorField,
    g: &GammaPrediction,
    opts: &TraceOptions,
    traces: &mut Vec<ManifoldTrace>,
) -> Result<GammaVerification> {
    let mut out = GammaVerification {
        equilibrium: g.equilibrium.location,
        region: g.region,
        candidates: Vec::new(),
        accepted: None,
        used_far_seed: false,
        non_generic: g.non_generic,
    };
    let seeded = trace_1d_manifolds_with(field, &g.equilibrium, opts)?;
    judge(field, g, seeded.into_iter().collect(), traces, &mut out)?;
    let weak_real = matches!(g.equilibrium.classification, Classification::ComplexSink | Classification::ComplexSource);
    if out.accepted.is_none() && weak_real {
        out.used_far_seed = true;
        let far = trace_far_seeded(field, &g.equilibrium, opts)?;
        judge(field, g, far, traces, &mut out)?;
    }
    Ok(out)
}

fn judge(
    field: &PolyVectorField,
    g: &GammaPrediction,
    new: Vec<ManifoldTrace>,
    traces: &mut Vec<ManifoldTrace>,
    out: &mut GammaVerification,
) -> Result<()> {
    for t in new {
        let escaped = t.status == TraceStatus::Escaped;
        let sign = sign_invariance(&t, field, g.region.component)?;
        let containment = region_containment(&t, field, &g.region, REGION_SLACK);
        let accepted = escaped && sign.matches(g.sigma) && containment.contained;
        traces.push(t);
        out.candidates.push(GammaCandidate { trace: traces.len() - 1, escaped, sign, containment, accepted });
        if accepted && out.accepted.is_none() {
            out.accepted = Some(out.candidates.len() - 1);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyfield::{zoo, SystemId};
    use std::collections::BTreeMap;

    #[test]
    fn bz_passes_and_predicts() {
        let f = zoo(SystemId::Bz, &BTreeMap::new()).unwrap();
        let rep = check_hypotheses(&f, 1).unwrap();
        assert!(rep.passed(), "{:#?}", rep.entries);
        let pred = predict_structure(&f, 1, &rep).unwrap();
        assert!((pred.x1.location - Vec3::new(-1.0, 0.0, 0.0)).norm() < 1e-10);
        assert!(pred.x2.location.norm() < 1e-10);
        assert_eq!(pred.gamma1.case, Case::A);
        assert_eq!(pred.gamma2.case, Case::A);
    }

    #[test]
    fn negation_swaps_cases() {
        let f = zoo(SystemId::Michelson, &BTreeMap::new()).unwrap();
        let a = predict_structure(&f, 1, &check_hypotheses(&f, 1).unwrap()).unwrap();
        let g = f.negated();
        let b = predict_structure(&g, 1, &check_hypotheses(&g, 1).unwrap()).unwrap();
        assert_ne!(a.gamma1.case, b.gamma1.case);
        assert_ne!(a.gamma2.case, b.gamma2.case);
        assert!((a.x1.location - b.x1.location).norm() < 1e-12);
    }
}
