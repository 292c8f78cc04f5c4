//! The JSON analysis report.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::equilibria::{default_search_box, equilibria_of, Equilibrium};
use crate::error::{Error, Result};
use crate::level_sets::LevelSetAnalysis;
use crate::linalg::Vec3;
use crate::polyfield::{PolyVectorField, TriPolynomial};
use crate::sphere_degree::{index_at_infinity_with, poincare_hopf_from, IndexAtInfinityReport, PoincareHopfAudit};
use crate::theorem_engine::{
    check_hypotheses_from, predict_structure, predict_structure_branched, verify_prediction, HypothesisReport,
    HypothesisStatus, StructurePrediction, VerificationReport,
};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SystemDescriptor {
    pub name: String,
    /// `zoo` or the path of the definition file.
    pub origin: String,
    /// `dx = …`, `dy = …`, `dz = …` with parameters substituted.
    pub equations: [String; 3],
    pub field: PolyVectorField,
}

impl SystemDescriptor {
    pub fn new(field: &PolyVectorField, origin: impl Into<String>) -> Self {
        let c = field.components();
        SystemDescriptor {
            name: field.name.clone(),
            origin: origin.into(),
            equations: [format!("dx = {}", c[0]), format!("dy = {}", c[1]), format!("dz = {}", c[2])],
            field: field.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DivergenceSummary {
    pub polynomial: TriPolynomial,
    pub text: String,
    pub identically_zero: bool,
    pub at_equilibria: Vec<f64>,
    /// Fractions of an `n³` grid over the search box with positive / negative divergence.
    pub fraction_positive: f64,
    pub fraction_negative: f64,
    pub grid: usize,
}

pub fn divergence_summary(field: &PolyVectorField, equilibria: &[Equilibrium]) -> DivergenceSummary {
    const N: usize = 11;
    let div = field.divergence();
    let b = default_search_box(field);
    let (mut pos, mut neg) = (0usize, 0usize);
    for a in 0..N {
        for c in 0..N {
            for d in 0..N {
                let f = |k: usize, m: usize| b.lo[k] + (b.hi[k] - b.lo[k]) * m as f64 / (N - 1) as f64;
                let v = div.eval(&Vec3::new(f(0, a), f(1, c), f(2, d)));
                if v > 0.0 {
                    pos += 1;
                } else if v < 0.0 {
                    neg += 1;
                }
            }
        }
    }
    let total = (N * N * N) as f64;
    DivergenceSummary {
        text: div.to_string(),
        identically_zero: div.is_zero(),
        at_equilibria: equilibria.iter().map(|e| div.eval(&e.location)).collect(),
        fraction_positive: pos as f64 / total,
        fraction_negative: neg as f64 / total,
        grid: N,
        polynomial: div,
    }
}

/// Exit status with machine-readable reasons.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub exit_code: i32,
    pub reasons: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub system: SystemDescriptor,
    pub parameters: BTreeMap<String, f64>,
    pub rng_seed: u64,
    pub component: usize,
    pub equilibria: Vec<Equilibrium>,
    pub index_at_infinity: Option<IndexAtInfinityReport>,
    pub poincare_hopf: Option<PoincareHopfAudit>,
    pub divergence: DivergenceSummary,
    pub level_sets: Option<LevelSetAnalysis>,
    pub hypotheses: Option<HypothesisReport>,
    pub prediction: Option<StructurePrediction>,
    pub verification: Option<VerificationReport>,
    /// Phase name and error message for each phase that failed.
    pub errors: Vec<(String, String)>,
    pub outcome: Outcome,
    /// Wall time per phase in seconds; the only non-deterministic key.
    pub timings: BTreeMap<String, f64>,
}

impl AnalysisReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Times named phases.
#[derive(Default)]
pub struct PhaseTimer {
    pub timings: BTreeMap<String, f64>,
}

impl PhaseTimer {
    pub fn run<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let t0 = Instant::now();
        let out = f();
        self.timings.insert(name.to_string(), t0.elapsed().as_secs_f64());
        out
    }
}

pub struct AnalyzeOptions {
    pub component: usize,
    pub rng_seed: u64,
    pub t_max: f64,
}

/// The full pipeline: equilibria, index at infinity, divergence, level sets,
/// hypotheses, structure prediction (the branched path when the tangency
/// curve branches) and its verification.
pub fn analyze(field: &PolyVectorField, origin: &str, opts: &AnalyzeOptions) -> AnalysisReport {
    let mut timer = PhaseTimer::default();
    let mut errors: Vec<(String, String)> = Vec::new();
    let mut reasons = Vec::new();
    let note = |errors: &mut Vec<(String, String)>, phase: &str, e: &Error| errors.push((phase.into(), e.to_string()));

    let eqs = timer.run("equilibria", || equilibria_of(field));
    let equilibria = match &eqs {
        Ok(e) => e.clone(),
        Err(e) => {
            note(&mut errors, "equilibria", e);
            Vec::new()
        }
    };
    let index = timer.run("index_at_infinity", || index_at_infinity_with(field, &equilibria, opts.rng_seed));
    let index_ok = match &index {
        Ok(r) => Some(r.clone()),
        Err(e) => {
            note(&mut errors, "index_at_infinity", e);
            None
        }
    };
    let poincare_hopf = index_ok.as_ref().and_then(|r| match poincare_hopf_from(&equilibria, r) {
        Ok(a) => Some(a),
        Err(e) => {
            note(&mut errors, "poincare_hopf", &e);
            None
        }
    });
    if let Some(r) = &index_ok {
        if !r.stable {
            reasons.push(format!("index at infinity unstable: degrees {:?} at radii {:?}", r.degrees, r.radii));
        }
    }
    let divergence = timer.run("divergence", || divergence_summary(field, &equilibria));
    let hypotheses = timer.run("hypotheses", || check_hypotheses_from(field, opts.component, eqs, index));
    let hypotheses = match hypotheses {
        Ok(h) => Some(h),
        Err(e) => {
            note(&mut errors, "hypotheses", &e);
            None
        }
    };
    let level_sets = hypotheses.as_ref().and_then(|h| h.level_sets.clone());
    let prediction = hypotheses.as_ref().and_then(|h| {
        let r = timer.run("prediction", || {
            if h.passed() {
                predict_structure(field, opts.component, h)
            } else if h.entry("h3b").is_some_and(|e| e.status == HypothesisStatus::Fail) {
                predict_structure_branched(field, opts.component, h)
            } else {
                Err(Error::InvalidArgument(format!("hypotheses fail: {:?}", h.failures())))
            }
        });
        match r {
            Ok(p) => Some(p),
            Err(e) => {
                note(&mut errors, "prediction", &e);
                None
            }
        }
    });
    let verification = prediction.as_ref().and_then(|p| {
        match timer.run("verification", || verify_prediction(field, p, opts.t_max)) {
            Ok(v) => {
                if !v.verified {
                    reasons.push("prediction not verified".into());
                }
                Some(v)
            }
            Err(e) => {
                reasons.push(format!("verification: {e}"));
                note(&mut errors, "verification", &e);
                None
            }
        }
    });
    for (phase, msg) in &errors {
        if phase != "prediction" && phase != "verification" {
            reasons.push(format!("{phase}: {msg}"));
        }
    }
    let exit_code = if reasons.is_empty() { 0 } else { 1 };
    AnalysisReport {
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION.into(),
        system: SystemDescriptor::new(field, origin),
        parameters: field.parameters.clone(),
        rng_seed: opts.rng_seed,
        component: opts.component,
        equilibria,
        index_at_infinity: index_ok,
        poincare_hopf,
        divergence,
        level_sets,
        hypotheses,
        prediction,
        verification,
        errors,
        outcome: Outcome { exit_code, reasons },
        timings: timer.timings,
    }
}
