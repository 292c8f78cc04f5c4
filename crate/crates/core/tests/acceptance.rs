//! Fifteen end-to-end acceptance checks. Each prints one PASS/FAIL line;
//! the test fails if any check does.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use polyflow::equilibria::{eigenvalues, equilibria_of, michelson_eigenvalues_closed_form, Classification, Equilibrium};
use polyflow::flowkit::{integrate, symmetry_deviation, IntegrationOptions, Involution};
use polyflow::level_sets::{level_set_analysis, BranchTopology, SegmentEnd, DEFAULT_SEEDS_PER_AXIS};
use polyflow::manifolds::{
    assemble_invariant_graph, find_connection, trace_1d_manifolds_with, transversality_2d, ClosureRule, GraphClass,
    TraceOptions, TransversalityVerdict, DEFAULT_TRACE_TMAX, REGION_SLACK,
};
use polyflow::sphere_degree::{index_at_infinity_with, poincare_hopf_from, sphere_map_degree, DegreeMethod};
use polyflow::theorem_engine::{
    check_hypotheses, predict_structure, predict_structure_branched, verify_prediction, VerificationReport,
};
use polyflow::{parse_system, zoo, PolyVectorField, SystemId, Vec3};

type Check = Result<String, String>;

fn sys(id: SystemId, kv: &[(&str, f64)]) -> PolyVectorField {
    let o: BTreeMap<String, f64> = kv.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    zoo(id, &o).unwrap()
}

fn eqs(f: &PolyVectorField) -> Result<Vec<Equilibrium>, String> {
    equilibria_of(f).map_err(|e| format!("{}: {e}", f.name))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn at<'a>(list: &'a [Equilibrium], p: Vec3) -> Result<&'a Equilibrium, String> {
    list.iter().find(|e| (e.location - p).norm() < 1e-10).ok_or_else(|| format!("no equilibrium at {p:?}"))
}

fn same_set(found: &[Equilibrium], expected: &[Vec3]) -> Result<(), String> {
    ensure(found.len() == expected.len(), || format!("found {} equilibria, expected {}", found.len(), expected.len()))?;
    for p in expected {
        at(found, *p)?;
    }
    Ok(())
}

fn c01_equilibria() -> Check {
    let bz = eqs(&sys(SystemId::Bz, &[]))?;
    same_set(&bz, &[Vec3::zeros(), Vec3::new(-1.0, 0.0, 0.0)])?;
    let ge = eqs(&sys(SystemId::Genesio, &[]))?;
    same_set(&ge, &[Vec3::zeros(), Vec3::new(-1.0, 0.0, 0.0)])?;
    for c in [0.5, 1.0, 2.0] {
        let m = eqs(&sys(SystemId::Michelson, &[("c", c)]))?;
        let k = c * 2f64.sqrt();
        same_set(&m, &[Vec3::new(k, 0.0, 0.0), Vec3::new(-k, 0.0, 0.0)])?;
    }
    let sp = eqs(&sys(SystemId::SprottEVariant, &[("a", 1.0)]))?;
    same_set(&sp, &[Vec3::new(0.25, 0.0625, -16.0)])?;
    Ok("bz, genesio, michelson(0.5,1,2), sprott within 1e-10".into())
}

fn c02_classification() -> Check {
    let bz = eqs(&sys(SystemId::Bz, &[]))?;
    let o = at(&bz, Vec3::zeros())?;
    ensure(o.classification == Classification::SaddleFocus && o.local_index == Some(1), || format!("bz origin {o:?}"))?;
    let q = at(&bz, Vec3::new(-1.0, 0.0, 0.0))?;
    ensure(q.classification == Classification::ComplexSink && q.local_index == Some(-1), || format!("bz (-1,0,0) {q:?}"))?;
    let m = eqs(&sys(SystemId::Michelson, &[]))?;
    let p = at(&m, Vec3::new(2f64.sqrt(), 0.0, 0.0))?;
    ensure(
        p.classification == Classification::SaddleFocus && p.local_index == Some(-1) && p.real_eigenvalue().unwrap() < 0.0,
        || format!("michelson p+ {p:?}"),
    )?;
    let s = eqs(&sys(SystemId::SprottEVariant, &[]))?;
    ensure(s[0].local_index == Some(-1), || format!("sprott p_a {:?}", s[0]))?;
    Ok("bz origin +1 saddle focus, bz (-1,0,0) -1 complex sink, michelson p+ -1, sprott p_a -1".into())
}

fn c03_closed_form() -> Check {
    let mut worst = 0f64;
    for c in [0.5, 1.0, 2.0] {
        let f = sys(SystemId::Michelson, &[("c", c)]);
        let p = at(&eqs(&f)?, Vec3::new(c * 2f64.sqrt(), 0.0, 0.0))?.clone();
        let numeric = eigenvalues(&p.jacobian_matrix());
        let closed = michelson_eigenvalues_closed_form(c).map_err(|e| e.to_string())?;
        for z in closed {
            let d = numeric.iter().map(|w: &Complex64| (w - z).norm()).fold(f64::INFINITY, f64::min);
            worst = worst.max(d);
        }
    }
    ensure(worst < 1e-9, || format!("max deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:.2e}"))
}

fn c04_shilnikov() -> Check {
    let mut worst = 0f64;
    for k in 0..50 {
        let c = 0.05 * (20.0f64 / 0.05).powf(k as f64 / 49.0);
        let f = sys(SystemId::Michelson, &[("c", c)]);
        let p = at(&eqs(&f)?, Vec3::new(c * 2f64.sqrt(), 0.0, 0.0))?.clone();
        let r = p.shilnikov_ratio.ok_or_else(|| format!("no ratio at c = {c}"))?;
        ensure(r < 1.0, || format!("ratio {r} at c = {c}"))?;
        worst = worst.max(r);
    }
    Ok(format!("largest ratio {worst:.4} over 50 values of c"))
}

fn index_fields() -> Vec<(PolyVectorField, i32)> {
    vec![
        (sys(SystemId::Bz, &[]), 0),
        (sys(SystemId::Genesio, &[]), 0),
        (sys(SystemId::Michelson, &[]), 0),
        (sys(SystemId::SprottEVariant, &[]), 1),
        (parse_system("dx=x\ndy=y\ndz=z").unwrap(), -1),
    ]
}

fn c05_index_at_infinity() -> Check {
    let mut notes = Vec::new();
    for (f, want) in index_fields() {
        let e = eqs(&f)?;
        let idx = index_at_infinity_with(&f, &e, 0).map_err(|e| format!("{}: {e}", f.name))?;
        ensure(idx.index == want && idx.stable && idx.methods_agree, || format!("{}: {idx:?}", f.name))?;
        ensure(idx.radii.len() >= 2 && (idx.radii[1] / idx.radii[0] - 4.0).abs() < 1e-12, || format!("radii {:?}", idx.radii))?;
        let mut both = 0;
        for (r, d) in idx.radii.iter().zip(&idx.degrees) {
            if let Ok(o) = sphere_map_degree(&f, *r, DegreeMethod::OmittedDirection, 0) {
                ensure(o.degree == *d, || format!("{}: methods disagree at r = {r}", f.name))?;
                both += 1;
            }
        }
        notes.push(format!("{} {} ({both} radii both conclusive)", f.name, idx.index));
    }
    Ok(notes.join(", "))
}

fn c06_poincare_hopf() -> Check {
    for (f, _) in index_fields() {
        let e = eqs(&f)?;
        let idx = index_at_infinity_with(&f, &e, 0).map_err(|e| e.to_string())?;
        let a = poincare_hopf_from(&e, &idx).map_err(|e| e.to_string())?;
        ensure(a.residual == 0, || format!("{}: {a:?}", f.name))?;
    }
    Ok("residual 0 for all five fields".into())
}

fn c07_divergence() -> Check {
    let m = sys(SystemId::Michelson, &[]);
    ensure(m.divergence().is_zero(), || format!("michelson divergence {}", m.divergence()))?;
    for (b, c) in [(1.0, 1.0), (0.3, 2.5)] {
        let f = sys(SystemId::Bz, &[("b", b), ("c", c)]);
        let want = parse_system(&format!("dx=-1-{b}*x-{c}*x^2\ndy=0\ndz=0")).unwrap().component(0).clone();
        ensure(f.divergence() == want, || format!("bz(b={b}, c={c}) divergence {}", f.divergence()))?;
    }
    Ok("michelson zero; bz -1-bx-cx^2 term for term".into())
}

fn c08_tangency_structure() -> Check {
    let mut notes = Vec::new();
    for id in [SystemId::Bz, SystemId::Michelson] {
        let f = sys(id, &[]);
        let a = level_set_analysis(&f, 1, &polyflow::equilibria::default_search_box(&f), DEFAULT_SEEDS_PER_AXIS)
            .map_err(|e| e.to_string())?;
        ensure(a.topology == BranchTopology::SingleLine, || format!("{id}: {:?}", a.topology))?;
        let worst = a.all_points().map(|p| p.y.abs().max(p.z.abs())).fold(0.0, f64::max);
        ensure(worst < 1e-9, || format!("{id}: off-axis by {worst:e}"))?;
        notes.push(format!("{id} single line ({worst:.1e})"));
    }
    let f = sys(SystemId::SprottEVariant, &[]);
    let a = level_set_analysis(&f, 3, &polyflow::equilibria::default_search_box(&f), DEFAULT_SEEDS_PER_AXIS)
        .map_err(|e| e.to_string())?;
    ensure(a.topology == BranchTopology::Branched, || format!("sprott: {:?}", a.topology))?;
    ensure(a.n_components == 2 && a.branches.len() == 3, || format!("sprott: {} components, {} branches", a.n_components, a.branches.len()))?;
    let worst = a.all_points().map(|p| (p.x - 0.25).abs().max((p.z + 1.0 / p.y).abs())).fold(0.0, f64::max);
    ensure(worst < 1e-9, || format!("sprott: off the curve z = -a/y by {worst:e}"))?;
    let p_a = Vec3::new(0.25, 0.0625, -16.0);
    let splits = a
        .branches
        .iter()
        .flat_map(|b| [b.start, b.end])
        .filter(|e| matches!(e, SegmentEnd::FixedPoint(q) if (q - p_a).norm() < 1e-9))
        .count();
    ensure(splits == 2, || format!("sprott: p_a ends {splits} branches"))?;
    notes.push(format!("sprott branched, 3 branches split at y = 1/16 and the pole ({worst:.1e})"));
    Ok(notes.join("; "))
}

fn c09_tangency_signs() -> Check {
    let check = |id: SystemId, expected: &dyn Fn(f64) -> f64, xs: &[f64]| -> Result<(), String> {
        let f = sys(id, &[]);
        let a = level_set_analysis(&f, 1, &polyflow::equilibria::default_search_box(&f), DEFAULT_SEEDS_PER_AXIS)
            .map_err(|e| e.to_string())?;
        for &x in xs {
            let v = a.l2.eval(&Vec3::new(x, 0.0, 0.0));
            let e = expected(x);
            if v.abs() < 1e-9 {
                continue;
            }
            ensure(v.signum() == e.signum(), || format!("{id}: L2({x}) = {v}, expected sign of {e}"))?;
        }
        Ok(())
    };
    let bz_x: Vec<f64> = (0..20).map(|k| -3.0 + 5.0 * k as f64 / 19.0).collect();
    check(SystemId::Bz, &|x| x * (1.0 + x), &bz_x)?;
    let m_x: Vec<f64> = (0..20).map(|k| if k < 10 { -6.0 + 0.45 * k as f64 } else { 1.5 + 0.45 * (k - 10) as f64 }).collect();
    check(SystemId::Michelson, &|_| -1.0, &m_x)?;
    Ok("bz x(1+x) and michelson c^2-x^2/2 signs match at 20 points each".into())
}

fn verification(id: SystemId, i: usize) -> Result<VerificationReport, String> {
    let f = sys(id, &[]);
    let rep = check_hypotheses(&f, i).map_err(|e| format!("{id}: {e}"))?;
    let pred = if rep.passed() {
        predict_structure(&f, i, &rep)
    } else {
        predict_structure_branched(&f, i, &rep)
    }
    .map_err(|e| format!("{id}: {e}"))?;
    verify_prediction(&f, &pred, DEFAULT_TRACE_TMAX).map_err(|e| format!("{id}: {e}"))
}

const PIPELINE: [(SystemId, usize); 4] =
    [(SystemId::Bz, 1), (SystemId::Genesio, 1), (SystemId::Michelson, 1), (SystemId::SprottEVariant, 3)];

fn c10_pipeline() -> Check {
    for (id, i) in PIPELINE {
        let f = sys(id, &[]);
        let rep = check_hypotheses(&f, i).map_err(|e| e.to_string())?;
        if id == SystemId::SprottEVariant {
            ensure(!rep.passed() && rep.failures().contains(&"h3b"), || format!("sprott: {:?}", rep.failures()))?;
        } else {
            ensure(rep.passed(), || format!("{id}: {:?}", rep.failures()))?;
        }
        let v = verification(id, i)?;
        ensure(v.verified, || format!("{id}: not verified"))?;
        for (name, g) in [("gamma1", &v.gamma1), ("gamma2", &v.gamma2)] {
            let ok = g.candidates.iter().any(|c| {
                c.escaped
                    && v.trace_summaries[c.trace].end_radius >= 1e3
                    && c.sign.matches(g.region.sigma)
                    && c.containment.contained
                    && c.containment.worst_margin.is_some_and(|m| m >= -REGION_SLACK)
            });
            ensure(ok, || format!("{id} {name}: no escaping, sign-constant, contained branch"))?;
        }
    }
    Ok("hypotheses as expected; every Γ has an escaping branch with constant sign inside its region".into())
}

fn c11_unknot() -> Check {
    for (id, i) in PIPELINE {
        let v = verification(id, i)?;
        let g = v.graph.as_ref().ok_or_else(|| format!("{id}: no graph"))?;
        ensure(v.unknot_certified && g.classification == GraphClass::UnknotCertified, || format!("{id}: {:?}", g.reasons))?;
    }
    Ok("bz, genesio, michelson(c=1), sprott".into())
}

fn c12_reversibility() -> Check {
    let f = sys(SystemId::Michelson, &[("c", 1.0)]);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst = 0f64;
    for _ in 0..10 {
        let s0 = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let d = symmetry_deviation(&f, &Involution::michelson(), s0, 5.0).map_err(|e| format!("{s0:?}: {e}"))?;
        worst = worst.max(d);
    }
    ensure(worst < 1e-7, || format!("deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:.2e}"))
}

fn c13_transversality() -> Check {
    let m = sys(SystemId::Michelson, &[]);
    for e in eqs(&m)? {
        let t = transversality_2d(&m, &e, 1).map_err(|e| e.to_string())?;
        ensure(t.verdict == TransversalityVerdict::Transverse, || format!("michelson {:?}: {t:?}", e.location))?;
    }
    let s = sys(SystemId::SprottEVariant, &[]);
    let t = transversality_2d(&s, &eqs(&s)?[0], 3).map_err(|e| e.to_string())?;
    ensure(t.verdict == TransversalityVerdict::Transverse, || format!("sprott: {t:?}"))?;
    let d = parse_system("dx=x\ndy=y\ndz=-z").unwrap();
    let t = transversality_2d(&d, &eqs(&d)?[0], 3).map_err(|e| e.to_string())?;
    ensure(t.verdict == TransversalityVerdict::Tangent, || format!("diagonal control: {t:?}"))?;
    Ok("michelson p± and sprott p_a transverse; diagonal control tangent".into())
}

fn c14_shooting() -> Check {
    let family = |c: f64| zoo(SystemId::Michelson, &[("c".to_string(), c)].into_iter().collect());
    let search = find_connection(family, (0.2, 2.0), 0.05, 1e-8).map_err(|e| e.to_string())?;
    ensure(!search.brackets.is_empty(), || "no sign-change bracket".into())?;
    ensure(search.bracket_width <= 1e-8, || format!("bracket width {:e}", search.bracket_width))?;
    let cert = &search.certificate;
    ensure(cert.certified && cert.distance < 1e-4, || format!("{cert:?}"))?;
    let f = family(search.c_star).unwrap();
    let mut traces = Vec::new();
    for e in eqs(&f)? {
        traces.extend(trace_1d_manifolds_with(&f, &e, &TraceOptions::default()).map_err(|e| e.to_string())?);
    }
    let g = assemble_invariant_graph(&f, &traces, &ClosureRule::Connection(cert.clone())).map_err(|e| e.to_string())?;
    ensure(g.classification == GraphClass::HeteroclinicKnotCandidate, || format!("{:?}: {:?}", g.classification, g.reasons))?;
    Ok(format!("c* = {:.10}, distance {:.2e}, heteroclinic knot candidate", search.c_star, cert.distance))
}

fn c15_integrator() -> Check {
    let decay = parse_system("dx=-x\ndy=-y\ndz=-z").unwrap();
    let s0 = Vec3::new(1.0, -0.5, 0.25);
    let exact = s0 * (-1f64).exp();
    let hs = [0.1, 0.05, 0.025];
    let mut pts = Vec::new();
    for h in hs {
        let opts = IntegrationOptions { fixed_step: Some(h), ..IntegrationOptions::default() };
        let tr = integrate(&decay, s0, (0.0, 1.0), &opts, &[]).map_err(|e| e.to_string())?;
        pts.push((h.ln(), (tr.last_point() - exact).norm().ln()));
    }
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    ensure((slope - 5.0).abs() <= 0.3, || format!("slope {slope:.3}"))?;

    let mut worst = 0f64;
    let opts = IntegrationOptions::default();
    for id in SystemId::BUILTIN {
        let f = sys(id, &[]);
        for e in eqs(&f)? {
            let s0 = e.location + Vec3::new(0.05, -0.03, 0.04);
            let fwd = integrate(&f, s0, (0.0, 5.0), &opts, &[]).map_err(|e| format!("{id}: {e}"))?;
            let back =
                integrate(&f, fwd.last_point(), (fwd.last_time(), 0.0), &opts, &[]).map_err(|e| format!("{id}: {e}"))?;
            worst = worst.max((back.last_point() - s0).norm());
        }
    }
    ensure(worst < 1e-7, || format!("time-reversal return error {worst:e}"))?;
    Ok(format!("order slope {slope:.3}; return error {worst:.2e}"))
}

fn main() {
    let checks: [(&str, fn() -> Check); 15] = [
        ("equilibria exactness", c01_equilibria),
        ("classification anchors", c02_classification),
        ("closed-form eigenvalues", c03_closed_form),
        ("shilnikov ratio", c04_shilnikov),
        ("index at infinity", c05_index_at_infinity),
        ("poincare-hopf residual", c06_poincare_hopf),
        ("divergence", c07_divergence),
        ("tangency structure", c08_tangency_structure),
        ("tangency-side signs", c09_tangency_signs),
        ("theorem pipeline", c10_pipeline),
        ("unknot certification", c11_unknot),
        ("michelson reversibility", c12_reversibility),
        ("2d transversality", c13_transversality),
        ("heteroclinic shooting", c14_shooting),
        ("integrator order and reversal", c15_integrator),
    ];
    let mut failed = Vec::new();
    for (k, (name, f)) in checks.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({detail})", k + 1),
            Err(why) => {
                println!("criterion {:>2} {name}: FAIL ({why})", k + 1);
                failed.push(k + 1);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
