use std::collections::BTreeMap;

use polyflow::equilibria::{classify_equilibrium, equilibria_of};
use polyflow::flowkit::Involution;
use polyflow::manifolds::{trace_1d_manifolds_with, ManifoldTrace, Stability, TraceOptions, TraceStatus};
use polyflow::theorem_engine::{check_hypotheses, predict_structure_branched, verify_prediction};
use polyflow::{zoo, PolyVectorField, SystemId, Vec3};

fn field(id: SystemId) -> PolyVectorField {
    zoo(id, &BTreeMap::new()).unwrap()
}

#[test]
fn halving_the_seed_keeps_the_exit_point() {
    let mut checked = 0;
    for id in [SystemId::Bz, SystemId::Genesio, SystemId::Michelson] {
        let f = field(id);
        for e in equilibria_of(&f).unwrap() {
            if e.classification != polyflow::equilibria::Classification::SaddleFocus {
                continue;
            }
            let traces = trace_1d_manifolds_with(&f, &e, &TraceOptions::default()).unwrap();
            let half = TraceOptions { eps: Some(traces[0].eps / 2.0), ..TraceOptions::default() };
            let halved = trace_1d_manifolds_with(&f, &e, &half).unwrap();
            for (a, b) in traces.iter().zip(&halved) {
                if a.status != TraceStatus::Escaped {
                    continue;
                }
                assert_eq!(b.status, TraceStatus::Escaped, "{id} {:?}", a.branch);
                let d = (a.end_point() - b.end_point()).norm();
                assert!(d < 1e-4, "{id} {:?} {:?}: exit points differ by {d:e}", e.location, a.branch);
                checked += 1;
            }
        }
    }
    assert!(checked >= 3, "only {checked} escaping branches");
}

fn arclength(pts: &[Vec3]) -> Vec<f64> {
    let mut acc = vec![0.0];
    for w in pts.windows(2) {
        acc.push(acc.last().unwrap() + (w[1] - w[0]).norm());
    }
    acc
}

fn at_arclength(pts: &[Vec3], arc: &[f64], s: f64) -> Vec3 {
    let k = arc.partition_point(|&a| a < s).clamp(1, pts.len() - 1);
    let w = ((s - arc[k - 1]) / (arc[k] - arc[k - 1]).max(f64::MIN_POSITIVE)).clamp(0.0, 1.0);
    pts[k - 1] + (pts[k] - pts[k - 1]) * w
}

#[test]
fn michelson_stable_branch_mirrors_the_unstable_one() {
    let f = field(SystemId::Michelson);
    let k = 2f64.sqrt();
    let plus = classify_equilibrium(&f, &Vec3::new(k, 0.0, 0.0)).unwrap();
    let minus = classify_equilibrium(&f, &Vec3::new(-k, 0.0, 0.0)).unwrap();
    let opts = TraceOptions { t_max: 50.0, ..TraceOptions::default() };
    let stable = trace_1d_manifolds_with(&f, &plus, &opts).unwrap();
    let unstable = trace_1d_manifolds_with(&f, &minus, &opts).unwrap();
    assert!(stable.iter().all(|t| t.stability == Stability::Stable));
    assert!(unstable.iter().all(|t| t.stability == Stability::Unstable));
    let sigma = Involution::michelson();
    for a in &stable {
        let mirrored: Vec<Vec3> = a.polyline.s.iter().map(|s| sigma.apply(s)).collect();
        let b: &ManifoldTrace = unstable
            .iter()
            .min_by(|p, q| {
                let dp = (p.seed - mirrored[0]).norm();
                let dq = (q.seed - mirrored[0]).norm();
                dp.total_cmp(&dq)
            })
            .unwrap();
        let (ma, mb) = (arclength(&mirrored), arclength(&b.polyline.s));
        let reach = ma.last().unwrap().min(*mb.last().unwrap());
        let worst = mirrored
            .iter()
            .zip(&ma)
            .filter(|(_, &s)| s <= reach)
            .map(|(p, &s)| (p - at_arclength(&b.polyline.s, &mb, s)).norm())
            .fold(0.0, f64::max);
        assert!(worst < 1e-6, "{:?}: {worst:e}", a.branch);
    }
}

#[test]
fn sprott_branches_stay_in_their_half_spaces() {
    let f = field(SystemId::SprottEVariant);
    let rep = check_hypotheses(&f, 3).unwrap();
    let pred = predict_structure_branched(&f, 3, &rep).unwrap();
    let v = verify_prediction(&f, &pred, 1e3).unwrap();
    let a = f.parameters["a"];
    for (g, below) in [(&v.gamma1, false), (&v.gamma2, true)] {
        let t = &v.traces[g.candidates[g.accepted.unwrap()].trace];
        let c = t.equilibrium.location;
        for s in t.samples() {
            assert!((s - c).norm() > t.seed_ball);
            let f3 = f.component(2).eval(&s);
            if below {
                assert!(s.z < -16.0 * a + 1e-6 && f3 > -1e-9, "{s:?}");
            } else {
                assert!(s.z > -16.0 * a - 1e-6 && f3 < 1e-9, "{s:?}");
            }
        }
    }
}
