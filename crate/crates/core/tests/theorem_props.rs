use std::collections::BTreeMap;

use polyflow::equilibria::equilibria_of;
use polyflow::theorem_engine::{check_hypotheses, predict_structure, HypothesisStatus};
use polyflow::{zoo, SystemId};

#[test]
fn any_failing_entry_fails_the_report() {
    for id in SystemId::BUILTIN {
        let f = zoo(id, &BTreeMap::new()).unwrap();
        for i in 1..=3 {
            let Ok(rep) = check_hypotheses(&f, i) else { continue };
            let bad = rep.entries.iter().any(|e| !e.status.acceptable());
            assert_eq!(rep.overall == HypothesisStatus::Fail, bad, "{id} component {i}");
            assert_eq!(rep.passed(), !bad);
        }
    }
}

#[test]
fn negation_swaps_cases_on_the_zoo() {
    for id in [SystemId::Bz, SystemId::Genesio, SystemId::Michelson] {
        let f = zoo(id, &BTreeMap::new()).unwrap();
        let g = f.negated();
        let a = predict_structure(&f, 1, &check_hypotheses(&f, 1).unwrap()).unwrap();
        let b = predict_structure(&g, 1, &check_hypotheses(&g, 1).unwrap()).unwrap();
        assert_ne!(a.gamma1.case, b.gamma1.case, "{id}");
        assert_ne!(a.gamma2.case, b.gamma2.case, "{id}");
        assert_eq!(a.gamma1.arc_direction, b.gamma1.arc_direction, "{id}");
    }
}

#[test]
fn x1_and_x2_are_extremal() {
    for id in [SystemId::Bz, SystemId::Genesio, SystemId::Michelson] {
        let f = zoo(id, &BTreeMap::new()).unwrap();
        let p = predict_structure(&f, 1, &check_hypotheses(&f, 1).unwrap()).unwrap();
        let xs: Vec<f64> = equilibria_of(&f).unwrap().iter().map(|e| e.location.x).collect();
        for &x in &xs {
            assert!(p.x1.location.x <= x && x <= p.x2.location.x, "{id}");
        }
        assert!(p.x1.location.x < p.x2.location.x, "{id}");
    }
}
