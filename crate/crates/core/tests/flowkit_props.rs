use std::collections::BTreeMap;

use proptest::prelude::*;

use polyflow::equilibria::equilibria_of;
use polyflow::flowkit::{integrate, EventSpec, IntegrationOptions};
use polyflow::{parse_system, zoo, SystemId, Vec3};

#[test]
fn fifth_order_on_linear_decay() {
    let f = parse_system("dx=-x\ndy=-y\ndz=-z").unwrap();
    let s0 = Vec3::new(1.0, 2.0, -1.0);
    let exact = s0 * (-1f64).exp();
    let err: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&h| {
            let o = IntegrationOptions { fixed_step: Some(h), ..IntegrationOptions::default() };
            (integrate(&f, s0, (0.0, 1.0), &o, &[]).unwrap().last_point() - exact).norm()
        })
        .collect();
    let slope = (err[0].ln() - err[2].ln()) / (0.1f64.ln() - 0.025f64.ln());
    assert!((slope - 5.0).abs() <= 0.3, "slope {slope}, errors {err:?}");
}

#[test]
fn forward_then_backward_returns_on_the_zoo() {
    let opts = IntegrationOptions::default();
    for id in SystemId::BUILTIN {
        let f = zoo(id, &BTreeMap::new()).unwrap();
        for e in equilibria_of(&f).unwrap() {
            let s0 = e.location + Vec3::new(0.05, -0.03, 0.04);
            let fwd = integrate(&f, s0, (0.0, 5.0), &opts, &[]).unwrap();
            let back = integrate(&f, fwd.last_point(), (fwd.last_time(), 0.0), &opts, &[]).unwrap();
            let err = (back.last_point() - s0).norm();
            assert!(err < 1e-7, "{id} from {s0:?}: {err:e}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn located_events_sit_on_the_surface(
        x in -1.0..1.0f64, y in -1.0..1.0f64, z in -1.0..1.0f64, c in -1.0..1.0f64,
    ) {
        let f = zoo(SystemId::Michelson, &BTreeMap::new()).unwrap();
        let plane = move |s: &Vec3| s.x - c;
        let curved = |s: &Vec3| s.y * s.y + s.z - 0.3;
        let events = [EventSpec::new("plane", plane).non_terminal(), EventSpec::new("curved", curved).non_terminal()];
        let tr = integrate(&f, Vec3::new(x, y, z), (0.0, 10.0), &IntegrationOptions::default(), &events).unwrap();
        for e in &tr.events {
            let g = if e.id == "plane" { plane(&e.point) } else { curved(&e.point) };
            prop_assert!(g.abs() < 1e-10 * (1.0 + e.point.norm()), "{} at {:?}: {:e}", e.id, e.point, g);
        }
    }
}
