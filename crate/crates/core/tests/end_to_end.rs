use mfw_core::problems::{self, LowRankParams, SensingParams};
use mfw_core::{run, DVector, Method, RunOptions, StepSchedule, Tableau};
use proptest::prelude::*;

const TABLEAUS: [&str; 5] = ["euler", "midpoint", "rk4", "rk38", "rk5"];

fn methods() -> Vec<Method> {
    let mut all = vec![Method::Fw, Method::FwMomentum, Method::FwLineSearch];
    for name in TABLEAUS {
        all.push(Method::Rk(Tableau::builtin(name).unwrap()));
    }
    all.push(Method::RkLineSearch(Tableau::builtin("rk4").unwrap()));
    all
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn iterates_stay_in_triangle(tx in -1.5f64..1.5, ty in -1.5f64..1.5, c in 1.0f64..6.0) {
        let p = problems::triangle(DVector::from_vec(vec![tx, ty]), DVector::from_vec(vec![-0.5, 0.5])).unwrap();
        let sched = StepSchedule::with_c(c).unwrap();
        for m in methods() {
            // stages only combine convexly when every certificate lies in [0, 1]
            if let Method::Rk(t) | Method::RkLineSearch(t) = &m {
                if !(1..=60).all(|k| t.certificate(c, k).unwrap().in_unit_interval) {
                    continue;
                }
            }
            let traj = run(p.objective.as_ref(), &p.set, &p.x0, &m, &sched, &RunOptions::iterations(60)).unwrap();
            prop_assert!(traj.max_violation() <= 1e-9, "{} left the set: {}", m.name(), traj.max_violation());
        }
    }

    #[test]
    fn gap_bounds_suboptimality(tx in -1.5f64..1.5, ty in -1.5f64..1.5) {
        let p = problems::triangle(DVector::from_vec(vec![tx, ty]), DVector::from_vec(vec![-0.5, 0.5])).unwrap();
        let f_star = p.f_star.unwrap();
        let traj = run(p.objective.as_ref(), &p.set, &p.x0, &Method::Fw, &StepSchedule::with_c(2.0).unwrap(), &RunOptions::iterations(100)).unwrap();
        for r in &traj.records {
            prop_assert!(r.f - f_star <= r.gap + 1e-12);
            prop_assert!(r.f - f_star >= -1e-12);
        }
    }
}

#[test]
fn flow_with_unit_step_is_frank_wolfe() {
    let p = problems::triangle_default();
    let opts = RunOptions::iterations(50);
    let sched = StepSchedule::new(2.0, 1.0).unwrap();
    let fw = run(p.objective.as_ref(), &p.set, &p.x0, &Method::Fw, &sched, &opts).unwrap();
    let flow = run(p.objective.as_ref(), &p.set, &p.x0, &Method::Flow, &sched, &opts).unwrap();
    assert_eq!(fw.points(), flow.points());
}

#[test]
fn lowrank_iterates_respect_nuclear_radius() {
    let p = problems::lowrank(&LowRankParams { users: 12, items: 10, radius: 5.0, ..Default::default() }).unwrap();
    for m in [Method::Fw, Method::Rk(Tableau::builtin("midpoint").unwrap())] {
        let traj = run(p.objective.as_ref(), &p.set, &p.x0, &m, &StepSchedule::with_c(2.0).unwrap(), &RunOptions::iterations(40)).unwrap();
        assert!(traj.max_violation() <= 1e-8);
        assert!(traj.last().unwrap().f < traj.records[0].f);
    }
}

#[test]
fn sensing_runs_are_reproducible() {
    let params = SensingParams { samples: 60, features: 20, seed: 7, ..Default::default() };
    let go = || {
        let p = problems::sensing(&params).unwrap();
        run(p.objective.as_ref(), &p.set, &p.x0, &Method::Fw, &StepSchedule::with_c(2.0).unwrap(), &RunOptions::iterations(30)).unwrap()
    };
    assert_eq!(go(), go());
    let other = problems::sensing(&SensingParams { seed: 8, ..params }).unwrap();
    let first = problems::sensing(&params).unwrap();
    assert_ne!(other.objective.value(&other.x0.add_scalar(0.01)).unwrap(), first.objective.value(&first.x0.add_scalar(0.01)).unwrap());
}

#[test]
fn stop_gap_ends_early() {
    let p = problems::triangle_default();
    let opts = RunOptions { max_iter: 10_000, stop_gap: 1e-3 };
    let traj = run(p.objective.as_ref(), &p.set, &p.x0, &Method::Fw, &StepSchedule::with_c(2.0).unwrap(), &opts).unwrap();
    assert!(traj.len() < 10_001);
    assert!(traj.last().unwrap().gap <= 1e-3);
}
