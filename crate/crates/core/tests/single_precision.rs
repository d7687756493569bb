use ncgvf::frames::{Target, TimeProfile, UnicycleTarget};
use ncgvf::gvf::GainSet;
use ncgvf::linalg::VecN;
use ncgvf::paths::{builtin_ellipse, ExtendedState};
use ncgvf::scalar::Real;
use ncgvf::sim::{run, Scenario};

fn scenario<T: Real>() -> Scenario<T> {
    let target = UnicycleTarget {
        x: T::zero(),
        y: T::zero(),
        heading: T::zero(),
        speed: TimeProfile::constant(T::one()),
        turn_rate: TimeProfile::constant(T::lit(0.2)),
    };
    Scenario {
        path: builtin_ellipse(),
        target: Target::Unicycle(target),
        agents: vec![ExtendedState::extend(
            VecN::from_slice(&[T::lit(2.0), T::one()]).unwrap(),
            T::zero(),
        )],
        gains: GainSet::unit(2),
        coordination: None,
        dt: T::lit(0.01),
        t_end: T::lit(8.0),
        record_stride: 50,
    }
}

#[test]
fn f32_run_tracks_f64_run() {
    let single = run(&scenario::<f32>()).unwrap();
    let double = run(&scenario::<f64>()).unwrap();
    assert_eq!(single.samples.len(), double.samples.len());
    for (a, b) in single.samples.iter().zip(&double.samples) {
        let (a, b) = (&a.agents[0], &b.agents[0]);
        assert!((a.v as f64 - b.v).abs() < 1e-4, "{} vs {}", a.v, b.v);
        assert!((a.theta as f64 - b.theta).abs() < 1e-3);
    }
    assert!(single.samples.last().unwrap().agents[0].phi_norm < 1e-3);
}
