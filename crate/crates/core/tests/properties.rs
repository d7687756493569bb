use num_rational::Ratio;
use proptest::prelude::*;

use ncgvf::cli::config::{parse_config, serialize_config, to_config};
use ncgvf::coop::{consensus_term, edge_errors, CommGraph, FormationPattern};
use ncgvf::frames::{euler_matrix, FrameTransform, Se2Frame, Se3EulerFrame};
use ncgvf::gvf::{prefield, GainSet};
use ncgvf::linalg::{generalized_cross, MatN, VecN};
use ncgvf::paths::{builtin_ellipse, builtin_lissajous, level_set_errors};
use ncgvf::{MatQ, VecQ};

fn vecs(n: usize, count: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-10.0..10.0f64, n), count)
}

fn to_vecn(raw: &[Vec<f64>]) -> Vec<VecN<f64>> {
    raw.iter().map(|v| VecN::from_slice(v).unwrap()).collect()
}

/// Spanning chain plus extra edges, so the graph is always connected.
fn graph() -> impl Strategy<Value = CommGraph> {
    (2usize..7).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n), 0..6).prop_map(move |extra| {
            let mut edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
            for (a, b) in extra {
                let e = (a.min(b), a.max(b));
                if a != b && !edges.contains(&e) {
                    edges.push(e);
                }
            }
            CommGraph::new(n, &edges).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn cross_is_orthogonal(raw in (2usize..5).prop_flat_map(|n| vecs(n + 1, n))) {
        let vs = to_vecn(&raw);
        let w = generalized_cross(&vs).unwrap();
        let scale: f64 = raw.iter().flatten().map(|a| a.abs()).fold(1.0, f64::max);
        for v in &vs {
            prop_assert!(w.dot(v).unwrap().abs() <= 1e-11 * scale.powi(raw.len() as i32 + 1));
        }
    }

    #[test]
    fn cross_is_alternating_and_linear(raw in vecs(4, 3), extra in prop::collection::vec(-10.0..10.0f64, 4), c in -3.0..3.0f64) {
        let vs = to_vecn(&raw);
        let w = generalized_cross(&vs).unwrap();
        let swapped = generalized_cross(&[vs[1].clone(), vs[0].clone(), vs[2].clone()]).unwrap();
        let tol = 1e-9 * (1.0 + w.max_abs());
        prop_assert!(w.checked_add(&swapped).unwrap().max_abs() <= tol);

        // linear in the first slot
        let e = VecN::from_slice(&extra).unwrap();
        let mixed = vs[0].checked_add(&e.scale(c)).unwrap();
        let lhs = generalized_cross(&[mixed, vs[1].clone(), vs[2].clone()]).unwrap();
        let we = generalized_cross(&[e, vs[1].clone(), vs[2].clone()]).unwrap();
        let rhs = w.checked_add(&we.scale(c)).unwrap();
        prop_assert!(lhs.checked_sub(&rhs).unwrap().max_abs() <= 1e-8 * (1.0 + rhs.max_abs()));
    }

    #[test]
    fn rational_cross_is_exactly_orthogonal(raw in prop::collection::vec(prop::collection::vec(-50i64..50, 4), 3)) {
        let vs: Vec<VecQ> = raw
            .iter()
            .map(|v| VecN::new(v.iter().map(|&a| Ratio::from_integer(a)).collect()).unwrap())
            .collect();
        let w = generalized_cross(&vs).unwrap();
        for v in &vs {
            prop_assert_eq!(w.dot(v).unwrap(), Ratio::from_integer(0));
        }
    }

    #[test]
    fn laplacian_factors_through_incidence(g in graph()) {
        let l: MatQ = g.laplacian();
        let d: MatQ = g.incidence();
        prop_assert_eq!(d.mul_mat(&d.transpose()).unwrap(), l.clone());
        let ones = VecN::new(vec![Ratio::from_integer(1); g.agents()]).unwrap();
        prop_assert!(l.mul_vec(&ones).unwrap().iter().all(|x| *x == Ratio::from_integer(0)));
        let a: MatN<f64> = g.adjacency();
        prop_assert_eq!(a.clone(), a.transpose());
    }

    #[test]
    fn consensus_ignores_common_shifts(
        (g, theta, star) in graph().prop_flat_map(|g| {
            let n = g.agents();
            (Just(g), prop::collection::vec(-10.0..10.0f64, n), prop::collection::vec(-3.0..3.0f64, n))
        }),
        shift in -100.0..100.0f64,
    ) {
        let pattern = FormationPattern::new(star.clone()).unwrap();
        let c0 = consensus_term(&theta, &g, &pattern).unwrap();
        let shifted: Vec<f64> = theta.iter().map(|t| t + shift).collect();
        let c1 = consensus_term(&shifted, &g, &pattern).unwrap();
        for (a, b) in c0.iter().zip(&c1) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + shift.abs()));
        }
        // a shifted copy of the reference is in formation
        let formed: Vec<f64> = star.iter().map(|s| s + shift).collect();
        prop_assert!(edge_errors(&formed, &g, &pattern).unwrap().iter().all(|e| e.abs() < 1e-12));
        prop_assert!(consensus_term(&formed, &g, &pattern).unwrap().iter().all(|e| e.abs() < 1e-12));
        // Σ c_i = 0: the protocol never moves the mean
        prop_assert!(c0.iter().sum::<f64>().abs() < 1e-9);
    }

    #[test]
    fn unit_prefield_never_vanishes(x in prop::collection::vec(-100.0..100.0f64, 3), theta in -1e3..1e3f64) {
        let path = builtin_lissajous::<f64>();
        let errs = level_set_errors(&path, &VecN::from_slice(&x).unwrap(), theta).unwrap();
        let w = prefield(&errs, &GainSet::unit(3)).unwrap().w;
        prop_assert!(w.norm() >= 1.0 - 1e-9);
    }

    #[test]
    fn on_path_prefield_is_the_wedge(theta in -50.0..50.0f64) {
        let path = builtin_ellipse::<f64>();
        let x = VecN::from_slice(&[2.0 * theta.cos(), theta.sin()]).unwrap();
        let errs = level_set_errors(&path, &x, theta).unwrap();
        let pf = prefield(&errs, &GainSet::unit(2)).unwrap();
        prop_assert!(pf.w.checked_sub(&pf.wedge).unwrap().max_abs() < 1e-12);
        prop_assert!(pf.v < 1e-25);
    }

    #[test]
    fn se2_round_trip(x in prop::collection::vec(-50.0..50.0f64, 2), o in prop::collection::vec(-50.0..50.0f64, 2), h in -10.0..10.0f64) {
        let frame = Se2Frame {
            origin: [o[0], o[1]],
            heading: h,
            origin_rate: [0.0; 2],
            heading_rate: 0.0,
        };
        let x = VecN::from_slice(&x).unwrap();
        let back = frame.inverse_apply(&frame.apply(&x).unwrap()).unwrap();
        prop_assert!(back.checked_sub(&x).unwrap().max_abs() < 1e-12);
        // distances are preserved
        let p = frame.apply(&x).unwrap();
        let q = frame.apply(&VecN::from_slice(&o).unwrap()).unwrap();
        prop_assert!((p.checked_sub(&q).unwrap().norm() - x.checked_sub(&VecN::from_slice(&o).unwrap()).unwrap().norm()).abs() < 1e-10);
    }

    #[test]
    fn euler_matrix_is_a_rotation(a in -3.0..3.0f64, b in -1.4..1.4f64, c in -3.0..3.0f64, x in prop::collection::vec(-10.0..10.0f64, 3)) {
        let r = euler_matrix([a, b, c]);
        let rtr = r.transpose().mul_mat(&r).unwrap();
        prop_assert!(rtr.checked_sub(&MatN::identity(3)).unwrap().max_abs() < 1e-12);
        prop_assert!((r.determinant().unwrap() - 1.0).abs() < 1e-12);
        let frame = Se3EulerFrame::new([1.0, -2.0, 0.5], [a, b, c], [0.0; 3], [0.0; 3]).unwrap();
        let x = VecN::from_slice(&x).unwrap();
        let back = frame.inverse_apply(&frame.apply(&x).unwrap()).unwrap();
        prop_assert!(back.checked_sub(&x).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn config_round_trip(
        pos in prop::collection::vec(prop::collection::vec(-5.0..5.0f64, 2), 2),
        thetas in prop::collection::vec(-3.0..3.0f64, 2),
        k in prop::collection::vec(0.1..5.0f64, 2),
        g in 0.05..1.0f64,
        k_c in 0.1..10.0f64,
        delta in -3.0..3.0f64,
        dt in 1e-4..1e-1f64,
    ) {
        let text = format!(
            "[path]\nbuiltin = \"ellipse\"\n[target]\nkind = \"se2_unicycle\"\n\
             speed_mps = [{{ kind = \"const\", amplitude = 1.0 }}]\nturn_rate_radps = [{{ kind = \"cos\", amplitude = 0.2, frequency_radps = 2.0 }}]\n\
             [[agents]]\nposition_m = [{:?}, {:?}]\ntheta = {:?}\n[[agents]]\nposition_m = [{:?}, {:?}]\ntheta = {:?}\n\
             [gains]\nk = [{:?}, {:?}]\ng = {g:?}\nk_c = {k_c:?}\n\
             [coordination]\nedges = [[1, 2]]\ntheta_star_rad = [{delta:?}, 0.0]\n[integrator]\ndt_s = {dt:?}\n",
            pos[0][0], pos[0][1], thetas[0], pos[1][0], pos[1][1], thetas[1], k[0], k[1]
        );
        let parsed = parse_config(&text).unwrap();
        let doc = serialize_config(&to_config(&parsed.name, &parsed.scenario, &parsed.output).unwrap()).unwrap();
        prop_assert_eq!(parse_config(&doc).unwrap(), parsed);
    }
}
