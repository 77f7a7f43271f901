use std::sync::OnceLock;

use proptest::prelude::*;

use hmflow_core::cli::report::fmt_f64;
use hmflow_core::cli::RunConfig;
use hmflow_core::jacobi_spectral::{build_operator, symmetrize};
use hmflow_core::profile_ode::{shoot, ShootingOptions, Target};
use hmflow_core::weighted_geometry::{integrate, CompensatedSum, RadialGrid};

fn grid() -> &'static RadialGrid {
    static G: OnceLock<RadialGrid> = OnceLock::new();
    G.get_or_init(RadialGrid::default_layout)
}

/// Strictly increasing nodes from positive gaps.
fn nodes(gaps: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0];
    for g in gaps {
        x.push(x.last().unwrap() + g);
    }
    x
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quadrature_is_linear(
        gaps in prop::collection::vec(0.01f64..0.5, 4..40),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let x = nodes(&gaps);
        let y: Vec<f64> = x.iter().map(|t| t.sin()).collect();
        let z: Vec<f64> = x.iter().map(|t| (-t).exp()).collect();
        let comb: Vec<f64> = y.iter().zip(&z).map(|(u, v)| a * u + b * v).collect();
        let lhs = integrate(&x, &comb);
        let rhs = a * integrate(&x, &y) + b * integrate(&x, &z);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn quadrature_exact_for_cubics(
        gaps in prop::collection::vec(0.01f64..0.5, 4..40),
        c in prop::array::uniform4(-2.0f64..2.0),
    ) {
        let x = nodes(&gaps);
        let y: Vec<f64> = x.iter().map(|t| c[0] + t * (c[1] + t * (c[2] + t * c[3]))).collect();
        let l = *x.last().unwrap();
        let exact = l * (c[0] + l * (c[1] / 2.0 + l * (c[2] / 3.0 + l * c[3] / 4.0)));
        prop_assert!((integrate(&x, &y) - exact).abs() <= 1e-10 * (1.0 + exact.abs()));
    }

    #[test]
    fn quadrature_is_monotone_on_ordered_linear_data(
        gaps in prop::collection::vec(0.01f64..0.5, 4..40),
        k in 0.0f64..2.0,
        shift in 0.0f64..1.0,
    ) {
        // Interpolants of linear data are exact, so ordering of data carries over.
        let x = nodes(&gaps);
        let y: Vec<f64> = x.iter().map(|t| k * t).collect();
        let z: Vec<f64> = y.iter().map(|v| v + shift).collect();
        prop_assert!(integrate(&x, &z) >= integrate(&x, &y));
    }

    #[test]
    fn compensated_sum_is_order_independent(v in prop::collection::vec(-1e6f64..1e6, 1..200)) {
        let fwd: CompensatedSum = v.iter().copied().collect();
        let rev: CompensatedSum = v.iter().rev().copied().collect();
        let scale: f64 = v.iter().map(|x| x.abs()).sum();
        prop_assert!((fwd.value() - rev.value()).abs() <= 4.0 * f64::EPSILON * scale);
    }

    #[test]
    fn csv_floats_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn config_canonical_form_is_a_fixed_point(n in 3usize..8, nodes in 500usize..5000, a in -2.0f64..2.0) {
        let c = RunConfig::from_text("", &[format!("run.n={n}"), format!("grid.nodes={nodes}"), format!("shoot.a={a:?}")]).unwrap();
        let text = c.canonical().lines().map(|l| {
            let (k, v) = l.split_once(" = ").unwrap();
            let (s, key) = k.split_once('.').unwrap();
            format!("[{s}]\n{key} = {v}\n")
        }).collect::<String>();
        let d = RunConfig::from_text(&text, &[]).unwrap();
        prop_assert_eq!(c.manifest_hash("x"), d.manifest_hash("x"));
        prop_assert_eq!(d.shoot_a, a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn shot_is_odd(a in 0.0f64..2.5, sphere in any::<bool>()) {
        let t = if sphere { Target::Sphere } else { Target::Hyperbolic };
        let a = if sphere { a } else { a * 0.15 };
        let o = ShootingOptions::default();
        let p = shoot(a, 3, t, grid(), o).unwrap();
        let q = shoot(-a, 3, t, grid(), o).unwrap();
        prop_assert_eq!(p.alpha_inf, -q.alpha_inf);
        for (x, y) in p.h.iter().zip(&q.h) {
            prop_assert!((x + y).abs() <= 1e-13);
        }
    }

    #[test]
    fn jacobi_matrix_is_symmetric_and_counts_are_monotone(a in -2.0f64..2.0, l1 in -5.0f64..20.0, l2 in -5.0f64..20.0) {
        let p = shoot(a, 3, Target::Sphere, grid(), ShootingOptions::default()).unwrap();
        let t = symmetrize(&build_operator(&p));
        prop_assert!(t.is_symmetric());
        let m = t.len();
        let u: Vec<f64> = (0..m).map(|i| (i as f64 * 0.37 + a).sin()).collect();
        let v: Vec<f64> = (0..m).map(|i| (i as f64 * 0.11 - a).cos()).collect();
        let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
        let (tu, tv) = (t.apply(&u), t.apply(&v));
        let scale = dot(&tu, &tu).sqrt() * dot(&v, &v).sqrt();
        prop_assert!((dot(&tu, &v) - dot(&u, &tv)).abs() <= 1e-12 * scale);
        let (lo, hi) = if l1 <= l2 { (l1, l2) } else { (l2, l1) };
        prop_assert!(t.count_below(lo) <= t.count_below(hi));
    }
}
