use num_complex::Complex64 as C64;
use proptest::prelude::*;
use slfib::calibration_core::{big_omega, fiber_point_from_uv, imomega_residual, omega, omega_residual, TangentFrame};
use slfib::elliptic_engine::{solve_disc, BoundarySpec, DomainSpec};
use slfib::explicit_models::{explicit_f, explicit_fprime, na_oracle, na_point, NaModel};
use slfib::monodromy_graph::{
    duality_check, integer_kernel, standard_negative_vertex, standard_positive_vertex, IVec3,
};

fn c3() -> impl Strategy<Value = [C64; 3]> {
    prop::array::uniform6(-2.0..2.0f64).prop_map(|a| [C64::new(a[0], a[1]), C64::new(a[2], a[3]), C64::new(a[4], a[5])])
}

proptest! {
    #[test]
    fn oracle_solves_its_defining_system(a in -2.0..2.0f64, x in -1.5..1.5f64, y in -1.5..1.5f64) {
        prop_assume!(x.abs() > 1e-3 && y.abs() > 1e-3);
        let (u, v) = na_oracle(a, x, y).unwrap();
        let lhs = v * v + y * y;
        let rhs = (x * x + u * u + a.abs()).powi(2) - a * a;
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
        prop_assert!((u * v + x * y).abs() <= 1e-9 * (1.0 + (x * y).abs()));
        prop_assert_eq!(v.signum(), x.signum());
        prop_assert_eq!(u.signum(), -y.signum());
    }

    #[test]
    fn oracle_symmetries(a in -2.0..2.0f64, x in -1.5..1.5f64, y in -1.5..1.5f64) {
        let (u, v) = na_oracle(a, x, y).unwrap();
        let (u1, v1) = na_oracle(a, -x, y).unwrap();
        let (u2, v2) = na_oracle(a, x, -y).unwrap();
        let (u3, v3) = na_oracle(-a, x, y).unwrap();
        prop_assert!((u1 - u).abs() < 1e-12 && (v1 + v).abs() < 1e-12);
        prop_assert!((u2 + u).abs() < 1e-12 && (v2 - v).abs() < 1e-12);
        prop_assert!(u3 == u && v3 == v);
    }

    #[test]
    fn chart_points_lie_on_their_level(a in -2.0..2.0f64, x in -2.0..2.0f64, y in -2.0..2.0f64,
                                       u in -2.0..2.0f64, v in -2.0..2.0f64, phase in 0.0..7.0f64) {
        let p = fiber_point_from_uv(x, y, phase, a, u, v);
        let w = p.z1 * p.z2;
        prop_assert!((0.5 * (p.z1.norm_sqr() - p.z2.norm_sqr()) - a).abs() < 1e-11 * (1.0 + a.abs()));
        prop_assert!((w.re - v).abs() < 1e-11 && (w.im - y).abs() < 1e-11);
        prop_assert!(p.z3 == C64::new(x, u));
    }

    #[test]
    fn explicit_fibrations_invert_the_chart(a in -1.0..1.0f64, cr in -1.0..1.0f64, ci in -1.0..1.0f64,
                                            x in -1.0..1.0f64, y in -1.0..1.0f64, phase in 0.0..7.0f64) {
        prop_assume!(a.abs() > 1e-6);
        let c = C64::new(cr, ci);
        let p = na_point(&NaModel::new(a, c), x, y, phase).unwrap();
        let q = na_point(&NaModel::primed(a, c), x, y, phase).unwrap();
        let (f, g) = (explicit_f(&p), explicit_fprime(&q));
        prop_assert!((f.a - a).abs() < 1e-9 && (f.c - c).norm() < 1e-9);
        prop_assert!((g.a - a).abs() < 1e-9 && (g.c - c).norm() < 1e-9);
    }

    #[test]
    fn forms_are_alternating(e0 in c3(), e1 in c3(), e2 in c3()) {
        prop_assert!((omega(&e0, &e1) + omega(&e1, &e0)).abs() < 1e-12);
        let w = big_omega(&e0, &e1, &e2);
        prop_assert!((big_omega(&e1, &e0, &e2) + w).norm() < 1e-10);
        prop_assert!((big_omega(&e1, &e2, &e0) - w).norm() < 1e-10);
        prop_assert!((big_omega(&e2, &e1, &e0) + w).norm() < 1e-10);
    }

    #[test]
    fn residuals_ignore_frame_order(e0 in c3(), e1 in c3(), e2 in c3()) {
        let base = slfib::calibration_core::ComplexPoint3::new(e0[0], e0[1], e0[2]);
        let f = TangentFrame::new(base, e0, e1, e2);
        let g = TangentFrame::new(base, e2, e0, e1);
        match (omega_residual(&f), omega_residual(&g)) {
            (Ok(r), Ok(s)) => prop_assert!((r - s).abs() <= 1e-9 * (1.0 + r.abs())),
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "degeneracy depends on order"),
        }
        if let (Ok(r), Ok(s)) = (imomega_residual(&f), imomega_residual(&g)) {
            prop_assert!((r - s).abs() <= 1e-9 * (1.0 + r.abs()));
        }
    }

    #[test]
    fn vertex_products_are_trivial_in_every_order(p in 0usize..6, neg in any::<bool>()) {
        let orders = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let v = if neg { standard_negative_vertex() } else { standard_positive_vertex() };
        prop_assert!(v.with_order(orders[p]).product().is_identity());
        prop_assert!(duality_check(&standard_positive_vertex(), &standard_negative_vertex()));
    }

    #[test]
    fn integer_kernel_is_annihilated(rows in prop::collection::vec(prop::array::uniform3(-5i64..5), 1..4)) {
        let rows: Vec<IVec3> = rows;
        for k in integer_kernel(&rows) {
            prop_assert!(k.iter().any(|&c| c != 0));
            for r in &rows {
                prop_assert_eq!(r[0] * k[0] + r[1] * k[1] + r[2] * k[2], 0);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn disc_solve_commutes_with_reflection(alpha in -1.0..1.0f64, s2 in -0.5..0.5f64, a in 0.2..1.0f64) {
        let d = DomainSpec::disc(20);
        let phi = BoundarySpec::vhat(alpha).with_sin(2, s2);
        let f = solve_disc(&phi, a, &d).unwrap();
        let g = solve_disc(&phi.reflected(), a, &d).unwrap();
        for k in 0..d.node_count() {
            let m = d.reflect_index(k);
            prop_assert!((g.v[k] - f.v[m]).abs() < 1e-8);
            prop_assert!((g.u[k] + f.u[m]).abs() < 1e-8);
        }
    }

    #[test]
    fn disc_solve_is_odd(alpha in -1.0..1.0f64, c3 in -0.5..0.5f64, a in 0.2..1.0f64) {
        let d = DomainSpec::disc(20);
        let phi = BoundarySpec::vhat(alpha).with_cos(3, c3);
        let f = solve_disc(&phi, a, &d).unwrap();
        let g = solve_disc(&phi.add_scaled(&phi, -2.0), a, &d).unwrap();
        for k in 0..d.node_count() {
            prop_assert!((g.v[k] + f.v[k]).abs() < 1e-8 && (g.u[k] + f.u[k]).abs() < 1e-8);
        }
    }
}
