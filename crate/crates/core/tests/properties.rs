use biquad_implicit::numeric::{tolerance_scale, DEFAULT_REL_TOL};
use biquad_implicit::{
    build_cayley_matrix, det_eval, emit_slp, evaluate_poly, expand_resultant, normalize_net, CayleyMatrix, ControlNet,
    DomainPoint, NormalizationTransform, Point3, QuadNet, StraightLineProgram, TriangleNet, TrivariatePoly,
};
use proptest::prelude::*;

fn point(r: f64) -> impl Strategy<Value = Point3> {
    (-r..r, -r..r, -r..r).prop_map(|(x, y, z)| Point3 { x, y, z })
}

// Regular layout plus bounded jitter keeps nets away from degenerate configurations.
fn triangle_net() -> impl Strategy<Value = ControlNet> {
    prop::collection::vec(point(0.2), 6).prop_map(|j| {
        let base = [(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 0.0), (0.5, 0.5, 0.3), (0.5, 0.0, -0.2), (0.0, 0.5, 0.25)];
        let p: Vec<Point3> = base.iter().zip(&j).map(|(&(x, y, z), d)| Point3 { x, y, z } + *d).collect();
        ControlNet::Triangle(TriangleNet::new(p[0], p[1], p[2], p[3], p[4], p[5]).unwrap())
    })
}

fn quad_net() -> impl Strategy<Value = ControlNet> {
    prop::collection::vec(point(0.2), 9).prop_map(|j| {
        let mut grid = [[Point3::ORIGIN; 3]; 3];
        for (i, row) in grid.iter_mut().enumerate() {
            for (k, p) in row.iter_mut().enumerate() {
                let h = if (i + k) % 2 == 0 { 0.2 } else { -0.15 };
                *p = Point3 { x: i as f64 * 0.5, y: k as f64 * 0.5, z: h } + j[3 * i + k];
            }
        }
        ControlNet::Quad(QuadNet::new(grid).unwrap())
    })
}

fn any_net() -> impl Strategy<Value = ControlNet> {
    prop_oneof![triangle_net(), quad_net()]
}

fn domain(net: &ControlNet, u: f64, v: f64) -> DomainPoint {
    let (u, v) = match net.kind() {
        biquad_implicit::PatchKind::Triangle => (u * (1.0 - v), v),
        biquad_implicit::PatchKind::Quad => (u, v),
    };
    DomainPoint::new(net.kind(), u, v).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn surface_points_vanish(net in any_net(), u in 0.0..1.0f64, v in 0.0..1.0f64) {
        let cm = build_cayley_matrix(&net).unwrap();
        let q = net.eval(domain(&net, u, v)).unwrap();
        prop_assert!(det_eval(&cm, q).abs() <= tolerance_scale(&cm, q, DEFAULT_REL_TOL));
    }

    #[test]
    fn expansion_matches_determinant(net in any_net(), q in point(2.0)) {
        let cm = build_cayley_matrix(&net).unwrap();
        let poly = expand_resultant(&cm).unwrap();
        let diff = (det_eval(&cm, q) - evaluate_poly(&poly, q)).abs();
        prop_assert!(diff <= 1e-9 * tolerance_scale(&cm, q, 1.0));
    }

    #[test]
    fn json_round_trips_are_exact(net in any_net(), q in point(2.0)) {
        let back = ControlNet::from_json(&net.to_json()).unwrap();
        prop_assert_eq!(&back, &net);

        let cm = build_cayley_matrix(&net).unwrap();
        let cm_back = CayleyMatrix::from_json(&cm.to_json()).unwrap();
        prop_assert_eq!(det_eval(&cm_back, q).to_bits(), det_eval(&cm, q).to_bits());

        let poly = expand_resultant(&cm).unwrap();
        let poly_back = TrivariatePoly::from_json(&poly.to_json()).unwrap();
        prop_assert_eq!(evaluate_poly(&poly_back, q).to_bits(), evaluate_poly(&poly, q).to_bits());

        let (_, t) = normalize_net(&net).unwrap();
        let t_back = NormalizationTransform::from_json(&t.to_json()).unwrap();
        prop_assert_eq!(t_back.to_normalized(q), t.to_normalized(q));
    }

    #[test]
    fn slp_text_reproduces_evaluation(net in any_net(), q in point(2.0)) {
        let poly = expand_resultant(&build_cayley_matrix(&net).unwrap()).unwrap();
        let prog = StraightLineProgram::parse(&emit_slp(&poly).to_text()).unwrap();
        prop_assert_eq!(prog.execute(q).to_bits(), evaluate_poly(&poly, q).to_bits());
    }

    #[test]
    fn evaluation_commutes_with_affine_maps(net in any_net(), shift in point(5.0), u in 0.0..1.0f64, v in 0.0..1.0f64) {
        let moved = net.map_points(|p| p * 1.5 + shift).unwrap();
        let d = domain(&net, u, v);
        let expect = net.eval(d).unwrap() * 1.5 + shift;
        prop_assert!(moved.eval(d).unwrap().distance(expect) <= 1e-12 * (1.0 + shift.norm()));
    }
}
