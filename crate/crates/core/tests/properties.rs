use proptest::prelude::*;

use vgrad::diagnostics::*;
use vgrad::initial::*;
use vgrad::model::*;
use vgrad::spectral::*;

fn even_field(grid: Grid, coeffs: &[(i32, i32, f64)]) -> ScalarField {
    ScalarField::from_fn(grid, |x, y| {
        coeffs
            .iter()
            .map(|&(k, l, c)| c * (k as f64 * x + l as f64 * y).cos())
            .sum()
    })
}

fn modes() -> impl Strategy<Value = Vec<(i32, i32, f64)>> {
    prop::collection::vec(
        ((-5i32..=5), (1i32..=5), -1.0f64..1.0),
        1..6,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn velocity_is_divergence_free(m in modes(), alpha in 1.0f64..2.0) {
        let th = even_field(Grid::new(32).unwrap(), &m);
        let u = velocity_from_vorticity(&th, alpha).unwrap();
        prop_assert!(u.divergence_ratio() <= 1e-12);
    }

    #[test]
    fn rk4_step_keeps_parity_and_mean(m in modes()) {
        let th = even_field(Grid::new(32).unwrap(), &m);
        let st = SimState::new(th, 1.0).unwrap();
        let dt = admissible_dt(st.grid(), st.velocity().max_speed()) * 0.5;
        let next = step_rk4(&st, dt).unwrap();
        prop_assert!(next.theta().evenness_defect() <= 1e-10);
        prop_assert!(next.theta().mean().abs() <= 1e-12);
    }

    #[test]
    fn mollified_cross_is_even_bounded_and_mean_free(sigma in 0.2f64..0.49) {
        let c = mollified_cross(Grid::new(256).unwrap(), sigma).unwrap();
        prop_assert!(c.evenness_defect() <= 1e-12);
        prop_assert!(c.sup_norm() <= 1.0 + 1e-12);
        prop_assert!(c.mean().abs() <= MEAN_TOLERANCE);
    }

    #[test]
    fn interface_layer_is_even_and_mean_free(tau in 0.05f64..0.45) {
        let p = displaced_interface_layer(Grid::new(256).unwrap(), tau).unwrap();
        prop_assert!(p.evenness_defect() <= 1e-12);
        prop_assert!(p.mean().abs() <= 1e-12);
    }

    #[test]
    fn fit_recovers_rate(a in 0.2f64..3.0, c in 0.1f64..2.0) {
        let ts: Vec<f64> = (0..40).map(|k| k as f64 * 0.025).collect();
        let s = DiagnosticSeries::from_fn("y", &ts, |t| (-(c * (a * t).exp())).exp()).unwrap();
        let (_, f) = fit_double_exponential(&s, None).unwrap();
        prop_assert!((f.slope - a).abs() <= 1e-8 * a.max(1.0));
        prop_assert!(f.r_squared >= 1.0 - 1e-12);
    }

    #[test]
    fn envelope_constant_never_drops_with_longer_window(
        bumps in prop::collection::vec(0.0f64..3.0, 20),
        cut in 2usize..19,
    ) {
        let samples: Vec<(f64, f64)> = bumps
            .iter()
            .enumerate()
            .map(|(k, &b)| (k as f64 * 0.1, 1.0 + b))
            .collect();
        let s = DiagnosticSeries::from_samples("g", samples).unwrap();
        let base = BaseNorms { initial: 1.0, sup_theta: 1.0 };
        for kind in [EnvelopeKind::Lipschitz, EnvelopeKind::H2, EnvelopeKind::Exponential] {
            let short = envelope_check(&s.window(0.0, cut as f64 * 0.1), kind, base).unwrap();
            let long = envelope_check(&s, kind, base).unwrap();
            prop_assert!(long.fitted_c >= short.fitted_c);
        }
    }

    #[test]
    fn rigid_motion_keeps_area_and_length(
        r in 0.01f64..1.0, cx in -2.0f64..2.0, cy in -2.0f64..2.0, angle in 0.0f64..6.3,
    ) {
        let circle = circle_polyline((0.0, 0.0), r, 96);
        let (s, c) = angle.sin_cos();
        let moved: Vec<Point> = circle.iter().map(|&(x, y)| (cx + c * x - s * y, cy + s * x + c * y)).collect();
        let (a0, a1) = (polygon_area(&circle), polygon_area(&moved));
        prop_assert!((a0 - a1).abs() <= 1e-12 * a0.abs());
        let (l0, l1) = (polyline_length(&circle), polyline_length(&moved));
        prop_assert!((l0 - l1).abs() <= 1e-12 * l0);
    }

    #[test]
    fn leading_model_flow_matches_closed_form(beta in 1e-3f64..0.5, t in 0.1f64..1.0) {
        let region = AlephRegion::new(1e-300, 0.9).unwrap();
        let opts = IntegrationOptions { dt: 1e-3, ..Default::default() };
        let tr = integrate_trajectory((1e-6, beta), t, &Perturbation::zero(), &CrossFieldVariant::leading(), &region, &opts).unwrap();
        let exact = beta.powf(t.exp());
        prop_assert!((tr.last().y - exact).abs() <= 1e-9 * exact);
    }

    #[test]
    fn faithful_ladder_meets_every_check(horizon in 0.3f64..3.0, lambda in 2.0f64..50.0) {
        let l = resolve_ladder(horizon, lambda, LadderMode::Faithful).unwrap();
        for c in l.checks() {
            prop_assert!(c.satisfied(), "{c:?}");
        }
        prop_assert_eq!(ParameterLadder::from_kv(&l.to_kv()).unwrap(), l);
    }

    // the relaxed floor leaves no admissible eps2 much beyond T = 1.5
    #[test]
    fn relaxed_ladder_round_trips(horizon in 0.3f64..1.5, lambda in 2.0f64..50.0) {
        let l = resolve_ladder(horizon, lambda, LadderMode::Relaxed).unwrap();
        prop_assert_eq!(ParameterLadder::from_kv(&l.to_kv()).unwrap(), l);
    }

    #[test]
    fn report_round_trips(
        rows in prop::collection::vec(("[a-z][a-z ]{0,8}[a-z]", "[a-z-]{1,8}", -1e6f64..1e6, any::<bool>()), 1..6)
    ) {
        let mut r = CheckReport::new();
        for (name, tag, v, ok) in rows {
            r.push(CheckRow::new(name, tag, v, "<= 1", ok));
        }
        prop_assert_eq!(CheckReport::parse(&r.render()).unwrap(), r);
    }

    #[test]
    fn snapshot_round_trips(m in modes(), alpha in 1.0f64..2.0) {
        let st = SimState::new(even_field(Grid::new(16).unwrap(), &m), alpha).unwrap();
        let back = Snapshot::from_bytes(&Snapshot::from_state(&st).to_bytes()).unwrap().into_state().unwrap();
        prop_assert_eq!(back.theta().values(), st.theta().values());
        prop_assert_eq!(back.alpha_exponent(), alpha);
    }
}
