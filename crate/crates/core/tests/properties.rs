//! Property tests over randomly generated inputs.

use proptest::prelude::*;

use pdegen::dataio::FileName;
use pdegen::grid::march_snapshots;
use pdegen::initcond::solenoidal_projection;
use pdegen::inverse::{reconstruct_ic, IcParameterization};
use pdegen::metrics::{self, Batch, FrequencyBands, MetricReport};
use pdegen::pipeline::{GenerateConfig, Problem};
use pdegen::solvers::cns::{euler_flux, hllc_flux, Primitive, GAMMA};
use pdegen::solvers::diffreact::pes_logistic_step;
use pdegen::solvers::muscl::muscl_reconstruct;
use pdegen::{Grid, SeededRng, TimeAxis};

fn batch_pair(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(-10.0..10.0f64, n),
        prop::collection::vec(-10.0..10.0f64, n),
    )
}

fn one(shape: &[usize], data: Vec<f64>) -> Batch {
    Batch::new(1, 1, shape.to_vec(), 1, data).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rmse_is_a_symmetric_distance((a, b) in batch_pair(24)) {
        let (pa, pb) = (one(&[24], a.clone()), one(&[24], b));
        let ab = metrics::rmse(&pa, &pb).unwrap();
        prop_assert_eq!(ab, metrics::rmse(&pb, &pa).unwrap());
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(metrics::rmse(&pa, &pa).unwrap(), 0.0);
    }

    #[test]
    fn forward_metrics_are_finite_and_non_negative((a, b) in batch_pair(64)) {
        let r = metrics::forward_report(&one(&[8, 8], a), &one(&[8, 8], b), &FrequencyBands::default()).unwrap();
        for (_, v) in r.values() {
            prop_assert!(v.is_finite() && *v >= 0.0);
        }
    }

    #[test]
    fn bands_recompose_the_total_error((a, b) in batch_pair(40)) {
        // squared, pre-normalization band sums add up to N * rmse^2
        let (p, t) = (one(&[40], a), one(&[40], b));
        let bands = FrequencyBands::default();
        let k_nyq = metrics::nyquist_index(&[40]);
        let widths = [5.0, 8.0, (k_nyq + 1 - 13) as f64];
        let mut total = 0.0;
        for (band, w) in [bands.low, bands.mid, bands.high].into_iter().zip(widths) {
            total += (metrics::frmse(&p, &t, band).unwrap() * w).powi(2);
        }
        let r = metrics::rmse(&p, &t).unwrap();
        prop_assert!((total - 40.0 * r * r).abs() <= 1e-10 * total.max(1.0));
    }

    #[test]
    fn nrmse_is_invariant_under_joint_scaling((a, b) in batch_pair(16), s in 0.1..50.0f64) {
        let base = metrics::nrmse(&one(&[16], a.clone()), &one(&[16], b.clone())).unwrap();
        let scaled = metrics::nrmse(
            &one(&[16], a.iter().map(|v| v * s).collect()),
            &one(&[16], b.iter().map(|v| v * s).collect()),
        )
        .unwrap();
        prop_assert!((base - scaled).abs() <= 1e-12 * base.max(1.0));
    }

    #[test]
    fn report_survives_json(values in prop::collection::vec(-1e6..1e6f64, 1..8)) {
        let mut r = MetricReport::new();
        for (i, v) in values.iter().enumerate() {
            r.push(format!("m{i}"), *v);
        }
        r.set_meta("k", "v");
        prop_assert_eq!(MetricReport::from_json(&r.to_json()).unwrap(), r);
    }

    #[test]
    fn file_names_round_trip(pde in "[a-z][a-z0-9]{0,10}", params in "[a-z]{1,4}[0-9.]{1,5}", config in "[a-z0-9_]{1,12}") {
        let name = FileName::new(pde, params, config).unwrap();
        let text = name.to_string();
        prop_assert!(text.ends_with(".h5"));
        prop_assert_eq!(text.matches("--").count(), 2);
        prop_assert_eq!(FileName::parse(&text).unwrap(), name);
    }

    #[test]
    fn snapshots_land_exactly(t_end in 0.01..50.0f64, n in 2usize..40, dt in 1e-3..0.5f64) {
        let time = TimeAxis::new(0.0, t_end, n).unwrap();
        let mut seen = Vec::new();
        let mut clock = 0.0_f64;
        march_snapshots(
            &time,
            &mut clock,
            |_| Ok(dt),
            |c, t, h| { *c = t + h; Ok(()) },
            |c, _| { seen.push(*c); Ok(()) },
        )
        .unwrap();
        prop_assert_eq!(seen.len(), n);
        for (k, t) in seen.iter().enumerate() {
            let expect = k as f64 * t_end / (n - 1) as f64;
            prop_assert!((t - expect).abs() <= 1e-12 * t_end.max(1.0));
        }
    }

    #[test]
    fn pes_is_monotone_in_the_initial_value(u in 0.0..1.0f64, du in 0.0..0.5f64, rho in 0.0..20.0f64, dt in 0.0..1.0f64) {
        let v = (u + du).min(1.0);
        let (a, b) = (pes_logistic_step(u, rho, dt), pes_logistic_step(v, rho, dt));
        prop_assert!(a <= b + 1e-15);
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn hllc_is_consistent(rho in 0.05..5.0f64, vx in -3.0..3.0f64, vy in -3.0..3.0f64, p in 0.05..5.0f64, axis in 0usize..3) {
        let q = Primitive::new(rho, [vx, vy, 0.4], p);
        let f = hllc_flux(&q, &q, axis, GAMMA).unwrap();
        let exact = euler_flux(&q, axis, GAMMA);
        for k in 0..5 {
            prop_assert!((f[k] - exact[k]).abs() <= 1e-14 * exact[k].abs().max(1.0));
        }
    }

    #[test]
    fn muscl_faces_stay_between_neighbours(cells in prop::collection::vec(-5.0..5.0f64, 5..30)) {
        // face f: left state from padded cell f + 1, right state from f + 2
        let (left, right) = muscl_reconstruct(&cells);
        let bounds = |c: usize| {
            let w = &cells[c - 1..=c + 1];
            (w.iter().cloned().fold(f64::INFINITY, f64::min), w.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
        };
        for f in 0..left.len() {
            for (v, c) in [(left[f], f + 1), (right[f], f + 2)] {
                let (lo, hi) = bounds(c);
                prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
            }
        }
    }

    #[test]
    fn lattice_fit_inverts_reconstruction(values in prop::collection::vec(-3.0..3.0f64, 64), n in 64usize..200) {
        let g = Grid::line(0.0, 1.0, n).unwrap();
        let p = IcParameterization::with_values(&g, 1, values.clone()).unwrap();
        let back = IcParameterization::fit(&reconstruct_ic(&p)).unwrap();
        for (a, b) in back.values().iter().zip(&values) {
            prop_assert!((a - b).abs() < 1e-8);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn projection_is_idempotent(seed in 0u64..1000) {
        let g = Grid::cube(2, 0.0, 1.0, 16).unwrap();
        let mut rng = SeededRng::new(seed, 0);
        let mut comps: Vec<Vec<f64>> = (0..2)
            .map(|_| pdegen::initcond::normal_noise_ic(&mut rng, &g, 1).unwrap().into_values())
            .collect();
        solenoidal_projection(&g, &mut comps);
        let once = comps.clone();
        solenoidal_projection(&g, &mut comps);
        let norm: f64 = once.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
        let diff: f64 = once.iter().flatten().zip(comps.iter().flatten()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        prop_assert!(diff <= 1e-12 * norm);
    }

    #[test]
    fn generation_is_a_pure_function_of_the_seed(seed in 0u64..10_000, pde in prop::sample::select(vec!["advection", "burgers", "diffsorp", "darcy", "swe"])) {
        let timed = pdegen::pipeline::Pde::parse(pde).unwrap().time_dependent();
        let cfg = GenerateConfig {
            pde: pde.into(),
            ns: Some(16),
            nt: timed.then_some(3),
            t_end: timed.then_some(0.05),
            samples: 1,
            ..GenerateConfig::default()
        };
        let problem = Problem::new(&cfg.resolve().unwrap()[0]).unwrap();
        let a = problem.simulate(&mut SeededRng::new(seed, 3)).unwrap();
        let b = problem.simulate(&mut SeededRng::new(seed, 3)).unwrap();
        prop_assert_eq!(a, b);
    }
}
