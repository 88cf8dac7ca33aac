//! Monte-Carlo and cross-route checks of estimator invariants.

use std::collections::BTreeMap;

use favar::config::{parse_entries, resolve};
use favar::identify::{
    cholesky_factor, identify_with_factor, task_rng, IdentifyConfig, Sign, SignConstraint, SignRestrictionSpec,
};
use favar::panel::ShockSeries;
use favar::synth::{simulate_var, write_fixture, FixtureSpec};
use favar::var::{estimate_block_restricted, estimate_var, granger_block_test, EstimationConfig, VarModel};
use nalgebra::{DMatrix, DVector};

fn three_var() -> VarModel {
    let a = DMatrix::from_row_slice(3, 3, &[0.5, 0.1, 0.0, -0.2, 0.3, 0.1, 0.0, 0.0, 0.6]);
    let mut sigma = DMatrix::identity(3, 3);
    sigma[(0, 1)] = 0.3;
    sigma[(1, 0)] = 0.3;
    VarModel::from_parts(&["a", "b", "tau"], DVector::from_column_slice(&[0.2, 0.0, -0.1]), vec![a], sigma)
}

#[test]
fn var_estimates_converge() {
    let truth = three_var();
    let ids = ["a", "b", "tau"];
    let mut errors = Vec::new();
    for (k, t) in [500usize, 5000].into_iter().enumerate() {
        let mut worst: f64 = 0.0;
        for rep in 0..20 {
            let mut rng = task_rng(100 + k as u64, rep);
            let data = simulate_var(&truth, None, t, 200, 1, &mut rng).unwrap();
            let fit = EstimationConfig::unrestricted(&ids, 1).fit(&data).unwrap();
            worst = worst.max((&fit.lag_coeffs[0] - &truth.lag_coeffs[0]).amax());
        }
        errors.push(worst);
    }
    assert!(errors[0] < 0.25, "T=500 error {}", errors[0]);
    assert!(errors[1] < 0.08, "T=5000 error {}", errors[1]);
    assert!(errors[1] < errors[0]);
}

#[test]
fn white_noise_lags_within_three_standard_errors() {
    let truth = VarModel::from_parts(&["u", "v"], DVector::zeros(2), vec![DMatrix::zeros(2, 2)], DMatrix::identity(2, 2));
    let runs = 400;
    let mut inside = 0;
    for rep in 0..runs {
        let mut rng = task_rng(7, rep);
        let data = simulate_var(&truth, None, 200, 100, 1, &mut rng).unwrap();
        let fit = EstimationConfig::unrestricted(&["u", "v"], 1).fit(&data).unwrap();
        let (a, se) = (&fit.lag_coeffs[0], &fit.lag_std_errors[0]);
        if a.iter().zip(se.iter()).all(|(c, s)| c.abs() <= 3.0 * s) {
            inside += 1;
        }
    }
    assert!(inside as f64 >= 0.95 * runs as f64, "{inside}/{runs}");
}

#[test]
fn block_fit_matches_exogenous_regressor_fit() {
    let truth = three_var().with_block_layout(&["tau"]);
    let mut rng = task_rng(3, 0);
    let data = simulate_var(&truth, None, 300, 100, 1, &mut rng).unwrap();
    for p in 1..=3 {
        let block = estimate_block_restricted(&data, &["a", "b"], &["tau"], p, false).unwrap();
        let tau = ShockSeries {
            shock_id: "tau_x".into(),
            time_index: data.time_index().to_vec(),
            values: data.column("tau").unwrap(),
            event_labels: BTreeMap::new(),
        };
        let y = data.select(&["a", "b"]).unwrap();
        let exog = estimate_var(&y, &["a", "b"], p, Some((std::slice::from_ref(&tau), p)), true).unwrap();
        for i in 0..2 {
            assert!((block.intercept[i] - exog.intercept[i]).abs() < 1e-10);
            for l in 0..p {
                for j in 0..2 {
                    assert!((block.lag_coeffs[l][(i, j)] - exog.lag_coeffs[l][(i, j)]).abs() < 1e-10);
                }
                assert!((block.lag_coeffs[l][(i, 2)] - exog.exog_coeffs[l][(i, 0)]).abs() < 1e-10);
            }
            assert!((&block.residuals.column(i) - &exog.residuals.column(i)).amax() < 1e-10);
        }
    }
}

#[test]
fn identified_set_ignores_factor_rotation() {
    let model = three_var();
    let l = cholesky_factor(&model.sigma).unwrap();
    let angle: f64 = 0.7;
    let (c, s) = (angle.cos(), angle.sin());
    // rotation in the (1,3) plane followed by a reflection of the 2nd axis
    let p = DMatrix::from_row_slice(3, 3, &[c, 0.0, -s, 0.0, -1.0, 0.0, s, 0.0, c]);
    let spec = SignRestrictionSpec::new(vec![
        SignConstraint { variable_id: "a".into(), sign: Sign::Positive, horizon_lo: 0, horizon_hi: 2 },
        SignConstraint { variable_id: "tau".into(), sign: Sign::Negative, horizon_lo: 0, horizon_hi: 0 },
    ])
    .unwrap();
    let n = 20_000;
    let cfg = IdentifyConfig::rejection(n, 4, 11);
    let a = identify_with_factor(&model, &l, &spec, &cfg).unwrap().acceptance_rate();
    let cfg = IdentifyConfig::rejection(n, 4, 12);
    let b = identify_with_factor(&model, &(&l * &p), &spec, &cfg).unwrap().acceptance_rate();
    let se = (a * (1.0 - a) * 2.0 / n as f64).sqrt();
    assert!((a - b).abs() < 4.0 * se, "{a} vs {b}");
}

#[test]
fn granger_test_has_nominal_size() {
    let truth = three_var().with_block_layout(&["tau"]);
    let runs = 400;
    let mut rejections = 0;
    for rep in 0..runs {
        let mut rng = task_rng(21, rep);
        let data = simulate_var(&truth, None, 200, 100, 1, &mut rng).unwrap();
        let (_, pv) = granger_block_test(&data, &["a", "b"], &["tau"], 1).unwrap();
        rejections += usize::from(pv < 0.05);
    }
    let rate = rejections as f64 / runs as f64;
    assert!((0.02..=0.09).contains(&rate), "rejection rate {rate}");
}

#[test]
fn config_hash_tracks_meaningful_fields() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_fixture(dir.path(), &FixtureSpec::default()).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let base = parse_entries(&text).unwrap();
    let hash = |edit: &dyn Fn(&mut BTreeMap<String, String>)| {
        let mut e = base.clone();
        edit(&mut e);
        resolve(&e, dir.path()).unwrap().hash()
    };
    let h0 = hash(&|_| {});
    assert_eq!(h0, hash(&|e| {
        e.insert("workers".into(), "1".into());
    }));
    assert_eq!(h0, hash(&|e| {
        e.insert("output.dir".into(), "elsewhere".into());
    }));
    assert_eq!(h0, hash(&|e| {
        e.insert("identification.penalty_weight".into(), "100".into());
    }));
    for (k, v) in [("seed", "999"), ("irf.horizon", "12"), ("identification.n_draws", "2001"), ("var.p", "2")] {
        assert_ne!(h0, hash(&|e| {
            e.insert(k.into(), v.into());
        }), "{k}");
    }
}
