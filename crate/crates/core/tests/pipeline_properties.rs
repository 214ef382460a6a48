mod common;

use std::collections::HashSet;

use graphterp::eval::{kfold_split, normalized_rmse, run_on, EvalMethod, ExperimentConfig, Sweep};
use graphterp::recsys::{
    bilateral_adjust, cosine_item_graph, predict_pairs, BilateralConfig, CosineMode, DatasetFormat, Method,
    PipelineConfig, UserContext, UserProblem, SolveParams,
};
use graphterp::{FilterMode, StoppingRule};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn predictions_stay_on_the_scale(seed in any::<u64>(), method in 0usize..4, centered in any::<bool>()) {
        let mut rng = common::rng(seed);
        let data = common::synthetic_ratings(&mut rng, 12, 15, 0.5);
        let g0 = cosine_item_graph(&data, CosineMode::ZeroFilled).unwrap();
        let pairs: Vec<(usize, usize)> = (0..12).flat_map(|u| (0..15).map(move |i| (u, i))).collect();
        let mut cfg = PipelineConfig { k: 5, ..PipelineConfig::default() };
        if !centered {
            cfg.centering = graphterp::recsys::Centering::None;
        }
        let (preds, _) = predict_pairs(&g0, &data, &pairs, Method::ALL[method], &cfg).unwrap();
        for p in preds {
            prop_assert!((1.0..=5.0).contains(&p), "{p}");
        }
    }

    #[test]
    fn bilateral_only_shrinks_known_links(
        g in common::arb_graph(30),
        ratings in proptest::collection::vec(proptest::option::of(1.0f64..5.0), 30),
        sigma in 0.1f64..4.0,
    ) {
        let known: Vec<(usize, f64)> =
            (0..g.num_vertices()).filter_map(|v| ratings[v].map(|r| (v, r))).collect();
        let is_known: HashSet<usize> = known.iter().map(|&(v, _)| v).collect();
        let out = bilateral_adjust(&g, &known, &BilateralConfig::new(sigma).unwrap()).unwrap();
        prop_assert_eq!(out.num_edges(), g.num_edges());
        for (i, j, w) in g.edges() {
            let adjusted = out.weight(i, j);
            prop_assert!(adjusted <= w);
            prop_assert_eq!(adjusted, out.weight(j, i));
            if !(is_known.contains(&i) && is_known.contains(&j)) {
                prop_assert_eq!(adjusted, w);
            }
        }
    }

    #[test]
    fn folds_partition_the_entries(seed in any::<u64>(), n in 5usize..200, k in 2usize..8) {
        let data = common::synthetic_ratings(&mut common::rng(seed), n, 1, 1.0);
        prop_assume!(data.len() >= k);
        let split = kfold_split(&data, k, seed).unwrap();
        let mut all: Vec<usize> = split.folds.concat();
        all.sort_unstable();
        prop_assert_eq!(all, (0..data.len()).collect::<Vec<_>>());
        let sizes = split.sizes();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }
}

#[test]
fn repeated_runs_are_bit_identical() {
    let data = common::synthetic_ratings(&mut common::rng(11), 30, 40, 0.3);
    let g0 = cosine_item_graph(&data, CosineMode::ZeroFilled).unwrap();
    let pairs: Vec<(usize, usize)> = (0..30).flat_map(|u| (0..40).step_by(3).map(move |i| (u, i))).collect();
    let cfg = PipelineConfig { k: 8, ..PipelineConfig::default() };
    for method in Method::ALL {
        let (a, _) = predict_pairs(&g0, &data, &pairs, method, &cfg).unwrap();
        let (b, _) = predict_pairs(&g0, &data, &pairs, method, &cfg).unwrap();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b), "{method}");
    }
}

#[test]
fn exact_and_iterative_band_limited_agree_per_user() {
    let mut rng = common::rng(5);
    let data = common::synthetic_ratings(&mut rng, 50, 60, 0.25);
    let split = kfold_split(&data, 5, 5).unwrap();
    let (train, test) = split.split(&data, 0);
    let g0 = cosine_item_graph(&train, CosineMode::ZeroFilled).unwrap();
    let by_user = train.by_user();
    let cfg = PipelineConfig { k: 10, ..PipelineConfig::default() };
    let params = SolveParams {
        alpha: cfg.alpha,
        beta: None,
        filter_mode: FilterMode::Ideal,
        stop: StoppingRule::new(200_000, 1e-8),
    };
    let mut users = 0;
    for u in 0..50 {
        let items: Vec<usize> = test.iter().filter(|e| e.user == u).map(|e| e.item).collect();
        if items.is_empty() || by_user[u].is_empty() {
            continue;
        }
        let ctx = UserContext::assemble(&g0, u, &by_user[u], &items, &cfg).unwrap();
        let mut problem = UserProblem::new(&ctx, cfg.centering, train.scale()).unwrap();
        let exact = problem.solve(Method::Lsr, &params).unwrap();
        let iterative = problem.solve(Method::Ilsr, &params).unwrap();
        assert!(!exact.fallback && !iterative.fallback, "user {u}");
        for (a, b) in exact.predictions.iter().zip(&iterative.predictions) {
            assert!((a - b).abs() <= 1e-4, "user {u}: {a} vs {b}");
        }
        users += 1;
    }
    assert!(users >= 40, "only {users} users had test items");
}

#[test]
fn report_matches_the_prediction_csv() {
    let data = common::synthetic_ratings(&mut common::rng(3), 25, 30, 0.4);
    let mut cfg = ExperimentConfig::new("synthetic", DatasetFormat::Movielens);
    cfg.k = 6;
    cfg.alpha = Sweep::Many(vec![0.05, 0.5]);
    cfg.sigma_r = Sweep::Many(vec![1.0, 2.0]);
    let out = run_on(&cfg, &data).unwrap();
    let mut csv = Vec::new();
    out.write_predictions_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();

    for v in &out.report.variants {
        for (f, expected) in v.fold_nrmse.iter().enumerate() {
            let (pred, truth): (Vec<f64>, Vec<f64>) = text
                .lines()
                .skip(1)
                .map(|l| l.split(',').collect::<Vec<_>>())
                .filter(|c| c[0] == (f + 1).to_string() && c[1] == v.name)
                .map(|c| (c[5].parse::<f64>().unwrap(), c[4].parse::<f64>().unwrap()))
                .unzip();
            let recomputed = normalized_rmse(&pred, &truth, data.scale()).unwrap();
            assert!((recomputed - expected).abs() <= 1e-12, "{} fold {}", v.name, f + 1);
        }
    }
    // each fold's graph saw exactly the entries outside the fold
    for fold in &out.report.folds {
        assert_eq!(fold.graph_entries, data.len() - fold.test_entries);
    }
    assert!(out.report.best(EvalMethod::Knn).is_some());
}
