mod common;

use bcl_core::curriculum::{train_with_curriculum, CurriculumConfig, PacingKind, TrainingBudget};
use bcl_core::detectors::{anomaly_score, train_plain, DetectorInput, DetectorKind, DetectorModel};
use bcl_core::difficulty::{compute_bds, gae_train, rank_nodes, BdsNorm, GaeConfig};
use bcl_core::graph::{make_split, normalize_adjacency, AttributedGraph, SplitRatios};
use bcl_core::metrics::roc_auc;
use bcl_core::numerics::DenseMatrix;

fn setup(g: &AttributedGraph, seed: u64) -> (DetectorInput, bcl_core::graph::NodeSplit) {
    let adj = normalize_adjacency(g);
    let split = make_split(g, SplitRatios::default(), seed).unwrap();
    (DetectorInput::new(g, &adj).unwrap(), split)
}

#[test]
fn lambda0_one_matches_plain_training() {
    let g = common::two_block(80, 6, 4);
    let (input, split) = setup(&g, 1);
    let mut reversed: Vec<usize> = (0..g.num_nodes()).collect();
    reversed.reverse();
    let budget = TrainingBudget {
        max_epochs: 40,
        ..TrainingBudget::default()
    };
    for kind in DetectorKind::ALL {
        let init = DetectorModel::init(kind, 6, 8, 9).unwrap();
        let plain = train_plain(init.clone(), &input, g.labels(), &split, &budget).unwrap();
        let cfg = CurriculumConfig {
            pacing: PacingKind::Root,
            lambda0: 1.0,
            t_max: 25,
        };
        let cur = train_with_curriculum(init, &input, g.labels(), &split, &reversed, &cfg, &budget).unwrap();
        assert_eq!(plain.model, cur.model, "{kind}");
        assert_eq!(plain.log.len(), cur.log.len());
        for (a, b) in plain.log.iter().zip(&cur.log) {
            assert_eq!(a.loss.to_bits(), b.loss.to_bits());
            assert_eq!(a.val_auc.to_bits(), b.val_auc.to_bits());
        }
    }
}

#[test]
fn linear_subset_sizes_grow_from_half_to_full() {
    let g = common::two_block(100, 4, 2);
    let (input, split) = setup(&g, 0);
    assert_eq!(split.train.len(), 40);
    let cfg = CurriculumConfig {
        pacing: PacingKind::Linear,
        lambda0: 0.5,
        t_max: 10,
    };
    let budget = TrainingBudget {
        max_epochs: 15,
        patience: 100,
        ..TrainingBudget::default()
    };
    let ordering: Vec<usize> = (0..100).collect();
    let model = DetectorModel::init(DetectorKind::Gcn, 4, 8, 0).unwrap();
    let out = train_with_curriculum(model, &input, g.labels(), &split, &ordering, &cfg, &budget).unwrap();
    let sizes: Vec<usize> = out.log.iter().map(|e| e.subset_size).collect();
    let expected: Vec<usize> = (0..15).map(|t| if t >= 10 { 40 } else { 20 + 2 * t }).collect();
    assert_eq!(sizes, expected);
    assert!(sizes.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn curriculum_run_terminates_with_finite_parameters() {
    let g = common::two_block(120, 8, 7);
    let (input, split) = setup(&g, 3);
    let adj = normalize_adjacency(&g);
    let gae = gae_train(&g, &adj, &GaeConfig::default().clipped_to(8), 1).unwrap();
    let bds = compute_bds(&gae.model.embed(&g, &adj).unwrap(), BdsNorm::L1).unwrap();
    let ranking = rank_nodes(&bds).unwrap();
    let budget = TrainingBudget::default();
    let cfg = CurriculumConfig {
        pacing: PacingKind::Geometric,
        lambda0: 0.3,
        t_max: 50,
    };
    let model = DetectorModel::init(DetectorKind::Gcn, 8, 16, 5).unwrap();
    let out = train_with_curriculum(model, &input, g.labels(), &split, &ranking.q_homo, &cfg, &budget).unwrap();
    assert!(out.log.len() <= budget.max_epochs);
    assert!(out.log.len() > cfg.t_max);
    assert!(out.model.params().iter().all(|(_, p)| p.value.is_finite()));
    assert!(out.best_val_auc.is_some());
    assert!((1..=out.log.len()).contains(&out.best_epoch));
}

#[test]
fn zero_epochs_returns_the_initial_model() {
    let g = common::two_block(60, 4, 1);
    let (input, split) = setup(&g, 0);
    let init = DetectorModel::init(DetectorKind::Sage, 4, 8, 2).unwrap();
    let budget = TrainingBudget {
        max_epochs: 0,
        ..TrainingBudget::default()
    };
    let out = train_plain(init.clone(), &input, g.labels(), &split, &budget).unwrap();
    assert_eq!(out.model, init);
    assert!(out.log.is_empty());
    assert_eq!(out.best_val_auc, None);
}

#[test]
fn separable_features_reach_high_train_auc() {
    // anomalies carry +2 on feature 0, normals -2, plus noise on the rest
    let base = common::random_graph(120, 5, 0.05, 11);
    let mut x = base.features().clone();
    for i in 0..120 {
        x.set(i, 0, if base.labels()[i] { 2.0 } else { -2.0 });
    }
    let g = AttributedGraph::new(base.edges().to_vec(), x, base.labels().to_vec()).unwrap();
    let (input, split) = setup(&g, 2);
    for kind in DetectorKind::ALL {
        let model = DetectorModel::init(kind, 5, 16, 3).unwrap();
        let out = train_plain(model, &input, g.labels(), &split, &TrainingBudget::default()).unwrap();
        let scores = anomaly_score(&out.model.forward(&input).unwrap()).unwrap();
        let s: Vec<f64> = split.train.iter().map(|&i| scores[i]).collect();
        let y: Vec<bool> = split.train.iter().map(|&i| g.labels()[i]).collect();
        let auc = roc_auc(&s, &y).unwrap();
        assert!(auc > 0.95, "{kind}: train auc {auc}");
    }
}

#[test]
fn zero_weights_give_even_odds() {
    let g = common::random_graph(10, 3, 0.3, 0);
    let adj = normalize_adjacency(&g);
    let input = DetectorInput::new(&g, &adj).unwrap();
    for kind in DetectorKind::ALL {
        let mut m = DetectorModel::init(kind, 3, 4, 0).unwrap();
        for name in m.params().names() {
            let v = m.params_mut().value_mut(&name).unwrap();
            *v = DenseMatrix::zeros(v.rows(), v.cols());
        }
        let s = anomaly_score(&m.forward(&input).unwrap()).unwrap();
        assert!(s.iter().all(|&p| p == 0.5));
    }
}
