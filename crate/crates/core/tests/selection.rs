use proptest::prelude::*;
use voiforge_core::learn::{cv_auc, stratified_kfold, ModelKind};
use voiforge_core::rng::{seeded, standard_normal};
use voiforge_core::select::*;
use voiforge_core::{Error, FeatureTable};

/// Column 0 separates the classes; the rest is noise.
fn separable(n: usize, noise: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<u8>) {
    let mut rng = seeded(seed);
    let y: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
    let mut cols = vec![y.iter().map(|&l| f64::from(l) * 4.0 + standard_normal(&mut rng) * 0.3).collect::<Vec<_>>()];
    for _ in 0..noise {
        cols.push((0..n).map(|_| standard_normal(&mut rng)).collect());
    }
    (cols, y)
}

fn table(cols: &[Vec<f64>], y: &[u8]) -> FeatureTable {
    let n = y.len();
    let rows = (0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
    FeatureTable::new(
        (0..n).map(|i| format!("s{i:02}")).collect(),
        y.to_vec(),
        (0..cols.len()).map(|j| format!("f{j}")).collect(),
        rows,
    )
    .unwrap()
}

fn small_cfg() -> SelectionConfig {
    SelectionConfig { gini_trees: 50, ga_generations: 8, ..SelectionConfig::default() }
}

#[test]
fn every_method_finds_the_separating_feature() {
    let (cols, y) = separable(40, 5, 1);
    let folds = stratified_kfold(&y, 5, 0).unwrap();
    let cfg = small_cfg();
    for kind in ModelKind::ALL {
        for m in Method::ALL {
            let out = stage2_select(m, &cols, &y, &folds, &kind.default_spec(), &cfg).unwrap();
            assert_eq!(out.cv_auc, 1.0, "{m} / {kind}");
            assert!(out.features.contains(&0), "{m} / {kind}: {:?}", out.features);
        }
    }
}

#[test]
fn sfs_with_one_slot_is_best_single_feature() {
    let (cols, y) = separable(30, 4, 2);
    let folds = stratified_kfold(&y, 5, 0).unwrap();
    let cfg = SelectionConfig { max_features: 1, ..small_cfg() };
    let spec = ModelKind::Lda.default_spec();
    let out = stage2_select(Method::Sfs, &cols, &y, &folds, &spec, &cfg).unwrap();
    let rows = |j: usize| cols[j].iter().map(|&v| vec![v]).collect::<Vec<_>>();
    let single: Vec<f64> = (0..cols.len()).map(|j| cv_auc(&rows(j), &y, &folds, &spec).unwrap()).collect();
    let best = (0..single.len()).fold(0, |b, j| if single[j] > single[b] { j } else { b });
    assert_eq!(out.features, vec![best]);
}

#[test]
fn extreme_lasso_falls_back() {
    let (cols, y) = separable(30, 3, 3);
    let folds = stratified_kfold(&y, 5, 0).unwrap();
    let cfg = SelectionConfig { lasso_c_grid: vec![1e-6], ..small_cfg() };
    let out = stage2_select(Method::Lasso, &cols, &y, &folds, &ModelKind::Lr.default_spec(), &cfg).unwrap();
    assert!(out.fallback);
    assert_eq!(out.features, vec![0]);
}

#[test]
fn stochastic_selectors_are_reproducible() {
    let (cols, y) = separable(30, 6, 4);
    let folds = stratified_kfold(&y, 5, 0).unwrap();
    let cfg = small_cfg();
    for m in [Method::Ga, Method::Relief, Method::Gini] {
        let a = stage2_select(m, &cols, &y, &folds, &ModelKind::Lr.default_spec(), &cfg).unwrap();
        let b = stage2_select(m, &cols, &y, &folds, &ModelKind::Lr.default_spec(), &cfg).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn best_of_two_methods_on_separable_data() {
    let (cols, y) = separable(40, 4, 5);
    let t = table(&cols, &y);
    let cfg = SelectionConfig { methods: vec![Method::Sfs, Method::Lasso], ..small_cfg() };
    let r = select_best(&t, &cfg, &ModelKind::ALL).unwrap();
    assert_eq!(r.candidates.len(), 4);
    assert!(r.is_nested());
    assert_eq!(r.cv_auc, 1.0);
    for w in r.candidates.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        assert!(
            a.cv_auc > b.cv_auc
                || (a.cv_auc == b.cv_auc
                    && (a.features.len(), a.method.name(), a.classifier.name())
                        <= (b.features.len(), b.method.name(), b.classifier.name()))
        );
    }
    assert!(r.f_c.contains(&"f0".to_string()));
    assert_eq!(r.top(3).len(), 3);
}

#[test]
fn one_method_is_rejected() {
    let (cols, y) = separable(20, 2, 6);
    let cfg = SelectionConfig { methods: vec![Method::Sfs], ..small_cfg() };
    assert!(matches!(select_best(&table(&cols, &y), &cfg, &ModelKind::ALL), Err(Error::InvalidParameter(_))));
}

#[test]
fn duplicate_pair_keeps_one() {
    let (mut cols, y) = separable(40, 1, 7);
    cols.push(cols[0].clone());
    let folds = stratified_kfold(&y, 5, 0).unwrap();
    let (fb, _) = stage1_ufs(&cols, &y, 0.9, &folds).unwrap();
    assert_eq!(fb, vec![0, 1]);
}

#[test]
fn vacuous_cutoff_keeps_everything() {
    let (cols, y) = separable(30, 6, 8);
    let folds = stratified_kfold(&y, 5, 0).unwrap();
    let (fb, _) = stage1_ufs(&cols, &y, 1.0, &folds).unwrap();
    assert_eq!(fb, (0..7).collect::<Vec<_>>());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn stage1_ignores_monotone_transforms(seed in 0u64..1000, col in 0usize..5, r_c in 0.2f64..0.95) {
        let (mut cols, y) = separable(30, 4, seed);
        // correlated companions so the cutoff matters
        let c0 = cols[0].clone();
        cols.push(c0.iter().enumerate().map(|(i, v)| v + (i % 3) as f64 * 0.5).collect());
        let folds = stratified_kfold(&y, 5, seed).unwrap();
        let before = stage1_ufs(&cols, &y, r_c, &folds).unwrap().0;
        let mut moved = cols.clone();
        moved[col] = moved[col].iter().map(|v| (v * 0.5).exp() + 3.0).collect();
        let after = stage1_ufs(&moved, &y, r_c, &folds).unwrap().0;
        prop_assert_eq!(before, after);
    }
}
