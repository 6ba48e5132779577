//! Acceptance suite. Prints one PASS/FAIL line per criterion and fails if
//! any criterion outside `KNOWN_GAPS` fails.

#[path = "../../core/tests/oracles/mod.rs"]
mod oracles;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::Rng as _;
use voiforge::dataset::load_subjects;
use voiforge::phantom::{PhantomSpec, PlantedSignal};
use voiforge::{ExperimentConfig, Pipeline, Scenario};
use voiforge_core::features::{
    discretize, extract_all, extract_firstorder, extract_glcm, extract_shape, feature_class, feature_names,
    glcm_matrices, gldm_matrix, glrlm_matrices, glszm_matrix, DiscretizedRoi, ExtractConfig, CLASSES, DIRECTIONS,
    FIRSTORDER_NAMES, GLCM_NAMES, SHAPE_NAMES,
};
use voiforge_core::grid::{Geometry, ImageVolume, Mask};
use voiforge_core::learn::stratified_kfold;
use voiforge_core::morph::{dilate, erode, make_spherical_kernel};
use voiforge_core::perturb::Modification;
use voiforge_core::rng::{seeded, standard_normal};
use voiforge_core::robust::{delta_auc, icc, proportion_above, robustness_report, Group, IccModel};
use voiforge_core::select::{stage1_subset, stage1_ufs, univariate_score};
use voiforge_core::FeatureTable;

/// Criteria expected to fail; each is explained in the decision ledger.
const KNOWN_GAPS: &[&str] = &["analytic phantoms"];

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(name: &'static str, pass: bool, detail: String) -> Outcome {
    let line = format!("{} {name}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    // bypass the test harness capture so the lines reach the log
    let _ = std::io::stderr().write_all(line.as_bytes());
    Outcome { name, pass, detail }
}

fn cube(n: usize) -> Geometry {
    Geometry::new([n; 3], [1.0; 3], [0.0; 3]).unwrap()
}

fn morphology_oracle() -> Outcome {
    let t = Instant::now();
    let mut rng = seeded(11);
    let g = cube(8);
    let mut mismatches = 0;
    for r in [1.0, 2.0] {
        let k = make_spherical_kernel(r, [1.0; 3]).unwrap();
        for _ in 0..100 {
            let fill = rng.random_range(0.1..0.7);
            let data: Vec<bool> = (0..g.len()).map(|_| rng.random_bool(fill)).collect();
            let m = Mask::new(g, data.clone()).unwrap();
            if dilate(&m, &k).unwrap().data() != oracles::dilate(g.dims, &data, &k.offsets).as_slice() {
                mismatches += 1;
            }
            if erode(&m, &k).unwrap().data() != oracles::erode(g.dims, &data, &k.offsets).as_slice() {
                mismatches += 1;
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        "morphology oracle",
        mismatches == 0 && secs < 10.0,
        format!("{mismatches} mismatches over 400 comparisons, {secs:.2} s"),
    )
}

fn texture_oracle() -> Outcome {
    let t = Instant::now();
    let mut rng = seeded(12);
    let mut mismatches = 0;
    let mut rois = 0;
    while rois < 50 {
        let cap = rng.random_range(1..=4u16);
        let levels: Vec<u16> = (0..125).map(|_| rng.random_range(0..=4u16).min(cap)).collect();
        let Ok(roi) = DiscretizedRoi::from_levels([5; 3], levels) else { continue };
        rois += 1;
        let v = oracles::voxels(roi.dims, &roi.levels);
        let ng = roi.max_level();
        for (d, (m, r)) in DIRECTIONS.iter().zip(glcm_matrices(&roi).iter().zip(glrlm_matrices(&roi))) {
            let d = [d[0] as i64, d[1] as i64, d[2] as i64];
            mismatches += usize::from(*m != oracles::glcm(&v, d, ng));
            mismatches += usize::from(r != oracles::glrlm(&v, d));
        }
        mismatches += usize::from(glszm_matrix(&roi) != oracles::glszm(&v));
        mismatches += usize::from(gldm_matrix(&roi) != oracles::gldm(&v));
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        "texture oracle",
        mismatches == 0 && secs < 30.0,
        format!("{mismatches} mismatching matrices over {rois} ROIs, {secs:.2} s"),
    )
}

fn census() -> Outcome {
    let g = cube(12);
    let mut rng = seeded(13);
    let img = ImageVolume::new(g, (0..g.len()).map(|_| rng.random_range(0.0..10.0)).collect()).unwrap();
    let mask = Mask::new(g, (0..g.len()).map(|i| (0..3).all(|a| (3..9).contains(&g.coords(i)[a]))).collect()).unwrap();
    let v = extract_all(&img, &mask, &ExtractConfig { bin_count: 100 }).unwrap();
    let names = feature_names();
    let counts: Vec<usize> =
        CLASSES.iter().map(|(c, _)| names.iter().filter(|n| feature_class(n) == *c).count()).collect();
    let expected: Vec<usize> = CLASSES.iter().map(|(_, n)| *n).collect();
    let ngtdm = names.iter().any(|n| n.to_lowercase().contains("ngtdm"));
    outcome(
        "feature census",
        v.0.len() == 102 && names.len() == 102 && counts == [14, 18, 24, 16, 16, 14] && counts == expected && !ngtdm,
        format!("{} values, class counts {counts:?}, ngtdm present: {ngtdm}", v.0.len()),
    )
}

fn analytic_phantoms() -> Outcome {
    let g = cube(21);
    let c = 10.0;
    let ball = Mask::new(
        g,
        (0..g.len())
            .map(|i| {
                let p = g.position(g.coords(i));
                (0..3).map(|a| (p[a] - c).powi(2)).sum::<f64>() <= 64.0
            })
            .collect(),
    )
    .unwrap();
    let shape = extract_shape(&ball).unwrap();
    let get = |names: &[&str], vals: &[f64], n: &str| vals[names.iter().position(|x| *x == n).unwrap()];
    let sphericity = get(&SHAPE_NAMES, &shape, "shape_Sphericity");
    let volume = get(&SHAPE_NAMES, &shape, "shape_VoxelVolume");
    let exact = 4.0 / 3.0 * std::f64::consts::PI * 512.0;
    let vol_err = (volume - exact).abs() / exact;

    let img = ImageVolume::new(g, vec![5.0; g.len()]).unwrap();
    let roi = discretize(&img, &ball, 100).unwrap();
    let fo = extract_firstorder(&roi);
    let glcm = extract_glcm(&roi).unwrap();
    let variance = get(&FIRSTORDER_NAMES, &fo, "firstorder_Variance");
    let entropy = get(&FIRSTORDER_NAMES, &fo, "firstorder_Entropy");
    let contrast = get(&GLCM_NAMES, &glcm, "glcm_Contrast");
    let pass = (0.95..=1.0).contains(&sphericity)
        && vol_err < 0.05
        && variance == 0.0
        && entropy == 0.0
        && contrast == 0.0;
    outcome(
        "analytic phantoms",
        pass,
        format!(
            "sphericity {sphericity:.4} (want [0.95, 1]), volume error {:.2}%, constant ROI variance {variance}, entropy {entropy}, contrast {contrast}",
            100.0 * vol_err
        ),
    )
}

fn icc_oracle(phantom_table: &FeatureTable) -> Outcome {
    let mut rng = seeded(14);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.random_range(3..30);
        let spread = rng.random_range(0.0..3.0);
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let b: Vec<f64> = a.iter().map(|x| x + 0.4 + spread * standard_normal(&mut rng)).collect();
        let rows: Vec<Vec<f64>> = a.iter().zip(&b).map(|(x, y)| vec![*x, *y]).collect();
        let got = icc(&a, &b, IccModel::ConsistencyC31).unwrap();
        worst = worst.max((got - oracles::icc31(&rows)).abs());
    }
    let id = robustness_report(phantom_table, phantom_table, "none", IccModel::ConsistencyC31).unwrap();
    let all_one = id.entries.iter().all(|e| e.icc == 1.0);
    let props: Vec<f64> =
        Group::ALL.iter().map(|&g| proportion_above(&id, 0.9, g).unwrap().percent).collect();
    outcome(
        "ICC oracle",
        worst < 1e-9 && all_one && props.iter().all(|p| *p == 100.0),
        format!("max deviation {worst:.1e} over 1000 instances; identity all ICC = 1: {all_one}; proportions {props:?}"),
    )
}

fn delta_auc_check() -> Outcome {
    let a = (delta_auc(0.96, 0.72).unwrap() * 100.0).round() / 100.0;
    let b = (delta_auc(0.96, 0.88).unwrap() * 100.0).round() / 100.0;
    outcome("delta AUC", a == -25.0 && b == -8.33, format!("(0.96, 0.72) -> {a:.2}, (0.96, 0.88) -> {b:.2}"))
}

/// Feature values ordering subjects so that exactly `swaps` (negative,
/// positive) pairs are inverted, starting from perfect separation.
fn ranked_feature(neg: usize, pos: usize, swaps: usize) -> Vec<f64> {
    let mut order: Vec<usize> = (0..neg + pos).collect();
    let mut done = 0;
    'outer: while done < swaps {
        for p in (0..order.len() - 1).rev() {
            if order[p] < neg && order[p + 1] >= neg {
                order.swap(p, p + 1);
                done += 1;
                continue 'outer;
            }
        }
        break;
    }
    let mut value = vec![0.0; order.len()];
    for (rank, &s) in order.iter().enumerate() {
        value[s] = rank as f64;
    }
    value
}

fn algorithm1_traces() -> Outcome {
    let n = 40;
    let mut rng = seeded(15);
    let y: Vec<u8> = (0..n).map(|i| u8::from(i % 2 == 1)).collect();
    let informative: Vec<f64> = y.iter().map(|&l| f64::from(l) * 2.0 + standard_normal(&mut rng)).collect();
    let z: Vec<f64> = (0..n).map(|_| standard_normal(&mut rng)).collect();
    let folds = stratified_kfold(&y, 5, 3).unwrap();

    let dup = vec![informative.clone(), informative.clone(), z.clone()];
    let (fb_dup, _) = stage1_ufs(&dup, &y, 0.9, &folds).unwrap();
    let dup_ok = fb_dup.contains(&2) && fb_dup.iter().filter(|&&j| j < 2).count() == 1;

    let free: Vec<Vec<f64>> = (0..6).map(|_| (0..n).map(|_| standard_normal(&mut rng)).collect()).collect();
    let (fb_free, _) = stage1_ufs(&free, &y, 1.0, &folds).unwrap();
    let vacuous_ok = fb_free == (0..6).collect::<Vec<_>>();

    // 20 subjects, 100 (neg, pos) pairs: 10 inversions lower the AUC by 0.1
    let yc: Vec<u8> = (0..20).map(|i| u8::from(i >= 10)).collect();
    let mut zc: Vec<f64> = (0..20).map(|i| ((i * 7) % 20) as f64).collect();
    zc.swap(0, 13);
    let cluster = vec![ranked_feature(10, 10, 30), ranked_feature(10, 10, 10), ranked_feature(10, 10, 20), zc];
    let scores: Vec<f64> = cluster[..3].iter().map(|c| univariate_score(c, &yc).unwrap()).collect();
    let d = stage1_subset(&cluster, &yc, 0.8).unwrap();
    let cluster_ok = d.correlated == [0, 1, 2] && d.kept == [1, 3];

    outcome(
        "stage I traces",
        dup_ok && vacuous_ok && cluster_ok,
        format!(
            "duplicate pair f_B {fb_dup:?}; r_c = 1 f_B {fb_free:?}; cluster scores {scores:.2?} -> correlated {:?}, kept {:?}",
            d.correlated, d.kept
        ),
    )
}

fn quick_config(spec: PhantomSpec) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::for_phantom(spec, std::env::temp_dir().join("voiforge-acceptance"));
    cfg.modifications = Vec::new();
    cfg.scenarios = vec![Scenario::FixedModel];
    cfg.seed = 5;
    cfg
}

fn separable_table(seed: u64) -> FeatureTable {
    let mut rng = seeded(seed);
    let names: Vec<String> = feature_names().into_iter().map(String::from).collect();
    let labels: Vec<u8> = (0..60).map(|i| u8::from(i % 2 == 0)).collect();
    let informative = [17usize, 60];
    let rows = labels
        .iter()
        .map(|&l| {
            (0..names.len())
                .map(|j| {
                    let shift = if informative.contains(&j) { 3.0 * f64::from(l) } else { 0.0 };
                    shift + standard_normal(&mut rng)
                })
                .collect()
        })
        .collect();
    FeatureTable::new((0..60).map(|i| format!("S{i:02}")).collect(), labels, names, rows).unwrap()
}

fn learning_sanity() -> Outcome {
    let t = Instant::now();
    let cfg = quick_config(PhantomSpec::default());
    let rec = Pipeline::default().run_tables(&cfg, vec![(Modification::None, separable_table(16))], Vec::new()).unwrap();
    let best = &rec.baseline.top[0];
    let secs = t.elapsed().as_secs_f64();

    let mut null_aucs = Vec::new();
    for seed in 0..10 {
        let spec = PhantomSpec { seed: 100 + seed, signal: PlantedSignal::default(), ..PhantomSpec::default() };
        let mut cfg = quick_config(spec);
        cfg.seed = seed;
        let subjects = load_subjects(&cfg).unwrap();
        let r = Pipeline::default().run(&cfg, &subjects).unwrap();
        null_aucs.push(r.baseline.top[0].test.auc.mean);
    }
    let null_mean = null_aucs.iter().sum::<f64>() / null_aucs.len() as f64;
    outcome(
        "learning sanity",
        best.test.auc.mean >= 0.9 && secs < 300.0 && (0.35..=0.65).contains(&null_mean),
        format!(
            "separable: {} + {} on {:?}, test AUC {:.3} in {secs:.1} s; null phantoms mean test AUC {null_mean:.3} ({:.2?})",
            best.method, best.classifier, best.features, best.test.auc.mean, null_aucs
        ),
    )
}

fn robustness_ordering() -> (Outcome, FeatureTable) {
    let mods = [Modification::Smooth1, Modification::Erode1, Modification::Dilate2, Modification::Ellipsoid];
    let mut icc_sum = [0.0; 4];
    let mut delta_sum = [0.0; 4];
    let mut first_table = None;
    let cohorts = 10;
    for k in 0..cohorts {
        let spec = PhantomSpec {
            seed: 200 + k,
            signal: PlantedSignal { lobulation: 2.0, ..PlantedSignal::default() },
            ..PhantomSpec::default()
        };
        let mut cfg = quick_config(spec);
        cfg.modifications = mods.to_vec();
        cfg.seed = k;
        let subjects = load_subjects(&cfg).unwrap();
        let rec = Pipeline::default().run(&cfg, &subjects).unwrap();
        for (i, m) in mods.iter().enumerate() {
            let row = rec.robustness.iter().find(|r| r.modification == *m).unwrap();
            icc_sum[i] += proportion_above(&row.icc, 0.9, Group::All).unwrap().percent;
            let fixed = rec.fixed_model.as_ref().unwrap();
            delta_sum[i] += fixed.rows.iter().find(|r| r.modification == *m).unwrap().test_delta.abs();
        }
        first_table.get_or_insert_with(|| rec.tables[0].1.clone());
    }
    let icc_mean = icc_sum.map(|s| s / cohorts as f64);
    let delta_mean = delta_sum.map(|s| s / cohorts as f64);
    let ordered = icc_mean[0] >= icc_mean[1] && icc_mean[1] >= icc_mean[2] && icc_mean[2] >= icc_mean[3];
    let degrade = [delta_mean[2], delta_mean[3]].iter().all(|&hi| hi > delta_mean[0] && hi > delta_mean[1]);
    let o = outcome(
        "robustness ordering",
        ordered && degrade,
        format!(
            "ICC > 0.9 % (smooth1, erode1, dilate2, ellipsoid) = {icc_mean:.1?}; mean |test delta AUC| = {delta_mean:.1?}"
        ),
    );
    (o, first_table.unwrap())
}

fn read_tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().display().to_string(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("exp.json");
    std::fs::write(
        &config,
        r#"{
  "schema_version": 1,
  "phantom": {"n_subjects": 24, "dims": [28, 28, 28], "radius_mm": 6, "signal": {"intensity": 1.5}, "seed": 3},
  "modifications": ["dilate1", "rand1", "ellipsoid"],
  "output_dir": "out",
  "seed": 9,
  "tuning_budget": 8,
  "selection": {"gini_trees": 20, "ga_generations": 5, "ga_population": 10}
}"#,
    )
    .unwrap();
    let run = || {
        let status = Command::new(env!("CARGO_BIN_EXE_voiforge")).args(["run", "--config"]).arg(&config).status().unwrap();
        assert!(status.success());
        let files = read_tree(&tmp.path().join("out"));
        std::fs::remove_dir_all(tmp.path().join("out")).unwrap();
        files
    };
    let (a, b) = (run(), run());
    let differing: Vec<&String> = a.keys().filter(|k| b.get(*k) != a.get(*k)).collect();
    outcome(
        "determinism",
        !a.is_empty() && a.len() == b.len() && differing.is_empty(),
        format!("{} report files, {} differ", a.len(), differing.len()),
    )
}

#[test]
fn acceptance() {
    let _ = std::io::stderr().write_all(b"\n");
    let mut results = vec![morphology_oracle(), texture_oracle(), census(), analytic_phantoms()];
    let (robust, table) = robustness_ordering();
    results.push(icc_oracle(&table));
    results.push(delta_auc_check());
    results.push(algorithm1_traces());
    results.push(learning_sanity());
    results.push(robust);
    results.push(determinism());
    let unexpected: Vec<String> = results
        .iter()
        .filter(|r| !r.pass && !KNOWN_GAPS.contains(&r.name))
        .map(|r| format!("{}: {}", r.name, r.detail))
        .collect();
    let fixed: Vec<&str> = results.iter().filter(|r| r.pass && KNOWN_GAPS.contains(&r.name)).map(|r| r.name).collect();
    assert!(unexpected.is_empty(), "unexpected failures: {unexpected:#?}");
    assert!(fixed.is_empty(), "known gaps now pass, update KNOWN_GAPS: {fixed:?}");
}
