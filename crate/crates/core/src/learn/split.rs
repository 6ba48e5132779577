use alloc::vec;
#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;
use rand::seq::SliceRandom;

use crate::{Error, Result};

fn class_indices(labels: &[u8], rng: &mut crate::rng::Rng) -> [Vec<usize>; 2] {
    let mut c: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, &l) in labels.iter().enumerate() {
        c[l as usize].push(i);
    }
    c[0].shuffle(rng);
    c[1].shuffle(rng);
    c
}

/// Stratified train/test split. The test part takes `round((1 - ratio) * n)`
/// subjects, shared between classes in proportion. Indices come back sorted.
pub fn stratified_split(labels: &[u8], ratio: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidParameter(alloc::format!("train ratio {ratio}")));
    }
    let mut rng = crate::rng::seeded(seed);
    let classes = class_indices(labels, &mut rng);
    for (label, c) in classes.iter().enumerate() {
        if c.len() < 2 {
            return Err(Error::ClassTooSmall { label: label as u8, count: c.len(), needed: 2 });
        }
    }
    let n = labels.len();
    let n_test = (((1.0 - ratio) * n as f64).round() as usize).clamp(2, n - 2);
    // largest-remainder allocation of the test quota
    let exact: Vec<f64> = classes.iter().map(|c| n_test as f64 * c.len() as f64 / n as f64).collect();
    let mut take: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut rest = n_test - take.iter().sum::<usize>();
    let mut order = [0usize, 1];
    order.sort_by(|&a, &b| (exact[b] - take[b] as f64).total_cmp(&(exact[a] - take[a] as f64)).then(a.cmp(&b)));
    for &k in order.iter().cycle() {
        if rest == 0 {
            break;
        }
        take[k] += 1;
        rest -= 1;
    }
    for k in 0..2 {
        take[k] = take[k].clamp(1, classes[k].len() - 1);
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for k in 0..2 {
        test.extend_from_slice(&classes[k][..take[k]]);
        train.extend_from_slice(&classes[k][take[k]..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Stratified k-fold partition: returns the held-out indices of each fold.
pub fn stratified_kfold(labels: &[u8], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::InvalidParameter(alloc::format!("k = {k}")));
    }
    let mut rng = crate::rng::seeded(seed);
    let classes = class_indices(labels, &mut rng);
    for (label, c) in classes.iter().enumerate() {
        if c.len() < k {
            return Err(Error::ClassTooSmall { label: label as u8, count: c.len(), needed: k });
        }
    }
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for c in &classes {
        for &i in c {
            folds[next % k].push(i);
            next += 1;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Complement of `fold` within `0..n`.
pub fn train_indices(n: usize, fold: &[usize]) -> Vec<usize> {
    let mut mark = vec![false; n];
    for &i in fold {
        mark[i] = true;
    }
    (0..n).filter(|&i| !mark[i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labels(n: usize, pos: usize) -> Vec<u8> {
        (0..n).map(|i| u8::from(i < pos)).collect()
    }

    #[test]
    fn cohort_shaped_split() {
        let y = labels(49, 23);
        let (train, test) = stratified_split(&y, 0.8, 1).unwrap();
        assert_eq!(test.len(), 10);
        let pos = test.iter().filter(|&&i| y[i] == 1).count();
        assert!(pos == 4 || pos == 5);
        assert_eq!(train.len() + test.len(), 49);
        assert_eq!(stratified_split(&y, 0.8, 1).unwrap(), (train, test));
    }

    #[test]
    fn small_split() {
        let y = labels(10, 5);
        let (train, test) = stratified_split(&y, 0.8, 3).unwrap();
        assert_eq!((train.len(), test.len()), (8, 2));
        assert_eq!(test.iter().filter(|&&i| y[i] == 1).count(), 1);
        assert_eq!(train.iter().filter(|&&i| y[i] == 1).count(), 4);
        assert!(stratified_split(&labels(10, 1), 0.8, 0).is_err());
    }

    #[test]
    fn balanced_folds() {
        let y = labels(20, 10);
        let folds = stratified_kfold(&y, 5, 9).unwrap();
        for f in &folds {
            assert_eq!(f.len(), 4);
            assert_eq!(f.iter().filter(|&&i| y[i] == 1).count(), 2);
        }
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..20).collect::<Vec<_>>());
        assert_eq!(folds, stratified_kfold(&y, 5, 9).unwrap());
        assert!(stratified_kfold(&labels(20, 4), 5, 0).is_err());
    }

    proptest! {
        #[test]
        fn split_and_folds_are_partitions(n in 12usize..80, frac in 0.2f64..0.8, seed in 0u64..1000) {
            let pos = ((n as f64 * frac) as usize).clamp(5, n - 5);
            let y = labels(n, pos);
            let (train, test) = stratified_split(&y, 0.8, seed).unwrap();
            let mut all = [train.clone(), test.clone()].concat();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
            let tp = test.iter().filter(|&&i| y[i] == 1).count() as f64;
            prop_assert!((tp - test.len() as f64 * pos as f64 / n as f64).abs() <= 1.0);
            let folds = stratified_kfold(&y, 5, seed).unwrap();
            for f in &folds {
                let fp = f.iter().filter(|&&i| y[i] == 1).count() as f64;
                prop_assert!((fp - pos as f64 / 5.0).abs() <= 1.0);
            }
        }
    }
}
