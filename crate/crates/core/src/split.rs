//! Stratified train/test split.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::seed::{rng_for, Key};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    /// Row indices, ascending.
    pub train: Vec<usize>,
    /// Row indices, ascending.
    pub test: Vec<usize>,
}

/// Splits rows class by class. Each class is shuffled with a stream keyed by
/// `(seed, label)` and its first `floor(fraction · m_class)` rows go to
/// training, unless `fixed_train_counts` names an exact count for that class.
pub fn stratified_split(
    labels: &[String],
    fraction: f64,
    seed: u64,
    fixed_train_counts: &BTreeMap<String, usize>,
) -> Result<Split> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidConfig(alloc::format!("split fraction must be in (0, 1), got {fraction}")));
    }
    let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        by_class.entry(l.as_str()).or_default().push(i);
    }
    for label in fixed_train_counts.keys() {
        if !by_class.contains_key(label.as_str()) {
            return Err(Error::UnknownLabel(label.clone()));
        }
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (label, mut rows) in by_class {
        let take = match fixed_train_counts.get(label) {
            Some(&count) if count > rows.len() => {
                return Err(Error::InvalidConfig(alloc::format!(
                    "class {label:?} has {} rows, cannot train on {count}",
                    rows.len()
                )));
            }
            Some(&count) => count,
            None => libm::floor(fraction * rows.len() as f64) as usize,
        };
        rows.shuffle(&mut rng_for(seed, &[Key::Str("split"), Key::Str(label)]));
        train.extend_from_slice(&rows[..take]);
        test.extend_from_slice(&rows[take..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, test })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn labels(counts: &[(&str, usize)]) -> Vec<String> {
        counts.iter().flat_map(|&(l, n)| core::iter::repeat_n(l.to_string(), n)).collect()
    }

    #[test]
    fn floor_split_per_class() {
        let l = labels(&[("a", 73), ("b", 72), ("c", 67)]);
        let split = stratified_split(&l, 0.6, 1, &BTreeMap::new()).unwrap();
        let count = |idx: &[usize], lab: &str| idx.iter().filter(|&&i| l[i] == lab).count();
        assert_eq!([count(&split.train, "a"), count(&split.train, "b"), count(&split.train, "c")], [43, 43, 40]);
        assert_eq!(split.train.len() + split.test.len(), l.len());
    }

    #[test]
    fn fixed_counts_reproduce_table_layout() {
        let l = labels(&[("s1", 73), ("s2", 72), ("s3", 67)]);
        let fixed: BTreeMap<String, usize> = [("s1", 44), ("s2", 43), ("s3", 40)].iter().map(|&(k, v)| (k.to_string(), v)).collect();
        let split = stratified_split(&l, 0.6, 9, &fixed).unwrap();
        let test_count = |lab: &str| split.test.iter().filter(|&&i| l[i] == lab).count();
        assert_eq!([test_count("s1"), test_count("s2"), test_count("s3")], [29, 29, 27]);
    }

    #[test]
    fn deterministic_by_seed() {
        let l = labels(&[("a", 20), ("b", 20)]);
        let a = stratified_split(&l, 0.6, 5, &BTreeMap::new()).unwrap();
        assert_eq!(a, stratified_split(&l, 0.6, 5, &BTreeMap::new()).unwrap());
        assert_ne!(a, stratified_split(&l, 0.6, 6, &BTreeMap::new()).unwrap());
    }

    #[test]
    fn bad_inputs() {
        let l = labels(&[("a", 3)]);
        assert!(stratified_split(&l, 1.0, 0, &BTreeMap::new()).is_err());
        let fixed = [("zz".to_string(), 1)].into_iter().collect();
        assert_eq!(stratified_split(&l, 0.5, 0, &fixed).unwrap_err(), Error::UnknownLabel("zz".into()));
        let fixed = [("a".to_string(), 4)].into_iter().collect();
        assert!(stratified_split(&l, 0.5, 0, &fixed).is_err());
    }
}
