//! Adjusted Rand Index and masked accuracy.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::LabelVector;

/// Co-occurrence counts between two partitions of the same items.
#[derive(Clone, Debug)]
pub struct ContingencyTable {
    counts: HashMap<(i32, i32), u64>,
    row_sums: HashMap<i32, u64>,
    col_sums: HashMap<i32, u64>,
    total: u64,
}

impl ContingencyTable {
    pub fn new(a: &[i32], b: &[i32]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::LengthMismatch {
                left: a.len(),
                right: b.len(),
            });
        }
        let mut table = Self {
            counts: HashMap::new(),
            row_sums: HashMap::new(),
            col_sums: HashMap::new(),
            total: a.len() as u64,
        };
        for (&x, &y) in a.iter().zip(b) {
            *table.counts.entry((x, y)).or_default() += 1;
            *table.row_sums.entry(x).or_default() += 1;
            *table.col_sums.entry(y).or_default() += 1;
        }
        Ok(table)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, a: i32, b: i32) -> u64 {
        self.counts.get(&(a, b)).copied().unwrap_or(0)
    }

    pub fn row_sums(&self) -> &HashMap<i32, u64> {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &HashMap<i32, u64> {
        &self.col_sums
    }
}

fn pairs(n: u64) -> i128 {
    let n = i128::from(n);
    n * (n - 1) / 2
}

/// Pair-counting Adjusted Rand Index.
///
/// All pair counts are exact integers and the only division happens at the
/// end. When the chance-corrected denominator vanishes (both partitions
/// trivial), the result is 1.0 for identical partitions and 0.0 otherwise.
pub fn ari(a: &LabelVector, b: &LabelVector) -> Result<f64> {
    if a.has_masked() || b.has_masked() {
        return Err(Error::Config("ARI is undefined on masked labels".into()));
    }
    ari_raw(a.values(), b.values())
}

pub fn ari_raw(a: &[i32], b: &[i32]) -> Result<f64> {
    let table = ContingencyTable::new(a, b)?;
    if table.total < 2 {
        return Err(Error::TooFewItems {
            needed: 2,
            got: table.total as usize,
        });
    }
    let index: i128 = table.counts.values().map(|&c| pairs(c)).sum();
    let sum_a: i128 = table.row_sums.values().map(|&c| pairs(c)).sum();
    let sum_b: i128 = table.col_sums.values().map(|&c| pairs(c)).sum();
    let total = pairs(table.total);

    // ARI = (index - a·b/T) / ((a+b)/2 - a·b/T), scaled by 2T.
    let numerator = 2 * (total * index - sum_a * sum_b);
    let denominator = total * (sum_a + sum_b) - 2 * sum_a * sum_b;
    if denominator == 0 {
        let identical = table.counts.len() == table.row_sums.len()
            && table.counts.len() == table.col_sums.len();
        return Ok(if identical { 1.0 } else { 0.0 });
    }
    Ok(numerator as f64 / denominator as f64)
}

/// Fraction of `mask` nodes where `pred` matches `truth`.
pub fn accuracy(pred: &LabelVector, truth: &LabelVector, mask: &[usize]) -> Result<f64> {
    if mask.is_empty() {
        return Err(Error::EmptyMask("accuracy"));
    }
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    let mut correct = 0usize;
    for &i in mask {
        let t = truth.get(i).ok_or(Error::MaskedLabel { node: i })?;
        if pred.get(i) == Some(t) {
            correct += 1;
        }
    }
    Ok(correct as f64 / mask.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lv(v: &[i32]) -> LabelVector {
        LabelVector::from_values(v.to_vec()).unwrap()
    }

    #[test]
    fn ari_examples() {
        assert_eq!(ari(&lv(&[0, 0, 1, 1]), &lv(&[0, 0, 1, 1])).unwrap(), 1.0);
        assert_eq!(ari(&lv(&[0, 0, 1, 1]), &lv(&[1, 1, 0, 0])).unwrap(), 1.0);
        assert!((ari(&lv(&[0, 0, 1, 1]), &lv(&[0, 1, 0, 1])).unwrap() + 0.5).abs() < 1e-15);
    }

    #[test]
    fn ari_degenerate_cases() {
        assert_eq!(ari(&lv(&[0, 0, 0]), &lv(&[0, 0, 0])).unwrap(), 1.0);
        assert_eq!(ari(&lv(&[0, 1, 2]), &lv(&[2, 0, 1])).unwrap(), 1.0);
        assert_eq!(ari(&lv(&[0, 0, 0]), &lv(&[0, 1, 2])).unwrap(), 0.0);
    }

    #[test]
    fn ari_errors() {
        assert!(matches!(
            ari(&lv(&[0, 1]), &lv(&[0, 1, 1])),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(ari(&lv(&[0]), &lv(&[0])), Err(Error::TooFewItems { .. })));
        assert!(ari(&lv(&[0, -1]), &lv(&[0, 1])).is_err());
    }

    #[test]
    fn accuracy_examples() {
        let truth = lv(&[0, 1, 1, 0]);
        assert_eq!(accuracy(&truth, &truth, &[0, 1, 2, 3]).unwrap(), 1.0);
        assert_eq!(accuracy(&lv(&[0, 1, 0, 1]), &truth, &[0, 1, 2, 3]).unwrap(), 0.5);
        let acc = accuracy(&lv(&[0, 1, 0, 1]), &truth, &[0, 1, 2]).unwrap();
        assert!((acc - 2.0 / 3.0).abs() < 1e-15);
        assert!(matches!(accuracy(&truth, &truth, &[]), Err(Error::EmptyMask(_))));
    }
}
