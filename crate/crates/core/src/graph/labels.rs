use crate::error::{Error, Result};

/// Sentinel for an unknown label.
pub const MASKED: i32 = -1;

/// Per-node class labels in `{-1, 0, …, K-1}`; `-1` marks an unknown label.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LabelVector {
    values: Vec<i32>,
    k: usize,
}

impl LabelVector {
    pub fn new(values: Vec<i32>, k: usize) -> Result<Self> {
        if let Some(&label) = values
            .iter()
            .find(|&&v| v < MASKED || (v >= 0 && v as usize >= k))
        {
            return Err(Error::InvalidLabel { label, k });
        }
        Ok(Self { values, k })
    }

    /// Infers `K` as one more than the largest label.
    pub fn from_values(values: Vec<i32>) -> Result<Self> {
        let k = values.iter().copied().max().map_or(0, |m| (m + 1).max(0) as usize);
        Self::new(values, k)
    }

    pub fn from_usize(values: &[usize], k: usize) -> Result<Self> {
        Self::new(values.iter().map(|&v| v as i32).collect(), k)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn values(&self) -> &[i32] {
        &self.values
    }

    pub fn get(&self, i: usize) -> Option<usize> {
        let v = self.values[i];
        (v >= 0).then_some(v as usize)
    }

    pub fn is_masked(&self, i: usize) -> bool {
        self.values[i] == MASKED
    }

    pub fn has_masked(&self) -> bool {
        self.values.contains(&MASKED)
    }

    /// Number of unmasked nodes in each class.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.k];
        for &v in &self.values {
            if v >= 0 {
                counts[v as usize] += 1;
            }
        }
        counts
    }

    /// Errors unless every class has at least one unmasked member.
    pub fn require_all_classes(&self) -> Result<()> {
        match self.class_counts().iter().position(|&c| c == 0) {
            Some(class) => Err(Error::EmptyClass { class }),
            None => Ok(()),
        }
    }

    /// Copy that keeps only the labels of `keep`; everything else is masked.
    pub fn keep_only(&self, keep: &[usize]) -> Self {
        let mut values = vec![MASKED; self.values.len()];
        for &i in keep {
            values[i] = self.values[i];
        }
        Self { values, k: self.k }
    }

    /// Renames classes in order of first appearance, so two labellings that
    /// differ only by a permutation of class ids compare equal afterwards.
    pub fn canonical(&self) -> Self {
        let mut map = vec![MASKED; self.k];
        let mut next = 0;
        let values = self
            .values
            .iter()
            .map(|&v| {
                if v < 0 {
                    return MASKED;
                }
                let slot = &mut map[v as usize];
                if *slot == MASKED {
                    *slot = next;
                    next += 1;
                }
                *slot
            })
            .collect();
        Self { values, k: self.k }
    }

    pub fn into_values(self) -> Vec<i32> {
        self.values
    }
}
