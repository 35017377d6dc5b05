//! Labelled partitions of {1..n}, the refinement order and restriction by the
//! smallest element.
//!
//! Blocks are stored as sorted element arrays in canonical order (sorted by
//! their minimum), which makes equality deterministic and block indexing
//! stable for uniform random selection. Values are immutable; merge and
//! restriction return new partitions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-element label of the two-type construction. Once secondary, always
/// secondary; a block is secondary iff every element in it is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    Primary,
    Secondary,
}

/// A partition of {1..n} with per-element labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPartition {
    n: usize,
    /// Disjoint, sorted, non-empty blocks covering {1..n}, ordered by minimum.
    blocks: Vec<Vec<u32>>,
    /// labels[i] is the label of element i+1.
    labels: Vec<Label>,
}

impl LabeledPartition {
    /// The partition into singletons, all primary.
    pub fn singletons(n: usize) -> Self {
        LabeledPartition {
            n,
            blocks: (1..=n as u32).map(|e| vec![e]).collect(),
            labels: vec![Label::Primary; n],
        }
    }

    /// Build from explicit blocks, validating the partition property.
    pub fn from_blocks(n: usize, mut blocks: Vec<Vec<u32>>, labels: Vec<Label>) -> Result<Self> {
        if labels.len() != n {
            return Err(Error::SizeMismatch(labels.len(), n));
        }
        let mut seen = vec![false; n + 1];
        for b in &mut blocks {
            if b.is_empty() {
                return Err(Error::BadIndices("empty block".into()));
            }
            b.sort_unstable();
            for &e in b.iter() {
                if e == 0 || e as usize > n || seen[e as usize] {
                    return Err(Error::BadIndices(format!(
                        "element {e} out of range or repeated"
                    )));
                }
                seen[e as usize] = true;
            }
        }
        if seen[1..].iter().any(|s| !s) {
            return Err(Error::BadIndices("blocks do not cover {1..n}".into()));
        }
        blocks.sort_by_key(|b| b[0]);
        Ok(LabeledPartition { n, blocks, labels })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<u32>] {
        &self.blocks
    }

    /// Minimum element of block `i` (blocks are canonical, so this is the
    /// cached first entry).
    pub fn block_min(&self, i: usize) -> u32 {
        self.blocks[i][0]
    }

    pub fn label_of(&self, element: u32) -> Label {
        self.labels[element as usize - 1]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn with_labels(mut self, labels: Vec<Label>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::SizeMismatch(labels.len(), self.n));
        }
        self.labels = labels;
        Ok(self)
    }

    /// True iff the block consists only of secondary elements.
    pub fn is_secondary_block(&self, i: usize) -> bool {
        self.blocks[i]
            .iter()
            .all(|&e| self.labels[e as usize - 1] == Label::Secondary)
    }

    /// Map element -> index of the containing block.
    pub fn element_block_index(&self) -> Vec<usize> {
        let mut idx = vec![0usize; self.n];
        for (i, b) in self.blocks.iter().enumerate() {
            for &e in b {
                idx[e as usize - 1] = i;
            }
        }
        idx
    }

    /// True iff every block of `coarser` is a union of blocks of `self`.
    pub fn refines(&self, coarser: &LabeledPartition) -> Result<bool> {
        if self.n != coarser.n {
            return Err(Error::SizeMismatch(self.n, coarser.n));
        }
        let coarse_idx = coarser.element_block_index();
        Ok(self.blocks.iter().all(|b| {
            let target = coarse_idx[b[0] as usize - 1];
            b.iter().all(|&e| coarse_idx[e as usize - 1] == target)
        }))
    }

    /// Merge the blocks at `indices` (>= 2 of them) into one; labels are
    /// unchanged and canonical order is restored.
    pub fn merge(&self, indices: &[usize]) -> Result<Self> {
        if indices.len() < 2 {
            return Err(Error::BadIndices(format!(
                "need at least 2 blocks to merge, got {}",
                indices.len()
            )));
        }
        let mut sorted = indices.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != indices.len() {
            return Err(Error::BadIndices("repeated block index".into()));
        }
        if *sorted.last().unwrap() >= self.blocks.len() {
            return Err(Error::BadIndices(format!(
                "block index {} out of range ({} blocks)",
                sorted.last().unwrap(),
                self.blocks.len()
            )));
        }
        let mut union = Vec::new();
        for &i in &sorted {
            union.extend_from_slice(&self.blocks[i]);
        }
        union.sort_unstable();
        let mut blocks: Vec<Vec<u32>> = Vec::with_capacity(self.blocks.len() - sorted.len() + 1);
        for (i, b) in self.blocks.iter().enumerate() {
            if !sorted.contains(&i) {
                blocks.push(b.clone());
            }
        }
        blocks.push(union);
        blocks.sort_by_key(|b| b[0]);
        Ok(LabeledPartition {
            n: self.n,
            blocks,
            labels: self.labels.clone(),
        })
    }

    /// Coarsest partition: one block {1..n}.
    pub fn single_block(&self) -> Self {
        LabeledPartition {
            n: self.n,
            blocks: vec![(1..=self.n as u32).collect()],
            labels: self.labels.clone(),
        }
    }

    /// JSON form: blocks as nested integer arrays in canonical order, labels
    /// as a parallel boolean array (`true` = secondary) over elements 1..n.
    pub fn to_json(&self) -> String {
        let doc = PartitionDoc {
            n: self.n,
            blocks: self.blocks.clone(),
            secondary: self
                .labels
                .iter()
                .map(|l| *l == Label::Secondary)
                .collect(),
        };
        serde_json::to_string(&doc).expect("partition serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: PartitionDoc = serde_json::from_str(s)?;
        let labels = doc
            .secondary
            .iter()
            .map(|&s| if s { Label::Secondary } else { Label::Primary })
            .collect();
        LabeledPartition::from_blocks(doc.n, doc.blocks, labels)
    }
}

#[derive(Serialize, Deserialize)]
struct PartitionDoc {
    n: usize,
    blocks: Vec<Vec<u32>>,
    secondary: Vec<bool>,
}

/// Restriction by the smallest element.
///
/// `source_start` must be finer than `target_start`; `path_value` is a
/// coarsening of `source_start` reached by the path. Each target block is
/// routed to the path block containing its smallest element, co-routed target
/// blocks are unioned, and empty groups disappear implicitly. Labels are
/// carried over from `target_start`.
pub fn restrict_by_smallest(
    path_value: &LabeledPartition,
    source_start: &LabeledPartition,
    target_start: &LabeledPartition,
) -> Result<LabeledPartition> {
    if path_value.n != source_start.n || source_start.n != target_start.n {
        return Err(Error::SizeMismatch(source_start.n, target_start.n));
    }
    if !source_start.refines(target_start)? {
        return Err(Error::PreconditionViolated(
            "source partition is not finer than the target".into(),
        ));
    }
    let path_idx = path_value.element_block_index();
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); path_value.block_count()];
    for (j, b) in target_start.blocks.iter().enumerate() {
        groups[path_idx[b[0] as usize - 1]].push(j);
    }
    let mut blocks = Vec::new();
    for g in groups {
        if g.is_empty() {
            continue;
        }
        let mut union = Vec::new();
        for j in g {
            union.extend_from_slice(&target_start.blocks[j]);
        }
        union.sort_unstable();
        blocks.push(union);
    }
    blocks.sort_by_key(|b| b[0]);
    Ok(LabeledPartition {
        n: target_start.n,
        blocks,
        labels: target_start.labels.clone(),
    })
}
