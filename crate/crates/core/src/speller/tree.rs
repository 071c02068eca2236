//! The probability-split binary tree behind the speller: leaves are the
//! alphabet in order, every internal node aims at a 0.9/0.1 mass split with
//! the heavy side alternating by depth.

use super::lm::ALPHABET_SIZE;
use crate::error::{Error, Result};
use crate::labels::ProbLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A node covering the contiguous symbol range `lo..hi`.
#[derive(Debug, Clone)]
pub struct TreeNode {
    pub lo: usize,
    pub hi: usize,
    pub mass: f64,
    pub depth: usize,
    /// Split point: left child covers `lo..split`, right child `split..hi`.
    /// Leaves have no split.
    pub split: Option<usize>,
    /// Which side the 0.9 target was assigned to at this node.
    pub heavy: Side,
}

impl TreeNode {
    pub fn is_leaf(&self) -> bool {
        self.split.is_none()
    }

    pub fn contains(&self, symbol: usize) -> bool {
        (self.lo..self.hi).contains(&symbol)
    }
}

/// The full tree, kept as the list of nodes discovered by top-down splits.
#[derive(Debug, Clone)]
pub struct SpellerTree {
    priors: [f64; ALPHABET_SIZE],
    root: TreeNode,
}

/// Splits `lo..hi` at the point bringing the designated heavy side closest to
/// 0.9 of the range mass. The heavy side is left on even depth, right on odd
/// depth, flipped when `phase_flipped`.
fn split_node(
    priors: &[f64; ALPHABET_SIZE],
    lo: usize,
    hi: usize,
    depth: usize,
    phase_flipped: bool,
) -> TreeNode {
    let mass: f64 = priors[lo..hi].iter().sum();
    if hi - lo <= 1 {
        return TreeNode {
            lo,
            hi,
            mass,
            depth,
            split: None,
            heavy: Side::Left,
        };
    }
    let heavy = match (depth % 2 == 0) ^ phase_flipped {
        true => Side::Left,
        false => Side::Right,
    };
    let mut best_split = lo + 1;
    let mut best_err = f64::INFINITY;
    let mut left_mass = 0.0;
    for s in lo + 1..hi {
        left_mass += priors[s - 1];
        let heavy_mass = match heavy {
            Side::Left => left_mass,
            Side::Right => mass - left_mass,
        };
        let err = (heavy_mass / mass.max(f64::MIN_POSITIVE) - 0.9).abs();
        if err < best_err {
            best_err = err;
            best_split = s;
        }
    }
    TreeNode {
        lo,
        hi,
        mass,
        depth,
        split: Some(best_split),
        heavy,
    }
}

/// Builds the tree for the given next-character prior.
pub fn build_tree(priors: &[f64; ALPHABET_SIZE]) -> SpellerTree {
    SpellerTree {
        priors: *priors,
        root: split_node(priors, 0, ALPHABET_SIZE, 0, false),
    }
}

impl SpellerTree {
    pub fn root(&self) -> &TreeNode {
        &self.root
    }

    pub fn priors(&self) -> &[f64; ALPHABET_SIZE] {
        &self.priors
    }

    /// Child of an internal node on the given side, split with the same
    /// alternation phase.
    pub fn child(&self, node: &TreeNode, side: Side, phase_flipped: bool) -> Result<TreeNode> {
        let split = node.split.ok_or(Error::LeafNode)?;
        let (lo, hi) = match side {
            Side::Left => (node.lo, split),
            Side::Right => (split, node.hi),
        };
        Ok(split_node(
            &self.priors,
            lo,
            hi,
            node.depth + 1,
            phase_flipped,
        ))
    }

    /// Re-splits the node with the opposite alternation phase; the automatic
    /// correction applied after an erroneous command.
    pub fn resplit_flipped(&self, node: &TreeNode, phase_flipped: bool) -> TreeNode {
        split_node(&self.priors, node.lo, node.hi, node.depth, phase_flipped)
    }

    /// Masses of the two subtrees of an internal node.
    pub fn subtree_masses(&self, node: &TreeNode) -> Result<(f64, f64)> {
        let split = node.split.ok_or(Error::LeafNode)?;
        let left: f64 = self.priors[node.lo..split].iter().sum();
        let right: f64 = self.priors[split..node.hi].iter().sum();
        Ok((left, right))
    }

    /// In-order leaves; always the alphabet range in order by construction.
    pub fn leaves(&self) -> Vec<usize> {
        (self.root.lo..self.root.hi).collect()
    }
}

/// Contextual label over {left, right} at an internal node: the two subtree
/// masses renormalized over the characters still reachable.
pub fn context_label_at_node(tree: &SpellerTree, node: &TreeNode) -> Result<ProbLabel> {
    let (left, right) = tree.subtree_masses(node)?;
    let total = left + right;
    if total <= 0.0 {
        return Err(Error::ZeroPrior);
    }
    ProbLabel::new(vec![left / total, right / total])
}
