//! Coalitions, partitions, and collections of the user set.
//!
//! A coalition is stored as a bitmask over user indices `0..n`, which makes
//! subset tests, unions, and full-subset enumeration cheap. The bitmask is
//! also the canonical representation: two coalitions with the same members
//! compare equal. User counts are capped well below 32 by the enumeration
//! limits, so a `u32` mask is always wide enough.

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("coalition must be non-empty")]
    EmptyCoalition,
    #[error("user index {index} out of range for {n} users")]
    MemberOutOfRange { index: usize, n: usize },
    #[error("blocks must be pairwise disjoint (user {index} appears twice)")]
    OverlappingBlocks { index: usize },
    #[error("partition must cover every user (user {index} missing)")]
    MissingUser { index: usize },
}

/// A non-empty set of user indices, canonically represented as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coalition(u32);

impl Coalition {
    /// Coalition from a raw bitmask. `None` for the empty mask.
    pub fn from_mask(mask: u32) -> Option<Self> {
        (mask != 0).then_some(Self(mask))
    }

    /// Coalition from member indices, validated against a universe of `n` users.
    pub fn from_members<I>(members: I, n: usize) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut mask = 0u32;
        for index in members {
            if index >= n {
                return Err(ModelError::MemberOutOfRange { index, n });
            }
            mask |= 1 << index;
        }
        Self::from_mask(mask).ok_or(ModelError::EmptyCoalition)
    }

    pub fn singleton(index: usize) -> Self {
        Self(1 << index)
    }

    /// The grand coalition over `n` users.
    pub fn full(n: usize) -> Self {
        debug_assert!(n >= 1 && n <= 32);
        Self(if n == 32 { u32::MAX } else { (1 << n) - 1 })
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, index: usize) -> bool {
        index < 32 && self.0 & (1 << index) != 0
    }

    pub fn is_subset_of(self, other: Coalition) -> bool {
        self.0 & other.0 == self.0
    }

    pub fn union(self, other: Coalition) -> Coalition {
        Self(self.0 | other.0)
    }

    /// Intersection, `None` when disjoint.
    pub fn intersection(self, other: Coalition) -> Option<Coalition> {
        Self::from_mask(self.0 & other.0)
    }

    pub fn is_disjoint_from(self, other: Coalition) -> bool {
        self.0 & other.0 == 0
    }

    pub fn lowest_member(self) -> usize {
        self.0.trailing_zeros() as usize
    }

    /// Member indices in ascending order.
    pub fn members(self) -> impl Iterator<Item = usize> {
        let mask = self.0;
        (0..32).filter(move |&i| mask & (1 << i) != 0)
    }
}

/// Serializes as the list of 1-based member indices, matching the user
/// numbering of the CLI surface.
impl Serialize for Coalition {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.len()))?;
        for member in self.members() {
            seq.serialize_element(&(member + 1))?;
        }
        seq.end()
    }
}

impl fmt::Debug for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Coalition{{")?;
        for (k, i) in self.members().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

/// Mutually disjoint non-empty blocks covering every user in `0..n`.
///
/// Blocks are kept sorted by lowest member, so partitions with the same
/// blocks compare equal regardless of construction order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Partition {
    blocks: Vec<Coalition>,
    n: usize,
}

impl Partition {
    pub fn new(blocks: Vec<Coalition>, n: usize) -> Result<Self, ModelError> {
        let mut seen = 0u32;
        for block in &blocks {
            if block.mask() & seen != 0 {
                let index = (block.mask() & seen).trailing_zeros() as usize;
                return Err(ModelError::OverlappingBlocks { index });
            }
            if n < 32 && block.mask() >> n != 0 {
                let index = n + (block.mask() >> n).trailing_zeros() as usize;
                return Err(ModelError::MemberOutOfRange { index, n });
            }
            seen |= block.mask();
        }
        if seen != Coalition::full(n).mask() {
            let index = (!seen).trailing_zeros() as usize;
            return Err(ModelError::MissingUser { index });
        }
        let mut blocks = blocks;
        blocks.sort_by_key(|b| b.lowest_member());
        Ok(Self { blocks, n })
    }

    /// Parse 1-based block lists, e.g. `[[1,2,3],[4,5]]` for five users.
    pub fn from_one_based(blocks: &[Vec<usize>], n: usize) -> Result<Self, ModelError> {
        let coalitions = blocks
            .iter()
            .map(|block| {
                if block.contains(&0) {
                    return Err(ModelError::MemberOutOfRange { index: 0, n });
                }
                Coalition::from_members(block.iter().map(|&i| i - 1), n)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(coalitions, n)
    }

    /// Every user alone.
    pub fn singletons(n: usize) -> Self {
        Self {
            blocks: (0..n).map(Coalition::singleton).collect(),
            n,
        }
    }

    /// The single-block partition {0..n}.
    pub fn grand(n: usize) -> Self {
        Self {
            blocks: vec![Coalition::full(n)],
            n,
        }
    }

    /// Users chunked in index order into blocks of `size` (last block may be
    /// smaller), e.g. `{1..5},{6..10},...` for size 5.
    pub fn sequential_blocks(n: usize, size: usize) -> Self {
        assert!(size >= 1);
        let blocks = (0..n)
            .step_by(size)
            .map(|start| {
                Coalition::from_members(start..(start + size).min(n), n).expect("non-empty chunk")
            })
            .collect();
        Self { blocks, n }
    }

    pub fn blocks(&self) -> &[Coalition] {
        &self.blocks
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The block containing user `index`.
    pub fn block_of(&self, index: usize) -> Coalition {
        *self
            .blocks
            .iter()
            .find(|b| b.contains(index))
            .expect("partition covers all users")
    }
}

/// Mutually disjoint non-empty coalitions whose union may be a strict subset
/// of the user set.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Collection {
    parts: Vec<Coalition>,
}

impl Collection {
    pub fn new(parts: Vec<Coalition>, n: usize) -> Result<Self, ModelError> {
        let mut seen = 0u32;
        for part in &parts {
            if part.mask() & seen != 0 {
                let index = (part.mask() & seen).trailing_zeros() as usize;
                return Err(ModelError::OverlappingBlocks { index });
            }
            for index in part.members() {
                if index >= n {
                    return Err(ModelError::MemberOutOfRange { index, n });
                }
            }
            seen |= part.mask();
        }
        let mut parts = parts;
        parts.sort_by_key(|p| p.lowest_member());
        Ok(Self { parts })
    }

    /// A collection that is already known to be disjoint and in range.
    pub(crate) fn from_disjoint(mut parts: Vec<Coalition>) -> Self {
        parts.sort_by_key(|p| p.lowest_member());
        Self { parts }
    }

    pub fn parts(&self) -> &[Coalition] {
        &self.parts
    }

    /// Union of all parts, `None` for the empty collection.
    pub fn union(&self) -> Option<Coalition> {
        self.parts.iter().copied().reduce(Coalition::union)
    }
}

impl From<&Partition> for Collection {
    fn from(p: &Partition) -> Self {
        Self {
            parts: p.blocks().to_vec(),
        }
    }
}
