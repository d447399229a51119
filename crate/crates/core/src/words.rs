//! The index *-semigroup of finite integer tuples with distinct neighbors.
//!
//! Elements are finite tuples of nonnegative integers whose adjacent entries
//! differ. The product is conditional concatenation: the tuples are joined,
//! and when the junction entries agree the duplicate is dropped. The
//! involution reverses the tuple. Both operations preserve the
//! distinct-neighbor invariant, so the set is closed and forms an associative
//! *-semigroup.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A nonempty tuple of nonnegative integers with no adjacency constraint.
///
/// This is the index domain of moment polynomials; equal neighbors are
/// allowed here, unlike in [`Word`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IndexTuple {
    entries: Vec<u32>,
}

impl IndexTuple {
    pub fn new(entries: Vec<u32>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Empty);
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl fmt::Display for IndexTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_tuple(f, &self.entries)
    }
}

/// A nonempty tuple of nonnegative integers with distinct neighbors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    entries: Vec<u32>,
}

impl Word {
    /// Wraps `entries`, rejecting empty input and adjacent repeats.
    pub fn new(entries: Vec<u32>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Empty);
        }
        for (i, pair) in entries.windows(2).enumerate() {
            if pair[0] == pair[1] {
                return Err(Error::NeighborRepeat {
                    position: i,
                    value: pair[0],
                });
            }
        }
        Ok(Self { entries })
    }

    /// A single-entry word.
    pub fn singleton(entry: u32) -> Self {
        Self {
            entries: vec![entry],
        }
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn first(&self) -> u32 {
        self.entries[0]
    }

    pub fn last(&self) -> u32 {
        *self.entries.last().expect("words are nonempty")
    }

    /// Conditional concatenation.
    ///
    /// The junction entry of `other` is dropped when it matches the last
    /// entry of `self`; in particular a matching length-1 right factor is
    /// absorbed entirely.
    pub fn product(&self, other: &Word) -> Word {
        let mut entries = self.entries.clone();
        if self.last() == other.first() {
            entries.extend_from_slice(&other.entries[1..]);
        } else {
            entries.extend_from_slice(&other.entries);
        }
        Word { entries }
    }

    /// Order reversal, the involution of the semigroup.
    pub fn involution(&self) -> Word {
        let mut entries = self.entries.clone();
        entries.reverse();
        Word { entries }
    }

    /// Maximum entry.
    pub fn height(&self) -> u32 {
        *self.entries.iter().max().expect("words are nonempty")
    }

    /// Adds `t` to every entry. Neighbor distinctness is preserved.
    pub fn shift(&self, t: u32) -> Word {
        Word {
            entries: self.entries.iter().map(|&n| n + t).collect(),
        }
    }

    pub fn to_index_tuple(&self) -> IndexTuple {
        IndexTuple {
            entries: self.entries.clone(),
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_tuple(f, &self.entries)
    }
}

fn write_tuple(f: &mut fmt::Formatter<'_>, entries: &[u32]) -> fmt::Result {
    write!(f, "(")?;
    for (i, n) in entries.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{n}")?;
    }
    write!(f, ")")
}

/// Parses `"(n1,n2,...,nk)"` into the raw entry list. Whitespace is ignored.
pub fn parse_tuple_entries(s: &str) -> Result<Vec<u32>> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let inner = t
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| Error::Parse(format!("expected parenthesized tuple, got {s:?}")))?;
    if inner.is_empty() {
        return Err(Error::Empty);
    }
    inner
        .split(',')
        .map(|p| {
            p.parse::<u32>()
                .map_err(|_| Error::Parse(format!("bad tuple entry {p:?}")))
        })
        .collect()
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Word::new(parse_tuple_entries(s)?)
    }
}

impl FromStr for IndexTuple {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IndexTuple::new(parse_tuple_entries(s)?)
    }
}
