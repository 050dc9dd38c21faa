//! Leaf labels and ordered leaf pairs.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TaxonError {
    #[error("taxon labels must be non-empty")]
    EmptyLabel,
    #[error("a pair needs two distinct leaves, got ({0},{0})")]
    IdenticalCoordinates(Taxon),
}

/// A leaf label. Cheap to clone; ordered by the label text.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Taxon(Arc<str>);

impl Taxon {
    pub fn new(label: impl AsRef<str>) -> Result<Self, TaxonError> {
        let label = label.as_ref();
        if label.is_empty() {
            return Err(TaxonError::EmptyLabel);
        }
        Ok(Taxon(Arc::from(label)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl FromStr for Taxon {
    type Err = TaxonError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Taxon::new(s)
    }
}

impl fmt::Display for Taxon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Taxon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

/// An ordered pair `(first, second)` of distinct leaves.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pair {
    first: Taxon,
    second: Taxon,
}

impl Pair {
    pub fn new(first: Taxon, second: Taxon) -> Result<Self, TaxonError> {
        if first == second {
            return Err(TaxonError::IdenticalCoordinates(first));
        }
        Ok(Pair { first, second })
    }

    /// Builds a pair from two labels.
    pub fn from_labels(first: &str, second: &str) -> Result<Self, TaxonError> {
        Pair::new(Taxon::new(first)?, Taxon::new(second)?)
    }

    pub fn first(&self) -> &Taxon {
        &self.first
    }

    pub fn second(&self) -> &Taxon {
        &self.second
    }

    /// The same leaves in the opposite order.
    pub fn reversed(&self) -> Pair {
        Pair {
            first: self.second.clone(),
            second: self.first.clone(),
        }
    }
}

/// Formats as `first,second`, the line format of sequence files.
impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.first, self.second)
    }
}

impl fmt::Debug for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.first, self.second)
    }
}
