//! Counting values in `N ∪ {∞}` and rationals extended with `+∞`.
//!
//! Multiplicities, dimensions and kernel indices are allowed to be
//! infinite, and infinity is absorbing for sums and (nonzero) products.

use num::BigRational;
use std::cmp::Ordering;
use std::fmt;
use thiserror::Error;

/// A cardinal in `N ∪ {∞}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Extent {
    Finite(u128),
    Infinite,
}

impl Extent {
    pub fn is_finite(self) -> bool {
        matches!(self, Extent::Finite(_))
    }

    pub fn is_zero(self) -> bool {
        self == Extent::Finite(0)
    }

    pub fn as_finite(self) -> Option<u128> {
        match self {
            Extent::Finite(n) => Some(n),
            Extent::Infinite => None,
        }
    }

    pub fn add(self, other: Extent) -> Extent {
        match (self, other) {
            (Extent::Finite(a), Extent::Finite(b)) => {
                Extent::Finite(a.checked_add(b).expect("extent overflow"))
            }
            _ => Extent::Infinite,
        }
    }

    /// Product; `0 · ∞ = 0` (counting convention).
    pub fn mul(self, other: Extent) -> Extent {
        match (self, other) {
            (Extent::Finite(0), _) | (_, Extent::Finite(0)) => Extent::Finite(0),
            (Extent::Finite(a), Extent::Finite(b)) => {
                Extent::Finite(a.checked_mul(b).expect("extent overflow"))
            }
            _ => Extent::Infinite,
        }
    }
}

impl PartialOrd for Extent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Extent {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Extent::Finite(a), Extent::Finite(b)) => a.cmp(b),
            (Extent::Finite(_), Extent::Infinite) => Ordering::Less,
            (Extent::Infinite, Extent::Finite(_)) => Ordering::Greater,
            (Extent::Infinite, Extent::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Extent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extent::Finite(n) => write!(f, "{n}"),
            Extent::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExtentError {
    /// `∞ − ∞` (or any other difference of infinities) has no value.
    #[error("indeterminate difference of infinite quantities")]
    IndeterminateInfinity,
}

/// A rational extended with `+∞`; used for free-dimension parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtRational {
    Finite(BigRational),
    Infinite,
}

impl ExtRational {
    pub fn from_int(n: i64) -> ExtRational {
        ExtRational::Finite(BigRational::from_integer(n.into()))
    }

    pub fn ratio(num: i64, den: i64) -> ExtRational {
        ExtRational::Finite(BigRational::new(num.into(), den.into()))
    }

    pub fn as_finite(&self) -> Option<&BigRational> {
        match self {
            ExtRational::Finite(q) => Some(q),
            ExtRational::Infinite => None,
        }
    }

    pub fn add(&self, other: &ExtRational) -> ExtRational {
        match (self, other) {
            (ExtRational::Finite(a), ExtRational::Finite(b)) => ExtRational::Finite(a + b),
            _ => ExtRational::Infinite,
        }
    }

    /// `self − other`; errors when both sides are infinite.
    pub fn sub(&self, other: &ExtRational) -> Result<ExtRational, ExtentError> {
        match (self, other) {
            (ExtRational::Finite(a), ExtRational::Finite(b)) => Ok(ExtRational::Finite(a - b)),
            (ExtRational::Infinite, ExtRational::Finite(_)) => Ok(ExtRational::Infinite),
            _ => Err(ExtentError::IndeterminateInfinity),
        }
    }
}

impl fmt::Display for ExtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRational::Finite(q) => write!(f, "{q}"),
            ExtRational::Infinite => write!(f, "inf"),
        }
    }
}

impl From<Extent> for ExtRational {
    fn from(e: Extent) -> Self {
        match e {
            Extent::Finite(n) => ExtRational::Finite(BigRational::from_integer(n.into())),
            Extent::Infinite => ExtRational::Infinite,
        }
    }
}
