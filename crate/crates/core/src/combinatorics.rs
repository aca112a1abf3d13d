//! Multi-index arithmetic and enumeration of homogeneous levels.
//!
//! Every matrix in the crate is indexed by the graded-lexicographic order
//! produced by [`enumerate_level`]: within a level, exponent vectors are
//! sorted lexicographically in *descending* order, so for `d = 2, n = 2`
//! the basis is `z1^2, z1 z2, z2^2`.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest total degree for which exact integer factorials are guaranteed.
pub const MAX_DEGREE: u32 = 25;

/// Largest number of variables supported.
pub const MAX_DIM: usize = 4;

/// Exponent vector `α ∈ N^d`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(components: Vec<u32>) -> Result<Self> {
        check_dim(components.len())?;
        Ok(MultiIndex(components))
    }

    pub fn zero(d: usize) -> Self {
        MultiIndex(vec![0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[u32] {
        &self.0
    }

    /// `|α|`
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `α!` as an exact integer. Refuses degrees above [`MAX_DEGREE`].
    pub fn factorial(&self) -> Result<u128> {
        let degree = self.degree();
        if degree > MAX_DEGREE {
            return Err(Error::CapExceeded {
                degree,
                cap: MAX_DEGREE,
            });
        }
        self.0.iter().try_fold(1u128, |acc, &a| {
            acc.checked_mul(factorial(a)?)
                .ok_or(Error::Overflow("multi-index factorial"))
        })
    }

    /// `α + ε_j` with `j` zero-based.
    pub fn raised(&self, j: usize) -> MultiIndex {
        let mut c = self.0.clone();
        c[j] += 1;
        MultiIndex(c)
    }

    /// `α − ε_j` with `j` zero-based, `None` if `α_j = 0`.
    pub fn lowered(&self, j: usize) -> Option<MultiIndex> {
        if self.0[j] == 0 {
            return None;
        }
        let mut c = self.0.clone();
        c[j] -= 1;
        Some(MultiIndex(c))
    }

    /// Componentwise sum.
    pub fn add(&self, other: &MultiIndex) -> Result<MultiIndex> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(MultiIndex(
            self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect(),
        ))
    }

    /// Index of the first non-zero component.
    pub fn first_nonzero(&self) -> Option<usize> {
        self.0.iter().position(|&a| a > 0)
    }
}

impl From<&[u32]> for MultiIndex {
    fn from(c: &[u32]) -> Self {
        MultiIndex(c.to_vec())
    }
}

impl<const N: usize> From<[u32; N]> for MultiIndex {
    fn from(c: [u32; N]) -> Self {
        MultiIndex(c.to_vec())
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

pub(crate) fn check_dim(d: usize) -> Result<()> {
    if d == 0 || d > MAX_DIM {
        return Err(Error::UnsupportedDimension(d));
    }
    Ok(())
}

pub(crate) fn check_degree(degree: u32, cap: u32) -> Result<()> {
    if degree > cap {
        return Err(Error::CapExceeded { degree, cap });
    }
    Ok(())
}

/// `n!` for `n ≤ 34`, the largest argument that fits in 128 bits.
pub fn factorial(n: u32) -> Result<u128> {
    (1..=n as u128).try_fold(1u128, |acc, k| {
        acc.checked_mul(k).ok_or(Error::Overflow("factorial"))
    })
}

/// Binomial coefficient `C(n, k)` computed without intermediate factorials.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact at every step: acc * (n - i) is divisible by (i + 1)
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// `dim Hom(n) = C(n + d − 1, d − 1)`.
pub fn level_dim(d: usize, n: u32) -> usize {
    binomial(n as u64 + d as u64 - 1, d as u64 - 1) as usize
}

/// `n! / α!` where `n = |α|`.
pub fn multinomial(alpha: &MultiIndex) -> Result<u128> {
    Ok(factorial(alpha.degree())? / alpha.factorial()?)
}

/// `(d − 1 + |α|)! / ((d − 1)! α!)`, the reciprocal of the normalized
/// sphere moment of `z^α`. Always an integer.
pub fn sphere_multinomial(alpha: &MultiIndex) -> Result<u128> {
    let d = alpha.dim() as u32;
    let top = factorial(d - 1 + alpha.degree())?;
    let bottom = factorial(d - 1)?
        .checked_mul(alpha.factorial()?)
        .ok_or(Error::Overflow("sphere multinomial"))?;
    Ok(top / bottom)
}

/// All `α` with `|α| = n`, in graded-lexicographic order.
pub fn enumerate_level(d: usize, n: u32) -> Vec<MultiIndex> {
    assert!(d >= 1, "d must be positive");
    let mut out = Vec::with_capacity(level_dim(d, n));
    let mut current = vec![0u32; d];
    fill_level(&mut current, 0, n, &mut out);
    out
}

fn fill_level(current: &mut Vec<u32>, pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(MultiIndex(current.clone()));
        return;
    }
    for a in (0..=remaining).rev() {
        current[pos] = a;
        fill_level(current, pos + 1, remaining - a, out);
    }
}

/// All `α` with `|α| ≤ n`, level by level.
pub fn enumerate_up_to(d: usize, n: u32) -> impl Iterator<Item = MultiIndex> {
    (0..=n).flat_map(move |k| enumerate_level(d, k))
}

/// The unit multi-index `ε_j`, with `j` one-based.
pub fn unit(d: usize, j: usize) -> Result<MultiIndex> {
    check_dim(d)?;
    if j == 0 || j > d {
        return Err(Error::IndexOutOfRange { index: j, d });
    }
    let mut c = vec![0; d];
    c[j - 1] = 1;
    Ok(MultiIndex(c))
}

/// Basis of one level together with the reverse lookup table.
#[derive(Debug, Clone)]
pub struct LevelBasis {
    d: usize,
    n: u32,
    basis: Vec<MultiIndex>,
    position: HashMap<MultiIndex, usize>,
}

impl LevelBasis {
    pub fn new(d: usize, n: u32) -> Self {
        let basis = enumerate_level(d, n);
        let position = basis
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect();
        LevelBasis {
            d,
            n,
            basis,
            position,
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn degree(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.basis
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        self.position.get(alpha).copied()
    }
}
