//! Level diagnostics for `H²(β)`: the quantity
//!
//! ```text
//! b_n = max_{|α|=n} β_α/√α! · max_{|δ|=n} √δ!/β_δ
//! ```
//!
//! whose boundedness in `n` decides weak `U(d)`-homogeneity, together with
//! norms of `C_u` on each level, the radial-form test, weight ratio bounds
//! and a sampled diagonal kernel comparison.
//!
//! The verdict produced by [`weak_homogeneity_diagnosis`] is a finite-horizon
//! proxy for a supremum over all levels. It is a pure function of the `b_n`
//! series and the thresholds, which are echoed in the output.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{enumerate_level, enumerate_up_to, MultiIndex};
use crate::error::{Error, Result};
use crate::polyspace::{
    composition_matrix, conjugate_by_weights, singular_values, weight_diagonal,
};
use crate::unitary::UnitaryMatrix;
use crate::weights::WeightFamily;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelDiagnostic {
    pub n: u32,
    /// `max_{|α|=n} β_α/√α!`
    pub max_up: f64,
    pub argmax_up: MultiIndex,
    /// `max_{|δ|=n} √δ!/β_δ`
    pub max_down: f64,
    pub argmax_down: MultiIndex,
    pub b_n: f64,
}

/// Exact maxima over the level by enumeration; ties go to the first index
/// in graded-lex order.
pub fn level_b(family: &WeightFamily, n: u32) -> Result<LevelDiagnostic> {
    family.check_cap(n)?;
    let mut hi: Option<(f64, MultiIndex)> = None;
    let mut lo: Option<(f64, MultiIndex)> = None;
    for alpha in enumerate_level(family.d(), n) {
        let r = family.fock_ratio(&alpha)?;
        if hi.as_ref().is_none_or(|(v, _)| r > *v) {
            hi = Some((r, alpha.clone()));
        }
        if lo.as_ref().is_none_or(|(v, _)| r < *v) {
            lo = Some((r, alpha));
        }
    }
    let (max_up, argmax_up) = hi.expect("levels are non-empty");
    let (min_ratio, argmax_down) = lo.expect("levels are non-empty");
    Ok(LevelDiagnostic {
        n,
        max_up,
        argmax_up,
        max_down: 1.0 / min_ratio,
        argmax_down,
        // max/min rather than max·(1/min): exactly 1 on level-constant rows
        b_n: max_up / min_ratio,
    })
}

pub fn level_series(family: &WeightFamily, levels: u32) -> Result<Vec<LevelDiagnostic>> {
    family.check_cap(levels)?;
    (0..=levels).map(|n| level_b(family, n)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Minimum least-squares slope of `ln b_n` over the last half window.
    pub slope_min: f64,
    /// Minimum `max b_n` for a divergent verdict.
    pub growth_factor: f64,
    /// Tail `max/min` below this counts as a plateau.
    pub plateau_tol: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            slope_min: 0.05,
            growth_factor: 10.0,
            plateau_tol: 1.5,
        }
    }
}

pub const DEFAULT_LEVELS: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Bounded,
    Divergent,
    Inconclusive,
}

impl Classification {
    /// Process exit code used by the CLI.
    pub fn exit_code(self) -> i32 {
        match self {
            Classification::Bounded => 0,
            Classification::Divergent => 2,
            Classification::Inconclusive => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundednessVerdict {
    pub classification: Classification,
    /// `b_1, …, b_N`.
    pub series: Vec<f64>,
    /// Fitted slope of `ln b_n` against `n` over the tail window.
    pub tail_slope: f64,
    /// `max/min` of `b_n` over the tail window.
    pub tail_ratio: f64,
    pub max_b: f64,
    /// First level of the tail window.
    pub window_start: u32,
    pub thresholds: Thresholds,
}

/// Classifies a series `b_1, …, b_N` (index `i` holds `b_{i+1}`).
pub fn classify(series: &[f64], thresholds: Thresholds) -> Result<BoundednessVerdict> {
    let levels = series.len() as u32;
    if levels < 2 {
        return Err(Error::param(
            "N",
            "at least two levels are needed for a verdict",
        ));
    }
    let window_start = levels.div_ceil(2).max(1);
    let tail: Vec<(f64, f64)> = (window_start..=levels)
        .map(|n| (n as f64, series[n as usize - 1].ln()))
        .collect();
    let tail_slope = least_squares_slope(&tail);
    let (tmin, tmax) = tail
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, y)| {
            (lo.min(*y), hi.max(*y))
        });
    let tail_ratio = (tmax - tmin).exp();
    let max_b = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let classification = if tail_slope > thresholds.slope_min && max_b > thresholds.growth_factor {
        Classification::Divergent
    } else if tail_ratio < thresholds.plateau_tol {
        Classification::Bounded
    } else {
        Classification::Inconclusive
    };
    Ok(BoundednessVerdict {
        classification,
        series: series.to_vec(),
        tail_slope,
        tail_ratio,
        max_b,
        window_start,
        thresholds,
    })
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Computes `b_1..b_N` and classifies growth.
pub fn weak_homogeneity_diagnosis(
    family: &WeightFamily,
    levels: u32,
    thresholds: Thresholds,
) -> Result<BoundednessVerdict> {
    family.check_cap(levels)?;
    let series = (1..=levels)
        .map(|n| level_b(family, n).map(|l| l.b_n))
        .collect::<Result<Vec<_>>>()?;
    classify(&series, thresholds)
}

/// `‖C_u|_{Hom(n)}‖` on `H²(β)`: the largest singular value of
/// `D·M·D⁻¹` with `D = diag(β_α)`.
pub fn cu_restricted_norm(u: &UnitaryMatrix, family: &WeightFamily, n: u32) -> Result<f64> {
    if u.d() != family.d() {
        return Err(Error::DimensionMismatch {
            expected: family.d(),
            found: u.d(),
        });
    }
    family.check_cap(n)?;
    let m = composition_matrix(u, n)?;
    let w = weight_diagonal(family, n)?;
    Ok(singular_values(&conjugate_by_weights(&m.matrix, &w))?[0])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityWitness {
    pub n: u32,
    pub first: MultiIndex,
    pub first_value: f64,
    pub other: MultiIndex,
    pub other_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityCheck {
    pub homogeneous: bool,
    /// Per-level value of `v_α` (taken at the first index of the level)
    /// up to the first failing level.
    pub level_values: Vec<f64>,
    pub witness: Option<HomogeneityWitness>,
}

/// Tests the radial form: `v_α = β_α √((d−1+|α|)!/((d−1)! α!))` must be
/// constant on every level `n ≤ N` up to relative tolerance `tol`.
pub fn is_ud_homogeneous(family: &WeightFamily, levels: u32, tol: f64) -> Result<HomogeneityCheck> {
    family.check_cap(levels)?;
    let mut level_values = Vec::with_capacity(levels as usize + 1);
    for n in 0..=levels {
        let basis = enumerate_level(family.d(), n);
        let first = &basis[0];
        let v0 = family.sphere_ratio(first)?;
        level_values.push(v0);
        for alpha in &basis[1..] {
            let v = family.sphere_ratio(alpha)?;
            if (v - v0).abs() > tol * v0.abs() {
                return Ok(HomogeneityCheck {
                    homogeneous: false,
                    level_values,
                    witness: Some(HomogeneityWitness {
                        n,
                        first: first.clone(),
                        first_value: v0,
                        other: alpha.clone(),
                        other_value: v,
                    }),
                });
            }
        }
    }
    Ok(HomogeneityCheck {
        homogeneous: true,
        level_values,
        witness: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioBounds {
    pub min: f64,
    pub argmin: MultiIndex,
    pub max: f64,
    pub argmax: MultiIndex,
}

/// Extremes of `first(α)/second(α)` over `|α| ≤ N`, ties to the first index.
pub fn ratio_bounds_by(
    d: usize,
    levels: u32,
    mut ratio: impl FnMut(&MultiIndex) -> Result<f64>,
) -> Result<RatioBounds> {
    let mut out: Option<RatioBounds> = None;
    for alpha in enumerate_up_to(d, levels) {
        let r = ratio(&alpha)?;
        match out.as_mut() {
            None => {
                out = Some(RatioBounds {
                    min: r,
                    argmin: alpha.clone(),
                    max: r,
                    argmax: alpha,
                })
            }
            Some(b) => {
                if r < b.min {
                    b.min = r;
                    b.argmin = alpha.clone();
                }
                if r > b.max {
                    b.max = r;
                    b.argmax = alpha;
                }
            }
        }
    }
    Ok(out.expect("level 0 is never empty"))
}

/// `(m1, m2)` with `m1 ≤ β¹_α/β²_α ≤ m2` for all `|α| ≤ N`.
pub fn similarity_ratio_bounds(
    first: &WeightFamily,
    second: &WeightFamily,
    levels: u32,
) -> Result<RatioBounds> {
    if first.d() != second.d() {
        return Err(Error::DimensionMismatch {
            expected: first.d(),
            found: second.d(),
        });
    }
    first.check_cap(levels)?;
    second.check_cap(levels)?;
    ratio_bounds_by(first.d(), levels, |a| Ok(first.beta(a)? / second.beta(a)?))
}

/// Truncated diagonal kernel `κ(z, z) = Σ_{|α|≤T} |z^α|² / β_α²`.
pub fn kernel_diagonal(family: &WeightFamily, z: &[Complex64], truncation: u32) -> Result<f64> {
    family.check_cap(truncation)?;
    let moduli: Vec<f64> = z.iter().map(|w| w.norm_sqr()).collect();
    let mut total = 0.0;
    for alpha in enumerate_up_to(family.d(), truncation) {
        let mono: f64 = alpha
            .components()
            .iter()
            .zip(&moduli)
            .map(|(&a, m)| m.powi(a as i32))
            .product();
        let b = family.beta(&alpha)?;
        total += mono / (b * b);
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelRatioRange {
    pub min_ratio: f64,
    pub max_ratio: f64,
}

/// Range of `κ(u⁻¹z, u⁻¹z) / κ(z, z)` over the sample points. Only the
/// diagonal `z = w` is examined, so this is a necessary-condition sampler
/// for two-sided kernel domination.
pub fn kernel_diagonal_ratio(
    family: &WeightFamily,
    u: &UnitaryMatrix,
    points: &[Vec<Complex64>],
    truncation: u32,
) -> Result<KernelRatioRange> {
    if u.d() != family.d() {
        return Err(Error::DimensionMismatch {
            expected: family.d(),
            found: u.d(),
        });
    }
    family.check_cap(truncation)?;
    if points.is_empty() {
        return Err(Error::param("points", "no sample points"));
    }
    let inv = u.inverse();
    let mut range = KernelRatioRange {
        min_ratio: f64::INFINITY,
        max_ratio: f64::NEG_INFINITY,
    };
    for (index, z) in points.iter().enumerate() {
        if z.len() != family.d() {
            return Err(Error::DimensionMismatch {
                expected: family.d(),
                found: z.len(),
            });
        }
        let norm_sq: f64 = z.iter().map(|w| w.norm_sqr()).sum();
        if norm_sq.is_nan() || norm_sq >= 1.0 {
            return Err(Error::OutsideBall { index, norm_sq });
        }
        let base = kernel_diagonal(family, z, truncation)?;
        let moved = kernel_diagonal(family, &inv.apply(z)?, truncation)?;
        let r = moved / base;
        range.min_ratio = range.min_ratio.min(r);
        range.max_ratio = range.max_ratio.max(r);
    }
    Ok(range)
}
