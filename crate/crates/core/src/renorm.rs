//! Haar averaging of the `H²(β)` inner product on each level and the
//! resulting `U(d)`-homogeneous weight family `β̃`.
//!
//! On `Hom(n)` the averaged form `A_n = ∫ M_u* G_β M_u du` is `U(d)`-invariant,
//! so by irreducibility it equals `c_n · diag(α!)` with
//! `c_n = (Σ_{|α|=n} β_α²/α!) / dim Hom(n)` (take the trace against
//! `diag(α!)⁻¹` and use Fock unitarity of `M_u`). The shipped `β̃` uses this
//! exact `c_n`; the Monte-Carlo average is kept as a cross-check.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{enumerate_level, factorial, level_dim};
use crate::criteria::{ratio_bounds_by, RatioBounds};
use crate::error::{Error, Result};
use crate::polyspace::{
    beta_gram, composition_matrices_up_to, composition_matrix, conjugate_by_weights, fock_gram,
    singular_values, weight_diagonal,
};
use crate::unitary::{derive_seed, haar_sample, CMatrix, UnitaryMatrix};
use crate::weights::WeightFamily;

/// `c_n`, by exact enumeration of the level.
pub fn schur_constant(family: &WeightFamily, n: u32) -> Result<f64> {
    family.check_cap(n)?;
    let total: f64 = enumerate_level(family.d(), n)
        .iter()
        .map(|a| family.fock_ratio(a).map(|r| r * r))
        .sum::<Result<f64>>()?;
    Ok(total / level_dim(family.d(), n) as f64)
}

#[derive(Debug, Clone)]
pub struct AveragedGram {
    pub n: u32,
    pub dim: usize,
    pub matrix: CMatrix,
    pub samples: usize,
    pub seed: Option<u64>,
}

impl AveragedGram {
    /// `max |A − A*|`.
    pub fn hermitian_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).camax()
    }

    /// `‖A − c·G_F‖_F / ‖c·G_F‖_F` for the given constant.
    pub fn schur_residual(&self, d: usize, c: f64) -> Result<f64> {
        let target = fock_gram(d, self.n)?.map(|x| Complex64::new(c * x, 0.0));
        Ok((&self.matrix - &target).norm() / target.norm())
    }
}

const CHUNK: usize = 64;

/// `(1/S) Σ_s M_s* G_β M_s` over explicit unitaries.
pub fn averaged_gram_with(
    family: &WeightFamily,
    n: u32,
    unitaries: &[UnitaryMatrix],
) -> Result<AveragedGram> {
    if unitaries.is_empty() {
        return Err(Error::param("samples", "at least one unitary is required"));
    }
    family.check_cap(n)?;
    let gram = beta_gram(family, n)?.map(|x| Complex64::new(x, 0.0));
    let dim = gram.nrows();
    // fixed chunking keeps the summation order independent of scheduling
    let partials: Vec<CMatrix> = unitaries
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = CMatrix::zeros(dim, dim);
            for u in chunk {
                let m = composition_matrix(u, n)?.matrix;
                acc += m.adjoint() * &gram * m;
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = CMatrix::zeros(dim, dim);
    for p in partials {
        total += p;
    }
    total /= Complex64::new(unitaries.len() as f64, 0.0);
    Ok(AveragedGram {
        n,
        dim,
        matrix: total,
        samples: unitaries.len(),
        seed: None,
    })
}

/// Monte-Carlo `A_n` over `S` Haar samples with seeds derived from `seed`.
pub fn averaged_gram(
    family: &WeightFamily,
    n: u32,
    samples: usize,
    seed: u64,
) -> Result<AveragedGram> {
    let grams = averaged_grams_up_to(family, n, samples, seed)?;
    Ok(grams.into_iter().last().expect("level n present"))
}

/// `A_0, …, A_N` from one shared set of Haar samples.
pub fn averaged_grams_up_to(
    family: &WeightFamily,
    levels: u32,
    samples: usize,
    seed: u64,
) -> Result<Vec<AveragedGram>> {
    if samples == 0 {
        return Err(Error::param("samples", "must be at least 1"));
    }
    family.check_cap(levels)?;
    let d = family.d();
    let grams: Vec<CMatrix> = (0..=levels)
        .map(|n| beta_gram(family, n).map(|g| g.map(|x| Complex64::new(x, 0.0))))
        .collect::<Result<_>>()?;
    let zero: Vec<CMatrix> = grams
        .iter()
        .map(|g| CMatrix::zeros(g.nrows(), g.ncols()))
        .collect();
    let indices: Vec<u64> = (0..samples as u64).collect();
    let partials: Vec<Vec<CMatrix>> = indices
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = zero.clone();
            for &s in chunk {
                let u = haar_sample(d, derive_seed(seed, s))?;
                let mats = composition_matrices_up_to(&u, levels)?;
                for ((a, m), g) in acc.iter_mut().zip(&mats).zip(&grams) {
                    *a += m.adjoint() * g * m;
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = zero;
    for p in partials {
        for (t, x) in total.iter_mut().zip(p) {
            *t += x;
        }
    }
    let scale = Complex64::new(samples as f64, 0.0);
    Ok(total
        .into_iter()
        .enumerate()
        .map(|(n, m)| AveragedGram {
            n: n as u32,
            dim: m.nrows(),
            matrix: m / scale,
            samples,
            seed: Some(seed),
        })
        .collect())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HomogenizedWeights {
    pub base: WeightFamily,
    /// `c_0, …, c_N`.
    pub schur: Vec<f64>,
    /// Radial family with `β̃_α = √(c_{|α|} α!)`.
    pub tilde: WeightFamily,
    /// Per level `(min, max)` of `β_α / β̃_α`.
    pub ratio_bounds: Vec<(f64, f64)>,
    /// Per level `‖A_n − c_n G_F‖_F / ‖c_n G_F‖_F`; empty without samples.
    pub mc_residuals: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
}

/// Builds `β̃` from the exact Schur constants. With `samples > 0` each level
/// is cross-checked against a Monte-Carlo Haar average.
pub fn homogenize(
    family: &WeightFamily,
    levels: u32,
    samples: usize,
    seed: u64,
) -> Result<HomogenizedWeights> {
    family.check_cap(levels)?;
    let d = family.d() as u32;
    let schur = (0..=levels)
        .map(|n| schur_constant(family, n))
        .collect::<Result<Vec<_>>>()?;
    // β̃ in radial form: a_n = √(c_n (d−1+n)!/(d−1)!)
    let a = schur
        .iter()
        .enumerate()
        .map(|(n, c)| {
            let rising = factorial(d - 1 + n as u32)? / factorial(d - 1)?;
            Ok((c * rising as f64).sqrt())
        })
        .collect::<Result<Vec<_>>>()?;
    let tilde = WeightFamily::radial(family.d(), a)?;
    let ratio_bounds = (0..=levels)
        .map(|n| {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for alpha in enumerate_level(family.d(), n) {
                let r = family.beta(&alpha)? / tilde.beta(&alpha)?;
                lo = lo.min(r);
                hi = hi.max(r);
            }
            Ok((lo, hi))
        })
        .collect::<Result<Vec<_>>>()?;
    let mc_residuals = if samples > 0 {
        averaged_grams_up_to(family, levels, samples, seed)?
            .iter()
            .zip(&schur)
            .map(|(g, &c)| g.schur_residual(family.d(), c))
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    Ok(HomogenizedWeights {
        base: family.clone(),
        schur,
        tilde,
        ratio_bounds,
        mc_residuals,
        samples,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityNorms {
    /// `max β̃_α/β_α`: norm of the identity map `H²(β) → H²(β̃)`.
    pub forward: RatioBounds,
    /// `max β_α/β̃_α`: norm of its inverse.
    pub inverse: RatioBounds,
}

impl SimilarityNorms {
    pub fn norm(&self) -> f64 {
        self.forward.max
    }

    pub fn inverse_norm(&self) -> f64 {
        self.inverse.max
    }
}

/// Truncated norms of the level-diagonal similarity between `H²(β)` and
/// `H²(β̃)`.
pub fn similarity_norms(family: &WeightFamily, levels: u32) -> Result<SimilarityNorms> {
    let h = homogenize(family, levels, 0, 0)?;
    let forward = ratio_bounds_by(family.d(), levels, |a| {
        Ok(h.tilde.beta(a)? / family.beta(a)?)
    })?;
    let inverse = ratio_bounds_by(family.d(), levels, |a| {
        Ok(family.beta(a)? / h.tilde.beta(a)?)
    })?;
    Ok(SimilarityNorms { forward, inverse })
}

/// `max |s − 1|` over singular values of `C_u` on `Hom(n)` measured in the
/// `β̃` norm.
pub fn tilde_unitarity_defect(tilde: &WeightFamily, u: &UnitaryMatrix, n: u32) -> Result<f64> {
    let m = composition_matrix(u, n)?;
    let w = weight_diagonal(tilde, n)?;
    let s = singular_values(&conjugate_by_weights(&m.matrix, &w))?;
    Ok(s.iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max))
}
