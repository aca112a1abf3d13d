//! Homogeneous polynomials and the matrices of `C_u` and `M_{z_j}` on
//! `Hom(n)` in the graded-lex monomial basis.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::combinatorics::{check_degree, LevelBasis, MultiIndex, MAX_DEGREE};
use crate::error::{Error, Result};
use crate::unitary::{CMatrix, UnitaryMatrix};
use crate::weights::WeightFamily;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A homogeneous polynomial of degree `n` in `d` variables. Zero
/// coefficients are not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct HomPoly {
    d: usize,
    degree: u32,
    coeffs: BTreeMap<MultiIndex, Complex64>,
}

impl HomPoly {
    pub fn zero(d: usize, degree: u32) -> Self {
        HomPoly {
            d,
            degree,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn monomial(alpha: MultiIndex) -> Self {
        let mut p = HomPoly::zero(alpha.dim(), alpha.degree());
        p.coeffs.insert(alpha, ONE);
        p
    }

    /// Builds from `(α, c)` terms; repeated exponents are summed.
    pub fn from_terms(
        d: usize,
        degree: u32,
        terms: impl IntoIterator<Item = (MultiIndex, Complex64)>,
    ) -> Result<Self> {
        let mut p = HomPoly::zero(d, degree);
        for (alpha, c) in terms {
            if alpha.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: alpha.dim(),
                });
            }
            if alpha.degree() != degree {
                return Err(Error::param(
                    "terms",
                    format!("exponent {alpha} does not have degree {degree}"),
                ));
            }
            p.add_term(alpha, c);
        }
        Ok(p)
    }

    /// The linear form `Σ_k c_k z_k`.
    pub fn linear(coeffs: &[Complex64]) -> Self {
        let d = coeffs.len();
        let mut p = HomPoly::zero(d, 1);
        for (k, &c) in coeffs.iter().enumerate() {
            let mut e = vec![0; d];
            e[k] = 1;
            p.add_term(MultiIndex::from(e.as_slice()), c);
        }
        p
    }

    fn add_term(&mut self, alpha: MultiIndex, c: Complex64) {
        let sum = self.coefficient(&alpha) + c;
        if sum == ZERO {
            self.coeffs.remove(&alpha);
        } else {
            self.coeffs.insert(alpha, sum);
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn coefficient(&self, alpha: &MultiIndex) -> Complex64 {
        self.coeffs.get(alpha).copied().unwrap_or(ZERO)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.coeffs.iter()
    }

    /// Sparse product; degrees add.
    pub fn mul(&self, other: &HomPoly) -> Result<HomPoly> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: other.d,
            });
        }
        let mut out = HomPoly::zero(self.d, self.degree + other.degree);
        for (a, ca) in &self.coeffs {
            for (b, cb) in &other.coeffs {
                out.add_term(a.add(b)?, ca * cb);
            }
        }
        Ok(out)
    }

    /// `p(u·z)`, expanded by multiplying out the linear forms
    /// `(u·z)_j = Σ_k u_{jk} z_k`.
    pub fn compose_linear(&self, u: &UnitaryMatrix) -> Result<HomPoly> {
        if u.d() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: u.d(),
            });
        }
        let forms: Vec<HomPoly> = (0..self.d)
            .map(|j| {
                let row: Vec<Complex64> = (0..self.d).map(|k| u.entry(j, k)).collect();
                HomPoly::linear(&row)
            })
            .collect();
        let mut out = HomPoly::zero(self.d, self.degree);
        for (alpha, c) in &self.coeffs {
            let mut term = HomPoly::from_terms(self.d, 0, [(MultiIndex::zero(self.d), *c)])?;
            for (j, &power) in alpha.components().iter().enumerate() {
                for _ in 0..power {
                    term = term.mul(&forms[j])?;
                }
            }
            for (beta, cb) in term.coeffs {
                out.add_term(beta, cb);
            }
        }
        Ok(out)
    }

    /// Coefficients in the graded-lex basis of `Hom(n)`.
    pub fn to_vector(&self) -> Vec<Complex64> {
        let basis = LevelBasis::new(self.d, self.degree);
        basis
            .indices()
            .iter()
            .map(|a| self.coefficient(a))
            .collect()
    }

    /// `‖p‖_{H²(β)} = √(Σ |c_α|² β_α²)`.
    pub fn beta_norm(&self, family: &WeightFamily) -> Result<f64> {
        let mut acc = 0.0;
        for (alpha, c) in &self.coeffs {
            let b = family.beta(alpha)?;
            acc += c.norm_sqr() * b * b;
        }
        Ok(acc.sqrt())
    }
}

/// Matrix of `C_u` restricted to `Hom(n)`; column `α` holds the
/// coefficients of `(u·z)^α`.
#[derive(Debug, Clone)]
pub struct CompositionMatrix {
    pub d: usize,
    pub n: u32,
    pub u: UnitaryMatrix,
    pub matrix: CMatrix,
}

/// Builds the composition matrix level by level:
/// `(u·z)^α = (u·z)_j · (u·z)^{α−ε_j}` with `j` the first non-zero index of `α`.
pub fn composition_matrix(u: &UnitaryMatrix, n: u32) -> Result<CompositionMatrix> {
    let matrix = composition_matrices_up_to(u, n)?
        .pop()
        .expect("level n present");
    Ok(CompositionMatrix {
        d: u.d(),
        n,
        u: u.clone(),
        matrix,
    })
}

/// Matrices of `C_u` on `Hom(0), …, Hom(n)`.
pub fn composition_matrices_up_to(u: &UnitaryMatrix, n: u32) -> Result<Vec<CMatrix>> {
    check_degree(n, MAX_DEGREE)?;
    let d = u.d();
    let mut prev_basis = LevelBasis::new(d, 0);
    let mut prev_cols: Vec<Vec<Complex64>> = vec![vec![ONE]];
    let mut out = vec![CMatrix::from_element(1, 1, ONE)];
    for m in 1..=n {
        let basis = LevelBasis::new(d, m);
        let mut cols = Vec::with_capacity(basis.len());
        for alpha in basis.indices() {
            let j = alpha.first_nonzero().expect("positive degree");
            let lower = alpha.lowered(j).expect("non-zero component");
            let src = &prev_cols[prev_basis.position(&lower).expect("lower level member")];
            let mut col = vec![ZERO; basis.len()];
            for (i, beta) in prev_basis.indices().iter().enumerate() {
                let c = src[i];
                if c == ZERO {
                    continue;
                }
                for k in 0..d {
                    let ujk = u.entry(j, k);
                    if ujk == ZERO {
                        continue;
                    }
                    let target = basis.position(&beta.raised(k)).expect("raised member");
                    col[target] += c * ujk;
                }
            }
            cols.push(col);
        }
        let dim = basis.len();
        out.push(CMatrix::from_fn(dim, dim, |r, c| cols[c][r]));
        prev_basis = basis;
        prev_cols = cols;
    }
    Ok(out)
}

/// Matrix of `M_{z_j}: Hom(n) → Hom(n+1)` (`j` one-based).
pub fn multiplication_matrix(j: usize, d: usize, n: u32) -> Result<CMatrix> {
    if j == 0 || j > d {
        return Err(Error::IndexOutOfRange { index: j, d });
    }
    check_degree(n + 1, MAX_DEGREE)?;
    let src = LevelBasis::new(d, n);
    let dst = LevelBasis::new(d, n + 1);
    let mut m = CMatrix::zeros(dst.len(), src.len());
    for (c, alpha) in src.indices().iter().enumerate() {
        let r = dst.position(&alpha.raised(j - 1)).expect("raised member");
        m[(r, c)] = ONE;
    }
    Ok(m)
}

/// `diag(β_α)` over the level basis.
pub fn weight_diagonal(family: &WeightFamily, n: u32) -> Result<Vec<f64>> {
    LevelBasis::new(family.d(), n)
        .indices()
        .iter()
        .map(|a| family.beta(a))
        .collect()
}

/// `diag(α!)`, the Fischer–Fock Gram matrix on `Hom(n)`.
pub fn fock_gram(d: usize, n: u32) -> Result<DMatrix<f64>> {
    let diag = LevelBasis::new(d, n)
        .indices()
        .iter()
        .map(|a| a.factorial().map(|f| f as f64))
        .collect::<Result<Vec<_>>>()?;
    Ok(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)))
}

/// `diag(β_α²)`, the Gram matrix of the `H²(β)` inner product on `Hom(n)`.
pub fn beta_gram(family: &WeightFamily, n: u32) -> Result<DMatrix<f64>> {
    let diag: Vec<f64> = weight_diagonal(family, n)?
        .into_iter()
        .map(|b| b * b)
        .collect();
    Ok(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)))
}

/// `D·M·D⁻¹` with `D = diag(weights)`: the matrix of an operator in the
/// orthonormal basis `z^α / w_α`.
pub fn conjugate_by_weights(m: &CMatrix, weights: &[f64]) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| {
        m[(r, c)] * (weights[r] / weights[c])
    })
}

/// Singular values, largest first.
pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    let svd = nalgebra::linalg::SVD::try_new(m.clone(), false, false, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numeric("SVD did not converge".into()))?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::enumerate_level;
    use crate::unitary::haar_sample;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn hadamard() -> UnitaryMatrix {
        UnitaryMatrix::from_rows(&[
            vec![c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)],
            vec![c(FRAC_1_SQRT_2), c(-FRAC_1_SQRT_2)],
        ])
        .unwrap()
    }

    fn assert_poly_close(p: &HomPoly, expected: &[([u32; 2], f64)], tol: f64) {
        let basis = enumerate_level(2, p.degree());
        for alpha in basis {
            let want = expected
                .iter()
                .find(|(e, _)| MultiIndex::from(*e) == alpha)
                .map(|(_, v)| *v)
                .unwrap_or(0.0);
            let got = p.coefficient(&alpha);
            assert!((got - c(want)).norm() <= tol, "{alpha}: {got} vs {want}");
        }
    }

    #[test]
    fn compose_linear_examples() {
        let z1 = HomPoly::monomial(MultiIndex::from([1, 0]));
        let swapped = z1.compose_linear(&UnitaryMatrix::swap()).unwrap();
        assert_eq!(swapped, HomPoly::monomial(MultiIndex::from([0, 1])));

        let sq = HomPoly::monomial(MultiIndex::from([2, 0]))
            .compose_linear(&hadamard())
            .unwrap();
        assert_poly_close(&sq, &[([2, 0], 0.5), ([1, 1], 1.0), ([0, 2], 0.5)], 1e-15);

        let mixed = HomPoly::monomial(MultiIndex::from([1, 1]))
            .compose_linear(&hadamard())
            .unwrap();
        assert_poly_close(&mixed, &[([2, 0], 0.5), ([0, 2], -0.5)], 1e-15);
        assert_eq!(mixed.degree(), 2);
    }

    #[test]
    fn compose_linear_dimension_mismatch() {
        let p = HomPoly::monomial(MultiIndex::from([1, 0, 0]));
        assert!(matches!(
            p.compose_linear(&UnitaryMatrix::swap()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn composition_matrix_examples() {
        let id = composition_matrix(&UnitaryMatrix::identity(2).unwrap(), 3).unwrap();
        assert_eq!(id.matrix, CMatrix::identity(4, 4));

        let sw = composition_matrix(&UnitaryMatrix::swap(), 2).unwrap();
        let mut anti = CMatrix::zeros(3, 3);
        for i in 0..3 {
            anti[(i, 2 - i)] = ONE;
        }
        assert_eq!(sw.matrix, anti);

        let h = composition_matrix(&hadamard(), 2).unwrap();
        let expected = [[0.5, 0.5, 0.5], [1.0, 0.0, -1.0], [0.5, -0.5, 0.5]];
        for (r, row) in expected.iter().enumerate() {
            for (col, &x) in row.iter().enumerate() {
                assert!((h.matrix[(r, col)] - c(x)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn composition_matrix_matches_sparse_expansion() {
        for d in 1..=3 {
            let u = haar_sample(d, 5 + d as u64).unwrap();
            for n in 0..=5 {
                let m = composition_matrix(&u, n).unwrap().matrix;
                for (col, alpha) in enumerate_level(d, n).into_iter().enumerate() {
                    let expanded = HomPoly::monomial(alpha)
                        .compose_linear(&u)
                        .unwrap()
                        .to_vector();
                    for (r, e) in expanded.iter().enumerate() {
                        assert!((m[(r, col)] - e).norm() < 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn multiplication_matrix_examples() {
        let m = multiplication_matrix(1, 2, 0).unwrap();
        assert_eq!(m, CMatrix::from_column_slice(2, 1, &[ONE, ZERO]));
        let m = multiplication_matrix(2, 2, 1).unwrap();
        // basis {z1, z2} -> {z1^2, z1 z2, z2^2}
        assert_eq!(
            m,
            CMatrix::from_row_slice(3, 2, &[ZERO, ZERO, ONE, ZERO, ZERO, ONE])
        );
        assert!(multiplication_matrix(3, 2, 1).is_err());
        assert!(multiplication_matrix(1, 2, MAX_DEGREE).is_err());
    }

    #[test]
    fn beta_norm_examples() {
        let szego = WeightFamily::szego(2, 5).unwrap();
        let hardy = WeightFamily::polydisc_hardy(2, 5).unwrap();
        let alpha = MultiIndex::from([2, 1]);
        assert_eq!(
            HomPoly::monomial(alpha.clone()).beta_norm(&szego).unwrap(),
            szego.beta(&alpha).unwrap()
        );
        let sum = HomPoly::linear(&[ONE, ONE]);
        assert!((sum.beta_norm(&hardy).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!((sum.beta_norm(&szego).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn group_law_and_intertwining() {
        for d in 2..=3 {
            for s in 0..4u64 {
                let u = haar_sample(d, 100 + s).unwrap();
                let v = haar_sample(d, 200 + s).unwrap();
                let uv = u.compose(&v).unwrap();
                for n in 0..=6 {
                    let lhs = composition_matrix(&uv, n).unwrap().matrix;
                    let rhs = composition_matrix(&v, n).unwrap().matrix
                        * composition_matrix(&u, n).unwrap().matrix;
                    assert!((lhs - rhs).camax() < 1e-12);

                    let cn = composition_matrix(&u, n).unwrap().matrix;
                    let cn1 = composition_matrix(&u, n + 1).unwrap().matrix;
                    for j in 1..=d {
                        let left = &cn1 * multiplication_matrix(j, d, n).unwrap();
                        let mut right = CMatrix::zeros(left.nrows(), left.ncols());
                        for k in 1..=d {
                            right += multiplication_matrix(k, d, n).unwrap()
                                * &cn
                                * u.entry(j - 1, k - 1);
                        }
                        assert!((left - right).camax() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn fock_conjugate_is_unitary() {
        for d in 2..=3 {
            let u = haar_sample(d, 77).unwrap();
            let fock = WeightFamily::fock(d, 10).unwrap();
            for n in 0..=8 {
                let m = composition_matrix(&u, n).unwrap().matrix;
                let w = weight_diagonal(&fock, n).unwrap();
                let s = singular_values(&conjugate_by_weights(&m, &w)).unwrap();
                assert!((s[0] - 1.0).abs() < 1e-10);
                assert!((s[s.len() - 1] - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn gram_matrices() {
        let g = fock_gram(2, 3).unwrap();
        assert_eq!(g.diagonal().as_slice(), &[6.0, 2.0, 2.0, 6.0]);
        let b = beta_gram(&WeightFamily::drury_arveson(2, 5).unwrap(), 2).unwrap();
        assert!((b[(1, 1)] - 0.5).abs() < 1e-15);
    }
}
