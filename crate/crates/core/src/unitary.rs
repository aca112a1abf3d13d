//! Unitary matrices acting on `C^d` by `(u·z)_j = Σ_k u_{jk} z_k`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::combinatorics::check_dim;
use crate::error::{Error, Result};

/// Tolerance on `‖u*u − I‖_max` at construction.
pub const UNITARITY_TOL: f64 = 1e-12;
/// Tolerance on `||det u| − 1|` at construction.
pub const DETERMINANT_TOL: f64 = 1e-10;

pub type CMatrix = DMatrix<Complex64>;

#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    entries: CMatrix,
}

impl UnitaryMatrix {
    /// Validates unitarity before wrapping.
    pub fn new(entries: CMatrix) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::InvalidUnitary(format!(
                "matrix is {}x{}, not square",
                entries.nrows(),
                entries.ncols()
            )));
        }
        check_dim(entries.nrows())?;
        if entries
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidUnitary("non-finite entry".into()));
        }
        let defect = unitarity_defect(&entries);
        if defect > UNITARITY_TOL {
            return Err(Error::InvalidUnitary(format!(
                "|u*u - I|_max = {defect:e} exceeds {UNITARITY_TOL:e}"
            )));
        }
        let det = entries.clone().determinant().norm();
        if (det - 1.0).abs() > DETERMINANT_TOL {
            return Err(Error::InvalidUnitary(format!("|det u| = {det}")));
        }
        Ok(UnitaryMatrix { entries })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidUnitary("rows of unequal length".into()));
        }
        Self::new(CMatrix::from_fn(d, d, |j, k| rows[j][k]))
    }

    pub fn identity(d: usize) -> Result<Self> {
        check_dim(d)?;
        Ok(UnitaryMatrix {
            entries: CMatrix::identity(d, d),
        })
    }

    /// Permutation with `(u·z)_j = z_{π(j)}`; `pi` is one-based.
    pub fn permutation(pi: &[usize]) -> Result<Self> {
        let d = pi.len();
        check_dim(d)?;
        let mut seen = vec![false; d];
        for &p in pi {
            if p == 0 || p > d || seen[p - 1] {
                return Err(Error::InvalidUnitary(format!(
                    "{pi:?} is not a permutation of 1..={d}"
                )));
            }
            seen[p - 1] = true;
        }
        let mut m = CMatrix::zeros(d, d);
        for (j, &p) in pi.iter().enumerate() {
            m[(j, p - 1)] = Complex64::new(1.0, 0.0);
        }
        Ok(UnitaryMatrix { entries: m })
    }

    /// The coordinate swap of `C^2`.
    pub fn swap() -> Self {
        Self::permutation(&[2, 1]).expect("valid permutation")
    }

    /// Diagonal `diag(t_1, …, t_d)` with unimodular `t_j`.
    pub fn torus(t: &[Complex64]) -> Result<Self> {
        check_dim(t.len())?;
        if let Some(bad) = t.iter().find(|z| (z.norm() - 1.0).abs() > UNITARITY_TOL) {
            return Err(Error::InvalidUnitary(format!(
                "torus entry {bad} is not unimodular"
            )));
        }
        Ok(UnitaryMatrix {
            entries: CMatrix::from_diagonal(&DVector::from_column_slice(t)),
        })
    }

    /// Diagonal with entries `e^{iθ_j}`.
    pub fn torus_angles(angles: &[f64]) -> Result<Self> {
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidUnitary("non-finite torus angle".into()));
        }
        let t: Vec<Complex64> = angles
            .iter()
            .map(|&a| Complex64::from_polar(1.0, a))
            .collect();
        Self::torus(&t)
    }

    /// Real rotation by `angle` in the coordinate plane `(j, k)` (one-based):
    /// the `2×2` block is `[[c, s], [−s, c]]`.
    pub fn rotation(d: usize, angle: f64, plane: (usize, usize)) -> Result<Self> {
        check_dim(d)?;
        let (j, k) = plane;
        if j == 0 || k == 0 || j > d || k > d || j == k {
            return Err(Error::InvalidUnitary(format!(
                "plane ({j}, {k}) is not a pair of distinct coordinates in 1..={d}"
            )));
        }
        if !angle.is_finite() {
            return Err(Error::InvalidUnitary(format!(
                "angle {angle} is not finite"
            )));
        }
        let (s, c) = angle.sin_cos();
        let mut m = CMatrix::identity(d, d);
        m[(j - 1, j - 1)] = Complex64::new(c, 0.0);
        m[(j - 1, k - 1)] = Complex64::new(s, 0.0);
        m[(k - 1, j - 1)] = Complex64::new(-s, 0.0);
        m[(k - 1, k - 1)] = Complex64::new(c, 0.0);
        Ok(UnitaryMatrix { entries: m })
    }

    /// Discrete Fourier matrix `ω^{jk}/√d`.
    pub fn fourier(d: usize) -> Result<Self> {
        check_dim(d)?;
        let scale = 1.0 / (d as f64).sqrt();
        Ok(UnitaryMatrix {
            entries: CMatrix::from_fn(d, d, |j, k| {
                Complex64::from_polar(scale, 2.0 * PI * ((j * k) % d) as f64 / d as f64)
            }),
        })
    }

    pub fn d(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn entry(&self, j: usize, k: usize) -> Complex64 {
        self.entries[(j, k)]
    }

    /// `u⁻¹ = u*`.
    pub fn inverse(&self) -> Self {
        UnitaryMatrix {
            entries: self.entries.adjoint(),
        }
    }

    /// Matrix product `self · other`.
    pub fn compose(&self, other: &UnitaryMatrix) -> Result<Self> {
        if self.d() != other.d() {
            return Err(Error::DimensionMismatch {
                expected: self.d(),
                found: other.d(),
            });
        }
        Ok(UnitaryMatrix {
            entries: &self.entries * &other.entries,
        })
    }

    /// `u·z`.
    pub fn apply(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        if z.len() != self.d() {
            return Err(Error::DimensionMismatch {
                expected: self.d(),
                found: z.len(),
            });
        }
        let v = &self.entries * DVector::from_column_slice(z);
        Ok(v.iter().copied().collect())
    }

    pub fn to_rows(&self) -> Vec<Vec<[f64; 2]>> {
        (0..self.d())
            .map(|j| {
                (0..self.d())
                    .map(|k| {
                        let z = self.entries[(j, k)];
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect()
    }
}

/// `max |(u*u − I)_{jk}|`.
pub fn unitarity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let gram = m.adjoint() * m;
    let mut worst = 0.0f64;
    for j in 0..n {
        for k in 0..n {
            let target = if j == k { 1.0 } else { 0.0 };
            worst = worst.max((gram[(j, k)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Seed for the `index`-th member of a batch drawn under `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(0x632b_e59b_d9b4_e019)))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Complex `d×d` matrix with iid standard complex Gaussian entries.
pub fn ginibre(d: usize, rng: &mut impl rand::Rng) -> CMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(d, d, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(scale * re, scale * im)
    })
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the columns of `Q`
/// rescaled by the phases of `diag(R)`.
pub fn haar_sample(d: usize, seed: u64) -> Result<UnitaryMatrix> {
    check_dim(d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = ginibre(d, &mut rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..d {
        let diag = r[(k, k)];
        let norm = diag.norm();
        if norm == 0.0 {
            return Err(Error::Numeric("singular Ginibre sample".into()));
        }
        let phase = diag / norm;
        for j in 0..d {
            q[(j, k)] *= phase;
        }
    }
    UnitaryMatrix::new(q)
}

/// `count` Haar samples with per-index derived seeds.
pub fn haar_batch(d: usize, seed: u64, count: usize) -> Result<Vec<UnitaryMatrix>> {
    use rayon::prelude::*;
    (0..count as u64)
        .into_par_iter()
        .map(|s| haar_sample(d, derive_seed(seed, s)))
        .collect()
}

/// JSON form of a unitary. The dimension comes from the accompanying
/// weight or measure descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum UnitaryDescriptor {
    Identity,
    Haar {
        seed: u64,
    },
    Rotation {
        angle: f64,
        plane: [usize; 2],
    },
    Permutation {
        pi: Vec<usize>,
    },
    /// Angles `θ_j` of `t_j = e^{iθ_j}`.
    Torus {
        phases: Vec<f64>,
    },
    Fourier,
    /// Rows of `[re, im]` pairs.
    Explicit {
        entries: Vec<Vec<[f64; 2]>>,
    },
}

impl UnitaryDescriptor {
    pub fn build(&self, d: usize) -> Result<UnitaryMatrix> {
        let u = match self {
            UnitaryDescriptor::Identity => UnitaryMatrix::identity(d)?,
            UnitaryDescriptor::Haar { seed } => haar_sample(d, *seed)?,
            UnitaryDescriptor::Rotation { angle, plane } => {
                UnitaryMatrix::rotation(d, *angle, (plane[0], plane[1]))?
            }
            UnitaryDescriptor::Permutation { pi } => UnitaryMatrix::permutation(pi)?,
            UnitaryDescriptor::Torus { phases } => UnitaryMatrix::torus_angles(phases)?,
            UnitaryDescriptor::Fourier => UnitaryMatrix::fourier(d)?,
            UnitaryDescriptor::Explicit { entries } => {
                let rows: Vec<Vec<Complex64>> = entries
                    .iter()
                    .map(|r| r.iter().map(|[re, im]| Complex64::new(*re, *im)).collect())
                    .collect();
                UnitaryMatrix::from_rows(&rows)?
            }
        };
        if u.d() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: u.d(),
            });
        }
        Ok(u)
    }
}
