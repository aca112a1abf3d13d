//! Spherically balanced weights, slice representations `[μ, H²(γ)]` and
//! Reinhardt measures on the unit sphere.
//!
//! Measures are the normalized surface measure `σ`, densities `w·σ` with
//! `w` a polynomial in `|z_1|², …, |z_d|²`, or a raw moment table. For the
//! first two every moment is an exact combination of
//! `m_α(σ) = (d−1)! α! / (d−1+|α|)!`; Monte Carlo is only used for
//! cross-checks.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{
    check_degree, check_dim, enumerate_level, enumerate_up_to, sphere_multinomial, MultiIndex,
    MAX_DEGREE,
};
use crate::criteria::{classify, ratio_bounds_by, Classification, RatioBounds, Thresholds};
use crate::error::{Error, Result};
use crate::polyspace::composition_matrix;
use crate::unitary::{derive_seed, haar_sample, UnitaryMatrix};
use crate::weights::WeightFamily;

/// Seed of the fixed point set used to check density positivity.
const POSITIVITY_SEED: u64 = 0x5eed_f5fe;
const POSITIVITY_SAMPLES: usize = 4096;

/// `m_α(σ) = (d−1)! α! / (d−1+|α|)!`.
pub fn sigma_moment(alpha: &MultiIndex) -> Result<f64> {
    Ok(1.0 / sphere_multinomial(alpha)? as f64)
}

/// Uniform point on `∂B_d`: a normalized standard complex Gaussian vector.
pub fn uniform_sphere_point(d: usize, rng: &mut impl rand::Rng) -> Vec<Complex64> {
    let mut z: Vec<Complex64> = (0..d)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im)
        })
        .collect();
    let norm = z.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
    for w in &mut z {
        *w /= norm;
    }
    z
}

/// `count` deterministic sphere points.
pub fn sphere_points(d: usize, count: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| uniform_sphere_point(d, &mut rng))
        .collect()
}

fn monomial_modulus_sq(alpha: &MultiIndex, moduli_sq: &[f64]) -> f64 {
    alpha
        .components()
        .iter()
        .zip(moduli_sq)
        .map(|(&a, m)| m.powi(a as i32))
        .product()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityTerm {
    pub gamma: MultiIndex,
    pub coef: f64,
}

/// `w(z) = Σ c_γ |z_1|^{2γ_1} ⋯ |z_d|^{2γ_d}`, strictly positive on the sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    d: usize,
    terms: Vec<DensityTerm>,
    degree: u32,
}

impl Density {
    pub fn new(d: usize, terms: Vec<DensityTerm>) -> Result<Self> {
        check_dim(d)?;
        if terms.is_empty() {
            return Err(Error::InvalidMeasure("density has no terms".into()));
        }
        for t in &terms {
            if t.gamma.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: t.gamma.dim(),
                });
            }
            if !t.coef.is_finite() {
                return Err(Error::InvalidMeasure(format!(
                    "coefficient {} is not finite",
                    t.coef
                )));
            }
        }
        let degree = terms.iter().map(|t| t.gamma.degree()).max().unwrap_or(0);
        check_degree(degree, MAX_DEGREE)?;
        let density = Density { d, terms, degree };
        let mut points = sphere_points(d, POSITIVITY_SAMPLES, POSITIVITY_SEED);
        for j in 0..d {
            let mut e = vec![Complex64::new(0.0, 0.0); d];
            e[j] = Complex64::new(1.0, 0.0);
            points.push(e);
        }
        for (sample, z) in points.iter().enumerate() {
            let value = density.eval(z);
            if value.is_nan() || value <= 0.0 {
                return Err(Error::NonPositiveDensity { sample, value });
            }
        }
        Ok(density)
    }

    /// `w ≡ 1`.
    pub fn constant(d: usize) -> Result<Self> {
        Self::new(
            d,
            vec![DensityTerm {
                gamma: MultiIndex::zero(d),
                coef: 1.0,
            }],
        )
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn terms(&self) -> &[DensityTerm] {
        &self.terms
    }

    pub fn eval(&self, z: &[Complex64]) -> f64 {
        let moduli: Vec<f64> = z.iter().map(|w| w.norm_sqr()).collect();
        self.terms
            .iter()
            .map(|t| t.coef * monomial_modulus_sq(&t.gamma, &moduli))
            .sum()
    }

    /// `m_α(w·σ) = Σ c_γ m_{α+γ}(σ)`.
    pub fn moment(&self, alpha: &MultiIndex) -> Result<f64> {
        check_degree(alpha.degree() + self.degree, MAX_DEGREE)?;
        let mut total = 0.0;
        for t in &self.terms {
            total += t.coef * sigma_moment(&alpha.add(&t.gamma)?)?;
        }
        Ok(total)
    }

    /// `∫ |z^α|² w(u⁻¹·z) dσ(z)`, exact: expanding `(u⁻¹z)^γ = Σ_δ p_δ z^δ`
    /// and using orthogonality of monomials gives `Σ_γ c_γ Σ_δ |p_δ|² m_{α+δ}(σ)`.
    pub fn rotated_moment(&self, u: &UnitaryMatrix, alpha: &MultiIndex) -> Result<f64> {
        check_degree(alpha.degree() + self.degree, MAX_DEGREE)?;
        let inv = u.inverse();
        let mut total = 0.0;
        for t in &self.terms {
            let n = t.gamma.degree();
            let basis = enumerate_level(self.d, n);
            let col = basis
                .iter()
                .position(|b| *b == t.gamma)
                .expect("gamma in its level");
            let m = composition_matrix(&inv, n)?.matrix;
            let mut inner = 0.0;
            for (row, delta) in basis.iter().enumerate() {
                let p = m[(row, col)].norm_sqr();
                if p != 0.0 {
                    inner += p * sigma_moment(&alpha.add(delta)?)?;
                }
            }
            total += t.coef * inner;
        }
        Ok(total)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeasureKind {
    Sigma,
    Density(Density),
    /// Formal moment data; not checked to be the moments of a measure.
    Table {
        entries: BTreeMap<MultiIndex, f64>,
        cap: u32,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReinhardtMeasure {
    d: usize,
    kind: MeasureKind,
}

impl ReinhardtMeasure {
    pub fn sigma(d: usize) -> Result<Self> {
        check_dim(d)?;
        Ok(ReinhardtMeasure {
            d,
            kind: MeasureKind::Sigma,
        })
    }

    pub fn density(density: Density) -> Self {
        ReinhardtMeasure {
            d: density.d(),
            kind: MeasureKind::Density(density),
        }
    }

    /// Moment table covering every `|α| ≤ cap` with positive values.
    pub fn table(d: usize, cap: u32, entries: BTreeMap<MultiIndex, f64>) -> Result<Self> {
        check_dim(d)?;
        check_degree(cap, MAX_DEGREE)?;
        for (alpha, m) in &entries {
            if alpha.dim() != d || alpha.degree() > cap {
                return Err(Error::InvalidMeasure(format!(
                    "entry {alpha} outside table range"
                )));
            }
            if !m.is_finite() || *m <= 0.0 {
                return Err(Error::InvalidMeasure(format!(
                    "moment {alpha} = {m} is not positive"
                )));
            }
        }
        if let Some(missing) = enumerate_up_to(d, cap).find(|a| !entries.contains_key(a)) {
            return Err(Error::InvalidMeasure(format!(
                "missing moment for {missing}"
            )));
        }
        Ok(ReinhardtMeasure {
            d,
            kind: MeasureKind::Table { entries, cap },
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn kind(&self) -> &MeasureKind {
        &self.kind
    }

    /// Whether verdicts on this measure are formal (moment table input).
    pub fn is_formal(&self) -> bool {
        matches!(self.kind, MeasureKind::Table { .. })
    }

    /// Largest `|α|` with an available moment.
    pub fn cap(&self) -> u32 {
        match &self.kind {
            MeasureKind::Sigma => MAX_DEGREE,
            MeasureKind::Density(w) => MAX_DEGREE - w.degree(),
            MeasureKind::Table { cap, .. } => *cap,
        }
    }

    /// `m_α = ‖z^α‖²_{L²(∂B_d, μ)}`.
    pub fn moment(&self, alpha: &MultiIndex) -> Result<f64> {
        if alpha.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: alpha.dim(),
            });
        }
        check_degree(alpha.degree(), self.cap())?;
        match &self.kind {
            MeasureKind::Sigma => sigma_moment(alpha),
            MeasureKind::Density(w) => w.moment(alpha),
            MeasureKind::Table { entries, .. } => Ok(entries[alpha]),
        }
    }

    pub fn to_descriptor(&self) -> MeasureDescriptor {
        match &self.kind {
            MeasureKind::Sigma => MeasureDescriptor::Sigma,
            MeasureKind::Density(w) => MeasureDescriptor::Density {
                poly: w.terms().to_vec(),
            },
            MeasureKind::Table { entries, cap } => MeasureDescriptor::Table {
                entries: entries
                    .iter()
                    .map(|(a, m)| MomentEntry {
                        alpha: a.clone(),
                        moment: *m,
                    })
                    .collect(),
                cap: *cap,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentEntry {
    pub alpha: MultiIndex,
    pub moment: f64,
}

/// JSON form of a measure; the dimension is supplied separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureDescriptor {
    Sigma,
    Density { poly: Vec<DensityTerm> },
    Table { entries: Vec<MomentEntry>, cap: u32 },
}

impl MeasureDescriptor {
    pub fn build(&self, d: usize) -> Result<ReinhardtMeasure> {
        match self {
            MeasureDescriptor::Sigma => ReinhardtMeasure::sigma(d),
            MeasureDescriptor::Density { poly } => {
                Ok(ReinhardtMeasure::density(Density::new(d, poly.clone())?))
            }
            MeasureDescriptor::Table { entries, cap } => {
                let mut map = BTreeMap::new();
                for (i, e) in entries.iter().enumerate() {
                    if map.insert(e.alpha.clone(), e.moment).is_some() {
                        return Err(Error::param(
                            format!("entries[{i}].alpha"),
                            format!("duplicate entry {}", e.alpha),
                        ));
                    }
                }
                ReinhardtMeasure::table(d, *cap, map)
            }
        }
    }
}

/// One-variable weights `γ_n = ‖t^n‖_{H²(γ)}` normalized by `γ_0 = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RadialWeightsRepr", into = "RadialWeightsRepr")]
pub struct RadialWeights(Vec<f64>);

#[derive(Serialize, Deserialize)]
struct RadialWeightsRepr {
    gamma: Vec<f64>,
}

impl TryFrom<RadialWeightsRepr> for RadialWeights {
    type Error = Error;
    fn try_from(r: RadialWeightsRepr) -> Result<Self> {
        RadialWeights::new(r.gamma)
    }
}

impl From<RadialWeights> for RadialWeightsRepr {
    fn from(r: RadialWeights) -> Self {
        RadialWeightsRepr { gamma: r.0 }
    }
}

impl RadialWeights {
    pub fn new(gamma: Vec<f64>) -> Result<Self> {
        if gamma.is_empty() {
            return Err(Error::param("gamma", "empty sequence"));
        }
        if gamma[0] != 1.0 {
            return Err(Error::param(
                "gamma",
                format!("gamma[0] = {} but must be 1", gamma[0]),
            ));
        }
        if let Some((n, g)) = gamma
            .iter()
            .enumerate()
            .find(|(_, g)| !g.is_finite() || **g <= 0.0)
        {
            return Err(Error::param(
                "gamma",
                format!("gamma[{n}] = {g} is not positive"),
            ));
        }
        check_degree(gamma.len() as u32 - 1, MAX_DEGREE)?;
        Ok(RadialWeights(gamma))
    }

    /// `γ_n = f(n)` for `n ≤ cap`, rescaled so that `γ_0 = 1`.
    pub fn from_fn(cap: u32, f: impl Fn(u32) -> f64) -> Result<Self> {
        let g0 = f(0);
        Self::new((0..=cap).map(|n| f(n) / g0).collect())
    }

    pub fn cap(&self) -> u32 {
        self.0.len() as u32 - 1
    }

    pub fn get(&self, n: u32) -> Result<f64> {
        check_degree(n, self.cap())?;
        Ok(self.0[n as usize])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// `[μ, H²(γ)]` with `β_α = γ_{|α|} √(m_α)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceRepresentation {
    pub measure: ReinhardtMeasure,
    pub gamma: RadialWeights,
}

impl SliceRepresentation {
    pub fn new(measure: ReinhardtMeasure, gamma: RadialWeights) -> Self {
        SliceRepresentation { measure, gamma }
    }

    pub fn d(&self) -> usize {
        self.measure.d()
    }

    pub fn cap(&self) -> u32 {
        self.measure.cap().min(self.gamma.cap())
    }

    /// `β_α = γ_{|α|} ‖z^α‖_{L²(μ)}`.
    pub fn compose_slice(&self, alpha: &MultiIndex) -> Result<f64> {
        Ok(self.gamma.get(alpha.degree())? * self.measure.moment(alpha)?.sqrt())
    }

    /// The induced weight family, tabulated up to `cap`.
    pub fn to_family(&self, cap: u32) -> Result<WeightFamily> {
        check_degree(cap, self.cap())?;
        let entries = enumerate_up_to(self.d(), cap)
            .map(|a| self.compose_slice(&a).map(|b| (a, b)))
            .collect::<Result<_>>()?;
        WeightFamily::table(self.d(), cap, entries)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceWitness {
    pub alpha: MultiIndex,
    /// One-based directions.
    pub i: usize,
    pub j: usize,
    pub sum_i: f64,
    pub sum_j: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BalanceCheck {
    pub balanced: bool,
    /// Largest relative deviation seen before stopping.
    pub max_deviation: f64,
    pub witness: Option<BalanceWitness>,
}

/// `Σ_k β²_{α+ε_i+ε_k} / β²_{α+ε_i}` must not depend on `i`, for all `|α| ≤ N`.
pub fn is_spherically_balanced(
    family: &WeightFamily,
    levels: u32,
    tol: f64,
) -> Result<BalanceCheck> {
    family.check_cap(levels + 2)?;
    let d = family.d();
    let mut max_deviation = 0.0f64;
    for alpha in enumerate_up_to(d, levels) {
        let sums = (0..d)
            .map(|i| {
                let up = alpha.raised(i);
                let denom = family.beta(&up)?.powi(2);
                (0..d)
                    .map(|k| Ok(family.beta(&up.raised(k))?.powi(2) / denom))
                    .sum::<Result<f64>>()
            })
            .collect::<Result<Vec<_>>>()?;
        for (i, &s) in sums.iter().enumerate().skip(1) {
            let dev = (s - sums[0]).abs() / sums[0].abs();
            max_deviation = max_deviation.max(dev);
            if dev > tol {
                return Ok(BalanceCheck {
                    balanced: false,
                    max_deviation,
                    witness: Some(BalanceWitness {
                        alpha,
                        i: 1,
                        j: i + 1,
                        sum_i: sums[0],
                        sum_j: s,
                    }),
                });
            }
        }
    }
    Ok(BalanceCheck {
        balanced: true,
        max_deviation,
        witness: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceVerification {
    pub matches: bool,
    pub max_relative_error: f64,
    pub worst: MultiIndex,
}

/// Checks `β_α = γ_{|α|} √(m_α)` for all `|α| ≤ N`.
pub fn verify_slice(
    family: &WeightFamily,
    rep: &SliceRepresentation,
    levels: u32,
    tol: f64,
) -> Result<SliceVerification> {
    if family.d() != rep.d() {
        return Err(Error::DimensionMismatch {
            expected: family.d(),
            found: rep.d(),
        });
    }
    family.check_cap(levels)?;
    check_degree(levels, rep.cap())?;
    let mut out = SliceVerification {
        matches: true,
        max_relative_error: 0.0,
        worst: MultiIndex::zero(family.d()),
    };
    for alpha in enumerate_up_to(family.d(), levels) {
        let target = rep.compose_slice(&alpha)?;
        let err = (family.beta(&alpha)? - target).abs() / target;
        if err > out.max_relative_error {
            out.max_relative_error = err;
            out.worst = alpha;
        }
    }
    out.matches = out.max_relative_error <= tol;
    Ok(out)
}

/// `m_α(w·σ)`.
pub fn density_moment(w: &Density, alpha: &MultiIndex) -> Result<f64> {
    w.moment(alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RnBounds {
    pub k_est: f64,
    pub big_k_est: f64,
}

/// Range of `d(μ∘u⁻¹)/dμ (z) = w(u⁻¹z)/w(z)` over `S` uniform sphere points.
pub fn rn_bound_sample(
    w: &Density,
    u: &UnitaryMatrix,
    samples: usize,
    seed: u64,
) -> Result<RnBounds> {
    if u.d() != w.d() {
        return Err(Error::DimensionMismatch {
            expected: w.d(),
            found: u.d(),
        });
    }
    if samples == 0 {
        return Err(Error::param("samples", "must be at least 1"));
    }
    let inv = u.inverse();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = RnBounds {
        k_est: f64::INFINITY,
        big_k_est: f64::NEG_INFINITY,
    };
    for sample in 0..samples {
        let z = uniform_sphere_point(w.d(), &mut rng);
        let base = w.eval(&z);
        let moved = w.eval(&inv.apply(&z)?);
        if base.is_nan() || base <= 0.0 {
            return Err(Error::NonPositiveDensity {
                sample,
                value: base,
            });
        }
        if moved.is_nan() || moved <= 0.0 {
            return Err(Error::NonPositiveDensity {
                sample,
                value: moved,
            });
        }
        let r = moved / base;
        out.k_est = out.k_est.min(r);
        out.big_k_est = out.big_k_est.max(r);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SzegoCheck {
    /// Extremes of `r_α = √(m_α(μ)/m_α(σ))` over `|α| ≤ N`.
    pub bounds: RatioBounds,
    /// `max r / min r` over `|α| ≤ n`, for `n = 1..N`.
    pub spread: Vec<f64>,
    pub classification: Classification,
    pub tail_slope: f64,
    pub tail_ratio: f64,
    pub thresholds: Thresholds,
    /// True when `μ` is a bare moment table.
    pub formal: bool,
}

impl SzegoCheck {
    pub fn k1_est(&self) -> f64 {
        self.bounds.min
    }

    pub fn big_k1_est(&self) -> f64 {
        self.bounds.max
    }
}

/// Compares the moments of `μ` with those of `σ`. The cumulative spread
/// `max r / min r` is classified with the level-growth thresholds.
pub fn szego_similarity_check(
    measure: &ReinhardtMeasure,
    levels: u32,
    thresholds: Thresholds,
) -> Result<SzegoCheck> {
    check_degree(levels, measure.cap())?;
    let d = measure.d();
    let ratio =
        |a: &MultiIndex| -> Result<f64> { Ok((measure.moment(a)? / sigma_moment(a)?).sqrt()) };
    let bounds = ratio_bounds_by(d, levels, ratio)?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut spread = Vec::with_capacity(levels as usize);
    for n in 0..=levels {
        for alpha in enumerate_level(d, n) {
            let r = ratio(&alpha)?;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        if n > 0 {
            spread.push(hi / lo);
        }
    }
    let verdict = classify(&spread, thresholds)?;
    Ok(SzegoCheck {
        bounds,
        spread,
        classification: verdict.classification,
        tail_slope: verdict.tail_slope,
        tail_ratio: verdict.tail_ratio,
        thresholds,
        formal: measure.is_formal(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HaarAverageReport {
    pub test_alphas: Vec<MultiIndex>,
    /// Monte-Carlo moments of `ν = ∫ μ∘u⁻¹ du`.
    pub estimates: Vec<f64>,
    pub sigma_moments: Vec<f64>,
    /// `estimate / m_α(σ)`; all equal to `ν(∂B_d)` in the limit.
    pub ratios: Vec<f64>,
    /// Mean of the ratios.
    pub common_constant: f64,
    /// `max |ratio / common − 1|`.
    pub max_relative_spread: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Averages the exact moments of `(w∘u⁻¹)·σ` over `S` Haar samples.
pub fn haar_average_density(
    w: &Density,
    samples: usize,
    seed: u64,
    test_alphas: &[MultiIndex],
) -> Result<HaarAverageReport> {
    if samples == 0 {
        return Err(Error::param("samples", "must be at least 1"));
    }
    if test_alphas.is_empty() {
        return Err(Error::param("alphas", "no test multi-indices"));
    }
    let d = w.d();
    let per_sample: Vec<Vec<f64>> = (0..samples as u64)
        .into_par_iter()
        .map(|s| {
            let u = haar_sample(d, derive_seed(seed, s))?;
            test_alphas
                .iter()
                .map(|a| w.rotated_moment(&u, a))
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut estimates = vec![0.0; test_alphas.len()];
    for row in &per_sample {
        for (e, x) in estimates.iter_mut().zip(row) {
            *e += x;
        }
    }
    for e in &mut estimates {
        *e /= samples as f64;
    }
    let sigma_moments = test_alphas
        .iter()
        .map(sigma_moment)
        .collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = estimates
        .iter()
        .zip(&sigma_moments)
        .map(|(e, s)| e / s)
        .collect();
    let common_constant = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let max_relative_spread = ratios
        .iter()
        .map(|r| (r / common_constant - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(HaarAverageReport {
        test_alphas: test_alphas.to_vec(),
        estimates,
        sigma_moments,
        ratios,
        common_constant,
        max_relative_spread,
        samples,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub alpha: MultiIndex,
    pub mean: f64,
    pub standard_error: f64,
    pub closed_form: f64,
}

impl MomentEstimate {
    /// `|mean − closed form|` in units of the standard error.
    pub fn z_score(&self) -> f64 {
        (self.mean - self.closed_form).abs() / self.standard_error
    }
}

/// Monte-Carlo estimates of `∫ |z^α|² dσ` from uniform sphere points, for
/// validating [`sigma_moment`].
pub fn sphere_moment_monte_carlo(
    d: usize,
    alphas: &[MultiIndex],
    samples: usize,
    seed: u64,
) -> Result<Vec<MomentEstimate>> {
    check_dim(d)?;
    if samples < 2 {
        return Err(Error::param("samples", "must be at least 2"));
    }
    const BLOCK: usize = 8192;
    let blocks = samples.div_ceil(BLOCK);
    let partial: Vec<(Vec<f64>, Vec<f64>)> = (0..blocks as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, b));
            let count = BLOCK.min(samples - b as usize * BLOCK);
            let mut sum = vec![0.0; alphas.len()];
            let mut sum_sq = vec![0.0; alphas.len()];
            for _ in 0..count {
                let z = uniform_sphere_point(d, &mut rng);
                let moduli: Vec<f64> = z.iter().map(|w| w.norm_sqr()).collect();
                for (i, a) in alphas.iter().enumerate() {
                    let x = monomial_modulus_sq(a, &moduli);
                    sum[i] += x;
                    sum_sq[i] += x * x;
                }
            }
            (sum, sum_sq)
        })
        .collect();
    let n = samples as f64;
    alphas
        .iter()
        .enumerate()
        .map(|(i, a)| {
            if a.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: a.dim(),
                });
            }
            let s: f64 = partial.iter().map(|p| p.0[i]).sum();
            let s2: f64 = partial.iter().map(|p| p.1[i]).sum();
            let mean = s / n;
            let var = (s2 / n - mean * mean) * n / (n - 1.0);
            Ok(MomentEstimate {
                alpha: a.clone(),
                mean,
                standard_error: (var.max(0.0) / n).sqrt(),
                closed_form: sigma_moment(a)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn half_z1(d: usize) -> Density {
        let mut g = vec![0; d];
        g[0] = 1;
        Density::new(
            d,
            vec![
                DensityTerm {
                    gamma: MultiIndex::zero(d),
                    coef: 1.0,
                },
                DensityTerm {
                    gamma: MultiIndex::new(g).unwrap(),
                    coef: 0.5,
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn sigma_moment_values() {
        assert!((sigma_moment(&MultiIndex::from([1, 1])).unwrap() - 1.0 / 6.0).abs() < 1e-16);
        assert_eq!(sigma_moment(&MultiIndex::from([1, 0])).unwrap(), 0.5);
        assert!((sigma_moment(&MultiIndex::from([2, 0])).unwrap() - 1.0 / 3.0).abs() < 1e-16);
        assert_eq!(sigma_moment(&MultiIndex::zero(3)).unwrap(), 1.0);
    }

    #[test]
    fn density_moment_examples() {
        let one = Density::constant(2).unwrap();
        let a = MultiIndex::from([2, 3]);
        assert_eq!(density_moment(&one, &a).unwrap(), sigma_moment(&a).unwrap());

        let w = half_z1(2);
        assert!((density_moment(&w, &MultiIndex::zero(2)).unwrap() - 1.25).abs() < 1e-15);
        assert!((density_moment(&w, &MultiIndex::from([1, 0])).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn density_positivity_enforced() {
        let bad = Density::new(
            2,
            vec![
                DensityTerm {
                    gamma: MultiIndex::zero(2),
                    coef: 1.0,
                },
                DensityTerm {
                    gamma: MultiIndex::from([1, 0]),
                    coef: -1.5,
                },
            ],
        );
        assert!(matches!(bad, Err(Error::NonPositiveDensity { .. })));
        // w = |z1|^2 vanishes at e2
        let zero_at_axis = Density::new(
            2,
            vec![DensityTerm {
                gamma: MultiIndex::from([1, 0]),
                coef: 1.0,
            }],
        );
        assert!(matches!(
            zero_at_axis,
            Err(Error::NonPositiveDensity { .. })
        ));
    }

    #[test]
    fn compose_slice_examples() {
        let rep = SliceRepresentation::new(
            ReinhardtMeasure::sigma(2).unwrap(),
            RadialWeights::new(vec![1.0; 11]).unwrap(),
        );
        let b = rep.compose_slice(&MultiIndex::from([1, 1])).unwrap();
        assert!((b - (1.0f64 / 6.0).sqrt()).abs() < 1e-15);

        let rep = SliceRepresentation::new(
            ReinhardtMeasure::sigma(2).unwrap(),
            RadialWeights::from_fn(10, |n| ((n + 1) as f64).sqrt()).unwrap(),
        );
        let b = rep.compose_slice(&MultiIndex::from([1, 0])).unwrap();
        assert!((b - 1.0).abs() < 1e-15);

        let ones: BTreeMap<MultiIndex, f64> = enumerate_up_to(2, 8).map(|a| (a, 1.0)).collect();
        let rep = SliceRepresentation::new(
            ReinhardtMeasure::table(2, 8, ones).unwrap(),
            RadialWeights::new(vec![1.0; 9]).unwrap(),
        );
        let fam = rep.to_family(8).unwrap();
        let hardy = WeightFamily::polydisc_hardy(2, 8).unwrap();
        for a in enumerate_up_to(2, 8) {
            assert_eq!(fam.beta(&a).unwrap(), hardy.beta(&a).unwrap());
        }
    }

    #[test]
    fn radial_weights_normalization() {
        assert!(RadialWeights::new(vec![2.0, 1.0]).is_err());
        assert!(RadialWeights::new(vec![1.0, 0.0]).is_err());
        let g = RadialWeights::from_fn(3, |n| 2.0 * (n + 1) as f64).unwrap();
        assert_eq!(g.values(), &[1.0, 2.0, 3.0, 4.0]);
        let json = serde_json::to_string(&g).unwrap();
        assert_eq!(json, r#"{"gamma":[1.0,2.0,3.0,4.0]}"#);
        assert_eq!(serde_json::from_str::<RadialWeights>(&json).unwrap(), g);
        assert!(serde_json::from_str::<RadialWeights>(r#"{"gamma":[3.0]}"#).is_err());
    }

    #[test]
    fn balanced_examples() {
        let hardy = WeightFamily::polydisc_hardy(2, 12).unwrap();
        let check = is_spherically_balanced(&hardy, 10, 1e-12).unwrap();
        assert!(check.balanced);
        assert_eq!(check.max_deviation, 0.0);

        let szego = WeightFamily::szego(2, 12).unwrap();
        assert!(is_spherically_balanced(&szego, 10, 1e-12).unwrap().balanced);
        let a: Vec<f64> = (0..=12)
            .map(|n| 0.5 + ((n * 7919) % 13) as f64 / 13.0)
            .collect();
        let random_radial = WeightFamily::radial(3, a).unwrap();
        assert!(
            is_spherically_balanced(&random_radial, 10, 1e-12)
                .unwrap()
                .balanced
        );

        let mut entries: BTreeMap<MultiIndex, f64> =
            enumerate_up_to(2, 6).map(|a| (a, 1.0)).collect();
        entries.insert(MultiIndex::from([1, 0]), 1.1);
        let perturbed = WeightFamily::table(2, 6, entries).unwrap();
        let check = is_spherically_balanced(&perturbed, 4, 1e-12).unwrap();
        assert!(!check.balanced);
        let w = check.witness.unwrap();
        assert_eq!(w.alpha, MultiIndex::zero(2));
        assert_eq!((w.i, w.j), (1, 2));
        assert!((w.sum_i - 2.0 / 1.21).abs() < 1e-12);
        assert!((w.sum_j - (1.0 + 1.0)).abs() < 1e-12);

        assert!(is_spherically_balanced(&hardy, 11, 1e-12).is_err());
    }

    #[test]
    fn verify_slice_examples() {
        let sigma = ReinhardtMeasure::sigma(2).unwrap();
        let rep = SliceRepresentation::new(sigma, RadialWeights::new(vec![1.0; 13]).unwrap());
        let fam = rep.to_family(12).unwrap();
        let v = verify_slice(&fam, &rep, 12, 0.0).unwrap();
        assert!(v.matches && v.max_relative_error == 0.0);

        let szego = WeightFamily::szego(2, 12).unwrap();
        assert!(verify_slice(&szego, &rep, 12, 1e-14).unwrap().matches);

        let da = WeightFamily::drury_arveson(2, 12).unwrap();
        let v6 = verify_slice(&da, &rep, 6, 1e-12).unwrap();
        let v12 = verify_slice(&da, &rep, 12, 1e-12).unwrap();
        assert!(!v12.matches);
        // relative error √(n+1) − 1 at the top level
        assert!((v12.max_relative_error - (13f64.sqrt() - 1.0)).abs() < 1e-12);
        assert!(v12.max_relative_error > v6.max_relative_error);
    }

    #[test]
    fn rn_bound_examples() {
        let one = Density::constant(2).unwrap();
        let u = haar_sample(2, 3).unwrap();
        let b = rn_bound_sample(&one, &u, 500, 1).unwrap();
        assert_eq!((b.k_est, b.big_k_est), (1.0, 1.0));

        let w = half_z1(2);
        let id = UnitaryMatrix::identity(2).unwrap();
        let b = rn_bound_sample(&w, &id, 500, 1).unwrap();
        assert_eq!((b.k_est, b.big_k_est), (1.0, 1.0));

        let b = rn_bound_sample(&w, &UnitaryMatrix::swap(), 10_000, 2).unwrap();
        assert!(b.k_est >= 2.0 / 3.0 - 1e-12 && b.big_k_est <= 1.5 + 1e-12);
        assert!(b.k_est < 0.7 && b.big_k_est > 1.45);
    }

    #[test]
    fn rn_chain_rule_brackets_one() {
        let w = half_z1(3);
        for s in 0..5 {
            let u = haar_sample(3, 40 + s).unwrap();
            let fwd = rn_bound_sample(&w, &u, 4000, s).unwrap();
            let back = rn_bound_sample(&w, &u.inverse(), 4000, s + 100).unwrap();
            assert!(fwd.k_est * back.big_k_est >= 1.0 - 0.05);
            assert!(back.k_est * fwd.big_k_est >= 1.0 - 0.05);
        }
    }

    #[test]
    fn szego_check_examples() {
        let t = Thresholds::default();
        let c = szego_similarity_check(&ReinhardtMeasure::sigma(2).unwrap(), 15, t).unwrap();
        assert_eq!((c.k1_est(), c.big_k1_est()), (1.0, 1.0));
        assert_eq!(c.classification, Classification::Bounded);

        let mu = ReinhardtMeasure::density(half_z1(2));
        let c = szego_similarity_check(&mu, 15, t).unwrap();
        assert!(c.k1_est() >= (2.0f64 / 3.0).sqrt() && c.big_k1_est() <= 1.5f64.sqrt());
        // moment ratios are averages of w, which lies in [1, 3/2]
        assert!(c.k1_est() >= 1.0 - 1e-15);
        assert_eq!(c.classification, Classification::Bounded);
        assert!(!c.formal);

        let ones: BTreeMap<MultiIndex, f64> = enumerate_up_to(2, 15).map(|a| (a, 1.0)).collect();
        let table = ReinhardtMeasure::table(2, 15, ones).unwrap();
        let c = szego_similarity_check(&table, 15, t).unwrap();
        assert_eq!(c.classification, Classification::Divergent);
        assert!(c.formal);
        // r_(n,0) = √(n+1)
        let r = (table.moment(&MultiIndex::from([15, 0])).unwrap()
            / sigma_moment(&MultiIndex::from([15, 0])).unwrap())
        .sqrt();
        assert!((r - 4.0).abs() < 1e-12);
    }

    #[test]
    fn rotated_moment_reduces_for_diagonal_unitaries() {
        let w = half_z1(2);
        let t = UnitaryMatrix::torus_angles(&[0.3, 1.9]).unwrap();
        for a in enumerate_up_to(2, 4) {
            assert!((w.rotated_moment(&t, &a).unwrap() - w.moment(&a).unwrap()).abs() < 1e-15);
        }
        // the swap moves the weight to z2
        let a = MultiIndex::from([1, 0]);
        let swapped = w.rotated_moment(&UnitaryMatrix::swap(), &a).unwrap();
        let expected =
            sigma_moment(&a).unwrap() + 0.5 * sigma_moment(&MultiIndex::from([1, 1])).unwrap();
        assert!((swapped - expected).abs() < 1e-15);
    }

    #[test]
    fn rotated_moment_matches_quadrature() {
        // Monte-Carlo integration of |z^α|² w(u⁻¹z) over the sphere
        let w = half_z1(2);
        let u = UnitaryMatrix::rotation(2, PI / 5.0, (1, 2)).unwrap();
        let inv = u.inverse();
        let alpha = MultiIndex::from([1, 1]);
        let pts = sphere_points(2, 200_000, 77);
        let vals: Vec<f64> = pts
            .iter()
            .map(|z| {
                let m: Vec<f64> = z.iter().map(|x| x.norm_sqr()).collect();
                monomial_modulus_sq(&alpha, &m) * w.eval(&inv.apply(z).unwrap())
            })
            .collect();
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let se = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
        let exact = w.rotated_moment(&u, &alpha).unwrap();
        assert!(
            (mean - exact).abs() <= 4.0 * se,
            "{mean} vs {exact} (se {se})"
        );
    }

    #[test]
    fn haar_average_examples() {
        let alphas = [
            MultiIndex::zero(2),
            MultiIndex::from([1, 0]),
            MultiIndex::from([0, 1]),
        ];
        let one = Density::constant(2).unwrap();
        let r = haar_average_density(&one, 50, 1, &alphas).unwrap();
        for (e, s) in r.estimates.iter().zip(&r.sigma_moments) {
            assert!((e - s).abs() < 1e-14);
        }
        assert!((r.common_constant - 1.0).abs() < 1e-14);

        let w = half_z1(2);
        let r = haar_average_density(&w, 2000, 9, &alphas).unwrap();
        assert!((r.ratios[0] - 1.25).abs() < 1e-14);
        assert!(r.max_relative_spread < 0.03);
        assert!((r.common_constant - 1.25).abs() < 0.03 * 1.25);
        assert!((r.estimates[1] - r.estimates[2]).abs() < 0.03 * r.estimates[1]);
    }

    #[test]
    fn descriptor_round_trip() {
        let json =
            r#"{"kind":"density","poly":[{"gamma":[0,0],"coef":1.0},{"gamma":[1,0],"coef":0.5}]}"#;
        let desc: MeasureDescriptor = serde_json::from_str(json).unwrap();
        let mu = desc.build(2).unwrap();
        assert_eq!(mu, ReinhardtMeasure::density(half_z1(2)));
        assert_eq!(mu.to_descriptor(), desc);
        let sigma: MeasureDescriptor = serde_json::from_str(r#"{"kind":"sigma"}"#).unwrap();
        assert_eq!(sigma.build(3).unwrap(), ReinhardtMeasure::sigma(3).unwrap());
        let table =
            ReinhardtMeasure::table(2, 2, enumerate_up_to(2, 2).map(|a| (a, 0.5)).collect())
                .unwrap();
        let text = serde_json::to_string(&table.to_descriptor()).unwrap();
        let back: MeasureDescriptor = serde_json::from_str(&text).unwrap();
        assert_eq!(back.build(2).unwrap(), table);
    }

    #[test]
    fn sphere_moment_closed_form_small_check() {
        let alphas = [MultiIndex::from([1, 0]), MultiIndex::from([2, 1])];
        let est = sphere_moment_monte_carlo(2, &alphas, 50_000, 4).unwrap();
        for e in est {
            assert!(e.z_score() < 4.0, "{e:?}");
        }
    }
}
