//! Weight multisequences `β_α = ‖z^α‖` defining the spaces `H²(β)`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{
    check_degree, check_dim, enumerate_up_to, multinomial, sphere_multinomial, MultiIndex,
    MAX_DEGREE,
};
use crate::error::{Error, Result};

/// How `β_α` is produced.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilyKind {
    /// `β_α = a_{|α|} √((d−1)! α! / (d−1+|α|)!)`.
    Radial { a: Vec<f64> },
    /// `β_α = √(α!/|α|!)`.
    DruryArveson,
    /// `β_α = 1`.
    PolydiscHardy,
    /// Fischer–Fock weights `β_α = √(α!)`.
    Fock,
    /// Explicit values for every `|α| ≤ cap`.
    Table { entries: BTreeMap<MultiIndex, f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightFamily {
    d: usize,
    cap: u32,
    kind: FamilyKind,
}

impl WeightFamily {
    /// Radial family; the cap is `a.len() − 1`.
    pub fn radial(d: usize, a: Vec<f64>) -> Result<Self> {
        check_dim(d)?;
        if a.is_empty() {
            return Err(Error::InvalidWeights("radial sequence `a` is empty".into()));
        }
        if let Some((n, x)) = a
            .iter()
            .enumerate()
            .find(|(_, x)| !(**x > 0.0 && x.is_finite()))
        {
            return Err(Error::InvalidWeights(format!(
                "a[{n}] = {x} is not positive"
            )));
        }
        let cap = (a.len() - 1) as u32;
        check_degree(cap, MAX_DEGREE)?;
        Ok(WeightFamily {
            d,
            cap,
            kind: FamilyKind::Radial { a },
        })
    }

    /// Radial family with `a_n = 1` up to `cap`: the Szegő weights.
    pub fn szego(d: usize, cap: u32) -> Result<Self> {
        Self::radial(d, vec![1.0; cap as usize + 1])
    }

    pub fn drury_arveson(d: usize, cap: u32) -> Result<Self> {
        Self::named(d, cap, FamilyKind::DruryArveson)
    }

    pub fn polydisc_hardy(d: usize, cap: u32) -> Result<Self> {
        Self::named(d, cap, FamilyKind::PolydiscHardy)
    }

    pub fn fock(d: usize, cap: u32) -> Result<Self> {
        Self::named(d, cap, FamilyKind::Fock)
    }

    fn named(d: usize, cap: u32, kind: FamilyKind) -> Result<Self> {
        check_dim(d)?;
        check_degree(cap, MAX_DEGREE)?;
        Ok(WeightFamily { d, cap, kind })
    }

    /// Table family. Every `α` with `|α| ≤ cap` must be present with a
    /// positive finite value; entries above the cap are rejected.
    pub fn table(d: usize, cap: u32, entries: BTreeMap<MultiIndex, f64>) -> Result<Self> {
        check_dim(d)?;
        check_degree(cap, MAX_DEGREE)?;
        for (alpha, beta) in &entries {
            if alpha.dim() != d {
                return Err(Error::InvalidWeights(format!(
                    "entry {alpha} has {} components, expected {d}",
                    alpha.dim()
                )));
            }
            if alpha.degree() > cap {
                return Err(Error::InvalidWeights(format!(
                    "entry {alpha} exceeds cap {cap}"
                )));
            }
            if !(*beta > 0.0 && beta.is_finite()) {
                return Err(Error::InvalidWeights(format!(
                    "beta{alpha} = {beta} is not positive"
                )));
            }
        }
        if let Some(missing) = enumerate_up_to(d, cap).find(|a| !entries.contains_key(a)) {
            return Err(Error::InvalidWeights(format!(
                "missing entry for {missing}"
            )));
        }
        Ok(WeightFamily {
            d,
            cap,
            kind: FamilyKind::Table { entries },
        })
    }

    /// Tabulates any family up to `cap`.
    pub fn tabulate(&self, cap: u32) -> Result<Self> {
        check_degree(cap, self.cap)?;
        let entries = enumerate_up_to(self.d, cap)
            .map(|a| self.beta(&a).map(|b| (a, b)))
            .collect::<Result<_>>()?;
        Self::table(self.d, cap, entries)
    }

    /// Table with independent values drawn uniformly from `[lo, hi]`.
    pub fn random_table(d: usize, cap: u32, lo: f64, hi: f64, seed: u64) -> Result<Self> {
        if !(lo > 0.0 && hi >= lo) {
            return Err(Error::InvalidWeights(format!("bad range [{lo}, {hi}]")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let entries = enumerate_up_to(d, cap)
            .map(|a| (a, rng.random_range(lo..=hi)))
            .collect();
        Self::table(d, cap, entries)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            FamilyKind::Radial { .. } => "radial",
            FamilyKind::DruryArveson => "drury_arveson",
            FamilyKind::PolydiscHardy => "polydisc_hardy",
            FamilyKind::Fock => "fock",
            FamilyKind::Table { .. } => "table",
        }
    }

    pub fn check_cap(&self, degree: u32) -> Result<()> {
        check_degree(degree, self.cap)
    }

    fn check_index(&self, alpha: &MultiIndex) -> Result<()> {
        if alpha.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: alpha.dim(),
            });
        }
        self.check_cap(alpha.degree())
    }

    /// `β_α = ‖z^α‖_{H²(β)}`.
    pub fn beta(&self, alpha: &MultiIndex) -> Result<f64> {
        self.check_index(alpha)?;
        Ok(match &self.kind {
            FamilyKind::Radial { a } => {
                a[alpha.degree() as usize] / (sphere_multinomial(alpha)? as f64).sqrt()
            }
            FamilyKind::DruryArveson => 1.0 / (multinomial(alpha)? as f64).sqrt(),
            FamilyKind::PolydiscHardy => 1.0,
            FamilyKind::Fock => (alpha.factorial()? as f64).sqrt(),
            FamilyKind::Table { entries } => entries[alpha],
        })
    }

    /// `β_α / √(α!)`, the weight measured against the Fischer–Fock norm.
    pub fn fock_ratio(&self, alpha: &MultiIndex) -> Result<f64> {
        self.check_index(alpha)?;
        Ok(match &self.kind {
            FamilyKind::Fock => 1.0,
            FamilyKind::DruryArveson => {
                1.0 / (crate::combinatorics::factorial(alpha.degree())? as f64).sqrt()
            }
            _ => self.beta(alpha)? / fock_norm(alpha)?,
        })
    }

    /// `β_α √((d−1+|α|)! / ((d−1)! α!))`: the weight divided by the norm of
    /// `z^α` in `L²(∂B_d, σ)`. Level-constant exactly when the family is
    /// `U(d)`-homogeneous; radial families return `a_{|α|}` verbatim.
    pub fn sphere_ratio(&self, alpha: &MultiIndex) -> Result<f64> {
        self.check_index(alpha)?;
        Ok(match &self.kind {
            FamilyKind::Radial { a } => a[alpha.degree() as usize],
            FamilyKind::PolydiscHardy => (sphere_multinomial(alpha)? as f64).sqrt(),
            _ => self.beta(alpha)? * (sphere_multinomial(alpha)? as f64).sqrt(),
        })
    }

    /// For each direction `j`, `max_{|α| ≤ N} β_{α+ε_j} / β_α`: a lower
    /// estimate of `‖M_{z_j}‖` at truncation `N`.
    pub fn shift_bound(&self, levels: u32) -> Result<Vec<f64>> {
        self.check_cap(levels + 1)?;
        let mut bounds = vec![0.0f64; self.d];
        for alpha in enumerate_up_to(self.d, levels) {
            let base = self.beta(&alpha)?;
            for (j, bound) in bounds.iter_mut().enumerate() {
                let ratio = self.beta(&alpha.raised(j))? / base;
                if ratio > *bound {
                    *bound = ratio;
                }
            }
        }
        Ok(bounds)
    }

    pub fn to_descriptor(&self) -> WeightDescriptor {
        let mut desc = WeightDescriptor {
            d: self.d,
            family: self.name().to_string(),
            a: None,
            entries: None,
            cap: Some(self.cap),
        };
        match &self.kind {
            FamilyKind::Radial { a } => desc.a = Some(a.clone()),
            FamilyKind::Table { entries } => {
                desc.entries = Some(
                    entries
                        .iter()
                        .map(|(alpha, beta)| TableEntry {
                            alpha: alpha.components().to_vec(),
                            beta: *beta,
                        })
                        .collect(),
                )
            }
            _ => {}
        }
        desc
    }
}

/// `‖z^α‖_F = √(α!)`.
pub fn fock_norm(alpha: &MultiIndex) -> Result<f64> {
    Ok((alpha.factorial()? as f64).sqrt())
}

/// JSON form of a weight family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightDescriptor {
    pub d: usize,
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entries: Option<Vec<TableEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    pub alpha: Vec<u32>,
    pub beta: f64,
}

impl WeightDescriptor {
    pub fn build(&self) -> Result<WeightFamily> {
        let cap = self.cap.unwrap_or(MAX_DEGREE);
        if cap > MAX_DEGREE {
            return Err(Error::param("cap", format!("{cap} exceeds {MAX_DEGREE}")));
        }
        match self.family.as_str() {
            "radial" => {
                let a = self
                    .a
                    .as_ref()
                    .ok_or_else(|| Error::param("a", "required for radial families"))?;
                let keep = match self.cap {
                    Some(c) if (c as usize) < a.len() => c as usize + 1,
                    Some(c) => {
                        return Err(Error::param(
                            "cap",
                            format!("{c} exceeds the {} supplied radial coefficients", a.len()),
                        ))
                    }
                    None => a.len(),
                };
                WeightFamily::radial(self.d, a[..keep].to_vec())
            }
            "drury_arveson" => WeightFamily::drury_arveson(self.d, cap),
            "polydisc_hardy" => WeightFamily::polydisc_hardy(self.d, cap),
            "fock" => WeightFamily::fock(self.d, cap),
            "table" => {
                let cap = self
                    .cap
                    .ok_or_else(|| Error::param("cap", "required for table families"))?;
                let raw = self
                    .entries
                    .as_ref()
                    .ok_or_else(|| Error::param("entries", "required for table families"))?;
                let mut entries = BTreeMap::new();
                for (i, e) in raw.iter().enumerate() {
                    let alpha = MultiIndex::new(e.alpha.clone()).map_err(|err| {
                        Error::param(format!("entries[{i}].alpha"), err.to_string())
                    })?;
                    if entries.insert(alpha.clone(), e.beta).is_some() {
                        return Err(Error::param(
                            format!("entries[{i}].alpha"),
                            format!("duplicate entry {alpha}"),
                        ));
                    }
                }
                WeightFamily::table(self.d, cap, entries)
            }
            other => Err(Error::param("family", format!("unknown family `{other}`"))),
        }
    }
}

impl Serialize for WeightFamily {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_descriptor().serialize(s)
    }
}

impl<'de> Deserialize<'de> for WeightFamily {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        WeightDescriptor::deserialize(d)?
            .build()
            .map_err(serde::de::Error::custom)
    }
}
