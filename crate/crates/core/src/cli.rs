//! Batch front end. A run is described by a [`RunConfig`] read from JSON
//! and optionally overridden by flags; every report embeds the resolved
//! config so that re-running it reproduces the report byte for byte.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::balanced::{
    haar_average_density, is_spherically_balanced, rn_bound_sample, sigma_moment,
    szego_similarity_check, verify_slice, BalanceCheck, Density, HaarAverageReport,
    MeasureDescriptor, MeasureKind, RadialWeights, ReinhardtMeasure, RnBounds, SliceRepresentation,
    SliceVerification, SzegoCheck,
};
use crate::combinatorics::{enumerate_up_to, MultiIndex};
use crate::criteria::{
    classify, cu_restricted_norm, level_b, level_series, BoundednessVerdict, LevelDiagnostic,
    Thresholds, DEFAULT_LEVELS,
};
use crate::error::Error;
use crate::renorm::homogenize;
use crate::unitary::UnitaryDescriptor;
use crate::weights::{WeightDescriptor, WeightFamily};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_BALANCE_TOL: f64 = 1e-10;
/// `cu-norm` flags a level when the norm exceeds `b_n` by more than this.
pub const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(
    name = "multishift",
    version,
    about = "Diagnostics for weakly U(d)-homogeneous weighted multishifts"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandName,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Report destination; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Truncation level N.
    #[arg(long, global = true)]
    pub levels: Option<u32>,
    /// Monte-Carlo sample count S.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    /// Level diagnostics b_n and the boundedness verdict.
    Analyze,
    /// Norms of C_u on homogeneous levels against b_n.
    CuNorm,
    /// Similar U(d)-homogeneous weights by Haar averaging.
    Homogenize,
    /// Spherically balanced test, directly or through a slice representation.
    Balanced,
    /// Similarity of a Reinhardt measure to the sphere measure.
    Sphere,
    /// List built-in weight families, measures and unitaries.
    Families,
}

impl CommandName {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandName::Analyze => "analyze",
            CommandName::CuNorm => "cu-norm",
            CommandName::Homogenize => "homogenize",
            CommandName::Balanced => "balanced",
            CommandName::Sphere => "sphere",
            CommandName::Families => "families",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    #[default]
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<CommandName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<WeightDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<RadialWeights>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unitary: Option<UnitaryDescriptor>,
    /// Dimension for measure-based runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(
        rename = "N",
        alias = "levels",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub levels: Option<u32>,
    #[serde(
        rename = "S",
        alias = "samples",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Thresholds>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    /// Not echoed in reports, so output does not depend on where it is written.
    #[serde(default, skip_serializing)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: malformed JSON: {source}", path.display())]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{field}: {reason}")]
    Field { field: String, reason: String },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

fn field(field: impl Into<String>, reason: impl Into<String>) -> CliError {
    CliError::Field {
        field: field.into(),
        reason: reason.into(),
    }
}

/// Attaches a config path to a library error, extending its own field name.
fn at(prefix: &'static str) -> impl Fn(Error) -> CliError {
    move |e| match e {
        Error::InvalidParameter { field: f, reason } if !prefix.is_empty() => {
            field(format!("{prefix}.{f}"), reason)
        }
        Error::InvalidParameter { field: f, reason } => field(f, reason),
        other => field(prefix, other.to_string()),
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| CliError::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Config file merged with command-line overrides.
    pub fn from_cli(cli: &Cli) -> Result<Self, CliError> {
        let mut cfg = match &cli.config {
            Some(path) => Self::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(c) = cfg.command {
            if c != cli.command {
                return Err(field(
                    "command",
                    format!(
                        "config is for `{}` but `{}` was requested",
                        c.as_str(),
                        cli.command.as_str()
                    ),
                ));
            }
        }
        cfg.command = Some(cli.command);
        if cli.out.is_some() {
            cfg.out = cli.out.clone();
        }
        cfg.format = cli.format.or(cfg.format);
        cfg.seed = cli.seed.or(cfg.seed);
        cfg.levels = cli.levels.or(cfg.levels);
        cfg.samples = cli.samples.or(cfg.samples);
        Ok(cfg)
    }

    fn weight_family(&self) -> Result<WeightFamily, CliError> {
        self.weights
            .as_ref()
            .ok_or_else(|| field("weights", "a weight descriptor is required"))?
            .build()
            .map_err(at("weights"))
    }

    fn measure(&self) -> Result<ReinhardtMeasure, CliError> {
        let d = self
            .d
            .ok_or_else(|| field("d", "required with a measure"))?;
        self.measure
            .as_ref()
            .ok_or_else(|| field("measure", "a measure descriptor is required"))?
            .build(d)
            .map_err(at("measure"))
    }
}

/// A finished report and the process exit code it implies.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub text: String,
    pub exit_code: i32,
}

/// `{:.16e}`: 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn json_line<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("report types serialize")
}

fn json_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// CSV with `# key: json` preamble lines.
fn csv_report(
    preamble: &[(&str, String)],
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<String, CliError> {
    let mut out = String::new();
    for (k, v) in preamble {
        writeln!(out, "# {k}: {v}").expect("writing to a String");
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| csv::Error::from(e.into_error()))?;
    out.push_str(std::str::from_utf8(&bytes).expect("csv output is utf-8"));
    Ok(out)
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    command: &'static str,
    config: &'a RunConfig,
    result: T,
}

fn json_report<T: Serialize>(cfg: &RunConfig, result: T) -> String {
    json_pretty(&Report {
        command: cfg.command.map_or("", CommandName::as_str),
        config: cfg,
        result,
    })
}

fn check_levels(levels: u32, cap: u32, needed: u32) -> Result<(), CliError> {
    if levels + needed > cap {
        let reason = if needed == 0 {
            format!("{levels} exceeds the weight cap {cap}")
        } else {
            format!(
                "{levels} needs weights up to degree {} but the cap is {cap}",
                levels + needed
            )
        };
        return Err(field("N", reason));
    }
    Ok(())
}

/// Runs the command recorded in the config.
pub fn execute(cfg: &RunConfig) -> Result<Output, CliError> {
    match cfg.command.ok_or_else(|| field("command", "missing"))? {
        CommandName::Analyze => cmd_analyze(cfg),
        CommandName::CuNorm => cmd_cu_norm(cfg),
        CommandName::Homogenize => cmd_homogenize(cfg),
        CommandName::Balanced => cmd_balanced(cfg),
        CommandName::Sphere => cmd_sphere(cfg),
        CommandName::Families => cmd_families(cfg),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeResult {
    pub levels: Vec<LevelDiagnostic>,
    pub verdict: BoundednessVerdict,
}

pub fn cmd_analyze(cfg: &RunConfig) -> Result<Output, CliError> {
    let family = cfg.weight_family()?;
    let mut cfg = cfg.clone();
    let levels = *cfg.levels.get_or_insert(DEFAULT_LEVELS);
    let thresholds = *cfg.thresholds.get_or_insert_with(Thresholds::default);
    let format = *cfg.format.get_or_insert_with(Format::default);
    check_levels(levels, family.cap(), 0)?;
    let rows: Vec<LevelDiagnostic> =
        level_series(&family, levels).map_err(at("weights"))?[1..].to_vec();
    let series: Vec<f64> = rows.iter().map(|r| r.b_n).collect();
    let verdict = classify(&series, thresholds).map_err(at(""))?;
    let exit_code = verdict.classification.exit_code();
    let text = match format {
        Format::Json => json_report(
            &cfg,
            AnalyzeResult {
                levels: rows,
                verdict,
            },
        ),
        Format::Csv => csv_report(
            &[
                ("config", json_line(&cfg)),
                ("verdict", json_line(&verdict)),
            ],
            &["n", "max_up", "argmax_up", "max_down", "argmax_down", "b_n"],
            &rows
                .iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        fmt_float(r.max_up),
                        r.argmax_up.to_string(),
                        fmt_float(r.max_down),
                        r.argmax_down.to_string(),
                        fmt_float(r.b_n),
                    ]
                })
                .collect::<Vec<_>>(),
        )?,
    };
    Ok(Output { text, exit_code })
}

#[derive(Debug, Clone, Serialize)]
pub struct CuNormRow {
    pub n: u32,
    pub norm: f64,
    pub bound: f64,
    pub bound_ok: bool,
}

pub fn cmd_cu_norm(cfg: &RunConfig) -> Result<Output, CliError> {
    let family = cfg.weight_family()?;
    let mut cfg = cfg.clone();
    let levels = *cfg.levels.get_or_insert(8);
    let seed = *cfg.seed.get_or_insert(DEFAULT_SEED);
    let format = *cfg.format.get_or_insert_with(Format::default);
    let desc = cfg
        .unitary
        .get_or_insert(UnitaryDescriptor::Haar { seed })
        .clone();
    check_levels(levels, family.cap(), 0)?;
    let u = desc.build(family.d()).map_err(at("unitary"))?;
    let rows = (0..=levels)
        .map(|n| {
            let norm = cu_restricted_norm(&u, &family, n)?;
            let bound = level_b(&family, n)?.b_n;
            Ok(CuNormRow {
                n,
                norm,
                bound,
                bound_ok: norm <= bound + BOUND_SLACK,
            })
        })
        .collect::<Result<Vec<_>, Error>>()
        .map_err(at(""))?;
    let text = match format {
        Format::Json => json_report(&cfg, &rows),
        Format::Csv => csv_report(
            &[("config", json_line(&cfg))],
            &["n", "norm", "bound", "bound_ok"],
            &rows
                .iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        fmt_float(r.norm),
                        fmt_float(r.bound),
                        r.bound_ok.to_string(),
                    ]
                })
                .collect::<Vec<_>>(),
        )?,
    };
    Ok(Output { text, exit_code: 0 })
}

#[derive(Debug, Clone, Serialize)]
pub struct HomogenizeRow {
    pub n: u32,
    pub schur_constant: f64,
    /// Radial coefficient of `β̃` at level `n`.
    pub a_tilde: f64,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub b_n: f64,
    pub sandwich_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_residual: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct HomogenizeResult {
    pub tilde: WeightDescriptor,
    pub levels: Vec<HomogenizeRow>,
}

pub fn cmd_homogenize(cfg: &RunConfig) -> Result<Output, CliError> {
    let family = cfg.weight_family()?;
    let mut cfg = cfg.clone();
    let levels = *cfg.levels.get_or_insert(12);
    let samples = *cfg.samples.get_or_insert(500);
    let seed = *cfg.seed.get_or_insert(DEFAULT_SEED);
    let format = *cfg.format.get_or_insert_with(Format::default);
    check_levels(levels, family.cap(), 0)?;
    let h = homogenize(&family, levels, samples, seed).map_err(at(""))?;
    let tilde = h.tilde.to_descriptor();
    let a = tilde.a.clone().unwrap_or_default();
    let rows = (0..=levels)
        .map(|n| {
            let b = level_b(&family, n)?.b_n;
            let (lo, hi) = h.ratio_bounds[n as usize];
            // relative slack for rounding in the exact Schur constants
            let slack = 1e-12;
            Ok(HomogenizeRow {
                n,
                schur_constant: h.schur[n as usize],
                a_tilde: a[n as usize],
                ratio_min: lo,
                ratio_max: hi,
                b_n: b,
                sandwich_ok: lo >= (1.0 / b) * (1.0 - slack) && hi <= b * (1.0 + slack),
                mc_residual: h.mc_residuals.get(n as usize).copied(),
            })
        })
        .collect::<Result<Vec<_>, Error>>()
        .map_err(at(""))?;
    let text = match format {
        Format::Json => json_report(
            &cfg,
            HomogenizeResult {
                tilde: tilde.clone(),
                levels: rows,
            },
        ),
        Format::Csv => csv_report(
            &[("config", json_line(&cfg)), ("tilde", json_line(&tilde))],
            &[
                "n",
                "schur_constant",
                "a_tilde",
                "ratio_min",
                "ratio_max",
                "b_n",
                "sandwich_ok",
                "mc_residual",
            ],
            &rows
                .iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        fmt_float(r.schur_constant),
                        fmt_float(r.a_tilde),
                        fmt_float(r.ratio_min),
                        fmt_float(r.ratio_max),
                        fmt_float(r.b_n),
                        r.sandwich_ok.to_string(),
                        r.mc_residual.map(fmt_float).unwrap_or_default(),
                    ]
                })
                .collect::<Vec<_>>(),
        )?,
    };
    Ok(Output { text, exit_code: 0 })
}

#[derive(Debug, Clone, Serialize)]
pub struct BalancedResult {
    /// `weights` or `slice`.
    pub source: &'static str,
    pub check: BalanceCheck,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slice: Option<SliceVerification>,
    pub formal: bool,
}

pub fn cmd_balanced(cfg: &RunConfig) -> Result<Output, CliError> {
    let mut cfg = cfg.clone();
    let levels = *cfg.levels.get_or_insert(10);
    let tol = *cfg.tol.get_or_insert(DEFAULT_BALANCE_TOL);
    let format = *cfg.format.get_or_insert_with(Format::default);
    let result = match (&cfg.weights, &cfg.measure) {
        (Some(_), Some(_)) => {
            return Err(field(
                "measure",
                "give either weights or a measure, not both",
            ))
        }
        (Some(_), None) => {
            let family = cfg.weight_family()?;
            check_levels(levels, family.cap(), 2)?;
            BalancedResult {
                source: "weights",
                check: is_spherically_balanced(&family, levels, tol).map_err(at(""))?,
                slice: None,
                formal: false,
            }
        }
        (None, Some(_)) => {
            let measure = cfg.measure()?;
            let gamma = cfg
                .gamma
                .clone()
                .ok_or_else(|| field("gamma", "required with a measure"))?;
            let rep = SliceRepresentation::new(measure, gamma);
            check_levels(levels, rep.cap(), 2)?;
            let family = rep.to_family(levels + 2).map_err(at(""))?;
            BalancedResult {
                source: "slice",
                check: is_spherically_balanced(&family, levels, tol).map_err(at(""))?,
                slice: Some(verify_slice(&family, &rep, levels + 2, tol).map_err(at(""))?),
                formal: rep.measure.is_formal(),
            }
        }
        (None, None) => {
            return Err(field(
                "weights",
                "a weight descriptor or a measure is required",
            ))
        }
    };
    let ok = result.check.balanced && result.slice.as_ref().is_none_or(|s| s.matches);
    let exit_code = if ok { 0 } else { 2 };
    let text = match format {
        Format::Json => json_report(&cfg, &result),
        Format::Csv => {
            let w = result.check.witness.as_ref();
            csv_report(
                &[("config", json_line(&cfg))],
                &[
                    "source",
                    "balanced",
                    "max_deviation",
                    "witness_alpha",
                    "witness_i",
                    "witness_j",
                    "sum_i",
                    "sum_j",
                    "slice_max_relative_error",
                    "formal",
                ],
                &[vec![
                    result.source.to_string(),
                    result.check.balanced.to_string(),
                    fmt_float(result.check.max_deviation),
                    w.map(|w| w.alpha.to_string()).unwrap_or_default(),
                    w.map(|w| w.i.to_string()).unwrap_or_default(),
                    w.map(|w| w.j.to_string()).unwrap_or_default(),
                    w.map(|w| fmt_float(w.sum_i)).unwrap_or_default(),
                    w.map(|w| fmt_float(w.sum_j)).unwrap_or_default(),
                    result
                        .slice
                        .as_ref()
                        .map(|s| fmt_float(s.max_relative_error))
                        .unwrap_or_default(),
                    result.formal.to_string(),
                ]],
            )?
        }
    };
    Ok(Output { text, exit_code })
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentRow {
    pub alpha: MultiIndex,
    pub n: u32,
    pub moment: f64,
    pub sigma_moment: f64,
    /// `√(m_α(μ)/m_α(σ))`.
    pub r: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SphereResult {
    pub szego: SzegoCheck,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rn_bounds: Option<RnBounds>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub haar_average: Option<HaarAverageReport>,
    pub moments: Vec<MomentRow>,
}

pub fn cmd_sphere(cfg: &RunConfig) -> Result<Output, CliError> {
    let measure = cfg.measure()?;
    let d = measure.d();
    let mut cfg = cfg.clone();
    let levels = *cfg.levels.get_or_insert(15);
    let samples = *cfg.samples.get_or_insert(10_000);
    let seed = *cfg.seed.get_or_insert(DEFAULT_SEED);
    let thresholds = *cfg.thresholds.get_or_insert_with(Thresholds::default);
    let format = *cfg.format.get_or_insert_with(Format::default);
    if levels > measure.cap() {
        return Err(field(
            "N",
            format!("{levels} exceeds the moment cap {}", measure.cap()),
        ));
    }
    let szego = szego_similarity_check(&measure, levels, thresholds).map_err(at(""))?;
    let density = match measure.kind() {
        MeasureKind::Sigma => Some(Density::constant(d).map_err(at("measure"))?),
        MeasureKind::Density(w) => Some(w.clone()),
        MeasureKind::Table { .. } => None,
    };
    let (rn_bounds, haar_average) = match &density {
        Some(w) => {
            let desc = cfg
                .unitary
                .get_or_insert(UnitaryDescriptor::Haar { seed })
                .clone();
            let u = desc.build(d).map_err(at("unitary"))?;
            let rn = rn_bound_sample(w, &u, samples, seed).map_err(at(""))?;
            let alphas: Vec<MultiIndex> = enumerate_up_to(d, 2).collect();
            let avg = haar_average_density(w, samples, seed, &alphas).map_err(at(""))?;
            (Some(rn), Some(avg))
        }
        None => (None, None),
    };
    let moments = enumerate_up_to(d, levels)
        .map(|alpha| {
            let m = measure.moment(&alpha)?;
            let s = sigma_moment(&alpha)?;
            Ok(MomentRow {
                n: alpha.degree(),
                alpha,
                moment: m,
                sigma_moment: s,
                r: (m / s).sqrt(),
            })
        })
        .collect::<Result<Vec<_>, Error>>()
        .map_err(at(""))?;
    let exit_code = szego.classification.exit_code();
    let result = SphereResult {
        szego,
        rn_bounds,
        haar_average,
        moments,
    };
    let text = match format {
        Format::Json => json_report(&cfg, &result),
        Format::Csv => {
            let mut preamble = vec![
                ("config", json_line(&cfg)),
                ("szego", json_line(&result.szego)),
            ];
            if let Some(rn) = &result.rn_bounds {
                preamble.push(("rn_bounds", json_line(rn)));
            }
            if let Some(h) = &result.haar_average {
                preamble.push(("haar_average", json_line(h)));
            }
            csv_report(
                &preamble,
                &["n", "alpha", "moment", "sigma_moment", "r"],
                &result
                    .moments
                    .iter()
                    .map(|m| {
                        vec![
                            m.n.to_string(),
                            m.alpha.to_string(),
                            fmt_float(m.moment),
                            fmt_float(m.sigma_moment),
                            fmt_float(m.r),
                        ]
                    })
                    .collect::<Vec<_>>(),
            )?
        }
    };
    Ok(Output { text, exit_code })
}

#[derive(Debug, Clone, Serialize)]
pub struct BuiltIn {
    pub category: &'static str,
    pub name: &'static str,
    pub example: serde_json::Value,
    pub description: &'static str,
}

pub fn built_ins() -> Vec<BuiltIn> {
    use serde_json::json;
    vec![
        BuiltIn {
            category: "weights",
            name: "radial",
            example: json!({"d": 2, "family": "radial", "a": [1.0, 1.0, 1.0]}),
            description:
                "beta_alpha = a_|alpha| / sqrt((d-1+n)!/((d-1)! alpha!)); cap = len(a) - 1",
        },
        BuiltIn {
            category: "weights",
            name: "drury_arveson",
            example: json!({"d": 2, "family": "drury_arveson"}),
            description: "beta_alpha = sqrt(alpha!/|alpha|!)",
        },
        BuiltIn {
            category: "weights",
            name: "polydisc_hardy",
            example: json!({"d": 2, "family": "polydisc_hardy"}),
            description: "beta_alpha = 1",
        },
        BuiltIn {
            category: "weights",
            name: "fock",
            example: json!({"d": 2, "family": "fock"}),
            description: "beta_alpha = sqrt(alpha!)",
        },
        BuiltIn {
            category: "weights",
            name: "table",
            example: json!({"d": 2, "family": "table", "cap": 1,
                "entries": [{"alpha": [0, 0], "beta": 1.0}, {"alpha": [1, 0], "beta": 1.0}, {"alpha": [0, 1], "beta": 1.0}]}),
            description: "explicit weights for every |alpha| <= cap",
        },
        BuiltIn {
            category: "measure",
            name: "sigma",
            example: json!({"kind": "sigma"}),
            description: "normalized surface measure on the unit sphere",
        },
        BuiltIn {
            category: "measure",
            name: "density",
            example: json!({"kind": "density", "poly": [{"gamma": [0, 0], "coef": 1.0}, {"gamma": [1, 0], "coef": 0.5}]}),
            description: "w(z) sigma with w = sum coef |z_1|^(2 gamma_1) ... |z_d|^(2 gamma_d) > 0",
        },
        BuiltIn {
            category: "measure",
            name: "table",
            example: json!({"kind": "table", "cap": 0, "entries": [{"alpha": [0, 0], "moment": 1.0}]}),
            description: "raw moments m_alpha for every |alpha| <= cap; verdicts are formal",
        },
        BuiltIn {
            category: "unitary",
            name: "identity",
            example: json!({"kind": "identity"}),
            description: "identity matrix",
        },
        BuiltIn {
            category: "unitary",
            name: "haar",
            example: json!({"kind": "haar", "seed": 42}),
            description: "Haar-random unitary from a seed",
        },
        BuiltIn {
            category: "unitary",
            name: "rotation",
            example: json!({"kind": "rotation", "angle": std::f64::consts::FRAC_PI_4, "plane": [1, 2]}),
            description: "real rotation in the (j, k) coordinate plane, one-based",
        },
        BuiltIn {
            category: "unitary",
            name: "permutation",
            example: json!({"kind": "permutation", "pi": [2, 1]}),
            description: "(u z)_j = z_pi(j), one-based",
        },
        BuiltIn {
            category: "unitary",
            name: "torus",
            example: json!({"kind": "torus", "phases": [0.0, std::f64::consts::FRAC_PI_2]}),
            description: "diagonal exp(i theta_j)",
        },
        BuiltIn {
            category: "unitary",
            name: "fourier",
            example: json!({"kind": "fourier"}),
            description: "discrete Fourier matrix",
        },
        BuiltIn {
            category: "unitary",
            name: "explicit",
            example: json!({"kind": "explicit", "entries": [[[0.0, 0.0], [1.0, 0.0]], [[1.0, 0.0], [0.0, 0.0]]]}),
            description: "rows of [re, im] pairs, checked for unitarity",
        },
    ]
}

pub fn cmd_families(cfg: &RunConfig) -> Result<Output, CliError> {
    let mut cfg = cfg.clone();
    let format = *cfg.format.get_or_insert_with(Format::default);
    let list = built_ins();
    let text = match format {
        Format::Json => json_report(&cfg, &list),
        Format::Csv => csv_report(
            &[],
            &["category", "name", "example", "description"],
            &list
                .iter()
                .map(|b| {
                    vec![
                        b.category.to_string(),
                        b.name.to_string(),
                        json_line(&b.example),
                        b.description.to_string(),
                    ]
                })
                .collect::<Vec<_>>(),
        )?,
    };
    Ok(Output { text, exit_code: 0 })
}

/// Parses, runs and writes the report; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let result = RunConfig::from_cli(cli).and_then(|cfg| {
        let output = execute(&cfg)?;
        match &cfg.out {
            Some(path) => std::fs::write(path, &output.text).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?,
            None => print!("{}", output.text),
        }
        Ok(output.exit_code)
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
