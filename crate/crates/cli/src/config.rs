//! Job configuration: a single JSON document, unknown fields rejected.

use std::path::Path;

use friedrichs::example::ExampleRunOptions;
use friedrichs::multiplicity::default_radii;
use friedrichs::{
    builtin_kernel, builtin_potential, AssembleOptions, Convention, KernelSymbol, MatrixSymbol, Representation, TrigPoly,
};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub schema_version: u32,
    /// Sphere-sampling and trial seed; `--seed` takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<SymbolSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<SymbolSpec>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub limits: Limits,
    #[serde(default)]
    pub eigs: EigsConfig,
    #[serde(default)]
    pub certify: CertifyConfig,
    #[serde(default)]
    pub split_test: SplitTestConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub example: Option<ExampleSection>,
    #[serde(default)]
    pub output: OutputConfig,
}

/// A builtin symbol by name, or an inline Fourier table whose
/// coefficients are `n x n` matrices of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SymbolSpec {
    Builtin {
        name: String,
        #[serde(default)]
        params: Vec<f64>,
    },
    Fourier {
        terms: Vec<FourierTerm>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierTerm {
    /// `nu` entries for a potential, `2 nu` (x then y) for a kernel.
    pub frequency: Vec<i64>,
    pub coefficient: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub nu: usize,
    pub points: usize,
    pub refine_limit: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            nu: 1,
            points: 64,
            refine_limit: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub symmetry: f64,
    /// Exclusion margin around the bands; derived from the band
    /// refinement error when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    pub margin_floor: f64,
    pub multiplicity: f64,
    pub multiplicity_radii: Vec<f64>,
    pub samples_per_sphere: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            symmetry: 1e-12,
            margin: None,
            margin_floor: 1e-8,
            multiplicity: 1e-10,
            multiplicity_radii: default_radii(),
            samples_per_sphere: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Limits {
    /// Largest Nyström matrix dimension; larger jobs exit with code 3.
    pub size_cap: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self { size_cap: 8192 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigsConfig {
    /// Points per axis, at least three, strictly increasing.
    pub resolutions: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    /// Resolution of the determinant cross-check; the finest eigs
    /// resolution when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    /// Extra spectral parameters at which to sample the determinant.
    pub z: Vec<f64>,
    /// Locate a determinant root next to every gap eigenvalue.
    pub roots: bool,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            points: None,
            z: Vec::new(),
            roots: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertifyConfig {
    /// Initial points per axis of the extremal-set search.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extremal_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extremal_refine_limit: Option<usize>,
    /// Points per axis of the kernel's Fourier sampling (at least 16).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub smoothness_points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitTestConfig {
    pub cutoff: usize,
    /// Points per axis for the Fourier split.
    pub split_points: usize,
    /// Random point pairs for the reconstruction check.
    pub reconstruction_pairs: usize,
    /// Reference points for the weighted diagnostic; all band endpoints
    /// when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z0: Option<Vec<f64>>,
    pub l2_resolutions: Vec<usize>,
    pub exclusion: f64,
    /// Diagnose the remainder `K1` (true) or the full kernel.
    pub l2_on_remainder: bool,
    pub trials: usize,
    pub max_rank: usize,
    pub max_freq: usize,
    pub perturbation_scale: f64,
    /// Points per axis of the rank experiment; `grid.points` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trial_points: Option<usize>,
}

impl Default for SplitTestConfig {
    fn default() -> Self {
        Self {
            cutoff: 2,
            split_points: 16,
            reconstruction_pairs: 50,
            z0: None,
            l2_resolutions: vec![32, 64, 128, 256],
            exclusion: 1e-12,
            l2_on_remainder: true,
            trials: 50,
            max_rank: 3,
            max_freq: 2,
            perturbation_scale: 1.0,
            trial_points: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExampleSection {
    pub k_max: usize,
    #[serde(default = "default_convention")]
    pub convention: Convention,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points_per_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band_refine_limit: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extremal_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extremal_levels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub match_tol: Option<f64>,
}

fn default_convention() -> Convention {
    Convention::PaperCalibrated
}

impl ExampleSection {
    pub fn run_options(&self, limits: &Limits) -> ExampleRunOptions {
        let d = ExampleRunOptions::default();
        ExampleRunOptions {
            points_per_dim: self.points_per_dim.unwrap_or(d.points_per_dim),
            band_points: self.band_points.unwrap_or(d.band_points),
            band_refine_limit: self.band_refine_limit.unwrap_or(d.band_refine_limit),
            extremal_points: self.extremal_points.unwrap_or(d.extremal_points),
            extremal_levels: self.extremal_levels.unwrap_or(d.extremal_levels),
            margin: self.margin.unwrap_or(d.margin),
            match_tol: self.match_tol.unwrap_or(d.match_tol),
            size_cap: limits.size_cap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// File names inside `--out`.
    pub report: String,
    pub timings: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            report: "report.json".into(),
            timings: "timings.json".into(),
        }
    }
}

/// Parses a config document. Errors name the offending field path and the
/// line and column in the source.
pub fn parse(text: &str) -> CliResult<JobConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: JobConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        CliError::Config(format!("field `{path}`: {inner}"))
    })?;
    cfg.check()?;
    Ok(cfg)
}

pub fn load(path: &Path) -> CliResult<JobConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

fn plain_file_name(name: &str) -> bool {
    !name.is_empty() && Path::new(name).file_name().is_some_and(|f| f == name)
}

impl JobConfig {
    fn check(&self) -> CliResult<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "field `schema_version`: expected {SCHEMA_VERSION}, found {}",
                self.schema_version
            )));
        }
        if self.grid.nu == 0 || self.grid.points < 2 {
            return Err(CliError::Config("field `grid`: need nu >= 1 and points >= 2".into()));
        }
        if !(self.tolerances.symmetry > 0.0) {
            return Err(CliError::Config("field `tolerances.symmetry`: must be positive".into()));
        }
        if !(self.tolerances.margin_floor > 0.0) || self.tolerances.margin.is_some_and(|m| !(m > 0.0)) {
            return Err(CliError::Config("field `tolerances.margin`: must be positive".into()));
        }
        for name in [&self.output.report, &self.output.timings] {
            if !plain_file_name(name) {
                return Err(CliError::Config(format!("field `output`: `{name}` is not a plain file name")));
            }
        }
        if self.output.report == self.output.timings {
            return Err(CliError::Config("field `output`: report and timings must differ".into()));
        }
        Ok(())
    }

    pub fn assemble_options(&self) -> AssembleOptions {
        AssembleOptions {
            symmetry_tol: self.tolerances.symmetry,
            size_cap: self.limits.size_cap,
        }
    }

    pub fn potential(&self) -> CliResult<MatrixSymbol<f64>> {
        let spec = self
            .potential
            .as_ref()
            .ok_or_else(|| CliError::Config("field `potential`: required by this command".into()))?;
        build_potential(spec, self.grid.nu)
    }

    pub fn kernel(&self) -> CliResult<KernelSymbol<f64>> {
        let spec = self
            .kernel
            .as_ref()
            .ok_or_else(|| CliError::Config("field `kernel`: required by this command".into()))?;
        build_kernel(spec, self.grid.nu)
    }
}

fn trig_poly(terms: &[FourierTerm], dim: usize, what: &str) -> CliResult<TrigPoly<f64>> {
    let n = terms
        .first()
        .map(|t| t.coefficient.len())
        .ok_or_else(|| CliError::Config(format!("field `{what}.fourier.terms`: at least one term required")))?;
    if n == 0 {
        return Err(CliError::Config(format!("field `{what}.fourier.terms`: empty coefficient matrix")));
    }
    let mut poly = TrigPoly::new(dim, n, n);
    for (i, t) in terms.iter().enumerate() {
        if t.frequency.len() != dim {
            return Err(CliError::Config(format!(
                "field `{what}.fourier.terms[{i}].frequency`: expected {dim} entries, found {}",
                t.frequency.len()
            )));
        }
        if t.coefficient.len() != n || t.coefficient.iter().any(|row| row.len() != n) {
            return Err(CliError::Config(format!(
                "field `{what}.fourier.terms[{i}].coefficient`: expected a {n}x{n} matrix"
            )));
        }
        let block = t
            .coefficient
            .iter()
            .flatten()
            .map(|&[re, im]| Complex::new(re, im))
            .collect();
        poly.push(t.frequency.clone(), block);
    }
    Ok(poly)
}

pub fn build_potential(spec: &SymbolSpec, nu: usize) -> CliResult<MatrixSymbol<f64>> {
    match spec {
        SymbolSpec::Builtin { name, params } => Ok(builtin_potential(name, nu, params)?),
        SymbolSpec::Fourier { terms } => Ok(MatrixSymbol::from_trig(trig_poly(terms, nu, "potential")?)?
            .with_representation(Representation::Trigonometric)),
    }
}

pub fn build_kernel(spec: &SymbolSpec, nu: usize) -> CliResult<KernelSymbol<f64>> {
    match spec {
        SymbolSpec::Builtin { name, params } => Ok(builtin_kernel(name, nu, params)?),
        SymbolSpec::Fourier { terms } => Ok(KernelSymbol::from_trig(nu, trig_poly(terms, 2 * nu, "kernel")?)?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = parse(r#"{"schema_version": 1}"#).unwrap();
        assert_eq!(cfg.grid, GridConfig::default());
        assert_eq!(cfg.limits.size_cap, 8192);
        assert_eq!(cfg.tolerances.multiplicity_radii.len(), 8);
    }

    #[test]
    fn unknown_field_names_its_path() {
        let err = parse(r#"{"schema_version": 1, "grid": {"nu": 1, "pionts": 3}}"#).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("grid"), "{msg}");
        assert!(msg.contains("pionts"), "{msg}");
        assert!(msg.contains("line 1"), "{msg}");
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn wrong_schema_version_is_rejected() {
        assert!(parse(r#"{"schema_version": 2}"#).is_err());
    }

    #[test]
    fn inline_fourier_potential() {
        let cfg = parse(
            r#"{"schema_version": 1, "potential": {"fourier": {"terms": [
                {"frequency": [1], "coefficient": [[[0.5, 0.0]]]},
                {"frequency": [-1], "coefficient": [[[0.5, 0.0]]]}]}}}"#,
        )
        .unwrap();
        let u = cfg.potential().unwrap();
        assert!((u.eval(&[0.7])[(0, 0)].re - 0.7f64.cos()).abs() < 1e-15);
    }

    #[test]
    fn fourier_term_shape_errors_are_config_errors() {
        let cfg = parse(
            r#"{"schema_version": 1, "kernel": {"fourier": {"terms": [
                {"frequency": [1], "coefficient": [[[1.0, 0.0]]]}]}}}"#,
        )
        .unwrap();
        let err = cfg.kernel().unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("expected 2 entries"));
    }

    #[test]
    fn output_names_must_be_plain() {
        assert!(parse(r#"{"schema_version": 1, "output": {"report": "../x.json"}}"#).is_err());
    }

    #[test]
    fn config_round_trips() {
        let cfg = parse(
            r#"{"schema_version": 1, "seed": 4, "example": {"k_max": 3, "convention": "lebesgue-negated"}}"#,
        )
        .unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(parse(&text).unwrap(), cfg);
    }
}
