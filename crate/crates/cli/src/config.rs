//! JSON experiment configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};
use shadow_core::harmonic::{Metric, PointGroup, TestFunction};
use shadow_core::lattice::LatticeBasis;
use shadow_core::scheme::{Scheme, Window};
use shadow_core::{Family, Region};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SchemeSpec {
    Sqrt2Chain,
    Sqrt2Square,
    ScaledInteger { physical_dim: usize, internal_dim: usize, scale: f64 },
    /// Basis columns in `(physical…, internal…)` coordinates.
    Custom { physical_dim: usize, internal_dim: usize, columns: Vec<Vec<f64>> },
    Heisenberg,
}

impl SchemeSpec {
    pub fn build(&self) -> shadow_core::Result<Scheme> {
        match self {
            SchemeSpec::Sqrt2Chain => Ok(Scheme::sqrt2_chain()),
            SchemeSpec::Sqrt2Square => Ok(Scheme::sqrt2_square()),
            SchemeSpec::ScaledInteger { physical_dim, internal_dim, scale } => Scheme::scaled_integer(*physical_dim, *internal_dim, *scale),
            SchemeSpec::Custom { physical_dim, internal_dim, columns } => {
                Scheme::new(*physical_dim, *internal_dim, LatticeBasis::from_columns(columns)?)
            }
            SchemeSpec::Heisenberg => Ok(shadow_core::HScheme::new().linear().clone()),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PointGroupSpec {
    #[default]
    Trivial,
    Sign,
    Cyclic { n: usize },
    Dihedral { n: usize },
}

impl PointGroupSpec {
    pub fn build(&self, dim: usize) -> Result<PointGroup, ConfigError> {
        let planar = |name: &str| {
            if dim == 2 {
                Ok(())
            } else {
                Err(ConfigError::Invalid(format!("{name} groups act on the plane, but the physical dimension is {dim}")))
            }
        };
        match self {
            PointGroupSpec::Trivial => Ok(PointGroup::trivial(dim)),
            PointGroupSpec::Sign => Ok(PointGroup::sign(dim)),
            PointGroupSpec::Cyclic { n } => planar("cyclic").map(|_| PointGroup::cyclic(*n)),
            PointGroupSpec::Dihedral { n } => planar("dihedral").map(|_| PointGroup::dihedral(*n)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionKind {
    Gaussian {
        sigma: f64,
        #[serde(default = "one")]
        dim: usize,
    },
    Bspline { order: usize, half_width: f64 },
    Tent,
    Box { half_width: f64 },
    Tensor { factors: Vec<FunctionSpec> },
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionSpec {
    #[serde(flatten)]
    pub kind: FunctionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<Vec<f64>>,
}

impl FunctionSpec {
    pub fn gaussian(sigma: f64) -> Self {
        Self { kind: FunctionKind::Gaussian { sigma, dim: 1 }, shift: None }
    }

    pub fn build(&self) -> Result<TestFunction, ConfigError> {
        let f = match &self.kind {
            FunctionKind::Gaussian { sigma, dim } => {
                positive("sigma", *sigma)?;
                TestFunction::isotropic_gaussian(*dim, *sigma)
            }
            FunctionKind::Bspline { order, half_width } => {
                positive("half_width", *half_width)?;
                if *order == 0 {
                    return Err(ConfigError::Invalid("B-spline order must be at least 1".into()));
                }
                TestFunction::bspline(*order, *half_width)
            }
            FunctionKind::Tent => TestFunction::tent(),
            FunctionKind::Box { half_width } => {
                positive("half_width", *half_width)?;
                TestFunction::box_indicator(*half_width)
            }
            FunctionKind::Tensor { factors } => {
                let parts = factors.iter().map(|f| f.build()).collect::<Result<Vec<_>, _>>()?;
                TestFunction::tensor_all(&parts)
            }
        };
        match &self.shift {
            Some(s) if s.len() != f.dim() => Err(ConfigError::Invalid(format!("shift has {} entries for a {}-dimensional function", s.len(), f.dim()))),
            Some(s) => Ok(f.translated(s)),
            None => Ok(f),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::Invalid(format!("{name} must be positive, got {v}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub autocorr: f64,
    pub poisson: f64,
    pub consistency: f64,
    pub trivial_peak: f64,
    pub lattice_sum: f64,
    pub norm_bound: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { autocorr: 5e-3, poisson: 1e-6, consistency: 1e-2, trivial_peak: 1e-3, lattice_sum: 5e-2, norm_bound: 1e-6 }
    }
}

impl Tolerances {
    fn validate(&self) -> Result<(), ConfigError> {
        for (name, v) in [
            ("autocorr", self.autocorr),
            ("poisson", self.poisson),
            ("consistency", self.consistency),
            ("trivial_peak", self.trivial_peak),
            ("lattice_sum", self.lattice_sum),
            ("norm_bound", self.norm_bound),
        ] {
            positive(&format!("tolerance {name}"), v)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NilpotentLabel {
    pub lambda1: f64,
    pub m: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeisenbergConfig {
    /// First components `η₁ = (re, im)` of Bessel-branch labels.
    #[serde(default)]
    pub bessel_labels: Vec<[f64; 2]>,
    #[serde(default)]
    pub nilpotent_labels: Vec<NilpotentLabel>,
    #[serde(default = "default_ansatz")]
    pub ansatz_dim: usize,
    /// Test functions on `ℂ ⊕ ℝ` for the lattice-sum identity; skipped when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice_sum: Option<LatticeSumConfig>,
}

fn default_ansatz() -> usize {
    12
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSumConfig {
    pub f: FunctionSpec,
    pub r: FunctionSpec,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormBoundConfig {
    pub alpha: f64,
    #[serde(default)]
    pub metric: Metric,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scheme: SchemeSpec,
    #[serde(default)]
    pub point_group: PointGroupSpec,
    pub window: Window,
    /// Averaging scales `t`; regions are `F_t` of `family`.
    #[serde(default = "default_scales")]
    pub scales: Vec<f64>,
    #[serde(default = "default_family")]
    pub family: Family,
    /// Physical test function and, for Poisson checks, the internal one.
    #[serde(default)]
    pub test_functions: Vec<FunctionSpec>,
    #[serde(default = "default_dual_radius")]
    pub dual_radius: f64,
    /// Autocorrelation cutoff radius; defaults to the support of `f* ∗ f`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<f64>,
    /// Frequency for the approximation-sequence diagnostic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<Vec<f64>>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_bound: Option<NormBoundConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heisenberg: Option<HeisenbergConfig>,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_scales() -> Vec<f64> {
    vec![100.0]
}

fn default_family() -> Family {
    Family::Boxes
}

fn default_dual_radius() -> f64 {
    6.0
}

fn default_seed() -> u64 {
    0x5eed
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.tolerances.validate()?;
        positive("dual_radius", self.dual_radius)?;
        if let Some(c) = self.cutoff {
            positive("cutoff", c)?;
        }
        if self.scales.is_empty() || self.scales.iter().any(|t| !(*t > 0.0)) || self.scales.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ConfigError::Invalid("scales must be positive and strictly increasing".into()));
        }
        self.window.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        for f in &self.test_functions {
            f.build()?;
        }
        Ok(())
    }

    /// Largest averaging region.
    pub fn region(&self, dim: usize) -> Region {
        let t = *self.scales.last().expect("validated");
        shadow_core::ApproxSequence { family: self.family, scales: self.scales.clone() }.region(dim, t)
    }

    pub fn function(&self, i: usize) -> Result<TestFunction, ConfigError> {
        self.test_functions
            .get(i)
            .ok_or_else(|| ConfigError::Invalid(format!("this command needs at least {} test function(s)", i + 1)))?
            .build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BUNDLED: &str = include_str!("../configs/sqrt2_chain.json");

    #[test]
    fn bundled_config_round_trips() {
        let cfg = ExperimentConfig::from_json(BUNDLED).unwrap();
        let again = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn rejects_bad_tolerance_and_json() {
        let mut cfg = ExperimentConfig::from_json(BUNDLED).unwrap();
        cfg.tolerances.poisson = 0.0;
        assert!(matches!(cfg.validate(), Err(ConfigError::Invalid(_))));
        assert!(matches!(ExperimentConfig::from_json("{ not json"), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn function_specs() {
        let spec: FunctionSpec = serde_json::from_str(r#"{"kind":"tensor","factors":[{"kind":"tent"},{"kind":"gaussian","sigma":0.5}],"shift":[0.1,0.0]}"#).unwrap();
        let f = spec.build().unwrap();
        assert_eq!(f.dim(), 2);
        assert!((f.eval(&[0.1, 0.0]).re - 1.0).abs() < 1e-15);
        let bad = FunctionSpec { kind: FunctionKind::Gaussian { sigma: -1.0, dim: 1 }, shift: None };
        assert!(bad.build().is_err());
    }
}
