//! JSON run configuration: `{kernel, tiling, problem}`.

use serde::{Deserialize, Serialize};

use super::{
    Coefficient, DataTypeSpec, DependenceVector, Initializer, Kernel, NumberKind, ProblemInstance, TilingKind,
    TilingScheme,
};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefficientConfig {
    Number(f64),
    Text(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct DataTypeConfig {
    pub kind: NumberKind,
    pub total_bits: u32,
    #[serde(default)]
    pub frac_bits: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct KernelConfig {
    pub name: String,
    pub deps: Vec<Vec<i64>>,
    pub coeffs: CoefficientConfig,
    pub dtype: DataTypeConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct TilingConfig {
    pub kind: TilingKind,
    pub sizes: Vec<i64>,
    #[serde(default)]
    pub skew: Option<Vec<Vec<i64>>>,
}

pub type InitConfig = Initializer;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ProblemConfig {
    pub time_steps: i64,
    pub spatial_sizes: Vec<i64>,
    #[serde(default)]
    pub init: Option<InitConfig>,
}

/// Raw config file contents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub kernel: KernelConfig,
    pub tiling: TilingConfig,
    pub problem: ProblemConfig,
}

/// A validated kernel + tiling + problem triple.
#[derive(Clone, Debug)]
pub struct RunSetup {
    pub kernel: Kernel,
    pub tiling: TilingScheme,
    pub problem: ProblemInstance,
}

fn at(path: impl Into<String>) -> impl FnOnce(Error) -> Error {
    let path = path.into();
    move |e| match e {
        e @ Error::Config { .. } => e,
        other => Error::Config {
            path,
            msg: other.to_string(),
        },
    }
}

impl RunSetup {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let raw: ConfigFile = serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
            path: e.path().to_string(),
            msg: e.inner().to_string(),
        })?;
        Self::from_config(&raw)
    }

    pub fn from_config(raw: &ConfigFile) -> Result<Self> {
        let kernel = raw.kernel.resolve()?;
        let tiling = raw.tiling.resolve().map_err(at("tiling"))?;
        if tiling.dim() != kernel.dim {
            return Err(Error::Config {
                path: "tiling.sizes".into(),
                msg: format!("{} tile sizes for a {}-d kernel", tiling.dim(), kernel.dim),
            });
        }
        let p = &raw.problem;
        let problem = ProblemInstance::new(
            p.time_steps,
            p.spatial_sizes.clone(),
            p.init.unwrap_or(Initializer::Polybench),
        )
        .map_err(at("problem"))?;
        if problem.spatial_sizes.len() != kernel.spatial_dim() {
            return Err(Error::Config {
                path: "problem.spatialSizes".into(),
                msg: format!(
                    "{} sizes for {} spatial dimensions",
                    problem.spatial_sizes.len(),
                    kernel.spatial_dim()
                ),
            });
        }
        Ok(RunSetup {
            kernel,
            tiling,
            problem,
        })
    }
}

impl KernelConfig {
    pub fn resolve(&self) -> Result<Kernel> {
        let dim = self.deps.first().map(Vec::len).unwrap_or(0);
        for (i, d) in self.deps.iter().enumerate() {
            if d.len() != dim {
                return Err(Error::Config {
                    path: format!("kernel.deps[{i}]"),
                    msg: format!("length {} differs from {dim}", d.len()),
                });
            }
        }
        let coeff = match &self.coeffs {
            CoefficientConfig::Number(v) => Coefficient::Decimal { value: *v },
            CoefficientConfig::Text(t) => Coefficient::parse(t).map_err(at("kernel.coeffs"))?,
        };
        let dtype = self.dtype.resolve().map_err(at("kernel.dtype"))?;
        let deps = self.deps.iter().map(|d| DependenceVector::new(d)).collect();
        Kernel::new(self.name.clone(), deps, coeff, dtype).map_err(at("kernel.deps"))
    }
}

impl DataTypeConfig {
    pub fn resolve(&self) -> Result<DataTypeSpec> {
        match (self.kind, self.frac_bits) {
            (NumberKind::Fixed, Some(f)) => DataTypeSpec::fixed_with_frac(self.total_bits, f),
            (NumberKind::Fixed, None) => DataTypeSpec::fixed(self.total_bits),
            (NumberKind::Float, _) => DataTypeSpec::float(self.total_bits),
        }
    }
}

impl TilingConfig {
    pub fn resolve(&self) -> Result<TilingScheme> {
        match self.kind {
            TilingKind::Diamond1d => {
                if self.sizes.len() != 2 {
                    return Err(Error::InvalidTiling("diamond1d takes two sizes".into()));
                }
                TilingScheme::diamond(self.sizes[0], self.sizes[1])
            }
            TilingKind::SkewedRect => match &self.skew {
                Some(skew) => TilingScheme::skewed_rect(self.sizes.clone(), skew.clone()),
                None => TilingScheme::rect(self.sizes.clone()),
            },
        }
    }
}
