//! Run configuration: command-line flags merged over an optional TOML
//! config file. Flags win; unknown file keys are rejected; validation
//! errors name the offending key.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use crate::AppError;

fn read_section<T: for<'de> Deserialize<'de> + Default>(
    path: Option<&Path>,
) -> Result<T, AppError> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let body = std::fs::read_to_string(path)
        .map_err(|e| AppError::Usage(format!("--config {}: {e}", path.display())))?;
    toml::from_str(&body).map_err(|e| AppError::Usage(format!("--config {}: {e}", path.display())))
}

fn require<T>(value: Option<T>, key: &str) -> Result<T, AppError> {
    value.ok_or_else(|| AppError::Usage(format!("missing required value for {key}")))
}

fn require_prime(value: u64, key: &str) -> Result<u64, AppError> {
    if kummerlab::arith::is_prime(value) {
        Ok(value)
    } else {
        Err(AppError::Usage(format!("{key}: {value} must be prime")))
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct BhArgs {
    /// Fiber exponent (prime).
    #[arg(long)]
    pub r: Option<u64>,
    /// Fiber bound: n ranges over [1, x].
    #[arg(long)]
    pub x: Option<u64>,
    /// k ranges over [1, y].
    #[arg(long)]
    pub y: Option<u64>,
    /// Residue class of n (default 0).
    #[arg(long, allow_hyphen_values = true)]
    pub n0: Option<i64>,
    /// Modulus of the residue class (default 1).
    #[arg(long)]
    pub m0: Option<u64>,
    /// Singular-series truncation (default 10000).
    #[arg(long = "trunc-p")]
    pub trunc_p: Option<u64>,
    /// Exceptional cutoff exponent B': |dev| >= x/(log x)^B' (default 1).
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Output directory for CSV, summary and manifest.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BhParams {
    pub r: u64,
    pub x: u64,
    pub y: u64,
    pub n0: i64,
    pub m0: u64,
    pub trunc_p: u64,
    pub threshold: f64,
}

impl BhArgs {
    fn merge_over(self, under: BhArgs) -> BhArgs {
        BhArgs {
            r: self.r.or(under.r),
            x: self.x.or(under.x),
            y: self.y.or(under.y),
            n0: self.n0.or(under.n0),
            m0: self.m0.or(under.m0),
            trunc_p: self.trunc_p.or(under.trunc_p),
            threshold: self.threshold.or(under.threshold),
            out: self.out.or(under.out),
        }
    }

    pub fn resolve(self, config: Option<&Path>) -> Result<(BhParams, Option<PathBuf>), AppError> {
        let merged = self.merge_over(read_section(config)?);
        let params = BhParams {
            r: require_prime(require(merged.r, "--r")?, "--r")?,
            x: require(merged.x, "--x")?,
            y: require(merged.y, "--y")?,
            n0: merged.n0.unwrap_or(0),
            m0: merged.m0.unwrap_or(1),
            trunc_p: merged.trunc_p.unwrap_or(10_000),
            threshold: merged.threshold.unwrap_or(1.0),
        };
        if params.x < 2 {
            return Err(AppError::Usage("--x: need x >= 2".into()));
        }
        if params.m0 == 0 {
            return Err(AppError::Usage("--m0: need m0 >= 1".into()));
        }
        Ok((params, merged.out))
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct SeriesArgs {
    /// Fiber exponent (prime).
    #[arg(long)]
    pub r: Option<u64>,
    /// Scan k over [1, k-max].
    #[arg(long = "k-max")]
    pub k_max: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    pub n0: Option<i64>,
    #[arg(long)]
    pub m0: Option<u64>,
    /// Euler-product truncation (default 10000).
    #[arg(long = "trunc-p")]
    pub trunc_p: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesParams {
    pub r: u64,
    pub k_max: u64,
    pub n0: i64,
    pub m0: u64,
    pub trunc_p: u64,
}

impl SeriesArgs {
    fn merge_over(self, under: SeriesArgs) -> SeriesArgs {
        SeriesArgs {
            r: self.r.or(under.r),
            k_max: self.k_max.or(under.k_max),
            n0: self.n0.or(under.n0),
            m0: self.m0.or(under.m0),
            trunc_p: self.trunc_p.or(under.trunc_p),
            out: self.out.or(under.out),
        }
    }

    pub fn resolve(
        self,
        config: Option<&Path>,
    ) -> Result<(SeriesParams, Option<PathBuf>), AppError> {
        let merged = self.merge_over(read_section(config)?);
        let params = SeriesParams {
            r: require_prime(require(merged.r, "--r")?, "--r")?,
            k_max: require(merged.k_max, "--k-max")?,
            n0: merged.n0.unwrap_or(0),
            m0: merged.m0.unwrap_or(1),
            trunc_p: merged.trunc_p.unwrap_or(10_000),
        };
        Ok((params, merged.out))
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct SieveArgs {
    /// Character order (prime).
    #[arg(long)]
    pub r: Option<u64>,
    /// Comma-separated Q values, e.g. 5,10,20.
    #[arg(long = "q-list", value_delimiter = ',')]
    pub q_list: Option<Vec<f64>>,
    /// Comma-separated M values.
    #[arg(long = "m-list", value_delimiter = ',')]
    pub m_list: Option<Vec<f64>>,
    /// Random coefficient vectors per cell (default 100).
    #[arg(long)]
    pub trials: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Restrict the family to primitive characters of conductor q.
    #[arg(long = "primitive-only")]
    pub primitive_only: Option<bool>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SieveParams {
    pub r: u64,
    pub q_list: Vec<f64>,
    pub m_list: Vec<f64>,
    pub trials: u32,
    pub seed: u64,
    pub primitive_only: bool,
}

impl SieveArgs {
    fn merge_over(self, under: SieveArgs) -> SieveArgs {
        SieveArgs {
            r: self.r.or(under.r),
            q_list: self.q_list.or(under.q_list),
            m_list: self.m_list.or(under.m_list),
            trials: self.trials.or(under.trials),
            seed: self.seed.or(under.seed),
            primitive_only: self.primitive_only.or(under.primitive_only),
            out: self.out.or(under.out),
        }
    }

    pub fn resolve(
        self,
        config: Option<&Path>,
    ) -> Result<(SieveParams, Option<PathBuf>), AppError> {
        let merged = self.merge_over(read_section(config)?);
        let params = SieveParams {
            r: require_prime(require(merged.r, "--r")?, "--r")?,
            q_list: require(merged.q_list, "--q-list")?,
            m_list: require(merged.m_list, "--m-list")?,
            trials: merged.trials.unwrap_or(100),
            seed: merged.seed.unwrap_or(0),
            primitive_only: merged.primitive_only.unwrap_or(false),
        };
        for (key, list) in [("--q-list", &params.q_list), ("--m-list", &params.m_list)] {
            if list.is_empty() {
                return Err(AppError::Usage(format!("{key}: empty list")));
            }
            if list.iter().any(|&v| !(v >= 1.0) || !v.is_finite()) {
                return Err(AppError::Usage(format!("{key}: entries must be >= 1")));
            }
        }
        if params.trials == 0 {
            return Err(AppError::Usage("--trials: need at least 1".into()));
        }
        Ok((params, merged.out))
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct ClassListArgs {
    /// Scan squarefree d = 3 (mod 4) up to this bound.
    #[arg(long)]
    pub bound: Option<u64>,
}

impl ClassListArgs {
    pub fn resolve(self, config: Option<&Path>) -> Result<u64, AppError> {
        let under: ClassListArgs = read_section(config)?;
        let bound = require(self.bound.or(under.bound), "--bound")?;
        if bound < 3 {
            return Err(AppError::Usage("--bound: need bound >= 3".into()));
        }
        Ok(bound)
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct VarietyArgs {
    /// Squarefree coefficient a of y^2 - a z^2.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<i64>,
    #[arg(long)]
    pub r: Option<u64>,
    #[arg(long)]
    pub k: Option<u64>,
    /// Search budget (fiber n bound; also the fallback |t| bound / 10).
    #[arg(long)]
    pub budget: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarietyParams {
    pub a: i64,
    pub r: u64,
    pub k: u64,
    pub budget: u64,
}

impl VarietyArgs {
    pub fn resolve(self, config: Option<&Path>) -> Result<VarietyParams, AppError> {
        let under: VarietyArgs = read_section(config)?;
        let merged = VarietyArgs {
            a: self.a.or(under.a),
            r: self.r.or(under.r),
            k: self.k.or(under.k),
            budget: self.budget.or(under.budget),
        };
        Ok(VarietyParams {
            a: require(merged.a, "--a")?,
            r: require_prime(require(merged.r, "--r")?, "--r")?,
            k: require(merged.k, "--k")?,
            budget: merged.budget.unwrap_or(2000),
        })
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default, rename_all = "kebab-case")]
pub struct DensityArgs {
    /// Form coefficient d (squarefree, 3 mod 4, class number <= 2).
    #[arg(long)]
    pub d: Option<u64>,
    /// Power exponent (prime, admissible for d).
    #[arg(long)]
    pub r: Option<u64>,
    /// Scan k over [1, K].
    #[arg(long = "K")]
    #[serde(rename = "K")]
    pub k_max: Option<u64>,
    /// Scale of the negative n3 range (default 2).
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityParams {
    pub d: u64,
    pub r: u64,
    pub k_max: u64,
    pub b: f64,
}

impl DensityArgs {
    pub fn resolve(
        self,
        config: Option<&Path>,
    ) -> Result<(DensityParams, Option<PathBuf>), AppError> {
        let under: DensityArgs = read_section(config)?;
        let merged = DensityArgs {
            d: self.d.or(under.d),
            r: self.r.or(under.r),
            k_max: self.k_max.or(under.k_max),
            b: self.b.or(under.b),
            out: self.out.or(under.out),
        };
        let params = DensityParams {
            d: require(merged.d, "--d")?,
            r: require_prime(require(merged.r, "--r")?, "--r")?,
            k_max: require(merged.k_max, "--K")?,
            b: merged.b.unwrap_or(2.0),
        };
        if params.b <= 0.0 {
            return Err(AppError::Usage("--b: must be positive".into()));
        }
        Ok((params, merged.out))
    }
}
