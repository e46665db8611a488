//! Run configuration for the end-to-end pipeline.
//!
//! A configuration is a JSON document. Every field except `space` and `eps`
//! has a default, and unknown fields are rejected.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::control::{ControlFunction, DEFAULT_GROWTH_TOLERANCE};
use crate::error::{invalid, Error, Result};
use crate::homology::KSearch;
use crate::inequalities::{Method, SearchOptions, WeightMode};
use crate::metric::SpaceSpec;

pub const CONFIG_FORMAT_VERSION: u32 = 1;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "COARSEKIT_OUT_DIR";

/// Pipeline stages, in execution order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Net,
    Rips,
    Partition,
    Ponzi,
    Iso,
    Sobolev,
    Delta,
    Crosscheck,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Net,
        Stage::Rips,
        Stage::Partition,
        Stage::Ponzi,
        Stage::Iso,
        Stage::Sobolev,
        Stage::Delta,
        Stage::Crosscheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Net => "net",
            Stage::Rips => "rips",
            Stage::Partition => "partition",
            Stage::Ponzi => "ponzi",
            Stage::Iso => "iso",
            Stage::Sobolev => "sobolev",
            Stage::Delta => "delta",
            Stage::Crosscheck => "crosscheck",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| invalid(format!("unknown stage {s:?}")))
    }
}

/// Radii R = rmin, rmin + step, ... <= rmax.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRange {
    pub rmin: f64,
    pub rmax: f64,
    pub step: f64,
}

impl SweepRange {
    pub fn validate(&self) -> Result<()> {
        if !(self.rmin > 0.0 && self.rmax.is_finite() && self.rmin <= self.rmax) {
            return Err(invalid(format!(
                "sweep needs 0 < rmin <= rmax, got rmin {} rmax {}",
                self.rmin, self.rmax
            )));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(invalid("sweep step must be positive"));
        }
        if (self.rmax - self.rmin) / self.step > 1e5 {
            return Err(invalid("sweep has more than 100000 radii"));
        }
        Ok(())
    }

    /// The radii, computed as rmin + i·step to avoid accumulated drift.
    pub fn radii(&self) -> Vec<f64> {
        let n = ((self.rmax - self.rmin) / self.step + crate::TOL).floor() as usize;
        (0..=n).map(|i| self.rmin + i as f64 * self.step).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative bisection tolerance on K*.
    pub k_tol: f64,
    /// Largest K tried.
    pub k_cap: f64,
    /// Relative RMS used by growth classification.
    pub growth: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let k = KSearch::default();
        Tolerances {
            k_tol: k.tol,
            k_cap: k.cap,
            growth: DEFAULT_GROWTH_TOLERANCE,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Samples {
    /// Points at which the partition sums are checked.
    pub partition_points: usize,
    /// Near pairs for the partition Lipschitz constant.
    pub lipschitz_pairs: usize,
    /// Pairs for the Rips quasi-isometry and quasiconvexity checks.
    pub qi_pairs: usize,
    /// Centres for the doubling profile.
    pub doubling_centers: usize,
    /// Triples for the δ estimate.
    pub delta_triples: usize,
    /// Random points for the δ estimate; all points when unset.
    pub delta_subsample: Option<usize>,
}

impl Default for Samples {
    fn default() -> Self {
        Samples {
            partition_points: 1000,
            lipschitz_pairs: 1000,
            qi_pairs: 10_000,
            doubling_centers: 64,
            delta_triples: 2000,
            delta_subsample: Some(200),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "format_version")]
    pub format_version: u32,
    pub space: SpaceSpec,
    pub eps: f64,
    #[serde(default = "constant_rho")]
    pub rho: ControlFunction,
    /// Ponzi sweep radii; derived from the truncation when unset.
    #[serde(default)]
    pub sweep: Option<SweepRange>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub samples: Samples,
    #[serde(default = "all_stages")]
    pub stages: Vec<Stage>,
    #[serde(default)]
    pub iso_method: Method,
    #[serde(default)]
    pub sobolev_method: Method,
    #[serde(default = "counting")]
    pub weights: WeightMode,
    #[serde(default)]
    pub search: SearchOptions,
    /// Upper bound on generated points.
    #[serde(default = "max_points")]
    pub max_points: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Worker threads; the machine's parallelism when unset.
    #[serde(default)]
    pub threads: Option<usize>,
}

fn format_version() -> u32 {
    CONFIG_FORMAT_VERSION
}

fn constant_rho() -> ControlFunction {
    ControlFunction::Constant
}

fn all_stages() -> Vec<Stage> {
    Stage::ALL.to_vec()
}

fn counting() -> WeightMode {
    WeightMode::Counting
}

fn max_points() -> usize {
    crate::metric::GenerateOptions::default().max_points
}

impl RunConfig {
    /// A configuration with every default filled in.
    pub fn new(space: SpaceSpec, eps: f64) -> Self {
        RunConfig {
            format_version: CONFIG_FORMAT_VERSION,
            space,
            eps,
            rho: constant_rho(),
            sweep: None,
            seed: 0,
            tolerances: Tolerances::default(),
            samples: Samples::default(),
            stages: all_stages(),
            iso_method: Method::Auto,
            sobolev_method: Method::Auto,
            weights: WeightMode::Counting,
            search: SearchOptions::default(),
            max_points: max_points(),
            output_dir: None,
            threads: None,
        }
    }

    /// Parse a configuration; a document that does not describe a valid
    /// configuration is a usage error.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| invalid(format!("malformed configuration: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::InvalidArgument(m) => invalid(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.format_version != CONFIG_FORMAT_VERSION {
            return Err(invalid(format!(
                "configuration format version {} is not supported",
                self.format_version
            )));
        }
        self.space.validate()?;
        if let SpaceSpec::File { path } = &self.space {
            if !path.is_file() {
                return Err(Error::io(
                    path,
                    std::io::Error::new(std::io::ErrorKind::NotFound, "space file not found"),
                ));
            }
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(invalid(format!("ε must be positive, got {}", self.eps)));
        }
        self.rho.validate()?;
        if let Some(s) = &self.sweep {
            s.validate()?;
        }
        let t = &self.tolerances;
        if !(t.k_tol > 0.0 && t.k_tol < 1.0) {
            return Err(invalid("k_tol must lie in (0, 1)"));
        }
        if !(t.k_cap > 0.0 && t.k_cap.is_finite()) {
            return Err(invalid("k_cap must be positive"));
        }
        if !(t.growth > 0.0 && t.growth.is_finite()) {
            return Err(invalid("growth tolerance must be positive"));
        }
        if self.samples.doubling_centers == 0 {
            return Err(invalid("doubling_centers must be positive"));
        }
        if let Some(m) = self.search.margin {
            if !(m >= 0.0 && m.is_finite()) {
                return Err(invalid("margin must be nonnegative"));
            }
        }
        if self.iso_method == Method::Parametric {
            return Err(invalid("the isoperimetric constant has no parametric method"));
        }
        if self.threads == Some(0) {
            return Err(invalid("threads must be positive"));
        }
        if self.max_points == 0 {
            return Err(invalid("max_points must be positive"));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = self.stages.iter().find(|s| !seen.insert(**s)) {
            return Err(invalid(format!("stage {dup} is listed twice")));
        }
        Ok(())
    }

    pub fn runs(&self, stage: Stage) -> bool {
        self.stages.contains(&stage)
    }

    pub fn k_search(&self) -> KSearch {
        KSearch {
            tol: self.tolerances.k_tol,
            cap: self.tolerances.k_cap,
        }
    }

    pub fn search_options(&self) -> SearchOptions {
        SearchOptions {
            seed: self.seed,
            ..self.search.clone()
        }
    }

    /// `output_dir`, else the directory named by [`OUT_DIR_ENV`], else the
    /// working directory.
    pub fn resolved_output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunConfig {
        let mut c = RunConfig::new(SpaceSpec::Zn { dims: 1, radius: 50 }, 1.0);
        c.rho = ControlFunction::Power { c: 0.1, p: 1.5 };
        c.sweep = Some(SweepRange {
            rmin: 10.0,
            rmax: 40.0,
            step: 0.1,
        });
        c.search.margin = Some(0.1 + 0.2);
        c.threads = Some(3);
        c
    }

    #[test]
    fn round_trips_losslessly() {
        let c = sample();
        let back = RunConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.search.margin.unwrap().to_bits(), (0.1f64 + 0.2).to_bits());
    }

    #[test]
    fn minimal_document_takes_defaults() {
        let c = RunConfig::from_json(r#"{"space": {"kind": "zn", "dims": 2, "radius": 5}, "eps": 1}"#).unwrap();
        assert_eq!(c, RunConfig::new(SpaceSpec::Zn { dims: 2, radius: 5 }, 1.0));
    }

    #[test]
    fn malformed_documents_are_usage_errors() {
        for text in [
            "{",
            r#"{"space": {"kind": "zn", "dims": 2, "radius": 5}}"#,
            r#"{"space": {"kind": "zn", "dims": 2, "radius": 5}, "eps": 1, "colour": 3}"#,
            r#"{"space": {"kind": "zn", "dims": 2, "radius": 5}, "eps": -1}"#,
            r#"{"space": {"kind": "zn", "dims": 2, "radius": 5}, "eps": 1, "tolerances": {"k_tol": 0}}"#,
            r#"{"space": {"kind": "zn", "dims": 2, "radius": 5}, "eps": 1, "stages": ["net", "net"]}"#,
        ] {
            let err = RunConfig::from_json(text).unwrap_err();
            assert_eq!(err.exit_code(), 1, "{text}: {err}");
        }
    }

    #[test]
    fn missing_space_file_is_an_io_error() {
        let c = RunConfig::new(
            SpaceSpec::File {
                path: "/nonexistent/space.json".into(),
            },
            1.0,
        );
        assert_eq!(c.validate().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn sweep_radii_do_not_drift() {
        let s = SweepRange {
            rmin: 10.0,
            rmax: 40.0,
            step: 0.1,
        };
        let r = s.radii();
        assert_eq!(r.len(), 301);
        assert_eq!(r[0], 10.0);
        assert!((r[300] - 40.0).abs() < 1e-9);
    }
}
