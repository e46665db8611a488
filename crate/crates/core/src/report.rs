//! Report documents and the assertion records they carry.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, Stage};
use crate::control::{ControlConstants, ControlFunction, GrowthFit};
use crate::error::Result;
use crate::homology::{CertificateReport, KStar, SweepRow};
use crate::inequalities::{ConsistencyReport, CrosscheckReport, IsoperimetricReport, SobolevReport};
use crate::metric::{DeltaEstimate, DoublingProfile, PointId, QuasiconvexityReport};
use crate::net::{NetCheck, NetCountRow};
use crate::partition::{Ineq2Report, LipschitzReport, SumReport};
use crate::rips::{Connectivity, QiReport, ValencyReport};

pub const REPORT_FORMAT_VERSION: u32 = 1;

/// Relative and absolute slack allowed by [`Check::le`].
pub const CHECK_TOL: f64 = 1e-9;

/// One asserted inequality `lhs <= rhs`, with both sides recorded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    #[serde(with = "crate::io::float_or_inf")]
    pub lhs: f64,
    #[serde(with = "crate::io::float_or_inf")]
    pub rhs: f64,
    pub holds: bool,
}

impl Check {
    /// lhs <= rhs + 1e-9·max(1, |rhs|); ∞ <= ∞ holds.
    pub fn le(name: impl Into<String>, lhs: f64, rhs: f64) -> Check {
        let holds = if lhs.is_nan() || rhs.is_nan() {
            false
        } else if rhs == f64::INFINITY || lhs == f64::NEG_INFINITY {
            true
        } else {
            lhs <= rhs + CHECK_TOL * rhs.abs().max(1.0)
        };
        Check {
            name: name.into(),
            lhs,
            rhs,
            holds,
        }
    }

    /// A yes/no condition, recorded as 1 <= 1 or 1 <= 0.
    pub fn holds_if(name: impl Into<String>, ok: bool) -> Check {
        Check {
            name: name.into(),
            lhs: 1.0,
            rhs: if ok { 1.0 } else { 0.0 },
            holds: ok,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceSummary {
    pub kind: String,
    pub points: usize,
    pub basepoint: PointId,
    pub truncation_radius: f64,
    pub diameter: f64,
    pub integral: bool,
    pub hash: String,
}

impl SpaceSummary {
    pub fn of(space: &crate::metric::FiniteMetricSpace) -> Self {
        SpaceSummary {
            kind: space.spec().kind().to_string(),
            points: space.len(),
            basepoint: space.basepoint(),
            truncation_radius: space.truncation_radius(),
            diameter: space.diameter(),
            integral: space.is_integral(),
            hash: crate::io::space_fingerprint(space),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetStage {
    pub eps: f64,
    pub members: usize,
    pub verdict: NetCheck,
    pub doubling: DoublingProfile,
    pub count_bounds: Vec<NetCountRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RipsStage {
    pub vertices: usize,
    pub edges: usize,
    pub connectivity: Connectivity,
    pub valency: ValencyReport,
    pub quasiconvexity: QuasiconvexityReport,
    pub qi: QiReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartitionStage {
    /// ε exceeds min{2, R/2} for the largest doubling radius.
    pub scale_warning: bool,
    pub sums: SumReport,
    pub lipschitz: LipschitzReport,
    /// Extension of v(p) = |p|.
    pub ineq2: Ineq2Report,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PonziStage {
    pub rho: ControlFunction,
    pub constants: ControlConstants,
    pub sweep: Vec<SweepRow>,
    /// Present when at least five radii have finite K*.
    pub growth: Option<GrowthFit>,
    /// Radius whose certificate was rebuilt and verified.
    pub certified_radius: Option<f64>,
    pub k_star: Option<KStar>,
    pub certificate: Option<CertificateReport>,
    pub consistency: Option<ConsistencyReport>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageResults {
    pub net: Option<NetStage>,
    pub rips: Option<RipsStage>,
    pub partition: Option<PartitionStage>,
    pub ponzi: Option<PonziStage>,
    pub iso: Option<IsoperimetricReport>,
    pub sobolev: Option<SobolevReport>,
    pub delta: Option<DeltaEstimate>,
    pub crosscheck: Option<CrosscheckReport>,
}

/// A check tagged with the stage that asserted it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageCheck {
    pub stage: Stage,
    #[serde(flatten)]
    pub check: Check,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Skipped {
    pub stage: Stage,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "kebab-case")]
pub enum Status {
    Complete,
    /// The run stopped at `stage`; later stages did not run.
    Failed {
        stage: String,
        message: String,
        exit_code: i32,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTime {
    pub stage: Stage,
    pub seconds: f64,
}

/// Wall-clock data, excluded from determinism comparisons.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub threads: usize,
    pub total_seconds: f64,
    pub stages: Vec<StageTime>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub format_version: u32,
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    pub space: Option<SpaceSummary>,
    pub stages: StageResults,
    pub checks: Vec<StageCheck>,
    pub skipped: Vec<Skipped>,
    pub status: Status,
    pub timing: Option<Timing>,
}

impl Report {
    pub fn new(config: RunConfig) -> Self {
        Report {
            format_version: REPORT_FORMAT_VERSION,
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            space: None,
            stages: StageResults::default(),
            checks: Vec::new(),
            skipped: Vec::new(),
            status: Status::Complete,
            timing: None,
        }
    }

    pub fn is_partial(&self) -> bool {
        !matches!(self.status, Status::Complete)
    }

    /// 0 for a complete run, else the failure's exit code.
    pub fn exit_code(&self) -> i32 {
        match &self.status {
            Status::Complete => 0,
            Status::Failed { exit_code, .. } => *exit_code,
        }
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &StageCheck> {
        self.checks.iter().filter(|c| !c.check.holds)
    }

    /// The report with timing, sweep runtimes and the thread count removed.
    pub fn without_timing(&self) -> Report {
        let mut r = self.clone();
        r.timing = None;
        r.config.threads = None;
        if let Some(p) = &mut r.stages.ponzi {
            for row in &mut p.sweep {
                row.runtime = 0.0;
            }
        }
        r
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Report> {
        let r: Report =
            serde_json::from_str(text).map_err(|e| crate::error::invalid(format!("malformed report: {e}")))?;
        if r.format_version != REPORT_FORMAT_VERSION {
            return Err(crate::error::invalid(format!(
                "report format version {} is not supported",
                r.format_version
            )));
        }
        Ok(r)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    /// The Ponzi sweep as `R,K*,feasible_at_cap,runtime`; header only when
    /// no sweep ran.
    Csv,
}

pub fn emit_report(report: &Report, format: ReportFormat, path: &Path) -> Result<()> {
    match format {
        ReportFormat::Json => crate::io::write_json(path, report),
        ReportFormat::Csv => {
            let rows = report.stages.ponzi.as_ref().map_or(&[][..], |p| &p.sweep[..]);
            let mut out = crate::io::create_file(path)?;
            crate::homology::write_sweep_csv(rows, &mut out)
                .and_then(|_| std::io::Write::flush(&mut out))
                .map_err(|e| crate::error::Error::io(path, e))
        }
    }
}
