//! The end-to-end run: space, net, Rips graph, then the partition, Ponzi,
//! inequality and hyperbolicity stages, collected into one [`Report`].
//!
//! Stages run sequentially inside a thread pool of the configured size.
//! A stage that errors or asserts a failing check stops the run; the report
//! then carries every result obtained so far and a failed status.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use crate::config::{RunConfig, Stage};
use crate::control::classify_growth;
use crate::error::{invalid, Error, Result};
use crate::homology::{
    min_control_constant, ponzi_feasible, ponzi_sweep, verify_certificate, CertificateReport, Region,
};
use crate::inequalities::{
    iso_constant, iso_ratio, iso_sobolev_crosscheck, ponzi_iso_consistency, sobolev_constant, SafeRegion,
};
use crate::metric::{
    doubling_profile, estimate_delta, generate_space_with, quasiconvexity_ratio, DeltaOptions, DoublingProfile,
    FiniteMetricSpace, GenerateOptions, PairSample,
};
use crate::net::{net_ball_count_bound, PointedNet};
use crate::partition::{
    sample_near_pairs, verify_ineq2_bound, verify_partition_lipschitz, verify_partition_sums, PartitionOfUnity,
};
use crate::report::{
    emit_report, Check, NetStage, PartitionStage, PonziStage, Report, ReportFormat, RipsStage, Skipped, SpaceSummary,
    StageCheck, StageTime, Status, Timing,
};
use crate::rips::{verify_qi_bounds, RipsGraph};

/// Number of radii in a sweep derived from the truncation.
const DEFAULT_SWEEP_POINTS: usize = 5;

/// Run every configured stage. Errors are returned only for an invalid
/// configuration or an unusable thread count; failures inside the run are
/// recorded in the report's status.
pub fn run_pipeline(config: &RunConfig) -> Result<Report> {
    config.validate()?;
    let threads = match config.threads {
        Some(n) => n,
        None => {
            let n = std::thread::available_parallelism().map_or(1, |n| n.get());
            eprintln!("coarsekit: thread count not configured, using {n} (autodetected)");
            n
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| invalid(format!("cannot build a pool of {threads} threads: {e}")))?;
    let start = Instant::now();
    let mut run = Run {
        config,
        report: Report::new(config.clone()),
        times: Vec::new(),
        space: None,
        net: None,
        graph: None,
        profile: None,
    };
    pool.install(|| run.execute());
    let mut report = run.report;
    report.timing = Some(Timing {
        threads,
        total_seconds: start.elapsed().as_secs_f64(),
        stages: run.times,
    });
    Ok(report)
}

/// Write `report.json` and `sweep.csv` into `dir`, creating it if needed.
pub fn write_outputs(report: &Report, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let json = dir.join("report.json");
    let csv = dir.join("sweep.csv");
    emit_report(report, ReportFormat::Json, &json)?;
    emit_report(report, ReportFormat::Csv, &csv)?;
    Ok(vec![json, csv])
}

/// Radii for a Ponzi sweep when none is configured: evenly spaced up to
/// the largest radius leaving a 3ε margin inside the truncation.
pub fn default_sweep_radii(space: &FiniteMetricSpace, eps: f64) -> Result<Vec<f64>> {
    let rmax = space.truncation_radius() - 3.0 * eps;
    if !(rmax > 0.0) {
        return Err(invalid(format!(
            "truncation radius {} leaves no room for a Ponzi region at ε = {eps}",
            space.truncation_radius()
        )));
    }
    let n = DEFAULT_SWEEP_POINTS;
    Ok((1..=n).map(|i| rmax * i as f64 / n as f64).collect())
}

/// The assertions carried by a partition stage.
pub fn partition_checks(stage: &PartitionStage) -> Vec<Check> {
    let sums = &stage.sums;
    let mut checks = vec![
        Check::le("max |Σ φ_p(x) - 1|", sums.max_sum_error, crate::TOL),
        Check::le("1 <= min Σ ψ_p(x)", 1.0, sums.min_psi_sum),
        Check::le("max Σ ψ_p(x) <= N(2ε)", sums.max_psi_sum, sums.net_count_2eps as f64),
        Check::holds_if("φ_p vanishes outside B(p, 3ε/2)", sums.support_violation.is_none()),
        Check::le(
            "partition Lipschitz constant <= 4 N(2ε)/ε",
            stage.lipschitz.empirical,
            stage.lipschitz.bound,
        ),
    ];
    if let Some(t) = &stage.ineq2.tightest {
        checks.push(Check::le(
            "extension gradient at the tightest sample",
            t.quotient,
            t.bound,
        ));
    }
    checks.push(Check::holds_if(
        "extension gradient bound on every sample",
        stage.ineq2.holds,
    ));
    checks
}

/// The assertions carried by a certificate verification.
pub fn certificate_checks(v: &CertificateReport) -> Vec<Check> {
    vec![
        Check::le("max |∂t - 1| on F", v.max_boundary_error, crate::homology::CERT_TOL),
        Check::le("K(t) <= K", v.control_norm, v.declared_k),
        Check::le("P(t) <= P", v.propagation, v.declared_p),
        Check::holds_if("certificate supported on Rips edges", v.edges_ok),
        Check::holds_if("certificate verifies", v.passed),
    ]
}

/// Partition measurements on `net`: sums at `points` sampled points,
/// the Lipschitz constant and the extension of v(p) = |p| on `pairs` near
/// pairs.
pub fn measure_partition(net: &PointedNet, points: usize, pairs: usize, seed: u64) -> Result<PartitionStage> {
    let eps = net.eps();
    let pu = PartitionOfUnity::new(net);
    let sums = verify_partition_sums(&pu, points, seed)?;
    let near = sample_near_pairs(net, pairs, eps, seed);
    let lipschitz = verify_partition_lipschitz(&pu, &near)?;
    let norms: Vec<f64> = net.members().iter().map(|&p| net.space().norm(p)).collect();
    let ineq2 = verify_ineq2_bound(&pu, &norms, pairs, seed)?;
    Ok(PartitionStage {
        scale_warning: pu.scale_warning(net.space().truncation_radius()),
        sums,
        lipschitz,
        ineq2,
    })
}

/// Radii at which the doubling profile is needed by the count and valency
/// bounds.
fn profile_radii(eps: f64) -> Vec<f64> {
    vec![eps, 1.5 * eps, 2.0 * eps, 3.0 * eps, 4.0 * eps]
}

struct Run<'a> {
    config: &'a RunConfig,
    report: Report,
    times: Vec<StageTime>,
    space: Option<Arc<FiniteMetricSpace>>,
    net: Option<PointedNet>,
    graph: Option<RipsGraph>,
    profile: Option<DoublingProfile>,
}

impl Run<'_> {
    fn execute(&mut self) {
        if let Err(e) = self.load_space() {
            self.fail("space", &e);
            return;
        }
        for stage in Stage::ALL {
            if !self.config.runs(stage) {
                continue;
            }
            let start = Instant::now();
            let checks_before = self.report.checks.len();
            let outcome = self.run_stage(stage);
            self.times.push(StageTime {
                stage,
                seconds: start.elapsed().as_secs_f64(),
            });
            if let Err(e) = outcome {
                self.fail(stage.name(), &e);
                return;
            }
            let failed: Vec<&str> = self.report.checks[checks_before..]
                .iter()
                .filter(|c| !c.check.holds)
                .map(|c| c.check.name.as_str())
                .collect();
            if !failed.is_empty() {
                let e = Error::Assertion(failed.join("; "));
                self.fail(stage.name(), &e);
                return;
            }
        }
    }

    fn fail(&mut self, stage: &str, e: &Error) {
        self.report.status = Status::Failed {
            stage: stage.to_string(),
            message: e.to_string(),
            exit_code: e.exit_code(),
        };
    }

    fn check(&mut self, stage: Stage, check: Check) {
        self.report.checks.push(StageCheck { stage, check });
    }

    fn skip(&mut self, stage: Stage, reason: impl Into<String>) {
        self.report.skipped.push(Skipped {
            stage,
            reason: reason.into(),
        });
    }

    fn load_space(&mut self) -> Result<()> {
        let opts = GenerateOptions {
            max_points: self.config.max_points,
        };
        let space = Arc::new(generate_space_with(&self.config.space, opts)?);
        self.report.space = Some(SpaceSummary::of(&space));
        self.space = Some(space);
        Ok(())
    }

    fn space(&self) -> &Arc<FiniteMetricSpace> {
        self.space.as_ref().expect("space is loaded first")
    }

    fn net(&mut self) -> Result<&PointedNet> {
        if self.net.is_none() {
            self.net = Some(PointedNet::build(self.space(), self.config.eps)?);
        }
        Ok(self.net.as_ref().expect("net"))
    }

    fn graph(&mut self) -> Result<&RipsGraph> {
        if self.graph.is_none() {
            let g = RipsGraph::build(self.net()?);
            self.graph = Some(g);
        }
        Ok(self.graph.as_ref().expect("graph"))
    }

    fn profile(&mut self) -> Result<&DoublingProfile> {
        if self.profile.is_none() {
            let p = doubling_profile(
                self.space(),
                &profile_radii(self.config.eps),
                self.config.samples.doubling_centers,
                self.config.seed,
            )?;
            self.profile = Some(p);
        }
        Ok(self.profile.as_ref().expect("profile"))
    }

    fn run_stage(&mut self, stage: Stage) -> Result<()> {
        match stage {
            Stage::Net => self.net_stage(),
            Stage::Rips => self.rips_stage(),
            Stage::Partition => self.partition_stage(),
            Stage::Ponzi => self.ponzi_stage(),
            Stage::Iso => self.iso_stage(),
            Stage::Sobolev => self.sobolev_stage(),
            Stage::Delta => self.delta_stage(),
            Stage::Crosscheck => self.crosscheck_stage(),
        }
    }

    fn net_stage(&mut self) -> Result<()> {
        let eps = self.config.eps;
        let net = self.net()?.clone();
        let verdict = net.verify();
        let doubling = self.profile()?.clone();
        let count_bounds = net_ball_count_bound(&net, &doubling, &[2.0 * eps, 3.0 * eps]);
        self.check(
            Stage::Net,
            Check::holds_if("maximal ε-net containing the basepoint", verdict.passed()),
        );
        for row in &count_bounds {
            if let Some(b) = row.bound {
                self.check(
                    Stage::Net,
                    Check::le(
                        format!("max #(net ∩ B(x, {})) <= product of doubling numbers", row.radius),
                        row.measured as f64,
                        b as f64,
                    ),
                );
            }
        }
        self.report.stages.net = Some(NetStage {
            eps,
            members: net.len(),
            verdict,
            doubling,
            count_bounds,
        });
        Ok(())
    }

    fn rips_stage(&mut self) -> Result<()> {
        let cfg = self.config;
        let profile = self.profile()?.clone();
        let graph = self.graph()?;
        let eps = graph.eps();
        let valency = crate::rips::valency_bound_check(graph, &profile)?;
        let pairs = PairSample::Random {
            count: cfg.samples.qi_pairs,
            seed: cfg.seed,
        };
        let quasiconvexity = quasiconvexity_ratio(graph, &pairs)?;
        let q = if graph.space().spec().is_cayley() || !quasiconvexity.ratio.is_finite() {
            1.0
        } else {
            quasiconvexity.ratio.max(1.0)
        };
        let qi = verify_qi_bounds(graph, q, &pairs)?;
        let stage = RipsStage {
            vertices: graph.len(),
            edges: graph.edge_count(),
            connectivity: graph.connectivity(),
            valency,
            quasiconvexity,
            qi,
        };
        self.check(
            Stage::Rips,
            Check::le(
                "max valency <= N_d(4ε) N_d(2ε) N_d(ε)",
                stage.valency.max_valency as f64,
                stage.valency.bound as f64,
            ),
        );
        if let Some(w) = &stage.qi.upper {
            let lhs = w.ecart.map_or(f64::INFINITY, f64::from);
            self.check(
                Stage::Rips,
                Check::le("d_R <= Q d / ε + 1", lhs, q * w.dist / eps + 1.0),
            );
        }
        if let Some(w) = &stage.qi.lower {
            let rhs = w.ecart.map_or(f64::INFINITY, |e| 3.0 * eps * f64::from(e));
            self.check(Stage::Rips, Check::le("d <= 3ε d_R", w.dist, rhs));
        }
        self.check(
            Stage::Rips,
            Check::holds_if("Rips quasi-isometry bounds on every sampled pair", stage.qi.holds),
        );
        self.report.stages.rips = Some(stage);
        Ok(())
    }

    fn partition_stage(&mut self) -> Result<()> {
        let cfg = self.config;
        let net = self.net()?.clone();
        let stage = measure_partition(
            &net,
            cfg.samples.partition_points,
            cfg.samples.lipschitz_pairs,
            cfg.seed,
        )?;
        for c in partition_checks(&stage) {
            self.check(Stage::Partition, c);
        }
        self.report.stages.partition = Some(stage);
        Ok(())
    }

    fn ponzi_stage(&mut self) -> Result<()> {
        let cfg = self.config;
        let search = cfg.k_search();
        let constants = cfg.rho.constants(cfg.eps)?;
        let graph = self.graph()?.clone();
        let radii = match &cfg.sweep {
            Some(s) => s.radii(),
            None => default_sweep_radii(graph.space(), cfg.eps)?,
        };
        let sweep = ponzi_sweep(&graph, &cfg.rho, &radii, search)?;
        let finite: Vec<(f64, f64)> = sweep
            .iter()
            .filter(|r| r.k_star.is_finite())
            .map(|r| (r.radius, r.k_star))
            .collect();
        let growth = if finite.len() >= 5 {
            Some(classify_growth(&finite, cfg.tolerances.growth)?)
        } else {
            None
        };

        let mut stage = PonziStage {
            rho: cfg.rho.clone(),
            constants,
            sweep,
            growth,
            certified_radius: None,
            k_star: None,
            certificate: None,
            consistency: None,
        };
        if let Some(&(radius, _)) = finite.last() {
            let region = Region::ball(&graph, radius)?;
            let k = min_control_constant(&graph, &region, &cfg.rho, search)?;
            let outcome = ponzi_feasible(&graph, &region, &cfg.rho, k.k)?;
            self.check(Stage::Ponzi, Check::holds_if("a scheme exists at K*", outcome.feasible));
            if let Some(cert) = &outcome.certificate {
                let v = verify_certificate(cert, &graph);
                for c in certificate_checks(&v) {
                    self.check(Stage::Ponzi, c);
                }
                stage.certificate = Some(v);
            }
            if k.infeasible_below > 0.0 && k.infeasible_below.is_finite() {
                let below = ponzi_feasible(&graph, &region, &cfg.rho, k.infeasible_below)?;
                self.check(
                    Stage::Ponzi,
                    Check::le("flow deficit below K* is positive", 0.0, below.deficit),
                );
                self.check(Stage::Ponzi, Check::holds_if("no scheme below K*", !below.feasible));
            }
            stage.certified_radius = Some(radius);
            stage.k_star = Some(k);
        }
        if let Some(&(radius, k_star)) = finite.first() {
            let region = Region::ball(&graph, radius)?;
            let cap = cfg.search.max_exact_vertices;
            if region.sources.len() <= cap.min(30) {
                let c = ponzi_iso_consistency(&graph, &region, &cfg.rho, k_star, cap)?;
                self.check(Stage::Ponzi, c.check.clone());
                stage.consistency = Some(c);
            } else {
                self.skip(
                    Stage::Ponzi,
                    format!(
                        "consistency with the isoperimetric inequality needs at most {cap} sources, the smallest region has {}",
                        region.sources.len()
                    ),
                );
            }
        }
        self.report.stages.ponzi = Some(stage);
        Ok(())
    }

    fn iso_stage(&mut self) -> Result<()> {
        let cfg = self.config;
        let graph = self.graph()?.clone();
        let opts = cfg.search_options();
        let iso = iso_constant(&graph, &cfg.rho, cfg.iso_method, &opts)?;
        let safe = SafeRegion::new(&graph, iso.margin)?;
        let (_, _, ratio) = iso_ratio(&graph, &cfg.rho, &safe, &iso.best_set)?;
        self.check(
            Stage::Iso,
            Check::le("C* <= ratio of its witness set", iso.value, ratio),
        );
        self.check(
            Stage::Iso,
            Check::le("ratio of the witness set <= C*", ratio, iso.value),
        );
        self.report.stages.iso = Some(iso);
        Ok(())
    }

    fn sobolev_stage(&mut self) -> Result<()> {
        let cfg = self.config;
        let graph = self.graph()?.clone();
        let opts = cfg.search_options();
        let sob = sobolev_constant(&graph, &cfg.rho, cfg.weights, cfg.sobolev_method, &opts)?;
        if let Some(v) = &sob.validation {
            if sob.certified {
                self.check(
                    Stage::Sobolev,
                    Check::le("random η ratio <= D*", v.max_ratio, sob.value),
                );
            }
        }
        self.report.stages.sobolev = Some(sob);
        Ok(())
    }

    fn delta_stage(&mut self) -> Result<()> {
        let cfg = self.config;
        let opts = DeltaOptions {
            triples: cfg.samples.delta_triples,
            subsample: cfg.samples.delta_subsample,
            seed: cfg.seed,
            ..DeltaOptions::default()
        };
        let delta = estimate_delta(self.space(), &opts)?;
        self.report.stages.delta = Some(delta);
        Ok(())
    }

    fn crosscheck_stage(&mut self) -> Result<()> {
        let cfg = self.config;
        let graph = self.graph()?.clone();
        match iso_sobolev_crosscheck(&graph, &cfg.rho, &cfg.search_options()) {
            Ok(c) => {
                for check in &c.checks {
                    self.check(Stage::Crosscheck, check.clone());
                }
                self.report.stages.crosscheck = Some(c);
            }
            Err(Error::RegionTooLarge { vertices, cap }) => self.skip(
                Stage::Crosscheck,
                format!("safe region has {vertices} vertices, above the exact-search cap of {cap}"),
            ),
            Err(e) => return Err(e),
        }
        Ok(())
    }
}
