//! Run every stage of the pipeline from a configuration, print the checks
//! and write report.json and sweep.csv to a temporary directory.

use coarsekit::config::{RunConfig, SweepRange};
use coarsekit::metric::SpaceSpec;
use coarsekit::pipeline::{run_pipeline, write_outputs};

fn main() -> coarsekit::Result<()> {
    let mut config = RunConfig::new(SpaceSpec::HeisenbergZ { radius: 6 }, 1.0);
    config.seed = 7;
    config.sweep = Some(SweepRange {
        rmin: 1.0,
        rmax: 3.0,
        step: 1.0,
    });
    println!("configuration:\n{}", config.to_json());

    let report = run_pipeline(&config)?;
    for check in &report.checks {
        let c = &check.check;
        println!(
            "[{}] {:<45} {}",
            check.stage,
            c.name,
            if c.holds { "ok" } else { "FAILED" }
        );
    }
    for s in &report.skipped {
        println!("skipped {s:?}");
    }
    let dir = std::env::temp_dir().join("coarsekit-example-pipeline");
    std::fs::create_dir_all(&dir).map_err(|e| coarsekit::Error::io(&dir, e))?;
    for path in write_outputs(&report, &dir)? {
        println!("wrote {}", path.display());
    }
    println!("status {:?}, exit code {}", report.status, report.exit_code());
    Ok(())
}
