//! Gromov four-point δ: zero on a free-group ball, growing with the radius
//! on square-lattice balls.

use coarsekit::metric::{estimate_delta, generate_space, DeltaOptions, SpaceSpec};

fn main() -> coarsekit::Result<()> {
    let opts = DeltaOptions {
        subsample: Some(39),
        seed: 1,
        ..DeltaOptions::default()
    };
    let mut specs = vec![SpaceSpec::FreeGroup { rank: 2, radius: 6 }];
    specs.extend([4, 8, 12, 16].map(|radius| SpaceSpec::Zn { dims: 2, radius }));
    for spec in specs {
        let space = generate_space(&spec)?;
        let est = estimate_delta(&space, &opts)?;
        println!(
            "{:<11} {:>5} points: δ >= {} ({} quadruples on {} points, exhaustive: {})",
            spec.kind(),
            space.len(),
            est.delta,
            est.quadruples,
            est.working_set,
            est.exhaustive
        );
    }
    Ok(())
}
