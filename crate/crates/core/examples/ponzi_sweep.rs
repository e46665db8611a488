//! K*(R) sweeps on the line and on the 3-regular tree under ρ ≡ 1 and
//! ρ(t) = t + 1, followed by growth classification. The line needs an
//! unbounded constant under ρ ≡ 1; the tree does not.

use std::sync::Arc;

use coarsekit::control::{classify_growth, ControlFunction, DEFAULT_GROWTH_TOLERANCE};
use coarsekit::homology::{ponzi_sweep, write_sweep_csv, KSearch};
use coarsekit::metric::{generate_space, SpaceSpec};
use coarsekit::net::PointedNet;
use coarsekit::rips::RipsGraph;

fn main() -> coarsekit::Result<()> {
    let line = SpaceSpec::Zn { dims: 1, radius: 60 };
    let line_radii: Vec<f64> = (1..=11).map(|i| 5.0 * i as f64).collect();
    let tree = SpaceSpec::Tree { valency: 3, radius: 12 };
    let tree_radii = [5.0, 6.0, 7.0, 8.0, 9.0];

    for (spec, radii) in [(line, &line_radii[..]), (tree, &tree_radii[..])] {
        let space = Arc::new(generate_space(&spec)?);
        let graph = RipsGraph::build(&PointedNet::build(&space, 1.0)?);
        for rho in [ControlFunction::Constant, ControlFunction::affine(1.0)] {
            let rows = ponzi_sweep(&graph, &rho, radii, KSearch::default())?;
            println!("== {} with ρ = {rho}", spec.kind());
            write_sweep_csv(&rows, std::io::stdout()).map_err(|e| coarsekit::Error::io("<stdout>", e))?;
            let table: Vec<(f64, f64)> = rows.iter().map(|r| (r.radius, r.k_star)).collect();
            let fit = classify_growth(&table, DEFAULT_GROWTH_TOLERANCE)?;
            println!("growth: {}\n", fit.label);
        }
    }
    Ok(())
}
