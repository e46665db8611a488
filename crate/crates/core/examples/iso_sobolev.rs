//! Weighted isoperimetric and Sobolev constants on a lattice ball: exact,
//! parametric and greedy methods, and the crosscheck between them.

use std::sync::Arc;

use coarsekit::control::ControlFunction;
use coarsekit::inequalities::{
    iso_constant, iso_sobolev_crosscheck, sobolev_constant, Method, SearchOptions, WeightMode,
};
use coarsekit::metric::{generate_space, SpaceSpec};
use coarsekit::net::PointedNet;
use coarsekit::rips::RipsGraph;

fn main() -> coarsekit::Result<()> {
    let space = Arc::new(generate_space(&SpaceSpec::Zn { dims: 2, radius: 5 })?);
    let graph = RipsGraph::build(&PointedNet::build(&space, 1.0)?);
    let opts = SearchOptions {
        margin: Some(3.0),
        ..SearchOptions::default()
    };
    for rho in [ControlFunction::Constant, ControlFunction::affine(1.0)] {
        let iso = iso_constant(&graph, &rho, Method::Auto, &opts)?;
        println!(
            "ρ = {rho}: C* = {:.4} over {} safe vertices ({:?}, |F*| = {})",
            iso.value,
            iso.safe_vertices,
            iso.method,
            iso.best_set.len()
        );
        for method in [Method::Exact, Method::Parametric, Method::Greedy] {
            let d = sobolev_constant(&graph, &rho, WeightMode::Counting, method, &opts)?;
            println!("  D* = {:.6} by {:?} (certified: {})", d.value, d.method, d.certified);
        }
        let cross = iso_sobolev_crosscheck(&graph, &rho, &opts)?;
        println!("  crosscheck holds: {}", cross.holds);
    }
    Ok(())
}
