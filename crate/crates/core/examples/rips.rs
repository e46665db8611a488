//! Rips graph of a hyperbolic-disk sample: connectivity, valency against
//! the doubling bound, and the quasi-isometry inequalities with a measured
//! quasiconvexity constant.

use std::sync::Arc;

use coarsekit::metric::{doubling_profile, generate_space, quasiconvexity_ratio, PairSample, SpaceSpec};
use coarsekit::net::PointedNet;
use coarsekit::rips::{valency_bound_check, verify_qi_bounds, RipsGraph};

fn main() -> coarsekit::Result<()> {
    let spec = SpaceSpec::HyperbolicDisk {
        count: 400,
        max_radius: 4.0,
        seed: 3,
    };
    let space = Arc::new(generate_space(&spec)?);
    let eps = 1.0;
    let graph = RipsGraph::build(&PointedNet::build(&space, eps)?);
    let conn = graph.connectivity();
    println!(
        "{} vertices, {} edges, connected: {}",
        graph.len(),
        graph.edge_count(),
        conn.connected
    );

    let profile = doubling_profile(&space, &[eps, 2.0 * eps, 4.0 * eps], space.len(), 1)?;
    let valency = valency_bound_check(&graph, &profile)?;
    println!(
        "max valency {} <= {} : {}",
        valency.max_valency, valency.bound, valency.holds
    );

    let pairs = PairSample::Random { count: 5000, seed: 9 };
    let q = quasiconvexity_ratio(&graph, &pairs)?;
    let qi = verify_qi_bounds(&graph, q.ratio, &pairs)?;
    println!(
        "measured Q = {:.4}; quasi-isometry bounds hold on {} pairs: {}",
        q.ratio, qi.pairs, qi.holds
    );
    Ok(())
}
