//! Build ε-nets of a lattice ball at several scales, verify them and
//! compare net ball counts with the doubling-profile bound.

use std::sync::Arc;

use coarsekit::metric::{doubling_profile, generate_space, SpaceSpec};
use coarsekit::net::{count_bound_radii, net_ball_count_bound, PointedNet};

fn main() -> coarsekit::Result<()> {
    let space = Arc::new(generate_space(&SpaceSpec::Zn { dims: 2, radius: 15 })?);
    for eps in [1.0, 2.0, 3.0] {
        let net = PointedNet::build(&space, eps)?;
        let check = net.verify();
        println!(
            "ε = {eps}: {} of {} points, basepoint kept: {}, checks passed: {}",
            net.len(),
            space.len(),
            net.contains(space.basepoint()),
            check.passed()
        );
        let r = 4.0 * eps;
        let radii = count_bound_radii(r, eps);
        let profile = doubling_profile(&space, &radii, 64, 3)?;
        for row in net_ball_count_bound(&net, &profile, &[r]) {
            println!("  {row:?}");
        }
    }
    Ok(())
}
