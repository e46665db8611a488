//! Partition of unity subordinate to the Rips cover: sums, supports,
//! Lipschitz constant, and the extension of a function on the net.

use std::sync::Arc;

use coarsekit::metric::{generate_space, SpaceSpec};
use coarsekit::net::PointedNet;
use coarsekit::partition::{sample_near_pairs, verify_partition_lipschitz, verify_partition_sums, PartitionOfUnity};

fn main() -> coarsekit::Result<()> {
    let space = Arc::new(generate_space(&SpaceSpec::HeisenbergZ { radius: 5 })?);
    let net = PointedNet::build(&space, 2.0)?;
    let pu = PartitionOfUnity::new(&net);

    let x = space.len() / 2;
    let phi = pu.phi_all(x)?;
    println!(
        "φ at point {x}: {} nonzero terms summing to {}",
        phi.len(),
        phi.iter().map(|t| t.1).sum::<f64>()
    );

    let sums = verify_partition_sums(&pu, 500, 1)?;
    println!(
        "max |Σφ - 1| = {:.2e}, Σψ in [{}, {}], holds: {}",
        sums.max_sum_error, sums.min_psi_sum, sums.max_psi_sum, sums.holds
    );

    let pairs = sample_near_pairs(&net, 500, 2.0, 1);
    let lip = verify_partition_lipschitz(&pu, &pairs)?;
    println!("Lipschitz {:.4} <= {:.4}: {}", lip.empirical, lip.bound, lip.holds);

    // extend the norm function from the net to the whole space
    let v: Vec<f64> = net.members().iter().map(|&p| space.norm(p)).collect();
    println!("|x| = {}, extended value {:.4}", space.norm(x), pu.extend(&v, x)?);
    Ok(())
}
