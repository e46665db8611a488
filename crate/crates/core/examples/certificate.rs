//! Solve for a minimal controlled Ponzi certificate on the even sublattice
//! of a line segment, write it as JSON, verify it, and extend it by tails
//! to the full segment.

use std::sync::Arc;

use coarsekit::control::ControlFunction;
use coarsekit::homology::{extend_tails, min_control_constant, ponzi_feasible, verify_certificate, KSearch, Region};
use coarsekit::metric::{generate_space, SpaceSpec};
use coarsekit::rips::RipsGraph;

fn main() -> coarsekit::Result<()> {
    let space = Arc::new(generate_space(&SpaceSpec::Zn { dims: 1, radius: 40 })?);
    let evens: Vec<usize> = (0..space.len())
        .filter(|&p| space.coords(p).is_some_and(|c| c[0] as i64 % 2 == 0))
        .collect();
    let sublattice = RipsGraph::on_points(&space, evens, 1.0)?;
    let full = RipsGraph::on_points(&space, (0..space.len()).collect(), 1.0)?;
    let rho = ControlFunction::affine(1.0);

    let region = Region::ball(&sublattice, 30.0)?;
    let k_star = min_control_constant(&sublattice, &region, &rho, KSearch::default())?;
    println!("K* = {:.4} after {} flow solves", k_star.k, k_star.solves);

    let outcome = ponzi_feasible(&sublattice, &region, &rho, k_star.k)?;
    let cert = outcome.certificate.expect("feasible at K*");
    let dir = tempfile_dir()?;
    let path = dir.join("certificate.json");
    coarsekit::io::write_json(&path, &cert)?;
    println!(
        "certificate with {} region vertices written to {}",
        cert.region.len(),
        path.display()
    );

    let report = verify_certificate(&cert, &sublattice);
    println!(
        "verified on the sublattice: {} (K(t) = {:.4})",
        report.passed, report.control_norm
    );

    let ext = extend_tails(&cert, &sublattice, &full, 1.0)?;
    let report = verify_certificate(&ext.certificate, &full);
    println!(
        "extended: {} new tails, K' = {:.4}, stated bound {:.4}, derived bound {:.4}, verified: {}",
        ext.added.len(),
        ext.k_prime,
        ext.stated_bound,
        ext.derived_bound,
        report.passed
    );
    Ok(())
}

fn tempfile_dir() -> coarsekit::Result<std::path::PathBuf> {
    let dir = std::env::temp_dir().join("coarsekit-example-certificate");
    std::fs::create_dir_all(&dir).map_err(|e| coarsekit::Error::io(&dir, e))?;
    Ok(dir)
}
