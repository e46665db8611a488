//! Generate each built-in space and print its size, diameter and a few
//! axiom and norm statistics.

use coarsekit::metric::{generate_space, SpaceSpec};

fn main() -> coarsekit::Result<()> {
    let specs = [
        SpaceSpec::Zn { dims: 2, radius: 10 },
        SpaceSpec::FreeGroup { rank: 2, radius: 5 },
        SpaceSpec::Tree { valency: 3, radius: 6 },
        SpaceSpec::HeisenbergZ { radius: 5 },
        SpaceSpec::HeisenbergRCloud {
            count: 300,
            half_width: 3.0,
            seed: 1,
        },
        SpaceSpec::HyperbolicDisk {
            count: 300,
            max_radius: 4.0,
            seed: 1,
        },
        SpaceSpec::Fan {
            arms: 4,
            points_per_arm: 20,
        },
        SpaceSpec::Ladder {
            rungs: 4,
            subdivisions: 2,
        },
    ];
    println!(
        "{:<18} {:>6} {:>9} {:>10}  axioms",
        "kind", "points", "diameter", "truncation"
    );
    for spec in &specs {
        let space = generate_space(spec)?;
        let axioms = match space.check_axioms(2000, 7) {
            Ok(()) => "ok".to_string(),
            Err(v) => format!("{v:?}"),
        };
        println!(
            "{:<18} {:>6} {:>9.3} {:>10.3}  {axioms}",
            spec.kind(),
            space.len(),
            space.diameter(),
            space.truncation_radius()
        );
    }
    Ok(())
}
