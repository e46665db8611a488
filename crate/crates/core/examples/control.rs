//! Control functions: the closed-form or numeric constants L and M, the
//! grid verification, and growth classification of a K*(R) table.

use coarsekit::control::{classify_growth, ControlFunction, DEFAULT_GROWTH_TOLERANCE};

fn main() -> coarsekit::Result<()> {
    let eps = 1.0;
    let rhos = [
        ControlFunction::Constant,
        ControlFunction::affine(1.0),
        ControlFunction::Power { c: 0.5, p: 1.5 },
        ControlFunction::Log { c: 1.0 },
        ControlFunction::Table {
            knots: vec![(0.0, 1.0), (10.0, 3.0), (20.0, 4.0)],
        },
    ];
    for rho in &rhos {
        let k = rho.constants(eps)?;
        println!(
            "{:<22} ρ(10) = {:>8.4}  L = {:.4} ({})  M = {:.4} ({})  grid ok: {}",
            rho.to_string(),
            rho.at(10.0),
            k.l,
            if k.l_closed_form { "closed form" } else { "numeric" },
            k.m,
            if k.m_closed_form { "closed form" } else { "numeric" },
            k.check.l_violation.is_none() && k.check.m_violation.is_none()
        );
    }

    let linear: Vec<(f64, f64)> = (1..=8).map(|i| (5.0 * i as f64, 0.8 * i as f64 + 0.1)).collect();
    let flat: Vec<(f64, f64)> = (1..=8).map(|i| (5.0 * i as f64, 0.25)).collect();
    for (name, table) in [("linear table", linear), ("flat table", flat)] {
        let fit = classify_growth(&table, DEFAULT_GROWTH_TOLERANCE)?;
        println!("{name}: {} (model {:?}, R² {:.4})", fit.label, fit.model, fit.r_squared);
    }
    Ok(())
}
