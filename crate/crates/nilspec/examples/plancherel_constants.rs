//! The Plancherel-type constant c0 on Heisenberg groups: series evaluation
//! under both prefactor conventions, their exact (2 pi)^{2n} ratio, and the
//! cross-route report comparing every constant against an independent
//! derivation.
//!
//! Run with: cargo run -p nilspec --example plancherel_constants

use nilspec::constants::{self, PrefactorMode};

fn main() -> nilspec::Result<()> {
    println!("Euclidean reference values c0 = p_1(0) / Gamma(n/2):");
    for n in 1..=3 {
        println!("  n = {n}: c0 = {:.12}", constants::c0_euclidean(n)?);
    }

    let terms = 200_000;
    let paper = constants::c0_heisenberg(1, terms, PrefactorMode::Paper)?;
    let consistent = constants::c0_heisenberg(1, terms, PrefactorMode::Consistent)?;
    println!("\nheisenberg n = 1, series with {terms} terms:");
    println!("  paper prefactor       c0 = {:.12} +- {:.1e}", paper.value, paper.tail_bound);
    println!("  consistent prefactor  c0 = {:.12} +- {:.1e}", consistent.value, consistent.tail_bound);
    println!(
        "  ratio = {:.12}  (expected (2 pi)^2 = {:.12})",
        consistent.value / paper.value,
        constants::heisenberg_prefactor_ratio(1)
    );

    // Every constant the crate exposes, recomputed along at least two
    // independent routes; `agree` certifies the pairwise deviations.
    println!("\ncross-route report:");
    for report in constants::constant_reports(50_000)? {
        println!("  {} (tolerance {:.0e}, agree: {})", report.name, report.tolerance, report.agree);
        for route in &report.routes {
            println!(
                "    {:26} {:20.12}  +- {:.2e}",
                route.label, route.value, route.error_estimate
            );
        }
    }
    Ok(())
}
