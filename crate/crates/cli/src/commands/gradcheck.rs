//! The `gradcheck` subcommand: finite-difference verification of every
//! backward pass, failing the process if any layer disagrees.

use anyhow::{bail, Result};
use ferfuse::gradcheck::run_full_suite;

pub fn gradcheck(points: usize, end_to_end_coords: usize) -> Result<()> {
    let reports = run_full_suite(points, end_to_end_coords)?;
    let mut failures = 0;
    for report in &reports {
        let verdict = if report.passed() { "ok" } else { "FAIL" };
        println!(
            "{:<24} points {:>4}  max_rel_err {:.3e}  tol {:.0e}  {verdict}",
            report.layer, report.points, report.max_rel_error, report.tolerance
        );
        failures += usize::from(!report.passed());
    }
    if failures > 0 {
        bail!("{failures} of {} gradient checks failed", reports.len());
    }
    println!("all {} gradient checks passed", reports.len());
    Ok(())
}
