//! Scans φ along the line through the first zero and prints what it finds.
//!
//! `cargo run --release --example first_zero [steps]`

use zeta_audit::abel::QuadSpec;
use zeta_audit::scanner::{proposition_record, scan_phi_zeros};

fn main() -> zeta_audit::Result<()> {
    let steps = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1801);
    let tau = 14.1347251417;
    let report = scan_phi_zeros(tau, 0.05, 0.95, steps, &QuadSpec::default())?;
    for z in &report.zeros {
        println!(
            "x = {:.12}  |phi| = {:.2e}  err = {:.2e}  certified = {}  tangent = {}",
            z.x, z.residual, z.err_estimate, z.certified, z.tangent
        );
    }
    println!("oracle zeros of zeta on the line: {:?}", report.oracle_zero_xs);
    let record = proposition_record(&report);
    println!("prop1: {} certified zero(s), verdict {}", report.certified_count(), record.verdict);
    Ok(())
}
