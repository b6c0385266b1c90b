//! Structural and statistical audits of what each server sees.

use pfr::audit::{audit_statistical, audit_theta_invariance};
use pfr::{SchemeParams, ThetaIndex};

fn main() -> pfr::Result<()> {
    for params in [SchemeParams::binary(3)?, SchemeParams::general(2, 2, 3, 1)?, SchemeParams::general(3, 2, 3, 1)?] {
        let report = audit_theta_invariance(&params, 1)?;
        print!("{}", report.to_text().lines().take(6).collect::<Vec<_>>().join("\n"));
        println!("\n");
    }

    let stats = audit_statistical(&SchemeParams::binary(2)?, ThetaIndex(1), 2000, 5)?;
    print!("{}", stats.to_text());
    Ok(())
}
