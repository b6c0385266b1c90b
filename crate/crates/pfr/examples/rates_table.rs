//! Exact rates next to capacity and the virtual-file PIR baseline, as CSV.

use pfr::rates::{rows_to_csv, RateReport};
use pfr::SchemeParams;

fn main() -> pfr::Result<()> {
    let mut rows = Vec::new();
    for k in 1..=6 {
        rows.push(RateReport::for_params(&SchemeParams::binary(k)?)?.row(6));
    }
    for (n, p) in [(3, 3), (4, 5)] {
        for k in 1..=4 {
            rows.push(RateReport::for_params(&SchemeParams::general(n, k, p, 1)?)?.row(6));
        }
    }
    print!("{}", rows_to_csv(&rows)?);
    Ok(())
}
