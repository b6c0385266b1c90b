//! Arithmetic in GF(p^m): reduction polynomials, exp/log tables, inverses.

use pfr::{FieldElement as E, FieldSpec};

fn main() -> pfr::Result<()> {
    for (p, m) in [(2, 1), (2, 2), (3, 2), (2, 8)] {
        let f = FieldSpec::new(p, m)?;
        println!("{f}: reduction polynomial (low to high) {:?}", f.reduction_poly());
    }

    let f = FieldSpec::new(2, 2)?;
    println!("\nGF(4) multiplication table");
    for a in f.elements() {
        let row: Vec<String> = f.elements().map(|b| f.mul(a, b).0.to_string()).collect();
        println!("  {}", row.join(" "));
    }

    let f = FieldSpec::new(2, 8)?;
    let a = E(0x57);
    let b = E(0x83);
    println!("\nGF(256): 0x57 * 0x83 = {:#04x}", f.mul(a, b).0);
    println!("GF(256): inverse of 0x53 = {:#04x}", f.inv(E(0x53))?.0);

    let f = FieldSpec::new(7, 1)?;
    let v = [E(1), E(2), E(3)];
    let w = [E(4), E(5), E(6)];
    println!("\nGF(7): (1,2,3).(4,5,6) = {}", f.dot(&v, &w)?.0);
    Ok(())
}
