//! Coefficient vectors, the functions they name, and (N-1)-tuples.

use pfr::projspace::parallel_class;
use pfr::{FieldSpec, ThetaIndex, TupleSpace, VectorSpace};

fn main() -> pfr::Result<()> {
    let f = FieldSpec::new(3, 1)?;
    let space = VectorSpace::new(f.order(), 2)?;
    println!("GF(3)^2 has {} nonzero vectors and {} functions", space.nonzero_count(), space.canonical_count());

    for theta in 1..=space.canonical_count() as usize {
        let v = space.canonical(ThetaIndex(theta))?;
        let class: Vec<String> = parallel_class(&f, &v)?.iter().map(ToString::to_string).collect();
        println!("  theta {theta}: {v}  class {{{}}}", class.join(", "));
    }

    let tuples = TupleSpace::new(space, 3)?;
    println!("\npairs for 3 servers: {}", tuples.len());
    for m in [0, 1, 8, 63] {
        let t: Vec<String> = tuples.tuple_at(m)?.0.iter().map(ToString::to_string).collect();
        println!("  m = {m:>2}: ({})", t.join(", "));
    }
    Ok(())
}
