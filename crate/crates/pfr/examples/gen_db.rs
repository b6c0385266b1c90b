//! Generate a database, write it as PFRD, read it back.
//!
//!     cargo run --example gen_db -- /tmp/example.pfrd

use pfr::{Database, FieldSpec};

fn main() -> pfr::Result<()> {
    let path =
        std::env::args().nth(1).unwrap_or_else(|| std::env::temp_dir().join("example.pfrd").display().to_string());
    let field = FieldSpec::new(3, 1)?;
    let db = Database::generate(&field, 2, 132, 4, 42)?;
    db.save(&path)?;

    let back = Database::load(&path)?;
    assert_eq!(back.cells(), db.cells());
    let bytes = std::fs::metadata(&path)?.len();
    println!(
        "wrote {path}: {} files x {} layers x {} symbols over {field}, {bytes} bytes",
        back.files(),
        back.layers(),
        back.record_len()
    );
    println!("W_1[1] = {:?}", back.segment(0, 0).iter().map(|e| e.0).collect::<Vec<_>>());
    Ok(())
}
