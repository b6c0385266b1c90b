mod common;

use proptest::prelude::*;

use pfr::query::QueryHeader;
use pfr::wire::{decode_answer, decode_query, encode_answer, encode_query};
use pfr::{Answer, CoeffVector, Database, FieldElement, FieldSpec, Query, Request, Term};

const FIELDS: [(u32, u32); 6] = [(2, 1), (3, 1), (2, 2), (5, 1), (2, 8), (251, 1)];

fn query_strategy() -> impl Strategy<Value = Query> {
    (0..FIELDS.len(), 1usize..5, 1usize..64, 0usize..6).prop_flat_map(|(fi, files, layers, record_len)| {
        let (p, m) = FIELDS[fi];
        let q = p.pow(m) as u16;
        let term = (0..layers, prop::collection::vec(0..q, files))
            .prop_map(|(layer, v)| Term { layer, coeffs: CoeffVector::from_values(&v) });
        let request = prop::collection::vec(term, 0..5).prop_map(|terms| Request { terms });
        prop::collection::vec(request, 0..20)
            .prop_map(move |requests| Query { header: QueryHeader { p, m, files, layers, record_len }, requests })
    })
}

fn answer_strategy() -> impl Strategy<Value = (Answer, u32)> {
    (0..FIELDS.len(), 1usize..8).prop_flat_map(|(fi, s)| {
        let (p, m) = FIELDS[fi];
        let q = p.pow(m);
        prop::collection::vec(prop::collection::vec((0..q as u16).prop_map(FieldElement), s), 0..30)
            .prop_map(move |values| (Answer { values }, q))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn query_roundtrip_is_bit_exact(query in query_strategy()) {
        let frame = encode_query(&query).unwrap();
        let back = decode_query(&frame).unwrap();
        prop_assert_eq!(&back, &query);
        prop_assert_eq!(encode_query(&back).unwrap(), frame);
    }

    #[test]
    fn answer_roundtrip_is_bit_exact((answer, q) in answer_strategy()) {
        let frame = encode_answer(&answer).unwrap();
        let s = answer.values.first().map_or(0, Vec::len);
        let back = decode_answer(&frame, s, q).unwrap();
        prop_assert_eq!(&back, &answer);
        // S inferred from the payload
        let inferred = decode_answer(&frame, 0, q).unwrap();
        prop_assert_eq!(&inferred, &answer);
        prop_assert_eq!(encode_answer(&back).unwrap(), frame);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn oracle_is_linear(seed in any::<u64>(), fi in 0usize..4, u in prop::collection::vec(0u16..256, 3), w in prop::collection::vec(0u16..256, 3), c in 0u16..256) {
        let (p, m) = FIELDS[fi];
        let f = FieldSpec::new(p, m).unwrap();
        let q = f.order() as u16;
        let db = Database::generate(&f, 3, 5, 2, seed).unwrap();
        let u: Vec<FieldElement> = u.iter().map(|x| FieldElement(x % q)).collect();
        let w: Vec<FieldElement> = w.iter().map(|x| FieldElement(x % q)).collect();
        let c = FieldElement(c % q);
        let mut combo = f.scale(c, &u);
        f.axpy(&mut combo, FieldElement::ONE, &w);
        let lhs = db.oracle(&CoeffVector(combo.clone())).unwrap();
        let (ou, ow) = (db.oracle(&CoeffVector(u.clone())).unwrap(), db.oracle(&CoeffVector(w.clone())).unwrap());
        for t in 0..db.layers() {
            let mut rhs = f.scale(c, &ou.values[t]);
            f.axpy(&mut rhs, FieldElement::ONE, &ow.values[t]);
            prop_assert_eq!(&lhs.values[t], &rhs);
        }
        prop_assert_eq!(lhs, common::slow_oracle(&db, &CoeffVector(combo)));
    }

    #[test]
    fn database_roundtrip_is_bit_exact(seed in any::<u64>(), fi in 0usize..FIELDS.len(), k in 1usize..4, l in 1usize..10, s in 1usize..5) {
        let (p, m) = FIELDS[fi];
        let db = Database::generate(&FieldSpec::new(p, m).unwrap(), k, l, s, seed).unwrap();
        let bytes = db.to_bytes().unwrap();
        let back = Database::from_bytes(&bytes).unwrap();
        prop_assert_eq!(back.cells(), db.cells());
        prop_assert_eq!(back.to_bytes().unwrap(), bytes);
    }
}

#[test]
fn database_file_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("db.pfrd");
    let db = Database::generate(&FieldSpec::new(3, 2).unwrap(), 3, 12, 4, 99).unwrap();
    db.save(&path).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), db.to_bytes().unwrap());
    let back = Database::load(&path).unwrap();
    assert_eq!(back.cells(), db.cells());
    assert_eq!((back.files(), back.layers(), back.record_len()), (3, 12, 4));
}
