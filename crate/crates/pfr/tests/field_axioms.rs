mod common;

use common::{small_fields, SlowField};
use pfr::{FieldElement as E, FieldSpec};

#[test]
fn tables_agree_with_polynomial_arithmetic() {
    for (p, m) in small_fields(16) {
        let f = FieldSpec::new(p, m).unwrap();
        let slow = SlowField::new(p, m);
        assert_eq!(f.reduction_poly(), slow.poly.as_slice(), "GF({p}^{m})");
        let q = f.order() as u16;
        for a in 0..q {
            assert_eq!(f.neg(E(a)).0, slow.neg(a));
            for b in 0..q {
                assert_eq!(f.add(E(a), E(b)).0, slow.add(a, b), "GF({p}^{m}) {a}+{b}");
                assert_eq!(f.mul(E(a), E(b)).0, slow.mul(a, b), "GF({p}^{m}) {a}*{b}");
            }
        }
    }
}

#[test]
fn gf256_matches_slow_multiplication() {
    let f = FieldSpec::new(2, 8).unwrap();
    let slow = SlowField::new(2, 8);
    for a in 0..256u16 {
        for b in 0..256u16 {
            assert_eq!(f.mul(E(a), E(b)).0, slow.mul(a, b));
        }
    }
}

#[test]
fn field_axioms_exhaustive_up_to_16() {
    for (p, m) in small_fields(16) {
        let f = FieldSpec::new(p, m).unwrap();
        let els: Vec<E> = f.elements().collect();
        assert_eq!(els.len() as u32, f.order());
        for &a in &els {
            assert_eq!(f.add(a, E::ZERO), a);
            assert_eq!(f.mul(a, E::ONE), a);
            assert_eq!(f.add(a, f.neg(a)), E::ZERO);
            assert_eq!(f.sub(a, a), E::ZERO);
            if a.is_zero() {
                assert!(f.inv(a).is_err());
            } else {
                let inv = f.inv(a).unwrap();
                assert_eq!(f.mul(a, inv), E::ONE);
                assert_eq!(f.pow(a, f.order() - 1), E::ONE);
            }
            for &b in &els {
                assert_eq!(f.add(a, b), f.add(b, a));
                assert_eq!(f.mul(a, b), f.mul(b, a));
                if !b.is_zero() {
                    assert_eq!(f.mul(f.div(a, b).unwrap(), b), a);
                }
                for &c in &els {
                    assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                    assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                    assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                }
            }
        }
    }
}

#[test]
fn multiplicative_group_is_cyclic() {
    for (p, m) in small_fields(64) {
        let f = FieldSpec::new(p, m).unwrap();
        let n = f.order() as usize - 1;
        let mut seen: Vec<u16> = (0..n).map(|i| f.exp(i).0).collect();
        seen.sort();
        assert_eq!(seen, (1..f.order() as u16).collect::<Vec<_>>(), "GF({p}^{m})");
    }
}

#[test]
fn rejects_bad_orders() {
    assert!(FieldSpec::new(1, 1).is_err());
    assert!(FieldSpec::new(4, 1).is_err());
    assert!(FieldSpec::new(2, 0).is_err());
    assert!(FieldSpec::new(2, 17).is_err());
    assert!(FieldSpec::new(257, 2).is_err());
    let f = FieldSpec::new(5, 1).unwrap();
    assert!(f.element(5).is_err());
    assert!(f.element(4).is_ok());
}
