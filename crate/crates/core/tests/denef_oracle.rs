//! Denef's formula against a direct p-adic volume computation on projective
//! spaces whose coordinate hyperplanes carry multiplicities.

mod common;

use common::{denef_formula as formula, denef_oracle as oracle};
use heightcount::lattice::rational::Rational;
use num_bigint::BigInt;

#[test]
fn projective_line_one_rigid_point() {
    for p in [2u64, 3, 5] {
        for r in [1i64, 2] {
            let m = [Some(r), None];
            assert_eq!(oracle(1, p, 3, &m), formula(1, p, &m), "p={p} r={r}");
        }
    }
}

#[test]
fn projective_plane_one_rigid_line() {
    for p in [2u64, 3, 5] {
        for r in [1i64, 2] {
            let m = [None, Some(r), None];
            assert_eq!(oracle(2, p, 3, &m), formula(2, p, &m), "p={p} r={r}");
        }
    }
}

#[test]
fn several_rigid_components() {
    for p in [2u64, 3] {
        let m = [Some(1), Some(2), None];
        assert_eq!(oracle(2, p, 3, &m), formula(2, p, &m));
        let m = [Some(1), Some(1)];
        assert_eq!(oracle(1, p, 3, &m), formula(1, p, &m));
    }
    // (2/3)(1 + 1/4) for P^1 with both points rigid, p = 3
    assert_eq!(formula(1, 3, &[Some(1), Some(1)]), Rational::new(5.into(), 6.into()));
}

#[test]
fn no_rigid_components_is_point_count() {
    for p in [2u64, 3, 5] {
        let m = [None, None, None];
        let expected = Rational::new(BigInt::from(p * p + p + 1), BigInt::from(p * p));
        assert_eq!(oracle(2, p, 2, &m), expected);
        assert_eq!(formula(2, p, &m), expected);
    }
}
