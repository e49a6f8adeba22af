use heightcount::heights::*;
use heightcount::lattice::rational::Rational;
use heightcount::toric::{anticanonical_pl, Fan};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};
use proptest::prelude::*;

fn nonzero_rational() -> impl Strategy<Value = Rational> {
    (prop_oneof![-60i64..=-1, 1i64..=60], 1i64..=60).prop_map(|(n, d)| Rational::new(n.into(), d.into()))
}

/// (a : b : 1/(ab) : 1) cleared of denominators.
fn cubic_embedding(a: &Rational, b: &Rational) -> ProjectivePoint {
    let coords = [a.clone(), b.clone(), (a * b).recip(), Rational::one()];
    let l = coords.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints = coords
        .iter()
        .map(|c| (c * Rational::from_integer(l.clone())).to_integer())
        .collect();
    ProjectivePoint::new(ints).unwrap()
}

proptest! {
    #[test]
    fn cubic_toric_height_is_embedding_height(a in nonzero_rational(), b in nonzero_rational()) {
        let phi = anticanonical_pl(&Fan::cubic_xyz_u3().unwrap()).unwrap();
        let t = TorusPoint::new(vec![a.clone(), b.clone()]).unwrap();
        let h = toric_height(&t, &phi).unwrap();
        prop_assert_eq!(&h, &standard_height(&cubic_embedding(&a, &b)));
        prop_assert!(h >= Rational::one());
        let swapped = TorusPoint::new(vec![b, a]).unwrap();
        prop_assert_eq!(toric_height(&swapped, &phi).unwrap(), h);
    }

    #[test]
    fn projective_height_ignores_scaling(c in prop::collection::vec(-500i64..500, 3), k in prop_oneof![-9i64..=-1, 1i64..=9]) {
        prop_assume!(c.iter().any(|&x| x != 0));
        let p = ProjectivePoint::from_i64(&c).unwrap();
        let scaled: Vec<i64> = c.iter().map(|x| x * k).collect();
        let q = ProjectivePoint::from_i64(&scaled).unwrap();
        prop_assert_eq!(&p, &q);
        prop_assert_eq!(standard_height(&p), standard_height(&q));
    }

    #[test]
    fn weighted_height_ignores_representative(x0 in 1i64..40, x1 in -40i64..40, x2 in -400i64..400, lam in prop_oneof![-6i64..=-1, 1i64..=6]) {
        prop_assume!(x1 != 0 && x2 != 0);
        let w = [1u32, 1, 3];
        let hm = HeightModel::weighted_anticanonical(&w).unwrap();
        let p = WeightedPoint::from_i64(&w, &[x0, x1, x2]).unwrap();
        let q = WeightedPoint::from_i64(&w, &[lam * x0, lam * x1, lam.pow(3) * x2]).unwrap();
        prop_assert_eq!(&p, &q);
        let h = weighted_height(&p, &hm).unwrap();
        prop_assert!(h.raw >= Rational::one());
        // the same point through the toric model of P(1,1,3)
        let fan = Fan::weighted_11m(3).unwrap();
        let phi = anticanonical_pl(&fan).unwrap();
        let t = p.torus_coordinates(fan.rays()).unwrap();
        prop_assert_eq!(toric_height_scaled(&t, &phi).unwrap(), h);
    }
}

#[test]
fn weighted_and_toric_agree_on_random_points() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let fan = Fan::weighted_11m(3).unwrap();
    let phi = anticanonical_pl(&fan).unwrap();
    let hm = HeightModel::weighted_anticanonical(&[1, 1, 3]).unwrap();
    let mut checked = 0;
    while checked < 100 {
        let c: Vec<i64> = (0..3).map(|_| rng.gen_range(-200i64..=200)).collect();
        if c.contains(&0) {
            continue;
        }
        let p = WeightedPoint::from_i64(&[1, 1, 3], &c).unwrap();
        let t = p.torus_coordinates(fan.rays()).unwrap();
        assert_eq!(
            toric_height_scaled(&t, &phi).unwrap(),
            weighted_height(&p, &hm).unwrap()
        );
        checked += 1;
    }
    // (1:2:1): the value itself, by direct evaluation of x0^15, x1^15, x2^5
    let p = WeightedPoint::from_i64(&[1, 1, 3], &[1, 2, 1]).unwrap();
    let h = weighted_height(&p, &hm).unwrap();
    assert_eq!(h.raw, Rational::from_integer(BigInt::from(2).pow(15)));
    assert!(h.raw.is_positive());
}
