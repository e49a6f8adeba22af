use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::fan::Fan;
use crate::error::{Error, Result};

/// Torus orbit closure data for a set of boundary divisors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrataDescriptor {
    pub rays: BTreeSet<usize>,
    pub exists: bool,
    pub orbit_dimension: Option<usize>,
}

pub fn describe_stratum(fan: &Fan, j: &BTreeSet<usize>) -> StrataDescriptor {
    let rays: Vec<usize> = j.iter().copied().collect();
    let exists = fan.is_cone(&rays);
    StrataDescriptor {
        rays: j.clone(),
        exists,
        orbit_dimension: exists.then(|| fan.dim() - j.len()),
    }
}

fn torus_count(q: u64, dim: usize) -> BigInt {
    num_traits::pow(BigInt::from(q) - 1, dim)
}

/// Number of F_q-points on the open stratum where exactly the divisors in J
/// meet. For J empty this is the open torus.
pub fn strata_count(fan: &Fan, j: &[usize], q: u64) -> Result<BigInt> {
    if let Some(&bad) = j.iter().find(|&&r| r >= fan.rays().len()) {
        return Err(Error::InvalidFan(format!("ray index {bad} out of range")));
    }
    if q < 2 {
        return Err(Error::InvalidParameters(format!("field size {q} < 2")));
    }
    let mut set: Vec<usize> = j.to_vec();
    set.sort_unstable();
    set.dedup();
    if fan.is_cone(&set) {
        Ok(torus_count(q, fan.dim() - set.len()))
    } else {
        Ok(BigInt::from(0))
    }
}

/// |X(F_q)| via the orbit decomposition.
pub fn count_points_mod_q(fan: &Fan, q: u64) -> BigInt {
    fan.all_cones()
        .iter()
        .map(|c| torus_count(q, fan.dim() - c.len()))
        .sum()
}

/// Counts of the strata D_J° relative to a set of distinguished boundary
/// divisors (the rigid components). Keys are index sets into `rigid_rays`.
/// A point lies in D_J° when, among the distinguished divisors, exactly those
/// in J pass through it.
pub fn strata_counts_relative(fan: &Fan, rigid_rays: &[usize], q: u64) -> BTreeMap<BTreeSet<usize>, BigInt> {
    let mut out: BTreeMap<BTreeSet<usize>, BigInt> = BTreeMap::new();
    out.insert(BTreeSet::new(), BigInt::from(0));
    for (k, _) in rigid_rays.iter().enumerate() {
        out.entry(BTreeSet::from([k])).or_insert_with(|| BigInt::from(0));
    }
    for cone in fan.all_cones() {
        let j: BTreeSet<usize> = rigid_rays
            .iter()
            .enumerate()
            .filter(|(_, r)| cone.contains(r))
            .map(|(k, _)| k)
            .collect();
        *out.entry(j).or_insert_with(|| BigInt::from(0)) += torus_count(q, fan.dim() - cone.len());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toric::resolve::resolve_fan_2d;

    #[test]
    fn surface_strata() {
        let f = Fan::projective_space(2).unwrap();
        assert_eq!(strata_count(&f, &[], 7).unwrap(), BigInt::from(36));
        assert_eq!(strata_count(&f, &[1], 7).unwrap(), BigInt::from(6));
        assert_eq!(strata_count(&f, &[0, 2], 7).unwrap(), BigInt::from(1));
        let fm = Fan::hirzebruch(2).unwrap();
        // rays 0 and 2 are opposite fibres
        assert_eq!(strata_count(&fm, &[0, 2], 5).unwrap(), BigInt::from(0));
        assert!(strata_count(&fm, &[9], 5).is_err());
    }

    #[test]
    fn point_counts() {
        for q in [2u64, 3, 4, 5, 7, 9, 11] {
            let qb = BigInt::from(q);
            assert_eq!(count_points_mod_q(&Fan::projective_space(1).unwrap(), q), &qb + 1);
            assert_eq!(
                count_points_mod_q(&Fan::projective_space(2).unwrap(), q),
                &qb * &qb + &qb + 1
            );
            let cubic = resolve_fan_2d(&Fan::cubic_xyz_u3().unwrap()).unwrap();
            assert_eq!(count_points_mod_q(&cubic, q), &qb * &qb + 7 * &qb + 1);
        }
    }

    #[test]
    fn relative_strata_sum_to_total() {
        let f = Fan::projective_space(2).unwrap();
        let rel = strata_counts_relative(&f, &[2], 5);
        assert_eq!(rel[&BTreeSet::new()], BigInt::from(25));
        assert_eq!(rel[&BTreeSet::from([0])], BigInt::from(6));
        let total: BigInt = rel.values().sum();
        assert_eq!(total, count_points_mod_q(&f, 5));
    }

    #[test]
    fn descriptor() {
        let f = Fan::projective_space(2).unwrap();
        let d = describe_stratum(&f, &BTreeSet::from([0, 1]));
        assert!(d.exists);
        assert_eq!(d.orbit_dimension, Some(0));
    }
}
