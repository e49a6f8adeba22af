use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::fan::Fan;
use super::pl::PLFunction;
use crate::error::Result;
use crate::lattice::cone::RationalCone;
use crate::lattice::linalg::{inverse, to_rat};
use crate::lattice::rational::{LatticeVector, Rational};

/// Picard lattice of a smooth complete toric variety in the basis of boundary
/// divisors off a chosen maximal cone.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PicardModel {
    pub rank: usize,
    /// Class of D_rho for every ray, in Picard coordinates.
    pub divisor_classes: Vec<LatticeVector>,
    pub canonical_class: LatticeVector,
    pub effective_cone: RationalCone,
    /// Rays whose divisors form the Picard basis.
    pub basis_rays: Vec<usize>,
}

/// Computes Pic as the cokernel of M -> Z^rays, m -> (<m, e_rho>).
///
/// With sigma_0 the first maximal cone (a lattice basis since the fan is
/// smooth), the divisors off sigma_0 form a Z-basis and for each ray e_i of
/// sigma_0 with dual vector u_i one has D_i = -sum_{rho not in sigma_0} <u_i, e_rho> D_rho.
pub fn build_picard(fan: &Fan) -> Result<PicardModel> {
    fan.require_smooth()?;
    fan.check_complete()?;
    let n = fan.dim();
    let sigma0 = fan.max_cones()[0].clone();
    let basis_rays: Vec<usize> = (0..fan.rays().len()).filter(|r| !sigma0.contains(r)).collect();
    let rank = basis_rays.len();

    // Columns of B are the rays of sigma_0; rows of B^{-1} are the dual basis.
    let b: Vec<Vec<BigInt>> = (0..n)
        .map(|row| sigma0.iter().map(|&r| fan.rays()[r][row].clone()).collect())
        .collect();
    let dual = inverse(&to_rat(&b)).expect("smooth cone is invertible");

    let mut classes = vec![vec![BigInt::zero(); rank]; fan.rays().len()];
    for (k, &r) in basis_rays.iter().enumerate() {
        classes[r][k] = BigInt::from(1);
    }
    for (i, &ri) in sigma0.iter().enumerate() {
        for (k, &r) in basis_rays.iter().enumerate() {
            let pairing: Rational = dual[i]
                .iter()
                .zip(&fan.rays()[r])
                .map(|(u, e)| u * Rational::from_integer(e.clone()))
                .sum();
            classes[ri][k] = -pairing.to_integer();
        }
    }

    let canonical_class: LatticeVector = (0..rank)
        .map(|k| -classes.iter().map(|c| &c[k]).sum::<BigInt>())
        .collect();
    let effective_cone = RationalCone::from_generators(rank, classes.clone())?;
    Ok(PicardModel {
        rank,
        divisor_classes: classes,
        canonical_class,
        effective_cone,
        basis_rays,
    })
}

impl PicardModel {
    /// Class of sum_rho v_rho D_rho.
    pub fn class_of_values(&self, values: &[Rational]) -> Vec<Rational> {
        (0..self.rank)
            .map(|k| {
                self.divisor_classes
                    .iter()
                    .zip(values)
                    .map(|(c, v)| v * Rational::from_integer(c[k].clone()))
                    .sum()
            })
            .collect()
    }

    pub fn class_of_pl(&self, phi: &PLFunction) -> Vec<Rational> {
        self.class_of_values(phi.ray_values())
    }

    pub fn anticanonical(&self) -> Vec<Rational> {
        self.canonical_class
            .iter()
            .map(|x| Rational::from_integer(-x))
            .collect()
    }

    pub fn canonical(&self) -> Vec<Rational> {
        self.canonical_class
            .iter()
            .cloned()
            .map(Rational::from_integer)
            .collect()
    }
}
