//! The invariants alpha, beta and gamma of a polarized split toric variety.

use num_bigint::BigInt;

use super::picard::PicardModel;
use crate::error::{Error, Result};
use crate::lattice::cone::{min_shift, x_function, RationalCone};
use crate::lattice::rational::{dot_int, Rational};

/// inf { t : t[L] + [K] effective }.
pub fn compute_alpha(pm: &PicardModel, l_class: &[Rational]) -> Result<Rational> {
    min_shift(&pm.effective_cone, l_class, &pm.canonical())
}

/// Rank of Pic modulo the classes of the l rigid components.
pub fn compute_beta(pm: &PicardModel, rigid_component_count: usize) -> Result<usize> {
    if rigid_component_count > pm.rank {
        return Err(Error::TooManyRigidComponents {
            l: rigid_component_count,
            rank: pm.rank,
        });
    }
    Ok(pm.rank - rigid_component_count)
}

/// X-function of the effective cone at the anticanonical class, in the full
/// Picard lattice (no rigid components).
pub fn compute_gamma(pm: &PicardModel) -> Result<Rational> {
    x_function(&pm.effective_cone, &pm.anticanonical())
}

/// Quotient version: `projection` is an integer matrix (one row per quotient
/// coordinate) mapping Pic onto Pic(V, L) = Pic / <rigid components>. The
/// caller vouches that its rows form a basis of the dual of the quotient lattice.
pub fn compute_gamma_quotient(pm: &PicardModel, projection: &[Vec<BigInt>]) -> Result<Rational> {
    let dim = projection.len();
    for row in projection {
        if row.len() != pm.rank {
            return Err(Error::DimensionMismatch {
                expected: pm.rank,
                found: row.len(),
            });
        }
    }
    let project = |v: &[BigInt]| -> Vec<BigInt> { projection.iter().map(|row| dot_int(row, v)).collect() };
    let gens = pm.divisor_classes.iter().map(|c| project(c)).collect();
    let cone = RationalCone::from_generators(dim, gens)?;
    let minus_k: Vec<BigInt> = pm.canonical_class.iter().map(|x| -x).collect();
    let s: Vec<Rational> = project(&minus_k).into_iter().map(Rational::from_integer).collect();
    x_function(&cone, &s)
}
