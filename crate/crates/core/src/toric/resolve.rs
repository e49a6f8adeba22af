//! Minimal resolution of two-dimensional fans.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::fan::Fan;
use crate::error::{Error, Result};
use crate::lattice::rational::{primitive_int, LatticeVector};

fn det2(a: &[BigInt], b: &[BigInt]) -> BigInt {
    &a[0] * &b[1] - &a[1] * &b[0]
}

/// Lattice points on the compact boundary of conv(sigma ∩ N \ {0}) for the
/// cone spanned by v1, v2, listed from v1 to v2 (endpoints included).
///
/// Every such point is v1, v2 or a point of the half-open fundamental
/// parallelogram, so the candidates are enumerated there and the chain
/// nearest the origin is extracted.
pub fn boundary_chain(v1: &[BigInt], v2: &[BigInt]) -> Vec<LatticeVector> {
    let swapped = !det2(v1, v2).is_positive();
    let (a, b) = if swapped { (v2, v1) } else { (v1, v2) };
    let d = det2(a, b);
    let mut candidates: Vec<LatticeVector> = vec![a.to_vec(), b.to_vec()];
    // p = (s*a + t*b)/d with integers 0 <= s, t < d; p integral iff both coordinates divide.
    let mut s = BigInt::zero();
    while s < d {
        let mut t = BigInt::zero();
        while t < d {
            if !(s.is_zero() && t.is_zero()) {
                let x = &s * &a[0] + &t * &b[0];
                let y = &s * &a[1] + &t * &b[1];
                if x.is_multiple_of(&d) && y.is_multiple_of(&d) {
                    let p = vec![x / &d, y / &d];
                    candidates.push(p);
                }
            }
            t += 1;
        }
        s += 1;
    }
    // Keep the shortest point on each ray.
    candidates.sort_by(|p, q| {
        // angular order from a: det(a, p) / det(p, b) increasing, compared by cross-multiplication
        let lhs = det2(a, p) * det2(q, b);
        let rhs = det2(a, q) * det2(p, b);
        lhs.cmp(&rhs)
            .then_with(|| (p[0].abs() + p[1].abs()).cmp(&(q[0].abs() + q[1].abs())))
    });
    candidates.dedup_by(|q, p| primitive_int(p) == primitive_int(q));

    let mut chain: Vec<LatticeVector> = Vec::new();
    for p in candidates {
        while chain.len() >= 2 {
            let x = &chain[chain.len() - 2];
            let y = &chain[chain.len() - 1];
            // y is dropped when it lies strictly beyond segment x-p as seen from 0
            let cx: Vec<BigInt> = vec![&p[0] - &x[0], &p[1] - &x[1]];
            let yx: Vec<BigInt> = vec![&y[0] - &x[0], &y[1] - &x[1]];
            let origin: Vec<BigInt> = vec![-&x[0], -&x[1]];
            let side_y = det2(&cx, &yx);
            let side_o = det2(&cx, &origin);
            if side_y.signum() * side_o.signum() == BigInt::from(-1) {
                chain.pop();
            } else {
                break;
            }
        }
        chain.push(p);
    }
    if swapped {
        chain.reverse();
    }
    chain
}

/// Inserts the boundary-chain rays into every non-unimodular cone of a
/// complete two-dimensional fan. Original rays keep their indices; new rays
/// are appended.
pub fn resolve_fan_2d(fan: &Fan) -> Result<Fan> {
    if fan.dim() != 2 {
        return Err(Error::UnsupportedDimension {
            expected: 2,
            found: fan.dim(),
        });
    }
    fan.check_complete()?;
    let mut rays: Vec<LatticeVector> = fan.rays().to_vec();
    let mut cones: Vec<Vec<usize>> = Vec::new();
    for cone in fan.max_cones() {
        if fan.cone_index(cone).is_one() {
            cones.push(cone.clone());
            continue;
        }
        let chain = boundary_chain(&rays[cone[0]], &rays[cone[1]]);
        let mut ids = Vec::with_capacity(chain.len());
        for p in &chain {
            let id = match rays.iter().position(|r| r == p) {
                Some(i) => i,
                None => {
                    rays.push(p.clone());
                    rays.len() - 1
                }
            };
            ids.push(id);
        }
        for w in ids.windows(2) {
            cones.push(vec![w[0], w[1]]);
        }
    }
    let out = Fan::new(2, rays, cones)?;
    out.require_smooth()?;
    Ok(out)
}
