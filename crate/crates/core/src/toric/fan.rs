use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::linalg::{abs_det_int, kernel, rank_int, solve, to_rat};
use crate::lattice::rational::{dot_int, is_primitive, lattice, primitive, LatticeVector, Rational};

/// A simplicial rational fan given by primitive rays and maximal cones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fan {
    dim: usize,
    rays: Vec<LatticeVector>,
    /// Maximal cones as sorted ray-index lists; all faces are implied.
    cones: Vec<Vec<usize>>,
}

/// Wire form of a fan: `{ "dim": 2, "rays": [[1,0],...], "max_cones": [[0,1],...] }`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FanJson {
    pub dim: usize,
    pub rays: Vec<Vec<i64>>,
    pub max_cones: Vec<Vec<usize>>,
}

impl Fan {
    pub fn new(dim: usize, rays: Vec<LatticeVector>, cones: Vec<Vec<usize>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        for (i, r) in rays.iter().enumerate() {
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.len(),
                });
            }
            if !is_primitive(r) {
                return Err(Error::InvalidFan(format!("ray {i} is zero or not primitive")));
            }
            if rays[..i].contains(r) {
                return Err(Error::InvalidFan(format!("ray {i} is repeated")));
            }
        }
        let mut normalized = Vec::with_capacity(cones.len());
        for cone in cones {
            let mut c = cone.clone();
            c.sort_unstable();
            c.dedup();
            if c.len() != cone.len() {
                return Err(Error::InvalidFan(format!("cone {cone:?} repeats a ray")));
            }
            if let Some(&bad) = c.iter().find(|&&i| i >= rays.len()) {
                return Err(Error::InvalidFan(format!("cone {cone:?} references missing ray {bad}")));
            }
            let vecs: Vec<LatticeVector> = c.iter().map(|&i| rays[i].clone()).collect();
            if rank_int(&vecs) != c.len() {
                return Err(Error::InvalidFan(format!("cone {cone:?} is not simplicial")));
            }
            normalized.push(c);
        }
        Ok(Fan {
            dim,
            rays,
            cones: normalized,
        })
    }

    pub fn from_i64(dim: usize, rays: &[&[i64]], cones: &[&[usize]]) -> Result<Self> {
        Fan::new(
            dim,
            rays.iter().map(|r| lattice(r)).collect(),
            cones.iter().map(|c| c.to_vec()).collect(),
        )
    }

    pub fn from_json(json: &FanJson) -> Result<Self> {
        Fan::new(
            json.dim,
            json.rays.iter().map(|r| lattice(r)).collect(),
            json.max_cones.clone(),
        )
    }

    pub fn to_json(&self) -> FanJson {
        FanJson {
            dim: self.dim,
            rays: self
                .rays
                .iter()
                .map(|r| r.iter().map(|x| i64::try_from(x).expect("ray fits i64")).collect())
                .collect(),
            max_cones: self.cones.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rays(&self) -> &[LatticeVector] {
        &self.rays
    }

    pub fn max_cones(&self) -> &[Vec<usize>] {
        &self.cones
    }

    pub fn cone_rays(&self, cone: &[usize]) -> Vec<LatticeVector> {
        cone.iter().map(|&i| self.rays[i].clone()).collect()
    }

    /// Absolute determinant of a full-dimensional cone's ray matrix.
    pub fn cone_index(&self, cone: &[usize]) -> BigInt {
        abs_det_int(&self.cone_rays(cone))
    }

    pub fn is_smooth(&self) -> bool {
        self.cones
            .iter()
            .all(|c| c.len() == self.dim && self.cone_index(c).is_one())
    }

    pub fn require_smooth(&self) -> Result<()> {
        for c in &self.cones {
            if c.len() != self.dim {
                return Err(Error::NotComplete(format!(
                    "maximal cone {c:?} is not full-dimensional"
                )));
            }
            let idx = self.cone_index(c);
            if !idx.is_one() {
                return Err(Error::NotSmooth {
                    cone: c.clone(),
                    index: idx.to_string(),
                });
            }
        }
        Ok(())
    }

    /// Every cone of the fan, including the zero cone, as sorted ray sets.
    pub fn all_cones(&self) -> Vec<Vec<usize>> {
        let mut set: BTreeSet<Vec<usize>> = BTreeSet::new();
        for c in &self.cones {
            let k = c.len();
            for mask in 0u64..(1u64 << k) {
                let face: Vec<usize> = (0..k).filter(|b| mask >> b & 1 == 1).map(|b| c[b]).collect();
                set.insert(face);
            }
        }
        set.into_iter().collect()
    }

    /// True iff the ray set J spans a cone of the fan.
    pub fn is_cone(&self, j: &[usize]) -> bool {
        self.cones.iter().any(|c| j.iter().all(|r| c.contains(r)))
    }

    /// Coordinates of x in the basis of a full-dimensional simplicial cone.
    fn cone_coordinates(&self, cone: &[usize], x: &[Rational]) -> Option<Vec<Rational>> {
        let rays = self.cone_rays(cone);
        let a: Vec<Vec<Rational>> = (0..self.dim)
            .map(|row| rays.iter().map(|r| Rational::from_integer(r[row].clone())).collect())
            .collect();
        solve(&a, x)
    }

    /// Index of a maximal cone containing x, if any.
    pub fn locate(&self, x: &[Rational]) -> Option<usize> {
        self.cones.iter().position(|c| {
            c.len() == self.dim
                && self
                    .cone_coordinates(c, x)
                    .is_some_and(|coords| coords.iter().all(|t| !t.is_negative()))
        })
    }

    /// Completeness check: every codimension-one face is shared by exactly two
    /// maximal cones lying on opposite sides of it, and a deterministic batch of
    /// random directions is covered.
    pub fn check_complete(&self) -> Result<()> {
        for c in &self.cones {
            if c.len() != self.dim {
                return Err(Error::NotComplete(format!(
                    "maximal cone {c:?} is not full-dimensional"
                )));
            }
        }
        let mut faces: HashMap<Vec<usize>, Vec<(usize, usize)>> = HashMap::new();
        for (ci, c) in self.cones.iter().enumerate() {
            for (k, &apex) in c.iter().enumerate() {
                let face: Vec<usize> = c.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, &r)| r).collect();
                faces.entry(face).or_default().push((ci, apex));
            }
        }
        for (face, owners) in &faces {
            if owners.len() != 2 {
                return Err(Error::NotComplete(format!(
                    "face {face:?} lies in {} maximal cones",
                    owners.len()
                )));
            }
            let rows = self.cone_rays(face);
            let normal = kernel(&to_rat(&rows), self.dim);
            let u = primitive(&normal[0]).expect("face of a simplicial cone has a normal");
            let s0 = dot_int(&u, &self.rays[owners[0].1]);
            let s1 = dot_int(&u, &self.rays[owners[1].1]);
            if s0.signum() * s1.signum() != BigInt::from(-1) {
                return Err(Error::NotComplete(format!("cones adjacent along {face:?} overlap")));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_fa11);
        for _ in 0..64 {
            let x: Vec<Rational> = (0..self.dim)
                .map(|_| {
                    Rational::new(
                        BigInt::from(rng.gen_range(-997i64..=997)),
                        BigInt::from(rng.gen_range(1i64..=89)),
                    )
                })
                .collect();
            if x.iter().all(Zero::is_zero) {
                continue;
            }
            if self.locate(&x).is_none() {
                return Err(Error::NotComplete("a direction is not covered".into()));
            }
        }
        Ok(())
    }

    pub fn is_complete(&self) -> bool {
        self.check_complete().is_ok()
    }

    /// Product fan in the direct sum of the two lattices.
    pub fn product(&self, other: &Fan) -> Result<Fan> {
        let dim = self.dim + other.dim;
        let mut rays = Vec::new();
        for r in &self.rays {
            let mut v = r.clone();
            v.extend(std::iter::repeat_n(BigInt::zero(), other.dim));
            rays.push(v);
        }
        for r in &other.rays {
            let mut v: Vec<BigInt> = std::iter::repeat_n(BigInt::zero(), self.dim).collect();
            v.extend(r.iter().cloned());
            rays.push(v);
        }
        let shift = self.rays.len();
        let mut cones = Vec::new();
        for a in &self.cones {
            for b in &other.cones {
                let mut c = a.clone();
                c.extend(b.iter().map(|i| i + shift));
                cones.push(c);
            }
        }
        Fan::new(dim, rays, cones)
    }

    /// Fan of projective n-space: rays e_1..e_n and -(e_1+...+e_n).
    pub fn projective_space(n: usize) -> Result<Fan> {
        let mut rays: Vec<LatticeVector> = (0..n)
            .map(|i| (0..n).map(|j| BigInt::from((i == j) as i64)).collect())
            .collect();
        rays.push(vec![BigInt::from(-1); n]);
        let cones = (0..=n).map(|skip| (0..=n).filter(|&i| i != skip).collect()).collect();
        Fan::new(n, rays, cones)
    }

    /// Hirzebruch surface F_m: rays (1,0), (0,1), (-1,-m), (0,-1).
    pub fn hirzebruch(m: i64) -> Result<Fan> {
        Fan::from_i64(
            2,
            &[&[1, 0], &[0, 1], &[-1, -m], &[0, -1]],
            &[&[0, 1], &[1, 2], &[2, 3], &[3, 0]],
        )
    }

    /// Weighted projective plane P(1,1,m): rays (1,0), (-1,-m), (0,1).
    pub fn weighted_11m(m: i64) -> Result<Fan> {
        Fan::from_i64(2, &[&[1, 0], &[-1, -m], &[0, 1]], &[&[0, 2], &[1, 2], &[0, 1]])
    }

    /// The singular cubic surface xyz = u^3: rays (-2,1), (1,-2), (1,1).
    pub fn cubic_xyz_u3() -> Result<Fan> {
        Fan::from_i64(2, &[&[-2, 1], &[1, -2], &[1, 1]], &[&[1, 2], &[0, 2], &[0, 1]])
    }
}
