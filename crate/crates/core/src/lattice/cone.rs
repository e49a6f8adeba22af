//! Rational polyhedral cones in both generator and facet form.
//!
//! A cone is built from generators; facets are found by exhaustive enumeration
//! of hyperplanes spanned by generator subsets. This is exponential in the
//! worst case but the cones handled here have at most a dozen generators in
//! dimension at most seven.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::linalg::{abs_det_int, hyperplane_normal, kernel, rank_int, to_rat};
use super::rational::{dot_int, dot_mixed, format_rational, primitive, primitive_int, LatticeVector, Rational};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalCone {
    ambient_dim: usize,
    /// Primitive generators. For pointed cones these are exactly the extreme rays.
    generators: Vec<LatticeVector>,
    /// Primitive inner normals u with <u, x> >= 0 on the cone. An equation
    /// bounding a lower-dimensional cone appears as the pair u, -u.
    facets: Vec<LatticeVector>,
    span_dim: usize,
    pointed: bool,
}

/// One simplicial cone of a triangulation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimplicialPiece {
    pub rays: Vec<LatticeVector>,
    /// Index of the sublattice spanned by `rays` in the ambient lattice.
    pub lattice_determinant: BigInt,
}

fn check_len(dim: usize, v: &[BigInt]) -> Result<()> {
    if v.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: v.len(),
        });
    }
    Ok(())
}

fn strings(v: &[BigInt]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

/// Visits every k-subset of 0..n in lexicographic order.
pub(crate) fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

impl RationalCone {
    /// Cone generated by the given integer vectors. Zero vectors are ignored,
    /// the rest are made primitive and deduplicated.
    pub fn from_generators(ambient_dim: usize, generators: Vec<LatticeVector>) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(Error::ZeroDimension);
        }
        let mut gens: Vec<LatticeVector> = Vec::new();
        for g in generators {
            check_len(ambient_dim, &g)?;
            if g.iter().all(Zero::is_zero) {
                continue;
            }
            let p = primitive_int(&g);
            if !gens.contains(&p) {
                gens.push(p);
            }
        }

        let span_dim = rank_int(&gens);
        let complement: Vec<LatticeVector> = kernel(&to_rat(&gens), ambient_dim)
            .iter()
            .filter_map(|v| primitive(v))
            .collect();

        let mut facets: Vec<LatticeVector> = Vec::new();
        for w in &complement {
            facets.push(w.clone());
            facets.push(w.iter().map(|x| -x).collect());
        }

        if span_dim >= 1 {
            let mut found = Vec::new();
            for_each_subset(gens.len(), span_dim - 1, |subset| {
                let mut rows: Vec<LatticeVector> = subset.iter().map(|&i| gens[i].clone()).collect();
                rows.extend(complement.iter().cloned());
                let Some(u) = hyperplane_normal(&rows, ambient_dim) else {
                    return;
                };
                let signs: Vec<BigInt> = gens.iter().map(|g| dot_int(&u, g)).collect();
                let u = if signs.iter().all(|s| !s.is_negative()) {
                    u
                } else if signs.iter().all(|s| !s.is_positive()) {
                    u.iter().map(|x| -x).collect()
                } else {
                    return;
                };
                if !found.contains(&u) {
                    found.push(u);
                }
            });
            facets.extend(found);
        }

        let pointed = rank_int(&facets) == ambient_dim;
        if pointed {
            gens.retain(|g| {
                let tight: Vec<LatticeVector> = facets.iter().filter(|u| dot_int(u, g).is_zero()).cloned().collect();
                rank_int(&tight) == ambient_dim - 1
            });
        }

        let cone = RationalCone {
            ambient_dim,
            generators: gens,
            facets,
            span_dim,
            pointed,
        };
        cone.cross_validate()?;
        Ok(cone)
    }

    /// Cone {x : <u, x> >= 0 for every given u}.
    pub fn from_facets(ambient_dim: usize, normals: Vec<LatticeVector>) -> Result<Self> {
        let outer = RationalCone::from_generators(ambient_dim, normals)?;
        RationalCone::from_generators(ambient_dim, outer.facets)
    }

    /// The nonnegative orthant.
    pub fn orthant(dim: usize) -> Result<Self> {
        let gens = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                    .collect()
            })
            .collect();
        RationalCone::from_generators(dim, gens)
    }

    fn cross_validate(&self) -> Result<()> {
        for g in &self.generators {
            for u in &self.facets {
                if dot_int(u, g).is_negative() {
                    return Err(Error::InvalidParameters(format!(
                        "generator {:?} violates facet {:?}",
                        strings(g),
                        strings(u)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn generators(&self) -> &[LatticeVector] {
        &self.generators
    }

    pub fn facets(&self) -> &[LatticeVector] {
        &self.facets
    }

    pub fn span_dim(&self) -> usize {
        self.span_dim
    }

    pub fn is_pointed(&self) -> bool {
        self.pointed
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.span_dim == self.ambient_dim
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.facets.iter().all(|u| !dot_mixed(u, x).is_negative())
    }

    pub fn contains_int(&self, x: &[BigInt]) -> bool {
        self.facets.iter().all(|u| !dot_int(u, x).is_negative())
    }

    /// Strict interior membership; only meaningful for full-dimensional cones.
    pub fn contains_in_interior(&self, x: &[Rational]) -> bool {
        self.is_full_dimensional() && self.facets.iter().all(|u| dot_mixed(u, x).is_positive())
    }

    /// Equality as point sets.
    pub fn same_set(&self, other: &RationalCone) -> bool {
        self.ambient_dim == other.ambient_dim
            && self.generators.iter().all(|g| other.contains_int(g))
            && other.generators.iter().all(|g| self.contains_int(g))
    }

    fn require_pointed_full(&self) -> Result<()> {
        if !self.is_full_dimensional() {
            return Err(Error::NotFullDimensional {
                span: self.span_dim,
                ambient: self.ambient_dim,
            });
        }
        if !self.pointed {
            return Err(Error::NotPointed);
        }
        Ok(())
    }
}

/// The dual cone {y : <y, x> >= 0 for all x in c}.
pub fn dual_cone(c: &RationalCone) -> Result<RationalCone> {
    if c.is_full_dimensional() && c.pointed {
        // Facet normals of c are the extreme rays of its dual and vice versa.
        let dual = RationalCone {
            ambient_dim: c.ambient_dim,
            generators: c.facets.clone(),
            facets: c.generators.clone(),
            span_dim: c.ambient_dim,
            pointed: true,
        };
        dual.cross_validate()?;
        return Ok(dual);
    }
    RationalCone::from_generators(c.ambient_dim, c.facets.clone())
}

/// Placing triangulation using the extreme rays in index order.
pub fn triangulate(c: &RationalCone) -> Result<Vec<SimplicialPiece>> {
    let order: Vec<usize> = (0..c.generators.len()).collect();
    triangulate_with_order(c, &order)
}

/// Placing triangulation inserting extreme rays in the given order
/// (a permutation of the generator indices).
pub fn triangulate_with_order(c: &RationalCone, order: &[usize]) -> Result<Vec<SimplicialPiece>> {
    c.require_pointed_full()?;
    let d = c.ambient_dim;
    let rays = &c.generators;
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..rays.len()).collect::<Vec<_>>() {
        return Err(Error::InvalidParameters(
            "triangulation order must be a permutation of the generators".into(),
        ));
    }

    let mut initial: Vec<usize> = Vec::new();
    for &i in order {
        let mut trial: Vec<LatticeVector> = initial.iter().map(|&j| rays[j].clone()).collect();
        trial.push(rays[i].clone());
        if rank_int(&trial) == trial.len() {
            initial.push(i);
        }
        if initial.len() == d {
            break;
        }
    }

    let mut simplices: Vec<Vec<usize>> = vec![initial.clone()];
    // face -> normal oriented towards the simplex it bounds (faces lie on at most two simplices)
    let mut normals: HashMap<Vec<usize>, Option<LatticeVector>> = HashMap::new();
    for &r in order.iter().filter(|i| !initial.contains(i)) {
        let mut boundary: HashMap<Vec<usize>, (usize, usize)> = HashMap::new();
        let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
        for s in &simplices {
            for (k, &apex) in s.iter().enumerate() {
                let mut face: Vec<usize> = s.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, &v)| v).collect();
                face.sort_unstable();
                *seen.entry(face.clone()).or_insert(0) += 1;
                boundary.insert(face, (apex, 0));
            }
        }
        let mut added = Vec::new();
        for (face, count) in &seen {
            if *count != 1 {
                continue;
            }
            let (apex, _) = boundary[face];
            let normal = normals
                .entry(face.clone())
                .or_insert_with(|| {
                    let rows: Vec<LatticeVector> = face.iter().map(|&j| rays[j].clone()).collect();
                    hyperplane_normal(&rows, d)
                })
                .clone();
            let Some(mut u) = normal else {
                continue;
            };
            if dot_int(&u, &rays[apex]).is_negative() {
                u = u.iter().map(|x| -x).collect();
            }
            if dot_int(&u, &rays[r]).is_negative() {
                let mut s = face.clone();
                s.push(r);
                added.push(s);
            }
        }
        added.sort();
        simplices.extend(added);
    }

    Ok(simplices
        .into_iter()
        .map(|s| {
            let rows: Vec<LatticeVector> = s.iter().map(|&j| rays[j].clone()).collect();
            let lattice_determinant = abs_det_int(&rows);
            SimplicialPiece {
                rays: rows,
                lattice_determinant,
            }
        })
        .collect())
}

/// Checks that s lies strictly inside c, reporting the first facet that fails.
fn require_interior(c: &RationalCone, s: &[Rational]) -> Result<()> {
    for u in &c.facets {
        let v = dot_mixed(u, s);
        if !v.is_positive() {
            return Err(Error::Divergence {
                form: strings(u),
                value: format_rational(&v),
            });
        }
    }
    Ok(())
}

/// Exact value of the integral of exp(-<s, y>) over the dual cone, with
/// Lebesgue measure normalized by the dual lattice.
pub fn x_function(c: &RationalCone, s: &[Rational]) -> Result<Rational> {
    let order: Vec<usize> = (0..c.facets.len()).collect();
    x_function_with_order(c, s, Some(&order))
}

/// Same as [`x_function`] but triangulating the dual cone in a chosen order.
pub fn x_function_with_order(c: &RationalCone, s: &[Rational], order: Option<&[usize]>) -> Result<Rational> {
    check_len(c.ambient_dim, &vec![BigInt::zero(); s.len()])?;
    c.require_pointed_full()?;
    require_interior(c, s)?;
    let dual = dual_cone(c)?;
    let pieces = match order {
        Some(o) if o.len() == dual.generators.len() => triangulate_with_order(&dual, o)?,
        _ => triangulate(&dual)?,
    };
    Ok(pieces
        .iter()
        .map(|p| {
            let denom: Rational = p.rays.iter().map(|r| dot_mixed(r, s)).product();
            Rational::from_integer(p.lattice_determinant.clone()) / denom
        })
        .sum())
}

/// max_i ( -<u_i, k> / <u_i, l> ): the least t with t*l + k in the cone.
pub fn min_shift(effective: &RationalCone, l_class: &[Rational], k_class: &[Rational]) -> Result<Rational> {
    check_len(effective.ambient_dim, &vec![BigInt::zero(); l_class.len()])?;
    check_len(effective.ambient_dim, &vec![BigInt::zero(); k_class.len()])?;
    if effective.facets.is_empty() {
        return Err(Error::InvalidParameters(
            "effective cone has no facets (it is the whole space)".into(),
        ));
    }
    let mut best: Option<Rational> = None;
    for u in &effective.facets {
        let ul = dot_mixed(u, l_class);
        if !ul.is_positive() {
            return Err(Error::NotInterior {
                form: strings(u),
                value: format_rational(&ul),
            });
        }
        let t = -dot_mixed(u, k_class) / ul;
        if best.as_ref().is_none_or(|b| &t > b) {
            best = Some(t);
        }
    }
    Ok(best.expect("at least one facet"))
}
