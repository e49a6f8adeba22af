//! Exact global heights: standard projective, toric (via convex PL functions)
//! and weighted-monomial.
//!
//! Heights that are only defined up to a root (non-integral PL forms,
//! weighted models whose anticanonical monomials need a multiple of the
//! degree) are returned as a [`ScaledHeight`]: an exact rational `raw` with
//! H = raw^(1/degree).

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{factorize, gcd_all, valuation};
use crate::error::{Error, Result};
use crate::lattice::rational::{format_rational, ratio_to_f64, Rational};
use crate::toric::PLFunction;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProjectivePoint {
    coords: Vec<BigInt>,
}

impl ProjectivePoint {
    /// Divides out the content and makes the first nonzero coordinate positive.
    pub fn new(coords: Vec<BigInt>) -> Result<Self> {
        let g = gcd_all(&coords);
        if g.is_zero() {
            return Err(Error::InvalidPoint("all coordinates are zero".into()));
        }
        let first_negative = coords.iter().find(|c| !c.is_zero()).is_some_and(|c| c.is_negative());
        let g = if first_negative { -g } else { g };
        Ok(ProjectivePoint {
            coords: coords.into_iter().map(|c| c / &g).collect(),
        })
    }

    pub fn from_i64(coords: &[i64]) -> Result<Self> {
        ProjectivePoint::new(coords.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }
}

/// max_j |z_j| of the primitive representative.
pub fn standard_height(p: &ProjectivePoint) -> Rational {
    let m = p.coords.iter().map(|c| c.abs()).max().unwrap_or_default();
    Rational::from_integer(m)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusPoint {
    coords: Vec<Rational>,
}

impl TorusPoint {
    pub fn new(coords: Vec<Rational>) -> Result<Self> {
        if coords.iter().any(Zero::is_zero) {
            return Err(Error::InvalidPoint("torus coordinates must be nonzero".into()));
        }
        Ok(TorusPoint { coords })
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }
}

/// H = raw^(1/degree), kept exact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaledHeight {
    pub raw: Rational,
    pub degree: u32,
}

impl ScaledHeight {
    /// H <= bound, decided exactly.
    pub fn at_most(&self, bound: &Rational) -> bool {
        self.raw <= num_traits::pow(bound.clone(), self.degree as usize)
    }

    /// The height itself when raw is a perfect power.
    pub fn exact(&self) -> Option<Rational> {
        let n = exact_root(self.raw.numer(), self.degree)?;
        let d = exact_root(self.raw.denom(), self.degree)?;
        Some(Rational::new(n, d))
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(self.raw.numer(), self.raw.denom()).powf(1.0 / self.degree as f64)
    }
}

fn exact_root(x: &BigInt, k: u32) -> Option<BigInt> {
    if x.is_negative() {
        return None;
    }
    let r = x.nth_root(k);
    (num_traits::pow(r.clone(), k as usize) == *x).then_some(r)
}

/// The global height prod_v max_a |x^a|_v over a family of exponent vectors,
/// for nonzero rational coordinates (exponents may be negative).
fn monomial_height(coords: &[Rational], monomials: &[Vec<BigInt>]) -> Rational {
    // archimedean place
    let mut arch: Option<Rational> = None;
    for a in monomials {
        let v = monomial_abs(coords, a);
        if arch.as_ref().is_none_or(|m| &v > m) {
            arch = Some(v);
        }
    }
    let mut h = arch.expect("non-empty monomial family");

    let mut primes: BTreeSet<BigInt> = BTreeSet::new();
    for c in coords {
        for (p, _) in factorize(c.numer()).into_iter().chain(factorize(c.denom())) {
            primes.insert(p);
        }
    }
    for p in primes {
        let v: Vec<i64> = coords
            .iter()
            .map(|c| {
                let num = if c.numer().is_zero() {
                    0
                } else {
                    valuation(c.numer(), &p) as i64
                };
                num - valuation(c.denom(), &p) as i64
            })
            .collect();
        // |x^a|_p = p^(-<a, v>); the max is attained at the least pairing
        let least = monomials
            .iter()
            .map(|a| a.iter().zip(&v).map(|(ai, vi)| ai * BigInt::from(*vi)).sum::<BigInt>())
            .min()
            .expect("non-empty monomial family");
        let e = (-least).to_i64().expect("valuation fits in i64");
        h *= pow_signed(&p, e);
    }
    h
}

fn pow_signed(p: &BigInt, e: i64) -> Rational {
    let mag = num_traits::pow(p.clone(), e.unsigned_abs() as usize);
    if e >= 0 {
        Rational::from_integer(mag)
    } else {
        Rational::new(BigInt::one(), mag)
    }
}

fn monomial_abs(coords: &[Rational], a: &[BigInt]) -> Rational {
    let mut v = Rational::one();
    for (c, e) in coords.iter().zip(a) {
        let e = e.to_i64().expect("exponent fits in i64");
        let c = c.abs();
        let pw = num_traits::pow(c, e.unsigned_abs() as usize);
        v *= if e >= 0 { pw } else { pw.recip() };
    }
    v
}

/// lcm of the denominators of all cone forms: the least k with k*phi integral.
fn integrality_degree(phi: &PLFunction) -> u32 {
    let mut k = BigInt::one();
    for m in phi.cone_forms() {
        for x in m {
            k = k.lcm(x.denom());
        }
    }
    k.to_u32().expect("integrality degree fits in u32")
}

/// The toric height raised to the least power making phi integral.
pub fn toric_height_scaled(t: &TorusPoint, phi: &PLFunction) -> Result<ScaledHeight> {
    if t.coords.len() != phi.fan().dim() {
        return Err(Error::DimensionMismatch {
            expected: phi.fan().dim(),
            found: t.coords.len(),
        });
    }
    if !phi.is_convex() {
        return Err(Error::NotConvex);
    }
    let k = integrality_degree(phi);
    let kk = Rational::from_integer(BigInt::from(k));
    let mut monomials: Vec<Vec<BigInt>> = Vec::new();
    for m in phi.cone_forms() {
        let v: Vec<BigInt> = m.iter().map(|x| (x * &kk).to_integer()).collect();
        if !monomials.contains(&v) {
            monomials.push(v);
        }
    }
    Ok(ScaledHeight {
        raw: monomial_height(&t.coords, &monomials),
        degree: k,
    })
}

/// prod_v max_sigma |t^(m_sigma)|_v for a convex PL function with integral forms.
pub fn toric_height(t: &TorusPoint, phi: &PLFunction) -> Result<Rational> {
    if !phi.is_integral() {
        return Err(Error::NonIntegralForms);
    }
    Ok(toric_height_scaled(t, phi)?.raw)
}

/// A point of weighted projective space, normalized so that no prime p has
/// p^(w_i) | x_i for all i, and (when some weight is odd) the first nonzero
/// coordinate of odd weight is positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeightedPoint {
    weights: Vec<u32>,
    coords: Vec<BigInt>,
}

impl WeightedPoint {
    pub fn new(weights: Vec<u32>, mut coords: Vec<BigInt>) -> Result<Self> {
        if weights.len() != coords.len() {
            return Err(Error::DimensionMismatch {
                expected: weights.len(),
                found: coords.len(),
            });
        }
        if weights.contains(&0) {
            return Err(Error::InvalidPoint("weights must be positive".into()));
        }
        let g = gcd_all(&coords);
        if g.is_zero() {
            return Err(Error::InvalidPoint("all coordinates are zero".into()));
        }
        for (p, _) in factorize(&g) {
            loop {
                let divisible = coords
                    .iter()
                    .zip(&weights)
                    .all(|(c, &w)| (c % num_traits::pow(p.clone(), w as usize)).is_zero());
                if !divisible {
                    break;
                }
                for (c, &w) in coords.iter_mut().zip(&weights) {
                    *c /= num_traits::pow(p.clone(), w as usize);
                }
            }
        }
        let flip = coords
            .iter()
            .zip(&weights)
            .find(|(c, w)| *w % 2 == 1 && !c.is_zero())
            .is_some_and(|(c, _)| c.is_negative());
        if flip {
            for (c, &w) in coords.iter_mut().zip(&weights) {
                if w % 2 == 1 {
                    *c = -&*c;
                }
            }
        }
        Ok(WeightedPoint { weights, coords })
    }

    pub fn from_i64(weights: &[u32], coords: &[i64]) -> Result<Self> {
        WeightedPoint::new(weights.to_vec(), coords.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }

    /// Torus coordinates t_j = prod_i x_i^(-(v_i)_j) for the toric model with
    /// rays v_i (one per homogeneous coordinate, sum w_i v_i = 0).
    pub fn torus_coordinates(&self, rays: &[Vec<BigInt>]) -> Result<TorusPoint> {
        if rays.len() != self.coords.len() {
            return Err(Error::DimensionMismatch {
                expected: self.coords.len(),
                found: rays.len(),
            });
        }
        if self.coords.iter().any(Zero::is_zero) {
            return Err(Error::InvalidPoint("point lies on the toric boundary".into()));
        }
        let dim = rays.first().map_or(0, Vec::len);
        let xs: Vec<Rational> = self.coords.iter().cloned().map(Rational::from_integer).collect();
        let coords = (0..dim)
            .map(|j| {
                let a: Vec<BigInt> = rays.iter().map(|v| -&v[j]).collect();
                signed_monomial(&xs, &a)
            })
            .collect();
        TorusPoint::new(coords)
    }
}

fn signed_monomial(xs: &[Rational], a: &[BigInt]) -> Rational {
    let mut v = Rational::one();
    for (x, e) in xs.iter().zip(a) {
        let e = e.to_i64().expect("exponent fits in i64");
        let pw = num_traits::pow(x.clone(), e.unsigned_abs() as usize);
        v *= if e >= 0 { pw } else { pw.recip() };
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeightKind {
    StandardProjective,
    ToricPl,
    WeightedMonomial,
}

/// A height as prod_v max over a monomial family, reported as the
/// `normalization_degree`-th root of that product.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeightModel {
    pub kind: HeightKind,
    pub monomials: Vec<Vec<i64>>,
    pub normalization_degree: Rational,
    /// Homogeneous weights (all 1 for the standard model, empty for toric).
    pub weights: Vec<u32>,
}

impl HeightModel {
    pub fn standard_projective(n: usize) -> Self {
        let monomials = (0..=n).map(|i| (0..=n).map(|j| i64::from(i == j)).collect()).collect();
        HeightModel {
            kind: HeightKind::StandardProjective,
            monomials,
            normalization_degree: Rational::one(),
            weights: vec![1; n + 1],
        }
    }

    /// Cone forms of k*phi, with k the least integer making them integral.
    pub fn toric(phi: &PLFunction) -> Result<Self> {
        if !phi.is_convex() {
            return Err(Error::NotConvex);
        }
        let k = integrality_degree(phi);
        let kk = Rational::from_integer(BigInt::from(k));
        let mut monomials: Vec<Vec<i64>> = Vec::new();
        for m in phi.cone_forms() {
            let v: Vec<i64> = m
                .iter()
                .map(|x| (x * &kk).to_integer().to_i64().expect("form fits in i64"))
                .collect();
            if !monomials.contains(&v) {
                monomials.push(v);
            }
        }
        Ok(HeightModel {
            kind: HeightKind::ToricPl,
            monomials,
            normalization_degree: kk,
            weights: Vec::new(),
        })
    }

    /// All monomials of weighted degree k*sum(w), where k is the least integer
    /// with every w_i dividing k*sum(w); the anticanonical height is the k-th
    /// root of the resulting product.
    pub fn weighted_anticanonical(weights: &[u32]) -> Result<Self> {
        if weights.is_empty() || weights.contains(&0) {
            return Err(Error::InvalidHeightModel("weights must be positive".into()));
        }
        let total: u64 = weights.iter().map(|&w| w as u64).sum();
        let l = weights.iter().fold(1u64, |acc, &w| acc.lcm(&(w as u64)));
        let k = total.lcm(&l) / total;
        let degree = k * total;
        let mut monomials = Vec::new();
        let mut current = vec![0i64; weights.len()];
        weighted_compositions(weights, 0, degree, &mut current, &mut monomials);
        Ok(HeightModel {
            kind: HeightKind::WeightedMonomial,
            monomials,
            normalization_degree: Rational::from_integer(BigInt::from(k)),
            weights: weights.to_vec(),
        })
    }

    fn integer_degree(&self) -> Result<u32> {
        let d = &self.normalization_degree;
        if !d.is_integer() || !d.is_positive() {
            return Err(Error::InvalidHeightModel(format!(
                "normalization degree {} is not a positive integer",
                format_rational(d)
            )));
        }
        d.to_integer()
            .to_u32()
            .ok_or_else(|| Error::InvalidHeightModel("normalization degree too large".into()))
    }

    fn weighted_degree(&self, a: &[i64]) -> i64 {
        a.iter().zip(&self.weights).map(|(&e, &w)| e * w as i64).sum()
    }

    /// Monomials all share one weighted degree and are nonnegative.
    pub fn validate(&self) -> Result<()> {
        if self.monomials.is_empty() {
            return Err(Error::InvalidHeightModel("empty monomial family".into()));
        }
        self.integer_degree()?;
        if self.kind == HeightKind::ToricPl {
            return Ok(());
        }
        if self
            .monomials
            .iter()
            .any(|a| a.len() != self.weights.len() || a.iter().any(|&e| e < 0))
        {
            return Err(Error::InvalidHeightModel(
                "monomials must be nonnegative exponent vectors".into(),
            ));
        }
        let d0 = self.weighted_degree(&self.monomials[0]);
        if self.monomials.iter().any(|a| self.weighted_degree(a) != d0) {
            return Err(Error::InvalidHeightModel(
                "monomials of different weighted degrees".into(),
            ));
        }
        Ok(())
    }
}

impl HeightModel {
    /// Height of a torus point under a toric model (monomials are the cone
    /// forms, exponents may be negative).
    pub fn torus_height(&self, t: &TorusPoint) -> Result<ScaledHeight> {
        if self.kind != HeightKind::ToricPl {
            return Err(Error::InvalidHeightModel(
                "only toric models evaluate torus points".into(),
            ));
        }
        self.validate()?;
        if self.monomials.iter().any(|m| m.len() != t.coords.len()) {
            return Err(Error::DimensionMismatch {
                expected: self.monomials[0].len(),
                found: t.coords.len(),
            });
        }
        let mons: Vec<Vec<BigInt>> = self
            .monomials
            .iter()
            .map(|a| a.iter().map(|&e| BigInt::from(e)).collect())
            .collect();
        Ok(ScaledHeight {
            raw: monomial_height(&t.coords, &mons),
            degree: self.integer_degree()?,
        })
    }
}

fn weighted_compositions(w: &[u32], i: usize, left: u64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
    if i == w.len() - 1 {
        if left.is_multiple_of(w[i] as u64) {
            cur[i] = (left / w[i] as u64) as i64;
            out.push(cur.clone());
        }
        return;
    }
    for e in 0..=left / w[i] as u64 {
        cur[i] = e as i64;
        weighted_compositions(w, i + 1, left - e * w[i] as u64, cur, out);
    }
}

/// prod_v max_a |x^a|_v over the model's monomials, reported with the model's
/// normalization degree. Zero coordinates kill the monomials that use them.
pub fn weighted_height(p: &WeightedPoint, hm: &HeightModel) -> Result<ScaledHeight> {
    if hm.kind == HeightKind::ToricPl {
        return Err(Error::InvalidHeightModel("toric models evaluate torus points".into()));
    }
    hm.validate()?;
    if hm.weights != p.weights {
        return Err(Error::InvalidHeightModel("point and model weights differ".into()));
    }
    let live: Vec<Vec<BigInt>> = hm
        .monomials
        .iter()
        .filter(|a| a.iter().zip(&p.coords).all(|(&e, c)| e == 0 || !c.is_zero()))
        .map(|a| a.iter().map(|&e| BigInt::from(e)).collect())
        .collect();
    if live.is_empty() {
        return Err(Error::InvalidHeightModel("every monomial vanishes at the point".into()));
    }
    // restrict to the nonzero coordinates
    let idx: Vec<usize> = (0..p.coords.len()).filter(|&i| !p.coords[i].is_zero()).collect();
    let coords: Vec<Rational> = idx
        .iter()
        .map(|&i| Rational::from_integer(p.coords[i].clone()))
        .collect();
    let mons: Vec<Vec<BigInt>> = live
        .iter()
        .map(|a| idx.iter().map(|&i| a[i].clone()).collect())
        .collect();
    Ok(ScaledHeight {
        raw: monomial_height(&coords, &mons),
        degree: hm.integer_degree()?,
    })
}
