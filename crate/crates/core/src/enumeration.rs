//! Complete enumeration of rational points of bounded height.
//!
//! Every engine here has a completeness argument that does not depend on
//! floating point: candidate boxes are derived from the height itself and the
//! final comparison H <= B is exact.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{factor_with_spf, mobius_up_to, smallest_prime_factors};
use crate::error::{Error, Result};
use crate::heights::{HeightModel, ProjectivePoint, ScaledHeight, TorusPoint};
use crate::lattice::rational::{as_string, Rational};

/// Number of points of P^n(Q) with standard height <= B:
/// (1/2) sum_{d <= B} mu(d) ((2 floor(B/d) + 1)^(n+1) - 1).
pub fn enumerate_projective(n: usize, bound: u64) -> Result<BigInt> {
    if n == 0 {
        return Err(Error::InvalidParameters(
            "projective dimension must be at least 1".into(),
        ));
    }
    if bound == 0 {
        return Ok(BigInt::zero());
    }
    let mu = mobius_up_to(bound as usize);
    let mut total = BigInt::zero();
    for d in 1..=bound {
        let m = mu[d as usize];
        if m == 0 {
            continue;
        }
        let side = BigInt::from(2 * (bound / d) + 1);
        let term = num_traits::pow(side, n + 1) - 1;
        if m > 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    Ok(total / 2)
}

/// Counts of points of P^n(Q) of standard height exactly h, for h = 0..=B.
pub fn projective_height_counts(n: usize, bound: u64) -> Result<Vec<BigInt>> {
    let mut out = vec![BigInt::zero(); bound as usize + 1];
    let mut prev = BigInt::zero();
    for h in 1..=bound {
        let cur = enumerate_projective(n, h)?;
        out[h as usize] = &cur - &prev;
        prev = cur;
    }
    Ok(out)
}

/// All points of P^n(Q) with standard height <= B, by brute force.
pub fn projective_points(n: usize, bound: u64) -> Vec<ProjectivePoint> {
    let b = bound as i64;
    let mut out = Vec::new();
    let mut v = vec![-b; n + 1];
    if bound == 0 {
        return out;
    }
    loop {
        let first = v.iter().find(|&&x| x != 0);
        if first.is_some_and(|&x| x > 0) {
            let g = v.iter().fold(0i64, |g, &x| g.gcd(&x));
            if g == 1 {
                out.push(ProjectivePoint::from_i64(&v).expect("nonzero"));
            }
        }
        let mut i = 0;
        loop {
            if i == v.len() {
                return out;
            }
            v[i] += 1;
            if v[i] <= b {
                break;
            }
            v[i] = -b;
            i += 1;
        }
    }
}

/// Number of torus points of xyz = u^3 with H = max(|x|,|y|,|z|,u) exactly h,
/// for h = 0..=B. Points are primitive quadruples with u > 0 and xyz = u^3.
///
/// For each u the exponent 3e of every prime power p^e || u is split as
/// a + b + c = 3e with min(a, b, c) = 0 (primitivity), pruning factors
/// exceeding B; each positive triple stands for 4 sign patterns.
pub fn cubic_surface_height_counts(bound: u64) -> Vec<u64> {
    let b = bound as usize;
    if b == 0 {
        return vec![0];
    }
    let spf = smallest_prime_factors(b);
    (1..=b)
        .into_par_iter()
        .fold(
            || vec![0u64; b + 1],
            |mut hist, u| {
                let f = factor_with_spf(u, &spf);
                distribute(&f, 0, 1, 1, 1, bound, &mut |x, y, z| {
                    let h = x.max(y).max(z).max(u as u64);
                    hist[h as usize] += 4;
                });
                hist
            },
        )
        .reduce(
            || vec![0u64; b + 1],
            |mut a, c| {
                for (x, y) in a.iter_mut().zip(c) {
                    *x += y;
                }
                a
            },
        )
}

fn distribute(f: &[(u64, u32)], i: usize, x: u64, y: u64, z: u64, bound: u64, emit: &mut impl FnMut(u64, u64, u64)) {
    if i == f.len() {
        emit(x, y, z);
        return;
    }
    let (p, e) = f[i];
    let n = 3 * e;
    let pows: Vec<u64> = (0..=n).map(|k| p.checked_pow(k).unwrap_or(u64::MAX)).collect();
    for a in 0..=n {
        let xa = x.saturating_mul(pows[a as usize]);
        if xa > bound {
            break;
        }
        for bb in 0..=n - a {
            let c = n - a - bb;
            if a.min(bb).min(c) != 0 {
                continue;
            }
            let yb = y.saturating_mul(pows[bb as usize]);
            if yb > bound {
                break;
            }
            let zc = z.saturating_mul(pows[c as usize]);
            if zc > bound {
                continue;
            }
            distribute(f, i + 1, xa, yb, zc, bound, emit);
        }
    }
}

/// N(B) for the torus of xyz = u^3.
pub fn enumerate_cubic_surface_torus(bound: u64) -> u64 {
    cubic_surface_height_counts(bound).iter().sum()
}

/// The positive triples (x, y, z, u) counted by the cubic engine (one per
/// sign class), for diagnostics and tests.
pub fn cubic_surface_points(bound: u64) -> Vec<[u64; 4]> {
    let b = bound as usize;
    let spf = smallest_prime_factors(b.max(1));
    let mut out = Vec::new();
    for u in 1..=b {
        let f = factor_with_spf(u, &spf);
        distribute(&f, 0, 1, 1, 1, bound, &mut |x, y, z| out.push([x, y, z, u as u64]));
    }
    out
}

/// Exact test max(|x0|^m, |x1|^m, |x2|)^(m+2) <= B^m gcd(x0^m, x1^m, x2)^(m+2).
fn weighted_within(m: u32, mx: u128, g: u128, bound: u64) -> bool {
    let e = m as usize + 2;
    let lhs = BigInt::from(mx).pow(e as u32);
    let rhs = BigInt::from(bound).pow(m) * BigInt::from(g).pow(e as u32);
    lhs <= rhs
}

/// Torus points of P(1,1,m) with anticanonical height <= B, as pairs (M, G):
/// the point has height <= B' iff M^(m+2) <= B'^m G^(m+2).
///
/// Box: write Q = M/G with M = max(|x0|^m, |x1|^m, |x2|), G = gcd(x0^m, x1^m, x2),
/// d = gcd(x0, x1). Normalization gives G | d^(m-1), so |x0|, |x1| <= Q and
/// |x2| <= Q d^(m-1), with Q <= B^(m/(m+2)).
fn weighted_torus_points(m: u32, bound: u64) -> Result<Vec<(u128, u128)>> {
    if m < 1 {
        return Err(Error::InvalidParameters("m must be positive".into()));
    }
    let qmax = integer_root_floor(BigInt::from(bound).pow(m), m + 2)
        .to_i64()
        .ok_or_else(|| Error::InvalidParameters("bound too large".into()))?;
    let rows: Vec<Vec<(u128, u128)>> = (1..=qmax)
        .into_par_iter()
        .map(|x0| {
            let mut acc = Vec::new();
            for x1 in -qmax..=qmax {
                if x1 == 0 {
                    continue;
                }
                let d = x0.gcd(&x1);
                let dm1 = (d as i128).pow(m - 1);
                let x2max = (qmax as i128) * dm1;
                let primes: Vec<i128> = crate::arith::factorize_u64(d as u64)
                    .iter()
                    .map(|&(p, _)| p as i128)
                    .collect();
                let x0m = (x0 as u128).pow(m);
                let x1m = (x1.unsigned_abs() as u128).pow(m);
                let dm = (d as u128).pow(m);
                for x2 in -x2max..=x2max {
                    if x2 == 0 {
                        continue;
                    }
                    // normalization: no p | d with p^m | x2
                    if primes.iter().any(|&p| x2 % p.pow(m) == 0) {
                        continue;
                    }
                    let a2 = x2.unsigned_abs();
                    let mx = x0m.max(x1m).max(a2);
                    let g = dm.gcd(&a2);
                    if weighted_within(m, mx, g, bound) {
                        acc.push((mx, g));
                    }
                }
            }
            acc
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

fn integer_root_floor(x: BigInt, k: u32) -> BigInt {
    x.nth_root(k)
}

/// N(B) for the open torus of P(1,1,m) with the anticanonical height, for
/// each bound of an increasing schedule, by explicit enumeration of the box.
pub fn enumerate_weighted_torus_explicit(m: u32, bounds: &[u64]) -> Result<Vec<u64>> {
    check_schedule(bounds)?;
    let Some(&last) = bounds.last() else {
        return Ok(Vec::new());
    };
    let pts = weighted_torus_points(m, last)?;
    Ok(bounds
        .par_iter()
        .map(|&b| pts.iter().filter(|&&(mx, g)| weighted_within(m, mx, g, b)).count() as u64)
        .collect())
}

/// N(B) for the open torus of P(1,1,m) with the anticanonical height.
///
/// Same box as the explicit sweep, but for fixed (x0, x1) the x2 are counted
/// in closed form: for each admissible G | d^m (v_p(G) <= m-1 for p | d, which
/// is exactly the normalization), the x2 with gcd(d^m, x2) = G are G k with k
/// prime to d, and the height condition reads max(|x0|^m, |x1|^m, |x2|) <= X
/// with X = floor((B^m G^(m+2))^(1/(m+2))).
pub fn enumerate_weighted_torus(m: u32, bounds: &[u64]) -> Result<Vec<u64>> {
    check_schedule(bounds)?;
    if m < 1 {
        return Err(Error::InvalidParameters("m must be positive".into()));
    }
    bounds.par_iter().map(|&b| weighted_count(m, b)).collect()
}

fn weighted_count(m: u32, bound: u64) -> Result<u64> {
    let bm = BigInt::from(bound).pow(m);
    let qmax = integer_root_floor(bm.clone(), m + 2)
        .to_u64()
        .ok_or_else(|| Error::InvalidParameters("bound too large".into()))?;
    let e = m + 2;
    let mut total = 0u64;
    for x0 in 1..=qmax {
        for x1 in 1..=qmax {
            let d = x0.gcd(&x1);
            let x01 = BigInt::from(x0.max(x1)).pow(m);
            let primes: Vec<u64> = crate::arith::factorize_u64(d).iter().map(|&(p, _)| p).collect();
            let mut count = 0u64;
            // G = prod p^g_p with 0 <= g_p <= m - 1
            let mut g = vec![0u32; primes.len()];
            loop {
                let gv: u64 = primes.iter().zip(&g).map(|(&p, &k)| p.pow(k)).product();
                let x = integer_root_floor(&bm * BigInt::from(gv).pow(e), e);
                if x01 <= x {
                    let kmax = (x / BigInt::from(gv)).to_u64().expect("fits");
                    count += coprime_count(kmax, &primes);
                }
                let mut i = 0;
                loop {
                    if i == g.len() {
                        break;
                    }
                    g[i] += 1;
                    if g[i] < m {
                        break;
                    }
                    g[i] = 0;
                    i += 1;
                }
                if i == g.len() {
                    break;
                }
            }
            // signs of x1 and x2
            total += 4 * count;
        }
    }
    Ok(total)
}

/// #{1 <= k <= n : gcd(k, prod primes) = 1} by inclusion-exclusion.
fn coprime_count(n: u64, primes: &[u64]) -> u64 {
    let mut total: i64 = 0;
    for mask in 0u32..(1 << primes.len()) {
        let mut d = 1u64;
        for (i, &p) in primes.iter().enumerate() {
            if mask & (1 << i) != 0 {
                d = d.saturating_mul(p);
            }
        }
        let term = (n / d) as i64;
        total += if mask.count_ones() % 2 == 0 { term } else { -term };
    }
    total as u64
}

fn check_schedule(bounds: &[u64]) -> Result<()> {
    if bounds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameters(
            "bound schedule must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Explicit search box for the grid oracle: coordinate i runs over reduced
/// nonzero fractions a/b with |a| <= numerators[i], 1 <= b <= denominators[i].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridBox {
    pub numerators: Vec<u64>,
    pub denominators: Vec<u64>,
}

impl GridBox {
    pub fn uniform(dim: usize, numerator: u64, denominator: u64) -> Self {
        GridBox {
            numerators: vec![numerator; dim],
            denominators: vec![denominator; dim],
        }
    }

    pub fn doubled(&self) -> Self {
        GridBox {
            numerators: self.numerators.iter().map(|x| 2 * x).collect(),
            denominators: self.denominators.iter().map(|x| 2 * x).collect(),
        }
    }
}

fn fractions(num: u64, den: u64) -> Vec<Rational> {
    let mut out = Vec::new();
    for b in 1..=den as i64 {
        for a in -(num as i64)..=num as i64 {
            if a != 0 && a.gcd(&b) == 1 {
                out.push(Rational::new(a.into(), b.into()));
            }
        }
    }
    out
}

/// Heights of all torus points in the box (toric model), unfiltered.
pub fn torus_grid_heights(model: &HeightModel, bx: &GridBox) -> Result<Vec<ScaledHeight>> {
    if bx.numerators.len() != bx.denominators.len() {
        return Err(Error::DimensionMismatch {
            expected: bx.numerators.len(),
            found: bx.denominators.len(),
        });
    }
    let axes: Vec<Vec<Rational>> = bx
        .numerators
        .iter()
        .zip(&bx.denominators)
        .map(|(&n, &d)| fractions(n, d))
        .collect();
    if axes.iter().any(Vec::is_empty) {
        return Ok(Vec::new());
    }
    // parallel over the first axis
    axes[0]
        .par_iter()
        .map(|first| {
            let mut acc = Vec::new();
            let mut idx = vec![0usize; axes.len() - 1];
            loop {
                let mut coords = vec![first.clone()];
                coords.extend(idx.iter().enumerate().map(|(k, &i)| axes[k + 1][i].clone()));
                acc.push(model.torus_height(&TorusPoint::new(coords)?)?);
                let mut k = 0;
                loop {
                    if k == idx.len() {
                        return Ok(acc);
                    }
                    idx[k] += 1;
                    if idx[k] < axes[k + 1].len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
            }
        })
        .collect::<Result<Vec<Vec<_>>>>()
        .map(|v| v.into_iter().flatten().collect())
}

/// Exhaustive count of torus points in the box with height <= B.
pub fn torus_grid_enumerate(model: &HeightModel, bound: &Rational, bx: &GridBox) -> Result<u64> {
    Ok(torus_grid_heights(model, bx)?
        .iter()
        .filter(|h| h.at_most(bound))
        .count() as u64)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountSample {
    #[serde(with = "as_string")]
    pub bound: Rational,
    pub count: u64,
}

/// N(B) sampled along an increasing schedule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountCurve {
    pub samples: Vec<CountSample>,
    pub model_id: String,
}

impl CountCurve {
    pub fn new(model_id: impl Into<String>, samples: Vec<CountSample>) -> Result<Self> {
        if samples.windows(2).any(|w| w[0].bound >= w[1].bound) {
            return Err(Error::InvalidParameters(
                "curve bounds must be strictly increasing".into(),
            ));
        }
        if samples.windows(2).any(|w| w[0].count > w[1].count) {
            return Err(Error::InvalidParameters("curve counts must be nondecreasing".into()));
        }
        Ok(CountCurve {
            samples,
            model_id: model_id.into(),
        })
    }

    pub fn from_u64(model_id: impl Into<String>, bounds: &[u64], counts: &[u64]) -> Result<Self> {
        if bounds.len() != counts.len() {
            return Err(Error::ScheduleMismatch);
        }
        CountCurve::new(
            model_id,
            bounds
                .iter()
                .zip(counts)
                .map(|(&b, &n)| CountSample {
                    bound: Rational::from_integer(b.into()),
                    count: n,
                })
                .collect(),
        )
    }

    pub fn bounds(&self) -> Vec<Rational> {
        self.samples.iter().map(|s| s.bound.clone()).collect()
    }
}

/// Pointwise N_sub/N_whole; `None` marks 0/0.
pub fn saturation_ratios(sub: &CountCurve, whole: &CountCurve) -> Result<Vec<(Rational, Option<f64>)>> {
    if sub.bounds() != whole.bounds() {
        return Err(Error::ScheduleMismatch);
    }
    Ok(sub
        .samples
        .iter()
        .zip(&whole.samples)
        .map(|(s, w)| {
            let r = if w.count == 0 {
                if s.count == 0 {
                    None
                } else {
                    Some(f64::INFINITY)
                }
            } else {
                Some(s.count as f64 / w.count as f64)
            };
            (s.bound.clone(), r)
        })
        .collect())
}

/// Geometric schedule of `count` integer bounds from `lo` to `hi`, deduplicated.
pub fn geometric_schedule(lo: u64, hi: u64, count: usize) -> Vec<u64> {
    if count <= 1 || lo >= hi {
        return vec![hi.max(lo)];
    }
    let r = (hi as f64 / lo as f64).powf(1.0 / (count - 1) as f64);
    let mut out: Vec<u64> = (0..count)
        .map(|i| (lo as f64 * r.powi(i as i32)).round() as u64)
        .collect();
    *out.last_mut().expect("non-empty") = hi;
    out.dedup();
    out
}

/// sum of counts[h] for h <= B, for each B in the schedule.
pub fn cumulative_at(counts: &[u64], bounds: &[u64]) -> Vec<u64> {
    let mut prefix = Vec::with_capacity(counts.len());
    let mut s = 0u64;
    for &c in counts {
        s += c;
        prefix.push(s);
    }
    bounds
        .iter()
        .map(|&b| prefix[(b as usize).min(prefix.len() - 1)])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::rational::int;
    use crate::toric::{anticanonical_pl, Fan};

    #[test]
    fn projective_small_counts() {
        assert_eq!(enumerate_projective(1, 1).unwrap(), BigInt::from(4));
        assert_eq!(enumerate_projective(3, 0).unwrap(), BigInt::zero());
        for n in 1..=3 {
            for b in 0..=6 {
                assert_eq!(
                    enumerate_projective(n, b).unwrap(),
                    BigInt::from(projective_points(n, b).len())
                );
            }
        }
    }

    #[test]
    fn cubic_small_counts() {
        assert_eq!(enumerate_cubic_surface_torus(1), 4);
        let phi = anticanonical_pl(&Fan::cubic_xyz_u3().unwrap()).unwrap();
        let model = HeightModel::toric(&phi).unwrap();
        let grid = torus_grid_enumerate(&model, &int(2), &GridBox::uniform(2, 8, 8)).unwrap();
        assert_eq!(enumerate_cubic_surface_torus(2), grid);
    }

    #[test]
    fn weighted_height_one() {
        // B = 1: only the torsion-like points (1 : ±1 : ±1)
        for m in 2..=4 {
            let n = enumerate_weighted_torus(m, &[1]).unwrap();
            assert_eq!(n, vec![4]);
        }
    }

    #[test]
    fn weighted_closed_form_matches_sweep() {
        for (m, top) in [(1u32, 150u64), (2, 150), (3, 60), (4, 30)] {
            let bounds = [1, 2, 5, 17, top];
            assert_eq!(
                enumerate_weighted_torus(m, &bounds).unwrap(),
                enumerate_weighted_torus_explicit(m, &bounds).unwrap(),
                "m = {m}"
            );
        }
    }

    #[test]
    fn curves_and_ratios() {
        let c = CountCurve::from_u64("x", &[1, 2, 3], &[1, 1, 4]).unwrap();
        assert!(CountCurve::from_u64("x", &[1, 1], &[1, 1]).is_err());
        assert!(CountCurve::from_u64("x", &[1, 2], &[3, 1]).is_err());
        let r = saturation_ratios(&c, &c).unwrap();
        assert!(r.iter().all(|(_, x)| *x == Some(1.0)));
        let z = CountCurve::from_u64("z", &[1, 2, 3], &[0, 0, 0]).unwrap();
        assert!(saturation_ratios(&z, &c).unwrap().iter().all(|(_, x)| *x == Some(0.0)));
        assert_eq!(saturation_ratios(&z, &z).unwrap()[0].1, None);
        let other = CountCurve::from_u64("y", &[1, 2, 4], &[1, 1, 4]).unwrap();
        assert!(matches!(saturation_ratios(&c, &other), Err(Error::ScheduleMismatch)));
        assert_eq!(geometric_schedule(10, 1000, 3), vec![10, 100, 1000]);
    }
}
