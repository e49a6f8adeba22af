#![allow(dead_code)]

use heightcount::densities::{denef_density, RigidDivisorData};
use heightcount::lattice::rational::{int, to_f64, Rational};
use heightcount::toric::{strata_counts_relative, Fan, PLFunction};
use num_bigint::BigInt;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Monte Carlo estimate of 2^dim * integral of exp(-phi) over R^dim for a
/// convex PL function (phi = max of its cone forms), by importance sampling
/// from a product of Laplace laws with rate `rate`. Returns (mean, std error).
pub fn monte_carlo_tau_inf(phi: &PLFunction, samples: usize, rate: f64, seed: u64) -> (f64, f64) {
    let forms: Vec<Vec<f64>> = phi
        .cone_forms()
        .iter()
        .map(|m| m.iter().map(to_f64).collect())
        .collect();
    let dim = phi.fan().dim();
    let chunks = 64usize;
    let per = samples / chunks;
    let norm = (2.0 / rate).powi(dim as i32) * 2f64.powi(dim as i32);
    let (s, s2) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(c as u64));
            let mut y = vec![0.0; dim];
            let (mut s, mut s2) = (0.0f64, 0.0f64);
            for _ in 0..per {
                let mut l1 = 0.0;
                for yi in y.iter_mut() {
                    let u: f64 = rng.gen::<f64>() - 0.5;
                    let mag = -(1.0 - 2.0 * u.abs()).ln() / rate;
                    *yi = if u < 0.0 { -mag } else { mag };
                    l1 += mag;
                }
                let phi_y = forms
                    .iter()
                    .map(|m| m.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>())
                    .fold(f64::NEG_INFINITY, f64::max);
                let w = norm * (-phi_y + rate * l1).exp();
                s += w;
                s2 += w * w;
            }
            (s, s2)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = (per * chunks) as f64;
    let mean = s / n;
    let var = (s2 / n - mean * mean).max(0.0);
    (mean, (var / n).sqrt())
}

fn rpow(p: u64, e: i64) -> Rational {
    let m = Rational::from_integer(BigInt::from(p).pow(e.unsigned_abs() as u32));
    if e >= 0 {
        m
    } else {
        m.recip()
    }
}

/// Average of |x|_p^r over the residue class x = 0 mod p^k.
fn deep_class_average(p: u64, k: u32, r: i64) -> Rational {
    rpow(p, -(k as i64) * r) * (int(1) - rpow(p, -1)) / (int(1) - rpow(p, -(r + 1)))
}

/// Integral over P^n(Z_p) of prod_j |x_j|^(r_j) in each affine chart, summed
/// over the classes of P^n(Z/p^k) with measure p^(-nk). Exact: the classes
/// where a rigid coordinate vanishes mod p^k use the closed-form average.
pub fn denef_oracle(n: usize, p: u64, k: u32, mults: &[Option<i64>]) -> Rational {
    let pk = p.pow(k);
    let mut total = Rational::from_integer(0.into());
    // charts by the first coordinate that is a unit
    for i in 0..=n {
        let mut ranges: Vec<Vec<u64>> = Vec::new();
        for j in 0..=n {
            ranges.push(if j < i {
                (0..pk).step_by(p as usize).collect()
            } else if j == i {
                vec![1]
            } else {
                (0..pk).collect()
            });
        }
        let mut idx = vec![0usize; n + 1];
        'outer: loop {
            let mut w = Rational::one();
            for j in 0..=n {
                if let Some(r) = mults[j] {
                    let x = ranges[j][idx[j]];
                    if x == 0 {
                        w *= deep_class_average(p, k, r);
                    } else {
                        let mut v = 0;
                        let mut y = x;
                        while y.is_multiple_of(p) {
                            y /= p;
                            v += 1;
                        }
                        w *= rpow(p, -v * r);
                    }
                }
            }
            total += w;
            for j in 0..=n {
                idx[j] += 1;
                if idx[j] < ranges[j].len() {
                    continue 'outer;
                }
                idx[j] = 0;
            }
            break;
        }
    }
    total * rpow(p, -((n as i64) * k as i64))
}

pub fn denef_formula(n: usize, p: u64, mults: &[Option<i64>]) -> Rational {
    let fan = Fan::projective_space(n).unwrap();
    let comps: Vec<(usize, Rational)> = mults
        .iter()
        .enumerate()
        .filter_map(|(j, r)| r.map(|r| (j, int(r))))
        .collect();
    let rigid = RigidDivisorData::split(&comps);
    let strata = strata_counts_relative(&fan, &rigid.rays(), p);
    denef_density(&strata, p, n, &rigid).unwrap()
}
