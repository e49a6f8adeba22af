//! Elementary number theory on machine and big integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Primes up to and including `n` (sieve of Eratosthenes).
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// spf[k] = smallest prime factor of k for 2 <= k <= n (0 and 1 map to 0).
pub fn smallest_prime_factors(n: usize) -> Vec<u32> {
    let mut spf = vec![0u32; n + 1];
    for i in 2..=n {
        if spf[i] == 0 {
            let mut j = i;
            while j <= n {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    spf
}

/// Factorization of `k` using a precomputed smallest-prime-factor table.
pub fn factor_with_spf(mut k: usize, spf: &[u32]) -> Vec<(u64, u32)> {
    let mut out: Vec<(u64, u32)> = Vec::new();
    while k > 1 {
        let p = spf[k] as usize;
        let mut e = 0;
        while k.is_multiple_of(p) {
            k /= p;
            e += 1;
        }
        out.push((p as u64, e));
    }
    out
}

/// Möbius function on 0..=n (mu[0] unused, set to 0).
pub fn mobius_up_to(n: usize) -> Vec<i8> {
    let spf = smallest_prime_factors(n);
    let mut mu = vec![0i8; n + 1];
    if n >= 1 {
        mu[1] = 1;
    }
    for k in 2..=n {
        let p = spf[k] as usize;
        let rest = k / p;
        mu[k] = if rest.is_multiple_of(p) { 0 } else { -mu[rest] };
    }
    mu
}

/// Trial-division factorization of |n|; n = 0 yields an empty list.
pub fn factorize(n: &BigInt) -> Vec<(BigInt, u32)> {
    let mut n = n.abs();
    let mut out = Vec::new();
    if n.is_zero() {
        return out;
    }
    if let Some(small) = n.to_u64() {
        return factorize_u64(small)
            .into_iter()
            .map(|(p, e)| (BigInt::from(p), e))
            .collect();
    }
    let mut p = BigInt::from(2);
    while &p * &p <= n {
        let mut e = 0;
        while (&n % &p).is_zero() {
            n /= &p;
            e += 1;
        }
        if e > 0 {
            out.push((p.clone(), e));
        }
        p += if p == BigInt::from(2) { 1 } else { 2 };
    }
    if !n.is_one() {
        out.push((n, 1));
    }
    out
}

pub fn factorize_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// p-adic valuation of a nonzero integer.
pub fn valuation(n: &BigInt, p: &BigInt) -> u32 {
    debug_assert!(!n.is_zero());
    let mut n = n.clone();
    let mut e = 0;
    loop {
        let (q, r) = n.div_rem(p);
        if !r.is_zero() {
            return e;
        }
        n = q;
        e += 1;
    }
}

pub fn gcd_all(v: &[BigInt]) -> BigInt {
    v.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sieve_and_mobius() {
        assert_eq!(primes_up_to(30), vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert_eq!(primes_up_to(1), Vec::<u64>::new());
        let mu = mobius_up_to(12);
        assert_eq!(&mu[1..], &[1, -1, -1, 0, -1, 1, -1, 0, 0, 1, -1, 0]);
    }

    #[test]
    fn factorizations_agree() {
        let spf = smallest_prime_factors(1000);
        for k in 2..1000usize {
            let a = factor_with_spf(k, &spf);
            let b = factorize_u64(k as u64);
            assert_eq!(a, b);
        }
        let big = BigInt::from(2u64).pow(70) * BigInt::from(3);
        assert_eq!(factorize(&big), vec![(BigInt::from(2), 70), (BigInt::from(3), 1)]);
        assert_eq!(valuation(&BigInt::from(-48), &BigInt::from(2)), 4);
    }
}
