//! Classical arithmetic kernel behind every oracle predicate.
//!
//! Primality is exact over the whole `u64` range (deterministic Miller-Rabin
//! with a fixed base set). Point Möbius queries factor by trial division;
//! range queries use a linear sieve. The two paths are cross-checked in tests.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Trial division bound used by point factorization. Cofactors left after
/// dividing out every prime up to this bound have all prime factors above it,
/// so a cofactor below `FACTOR_LIMIT^3` has at most two prime factors.
const FACTOR_LIMIT: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumberTheoryError {
    #[error("mobius is undefined at 0")]
    MobiusOfZero,
    #[error("division by zero: witness must be at least 1")]
    ZeroDivisor,
    #[error("recurrence multiplier must be at least 1, got {0}")]
    BadMultiplier(u64),
    #[error("recurrence bound must be at least 1")]
    BadBound,
    #[error("{0} cannot be factored by trial division (cofactor {1} has three or more large prime factors)")]
    FactorizationInfeasible(u64, u64),
    #[error("squarefree support length must be at least 1")]
    EmptySupport,
}

/// Value of the Möbius function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MobiusValue {
    MinusOne,
    Zero,
    PlusOne,
}

impl MobiusValue {
    pub fn as_i8(self) -> i8 {
        match self {
            MobiusValue::MinusOne => -1,
            MobiusValue::Zero => 0,
            MobiusValue::PlusOne => 1,
        }
    }

    pub fn from_i8(v: i8) -> Option<Self> {
        match v {
            -1 => Some(MobiusValue::MinusOne),
            0 => Some(MobiusValue::Zero),
            1 => Some(MobiusValue::PlusOne),
            _ => None,
        }
    }

    pub fn is_squarefree(self) -> bool {
        self != MobiusValue::Zero
    }
}

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic primality test, exact for every `u64`.
///
/// The first twelve primes as Miller-Rabin bases are sufficient below
/// 3.3 * 10^24, which covers the full 64-bit range.
pub fn is_prime(k: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if k < 2 {
        return false;
    }
    for &p in &BASES {
        if k.is_multiple_of(p) {
            return k == p;
        }
    }
    if k < 41 * 41 {
        return true;
    }
    let s = (k - 1).trailing_zeros();
    let d = (k - 1) >> s;
    'bases: for &a in &BASES {
        let mut x = pow_mod(a, d, k);
        if x == 1 || x == k - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, k);
            if x == k - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// Integer square root, floor.
pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

/// Prime factorization as `(prime, exponent)` pairs, ascending.
///
/// Fails only when the cofactor after trial division up to `FACTOR_LIMIT` is a
/// composite that is neither a square nor provably a product of two primes.
pub fn factorize(mut n: u64) -> Result<Vec<(u64, u32)>, NumberTheoryError> {
    let original = n;
    let mut out = Vec::new();
    if n < 2 {
        return Ok(out);
    }
    let mut push = |p: u64, n: &mut u64| {
        let mut e = 0;
        while (*n).is_multiple_of(p) {
            *n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    };
    push(2, &mut n);
    push(3, &mut n);
    let mut d = 5u64;
    while d <= FACTOR_LIMIT && d * d <= n {
        push(d, &mut n);
        push(d + 2, &mut n);
        d += 6;
    }
    if n == 1 {
        return Ok(out);
    }
    if is_prime(n) {
        out.push((n, 1));
        return Ok(out);
    }
    // Every prime factor of n now exceeds FACTOR_LIMIT.
    let r = isqrt(n);
    if r * r == n && is_prime(r) {
        out.push((r, 2));
        return Ok(out);
    }
    Err(NumberTheoryError::FactorizationInfeasible(original, n))
}

/// Möbius function at a single point, by factorization.
pub fn mobius(k: u64) -> Result<MobiusValue, NumberTheoryError> {
    if k == 0 {
        return Err(NumberTheoryError::MobiusOfZero);
    }
    match factorize(k) {
        Ok(factors) => Ok(sign_of(&factors, 0)),
        // A composite cofactor whose prime factors all exceed FACTOR_LIMIT and
        // which is below FACTOR_LIMIT^3 is p*q or p^2; p^2 was ruled out.
        Err(NumberTheoryError::FactorizationInfeasible(orig, cof)) if cof < FACTOR_LIMIT.pow(3) => {
            let head = factorize(orig / cof)?;
            Ok(sign_of(&head, 2))
        }
        Err(e) => Err(e),
    }
}

fn sign_of(factors: &[(u64, u32)], extra_primes: usize) -> MobiusValue {
    if factors.iter().any(|&(_, e)| e > 1) {
        return MobiusValue::Zero;
    }
    if (factors.len() + extra_primes).is_multiple_of(2) {
        MobiusValue::PlusOne
    } else {
        MobiusValue::MinusOne
    }
}

/// Möbius values for `0..=n` by linear sieve (index 0 holds 0).
pub fn mobius_sieve(n: usize) -> Vec<i8> {
    let mut mu = vec![0i8; n + 1];
    if n == 0 {
        return mu;
    }
    mu[1] = 1;
    let mut is_composite = vec![false; n + 1];
    let mut primes: Vec<usize> = Vec::new();
    for i in 2..=n {
        if !is_composite[i] {
            primes.push(i);
            mu[i] = -1;
        }
        for &p in &primes {
            let ip = i * p;
            if ip > n {
                break;
            }
            is_composite[ip] = true;
            if i % p == 0 {
                mu[ip] = 0;
                break;
            }
            mu[ip] = -mu[i];
        }
    }
    mu
}

/// All primes `p` with `2 <= p <= x`, ascending.
pub fn primes_upto(x: u64) -> Vec<u64> {
    if x < 2 {
        return Vec::new();
    }
    let n = usize::try_from(x).expect("sieve bound exceeds address space");
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    sieve.iter().enumerate().filter_map(|(v, &p)| p.then_some(v as u64)).collect()
}

/// Prime counting function.
pub fn prime_pi(x: u64) -> u64 {
    primes_upto(x).len() as u64
}

/// Whether `w` divides `s` exactly.
pub fn is_integer_ratio(s: u64, w: u64) -> Result<bool, NumberTheoryError> {
    if w == 0 {
        return Err(NumberTheoryError::ZeroDivisor);
    }
    Ok(s.is_multiple_of(w))
}

/// Members of the orbit `x_{k+1} = p x_k + q` from `x_0 = 1` that do not
/// exceed `bound`, ascending.
///
/// With `p >= 1` the orbit is non-decreasing, and it is constant only for
/// `p = 1, q = 0`; that fixed point yields `[1]`. An intermediate that would
/// overflow `u64` is necessarily above `bound`, so it ends the orbit.
pub fn recurrence_orbit(p: u64, q: u64, bound: u64) -> Result<Vec<u64>, NumberTheoryError> {
    if p == 0 {
        return Err(NumberTheoryError::BadMultiplier(p));
    }
    if bound == 0 {
        return Err(NumberTheoryError::BadBound);
    }
    let mut out = vec![1u64];
    let mut x = 1u64;
    while let Some(next) = x.checked_mul(p).and_then(|v| v.checked_add(q)) {
        if next == x || next > bound {
            break;
        }
        out.push(next);
        x = next;
    }
    Ok(out)
}

/// Smallest prime factor of `n >= 2`.
pub fn smallest_prime_factor(n: u64) -> Option<u64> {
    if n < 2 {
        return None;
    }
    if n.is_multiple_of(2) {
        return Some(2);
    }
    let mut d = 3u64;
    while d.checked_mul(d).is_some_and(|sq| sq <= n) {
        if n.is_multiple_of(d) {
            return Some(d);
        }
        d += 2;
    }
    Some(n)
}

/// The first `n` positive integers whose Möbius value is non-zero.
pub fn squarefree_support(n: u64) -> Result<Vec<u64>, NumberTheoryError> {
    if n == 0 {
        return Err(NumberTheoryError::EmptySupport);
    }
    let want = n as usize;
    // squarefree density is 6/pi^2 ~ 0.608; start a little above n / 0.6
    let mut limit = want + want * 2 / 3 + 16;
    loop {
        let mu = mobius_sieve(limit);
        let found: Vec<u64> = (1..=limit).filter(|&k| mu[k] != 0).take(want).map(|k| k as u64).collect();
        if found.len() == want {
            return Ok(found);
        }
        limit *= 2;
    }
}
