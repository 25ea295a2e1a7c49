use qwitness_core::number_theory::{
    factorize, is_prime, isqrt, mobius, mobius_sieve, prime_pi, primes_upto, smallest_prime_factor, squarefree_support,
};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SIEVE_N: usize = 100_000;
const PRIME_N: usize = 1_000_000;

fn eratosthenes(n: usize) -> Vec<bool> {
    let mut composite = vec![false; n + 1];
    let mut i = 2;
    while i * i <= n {
        if !composite[i] {
            (i * i..=n).step_by(i).for_each(|j| composite[j] = true);
        }
        i += 1;
    }
    (0..=n).map(|k| k >= 2 && !composite[k]).collect()
}

fn trial_mobius(mut k: u64) -> i8 {
    let mut sign = 1;
    let mut d = 2;
    while d * d <= k {
        if k.is_multiple_of(d) {
            k /= d;
            if k.is_multiple_of(d) {
                return 0;
            }
            sign = -sign;
        }
        d += 1;
    }
    if k > 1 {
        sign = -sign;
    }
    sign
}

#[test]
fn mobius_three_ways_agree() {
    let sieve = mobius_sieve(SIEVE_N);
    for k in 1..=SIEVE_N as u64 {
        let direct = mobius(k).unwrap().as_i8();
        assert_eq!(direct, sieve[k as usize], "k={k}");
        assert_eq!(direct, trial_mobius(k), "k={k}");
    }
    assert!(mobius(0).is_err());
}

#[test]
fn primality_matches_eratosthenes() {
    let table = eratosthenes(PRIME_N);
    for k in 0..=PRIME_N as u64 {
        assert_eq!(is_prime(k), table[k as usize], "k={k}");
    }
    assert_eq!(prime_pi(PRIME_N as u64), 78_498);
    let listed = primes_upto(10_000);
    let expected: Vec<u64> = (0..=10_000u64).filter(|&k| table[k as usize]).collect();
    assert_eq!(listed, expected);
}

#[test]
fn random_u64_against_independent_miller_rabin() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    for _ in 0..10_000 {
        let k: u64 = rng.random();
        assert_eq!(is_prime(k), primal_check::miller_rabin(k), "k={k}");
    }
    // strong pseudoprimes to several small bases
    for k in [3_215_031_751u64, 2_152_302_898_747, 3_474_749_660_383, 341_550_071_728_321, 3_825_123_056_546_413_051] {
        assert!(!is_prime(k), "k={k}");
    }
    assert!(is_prime(18_446_744_073_709_551_557));
}

#[test]
fn factorizations_multiply_back() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut values: Vec<u64> = (1..=5_000).collect();
    values.extend((0..2_000).map(|_| rng.random_range(1..1u64 << 40)));
    for n in values {
        let f = factorize(n).unwrap();
        let product: u64 = f.iter().map(|&(p, e)| p.pow(e)).product();
        assert_eq!(product, n);
        assert!(f.iter().all(|&(p, _)| is_prime(p)));
        assert!(f.windows(2).all(|w| w[0].0 < w[1].0));
    }
}

#[test]
fn smallest_factor_of_composites_is_below_root() {
    for s in 4..=SIEVE_N as u64 {
        if !is_prime(s) {
            let p = smallest_prime_factor(s).unwrap();
            assert!(p <= isqrt(s) && s % p == 0, "s={s}");
        }
    }
}

#[test]
fn squarefree_support_matches_mobius() {
    let support = squarefree_support(2_000).unwrap();
    let expected: Vec<u64> = (1..).filter(|&k| trial_mobius(k) != 0).take(2_000).collect();
    assert_eq!(support, expected);
}

#[test]
fn isqrt_is_floor_root() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10_000 {
        let n: u64 = rng.random();
        let r = isqrt(n) as u128;
        assert!(r * r <= n as u128 && (r + 1) * (r + 1) > n as u128, "n={n}");
    }
    assert_eq!(isqrt(u64::MAX), u32::MAX as u64);
}
