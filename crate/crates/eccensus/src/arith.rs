//! Integer and multiplicative-function primitives: factorization,
//! deterministic primality, Kronecker symbols, segmented sieves, and the
//! exact rational type that carries every weighted count.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

/// Arbitrary-precision fraction in lowest terms with positive denominator.
///
/// `num_rational::BigRational` already maintains both invariants
/// (gcd(|num|, den) = 1 and den >= 1) after every operation.
pub type Rational = num_rational::BigRational;

/// Rational from a signed numerator/denominator pair.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Rational from an integer.
pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat_i128(num: i128, den: i128) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Nearest f64; panics only if the value is astronomically out of range.
pub fn rational_to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().expect("rational exceeds f64 range")
}

/// Sums rationals by pairwise tree reduction.
///
/// Keeps the operand sizes balanced, which matters when adding 1e5 terms
/// whose common denominator has thousands of digits.
pub fn pairwise_sum(terms: &mut Vec<Rational>) -> Rational {
    if terms.is_empty() {
        return Rational::zero();
    }
    let mut len = terms.len();
    while len > 1 {
        let half = len / 2;
        for i in 0..half {
            let hi = std::mem::replace(&mut terms[len - 1 - i], Rational::zero());
            let t = std::mem::replace(&mut terms[i], Rational::zero());
            terms[i] = t + hi;
        }
        len -= half;
    }
    terms.truncate(1);
    terms.pop().unwrap()
}

pub fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn powmod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mulmod(acc, base, m);
        }
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    acc
}

pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        0
    } else {
        a / gcd(a, b) * b
    }
}

/// Integer square root.
pub fn isqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut x = (n as f64).sqrt() as u64;
    while x > 0 && x.checked_mul(x).map_or(true, |s| s > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).map_or(false, |s| s <= n) {
        x += 1;
    }
    x
}

/// Deterministic Miller-Rabin, valid for all n < 2^64.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d & 1 == 0 {
        d >>= 1;
        s += 1;
    }
    // This witness set is deterministic for n < 2^64 (Sorenson-Webster).
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Prime-power factorization, sorted by prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn value(&self) -> u64 {
        self.factors
            .iter()
            .fold(1u64, |acc, &(p, e)| acc * p.pow(e))
    }

    /// All positive divisors, ascending.
    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for &(p, e) in &self.factors {
            let prev = divs.clone();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                divs.extend(prev.iter().map(|d| d * pk));
            }
        }
        divs.sort_unstable();
        divs
    }

    pub fn distinct_primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }
}

const TRIAL_LIMIT: u64 = 1_000_000;

fn pollard_rho_brent(n: u64) -> u64 {
    // n is odd, composite, with no factor below TRIAL_LIMIT.
    let mut c = 1u64;
    loop {
        let mut x = 2u64;
        let mut y = 2u64;
        let mut d = 1u64;
        let mut count = 0u64;
        while d == 1 {
            x = (mulmod(x, x, n) + c) % n;
            y = (mulmod(y, y, n) + c) % n;
            y = (mulmod(y, y, n) + c) % n;
            d = gcd(x.abs_diff(y), n);
            count += 1;
            if count > n {
                break;
            }
        }
        if d != n && d != 1 {
            return d;
        }
        c += 1;
    }
}

/// Factors `n >= 1` by trial division to 10^6 followed by Pollard rho.
///
/// `n = 1` yields the empty product.
pub fn factorize(n: u64) -> Factorization {
    assert!(n >= 1, "factorize requires n >= 1");
    let mut factors: Vec<(u64, u32)> = Vec::new();
    let mut rem = n;
    let push = |p: u64, e: u32, factors: &mut Vec<(u64, u32)>| {
        factors.push((p, e));
    };
    for p in std::iter::once(2).chain((3..TRIAL_LIMIT).step_by(2)) {
        if p * p > rem {
            break;
        }
        if rem % p == 0 {
            let mut e = 0;
            while rem % p == 0 {
                rem /= p;
                e += 1;
            }
            push(p, e, &mut factors);
        }
    }
    if rem > 1 {
        if is_prime(rem) {
            push(rem, 1, &mut factors);
        } else {
            // Two large primes, or a square of one.
            let d = pollard_rho_brent(rem);
            let (a, b) = (d, rem / d);
            let mut extra: Vec<u64> = Vec::new();
            for q in [a, b] {
                if is_prime(q) {
                    extra.push(q);
                } else {
                    let e = pollard_rho_brent(q);
                    extra.push(e);
                    extra.push(q / e);
                }
            }
            extra.sort_unstable();
            let mut i = 0;
            while i < extra.len() {
                let p = extra[i];
                let mut e = 0;
                while i < extra.len() && extra[i] == p {
                    e += 1;
                    i += 1;
                }
                push(p, e, &mut factors);
            }
        }
    }
    factors.sort_unstable();
    Factorization { factors }
}

/// The exponent of the prime `ell` in `n`.
pub fn valuation(n: u64, ell: u64) -> u32 {
    assert!(is_prime(ell), "valuation requires a prime ell");
    assert!(n >= 1);
    let mut v = 0;
    let mut n = n;
    while n % ell == 0 {
        n /= ell;
        v += 1;
    }
    v
}

/// The ell-free part of `n`: n / ell^valuation(n, ell).
pub fn ell_free_part(n: u64, ell: u64) -> u64 {
    assert!(is_prime(ell), "ell_free_part requires a prime ell");
    assert!(n >= 1);
    let mut n = n;
    while n % ell == 0 {
        n /= ell;
    }
    n
}

pub fn euler_phi(n: u64) -> u64 {
    assert!(n >= 1);
    factorize(n)
        .factors
        .iter()
        .fold(1u64, |acc, &(p, e)| acc * p.pow(e - 1) * (p - 1))
}

pub fn moebius(n: u64) -> i32 {
    assert!(n >= 1);
    let f = factorize(n);
    if f.factors.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.factors.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// The Kronecker symbol (a/n), fully extended.
///
/// Conventions: (a/1) = 1; (a/-1) = sign of a (1 for a >= 0);
/// (a/2) is the 8-periodic rule; (a/0) = 1 if a = +-1 and 0 otherwise.
pub fn kronecker(a: i64, n: i64) -> i32 {
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut result = 1i32;
    let mut n = n;
    if n < 0 {
        n = -n;
        if a < 0 {
            result = -result;
        }
    }
    let mut a = a;
    // factor out 2s of n
    let mut twos = 0u32;
    while n % 2 == 0 {
        n /= 2;
        twos += 1;
    }
    if twos > 0 {
        if a % 2 == 0 {
            return 0;
        }
        // (a/2) = +1 for a = +-1 mod 8, -1 for a = +-3 mod 8
        let r = a.rem_euclid(8);
        if (r == 3 || r == 5) && twos % 2 == 1 {
            result = -result;
        }
    }
    // now n is odd and positive; Jacobi
    a = a.rem_euclid(n);
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// All primes up to and including `n`.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return vec![];
    }
    let n = n as usize;
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
    sieve
        .iter()
        .enumerate()
        .filter_map(|(i, &b)| if b { Some(i as u64) } else { None })
        .collect()
}

/// Exactly the primes p with `lo < p < hi`, via a segmented sieve.
pub fn primes_in_interval(lo: u64, hi: u64) -> Vec<u64> {
    assert!(lo <= hi);
    if hi <= 2 {
        return vec![];
    }
    let start = lo + 1;
    let end = hi - 1; // inclusive
    if start > end {
        return vec![];
    }
    let base = primes_up_to(isqrt(end));
    let mut out = Vec::new();
    const SEG: u64 = 1 << 18;
    let mut seg_lo = start;
    while seg_lo <= end {
        let seg_hi = (seg_lo + SEG - 1).min(end);
        let len = (seg_hi - seg_lo + 1) as usize;
        let mut flags = vec![true; len];
        for &p in &base {
            let mut first = ((seg_lo + p - 1) / p) * p;
            if first < p * p {
                first = p * p;
            }
            let mut j = first;
            while j <= seg_hi {
                flags[(j - seg_lo) as usize] = false;
                j += p;
            }
        }
        for (i, &f) in flags.iter().enumerate() {
            let v = seg_lo + i as u64;
            if f && v >= 2 {
                out.push(v);
            }
        }
        seg_lo = seg_hi + 1;
    }
    out
}
