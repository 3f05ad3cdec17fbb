//! Deterministic integer utilities.
//!
//! Everything here works on exact `u64` values. Products that could leave the
//! machine-word range are checked and reported as [`Error::Capacity`] rather
//! than wrapped.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest argument accepted by [`sieve_primes`].
pub const SIEVE_LIMIT_MAX: u64 = 1 << 32;

/// Default cap on the number of values [`enumerate_smooth`] will materialize.
pub const ENUMERATION_BUDGET: usize = 50_000_000;

/// All primes `≤ limit`, ascending.
///
/// Odd-only bit sieve, so the memory footprint is `limit / 16` bytes.
pub fn sieve_primes(limit: u64) -> Result<Vec<u64>> {
    if limit > SIEVE_LIMIT_MAX {
        return Err(Error::capacity(format!(
            "sieve limit {limit} exceeds {SIEVE_LIMIT_MAX}"
        )));
    }
    if limit < 2 {
        return Ok(Vec::new());
    }
    // bit i stands for the odd number 2i + 1
    let odd_count = (limit + 1) / 2;
    let mut composite = vec![0u64; (odd_count as usize + 63) / 64];
    let mut i = 1u64;
    while (2 * i + 1) * (2 * i + 1) <= limit {
        if composite[(i / 64) as usize] >> (i % 64) & 1 == 0 {
            let p = 2 * i + 1;
            let mut j = (p * p) / 2;
            while j < odd_count {
                composite[(j / 64) as usize] |= 1 << (j % 64);
                j += p;
            }
        }
        i += 1;
    }

    let mut primes = Vec::with_capacity(prime_count_estimate(limit));
    primes.push(2);
    for i in 1..odd_count {
        if composite[(i / 64) as usize] >> (i % 64) & 1 == 0 {
            primes.push(2 * i + 1);
        }
    }
    Ok(primes)
}

fn prime_count_estimate(limit: u64) -> usize {
    let n = limit as f64;
    if n < 17.0 {
        return 8;
    }
    (1.26 * n / n.ln()) as usize
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
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

/// Deterministic primality test for the full `u64` range.
///
/// Trial division for small inputs, then Miller-Rabin with the first twelve
/// prime bases, which has no pseudoprimes below 3.3 · 10^24.
pub fn is_prime(n: u64) -> bool {
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for p in SMALL {
        if n % p == 0 {
            return n == p;
        }
    }
    if n < 41 * 41 {
        return true;
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Largest prime `≤ n`, if any.
pub fn prev_prime(n: u64) -> Option<u64> {
    (2..=n).rev().find(|&k| is_prime(k))
}

/// One factor `p^a` of a factorization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimePower {
    pub prime: u64,
    pub exponent: u32,
}

impl PrimePower {
    pub fn value(&self) -> u64 {
        self.prime.pow(self.exponent)
    }
}

/// Prime-power decomposition of `n`, with parts sorted by ascending `p^a`.
///
/// The order is by prime-power value rather than by prime: for `60` the parts
/// are `3, 4, 5`. This is the ordering the CRT chain in
/// [`crate::construction`] walks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    n: u64,
    parts: Vec<PrimePower>,
}

impl Factorization {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn parts(&self) -> &[PrimePower] {
        &self.parts
    }

    /// Distinct primes, ascending.
    pub fn primes(&self) -> Vec<u64> {
        let mut ps: Vec<u64> = self.parts.iter().map(|pp| pp.prime).collect();
        ps.sort_unstable();
        ps
    }

    pub fn omega(&self) -> usize {
        self.parts.len()
    }

    pub fn is_squarefree(&self) -> bool {
        self.parts.iter().all(|pp| pp.exponent == 1)
    }

    pub fn exponent_of(&self, p: u64) -> u32 {
        self.parts
            .iter()
            .find(|pp| pp.prime == p)
            .map_or(0, |pp| pp.exponent)
    }
}

impl fmt::Display for Factorization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return write!(f, "1");
        }
        for (i, pp) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, " · ")?;
            }
            if pp.exponent == 1 {
                write!(f, "{}", pp.prime)?;
            } else {
                write!(f, "{}^{}", pp.prime, pp.exponent)?;
            }
        }
        Ok(())
    }
}

/// Factor `n ≥ 1` by trial division.
///
/// # Panics
///
/// Panics on `n == 0`.
pub fn factorize(n: u64) -> Factorization {
    assert!(n >= 1, "cannot factor zero");
    let mut parts = Vec::new();
    let mut rest = n;
    let mut push = |p: u64, rest: &mut u64| {
        let mut e = 0;
        while *rest % p == 0 {
            *rest /= p;
            e += 1;
        }
        if e > 0 {
            parts.push(PrimePower { prime: p, exponent: e });
        }
    };
    push(2, &mut rest);
    push(3, &mut rest);
    let mut d = 5u64;
    while d <= rest / d {
        push(d, &mut rest);
        push(d + 2, &mut rest);
        d += 6;
    }
    if rest > 1 {
        parts.push(PrimePower { prime: rest, exponent: 1 });
    }
    parts.sort_unstable_by_key(PrimePower::value);
    Factorization { n, parts }
}

/// Number of distinct primes dividing `n`.
pub fn omega(n: u64) -> usize {
    factorize(n).omega()
}

/// Binary gcd. `gcd(0, 0) == 0`.
pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

pub fn lcm(a: u64, b: u64) -> Result<u64> {
    if a == 0 || b == 0 {
        return Ok(0);
    }
    (a / gcd(a, b))
        .checked_mul(b)
        .ok_or_else(|| Error::capacity(format!("lcm({a}, {b}) overflows u64")))
}

/// A congruence `n ≡ residue (mod modulus)` with `modulus ≥ 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Congruence {
    pub residue: u64,
    pub modulus: u64,
}

impl Congruence {
    /// Reduces `residue` into `[0, modulus)`.
    pub fn new(residue: u64, modulus: u64) -> Self {
        assert!(modulus >= 1, "modulus must be positive");
        Self { residue: residue % modulus, modulus }
    }

    /// The trivial congruence `0 mod 1`, satisfied by every integer.
    pub fn trivial() -> Self {
        Self { residue: 0, modulus: 1 }
    }
}

impl fmt::Display for Congruence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.residue, self.modulus)
    }
}

/// Inverse of `a` modulo `m` for coprime `a`, `m`.
fn mod_inverse(a: u64, m: u64) -> u64 {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1);
    old_s.rem_euclid(m as i128) as u64
}

/// Combine `a1 mod m1` and `a2 mod m2`.
///
/// Returns the unique class modulo `lcm(m1, m2)` satisfying both when
/// `a1 ≡ a2 (mod gcd(m1, m2))`, and `None` when the congruences are
/// incompatible.
pub fn crt_pair(a1: u64, m1: u64, a2: u64, m2: u64) -> Result<Option<Congruence>> {
    if m1 == 0 || m2 == 0 {
        return Err(Error::domain("CRT modulus must be positive"));
    }
    let (a1, a2) = (a1 % m1, a2 % m2);
    let g = gcd(m1, m2);
    if a1 % g != a2 % g {
        return Ok(None);
    }
    let modulus = lcm(m1, m2)?;
    let (n1, n2) = (m1 / g, m2 / g);
    // a1 + m1·t ≡ a2 (mod m2)  ⇔  n1·t ≡ (a2 − a1)/g (mod n2)
    let diff = (a2 as i128 - a1 as i128) / g as i128;
    let rhs = diff.rem_euclid(n2 as i128) as u64;
    let t = mul_mod(rhs, mod_inverse(n1 % n2, n2), n2);
    let residue = ((a1 as u128 + m1 as u128 * t as u128) % modulus as u128) as u64;
    Ok(Some(Congruence { residue, modulus }))
}

/// Fold [`crt_pair`] over a list of congruences.
pub fn crt_all(congruences: &[Congruence]) -> Result<Option<Congruence>> {
    let mut acc = Congruence::trivial();
    for c in congruences {
        match crt_pair(acc.residue, acc.modulus, c.residue, c.modulus)? {
            Some(next) => acc = next,
            None => return Ok(None),
        }
    }
    Ok(Some(acc))
}

/// Smallest `x` accepted by [`l_scale`]; keeps `ln ln x` comfortably positive.
pub const L_SCALE_MIN_X: f64 = 16.0;

/// The scale `L(c, x) = exp(c · sqrt(ln x · ln ln x))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LScale {
    c: f64,
    x: f64,
}

impl LScale {
    pub fn new(c: f64, x: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::domain(format!("L(c, x) needs c > 0, got {c}")));
        }
        if !(x.is_finite() && x >= L_SCALE_MIN_X) {
            return Err(Error::domain(format!(
                "L(c, x) needs x ≥ {L_SCALE_MIN_X}, got {x}"
            )));
        }
        Ok(Self { c, x })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    /// `sqrt(ln x · ln ln x)`, the exponent per unit of `c`.
    pub fn exponent_unit(&self) -> f64 {
        let lx = self.x.ln();
        (lx * lx.ln()).sqrt()
    }

    pub fn value(&self) -> f64 {
        (self.c * self.exponent_unit()).exp()
    }
}

pub fn l_scale(c: f64, x: f64) -> Result<f64> {
    let value = LScale::new(c, x)?.value();
    if !value.is_finite() {
        return Err(Error::capacity(format!("L({c}, {x}) overflows f64")));
    }
    Ok(value)
}

/// `sqrt(ln x / ln ln x)`: the ω threshold unit and default pigeonhole ratio.
pub fn omega_scale(x: f64) -> Result<f64> {
    if !(x.is_finite() && x >= L_SCALE_MIN_X) {
        return Err(Error::domain(format!(
            "sqrt(log x / log log x) needs x ≥ {L_SCALE_MIN_X}, got {x}"
        )));
    }
    let lx = x.ln();
    Ok((lx / lx.ln()).sqrt())
}

/// Which smoothness condition [`enumerate_smooth`] and friends apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Smoothness {
    /// Every prime divisor `p` satisfies `p ≤ y`.
    Smooth,
    /// Every prime-power divisor `p^a` satisfies `p^a ≤ y`.
    PowerSmooth,
}

/// Integer part of a real bound, clamped into `u64`. Negative or NaN gives 0.
pub(crate) fn floor_bound(y: f64) -> u64 {
    if y.is_nan() || y < 0.0 {
        0
    } else if y >= u64::MAX as f64 {
        u64::MAX
    } else {
        y.floor() as u64
    }
}

/// Walks the `y`-smooth (or powersmooth) integers `≤ x` as a tree over
/// ascending primes. When only a single further prime can fit, the remaining
/// leaves are counted in bulk.
struct SmoothWalker<'a> {
    x: u64,
    cap: u64,
    primes: &'a [u64],
    mode: Smoothness,
}

impl SmoothWalker<'_> {
    fn count(&self, m: u64, start: usize) -> u64 {
        let rest = self.x / m;
        let mut total = 1;
        for j in start..self.primes.len() {
            let p = self.primes[j];
            if p > rest {
                break;
            }
            if p > rest / p {
                // p² > rest: each remaining prime q ≤ rest contributes only m·q
                let end = self.primes.partition_point(|&q| q <= rest);
                total += (end - j) as u64;
                break;
            }
            let mut pk = p;
            loop {
                if self.mode == Smoothness::PowerSmooth && pk > self.cap {
                    break;
                }
                total += self.count(m * pk, j + 1);
                if pk > rest / p {
                    break;
                }
                pk *= p;
            }
        }
        total
    }

    fn collect(&self, m: u64, start: usize, out: &mut Vec<u64>, budget: usize) -> Result<()> {
        if out.len() >= budget {
            return Err(Error::capacity(format!(
                "smooth enumeration exceeds {budget} values"
            )));
        }
        out.push(m);
        let rest = self.x / m;
        for j in start..self.primes.len() {
            let p = self.primes[j];
            if p > rest {
                break;
            }
            let mut pk = p;
            loop {
                if self.mode == Smoothness::PowerSmooth && pk > self.cap {
                    break;
                }
                self.collect(m * pk, j + 1, out, budget)?;
                if pk > rest / p {
                    break;
                }
                pk *= p;
            }
        }
        Ok(())
    }
}

/// Counts `y`-smooth or `y`-powersmooth integers below varying `x` against
/// one prime table.
pub struct SmoothCounter {
    primes: Vec<u64>,
    cap: u64,
    mode: Smoothness,
}

impl SmoothCounter {
    /// Prepares counts for every `x ≤ max_x`.
    pub fn new(max_x: u64, y: f64, mode: Smoothness) -> Result<Self> {
        let cap = floor_bound(y);
        let primes = sieve_primes(cap.min(max_x).max(1))?;
        Ok(Self { primes, cap, mode })
    }

    pub fn count(&self, x: u64) -> u64 {
        if x == 0 {
            return 0;
        }
        SmoothWalker { x, cap: self.cap, primes: &self.primes, mode: self.mode }.count(1, 0)
    }
}

/// `ψ(x, y)`: the number of `n ≤ x` with every prime factor `≤ y`, counting
/// `n = 1`.
pub fn psi(x: u64, y: f64) -> Result<u64> {
    Ok(SmoothCounter::new(x, y, Smoothness::Smooth)?.count(x))
}

/// `ψ*(x, y)`: the number of `n ≤ x` with every prime-power divisor `≤ y`.
pub fn psi_star(x: u64, y: f64) -> Result<u64> {
    Ok(SmoothCounter::new(x, y, Smoothness::PowerSmooth)?.count(x))
}

/// Ascending list of the `n ≤ x` satisfying `mode` with bound `y`.
pub fn enumerate_smooth(x: u64, y: f64, mode: Smoothness) -> Result<Vec<u64>> {
    enumerate_smooth_within(x, y, mode, ENUMERATION_BUDGET)
}

/// [`enumerate_smooth`] with an explicit cap on the output length.
pub fn enumerate_smooth_within(
    x: u64,
    y: f64,
    mode: Smoothness,
    budget: usize,
) -> Result<Vec<u64>> {
    if x == 0 {
        return Ok(Vec::new());
    }
    let cap = floor_bound(y);
    let primes = sieve_primes(cap.min(x).max(1))?;
    let mut out = Vec::new();
    SmoothWalker { x, cap, primes: &primes, mode }.collect(1, 0, &mut out, budget)?;
    out.sort_unstable();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_is_prime(n: u64) -> bool {
        n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0)
    }

    #[test]
    fn sieve_small_cases() {
        assert_eq!(sieve_primes(10).unwrap(), vec![2, 3, 5, 7]);
        assert_eq!(sieve_primes(2).unwrap(), vec![2]);
        assert_eq!(sieve_primes(3).unwrap(), vec![2, 3]);
        assert_eq!(sieve_primes(100).unwrap().len(), 25);
        assert!(sieve_primes(1).unwrap().is_empty());
    }

    #[test]
    fn sieve_matches_trial_division() {
        let sieved = sieve_primes(5000).unwrap();
        let naive: Vec<u64> = (0..=5000).filter(|&n| naive_is_prime(n)).collect();
        assert_eq!(sieved, naive);
    }

    #[test]
    fn sieve_rejects_oversized_limit() {
        assert!(matches!(
            sieve_primes(SIEVE_LIMIT_MAX + 1),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn miller_rabin_agrees_with_sieve() {
        let primes = sieve_primes(100_000).unwrap();
        let from_test: Vec<u64> = (0..=100_000).filter(|&n| is_prime(n)).collect();
        assert_eq!(primes, from_test);
        // Strong pseudoprimes to several small bases.
        assert!(!is_prime(3_215_031_751));
        assert!(!is_prime(3_825_123_056_546_413_051));
        assert!(is_prime(18_446_744_073_709_551_557));
    }

    #[test]
    fn factorize_orders_by_prime_power() {
        let f = factorize(60);
        let parts: Vec<(u64, u32)> = f.parts().iter().map(|p| (p.prime, p.exponent)).collect();
        assert_eq!(parts, vec![(3, 1), (2, 2), (5, 1)]);
        assert!(factorize(1).parts().is_empty());
        assert_eq!(
            factorize(9).parts(),
            &[PrimePower { prime: 3, exponent: 2 }]
        );
        assert_eq!(factorize(60).to_string(), "3 · 2^2 · 5");
    }

    #[test]
    fn omega_examples() {
        assert_eq!(omega(12), 2);
        assert_eq!(omega(1), 0);
        assert_eq!(omega(30030), 6);
    }

    #[test]
    fn factorize_reconstructs_up_to_1e5() {
        for n in 1..=100_000u64 {
            let f = factorize(n);
            let product: u64 = f.parts().iter().map(PrimePower::value).product();
            assert_eq!(product, n);
            assert!(f.parts().iter().all(|pp| is_prime(pp.prime)));
            assert!(f.parts().windows(2).all(|w| w[0].value() < w[1].value()));
            assert_eq!(omega(n), f.parts().len());
        }
    }

    #[test]
    fn factorize_large_semiprime() {
        let f = factorize(999_983 * 1_000_003);
        assert_eq!(f.primes(), vec![999_983, 1_000_003]);
    }

    #[test]
    fn crt_examples() {
        assert_eq!(
            crt_pair(2, 5, 0, 2).unwrap(),
            Some(Congruence { residue: 2, modulus: 10 })
        );
        // 1 ≡ 3 (mod 2), so these meet at 9
        assert_eq!(
            crt_pair(1, 4, 3, 6).unwrap(),
            Some(Congruence { residue: 9, modulus: 12 })
        );
        assert_eq!(crt_pair(0, 4, 3, 6).unwrap(), None);
        assert_eq!(
            crt_pair(0, 1, 7, 9).unwrap(),
            Some(Congruence { residue: 7, modulus: 9 })
        );
    }

    #[test]
    fn crt_matches_scan() {
        for m1 in 1..=30u64 {
            for m2 in 1..=30u64 {
                let l = m1 * m2 / gcd(m1, m2);
                for a1 in 0..m1 {
                    for a2 in 0..m2 {
                        let scan = (0..l).find(|n| n % m1 == a1 && n % m2 == a2);
                        let got = crt_pair(a1, m1, a2, m2).unwrap();
                        match scan {
                            Some(n) => assert_eq!(got, Some(Congruence { residue: n, modulus: l })),
                            None => assert_eq!(got, None),
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn crt_reports_overflow() {
        let big = (1u64 << 40) + 15; // odd
        assert!(matches!(
            crt_pair(0, big, 0, big - 2),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn gcd_agrees_with_euclid() {
        fn euclid(a: u64, b: u64) -> u64 {
            if b == 0 { a } else { euclid(b, a % b) }
        }
        for a in 0..200 {
            for b in 0..200 {
                assert_eq!(gcd(a, b), euclid(a, b));
            }
        }
    }

    #[test]
    fn l_scale_values() {
        // reference values from 40-digit evaluation
        let v = l_scale(1.0, 1e6).unwrap();
        assert!((v - 412.819_534_938_494_9).abs() < 1e-9 * v);
        let v = l_scale(std::f64::consts::FRAC_1_SQRT_2, 100.0).unwrap();
        assert!((v - 6.522_272_974_690_883).abs() < 1e-12 * v);
        assert!(l_scale(1e-12, 1e6).unwrap() > 1.0);
        assert!(l_scale(1e-12, 1e6).unwrap() < 1.0 + 1e-9);
    }

    #[test]
    fn l_scale_domain() {
        assert!(matches!(l_scale(1.0, 15.9), Err(Error::Domain(_))));
        assert!(matches!(l_scale(0.0, 100.0), Err(Error::Domain(_))));
        assert!(matches!(l_scale(-1.0, 100.0), Err(Error::Domain(_))));
        assert!(matches!(l_scale(1e6, 1e6), Err(Error::Capacity(_))));
    }

    #[test]
    fn psi_examples() {
        assert_eq!(psi(100, 5.0).unwrap(), 34);
        assert_eq!(psi(10, 10.0).unwrap(), 10);
        for x in 1..2000u64 {
            assert_eq!(psi(x, 2.0).unwrap(), u64::from(63 - x.leading_zeros()) + 1);
        }
    }

    #[test]
    fn psi_star_examples() {
        assert_eq!(psi_star(100, 5.0).unwrap(), 12);
        assert_eq!(psi_star(10, 10.0).unwrap(), 10);
    }

    #[test]
    fn enumerate_examples() {
        assert_eq!(
            enumerate_smooth(20, 3.0, Smoothness::Smooth).unwrap(),
            vec![1, 2, 3, 4, 6, 8, 9, 12, 16, 18]
        );
        assert_eq!(
            enumerate_smooth(20, 3.0, Smoothness::PowerSmooth).unwrap(),
            vec![1, 2, 3, 6]
        );
        assert_eq!(
            enumerate_smooth(5, 2.0, Smoothness::Smooth).unwrap(),
            vec![1, 2, 4]
        );
    }

    #[test]
    fn enumerate_respects_budget() {
        assert!(matches!(
            enumerate_smooth_within(1000, 1000.0, Smoothness::Smooth, 10),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn counts_match_enumeration_and_definition() {
        for x in [1u64, 2, 17, 100, 999, 10_000] {
            for y in [2.0, 3.5, 7.0, 10.0, 31.0, 100.0] {
                let smooth = enumerate_smooth(x, y, Smoothness::Smooth).unwrap();
                let power = enumerate_smooth(x, y, Smoothness::PowerSmooth).unwrap();
                assert_eq!(psi(x, y).unwrap(), smooth.len() as u64);
                assert_eq!(psi_star(x, y).unwrap(), power.len() as u64);
                assert!(power.len() <= smooth.len());
                if x <= 1000 {
                    let by_def: Vec<u64> = (1..=x)
                        .filter(|&n| factorize(n).parts().iter().all(|pp| pp.prime as f64 <= y))
                        .collect();
                    assert_eq!(smooth, by_def);
                    let by_def: Vec<u64> = (1..=x)
                        .filter(|&n| factorize(n).parts().iter().all(|pp| pp.value() as f64 <= y))
                        .collect();
                    assert_eq!(power, by_def);
                }
            }
        }
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn crt_solution_satisfies_both(a1 in 0u64..1_000_000, m1 in 1u64..1_000_000,
                                       a2 in 0u64..1_000_000, m2 in 1u64..1_000_000) {
            let (a1, a2) = (a1 % m1, a2 % m2);
            match crt_pair(a1, m1, a2, m2).unwrap() {
                Some(c) => {
                    prop_assert_eq!(c.modulus, m1 / gcd(m1, m2) * m2);
                    prop_assert_eq!(c.residue % m1, a1);
                    prop_assert_eq!(c.residue % m2, a2);
                }
                None => prop_assert_ne!(a1 % gcd(m1, m2), a2 % gcd(m1, m2)),
            }
        }

        #[test]
        fn l_scale_increases_in_c_and_x(c in 0.01f64..3.0, dc in 0.001f64..1.0,
                                        x in 16.0f64..1e9, fx in 1.001f64..10.0) {
            let base = l_scale(c, x).unwrap();
            prop_assert!(l_scale(c + dc, x).unwrap() > base);
            prop_assert!(l_scale(c, x * fx).unwrap() > base);
            prop_assert!(base > 1.0);
        }

        #[test]
        fn powersmooth_never_exceeds_smooth(x in 1u64..20_000, y in 2.0f64..200.0) {
            prop_assert!(psi_star(x, y).unwrap() <= psi(x, y).unwrap());
        }
    }
}
