//! Progressions, families, and the pairwise disjointness verifier.
//!
//! Two classes `a mod q` and `b mod r` intersect exactly when
//! `a ≡ b (mod gcd(q, r))`; every check in this module reduces to that
//! criterion, so a whole family is verified with `O(k²)` gcds.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::numtheory::{crt_pair, gcd};
use crate::{Error, Result};

/// Largest `x` a family may declare. Keeps every pairwise lcm inside `u64`.
pub const MAX_X_BOUND: u64 = u32::MAX as u64;

/// The residue class `residue mod modulus`, with `0 ≤ residue < modulus` and
/// `modulus ≥ 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawProgression")]
pub struct Progression {
    #[serde(rename = "q")]
    modulus: u64,
    #[serde(rename = "a")]
    residue: u64,
}

/// Wire form of a progression; residues may be negative or unreduced.
#[derive(Clone, Copy, Debug, Deserialize)]
pub(crate) struct RawProgression {
    pub q: u64,
    pub a: i64,
}

impl TryFrom<RawProgression> for Progression {
    type Error = Error;

    fn try_from(raw: RawProgression) -> Result<Self> {
        Progression::from_signed(raw.a, raw.q)
    }
}

impl Progression {
    /// `residue mod modulus`, reducing `residue` into range.
    pub fn new(residue: u64, modulus: u64) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::Structure(format!(
                "modulus must be at least 2, got {modulus}"
            )));
        }
        Ok(Self { modulus, residue: residue % modulus })
    }

    /// Like [`Progression::new`] but accepts negative residues.
    pub fn from_signed(residue: i64, modulus: u64) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::Structure(format!(
                "modulus must be at least 2, got {modulus}"
            )));
        }
        let r = (residue as i128).rem_euclid(modulus as i128) as u64;
        Ok(Self { modulus, residue: r })
    }

    pub fn residue(&self) -> u64 {
        self.residue
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn contains(&self, n: i64) -> bool {
        (n as i128).rem_euclid(self.modulus as i128) as u64 == self.residue
    }

    /// The class shifted by `shift`: `(residue + shift) mod modulus`.
    pub fn translate(&self, shift: i64) -> Self {
        let m = self.modulus as i128;
        let r = (self.residue as i128 + (shift as i128).rem_euclid(m)).rem_euclid(m);
        Self { modulus: self.modulus, residue: r as u64 }
    }

    /// Smallest nonnegative integer in both classes, if they meet.
    pub fn common_element(&self, other: &Progression) -> Option<u64> {
        // both moduli ≤ u64::MAX, lcm may overflow only beyond MAX_X_BOUND
        crt_pair(self.residue, self.modulus, other.residue, other.modulus)
            .ok()
            .flatten()
            .map(|c| c.residue)
    }
}

impl fmt::Display for Progression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.residue, self.modulus)
    }
}

/// True iff no integer lies in both classes.
pub fn disjoint(p: &Progression, q: &Progression) -> bool {
    let g = gcd(p.modulus, q.modulus);
    p.residue % g != q.residue % g
}

/// Two family members that share an element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    /// Index of the first progression (into the family's sorted items).
    pub first: usize,
    pub second: usize,
    pub first_progression: Progression,
    pub second_progression: Progression,
    /// Smallest nonnegative integer in both classes.
    pub common_element: u64,
}

impl Witness {
    /// A witness for `p` and `q` at the given indices, if they intersect.
    pub fn between(first: usize, second: usize, p: Progression, q: Progression) -> Option<Self> {
        (!disjoint(&p, &q)).then(|| Self::for_pair(first, second, p, q))
    }

    fn for_pair(first: usize, second: usize, p: Progression, q: Progression) -> Self {
        let common_element = p
            .common_element(&q)
            .expect("witness pair must intersect");
        Self { first, second, first_progression: p, second_progression: q, common_element }
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "pair ({}, {}): {} and {} share common element {}",
            self.first, self.second, self.first_progression, self.second_progression,
            self.common_element
        )
    }
}

/// A family of progressions with distinct moduli in `[2, x_bound]`, kept
/// sorted by modulus.
///
/// A family only carries a certificate digest after [`Family::certify`] has
/// verified it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Family {
    x_bound: u64,
    items: Vec<Progression>,
    certificate: Option<String>,
}

impl Family {
    /// Sorts `items` by modulus and checks `2 ≤ q_1 < ... < q_k ≤ x_bound`.
    pub fn new(x_bound: u64, mut items: Vec<Progression>) -> Result<Self> {
        if x_bound < 2 {
            return Err(Error::Structure(format!("x bound must be at least 2, got {x_bound}")));
        }
        if x_bound > MAX_X_BOUND {
            return Err(Error::capacity(format!(
                "x bound {x_bound} exceeds {MAX_X_BOUND}"
            )));
        }
        items.sort_unstable();
        for w in items.windows(2) {
            if w[0].modulus == w[1].modulus {
                return Err(Error::Structure(format!("duplicate modulus {}", w[0].modulus)));
            }
        }
        if let Some(last) = items.last() {
            if last.modulus > x_bound {
                return Err(Error::Structure(format!(
                    "modulus {} exceeds x bound {x_bound}",
                    last.modulus
                )));
            }
        }
        Ok(Self { x_bound, items, certificate: None })
    }

    pub fn empty(x_bound: u64) -> Result<Self> {
        Self::new(x_bound, Vec::new())
    }

    pub fn x_bound(&self) -> u64 {
        self.x_bound
    }

    pub fn items(&self) -> &[Progression] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn moduli(&self) -> impl Iterator<Item = u64> + '_ {
        self.items.iter().map(|p| p.modulus)
    }

    pub fn get(&self, modulus: u64) -> Option<&Progression> {
        self.items
            .binary_search_by_key(&modulus, |p| p.modulus)
            .ok()
            .map(|i| &self.items[i])
    }

    /// The certificate digest, present only on verified families.
    pub fn certificate(&self) -> Option<&str> {
        self.certificate.as_deref()
    }

    /// Verify the family and attach the sha256 digest of its canonical
    /// serialization.
    pub fn certify(mut self) -> std::result::Result<Self, Witness> {
        let report = verify_family(&self);
        match report.witness {
            Some(w) => Err(w),
            None => {
                self.certificate = Some(self.digest());
                Ok(self)
            }
        }
    }

    /// Hex sha256 of the canonical JSON Lines form.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(crate::io::family_to_string(self).as_bytes()))
    }

    /// The first `k` members (smallest moduli). Disjointness is inherited, so
    /// a certificate is recomputed rather than dropped.
    pub fn truncated(&self, k: usize) -> Family {
        let items = self.items[..k.min(self.items.len())].to_vec();
        let mut out = Family { x_bound: self.x_bound, items, certificate: None };
        if self.certificate.is_some() {
            out.certificate = Some(out.digest());
        }
        out
    }
}

/// Outcome of [`verify_family`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub ok: bool,
    /// Lexicographically first intersecting pair, when `!ok`.
    pub witness: Option<Witness>,
    pub pairs_checked: u64,
}

/// Verifier tuning knobs. Neither changes the verdict or the witness.
#[derive(Clone, Copy, Debug, Default)]
pub struct VerifyOptions {
    /// Skip gcds for pairs already separated by their residues mod 2, 3 or 5.
    pub prefilter: bool,
    /// Split the outer index range across the rayon pool.
    pub parallel: bool,
}

/// Verify all pairs sequentially without the prefilter.
pub fn verify_family(f: &Family) -> VerifyReport {
    verify_family_with(f, VerifyOptions::default())
}

/// Residues mod 2, 3, 5 for moduli those primes divide; `u8::MAX` otherwise.
fn small_signature(p: &Progression) -> [u8; 3] {
    let mut sig = [u8::MAX; 3];
    for (slot, s) in sig.iter_mut().zip([2u64, 3, 5]) {
        if p.modulus % s == 0 {
            *slot = (p.residue % s) as u8;
        }
    }
    sig
}

fn separated_by_signature(a: &[u8; 3], b: &[u8; 3]) -> bool {
    a.iter()
        .zip(b)
        .any(|(&x, &y)| x != u8::MAX && y != u8::MAX && x != y)
}

pub fn verify_family_with(f: &Family, opts: VerifyOptions) -> VerifyReport {
    let items = &f.items;
    let k = items.len();
    let signatures: Vec<[u8; 3]> = if opts.prefilter {
        items.iter().map(small_signature).collect()
    } else {
        Vec::new()
    };

    let first_failure = |i: usize| -> Option<usize> {
        let p = items[i];
        (i + 1..k).find(|&j| {
            if opts.prefilter && separated_by_signature(&signatures[i], &signatures[j]) {
                return false;
            }
            !disjoint(&p, &items[j])
        })
    };

    // find_map_first returns the smallest i with a failure, so the pair is
    // the lexicographic minimum regardless of scheduling.
    let failure = if opts.parallel {
        (0..k)
            .into_par_iter()
            .with_min_len(16)
            .find_map_first(|i| first_failure(i).map(|j| (i, j)))
    } else {
        (0..k).find_map(|i| first_failure(i).map(|j| (i, j)))
    };

    let total_pairs = (k as u64) * (k as u64).saturating_sub(1) / 2;
    match failure {
        None => VerifyReport { ok: true, witness: None, pairs_checked: total_pairs },
        Some((i, j)) => {
            // pairs strictly before (i, j) in lexicographic order, plus (i, j)
            let before: u64 = (0..i as u64).map(|r| k as u64 - 1 - r).sum();
            VerifyReport {
                ok: false,
                witness: Some(Witness::for_pair(i, j, items[i], items[j])),
                pairs_checked: before + (j - i) as u64,
            }
        }
    }
}

/// Exact natural density `Σ 1/q` of the union, assuming disjointness.
pub fn density(f: &Family) -> BigRational {
    if f.items.is_empty() {
        return BigRational::zero();
    }
    // common denominator keeps the sum to one reduction at the end
    let mut common = BigInt::one();
    for q in f.moduli() {
        let q = BigInt::from(q);
        let g = num_integer::Integer::gcd(&common, &q);
        common = common / g * q;
    }
    let numer: BigInt = f.moduli().map(|q| &common / BigInt::from(q)).sum();
    BigRational::new(numer, common)
}

/// Shift every residue by `shift`. Disjointness is translation invariant.
pub fn translate(f: &Family, shift: i64) -> Family {
    let items = f.items.iter().map(|p| p.translate(shift)).collect();
    Family { x_bound: f.x_bound, items, certificate: None }
}
