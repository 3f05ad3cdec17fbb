//! Refinement chains for families with square-free moduli.
//!
//! Starting from the members `S_0` that have few prime factors (condition A)
//! and a prime factor above a floor (condition B), each step picks a member
//! `r`, lists the primes `e_1..e_j` of `r / (p_1⋯p_i)`, keeps the members
//! divisible by the most popular `e_h`, and among those the most popular
//! residue class mod `e_h`. Disjointness forces every member to be divisible
//! by some `e_h`; a member that is not is reported as an intersecting pair.
//!
//! The chain stops at the first `S_t` where a fresh prime above the floor
//! divides at least `|S_t| / ratio_denominator` members. The result is a
//! [`RefinementCertificate`] that [`check_certificate`] re-verifies against
//! the family without trusting the builder.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::family::{Family, Progression, Witness};
use crate::numtheory::{crt_pair, factorize, is_prime, l_scale, omega_scale, Congruence};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementParams {
    pub x: u64,
    /// Condition A keeps members with `ω(q) < omega_cap`.
    pub omega_cap: f64,
    /// Condition B keeps members with a prime factor `> prime_floor`.
    pub prime_floor: f64,
    /// Pigeonhole denominator used by the size ratios and the stopping rule.
    pub ratio_denominator: f64,
}

impl RefinementParams {
    /// Thresholds at scale `x`: `ω`-cap and ratio `sqrt(log x / log log x)`,
    /// prime floor `L(1, x)`.
    pub fn for_scale(x: u64) -> Result<Self> {
        let s = omega_scale(x as f64)?;
        Ok(Self {
            x,
            omega_cap: s,
            prime_floor: l_scale(1.0, x as f64)?,
            ratio_denominator: s,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_cap.is_finite() && self.omega_cap > 0.0) {
            return Err(Error::domain(format!("omega_cap must be positive, got {}", self.omega_cap)));
        }
        if !(self.prime_floor.is_finite() && self.prime_floor >= 2.0) {
            return Err(Error::domain(format!("prime_floor must be ≥ 2, got {}", self.prime_floor)));
        }
        if !(self.ratio_denominator.is_finite() && self.ratio_denominator > 0.0) {
            return Err(Error::domain(format!(
                "ratio_denominator must be positive, got {}",
                self.ratio_denominator
            )));
        }
        Ok(())
    }
}

/// One application of the refinement step, producing `S_index`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementStep {
    pub index: usize,
    /// The member `r ∈ S_{index-1}` whose cofactor supplies the candidates.
    pub chosen_r: u64,
    /// Primes of `r / (p_1⋯p_{index-1})`, ascending.
    pub candidate_primes: Vec<u64>,
    /// `p_index`.
    pub chosen_prime: u64,
    /// `|C|`: members of `S_{index-1}` divisible by the chosen prime.
    pub class_size: usize,
    /// `B`: the residue class mod `p_index` shared by the survivors.
    pub residue_class: u64,
    /// `A_index mod p_1⋯p_index`.
    pub accumulated: Congruence,
    /// Moduli of `S_index`, ascending.
    pub survivors: Vec<u64>,
    /// `|S_index| > |S_{index-1}| / (p_index · ratio_denominator)` held strictly.
    pub property3_strict: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementCertificate {
    pub params: RefinementParams,
    pub s0: Vec<Progression>,
    pub steps: Vec<RefinementStep>,
    pub t: usize,
    /// The prime of the stopping rule; absent only when `S_0` is empty.
    pub witness_prime: Option<u64>,
    /// Members of `S_t` divisible by `witness_prime`.
    pub divisible_count: usize,
}

/// Primes chosen so far and the common class `A_i mod p_1⋯p_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainState {
    pub primes: Vec<u64>,
    pub accumulated: Congruence,
}

impl Default for ChainState {
    fn default() -> Self {
        Self { primes: Vec::new(), accumulated: Congruence::trivial() }
    }
}

/// Members of `f` satisfying conditions A and B, in modulus order.
///
/// Every modulus of `f` must be square-free.
pub fn filter_ab(f: &Family, params: &RefinementParams) -> Result<Vec<Progression>> {
    params.validate()?;
    let mut kept = Vec::new();
    for p in f.items() {
        let fz = factorize(p.modulus());
        if !fz.is_squarefree() {
            return Err(Error::domain(format!("modulus {} is not square-free", p.modulus())));
        }
        let few_primes = (fz.omega() as f64) < params.omega_cap;
        let large_prime = fz.primes().iter().any(|&q| q as f64 > params.prime_floor);
        if few_primes && large_prime {
            kept.push(*p);
        }
    }
    Ok(kept)
}

fn cofactor_primes(modulus: u64, product: u64) -> Vec<u64> {
    factorize(modulus / product).primes()
}

/// Refine `S_i` once. On a covering violation the returned witness indexes
/// into `members`.
pub fn refine_step(
    members: &[Progression],
    state: &ChainState,
    params: &RefinementParams,
) -> Result<RefinementStep> {
    if members.len() < 2 {
        return Err(Error::domain("refinement step needs at least two members"));
    }
    let Congruence { residue: a_i, modulus: product } = state.accumulated;
    if let Some(bad) = members
        .iter()
        .find(|s| s.modulus() % product != 0 || s.residue() % product != a_i)
    {
        return Err(Error::domain(format!(
            "{bad} is not in the class {a_i} mod {product}"
        )));
    }

    // fewest cofactor primes, then smallest modulus
    let (r_idx, r, candidates) = members
        .iter()
        .enumerate()
        .map(|(i, s)| (i, *s, cofactor_primes(s.modulus(), product)))
        .min_by_key(|(_, s, ps)| (ps.len(), s.modulus()))
        .expect("non-empty");

    for (i, s) in members.iter().enumerate() {
        if i != r_idx && !candidates.iter().any(|&e| s.modulus() % e == 0) {
            // gcd(r, s) = p_1⋯p_i and both are ≡ A_i there
            let (first, second) = if r_idx < i { (r_idx, i) } else { (i, r_idx) };
            let w = Witness::between(first, second, members[first], members[second])
                .expect("classes agree modulo their gcd");
            return Err(Error::NotDisjoint(w));
        }
    }

    let (chosen_prime, class) = candidates
        .iter()
        .map(|&e| {
            let c: Vec<Progression> =
                members.iter().filter(|s| s.modulus() % e == 0).copied().collect();
            (e, c)
        })
        .max_by(|(e1, c1), (e2, c2)| c1.len().cmp(&c2.len()).then(e2.cmp(e1)))
        .expect("a square-free member other than p_1⋯p_i has cofactor primes");

    let mut by_residue: BTreeMap<u64, usize> = BTreeMap::new();
    for s in &class {
        *by_residue.entry(s.residue() % chosen_prime).or_default() += 1;
    }
    // BTreeMap iterates ascending, so max_by keeps the smallest residue on ties
    let (residue_class, _) = by_residue
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map(|(&b, &n)| (b, n))
        .expect("class contains r");

    let survivors: Vec<u64> = class
        .iter()
        .filter(|s| s.residue() % chosen_prime == residue_class)
        .map(Progression::modulus)
        .collect();
    let accumulated = crt_pair(a_i, product, residue_class, chosen_prime)?
        .expect("chosen prime is coprime to p_1⋯p_i");

    let ratio = survivors.len() as f64 * chosen_prime as f64 * params.ratio_denominator;
    Ok(RefinementStep {
        index: state.primes.len() + 1,
        chosen_r: r.modulus(),
        candidate_primes: candidates,
        chosen_prime,
        class_size: class.len(),
        residue_class,
        accumulated,
        survivors,
        property3_strict: ratio > members.len() as f64,
    })
}

/// Best fresh prime above the floor, by number of members it divides. Returns
/// it only if it meets the stopping rule.
fn stopping_prime(
    members: &[Progression],
    used: &[u64],
    params: &RefinementParams,
) -> Option<(u64, usize)> {
    let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
    for s in members {
        for q in factorize(s.modulus()).primes() {
            if q as f64 > params.prime_floor && !used.contains(&q) {
                *counts.entry(q).or_default() += 1;
            }
        }
    }
    counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .filter(|&(_, n)| n as f64 * params.ratio_denominator >= members.len() as f64)
}

/// Run the refinement procedure on `f` to completion.
///
/// A covering violation surfaces as [`Error::NotDisjoint`] with indices into
/// `f`.
pub fn build_chain(f: &Family, params: &RefinementParams) -> Result<RefinementCertificate> {
    let s0 = filter_ab(f, params)?;
    let mut current = s0.clone();
    let mut state = ChainState::default();
    let mut steps = Vec::new();

    let (witness_prime, divisible_count) = loop {
        if current.is_empty() {
            break (None, 0);
        }
        if let Some((p, n)) = stopping_prime(&current, &state.primes, params) {
            break (Some(p), n);
        }
        if current.len() < 2 {
            return Err(Error::domain(format!(
                "chain stalled at step {}: no prime above {} left in {}",
                steps.len(),
                params.prime_floor,
                current[0]
            )));
        }
        let step = refine_step(&current, &state, params).map_err(|e| match e {
            Error::NotDisjoint(w) => Error::NotDisjoint(reindex(f, w)),
            other => other,
        })?;
        if (step.survivors.len() as f64 * step.chosen_prime as f64 * params.ratio_denominator)
            < current.len() as f64
        {
            return Err(Error::domain(format!(
                "step {} keeps {} of {} members, below the ratio bound; \
                 omega_cap likely exceeds ratio_denominator",
                step.index,
                step.survivors.len(),
                current.len()
            )));
        }
        state.primes.push(step.chosen_prime);
        state.accumulated = step.accumulated;
        current.retain(|s| step.survivors.binary_search(&s.modulus()).is_ok());
        steps.push(step);
    };

    Ok(RefinementCertificate {
        params: *params,
        s0,
        t: steps.len(),
        steps,
        witness_prime,
        divisible_count,
    })
}

fn reindex(f: &Family, w: Witness) -> Witness {
    let pos = |p: &Progression| {
        f.items()
            .binary_search_by_key(&p.modulus(), Progression::modulus)
            .expect("chain members come from the family")
    };
    Witness {
        first: pos(&w.first_progression),
        second: pos(&w.second_progression),
        ..w
    }
}

/// Why a certificate was rejected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckFailure {
    /// Thresholds invalid or `x` differs from the family bound.
    Params,
    /// `S_0` is not exactly the conditions-A/B subset of the family.
    InitialSet,
    /// `t` or a step index is out of sequence.
    StepIndex,
    /// `r` is not in the previous set or the candidate primes are wrong.
    ChosenElement,
    ChosenPrime,
    /// Survivors are not the members of the previous set in the recorded class.
    Selection,
    Property1,
    Property2,
    Property3,
    Property4,
    /// Recorded `divisible_count` disagrees with a recount.
    DivisibleCount,
    /// `|S_t ∩ pℤ| ≥ |S_0| / (p_1⋯p_t · ratio^(t+1))` fails.
    SizeBound,
}

impl fmt::Display for CheckFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CheckFailure::Params => "params",
            CheckFailure::InitialSet => "initial set",
            CheckFailure::StepIndex => "step index",
            CheckFailure::ChosenElement => "chosen element",
            CheckFailure::ChosenPrime => "chosen prime",
            CheckFailure::Selection => "selection",
            CheckFailure::Property1 => "Property 1",
            CheckFailure::Property2 => "Property 2",
            CheckFailure::Property3 => "Property 3",
            CheckFailure::Property4 => "Property 4",
            CheckFailure::DivisibleCount => "divisible count",
            CheckFailure::SizeBound => "size bound",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub ok: bool,
    pub reason: Option<CheckFailure>,
    /// Every step satisfied the size ratio strictly.
    pub strict: bool,
}

impl CheckOutcome {
    fn fail(reason: CheckFailure) -> Self {
        Self { ok: false, reason: Some(reason), strict: false }
    }
}

/// Re-verify a certificate against the family it claims to describe.
pub fn check_certificate(cert: &RefinementCertificate, f: &Family) -> CheckOutcome {
    match check_inner(cert, f) {
        Ok(strict) => CheckOutcome { ok: true, reason: None, strict },
        Err(reason) => CheckOutcome::fail(reason),
    }
}

fn check_inner(cert: &RefinementCertificate, f: &Family) -> std::result::Result<bool, CheckFailure> {
    use CheckFailure::*;
    let params = &cert.params;
    if params.validate().is_err() || params.x != f.x_bound() {
        return Err(Params);
    }

    // S_0 recomputed straight from the definitions
    let mut expected = Vec::new();
    for p in f.items() {
        let fz = factorize(p.modulus());
        if !fz.is_squarefree() {
            return Err(InitialSet);
        }
        if (fz.omega() as f64) < params.omega_cap
            && fz.parts().iter().any(|pp| pp.prime as f64 > params.prime_floor)
        {
            expected.push(*p);
        }
    }
    if expected != cert.s0 {
        return Err(InitialSet);
    }
    if cert.t != cert.steps.len() {
        return Err(StepIndex);
    }

    let residue_of: BTreeMap<u64, u64> =
        cert.s0.iter().map(|p| (p.modulus(), p.residue())).collect();
    let mut previous: BTreeSet<u64> = residue_of.keys().copied().collect();
    let mut product = 1u64;
    let mut accumulated = 0u64;
    let mut used = Vec::new();
    let mut strict = true;
    let rd = params.ratio_denominator;

    for (i, step) in cert.steps.iter().enumerate() {
        if step.index != i + 1 {
            return Err(StepIndex);
        }
        if !previous.contains(&step.chosen_r)
            || step.chosen_r % product != 0
            || step.candidate_primes != factorize(step.chosen_r / product).primes()
        {
            return Err(ChosenElement);
        }
        let p = step.chosen_prime;
        if !step.candidate_primes.contains(&p) {
            return Err(ChosenPrime);
        }
        let next_product = product.checked_mul(p).ok_or(Property1)?;

        let survivors: BTreeSet<u64> = step.survivors.iter().copied().collect();
        if survivors.len() != step.survivors.len() || !survivors.is_subset(&previous) {
            return Err(Selection);
        }
        if survivors.iter().any(|q| q % next_product != 0) {
            return Err(Property1);
        }
        if step.accumulated.modulus != next_product
            || survivors
                .iter()
                .any(|q| residue_of[q] % next_product != step.accumulated.residue)
        {
            return Err(Property2);
        }
        if step.accumulated.residue % product != accumulated
            || step.accumulated.residue % p != step.residue_class
        {
            return Err(Property2);
        }
        let class_size = previous.iter().filter(|&&q| q % p == 0).count();
        let selected: BTreeSet<u64> = previous
            .iter()
            .copied()
            .filter(|&q| q % p == 0 && residue_of[&q] % p == step.residue_class)
            .collect();
        if selected != survivors || class_size != step.class_size {
            return Err(Selection);
        }
        let lhs = survivors.len() as f64 * p as f64 * rd;
        if lhs < previous.len() as f64 {
            return Err(Property3);
        }
        let step_strict = lhs > previous.len() as f64;
        if step.property3_strict != step_strict {
            return Err(Property3);
        }
        strict &= step_strict;

        previous = survivors;
        product = next_product;
        accumulated = step.accumulated.residue;
        used.push(p);
    }

    match cert.witness_prime {
        None => {
            if !cert.s0.is_empty() || cert.t != 0 || cert.divisible_count != 0 {
                return Err(Property4);
            }
        }
        Some(w) => {
            if !is_prime(w) || w as f64 <= params.prime_floor || used.contains(&w) {
                return Err(Property4);
            }
            let count = previous.iter().filter(|&&q| q % w == 0).count();
            if count != cert.divisible_count {
                return Err(DivisibleCount);
            }
            if (count as f64) * rd < previous.len() as f64 {
                return Err(Property4);
            }
            let denom = used.iter().map(|&p| p as f64).product::<f64>()
                * rd.powi(cert.t as i32 + 1);
            if (count as f64) < cert.s0.len() as f64 / denom {
                return Err(SizeBound);
            }
        }
    }
    Ok(strict)
}
