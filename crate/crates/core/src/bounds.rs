//! Exact counts set against their `L(c, x)` predictions.
//!
//! Predictions drop the `o(1)` in each exponent. Rows report the ratio of the
//! exact count to that prediction; nothing here asserts convergence.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::construction::{build_construction, ConstructionParams};
use crate::family::{verify_family_with, Family, Progression, VerifyOptions};
use crate::numtheory::{
    factorize, l_scale, omega_scale, sieve_primes, Congruence, SmoothCounter, Smoothness,
};
use crate::{Error, Result};

/// Largest `x` for which ω is tabulated in memory.
pub const OMEGA_TABLE_MAX: u64 = 200_000_000;

fn omega_table(x: u64) -> Result<Vec<u8>> {
    if x > OMEGA_TABLE_MAX {
        return Err(Error::capacity(format!("ω table limited to x ≤ {OMEGA_TABLE_MAX}")));
    }
    let mut table = vec![0u8; x as usize + 1];
    for p in sieve_primes(x.max(2))? {
        if p > x {
            break;
        }
        for m in (p..=x).step_by(p as usize) {
            table[m as usize] += 1;
        }
    }
    Ok(table)
}

/// `#{n ≤ x : ω(n) > threshold}`.
pub fn omega_tail_above(x: u64, threshold: f64) -> Result<u64> {
    if x <= 1 {
        return Ok(0);
    }
    let table = omega_table(x)?;
    Ok(table[1..].iter().filter(|&&w| f64::from(w) > threshold).count() as u64)
}

/// `#{n ≤ x : ω(n) > c · sqrt(log x / log log x)}`.
pub fn omega_tail_count(x: u64, c: f64) -> Result<u64> {
    if x <= 1 {
        return Ok(0);
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::domain(format!("c must be positive, got {c}")));
    }
    omega_tail_above(x, c * omega_scale(x as f64)?)
}

/// `Σ 1/p^a` over prime powers `p^a ≤ x`.
pub fn prime_power_reciprocal_sum(x: u64) -> Result<f64> {
    let mut powers = Vec::new();
    for p in sieve_primes(x.max(2))? {
        if p > x {
            break;
        }
        let mut pa = p;
        loop {
            powers.push(pa);
            match pa.checked_mul(p) {
                Some(next) if next <= x => pa = next,
                _ => break,
            }
        }
    }
    // smallest terms first
    powers.sort_unstable_by(|a, b| b.cmp(a));
    Ok(powers.iter().map(|&q| 1.0 / q as f64).sum())
}

fn ln_factorial(n: u64) -> f64 {
    if n < 256 {
        return (2..=n).map(|k| (k as f64).ln()).sum();
    }
    // Stirling series; the next term is below 1e-17 for n ≥ 256
    let n = n as f64;
    n * n.ln() - n + 0.5 * (2.0 * std::f64::consts::PI * n).ln() + 1.0 / (12.0 * n)
        - 1.0 / (360.0 * n.powi(3))
}

/// The explicit majorant `x · Σ_{j > τ} M^j / j!` for the ω tail, with
/// `M = Σ_{p^a ≤ x} 1/p^a` and `τ = c · sqrt(log x / log log x)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Majorant {
    /// `M`.
    pub mass: f64,
    /// `τ`.
    pub threshold: f64,
    /// First summation index, the least integer `> τ`.
    pub first_index: u64,
    /// Natural log of the majorant; finite even when `value` underflows.
    pub ln_value: f64,
    pub value: f64,
}

pub fn lemma2_majorant(x: u64, c: f64) -> Result<Majorant> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::domain(format!("c must be positive, got {c}")));
    }
    let threshold = c * omega_scale(x as f64)?;
    let mass = prime_power_reciprocal_sum(x)?;
    let first_index = threshold.floor() as u64 + 1;

    let ln_first = first_index as f64 * mass.ln() - ln_factorial(first_index);
    // terms relative to the first one
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut j = first_index;
    loop {
        j += 1;
        term *= mass / j as f64;
        sum += term;
        if j as f64 > mass && term < 1e-30 * sum {
            break;
        }
    }
    let ln_value = (x as f64).ln() + ln_first + sum.ln();
    Ok(Majorant { mass, threshold, first_index, ln_value, value: ln_value.exp() })
}

/// `n = α·β` with `β` square-free, `gcd(α, β) = 1`, and every prime of `α`
/// dividing `n` at least twice.
pub fn split_squarefull(n: u64) -> (u64, u64) {
    let mut alpha = 1;
    let mut beta = 1;
    for pp in factorize(n).parts() {
        if pp.exponent >= 2 {
            alpha *= pp.value();
        } else {
            beta *= pp.prime;
        }
    }
    (alpha, beta)
}

/// `ψ(x, y)`, `ψ*(x, y)` and the lower estimate
/// `ψ(x, y) − Σ_{n² > y, n² ≤ x} ψ(x / n², y)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PsiChain {
    pub psi: u64,
    pub psi_star: u64,
    pub lower: i64,
}

impl PsiChain {
    /// `ψ > ψ* ≥ lower`.
    pub fn holds(&self) -> bool {
        self.psi > self.psi_star && self.psi_star as i64 >= self.lower
    }
}

pub fn psi_chain(x: u64, y: f64) -> Result<PsiChain> {
    let smooth = SmoothCounter::new(x, y, Smoothness::Smooth)?;
    let psi = smooth.count(x);
    let psi_star = SmoothCounter::new(x, y, Smoothness::PowerSmooth)?.count(x);
    let mut correction = 0u64;
    let mut n = 1u64;
    while n * n <= x {
        if (n * n) as f64 > y {
            correction += smooth.count(x / (n * n));
        }
        n += 1;
    }
    Ok(PsiChain { psi, psi_star, lower: psi as i64 - correction as i64 })
}

/// Output of [`corollary_reduce`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduction {
    pub alpha: u64,
    /// The class `b mod α` shared by the reduced members.
    pub class: Congruence,
    /// `|R(α)|`: members with squarefull part exactly `α` and `β > 1`.
    pub candidates: usize,
    /// Reduced progressions `b_i mod r_i/α`.
    pub family: Family,
}

fn is_squarefull_part(alpha: u64) -> bool {
    alpha >= 1 && split_squarefull(alpha) == (alpha, 1)
}

/// Keep the members whose squarefull part is `alpha`, take the most common
/// class `b mod alpha` among them, and divide their moduli by `alpha`.
///
/// A member with `r = α` would reduce to modulus 1 and is skipped. The result
/// is re-verified; a failure means the input was not disjoint.
pub fn corollary_reduce(f: &Family, alpha: u64) -> Result<Reduction> {
    if alpha == 0 || !is_squarefull_part(alpha) {
        return Err(Error::domain(format!(
            "{alpha} is not a squarefull part (every prime exponent ≥ 2)"
        )));
    }
    let selected: Vec<&Progression> = f
        .items()
        .iter()
        .filter(|p| {
            let (a, b) = split_squarefull(p.modulus());
            a == alpha && b > 1
        })
        .collect();

    let mut classes: BTreeMap<u64, usize> = BTreeMap::new();
    for p in &selected {
        *classes.entry(p.residue() % alpha).or_default() += 1;
    }
    let b = classes
        .iter()
        .max_by(|x, y| x.1.cmp(y.1).then(y.0.cmp(x.0)))
        .map_or(0, |(&b, _)| b);

    let items = selected
        .iter()
        .filter(|p| p.residue() % alpha == b)
        .map(|p| Progression::new(p.residue(), p.modulus() / alpha))
        .collect::<Result<Vec<_>>>()?;
    let family = Family::new((f.x_bound() / alpha).max(2), items)?;
    let report = verify_family_with(&family, VerifyOptions { prefilter: false, parallel: true });
    if let Some(w) = report.witness {
        return Err(Error::NotDisjoint(w));
    }
    Ok(Reduction {
        alpha,
        class: Congruence::new(b, alpha),
        candidates: selected.len(),
        family,
    })
}

/// [`corollary_reduce`] at the `α` shared by the most members (smallest on
/// ties). `None` when no member has a square-free part above 1.
pub fn corollary_select(f: &Family) -> Result<Option<Reduction>> {
    let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
    for q in f.moduli() {
        let (a, b) = split_squarefull(q);
        if b > 1 {
            *counts.entry(a).or_default() += 1;
        }
    }
    let best = counts
        .iter()
        .max_by(|x, y| x.1.cmp(y.1).then(y.0.cmp(x.0)))
        .map(|(&a, _)| a);
    best.map(|alpha| corollary_reduce(f, alpha)).transpose()
}

/// How many members have squarefull part at most `L(1/3, x)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaFraction {
    pub threshold: f64,
    pub total: usize,
    pub small: usize,
    pub fraction: f64,
}

pub fn alpha_fraction(f: &Family) -> Result<AlphaFraction> {
    let threshold = l_scale(1.0 / 3.0, f.x_bound() as f64)?;
    let small = f
        .moduli()
        .filter(|&q| split_squarefull(q).0 as f64 <= threshold)
        .count();
    let total = f.len();
    let fraction = if total == 0 { 1.0 } else { small as f64 / total as f64 };
    Ok(AlphaFraction { threshold, total, small, fraction })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportKind {
    /// `ψ(x, L(c, x))` against `x / L(1/(2c), x)`.
    Psi,
    /// `ψ*(x, L(c, x))` against the same prediction.
    #[serde(rename = "psistar")]
    PsiStar,
    /// `#{ω(n) > c·sqrt(log x / log log x)}` against `x / L(c/2, x)`.
    OmegaTail,
    /// Verified construction size at exponent `c` against
    /// `x / L(c + 1/(2c), x)`, which is `x / L(√2, x)` at `c = 1/√2`.
    Construction,
}

impl ReportKind {
    pub const ALL: [ReportKind; 4] =
        [ReportKind::Psi, ReportKind::PsiStar, ReportKind::OmegaTail, ReportKind::Construction];

    pub fn as_str(&self) -> &'static str {
        match self {
            ReportKind::Psi => "psi",
            ReportKind::PsiStar => "psistar",
            ReportKind::OmegaTail => "omega-tail",
            ReportKind::Construction => "construction",
        }
    }
}

impl fmt::Display for ReportKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReportKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::domain(format!("unknown report kind {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountsRow {
    pub kind: ReportKind,
    pub x: u64,
    pub c: f64,
    pub exact: u64,
    pub predicted: f64,
    pub ratio: f64,
}

pub fn counts_row(kind: ReportKind, x: u64, c: f64) -> Result<CountsRow> {
    let xf = x as f64;
    let (exact, predicted) = match kind {
        ReportKind::Psi | ReportKind::PsiStar => {
            let y = l_scale(c, xf)?;
            let mode = if kind == ReportKind::Psi { Smoothness::Smooth } else { Smoothness::PowerSmooth };
            let exact = SmoothCounter::new(x, y, mode)?.count(x);
            (exact, xf / l_scale(1.0 / (2.0 * c), xf)?)
        }
        ReportKind::OmegaTail => (omega_tail_count(x, c)?, xf / l_scale(c / 2.0, xf)?),
        ReportKind::Construction => {
            let (family, _) = build_construction(&ConstructionParams::new(x).with_c(c))?;
            let report = verify_family_with(&family, VerifyOptions { prefilter: true, parallel: true });
            if let Some(w) = report.witness {
                return Err(Error::NotDisjoint(w));
            }
            (family.len() as u64, xf / l_scale(c + 1.0 / (2.0 * c), xf)?)
        }
    };
    Ok(CountsRow { kind, x, c, exact, predicted, ratio: exact as f64 / predicted })
}

/// One row per `(kind, x, c)`, in that nesting order.
pub fn bounds_report(kinds: &[ReportKind], xs: &[u64], cs: &[f64]) -> Result<Vec<CountsRow>> {
    let jobs: Vec<(ReportKind, u64, f64)> = kinds
        .iter()
        .flat_map(|&k| xs.iter().flat_map(move |&x| cs.iter().map(move |&c| (k, x, c))))
        .collect();
    jobs.into_par_iter().map(|(k, x, c)| counts_row(k, x, c)).collect()
}

pub const CSV_HEADER: &str = "kind,x,c,exact,predicted,ratio";

pub fn write_csv<W: Write>(rows: &[CountsRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{},{},{},{:.6e},{:.6}", r.kind, r.x, r.c, r.exact, r.predicted, r.ratio)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::verify_family;
    use crate::numtheory::{crt_pair, omega};

    #[test]
    fn omega_tail_examples() {
        assert_eq!(omega_tail_count(100, 10.0).unwrap(), 0);
        assert_eq!(omega_tail_above(100, 2.0).unwrap(), 8);
        let c = 2.0 / omega_scale(100.0).unwrap();
        // c·scale lands within rounding of 2.0 from either side; probe just above
        assert_eq!(omega_tail_count(100, c * (1.0 + 1e-12)).unwrap(), 8);
        assert_eq!(omega_tail_count(1, 1.0).unwrap(), 0);
        assert!(matches!(omega_tail_count(10, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn omega_table_matches_factorization() {
        let t = omega_table(5000).unwrap();
        for n in 1..=5000u64 {
            assert_eq!(usize::from(t[n as usize]), omega(n));
        }
    }

    #[test]
    fn reciprocal_mass_at_100() {
        // exact rational sum evaluated to 40 digits: 2.508094191474670889...
        let m = prime_power_reciprocal_sum(100).unwrap();
        assert!((m - 2.508_094_191_474_67).abs() < 1e-12);
    }

    #[test]
    fn majorant_dominates_count() {
        for x in [100u64, 1000, 20_000] {
            for c in [0.5, 1.0, 2.0] {
                let m = lemma2_majorant(x, c).unwrap();
                assert!(omega_tail_count(x, c).unwrap() as f64 <= m.value);
            }
        }
    }

    #[test]
    fn majorant_matches_direct_sum() {
        let x = 1000;
        let m = lemma2_majorant(x, 1.0).unwrap();
        let mut direct = 0.0;
        let mut fact = 1.0f64;
        for j in 1..80u64 {
            fact *= j as f64;
            if j >= m.first_index {
                direct += m.mass.powi(j as i32) / fact;
            }
        }
        assert!((m.value - x as f64 * direct).abs() < 1e-9 * m.value);
    }

    #[test]
    fn majorant_vanishes_for_huge_c() {
        let m = lemma2_majorant(1000, 1e4).unwrap();
        assert!(m.ln_value < -1000.0);
        assert!(m.value >= 0.0);
        assert_eq!(omega_tail_count(1000, 1e4).unwrap(), 0);
        assert!(ln_factorial(300) - (2..=300u64).map(|k| (k as f64).ln()).sum::<f64>() < 1e-9);
    }

    #[test]
    fn split_examples() {
        assert_eq!(split_squarefull(12), (4, 3));
        assert_eq!(split_squarefull(30), (1, 30));
        assert_eq!(split_squarefull(72), (72, 1));
        assert_eq!(split_squarefull(1), (1, 1));
    }

    #[test]
    fn split_invariants() {
        for n in 1..=100_000u64 {
            let (a, b) = split_squarefull(n);
            assert_eq!(a * b, n);
            assert_eq!(crate::numtheory::gcd(a, b), 1);
            assert!(factorize(b).is_squarefree());
            assert!(factorize(a).parts().iter().all(|pp| pp.exponent >= 2));
        }
    }

    #[test]
    fn psi_chain_small() {
        let chain = psi_chain(1000, l_scale(1.0, 1000.0).unwrap()).unwrap();
        assert_eq!(chain, PsiChain { psi: 461, psi_star: 385, lower: 350 });
        assert!(chain.holds());
    }

    fn crt(a: u64, m: u64, b: u64, n: u64) -> u64 {
        crt_pair(a, m, b, n).unwrap().unwrap().residue
    }

    #[test]
    fn reduce_two_members() {
        // shared α = 4 and class 1 mod 4; disjointness comes from the common factor 3
        let f = Family::new(
            60,
            vec![
                Progression::new(crt(1, 4, 2, 3), 12).unwrap(),
                Progression::new(crt(1, 4, 1, 15), 60).unwrap(),
            ],
        )
        .unwrap();
        assert!(verify_family(&f).ok);
        let r = corollary_reduce(&f, 4).unwrap();
        let got: Vec<(u64, u64)> = r.family.items().iter().map(|p| (p.residue(), p.modulus())).collect();
        assert_eq!(got, vec![(2, 3), (1, 15)]);
        assert_eq!(r.family.x_bound(), 15);
        assert_eq!(r.class, Congruence::new(1, 4));
        assert!(verify_family(&r.family).ok);
    }

    #[test]
    fn coprime_cofactors_cannot_share_a_class() {
        // 12 and 20 meet whenever their residues agree mod 4
        let f = Family::new(
            20,
            vec![
                Progression::new(crt(1, 4, 2, 3), 12).unwrap(),
                Progression::new(crt(1, 4, 4, 5), 20).unwrap(),
            ],
        )
        .unwrap();
        assert!(!verify_family(&f).ok);
        assert!(matches!(corollary_reduce(&f, 4), Err(Error::NotDisjoint(_))));
    }

    #[test]
    fn reduce_identity_and_filtering() {
        let (c, _) = build_construction(&ConstructionParams::new(1000).squarefree(true)).unwrap();
        assert_eq!(corollary_reduce(&c, 1).unwrap().family, c);

        let f = Family::new(
            12,
            vec![
                Progression::new(0, 4).unwrap(),
                Progression::new(3, 6).unwrap(),
                Progression::new(1, 12).unwrap(),
            ],
        )
        .unwrap();
        assert!(verify_family(&f).ok);
        let r = corollary_reduce(&f, 1).unwrap();
        assert_eq!(r.family.items(), &[Progression::new(3, 6).unwrap()]);
        // 4 has β = 1 and is skipped; 12 reduces to 3
        let r = corollary_reduce(&f, 4).unwrap();
        assert_eq!(r.family.items(), &[Progression::new(1, 3).unwrap()]);
        assert_eq!(r.candidates, 1);
        assert!(matches!(corollary_reduce(&f, 6), Err(Error::Domain(_))));
        assert!(matches!(corollary_reduce(&f, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn select_prefers_largest_group() {
        let f = Family::new(
            100,
            vec![
                Progression::new(0, 12).unwrap(),
                Progression::new(1, 20).unwrap(),
                Progression::new(2, 28).unwrap(),
                Progression::new(3, 18).unwrap(),
            ],
        )
        .unwrap();
        let r = corollary_select(&f).unwrap().unwrap();
        assert_eq!(r.alpha, 4);
        assert_eq!(r.candidates, 3);
    }

    #[test]
    fn report_rows() {
        let rows = bounds_report(&ReportKind::ALL, &[16, 10_000], &[1.0]).unwrap();
        assert_eq!(rows.len(), 8);
        for r in &rows {
            assert!(r.predicted.is_finite() && r.predicted > 0.0);
            assert!(r.ratio.is_finite());
        }
        let psi = rows.iter().find(|r| r.kind == ReportKind::Psi && r.x == 10_000).unwrap();
        assert_eq!(psi.exact, 3615);
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("kind,x,c,exact,predicted,ratio\npsi,16,1,"));
        assert_eq!(text.lines().count(), 9);
    }

    #[test]
    fn kind_names_round_trip() {
        for k in ReportKind::ALL {
            assert_eq!(k.as_str().parse::<ReportKind>().unwrap(), k);
        }
    }
}
