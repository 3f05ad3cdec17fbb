//! The single-large-prime lower-bound family.
//!
//! Fix a prime `p ≤ L(c, x)` and take every `q = p·m ≤ x` whose other
//! prime-power factors are all below `p`. Writing the prime powers of `m` as
//! `ℓ_1^h_1 < ... < ℓ_r^h_r < p`, the residue of `q` is the CRT solution of
//!
//! ```text
//! a ≡ ℓ_r^h_r (mod p)
//! a ≡ ℓ_{j-1}^h_{j-1} (mod ℓ_j^h_j)     for 2 ≤ j ≤ r
//! a ≡ 0 (mod ℓ_1^h_1)
//! ```
//!
//! and `q = p` itself (empty chain) gets `0 mod p`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::family::{Family, Progression};
use crate::numtheory::{
    crt_all, enumerate_smooth, factorize, l_scale, prev_prime, Congruence, Smoothness,
};
use crate::{Error, Result};

pub const DEFAULT_C: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionParams {
    pub x: u64,
    /// Scale exponent; the prime is the largest one `≤ L(c, x)`.
    pub c: f64,
    /// Restrict the cofactors `m` to square-free values.
    pub squarefree_only: bool,
    /// Include `q = p` (cofactor `m = 1`) with residue `0 mod p`.
    pub include_p_itself: bool,
}

impl ConstructionParams {
    pub fn new(x: u64) -> Self {
        Self { x, c: DEFAULT_C, squarefree_only: false, include_p_itself: true }
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn squarefree(mut self, on: bool) -> Self {
        self.squarefree_only = on;
        self
    }

    pub fn include_p(mut self, on: bool) -> Self {
        self.include_p_itself = on;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.x < 16 {
            return Err(Error::domain(format!("x below domain (x ≥ 16), got {}", self.x)));
        }
        if self.x > crate::family::MAX_X_BOUND {
            return Err(Error::capacity(format!("x = {} too large", self.x)));
        }
        Ok(())
    }
}

/// Largest prime `≤ L(c, x)`.
pub fn choose_prime(params: &ConstructionParams) -> Result<u64> {
    params.validate()?;
    let bound = l_scale(params.c, params.x as f64)?;
    if bound < 2.0 {
        return Err(Error::domain(format!(
            "L({}, {}) = {bound:.4} < 2, no prime available",
            params.c, params.x
        )));
    }
    if bound >= u64::MAX as f64 {
        return Err(Error::capacity(format!("L({}, {}) exceeds u64", params.c, params.x)));
    }
    prev_prime(bound.floor() as u64).ok_or_else(|| Error::domain("no prime below bound"))
}

/// All `q = p·m ≤ x` with every prime-power factor of `m` below `p`,
/// ascending.
pub fn enumerate_moduli(params: &ConstructionParams, p: u64) -> Result<Vec<u64>> {
    let cofactors = enumerate_smooth(params.x / p, (p - 1) as f64, Smoothness::PowerSmooth)?;
    Ok(cofactors
        .into_iter()
        .filter(|&m| m != 1 || params.include_p_itself)
        .filter(|&m| !params.squarefree_only || factorize(m).is_squarefree())
        .map(|m| p * m)
        .collect())
}

/// The CRT-chain residue for `q` relative to the large prime `p`.
pub fn assign_residue(q: u64, p: u64) -> Result<Progression> {
    if p < 2 || q % p != 0 {
        return Err(Error::domain(format!("{p} does not divide {q}")));
    }
    let cofactor = factorize(q / p);
    let chain = cofactor.parts();
    if let Some(bad) = chain.iter().find(|pp| pp.value() >= p) {
        return Err(Error::domain(format!(
            "prime power {}^{} of {q} is not below {p}",
            bad.prime, bad.exponent
        )));
    }
    let Some(top) = chain.last() else {
        return Progression::new(0, q);
    };

    let mut constraints = Vec::with_capacity(chain.len() + 1);
    constraints.push(Congruence::new(top.value(), p));
    for w in chain.windows(2) {
        constraints.push(Congruence::new(w[0].value(), w[1].value()));
    }
    constraints.push(Congruence::new(0, chain[0].value()));

    let solution = crt_all(&constraints)?
        .expect("pairwise coprime moduli always admit a CRT solution");
    debug_assert_eq!(solution.modulus, q);
    Progression::new(solution.residue, q)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionSummary {
    pub x: u64,
    pub c: f64,
    pub p: u64,
    /// Family size.
    pub t: usize,
    /// `x / (p · L(1/(2c), x))`, the smooth-count estimate without its o(1).
    pub predicted_t: f64,
}

pub fn build_construction(params: &ConstructionParams) -> Result<(Family, ConstructionSummary)> {
    let p = choose_prime(params)?;
    let moduli = enumerate_moduli(params, p)?;
    let items = moduli
        .par_iter()
        .map(|&q| assign_residue(q, p))
        .collect::<Result<Vec<_>>>()?;
    let family = Family::new(params.x, items)?;
    let predicted_t =
        params.x as f64 / (p as f64 * l_scale(1.0 / (2.0 * params.c), params.x as f64)?);
    let summary = ConstructionSummary {
        x: params.x,
        c: params.c,
        p,
        t: family.len(),
        predicted_t,
    };
    Ok((family, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::verify_family;

    fn pairs(f: &Family) -> Vec<(u64, u64)> {
        f.items().iter().map(|p| (p.residue(), p.modulus())).collect()
    }

    #[test]
    fn prime_choice() {
        assert_eq!(choose_prime(&ConstructionParams::new(100)).unwrap(), 5);
        assert_eq!(choose_prime(&ConstructionParams::new(1_000_000)).unwrap(), 67);
        assert_eq!(choose_prime(&ConstructionParams::new(10_000)).unwrap(), 23);
        assert!(matches!(
            choose_prime(&ConstructionParams::new(16).with_c(0.2)),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            choose_prime(&ConstructionParams::new(15)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn moduli_at_100() {
        let params = ConstructionParams::new(100);
        assert_eq!(enumerate_moduli(&params, 5).unwrap(), vec![5, 10, 15, 20, 30, 60]);
        let sf = params.squarefree(true);
        assert_eq!(enumerate_moduli(&sf, 5).unwrap(), vec![5, 10, 15, 30]);
        let no_p = params.include_p(false);
        assert_eq!(enumerate_moduli(&no_p, 5).unwrap(), vec![10, 15, 20, 30, 60]);
        assert!(enumerate_moduli(&ConstructionParams::new(16), 17).unwrap().is_empty());
    }

    #[test]
    fn residue_chain() {
        assert_eq!(assign_residue(60, 5).unwrap(), Progression::new(39, 60).unwrap());
        assert_eq!(assign_residue(10, 5).unwrap(), Progression::new(2, 10).unwrap());
        assert_eq!(assign_residue(5, 5).unwrap(), Progression::new(0, 5).unwrap());
        assert!(matches!(assign_residue(35, 5), Err(Error::Domain(_))));
        assert!(matches!(assign_residue(50, 5), Err(Error::Domain(_))));
        assert!(matches!(assign_residue(12, 5), Err(Error::Domain(_))));
    }

    #[test]
    fn family_at_100() {
        let (f, s) = build_construction(&ConstructionParams::new(100)).unwrap();
        assert_eq!(pairs(&f), vec![(0, 5), (2, 10), (3, 15), (4, 20), (8, 30), (39, 60)]);
        assert_eq!((s.p, s.t), (5, 6));
        assert!(verify_family(&f).ok);

        let (f, s) = build_construction(&ConstructionParams::new(100).squarefree(true)).unwrap();
        assert_eq!(s.t, 4);
        assert_eq!(pairs(&f), vec![(0, 5), (2, 10), (3, 15), (8, 30)]);
    }

    #[test]
    fn degenerate_prime_two() {
        // L(0.5, 16) ≈ 2.32
        let (f, s) = build_construction(&ConstructionParams::new(16).with_c(0.5)).unwrap();
        assert_eq!(s.p, 2);
        assert_eq!(pairs(&f), vec![(0, 2)]);
    }

    #[test]
    fn moduli_have_single_large_prime() {
        for x in [100u64, 1000, 10_000, 50_000] {
            let params = ConstructionParams::new(x);
            let (f, s) = build_construction(&params).unwrap();
            for q in f.moduli() {
                let fz = factorize(q);
                assert_eq!(fz.exponent_of(s.p), 1);
                assert!(fz.parts().iter().filter(|pp| pp.prime != s.p).all(|pp| pp.value() < s.p));
            }
            assert!(verify_family(&f).ok, "x = {x}");
        }
    }

    #[test]
    fn size_matches_independent_count() {
        // #{m ≤ x/p : every prime power of m is < p}, by direct factoring
        for x in [100u64, 2000, 30_000] {
            let (_, s) = build_construction(&ConstructionParams::new(x)).unwrap();
            let direct = (1..=x / s.p)
                .filter(|&m| factorize(m).parts().iter().all(|pp| pp.value() < s.p))
                .count();
            assert_eq!(s.t, direct);
        }
    }
}
