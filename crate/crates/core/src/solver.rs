//! Exact `f(x)` for small `x`.
//!
//! [`solve_exact`] is a depth-first branch and bound over the moduli
//! `x, x-1, ..., 2`. At each modulus it first tries every residue compatible
//! with the progressions already chosen, then the branch that skips the
//! modulus. Two bounds prune the tree, both exact (densities are integers
//! scaled by `lcm(2..=x)`):
//!
//! * density: the chosen classes may never exceed total density 1;
//! * remaining budget: the most further moduli that could still fit in the
//!   unused density, taking reciprocals smallest first.
//!
//! [`brute_force_oracle`] shares none of this: it scans one lcm period per
//! pair to decide intersection and enumerates every feasible assignment.

use serde::{Deserialize, Serialize};

use crate::construction::{build_construction, ConstructionParams};
use crate::family::{Family, Progression};
use crate::numtheory::gcd;
use crate::{Error, Result};

/// Largest `x` for which [`solve_exact`] can represent densities exactly.
pub const X_MAX_EXACT: u64 = 80;

/// Largest `x` accepted by [`brute_force_oracle`].
pub const X_ORACLE_MAX: u64 = 12;

pub const DEFAULT_NODE_BUDGET: u64 = 100_000_000;

const PROGRESS_EVERY: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pruning {
    pub density_bound: bool,
    pub remaining_budget: bool,
}

impl Default for Pruning {
    fn default() -> Self {
        Self { density_bound: true, remaining_budget: true }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModulusOrder {
    #[default]
    Descending,
    Ascending,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub x: u64,
    pub node_budget: u64,
    /// Pin the first chosen progression to residue 0.
    pub fix_translation: bool,
    pub pruning: Pruning,
    pub order: ModulusOrder,
}

impl SearchConfig {
    pub fn new(x: u64) -> Self {
        Self {
            x,
            node_budget: DEFAULT_NODE_BUDGET,
            fix_translation: true,
            pruning: Pruning::default(),
            order: ModulusOrder::default(),
        }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.node_budget = budget;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchResult {
    pub k_max: usize,
    pub witness: Family,
    pub nodes_explored: u64,
    /// The search ran to completion, so `k_max == f(x)`.
    pub proven_optimal: bool,
}

fn lcm_up_to(x: u64) -> Option<u128> {
    (2..=x as u128).try_fold(1u128, |acc, q| {
        let g = num_integer::gcd(acc, q);
        (acc / g).checked_mul(q)
    })
}

struct Search<'a> {
    cfg: &'a SearchConfig,
    moduli: Vec<u64>,
    /// weight[i] = D / moduli[i]
    weights: Vec<u128>,
    /// prefix[i] = weights[0] + ... + weights[i-1]
    prefix: Vec<u128>,
    total: u128,
    chosen: Vec<Progression>,
    used: u128,
    best: Vec<Progression>,
    nodes: u64,
    exhausted: bool,
    forbidden: Vec<bool>,
}

impl Search<'_> {
    /// Largest number of moduli from `moduli[idx..]` whose weights fit in
    /// `room`.
    fn greedy_fit(&self, idx: usize, room: u128) -> usize {
        let n = self.moduli.len();
        match self.cfg.order {
            // remaining weights ascend along the order: take a prefix of them
            ModulusOrder::Descending => {
                let base = self.prefix[idx];
                self.prefix[idx..=n].partition_point(|&s| s - base <= room) - 1
            }
            // remaining weights descend: the lightest are at the end
            ModulusOrder::Ascending => {
                let end = self.prefix[n];
                let mut lo = 0;
                let mut hi = n - idx;
                while lo < hi {
                    let mid = (lo + hi + 1) / 2;
                    if end - self.prefix[n - mid] <= room {
                        lo = mid;
                    } else {
                        hi = mid - 1;
                    }
                }
                lo
            }
        }
    }

    fn dfs(&mut self, idx: usize) {
        self.nodes += 1;
        if self.nodes > self.cfg.node_budget {
            self.exhausted = true;
            return;
        }
        if self.nodes % PROGRESS_EVERY == 0 {
            log::info!("x={}: {} nodes, best {}", self.cfg.x, self.nodes, self.best.len());
        }
        if self.chosen.len() > self.best.len() {
            self.best = self.chosen.clone();
        }
        let n = self.moduli.len();
        if idx == n {
            return;
        }
        let room = self.total - self.used;
        let optimistic = if self.cfg.pruning.remaining_budget {
            self.greedy_fit(idx, room)
        } else {
            n - idx
        };
        if self.chosen.len() + optimistic <= self.best.len() {
            return;
        }

        let q = self.moduli[idx];
        let w = self.weights[idx];
        if !self.cfg.pruning.density_bound || w <= room {
            for a in self.compatible_residues(q) {
                self.chosen.push(Progression::new(a, q).expect("modulus ≥ 2"));
                self.used += w;
                self.dfs(idx + 1);
                self.used -= w;
                self.chosen.pop();
                if self.exhausted {
                    return;
                }
            }
        }
        self.dfs(idx + 1);
    }

    fn compatible_residues(&mut self, q: u64) -> Vec<u64> {
        if self.cfg.fix_translation && self.chosen.is_empty() {
            return vec![0];
        }
        let q_us = q as usize;
        self.forbidden.clear();
        self.forbidden.resize(q_us, false);
        for p in &self.chosen {
            let g = gcd(q, p.modulus()) as usize;
            let mut a = p.residue() as usize % g;
            while a < q_us {
                self.forbidden[a] = true;
                a += g;
            }
        }
        (0..q).filter(|&a| !self.forbidden[a as usize]).collect()
    }
}

/// Maximum disjoint family with distinct moduli in `[2, x]`.
pub fn solve_exact(cfg: &SearchConfig) -> Result<SearchResult> {
    if cfg.x < 2 {
        return Err(Error::domain(format!("x must be at least 2, got {}", cfg.x)));
    }
    if cfg.x > X_MAX_EXACT {
        return Err(Error::capacity(format!(
            "exact search supports x ≤ {X_MAX_EXACT}, got {}",
            cfg.x
        )));
    }
    let total = lcm_up_to(cfg.x)
        .ok_or_else(|| Error::capacity(format!("lcm(2..={}) overflows u128", cfg.x)))?;

    let mut moduli: Vec<u64> = (2..=cfg.x).collect();
    if cfg.order == ModulusOrder::Descending {
        moduli.reverse();
    }
    let weights: Vec<u128> = moduli.iter().map(|&q| total / q as u128).collect();
    let mut prefix = Vec::with_capacity(weights.len() + 1);
    prefix.push(0u128);
    for w in &weights {
        prefix.push(prefix.last().unwrap() + w);
    }

    let mut search = Search {
        cfg,
        moduli,
        weights,
        prefix,
        total,
        chosen: Vec::new(),
        used: 0,
        best: Vec::new(),
        nodes: 0,
        exhausted: false,
        forbidden: Vec::new(),
    };
    search.dfs(0);
    log::debug!("solve x={} explored {} nodes", cfg.x, search.nodes);

    let witness = Family::new(cfg.x, search.best)?;
    Ok(SearchResult {
        k_max: witness.len(),
        witness,
        nodes_explored: search.nodes.min(cfg.node_budget),
        proven_optimal: !search.exhausted,
    })
}

/// `f(x)` by exhaustive enumeration, for validating [`solve_exact`].
///
/// Intersection of two classes is decided by scanning one lcm period, and the
/// only pruning is feasibility.
pub fn brute_force_oracle(x: u64) -> Result<usize> {
    if x < 2 {
        return Err(Error::domain(format!("x must be at least 2, got {x}")));
    }
    if x > X_ORACLE_MAX {
        return Err(Error::capacity(format!(
            "brute-force oracle supports x ≤ {X_ORACLE_MAX}, got {x}"
        )));
    }
    // class id for (q, a): offset[q] + a
    let x = x as usize;
    let mut offset = vec![0usize; x + 2];
    for q in 2..=x {
        offset[q + 1] = offset[q] + q;
    }
    let classes = offset[x + 1];
    let mut meets = vec![false; classes * classes];
    for q in 2..=x {
        for r in 2..=x {
            let period = q * r;
            for a in 0..q {
                for b in 0..r {
                    let hit = (0..period).any(|n| n % q == a && n % r == b);
                    meets[(offset[q] + a) * classes + offset[r] + b] = hit;
                }
            }
        }
    }

    fn walk(q: usize, x: usize, chosen: &mut Vec<usize>, offset: &[usize], meets: &[bool], classes: usize) -> usize {
        if q > x {
            return chosen.len();
        }
        let mut best = walk(q + 1, x, chosen, offset, meets, classes);
        for a in 0..q {
            let id = offset[q] + a;
            if chosen.iter().all(|&c| !meets[c * classes + id]) {
                chosen.push(id);
                best = best.max(walk(q + 1, x, chosen, offset, meets, classes));
                chosen.pop();
            }
        }
        best
    }

    Ok(walk(2, x, &mut Vec::new(), &offset, &meets, classes))
}

/// Size of the verified construction family at default parameters: a
/// certified lower bound on `f(x)`. Falls back to `{0 mod 2}` when the
/// construction is empty.
pub fn lower_bound_from_construction(x: u64) -> Result<(usize, Family)> {
    let (family, _) = build_construction(&ConstructionParams::new(x))?;
    let family = if family.is_empty() {
        Family::new(x, vec![Progression::new(0, 2)?])?
    } else {
        family
    };
    let family = family.certify().map_err(Error::NotDisjoint)?;
    Ok((family.len(), family))
}
