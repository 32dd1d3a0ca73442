//! Sign-based analytics over coefficient tables.
//!
//! Sign conventions: 0 agrees with both signs ("relaxed"). At prime arguments
//! the exact integer a(p) decides; elsewhere a normalized double below
//! `ZERO_EPS` in absolute value counts as zero.

pub mod hy;
pub mod stats;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::CoefficientTable;
use crate::sieve;

pub const ZERO_EPS: f64 = 1e-12;

/// Signs at primes, relaxed-zero policy baked into the comparisons.
pub struct SignSequence {
    pub source: String,
    pub signs: BTreeMap<u64, i8>,
}

pub fn sign_sequence(table: &CoefficientTable, p_max: u64) -> SignSequence {
    let mut signs = BTreeMap::new();
    for (&p, _) in table.prime_coeffs().range(..=p_max) {
        if table.is_excluded(p) {
            continue;
        }
        if let Some(s) = table.sign_p(p) {
            signs.insert(p, s);
        }
    }
    SignSequence {
        source: table.spec().label.clone(),
        signs,
    }
}

/// true when the two signs agree under the relaxed-zero rule.
pub fn relaxed_agree(s1: i8, s2: i8) -> bool {
    s1 == 0 || s2 == 0 || s1 == s2
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FirstNegative {
    /// least n coprime to the excluded set with lambda(n) < 0
    pub n: Option<u64>,
    /// least such prime
    pub prime: Option<u64>,
}

/// Scan for the first sign change. Not-found is a value, not an error.
pub fn first_negative(table: &CoefficientTable, n_max: u64) -> Result<FirstNegative> {
    if n_max > table.n_max() {
        return Err(Error::InvalidInput(format!(
            "table {} covers n <= {}, asked for {}",
            table.spec().label,
            table.n_max(),
            n_max
        )));
    }
    let mut first_n = None;
    for n in 1..=n_max {
        if let Some(lam) = table.lambda(n) {
            if lam < -ZERO_EPS {
                first_n = Some(n);
                break;
            }
        }
    }
    let mut first_p = None;
    for (&p, c) in table.prime_coeffs().range(..=n_max.max(table.p_max())) {
        if !c.reliable || table.is_excluded(p) {
            continue;
        }
        if c.value < 0 {
            first_p = Some(p);
            break;
        }
    }
    Ok(FirstNegative { n: first_n, prime: first_p })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Agreement {
    pub density: f64,
    pub disagreements: u64,
    pub primes_considered: u64,
}

/// Fraction of primes p <= x (outside both excluded sets) whose signs agree
/// under the relaxed rule.
pub fn sign_agreement(t1: &CoefficientTable, t2: &CoefficientTable, x: u64) -> Result<Agreement> {
    if x > t1.p_max().max(t1.n_max()) || x > t2.p_max().max(t2.n_max()) {
        return Err(Error::InvalidInput("tables do not cover p <= x".into()));
    }
    let mut considered = 0u64;
    let mut disagree = 0u64;
    for (&p, c1) in t1.prime_coeffs().range(..=x) {
        if !c1.reliable || t1.is_excluded(p) || t2.is_excluded(p) {
            continue;
        }
        let (s1, s2) = match (t1.sign_p(p), t2.sign_p(p)) {
            (Some(a), Some(b)) => (a, b),
            _ => continue,
        };
        considered += 1;
        if !relaxed_agree(s1, s2) {
            disagree += 1;
        }
    }
    if considered == 0 {
        return Err(Error::InvalidInput("no primes in range".into()));
    }
    Ok(Agreement {
        density: 1.0 - disagree as f64 / considered as f64,
        disagreements: disagree,
        primes_considered: considered,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FirstDifference {
    pub n: Option<u64>,
    pub prime: Option<u64>,
}

/// Least n coprime to both excluded sets where the signs are strictly
/// opposite, plus the prime-argument variant.
pub fn first_sign_difference(
    t1: &CoefficientTable,
    t2: &CoefficientTable,
    n_max: u64,
) -> Result<FirstDifference> {
    if n_max > t1.n_max() || n_max > t2.n_max() {
        return Err(Error::InvalidInput("tables do not cover n <= n_max".into()));
    }
    let mut first_n = None;
    for n in 1..=n_max {
        if let (Some(l1), Some(l2)) = (t1.lambda(n), t2.lambda(n)) {
            if l1 * l2 < -ZERO_EPS {
                first_n = Some(n);
                break;
            }
        }
    }
    let mut first_p = None;
    for (&p, c1) in t1.prime_coeffs().range(..=n_max) {
        if !c1.reliable || t1.is_excluded(p) || t2.is_excluded(p) {
            continue;
        }
        if let (Some(s1), Some(s2)) = (t1.sign_p(p), t2.sign_p(p)) {
            if s1 as i32 * s2 as i32 == -1 {
                first_p = Some(p);
                break;
            }
        }
    }
    Ok(FirstDifference { n: first_n, prime: first_p })
}

/// S(f, x): sum of lambda(n) over squarefree n <= x coprime to the excluded
/// set. Fixed ascending order keeps the float total deterministic.
pub fn sum_s(table: &CoefficientTable, x: u64) -> Result<f64> {
    if x > table.n_max() {
        return Err(Error::InvalidInput("table does not cover n <= x".into()));
    }
    let flags = sieve::squarefree_flags(x);
    let mut total = 0.0f64;
    for n in 1..=x {
        if !flags[n as usize] {
            continue;
        }
        if let Some(lam) = table.lambda(n) {
            total += lam;
        }
    }
    Ok(total)
}
