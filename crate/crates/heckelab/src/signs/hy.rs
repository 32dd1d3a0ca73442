//! The auxiliary multiplicative function h_y and its exact summation.
//!
//! h_y(p) = 1 for p <= sqrt(y), 0 for sqrt(y) < p <= y, -2 for p > y (always
//! 0 at excluded primes and on non-squarefree arguments). For 1 <= u <= 3/2
//! an integer n <= y^u carries at most one prime factor above y, which splits
//! the sum into a smooth count minus twice a prime-times-squarefree
//! correction; both pieces are computed exactly and recombine exactly.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::CoefficientTable;
use crate::sieve;
use crate::signs::ZERO_EPS;

/// Enumeration ceiling for y^u.
pub const ENUMERATION_BUDGET: u64 = 30_000_000;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct HSumBreakdown {
    /// count of squarefree sqrt(y)-smooth n <= y^u coprime to the excluded set
    pub smooth_count: i64,
    /// sum over primes y < p <= y^u of the matching squarefree counts
    pub prime_correction: i64,
    /// smooth_count - 2 * prime_correction
    pub total: i64,
}

/// h_y(p) for a concrete prime, shared by the summation and the pointwise
/// checks.
pub fn h_value_at_prime(p: u64, y: f64, excluded: &BTreeSet<u64>) -> f64 {
    if excluded.contains(&p) {
        return 0.0;
    }
    let pf = p as f64;
    if pf * pf <= y {
        1.0
    } else if pf <= y {
        0.0
    } else {
        -2.0
    }
}

/// Exact sum of h_y(n) for n <= y^u with the excluded set given by the prime
/// factors of N.
pub fn h_sum(y: f64, u: f64, n_level: u64) -> Result<HSumBreakdown> {
    let excluded: BTreeSet<u64> = sieve::factorize(n_level).into_iter().map(|(p, _)| p).collect();
    h_sum_excluded(y, u, &excluded)
}

pub fn h_sum_excluded(y: f64, u: f64, excluded: &BTreeSet<u64>) -> Result<HSumBreakdown> {
    if !(1.0..=1.5).contains(&u) {
        return Err(Error::InvalidInput(format!("u = {u} outside [1, 3/2]")));
    }
    if y <= 1.0 {
        return Err(Error::InvalidInput("y must exceed 1".into()));
    }
    let x = y.powf(u).floor() as u64;
    if x > ENUMERATION_BUDGET {
        return Err(Error::Budget(format!("y^u = {x} exceeds {ENUMERATION_BUDGET}")));
    }

    // smooth piece: DFS over primes <= sqrt(y), products kept <= y^u
    let small_primes: Vec<u64> = sieve::primes_up_to(y.sqrt().floor() as u64)
        .into_iter()
        .filter(|&p| (p as f64) * (p as f64) <= y && !excluded.contains(&p))
        .collect();
    let smooth_count = count_squarefree_products(&small_primes, x);

    // correction piece: one prime in (y, y^u], squarefree cofactor <= y^u / p
    let y_floor = y.floor() as u64;
    let mut prime_correction = 0i64;
    if x > y_floor {
        let t_max = x / (y_floor + 1).max(1);
        let prefix = squarefree_coprime_prefix(t_max, excluded);
        for p in sieve::primes_in_range(y_floor, x) {
            if (p as f64) <= y || excluded.contains(&p) {
                continue;
            }
            prime_correction += prefix[(x / p) as usize];
        }
    }

    Ok(HSumBreakdown {
        smooth_count,
        prime_correction,
        total: smooth_count - 2 * prime_correction,
    })
}

/// Number of squarefree products of the given primes that stay <= bound
/// (the empty product counts). DFS keeps memory at O(#primes).
fn count_squarefree_products(primes: &[u64], bound: u64) -> i64 {
    fn go(primes: &[u64], start: usize, room: u64) -> i64 {
        let mut count = 1i64;
        for i in start..primes.len() {
            let p = primes[i];
            if p > room {
                break;
            }
            count += go(primes, i + 1, room / p);
        }
        count
    }
    go(primes, 0, bound)
}

/// prefix[t] = #{ m <= t : m squarefree, coprime to the excluded set }.
fn squarefree_coprime_prefix(t_max: u64, excluded: &BTreeSet<u64>) -> Vec<i64> {
    let flags = sieve::squarefree_flags(t_max);
    let mut prefix = vec![0i64; t_max as usize + 1];
    let mut acc = 0i64;
    for m in 1..=t_max {
        if flags[m as usize] && !excluded.iter().any(|&p| m % p == 0) {
            acc += 1;
        }
        prefix[m as usize] = acc;
    }
    prefix
}

#[derive(Debug, Clone, Serialize)]
pub struct LowerBoundReport {
    /// the nonnegativity hypothesis lambda(n) >= 0 for n <= y held
    pub applicable: bool,
    /// witness n when it did not
    pub hypothesis_witness: Option<u64>,
    /// min over included p <= y^u of lambda(p) - h_y(p)
    pub min_g_margin: f64,
    pub s_value: f64,
    pub h_total: i64,
    /// S(f, y^u) - sum h_y(n); the claimed inequality needs this >= -1e-6
    pub s_margin: f64,
    pub pass: bool,
}

/// Mechanics of the combinatorial lower bound S(f, y^u) >= sum h_y(n):
/// checks g_y(p) = lambda(p) - h_y(p) >= 0 on included primes and the sum
/// inequality itself. A failed hypothesis is reported as inapplicable.
pub fn verify_lower_bound_mechanics(
    table: &CoefficientTable,
    y: f64,
    u: f64,
) -> Result<LowerBoundReport> {
    let x = y.powf(u).floor() as u64;
    if x > table.n_max() {
        return Err(Error::InvalidInput(format!(
            "table {} covers n <= {}, need y^u = {x}",
            table.spec().label,
            table.n_max()
        )));
    }
    let excluded = &table.spec().excluded_primes;

    // hypothesis: nonnegative up to y on included n
    for n in 1..=(y.floor() as u64).min(table.n_max()) {
        if let Some(lam) = table.lambda(n) {
            if lam < -ZERO_EPS {
                return Ok(LowerBoundReport {
                    applicable: false,
                    hypothesis_witness: Some(n),
                    min_g_margin: f64::NAN,
                    s_value: f64::NAN,
                    h_total: 0,
                    s_margin: f64::NAN,
                    pass: false,
                });
            }
        }
    }

    let mut min_g = f64::INFINITY;
    for (&p, c) in table.prime_coeffs().range(..=x) {
        if !c.reliable || excluded.contains(&p) {
            continue;
        }
        let g = table.lambda_p(p).unwrap() - h_value_at_prime(p, y, excluded);
        min_g = min_g.min(g);
    }

    let s = crate::signs::sum_s(table, x)?;
    let h = h_sum_excluded(y, u, excluded)?;
    let s_margin = s - h.total as f64;
    let pass = min_g >= -1e-9 && s_margin >= -1e-6;
    Ok(LowerBoundReport {
        applicable: true,
        hypothesis_witness: None,
        min_g_margin: min_g,
        s_value: s,
        h_total: h.total,
        s_margin,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{build_table, FormSpec};

    /// Oracle: evaluate h_y(n) for every n <= y^u by factorization, no
    /// combinatorial split.
    fn h_sum_direct(y: f64, u: f64, excluded: &BTreeSet<u64>) -> i64 {
        let x = y.powf(u).floor() as u64;
        let spf = sieve::SpfSieve::new(x);
        let mut total = 0i64;
        for n in 1..=x {
            let mut m = n;
            let mut val = 1i64;
            while m > 1 {
                let p = spf.smallest_factor(m);
                m /= p;
                if m % p == 0 {
                    val = 0; // non-squarefree
                    break;
                }
                let hp = h_value_at_prime(p, y, excluded);
                if hp == 0.0 {
                    val = 0;
                    break;
                }
                val *= hp as i64;
            }
            total += val;
        }
        total
    }

    #[test]
    fn smooth_count_fixture() {
        // squarefree 10-smooth n <= 100: products of subsets of {2,3,5,7};
        // enumeration gives 14 of them
        let b = h_sum(100.0, 1.0, 1).unwrap();
        assert_eq!(b.smooth_count, 14);
        assert_eq!(b.prime_correction, 0); // no primes in (y, y^u] at u = 1
        assert_eq!(b.total, 14);
    }

    #[test]
    fn split_matches_direct_evaluation() {
        let none = BTreeSet::new();
        let six: BTreeSet<u64> = [2u64, 3].into_iter().collect();
        for (y, u) in [(100.0, 1.3), (300.0, 1.5), (1000.0, 1.2), (100.0, 1.0)] {
            let a = h_sum_excluded(y, u, &none).unwrap();
            assert_eq!(a.total, h_sum_direct(y, u, &none), "y={y} u={u}");
            assert_eq!(a.total, a.smooth_count - 2 * a.prime_correction);
            let b = h_sum_excluded(y, u, &six).unwrap();
            assert_eq!(b.total, h_sum_direct(y, u, &six), "y={y} u={u} N=6");
        }
    }

    #[test]
    fn budget_and_domain_errors() {
        assert!(h_sum(1e6, 1.5, 1).is_err()); // budget
        assert!(h_sum(100.0, 0.9, 1).is_err());
        assert!(h_sum(100.0, 1.6, 1).is_err());
    }

    #[test]
    fn lower_bound_on_positive_form() {
        // E4 has nonnegative lambda everywhere, hypothesis holds for any y
        let t = build_table(&FormSpec::eisenstein_e4(), 200, 200).unwrap();
        let r = verify_lower_bound_mechanics(&t, 50.0, 1.2).unwrap();
        assert!(r.applicable);
        assert!(r.pass, "min_g = {}, s_margin = {}", r.min_g_margin, r.s_margin);
        assert!(r.min_g_margin >= -1e-9);
        assert!(r.s_margin >= -1e-6);
    }

    #[test]
    fn delta_is_inapplicable() {
        let t = build_table(&FormSpec::level1_newform(12).unwrap(), 100, 100).unwrap();
        let r = verify_lower_bound_mechanics(&t, 10.0, 1.2).unwrap();
        assert!(!r.applicable);
        assert_eq!(r.hypothesis_witness, Some(2));
    }

    #[test]
    fn curve_with_late_sign_change_passes() {
        // family scan locates the curve whose first negative comes latest;
        // any y below it keeps the hypothesis intact
        let mut best: Option<(i64, i64, u64)> = None;
        for a4 in -10i64..=10 {
            for a6 in -10i64..=10 {
                let Ok(spec) = FormSpec::elliptic_curve(a4, a6) else { continue };
                let t = build_table(&spec, 120, 120).unwrap();
                let fnn = crate::signs::first_negative(&t, 120).unwrap();
                let nf = fnn.n.unwrap_or(121);
                if best.map(|(_, _, b)| nf > b).unwrap_or(true) {
                    best = Some((a4, a6, nf));
                }
            }
        }
        let (a4, a6, nf) = best.unwrap();
        assert!(nf >= 10, "scan found only n_f = {nf}");
        let y = (nf - 1).min(40) as f64;
        let u = 1.2f64;
        let cover = y.powf(u).ceil() as u64;
        let spec = FormSpec::elliptic_curve(a4, a6).unwrap();
        let t = build_table(&spec, cover, cover).unwrap();
        let r = verify_lower_bound_mechanics(&t, y, u).unwrap();
        assert!(r.applicable, "curve ({a4},{a6}) n_f={nf}");
        assert!(r.pass, "curve ({a4},{a6}): min_g={} s_margin={}", r.min_g_margin, r.s_margin);
    }

    #[test]
    fn synthetic_extremal_table_passes() {
        // lambda(p) = 2 for every prime: g_y(p) = 2 - h_y(p) >= 0 with margin.
        // Realized through E4 whose lambda(p) >= 2 at all p, checked above;
        // here we check the margin explicitly at small y.
        let t = build_table(&FormSpec::eisenstein_e4(), 64, 64).unwrap();
        let r = verify_lower_bound_mechanics(&t, 16.0, 1.5).unwrap();
        assert!(r.applicable && r.pass);
        assert!(r.min_g_margin > 1.0 - 1e-9); // lambda(p) >= 2, h <= 1 below y
    }
}
