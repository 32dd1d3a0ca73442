//! Rankin-Selberg style partial sums, angle histograms against the Sato-Tate
//! law, and the sixth-moment counterexample sequences.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::{AngleTable, CoefficientTable};
use crate::sieve;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RsSums {
    /// sum lambda1(p) lambda2(p) p^-sigma
    pub cross: f64,
    /// sum lambda1(p)^2 p^-sigma
    pub self1: f64,
    /// sum (lambda1 lambda2)^2 p^-sigma
    pub cross_sq: f64,
    /// sum p^-sigma
    pub prime_sum: f64,
}

/// Truncated diagnostic sums over primes p <= x outside both excluded sets.
pub fn rs_partial_sums(
    t1: &CoefficientTable,
    t2: &CoefficientTable,
    x: u64,
    sigma: f64,
) -> Result<RsSums> {
    if sigma < 1.0 {
        return Err(Error::InvalidInput("sigma must be >= 1".into()));
    }
    let mut out = RsSums { cross: 0.0, self1: 0.0, cross_sq: 0.0, prime_sum: 0.0 };
    for (&p, c1) in t1.prime_coeffs().range(..=x) {
        if !c1.reliable || t1.is_excluded(p) || t2.is_excluded(p) {
            continue;
        }
        let (l1, l2) = match (t1.lambda_p(p), t2.lambda_p(p)) {
            (Some(a), Some(b)) => (a, b),
            _ => continue,
        };
        let w = (p as f64).powf(-sigma);
        out.cross += l1 * l2 * w;
        out.self1 += l1 * l1 * w;
        out.cross_sq += (l1 * l2) * (l1 * l2) * w;
        out.prime_sum += w;
    }
    Ok(out)
}

/// Sato-Tate CDF on [0, pi]: (theta - sin theta cos theta) / pi.
pub fn st_cdf(theta: f64) -> f64 {
    (theta - theta.sin() * theta.cos()) / std::f64::consts::PI
}

#[derive(Debug, Clone, Serialize)]
pub struct StHistogram {
    pub bins: Vec<u64>,
    pub count: u64,
    /// sup-distance between the empirical CDF and the Sato-Tate CDF
    pub discrepancy: f64,
}

pub fn st_histogram(angles: &AngleTable, x: u64, bins: usize) -> Result<StHistogram> {
    if bins < 2 {
        return Err(Error::InvalidInput("need at least 2 bins".into()));
    }
    let mut th: Vec<f64> = angles
        .angles
        .range(..=x)
        .map(|(_, &t)| t)
        .collect();
    if th.is_empty() {
        return Err(Error::InvalidInput("no primes in range".into()));
    }
    th.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut counts = vec![0u64; bins];
    let width = std::f64::consts::PI / bins as f64;
    for &t in &th {
        let mut idx = (t / width) as usize;
        if idx >= bins {
            idx = bins - 1;
        }
        counts[idx] += 1;
    }
    let n = th.len() as f64;
    let mut disc: f64 = 0.0;
    for (i, &t) in th.iter().enumerate() {
        let f = st_cdf(t);
        disc = disc.max((((i + 1) as f64) / n - f).abs());
        disc = disc.max((f - (i as f64) / n).abs());
    }
    Ok(StHistogram { bins: counts, count: th.len() as u64, discrepancy: disc })
}

/// x_p: 0 at p = 2 and p = 3 mod 4, else (-1)^{(p-1)/4} sqrt(2).
pub fn counterexample_x(p: u64) -> f64 {
    if p == 2 || p % 4 == 3 {
        0.0
    } else if ((p - 1) / 4).is_multiple_of(2) {
        std::f64::consts::SQRT_2
    } else {
        -std::f64::consts::SQRT_2
    }
}

/// y_p: the mirror sequence supported on p = 3 mod 4.
pub fn counterexample_y(p: u64) -> f64 {
    if p == 2 || p % 4 == 1 {
        0.0
    } else if ((p - 3) / 4).is_multiple_of(2) {
        std::f64::consts::SQRT_2
    } else {
        -std::f64::consts::SQRT_2
    }
}

/// Chebyshev value U_k(v) with U_k(2 cos t) = sin((k+1)t)/sin t.
pub fn chebyshev_value(k: u32, v: f64) -> f64 {
    let mut prev = 1.0f64;
    let mut cur = v;
    if k == 0 {
        return 1.0;
    }
    for _ in 1..k {
        let next = v * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentReport {
    pub x_count: u64,
    /// averages of U_k(x_p), k = 1..=k_max
    pub x_moments: Vec<f64>,
    pub y_moments: Vec<f64>,
    /// average of x_p^6
    pub x_sixth_raw: f64,
    pub y_sixth_raw: f64,
}

/// Moment diagnostics for the counterexample sequences.
pub fn counterexample_moments(x: u64, k_max: u32) -> Result<MomentReport> {
    if x < 10 {
        return Err(Error::InvalidInput("x must be >= 10".into()));
    }
    let primes = sieve::primes_up_to(x);
    let n = primes.len() as f64;
    let mut xm = vec![0.0f64; k_max as usize];
    let mut ym = vec![0.0f64; k_max as usize];
    let mut x6 = 0.0;
    let mut y6 = 0.0;
    for &p in &primes {
        let xv = counterexample_x(p);
        let yv = counterexample_y(p);
        for k in 1..=k_max {
            xm[(k - 1) as usize] += chebyshev_value(k, xv);
            ym[(k - 1) as usize] += chebyshev_value(k, yv);
        }
        x6 += xv.powi(6);
        y6 += yv.powi(6);
    }
    for v in xm.iter_mut().chain(ym.iter_mut()) {
        *v /= n;
    }
    Ok(MomentReport {
        x_count: primes.len() as u64,
        x_moments: xm,
        y_moments: ym,
        x_sixth_raw: x6 / n,
        y_sixth_raw: y6 / n,
    })
}
