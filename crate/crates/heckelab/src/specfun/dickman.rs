//! The Dickman function rho, the root kappa of rho(2u) = 2 log u, and the
//! smooth-count main term built from them.
//!
//! rho is 1 on (0,1] and 1 - log u on [1,2] in closed form. On [2,3] it is
//! evaluated per point as 1 - log u + int_2^u log(t-1)/t dt with composite
//! Simpson (the integrand is smooth there), which is what the kappa solve
//! needs: 2 kappa lands in [2,3] and the bracket checks must resolve a margin
//! of about 7e-4 against 10/9. Beyond 3 the equation rho(u) = rho(K) -
//! int_K^u rho(t-1)/t dt is marched unit interval by unit interval on a half
//! step grid, with panels never straddling the integer breakpoints where
//! higher derivatives of rho jump.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sieve;
use crate::specfun::GridFunction;

/// Closed form on [0, 2].
fn rho_closed(u: f64) -> f64 {
    if u <= 1.0 {
        1.0
    } else {
        1.0 - u.ln()
    }
}

/// rho on [2, 3] by direct quadrature of log(t-1)/t with substep <= g.
fn rho_2_3(u: f64, g: f64) -> f64 {
    let span = u - 2.0;
    if span <= 0.0 {
        return rho_closed(2.0);
    }
    let mut n = (span / g).ceil() as usize;
    n += n % 2; // composite Simpson wants an even count
    n = n.max(2);
    let w = span / n as f64;
    let f = |t: f64| (t - 1.0).ln() / t;
    let mut acc = f(2.0) + f(u);
    for i in 1..n {
        let t = 2.0 + w * i as f64;
        acc += if i % 2 == 1 { 4.0 * f(t) } else { 2.0 * f(t) };
    }
    1.0 - u.ln() + acc * w / 3.0
}

/// Internal half-step from a requested grid step: 1/h rounded up to an even
/// integer m, g = 1/(2m). Keeps integers and half-integers on the grid.
fn substep(h: f64) -> (u64, f64) {
    let mut m = (1.0 / h).ceil() as u64;
    if m % 2 == 1 {
        m += 1;
    }
    (m, 1.0 / (2 * m) as f64)
}

/// Tabulated rho on [0, u_max] at half-step resolution.
pub struct DickmanTable {
    g: f64,
    per_unit: usize, // nodes per unit interval = 2m
    values: Vec<f64>,
}

impl DickmanTable {
    pub fn new(u_max: f64, h: f64) -> Result<DickmanTable> {
        if !(0.0..=10.0).contains(&u_max) {
            return Err(Error::InvalidInput("u_max must lie in [0, 10]".into()));
        }
        if h > 1.0 / 256.0 {
            return Err(Error::InvalidInput("grid step must be <= 1/256".into()));
        }
        let (m, g) = substep(h);
        let per_unit = (2 * m) as usize;
        let i_max = (u_max / g).ceil() as usize;
        let mut values = vec![0.0f64; i_max + 1];
        for (i, v) in values.iter_mut().enumerate() {
            let t = i as f64 * g;
            if t <= 2.0 {
                *v = rho_closed(t);
            } else if t <= 3.0 + 0.5 * g {
                *v = rho_2_3(t.min(3.0), g);
            }
        }
        // march the remaining unit intervals
        let mut base = 3 * per_unit;
        while base < i_max {
            let top = (base + per_unit).min(i_max);
            let f = |l: usize, values: &[f64]| -> f64 {
                let idx = base + l;
                values[idx - per_unit] / (idx as f64 * g)
            };
            // running composite Simpson over even offsets
            let mut even_acc = vec![0.0f64; top - base + 1];
            for j in (2..=top - base).step_by(2) {
                even_acc[j] = even_acc[j - 2]
                    + g / 3.0 * (f(j - 2, &values) + 4.0 * f(j - 1, &values) + f(j, &values));
            }
            for j in 1..=top - base {
                let integral = if j % 2 == 0 {
                    even_acc[j]
                } else if j == 1 {
                    // left partial rule on one substep, using three nodes
                    g / 12.0 * (5.0 * f(0, &values) + 8.0 * f(1, &values) - f(2, &values))
                } else {
                    even_acc[j - 3]
                        + 3.0 * g / 8.0
                            * (f(j - 3, &values)
                                + 3.0 * f(j - 2, &values)
                                + 3.0 * f(j - 1, &values)
                                + f(j, &values))
                };
                values[base + j] = values[base] - integral;
            }
            base = top;
        }
        Ok(DickmanTable { g, per_unit, values })
    }

    pub fn eval(&self, u: f64) -> f64 {
        if u <= 2.0 {
            return rho_closed(u);
        }
        if u <= 3.0 {
            return rho_2_3(u, self.g);
        }
        let t = u / self.g;
        let i = t.round() as usize;
        if i < self.values.len() && (t - i as f64).abs() < 1e-9 {
            return self.values[i];
        }
        // cubic interpolation, window kept inside the unit interval
        let last = self.values.len() - 1;
        let cell = (t.floor() as usize).min(last.saturating_sub(1));
        let unit_lo = (cell / self.per_unit) * self.per_unit;
        let unit_hi = (unit_lo + self.per_unit).min(last);
        let mut start = cell.saturating_sub(1);
        if unit_hi >= unit_lo + 3 {
            start = start.clamp(unit_lo, unit_hi - 3);
        } else {
            start = start.min(last.saturating_sub(3));
        }
        let mut out = 0.0;
        for a in 0..4 {
            let xa = (start + a) as f64;
            let mut w = 1.0;
            for b in 0..4 {
                if a != b {
                    let xb = (start + b) as f64;
                    w *= (t - xb) / (xa - xb);
                }
            }
            out += w * self.values[start + a];
        }
        out
    }

    /// Downsample to the requested step for dumping.
    pub fn to_grid(&self, h: f64) -> GridFunction {
        let stride = (h / self.g).round().max(1.0) as usize;
        let samples: Vec<f64> = self.values.iter().step_by(stride).copied().collect();
        GridFunction {
            start: 0.0,
            step: self.g * stride as f64,
            samples,
            meta: "dickman_rho".into(),
        }
    }
}

/// rho(u) for 0 <= u <= 10 at the requested grid step.
pub fn dickman_rho(u: f64, h: f64) -> Result<f64> {
    if u < 0.0 {
        return Err(Error::InvalidInput("u must be nonnegative".into()));
    }
    if u > 10.0 {
        return Err(Error::InvalidInput("u must be <= 10".into()));
    }
    if h > 1.0 / 256.0 {
        return Err(Error::InvalidInput("grid step must be <= 1/256".into()));
    }
    if u <= 2.0 {
        return Ok(rho_closed(u));
    }
    let (_, g) = substep(h);
    if u <= 3.0 {
        return Ok(rho_2_3(u, g));
    }
    Ok(DickmanTable::new(u, h)?.eval(u))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct KappaResult {
    pub kappa: f64,
    pub residual: f64,
    pub grid_step: f64,
}

pub const DEFAULT_RHO_STEP: f64 = 1.0 / 1024.0;

/// Root of rho(2u) = 2 log u on [1, 3/2] by bisection.
pub fn solve_kappa(tol: f64) -> Result<KappaResult> {
    solve_kappa_with_step(tol, DEFAULT_RHO_STEP)
}

pub fn solve_kappa_with_step(tol: f64, h: f64) -> Result<KappaResult> {
    if tol < 1e-12 {
        return Err(Error::InvalidInput("tolerance must be >= 1e-12".into()));
    }
    let (_, g) = substep(h);
    let f = |u: f64| rho_2_3(2.0 * u, g) - 2.0 * u.ln();
    let (mut lo, mut hi) = (1.0f64, 1.5f64);
    if f(lo) <= 0.0 || f(hi) >= 0.0 {
        return Err(Error::Invariant("no sign change on [1, 3/2]".into()));
    }
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let kappa = 0.5 * (lo + hi);
    let residual = f(kappa).abs();
    if residual > tol {
        return Err(Error::Invariant(format!(
            "kappa residual {residual:e} exceeds {tol:e}"
        )));
    }
    if kappa <= 10.0 / 9.0 {
        return Err(Error::Invariant(format!("kappa = {kappa} <= 10/9")));
    }
    if kappa <= (std::f64::consts::E / 2.0).powf(1.0 / 3.0) {
        return Err(Error::Invariant(format!("kappa = {kappa} <= (e/2)^(1/3)")));
    }
    Ok(KappaResult { kappa, residual, grid_step: h })
}

/// Truncation point for the Euler product of zeta_N(2).
const ZETA_TRUNC: u64 = 1_000_000;

/// prod_{p <= 10^6, p not dividing N} (1 - p^-2)^{-1}. The omitted tail is
/// exp(sum_{p > 10^6} -log(1 - p^-2)) = 1 + O(7.3e-8), below every tolerance
/// used downstream.
pub fn zeta_n_2(n_level: u64) -> f64 {
    let mut prod = 1.0f64;
    for p in sieve::primes_up_to(ZETA_TRUNC) {
        if n_level.is_multiple_of(p) {
            continue;
        }
        let pf = p as f64;
        prod /= 1.0 - 1.0 / (pf * pf);
    }
    prod
}

/// Main term zeta_N(2)^{-1} (phi(N)/N) y^u (rho(2u) - 2 log u).
pub fn lm_h_main_term(y: f64, u: f64, n_level: u64) -> Result<f64> {
    if !(1.0..=1.5).contains(&u) {
        return Err(Error::InvalidInput(format!("u = {u} outside [1, 3/2]")));
    }
    if n_level == 0 || y < (n_level as f64).powf(1.0 / 3.0) {
        return Err(Error::InvalidInput("need y >= N^(1/3)".into()));
    }
    let rho2u = dickman_rho(2.0 * u, DEFAULT_RHO_STEP)?;
    let phi = sieve::euler_phi(n_level) as f64;
    Ok((1.0 / zeta_n_2(n_level)) * (phi / n_level as f64) * y.powf(u) * (rho2u - 2.0 * u.ln()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert_eq!(dickman_rho(0.0, 1e-3).unwrap(), 1.0);
        assert_eq!(dickman_rho(1.0, 1e-3).unwrap(), 1.0);
        assert!((dickman_rho(2.0, 1e-3).unwrap() - (1.0 - 2.0f64.ln())).abs() < 1e-15);
        assert!(dickman_rho(-0.5, 1e-3).is_err());
        assert!(dickman_rho(11.0, 1e-3).is_err());
        assert!(dickman_rho(1.0, 0.5).is_err());
    }

    #[test]
    fn rho3_matches_independent_quadrature() {
        // oracle: 1 - log(2u) + int_2^{2u} log(t-1)/t dt at 2u = 3, evaluated
        // with a very fine midpoint rule, independent of the Simpson path
        let f = |t: f64| (t - 1.0).ln() / t;
        let n = 2_000_000usize;
        let w = 1.0 / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            acc += f(2.0 + (i as f64 + 0.5) * w);
        }
        let oracle = 1.0 - 3.0f64.ln() + acc * w;
        let got = dickman_rho(3.0, 1.0 / 512.0).unwrap();
        assert!((got - oracle).abs() < 1e-8, "got {got}, oracle {oracle}");
    }

    #[test]
    fn table_properties() {
        let t = DickmanTable::new(8.0, 1.0 / 512.0).unwrap();
        let mut prev = 1.0f64;
        for i in 0..=800 {
            let u = i as f64 * 0.01;
            let v = t.eval(u);
            assert!(v > 0.0 && v <= 1.0, "u={u} v={v}");
            assert!(v <= prev + 1e-12, "not nonincreasing at u={u}");
            prev = v;
        }
    }

    #[test]
    fn halving_step_is_stable() {
        let t1 = DickmanTable::new(5.0, 1.0 / 256.0).unwrap();
        let t2 = DickmanTable::new(5.0, 1.0 / 512.0).unwrap();
        for i in 0..=50 {
            let u = i as f64 * 0.1;
            assert!(
                (t1.eval(u) - t2.eval(u)).abs() < 1e-9,
                "u={u}: {} vs {}",
                t1.eval(u),
                t2.eval(u)
            );
        }
    }

    #[test]
    fn kappa_bounds() {
        let k = solve_kappa(1e-10).unwrap();
        assert!(k.residual <= 1e-10);
        assert!(k.kappa > 10.0 / 9.0);
        assert!(k.kappa > (std::f64::consts::E / 2.0).powf(1.0 / 3.0));
        assert!(1.0 / (2.0 * k.kappa) <= 9.0 / 20.0);
        let k2 = solve_kappa_with_step(1e-10, DEFAULT_RHO_STEP / 2.0).unwrap();
        assert!((k.kappa - k2.kappa).abs() < 1e-8);
    }

    #[test]
    fn main_term_shape() {
        // N = 1, u = 1: zeta(2)^{-1} y rho(2)
        let y = 1.0e6;
        let got = lm_h_main_term(y, 1.0, 1).unwrap();
        let expect = (6.0 / std::f64::consts::PI.powi(2)) * y * (1.0 - 2.0f64.ln());
        assert!((got / expect - 1.0).abs() < 1e-6, "got {got}, expect {expect}");
        // positive below kappa
        let v = dickman_rho(2.2, DEFAULT_RHO_STEP).unwrap() - 2.0 * 1.1f64.ln();
        assert!(v > 0.0);
        assert!(lm_h_main_term(2.0, 1.0, 1000).is_err());
    }

    #[test]
    fn zeta_truncation_matches_zeta2() {
        let z = zeta_n_2(1);
        assert!((z - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-6);
        // removing p = 2 divides by (1 - 1/4)^{-1}
        let z2 = zeta_n_2(2);
        assert!((z2 / z - 0.75).abs() < 1e-12);
    }
}
