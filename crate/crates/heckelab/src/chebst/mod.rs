//! Chebyshev functions, Sato-Tate quadrature, and the polynomial machinery
//! for sign densities: an exact-rational sextic suite and trigonometric
//! minorant pairs for products of half-interval indicators.
//!
//! Conventions: X_n(theta) = sin((n+1) theta)/sin(theta) and U_n is the
//! integer-coefficient polynomial with X_n(theta) = U_n(2 cos theta); the
//! X_n are orthonormal for d mu = (2/pi) sin^2(theta) d theta on [0, pi].

pub mod bmv;
pub mod poly_y;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::forms::CoefficientTable;

/// Exact coefficients of U_n (degree n, leading coefficient 1), via
/// U_{n+1} = x U_n - U_{n-1}.
pub fn chebyshev_u(n: u32) -> Vec<i128> {
    assert!(n <= 64, "coefficients overflow past n = 64");
    let mut prev: Vec<i128> = vec![1]; // U_0
    if n == 0 {
        return prev;
    }
    let mut cur: Vec<i128> = vec![0, 1]; // U_1 = x
    for _ in 1..n {
        let mut next = vec![0i128; cur.len() + 1];
        for (i, &c) in cur.iter().enumerate() {
            next[i + 1] += c;
        }
        for (i, &c) in prev.iter().enumerate() {
            next[i] -= c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// U_n evaluated at a real argument by the value recurrence.
pub fn eval_u(n: u32, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0f64;
    let mut cur = x;
    for _ in 1..n {
        let next = x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// X_n(theta) by the sine quotient, with the removable singularities at 0 and
/// pi evaluated through the value recurrence (the quotient loses the signal
/// to argument rounding there).
pub fn x_eval(n: u32, theta: f64) -> f64 {
    let s = theta.sin();
    if s.abs() < 1e-8 {
        return eval_u(n, 2.0 * theta.cos());
    }
    (((n + 1) as f64) * theta).sin() / s
}

/// | prod_p X_{e_p}(theta(p)) - lambda(prod p^{e_p}) | for a prime-power
/// exponent map; the product must stay within the table's coverage.
pub fn hecke_product_identity(
    table: &CoefficientTable,
    exponents: &BTreeMap<u64, u32>,
) -> Result<f64> {
    let mut n: u64 = 1;
    for (&p, &e) in exponents {
        if table.is_excluded(p) {
            return Err(Error::InvalidInput(format!("prime {p} is excluded")));
        }
        for _ in 0..e {
            n = n
                .checked_mul(p)
                .ok_or(Error::Overflow("exponent map product"))?;
        }
    }
    let lam = table
        .lambda(n)
        .ok_or_else(|| Error::InvalidInput(format!("lambda({n}) not covered")))?;
    let mut prod = 1.0f64;
    for (&p, &e) in exponents {
        if e == 0 {
            continue;
        }
        let lp = table
            .lambda_p(p)
            .ok_or_else(|| Error::InvalidInput(format!("lambda({p}) unavailable")))?;
        let theta = (lp / 2.0).clamp(-1.0, 1.0).acos();
        prod *= x_eval(e, theta);
    }
    Ok((prod - lam).abs())
}

/// Composite Simpson of g against the Sato-Tate measure (2/pi) sin^2.
pub fn st_integrate(g: impl Fn(f64) -> f64, n_panels: usize) -> f64 {
    let n = n_panels.max(2) & !1; // even count
    let w = PI / n as f64;
    let f = |t: f64| g(t) * (2.0 / PI) * t.sin().powi(2);
    let mut acc = f(0.0) + f(PI);
    for i in 1..n {
        let t = w * i as f64;
        acc += if i % 2 == 1 { 4.0 * f(t) } else { 2.0 * f(t) };
    }
    acc * w / 3.0
}

/// Coefficients in the X_n basis. The two evaluation routes (basis functions
/// at theta, expanded monomials at x = 2 cos theta) must agree; monomial
/// expansion is kept for low degrees where it is numerically meaningful.
#[derive(Debug, Clone)]
pub struct ChebyshevExpansion {
    pub coeffs: Vec<f64>,
}

impl ChebyshevExpansion {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval_basis(&self, theta: f64) -> f64 {
        let x = 2.0 * theta.cos();
        // Clenshaw-style accumulation over the recurrence values
        let mut prev = 1.0f64;
        let mut cur = x;
        let mut acc = self.coeffs[0];
        for (n, &c) in self.coeffs.iter().enumerate().skip(1) {
            let value = if n == 1 {
                cur
            } else {
                let next = x * cur - prev;
                prev = cur;
                cur = next;
                cur
            };
            acc += c * value;
        }
        acc
    }

    /// Monomial coefficients, constant first.
    pub fn monomial_coeffs(&self) -> Vec<f64> {
        let mut out = vec![0.0f64; self.coeffs.len()];
        for (n, &c) in self.coeffs.iter().enumerate() {
            for (i, &u) in chebyshev_u(n as u32).iter().enumerate() {
                out[i] += c * u as f64;
            }
        }
        out
    }

    pub fn eval_monomial(&self, theta: f64) -> f64 {
        let x = 2.0 * theta.cos();
        let mut acc = 0.0;
        let mut pow = 1.0;
        for &c in &self.monomial_coeffs() {
            acc += c * pow;
            pow *= x;
        }
        acc
    }
}

/// Coefficients int g X_n d mu for n = 0..=n_max.
pub fn cheb_coeffs(
    g: impl Fn(f64) -> f64 + Copy,
    n_max: u32,
    n_panels: usize,
) -> ChebyshevExpansion {
    ChebyshevExpansion {
        coeffs: (0..=n_max)
            .map(|n| st_integrate(|t| g(t) * x_eval(n, t), n_panels))
            .collect(),
    }
}

/// Gram matrix of X_0..X_top under the Sato-Tate quadrature. Evaluates the
/// whole basis per node with one recurrence sweep.
pub fn gram_matrix(top: u32, n_panels: usize) -> Vec<Vec<f64>> {
    let dim = (top + 1) as usize;
    let n = n_panels.max(2) & !1;
    let w = PI / n as f64;
    let mut gram = vec![vec![0.0f64; dim]; dim];
    let mut basis = vec![0.0f64; dim];
    for i in 0..=n {
        let theta = w * i as f64;
        let x = 2.0 * theta.cos();
        basis[0] = 1.0;
        if dim > 1 {
            basis[1] = x;
        }
        for k in 2..dim {
            basis[k] = x * basis[k - 1] - basis[k - 2];
        }
        let simpson = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let weight = simpson * (2.0 / PI) * theta.sin().powi(2) * w / 3.0;
        for a in 0..dim {
            let ba = basis[a] * weight;
            for b in a..dim {
                gram[a][b] += ba * basis[b];
            }
        }
    }
    #[allow(clippy::needless_range_loop)]
    for a in 0..dim {
        for b in 0..a {
            gram[a][b] = gram[b][a];
        }
    }
    gram
}
