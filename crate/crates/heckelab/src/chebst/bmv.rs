//! Trigonometric minorant pairs for products of half-interval indicators.
//!
//! beta_L is the average of two Fejer kernels, one centered at each jump of
//! the indicator of [0, 1/2]:
//!   beta_L(x) = (F_L(x) + F_L(x - 1/2)) / (2L + 2),
//! which expands to the even cosine series used below. The companion alpha_L
//! candidate is pluggable behind a four-property contract; the shipped
//! default is the average of the classical degree-L majorant/minorant pair
//! for the interval, built from the sawtooth approximation
//!   psi*(x) = - sum_{1<=l<=L} (Jhat(l/(L+1)) / (pi l)) sin(2 pi l x),
//!   Jhat(t) = pi t (1 - t) cot(pi t) + t,
//! which satisfies |psi(x) - psi*(x)| <= F_L(x)/(2L+2). Writing the
//! indicator as 1/2 + psi(x - 1/2) - psi(x) then gives a candidate with
//! exact mean 1/2 and envelope beta_L. The contract is verified at
//! construction time and a failing candidate is rejected.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};

const TAU: f64 = std::f64::consts::TAU;

/// Real trigonometric polynomial c0 + sum_l (a_l cos(2 pi l x) + b_l sin(2 pi l x)).
#[derive(Debug, Clone, Serialize)]
pub struct TrigPolynomial {
    pub c0: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl TrigPolynomial {
    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = self.c0;
        for (i, &c) in self.cos.iter().enumerate() {
            if c != 0.0 {
                acc += c * (TAU * (i + 1) as f64 * x).cos();
            }
        }
        for (i, &s) in self.sin.iter().enumerate() {
            if s != 0.0 {
                acc += s * (TAU * (i + 1) as f64 * x).sin();
            }
        }
        acc
    }

    pub fn degree(&self) -> usize {
        let dc = self.cos.iter().rposition(|&c| c != 0.0).map_or(0, |i| i + 1);
        let ds = self.sin.iter().rposition(|&s| s != 0.0).map_or(0, |i| i + 1);
        dc.max(ds)
    }

    /// Integral against the Sato-Tate measure after the substitution
    /// x = theta/pi: only the constant and the first cosine meet the measure.
    pub fn st_integral(&self) -> f64 {
        self.c0 - 0.5 * self.cos.first().copied().unwrap_or(0.0)
    }

    /// Parseval norm on [0, 1].
    pub fn l2_norm_sq(&self) -> f64 {
        self.c0 * self.c0
            + 0.5 * self.cos.iter().map(|c| c * c).sum::<f64>()
            + 0.5 * self.sin.iter().map(|s| s * s).sum::<f64>()
    }
}

/// Fejer kernel F_L(x) = sum_{|l|<=L} (1 - |l|/(L+1)) e(l x), nonnegative.
pub fn fejer(l: u64, x: f64) -> f64 {
    let lp1 = (l + 1) as f64;
    let s = (std::f64::consts::PI * x).sin();
    if s.abs() < 1e-12 {
        return lp1;
    }
    let t = (lp1 * std::f64::consts::PI * x).sin() / s;
    t * t / lp1
}

/// The averaged Fejer-translate polynomial; odd L only.
pub fn bmv_beta_l(l: u64) -> Result<TrigPolynomial> {
    if l.is_multiple_of(2) || l == 0 {
        return Err(Error::InvalidInput("degree must be a positive odd integer".into()));
    }
    let lp1 = (l + 1) as f64;
    let mut cos = vec![0.0; l as usize];
    for ell in 1..=l {
        if ell % 2 == 0 {
            cos[(ell - 1) as usize] = 2.0 * (1.0 - ell as f64 / lp1) / lp1;
        }
    }
    Ok(TrigPolynomial { c0: 1.0 / lp1, cos, sin: vec![0.0; l as usize] })
}

/// Closed form of the Sato-Tate integral of beta_L(theta/pi): the first
/// cosine carries a vanishing coefficient, so only the constant survives.
pub fn bmv_beta_l_st_integral(l: u64) -> Result<f64> {
    if l.is_multiple_of(2) || l == 0 {
        return Err(Error::InvalidInput("degree must be a positive odd integer".into()));
    }
    Ok(1.0 / (l + 1) as f64)
}

fn j_hat(t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    let pt = std::f64::consts::PI * t;
    pt * (1.0 - t) * (pt.cos() / pt.sin()) + t
}

/// Degree-L sawtooth approximation with Fejer-bounded error.
pub fn vaaler_polynomial(l: u64) -> TrigPolynomial {
    let lp1 = (l + 1) as f64;
    let mut sin = vec![0.0; l as usize];
    for ell in 1..=l {
        sin[(ell - 1) as usize] =
            -j_hat(ell as f64 / lp1) / (std::f64::consts::PI * ell as f64);
    }
    TrigPolynomial { c0: 0.0, cos: vec![0.0; l as usize], sin }
}

/// Default half-interval candidate: 1/2 + psi*(x - 1/2) - psi*(x); only the
/// odd sine harmonics survive, so the mean is exactly 1/2.
pub fn default_alpha_l(l: u64) -> Result<TrigPolynomial> {
    if l.is_multiple_of(2) || l == 0 {
        return Err(Error::InvalidInput("degree must be a positive odd integer".into()));
    }
    let lp1 = (l + 1) as f64;
    let mut sin = vec![0.0; l as usize];
    for ell in (1..=l).step_by(2) {
        sin[(ell - 1) as usize] =
            2.0 * j_hat(ell as f64 / lp1) / (std::f64::consts::PI * ell as f64);
    }
    Ok(TrigPolynomial { c0: 0.5, cos: vec![0.0; l as usize], sin })
}

#[derive(Debug, Clone, Serialize)]
pub struct ContractReport {
    pub degree_ok: bool,
    pub range_ok: bool,
    pub range_min: f64,
    pub range_max: f64,
    pub mean_ok: bool,
    pub envelope_ok: bool,
    /// worst signed slack of b(x) + tol - |chi(x) - a(x)| off the jumps
    pub envelope_margin: f64,
    pub envelope_witness: f64,
    pub pass: bool,
}

fn chi_half(x: f64) -> f64 {
    let y = x.rem_euclid(1.0);
    if y <= 0.5 {
        1.0
    } else {
        0.0
    }
}

fn circle_dist(x: f64, c: f64) -> f64 {
    let d = (x - c).rem_euclid(1.0);
    d.min(1.0 - d)
}

/// The four candidate properties, verified on a uniform grid:
/// (1) degree <= L, (2) 0 <= a <= 1, (3) mean exactly 1/2,
/// (4) |chi - a| <= b away from the jumps, one-sided bands near them.
pub fn minorant_contract_check(
    a: &TrigPolynomial,
    b: &TrigPolynomial,
    l: u64,
    grid_size: usize,
) -> Result<ContractReport> {
    if grid_size < 4 * (l as usize + 1) {
        return Err(Error::InvalidInput(format!(
            "grid must have at least {} points",
            4 * (l + 1)
        )));
    }
    let degree_ok = a.degree() <= l as usize;
    let mean_ok = a.c0 == 0.5;
    let tol = 1e-12;
    let jump_band = 1.0 / (10.0 * l as f64);
    let mut range_min = f64::INFINITY;
    let mut range_max = f64::NEG_INFINITY;
    let mut envelope_ok = true;
    let mut envelope_margin = f64::INFINITY;
    let mut envelope_witness = 0.0;
    for i in 0..grid_size {
        let x = i as f64 / grid_size as f64;
        let av = a.eval(x);
        let bv = b.eval(x);
        range_min = range_min.min(av);
        range_max = range_max.max(av);
        let near_jump = circle_dist(x, 0.0) < jump_band || circle_dist(x, 0.5) < jump_band;
        let ok = if near_jump {
            // the indicator takes both values at a jump; check containment
            // against the relaxed band
            av >= -bv - tol && av <= 1.0 + bv + tol
        } else {
            let margin = bv + tol - (chi_half(x) - av).abs();
            if margin < envelope_margin {
                envelope_margin = margin;
                envelope_witness = x;
            }
            margin >= 0.0
        };
        if !ok {
            envelope_ok = false;
            if near_jump {
                envelope_witness = x;
            }
        }
    }
    let range_ok = range_min >= -tol && range_max <= 1.0 + tol;
    let pass = degree_ok && range_ok && mean_ok && envelope_ok;
    Ok(ContractReport {
        degree_ok,
        range_ok,
        range_min,
        range_max,
        mean_ok,
        envelope_ok,
        envelope_margin,
        envelope_witness,
        pass,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MinorantPair {
    pub a: TrigPolynomial,
    pub b: TrigPolynomial,
    pub l: u64,
    pub report: ContractReport,
}

impl MinorantPair {
    /// Build the shipped default pair and verify the contract; a failing
    /// candidate is rejected here rather than poisoning downstream bounds.
    pub fn default_pair(l: u64) -> Result<MinorantPair> {
        let a = default_alpha_l(l)?;
        let b = bmv_beta_l(l)?;
        let grid = (8 * (l as usize + 1)).max(4096);
        let report = minorant_contract_check(&a, &b, l, grid)?;
        if !report.pass {
            return Err(Error::Invariant(format!(
                "default candidate fails the contract at degree {l}: {report:?}"
            )));
        }
        Ok(MinorantPair { a, b, l, report })
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProductEval {
    pub checked: u64,
    pub violations: u64,
    /// max over points of (A - B) - prod chi
    pub max_gap: f64,
}

/// Evaluate A = prod a(theta_j/pi), B = sum_j b(theta_j/pi) prod_{q!=j} a,
/// and count violations of A - B <= prod chi(theta_j) + 1e-9.
pub fn product_minorant_eval(pair: &MinorantPair, points: &[Vec<f64>]) -> ProductEval {
    let mut violations = 0u64;
    let mut max_gap = f64::NEG_INFINITY;
    for tuple in points {
        let xs: Vec<f64> = tuple.iter().map(|t| t / std::f64::consts::PI).collect();
        let avs: Vec<f64> = xs.iter().map(|&x| pair.a.eval(x)).collect();
        let a_prod: f64 = avs.iter().product();
        let mut b_sum = 0.0;
        for (j, &x) in xs.iter().enumerate() {
            let mut others = 1.0;
            for (q, &av) in avs.iter().enumerate() {
                if q != j {
                    others *= av;
                }
            }
            b_sum += pair.b.eval(x) * others;
        }
        let chi: f64 = tuple
            .iter()
            .map(|&t| if t <= std::f64::consts::FRAC_PI_2 { 1.0 } else { 0.0 })
            .product();
        let gap = (a_prod - b_sum) - chi;
        max_gap = max_gap.max(gap);
        if gap > 1e-9 {
            violations += 1;
        }
    }
    ProductEval { checked: points.len() as u64, violations, max_gap }
}

/// Constant-term contribution Ia^{omega-1} (Ia - omega/(L+1)).
pub fn delta_lower(l: u64, omega: u32, ia: f64) -> f64 {
    ia.powi(omega as i32 - 1) * (ia - omega as f64 / (l + 1) as f64)
}

/// Smallest odd L with L + 1 >= 2 omega / eps.
pub fn choose_l(omega: u32, eps: f64) -> u64 {
    let need = (2.0 * omega as f64 / eps).ceil() as u64;
    let mut l = need.saturating_sub(1).max(1);
    if l.is_multiple_of(2) {
        l += 1;
    }
    while l + 1 < need {
        l += 2;
    }
    l
}

/// Adversarial + random point tuples in [0, pi]^omega for the product check.
pub fn sample_tuples(omega: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let pi = std::f64::consts::PI;
    for i in 0..count {
        let mut tuple = Vec::with_capacity(omega);
        for _ in 0..omega {
            let t = if i % 7 == 0 {
                // park some coordinates near the jumps
                let base = if rng.gen_bool(0.5) { pi / 2.0 } else { 0.0 };
                (base + rng.gen_range(-0.02..0.02)).clamp(0.0, pi)
            } else {
                rng.gen_range(0.0..=pi)
            };
            tuple.push(t);
        }
        out.push(tuple);
    }
    out
}
