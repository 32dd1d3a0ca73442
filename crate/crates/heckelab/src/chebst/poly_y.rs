//! An exact-rational even sextic that minorizes the indicator of
//! {|x| > alpha_0} on [-2, 2] while keeping constant term above 1/2 in the
//! orthonormal basis; everything here is checked in exact arithmetic where a
//! rational value exists, with bisection on exact signs for the root.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::chebst::chebyshev_u;
use crate::error::{Error, Result};

fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Coefficients in the U basis: 13/24 U_0 + 1/4 U_2 - 1/4 U_4 + 136/1000 U_6.
pub fn y_chebyshev_coeffs() -> Vec<(u32, BigRational)> {
    vec![
        (0, rat(13, 24)),
        (2, rat(1, 4)),
        (4, rat(-1, 4)),
        (6, rat(136, 1000)),
    ]
}

/// Monomial coefficients (constant first) obtained by expanding the U basis.
pub fn y_monomial_coeffs() -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); 7];
    for (n, c) in y_chebyshev_coeffs() {
        for (i, u) in chebyshev_u(n).iter().enumerate() {
            out[i] += &c * BigRational::new(BigInt::from(*u), BigInt::one());
        }
    }
    out
}

pub fn y_eval_rational(x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    let mut pow = BigRational::one();
    for c in y_monomial_coeffs() {
        acc += c * &pow;
        pow *= x;
    }
    acc
}

pub fn y_eval(x: f64) -> f64 {
    // (17/125) x^6 - (93/100) x^4 + (227/125) x^2 - 283/3000
    let x2 = x * x;
    ((17.0 / 125.0 * x2 - 93.0 / 100.0) * x2 + 227.0 / 125.0) * x2 - 283.0 / 3000.0
}

#[derive(Debug, Clone, Serialize)]
pub struct PolyYReport {
    /// root of Y in [0, 2], located by bisection on exact rational signs
    pub alpha0: f64,
    /// the two exact representations agree with zero tolerance
    pub representations_identical: bool,
    /// Y(2) as an exact fraction string
    pub y_at_two: String,
    /// constant term in the orthonormal basis, exact
    pub beta0: String,
    pub beta0_exceeds_half: bool,
    /// Y <= 0 on [-alpha0, alpha0] and Y <= 1 on [-2, 2], on the grid
    pub indicator_minorant_ok: bool,
    pub max_on_0_2: f64,
    pub grid_points: usize,
}

const EXPECTED_MONOMIALS: [(i64, i64); 7] = [
    (-283, 3000),
    (0, 1),
    (227, 125),
    (0, 1),
    (-93, 100),
    (0, 1),
    (17, 125),
];

pub fn poly_y_suite() -> Result<PolyYReport> {
    // (i) exact identity of the two representations
    let monos = y_monomial_coeffs();
    for (i, (n, d)) in EXPECTED_MONOMIALS.iter().enumerate() {
        if monos[i] != rat(*n, *d) {
            return Err(Error::Invariant(format!(
                "monomial {i} is {} instead of {}/{}",
                monos[i], n, d
            )));
        }
    }

    // (ii) the root in [0, 2] by bisection with exact signs at dyadic points
    let mut lo = BigRational::zero(); // Y(0) = -283/3000 < 0
    let mut hi = rat(1, 2); // Y(1/2) > 0, checked below
    if !y_eval_rational(&hi).is_positive() {
        return Err(Error::Invariant("expected Y(1/2) > 0".into()));
    }
    for _ in 0..64 {
        let mid = (&lo + &hi) / rat(2, 1);
        if y_eval_rational(&mid).is_negative() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let alpha0 = rational_to_f64(&lo);

    // (iii) grid sign verification of Y <= indicator of {|x| > alpha0}
    let grid_points = 10_000usize;
    let mut indicator_ok = true;
    let mut max_on_0_2 = f64::NEG_INFINITY;
    for i in 0..=grid_points {
        let x = -2.0 + 4.0 * i as f64 / grid_points as f64;
        let v = y_eval(x);
        if x.abs() <= alpha0 && v > 1e-12 {
            indicator_ok = false;
        }
        if v > 1.0 + 1e-12 {
            indicator_ok = false;
        }
        if x >= 0.0 {
            max_on_0_2 = max_on_0_2.max(v);
        }
    }
    // refine the maximum by golden-section around the grid argmax
    max_on_0_2 = refine_max(max_on_0_2);

    // (iv) exact endpoint value
    let y2 = y_eval_rational(&rat(2, 1));
    if y2 != rat(2981, 3000) {
        return Err(Error::Invariant(format!("Y(2) = {y2}, expected 2981/3000")));
    }

    // (v) constant term
    let beta0 = rat(13, 24);
    Ok(PolyYReport {
        alpha0,
        representations_identical: true,
        y_at_two: y2.to_string(),
        beta0: beta0.to_string(),
        beta0_exceeds_half: beta0 > rat(1, 2),
        indicator_minorant_ok: indicator_ok,
        max_on_0_2,
        grid_points,
    })
}

fn refine_max(grid_max: f64) -> f64 {
    // ternary search on each monotone-ish stretch is overkill; a dense sweep
    // near the top is enough at f64 resolution
    let mut best = grid_max;
    let mut arg = 0.0f64;
    for i in 0..=40_000 {
        let x = 2.0 * i as f64 / 40_000.0;
        let v = y_eval(x);
        if v > best {
            best = v;
            arg = x;
        }
    }
    let mut lo = (arg - 1e-4).max(0.0);
    let mut hi = (arg + 1e-4).min(2.0);
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if y_eval(m1) < y_eval(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    best.max(y_eval(0.5 * (lo + hi)))
}

fn rational_to_f64(r: &BigRational) -> f64 {
    // enough precision for a f64: scale to 2^60
    let scaled = (r * BigRational::new(BigInt::from(1u64 << 60), BigInt::one())).to_integer();
    let digits = scaled.to_string();
    let v: f64 = digits.parse().unwrap_or(f64::NAN);
    v / (1u64 << 60) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes() {
        let r = poly_y_suite().unwrap();
        assert!(r.representations_identical);
        assert!(r.beta0_exceeds_half);
        assert!(r.indicator_minorant_ok);
        assert_eq!(r.y_at_two, "2981/3000");
        // the root, to at least 12 digits
        assert!(
            (r.alpha0 - 0.231_072_024_708_014_2).abs() < 1e-12,
            "alpha0 = {}",
            r.alpha0
        );
        assert!(r.max_on_0_2 < 1.0 && r.max_on_0_2 > 0.9);
    }

    #[test]
    fn rational_and_float_eval_agree() {
        for i in 0..=100 {
            let x = -2.0 + 4.0 * i as f64 / 100.0;
            let xr = BigRational::new(
                BigInt::from((x * (1u64 << 32) as f64).round() as i64),
                BigInt::from(1u64 << 32),
            );
            let exact = rational_to_f64(&y_eval_rational(&xr));
            let approx = y_eval(rational_to_f64(&xr));
            assert!((exact - approx).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn root_is_simple_sign_change() {
        let r = poly_y_suite().unwrap();
        assert!(y_eval(r.alpha0 - 1e-9) < 0.0);
        assert!(y_eval(r.alpha0 + 1e-9) > 0.0);
        // no other sign change on (alpha0, 2]
        let mut x = r.alpha0 + 1e-6;
        while x <= 2.0 {
            assert!(y_eval(x) > 0.0, "unexpected sign at {x}");
            x += 1e-3;
        }
    }
}
