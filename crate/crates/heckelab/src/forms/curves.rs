//! Point counts for y^2 = x^3 + a4 x + a6 over F_p via character sums.

use crate::error::{Error, Result};
use crate::sieve::{is_prime, pow_mod};

/// 4 a4^3 + 27 a6^2; nonzero iff the curve is nonsingular.
pub fn curve_disc(a4: i64, a6: i64) -> i128 {
    4 * (a4 as i128).pow(3) + 27 * (a6 as i128).pow(2)
}

/// Legendre symbol (a/p) by Euler's criterion, p an odd prime.
pub fn legendre(a: u64, p: u64) -> i32 {
    let a = a % p;
    if a == 0 {
        return 0;
    }
    let r = pow_mod(a, (p - 1) / 2, p);
    if r == 1 {
        1
    } else {
        -1
    }
}

fn reduce(v: i64, p: u64) -> u64 {
    let r = v % p as i64;
    if r < 0 {
        (r + p as i64) as u64
    } else {
        r as u64
    }
}

fn cubic_at(x: u64, a4: u64, a6: u64, p: u64) -> u64 {
    let x2 = (x as u128 * x as u128) % p as u128;
    let x3 = (x2 * x as u128) % p as u128;
    let ax = (a4 as u128 * x as u128) % p as u128;
    ((x3 + ax + a6 as u128) % p as u128) as u64
}

/// a(p) = -sum_x legendre(x^3 + a4 x + a6, p), Euler-criterion evaluation.
///
/// For good p this is the trace of Frobenius; at bad p the sum still has a
/// value but the caller is expected to flag it.
pub fn ec_ap(a4: i64, a6: i64, p: u64) -> Result<i64> {
    if p == 2 {
        return Err(Error::InvalidInput(
            "p = 2 is excluded for short Weierstrass models".into(),
        ));
    }
    if !is_prime(p) {
        return Err(Error::InvalidInput(format!("{p} is not prime")));
    }
    let a4r = reduce(a4, p);
    let a6r = reduce(a6, p);
    let mut sum: i64 = 0;
    for x in 0..p {
        sum += legendre(cubic_at(x, a4r, a6r, p), p) as i64;
    }
    Ok(-sum)
}

/// Quadratic-character table mod p: chi[v] in {-1, 0, 1}.
pub struct QrTable {
    p: u64,
    chi: Vec<i8>,
}

impl QrTable {
    pub fn new(p: u64) -> Self {
        let mut chi = vec![-1i8; p as usize];
        chi[0] = 0;
        let mut x = 1u64;
        while x <= p / 2 {
            chi[((x as u128 * x as u128) % p as u128) as usize] = 1;
            x += 1;
        }
        QrTable { p, chi }
    }

    pub fn eval(&self, v: u64) -> i64 {
        self.chi[(v % self.p) as usize] as i64
    }
}

/// Same sum as `ec_ap` with a precomputed character table; used for family
/// sweeps where many curves share one prime.
pub fn ec_ap_with_table(a4: i64, a6: i64, qr: &QrTable) -> i64 {
    let p = qr.p;
    let a4r = reduce(a4, p);
    let a6r = reduce(a6, p);
    let mut sum: i64 = 0;
    for x in 0..p {
        sum += qr.eval(cubic_at(x, a4r, a6r, p));
    }
    -sum
}
