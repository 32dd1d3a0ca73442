//! Exact truncated q-expansions in i128 with mandatory overflow abort.
//!
//! The weight-12 cusp form is built from the sparse cube of the Euler product
//! (Jacobi's identity), multiplied into a dense array seven more times; this
//! keeps the whole expansion at O(n^1.5) instead of the O(n^2) a dense
//! squaring ladder would cost. Weights 16 and 20 are products with the
//! weight-4 and weight-8 Eisenstein series; their prime coefficients at large
//! p exceed what i128 intermediates can hold, so those are convolved modulo
//! two 64-bit primes and lifted by CRT (exact, with a range check).

use crate::error::{Error, Result};
use crate::sieve::{add_mod, mul_mod, pow_mod};

/// Sparse series: sorted (exponent, coefficient) pairs.
pub struct SparseSeries {
    pub terms: Vec<(usize, i128)>,
}

/// prod_{n>=1} (1 - q^n) truncated at n_max, via the pentagonal numbers.
pub fn pentagonal_series(n_max: usize) -> SparseSeries {
    let mut terms = vec![(0usize, 1i128)];
    let mut k: i64 = 1;
    loop {
        let mut done = true;
        for g in [k * (3 * k - 1) / 2, k * (3 * k + 1) / 2] {
            let g = g as usize;
            if g <= n_max {
                let sign = if k % 2 == 0 { 1 } else { -1 };
                terms.push((g, sign));
                done = false;
            }
        }
        if done {
            break;
        }
        k += 1;
    }
    terms.sort_unstable_by_key(|t| t.0);
    SparseSeries { terms }
}

/// prod (1 - q^n)^3 truncated at n_max: sum_{k>=0} (-1)^k (2k+1) q^{k(k+1)/2}.
pub fn eta_cube_series(n_max: usize) -> SparseSeries {
    let mut terms = Vec::new();
    let mut k: u64 = 0;
    loop {
        let g = (k * (k + 1) / 2) as usize;
        if g > n_max {
            break;
        }
        let c = (2 * k + 1) as i128;
        terms.push((g, if k.is_multiple_of(2) { c } else { -c }));
        k += 1;
    }
    SparseSeries { terms }
}

/// dense * sparse, truncated at n_max, checked arithmetic.
pub fn mul_dense_sparse(dense: &[i128], sparse: &SparseSeries, n_max: usize) -> Result<Vec<i128>> {
    let mut out = vec![0i128; n_max + 1];
    for &(e, c) in &sparse.terms {
        if e > n_max {
            break;
        }
        for (i, &d) in dense.iter().enumerate().take(n_max - e + 1) {
            if d == 0 {
                continue;
            }
            let prod = d.checked_mul(c).ok_or(Error::Overflow("series product"))?;
            out[i + e] = out[i + e]
                .checked_add(prod)
                .ok_or(Error::Overflow("series sum"))?;
        }
    }
    Ok(out)
}

/// dense * dense, truncated, checked. Quadratic; callers keep n_max modest.
pub fn mul_dense(a: &[i128], b: &[i128], n_max: usize) -> Result<Vec<i128>> {
    let mut out = vec![0i128; n_max + 1];
    for (i, &ai) in a.iter().enumerate().take(n_max + 1) {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate().take(n_max + 1 - i) {
            if bj == 0 {
                continue;
            }
            let prod = ai.checked_mul(bj).ok_or(Error::Overflow("series product"))?;
            out[i + j] = out[i + j]
                .checked_add(prod)
                .ok_or(Error::Overflow("series sum"))?;
        }
    }
    Ok(out)
}

/// Coefficients a(0..n_max) of q prod (1 - q^n)^24; a(1) = 1, a(2) = -24, ...
pub fn delta_series(n_max: usize) -> Result<Vec<i128>> {
    if n_max < 1 {
        return Err(Error::InvalidInput("n_max must be >= 1".into()));
    }
    // eta^24 = (eta^3)^8, built as dense * sparse seven times after the first
    // sparse-by-sparse step, then shifted by the leading q.
    let m = n_max - 1; // eta power needs exponents only up to n_max - 1
    let cube = eta_cube_series(m);
    let mut dense = vec![0i128; m + 1];
    for &(e, c) in &cube.terms {
        dense[e] = c;
    }
    for _ in 1..8 {
        dense = mul_dense_sparse(&dense, &cube, m)?;
    }
    let mut out = vec![0i128; n_max + 1];
    out[1..(m + 1 + 1)].copy_from_slice(&dense[..(m + 1)]);
    Ok(out)
}

/// sigma_k(n) for n <= n_max as i128, by a divisor sweep.
fn sigma_sieve(k: u32, n_max: usize) -> Result<Vec<i128>> {
    let mut out = vec![0i128; n_max + 1];
    for d in 1..=n_max {
        let dp = (d as i128).checked_pow(k).ok_or(Error::Overflow("sigma power"))?;
        let mut m = d;
        while m <= n_max {
            out[m] = out[m].checked_add(dp).ok_or(Error::Overflow("sigma sum"))?;
            m += d;
        }
    }
    Ok(out)
}

/// E4: constant term 1, then 240 sigma_3(n).
pub fn eisenstein_e4(n_max: usize) -> Result<Vec<i128>> {
    if n_max < 1 {
        return Err(Error::InvalidInput("n_max must be >= 1".into()));
    }
    let mut s = sigma_sieve(3, n_max)?;
    for v in s.iter_mut().skip(1) {
        *v = v.checked_mul(240).ok_or(Error::Overflow("E4 scale"))?;
    }
    s[0] = 1;
    Ok(s)
}

/// E8 = E4^2: constant term 1, then 480 sigma_7(n).
pub fn eisenstein_e8(n_max: usize) -> Result<Vec<i128>> {
    if n_max < 1 {
        return Err(Error::InvalidInput("n_max must be >= 1".into()));
    }
    let mut s = sigma_sieve(7, n_max)?;
    for v in s.iter_mut().skip(1) {
        *v = v.checked_mul(480).ok_or(Error::Overflow("E8 scale"))?;
    }
    s[0] = 1;
    Ok(s)
}

/// Full coefficient expansion of the unique level-1 newform of the given
/// weight (12, 16 or 20). Weight 16 is the weight-12 form times E4, weight 20
/// times E8; the dense convolution is quadratic, so keep n_max <= ~20000.
pub fn newform_series(weight: u32, n_max: usize) -> Result<Vec<i128>> {
    match weight {
        12 => delta_series(n_max),
        16 => {
            let d = delta_series(n_max)?;
            let e = eisenstein_e4(n_max)?;
            mul_dense(&d, &e, n_max)
        }
        20 => {
            let d = delta_series(n_max)?;
            let e = eisenstein_e8(n_max)?;
            mul_dense(&d, &e, n_max)
        }
        w => Err(Error::InvalidInput(format!("unsupported newform weight {w}"))),
    }
}

// Two largest u64 primes; their product exceeds 2^127, so any value known to
// fit in i128 lifts uniquely with the symmetric CRT representative.
const CRT_M1: u64 = 18_446_744_073_709_551_557; // 2^64 - 59
const CRT_M2: u64 = 18_446_744_073_709_551_533; // 2^64 - 83

fn reduce_mod(v: i128, m: u64) -> u64 {
    let r = v % m as i128; // in (-m, m), which can exceed i64
    (if r < 0 { r + m as i128 } else { r }) as u64
}

fn crt_lift(r1: u64, r2: u64) -> Result<i128> {
    // v = r1 + m1 * ((r2 - r1) * m1^{-1} mod m2), symmetric representative
    let m1_inv = pow_mod(CRT_M1 % CRT_M2, CRT_M2 - 2, CRT_M2);
    let r1m = r1 % CRT_M2;
    let diff = ((r2 as u128 + CRT_M2 as u128 - r1m as u128) % CRT_M2 as u128) as u64;
    let t = mul_mod(diff, m1_inv, CRT_M2);
    let v = r1 as u128 + CRT_M1 as u128 * t as u128;
    let modulus = CRT_M1 as u128 * CRT_M2 as u128;
    let signed = if v > modulus / 2 {
        // negative representative; both branches stay inside i128
        -((modulus - v) as i128)
    } else {
        v as i128
    };
    Ok(signed)
}

/// Prime coefficient of the weight-16/20 newform at a single prime p, by the
/// convolution a(p) = sum_{m=1}^{p} d(m) e(p - m) carried out modulo two
/// u64 primes and CRT-lifted. `d_mod`/`e_mod` are the factor series reduced
/// mod (CRT_M1, CRT_M2); `bound` is a proven bound on |a(p)| used to reject
/// lifts that would be ambiguous.
pub fn conv_prime_coeff_crt(
    d_mod: &(Vec<u64>, Vec<u64>),
    e_mod: &(Vec<u64>, Vec<u64>),
    p: usize,
    bound: f64,
) -> Result<i128> {
    if bound >= 1.5e38 {
        return Err(Error::Overflow("newform prime coefficient exceeds 128-bit range"));
    }
    let mut acc1 = 0u64;
    let mut acc2 = 0u64;
    for m in 1..=p {
        let t1 = mul_mod(d_mod.0[m], e_mod.0[p - m], CRT_M1);
        acc1 = add_mod(acc1, t1, CRT_M1);
        let t2 = mul_mod(d_mod.1[m], e_mod.1[p - m], CRT_M2);
        acc2 = add_mod(acc2, t2, CRT_M2);
    }
    crt_lift(acc1, acc2)
}

/// Reduce an exact series modulo both CRT primes.
pub fn series_mod_pair(series: &[i128]) -> (Vec<u64>, Vec<u64>) {
    let a = series.iter().map(|&v| reduce_mod(v, CRT_M1)).collect();
    let b = series.iter().map(|&v| reduce_mod(v, CRT_M2)).collect();
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Oracle: raise the pentagonal series to the 24th power by repeated
    /// sparse multiplication, independent of the eta-cube chain.
    fn delta_oracle(n_max: usize) -> Vec<i128> {
        let pent = pentagonal_series(n_max);
        let mut dense = vec![0i128; n_max + 1];
        dense[0] = 1;
        for _ in 0..24 {
            dense = mul_dense_sparse(&dense, &pent, n_max).unwrap();
        }
        let mut out = vec![0i128; n_max + 1];
        out[1..=n_max].copy_from_slice(&dense[..n_max]);
        out
    }

    #[test]
    fn delta_leading_terms() {
        let a = delta_series(12).unwrap();
        // frozen from the 24th-power oracle below
        assert_eq!(a[1], 1);
        assert_eq!(a[2], -24);
        assert_eq!(a[3], 252);
        assert_eq!(a[4], -1472);
        assert_eq!(a[6], a[2] * a[3]); // multiplicativity spot check
        assert_eq!(a[12], -370_944);
    }

    #[test]
    fn delta_matches_pentagonal_oracle() {
        let n = 300;
        assert_eq!(delta_series(n).unwrap(), delta_oracle(n));
    }

    #[test]
    fn jacobi_cube_matches_pentagonal_cube() {
        let n = 400;
        let pent = pentagonal_series(n);
        let mut dense = vec![0i128; n + 1];
        dense[0] = 1;
        for _ in 0..3 {
            dense = mul_dense_sparse(&dense, &pent, n).unwrap();
        }
        let cube = eta_cube_series(n);
        let mut expect = vec![0i128; n + 1];
        for &(e, c) in &cube.terms {
            expect[e] = c;
        }
        assert_eq!(dense, expect);
    }

    #[test]
    fn e4_values() {
        let e = eisenstein_e4(4).unwrap();
        assert_eq!(e[0], 1);
        assert_eq!(e[1], 240);
        assert_eq!(e[2], 240 * 9);
        assert_eq!(e[4], 240 * (1 + 8 + 64));
    }

    #[test]
    fn e8_is_e4_squared() {
        let n = 500;
        let e4 = eisenstein_e4(n).unwrap();
        let e8 = eisenstein_e8(n).unwrap();
        assert_eq!(mul_dense(&e4, &e4, n).unwrap(), e8);
    }

    #[test]
    fn weight16_leading_terms() {
        let a = newform_series(16, 6).unwrap();
        // oracle: (q - 24q^2 + 252q^3 - ...)(1 + 240q + 2160q^2 + ...)
        assert_eq!(a[1], 1);
        assert_eq!(a[2], -24 + 240); // = 216
        assert_eq!(a[6], a[2] * a[3]);
    }

    #[test]
    fn weight12_equals_delta() {
        assert_eq!(newform_series(12, 50).unwrap(), delta_series(50).unwrap());
    }

    #[test]
    fn crt_conv_matches_direct_i128() {
        // at small p the convolution fits i128 directly; the CRT path must agree
        let n = 2_000;
        let d = delta_series(n).unwrap();
        let e = eisenstein_e4(n).unwrap();
        let full = newform_series(16, n).unwrap();
        let dm = series_mod_pair(&d);
        let em = series_mod_pair(&e);
        for p in crate::sieve::primes_up_to(n as u64) {
            let p = p as usize;
            let bound = 2.0 * (p as f64).powf(7.5);
            let got = conv_prime_coeff_crt(&dm, &em, p, bound).unwrap();
            assert_eq!(got, full[p], "p={p}");
        }
    }

    #[test]
    fn crt_lift_signs() {
        assert_eq!(crt_lift(5, 5).unwrap(), 5);
        let r1 = reduce_mod(-77, CRT_M1);
        let r2 = reduce_mod(-77, CRT_M2);
        assert_eq!(crt_lift(r1, r2).unwrap(), -77);
        let big: i128 = -(1i128 << 126);
        let r1 = reduce_mod(big, CRT_M1);
        let r2 = reduce_mod(big, CRT_M2);
        assert_eq!(crt_lift(r1, r2).unwrap(), big);
    }

    #[test]
    fn overflow_aborts() {
        // sigma_19 overflows i128 well before n = 10^3
        assert!(sigma_sieve(19, 1000).is_err());
    }
}
