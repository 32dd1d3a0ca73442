//! Shared prime machinery: segmented sieve, primality testing, factorization.
//!
//! Every experiment needs primes; this module is the single source for them.

/// Primes in `[2, limit]` via a segmented sieve (odd-only marking).
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let mut primes = vec![2u64];
    if limit < 3 {
        return primes;
    }
    let root = (limit as f64).sqrt() as u64 + 1;
    // base odd primes up to sqrt(limit)
    let base_len = (root / 2 + 1) as usize;
    let mut base = vec![true; base_len]; // index i <-> 2i+1
    base[0] = false;
    let mut i = 1usize;
    while (2 * i + 1) * (2 * i + 1) <= root as usize {
        if base[i] {
            let p = 2 * i + 1;
            let mut j = (p * p) / 2;
            while j < base_len {
                base[j] = false;
                j += p;
            }
        }
        i += 1;
    }
    let base_primes: Vec<u64> = (1..base_len)
        .filter(|&i| base[i])
        .map(|i| (2 * i + 1) as u64)
        .collect();

    const SEG: u64 = 1 << 18;
    let mut seg = vec![true; SEG as usize];
    let mut lo = 3u64;
    while lo <= limit {
        let hi = (lo + 2 * SEG - 2).min(limit); // segment covers odd numbers in [lo, hi]
        let len = ((hi - lo) / 2 + 1) as usize;
        for s in seg.iter_mut().take(len) {
            *s = true;
        }
        for &p in &base_primes {
            if p * p > hi {
                break;
            }
            let mut start = p * p;
            if start < lo {
                let k = (lo - start).div_ceil(2 * p);
                start += k * 2 * p;
            }
            let mut j = start;
            while j <= hi {
                seg[((j - lo) / 2) as usize] = false;
                j += 2 * p;
            }
        }
        for (idx, &alive) in seg.iter().enumerate().take(len) {
            if alive {
                primes.push(lo + 2 * idx as u64);
            }
        }
        lo = hi + 2;
    }
    primes
}

/// Primes in `(lo, hi]`, segmented against base primes up to sqrt(hi).
pub fn primes_in_range(lo: u64, hi: u64) -> Vec<u64> {
    if hi <= lo {
        return Vec::new();
    }
    if lo < 2 {
        return primes_up_to(hi);
    }
    let base = primes_up_to((hi as f64).sqrt() as u64 + 1);
    let mut out = Vec::new();
    const SEG: u64 = 1 << 18;
    let mut start = lo + 1;
    while start <= hi {
        let end = (start + SEG - 1).min(hi);
        let len = (end - start + 1) as usize;
        let mut flags = vec![true; len];
        for &p in &base {
            if p * p > end {
                break;
            }
            let mut j = (start.div_ceil(p)) * p;
            if j < p * p {
                j = p * p;
            }
            while j <= end {
                flags[(j - start) as usize] = false;
                j += p;
            }
        }
        for (i, &alive) in flags.iter().enumerate() {
            let n = start + i as u64;
            if alive && n >= 2 {
                out.push(n);
            }
        }
        start = end + 1;
    }
    out
}

/// pi(x), by sieving. Fine at the scales this crate works at.
pub fn prime_count(x: u64) -> u64 {
    primes_up_to(x).len() as u64
}

pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 + b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for u64.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d & 1 == 0 {
        d >>= 1;
        s += 1;
    }
    // this base set is deterministic for all u64
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_rho(n: u64) -> u64 {
    // Brent's cycle variant with deterministic increments.
    if n.is_multiple_of(2) {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let mut x = 2u64;
        let mut y = 2u64;
        let mut d = 1u64;
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Prime factorization (p, multiplicity), ascending.
pub fn factorize(n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    let mut n = n;
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31] {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
    }
    let mut stack = vec![n];
    let mut rest = Vec::new();
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime(m) {
            rest.push(m);
            continue;
        }
        // trial division is enough below 10^6; rho above
        if m < 1_000_000 {
            let mut m = m;
            let mut d = 37u64;
            while d * d <= m {
                if m % d == 0 {
                    stack.push(d);
                    stack.push(m / d);
                    m = 1;
                    break;
                }
                d += 2;
            }
            if m > 1 {
                rest.push(m);
            }
        } else {
            let d = pollard_rho(m);
            stack.push(d);
            stack.push(m / d);
        }
    }
    rest.sort_unstable();
    let mut i = 0;
    while i < rest.len() {
        let p = rest[i];
        let mut e = 0;
        while i < rest.len() && rest[i] == p {
            e += 1;
            i += 1;
        }
        out.push((p, e));
    }
    out.sort_unstable();
    out
}

pub fn euler_phi(n: u64) -> u64 {
    let mut phi = n;
    for (p, _) in factorize(n) {
        phi = phi / p * (p - 1);
    }
    phi
}

/// tau(n), the number of divisors.
pub fn divisor_count(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    factorize(n)
        .into_iter()
        .map(|(_, e)| e as u64 + 1)
        .product()
}

/// flags[n] == true iff n is squarefree, for n <= limit.
pub fn squarefree_flags(limit: u64) -> Vec<bool> {
    let mut flags = vec![true; limit as usize + 1];
    if limit >= 1 {
        flags[0] = false;
    }
    let mut d = 2u64;
    while d * d <= limit {
        let sq = d * d;
        let mut m = sq;
        while m <= limit {
            flags[m as usize] = false;
            m += sq;
        }
        d += 1;
    }
    flags
}

/// Smallest-prime-factor table for n <= limit; spf[n] = least prime dividing n.
pub struct SpfSieve {
    spf: Vec<u32>,
}

impl SpfSieve {
    pub fn new(limit: u64) -> Self {
        let n = limit as usize;
        let mut spf: Vec<u32> = vec![0; n + 1];
        for i in 2..=n {
            if spf[i] == 0 {
                let mut j = i;
                while j <= n {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        SpfSieve { spf }
    }

    pub fn smallest_factor(&self, n: u64) -> u64 {
        self.spf[n as usize] as u64
    }

    pub fn factorize(&self, mut n: u64) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        while n > 1 {
            let p = self.smallest_factor(n);
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        out
    }

    pub fn is_squarefree(&self, mut n: u64) -> bool {
        while n > 1 {
            let p = self.smallest_factor(n);
            n /= p;
            if n.is_multiple_of(p) {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_primes() {
        assert_eq!(primes_up_to(30), vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert_eq!(primes_up_to(1), Vec::<u64>::new());
        assert_eq!(primes_up_to(2), vec![2]);
    }

    #[test]
    fn pi_values() {
        // pi(10^k) reference values
        assert_eq!(prime_count(10), 4);
        assert_eq!(prime_count(100), 25);
        assert_eq!(prime_count(1_000), 168);
        assert_eq!(prime_count(10_000), 1_229);
        assert_eq!(prime_count(100_000), 9_592);
        assert_eq!(prime_count(1_000_000), 78_498);
    }

    #[test]
    fn range_matches_full_sieve() {
        let all = primes_up_to(10_000);
        let tail: Vec<u64> = all.iter().copied().filter(|&p| p > 5_000).collect();
        assert_eq!(primes_in_range(5_000, 10_000), tail);
    }

    #[test]
    fn miller_rabin_agrees_with_sieve() {
        let set: std::collections::HashSet<u64> = primes_up_to(5_000).into_iter().collect();
        for n in 0..5_000u64 {
            assert_eq!(is_prime(n), set.contains(&n), "n={n}");
        }
        // the two CRT moduli used by the series engine
        assert!(is_prime(18_446_744_073_709_551_557));
        assert!(is_prime(18_446_744_073_709_551_533));
    }

    #[test]
    fn factorization_roundtrip() {
        for n in 2..2_000u64 {
            let f = factorize(n);
            let prod: u64 = f.iter().map(|&(p, e)| p.pow(e)).product();
            assert_eq!(prod, n);
            for &(p, _) in &f {
                assert!(is_prime(p));
            }
        }
        assert_eq!(factorize(2 * 3 * 5 * 7 * 11 * 13), vec![(2, 1), (3, 1), (5, 1), (7, 1), (11, 1), (13, 1)]);
    }

    #[test]
    fn tau_and_phi() {
        assert_eq!(divisor_count(1), 1);
        assert_eq!(divisor_count(12), 6);
        for p in [2u64, 3, 97] {
            assert_eq!(divisor_count(p), 2);
        }
        assert_eq!(euler_phi(1), 1);
        assert_eq!(euler_phi(12), 4);
        assert_eq!(euler_phi(97), 96);
    }

    #[test]
    fn squarefree_and_spf() {
        let flags = squarefree_flags(100);
        let spf = SpfSieve::new(100);
        for n in 1..=100u64 {
            let byhand = factorize(n).iter().all(|&(_, e)| e == 1);
            assert_eq!(flags[n as usize], byhand, "n={n}");
            if n > 1 {
                assert_eq!(spf.smallest_factor(n), factorize(n)[0].0);
            }
            assert_eq!(spf.is_squarefree(n), byhand);
        }
    }
}
