//! Exact Hecke/Fourier coefficients for a small menu of concretely
//! constructible forms, extended multiplicatively with normalization.
//!
//! Prime coefficients are exact signed integers (128-bit, overflow aborts);
//! normalized values lambda(n) = a(n) / n^{(k-1)/2} are doubles, with
//! exactness preserved at prime arguments.

pub mod cache;
pub mod curves;
pub mod series;

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sieve;

pub use series::{delta_series, eisenstein_e4, newform_series};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum FormKind {
    Level1Newform { weight: u32 },
    EllipticCurve { a4: i64, a6: i64 },
    EisensteinE4,
}

/// Identity of a modular object: construction recipe plus the primes its
/// scans must never touch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FormSpec {
    pub kind: FormKind,
    pub weight: u32,
    pub level: u64,
    pub excluded_primes: BTreeSet<u64>,
    pub label: String,
}

impl FormSpec {
    pub fn level1_newform(weight: u32) -> Result<Self> {
        let label = match weight {
            12 => "delta",
            16 => "wt16",
            20 => "wt20",
            w => {
                return Err(Error::InvalidInput(format!(
                    "level-1 newform weight must be 12, 16 or 20, got {w}"
                )))
            }
        };
        Ok(FormSpec {
            kind: FormKind::Level1Newform { weight },
            weight,
            level: 1,
            excluded_primes: BTreeSet::new(),
            label: label.to_string(),
        })
    }

    pub fn eisenstein_e4() -> Self {
        FormSpec {
            kind: FormKind::EisensteinE4,
            weight: 4,
            level: 1,
            excluded_primes: BTreeSet::new(),
            label: "e4".to_string(),
        }
    }

    /// y^2 = x^3 + a4 x + a6. The excluded set is every prime dividing
    /// 2 * (4 a4^3 + 27 a6^2), an over-approximation of the bad primes that
    /// keeps all scans on (n, N) = 1 territory without conductor machinery.
    pub fn elliptic_curve(a4: i64, a6: i64) -> Result<Self> {
        let disc = curves::curve_disc(a4, a6);
        if disc == 0 {
            return Err(Error::InvalidInput(format!(
                "singular curve: 4*{a4}^3 + 27*{a6}^2 = 0"
            )));
        }
        let mut excluded: BTreeSet<u64> = BTreeSet::new();
        excluded.insert(2);
        let mut m = disc.unsigned_abs();
        // strip factors of 2 so the remaining part fits u64 factorization
        while m.is_multiple_of(2) {
            m /= 2;
        }
        if m > u64::MAX as u128 {
            return Err(Error::Overflow("curve discriminant"));
        }
        for (p, _) in sieve::factorize(m as u64) {
            excluded.insert(p);
        }
        Ok(FormSpec {
            kind: FormKind::EllipticCurve { a4, a6 },
            weight: 2,
            level: 1,
            excluded_primes: excluded,
            label: format!("ec_{a4}_{a6}"),
        })
    }

    pub fn analytic_conductor(&self) -> u64 {
        (self.weight as u64).pow(2) * self.level
    }

    /// k^2 times the product of excluded primes; the stand-in for the
    /// analytic conductor when the exact level is not computed.
    pub fn conductor_proxy(&self) -> u64 {
        let prod: u64 = self.excluded_primes.iter().product::<u64>().max(1);
        (self.weight as u64).pow(2) * prod
    }

    pub fn is_cusp(&self) -> bool {
        !matches!(self.kind, FormKind::EisensteinE4)
    }

    /// CM annotation for the menu: curves with j = 0 or 1728.
    pub fn is_cm(&self) -> bool {
        matches!(self.kind, FormKind::EllipticCurve { a4, a6 } if a4 == 0 || a6 == 0)
    }

    /// Labels: `delta`, `wt16`, `wt20`, `e4`, `ec_<a4>_<a6>`.
    pub fn parse(label: &str) -> Result<Self> {
        match label {
            "delta" => Self::level1_newform(12),
            "wt16" => Self::level1_newform(16),
            "wt20" => Self::level1_newform(20),
            "e4" => Ok(Self::eisenstein_e4()),
            s if s.starts_with("ec_") => {
                let rest = &s[3..];
                let (a, b) = rest
                    .split_once('_')
                    .ok_or_else(|| Error::Parse(format!("bad curve label {s}")))?;
                let a4: i64 = a.parse().map_err(|_| Error::Parse(format!("bad a4 in {s}")))?;
                let a6: i64 = b.parse().map_err(|_| Error::Parse(format!("bad a6 in {s}")))?;
                Self::elliptic_curve(a4, a6)
            }
            s => Err(Error::Parse(format!("unknown form label {s}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PrimeCoeff {
    pub value: i128,
    /// false at flagged bad primes; such values are stored but excluded from
    /// every analysis.
    pub reliable: bool,
}

pub struct CoefficientTable {
    spec: FormSpec,
    p_max: u64,
    n_max: u64,
    prime_coeffs: BTreeMap<u64, PrimeCoeff>,
    /// lambda(n) for n = 0..=n_max; NaN marks excluded-or-unavailable.
    normalized: Vec<f64>,
}

/// lambda(p) = 2 cos(theta(p)) with theta in [0, pi], good primes only.
pub struct AngleTable {
    pub label: String,
    pub angles: BTreeMap<u64, f64>,
}

impl CoefficientTable {
    pub fn spec(&self) -> &FormSpec {
        &self.spec
    }
    pub fn p_max(&self) -> u64 {
        self.p_max
    }
    pub fn n_max(&self) -> u64 {
        self.n_max
    }
    pub fn weight(&self) -> u32 {
        self.spec.weight
    }

    pub fn prime_coeffs(&self) -> &BTreeMap<u64, PrimeCoeff> {
        &self.prime_coeffs
    }

    pub fn ap(&self, p: u64) -> Option<PrimeCoeff> {
        self.prime_coeffs.get(&p).copied()
    }

    pub fn is_excluded(&self, n: u64) -> bool {
        self.spec.excluded_primes.iter().any(|&p| n.is_multiple_of(p))
    }

    /// lambda(n); None when n is out of coverage or has an excluded factor.
    pub fn lambda(&self, n: u64) -> Option<f64> {
        if n == 0 || n > self.n_max {
            return None;
        }
        let v = self.normalized[n as usize];
        if v.is_nan() {
            None
        } else {
            Some(v)
        }
    }

    /// lambda at a reliable prime.
    pub fn lambda_p(&self, p: u64) -> Option<f64> {
        let c = self.prime_coeffs.get(&p)?;
        if !c.reliable {
            return None;
        }
        Some(c.value as f64 / (p as f64).powf((self.spec.weight as f64 - 1.0) / 2.0))
    }

    /// Exact sign of a(p) at a reliable prime.
    pub fn sign_p(&self, p: u64) -> Option<i8> {
        let c = self.prime_coeffs.get(&p)?;
        if !c.reliable {
            return None;
        }
        Some(match c.value.cmp(&0) {
            std::cmp::Ordering::Less => -1,
            std::cmp::Ordering::Equal => 0,
            std::cmp::Ordering::Greater => 1,
        })
    }

    /// lambda(p^e) by the normalized three-term recurrence; works without
    /// n_max coverage.
    pub fn lambda_prime_power(&self, p: u64, e: u32) -> Option<f64> {
        if self.spec.excluded_primes.contains(&p) {
            return None;
        }
        let lp = self.lambda_p(p)?;
        Some(lambda_power(lp, e))
    }

    pub fn theta_angles(&self) -> Result<AngleTable> {
        let mut angles = BTreeMap::new();
        for (&p, c) in &self.prime_coeffs {
            if !c.reliable || self.spec.excluded_primes.contains(&p) {
                continue;
            }
            let lam = self.lambda_p(p).unwrap();
            if lam.abs() > 2.0 + 1e-9 {
                return Err(Error::Invariant(format!(
                    "|lambda({p})| = {} > 2 for {}",
                    lam.abs(),
                    self.spec.label
                )));
            }
            angles.insert(p, (lam / 2.0).clamp(-1.0, 1.0).acos());
        }
        Ok(AngleTable {
            label: self.spec.label.clone(),
            angles,
        })
    }
}

/// lambda(p^e) from lambda(p): u_{j+1} = lam * u_j - u_{j-1}.
fn lambda_power(lam: f64, e: u32) -> f64 {
    let mut prev = 1.0f64;
    let mut cur = lam;
    if e == 0 {
        return 1.0;
    }
    for _ in 1..e {
        let next = lam * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Assemble a table from externally supplied prime coefficients (cache
/// loads); bad-prime values for curves are recomputed and flagged since the
/// cache only carries reliable rows.
pub fn table_from_prime_coeffs(
    spec: &FormSpec,
    p_max: u64,
    n_max: u64,
    mut prime_coeffs: BTreeMap<u64, PrimeCoeff>,
) -> Result<CoefficientTable> {
    if p_max < 2 || n_max < 2 {
        return Err(Error::InvalidInput("coverage bounds must be >= 2".into()));
    }
    if let FormKind::EllipticCurve { a4, a6 } = spec.kind {
        for &p in &spec.excluded_primes {
            if p != 2 && p <= p_max.max(n_max) {
                let ap = curves::ec_ap(a4, a6, p)?;
                prime_coeffs.insert(p, PrimeCoeff { value: ap as i128, reliable: false });
            }
        }
    }
    let mut table = CoefficientTable {
        spec: spec.clone(),
        p_max,
        n_max,
        prime_coeffs,
        normalized: Vec::new(),
    };
    fill_normalized(&mut table)?;
    Ok(table)
}

pub fn build_table(spec: &FormSpec, p_max: u64, n_max: u64) -> Result<CoefficientTable> {
    if p_max < 2 || n_max < 2 {
        return Err(Error::InvalidInput("coverage bounds must be >= 2".into()));
    }
    let engine_p = p_max.max(n_max);
    let prime_coeffs = match spec.kind {
        FormKind::Level1Newform { weight } => level1_prime_coeffs(weight, engine_p)?,
        FormKind::EisensteinE4 => {
            let mut map = BTreeMap::new();
            for p in sieve::primes_up_to(engine_p) {
                let p3 = (p as i128).pow(3);
                map.insert(p, PrimeCoeff { value: 1 + p3, reliable: true });
            }
            map
        }
        FormKind::EllipticCurve { a4, a6 } => {
            let disc = curves::curve_disc(a4, a6);
            let mut map = BTreeMap::new();
            for p in sieve::primes_up_to(engine_p) {
                if p == 2 {
                    continue; // short model degenerates; 2 is always excluded
                }
                let qr = curves::QrTable::new(p);
                let ap = curves::ec_ap_with_table(a4, a6, &qr);
                let reliable = disc % p as i128 != 0;
                map.insert(p, PrimeCoeff { value: ap as i128, reliable });
            }
            map
        }
    };

    let mut table = CoefficientTable {
        spec: spec.clone(),
        p_max,
        n_max,
        prime_coeffs,
        normalized: Vec::new(),
    };
    fill_normalized(&mut table)?;
    Ok(table)
}

fn level1_prime_coeffs(weight: u32, engine_p: u64) -> Result<BTreeMap<u64, PrimeCoeff>> {
    let np = engine_p as usize;
    let tau = series::delta_series(np)?;
    let primes = sieve::primes_up_to(engine_p);
    let mut map = BTreeMap::new();
    match weight {
        12 => {
            for p in primes {
                map.insert(p, PrimeCoeff { value: tau[p as usize], reliable: true });
            }
        }
        16 | 20 => {
            let eis = if weight == 16 {
                series::eisenstein_e4(np)?
            } else {
                series::eisenstein_e8(np)?
            };
            let dm = series::series_mod_pair(&tau);
            let em = series::series_mod_pair(&eis);
            let half = (weight - 1) as f64 / 2.0;
            for p in primes {
                // |a(p)| <= 2 p^{(k-1)/2}, with headroom for the range check
                let bound = 2.05 * (p as f64).powf(half);
                let v = series::conv_prime_coeff_crt(&dm, &em, p as usize, bound)?;
                map.insert(p, PrimeCoeff { value: v, reliable: true });
            }
        }
        w => return Err(Error::InvalidInput(format!("unsupported weight {w}"))),
    }
    Ok(map)
}

fn fill_normalized(table: &mut CoefficientTable) -> Result<()> {
    let n_max = table.n_max as usize;
    let mut lam = vec![f64::NAN; n_max + 1];
    lam[1] = 1.0;
    if n_max >= 2 {
        let spf = sieve::SpfSieve::new(table.n_max);
        for n in 2..=n_max {
            let p = spf.smallest_factor(n as u64);
            let mut rest = n as u64;
            let mut e = 0u32;
            while rest.is_multiple_of(p) {
                rest /= p;
                e += 1;
            }
            let head = if table.spec.excluded_primes.contains(&p) {
                f64::NAN
            } else {
                table.lambda_prime_power(p, e).unwrap_or(f64::NAN)
            };
            lam[n] = head * lam[rest as usize]; // NaN propagates exclusions
        }
    }
    table.normalized = lam;
    Ok(())
}

/// tau(n), the divisor count; the bound |lambda(n)| <= tau(n) is asserted in
/// the invariant suites for cusp forms.
pub fn divisor_count(n: u64) -> u64 {
    sieve::divisor_count(n)
}

pub fn theta_angles(table: &CoefficientTable) -> Result<AngleTable> {
    table.theta_angles()
}
