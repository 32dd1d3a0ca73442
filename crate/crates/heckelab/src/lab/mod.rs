//! Families of forms, experiment orchestration, and report plumbing.
//!
//! Determinism contract: identical config and seed produce byte-identical
//! serialized reports regardless of thread count. Parallel stages collect
//! per-form records, sort them by label, and aggregate sequentially; wall
//! clock never enters the serialized bytes.

pub mod config;
pub mod experiments;
pub mod selftest;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::FormSpec;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct FamilyConfig {
    /// |a4| <= a4_bound, |a6| <= a6_bound box enumeration
    pub a4_bound: i64,
    pub a6_bound: i64,
    /// when set, enumerate y^2 = (x-a)(x-b)(x-c) over a <= b < c in the box
    /// instead, mapped to short form
    pub two_torsion_bound: Option<i64>,
    pub p_max: u64,
    pub n_max: u64,
    pub seed: u64,
    /// keep only the first k members of the deterministic enumeration
    pub limit: Option<usize>,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        FamilyConfig {
            a4_bound: 8,
            a6_bound: 8,
            two_torsion_bound: None,
            p_max: 1000,
            n_max: 1000,
            seed: 1,
            limit: None,
        }
    }
}

/// Short form of y^2 = (x - a)(x - b)(x - c): scale by u = 3 to keep the
/// completed cube integral.
pub fn two_torsion_curve(a: i64, b: i64, c: i64) -> Result<FormSpec> {
    let (a, b, c) = (a as i128, b as i128, c as i128);
    let c2 = -(a + b + c);
    let c1 = a * b + a * c + b * c;
    let c0 = -(a * b * c);
    let a4 = 27 * (3 * c1 - c2 * c2);
    let a6 = 27 * (2 * c2 * c2 * c2 - 9 * c1 * c2 + 27 * c0);
    let a4: i64 = a4.try_into().map_err(|_| Error::Overflow("torsion model a4"))?;
    let a6: i64 = a6.try_into().map_err(|_| Error::Overflow("torsion model a6"))?;
    FormSpec::elliptic_curve(a4, a6)
}

/// Deterministic enumeration of a curve family; singular pairs are skipped.
pub fn family_generate(cfg: &FamilyConfig) -> Result<Vec<FormSpec>> {
    let mut out = Vec::new();
    if let Some(t) = cfg.two_torsion_bound {
        for a in -t..=t {
            for b in (a + 1)..=t {
                for c in (b + 1)..=t {
                    if let Ok(spec) = two_torsion_curve(a, b, c) {
                        out.push(spec);
                    }
                    if let Some(k) = cfg.limit {
                        if out.len() >= k {
                            return finish_family(out);
                        }
                    }
                }
            }
        }
    } else {
        for a4 in -cfg.a4_bound..=cfg.a4_bound {
            for a6 in -cfg.a6_bound..=cfg.a6_bound {
                if let Ok(spec) = FormSpec::elliptic_curve(a4, a6) {
                    out.push(spec);
                }
                if let Some(k) = cfg.limit {
                    if out.len() >= k {
                        return finish_family(out);
                    }
                }
            }
        }
    }
    finish_family(out)
}

fn finish_family(out: Vec<FormSpec>) -> Result<Vec<FormSpec>> {
    if out.is_empty() {
        return Err(Error::InvalidInput("family is empty".into()));
    }
    Ok(out)
}

/// Common report envelope; the serialized form carries the experiment id,
/// the config echo, applied tolerances, per-form records, aggregates and
/// verdicts.
#[derive(Debug, Clone, Serialize)]
pub struct Report<C: Serialize, R: Serialize, A: Serialize> {
    pub experiment: String,
    pub version: String,
    pub config: C,
    pub tolerances: BTreeMap<String, f64>,
    pub records: Vec<R>,
    pub aggregate: A,
    pub verdicts: BTreeMap<String, bool>,
}

pub trait CsvRecord {
    fn header() -> &'static str;
    fn row(&self) -> String;
}

impl<C: Serialize, R: Serialize + CsvRecord, A: Serialize> Report<C, R, A> {
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }

    pub fn to_csv_string(&self) -> String {
        let mut s = String::from(R::header());
        s.push('\n');
        for r in &self.records {
            s.push_str(&r.row());
            s.push('\n');
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_family_counts() {
        // |a4|,|a6| <= 1: nine pairs, (0,0) singular
        let cfg = FamilyConfig { a4_bound: 1, a6_bound: 1, ..Default::default() };
        let fam = family_generate(&cfg).unwrap();
        assert_eq!(fam.len(), 8);
        let cfg0 = FamilyConfig { a4_bound: 0, a6_bound: 0, ..Default::default() };
        assert!(family_generate(&cfg0).is_err());
    }

    #[test]
    fn torsion_transform_fixture() {
        // (0,1,2) -> x(x-1)(x-2), short form Y^2 = X^3 - 81 X
        let spec = two_torsion_curve(0, 1, 2).unwrap();
        assert_eq!(spec.label, "ec_-81_0");
    }

    #[test]
    fn enumeration_is_deterministic() {
        let cfg = FamilyConfig { a4_bound: 3, a6_bound: 2, ..Default::default() };
        let a = family_generate(&cfg).unwrap();
        let b = family_generate(&cfg).unwrap();
        let la: Vec<_> = a.iter().map(|s| s.label.clone()).collect();
        let lb: Vec<_> = b.iter().map(|s| s.label.clone()).collect();
        assert_eq!(la, lb);
    }

    #[test]
    fn torsion_family_members_are_nonsingular() {
        let cfg = FamilyConfig {
            two_torsion_bound: Some(3),
            ..Default::default()
        };
        let fam = family_generate(&cfg).unwrap();
        assert_eq!(fam.len(), 35); // C(7,3) distinct triples
        for spec in fam {
            assert!(spec.is_cusp());
        }
    }
}
