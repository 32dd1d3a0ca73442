//! On-disk coefficient cache: one CSV per form label, byte-stable.
//!
//! Format:
//! ```text
//! # schema=coeffs-v1, label=delta, k=12, N=1
//! p,a_p
//! 2,-24
//! ...
//! ```
//! Only reliable primes are stored; flagged bad-prime values are cheap to
//! recompute and never feed analyses anyway.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::forms::{FormSpec, PrimeCoeff};

pub fn cache_path(dir: &Path, spec: &FormSpec) -> PathBuf {
    dir.join(format!("{}.csv", spec.label))
}

pub fn write_cache(dir: &Path, spec: &FormSpec, coeffs: &BTreeMap<u64, PrimeCoeff>) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = cache_path(dir, spec);
    let mut body = String::new();
    body.push_str(&format!(
        "# schema=coeffs-v1, label={}, k={}, N={}\n",
        spec.label, spec.weight, spec.level
    ));
    body.push_str("p,a_p\n");
    for (p, c) in coeffs {
        if c.reliable {
            body.push_str(&format!("{},{}\n", p, c.value));
        }
    }
    // atomic create-rename so concurrent writers never expose partial files
    let tmp = dir.join(format!(".{}.tmp.{}", spec.label, std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(body.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, &path)?;
    Ok(path)
}

pub fn read_cache(dir: &Path, spec: &FormSpec) -> Result<BTreeMap<u64, PrimeCoeff>> {
    let path = cache_path(dir, spec);
    let text = fs::read_to_string(&path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse(format!("{}: empty cache", path.display())))?;
    let expect = format!(
        "# schema=coeffs-v1, label={}, k={}, N={}",
        spec.label, spec.weight, spec.level
    );
    if header != expect {
        return Err(Error::Parse(format!(
            "{}: header mismatch: got {header:?}, want {expect:?}",
            path.display()
        )));
    }
    match lines.next() {
        Some("p,a_p") => {}
        other => {
            return Err(Error::Parse(format!(
                "{}: bad column row {other:?}",
                path.display()
            )))
        }
    }
    let mut map = BTreeMap::new();
    let mut last_p = 0u64;
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let (ps, aps) = line
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("{}: bad row {line:?}", path.display())))?;
        let p: u64 = ps
            .parse()
            .map_err(|_| Error::Parse(format!("{}: bad prime {ps:?}", path.display())))?;
        let a: i128 = aps
            .parse()
            .map_err(|_| Error::Parse(format!("{}: bad coefficient {aps:?}", path.display())))?;
        if p <= last_p {
            return Err(Error::Parse(format!("{}: rows not sorted", path.display())));
        }
        last_p = p;
        map.insert(p, PrimeCoeff { value: a, reliable: true });
    }
    Ok(map)
}

/// Build a table through the cache: reuse the stored prime coefficients when
/// they cover the requested range, otherwise compute and refresh the file.
/// Coverage is judged by the presence of the largest needed prime, which is
/// sound because the writer always stores a complete reliable-prime prefix.
pub fn build_table_cached(
    dir: &Path,
    spec: &FormSpec,
    p_max: u64,
    n_max: u64,
) -> Result<crate::forms::CoefficientTable> {
    let needed = p_max.max(n_max);
    if let Ok(map) = read_cache(dir, spec) {
        let top_needed = crate::sieve::primes_up_to(needed)
            .into_iter()
            .rev()
            .find(|p| !spec.excluded_primes.contains(p));
        let covered = match top_needed {
            Some(p) => map.contains_key(&p),
            None => true,
        };
        if covered {
            let trimmed: BTreeMap<u64, PrimeCoeff> =
                map.into_iter().filter(|(p, _)| *p <= needed).collect();
            return crate::forms::table_from_prime_coeffs(spec, p_max, n_max, trimmed);
        }
    }
    let table = crate::forms::build_table(spec, p_max, n_max)?;
    write_cache(dir, spec, table.prime_coeffs())?;
    Ok(table)
}
