//! End-to-end fixture suite behind the `selftest` subcommand: the pinned
//! values every other computation leans on, each check cheap enough to run
//! on every invocation.

use crate::chebst;
use crate::forms::{self, build_table, FormSpec};
use crate::signs;
use crate::specfun::{beta, dickman, StepFunction};

pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &'static str, pass: bool, detail: String) -> Check {
    Check { name, pass, detail }
}

pub fn run() -> Vec<Check> {
    let mut out = Vec::new();

    // CM curve fixtures
    out.push(match (|| -> crate::Result<(i128, i128, Option<u64>, Option<u64>)> {
        let spec = FormSpec::elliptic_curve(1, 0)?;
        let t = build_table(&spec, 50, 50)?;
        let fnn = signs::first_negative(&t, 50)?;
        let a13 = t.ap(13).unwrap().value;
        // a(9) = lambda(9) * 9^{1/2}
        let a9 = (t.lambda(9).unwrap() * 3.0).round() as i128;
        Ok((a9, a13, fnn.n, fnn.prime))
    })() {
        Ok((a9, a13, n, p)) => check(
            "cm_curve_fixtures",
            a9 == -3 && a13 == -6 && n == Some(9) && p == Some(13),
            format!("a(9)={a9} a(13)={a13} n_f={n:?} p={p:?}"),
        ),
        Err(e) => check("cm_curve_fixtures", false, e.to_string()),
    });

    // weight-12 fixtures
    out.push(match (|| -> crate::Result<(i128, Option<u64>)> {
        let series = forms::delta_series(10)?;
        let t = build_table(&FormSpec::level1_newform(12)?, 50, 50)?;
        Ok((series[2], signs::first_negative(&t, 50)?.n))
    })() {
        Ok((a2, n)) => check(
            "weight12_fixtures",
            a2 == -24 && n == Some(2),
            format!("a(2)={a2} n_f={n:?}"),
        ),
        Err(e) => check("weight12_fixtures", false, e.to_string()),
    });

    // Eisenstein positivity
    out.push(match build_table(&FormSpec::eisenstein_e4(), 500, 500) {
        Ok(t) => {
            let neg = (1..=500u64).filter(|&n| t.lambda(n).unwrap_or(1.0) <= 0.0).count();
            check("eisenstein_positive", neg == 0, format!("{neg} nonpositive values"))
        }
        Err(e) => check("eisenstein_positive", false, e.to_string()),
    });

    // kappa
    out.push(match dickman::solve_kappa(1e-10) {
        Ok(k) => check(
            "kappa_bounds",
            k.kappa > 10.0 / 9.0 && 1.0 / (2.0 * k.kappa) <= 9.0 / 20.0,
            format!("kappa={:.12} residual={:.2e}", k.kappa, k.residual),
        ),
        Err(e) => check("kappa_bounds", false, e.to_string()),
    });

    // sextic suite
    out.push(match chebst::poly_y::poly_y_suite() {
        Ok(r) => check(
            "poly_y_suite",
            (r.alpha0 - 0.231_072_024_708_014_2).abs() < 1e-12 && r.indicator_minorant_ok,
            format!("alpha0={:.15} Y(2)={}", r.alpha0, r.y_at_two),
        ),
        Err(e) => check("poly_y_suite", false, e.to_string()),
    });

    // Chebyshev coefficients
    out.push({
        let u4 = chebst::chebyshev_u(4);
        let u6 = chebst::chebyshev_u(6);
        check(
            "chebyshev_polynomials",
            u4 == vec![1, 0, -3, 0, 1] && u6 == vec![-1, 0, 6, 0, -5, 0, 1],
            String::from("U4, U6 integer coefficients"),
        )
    });

    // orthonormality (small block)
    out.push({
        let g = chebst::gram_matrix(8, 1 << 13);
        let mut worst = 0.0f64;
        for (a, row) in g.iter().enumerate() {
            for (b, &v) in row.iter().enumerate() {
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        check("st_orthonormality", worst < 1e-10, format!("worst deviation {worst:.2e}"))
    });

    // averaged Fejer polynomial integrals
    out.push({
        let mut ok = true;
        let mut detail = String::new();
        for l in [3u64, 5, 11] {
            let closed = chebst::bmv::bmv_beta_l_st_integral(l).unwrap();
            let quad = chebst::st_integrate(
                |theta| chebst::bmv::bmv_beta_l(l).unwrap().eval(theta / std::f64::consts::PI),
                1 << 12,
            );
            if (closed - quad).abs() > 1e-9 {
                ok = false;
                detail = format!("L={l}: {closed} vs {quad}");
            }
        }
        check("fejer_pair_integrals", ok, detail)
    });

    // the two beta routes agree
    out.push(match (|| -> crate::Result<(f64, f64)> {
        let alpha = StepFunction::remark_alpha(8)?;
        let v = beta::beta_volterra(&alpha, 0.5, 1.0 / 1024.0)?;
        let s = beta::beta_series_with_resolution(&alpha, 0.5, 8, 1024)?;
        Ok((v.eval(0.5), s.value))
    })() {
        Ok((v, s)) => check(
            "beta_cross_solver",
            (v - s).abs() < 1e-4,
            format!("volterra={v:.8} series={s:.8}"),
        ),
        Err(e) => check("beta_cross_solver", false, e.to_string()),
    });

    // product identity
    out.push(match (|| -> crate::Result<f64> {
        let t = build_table(&FormSpec::level1_newform(12)?, 50, 1000)?;
        let map = [(2u64, 1u32), (3, 1)].into_iter().collect();
        chebst::hecke_product_identity(&t, &map)
    })() {
        Ok(res) => check("hecke_product_identity", res < 1e-9, format!("residual {res:.2e}")),
        Err(e) => check("hecke_product_identity", false, e.to_string()),
    });

    // combinatorial sum split
    out.push(match signs::hy::h_sum(200.0, 1.3, 1) {
        Ok(b) => check(
            "h_sum_split",
            b.total == b.smooth_count - 2 * b.prime_correction,
            format!("total={} smooth={} correction={}", b.total, b.smooth_count, b.prime_correction),
        ),
        Err(e) => check("h_sum_split", false, e.to_string()),
    });

    // cache round trip
    out.push(match (|| -> crate::Result<bool> {
        let dir = std::env::temp_dir().join(format!("heckelab-selftest-{}", std::process::id()));
        let spec = FormSpec::level1_newform(12)?;
        let t = build_table(&spec, 100, 2)?;
        forms::cache::write_cache(&dir, &spec, t.prime_coeffs())?;
        let loaded = forms::cache::read_cache(&dir, &spec)?;
        let same = &loaded == t.prime_coeffs();
        let _ = std::fs::remove_dir_all(&dir);
        Ok(same)
    })() {
        Ok(same) => check("cache_roundtrip", same, String::new()),
        Err(e) => check("cache_roundtrip", false, e.to_string()),
    });

    out
}

#[cfg(test)]
mod tests {
    #[test]
    fn everything_green() {
        for c in super::run() {
            assert!(c.pass, "{}: {}", c.name, c.detail);
        }
    }
}
