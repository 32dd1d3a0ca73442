//! Acceptance suite: every release-gating criterion with its tolerance
//! pinned, one test per criterion, printing a PASS line when it holds.
//! Run with `cargo test --release --test acceptance -- --nocapture`.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use heckelab::chebst;
use heckelab::forms::{build_table, FormSpec};
use heckelab::lab::{experiments, family_generate, selftest, FamilyConfig};
use heckelab::sieve;
use heckelab::signs::{self, hy, stats};
use heckelab::specfun::{beta, dickman, StepFunction};

fn budget(name: &str, started: Instant, seconds: f64) {
    let elapsed = started.elapsed().as_secs_f64();
    assert!(
        elapsed < seconds,
        "{name}: runtime {elapsed:.1}s exceeds the {seconds}s budget"
    );
}

#[test]
fn accept_1_exact_fixtures() {
    let t0 = Instant::now();
    let cm = build_table(&FormSpec::elliptic_curve(1, 0).unwrap(), 50, 50).unwrap();
    assert_eq!((cm.lambda(9).unwrap() * 3.0).round() as i64, -3, "a(9)");
    assert_eq!(cm.ap(13).unwrap().value, -6, "a(13)");
    let fnn = signs::first_negative(&cm, 50).unwrap();
    assert_eq!(fnn.n, Some(9));
    assert_eq!(fnn.prime, Some(13));

    let series = heckelab::forms::delta_series(10).unwrap();
    assert_eq!(series[2], -24);
    let delta = build_table(&FormSpec::level1_newform(12).unwrap(), 50, 50).unwrap();
    assert_eq!(signs::first_negative(&delta, 50).unwrap().n, Some(2));
    budget("criterion 1", t0, 1.0);
    println!("ACCEPT 1 exact-fixtures: PASS");
}

#[test]
fn accept_2_kappa() {
    let t0 = Instant::now();
    let k = dickman::solve_kappa(1e-10).unwrap();
    assert!(k.residual <= 1e-10, "residual {}", k.residual);
    assert!(k.kappa > 10.0 / 9.0);
    assert!(k.kappa > (std::f64::consts::E / 2.0).powf(1.0 / 3.0));
    assert!(1.0 / (2.0 * k.kappa) <= 9.0 / 20.0);
    let halved = dickman::solve_kappa_with_step(1e-10, dickman::DEFAULT_RHO_STEP / 2.0).unwrap();
    assert!(
        (k.kappa - halved.kappa).abs() < 1e-8,
        "step halving moved kappa by {}",
        (k.kappa - halved.kappa).abs()
    );
    budget("criterion 2", t0, 5.0);
    println!("ACCEPT 2 kappa: PASS (kappa = {:.12}, residual {:.2e})", k.kappa, k.residual);
}

#[test]
fn accept_3_alpha0() {
    let t0 = Instant::now();
    let r = chebst::poly_y::poly_y_suite().unwrap();
    assert!(
        (r.alpha0 - 0.231_072_024_708_014_2).abs() < 1e-12,
        "alpha0 = {:.18}",
        r.alpha0
    );
    assert!(r.representations_identical);
    assert_eq!(r.y_at_two, "2981/3000");
    assert!(r.indicator_minorant_ok);
    assert_eq!(r.grid_points, 10_000);
    budget("criterion 3", t0, 1.0);
    println!("ACCEPT 3 alpha0: PASS (alpha0 = {:.15})", r.alpha0);
}

#[test]
fn accept_4_chebyshev_sato_tate() {
    let t0 = Instant::now();
    let gram = chebst::gram_matrix(20, 1 << 15);
    for (i, row) in gram.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            assert!((v - target).abs() < 1e-10, "gram[{i}][{j}] = {v}");
        }
    }
    for l in [3u64, 5, 11, 101] {
        let poly = chebst::bmv::bmv_beta_l(l).unwrap();
        let quad = chebst::st_integrate(|t| poly.eval(t / std::f64::consts::PI), 1 << 14);
        let closed = chebst::bmv::bmv_beta_l_st_integral(l).unwrap();
        assert!((quad - closed).abs() < 1e-10, "L={l}: {quad} vs {closed}");
    }

    // 100 random exponent maps on each of three forms
    let forms = [
        FormSpec::level1_newform(12).unwrap(),
        FormSpec::level1_newform(16).unwrap(),
        FormSpec::elliptic_curve(1, 0).unwrap(),
    ];
    let n_max = 20_000u64;
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_817);
    for spec in &forms {
        let table = build_table(spec, 100, n_max).unwrap();
        let usable: Vec<u64> = sieve::primes_up_to(97)
            .into_iter()
            .filter(|p| !spec.excluded_primes.contains(p))
            .collect();
        for _ in 0..100 {
            let mut map: BTreeMap<u64, u32> = BTreeMap::new();
            let mut product = 1u64;
            for _ in 0..rng.gen_range(1..=4) {
                let p = usable[rng.gen_range(0..usable.len())];
                let e = rng.gen_range(1..=3u32);
                let grow = p.pow(e);
                if product.saturating_mul(grow) > n_max {
                    continue;
                }
                product *= grow;
                *map.entry(p).or_insert(0) += e;
            }
            if map.is_empty() {
                map.insert(usable[0], 1);
            }
            let residual = chebst::hecke_product_identity(&table, &map).unwrap();
            assert!(residual < 1e-9, "{}: map {map:?} residual {residual}", spec.label);
        }
    }
    budget("criterion 4", t0, 10.0);
    println!("ACCEPT 4 chebyshev-sato-tate: PASS");
}

#[test]
fn accept_5_coefficient_invariants() {
    let t0 = Instant::now();
    let p_max = 10_000u64;
    let n_max = 10_000u64;

    // tau(n) by a divisor sweep, shared across curves
    let mut tau = vec![0u32; n_max as usize + 1];
    for d in 1..=n_max as usize {
        let mut m = d;
        while m <= n_max as usize {
            tau[m] += 1;
            m += d;
        }
    }

    let family = family_generate(&FamilyConfig {
        a4_bound: 5,
        a6_bound: 5,
        limit: Some(100),
        ..Default::default()
    })
    .unwrap();
    assert_eq!(family.len(), 100);

    use rayon::prelude::*;
    family.par_iter().for_each(|spec| {
        let t = build_table(spec, p_max, n_max).unwrap();
        for (&p, c) in t.prime_coeffs() {
            if !c.reliable || t.is_excluded(p) {
                continue;
            }
            // Hasse, exact on integers
            let a = c.value;
            assert!(a * a <= 4 * p as i128, "{}: Hasse at {p}", spec.label);
            // square relation against the stored table where covered
            if p * p <= n_max {
                let lp = t.lambda_p(p).unwrap();
                let lp2 = t.lambda(p * p).unwrap();
                assert!(
                    (lp * lp - 1.0 - lp2).abs() < 1e-9,
                    "{}: square relation at {p}",
                    spec.label
                );
            }
        }
        for n in 1..=n_max {
            if let Some(lam) = t.lambda(n) {
                assert!(
                    lam.abs() <= tau[n as usize] as f64 + 1e-9,
                    "{}: divisor bound at {n}",
                    spec.label
                );
            }
        }
    });

    // CM vanishing with zero exceptions
    let cm = build_table(&FormSpec::elliptic_curve(1, 0).unwrap(), p_max, 2).unwrap();
    for (&p, c) in cm.prime_coeffs() {
        if c.reliable && p % 4 == 3 {
            assert_eq!(c.value, 0, "CM vanishing at {p}");
        }
    }

    // mod-2 evenness on 50 full-2-torsion curves, zero tolerance
    let torsion = family_generate(&FamilyConfig {
        two_torsion_bound: Some(4),
        limit: Some(50),
        ..Default::default()
    })
    .unwrap();
    assert_eq!(torsion.len(), 50);
    let r = experiments::exp_mod2(&torsion, p_max).unwrap();
    assert_eq!(r.aggregate.curves, 50);

    budget("criterion 5", t0, 60.0);
    println!("ACCEPT 5 coefficient-invariants: PASS");
}

#[test]
fn accept_6_beta_solver() {
    let t0 = Instant::now();
    let alpha = StepFunction::remark_alpha(8).unwrap();

    // cross-oracle agreement at 20 points of [0, 1.2]
    let volterra = beta::beta_volterra(&alpha, 1.2, 1.0 / 2048.0).unwrap();
    let (series, _) = beta::beta_series_grid(&alpha, 1.2, 8, 2048).unwrap();
    for i in 1..=20 {
        let u = 1.2 * i as f64 / 20.0;
        let d = (volterra.eval(u) - series.eval(u)).abs();
        assert!(d < 1e-4, "u={u}: routes differ by {d}");
    }

    // integral-equation residual under independent quadrature
    let grid = beta::beta_volterra(&alpha, 3.0, 1.0 / 1024.0).unwrap();
    for i in [128usize, 512, 1024, 2048, 3072] {
        let u = i as f64 / 1024.0;
        let r = beta::volterra_residual(&alpha, &grid, u).abs();
        assert!(r < 1e-6 * (1.0 + u * u), "u={u}: residual {r}");
    }

    // first-zero stability under h -> h/2 and cap -> cap + 4
    let zero = beta::beta_first_zero(8, 1.0 / 512.0, 3.0).unwrap();
    let u0 = zero.u0.expect("zero located");
    let bar = zero.error_bar;
    assert!(bar.is_finite() && bar < 0.05, "error bar {bar}");
    assert!((zero.u0_half_step.unwrap() - u0).abs() <= bar + 1e-12);
    assert!((zero.u0_deeper_cap.unwrap() - u0).abs() <= bar + 1e-12);

    // empirical sign-change locations move monotonically toward the zero
    let mut locations = Vec::new();
    for y in [1.0e4f64, 1.0e5, 1.0e6] {
        let u_top = ((beta::ALPHA_SUM_BUDGET as f64).ln() / y.ln()).min(1.87);
        let grid_u: Vec<f64> = (0..=60)
            .map(|i| 1.0 + (u_top - 1.0) * i as f64 / 60.0)
            .collect();
        let scan = beta::empirical_alpha_scan(y, &grid_u, &alpha).unwrap();
        locations.push(scan.sign_change_u.expect("sign change within budget"));
    }
    for w in locations.windows(2) {
        assert!(
            (u0 - w[1]).abs() < (u0 - w[0]).abs(),
            "locations {locations:?} not moving toward {u0}"
        );
    }

    budget("criterion 6", t0, 300.0);
    println!(
        "ACCEPT 6 beta-solver: PASS (first zero {:.6} +- {:.1e}, empirical {:?})",
        u0, bar, locations
    );
}

#[test]
fn accept_7_lemma_desk_scale() {
    let t0 = Instant::now();
    let ratio_at = |y: f64| -> f64 {
        let h = hy::h_sum(y, 1.0, 1).unwrap();
        let main = dickman::lm_h_main_term(y, 1.0, 1).unwrap();
        h.total as f64 / main
    };
    let r6 = ratio_at(1.0e6);
    let r4 = ratio_at(1.0e4);
    assert!((0.8..=1.2).contains(&r6), "ratio at 1e6 is {r6}");
    assert!((r6 - 1.0).abs() < (r4 - 1.0).abs(), "{r6} not closer to 1 than {r4}");
    budget("criterion 7", t0, 120.0);
    println!("ACCEPT 7 lemma-desk-scale: PASS (ratios {r4:.4} -> {r6:.4})");
}

#[test]
fn accept_8_statistical_experiments() {
    let t0 = Instant::now();

    // sign agreement between the weight-12 and weight-16 newforms
    let delta = build_table(&FormSpec::level1_newform(12).unwrap(), 100_000, 2).unwrap();
    let wt16 = build_table(&FormSpec::level1_newform(16).unwrap(), 100_000, 2).unwrap();
    let agreement = signs::sign_agreement(&delta, &wt16, 100_000).unwrap();
    assert!(
        (0.42..=0.58).contains(&agreement.density),
        "agreement {}",
        agreement.density
    );

    // prescribed signs at z = 13 over a >= 2*10^4 curve family
    let family = family_generate(&FamilyConfig {
        a4_bound: 71,
        a6_bound: 71,
        ..Default::default()
    })
    .unwrap();
    assert!(family.len() >= 20_000);
    let r = experiments::exp_prescribed_signs(&family, 13, &[1, 1, 1, 1, 1, 1]).unwrap();
    let f = r.aggregate.relaxed_fraction;
    let lo = 0.5f64.powi(6);
    assert!(
        (lo..=2.5 * lo).contains(&f),
        "relaxed fraction {f} outside [{lo}, {}]",
        2.5 * lo
    );

    // counterexample moments at x = 10^6
    let m = stats::counterexample_moments(1_000_000, 6).unwrap();
    for seq in [&m.x_moments, &m.y_moments] {
        assert!(seq[1].abs() < 0.01, "V2 average {}", seq[1]);
        assert!(seq[3].abs() < 0.01, "V4 average {}", seq[3]);
        assert!((seq[5] + 1.0).abs() < 0.02, "V6 average {}", seq[5]);
        for k in [0usize, 2, 4] {
            assert!(seq[k].abs() < 0.05, "odd moment {} = {}", k + 1, seq[k]);
        }
    }
    assert!((m.x_sixth_raw - 4.0).abs() < 0.01, "raw sixth {}", m.x_sixth_raw);
    assert!((m.y_sixth_raw - 4.0).abs() < 0.01, "raw sixth {}", m.y_sixth_raw);

    budget("criterion 8", t0, 600.0);
    println!(
        "ACCEPT 8 statistical-experiments: PASS (agreement {:.4}, prescribed {:.5}, sixth {:.4})",
        agreement.density, f, m.x_sixth_raw
    );
}

#[test]
fn accept_9_engineering() {
    let t0 = Instant::now();

    // determinism across thread counts, byte-for-byte
    let family = family_generate(&FamilyConfig {
        a4_bound: 6,
        a6_bound: 6,
        ..Default::default()
    })
    .unwrap();
    let mut outputs = Vec::new();
    for threads in [1usize, 4] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        let json = pool.install(|| {
            let r = experiments::exp_first_negative(&family, 200, 200).unwrap();
            r.to_json_string()
        });
        outputs.push(json);
    }
    assert_eq!(outputs[0], outputs[1], "reports differ across thread counts");

    // cache round trip is exact
    let dir = tempfile::tempdir().unwrap();
    let spec = FormSpec::elliptic_curve(2, 3).unwrap();
    let direct = build_table(&spec, 500, 500).unwrap();
    heckelab::forms::cache::write_cache(dir.path(), &spec, direct.prime_coeffs()).unwrap();
    let cached = heckelab::forms::cache::build_table_cached(dir.path(), &spec, 500, 500).unwrap();
    assert_eq!(cached.prime_coeffs(), direct.prime_coeffs());

    // fixture suite green end to end
    let checks = selftest::run();
    for c in &checks {
        assert!(c.pass, "selftest {}: {}", c.name, c.detail);
    }

    budget("criterion 9", t0, 120.0);
    println!("ACCEPT 9 engineering: PASS ({} selftest checks)", checks.len());
}
