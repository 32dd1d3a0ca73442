//! The function beta solving u^2 beta(u) = int_0^u t beta(t) alpha(u-t) dt
//! for a piecewise-constant kernel alpha, by two independent routes:
//!
//! - product integration on a uniform grid: at each new node the integral is
//!   split wherever u - t crosses a kernel breakpoint, beta is linear on grid
//!   panels, every piece integrates in closed form, and the unknown value at
//!   the node appears linearly through the final panel;
//! - the inclusion-exclusion series u beta(u) = u + sum_j (-1)^j I_j(u)/j!
//!   where I_j obeys the one-dimensional recursion
//!   I_j(u) = int_0^u (2 - alpha(s))/s * I_{j-1}(u - s) ds, I_0(u) = u.
//!
//! The first positive zero of beta is located on the grid solution and
//! re-measured at half step and a deeper kernel cap; the spread between runs
//! is the reported error bar. There is no external reference value, so the
//! routes check each other.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sieve;
use crate::specfun::{GridFunction, StepFunction};

/// Enumeration ceiling for y^u in the empirical sums.
pub const ALPHA_SUM_BUDGET: u64 = 30_000_000;

/// Solve the integral equation on [0, u_max] with step h; beta(0) = 1.
pub fn beta_volterra(alpha: &StepFunction, u_max: f64, h: f64) -> Result<GridFunction> {
    if alpha.max_abs() > 2.0 + 1e-12 {
        return Err(Error::InvalidInput("kernel must be bounded by 2".into()));
    }
    if h <= 0.0 || u_max <= 0.0 {
        return Err(Error::InvalidInput("need positive step and range".into()));
    }
    let n = (u_max / h).ceil() as usize;
    let mut beta = vec![1.0f64; n + 1];
    let breaks = alpha.breaks();
    let mut cuts: Vec<f64> = Vec::with_capacity(breaks.len() + 2);

    for node in 1..=n {
        let un = node as f64 * h;
        let mut known = 0.0f64; // integral contribution independent of beta[node]
        let mut unknown = 0.0f64; // coefficient of beta[node]
        for j in 0..node {
            let lo = j as f64 * h;
            let hi = (j + 1) as f64 * h;
            cuts.clear();
            cuts.push(lo);
            for &b in breaks.iter().skip(1) {
                let t = un - b;
                if t > lo && t < hi {
                    cuts.push(t);
                }
            }
            cuts.push(hi);
            cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for w in 0..cuts.len() - 1 {
                let (t1, t2) = (cuts[w], cuts[w + 1]);
                if t2 - t1 <= 0.0 {
                    continue;
                }
                let aval = alpha.eval(un - 0.5 * (t1 + t2));
                // integral of t and t(t - lo) over the piece
                let p1 = 0.5 * (t2 * t2 - t1 * t1);
                let p2 = (t2 * t2 * t2 - t1 * t1 * t1) / 3.0 - lo * p1;
                let w_left = p1 - p2 / h;
                let w_right = p2 / h;
                known += aval * beta[j] * w_left;
                if j + 1 == node {
                    unknown += aval * w_right;
                } else {
                    known += aval * beta[j + 1] * w_right;
                }
            }
        }
        let denom = un * un - unknown;
        if denom.abs() < 1e-12 * un.max(1.0) * un.max(1.0) {
            return Err(Error::Invariant(format!(
                "vanishing linear coefficient at u = {un} (step {h}, node {node})"
            )));
        }
        beta[node] = known / denom;
    }
    Ok(GridFunction {
        start: 0.0,
        step: h,
        samples: beta,
        meta: format!("beta_volterra h={h}"),
    })
}

/// Residual u^2 beta(u) - int_0^u t beta(t) alpha(u-t) dt recomputed by an
/// independent pass: the quadrature nodes are the half-step refinement of the
/// solution grid plus every kernel crossing, with Simpson on each piece
/// (exact for the piecewise data, so this checks the solve, not itself).
pub fn volterra_residual(alpha: &StepFunction, grid: &GridFunction, u: f64) -> f64 {
    let mut pts: Vec<f64> = Vec::new();
    let fine = grid.step / 2.0;
    let mut t = 0.0;
    while t < u {
        pts.push(t);
        t += fine;
    }
    pts.push(u);
    for &b in grid_breaks(alpha) {
        let c = u - b;
        if c > 0.0 && c < u {
            pts.push(c);
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let mut total = 0.0;
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a <= 0.0 {
            continue;
        }
        let m = 0.5 * (a + b);
        // the kernel is constant on the piece interior; sampling it at the
        // endpoints would take the wrong side of a jump
        let aval = alpha.eval(u - m);
        let f = |t: f64| t * grid.eval(t) * aval;
        total += (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
    }
    u * u * grid.eval(u) - total
}

fn grid_breaks(alpha: &StepFunction) -> &[f64] {
    alpha.breaks()
}

#[derive(Debug, Clone, Serialize)]
pub struct BetaSeriesResult {
    pub value: f64,
    /// signed terms (-1)^j I_j(u) / j! for j = 1..=j_max
    pub terms: Vec<f64>,
    /// |I_j|/j! nonincreasing beyond the first few terms
    pub factorial_decay_ok: bool,
}

/// Series evaluation at a single point (default internal resolution).
pub fn beta_series(alpha: &StepFunction, u: f64, j_max: u32) -> Result<BetaSeriesResult> {
    beta_series_with_resolution(alpha, u, j_max, 2048)
}

pub fn beta_series_with_resolution(
    alpha: &StepFunction,
    u: f64,
    j_max: u32,
    n_grid: usize,
) -> Result<BetaSeriesResult> {
    let (grid, terms) = beta_series_grid(alpha, u, j_max, n_grid)?;
    let value = *grid.samples.last().unwrap();
    let mut decay_ok = true;
    for j in 4..terms.len() {
        if terms[j].abs() > terms[j - 1].abs() + 1e-12 {
            decay_ok = false;
        }
    }
    Ok(BetaSeriesResult { value, terms, factorial_decay_ok: decay_ok })
}

/// Series solution sampled on [0, u_max]; also returns the signed terms at
/// the right endpoint. The recursion integrates w(s) = (2 - alpha(s))/s,
/// which is bounded because the kernel equals 2 near 0 (rejected otherwise).
pub fn beta_series_grid(
    alpha: &StepFunction,
    u_max: f64,
    j_max: u32,
    n_grid: usize,
) -> Result<(GridFunction, Vec<f64>)> {
    if u_max <= 0.0 || u_max > 2.0 {
        return Err(Error::InvalidInput("series route is for 0 < u <= 2".into()));
    }
    if j_max > 12 {
        return Err(Error::InvalidInput("j_max must be <= 12".into()));
    }
    if (alpha.values()[0] - 2.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(
            "kernel must equal 2 near 0 for an integrable series weight".into(),
        ));
    }
    let n = n_grid.max(64);
    let delta = u_max / n as f64;

    // panel list over [0, u_max]: delta cells split at kernel breakpoints,
    // with the weight w(s) = (2 - alpha)/s precomputed at endpoints and
    // midpoints. The kernel value is read at the panel midpoint so that a
    // panel ending exactly at a jump keeps its own side's value.
    struct Panel {
        s1: f64,
        s2: f64,
        w1: f64,
        wm: f64,
        w2: f64,
        /// index of the delta cell containing the panel
        cell: usize,
    }
    let mut panels: Vec<Panel> = Vec::with_capacity(n + alpha.breaks().len());
    for cell in 0..n {
        let lo = cell as f64 * delta;
        let hi = (cell + 1) as f64 * delta;
        let mut cuts = vec![lo];
        for &b in alpha.breaks().iter().skip(1) {
            if b > lo && b < hi {
                cuts.push(b);
            }
        }
        cuts.push(hi);
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for v in cuts.windows(2) {
            let (s1, s2) = (v[0], v[1]);
            if s2 - s1 > 0.0 {
                let c = 2.0 - alpha.eval(0.5 * (s1 + s2));
                let w_at = |s: f64| if s > 0.0 { c / s } else { 0.0 };
                panels.push(Panel {
                    s1,
                    s2,
                    w1: w_at(s1),
                    wm: w_at(0.5 * (s1 + s2)),
                    w2: w_at(s2),
                    cell,
                });
            }
        }
    }
    // cumulative panel count per cell for prefix iteration
    let mut cell_end = vec![0usize; n + 1];
    for (i, p) in panels.iter().enumerate() {
        cell_end[p.cell + 1] = i + 1;
    }
    for c in 1..=n {
        if cell_end[c] == 0 {
            cell_end[c] = cell_end[c - 1];
        }
    }

    let interp = |arr: &[f64], t: f64| -> f64 {
        let x = t / delta;
        if x <= 0.0 {
            return arr[0];
        }
        let i = x.floor() as usize;
        if i + 1 >= arr.len() {
            return *arr.last().unwrap();
        }
        let frac = x - i as f64;
        arr[i] * (1.0 - frac) + arr[i + 1] * frac
    };

    let mut prev: Vec<f64> = (0..=n).map(|i| i as f64 * delta).collect(); // I_0(t) = t
    let mut signed_terms: Vec<f64> = Vec::new();
    let mut acc: Vec<f64> = prev.clone(); // running u*beta(u) partial sums
    let mut factorial = 1.0f64;
    for j in 1..=j_max {
        factorial *= j as f64;
        let mut cur = vec![0.0f64; n + 1];
        for (k, c) in cur.iter_mut().enumerate().skip(1) {
            let tk = k as f64 * delta;
            let mut total = 0.0;
            for p in &panels[..cell_end[k]] {
                let len = p.s2 - p.s1;
                let f1 = p.w1 * interp(&prev, tk - p.s1);
                let fm = p.wm * interp(&prev, tk - 0.5 * (p.s1 + p.s2));
                let f2 = p.w2 * interp(&prev, tk - p.s2);
                total += len / 6.0 * (f1 + 4.0 * fm + f2);
            }
            *c = total;
        }
        let sign = if j % 2 == 1 { -1.0 } else { 1.0 };
        for (a, &c) in acc.iter_mut().zip(cur.iter()) {
            *a += sign * c / factorial;
        }
        signed_terms.push(sign * cur[n] / factorial);
        prev = cur;
    }
    let samples: Vec<f64> = acc
        .iter()
        .enumerate()
        .map(|(i, &v)| if i == 0 { 1.0 } else { v / (i as f64 * delta) })
        .collect();
    Ok((
        GridFunction {
            start: 0.0,
            step: delta,
            samples,
            meta: format!("beta_series j_max={j_max}"),
        },
        signed_terms,
    ))
}

/// First positive zero of a grid function, refined by bisection on the
/// interpolant within the bracketing cell.
pub fn first_zero_on_grid(grid: &GridFunction) -> Option<f64> {
    let i = grid.first_sign_change()?;
    let (mut lo, mut hi) = (
        grid.start + grid.step * (i - 1) as f64,
        grid.start + grid.step * i as f64,
    );
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if grid.eval(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Serialize)]
pub struct FirstZeroReport {
    pub u0: Option<f64>,
    pub u0_half_step: Option<f64>,
    pub u0_deeper_cap: Option<f64>,
    /// spread across the refinement runs
    pub error_bar: f64,
    /// minimum of beta on the base grid (reported when no zero is found)
    pub beta_min: f64,
    pub m_cap: u32,
    pub h: f64,
    pub u_max: f64,
}

/// Locate the first positive zero of beta for the capped staircase kernel,
/// with stability re-runs at h/2 and cap M+4.
pub fn beta_first_zero(m_cap: u32, h: f64, u_max: f64) -> Result<FirstZeroReport> {
    let base_alpha = StepFunction::remark_alpha(m_cap)?;
    let base = beta_volterra(&base_alpha, u_max, h)?;
    let fine = beta_volterra(&base_alpha, u_max, h / 2.0)?;
    let deep_alpha = StepFunction::remark_alpha(m_cap + 4)?;
    let deep = beta_volterra(&deep_alpha, u_max, h)?;

    let u0 = first_zero_on_grid(&base);
    let u0_fine = first_zero_on_grid(&fine);
    let u0_deep = first_zero_on_grid(&deep);
    let error_bar = match (u0, u0_fine, u0_deep) {
        (Some(a), Some(b), Some(c)) => (a - b).abs().max((a - c).abs()),
        _ => f64::NAN,
    };
    let beta_min = base.samples.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(FirstZeroReport {
        u0,
        u0_half_step: u0_fine,
        u0_deeper_cap: u0_deep,
        error_bar,
        beta_min,
        m_cap,
        h,
        u_max,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AlphaScan {
    pub u_grid: Vec<f64>,
    pub sums: Vec<f64>,
    /// first u where the running sum turns negative (interpolated)
    pub sign_change_u: Option<f64>,
}

/// Exact sum over squarefree n <= y^u of prod_{p|n} alpha(log p / log y),
/// level 1. DFS over the primes with nonzero weight; deterministic order.
pub fn empirical_alpha_h_sum(y: f64, u: f64, alpha: &StepFunction) -> Result<f64> {
    let scan = empirical_alpha_scan(y, &[u], alpha)?;
    Ok(scan.sums[0])
}

pub fn empirical_alpha_scan(y: f64, u_grid: &[f64], alpha: &StepFunction) -> Result<AlphaScan> {
    if y <= 4.0 {
        return Err(Error::InvalidInput("y must exceed 4".into()));
    }
    if u_grid.is_empty() || u_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidInput("u grid must be increasing".into()));
    }
    let u_top = *u_grid.last().unwrap();
    let x_top = y.powf(u_top).floor() as u64;
    if x_top > ALPHA_SUM_BUDGET {
        return Err(Error::Budget(format!("y^u = {x_top} exceeds {ALPHA_SUM_BUDGET}")));
    }
    let log_y = y.ln();
    let mut primes: Vec<u64> = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    for p in sieve::primes_up_to(x_top) {
        let v = alpha.eval((p as f64).ln() / log_y);
        if v != 0.0 {
            primes.push(p);
            weights.push(v);
        }
    }
    let thresholds: Vec<u64> = u_grid.iter().map(|&u| y.powf(u).floor() as u64).collect();
    let mut buckets = vec![0.0f64; thresholds.len()];

    // iterative DFS over squarefree products
    struct Frame {
        idx: usize,
        n: u64,
        hval: f64,
    }
    let mut stack = vec![Frame { idx: 0, n: 1, hval: 1.0 }];
    while let Some(f) = stack.pop() {
        let slot = thresholds.partition_point(|&t| t < f.n);
        if slot < buckets.len() {
            buckets[slot] += f.hval;
        }
        for i in f.idx..primes.len() {
            let p = primes[i];
            if p > x_top / f.n {
                break;
            }
            stack.push(Frame { idx: i + 1, n: f.n * p, hval: f.hval * weights[i] });
        }
    }
    let mut sums = Vec::with_capacity(buckets.len());
    let mut acc = 0.0;
    for b in buckets {
        acc += b;
        sums.push(acc);
    }
    let mut sign_change = None;
    for i in 0..sums.len() {
        if sums[i] < 0.0 {
            sign_change = Some(if i == 0 {
                u_grid[0]
            } else {
                let (u0, u1) = (u_grid[i - 1], u_grid[i]);
                let (s0, s1) = (sums[i - 1], sums[i]);
                u0 + (u1 - u0) * s0 / (s0 - s1)
            });
            break;
        }
    }
    Ok(AlphaScan { u_grid: u_grid.to_vec(), sums, sign_change_u: sign_change })
}
