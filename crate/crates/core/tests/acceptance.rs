//! Acceptance suite: one pass/fail line per criterion, non-zero exit on any
//! failure.

use std::collections::HashSet;
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::Instant;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use divisor_span::apps;
use divisor_span::blocks::{build_blocks, check_muj};
use divisor_span::counts::{count_h, count_h_star, count_hr, count_shifted_primes};
use divisor_span::geometry::DivisorGeometry;
use divisor_span::identities::{abel_identity_check, check_combsum_bound};
use divisor_span::mc::{check_volynsv, exact_small_k, mc_estimate, RegionKind, RegionSpec};
use divisor_span::order_stats::{check_q2_bounds, qk_exact, smirnov_limit, BoundarySpec, Q2Report};
use divisor_span::scalar::rational;
use divisor_span::shape::erdos_delta;
use divisor_span::{Rational, Result};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        pass,
        detail: detail.into(),
    })
}

/// Sorted divisor lists of every `n <= limit`, built by marking multiples.
struct DivisorTable {
    start: Vec<usize>,
    divs: Vec<u32>,
}

impl DivisorTable {
    fn build(limit: usize) -> Self {
        let mut count = vec![0usize; limit + 1];
        for d in 1..=limit {
            for m in (d..=limit).step_by(d) {
                count[m] += 1;
            }
        }
        let mut start = vec![0usize; limit + 2];
        for n in 1..=limit {
            start[n + 1] = start[n] + count[n];
        }
        let mut fill = start.clone();
        let mut divs = vec![0u32; start[limit + 1]];
        for d in 1..=limit {
            for m in (d..=limit).step_by(d) {
                divs[fill[m]] = d as u32;
                fill[m] += 1;
            }
        }
        DivisorTable { start, divs }
    }

    fn of(&self, n: usize) -> &[u32] {
        &self.divs[self.start[n]..self.start[n + 1]]
    }
}

const ORACLE_X: u64 = 500_000;

fn oracle_equivalence() -> Result<Outcome> {
    let start = Instant::now();
    let table = DivisorTable::build(ORACLE_X as usize);
    let squarefree: Vec<bool> = (0..=ORACLE_X as usize)
        .map(|n| n > 0 && table.of(n).iter().skip(1).all(|&d| n % (d as usize * d as usize) != 0))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0dd5);
    let mut mismatches = Vec::new();
    for i in 0..200 {
        let x = rng.random_range(2..=ORACLE_X);
        let y = (rng.random::<f64>() * (x as f64).ln()).exp().min(x as f64 - 1.0).max(1.0);
        let z = y * (rng.random::<f64>() * (x as f64 / y).ln()).exp();
        let z = z.clamp(y.next_up(), x as f64);
        let r = rng.random_range(1..=5u32);
        let (mut h, mut hr, mut hs) = (0u64, 0u64, 0u64);
        for (n, &sqf) in squarefree.iter().enumerate().take(x as usize + 1).skip(1) {
            let c = table.of(n).iter().filter(|&&d| d as f64 > y && d as f64 <= z).count() as u32;
            h += (c >= 1) as u64;
            hr += (c == r) as u64;
            hs += (c >= 1 && sqf) as u64;
        }
        let got = (count_h(x, y, z)?, count_hr(x, y, z, r)?, count_h_star(x, y, z)?);
        if got != (h, hr, hs) {
            mismatches.push(format!("#{i} x={x} y={y} z={z} r={r}: {got:?} vs {:?}", (h, hr, hs)));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        mismatches.is_empty() && secs < 60.0,
        format!("200 triples, {} mismatches, {secs:.1}s {}", mismatches.len(), mismatches.join("; ")),
    )
}

fn trivial_windows() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7121);
    let mut bad = Vec::new();
    for i in 0..1000 {
        let x = rng.random_range(1..=10_000_000u64);
        let y = rng.random_range(1.0..1_000_000.0f64);
        let fy = y.floor();
        if i % 2 == 0 {
            let z = y + rng.random::<f64>() * (fy + 1.0 - y);
            let z = if z >= fy + 1.0 { y } else { z };
            let h = count_h(x, y, z)?;
            if h != 0 {
                bad.push(format!("x={x} y={y} z={z}: {h}"));
            }
        } else {
            let z = fy + 1.0 + rng.random::<f64>() * (y - fy);
            let want = x / (fy as u64 + 1);
            let h = count_h(x, y, z)?;
            if h != want {
                bad.push(format!("x={x} y={y} z={z}: {h} vs {want}"));
            }
        }
    }
    outcome(bad.is_empty(), format!("1000 triples, {} wrong {}", bad.len(), bad.join("; ")))
}

const X8: u64 = 100_000_000;

fn short_interval_envelope() -> Result<Outcome> {
    let delta = erdos_delta::<f64>();
    let mut ratios = Vec::new();
    for y in [100.0, 1000.0, 10_000.0, 30_000.0f64] {
        let h = count_h(X8, y, 2.0 * y)? as f64;
        let ly = y.ln();
        ratios.push(h * ly.powf(delta) * ly.ln().powf(1.5) / X8 as f64);
    }
    let (lo, hi) = min_max(&ratios);
    outcome(hi / lo <= 3.0, format!("ratios {ratios:.4?}, max/min {:.3}", hi / lo))
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
}

fn exactly_one_share() -> Result<Outcome> {
    let mut shares = Vec::new();
    for y in [100.0, 1000.0, 10_000.0f64] {
        let h = count_h(X8, y, 2.0 * y)? as f64;
        shares.push(count_hr(X8, y, 2.0 * y, 1)? as f64 / h);
    }
    outcome(
        shares.iter().all(|&s| s >= 0.1),
        format!("H1/H at y = 1e2, 1e3, 1e4: {shares:.4?}"),
    )
}

fn exactly_one_shape() -> Result<Outcome> {
    let y = 100.0;
    let mut shares = Vec::new();
    let mut scaled = Vec::new();
    for q in [10.0, 100.0, 1000.0f64] {
        let h = count_h(X8, y, q * y)? as f64;
        let s = count_hr(X8, y, q * y, 1)? as f64 / h;
        let l = (q + 10.0).ln();
        shares.push(s);
        scaled.push(s / (l.ln() / l));
    }
    let decreasing = shares.windows(2).all(|w| w[1] < w[0]);
    let (lo, hi) = min_max(&scaled);
    outcome(
        decreasing && hi / lo <= 5.0,
        format!("H1/H {shares:.4?}, scaled {scaled:.4?}, band {:.3}", hi / lo),
    )
}

fn smirnov() -> Result<Outcome> {
    let start = Instant::now();
    let k = 200usize;
    let mut worst: f64 = 0.0;
    let mut diffs = Vec::new();
    for l in [0.25, 0.5, 1.0, 1.5f64] {
        let q = qk_exact(&BoundarySpec::new(k, l * (k as f64).sqrt(), k as f64)?)?;
        let d = (q - smirnov_limit(l)?).abs();
        worst = worst.max(d);
        diffs.push(d);
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 0.06 && secs < 10.0,
        format!("|Q_200 - limit| {diffs:.4?}, {secs:.2}s"),
    )
}

fn q2_report() -> Result<&'static Q2Report> {
    static REPORT: OnceLock<Result<Q2Report>> = OnceLock::new();
    REPORT.get_or_init(|| check_q2_bounds(40)).as_ref().map_err(Clone::clone)
}

fn boundary_lower() -> Result<Outcome> {
    let rep = q2_report()?;
    outcome(
        rep.lower_failures.is_empty(),
        format!("{} pairs, {} failures", rep.lower_checked, rep.lower_failures.len()),
    )
}

fn boundary_upper() -> Result<Outcome> {
    let rep = q2_report()?;
    outcome(
        rep.upper_sup.is_finite() && rep.upper_sup <= 10.0,
        format!(
            "sup {:.4} at (k,u,w) = {:?} over {} points",
            rep.upper_sup, rep.upper_argmax, rep.upper_points
        ),
    )
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    loop {
        let p = rng.random_range(-60i64..=60);
        let q = rng.random_range(1i64..=25);
        if p != 0 {
            return rational(p, q);
        }
    }
}

fn abel() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(0xabe1);
    let mut checks = 0;
    let mut bad = Vec::new();
    for _ in 0..50 {
        let (a, b) = (random_rational(&mut rng), random_rational(&mut rng));
        for t in 1..=12 {
            checks += 1;
            if !abel_identity_check(t, &a, &b)?.equal {
                bad.push(format!("t={t} a={a} b={b}"));
            }
        }
    }
    outcome(bad.is_empty(), format!("{checks} exact checks, {} unequal {}", bad.len(), bad.join("; ")))
}

fn combsum() -> Result<Outcome> {
    let mut checked = 0;
    let mut skipped = 0;
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    for t in 10..=20u32 {
        let ti = t as i64;
        for a in -(ti / 2)..=ti {
            for b in -(ti / 2)..=ti {
                let eps = (Rational::one() + rational(a + b, ti)).min(Rational::one());
                if eps <= Rational::zero() {
                    skipped += 1;
                    continue;
                }
                let rep = check_combsum_bound(t, &rational(a, 1), &rational(b, 1), &eps)?;
                checked += 1;
                worst = worst.max(rep.ratio);
                if !rep.holds {
                    bad.push(format!("t={t} a={a} b={b}"));
                }
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{checked} points ({skipped} with eps <= 0 skipped), {} failures, max ratio {worst:.3e}",
            bad.len()
        ),
    )
}

fn random_region(rng: &mut ChaCha8Rng, kind: RegionKind) -> RegionSpec {
    let k = rng.random_range(2..=6usize);
    let kf = k as f64;
    match kind {
        RegionKind::UIntegrand => RegionSpec::u_integrand(k, rng.random_range(1.0..6.0), rng.random_range(0.1..3.0)),
        RegionKind::YSet => RegionSpec::y_set(
            k,
            rng.random_range(1.0..6.0),
            rng.random_range(0.0..5.0),
            rng.random_range(1..=3),
        ),
        RegionKind::TSet => RegionSpec::t_set(k, rng.random_range(1.0..6.0), rng.random_range(-1.0..3.0)),
        RegionKind::SSet => RegionSpec::s_set(k, rng.random_range(0.5..kf), rng.random_range(kf / 2.0..2.0 * kf)),
    }
}

/// The U integrand is the constant `α` when `α <= k/(2^k - 1)`: every
/// `j`-th term is at least `2^{-j}(j + α)`.
fn degenerate_u(spec: &RegionSpec) -> bool {
    let k = spec.k as f64;
    spec.kind == RegionKind::UIntegrand && spec.alpha.is_some_and(|a| a <= k / (k.exp2() - 1.0))
}

const MC_N: u64 = 100_000;

fn mc_vs_quadrature() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x3c11);
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    let mut redrawn = 0;
    for kind in [RegionKind::UIntegrand, RegionKind::YSet, RegionKind::TSet, RegionKind::SSet] {
        let mut done = 0;
        while done < 20 {
            let spec = random_region(&mut rng, kind);
            if degenerate_u(&spec) {
                redrawn += 1;
                continue;
            }
            let exact = exact_small_k(&spec)?;
            let indicator = kind != RegionKind::UIntegrand;
            if indicator && !(1e-3..=1.0 - 1e-3).contains(&exact) {
                redrawn += 1;
                continue;
            }
            let est = mc_estimate(&spec, MC_N, rng.random())?;
            let z = (est.mean - exact).abs() / est.stderr;
            worst = worst.max(z);
            if z.is_nan() || z > 4.0 {
                bad.push(format!("{spec:?}: mean {} exact {exact} stderr {}", est.mean, est.stderr));
            }
            done += 1;
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "80 points (20 per kind), max |z| {worst:.2}, {redrawn} degenerate draws redrawn {}",
            bad.join("; ")
        ),
    )
}

fn y_positivity() -> Result<Outcome> {
    let rep = check_volynsv(100, 95.0, 20.0, 10, 1_000_000, 12)?;
    outcome(
        rep.positive,
        format!(
            "mean {:.5} stderr {:.2e}, ratio to (k-v+1)/(k+1) {:.4}",
            rep.estimate.mean, rep.estimate.stderr, rep.ratio
        ),
    )
}

fn prime_blocks() -> Result<Outcome> {
    let table = build_blocks(10_000_000)?;
    let lambda = table.lambda();
    let rep = check_muj(&table)?;
    let devs: Vec<(usize, f64)> = rep.deviations.iter().copied().filter(|&(j, _)| (2..=4).contains(&j)).collect();
    let decreasing = devs.len() == 3 && devs.windows(2).all(|w| w[1].1 < w[0].1);
    outcome(
        lambda.get(1) == Some(&2.0) && lambda.get(2) == Some(&7.0) && decreasing,
        format!("lambda_0.. {lambda:?}, deviations j=2..4 {devs:.4?}"),
    )
}

fn applications() -> Result<Outcome> {
    let x = 1_000_000u64;
    let s = 1000u64;
    let set: HashSet<u64> = (1..=s).flat_map(|a| (a..=s).map(move |b| a * b)).collect();
    let a = apps::mult_table_count(x)?;
    let mult_ok = a == set.len() as u64;

    let mut farey_bad = Vec::new();
    for q in 2..=500 {
        let (c, d) = (apps::farey_gap_count(q)?, apps::farey_gap_count_adjacent(q)?);
        if c != d {
            farey_bad.push(q);
        }
    }

    let table = divisor_span::arith::FactorTable::build(100_000)?;
    let mut g_bad = 0;
    for n in 1..=100_000 {
        let d = table.divisors(n)?;
        if apps::g_of(&d) > apps::tau_plus_of(&d) {
            g_bad += 1;
        }
    }

    let mut sandwich = Vec::new();
    let mut sandwich_ok = true;
    for q in [50u64, 100, 200] {
        let n = apps::farey_gap_count(q)?;
        let (lo, hi) = apps::farey_sandwich(q)?;
        sandwich_ok &= lo <= n && n <= hi;
        sandwich.push((q, lo, n, hi));
    }
    outcome(
        mult_ok && farey_bad.is_empty() && g_bad == 0 && sandwich_ok,
        format!(
            "A(1e6) = {a} (hash {}), Farey mismatches {farey_bad:?}, g > tau+ at {g_bad} n, sandwich (Q, lo, N, hi) {sandwich:?}",
            set.len()
        ),
    )
}

fn shifted_primes() -> Result<Outcome> {
    let start = Instant::now();
    let x = 10_000_000u64;
    let lx = (x as f64).ln();
    let grid: [(f64, f64); 5] = [(10.0, 20.0), (100.0, 200.0), (1000.0, 1010.0), (1000.0, 2000.0), (100.0, 10_000.0)];
    let mut worst: f64 = 0.0;
    let mut values = Vec::new();
    let mut hyp = true;
    for (y, z) in grid {
        hyp &= z >= y + y.ln().powf(2.0 / 3.0);
        let h = count_h(x, y, z)? as f64;
        for shift in [1i64, -1] {
            let r = count_shifted_primes(x, y, z, shift)? as f64 * lx / h;
            worst = worst.max(r);
            values.push(r);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        hyp && worst <= 20.0 && secs <= 120.0,
        format!("ratios {values:.3?}, max {worst:.3}, {secs:.1}s"),
    )
}

fn divisor_geometry() -> Result<Outcome> {
    let table = divisor_span::arith::FactorTable::build(100_000)?;
    let mut worst: f64 = 0.0;
    let mut gap_bad = 0;
    for a in 1..=100_000u64 {
        let g = DivisorGeometry::from_factorization(a, table.factorize(a)?);
        if !g.gap_bound_violations().is_empty() {
            gap_bad += 1;
        }
        for sigma in [0.1, 0.5, 1.0] {
            let profile = g.multiplicity_profile(sigma)?;
            let total: f64 = profile.iter().enumerate().map(|(r, l)| r as f64 * l).sum();
            worst = worst.max((total - sigma * g.tau() as f64).abs());
        }
    }
    outcome(
        worst <= 1e-9 && gap_bad == 0,
        format!("max |sum r L_r - sigma tau| {worst:.2e}, gap-bound failures {gap_bad}"),
    )
}

type Criterion = (u32, &'static str, fn() -> Result<Outcome>);

const CRITERIA: &[Criterion] = &[
    (1, "count oracle equivalence", oracle_equivalence),
    (2, "trivial windows exact", trivial_windows),
    (3, "short-window density envelope", short_interval_envelope),
    (4, "exactly-one-divisor share", exactly_one_share),
    (5, "exactly-one-divisor shape", exactly_one_shape),
    (6, "smirnov limit", smirnov),
    (7, "boundary lower bound", boundary_lower),
    (8, "boundary upper envelope", boundary_upper),
    (9, "abel identity", abel),
    (10, "binomial sum bound", combsum),
    (11, "monte carlo vs quadrature", mc_vs_quadrature),
    (12, "Y-region positivity", y_positivity),
    (13, "prime blocks", prime_blocks),
    (14, "applications", applications),
    (15, "shifted primes", shifted_primes),
    (16, "divisor geometry", divisor_geometry),
];

fn main() -> ExitCode {
    let mut failed = Vec::new();
    for &(id, name, f) in CRITERIA {
        let t = Instant::now();
        let r = f();
        report(id, name, &r, t.elapsed().as_secs_f64());
        if !matches!(r, Ok(o) if o.pass) {
            failed.push(id);
        }
    }
    println!(
        "acceptance: {}/{} criteria passed",
        CRITERIA.len() - failed.len(),
        CRITERIA.len()
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {failed:?}");
        ExitCode::FAILURE
    }
}

fn report(id: u32, name: &str, r: &Result<Outcome>, secs: f64) {
    match r {
        Ok(o) => println!(
            "[{}] {id:>2} {name} ({secs:.1}s): {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        ),
        Err(e) => println!("[FAIL] {id:>2} {name} ({secs:.1}s): error: {e}"),
    }
}
