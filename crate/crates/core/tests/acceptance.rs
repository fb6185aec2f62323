//! Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned
//! below. Runs as a plain binary so the lines reach the console unfiltered.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hsk_core::add1d::{BinTree, BinTreeConfig};
use hsk_core::add2d::{QuadTree, QuadTreeConfig};
use hsk_core::dyn1d::DynSketch1D;
use hsk_core::gen::{
    closed_form_opt, decode_bits, gen_index1d, gen_index2d, gen_opt_hard, index1d_capacity, index2d_rings,
    HardInstanceSpec, Instance,
};
use hsk_core::mult1d::{MultOptions, MultStream1D, OfflineSketch1D};
use hsk_core::objective::{exact_optimize, hinge_objective};
use hsk_core::optimize::{optimize_via_sketch, Backend, OptimizeConfig};
use hsk_core::sketch::{AnySketch, BuildSpec, SketchBuilder};
use hsk_core::{HyperplaneQuery, Power, Result, SketchParams};

/// Relative-error multiplier for the streaming multiplicative sketch.
const KAPPA_MULT: f64 = 1.0;
/// Fraction of (query, seed) pairs that must meet the relative bound.
const MULT_SUCCESS: f64 = 0.95;
/// Interval-count multiplier: intervals ≤ κ·log₂n/ε.
const KAPPA_DYN_INTERVALS: f64 = 2.0;
/// Relative-error multiplier for the dynamic-interval sketch.
const KAPPA_DYN_ERROR: f64 = 1.0;
/// add1d node multiplier: nodes ≤ κ·ε^{-1/2}·√log₂(1/ε) (ε^{-1/3} for p = 2).
const KAPPA_ADD1D_NODES: f64 = 10.0;
/// add2d space multiplier: words ≤ κ·ε^{-4/5} (ε^{-4/7} for p = 2).
const KAPPA_ADD2D_SPACE: f64 = 32.0;
/// add2d: fraction of trials with error ≤ ε.
const ADD2D_SUCCESS: f64 = 0.60;
/// Optimization: gap ≤ κε and distance ≤ √(2κε/λ).
const KAPPA_OPT: f64 = 1.0;
/// Optimization runs that must succeed out of 100.
const OPT_MIN_PASS: usize = 90;
/// exact_optimize vs closed form.
const CLOSED_FORM_TOL: f64 = 1e-6;
/// Floating-point slack on exact identities.
const EXACT_TOL: f64 = 1e-9;

struct Outcome {
    passed: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        passed: true,
        detail: detail.into(),
    })
}

fn fail(detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        passed: false,
        detail: detail.into(),
    })
}

/// Exact `Σ max{0, q − x}` via sorted prefix sums.
struct Oracle {
    xs: Vec<f64>,
    prefix: Vec<f64>,
}

impl Oracle {
    fn new(xs: &[f64]) -> Self {
        let mut xs = xs.to_vec();
        xs.sort_by(f64::total_cmp);
        let mut prefix = Vec::with_capacity(xs.len() + 1);
        prefix.push(0.0);
        for &x in &xs {
            prefix.push(prefix.last().unwrap() + x);
        }
        Self { xs, prefix }
    }

    fn left_sum(&self, q: f64) -> f64 {
        let k = self.xs.partition_point(|&x| x < q);
        k as f64 * q - self.prefix[k]
    }
}

fn ints(rng: &mut ChaCha8Rng, n: usize, w: u64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(1..=w) as f64).collect()
}

fn quantile(v: &mut [f64], q: f64) -> f64 {
    v.sort_by(f64::total_cmp);
    v[((v.len() - 1) as f64 * q).round() as usize]
}

fn c1_offline_bracket() -> Result<Outcome> {
    let w = 1u64 << 16;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut queries = 0u64;
    for n in 1..=2000usize {
        let mut xs = ints(&mut rng, n, w);
        xs.sort_by(f64::total_cmp);
        let mut prefix = vec![0.0];
        for &x in &xs {
            prefix.push(prefix.last().unwrap() + x);
        }
        for eps in [1.0, 0.5, 0.1] {
            let sk = OfflineSketch1D::build(&xs, eps)?;
            for i in 0..xs.len().saturating_sub(1) {
                let q = 0.5 * (xs[i] + xs[i + 1]);
                let exact = (i + 1) as f64 * q - prefix[i + 1];
                let t = sk.query(q);
                queries += 1;
                if !(t <= exact * (1.0 + EXACT_TOL) && exact <= (1.0 + eps) * t * (1.0 + EXACT_TOL)) {
                    return fail(format!("n {n} ε {eps} q {q}: T {t}, exact {exact}"));
                }
            }
        }
    }
    pass(format!("{queries} midpoint queries over n = 1..2000, zero exceptions"))
}

fn c2_mult_stream() -> Result<Outcome> {
    let (n, w, eps) = (100_000usize, 1u64 << 20, 0.1);
    let (mut good, mut total, mut exact_checked) = (0usize, 0usize, 0usize);
    let mut errs = Vec::new();
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let xs = ints(&mut rng, n, w);
        let params = SketchParams {
            epsilon: eps,
            w,
            n_hint: n as u64,
            seed,
            ..SketchParams::default()
        };
        let bound = MultStream1D::retained_bound(&params);
        let mut sk = MultStream1D::new(params, MultOptions::default())?;
        for (i, &x) in xs.iter().enumerate() {
            sk.update(x)?;
            if sk.retained() > bound {
                return fail(format!("seed {seed} update {}: retained {} > {bound}", i + 1, sk.retained()));
            }
        }
        sk.freeze();
        let oracle = Oracle::new(&xs);
        for _ in 0..200 {
            let q = rng.random_range(1..=w) as f64;
            let exact = oracle.left_sum(q);
            let (est, br) = sk.query_breakdown(q)?;
            if q <= br.p {
                exact_checked += 1;
                if (est - exact).abs() > EXACT_TOL * exact.max(1.0) {
                    return fail(format!("seed {seed} q {q} ≤ p {}: {est} vs {exact}", br.p));
                }
            }
            total += 1;
            let rel = if exact == 0.0 { est.abs() } else { (est - exact).abs() / exact };
            errs.push(rel);
            if rel <= KAPPA_MULT * eps {
                good += 1;
            }
        }
    }
    let rate = good as f64 / total as f64;
    let p95 = quantile(&mut errs, 0.95);
    let detail = format!(
        "κ = {KAPPA_MULT}: {good}/{total} within κε ({:.1}%), p95 rel err {p95:.4}, {exact_checked} exact below p, space bound held",
        100.0 * rate
    );
    if rate >= MULT_SUCCESS {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn c3_dyn_intervals() -> Result<Outcome> {
    let (n, w, eps) = (100_000usize, 1u64 << 20, 0.1);
    let (mut max_intervals, mut max_space) = (0usize, 0usize);
    let (mut good, mut total) = (0usize, 0usize);
    let mut errs = Vec::new();
    let cap = KAPPA_DYN_INTERVALS * (n as f64).log2() / eps;
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(2000 + seed);
        let xs = ints(&mut rng, n, w);
        let params = SketchParams {
            epsilon: eps,
            w,
            n_hint: n as u64,
            seed,
            ..SketchParams::default()
        };
        let mut sk = DynSketch1D::new(params)?;
        for (i, &x) in xs.iter().enumerate() {
            sk.update(x)?;
            let mut checks = vec![sk.check_property2(), sk.check_property1()];
            if i % 1000 == 999 || i + 1 == n {
                checks.push(sk.check_structure());
            }
            for r in checks {
                if let Err(e) = r {
                    return fail(format!("seed {seed} update {}: {e}", i + 1));
                }
            }
            max_space = max_space.max(sk.space_words());
            max_intervals = max_intervals.max(sk.interval_count());
        }
        sk.freeze();
        let oracle = Oracle::new(&xs);
        let mut seed_good = 0;
        for _ in 0..100 {
            let q = rng.random_range(1..=w) as f64;
            let exact = oracle.left_sum(q);
            let est = sk.query(q)?;
            let rel = if exact == 0.0 { est.abs() } else { (est - exact).abs() / exact };
            errs.push(rel);
            if rel <= KAPPA_DYN_ERROR * eps {
                seed_good += 1;
            }
        }
        if seed_good < 95 {
            return fail(format!("seed {seed}: only {seed_good}/100 queries within κ'ε"));
        }
        good += seed_good;
        total += 100;
    }
    let p95 = quantile(&mut errs, 0.95);
    let detail = format!(
        "properties clean after 10⁶ updates; max intervals {max_intervals} ≤ {cap:.0}, max space {max_space} words; {good}/{total} within κ'ε = {}, p95 {p95:.4}",
        KAPPA_DYN_ERROR * eps
    );
    if (max_intervals as f64) <= cap {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn c4_add1d() -> Result<Outcome> {
    let n = 10_000usize;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let uniform: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
    let clustered: Vec<f64> = (0..n)
        .map(|i| {
            let c = [-0.7, 0.1, 0.8][i % 3];
            (c + 0.05 * (rng.random::<f64>() - 0.5)).clamp(-1.0, 1.0)
        })
        .collect();
    let mut worst: f64 = 0.0;
    let mut nodes_report = Vec::new();
    for p in [Power::Linear, Power::Squared] {
        for eps in [0.1f64, 0.05] {
            let l = (1.0 / eps).log2().sqrt();
            let cap = KAPPA_ADD1D_NODES
                * l
                * match p {
                    Power::Linear => eps.powf(-0.5),
                    Power::Squared => eps.powf(-1.0 / 3.0),
                };
            for (name, xs) in [("uniform", &uniform), ("clustered", &clustered)] {
                let mut t = BinTree::new(BinTreeConfig::new(eps, n as u64, p))?;
                for &x in xs.iter() {
                    t.update(x)?;
                }
                t.freeze();
                let pw = |d: f64| p.apply(d.max(0.0));
                for i in 0..100 {
                    let q = -1.2 + 2.4 * i as f64 / 99.0;
                    let exact = xs.iter().map(|&x| pw(q - x)).sum::<f64>() / n as f64;
                    let err = (t.query(q)? - exact).abs();
                    worst = worst.max(err / eps);
                    if err > eps {
                        return fail(format!("p {} ε {eps} {name} q {q}: error {err}", p.as_u8()));
                    }
                }
                if t.node_count() as f64 > cap {
                    return fail(format!("p {} ε {eps} {name}: {} nodes > {cap:.0}", p.as_u8(), t.node_count()));
                }
                nodes_report.push(format!("p{}/ε{eps}/{name}: {}≤{cap:.0}", p.as_u8(), t.node_count()));
            }
        }
    }
    pass(format!(
        "100% of queries within ε (worst err/ε {worst:.3}); nodes {}",
        nodes_report.join(", ")
    ))
}

fn c5_add2d() -> Result<Outcome> {
    let (n, eps) = (10_000usize, 0.1f64);
    let mut parts = Vec::new();
    let mut ok = true;
    for p in [Power::Linear, Power::Squared] {
        let space_cap = KAPPA_ADD2D_SPACE
            * match p {
                Power::Linear => eps.powf(-0.8),
                Power::Squared => eps.powf(-4.0 / 7.0),
            };
        let (mut within, mut trials, mut max_space, mut exact_lines) = (0usize, 0usize, 0usize, 0usize);
        let mut errs = Vec::new();
        for seed in 0..50u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(5000 + seed);
            let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.random(), rng.random()]).collect();
            let mut t = QuadTree::new(QuadTreeConfig::new(eps, n as u64, p, seed))?;
            for &[x, y] in &pts {
                t.update(x, y)?;
            }
            t.freeze();
            max_space = max_space.max(t.space_words());
            let exact = |th: [f64; 2], b: f64| {
                pts.iter().map(|r| p.apply((b - th[0] * r[0] - th[1] * r[1]).max(0.0))).sum::<f64>() / n as f64
            };
            for _ in 0..20 {
                let a = rng.random::<f64>() * std::f64::consts::TAU;
                let th = [a.cos(), a.sin()];
                let corners = [0.0, th[0], th[1], th[0] + th[1]];
                let lo = corners.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = corners.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let b = lo + rng.random::<f64>() * (hi - lo);
                let err = (t.query(th, b)? - exact(th, b)).abs();
                errs.push(err);
                trials += 1;
                if err <= eps {
                    within += 1;
                }
                for b in [lo - 0.1, hi + 0.1, b] {
                    if t.crossing_cells(th, b) == 0 {
                        exact_lines += 1;
                        let e = (t.query(th, b)? - exact(th, b)).abs();
                        if e > EXACT_TOL * exact(th, b).max(1.0) {
                            return fail(format!("p {} seed {seed}: uncrossed line off by {e}", p.as_u8()));
                        }
                    }
                }
            }
        }
        let rate = within as f64 / trials as f64;
        let med = quantile(&mut errs, 0.5);
        let max = errs.last().copied().unwrap_or(0.0);
        let good = rate >= ADD2D_SUCCESS && med <= eps && max_space as f64 <= space_cap;
        ok &= good;
        parts.push(format!(
            "p{}: {:.0}% within ε, median {med:.4}, max {max:.4}, {exact_lines} uncrossed lines exact, space {max_space} ≤ {space_cap:.0}",
            p.as_u8(),
            100.0 * rate
        ));
    }
    let detail = parts.join("; ");
    if ok {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn c6_optimize() -> Result<Outcome> {
    let (delta, lambda, n, eps) = (0.1, 0.01, 400usize, 0.1);
    let mut worst_cf: f64 = 0.0;
    for case in [0u8, 1] {
        for d in [1usize, 2, 3] {
            let inst = gen_opt_hard(&HardInstanceSpec::new(delta, n, d, case == 1, 7))?;
            let cf = closed_form_opt(delta, lambda, n, case)?;
            let opt = exact_optimize(&inst.points, lambda, 1e-12)?;
            let mut diff = (opt.theta[0] - cf.theta).abs().max((opt.b - cf.b).abs());
            diff = opt.theta[1..].iter().fold(diff, |m, t| m.max(t.abs()));
            worst_cf = worst_cf.max(diff);
        }
    }
    if worst_cf > CLOSED_FORM_TOL {
        return fail(format!("exact optimum differs from the closed form by {worst_cf:e}"));
    }
    let radius = (2.0 * KAPPA_OPT * eps / lambda).sqrt();
    let (mut passed, mut worst_gap, mut worst_dist) = (0usize, 0.0f64, 0.0f64);
    for seed in 0..100u64 {
        let case = (seed % 2) as u8;
        let inst = gen_opt_hard(&HardInstanceSpec::new(delta, n, 1, case == 1, seed))?;
        let cf = closed_form_opt(delta, lambda, n, case)?;
        let star = hinge_objective(&inst.points, &HyperplaneQuery::new(vec![cf.theta], cf.b), lambda)?;
        let r = optimize_via_sketch(&inst.points, &OptimizeConfig::new(Backend::Add1d, lambda, eps, seed))?;
        let got = hinge_objective(&inst.points, &r.query(), lambda)?;
        let gap = got - star;
        let dist = ((r.theta[0] - cf.theta).powi(2) + (r.b - cf.b).powi(2)).sqrt();
        worst_gap = worst_gap.max(gap);
        worst_dist = worst_dist.max(dist);
        if gap <= KAPPA_OPT * eps && dist <= radius {
            passed += 1;
        }
    }
    let detail = format!(
        "add1d backend: {passed}/100 runs within gap κε and distance {radius:.3} (worst gap {worst_gap:.4}, worst distance {worst_dist:.3}); exact vs closed form {worst_cf:.1e}"
    );
    if passed >= OPT_MIN_PASS {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn oracle_sum(inst: &Instance, q: &HyperplaneQuery) -> f64 {
    inst.points
        .iter()
        .map(|p| (q.b - q.theta.iter().zip(&p.x).map(|(a, b)| a * b).sum::<f64>()).max(0.0))
        .sum()
}

/// Decodes with `est`; returns (backend beat the threshold, decoded correctly).
fn decode_trial(inst: &Instance, bits: &[u8], mut est: impl FnMut(&HyperplaneQuery) -> Result<f64>) -> Result<(bool, bool)> {
    let n = inst.meta.n as f64;
    let mut beats = true;
    for dq in &inst.meta.decoder {
        let q = HyperplaneQuery::new(dq.theta.clone(), dq.b);
        let err = (est(&q)? - oracle_sum(inst, &q)).abs() / n;
        beats &= err < 0.5 * dq.signal;
    }
    let got = decode_bits(inst, est)?;
    Ok((beats, got == bits))
}

fn c7_decoders() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut applicable, mut oracle_ok, mut trials) = (0usize, 0usize, 0usize);
    for t in 0..20 {
        let eps = [0.01, 0.004][t % 2];
        let bits: Vec<u8> = (0..index1d_capacity(eps)).map(|_| rng.random_range(0..2)).collect();
        let inst = gen_index1d(&bits, eps, 20_000)?;
        let mut tree = BinTree::new(BinTreeConfig::new(eps / 3.0, inst.meta.n as u64, Power::Linear))?;
        for p in &inst.points {
            tree.update(p.x[0])?;
        }
        tree.freeze();
        let (beats, ok) = decode_trial(&inst, &bits, |q| tree.query_sum(q.b))?;
        let (_, exact_ok) = decode_trial(&inst, &bits, |q| Ok(oracle_sum(&inst, q)))?;
        trials += 1;
        oracle_ok += exact_ok as usize;
        if beats {
            applicable += 1;
            if !ok {
                return fail(format!("index1d trial {t}: backend beat the threshold but decoding failed"));
            }
        }
    }
    for t in 0..10 {
        let s = [6, 8][t % 2];
        let r = index2d_rings(s);
        let bits: Vec<u8> = (0..s * r).map(|_| rng.random_range(0..2)).collect();
        let inst = gen_index2d(&bits, s, r, 400 * s * r)?;
        let mut tree = QuadTree::new(
            QuadTreeConfig::new(0.001, inst.meta.n as u64, Power::Linear, t as u64).with_domain(-1.0, 1.0),
        )?;
        for p in &inst.points {
            tree.update(p.x[0], p.x[1])?;
        }
        tree.freeze();
        let (beats, ok) = decode_trial(&inst, &bits, |q| tree.query_sum_any([q.theta[0], q.theta[1]], q.b))?;
        let (_, exact_ok) = decode_trial(&inst, &bits, |q| Ok(oracle_sum(&inst, q)))?;
        trials += 1;
        oracle_ok += exact_ok as usize;
        if beats {
            applicable += 1;
            if !ok {
                return fail(format!("index2d trial {t}: backend beat the threshold but decoding failed"));
            }
        }
    }
    if oracle_ok != trials {
        return fail(format!("exact decoding recovered {oracle_ok}/{trials} bit strings"));
    }
    if applicable == 0 {
        return fail("no trial where the backend beat the threshold");
    }
    let mut min_ratio = f64::INFINITY;
    for i in 0..100 {
        let delta: f64 = rng.random_range(0.05..1.0 / 7.0);
        let lambda = delta * delta;
        let n = rng.random_range((1.0 / lambda).ceil() as usize..=3 * (1.0 / lambda).ceil() as usize);
        let mut thetas = [0.0; 2];
        for case in [0u8, 1] {
            let inst = gen_opt_hard(&HardInstanceSpec::new(delta, n, 1, case == 1, i))?;
            thetas[case as usize] = exact_optimize(&inst.points, lambda, 1e-12)?.theta[0];
        }
        let need = delta / (5.0 * lambda * n as f64);
        let sep = thetas[1] - thetas[0];
        min_ratio = min_ratio.min(sep / need);
        if sep < need {
            return fail(format!("δ {delta:.4} n {n}: separation {sep:e} < {need:e}"));
        }
    }
    pass(format!(
        "{applicable}/{trials} trials beat the threshold and decoded 100%; exact decoding {oracle_ok}/{trials}; separation ≥ bound for 100 (δ, n), min ratio {min_ratio:.2}"
    ))
}

fn c8_determinism() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let line: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>()).collect();
    let plane: Vec<[f64; 2]> = (0..20_000).map(|_| [rng.random(), rng.random()]).collect();
    let mut checked = 0usize;
    for backend in Backend::ALL {
        for p in [Power::Linear, Power::Squared] {
            if p == Power::Squared && !backend.is_additive() {
                continue;
            }
            let build = || -> Result<AnySketch> {
                let mut spec = BuildSpec::new(backend, 0.1, 20_000, 99);
                spec.p = p;
                let mut b = SketchBuilder::new(&spec)?;
                if backend == Backend::Add2d {
                    for x in &plane {
                        b.update(x)?;
                    }
                } else {
                    for x in &line {
                        b.update(&[*x])?;
                    }
                }
                b.finish()
            };
            let (a, b) = (build()?, build()?);
            let bytes = a.to_bytes()?;
            if bytes != b.to_bytes()? {
                return fail(format!("{backend} p{}: replay bytes differ", p.as_u8()));
            }
            let back = AnySketch::from_bytes(&bytes)?;
            if back.to_bytes()? != bytes {
                return fail(format!("{backend} p{}: reserialization differs", p.as_u8()));
            }
            for _ in 0..200 {
                let q = if backend == Backend::Add2d {
                    let a = rng.random::<f64>() * std::f64::consts::TAU;
                    HyperplaneQuery::new(vec![a.cos(), a.sin()], rng.random_range(-1.5..1.5))
                } else {
                    HyperplaneQuery::new(vec![rng.random_range(0.0..3.0)], rng.random_range(-1.0..2.0))
                };
                if a.query(&q)?.to_bits() != back.query(&q)?.to_bits() {
                    return fail(format!("{backend} p{}: reloaded answer differs at {q:?}", p.as_u8()));
                }
                checked += 1;
            }
        }
    }
    pass(format!("{checked} queries bit-identical after reload; replays byte-identical"))
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Result<Outcome>, Duration);
    let criteria: [Criterion; 8] = [
        ("offline multiplicative bracket", c1_offline_bracket, Duration::from_secs(10)),
        ("streaming multiplicative sketch", c2_mult_stream, Duration::from_secs(120)),
        ("dynamic interval sketch", c3_dyn_intervals, Duration::from_secs(180)),
        ("additive one-dimensional sketch", c4_add1d, Duration::from_secs(30)),
        ("additive planar sketch", c5_add2d, Duration::from_secs(120)),
        ("optimization reduction", c6_optimize, Duration::from_secs(300)),
        ("lower-bound decoders", c7_decoders, Duration::from_secs(60)),
        ("determinism and serialization", c8_determinism, Duration::from_secs(600)),
    ];
    let mut failures = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run().unwrap_or_else(|e| Outcome {
            passed: false,
            detail: format!("error: {e}"),
        });
        let took = start.elapsed();
        let in_time = took <= *limit;
        let ok = outcome.passed && in_time;
        failures += (!ok) as usize;
        println!(
            "criterion {} [{name}]: {}: {} ({:.1}s{})",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            outcome.detail,
            took.as_secs_f64(),
            if in_time { String::new() } else { format!(", over the {}s limit", limit.as_secs()) }
        );
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
