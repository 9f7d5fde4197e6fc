//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Pass criterion numbers as arguments to
//! run a subset, e.g. `cargo test -p kerneldist-cli --test acceptance -- 4 7`.

use std::process::ExitCode;
use std::time::Instant;

use kerneldist::align::{best_rigid_motion, best_translation, RigidMotion, Rotation};
use kerneldist::coreset::{
    ball_discrepancy, certificate_dimension, coreset_feature_bound, coreset_random,
    coreset_size_feature, coreset_size_random, default_queries, kernel_discrepancy, Coreset,
};
use kerneldist::features::{
    draw_frequencies, ifgt_choose_tau, ifgt_embed, ifgt_error_bound, kernel_distance_rff,
    rff_dimension, TaylorBasis,
};
use kerneldist::rng::{stream, Stream};
use kerneldist::wspd::kernel_distance_wspd;
use kerneldist::{
    kernel_distance_exact, kernel_distance_sq_exact, GaussianKernel, TrivialKernel,
    WeightedPointSet,
};
use kerneldist_cli::args::{DistMethod, Params};
use kerneldist_cli::bench::{run_suite, BenchConfig, BenchRow};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

type Verdict = (bool, String);

/// Brute-force reference implementations, written independently of the
/// library.
mod oracle {
    use kerneldist::WeightedPointSet;

    pub fn kappa(p: &WeightedPointSet, q: &WeightedPointSet, sigma: f64) -> f64 {
        let mut total = 0.0;
        let mut comp = 0.0;
        for (x, m) in p.iter() {
            let mut row = 0.0;
            for (y, n) in q.iter() {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                row += n * (-d2 / (sigma * sigma)).exp();
            }
            // Neumaier summation over rows.
            let v = m * row;
            let t = total + v;
            comp += if f64::abs(total) >= v.abs() {
                (total - t) + v
            } else {
                (v - t) + total
            };
            total = t;
        }
        total + comp
    }

    pub fn d2(p: &WeightedPointSet, q: &WeightedPointSet, sigma: f64) -> f64 {
        kappa(p, p, sigma) + kappa(q, q, sigma) - 2.0 * kappa(p, q, sigma)
    }

    /// `max |f_P(x) - f_S(x)|` over `queries`, with `f` the mass-normalized
    /// kernel density.
    pub fn kernel_discrepancy(
        p: &WeightedPointSet,
        s: &WeightedPointSet,
        queries: &[f64],
        sigma: f64,
    ) -> f64 {
        let d = p.dim();
        let density = |set: &WeightedPointSet, x: &[f64]| {
            let mut v = 0.0;
            for (y, m) in set.iter() {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                v += m * (-d2 / (sigma * sigma)).exp();
            }
            v / set.total_mass()
        };
        queries
            .chunks(d)
            .map(|x| (density(p, x) - density(s, x)).abs())
            .fold(0.0, f64::max)
    }

    fn signed(p: &WeightedPointSet, s: &WeightedPointSet) -> Vec<(Vec<f64>, f64)> {
        let mut out: Vec<(Vec<f64>, f64)> = Vec::new();
        let parts = p
            .iter()
            .map(|(x, m)| (x, -m / p.total_mass()))
            .chain(s.iter().map(|(x, m)| (x, m / s.total_mass())));
        for (x, v) in parts {
            match out.iter_mut().find(|(y, _)| y.as_slice() == x) {
                Some(e) => e.1 += v,
                None => out.push((x.to_vec(), v)),
            }
        }
        out
    }

    /// Interval discrepancy on the line by enumerating all endpoint pairs.
    pub fn ball_discrepancy_1d(p: &WeightedPointSet, s: &WeightedPointSet) -> f64 {
        let mut pts = signed(p, s);
        pts.sort_by(|a, b| a.0[0].partial_cmp(&b.0[0]).unwrap());
        let mut best = 0.0f64;
        for i in 0..pts.len() {
            let mut acc = 0.0;
            for pt in &pts[i..] {
                acc += pt.1;
                best = best.max(acc.abs());
            }
        }
        best
    }

    /// Disc discrepancy in the plane from singletons, diametral discs of
    /// pairs and circumdiscs of triples with every subset of their boundary
    /// points.
    pub fn ball_discrepancy_2d(p: &WeightedPointSet, s: &WeightedPointSet) -> f64 {
        let pts = signed(p, s);
        let n = pts.len();
        let mut best = pts.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max);
        let mut consider = |c: [f64; 2], r2: f64, boundary: &[usize]| {
            let mut inside = 0.0;
            for (k, (x, v)) in pts.iter().enumerate() {
                if boundary.contains(&k) {
                    continue;
                }
                let d2 = (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2);
                if d2 < r2 * (1.0 - 1e-12) {
                    inside += v;
                }
            }
            for mask in 0..(1usize << boundary.len()) {
                let extra: f64 = boundary
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| mask >> b & 1 == 1)
                    .map(|(_, &k)| pts[k].1)
                    .sum();
                best = best.max((inside + extra).abs());
            }
        };
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (&pts[i].0, &pts[j].0);
                let c = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
                let r2 = (a[0] - c[0]).powi(2) + (a[1] - c[1]).powi(2);
                consider(c, r2, &[i, j]);
                for k in j + 1..n {
                    let cpt = &pts[k].0;
                    let (ax, ay, bx, by, cx, cy) = (a[0], a[1], b[0], b[1], cpt[0], cpt[1]);
                    let d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
                    if d.abs() < 1e-12 {
                        continue;
                    }
                    let (a2, b2, c2) = (ax * ax + ay * ay, bx * bx + by * by, cx * cx + cy * cy);
                    let ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d;
                    let uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d;
                    let r2 = (ax - ux).powi(2) + (ay - uy).powi(2);
                    consider([ux, uy], r2, &[i, j, k]);
                }
            }
        }
        best
    }

    /// Apply `x -> R (x - anchor) + anchor + t`, with `R` row-major.
    pub fn apply(set: &WeightedPointSet, r: &[f64], anchor: &[f64], t: &[f64]) -> WeightedPointSet {
        let d = set.dim();
        let mut coords = Vec::with_capacity(set.len() * d);
        for (x, _) in set.iter() {
            for i in 0..d {
                let mut v = anchor[i] + t[i];
                for j in 0..d {
                    v += r[i * d + j] * (x[j] - anchor[j]);
                }
                coords.push(v);
            }
        }
        WeightedPointSet::new(d, coords, set.masses().to_vec()).unwrap()
    }

    /// Upper tail `P[X >= k]` of Binomial(n, p).
    pub fn binomial_upper_tail(n: u64, p: f64, k: u64) -> f64 {
        let mut pmf = (1.0 - p).powi(n as i32);
        let mut tail = if k == 0 { pmf } else { 0.0 };
        for i in 1..=n {
            pmf *= (n - i + 1) as f64 / i as f64 * p / (1.0 - p);
            if i >= k {
                tail += pmf;
            }
        }
        tail.min(1.0)
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    stream(seed, Stream::Verification)
}

fn uniform_set(
    rng: &mut ChaCha8Rng,
    n: usize,
    d: usize,
    side: f64,
    weighted: bool,
) -> WeightedPointSet {
    let coords = (0..n * d).map(|_| rng.random::<f64>() * side).collect();
    let masses = (0..n)
        .map(|_| {
            if weighted {
                rng.random_range(0.5..2.0)
            } else {
                1.0
            }
        })
        .collect();
    WeightedPointSet::new(d, coords, masses).unwrap()
}

fn w2(p: &WeightedPointSet, q: &WeightedPointSet) -> f64 {
    let w = p.total_mass().max(q.total_mass());
    w * w
}

fn c1_wspd() -> Verdict {
    let sigma = 1.0;
    let k = GaussianKernel::new(sigma).unwrap();
    let mut r = rng(1);
    let (mut worst, mut violations) = (0.0f64, 0);
    for i in 0..100 {
        let n = [100, 500, 2000][i % 3];
        let eps = [0.05, 0.1, 0.2][(i / 3) % 3];
        let side = [1.0, 5.0, 20.0][(i / 9) % 3];
        let p = uniform_set(&mut r, n, 2, side, true);
        let q = uniform_set(&mut r, n, 2, side, true);
        let u = kernel_distance_wspd(&k, &p, &q, eps).unwrap();
        let exact = oracle::d2(&p, &q, sigma);
        let ratio = (u - exact).abs() / (eps * w2(&p, &q));
        worst = worst.max(ratio);
        if ratio > 1.0 {
            violations += 1;
        }
    }
    (
        violations == 0,
        format!("100 instances, {violations} violations, max |U - D^2| / (eps W^2) = {worst:.2e}"),
    )
}

fn c2_rff() -> Verdict {
    let (eps, delta, n) = (0.25, 0.1, 50);
    let sigma = 1.0;
    let k = GaussianKernel::new(sigma).unwrap();
    let rho = rff_dimension(eps, delta, n).unwrap();
    let mut r = rng(2);
    let trials = 200u64;
    let (mut pair_failures, mut dist_failures) = (0u64, 0u64);
    let mut worst = 0.0f64;
    for t in 0..trials {
        let p = uniform_set(&mut r, n, 2, 3.0, false);
        let basis = draw_frequencies(sigma, 2, rho, 1000 + t).unwrap();
        let feats: Vec<Vec<f64>> = p
            .iter()
            .map(|(x, _)| basis.point_features(x, 1.0))
            .collect();
        let mut err = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let approx: f64 = feats[i].iter().zip(&feats[j]).map(|(a, b)| a * b).sum();
                let d2: f64 = p
                    .point(i)
                    .iter()
                    .zip(p.point(j))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                err = err.max((approx - (-d2 / (sigma * sigma)).exp()).abs());
            }
        }
        worst = worst.max(err);
        if err > eps {
            pair_failures += 1;
        }
        let (a, b) = (
            WeightedPointSet::uniform(2, p.coords()[..n].to_vec()).unwrap(),
            WeightedPointSet::uniform(2, p.coords()[n..].to_vec()).unwrap(),
        );
        let (u, _) = kernel_distance_rff(&k, &a, &b, eps, delta, 5000 + t).unwrap();
        if (u - oracle::d2(&a, &b, sigma)).abs() > eps * w2(&a, &b) {
            dist_failures += 1;
        }
    }
    let p_pair = oracle::binomial_upper_tail(trials, delta, pair_failures);
    let p_dist = oracle::binomial_upper_tail(trials, delta, dist_failures);
    (
        p_pair > 0.01 && p_dist > 0.01,
        format!(
            "rho = {rho}; kernel-pair failures {pair_failures}/{trials} (max error {worst:.3}), \
             D^2 failures {dist_failures}/{trials}; P[X >= failures | delta] = {p_pair:.3}, {p_dist:.3}"
        ),
    )
}

fn c3_ifgt() -> Verdict {
    let eps = 1e-3;
    let mut r = rng(3);
    let (mut bound_violations, mut eps_violations) = (0, 0);
    let mut max_tau = 0;
    let mut checks = 0;
    for _ in 0..100 {
        let sigma = r.random_range(0.5..2.0);
        let d = r.random_range(1..=3usize);
        let n = r.random_range(5..120usize);
        let radius = r.random_range(0.05..1.0) * sigma;
        let center: Vec<f64> = (0..d).map(|_| r.random_range(-3.0..3.0)).collect();
        let ball = |r: &mut ChaCha8Rng| {
            let mut coords = Vec::new();
            while coords.len() < n * d {
                let v: Vec<f64> = (0..d).map(|_| r.random_range(-1.0..1.0)).collect();
                if v.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
                    coords.extend(v.iter().zip(&center).map(|(x, c)| c + radius * x));
                }
            }
            let masses = (0..n).map(|_| r.random_range(0.1..1.0)).collect();
            WeightedPointSet::new(d, coords, masses).unwrap()
        };
        let p = ball(&mut r);
        let q = ball(&mut r);
        let big_delta = TaylorBasis::normalized_radius(sigma, &center, [&p, &q]);
        assert!(big_delta <= 2.0);
        let exact = oracle::kappa(&p, &q, sigma);
        let wpq = p.total_mass() * q.total_mass();
        let chosen = ifgt_choose_tau(eps, big_delta).unwrap();
        max_tau = max_tau.max(chosen);
        for tau in 1..=chosen {
            let basis = TaylorBasis::new(sigma, center.clone(), tau).unwrap();
            let approx = ifgt_embed(&basis, &p)
                .unwrap()
                .dot(&ifgt_embed(&basis, &q).unwrap())
                .unwrap();
            let err = (approx - exact).abs();
            checks += 1;
            if err > wpq * ifgt_error_bound(tau, big_delta) + 1e-12 * wpq {
                bound_violations += 1;
            }
            if tau == chosen && err > eps * w2(&p, &q) {
                eps_violations += 1;
            }
        }
    }
    (
        bound_violations == 0 && eps_violations == 0,
        format!(
            "100 instances, {checks} (instance, tau) checks, {bound_violations} bound violations, \
             {eps_violations} eps violations at the chosen tau (max tau {max_tau})"
        ),
    )
}

fn c4_metric() -> Verdict {
    let k = GaussianKernel::new(1.0).unwrap();
    let mut r = rng(4);
    let mut failures = Vec::new();
    let mut triangle_worst = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let n = r.random_range(1..20);
        let d = r.random_range(1..=3);
        let side = r.random_range(0.5..4.0);
        let sets: Vec<WeightedPointSet> = (0..3)
            .map(|_| uniform_set(&mut r, n, d, side, true))
            .collect();
        let dist = |a: usize, b: usize| kernel_distance_exact(&k, &sets[a], &sets[b]).unwrap();
        let w = sets.iter().map(|s| s.total_mass()).fold(0.0, f64::max);
        let gap = dist(0, 2) - dist(0, 1) - dist(1, 2);
        triangle_worst = triangle_worst.max(gap / (w * w));
        if gap > 1e-9 * w * w {
            failures.push("triangle");
        }
        if dist(0, 0) != 0.0 {
            failures.push("identity");
        }
        if dist(0, 1).to_bits() != dist(1, 0).to_bits() {
            failures.push("symmetry");
        }
    }
    for _ in 0..100 {
        let universe: Vec<[f64; 2]> = (0..30).map(|i| [(i % 6) as f64, (i / 6) as f64]).collect();
        let pick = |r: &mut ChaCha8Rng| {
            let m = r.random_range(0..=15);
            let mut idx: Vec<usize> = (0..universe.len()).collect();
            idx.shuffle(r);
            idx.truncate(m);
            idx
        };
        let (a, b) = (pick(&mut r), pick(&mut r));
        let set = |idx: &[usize]| {
            WeightedPointSet::uniform(2, idx.iter().flat_map(|&i| universe[i]).collect()).unwrap()
        };
        let sym_diff = a.iter().filter(|i| !b.contains(i)).count()
            + b.iter().filter(|i| !a.contains(i)).count();
        if kernel_distance_sq_exact(&TrivialKernel, &set(&a), &set(&b)).unwrap() != sym_diff as f64
        {
            failures.push("trivial kernel");
        }
    }
    (
        failures.is_empty(),
        format!(
            "1000 triples, 100 trivial-kernel pairs, failures {failures:?}; \
             max (D(P,R) - D(P,Q) - D(Q,R)) / W^2 = {triangle_worst:.2e}"
        ),
    )
}

fn c5_balls() -> Verdict {
    let sigma = 1.0;
    let k = GaussianKernel::new(sigma).unwrap();
    let mut r = rng(5);
    let mut failures = Vec::new();
    let (mut max_ratio, mut max_kd) = (0.0f64, 0.0f64);
    for i in 0..50 {
        let d = 1 + i % 2;
        let n = if d == 1 {
            r.random_range(20..=200)
        } else {
            r.random_range(15..=50)
        };
        let p = uniform_set(&mut r, n, d, 4.0, true);
        let kk = r.random_range(3..=25);
        let s = coreset_random(&p, kk, 100 + i as u64).unwrap();
        let grid = default_queries(&k, &p, 0.1).unwrap();
        let kd = kernel_discrepancy(&k, &p, &s, &grid.queries).unwrap();
        let kd_oracle = oracle::kernel_discrepancy(&p, &s.subset, &grid.queries, sigma);
        let bd = ball_discrepancy(&p, &s).unwrap();
        let bd_oracle = if d == 1 {
            oracle::ball_discrepancy_1d(&p, &s.subset)
        } else {
            oracle::ball_discrepancy_2d(&p, &s.subset)
        };
        if (kd - kd_oracle).abs() > 1e-12 {
            failures.push(format!(
                "instance {i}: kernel discrepancy {kd} vs oracle {kd_oracle}"
            ));
        }
        if (bd - bd_oracle).abs() > 1e-9 {
            failures.push(format!(
                "instance {i}: ball discrepancy {bd} vs oracle {bd_oracle}"
            ));
        }
        if kd > bd + grid.slack {
            failures.push(format!("instance {i}: {kd} > {bd} + {}", grid.slack));
        }
        max_ratio = max_ratio.max(kd / bd);
        max_kd = max_kd.max(kd);
    }
    (
        failures.is_empty(),
        format!(
            "50 instances (d = 1, 2), max kernel/ball discrepancy ratio {max_ratio:.3}, \
             max kernel discrepancy {max_kd:.3}; {failures:?}"
        ),
    )
}

fn c6_coreset() -> Verdict {
    let (eps, delta, n) = (0.2, 0.1, 1000);
    let k = GaussianKernel::new(1.0).unwrap();
    let size = coreset_size_random(eps, delta, 2).unwrap();
    let mut r = rng(6);
    let mut good = 0;
    let mut worst = 0.0f64;
    for t in 0..100 {
        let p = uniform_set(&mut r, n, 2, 3.0, true);
        let s = coreset_random(&p, size, 200 + t).unwrap();
        let grid = default_queries(&k, &p, eps).unwrap();
        let kd = kernel_discrepancy(&k, &p, &s, &grid.queries).unwrap();
        worst = worst.max(kd);
        if kd <= eps {
            good += 1;
        }
    }
    (
        good >= 90,
        format!("k = {size}; kernel discrepancy <= {eps} in {good}/100 trials (max {worst:.4})"),
    )
}

/// Best `D^2(P, Q + T)` over a coarse grid of translations followed by fine
/// local grids around the ten best coarse cells.
fn translation_oracle(p: &WeightedPointSet, q: &WeightedPointSet, sigma: f64) -> f64 {
    let eval = |t: [f64; 2]| {
        oracle::d2(
            p,
            &oracle::apply(q, &[1.0, 0.0, 0.0, 1.0], &[0.0, 0.0], &t),
            sigma,
        )
    };
    let (plo, phi) = p.bounding_box();
    let (qlo, qhi) = q.bounding_box();
    let coarse = sigma / 8.0;
    let reach = 2.0 * sigma;
    let range = |k: usize| (plo[k] - qhi[k] - reach, phi[k] - qlo[k] + reach);
    let (x0, x1) = range(0);
    let (y0, y1) = range(1);
    let mut cells = Vec::new();
    let mut x = x0;
    while x <= x1 {
        let mut y = y0;
        while y <= y1 {
            cells.push((eval([x, y]), [x, y]));
            y += coarse;
        }
        x += coarse;
    }
    cells.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let fine = coarse / 25.0;
    let mut best = cells[0].0;
    for &(_, c) in cells.iter().take(10) {
        for i in -25..=25 {
            for j in -25..=25 {
                best = best.min(eval([c[0] + i as f64 * fine, c[1] + j as f64 * fine]));
            }
        }
    }
    best
}

fn c7_translation() -> Verdict {
    let sigma = 1.0;
    let k = GaussianKernel::new(sigma).unwrap();
    let mut r = rng(7);
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for i in 0..6 {
        let eps = [0.1, 0.2][i % 2];
        let p = uniform_set(&mut r, 30, 2, 3.0, false);
        let shift = [r.random_range(-2.0..2.0), r.random_range(-2.0..2.0)];
        let q = p.translated(&shift);
        let a = best_translation(&k, &p, &q, eps).unwrap();
        let t = &a.motion.translation;
        let achieved = oracle::d2(
            &p,
            &oracle::apply(&q, &[1.0, 0.0, 0.0, 1.0], &[0.0, 0.0], t),
            sigma,
        );
        let bound = eps * w2(&p, &q);
        let best = translation_oracle(&p, &q, sigma);
        worst = worst.max(achieved / bound);
        if (achieved - a.squared_distance).abs() > 1e-9 * w2(&p, &q) {
            failures.push(format!(
                "instance {i}: reported {} vs recomputed {achieved}",
                a.squared_distance
            ));
        }
        if achieved > bound || achieved > best + bound {
            failures.push(format!(
                "instance {i}: achieved {achieved}, oracle {best}, bound {bound}"
            ));
        }
    }
    (
        failures.is_empty(),
        format!("6 planted shifts (n = 30, eps = 0.1, 0.2), max achieved / (eps W^2) = {worst:.4}; {failures:?}"),
    )
}

fn motion_matrix(m: &RigidMotion) -> Vec<f64> {
    match &m.rotation {
        Rotation::Angle(a) => vec![a.cos(), -a.sin(), a.sin(), a.cos()],
        Rotation::Matrix(r) => r.clone(),
    }
}

fn random_rotation_3d(r: &mut ChaCha8Rng) -> Vec<f64> {
    // Any unit quaternion serves as a planted motion.
    let q: Vec<f64> = (0..4).map(|_| r.random_range(-1.0..1.0)).collect();
    let norm = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let (w, x, y, z) = (q[0] / norm, q[1] / norm, q[2] / norm, q[3] / norm);
    vec![
        1.0 - 2.0 * (y * y + z * z),
        2.0 * (x * y - z * w),
        2.0 * (x * z + y * w),
        2.0 * (x * y + z * w),
        1.0 - 2.0 * (x * x + z * z),
        2.0 * (y * z - x * w),
        2.0 * (x * z - y * w),
        2.0 * (y * z + x * w),
        1.0 - 2.0 * (x * x + y * y),
    ]
}

fn c8_rigid() -> Verdict {
    let sigma = 1.0;
    let k = GaussianKernel::new(sigma).unwrap();
    let mut r = rng(8);
    let mut failures = Vec::new();
    let mut lines = Vec::new();
    for (d, n, eps, side, count) in [(2usize, 15usize, 0.25, 3.0, 5usize), (3, 8, 0.4, 6.0, 2)] {
        let mut worst = 0.0f64;
        for i in 0..count {
            let p = uniform_set(&mut r, n, d, side, false);
            let rot = if d == 2 {
                let a: f64 = r.random_range(-std::f64::consts::PI..std::f64::consts::PI);
                vec![a.cos(), -a.sin(), a.sin(), a.cos()]
            } else {
                random_rotation_3d(&mut r)
            };
            let t: Vec<f64> = (0..d).map(|_| r.random_range(-1.5..1.5)).collect();
            let q = oracle::apply(&p, &rot, &vec![0.0; d], &t);
            let a = best_rigid_motion(&k, &p, &q, eps).unwrap();
            let m = &a.motion;
            let achieved = oracle::d2(
                &p,
                &oracle::apply(&q, &motion_matrix(m), &m.anchor, &m.translation),
                sigma,
            );
            let bound = eps * w2(&p, &q);
            worst = worst.max(achieved / bound);
            if (achieved - a.squared_distance).abs() > 1e-9 * w2(&p, &q) {
                failures.push(format!(
                    "d = {d} instance {i}: reported {} vs recomputed {achieved}",
                    a.squared_distance
                ));
            }
            if achieved > bound {
                failures.push(format!(
                    "d = {d} instance {i}: achieved {achieved} > {bound}"
                ));
            }
        }
        lines.push(format!("d = {d}: {count} instances, n = {n}, eps = {eps}, max achieved / (eps W^2) = {worst:.4}"));
    }
    (
        failures.is_empty(),
        format!("{}; {failures:?}", lines.join("; ")),
    )
}

fn c9_certificate() -> Verdict {
    let (eps, delta, n, sigma) = (0.5, 0.1, 100, 1.0);
    let k = GaussianKernel::new(sigma).unwrap();
    let size = coreset_size_feature(eps, delta, n).unwrap();
    let rho = certificate_dimension(eps, delta, n).unwrap();
    let mut r = rng(9);
    let (mut within, mut agree) = (0, 0);
    let mut worst_gap = 0.0f64;
    for t in 0..100u64 {
        let p = uniform_set(&mut r, n, 2, 3.0, true);
        let s: Coreset = coreset_random(&p, size, 300 + t).unwrap();
        let basis = draw_frequencies(sigma, 2, rho, 400 + t).unwrap();
        let cert = coreset_feature_bound(&p, &s, &basis).unwrap();
        let exact = oracle::d2(&p, &s.merged(), sigma);
        let w = p.total_mass() * p.total_mass();
        assert!((exact - kernel_distance_sq_exact(&k, &p, &s.merged()).unwrap()).abs() < 1e-9 * w);
        if cert <= eps * w {
            within += 1;
        }
        let gap = (cert - exact).abs() / w;
        worst_gap = worst_gap.max(gap);
        if gap <= eps / 2.0 {
            agree += 1;
        }
    }
    let need = (100.0 * (1.0 - delta)).ceil() as i32;
    (
        within >= need && agree >= need,
        format!(
            "k = {size}, rho = {rho}; certificate <= eps W^2 in {within}/100, \
             |certificate - D^2| <= eps W^2 / 2 in {agree}/100 (max gap {worst_gap:.2e} W^2)"
        ),
    )
}

fn c10_scaling() -> Verdict {
    let cfg = BenchConfig {
        suite: "dist".into(),
        sizes: vec![2000, 20000],
        dim: 2,
        extents: vec![1.0, 32.0],
        methods: vec![DistMethod::Wspd, DistMethod::Ifgt, DistMethod::Rff],
        params: Params {
            sigma: 1.0,
            eps: 0.1,
            delta: 0.1,
            seed: 10,
        },
    };
    let rows = run_suite(&cfg).unwrap();
    let best = |method: &str| {
        rows.iter()
            .filter(|r: &&BenchRow| r.n == 20000 && r.method == method)
            .filter_map(|r| r.speedup.map(|s| (s, r.extent)))
            .fold((0.0f64, 0.0), |a, b| if b.0 > a.0 { b } else { a })
    };
    let within = rows
        .iter()
        .filter(|r| r.status == "ok" && r.method != "exact")
        .all(|r| r.abs_error.unwrap() <= r.error_bound.unwrap());
    let (wspd, we) = best("wspd");
    let (ifgt, ie) = best("ifgt");
    let (rff, _) = best("rff");
    let rff_note = rows
        .iter()
        .find(|r| r.n == 20000 && r.method == "rff")
        .map(|r| r.status.clone())
        .unwrap_or_default();
    (
        wspd >= 5.0 && ifgt >= 5.0 && within,
        format!(
            "n = 20000, d = 2, eps = 0.1: exact/wspd = {wspd:.1} (extent {we}), \
             exact/ifgt = {ifgt:.1} (extent {ie}), rff {} ({rff_note}); errors within eps W^2: {within}",
            if rff > 0.0 { format!("{rff:.1}") } else { "n/a".into() }
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, f64, fn() -> Verdict); 10] = [
        (1, "WSPD error bound", 60.0, c1_wspd),
        (2, "RFF statistical bound", 120.0, c2_rff),
        (3, "IFGT deterministic bound", 30.0, c3_ifgt),
        (4, "metric properties", 10.0, c4_metric),
        (5, "kernel vs ball discrepancy", 300.0, c5_balls),
        (6, "random coreset quality", 120.0, c6_coreset),
        (7, "translation alignment", 120.0, c7_translation),
        (8, "rigid alignment", 600.0, c8_rigid),
        (9, "feature certificate", 120.0, c9_certificate),
        (10, "scaling against exact", 600.0, c10_scaling),
    ];
    let selected: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut all_pass = true;
    for (id, name, budget, run) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let (pass, detail) = run();
        let secs = start.elapsed().as_secs_f64();
        let in_time = secs <= budget;
        let ok = pass && in_time;
        all_pass &= ok;
        println!(
            "{} {id:>2} {name}: {detail} [{secs:.1} s of {budget:.0} s]",
            if ok { "PASS" } else { "FAIL" }
        );
    }
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
