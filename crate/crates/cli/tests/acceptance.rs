//! Acceptance run: twelve criteria at their stated sizes and tolerances.
//! Prints one PASS/FAIL line per criterion and exits nonzero if any fails.

use linfol::bowen::{
    bowen_distance, entropy_estimate, radial_targets, separated_set, verify_cell_closeness, verify_escape_speed,
    BowenParams, EpsilonRule, EscapeMode, KDescription,
};
use linfol::cells::{CellCoord, CellIndex, SigmaLattice};
use linfol::covering::{
    build_tree, gamma_circle, hyperbolic_cover_check, lengthen_edge, local_model_oracle, refine, remove_sectors,
    satellite_check, satellites, sector_midpoints, verify_discrete_leaf, CoverMode, CoverParams, Disc, TreeLabel,
};
use linfol::hyperbolic::{density_bounds, disc_radius, eta_hat, eta_reference_bounds, exact_density, CoveringMap2D};
use linfol::linear_model::{leaf_eval, AmbientPoint, LeafChart, LinearVectorField, ModelPoint};
use linfol::projections::{
    beltrami_estimate, blended_map, chain_project, leaf_criterion_residual, linear_leaf_map, log_space_residual,
    orthogonal_project, psi_disc_correspondence, BlendCutoff, ChainConfig, ProjectionConfig,
};
use linfol::Complex64;
use linfol_cli::config::ExperimentConfig;
use linfol_cli::ops::{cell_point, chain_pair, random_covering, Context};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn c(a: f64, b: f64) -> Complex64 {
    Complex64::new(a, b)
}

fn config_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/acceptance.toml")
}

fn context() -> Context {
    Context::new(ExperimentConfig::load(&config_path()).unwrap()).unwrap()
}

fn random_field(rng: &mut impl Rng, k: usize) -> LinearVectorField {
    let l = (0..k).map(|_| Complex64::from_polar(rng.gen_range(0.2..3.0), rng.gen_range(0.0..TAU))).collect();
    LinearVectorField::new(l).unwrap().normalize()
}

fn random_point(rng: &mut impl Rng, k: usize) -> ModelPoint {
    let v: Vec<_> = (0..k).map(|_| Some((rng.gen_range(-6.0..-0.01), rng.gen_range(0.0..TAU)))).collect();
    ModelPoint::from_log_polar(&v).unwrap()
}

fn radial() -> LinearVectorField {
    LinearVectorField::from_pairs(&[(1.0, 0.0), (1.0, 0.0)]).unwrap().normalize()
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut charts, mut checked, mut bad) = (0, 0, 0);
    while charts < 200 {
        let chart = LeafChart::new(&random_field(&mut rng, 2), &random_point(&mut rng, 2)).unwrap();
        if chart.shape2().is_none() {
            continue;
        }
        let map = CoveringMap2D::new(&chart).unwrap();
        charts += 1;
        for _ in 0..5 {
            let a = map.eval(Complex64::from_polar(0.95 * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..TAU)));
            if !chart.contains(a) {
                continue;
            }
            let e = exact_density(&chart, a).unwrap().lo;
            checked += 1;
            if !density_bounds(&chart, a).unwrap().contains(e, 1e-9) {
                bad += 1;
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(bad == 0 && checked > 0 && secs < 5.0, format!("{charts} charts, {checked} points, {bad} outside [1/d, 2/d], {secs:.2} s"))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut bad = 0;
    for k in [2, 3] {
        for _ in 0..200 {
            let (f, x) = (random_field(&mut rng, k), random_point(&mut rng, k));
            let (lo, hi) = eta_reference_bounds(&f, &x);
            match eta_hat(&f, &x) {
                Ok(e) if lo * (1.0 - 1e-12) <= e.lo && e.hi <= hi * (1.0 + 1e-12) => {}
                _ => bad += 1,
            }
        }
    }
    outcome(bad == 0, format!("400 fields (k = 2, 3), {bad} violations"))
}

/// Distance from 0 to the line `Re(λζ) = c` through two of its points.
fn line_distance(lambda: Complex64, c: f64) -> f64 {
    let p1 = c / lambda;
    let d = (c + Complex64::i()) / lambda - p1;
    (d.conj() * (-p1)).im.abs() / d.norm()
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let k = 2 + i % 2;
        let (f, x) = (random_field(&mut rng, k), random_point(&mut rng, k));
        let formula = f
            .lambdas()
            .iter()
            .zip(x.coords())
            .map(|(l, q)| -q.log_modulus() / l.norm())
            .fold(f64::INFINITY, f64::min);
        let generic = f
            .lambdas()
            .iter()
            .zip(x.coords())
            .map(|(l, q)| line_distance(*l, -q.log_modulus()))
            .fold(f64::INFINITY, f64::min);
        let chart = LeafChart::new(&f, &x).unwrap().boundary_distance(c(0.0, 0.0)).unwrap();
        worst = worst.max((formula - generic).abs() / (1.0 + generic)).max((chart - generic).abs() / (1.0 + generic));
    }
    outcome(worst <= 1e-12, format!("1000 instances, worst relative gap {worst:.2e}"))
}

/// Brute force over all subsets: the scan-order-first maximal separated set.
fn exhaustive(close: &[u32]) -> Vec<usize> {
    let n = close.len();
    let rev = |mask: u32| (0..n).filter(|i| mask >> i & 1 == 1).fold(0u32, |acc, i| acc | 1 << (n - 1 - i));
    let (mut best, mut key) = (0u32, 0u32);
    for mask in 0u32..1 << n {
        let independent = (0..n).all(|i| mask >> i & 1 == 0 || close[i] & mask == 0);
        let maximal = (0..n).all(|i| mask >> i & 1 == 1 || close[i] & mask != 0);
        if independent && maximal && rev(mask) > key {
            key = rev(mask);
            best = mask;
        }
    }
    (0..n).filter(|i| best >> i & 1 == 1).collect()
}

/// Greedy against exhaustive on one subsample; returns (agrees, close pairs).
fn subsample_agrees(f: &LinearVectorField, sub: &[ModelPoint], p: &BowenParams) -> (bool, usize) {
    let mut close = vec![0u32; sub.len()];
    for i in 0..sub.len() {
        for j in i + 1..sub.len() {
            let hi = bowen_distance(f, &sub[i], &sub[j], p).unwrap().bound.hi;
            if sub[i].distance(&sub[j]).max(hi) <= p.epsilon {
                close[i] |= 1 << j;
                close[j] |= 1 << i;
            }
        }
    }
    let pairs = close.iter().map(|m| m.count_ones() as usize).sum::<usize>() / 2;
    (separated_set(f, sub, p).unwrap().indices == exhaustive(&close), pairs)
}

fn criterion_4() -> Outcome {
    let t = Instant::now();
    let f = radial();
    let k = KDescription::Grid { half_width: 0.5, n: 20, k: 2 };
    let rows = entropy_estimate(&f, &k, &[1.0, 2.0, 3.0, 4.0], &EpsilonRule::ExpMinusR, &BowenParams::new(1.0, 1.0)).unwrap();
    let worst = rows.iter().map(|r| r.rate).fold(0.0, f64::max);
    let rates_ok = rows.len() == 4 && rows.iter().all(|r| r.n >= 1 && r.rate <= 140.0);
    let grid = k.points().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let (mut subs, mut agree, mut pairs) = (0, 0, 0);
    for (i, r) in [1.0f64, 2.0, 3.0, 4.0].into_iter().enumerate() {
        let p = BowenParams::new(r, (-r).exp());
        let mut picks: Vec<Vec<usize>> = (0..3)
            .map(|_| {
                let mut v = sample(&mut rng, grid.len(), 20).into_vec();
                v.sort_unstable();
                v
            })
            .collect();
        // a 4×5 block, where neighbouring grid points can be close
        let corner = [0, 105, 210, 42][i];
        picks.push((0..4).flat_map(|a| (0..5).map(move |b| corner + 20 * a + b)).collect());
        for idx in picks {
            let sub: Vec<ModelPoint> = idx.iter().map(|&j| grid[j].clone()).collect();
            let (ok, n) = subsample_agrees(&f, &sub, &p);
            subs += 1;
            agree += ok as usize;
            pairs += n;
        }
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        rates_ok && agree == subs && secs < 120.0,
        format!(
            "N = {:?}, max rate {worst:.3} ≤ 140, greedy = exhaustive on {agree}/{subs} subsamples ({pairs} close pairs), {secs:.1} s",
            rows.iter().map(|r| r.n).collect::<Vec<_>>()
        ),
    )
}

fn random_cell(rng: &mut impl Rng, l: &SigmaLattice, k: usize) -> CellIndex {
    CellIndex(
        (0..k)
            .map(|_| {
                if rng.gen_bool(0.1) {
                    CellCoord::Center
                } else {
                    CellCoord::Ring { ring: rng.gen_range(0..l.n_rings()), sector: rng.gen_range(0..l.n_rays()) }
                }
            })
            .collect(),
    )
}

fn criterion_5() -> Outcome {
    let ctx = context();
    let lat = ctx.lattice().unwrap();
    let r = ctx.constants.r();
    let params = BowenParams::new(r, 0.1);
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let (mut bad, mut worst) = (0, 0.0f64);
    for _ in 0..1000 {
        let idx = random_cell(&mut rng, &lat, 2);
        let mut uv = || (0..2).map(|_| (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0))).collect::<Vec<_>>();
        let (a, b) = (uv(), uv());
        let (x, y) = (cell_point(&lat, &idx, &a).unwrap(), cell_point(&lat, &idx, &b).unwrap());
        if lat.cell_of(&x) != idx || lat.cell_of(&y) != idx {
            bad += 1;
            continue;
        }
        match verify_cell_closeness(&ctx.field, &x, &y, &ctx.constants, &params) {
            Ok(rep) if rep.bowen.bound.hi <= (-r).exp() => worst = worst.max(rep.bowen.bound.hi),
            _ => bad += 1,
        }
    }
    outcome(bad == 0, format!("1000 same-cell pairs at λR = {}, {bad} violations, largest hi {worst:.3e} ≤ e^-R", ctx.constants.lr()))
}

fn doubled_inside(outer: &Disc, inner: &Disc) -> bool {
    (inner.center() - outer.center()).norm() + 2.0 * inner.radius() <= 2.0 * outer.radius()
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let (mut bad, mut slowest) = (0, 0.0f64);
    for i in 0..100 {
        let k: Vec<Complex64> = (0..50).map(|_| c(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0))).collect();
        let n = 1 + i % 3;
        let m = rng.gen_range(1..=50);
        let covs: Vec<Vec<Disc>> = (0..n).map(|_| random_covering(&mut rng, &k, m)).collect();
        let t = Instant::now();
        let res = refine(&k, &covs, m).unwrap();
        slowest = slowest.max(t.elapsed().as_secs_f64());
        let count_ok = (res.discs.len() as f64) <= 200f64.powi(n as i32) * m as f64;
        let covered = k.iter().all(|p| res.discs.iter().any(|d| (p - d.center()).norm() < d.radius()));
        let witnessed = res.discs.iter().zip(&res.witnesses).all(|(d, w)| {
            w.len() == n && w.iter().enumerate().all(|(a, &j)| doubled_inside(&covs[a][j], d))
        });
        if !(count_ok && covered && witnessed && res.check(&k, &covs, m).ok()) {
            bad += 1;
        }
    }
    outcome(bad == 0 && slowest < 1.0, format!("100 instances, {bad} failing, slowest {slowest:.3} s"))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let discs = [Disc::new(c(0.0, 0.0), 1.0).unwrap(), Disc::new(c(-3.0, 2.0), 0.013).unwrap(), Disc::new(c(0.4, 0.1), 0.25).unwrap()];
    let mut bad = 0;
    for d in &discs {
        // 1.05r + 2(0.1r) = 1.25r ≤ 2r
        bad += satellites(d).iter().filter(|s| !doubled_inside(d, s)).count();
        let chk = satellite_check(d, 100_000, 7);
        bad += chk.containment_failures + chk.misses;
        let sats = satellites(d);
        let r = d.radius();
        bad += (0..100_000)
            .filter(|_| {
                let p = d.center() + Complex64::from_polar(rng.gen_range(r..1.1 * r), rng.gen_range(0.0..TAU));
                !sats.iter().any(|s| s.contains(p))
            })
            .count();
    }
    outcome(bad == 0, format!("3 discs × 100 satellites, 2 × 10^5 annulus samples each, {bad} failures"))
}

fn criterion_8() -> Outcome {
    let (m1, h) = (5, 0.01);
    let mut bad = 0;
    for m in 10..=20 {
        let mode = CoverMode::Sectors { centres: sector_midpoints(m1, h, 12) };
        bad += hyperbolic_cover_check(&mode, &CoverParams { m1, hbar: h, m }, 100_000, 8).unwrap().violations;
    }
    let gamma = gamma_circle(5.0 * h, 4000, 4, h / 100.0, 8);
    let gamma_bad = hyperbolic_cover_check(&gamma, &CoverParams { m1: 10, hbar: h, m: 21 }, 100_000, 8).unwrap().violations;

    let mut centres = sector_midpoints(m1, h, 12);
    remove_sectors(&mut centres, 6, 3);
    let removed =
        hyperbolic_cover_check(&CoverMode::Sectors { centres }, &CoverParams { m1, hbar: h, m: 10 }, 100_000, 8).unwrap().violations;

    let f = radial();
    let x = AmbientPoint::from_complex(&[c(0.3, 0.1), c(0.2, -0.1)]);
    let tree = build_tree(TreeLabel::Point(c(0.0, 0.0)), local_model_oracle(&f, &x, 0.075, 4, 0.9f64.ln()).unwrap(), 3, 4).unwrap();
    let clean = verify_discrete_leaf(&tree, 10, h, 20, 0, 8).containment_violations.len();
    let mut long = tree.clone();
    let TreeLabel::Point(kid) = long.levels[1][0].label else { unreachable!() };
    long.levels[1][0].label = TreeLabel::Point(lengthen_edge(c(0.0, 0.0), kid, 1.5 * 10.0 * h / tree.edge_lengths()[0][0]));
    let caught = verify_discrete_leaf(&long, 10, h, 20, 0, 8).containment_violations.contains(&(1, 0));

    outcome(
        bad == 0 && gamma_bad == 0 && removed > 0 && clean == 0 && caught,
        format!(
            "sectors m = 10..20: {bad} violations; Γ arcs: {gamma_bad}; removed sectors: {removed} violations; lengthened edge caught: {caught}"
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    let amb = |rng: &mut ChaCha8Rng, k: usize, lo: f64, hi: f64| {
        AmbientPoint::from_complex(&(0..k).map(|_| Complex64::from_polar(rng.gen_range(lo..hi), rng.gen_range(0.0..TAU))).collect::<Vec<_>>())
    };
    let nudge = |rng: &mut ChaCha8Rng, x: &AmbientPoint, d: f64| {
        AmbientPoint::from_complex(
            &x.to_complex().iter().map(|z| z * (1.0 + d * Complex64::from_polar(1.0, rng.gen_range(0.0..TAU)))).collect::<Vec<_>>(),
        )
    };

    let mut functor: f64 = 0.0;
    for i in 0..10_000 {
        let k = 2 + i % 3;
        let f = random_field(&mut rng, k);
        let (x, y) = (amb(&mut rng, k, 0.01, 0.9), amb(&mut rng, k, 0.01, 0.9));
        let zeta = c(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let lhs = linear_leaf_map(&x, &y, &leaf_eval(&f, &x, zeta)).unwrap();
        functor = functor.max(log_space_residual(&lhs, &leaf_eval(&f, &y, zeta)));
    }

    let mut mu: f64 = 0.0;
    let mut n = 0;
    while n < 200 {
        let f = random_field(&mut rng, 2);
        let x = amb(&mut rng, 2, 0.1, 0.6);
        let y = nudge(&mut rng, &x, 1e-3);
        let Ok(tau) = psi_disc_correspondence(&f, &x, &y) else { continue };
        let xi = Complex64::from_polar(rng.gen_range(0.0..0.7), rng.gen_range(0.0..TAU));
        mu = mu.max(beltrami_estimate(&tau, xi, 1e-3).unwrap().mu.norm());
        n += 1;
    }

    let f = LinearVectorField::from_pairs(&[(1.0, 0.0), (2.0, 0.0)]).unwrap();
    let lam = f.lambdas().to_vec();
    let cfg = ProjectionConfig::default();
    let mut gap: f64 = 0.0;
    for _ in 0..100 {
        let y = amb(&mut rng, 2, 0.1, 0.6);
        let d = LeafChart::new(&f, &y).unwrap().boundary_distance(c(0.0, 0.0)).unwrap();
        let zeta0 = Complex64::from_polar(0.3 * d * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..TAU));
        let p = leaf_eval(&f, &y, zeta0).to_complex();
        let t: Vec<Complex64> = lam.iter().zip(&p).map(|(l, q)| l * q).collect();
        let tn = (t[0].norm_sqr() + t[1].norm_sqr()).sqrt();
        let normal = [-t[1].conj() / tn, t[0].conj() / tn];
        let z: Vec<Complex64> = p.iter().zip(normal).map(|(q, n)| q + 1e-6 * n).collect();
        let proj = orthogonal_project(&f, &AmbientPoint::from_complex(&z), &y, zeta0 + c(1e-3, -1e-3), &cfg).unwrap();
        let best = brute_force(&lam, &y.to_complex(), &z, zeta0, 0.01);
        let q: Vec<Complex64> = lam.iter().zip(y.to_complex()).map(|(l, y)| y * (l * best).exp()).collect();
        let got = proj.point.to_complex();
        gap = gap.max(got.iter().zip(&q).map(|(u, v)| (u - v).norm_sqr()).sum::<f64>().sqrt());
    }

    let cutoff = BlendCutoff::quarter_half();
    let (mut residual, mut mid): (f64, usize) = (0.0, 0);
    for _ in 0..40 {
        let f = random_field(&mut rng, 2);
        let x = amb(&mut rng, 2, 0.15, 0.55);
        let y = nudge(&mut rng, &x, 1e-7);
        let d = LeafChart::new(&f, &x).unwrap().boundary_distance(c(0.0, 0.0)).unwrap();
        for _ in 0..20 {
            let zeta = Complex64::from_polar(0.5 * d * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..TAU));
            if leaf_eval(&f, &x, zeta).norm1_log() > 0.75f64.ln() {
                continue;
            }
            let b = blended_map(&f, &x, &y, &cutoff, zeta, &cfg).unwrap();
            if b.chi > 0.0 && b.chi < 1.0 {
                mid += 1;
                residual = residual.max(leaf_criterion_residual(&f, &b.linear, &b.point));
            }
        }
    }
    outcome(
        functor <= 1e-12 && mu <= 1e-6 && gap <= 1e-8 && residual <= 1e-8 && mid > 0,
        format!("Ψ residual {functor:.1e}, |μ| {mu:.1e}, projection gap {gap:.1e}, blend residual {residual:.1e} ({mid} mid-zone points)"),
    )
}

/// Zooming grid search of `‖φ_y(ζ) − z‖²` in plain complex arithmetic.
fn brute_force(lambdas: &[Complex64], y: &[Complex64], z: &[Complex64], centre: Complex64, width: f64) -> Complex64 {
    let f = |s: Complex64| lambdas.iter().zip(y).zip(z).map(|((l, y), z)| (y * (l * s).exp() - z).norm_sqr()).sum::<f64>();
    let n = 316;
    let (mut best, mut w) = (centre, width);
    while w > 1e-13 {
        let c0 = best;
        let mut fb = f(c0);
        for a in 0..=n {
            for b in 0..=n {
                let s = c0 + c(-w + 2.0 * w * a as f64 / n as f64, -w + 2.0 * w * b as f64 / n as f64);
                let v = f(s);
                if v < fb {
                    fb = v;
                    best = s;
                }
            }
        }
        w *= 8.0 / n as f64;
    }
    best
}

fn criterion_10() -> Outcome {
    let ctx = context();
    let cfg = ChainConfig { eps1: ctx.constants.eps1(), eps0: ctx.constants.eps0(), ..ChainConfig::default() };
    let mut fits = Vec::new();
    let mut bad = 0;
    for seed in [1u64, 2] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut kappa: f64 = 0.0;
        for _ in 0..20 {
            let (x, y, target) = chain_pair(&mut rng, &ctx.x, 1e-9, 1.0);
            if (x.distance(&y) - 1e-9).abs() > 1e-15 {
                bad += 1;
            }
            match chain_project(&ctx.field, &x, &y, target, &cfg) {
                Ok(rep) if rep.steps.last().map(|s| s.xi) == Some(target) => {
                    let controlled = rep.steps.windows(2).all(|w| w[1].ratio <= rep.kappa_hat * w[0].ratio * (1.0 + 1e-12));
                    bad += usize::from(!controlled);
                    kappa = kappa.max(rep.kappa_hat);
                }
                _ => bad += 1,
            }
        }
        fits.push(kappa);
    }
    let spread = (fits[0] - fits[1]).abs() / fits[0].max(fits[1]);
    outcome(
        bad == 0 && spread <= 0.1,
        format!("2 × 20 chains, {bad} incomplete or uncontrolled, κ̂ = {:.4} / {:.4} (spread {:.1}%)", fits[0], fits[1], 100.0 * spread),
    )
}

fn criterion_11() -> Outcome {
    let x0 = ModelPoint::from_complex(&[c(0.05, 0.0), c(0.05, 0.0)]).unwrap();
    let axis = [c(disc_radius(1.0), 0.0), c(-disc_radius(1.0), 0.0)];
    let closed = verify_escape_speed(&radial(), &x0, &axis, 20, EscapeMode::Speed).unwrap().exponent;

    let mut rng = ChaCha8Rng::seed_from_u64(111);
    let fit = |f: &LinearVectorField, seed: u64| -> Option<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c2: f64 = 0.0;
        for _ in 0..8 {
            let v: Vec<_> = (0..2).map(|_| Some((rng.gen_range(-4.0..-3.0), rng.gen_range(0.0..TAU)))).collect();
            let x = ModelPoint::from_log_polar(&v).unwrap();
            c2 = c2.max(verify_escape_speed(f, &x, &radial_targets(1.0, 32, rng.gen()), 10, EscapeMode::Speed).ok()?.exponent);
        }
        Some(c2)
    };
    let (mut unstable, mut worst) = (0, 0.0f64);
    for _ in 0..5 {
        let f = random_field(&mut rng, 2);
        match (fit(&f, rng.gen()), fit(&f, rng.gen())) {
            (Some(a), Some(b)) if a.is_finite() && b.is_finite() && a > 0.0 => {
                let s = (a - b).abs() / a.max(b);
                worst = worst.max(s);
                unstable += usize::from(s > 0.1);
            }
            _ => unstable += 1,
        }
    }
    outcome(
        (closed - 1.0).abs() <= 1e-6 && unstable == 0,
        format!("half-plane ĉ₂ − 1 = {:.1e}; 5 random fields, worst seed spread {:.1}%", closed - 1.0, 100.0 * worst),
    )
}

fn criterion_12() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        let status = Command::new(env!("CARGO_BIN_EXE_linfol"))
            .arg("--config")
            .arg(config_path())
            .arg("--out")
            .arg(&out)
            .arg("run")
            .output()
            .unwrap()
            .status;
        (status.code(), std::fs::read(out.join("run.jsonl")).unwrap_or_default())
    };
    let (a, b) = (run("a"), run("b"));
    outcome(
        a.0 == Some(0) && a == b && !a.1.is_empty(),
        format!("exit codes {:?} / {:?}, {} bytes, identical: {}", a.0, b.0, a.1.len(), a.1 == b.1),
    )
}

fn main() {
    let criteria: [fn() -> Outcome; 12] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
        criterion_11,
        criterion_12,
    ];
    let mut failed = Vec::new();
    for (i, run) in criteria.iter().enumerate() {
        let o = run();
        println!("criterion {:>2}: {}  {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed.push(i + 1);
        }
    }
    if !failed.is_empty() {
        eprintln!("failing criteria: {failed:?}");
        std::process::exit(1);
    }
}
