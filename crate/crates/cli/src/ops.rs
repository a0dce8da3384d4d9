//! The verification ops. Each returns assertion records; an op that cannot
//! run yields a single failing record carrying the error.

use crate::config::ExperimentConfig;
use crate::report::{Meta, Record, Report};
use crate::CliError;
use linfol::bowen::{
    entropy_estimate, eta_holder_probe, holder_exponent, radial_targets, verify_cell_closeness, verify_escape_speed,
    verify_flattening, verify_lemma_3r, verify_near_zero, BowenParams, EpsilonRule, EscapeMode, KDescription,
};
use linfol::cells::{j_map, plaque_intersect, refinement_study, CellCoord, CellIndex, Displacement, SigmaLattice};
use linfol::covering::{
    build_tree, gamma_circle, hyperbolic_cover_check, lengthen_edge, local_model_oracle, refine, remove_sectors,
    satellite_check, sector_midpoints, verify_discrete_leaf, verify_gamma, CoverMode, CoverParams, Disc, GammaParams,
    TreeLabel,
};
use linfol::hyperbolic::{density_bounds, disc_radius, eta_hat, eta_reference_bounds, exact_density, CoveringMap2D};
use linfol::linear_model::{base_distance_bounds, leaf_eval, AmbientPoint, Coord, LeafChart, LinearVectorField, ModelPoint, PaperConstants};
use linfol::projections::{
    beltrami_estimate, blended_map, chain_project, geodesic_target, global_projection, leaf_criterion_residual,
    psi_disc_correspondence, BlendCutoff, ChainConfig, ProjectionConfig,
};
use linfol::cmath::clog1p;
use linfol::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

pub const OPS: [&str; 18] = [
    "model", "metric", "entropy", "3R", "flatten", "near0", "cellclose", "escape", "holder", "jl", "plaque", "projE",
    "projHol", "chain", "disccount", "coverD", "gamma", "tree",
];

/// Resolved inputs shared by all ops.
#[derive(Debug, Clone)]
pub struct Context {
    pub config: ExperimentConfig,
    pub field: LinearVectorField,
    pub constants: PaperConstants,
    pub x: ModelPoint,
}

type OpResult = Result<Vec<Record>, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn c(a: f64, b: f64) -> Complex64 {
    Complex64::new(a, b)
}

impl Context {
    pub fn new(config: ExperimentConfig) -> Result<Self, CliError> {
        let field = config.field()?;
        let x = config.point(field.k())?;
        let constants = config.constants(&field)?;
        if let Some(op) = config.run.ops.iter().find(|o| !OPS.contains(&o.as_str())) {
            return Err(CliError::UnknownOp(op.clone()));
        }
        Ok(Self { config, field, constants, x })
    }

    pub fn seed(&self) -> u64 {
        self.config.run.seed
    }

    pub fn samples(&self) -> usize {
        self.config.run.samples
    }

    /// Independent stream per op, so results do not depend on op order.
    fn rng(&self, op: &str) -> ChaCha8Rng {
        let i = OPS.iter().position(|o| *o == op).unwrap_or(OPS.len()) as u64;
        ChaCha8Rng::seed_from_u64(self.seed().wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i))
    }

    fn bowen(&self, r: f64, eps: f64) -> BowenParams {
        BowenParams { seed: self.seed(), ..BowenParams::new(r, eps) }
    }

    pub fn lattice(&self) -> Result<SigmaLattice, String> {
        match &self.config.lattice {
            Some(l) => SigmaLattice::filling(l.r_min_log, l.growth_log, l.n_rays).map_err(err),
            None => SigmaLattice::from_constants(&self.constants).map_err(err),
        }
    }

    pub fn run_op(&self, op: &str) -> Vec<Record> {
        let out = match op {
            "model" => self.model(),
            "metric" => self.metric(),
            "entropy" => self.entropy(),
            "3R" => self.lemma_3r(),
            "flatten" => self.flatten(),
            "near0" => self.near0(),
            "cellclose" => self.cellclose(),
            "escape" => self.escape(),
            "holder" => self.holder(),
            "jl" => self.jl(),
            "plaque" => self.plaque(),
            "projE" => self.proj_e(),
            "projHol" => self.proj_hol(),
            "chain" => self.chain(),
            "disccount" => self.disccount(),
            "coverD" => self.cover_d(),
            "gamma" => self.gamma(),
            "tree" => self.tree(),
            other => Err(format!("unknown op {other:?}")),
        };
        out.unwrap_or_else(|e| vec![Record::error(op, e)])
    }

    pub fn run(&self, ops: &[String]) -> Report {
        let meta = Meta {
            config_hash: self.config.hash(),
            seed: self.seed(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            ops: ops.to_vec(),
        };
        let records = ops.iter().flat_map(|op| self.run_op(op)).collect();
        Report { meta, records }
    }

    fn model(&self) -> OpResult {
        let (f, x) = (&self.field, &self.x);
        let chart = LeafChart::new(f, x).map_err(err)?;
        let d = chart.boundary_distance(c(0.0, 0.0)).map_err(err)?;
        let (lo, hi) = base_distance_bounds(f, x);
        let shape = chart.shape2().map(|s| format!("{s:?}")).unwrap_or_else(|| "polygon".into());
        let eta = eta_hat(f, x).map_err(err)?;
        let (elo, ehi) = eta_reference_bounds(f, x);
        Ok(vec![
            Record::at_least("model", "dist(0, ∂Π_x) ≥ −log‖x‖₁/λ*", d, lo)
                .with("shape", shape)
                .with("norm1_log", x.norm1_log()),
            Record::at_most("model", "dist(0, ∂Π_x) ≤ −log‖x‖₁", d, hi),
            Record::at_least("model", "η̂ lower end ≥ −‖x‖₁log‖x‖₁/(2λ*)", eta.lo, elo * (1.0 - 1e-12)),
            Record::at_most("model", "η̂ upper end ≤ −kλ*‖x‖₁log‖x‖₁", eta.hi, ehi * (1.0 + 1e-12)),
        ])
    }

    /// Exact density at random points of the leaf chart against `[1/d, 2/d]`.
    fn metric(&self) -> OpResult {
        let chart = LeafChart::new(&self.field, &self.x).map_err(err)?;
        let map = CoveringMap2D::new(&chart).map_err(err)?;
        let mut rng = self.rng("metric");
        let (mut bad, mut checked, mut slack) = (0usize, 0usize, f64::INFINITY);
        for _ in 0..self.samples() {
            let xi = Complex64::from_polar(0.95 * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..TAU));
            let a = map.eval(xi);
            if !chart.contains(a) {
                continue;
            }
            let b = density_bounds(&chart, a).map_err(err)?;
            let e = exact_density(&chart, a).map_err(err)?.lo;
            checked += 1;
            if !b.contains(e, 1e-9) {
                bad += 1;
            }
            slack = slack.min(((e - b.lo) / b.lo).min((b.hi - e) / b.hi));
        }
        let mut r = Record::at_most("metric", "exact density inside [1/d, 2/d] (tol 1e-9)", bad as f64, 0.0).with("checked", checked);
        r.margin = Some(slack);
        Ok(vec![r])
    }

    fn entropy(&self) -> OpResult {
        let s = &self.config.entropy;
        let k = KDescription::Grid { half_width: s.half_width, n: s.n, k: self.field.k() };
        let eps = if s.epsilon.is_empty() { EpsilonRule::ExpMinusR } else { EpsilonRule::Fixed(s.epsilon.clone()) };
        let rows = entropy_estimate(&self.field, &k, &s.r_list, &eps, &self.bowen(1.0, 1.0)).map_err(err)?;
        Ok(rows
            .iter()
            .map(|row| {
                Record::at_most("entropy", "(1/R) log N ≤ rate bound", row.rate, s.rate_bound)
                    .with("R", row.r)
                    .with("epsilon", row.epsilon)
                    .with("N", row.n)
                    .with("rate", row.rate)
                    .with("max_resolution", row.max_resolution)
            })
            .collect())
    }

    fn lemma_3r(&self) -> OpResult {
        let rep = verify_lemma_3r(&self.field, &self.x, &self.constants, self.samples(), self.seed()).map_err(err)?;
        let mut r = Record::at_most("3R", "leaf ball of radius 7R inside Ω", rep.violations as f64, 0.0)
            .with("samples", rep.samples)
            .with("max_log_modulus", rep.max_log_modulus);
        r.margin = Some(rep.min_margin);
        Ok(vec![r])
    }

    /// `x` with its trailing coordinate pushed far below `2α₂`.
    fn flatten(&self) -> OpResult {
        let k = &self.constants;
        let mut coords = self.x.coords().to_vec();
        let last = coords.len() - 1;
        coords[last] = Coord::polar(k.alpha2_log() - 1.0, coords[last].argument());
        let x = ModelPoint::new(coords).map_err(err)?;
        let rep = verify_flattening(&self.field, &x, last, k, &self.bowen(k.r(), 0.1)).map_err(err)?;
        Ok(vec![
            Record::at_most("flatten", "tail coordinates stay below e^{−3R} (log)", rep.tail_max_log_modulus, rep.tail_bound_log),
            Record::at_most("flatten", "Bowen distance to the flattened point ≤ e^{−2R}", rep.bowen.bound.hi, rep.bowen_bound),
        ])
    }

    /// `x` rescaled to `‖x‖₁ = α₁`, paired with a rotated copy.
    fn near0(&self) -> OpResult {
        let k = &self.constants;
        let shift = k.alpha1_log() - self.x.norm1_log();
        let moved = |rot: f64| {
            ModelPoint::new(self.x.coords().iter().enumerate().map(|(j, q)| q.mul_exp(c(shift, rot * j as f64))).collect())
        };
        let x = moved(0.0).map_err(err)?;
        let y = moved(0.5).map_err(err)?;
        let rep = verify_near_zero(&self.field, &x, &y, k, &self.bowen(k.r(), 0.1)).map_err(err)?;
        Ok(vec![
            Record::at_most("near0", "R-balls stay in e^{−2R}𝔻^k (log)", rep.max_log_modulus, rep.bound_log),
            Record::at_most("near0", "Bowen distance ≤ e^{−R}", rep.bowen.bound.hi, rep.bowen_bound),
        ])
    }

    fn cellclose(&self) -> OpResult {
        let lat = self.lattice()?;
        let mut rng = self.rng("cellclose");
        let k = self.field.k();
        let (mut bad, mut worst, mut margin) = (0usize, 0.0f64, f64::INFINITY);
        let params = self.bowen(self.constants.r(), 0.1);
        for _ in 0..self.samples() {
            let idx = random_cell(&mut rng, &lat, k);
            let mut uv = || (0..k).map(|_| (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0))).collect::<Vec<_>>();
            let (a, b) = (uv(), uv());
            let x = cell_point(&lat, &idx, &a).map_err(err)?;
            let y = cell_point(&lat, &idx, &b).map_err(err)?;
            match verify_cell_closeness(&self.field, &x, &y, &self.constants, &params) {
                Ok(rep) => {
                    worst = worst.max(rep.bowen.bound.hi / rep.bowen_bound);
                    margin = margin.min(rep.bowen_bound - rep.bowen.bound.hi);
                    if !rep.close_ok {
                        bad += 1;
                    }
                }
                Err(_) => bad += 1,
            }
        }
        let mut r = Record::at_most("cellclose", "same-cell pairs are Bowen e^{−R}-close", bad as f64, 0.0).with("worst_ratio", worst);
        r.margin = Some(margin);
        Ok(vec![r])
    }

    /// Closed-form half-plane case, then the configured field at deep random
    /// base points for two seeds. The configured `x` is not used: its radial
    /// paths need not stay in `½𝔻^k`.
    fn escape(&self) -> OpResult {
        let r = self.constants.r();
        let half = LinearVectorField::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).map_err(err)?.normalize();
        let x0 = ModelPoint::from_complex(&[c(0.05, 0.0), c(0.05, 0.0)]).map_err(err)?;
        let axis = [c(disc_radius(r), 0.0), c(-disc_radius(r), 0.0)];
        let closed = verify_escape_speed(&half, &x0, &axis, 20, EscapeMode::Speed).map_err(err)?;
        let mut out = vec![Record::at_most("escape", "half-plane c2_hat = 1", (closed.exponent - 1.0).abs(), 1e-6)];
        let fits = |seed: u64| -> Result<(f64, f64), String> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (mut c2, mut c3): (f64, f64) = (0.0, 0.0);
            for _ in 0..8 {
                let parts: Vec<_> = (0..self.field.k()).map(|_| Some((rng.gen_range(-4.0..-3.0), TAU * rng.gen::<f64>()))).collect();
                let x = ModelPoint::from_log_polar(&parts).map_err(err)?;
                let t = radial_targets(r, 32, rng.gen());
                c2 = c2.max(verify_escape_speed(&self.field, &x, &t, 10, EscapeMode::Speed).map_err(err)?.exponent);
                c3 = c3.max(verify_escape_speed(&self.field, &x, &t, 10, EscapeMode::Depth).map_err(err)?.exponent);
            }
            Ok((c2, c3))
        };
        let (a, b) = (fits(self.rng("escape").gen())?, fits(self.rng("escape").gen::<u64>() ^ 1)?);
        for (name, u, v) in [("c2_hat", a.0, b.0), ("c3_hat", a.1, b.1)] {
            out.push(Record::fit("escape", name, u));
            let spread = (u - v).abs() / u.abs().max(v.abs());
            out.push(Record::at_most("escape", format!("{name} stable across seeds"), spread, 0.1).with("other_seed", v));
        }
        Ok(out)
    }

    /// Pairs along rays through `x` at three distance decades.
    fn holder(&self) -> OpResult {
        let alpha = holder_exponent(&self.field);
        let mut rng = self.rng("holder");
        let base = self.x.to_complex();
        let mut pairs = Vec::new();
        for h in [1e-3, 1e-4, 1e-5] {
            for _ in 0..20 {
                let s = rng.gen_range(0.8..1.2);
                let p: Vec<Complex64> = base.iter().map(|z| z * s).collect();
                let q: Vec<Complex64> = p.iter().map(|z| z * (1.0 + h)).collect();
                pairs.push((ModelPoint::from_complex(&p).map_err(err)?, ModelPoint::from_complex(&q).map_err(err)?));
            }
        }
        let rep = eta_holder_probe(&self.field, &pairs, alpha, -30.0).map_err(err)?;
        Ok(vec![
            Record::new("holder", "Hölder ratio non-increasing in distance", rep.non_increasing).with("alpha", alpha),
            Record::fit("holder", "holder_ratio", rep.worst_ratio),
        ])
    }

    fn jl(&self) -> OpResult {
        let lat = self.lattice()?;
        let disp = Displacement::from(&self.constants);
        let counts = refinement_study(&self.field, &lat, &self.x, 0, 2, 2, &[1, 2, 4], &disp).map_err(err)?;
        let (lo, hi) = (*counts.iter().min().unwrap_or(&0), *counts.iter().max().unwrap_or(&0));
        let mut rng = self.rng("jl");
        let mut escaped = 0;
        for _ in 0..self.samples().min(200) {
            let l = rng.gen_range(0..disp.p);
            if j_map(&self.field, &lat, &self.x, l, &disp).is_err() {
                escaped += 1;
            }
        }
        Ok(vec![
            Record::at_most("jl", "J_l defined for all directions at x", escaped as f64, 0.0),
            Record::at_most("jl", "preimage count stable under ray refinement (max/min)", hi as f64 / lo.max(1) as f64, 4.0)
                .with("counts", counts.clone()),
            Record::fit("jl", "M_hat", hi as f64),
        ])
    }

    fn plaque(&self) -> OpResult {
        let g = match &self.config.lattice {
            Some(l) => l.growth_log,
            None => self.lattice()?.growth_log(),
        };
        let mut rng = self.rng("plaque");
        let lam = self.field.lambdas();
        let top = lam.iter().map(|l| l.norm()).fold(0.0, f64::max) / lam[0].norm();
        let bound = ((top * g).exp() - 1.0) / g;
        let mut worst: f64 = 0.0;
        for _ in 0..self.samples().min(1000) {
            let z = AmbientPoint::new(
                self.x.coords().iter().map(|q| q.mul_exp(c(rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1)))).collect(),
            );
            let step = Complex64::from_polar(g * rng.gen::<f64>(), rng.gen_range(0.0..TAU));
            let p = plaque_intersect(&self.field, &z, 0, z.coord(0).mul_exp(step), self.constants.eps0()).map_err(err)?;
            worst = worst.max(p.gamma_hat(g));
        }
        Ok(vec![Record::at_most("plaque", "γ̂ ≤ (e^{g·max|λ_j/λ_0|} − 1)/g", worst, bound), Record::fit("plaque", "gamma_hat", worst)])
    }

    fn proj_e(&self) -> OpResult {
        let mut rng = self.rng("projE");
        let y = nudge(&mut rng, &self.x, 1e-8);
        let probes = probes(&mut rng, &self.field, &self.x, self.samples().min(100)).map_err(err)?;
        let rep = global_projection(&self.field, &self.x, &y, &probes, &ProjectionConfig::default()).map_err(err)?;
        Ok(vec![
            Record::at_most("projE", "C⁰ deviation ≤ 10 × ratio deviation", rep.c0_deviation, 10.0 * rep.ratio_deviation),
            Record::at_most("projE", "no flagged probes", rep.flagged as f64, 0.0),
            Record::at_most("projE", "overlapping plaques agree", rep.overlap_disagreement, 1e-10),
        ])
    }

    fn proj_hol(&self) -> OpResult {
        let mut rng = self.rng("projHol");
        let cfg = ProjectionConfig::default();
        let mut mu: f64 = 0.0;
        let mut count = 0;
        while count < self.samples().min(200) {
            let y = nudge(&mut rng, &self.x, 1e-3);
            let tau = psi_disc_correspondence(&self.field, &self.x, &y).map_err(err)?;
            let xi = Complex64::from_polar(rng.gen_range(0.0..0.7), rng.gen_range(0.0..TAU));
            mu = mu.max(beltrami_estimate(&tau, xi, 1e-3).map_err(err)?.mu.norm());
            count += 1;
        }
        let cutoff = BlendCutoff::quarter_half();
        let y = nudge(&mut rng, &self.x, 1e-7);
        let chart = LeafChart::new(&self.field, &self.x).map_err(err)?;
        let d = chart.boundary_distance(c(0.0, 0.0)).map_err(err)?;
        let (mut residual, mut mid): (f64, usize) = (0.0, 0);
        for _ in 0..self.samples().min(500) {
            let zeta = Complex64::from_polar(0.5 * d * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..TAU));
            let z = leaf_eval(&self.field, &self.x, zeta);
            if z.norm1_log() > 0.75f64.ln() {
                continue;
            }
            let b = blended_map(&self.field, &self.x, &y, &cutoff, zeta, &cfg).map_err(err)?;
            if b.chi > 0.0 && b.chi < 1.0 {
                mid += 1;
                residual = residual.max(leaf_criterion_residual(&self.field, &b.linear, &b.point));
            }
        }
        Ok(vec![
            Record::at_most("projHol", "|μ| of Ψ correspondences at h = 1e-3", mu, 1e-6),
            Record::at_most("projHol", "blended map stays on the leaf of y", residual, 1e-8).with("mid_zone", mid),
        ])
    }

    fn chain(&self) -> OpResult {
        let s = &self.config.chain;
        let cfg = ChainConfig { eps1: self.constants.eps1(), eps0: self.constants.eps0(), ..ChainConfig::default() };
        let mut rng = self.rng("chain");
        let (mut kappa, mut done): (f64, usize) = (0.0, 0);
        for _ in 0..s.pairs {
            let (x, y, target) = chain_pair(&mut rng, &self.x, s.distance, s.target);
            match chain_project(&self.field, &x, &y, target, &cfg) {
                Ok(rep) if rep.steps.last().map(|st| st.xi) == Some(target) => {
                    done += 1;
                    kappa = kappa.max(rep.kappa_hat);
                }
                _ => {}
            }
        }
        Ok(vec![
            Record::at_least("chain", "chains reach dist_P = target", done as f64, s.pairs as f64),
            Record::fit("chain", "kappa_hat", kappa),
        ])
    }

    fn disccount(&self) -> OpResult {
        let mut rng = self.rng("disccount");
        let mut out = Vec::new();
        for i in 0..20 {
            let k: Vec<Complex64> = (0..50).map(|_| c(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0))).collect();
            let n = 1 + i % 3;
            let m = rng.gen_range(1..=50);
            let covs: Vec<Vec<Disc>> = (0..n).map(|_| random_covering(&mut rng, &k, m)).collect();
            let res = refine(&k, &covs, m).map_err(err)?;
            let chk = res.check(&k, &covs, m);
            out.push(
                Record::at_most("disccount", "refinement count ≤ 200^n M", chk.count as f64, chk.bound)
                    .with("containment_violations", chk.containment_violations)
                    .with("uncovered", chk.uncovered),
            );
            out.push(Record::new("disccount", "doubled containment and coverage exact", chk.containment_violations == 0 && chk.uncovered == 0));
        }
        Ok(out)
    }

    fn cover_d(&self) -> OpResult {
        let s = &self.config.cover;
        let mut out = Vec::new();
        for &m in &s.m_list {
            let params = CoverParams { m1: s.m1, hbar: s.hbar, m };
            let mode = CoverMode::Sectors { centres: sector_midpoints(s.m1, s.hbar, s.sectors) };
            let rep = hyperbolic_cover_check(&mode, &params, s.samples, self.seed()).map_err(err)?;
            let mut r = Record::at_most("coverD", "sector discs cover 𝔻_{mħ}", rep.violations as f64, 0.0).with("m", m);
            r.margin = Some(rep.min_slack);
            out.push(r);
        }
        let params = CoverParams { m1: s.m1, hbar: s.hbar, m: 2 * s.m1 };
        let mut centres = sector_midpoints(s.m1, s.hbar, s.sectors);
        remove_sectors(&mut centres, s.sectors / 2, s.sectors.div_ceil(4));
        let rep = hyperbolic_cover_check(&CoverMode::Sectors { centres }, &params, s.samples, self.seed()).map_err(err)?;
        out.push(Record::new("coverD", "negative control: removed sectors leave gaps", rep.violations > 0).with("violations", rep.violations));
        let sat = satellite_check(&Disc::new(c(0.0, 0.0), 1.0).map_err(err)?, s.samples, self.seed());
        out.push(Record::at_most("coverD", "satellites: 2s ⊂ 2D′ and annulus covered", (sat.containment_failures + sat.misses) as f64, 0.0));
        Ok(out)
    }

    fn gamma(&self) -> OpResult {
        let s = &self.config.gamma;
        let params = GammaParams { m0: s.m0, m1: s.m1, hbar: s.hbar, p: s.p, per_arc: s.per_arc };
        let rep = verify_gamma(&self.field, &self.x, s.t, &params).map_err(err)?;
        let far = verify_gamma(&self.field, &self.x, 10.0 * s.t, &params).map_err(err)?;
        let cover = CoverParams { m1: s.m1, hbar: s.hbar, m: 2 * s.m1 + 1 };
        let mode = gamma_circle(5.0 * s.hbar, s.p, s.per_arc, s.hbar / (s.m1 as f64).powi(2), self.seed());
        let cov = hyperbolic_cover_check(&mode, &cover, self.config.cover.samples, self.seed()).map_err(err)?;
        Ok(vec![
            Record::new("gamma", "t ≥ m₀ħ", rep.t_lower_ok),
            Record::at_least("gamma", "Γ avoids 𝔻_{4ħ}", rep.inner_margin, 0.0),
            Record::at_least("gamma", "Γ inside 𝔻_{m₁ħ}", rep.outer_margin, 0.0),
            Record::at_most("gamma", "arcs shorter than m₁^{−2}ħ", rep.arc_max_length, rep.arc_bound),
            Record::new("gamma", "negative control: 10t leaves 𝔻_{m₁ħ}", !far.ok),
            Record::at_most("gamma", "perturbed arc points cover 𝔻_{mħ}", cov.violations as f64, 0.0),
        ])
    }

    fn tree(&self) -> OpResult {
        let s = &self.config.tree;
        let oracle = local_model_oracle(&self.field, &self.x, s.t, s.branching as u64, 0.9f64.ln()).map_err(err)?;
        let tree = build_tree(TreeLabel::Point(c(0.0, 0.0)), oracle, s.depth, s.branching).map_err(err)?;
        let rep = verify_discrete_leaf(&tree, s.m1, s.hbar, s.cover_m, s.samples, self.seed());
        let mut out = vec![
            Record::new("tree", "|F(m)| ≤ p^m", tree.level_bounds_hold()).with("vertices", tree.vertex_count()),
            Record::at_most("tree", "level m inside 𝔻_{m₁mħ}", rep.containment_violations.len() as f64, 0.0).with("max_ratio", rep.max_ratio),
            Record::at_most("tree", "children discs cover 𝔻(a, mħ)", rep.cover_violations as f64, 0.0).with("cover_vertices", rep.cover_vertices),
        ];
        if let Some(TreeLabel::Point(kid)) = tree.levels.get(1).and_then(|l| l.first()).map(|v| v.label) {
            let edge = tree.edge_lengths()[0][0];
            let mut bad = tree.clone();
            bad.levels[1][0].label = TreeLabel::Point(lengthen_edge(c(0.0, 0.0), kid, 1.5 * s.m1 as f64 * s.hbar / edge));
            let neg = verify_discrete_leaf(&bad, s.m1, s.hbar, s.cover_m, 0, self.seed());
            out.push(Record::new("tree", "negative control: lengthened edge detected", neg.containment_violations.contains(&(1, 0))));
        }
        Ok(out)
    }
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

/// Point of a cell at fractional position `(u, v)` per coordinate.
pub fn cell_point(l: &SigmaLattice, idx: &CellIndex, uv: &[(f64, f64)]) -> Result<ModelPoint, linfol::linear_model::ModelError> {
    let coords = idx
        .0
        .iter()
        .zip(uv)
        .map(|(cc, &(u, v))| match *cc {
            CellCoord::Center => Coord::polar(l.r_min_log() * (1.0 + u), TAU * v),
            CellCoord::Ring { ring, sector } => {
                Coord::polar(l.ring_log(ring) + u * l.growth_log(), l.ray_angle(sector) + v * TAU / l.n_rays() as f64)
            }
        })
        .collect();
    ModelPoint::new(coords)
}

/// Every coordinate multiplied by `1 + δe^{iθ_j}`.
pub fn nudge(rng: &mut impl Rng, x: &AmbientPoint, delta: f64) -> AmbientPoint {
    AmbientPoint::new(
        x.coords().iter().map(|q| q.mul_exp(clog1p(delta * Complex64::from_polar(1.0, rng.gen_range(0.0..TAU))))).collect(),
    )
}

/// Leaf parameters of `x` whose images stay in `¾𝔻^k`.
pub fn probes(rng: &mut impl Rng, f: &LinearVectorField, x: &AmbientPoint, n: usize) -> Result<Vec<Complex64>, String> {
    let chart = LeafChart::new(f, x).map_err(err)?;
    let d = chart.boundary_distance(c(0.0, 0.0)).map_err(err)?;
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let zeta = Complex64::from_polar(0.6 * d * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..TAU));
        if leaf_eval(f, x, zeta).norm1_log() <= 0.75f64.ln() {
            out.push(zeta);
        }
    }
    Ok(out)
}

/// A random point of the same size as `base`, a partner at ambient distance
/// `distance`, and a disc target at Poincaré distance `target`.
pub fn chain_pair(rng: &mut impl Rng, base: &AmbientPoint, distance: f64, target: f64) -> (AmbientPoint, AmbientPoint, Complex64) {
    let s: f64 = rng.gen_range(0.3..0.6);
    let x = AmbientPoint::new(
        base.coords().iter().map(|q| q.mul_exp(c(s.ln(), rng.gen_range(0.0..TAU)))).collect(),
    );
    let dir: Vec<Complex64> = (0..x.k()).map(|_| Complex64::from_polar(1.0, rng.gen_range(0.0..TAU))).collect();
    let norm = dir.len() as f64;
    let y = AmbientPoint::from_complex(
        &x.to_complex().iter().zip(&dir).map(|(z, d)| z + d * distance / norm.sqrt()).collect::<Vec<_>>(),
    );
    (x, y, geodesic_target(target, rng.gen_range(0.0..TAU)))
}

/// Up to `m` discs: random centres in the unit square, each point of `k`
/// assigned to its nearest centre.
pub fn random_covering(rng: &mut impl Rng, k: &[Complex64], m: usize) -> Vec<Disc> {
    let centres: Vec<Complex64> = (0..rng.gen_range(1..=m)).map(|_| c(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0))).collect();
    let mut reach = vec![0.0f64; centres.len()];
    for p in k {
        let (j, d) = centres
            .iter()
            .map(|q| (p - q).norm())
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("at least one centre");
        reach[j] = reach[j].max(d);
    }
    centres
        .iter()
        .zip(reach)
        .filter(|(_, r)| *r > 0.0)
        .map(|(q, r)| Disc::new(*q, r * 1.01 + rng.gen_range(0.0..0.05)).expect("positive radius"))
        .collect()
}
