use linfol::bowen::{closeness_clauses, Clause};
use linfol::cells::{
    j_map, plaque_intersect, preimage_count, refinement_study, CellCoord, CellError, CellIndex, Displacement,
    PaperModeLattice, SigmaLattice,
};
use linfol::linear_model::{AmbientPoint, ConstantInputs, Coord, LinearVectorField, ModelPoint, PaperConstants};
use linfol::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

fn c(a: f64, b: f64) -> Complex64 {
    Complex64::new(a, b)
}

fn lat() -> SigmaLattice {
    SigmaLattice::filling(-20.0, 0.05, 64).unwrap()
}

fn scaled_lattice(r: f64) -> (PaperConstants, SigmaLattice) {
    let k = PaperConstants::new(ConstantInputs { r, ..ConstantInputs::default() }, 1.0).unwrap();
    let l = SigmaLattice::from_constants(&k).unwrap();
    (k, l)
}

fn random_index(rng: &mut impl Rng, l: &SigmaLattice, k: usize) -> CellIndex {
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

/// A point strictly inside the cell, at fractional position `(u, v)`.
fn inside(l: &SigmaLattice, idx: &CellIndex, uv: &[(f64, f64)]) -> ModelPoint {
    let coords = idx
        .0
        .iter()
        .zip(uv)
        .map(|(cc, &(u, v))| match *cc {
            CellCoord::Center => Coord::polar(l.r_min_log() * (1.0 + u), TAU * v),
            CellCoord::Ring { ring, sector } => Coord::polar(
                l.ring_log(ring) + u * l.growth_log(),
                l.ray_angle(sector) + v * TAU / l.n_rays() as f64,
            ),
        })
        .collect();
    ModelPoint::new(coords).unwrap()
}

#[test]
fn lattice_validation() {
    assert!(matches!(SigmaLattice::new(-1.0, 0.5, 1, 7), Err(CellError::InvalidLattice(_))));
    assert!(matches!(SigmaLattice::new(-1.0, 0.5, 3, 8), Err(CellError::InvalidLattice(_))));
    assert!(matches!(SigmaLattice::new(1.0, 0.5, 1, 8), Err(CellError::InvalidLattice(_))));
    let l = lat();
    assert!(l.ring_log(l.n_rings()) <= 0.0);
}

#[test]
fn center_and_tie_break() {
    let l = lat();
    let x = ModelPoint::from_log_polar(&[Some((-20.5, 0.0)), Some((l.ring_log(12), 0.2))]).unwrap();
    let cell = l.cell_of(&x);
    assert_eq!(cell.0[0], CellCoord::Center);
    match cell.0[1] {
        CellCoord::Ring { ring, .. } => assert_eq!(ring, 12),
        c => panic!("{c:?}"),
    }
    let zero = ModelPoint::new(vec![Coord::Zero, Coord::polar(-1.0, 0.0)]).unwrap();
    assert_eq!(l.cell_of(&zero).0[0], CellCoord::Center);
}

#[test]
fn vertex_roundtrip_random_indices() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for (_, l) in [0.1, 0.3, 0.5].map(scaled_lattice) {
        for _ in 0..10_000 / 3 {
            let idx = random_index(&mut rng, &l, 2);
            let v = l.cell_vertex(&idx).unwrap();
            assert_eq!(l.cell_of(&v), idx);
        }
    }
    let l = lat();
    for _ in 0..1000 {
        let idx = random_index(&mut rng, &l, 3);
        assert_eq!(l.cell_of(&l.cell_vertex(&idx).unwrap()), idx);
    }
    assert!(l.cell_vertex(&CellIndex(vec![CellCoord::Center; 2])).unwrap().is_zero());
    assert_eq!(
        l.cell_vertex(&CellIndex(vec![CellCoord::Center, CellCoord::Ring { ring: 0, sector: 64 }])),
        Err(CellError::MalformedIndex(1))
    );
}

#[test]
fn vertex_lies_below_its_points() {
    let l = lat();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10_000 {
        let idx = random_index(&mut rng, &l, 2);
        let uv: Vec<(f64, f64)> = (0..2).map(|_| (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0))).collect();
        let x = inside(&l, &idx, &uv);
        let v = l.snap(&x).unwrap();
        for j in 0..2 {
            match (x.coord(j), v.coord(j)) {
                (_, Coord::Zero) => assert_eq!(idx.0[j], CellCoord::Center),
                (Coord::Polar { log_modulus: a, argument: b }, Coord::Polar { log_modulus: p, argument: q }) => {
                    assert!(p <= a && a < p + l.growth_log() || matches!(idx.0[j], CellCoord::Ring { ring, .. } if ring + 1 == l.n_rings()));
                    assert!(q <= b.rem_euclid(TAU) + 1e-15 && b.rem_euclid(TAU) < q + TAU / 64.0 + 1e-15);
                }
                p => panic!("{p:?}"),
            }
        }
    }
}

#[test]
fn counts() {
    let l = SigmaLattice::new(-1.0, 0.5, 1, 8).unwrap();
    assert_eq!(l.cell_count(1), Some(9));
    assert_eq!(l.cell_count(2), Some(81));
    let l = lat();
    let one = l.cell_count(1).unwrap();
    assert_eq!(l.cell_count(2), Some(one * one));
    for lr in [0.5, 1.0, 2.0, 10.0, 1e3] {
        let p = PaperModeLattice::new(lr);
        for k in 1..=4 {
            assert!(p.count_certified(k), "λR = {lr}, k = {k}");
            assert!(p.cell_count_log(k) <= 70.0 * lr * k as f64);
        }
    }
    // the log count is at least the exact count of the leading terms
    let p = PaperModeLattice::new(1.0);
    assert!(p.cell_count_log(1) >= 69.0);
}

#[test]
fn same_cell_pairs_meet_closeness_clauses() {
    let (k, l) = scaled_lattice(0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let idx = random_index(&mut rng, &l, 2);
        let mut uv = || (0..2).map(|_| (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0))).collect::<Vec<_>>();
        let (a, b) = (uv(), uv());
        let (x, y) = (inside(&l, &idx, &a), inside(&l, &idx, &b));
        assert_eq!(l.cell_of(&x), l.cell_of(&y));
        let (clauses, worst) = closeness_clauses(&x, &y, &k).unwrap();
        for (cc, cl) in idx.0.iter().zip(&clauses) {
            let want = if *cc == CellCoord::Center { Clause::S1 } else { Clause::S2 };
            assert_eq!(*cl, want);
        }
        assert!(worst < k.ratio_tolerance());
    }
}

#[test]
fn j_map_matches_direct_evaluation() {
    let f = LinearVectorField::from_pairs(&[(1.0, 0.0), (2.0, 0.0)]).unwrap();
    let l = lat();
    let d = Displacement { t: 0.05, p: 16, alpha1_log: -100.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut checked = 0;
    while checked < 500 {
        let idx = CellIndex(
            (0..2)
                .map(|_| CellCoord::Ring { ring: rng.gen_range(200..l.n_rings()), sector: rng.gen_range(0..64) })
                .collect(),
        );
        let x = l.cell_vertex(&idx).unwrap();
        let lidx = rng.gen_range(0..16u64);
        let xs = x.to_complex();
        let norm = xs.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let zeta = -0.05 * norm.ln() * Complex64::from_polar(1.0, TAU * lidx as f64 / 16.0);
        let z: Vec<Complex64> = xs.iter().zip([1.0, 2.0]).map(|(x, lam)| x * (zeta * lam).exp()).collect();
        if z.iter().any(|w| w.norm() >= 1.0) {
            continue;
        }
        let coords: Vec<(f64, f64)> = z
            .iter()
            .map(|w| {
                let r = (w.norm().ln() - l.r_min_log()) / l.growth_log();
                let s = w.arg().rem_euclid(TAU) * 64.0 / TAU;
                (r, s)
            })
            .collect();
        // skip points within rounding of a cell boundary
        if coords.iter().any(|(r, s)| (r - r.round()).abs() < 1e-9 || (s - s.round()).abs() < 1e-9) {
            continue;
        }
        let want = CellIndex(
            coords.iter().map(|(r, s)| CellCoord::Ring { ring: r.floor() as u64, sector: s.floor() as u64 % 64 }).collect(),
        );
        let j = j_map(&f, &l, &x, lidx, &d).unwrap();
        assert_eq!(j.cell, want, "l = {lidx}");
        assert_eq!(j.vertex, l.cell_vertex(&want).unwrap());
        assert_eq!(j, j_map(&f, &l, &x, lidx, &d).unwrap());
        checked += 1;
    }
}

#[test]
fn j_map_spec_examples() {
    let f = LinearVectorField::from_pairs(&[(1.0, 0.0), (2.0, 0.0)]).unwrap();
    let l = lat();
    let x = l.snap(&AmbientPoint::from_complex(&[c(0.3, 0.1), c(-0.2, 0.05)])).unwrap();
    let still = Displacement { t: 0.0, p: 16, alpha1_log: -100.0 };
    assert_eq!(j_map(&f, &l, &x, 3, &still).unwrap().vertex, x);
    let d = Displacement { t: 0.05, p: 16, alpha1_log: -100.0 };
    let j = j_map(&f, &l, &x, 0, &d).unwrap();
    assert!(j.zeta.im == 0.0 && j.zeta.re > 0.0);
    for (a, b) in l.cell_of(&x).0.iter().zip(&j.cell.0) {
        match (a, b) {
            (CellCoord::Ring { sector: s, .. }, CellCoord::Ring { sector: t, .. }) => assert_eq!(s, t),
            p => panic!("{p:?}"),
        }
    }
    let zero = ModelPoint::new(vec![Coord::Zero, Coord::Zero]).unwrap();
    assert!(matches!(j_map(&f, &l, &zero, 0, &d), Err(CellError::PreconditionViolated(_))));
    let big = Displacement { t: 5.0, p: 2, alpha1_log: -100.0 };
    let near = l.snap(&AmbientPoint::from_complex(&[c(0.9, 0.0), c(0.5, 0.0)])).unwrap();
    assert!(matches!(j_map(&f, &l, &near, 0, &big), Err(CellError::DisplacementLeavesPolydisc { l: 0, .. })));
}

#[test]
fn preimage_examples() {
    let f = LinearVectorField::from_pairs(&[(1.0, 0.0), (0.5, 1.0)]).unwrap().normalize();
    let l = lat();
    let d = Displacement { t: 0.05, p: 16, alpha1_log: -100.0 };
    let x = l.snap(&AmbientPoint::from_complex(&[c(0.3, 0.1), c(-0.2, 0.05)])).unwrap();
    let y = j_map(&f, &l, &x, 2, &d).unwrap().vertex;
    assert_eq!(preimage_count(&f, &l, &y, 2, &[], &d).unwrap().count, 0);
    let one = preimage_count(&f, &l, &y, 2, std::slice::from_ref(&x), &d).unwrap();
    assert_eq!((one.count, one.witnesses.clone()), (1, vec![0]));
    let deep = ModelPoint::from_log_polar(&[Some((-200.0, 0.0)), Some((-1.0, 0.0))]).unwrap();
    assert!(matches!(preimage_count(&f, &l, &deep, 2, &[x], &d), Err(CellError::PreconditionViolated(_))));
}

#[test]
fn preimage_bound_stable_under_refinement() {
    let f = LinearVectorField::from_pairs(&[(1.0, 0.0), (0.5, 1.0)]).unwrap().normalize();
    let l = SigmaLattice::filling(-20.0, 0.02, 128).unwrap();
    let d = Displacement { t: 0.05, p: 16, alpha1_log: -100.0 };
    let centre = AmbientPoint::from_complex(&[c(0.2, 0.1), c(-0.1, 0.15)]);
    for lidx in [0, 5, 11] {
        let m = refinement_study(&f, &l, &centre, lidx, 4, 4, &[1, 2, 4], &d).unwrap();
        let (lo, hi) = (*m.iter().min().unwrap(), *m.iter().max().unwrap());
        assert!(lo >= 1 && hi <= 4 * lo, "l = {lidx}: {m:?}");
    }
}

#[test]
fn plaque_intersection_examples() {
    let f = LinearVectorField::from_pairs(&[(1.0, 0.0), (2.0, 0.0)]).unwrap();
    let l = lat();
    let z = AmbientPoint::from_complex(&[c(0.3, 0.1), c(-0.2, 0.05)]);
    let p = plaque_intersect(&f, &z, 0, z.coord(0), 0.1).unwrap();
    assert_eq!(p.zeta, c(0.0, 0.0));
    assert_eq!(p.w, z);
    assert!(p.ratio_deviation.iter().all(|d| *d == 0.0));

    let g = l.growth_log();
    let p = plaque_intersect(&f, &z, 0, z.coord(0).mul_exp(c(g, 0.0)), 0.1).unwrap();
    assert!((p.zeta - c(g, 0.0)).norm() < 1e-15);
    assert!((p.log_deviation[1] - c(2.0 * g, 0.0)).norm() < 1e-15);
    let direct = z.to_complex()[1] * (2.0 * g).exp();
    assert!((p.w.to_complex()[1] - direct).norm() < 1e-15);
    assert!((p.ratio_deviation[1] - (1.0 - (-2.0 * g).exp())).abs() < 1e-15);
    assert!(p.gamma_hat(g) <= 2.0);

    let far = z.coord(0).mul_exp(c(-3.0, 0.0));
    assert!(matches!(plaque_intersect(&f, &z, 0, far, 0.1), Err(CellError::NoSmallSolution(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn homothety_shifts_ring_by_one(
        ring in 0u64..390, u in 0.001f64..0.999, sector in 0u64..64, v in 0.001f64..0.999
    ) {
        let l = lat();
        prop_assume!(ring + 1 < l.n_rings());
        let idx = CellIndex(vec![CellCoord::Ring { ring, sector }]);
        let x = inside(&l, &idx, &[(u, v)]);
        let y = ModelPoint::new(vec![x.coord(0).mul_exp(c(l.growth_log(), 0.0))]).unwrap();
        prop_assert_eq!(l.cell_of(&x), idx);
        prop_assert_eq!(l.cell_of(&y), CellIndex(vec![CellCoord::Ring { ring: ring + 1, sector }]));
    }
}
