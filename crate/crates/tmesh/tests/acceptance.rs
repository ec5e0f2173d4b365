//! Acceptance suite. Each test covers one criterion and prints a single
//! pass/fail line; all quantities are exact (integer or rational equality,
//! no tolerances anywhere).

use num_traits::Zero;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use std::time::Instant;
use tmesh::basis::{construct_basis, construct_basis_with_order, order_ledges, verify_basis, TieBreak};
use tmesh::conformality::{
    assemble_w, bspline_conformality, extract_cofactors_from, ledge_system, nullspace_basis,
    nullspace_dim, piecewise_polynomials, tensor_conformality, ConformalityVector, SplineFn,
};
use tmesh::coord::{coord, ratio, Coord};
use tmesh::dimension::{census, dim_cellwise_oracle, dim_formula, dim_spline_space};
use tmesh::extension::{extend, Pairing, Placement};
use tmesh::hierarchy::{generate, isolated_counts, Address, HierSpec};
use tmesh::io::{parse_document, serialize_hierspec, Document};
use tmesh::mesh::{build_tmesh, tensor_segments, Orientation, TMesh};

fn report(name: &str, started: Instant) {
    println!("criterion {name}: PASS ({:.2?})", started.elapsed());
}

fn reference_spec() -> HierSpec {
    let text = include_str!("data/reference.hspec");
    match parse_document(text).expect("reference script parses") {
        Document::Spec(spec) => spec,
        _ => panic!("reference file must be a script"),
    }
}

/// Random legal refinement script: at every level a random subset of the
/// partition grid is subdivided.
fn random_spec(rng: &mut StdRng, m: u32, n: u32, p: u32, q: u32, levels: u32) -> HierSpec {
    let mut spec = HierSpec::tensor(m, n, p, q);
    for level in 0..levels {
        let mut probe = spec.clone();
        probe.script.push(Vec::new());
        let gen = generate(&probe).expect("probe generation");
        let mut addresses: Vec<Address> = gen.forest.levels[level as usize]
            .iter()
            .flat_map(|g| g.subdomains.iter().map(|s| s.address.clone()))
            .collect();
        if addresses.is_empty() {
            break;
        }
        addresses.shuffle(rng);
        let max = if level == 0 { 3 } else { 2 };
        let lo = if level == 0 { 1 } else { 0 };
        let count = rng.random_range(lo..=max.min(addresses.len()));
        if count == 0 {
            break;
        }
        let mut chosen: Vec<Address> = addresses[..count].to_vec();
        chosen.sort();
        spec.script.push(chosen);
    }
    spec
}

/// Random strictly increasing positive offsets for the copied lines.
fn random_placement(rng: &mut StdRng, mesh: &TMesh, m: u32, n: u32, pairing: Pairing) -> Placement {
    let uniform = Placement::uniform(mesh, m, n, pairing);
    let mut randomize = |offs: &[Coord]| -> Vec<Coord> {
        let mut acc = Coord::zero();
        offs.iter()
            .map(|_| {
                acc += ratio(rng.random_range(1..6), rng.random_range(1..4));
                acc.clone()
            })
            .collect()
    };
    Placement {
        left: randomize(&uniform.left),
        right: randomize(&uniform.right),
        bottom: randomize(&uniform.bottom),
        top: randomize(&uniform.top),
    }
}

/// The deterministic sweep stream shared by criteria 3, 7, and 8.
fn sweep_cases(count: usize) -> Vec<(HierSpec, u64)> {
    let mut rng = StdRng::seed_from_u64(0x5eed_0003);
    let degrees = [(2u32, 2u32), (2, 3), (3, 3), (4, 3)];
    let mut cases = Vec::with_capacity(count);
    for i in 0..count {
        let (m, n) = degrees[i % degrees.len()];
        let p = rng.random_range(2..=8);
        let q = rng.random_range(2..=8);
        let levels = rng.random_range(1..=3);
        let spec = random_spec(&mut rng, m, n, p, q, levels);
        cases.push((spec, rng.random()));
    }
    cases
}

#[test]
fn criterion_1_reference_census_and_three_way_dimension() {
    let started = Instant::now();
    let spec = reference_spec();
    assert_eq!((spec.m, spec.n, spec.p, spec.q), (3, 3, 5, 6));
    assert_eq!(spec.script[0].len(), 2, "two level-0 subdomains");
    assert_eq!(spec.script[1].len(), 3, "three level-1 subdomains");
    let gen = generate(&spec).expect("reference mesh generates");
    let ext = extend(&gen.mesh, 3, 3, Pairing::Algebraic, None).expect("extension");
    let c = census(&ext, &gen.forest);
    assert_eq!(c.crossing_vertices, 166);
    assert_eq!(c.horizontal_ledges, 21);
    assert_eq!(c.vertical_ledges, 19);
    assert_eq!(c.isolated_total, 3);
    assert_eq!(c.isolated_per_level, vec![1, 2]);
    let formula = dim_formula(&c, 3, 3).expect("formula");
    assert_eq!(formula, 93);
    let conf = nullspace_dim(&assemble_w(&ext.mesh, 3, 3));
    assert_eq!(conf, 93);
    let cellwise = dim_cellwise_oracle(&gen.mesh, 3, 3, false);
    assert_eq!(cellwise, 93);
    assert!(started.elapsed().as_secs() < 10, "must finish within 10 s");
    report("1 (reference census, dim 93 by formula/conformality/cellwise)", started);
}

#[test]
fn criterion_2_reference_basis_counts_and_verification() {
    let started = Instant::now();
    let gen = generate(&reference_spec()).expect("reference mesh");
    let ext = extend(&gen.mesh, 3, 3, Pairing::Algebraic, None).expect("extension");
    let fns = construct_basis(&ext, &gen).expect("basis construction");
    let mut per_level = [0usize; 3];
    for f in &fns {
        per_level[f.provenance.level as usize] += 1;
    }
    assert_eq!(per_level, [72, 7, 14]);
    assert_eq!(fns.len(), 93);
    let verification = verify_basis(&fns, &ext, 93, 3, 3);
    assert!(verification.count_ok, "{verification:?}");
    assert!(verification.independent, "{verification:?}");
    assert!(verification.all_conformal, "{verification:?}");
    assert!(verification.span_matches, "{verification:?}");
    assert!(started.elapsed().as_secs() < 30, "must finish within 30 s");
    report("2 (reference basis 72 + 7 + 14 = 93, all four checks)", started);
}

#[test]
fn criterion_3_oracle_equivalence_sweep() {
    let started = Instant::now();
    let cases = sweep_cases(200);
    assert!(cases.len() >= 200);
    for (i, (spec, placement_seed)) in cases.iter().enumerate() {
        let gen = generate(spec)
            .unwrap_or_else(|e| panic!("case {i} generation failed: {e}\n{}", serialize_hierspec(spec)));
        let mut prng = StdRng::seed_from_u64(*placement_seed);
        let placement =
            random_placement(&mut prng, &gen.mesh, spec.m, spec.n, Pairing::Algebraic);
        let report = dim_spline_space(&gen, Pairing::Algebraic, Some(&placement))
            .unwrap_or_else(|e| panic!("case {i} failed: {e}\n{}", serialize_hierspec(spec)));
        assert!(
            report.agree,
            "case {i} disagreement: formula {:?}, conformality {:?}, cellwise {:?}\n{}",
            report.formula,
            report.conformality_rank_dim,
            report.cellwise_dim,
            serialize_hierspec(spec)
        );
    }
    assert!(started.elapsed().as_secs() < 300, "must finish within 5 min");
    report("3 (200-case sweep: formula = conformality rank = cellwise rank)", started);
}

#[test]
fn criterion_4_tensor_specialization() {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x5eed_0004);
    // Anchor instance: 6 x 7 lines, degree (3,3): (12 - 4)(13 - 4) = 72.
    let anchor = generate(&HierSpec::tensor(3, 3, 5, 6)).unwrap();
    let anchor_report = dim_spline_space(&anchor, Pairing::Algebraic, None).unwrap();
    assert_eq!(anchor_report.formula, Some(72));
    assert!(anchor_report.agree);
    for i in 0..50 {
        let m = rng.random_range(1..=4u32);
        let n = rng.random_range(1..=4u32);
        let p = rng.random_range(1..=8u32);
        let q = rng.random_range(1..=8u32);
        // Random strictly increasing rational coordinates.
        let mut coords = |count: u32| -> Vec<Coord> {
            let mut acc = ratio(rng.random_range(-12..12), rng.random_range(1..4));
            let mut out = vec![acc.clone()];
            for _ in 0..count {
                acc += ratio(rng.random_range(1..8), rng.random_range(1..5));
                out.push(acc.clone());
            }
            out
        };
        let spec = HierSpec {
            x_coords: Some(coords(p)),
            y_coords: Some(coords(q)),
            ..HierSpec::tensor(m, n, p, q)
        };
        let gen = generate(&spec).unwrap();
        let report = dim_spline_space(&gen, Pairing::Algebraic, None).unwrap();
        let vlines = (p + 1 + 2 * m) as i64;
        let hlines = (q + 1 + 2 * n) as i64;
        let expected = (vlines - m as i64 - 1) * (hlines - n as i64 - 1);
        assert_eq!(report.formula, Some(expected), "case {i}");
        assert!(report.agree, "case {i}: {report:?}");
    }
    report("4 (50 random tensor meshes: dim = (#vlines - m - 1)(#hlines - n - 1))", started);
}

#[test]
fn criterion_5_degree_two_reduction() {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x5eed_0005);
    for i in 0..50 {
        let p = rng.random_range(2..=7);
        let q = rng.random_range(2..=7);
        let levels = rng.random_range(1..=3);
        let spec = random_spec(&mut rng, 2, 2, p, q, levels);
        let gen = generate(&spec).unwrap();
        let ext = extend(&gen.mesh, 2, 2, Pairing::Algebraic, None).unwrap();
        let c = census(&ext, &gen.forest);
        let formula = dim_formula(&c, 2, 2).unwrap();
        let reduced = c.crossing_vertices as i64
            - (c.horizontal_ledges + c.vertical_ledges) as i64
            + c.isolated_total as i64
            + 1;
        assert_eq!(formula, reduced, "case {i}");
        let conf = nullspace_dim(&assemble_w(&ext.mesh, 2, 2));
        let cell = dim_cellwise_oracle(&gen.mesh, 2, 2, false);
        assert_eq!(formula, conf as i64, "case {i}\n{}", serialize_hierspec(&spec));
        assert_eq!(conf, cell, "case {i}");
    }
    report("5 (50 biquadratic meshes: crossing - ledges + isolated + 1)", started);
}

#[test]
fn criterion_6_conformality_property_suite() {
    let started = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x5eed_0006);

    // (a) univariate dimension law (r - d - 1)+ on 100 random l-edges.
    for _ in 0..100 {
        let r = rng.random_range(2..=10usize);
        let d = rng.random_range(1..=4u32);
        let mut acc = ratio(rng.random_range(-6..6), rng.random_range(1..4));
        let mut xs = vec![acc.clone()];
        for _ in 0..r - 1 {
            acc += ratio(rng.random_range(1..7), rng.random_range(1..4));
            xs.push(acc.clone());
        }
        let ys = [coord(0), coord(1)];
        let mesh = build_tmesh(&tensor_segments(&xs, &ys)).unwrap();
        let edge = mesh
            .ledges
            .iter()
            .find(|e| e.orientation == Orientation::Horizontal && e.fixed == coord(0))
            .unwrap();
        assert_eq!(edge.vertices.len(), r);
        let sys = ledge_system(&mesh, edge, d);
        assert_eq!(nullspace_dim(&sys), r.saturating_sub(d as usize + 1));
    }

    // (b) window vector sign alternation for degrees 1..=5.
    for d in 1..=5u32 {
        for _ in 0..10 {
            let mut acc = ratio(rng.random_range(-9..9), rng.random_range(1..5));
            let mut knots = vec![acc.clone()];
            for _ in 0..d + 1 {
                acc += ratio(rng.random_range(1..9), rng.random_range(1..5));
                knots.push(acc.clone());
            }
            let k = bspline_conformality(&knots, d).unwrap();
            assert!(k[0] > Coord::zero());
            for w in k.windows(2) {
                assert!(&w[0] * &w[1] < Coord::zero(), "degree {d}: signs must alternate");
            }
        }
    }

    // (c) separable window vectors are conformal on their local grids.
    for (m, n) in [(1u32, 1u32), (2, 2), (3, 2)] {
        let xs: Vec<Coord> = (0..=(m + 1) as i64).map(coord).collect();
        let ys: Vec<Coord> = (0..=(n + 1) as i64).map(coord).collect();
        let mesh = build_tmesh(&tensor_segments(&xs, &ys)).unwrap();
        let kx = bspline_conformality(&xs, m).unwrap();
        let ky = bspline_conformality(&ys, n).unwrap();
        let cv = tensor_conformality(&mesh, &xs, &ys, &kx, &ky, m, n).unwrap();
        assert!(cv.is_conformal(&mesh));
    }

    // (d) factor round-trip through evaluation for 50 random members of the
    // conformality space of a refined extended mesh.
    let gen = generate(&HierSpec {
        script: vec![vec![vec![(1, 1)]]],
        ..HierSpec::tensor(2, 2, 3, 3)
    })
    .unwrap();
    let ext = extend(&gen.mesh, 2, 2, Pairing::Algebraic, None).unwrap();
    let basis = nullspace_basis(&assemble_w(&ext.mesh, 2, 2), 2, 2);
    assert!(!basis.is_empty());
    for _ in 0..50 {
        let mut entries = std::collections::BTreeMap::new();
        for cv in &basis {
            let weight = coord(rng.random_range(-4..=4));
            if weight.is_zero() {
                continue;
            }
            for (vid, k) in &cv.entries {
                let e = entries.entry(*vid).or_insert_with(Coord::zero);
                *e += k * &weight;
            }
        }
        entries.retain(|_, k| !k.is_zero());
        let cv = ConformalityVector { entries, m: 2, n: 2 };
        assert!(cv.is_conformal(&ext.mesh));
        let f = SplineFn::new(cv.clone());
        let polys = piecewise_polynomials(&f, &ext.mesh, false).unwrap();
        for v in &ext.mesh.vertices {
            if v.kind == tmesh::mesh::VertexKind::Boundary {
                continue;
            }
            let triple = extract_cofactors_from(&polys, &ext.mesh, 2, 2, v.id).unwrap();
            assert_eq!(triple.k, cv.factor(v.id), "factor mismatch at vertex {:?}", v.id);
        }
    }

    // (e) moment closure: the jump polynomial of every l-edge vanishes
    // identically for conformal vectors.
    for cv in basis.iter().take(6) {
        for edge in &ext.mesh.ledges {
            assert!(cv.closure_poly(&ext.mesh, edge).is_zero());
        }
    }
    report("6 (univariate law, sign alternation, separable membership, round-trip, closure)", started);
}

fn shared_edge_pairs(mesh: &TMesh) -> Vec<(usize, usize, Orientation, Coord)> {
    let mut pairs = Vec::new();
    for (ia, a) in mesh.cells.iter().enumerate() {
        for (ib, b) in mesh.cells.iter().enumerate() {
            if a.x1 == b.x0 && a.y0.clone().max(b.y0.clone()) < a.y1.clone().min(b.y1.clone()) {
                pairs.push((ia, ib, Orientation::Vertical, a.x1.clone()));
            }
            if a.y1 == b.y0 && a.x0.clone().max(b.x0.clone()) < a.x1.clone().min(b.x1.clone()) {
                pairs.push((ia, ib, Orientation::Horizontal, a.y1.clone()));
            }
        }
    }
    pairs
}

#[test]
fn criterion_7_smoothness_and_support() {
    let started = Instant::now();
    let mut checked = 0usize;
    for (spec, _) in sweep_cases(200) {
        if checked == 20 {
            break;
        }
        let gen = generate(&spec).unwrap();
        if gen.mesh.cells.len() > 120 {
            continue;
        }
        let ext = extend(&gen.mesh, spec.m, spec.n, Pairing::Algebraic, None).unwrap();
        let fns = construct_basis(&ext, &gen)
            .unwrap_or_else(|e| panic!("basis failed: {e}\n{}", serialize_hierspec(&spec)));
        let pairs = shared_edge_pairs(&ext.mesh);
        for f in &fns {
            let polys = piecewise_polynomials(&f.spline, &ext.mesh, false).unwrap();
            assert!(
                polys.outer.is_zero(),
                "outer region polynomial must vanish\n{}",
                serialize_hierspec(&spec)
            );
            for (ia, ib, orientation, at) in &pairs {
                let diff = polys.per_cell[*ia].sub(&polys.per_cell[*ib]);
                let ok = match orientation {
                    Orientation::Vertical => diff.divisible_by_x_power(at, spec.m),
                    Orientation::Horizontal => diff.divisible_by_y_power(at, spec.n),
                };
                assert!(
                    ok,
                    "jump across shared edge not divisible by the degree power\n{}",
                    serialize_hierspec(&spec)
                );
            }
        }
        checked += 1;
    }
    assert_eq!(checked, 20);
    report("7 (20 meshes: cross-edge divisibility and vanishing outer region)", started);
}

#[test]
fn criterion_8_telescoping_ledger() {
    let started = Instant::now();
    for (case, (spec, _)) in sweep_cases(200).into_iter().enumerate() {
        let gen = generate(&spec).unwrap();
        let ext = extend(&gen.mesh, spec.m, spec.n, Pairing::Algebraic, None).unwrap();
        let order = order_ledges(&ext, &gen.forest, spec.m, spec.n, TieBreak::Standard)
            .unwrap_or_else(|e| panic!("case {case} ordering failed: {e}\n{}", serialize_hierspec(&spec)));
        let (_, isolated_per_level) = isolated_counts(&gen.forest);
        let (m, n) = (spec.m as i64, spec.n as i64);
        let max_level = order.steps.iter().map(|s| s.level).max().unwrap_or(0);
        let mut total = 0usize;
        for level in 0..=max_level {
            let steps: Vec<_> = order.steps.iter().filter(|s| s.level == level).collect();
            let dims: usize = steps.iter().map(|s| s.space_dim).sum();
            total += dims;
            let raw: i64 = steps
                .iter()
                .map(|s| {
                    let edge = ext.mesh.ledge(s.ledge);
                    let d = match edge.orientation {
                        Orientation::Horizontal => m,
                        Orientation::Vertical => n,
                    };
                    s.crossing_count as i64 - d + 1
                })
                .sum();
            if level == 0 {
                // Level 0 closes with the (m-1)(n-1) term.
                assert_eq!(
                    dims as i64,
                    raw + (m - 1) * (n - 1),
                    "case {case} level-0 ledger\n{}",
                    serialize_hierspec(&spec)
                );
            } else {
                // Deeper levels balance with the isolated count one level up.
                let delta_i = isolated_per_level
                    .get(level as usize - 1)
                    .copied()
                    .unwrap_or(0) as i64;
                assert_eq!(
                    dims as i64,
                    raw + delta_i,
                    "case {case} level-{level} ledger\n{}",
                    serialize_hierspec(&spec)
                );
                if delta_i == 0 {
                    // Without isolated subdomains every removed edge keeps
                    // at least degree - 1 crossings.
                    for s in &steps {
                        let edge = ext.mesh.ledge(s.ledge);
                        let d = match edge.orientation {
                            Orientation::Horizontal => m,
                            Orientation::Vertical => n,
                        };
                        assert!(
                            s.crossing_count as i64 >= d - 1,
                            "case {case} level-{level}: edge with {} crossings under bound {}",
                            s.crossing_count,
                            d - 1
                        );
                    }
                }
            }
        }
        // The per-edge dimensions telescope to the full conformality rank.
        let full = nullspace_dim(&assemble_w(&ext.mesh, spec.m, spec.n));
        assert_eq!(
            total, full,
            "case {case} total ledger\n{}",
            serialize_hierspec(&spec)
        );
    }
    report("8 (200 meshes: per-level ledgers and telescoping totals)", started);
}

#[test]
fn per_step_direct_sum_on_the_reference_mesh() {
    // Stronger form of the telescoping: at every removal step the nullity
    // drops by exactly the removed edge's univariate dimension.
    let started = Instant::now();
    let gen = generate(&reference_spec()).unwrap();
    let ext = extend(&gen.mesh, 3, 3, Pairing::Algebraic, None).unwrap();
    let order = order_ledges(&ext, &gen.forest, 3, 3, TieBreak::Standard).unwrap();
    let fns = construct_basis_with_order(&ext, &gen, &order).unwrap();
    assert_eq!(fns.len(), 93);

    // Replay the removals on a shrinking segment set, recomputing the exact
    // nullity of the assembled system each time.
    let mut segments = ext.mesh.segments();
    let mut previous = nullspace_dim(&assemble_w(&ext.mesh, 3, 3));
    for step in &order.steps {
        let edge = ext.mesh.ledge(step.ledge);
        segments.retain(|s| {
            !(s.orientation == edge.orientation && s.fixed == edge.fixed && s.lo == edge.lo)
        });
        let reduced = build_tmesh(&segments).expect("mesh stays valid during removal");
        let dim = nullspace_dim(&assemble_w(&reduced, 3, 3));
        assert_eq!(
            previous,
            dim + step.space_dim,
            "direct sum fails at removal of l-edge {:?}",
            step.ledge
        );
        previous = dim;
    }
    assert_eq!(previous, 0);
    report("8+ (per-step direct sum on the reference mesh)", started);
}
