//! Acceptance suite: one PASS/FAIL line per criterion.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use lipgerm::conemaps::{
    dilate_by_function, distance3, rect_isotopy, translate_along_arc, verify_bilipschitz, ConeModel, Direction, FamilyFn,
    IsotopyFamilies, LipschitzReport, P3,
};
use lipgerm::fuzz;
use lipgerm::geom;
use lipgerm::germ::{parse_germ, ArcGerm, PolygonalGerm};
use lipgerm::hull::{
    chain_hull_triangulation, check_triangulation, convex_hull, find_double_highlighted_triangle, RationalPoints,
};
use lipgerm::linktopo::{decide_equivalence, region_graph, tree_isomorphic, EquivalenceStatus, ExtendedTree};
use lipgerm::metric::{edge_exponents, is_lne, tord, witness_ratio, LneStatus, WitnessKind};
use lipgerm::puiseux::{q, qi, PuiseuxSeries, Q};
use lipgerm::reduce::{classify_connected, CanonicalForm, ReductionTrace};

type Outcome = Result<String, String>;

fn fixture(name: &str) -> PolygonalGerm {
    let path = format!("{}/tests/fixtures/{}.germ", env!("CARGO_MANIFEST_DIR"), name);
    parse_germ(&std::fs::read_to_string(path).unwrap(), &qi(12)).unwrap()
}

fn within(start: Instant, limit: Duration) -> Result<Duration, String> {
    let e = start.elapsed();
    if e <= limit {
        Ok(e)
    } else {
        Err(format!("took {:?}, limit {:?}", e, limit))
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn sorted_exponents(g: &PolygonalGerm) -> Vec<Q> {
    let mut v: Vec<Q> = edge_exponents(g).unwrap().into_iter().flatten().collect();
    v.sort();
    v
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let (x1, x2) = (fixture("x1"), fixture("x2"));
    for (name, g) in [("X1", &x1), ("X2", &x2)] {
        let v = is_lne(g).map_err(|e| e.to_string())?;
        ensure(v.status == LneStatus::Lne, || format!("{} reported {}", name, v.status))?;
        let ts: Vec<f64> = v.constant_estimates.iter().map(|c| c.0).collect();
        let expected: Vec<f64> = (8..=20).map(|k| 0.5f64.powi(k)).collect();
        ensure(ts == expected, || format!("{} constants sampled at {:?}", name, ts))?;
        ensure(v.constants_flat(), || format!("{} constants not flat", name))?;
    }
    let want = vec![qi(2), qi(2), qi(2), qi(3)];
    ensure(sorted_exponents(&x1) == want && sorted_exponents(&x2) == want, || "edge exponent multisets".into())?;
    let (r1, r2) = (region_graph(&x1).map_err(|e| e.to_string())?, region_graph(&x2).map_err(|e| e.to_string())?);
    let shape = |r: &lipgerm::linktopo::RegionGraph| {
        let mut s: Vec<usize> = r.faces.iter().map(|f| f.walls.len()).collect();
        s.sort();
        (r.faces.len(), r.walls.len(), s)
    };
    ensure(shape(&r1) == shape(&r2), || format!("face structure {:?} vs {:?}", shape(&r1), shape(&r2)))?;
    ensure(r1.slit_face_exponents() == vec![qi(4)] && r2.slit_face_exponents() == vec![qi(2)], || {
        format!("slit face exponents {:?} vs {:?}", r1.slit_face_exponents(), r2.slit_face_exponents())
    })?;
    let v = decide_equivalence(&x1, &x2).map_err(|e| e.to_string())?;
    ensure(v.status == EquivalenceStatus::Inequivalent, || format!("verdict {}", v))?;
    let w = v.witness.clone().unwrap_or_default();
    ensure(w.starts_with("slit-bearing face area exponent differs"), || format!("witness {}", w))?;
    let e = within(start, Duration::from_secs(5))?;
    Ok(format!("{} ; {:?}", v, e))
}

struct Classified {
    closed: bool,
    trace: ReductionTrace,
}

fn random_batch() -> Result<Vec<Classified>, String> {
    let mut rng = fuzz::rng(20_240_601);
    let mut out = Vec::new();
    for i in 0..400 {
        let closed = i < 200;
        let n = rng.gen_range(3..=10);
        let g = if closed { fuzz::random_lne_closed(&mut rng, n) } else { fuzz::random_lne_open(&mut rng, n) };
        let (form, trace) = classify_connected(&g).map_err(|e| format!("germ {} (n = {}): {}", i, n, e))?;
        if let Some(m) = trace.moves.iter().find(|m| !m.is_certified()) {
            return Err(format!("germ {}: uncertified {}", i, m.kind.name()));
        }
        let c = &g.components[0];
        if closed {
            let beta = sorted_exponents(&g)[0].clone();
            ensure(form == CanonicalForm::Horn(beta.clone()), || format!("germ {}: {} but min edge tord {}", i, form, beta))?;
            ensure(trace.circumradius_exponent == Some(beta.clone()), || {
                format!("germ {}: circumradius exponent {:?}", i, trace.circumradius_exponent)
            })?;
        } else {
            let alpha = tord(&c.vertices[0], c.vertices.last().unwrap()).unwrap();
            let alpha = alpha.exponent().cloned().unwrap();
            ensure(form == CanonicalForm::HolderTriangle(alpha.clone()), || format!("germ {}: {} but tord {}", i, form, alpha))?;
        }
        out.push(Classified { closed, trace });
    }
    Ok(out)
}

fn criterion_2(batch: &Result<Vec<Classified>, String>, elapsed: Duration) -> Outcome {
    let b = batch.as_ref().map_err(|e| e.clone())?;
    let closed = b.iter().filter(|c| c.closed).count();
    let moves: usize = b.iter().map(|c| c.trace.moves.len()).sum();
    ensure(elapsed <= Duration::from_secs(60), || format!("took {:?}", elapsed))?;
    Ok(format!("{} closed, {} open, {} certified moves ; {:?}", closed, b.len() - closed, moves, elapsed))
}

fn topology_class(g: &PolygonalGerm) -> Result<(bool, usize), String> {
    let rg = region_graph(g).map_err(|e| e.to_string())?;
    Ok((g.components[0].closed, rg.faces.len()))
}

fn criterion_3(batch: &Result<Vec<Classified>, String>) -> Outcome {
    let b = batch.as_ref().map_err(|e| format!("no traces: {}", e))?;
    let mut checked = 0;
    for (i, c) in b.iter().enumerate() {
        let states = c.trace.states();
        let first = PolygonalGerm::new(vec![states[0].clone()]).unwrap();
        let lne0 = is_lne(&first).unwrap().status;
        let min0 = sorted_exponents(&first)[0].clone();
        let topo0 = topology_class(&first)?;
        for (k, s) in states.iter().enumerate().skip(1) {
            let g = PolygonalGerm::new(vec![s.clone()]).map_err(|e| format!("germ {} move {}: {}", i, k, e))?;
            let lne = is_lne(&g).map_err(|e| e.to_string())?.status;
            ensure(lne == lne0, || format!("germ {} move {}: LNE status {} -> {}", i, k, lne0, lne))?;
            let m = sorted_exponents(&g)[0].clone();
            ensure(m == min0, || format!("germ {} move {}: min edge exponent {} -> {}", i, k, min0, m))?;
            let topo = topology_class(&g).map_err(|e| format!("germ {} move {}: {}", i, k, e))?;
            ensure(topo == topo0, || format!("germ {} move {}: topology {:?} -> {:?}", i, k, topo0, topo))?;
            checked += 1;
        }
    }
    Ok(format!("{} post-move states re-verified", checked))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut rng = fuzz::rng(4);
    for i in 0..500 {
        let n = rng.gen_range(4..=9);
        let closed = rng.gen_bool(0.5);
        let p: RationalPoints = fuzz::random_simple_chain(&mut rng, n, closed);
        let tri = chain_hull_triangulation(&p, closed).map_err(|e| format!("chain {}: {}", i, e))?;
        check_triangulation(&p, &tri).map_err(|e| format!("chain {}: {}", i, e))?;
        let k = convex_hull(&p).unwrap().len();
        ensure(tri.triangles.len() == 2 * n - k - 2, || format!("chain {}: {} triangles, n = {}, k = {}", i, tri.triangles.len(), n, k))?;
        find_double_highlighted_triangle(&tri).map_err(|e| format!("chain {}: {}", i, e))?;
    }
    let e = within(start, Duration::from_secs(10))?;
    Ok(format!("500 chains ; {:?}", e))
}

fn map_grid() -> Vec<f64> {
    (5..=20).map(|k| 0.5f64.powi(k)).collect()
}

/// Per-`t` maxima agree within 10%, for the ratios and their inverses.
fn same_constant(r: &LipschitzReport) -> Result<f64, String> {
    ensure(r.per_t.len() == map_grid().len(), || format!("only {} grid points sampled", r.per_t.len()))?;
    let his: Vec<f64> = r.per_t.iter().map(|x| x.2).collect();
    let inv: Vec<f64> = r.per_t.iter().map(|x| 1.0 / x.1).collect();
    for v in [his, inv] {
        let (lo, hi) = (v.iter().cloned().fold(f64::INFINITY, f64::min), v.iter().cloned().fold(0.0, f64::max));
        ensure(hi <= 1.1 * lo, || format!("per-t maxima range over [{}, {}]", lo, hi))?;
    }
    Ok(r.bound)
}

fn check_map<F>(name: &str, model: &ConeModel, map: F) -> Result<f64, String>
where
    F: Fn(P3, Direction) -> Option<P3>,
{
    let mut rng = fuzz::rng(5);
    for k in 0..64 {
        let t = map_grid()[k % 16];
        let th = rng.gen::<f64>() * std::f64::consts::TAU;
        let p = [model.a * t * th.cos(), model.a * t * th.sin(), t];
        ensure(map(p, Direction::Forward) == Some(p), || format!("{}: boundary point {:?} moved", name, p))?;
    }
    for _ in 0..10_000 {
        let t = map_grid()[rng.gen_range(0..16)];
        let p = model.sample(t, &mut rng);
        let img = map(p, Direction::Forward).ok_or_else(|| format!("{}: forward failed at {:?}", name, p))?;
        let back = map(img, Direction::Inverse).ok_or_else(|| format!("{}: inverse failed at {:?}", name, img))?;
        ensure(distance3(back, p) <= 1e-9, || format!("{}: round trip off by {:e}", name, distance3(back, p)))?;
    }
    let r = verify_bilipschitz(|p| map(p, Direction::Forward), |t, rng: &mut ChaCha8Rng| model.sample(t, rng), &map_grid(), 400, 9);
    same_constant(&r).map_err(|e| format!("{}: {}", name, e))
}

fn chain_family(pts: &[(&str, &str)], shift: &str) -> FamilyFn {
    FamilyFn::Chain(
        pts.iter()
            .map(|(x, y)| ArcGerm::parse(x, &format!("{} {}", y, shift)).unwrap())
            .collect(),
    )
}

fn check_isotopy(pts: &[(&str, &str)]) -> Result<(), String> {
    let (first, last) = (pts[0], pts[pts.len() - 1]);
    let fam = IsotopyFamilies {
        x0: first.0.parse().unwrap(),
        x1: last.0.parse().unwrap(),
        f: chain_family(pts, "+ t"),
        a: chain_family(pts, ""),
        b: chain_family(&[first, last], ""),
        g: chain_family(pts, "- t"),
        m: 4.0,
    };
    for t in map_grid() {
        for iu in 1..10 {
            let u = iu as f64 / 10.0;
            for iv in 0..=10 {
                let v = iv as f64 / 10.0;
                let id = rect_isotopy(&fam, u, v, t, 0.0).map_err(|e| e.to_string())?;
                ensure(id == fam.point(u, v, t), || format!("phi_0 moves ({}, {}) at t = {:e}", u, v, t))?;
            }
            for tau in [0.0, 0.25, 0.5, 1.0] {
                for v in [0.0, 1.0] {
                    let img = rect_isotopy(&fam, u, v, t, tau).map_err(|e| e.to_string())?;
                    ensure(img == fam.point(u, v, t), || format!("v = {} moved at tau = {}", v, tau))?;
                }
            }
            let (al, _) = fam.ratios(u, t).map_err(|e| e.to_string())?;
            let img = rect_isotopy(&fam, u, al, t, 1.0).map_err(|e| e.to_string())?;
            let err = (img[1] - fam.b.eval(t, img[0])).abs();
            ensure(err <= 1e-9, || format!("phi_1 misses the b-link by {:e}", err))?;
        }
    }
    Ok(())
}

fn criterion_5() -> Outcome {
    let mut bounds = Vec::new();
    for name in ["square", "x1", "x2"] {
        let g = fixture(name);
        let gamma = g.vertex(0, 1).clone();
        let mt = ConeModel::for_translation(2.0, &gamma, &map_grid());
        bounds.push(check_map(&format!("translate {}", name), &mt, |p, d| translate_along_arc(p, &gamma, &mt, d).ok())?);
        let f: PuiseuxSeries = "3/2 - t".parse().unwrap();
        let md = ConeModel::for_dilatation(g.cone_a.max(2.0), &f, &map_grid());
        bounds.push(check_map(&format!("dilate {}", name), &md, |p, d| dilate_by_function(p, &f, &md, d).ok())?);
    }
    check_isotopy(&[("0", "0"), ("t", "1/4*t"), ("2*t", "0")])?;
    check_isotopy(&[("0", "0"), ("t", "t^2"), ("2*t", "0")])?;
    check_isotopy(&[("0", "0"), ("t", "-1/3*t"), ("3/2*t", "1/8*t"), ("2*t", "0")])?;
    let c = bounds.iter().cloned().fold(1.0, f64::max);
    Ok(format!("6 maps, C = {:.4} ; isotopy on 3 families", c))
}

fn random_series<R: Rng>(rng: &mut R, min_exp: i64) -> PuiseuxSeries {
    let dens = [1, 2, 3, 4, 6];
    let terms = (0..rng.gen_range(0..5))
        .map(|_| {
            let d = dens[rng.gen_range(0..dens.len())];
            let e = q(rng.gen_range(min_exp * d..=5 * d), d);
            let c = q(rng.gen_range(-9..=9), rng.gen_range(1..=4));
            (e, c)
        })
        .collect();
    PuiseuxSeries::from_terms(terms, qi(12))
}

fn criterion_6() -> Outcome {
    let mut rng = fuzz::rng(6);
    let zero = PuiseuxSeries::zero(qi(12));
    let one = PuiseuxSeries::constant(qi(1), qi(12));
    for i in 0..1000 {
        let (a, b, c) = (random_series(&mut rng, 0), random_series(&mut rng, 0), random_series(&mut rng, 0));
        let checks = [
            ("a+b=b+a", a.add(&b) == b.add(&a)),
            ("(a+b)+c=a+(b+c)", a.add(&b).add(&c) == a.add(&b.add(&c))),
            ("ab=ba", a.mul(&b) == b.mul(&a)),
            // Products may certify different truncation orders; compare the known parts.
            ("(ab)c=a(bc)", a.mul(&b).mul(&c).eq_mod_truncation(&a.mul(&b.mul(&c)))),
            ("a(b+c)=ab+ac", a.mul(&b.add(&c)).eq_mod_truncation(&a.mul(&b).add(&a.mul(&c)))),
            ("a+0=a", a.add(&zero) == a),
            ("a-a=0", a.sub(&a) == zero),
            ("a*1=a", a.mul(&one) == a),
        ];
        if let Some((law, _)) = checks.iter().find(|x| !x.1) {
            return Err(format!("pair {}: {} fails for {} and {}", i, law, a, b));
        }
    }
    let ts: Vec<f64> = (14..=24).map(|k| 0.5f64.powi(k)).collect();
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let a = ArcGerm::new(random_series(&mut rng, 1), random_series(&mut rng, 1)).unwrap();
        // Difference with a fixed leading exponent and a gap of at least 1/2 above it.
        let e = [qi(1), q(3, 2), qi(2), q(5, 2), qi(3)][rng.gen_range(0..5)].clone();
        let lead = |r: &mut ChaCha8Rng| q(r.gen_range(1..=9) * if r.gen_bool(0.5) { 1 } else { -1 }, r.gen_range(1..=4));
        let tail = |r: &mut ChaCha8Rng| q(r.gen_range(-9..=9), r.gen_range(1..=4));
        let next = &e + q(1, 2);
        let dx = PuiseuxSeries::from_terms(vec![(e.clone(), lead(&mut rng)), (next.clone(), tail(&mut rng))], qi(12));
        let dy = PuiseuxSeries::from_terms(vec![(e.clone(), tail(&mut rng)), (next.clone(), tail(&mut rng))], qi(12));
        let b = ArcGerm::new(a.x.add(&dx), a.y.add(&dy)).unwrap();
        let sym = tord(&a, &b).map_err(|err| err.to_string())?;
        let sym = sym.exponent().cloned().ok_or_else(|| format!("arc pair {}: infinite tord", i))?;
        let ds: Vec<f64> = ts.iter().map(|&t| geom::norm(b.eval_rel(&a, t))).collect();
        let fit = geom::loglog_slope(&ts, &ds);
        let dev = (fit - lipgerm::puiseux::qf(&sym)).abs();
        worst = worst.max(dev);
        ensure(dev <= 0.05, || format!("arc pair {}: tord {} vs fitted {:.4}", i, sym, fit))?;
    }
    Ok(format!("1000 ring-axiom cases exact ; 200 tord fits, worst deviation {:.4}", worst))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..n {
            let mut v = p.clone();
            v.insert(k, n - 1);
            out.push(v);
        }
    }
    out
}

fn brute_isomorphic(a: &ExtendedTree, b: &ExtendedTree, perms: &[Vec<usize>]) -> bool {
    if a.labels.len() != b.labels.len() || a.edges.len() != b.edges.len() {
        return false;
    }
    let eb: BTreeSet<(usize, usize)> = b.edges.iter().map(|&(x, y)| (x.min(y), x.max(y))).collect();
    perms.iter().any(|p| {
        (0..a.labels.len()).all(|i| a.labels[i] == b.labels[p[i]])
            && a.edges.iter().all(|&(x, y)| eb.contains(&(p[x].min(p[y]), p[x].max(p[y]))))
    })
}

fn degrees(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    let mut d = vec![0; n];
    for &(x, y) in edges {
        d[x] += 1;
        d[y] += 1;
    }
    d.sort();
    d
}

/// All tree shapes with up to `max` vertices, grown leaf by leaf and
/// deduplicated by brute force.
fn all_shapes(max: usize, perms: &[Vec<Vec<usize>>]) -> Vec<Vec<Vec<(usize, usize)>>> {
    let mut out: Vec<Vec<Vec<(usize, usize)>>> = vec![vec![], vec![vec![]]];
    for n in 2..=max {
        let mut reps: Vec<Vec<(usize, usize)>> = Vec::new();
        for prev in &out[n - 1] {
            for v in 0..n - 1 {
                let mut e = prev.clone();
                e.push((v, n - 1));
                let plain = |edges: &Vec<(usize, usize)>| ExtendedTree { labels: vec![qi(0); n], edges: edges.clone() };
                let dup = reps.iter().any(|r| {
                    degrees(n, r) == degrees(n, &e) && brute_isomorphic(&plain(&e), &plain(r), &perms[n])
                });
                if !dup {
                    reps.push(e);
                }
            }
        }
        out.push(reps);
    }
    out
}

fn criterion_7() -> Outcome {
    let mut rng = fuzz::rng(7);
    let perms: Vec<Vec<Vec<usize>>> = (0..=8).map(permutations).collect();
    let all = all_shapes(8, &perms);
    let counts: Vec<usize> = all.iter().map(|s| s.len()).collect();
    ensure(counts == vec![0, 1, 1, 1, 2, 3, 6, 11, 23], || format!("shape counts {:?}", counts))?;
    let label = |r: &mut ChaCha8Rng| [qi(2), qi(2), qi(3), q(5, 2), qi(4)][r.gen_range(0..5)].clone();
    let mut positives = 0;
    let mut cases = 0;
    // Every shape appears, then random pairs fill up to 1000 cases.
    let mut plan: Vec<(usize, usize)> = (1..=8).flat_map(|n| (0..all[n].len()).map(move |k| (n, k))).collect();
    while plan.len() < 1000 {
        let n = rng.gen_range(1..=8);
        plan.push((n, rng.gen_range(0..all[n].len())));
    }
    for (n, k) in plan {
        let a = ExtendedTree { labels: (0..n).map(|_| label(&mut rng)).collect(), edges: all[n][k].clone() };
        let b = match rng.gen_range(0..3) {
            0 => {
                // Relabelled copy.
                let p = &perms[n][rng.gen_range(0..perms[n].len())];
                let mut labels = vec![qi(0); n];
                for i in 0..n {
                    labels[p[i]] = a.labels[i].clone();
                }
                ExtendedTree { labels, edges: a.edges.iter().map(|&(x, y)| (p[x], p[y])).collect() }
            }
            1 => ExtendedTree { labels: (0..n).map(|_| label(&mut rng)).collect(), edges: a.edges.clone() },
            _ => ExtendedTree {
                labels: (0..n).map(|_| label(&mut rng)).collect(),
                edges: all[n][rng.gen_range(0..all[n].len())].clone(),
            },
        };
        let brute = brute_isomorphic(&a, &b, &perms[n]);
        let fast = tree_isomorphic(&a, &b);
        ensure(brute == fast, || format!("{} vs {}: brute {} canonical {}", a, b, brute, fast))?;
        positives += brute as usize;
        cases += 1;
    }
    Ok(format!("{} cases agree ({} isomorphic)", cases, positives))
}

fn criterion_8() -> Outcome {
    let mut rng = fuzz::rng(8);
    let deltas = [q(1, 2), qi(1), qi(2)];
    let grid: Vec<f64> = (8..=20).map(|k| 0.5f64.powi(k)).collect();
    for i in 0..50 {
        let d = deltas[i % 3].clone();
        let g = fuzz::pinch_germ(&mut rng, &d);
        let v = is_lne(&g).map_err(|e| e.to_string())?;
        ensure(v.status == LneStatus::NotLne, || format!("pinch {}: {}", i, v.status))?;
        let w = v.witness.ok_or_else(|| format!("pinch {}: no witness", i))?;
        let tips = matches!(w.kind, WitnessKind::Vertices { a: 0, b: 2 } | WitnessKind::Vertices { a: 2, b: 0 });
        ensure(tips && w.gap() == d, || format!("pinch {}: witness {:?} gap {}", i, w.kind, w.gap()))?;
        let need = 2f64.powf(0.8 * lipgerm::puiseux::qf(&d));
        for pair in grid.windows(2) {
            let growth = witness_ratio(&g, &w, pair[1]) / witness_ratio(&g, &w, pair[0]);
            ensure(growth >= need, || format!("pinch {}: growth {:.4} < {:.4} at t = {:e}", i, growth, need, pair[1]))?;
        }
    }
    for i in 0..50 {
        let g = fuzz::lne_germ(&mut rng);
        let v = is_lne(&g).map_err(|e| e.to_string())?;
        ensure(v.status == LneStatus::Lne && v.constants_flat(), || format!("LNE germ {}: {} flat {}", i, v.status, v.constants_flat()))?;
    }
    Ok("50 pinches NotLNE with growing witnesses ; 50 LNE germs flat".into())
}

fn main() {
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    results.push((1, "counterexample reproduction", criterion_1()));
    let start = Instant::now();
    let batch = random_batch();
    let elapsed = start.elapsed();
    results.push((2, "classification identities", criterion_2(&batch, elapsed)));
    results.push((3, "move invariance", criterion_3(&batch)));
    results.push((4, "triangulation contract", criterion_4()));
    results.push((5, "map verification", criterion_5()));
    results.push((6, "puiseux and tord oracles", criterion_6()));
    results.push((7, "tree isomorphism", criterion_7()));
    results.push((8, "LNE decision", criterion_8()));
    let mut failed = 0;
    for (k, name, r) in &results {
        match r {
            Ok(detail) => println!("criterion {} {}: PASS ({})", k, name, detail),
            Err(why) => {
                failed += 1;
                println!("criterion {} {}: FAIL ({})", k, name, why);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
