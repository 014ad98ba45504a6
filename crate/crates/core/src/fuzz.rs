//! Seeded generators for random LNE germs, NotLNE pinches and simple
//! rational chains.

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::germ::{validated_grid, ArcGerm, Component, GridConfig, PolygonalGerm};
use crate::hull::RationalPoints;
use crate::metric::{is_lne, LneStatus};
use crate::puiseux::{q, q_from_f64, qi, PuiseuxSeries, Q, DEFAULT_TRUNCATION};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Denominator of generated coordinates.
const DEN: i64 = 16;
const MAX_TRIES: usize = 1000;

fn monomial_arc(a: &Q, b: &Q, e: &Q) -> ArcGerm {
    let k = qi(DEFAULT_TRUNCATION);
    ArcGerm::raw(PuiseuxSeries::monomial(a.clone(), e.clone(), k.clone()), PuiseuxSeries::monomial(b.clone(), e.clone(), k))
}

/// Vertices of a star-shaped polygon around the origin, counterclockwise,
/// with no exactly collinear triple.
pub fn star_polygon<R: Rng>(rng: &mut R, n: usize) -> Vec<(Q, Q)> {
    loop {
        let mut angles: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let gap = (0..n).map(|i| {
            let next = if i + 1 < n { angles[i + 1] } else { angles[0] + 2.0 * PI };
            next - angles[i]
        });
        if gap.clone().any(|g| g < 0.25 || g > PI * 0.9) {
            continue;
        }
        let pts: Vec<(Q, Q)> = angles
            .iter()
            .map(|&a| {
                let r = rng.gen_range(1.0..3.0);
                (q_from_f64(r * a.cos(), DEN), q_from_f64(r * a.sin(), DEN))
            })
            .collect();
        let rp = RationalPoints(pts.clone());
        let collinear = (0..n).any(|i| (i + 1..n).any(|j| (j + 1..n).any(|k| rp.cross(i, j, k) == Q::from_integer(0.into()))));
        if !collinear {
            return pts;
        }
    }
}

/// Random simple chain with exact rational vertices and no collinear triple.
pub fn random_simple_chain<R: Rng>(rng: &mut R, n: usize, closed: bool) -> RationalPoints {
    let mut pts = star_polygon(rng, n);
    if !closed {
        let k = rng.gen_range(0..n);
        pts.rotate_left(k);
    }
    RationalPoints(pts)
}

fn accept(g: PolygonalGerm) -> Option<PolygonalGerm> {
    validated_grid(&g, &GridConfig::default()).ok()?;
    match is_lne(&g).ok()?.status {
        LneStatus::Lne => Some(g),
        _ => None,
    }
}

/// Closed polygon of `n` vertex arcs: a star polygon at scale `t^β` with some
/// vertices split by a `t^(β+1)` offset toward their successor.
fn random_closed_arcs<R: Rng>(rng: &mut R, n: usize) -> Vec<ArcGerm> {
    let beta = [qi(1), qi(1), q(3, 2), qi(2)][rng.gen_range(0..4)].clone();
    let splits = if n >= 4 { rng.gen_range(0..=(n - 3).min(n / 3)) } else { 0 };
    let base = star_polygon(rng, n - splits);
    let mut split_at: Vec<bool> = vec![false; base.len()];
    let mut left = splits;
    while left > 0 {
        let i = rng.gen_range(0..base.len());
        if !split_at[i] {
            split_at[i] = true;
            left -= 1;
        }
    }
    let fine = &beta + qi(1);
    let mut arcs = Vec::new();
    for (i, (a, b)) in base.iter().enumerate() {
        let v = monomial_arc(a, b, &beta);
        arcs.push(v.clone());
        if split_at[i] {
            let (na, nb) = &base[(i + 1) % base.len()];
            let d = [crate::puiseux::qf(&(na - a)), crate::puiseux::qf(&(nb - b))];
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let phi = sign * rng.gen_range(0.3..0.9);
            let w = crate::geom::rotate(d, phi);
            let offset = monomial_arc(&q_from_f64(w[0], DEN), &q_from_f64(w[1], DEN), &fine);
            arcs.push(v.add(&offset));
        }
    }
    arcs
}

/// Random closed LNE germ with `n` vertices.
pub fn random_lne_closed<R: Rng>(rng: &mut R, n: usize) -> PolygonalGerm {
    for _ in 0..MAX_TRIES {
        let arcs = random_closed_arcs(rng, n);
        if let Some(g) = PolygonalGerm::chain(arcs, true).ok().and_then(accept) {
            return g;
        }
    }
    panic!("no LNE closed germ with {} vertices found", n);
}

/// Random open LNE chain with `n` vertices: a closed polygon with one edge omitted.
pub fn random_lne_open<R: Rng>(rng: &mut R, n: usize) -> PolygonalGerm {
    for _ in 0..MAX_TRIES {
        let mut arcs = random_closed_arcs(rng, n);
        let k = rng.gen_range(0..n);
        arcs.rotate_left(k);
        if let Some(g) = PolygonalGerm::chain(arcs, false).ok().and_then(accept) {
            return g;
        }
    }
    panic!("no LNE open chain with {} vertices found", n);
}

/// Pinch `(s t, c t^(1+Δ)), 0, (s t, -c t^(1+Δ))`: NotLNE with gap `Δ`.
pub fn pinch_germ<R: Rng>(rng: &mut R, delta: &Q) -> PolygonalGerm {
    let s = q(rng.gen_range(4..=32), 8);
    let c = q(rng.gen_range(4..=32), 8);
    let e = qi(1) + delta;
    let leg = |sign: i64| {
        let k = qi(DEFAULT_TRUNCATION);
        ArcGerm::raw(PuiseuxSeries::monomial(s.clone(), qi(1), k.clone()), PuiseuxSeries::monomial(&c * qi(sign), e.clone(), k))
    };
    let origin = ArcGerm::origin(qi(DEFAULT_TRUNCATION));
    PolygonalGerm::new(vec![Component::new(vec![leg(1), origin, leg(-1)], false)]).expect("pinch germ")
}

/// Constructed LNE germs: a cone wedge or a random closed polygon.
pub fn lne_germ<R: Rng>(rng: &mut R) -> PolygonalGerm {
    if rng.gen_bool(0.5) {
        let s = q(rng.gen_range(4..=32), 8);
        let c = q(rng.gen_range(4..=32), 8);
        let origin = ArcGerm::origin(qi(DEFAULT_TRUNCATION));
        PolygonalGerm::chain(vec![monomial_arc(&s, &c, &qi(1)), origin, monomial_arc(&s, &-c.clone(), &qi(1))], false)
            .expect("wedge germ")
    } else {
        let n = rng.gen_range(3..=6);
        random_lne_closed(rng, n)
    }
}
