//! Convex hulls and chain-constrained triangulations under exact predicates.
//!
//! Everything is written against [`PointSet`], which only exposes an
//! orientation sign and a lexicographic order. Rational points use exact
//! arithmetic; germ vertices use the eventual sign of the symbolic cross
//! product, so a triangulation of a germ link is the same for all small `t`.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::germ::ArcGerm;
use crate::puiseux::{qi, Eventual, PuiseuxSeries, Q};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HullError {
    #[error("AllCollinear")]
    AllCollinear,
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("points {0} and {1} coincide")]
    DuplicatePoint(usize, usize),
    #[error("CollinearTriple: points {0}, {1}, {2}")]
    CollinearTriple(usize, usize, usize),
    #[error("SelfIntersectingChain: edges {0:?} and {1:?} cross")]
    SelfIntersectingChain((usize, usize), (usize, usize)),
    #[error("NotFound: no triangle with two consecutive chain edges")]
    NotFound,
    #[error("edge set {0} does not triangulate the hull")]
    InvalidEdgeSet(String),
}

/// Exact planar predicates over indexed points.
pub trait PointSet {
    fn len(&self) -> usize;
    /// Sign of the orientation of `(i, j, k)`: `1` counterclockwise, `-1` clockwise, `0` collinear.
    fn orient(&self, i: usize, j: usize, k: usize) -> i32;
    /// Strict lexicographic order on `(x, y)`.
    fn lex_less(&self, i: usize, j: usize) -> bool;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Points with rational coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalPoints(pub Vec<(Q, Q)>);

impl RationalPoints {
    pub fn from_ints(pts: &[(i64, i64)]) -> Self {
        RationalPoints(pts.iter().map(|&(x, y)| (qi(x), qi(y))).collect())
    }

    pub fn cross(&self, i: usize, j: usize, k: usize) -> Q {
        let (a, b, c) = (&self.0[i], &self.0[j], &self.0[k]);
        (&b.0 - &a.0) * (&c.1 - &a.1) - (&b.1 - &a.1) * (&c.0 - &a.0)
    }
}

impl PointSet for RationalPoints {
    fn len(&self) -> usize {
        self.0.len()
    }

    fn orient(&self, i: usize, j: usize, k: usize) -> i32 {
        let c = self.cross(i, j, k);
        if c.is_zero() {
            0
        } else if c.is_positive() {
            1
        } else {
            -1
        }
    }

    fn lex_less(&self, i: usize, j: usize) -> bool {
        self.0[i] < self.0[j]
    }
}

/// Germ vertices ordered by eventual signs.
pub struct GermPoints {
    pub arcs: Vec<ArcGerm>,
}

impl GermPoints {
    pub fn new(arcs: Vec<ArcGerm>) -> Self {
        GermPoints { arcs }
    }

    pub fn cross(&self, i: usize, j: usize, k: usize) -> PuiseuxSeries {
        let a = &self.arcs[i];
        self.arcs[j].sub(a).cross(&self.arcs[k].sub(a))
    }
}

fn sign(e: Eventual) -> i32 {
    match e {
        Eventual::Greater => 1,
        Eventual::Less => -1,
        _ => 0,
    }
}

impl PointSet for GermPoints {
    fn len(&self) -> usize {
        self.arcs.len()
    }

    fn orient(&self, i: usize, j: usize, k: usize) -> i32 {
        sign(self.cross(i, j, k).sign_eventual())
    }

    fn lex_less(&self, i: usize, j: usize) -> bool {
        let d = self.arcs[j].sub(&self.arcs[i]);
        match d.x.sign_eventual() {
            Eventual::Greater => true,
            Eventual::Less => false,
            _ => d.y.sign_eventual() == Eventual::Greater,
        }
    }
}

fn sorted_indices<P: PointSet>(p: &P) -> Result<Vec<usize>, HullError> {
    let mut idx: Vec<usize> = (0..p.len()).collect();
    idx.sort_by(|&a, &b| {
        if p.lex_less(a, b) {
            std::cmp::Ordering::Less
        } else if p.lex_less(b, a) {
            std::cmp::Ordering::Greater
        } else {
            std::cmp::Ordering::Equal
        }
    });
    for w in idx.windows(2) {
        if !p.lex_less(w[0], w[1]) {
            return Err(HullError::DuplicatePoint(w[0].min(w[1]), w[0].max(w[1])));
        }
    }
    Ok(idx)
}

/// Counterclockwise strict hull (collinear boundary points dropped), Andrew's monotone chain.
pub fn convex_hull<P: PointSet>(p: &P) -> Result<Vec<usize>, HullError> {
    if p.len() < 3 {
        return Err(HullError::TooFewPoints(p.len()));
    }
    let idx = sorted_indices(p)?;
    let half = |seq: &mut dyn Iterator<Item = usize>| {
        let mut h: Vec<usize> = Vec::new();
        for i in seq {
            while h.len() >= 2 && p.orient(h[h.len() - 2], h[h.len() - 1], i) <= 0 {
                h.pop();
            }
            h.push(i);
        }
        h
    };
    let mut lower = half(&mut idx.iter().copied());
    let mut upper = half(&mut idx.iter().rev().copied());
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() < 3 {
        return Err(HullError::AllCollinear);
    }
    Ok(lower)
}

/// Hull triangulation containing every chain edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainTriangulation {
    pub n: usize,
    pub closed: bool,
    /// The index pairs `I`, each stored as `(min, max)`.
    pub edges: BTreeSet<(usize, usize)>,
    pub triangles: Vec<[usize; 3]>,
    /// Chain edges, in chain order.
    pub highlighted: Vec<(usize, usize)>,
    /// Hull vertices, counterclockwise.
    pub hull: Vec<usize>,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn chain_edges(n: usize, closed: bool) -> Vec<(usize, usize)> {
    let mut e: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    if closed && n >= 3 {
        e.push((n - 1, 0));
    }
    e
}

/// Proper crossing of segments with four distinct endpoints, no collinear triples.
fn crosses<P: PointSet>(p: &P, a: usize, b: usize, c: usize, d: usize) -> bool {
    if a == c || a == d || b == c || b == d {
        return false;
    }
    p.orient(a, b, c) * p.orient(a, b, d) < 0 && p.orient(c, d, a) * p.orient(c, d, b) < 0
}

fn check_general_position<P: PointSet>(p: &P) -> Result<(), HullError> {
    let n = p.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if p.orient(i, j, k) == 0 {
                    return Err(HullError::CollinearTriple(i, j, k));
                }
            }
        }
    }
    Ok(())
}

pub fn chain_hull_triangulation<P: PointSet>(p: &P, closed: bool) -> Result<ChainTriangulation, HullError> {
    let n = p.len();
    if n < 3 {
        return Err(HullError::TooFewPoints(n));
    }
    sorted_indices(p)?;
    check_general_position(p)?;
    let highlighted = chain_edges(n, closed);
    for (x, &(a, b)) in highlighted.iter().enumerate() {
        for &(c, d) in &highlighted[x + 1..] {
            if crosses(p, a, b, c, d) {
                return Err(HullError::SelfIntersectingChain((a, b), (c, d)));
            }
        }
    }
    let mut edges: BTreeSet<(usize, usize)> = highlighted.iter().map(|&(a, b)| key(a, b)).collect();
    for i in 0..n {
        for j in i + 1..n {
            if edges.contains(&(i, j)) {
                continue;
            }
            if edges.iter().all(|&(c, d)| !crosses(p, i, j, c, d)) {
                edges.insert((i, j));
            }
        }
    }
    finish(p, closed, edges, highlighted)
}

/// Builds the triangulation structure from a prescribed edge set `I`.
pub fn triangulation_from_edges<P: PointSet>(
    p: &P,
    closed: bool,
    edges: &[(usize, usize)],
) -> Result<ChainTriangulation, HullError> {
    check_general_position(p)?;
    let set: BTreeSet<(usize, usize)> = edges.iter().map(|&(a, b)| key(a, b)).collect();
    for &(a, b) in &set {
        for &(c, d) in &set {
            if crosses(p, a, b, c, d) {
                return Err(HullError::InvalidEdgeSet(format!("{:?} crosses {:?}", (a, b), (c, d))));
            }
        }
    }
    let highlighted = chain_edges(p.len(), closed);
    finish(p, closed, set, highlighted)
}

fn finish<P: PointSet>(
    p: &P,
    closed: bool,
    edges: BTreeSet<(usize, usize)>,
    highlighted: Vec<(usize, usize)>,
) -> Result<ChainTriangulation, HullError> {
    let n = p.len();
    let hull = convex_hull(p)?;
    let mut triangles = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if !edges.contains(&(i, j)) {
                continue;
            }
            for k in j + 1..n {
                if !edges.contains(&(i, k)) || !edges.contains(&(j, k)) {
                    continue;
                }
                let o = p.orient(i, j, k);
                let empty = (0..n)
                    .filter(|&m| m != i && m != j && m != k)
                    .all(|m| !(p.orient(i, j, m) == o && p.orient(j, k, m) == o && p.orient(k, i, m) == o));
                if empty {
                    triangles.push([i, j, k]);
                }
            }
        }
    }
    let expected = 2 * n - hull.len() - 2;
    if triangles.len() != expected {
        return Err(HullError::InvalidEdgeSet(format!("{} triangles, expected {}", triangles.len(), expected)));
    }
    Ok(ChainTriangulation { n, closed, edges, triangles, highlighted, hull })
}

/// A triangle with exactly two highlighted edges, and its middle chain vertex.
pub fn find_double_highlighted_triangle(tri: &ChainTriangulation) -> Result<(usize, usize), HullError> {
    let hl: BTreeSet<(usize, usize)> = tri.highlighted.iter().map(|&(a, b)| key(a, b)).collect();
    for (ti, t) in tri.triangles.iter().enumerate() {
        let sides = [key(t[0], t[1]), key(t[1], t[2]), key(t[0], t[2])];
        let lit: Vec<(usize, usize)> = sides.iter().copied().filter(|s| hl.contains(s)).collect();
        if lit.len() == 2 {
            let (a, b) = (lit[0], lit[1]);
            let middle = if a.0 == b.0 || a.0 == b.1 { a.0 } else { a.1 };
            return Ok((ti, middle));
        }
    }
    Err(HullError::NotFound)
}

/// Independent exact validation of a triangulation of rational points.
pub fn check_triangulation(p: &RationalPoints, tri: &ChainTriangulation) -> Result<(), String> {
    let hull_area: Q = {
        let h = &tri.hull;
        let mut s = Q::zero();
        for i in 1..h.len() - 1 {
            s += p.cross(h[0], h[i], h[i + 1]);
        }
        s
    };
    let tri_area: Q = tri.triangles.iter().map(|t| p.cross(t[0], t[1], t[2]).abs()).sum();
    if tri_area != hull_area {
        return Err(format!("triangle area {} differs from hull area {}", tri_area, hull_area));
    }
    for (x, s) in tri.triangles.iter().enumerate() {
        for u in &tri.triangles[x + 1..] {
            if !separated(p, s, u) {
                return Err(format!("triangles {:?} and {:?} overlap", s, u));
            }
        }
    }
    for &(a, b) in &tri.highlighted {
        if !tri.edges.contains(&key(a, b)) {
            return Err(format!("chain edge {:?} missing", (a, b)));
        }
        let in_triangle = tri.triangles.iter().any(|t| t.contains(&a) && t.contains(&b));
        if !in_triangle {
            return Err(format!("chain edge {:?} is not a triangle side", (a, b)));
        }
    }
    if tri.triangles.len() != 2 * tri.n - tri.hull.len() - 2 {
        return Err("triangle count differs from 2n - k - 2".into());
    }
    Ok(())
}

/// Separating-axis test: the interiors of two triangles are disjoint.
fn separated(p: &RationalPoints, s: &[usize; 3], u: &[usize; 3]) -> bool {
    let sides = |t: &[usize; 3]| [(t[0], t[1], t[2]), (t[1], t[2], t[0]), (t[2], t[0], t[1])];
    for (tri, other) in [(s, u), (u, s)] {
        for (a, b, c) in sides(tri) {
            let own = p.orient(a, b, c);
            if other.iter().all(|&m| p.orient(a, b, m) * own <= 0) {
                return true;
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hull_examples() {
        let sq = RationalPoints::from_ints(&[(0, 0), (1, 0), (1, 1), (0, 1)]);
        assert_eq!(convex_hull(&sq).unwrap(), vec![0, 1, 2, 3]);
        let five = RationalPoints::from_ints(&[(0, 0), (4, 0), (4, 4), (0, 4), (1, 2)]);
        assert_eq!(convex_hull(&five).unwrap().len(), 4);
        let line = RationalPoints::from_ints(&[(0, 0), (1, 1), (2, 2)]);
        assert_eq!(convex_hull(&line), Err(HullError::AllCollinear));
    }

    /// Brute-force oracle: `i` is a hull vertex iff some line through it has all others strictly on one side.
    fn brute_hull(p: &RationalPoints) -> BTreeSet<usize> {
        let n = p.len();
        (0..n)
            .filter(|&i| {
                (0..n).filter(|&j| j != i).any(|j| {
                    (0..n).filter(|&k| k != i && k != j).all(|k| p.orient(i, j, k) > 0)
                        || (0..n).filter(|&k| k != i && k != j).all(|k| p.orient(i, j, k) < 0)
                })
            })
            .collect()
    }

    #[test]
    fn small_triangulations() {
        let three = RationalPoints::from_ints(&[(0, 0), (2, 0), (1, 3)]);
        let t = chain_hull_triangulation(&three, false).unwrap();
        assert_eq!(t.triangles, vec![[0, 1, 2]]);
        let sq = RationalPoints::from_ints(&[(0, 0), (2, 0), (2, 2), (0, 2)]);
        let t = chain_hull_triangulation(&sq, true).unwrap();
        assert_eq!(t.triangles.len(), 2);
        assert_eq!(t.edges.len(), 5);
        check_triangulation(&sq, &t).unwrap();
        let (ti, m) = find_double_highlighted_triangle(&t).unwrap();
        assert!(t.triangles[ti].contains(&m));
    }

    #[test]
    fn chain_errors() {
        let col = RationalPoints::from_ints(&[(0, 0), (1, 1), (2, 2), (0, 3)]);
        assert!(matches!(chain_hull_triangulation(&col, false), Err(HullError::CollinearTriple(..))));
        let bow = RationalPoints::from_ints(&[(0, 0), (2, 2), (2, 0), (0, 3)]);
        assert!(matches!(chain_hull_triangulation(&bow, true), Err(HullError::SelfIntersectingChain(..))));
    }

    #[test]
    fn six_gon_edge_sets() {
        // Point sets realizing the two 6-vertex triangulations, 1-based pairs as printed.
        let open = RationalPoints::from_ints(&[(10, 11), (4, 12), (1, 1), (10, 0), (2, 4), (8, 9)]);
        let open_i = [(1, 2), (1, 4), (1, 6), (2, 3), (2, 5), (2, 6), (3, 4), (3, 5), (4, 5), (4, 6), (5, 6)];
        let closed = RationalPoints::from_ints(&[(11, 2), (9, 7), (9, 11), (2, 9), (4, 7), (8, 2)]);
        let closed_i = [(1, 2), (1, 3), (1, 5), (1, 6), (2, 3), (2, 4), (2, 5), (3, 4), (4, 5), (4, 6), (5, 6)];
        for (p, i, c) in [(open, &open_i, false), (closed, &closed_i, true)] {
            let e: Vec<(usize, usize)> = i.iter().map(|&(a, b)| (a - 1, b - 1)).collect();
            let t = triangulation_from_edges(&p, c, &e).unwrap();
            check_triangulation(&p, &t).unwrap();
            assert_eq!(t.triangles.len(), 2 * 6 - 4 - 2);
            let (ti, m) = find_double_highlighted_triangle(&t).unwrap();
            let tr = t.triangles[ti];
            let prev = if m == 0 { 5 } else { m - 1 };
            assert!(tr.contains(&prev) && tr.contains(&((m + 1) % 6)));
        }
    }

    #[test]
    fn germ_points_use_eventual_signs() {
        let arc = |x: &str, y: &str| ArcGerm::parse(x, y).unwrap();
        let g = GermPoints::new(vec![arc("0", "0"), arc("t", "t^2"), arc("2*t", "0"), arc("t", "-t")]);
        assert_eq!(g.orient(0, 2, 1), 1);
        assert_eq!(convex_hull(&g).unwrap().len(), 4);
        let t = chain_hull_triangulation(&g, true).unwrap();
        assert_eq!(t.triangles.len(), 2 * 4 - 4 - 2);
    }

    fn points(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<(i64, i64)>> {
        n.prop_flat_map(|k| proptest::collection::vec((-20i64..=20, -20i64..=20), k))
    }

    proptest! {
        #[test]
        fn hull_matches_brute_force(pts in points(3..=9)) {
            let p = RationalPoints::from_ints(&pts);
            if let Ok(h) = convex_hull(&p) {
                prop_assert_eq!(h.iter().copied().collect::<BTreeSet<_>>(), brute_hull(&p));
                for w in 0..h.len() {
                    prop_assert_eq!(p.orient(h[w], h[(w + 1) % h.len()], h[(w + 2) % h.len()]), 1);
                }
            }
        }

        #[test]
        fn triangulations_are_valid(pts in points(4..=8), closed in any::<bool>()) {
            let p = RationalPoints::from_ints(&pts);
            if let Ok(t) = chain_hull_triangulation(&p, closed) {
                prop_assert!(check_triangulation(&p, &t).is_ok());
                prop_assert!(find_double_highlighted_triangle(&t).is_ok());
            }
        }
    }
}
