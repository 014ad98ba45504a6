//! Plane-link arrangements, face area exponents, extended canonical trees and
//! the equivalence decision.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::geom::{self, P2};
use crate::germ::{validated_grid, ArcGerm, GermError, GridConfig, LinkGraph, PolygonalGerm};
use crate::metric::{edge_exponents, is_lne, LneStatus, MetricError};
use crate::puiseux::{q, qf, qi, Eventual, PuiseuxSeries, Q};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinkTopoError {
    #[error("UnstableCombinatorics: {0}")]
    UnstableCombinatorics(String),
    #[error("ExponentUnstable: face {face} symbolic {symbolic} vs fitted {fitted:.3}")]
    ExponentUnstable { face: usize, symbolic: String, fitted: f64 },
    #[error("HasOpenComponents: use the region graph instead")]
    HasOpenComponents,
    #[error("NotDisjoint: link components share vertices")]
    NotDisjoint,
    #[error("EpsilonTooLarge: {0}")]
    EpsilonTooLarge(String),
    #[error("NotLNEInput: {0}")]
    NotLneInput(String),
    #[error(transparent)]
    Germ(#[from] GermError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Half-edge `2k` runs `a → b` along link edge `k`; `2k + 1` runs back.
fn half_edge_ends(graph: &LinkGraph, h: usize) -> (usize, usize) {
    let e = &graph.edges[h / 2];
    if h % 2 == 0 {
        (e.a, e.b)
    } else {
        (e.b, e.a)
    }
}

/// Face structure of the plane link at one `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arrangement {
    /// Boundary cycles as half-edge lists, each rotated to start at its smallest id.
    pub cycles: Vec<Vec<usize>>,
    /// Cycles bounding a face from outside (counterclockwise, positive area).
    pub bounded: Vec<usize>,
    /// For every other cycle: the bounded cycle whose face contains it, or `None` for the outer face.
    pub holes: BTreeMap<usize, Option<usize>>,
}

fn canonical_cycle(mut c: Vec<usize>) -> Vec<usize> {
    let k = (0..c.len()).min_by_key(|&i| c[i]).unwrap_or(0);
    c.rotate_left(k);
    c
}

fn cycle_nodes(graph: &LinkGraph, cycle: &[usize]) -> Vec<usize> {
    cycle.iter().map(|&h| half_edge_ends(graph, h).0).collect()
}

fn cycle_area_at(graph: &LinkGraph, cycle: &[usize], t: f64) -> f64 {
    let nodes = cycle_nodes(graph, cycle);
    let base = &graph.nodes[nodes[0]];
    let pts: Vec<P2> = nodes.iter().map(|&n| graph.nodes[n].eval_rel(base, t)).collect();
    geom::signed_area(&pts)
}

/// Signed area of a boundary cycle as a Puiseux series.
fn cycle_area_series(graph: &LinkGraph, cycle: &[usize]) -> PuiseuxSeries {
    let nodes = cycle_nodes(graph, cycle);
    let base = &graph.nodes[nodes[0]];
    let rel: Vec<ArcGerm> = nodes.iter().map(|&n| graph.nodes[n].sub(base)).collect();
    let mut s = PuiseuxSeries::zero(base.truncation());
    for i in 0..rel.len() {
        s = s.add(&rel[i].cross(&rel[(i + 1) % rel.len()]));
    }
    s.scale(&q(1, 2))
}

/// Faces of the plane link at `t`, by half-edge traversal.
pub fn arrangement(g: &PolygonalGerm, t: f64) -> Result<Arrangement, LinkTopoError> {
    let graph = g.link_graph();
    arrangement_of(&graph, t)
}

fn arrangement_of(graph: &LinkGraph, t: f64) -> Result<Arrangement, LinkTopoError> {
    let nh = graph.edges.len() * 2;
    // Outgoing half-edges at each node, counterclockwise by angle.
    let mut out: Vec<Vec<(f64, usize)>> = vec![Vec::new(); graph.nodes.len()];
    for h in 0..nh {
        let (u, v) = half_edge_ends(graph, h);
        let d = graph.nodes[v].eval_rel(&graph.nodes[u], t);
        out[u].push((d[1].atan2(d[0]), h));
    }
    for o in &mut out {
        o.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if o.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(LinkTopoError::UnstableCombinatorics(format!("overlapping edges at t = {:e}", t)));
        }
    }
    let twin = |h: usize| h ^ 1;
    // Next half-edge: first clockwise from the twin at the head node.
    let next = |h: usize| -> usize {
        let (_, v) = half_edge_ends(graph, h);
        let o = &out[v];
        let k = o.iter().position(|x| x.1 == twin(h)).unwrap();
        o[(k + o.len() - 1) % o.len()].1
    };
    let mut seen = vec![false; nh];
    let mut cycles = Vec::new();
    for s in 0..nh {
        if seen[s] {
            continue;
        }
        let mut c = Vec::new();
        let mut h = s;
        while !seen[h] {
            seen[h] = true;
            c.push(h);
            h = next(h);
        }
        cycles.push(canonical_cycle(c));
    }
    cycles.sort();
    // Orientation from the exact area series: tree-like cycles cancel to zero.
    let positive: Vec<bool> =
        cycles.iter().map(|c| cycle_area_series(graph, c).sign_eventual() == Eventual::Greater).collect();
    let areas: Vec<f64> = cycles.iter().map(|c| cycle_area_at(graph, c, t)).collect();
    let bounded: Vec<usize> = (0..cycles.len()).filter(|&i| positive[i]).collect();
    let pos = graph.eval_nodes(t);
    let mut holes = BTreeMap::new();
    for i in 0..cycles.len() {
        if positive[i] {
            continue;
        }
        let probe = pos[half_edge_ends(graph, cycles[i][0]).0];
        let mut best: Option<(f64, usize)> = None;
        for &b in &bounded {
            let poly: Vec<P2> = cycle_nodes(graph, &cycles[b]).iter().map(|&n| pos[n]).collect();
            let shares = cycle_nodes(graph, &cycles[b]).iter().any(|n| cycle_nodes(graph, &cycles[i]).contains(n));
            if !shares && geom::point_in_polygon(probe, &poly) && best.map_or(true, |(a, _)| areas[b] < a) {
                best = Some((areas[b], b));
            }
        }
        holes.insert(i, best.map(|x| x.1));
    }
    let comps = {
        let lab = graph.connectivity();
        lab.iter().copied().max().map_or(0, |m| m + 1)
    };
    let faces = bounded.len() + 1;
    let (v, e) = (graph.nodes.len() as i64, graph.edges.len() as i64);
    if v - e + faces as i64 != 1 + comps as i64 {
        return Err(LinkTopoError::UnstableCombinatorics(format!("Euler check fails at t = {:e}", t)));
    }
    Ok(Arrangement { cycles, bounded, holes })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Face {
    pub outer: bool,
    pub area_exponent: Q,
    /// Incident walls (link edge ids) with multiplicity, sorted.
    pub walls: Vec<usize>,
    /// Boundary cycles, outer one first for bounded faces.
    pub cycles: Vec<Vec<usize>>,
}

impl Face {
    /// Walls incident to this face from both sides.
    pub fn slits(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.walls.windows(2).filter(|w| w[0] == w[1]).map(|w| w[0]).collect();
        s.dedup();
        s
    }
}

/// Faces of the plane link with area exponents; the outer face comes first.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionGraph {
    pub faces: Vec<Face>,
    /// Node pairs of the walls, indexed like the link edges.
    pub walls: Vec<(usize, usize)>,
    /// Component of every wall.
    pub wall_component: Vec<usize>,
    /// Grid over which the combinatorics were checked.
    pub grid: Vec<f64>,
}

impl RegionGraph {
    /// Area exponents of faces carrying a slit, sorted.
    pub fn slit_face_exponents(&self) -> Vec<Q> {
        let mut v: Vec<Q> = self.faces.iter().filter(|f| !f.slits().is_empty()).map(|f| f.area_exponent.clone()).collect();
        v.sort();
        v
    }

    pub fn face_exponents(&self) -> Vec<Q> {
        let mut v: Vec<Q> = self.faces.iter().map(|f| f.area_exponent.clone()).collect();
        v.sort();
        v
    }
}

/// Exponent of the outer face: the disk term dominates.
pub const OUTER_FACE_EXPONENT: i64 = 2;
/// Agreement required between symbolic and fitted area exponents.
const FIT_TOLERANCE: f64 = 0.05;
/// Minimum number of grid points with stable combinatorics.
const MIN_STABLE: usize = 4;

/// Region graph over the validated grid, with exponent cross-checks.
pub fn region_graph(g: &PolygonalGerm) -> Result<RegionGraph, LinkTopoError> {
    let t_max = validated_grid(g, &GridConfig::default())?[0];
    region_graph_on(g, &GridConfig::grid_from(t_max.min(0.5f64.powi(6)), 11))
}

pub fn region_graph_on(g: &PolygonalGerm, grid: &[f64]) -> Result<RegionGraph, LinkTopoError> {
    let graph = g.link_graph();
    let arrs: Vec<Arrangement> = grid.iter().map(|&t| arrangement_of(&graph, t)).collect::<Result<_, _>>()?;
    let finest = arrs.last().ok_or_else(|| LinkTopoError::UnstableCombinatorics("empty grid".into()))?;
    // Keep the finest stretch of the grid with the same combinatorics.
    let start = (0..arrs.len()).rev().take_while(|&i| &arrs[i] == finest).last().unwrap_or(0);
    if arrs.len() - start < MIN_STABLE {
        return Err(LinkTopoError::UnstableCombinatorics(format!(
            "only {} grid points share the finest face structure",
            arrs.len() - start
        )));
    }
    let grid = grid[start..].to_vec();
    let arr = finest;
    let mut members: Vec<Vec<usize>> = Vec::new();
    members.push(arr.holes.iter().filter(|(_, c)| c.is_none()).map(|(&h, _)| h).collect());
    for &b in &arr.bounded {
        let mut m = vec![b];
        m.extend(arr.holes.iter().filter(|(_, c)| **c == Some(b)).map(|(&h, _)| h));
        members.push(m);
    }
    let mut faces = Vec::new();
    for (fi, m) in members.iter().enumerate() {
        let cycles: Vec<Vec<usize>> = m.iter().map(|&c| arr.cycles[c].clone()).collect();
        let mut walls: Vec<usize> = cycles.iter().flatten().map(|h| h / 2).collect();
        walls.sort();
        let area_exponent = if fi == 0 {
            qi(OUTER_FACE_EXPONENT)
        } else {
            let series = cycles
                .iter()
                .fold(PuiseuxSeries::zero(g.truncation()), |s, c| s.add(&cycle_area_series(&graph, c)));
            let e = series.leading_exponent().cloned().ok_or_else(|| LinkTopoError::ExponentUnstable {
                face: fi,
                symbolic: "zero area".into(),
                fitted: f64::NAN,
            })?;
            let areas: Vec<f64> =
                grid.iter().map(|&t| cycles.iter().map(|c| cycle_area_at(&graph, c, t)).sum::<f64>()).collect();
            let k = grid.len().min(6);
            let fitted = geom::loglog_slope(&grid[grid.len() - k..], &areas[areas.len() - k..]);
            if (fitted - qf(&e)).abs() > FIT_TOLERANCE {
                return Err(LinkTopoError::ExponentUnstable { face: fi, symbolic: e.to_string(), fitted });
            }
            e
        };
        faces.push(Face { outer: fi == 0, area_exponent, walls, cycles });
    }
    Ok(RegionGraph {
        faces,
        walls: graph.edges.iter().map(|e| (e.a, e.b)).collect(),
        wall_component: graph.edges.iter().map(|e| e.component).collect(),
        grid,
    })
}

/// Regions as vertices labelled by area exponent; edges are shared curves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtendedTree {
    pub labels: Vec<Q>,
    pub edges: Vec<(usize, usize)>,
}

impl ExtendedTree {
    pub fn path(labels: &[Q]) -> Self {
        ExtendedTree { labels: labels.to_vec(), edges: (1..labels.len()).map(|i| (i - 1, i)).collect() }
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.labels.len()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    pub fn is_tree(&self) -> bool {
        let n = self.labels.len();
        if n == 0 || self.edges.len() + 1 != n {
            return false;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    /// One or two centres, by repeated leaf removal.
    pub fn centers(&self) -> Vec<usize> {
        let n = self.labels.len();
        if n <= 2 {
            return (0..n).collect();
        }
        let adj = self.adjacency();
        let mut deg: Vec<usize> = adj.iter().map(|a| a.len()).collect();
        let mut leaves: Vec<usize> = (0..n).filter(|&i| deg[i] <= 1).collect();
        let mut left = n;
        while left > 2 {
            left -= leaves.len();
            let mut next = Vec::new();
            for &l in &leaves {
                deg[l] = 0;
                for &v in &adj[l] {
                    if deg[v] > 0 {
                        deg[v] -= 1;
                        if deg[v] == 1 {
                            next.push(v);
                        }
                    }
                }
            }
            leaves = next;
        }
        leaves.sort();
        leaves
    }

    fn encode(&self, adj: &[Vec<usize>], v: usize, parent: Option<usize>, labelled: bool) -> String {
        let mut kids: Vec<String> =
            adj[v].iter().filter(|&&w| Some(w) != parent).map(|&w| self.encode(adj, w, Some(v), labelled)).collect();
        kids.sort();
        let mut s = String::from("(");
        if labelled {
            s.push_str(&self.labels[v].to_string());
        }
        for k in kids {
            if labelled || s.len() > 1 {
                s.push(' ');
            }
            s.push_str(&k);
        }
        s.push(')');
        s
    }

    fn canonical(&self, labelled: bool) -> String {
        let adj = self.adjacency();
        self.centers().into_iter().map(|c| self.encode(&adj, c, None, labelled)).min().unwrap_or_default()
    }

    /// Canonical bracket encoding `(label (child) …)` rooted at the centre.
    pub fn canonical_encoding(&self) -> String {
        self.canonical(true)
    }

    pub fn shape_encoding(&self) -> String {
        self.canonical(false)
    }
}

impl fmt::Display for ExtendedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical_encoding())
    }
}

pub fn tree_isomorphic(a: &ExtendedTree, b: &ExtendedTree) -> bool {
    a.labels.len() == b.labels.len() && a.canonical_encoding() == b.canonical_encoding()
}

fn has_isolated_singularity(g: &PolygonalGerm) -> bool {
    if g.has_open_components() {
        return false;
    }
    let graph = g.link_graph();
    let labels = graph.connectivity();
    let comps = labels.iter().copied().max().map_or(0, |m| m + 1);
    comps == g.components.len()
}

pub fn extended_tree(g: &PolygonalGerm) -> Result<ExtendedTree, LinkTopoError> {
    if g.has_open_components() {
        return Err(LinkTopoError::HasOpenComponents);
    }
    if !has_isolated_singularity(g) {
        return Err(LinkTopoError::NotDisjoint);
    }
    let rg = region_graph(g)?;
    Ok(tree_from_regions(&rg, g.components.len()))
}

fn tree_from_regions(rg: &RegionGraph, ncomp: usize) -> ExtendedTree {
    let mut sides: Vec<Vec<usize>> = vec![Vec::new(); ncomp];
    for (fi, f) in rg.faces.iter().enumerate() {
        for &w in &f.walls {
            let c = rg.wall_component[w];
            if !sides[c].contains(&fi) {
                sides[c].push(fi);
            }
        }
    }
    let mut edges: Vec<(usize, usize)> = sides.iter().filter(|s| s.len() == 2).map(|s| (s[0].min(s[1]), s[0].max(s[1]))).collect();
    edges.sort();
    ExtendedTree { labels: rg.faces.iter().map(|f| f.area_exponent.clone()).collect(), edges }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EquivalenceStatus {
    Equivalent,
    Inequivalent,
    NecessaryConditionsHold,
    NotApplicable,
}

impl fmt::Display for EquivalenceStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EquivalenceStatus::Equivalent => "Equivalent",
            EquivalenceStatus::Inequivalent => "Inequivalent",
            EquivalenceStatus::NecessaryConditionsHold => "NecessaryConditionsHold",
            EquivalenceStatus::NotApplicable => "NotApplicable",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceVerdict {
    pub status: EquivalenceStatus,
    pub witness: Option<String>,
}

impl EquivalenceVerdict {
    fn inequivalent(w: String) -> Self {
        EquivalenceVerdict { status: EquivalenceStatus::Inequivalent, witness: Some(w) }
    }
}

impl fmt::Display for EquivalenceVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.witness {
            Some(w) => write!(f, "{} ({})", self.status, w),
            None => write!(f, "{}", self.status),
        }
    }
}

fn fmt_list(v: &[Q]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn sorted_edge_exponents(g: &PolygonalGerm) -> Result<Vec<Q>, LinkTopoError> {
    let mut v: Vec<Q> = edge_exponents(g)?.into_iter().flatten().collect();
    v.sort();
    Ok(v)
}

fn check_lne(g: &PolygonalGerm, name: &str) -> Result<(), LinkTopoError> {
    if is_lne(g)?.status == LneStatus::NotLne {
        return Err(LinkTopoError::NotLneInput(format!("{} is not LNE", name)));
    }
    Ok(())
}

/// Decides ambient equivalence where the classification applies, and
/// otherwise compares the region graphs as necessary conditions.
pub fn decide_equivalence(x: &PolygonalGerm, y: &PolygonalGerm) -> Result<EquivalenceVerdict, LinkTopoError> {
    check_lne(x, "first germ")?;
    check_lne(y, "second germ")?;
    let (ix, iy) = (has_isolated_singularity(x), has_isolated_singularity(y));
    if ix != iy {
        return Ok(EquivalenceVerdict::inequivalent("isolated vs non-isolated singularity".into()));
    }
    if ix {
        let (tx, ty) = (extended_tree(x)?, extended_tree(y)?);
        if tx.shape_encoding() != ty.shape_encoding() {
            return Ok(EquivalenceVerdict::inequivalent(format!(
                "tree shape differs: {} vs {}",
                tx.shape_encoding(),
                ty.shape_encoding()
            )));
        }
        if !tree_isomorphic(&tx, &ty) {
            return Ok(EquivalenceVerdict::inequivalent(format!("tree labels differ: {} vs {}", tx, ty)));
        }
        return Ok(EquivalenceVerdict { status: EquivalenceStatus::Equivalent, witness: None });
    }
    let (ex, ey) = (sorted_edge_exponents(x)?, sorted_edge_exponents(y)?);
    if ex != ey {
        return Ok(EquivalenceVerdict::inequivalent(format!(
            "edge exponent multiset differs: {{{}}} vs {{{}}}",
            fmt_list(&ex),
            fmt_list(&ey)
        )));
    }
    let (rx, ry) = (region_graph(x)?, region_graph(y)?);
    if rx.faces.len() != ry.faces.len() {
        return Ok(EquivalenceVerdict::inequivalent(format!("face count differs: {} vs {}", rx.faces.len(), ry.faces.len())));
    }
    let (sx, sy) = (rx.slit_face_exponents(), ry.slit_face_exponents());
    if sx != sy {
        return Ok(EquivalenceVerdict::inequivalent(format!(
            "slit-bearing face area exponent differs: {} vs {}",
            fmt_list(&sx),
            fmt_list(&sy)
        )));
    }
    let (fx, fy) = (rx.face_exponents(), ry.face_exponents());
    if fx != fy {
        return Ok(EquivalenceVerdict::inequivalent(format!(
            "face area exponents differ: {} vs {}",
            fmt_list(&fx),
            fmt_list(&fy)
        )));
    }
    Ok(EquivalenceVerdict { status: EquivalenceStatus::NecessaryConditionsHold, witness: None })
}

/// External offset curve of one component's tangent link, in units of `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparatingCurve {
    pub component: usize,
    pub epsilon: f64,
    pub normalized: Vec<P2>,
}

impl SeparatingCurve {
    /// The curve in the plane link at `t`.
    pub fn at(&self, t: f64) -> Vec<P2> {
        self.normalized.iter().map(|p| geom::scale(*p, t)).collect()
    }
}

/// Samples per quarter turn on round joins.
const ARC_STEPS: usize = 4;

fn arc_points(c: P2, r: f64, from: f64, to: f64) -> Vec<P2> {
    let mut sweep = to - from;
    while sweep < 0.0 {
        sweep += 2.0 * std::f64::consts::PI;
    }
    let steps = ((sweep / (std::f64::consts::FRAC_PI_2 / ARC_STEPS as f64)).ceil() as usize).max(1);
    (0..=steps)
        .map(|k| {
            let a = from + sweep * k as f64 / steps as f64;
            [c[0] + r * a.cos(), c[1] + r * a.sin()]
        })
        .collect()
}

fn outward_offset(poly: &[P2], eps: f64) -> Vec<P2> {
    let mut pts: Vec<P2> = Vec::new();
    for &p in poly {
        if pts.last().map_or(true, |&l| geom::dist(l, p) > 1e-12) {
            pts.push(p);
        }
    }
    while pts.len() > 1 && geom::dist(pts[0], *pts.last().unwrap()) <= 1e-12 {
        pts.pop();
    }
    let area = if pts.len() >= 3 { geom::signed_area(&pts) } else { 0.0 };
    if area.abs() <= 1e-12 {
        // Point or flat footprint: a stadium around its extent.
        let (a, b) = pts.iter().flat_map(|&p| pts.iter().map(move |&q| (p, q))).fold((pts[0], pts[0]), |best, (p, q)| {
            if geom::dist(p, q) > geom::dist(best.0, best.1) {
                (p, q)
            } else {
                best
            }
        });
        let d = geom::sub(b, a);
        let ang = if geom::norm(d) > 0.0 { d[1].atan2(d[0]) } else { 0.0 };
        let h = std::f64::consts::FRAC_PI_2;
        let mut out = arc_points(b, eps, ang - h, ang + h);
        out.extend(arc_points(a, eps, ang + h, ang + 3.0 * h));
        if geom::norm(d) == 0.0 {
            out.truncate(out.len() / 2);
            out = arc_points(a, eps, 0.0, 2.0 * std::f64::consts::PI - 1e-9);
            out.pop();
        }
        return out;
    }
    if area < 0.0 {
        pts.reverse();
    }
    let n = pts.len();
    let mut out = Vec::new();
    for i in 0..n {
        let (p, c, nx) = (pts[(i + n - 1) % n], pts[i], pts[(i + 1) % n]);
        let (e1, e2) = (geom::sub(c, p), geom::sub(nx, c));
        let n1 = geom::scale([e1[1], -e1[0]], 1.0 / geom::norm(e1));
        let n2 = geom::scale([e2[1], -e2[0]], 1.0 / geom::norm(e2));
        let turn = geom::cross(e1, e2);
        if turn > 0.0 {
            out.extend(arc_points(c, eps, n1[1].atan2(n1[0]), n2[1].atan2(n2[0])));
        } else {
            let m = geom::add(n1, n2);
            out.push(geom::add(c, geom::scale(m, eps / (1.0 + geom::dot(n1, n2)))));
        }
    }
    out
}

fn closed_segments(p: &[P2]) -> Vec<(P2, P2)> {
    (0..p.len()).map(|i| (p[i], p[(i + 1) % p.len()])).collect()
}

fn is_simple(p: &[P2]) -> bool {
    let s = closed_segments(p);
    let n = s.len();
    for i in 0..n {
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if geom::segments_intersect(s[i].0, s[i].1, s[j].0, s[j].1) {
                return false;
            }
        }
    }
    true
}

fn curves_ok(g: &PolygonalGerm, curves: &[SeparatingCurve], grid: &[f64]) -> Result<(), String> {
    for c in curves {
        if !is_simple(&c.normalized) {
            return Err(format!("curve {} self-intersects", c.component));
        }
    }
    for &t in grid {
        let scaled: Vec<Vec<P2>> = curves.iter().map(|c| c.at(t)).collect();
        for (i, a) in scaled.iter().enumerate() {
            for b in &scaled[i + 1..] {
                for (p, q) in closed_segments(a) {
                    for (r, s) in closed_segments(b) {
                        if geom::segments_intersect(p, q, r, s) {
                            return Err(format!("curves {} and another meet at t = {:e}", i, t));
                        }
                    }
                }
            }
        }
        for (ci, comp) in g.components.iter().enumerate() {
            let link: Vec<P2> = comp.vertices.iter().map(|v| v.eval(t)).collect();
            for (k, curve) in scaled.iter().enumerate() {
                for (p, q) in closed_segments(&link) {
                    for (r, s) in closed_segments(curve) {
                        if geom::segments_intersect(p, q, r, s) {
                            return Err(format!("curve {} meets component {} at t = {:e}", k, ci, t));
                        }
                    }
                }
            }
            if !link.iter().all(|&p| geom::point_in_polygon(p, &scaled[ci])) {
                return Err(format!("component {} leaves its curve at t = {:e}", ci, t));
            }
        }
    }
    Ok(())
}

/// One separating curve per closed component; `ε` is halved until the curves
/// are simple, pairwise disjoint, and clear of the link on the grid.
pub fn separating_cones(g: &PolygonalGerm, epsilon: f64) -> Result<Vec<SeparatingCurve>, LinkTopoError> {
    if g.has_open_components() {
        return Err(LinkTopoError::HasOpenComponents);
    }
    let t_max = validated_grid(g, &GridConfig::default())?[0];
    let grid = GridConfig::grid_from(t_max.min(0.5f64.powi(6)), 10);
    let mut eps = epsilon;
    let mut last = String::new();
    for _ in 0..30 {
        let curves: Vec<SeparatingCurve> = g
            .components
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let foot: Vec<P2> = c.vertices.iter().map(|v| {
                    let (x, y) = v.linear_part();
                    [qf(&x), qf(&y)]
                }).collect();
                SeparatingCurve { component: i, epsilon: eps, normalized: outward_offset(&foot, eps) }
            })
            .collect();
        match curves_ok(g, &curves, &grid) {
            Ok(()) => return Ok(curves),
            Err(e) => last = e,
        }
        eps /= 2.0;
    }
    Err(LinkTopoError::EpsilonTooLarge(last))
}
