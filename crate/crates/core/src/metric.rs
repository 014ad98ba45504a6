//! Tangency orders, limit angles and the LNE decision.
//!
//! Outer distances are leading terms of Euclidean distances between arcs.
//! Inner distances are measured along the plane link, where the length
//! exponent of a path is the minimum of its edge exponents; between link
//! components the only route passes through the apex and has exponent 1.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::geom::{self, P2};
use crate::germ::{validated_grid, ArcGerm, GermError, GridConfig, LinkGraph, PolygonalGerm};
use crate::puiseux::{norm2_leading, q, qf, qi, Eventual, SqrtQ, Q};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("TruncationTooShort: arcs agree up to truncation O(t^{0})")]
    TruncationTooShort(String),
    #[error("DifferentComponents: vertices {0:?} and {1:?} are not joined by the link")]
    DifferentComponents(VertexRef, VertexRef),
    #[error("CoincidentArcs")]
    CoincidentArcs,
    #[error("vertex {0:?} does not exist")]
    NoSuchVertex(VertexRef),
    #[error(transparent)]
    Germ(#[from] GermError),
}

/// `(component, index)` of a vertex.
pub type VertexRef = (usize, usize);

/// A tangency order with its leading distance coefficient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TordValue {
    /// `‖γ1 - γ2‖ = c t^exponent + ...`; `c` is absent when it is not a single root.
    Finite { exponent: Q, coefficient: Option<SqrtQ> },
    Infinite,
}

impl TordValue {
    pub fn exponent(&self) -> Option<&Q> {
        match self {
            TordValue::Finite { exponent, .. } => Some(exponent),
            TordValue::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, TordValue::Infinite)
    }

    pub fn to_f64(&self) -> f64 {
        self.exponent().map(qf).unwrap_or(f64::INFINITY)
    }
}

impl fmt::Display for TordValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TordValue::Infinite => write!(f, "inf"),
            TordValue::Finite { exponent, coefficient: Some(c) } => write!(f, "{} (c = {})", exponent, c),
            TordValue::Finite { exponent, coefficient: None } => write!(f, "{}", exponent),
        }
    }
}

/// Outer tangency order of two arcs.
pub fn tord(g1: &ArcGerm, g2: &ArcGerm) -> Result<TordValue, MetricError> {
    let d = g1.sub(g2);
    match norm2_leading(&d.x, &d.y) {
        Ok(n) => Ok(TordValue::Finite { exponent: n.distance_exponent(), coefficient: Some(n.distance_coefficient()) }),
        Err(_) if g1 == g2 => Ok(TordValue::Infinite),
        Err(_) => Err(MetricError::TruncationTooShort(d.truncation().to_string())),
    }
}

fn tord_exponent(g1: &ArcGerm, g2: &ArcGerm) -> Result<Option<Q>, MetricError> {
    Ok(tord(g1, g2)?.exponent().cloned())
}

/// Bottleneck reachability: `No < Fin(e) < Inf`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Reach {
    No,
    Fin(Q),
    Inf,
}

impl Reach {
    fn min(self, other: Reach) -> Reach {
        std::cmp::min(self, other)
    }
}

/// Edge exponents of the link graph, indexed like `graph.edges`.
fn graph_edge_exponents(graph: &LinkGraph) -> Result<Vec<Q>, MetricError> {
    graph
        .edges
        .iter()
        .map(|e| tord_exponent(&graph.nodes[e.a], &graph.nodes[e.b])?.ok_or(MetricError::CoincidentArcs))
        .collect()
}

/// All-pairs widest path: the inner exponent between link-graph nodes.
pub fn inner_exponent_table(graph: &LinkGraph) -> Result<Vec<Vec<Reach>>, MetricError> {
    let exps = graph_edge_exponents(graph)?;
    Ok(widest_paths(graph, &exps))
}

fn widest_paths(graph: &LinkGraph, exps: &[Q]) -> Vec<Vec<Reach>> {
    let n = graph.nodes.len();
    let mut w = vec![vec![Reach::No; n]; n];
    for (i, row) in w.iter_mut().enumerate() {
        row[i] = Reach::Inf;
    }
    for (e, x) in graph.edges.iter().zip(exps) {
        let r = Reach::Fin(x.clone());
        if r > w[e.a][e.b] {
            w[e.a][e.b] = r.clone();
            w[e.b][e.a] = r;
        }
    }
    for k in 0..n {
        for i in 0..n {
            if w[i][k] == Reach::No {
                continue;
            }
            for j in 0..n {
                let via = w[i][k].clone().min(w[k][j].clone());
                if via > w[i][j] {
                    w[i][j] = via;
                }
            }
        }
    }
    w
}

/// Inner tangency order between two vertices joined by the link.
pub fn tord_inner(g: &PolygonalGerm, i: VertexRef, j: VertexRef) -> Result<TordValue, MetricError> {
    let graph = g.link_graph();
    let node = |v: VertexRef| -> Result<usize, MetricError> {
        graph.node_of.get(v.0).and_then(|c| c.get(v.1)).copied().ok_or(MetricError::NoSuchVertex(v))
    };
    let (a, b) = (node(i)?, node(j)?);
    let table = inner_exponent_table(&graph)?;
    match &table[a][b] {
        Reach::Inf => Ok(TordValue::Infinite),
        Reach::No => Err(MetricError::DifferentComponents(i, j)),
        Reach::Fin(e) => {
            // The coefficient is a single root only when the direct edge realizes it.
            let direct = graph.edges.iter().any(|x| (x.a, x.b) == (a, b) || (x.a, x.b) == (b, a));
            let outer = tord(&graph.nodes[a], &graph.nodes[b])?;
            let coefficient = match &outer {
                TordValue::Finite { exponent, coefficient } if direct && exponent == e => coefficient.clone(),
                _ => None,
            };
            Ok(TordValue::Finite { exponent: e.clone(), coefficient })
        }
    }
}

/// Angle at `γ2` between the limit directions towards `γ1` and `γ3`.
pub fn limit_angle(g1: &ArcGerm, g2: &ArcGerm, g3: &ArcGerm) -> Result<f64, MetricError> {
    let u = g1.sub(g2).leading_vector().ok_or(MetricError::CoincidentArcs)?;
    let v = g3.sub(g2).leading_vector().ok_or(MetricError::CoincidentArcs)?;
    Ok(geom::angle_between([qf(&u.0), qf(&u.1)], [qf(&v.0), qf(&v.1)]))
}

/// `α_i = tord(γ_i, γ_{i+1})` for every edge, per component.
pub fn edge_exponents(g: &PolygonalGerm) -> Result<Vec<Vec<Q>>, MetricError> {
    g.components
        .iter()
        .map(|c| {
            c.edges()
                .into_iter()
                .map(|(i, j)| tord_exponent(&c.vertices[i], &c.vertices[j])?.ok_or(MetricError::CoincidentArcs))
                .collect()
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LneStatus {
    Lne,
    NotLne,
    HeuristicLne,
}

impl fmt::Display for LneStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LneStatus::Lne => "LNE",
            LneStatus::NotLne => "NotLNE",
            LneStatus::HeuristicLne => "HeuristicLNE",
        })
    }
}

/// Where the two witness points sit on the link.
#[derive(Clone, Debug, PartialEq)]
pub enum WitnessKind {
    /// Two link-graph nodes.
    Vertices { a: usize, b: usize },
    /// `P = A + u (B - A)` on edge `from`, and its nearest point on edge `to`.
    EdgePoint { from: usize, u: Q, to: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct LneWitness {
    pub kind: WitnessKind,
    pub p: ArcGerm,
    pub outer: Q,
    pub inner: Q,
}

impl LneWitness {
    pub fn gap(&self) -> Q {
        &self.outer - &self.inner
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LneVerdict {
    pub status: LneStatus,
    pub witness: Option<LneWitness>,
    /// `(t, C(t))` on the sampling grid.
    pub constant_estimates: Vec<(f64, f64)>,
}

impl LneVerdict {
    pub fn constants_flat(&self) -> bool {
        flat(&self.constant_estimates.iter().map(|c| c.1).collect::<Vec<_>>())
    }
}

/// Bounded sampled constants: max at most twice the median.
pub fn flat(values: &[f64]) -> bool {
    if values.is_empty() {
        return true;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let median = v[v.len() / 2];
    v[v.len() - 1] <= 2.0 * median
}

/// Result of the leading-exponent phase.
enum Symbolic {
    Lne,
    NotLne(LneWitness),
    Inconclusive,
}

/// LNE decision with constants sampled at `t = 2^-8 .. 2^-20`, shifted
/// down when the validated range starts below `2^-8`.
pub fn is_lne(g: &PolygonalGerm) -> Result<LneVerdict, MetricError> {
    let t_max = validated_grid(g, &GridConfig::default())?[0];
    is_lne_on(g, &lne_grid(t_max))
}

/// Thirteen halvings from `min(t_max, 2^-8)`.
pub fn lne_grid(t_max: f64) -> Vec<f64> {
    GridConfig::grid_from(t_max.min(0.5f64.powi(8)), 12)
}

/// LNE decision with numeric constants sampled on `grid`.
pub fn is_lne_on(g: &PolygonalGerm, grid: &[f64]) -> Result<LneVerdict, MetricError> {
    let graph = g.link_graph();
    let symbolic = symbolic_lne(&graph);
    let mut constant_estimates = Vec::new();
    for &t in grid {
        constant_estimates.push((t, constant_on_graph(&graph, t)));
    }
    let is_flat = flat(&constant_estimates.iter().map(|c| c.1).collect::<Vec<_>>());
    let (status, witness) = match symbolic {
        Symbolic::NotLne(w) => (LneStatus::NotLne, Some(w)),
        Symbolic::Lne if is_flat => (LneStatus::Lne, None),
        Symbolic::Lne => (LneStatus::HeuristicLne, None),
        Symbolic::Inconclusive if is_flat => (LneStatus::HeuristicLne, None),
        Symbolic::Inconclusive => (LneStatus::NotLne, None),
    };
    Ok(LneVerdict { status, witness, constant_estimates })
}

fn symbolic_lne(graph: &LinkGraph) -> Symbolic {
    let exps = match graph_edge_exponents(graph) {
        Ok(e) => e,
        Err(_) => return Symbolic::Inconclusive,
    };
    let w = widest_paths(graph, &exps);
    let one = Reach::Fin(Q::one());
    let n = graph.nodes.len();
    let mut inconclusive = false;
    let mut best: Option<LneWitness> = None;
    let consider = |cand: LneWitness, best: &mut Option<LneWitness>| {
        if best.as_ref().map_or(true, |b| cand.gap() > b.gap()) {
            *best = Some(cand);
        }
    };

    for a in 0..n {
        for b in a + 1..n {
            let outer = match tord_exponent(&graph.nodes[a], &graph.nodes[b]) {
                Ok(Some(e)) => e,
                _ => {
                    inconclusive = true;
                    continue;
                }
            };
            if let Reach::Fin(inner) = std::cmp::max(w[a][b].clone(), one.clone()) {
                if outer > inner {
                    let p = graph.nodes[a].clone();
                    consider(LneWitness { kind: WitnessKind::Vertices { a, b }, p, outer, inner }, &mut best);
                }
            }
        }
    }
    if let Some(wit) = best {
        return Symbolic::NotLne(wit);
    }

    let fractions = [qi(0), q(1, 4), q(1, 2), q(3, 4), qi(1)];
    for (i1, s1) in graph.edges.iter().enumerate() {
        for (i2, s2) in graph.edges.iter().enumerate() {
            if i1 == i2 {
                continue;
            }
            let (a, b, c, d) = (s1.a, s1.b, s2.a, s2.b);
            let (na, nb, nc, nd) = (&graph.nodes[a], &graph.nodes[b], &graph.nodes[c], &graph.nodes[d]);
            let e_ab = exps[i1].clone();
            let e_cd = exps[i2].clone();
            let dc = nd.sub(nc);
            let l2 = dc.dot(&dc);
            let l2_half = l2.leading_exponent().cloned().unwrap_or_else(Q::zero) / qi(2);
            for u in &fractions {
                if (u.is_zero() && (a == c || a == d)) || (u.is_one() && (b == c || b == d)) {
                    continue;
                }
                let p = na.lerp_q(nb, u);
                // Routes leave P through A or B, at cost |P - A| or |P - B|.
                let cost_pa = if u.is_zero() { Reach::Inf } else { Reach::Fin(e_ab.clone()) };
                let cost_pb = if u.is_one() { Reach::Inf } else { Reach::Fin(e_ab.clone()) };
                let pc = p.sub(nc);
                let nn = pc.dot(&dc);
                let interior = nn.sign_eventual() == Eventual::Greater && l2.sub(&nn).sign_eventual() == Eventual::Greater;
                let (outer, cost_qc, cost_qd) = if interior {
                    let cr = dc.cross(&pc);
                    let ce = match cr.leading_exponent() {
                        Some(e) => e.clone(),
                        None => continue,
                    };
                    let qc = nn.leading_exponent().unwrap() - &l2_half;
                    let qd = l2.sub(&nn).leading_exponent().unwrap() - &l2_half;
                    (ce - &l2_half, Reach::Fin(qc), Reach::Fin(qd))
                } else {
                    let at_c = nn.sign_eventual() != Eventual::Greater;
                    let end = if at_c { nc } else { nd };
                    let o = match tord_exponent(&p, end) {
                        Ok(Some(e)) => e,
                        Ok(None) => continue,
                        Err(_) => {
                            inconclusive = true;
                            continue;
                        }
                    };
                    if at_c {
                        (o, Reach::Inf, Reach::Fin(e_cd.clone()))
                    } else {
                        (o, Reach::Fin(e_cd.clone()), Reach::Inf)
                    }
                };
                let mut inner = one.clone();
                for (x, cx) in [(a, &cost_pa), (b, &cost_pb)] {
                    for (y, cy) in [(c, &cost_qc), (d, &cost_qd)] {
                        let r = cx.clone().min(w[x][y].clone()).min(cy.clone());
                        inner = inner.max(r);
                    }
                }
                if let Reach::Fin(inner) = inner {
                    if outer > inner {
                        let kind = WitnessKind::EdgePoint { from: i1, u: u.clone(), to: i2 };
                        consider(LneWitness { kind, p: p.clone(), outer, inner }, &mut best);
                    }
                }
            }
        }
    }
    match best {
        Some(wit) => Symbolic::NotLne(wit),
        None if inconclusive => Symbolic::Inconclusive,
        None => Symbolic::Lne,
    }
}

/// Sampled link at one `t`: nodes, edge samples and a weighted path graph.
struct SampledLink {
    /// Planar positions relative to node 0.
    pts: Vec<P2>,
    /// 3-D distance to the apex.
    apex: Vec<f64>,
    /// Link-graph component of each sample.
    comp: Vec<usize>,
    adj: Vec<Vec<(usize, f64)>>,
}

impl SampledLink {
    /// `extra` holds additional `(edge, parameter)` samples; their indices are returned.
    fn build(graph: &LinkGraph, t: f64, extra: &[(usize, f64)]) -> (Self, Vec<usize>) {
        let base = &graph.nodes[0];
        let mut pts: Vec<P2> = graph.nodes.iter().map(|v| v.eval_rel(base, t)).collect();
        let abs: Vec<P2> = graph.nodes.iter().map(|v| v.eval(t)).collect();
        let mut apex: Vec<f64> = abs.iter().map(|p| (p[0] * p[0] + p[1] * p[1] + t * t).sqrt()).collect();
        let label = graph.connectivity();
        let mut comp = label.clone();
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); pts.len()];
        let mut extra_idx = vec![usize::MAX; extra.len()];
        let node_pts = pts.clone();
        for (k, e) in graph.edges.iter().enumerate() {
            let (pa, pb) = (node_pts[e.a], node_pts[e.b]);
            let mut params: Vec<(f64, Option<usize>)> = vec![(0.25, None), (0.5, None), (0.75, None)];
            for &p in &node_pts {
                let s = geom::project_parameter(p, pa, pb);
                if s > 1e-12 && s < 1.0 - 1e-12 {
                    params.push((s, None));
                }
            }
            for (x, &(edge, s)) in extra.iter().enumerate() {
                if edge == k {
                    params.push((s, Some(x)));
                }
            }
            params.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(Ordering::Equal));
            let mut prev = e.a;
            let mut prev_s = 0.0;
            for (s, tag) in params {
                let idx = if s <= 0.0 {
                    e.a
                } else if s >= 1.0 {
                    e.b
                } else {
                    let p = geom::lerp(pa, pb, s);
                    let pabs = geom::lerp(abs[e.a], abs[e.b], s);
                    pts.push(p);
                    apex.push((pabs[0] * pabs[0] + pabs[1] * pabs[1] + t * t).sqrt());
                    comp.push(label[e.a]);
                    adj.push(Vec::new());
                    pts.len() - 1
                };
                if let Some(x) = tag {
                    extra_idx[x] = idx;
                }
                if idx != prev {
                    let len = geom::dist(pa, pb) * (s - prev_s);
                    adj[prev].push((idx, len));
                    adj[idx].push((prev, len));
                    prev = idx;
                    prev_s = s;
                }
            }
            let len = geom::dist(pa, pb) * (1.0 - prev_s);
            adj[prev].push((e.b, len));
            adj[e.b].push((prev, len));
        }
        (SampledLink { pts, apex, comp, adj }, extra_idx)
    }

    fn dijkstra(&self, src: usize) -> Vec<f64> {
        #[derive(PartialEq)]
        struct Item(f64, usize);
        impl Eq for Item {}
        impl PartialOrd for Item {
            fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
                Some(self.cmp(o))
            }
        }
        impl Ord for Item {
            fn cmp(&self, o: &Self) -> Ordering {
                o.0.partial_cmp(&self.0).unwrap_or(Ordering::Equal)
            }
        }
        let mut dist = vec![f64::INFINITY; self.pts.len()];
        dist[src] = 0.0;
        let mut heap = BinaryHeap::from([Item(0.0, src)]);
        while let Some(Item(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &(v, w) in &self.adj[u] {
                let nd = d + w;
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push(Item(nd, v));
                }
            }
        }
        dist
    }

    /// Inner distance between samples, through the apex across components.
    fn inner(&self, dist_from_a: &[f64], a: usize, b: usize) -> f64 {
        if self.comp[a] == self.comp[b] {
            dist_from_a[b].min(self.apex[a] + self.apex[b])
        } else {
            self.apex[a] + self.apex[b]
        }
    }

    fn sup_ratio(&self) -> f64 {
        let n = self.pts.len();
        let mut sup: f64 = 1.0;
        for a in 0..n {
            let d = self.dijkstra(a);
            for b in a + 1..n {
                let outer = geom::dist(self.pts[a], self.pts[b]);
                if outer > 0.0 {
                    sup = sup.max(self.inner(&d, a, b) / outer);
                }
            }
        }
        sup
    }
}

fn constant_on_graph(graph: &LinkGraph, t: f64) -> f64 {
    SampledLink::build(graph, t, &[]).0.sup_ratio()
}

/// Sampled LNE constant of the plane link at `t`.
pub fn lne_constant(g: &PolygonalGerm, t: f64) -> Result<f64, MetricError> {
    if !(t > 0.0) {
        return Err(GermError::InvalidT { t, reason: "t must be positive".into() }.into());
    }
    Ok(constant_on_graph(&g.link_graph(), t))
}

/// Inner/outer distance ratio of the witness points at `t`.
pub fn witness_ratio(g: &PolygonalGerm, w: &LneWitness, t: f64) -> f64 {
    let graph = g.link_graph();
    match &w.kind {
        WitnessKind::Vertices { a, b } => {
            let (link, _) = SampledLink::build(&graph, t, &[]);
            let d = link.dijkstra(*a);
            link.inner(&d, *a, *b) / geom::dist(link.pts[*a], link.pts[*b])
        }
        WitnessKind::EdgePoint { from, u, to } => {
            let base = &graph.nodes[0];
            let e2 = graph.edges[*to];
            let p = w.p.eval_rel(base, t);
            let s = geom::project_parameter(p, graph.nodes[e2.a].eval_rel(base, t), graph.nodes[e2.b].eval_rel(base, t));
            let (link, idx) = SampledLink::build(&graph, t, &[(*from, qf(u)), (*to, s)]);
            let (ip, iq) = (idx[0], idx[1]);
            let d = link.dijkstra(ip);
            link.inner(&d, ip, iq) / geom::dist(link.pts[ip], link.pts[iq])
        }
    }
}

/// Outer tangency orders of all vertex pairs of one component.
pub fn vertex_tord_table(g: &PolygonalGerm, component: usize) -> Result<Vec<Vec<TordValue>>, MetricError> {
    let v = &g.components[component].vertices;
    v.iter().map(|a| v.iter().map(|b| tord(a, b)).collect()).collect()
}

/// Distance exponent from the arc `p` to the segment `cd`; `None` when the
/// distance vanishes identically.
pub fn point_segment_exponent(p: &ArcGerm, c: &ArcGerm, d: &ArcGerm) -> Option<Q> {
    let dc = d.sub(c);
    let pc = p.sub(c);
    let l2 = dc.dot(&dc);
    let nn = pc.dot(&dc);
    let interior = nn.sign_eventual() == Eventual::Greater && l2.sub(&nn).sign_eventual() == Eventual::Greater;
    if interior {
        let half = l2.leading_exponent()? / qi(2);
        dc.cross(&pc).leading_exponent().map(|e| e - half)
    } else if nn.sign_eventual() == Eventual::Greater {
        tord(p, d).ok()?.exponent().cloned()
    } else {
        tord(p, c).ok()?.exponent().cloned()
    }
}

/// Distance exponent between the segments `ab` and `cd` (largest of the four
/// endpoint-to-segment exponents); `None` when they touch.
pub fn segment_distance_exponent(a: &ArcGerm, b: &ArcGerm, c: &ArcGerm, d: &ArcGerm) -> Option<Q> {
    let cands = [
        point_segment_exponent(a, c, d),
        point_segment_exponent(b, c, d),
        point_segment_exponent(c, a, b),
        point_segment_exponent(d, a, b),
    ];
    let mut best: Option<Q> = None;
    for x in cands {
        let x = x?;
        if best.as_ref().map_or(true, |b| &x > b) {
            best = Some(x);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::germ::Component;
    use crate::puiseux::PuiseuxSeries;
    use proptest::prelude::*;

    fn arc(x: &str, y: &str) -> ArcGerm {
        ArcGerm::parse(x, y).unwrap()
    }

    fn fit_slope(a: &ArcGerm, b: &ArcGerm) -> f64 {
        let ts: Vec<f64> = (8..=20).map(|k| 0.5f64.powi(k)).collect();
        let ds: Vec<f64> = ts.iter().map(|&t| geom::norm(a.eval_rel(b, t))).collect();
        geom::loglog_slope(&ts, &ds)
    }

    #[test]
    fn tord_examples() {
        let g = arc("t", "t^2");
        assert_eq!(tord(&g, &g).unwrap(), TordValue::Infinite);
        let (a, b) = (arc("t^2", "0"), arc("0", "t^3"));
        assert_eq!(tord(&a, &b).unwrap().exponent(), Some(&qi(2)));
        assert!((fit_slope(&a, &b) - 2.0).abs() < 0.05);
        let (a, d1) = (arc("0", "0"), arc("t^3", "0"));
        assert_eq!(tord(&a, &d1).unwrap().exponent(), Some(&qi(3)));
        assert!((fit_slope(&a, &d1) - 3.0).abs() < 0.05);
    }

    #[test]
    fn truncation_too_short() {
        let a = ArcGerm::new("t + O(t^3)".parse().unwrap(), "0".parse().unwrap()).unwrap();
        let b = arc("t", "0");
        assert!(matches!(tord(&a, &b), Err(MetricError::TruncationTooShort(_))));
    }

    #[test]
    fn inner_tords() {
        let g = PolygonalGerm::chain(vec![arc("0", "0"), arc("t", "0"), arc("t", "t^2")], false).unwrap();
        assert_eq!(tord_inner(&g, (0, 0), (0, 1)).unwrap().exponent(), Some(&qi(1)));
        assert_eq!(tord_inner(&g, (0, 1), (0, 2)).unwrap().exponent(), Some(&qi(2)));
        assert_eq!(tord_inner(&g, (0, 0), (0, 2)).unwrap().exponent(), Some(&qi(1)));
        let sq = square();
        assert_eq!(tord_inner(&sq, (0, 0), (0, 2)).unwrap().exponent(), Some(&qi(1)));
        let two = PolygonalGerm::new(vec![
            Component::new(vec![arc("t", "0"), arc("2*t", "0")], false),
            Component::new(vec![arc("-t", "0"), arc("-2*t", "0")], false),
        ])
        .unwrap();
        assert!(matches!(tord_inner(&two, (0, 0), (1, 0)), Err(MetricError::DifferentComponents(..))));
    }

    #[test]
    fn limit_angles() {
        let o = arc("0", "0");
        let pi = std::f64::consts::PI;
        assert!((limit_angle(&arc("t", "0"), &o, &arc("0", "t")).unwrap() - pi / 2.0).abs() < 1e-12);
        assert!((limit_angle(&arc("-t", "0"), &o, &arc("t", "0")).unwrap() - pi).abs() < 1e-12);
        assert_eq!(limit_angle(&arc("t", "0"), &o, &arc("2*t", "0")).unwrap(), 0.0);
        assert!(matches!(limit_angle(&o, &o, &arc("t", "0")), Err(MetricError::CoincidentArcs)));
    }

    fn square() -> PolygonalGerm {
        PolygonalGerm::chain(vec![arc("t", "t"), arc("-t", "t"), arc("-t", "-t"), arc("t", "-t")], true).unwrap()
    }

    fn x1() -> PolygonalGerm {
        let (a, b, c, d) = (arc("0", "0"), arc("t^2", "t^2"), arc("t^2", "-t^2"), arc("t^3", "0"));
        PolygonalGerm::new(vec![Component::new(vec![a.clone(), b, c], true), Component::new(vec![a, d], false)]).unwrap()
    }

    #[test]
    fn edge_exponent_examples() {
        assert_eq!(edge_exponents(&square()).unwrap(), vec![vec![qi(1); 4]]);
        assert_eq!(edge_exponents(&x1()).unwrap(), vec![vec![qi(2); 3], vec![qi(3)]]);
        let g = PolygonalGerm::chain(vec![arc("0", "0"), arc("t", "0"), arc("t", "t^2")], false).unwrap();
        assert_eq!(edge_exponents(&g).unwrap(), vec![vec![qi(1), qi(2)]]);
    }

    #[test]
    fn pinch_is_not_lne() {
        let g = PolygonalGerm::chain(vec![arc("t", "t^2"), arc("0", "0"), arc("t", "-t^2")], false).unwrap();
        let v = is_lne(&g).unwrap();
        assert_eq!(v.status, LneStatus::NotLne);
        let w = v.witness.clone().unwrap();
        assert_eq!(w.kind, WitnessKind::Vertices { a: 0, b: 2 });
        assert_eq!((w.outer.clone(), w.inner.clone()), (qi(2), qi(1)));
        let r1 = witness_ratio(&g, &w, 0.5f64.powi(10));
        let r2 = witness_ratio(&g, &w, 0.5f64.powi(11));
        assert!((r2 / r1 - 2.0).abs() < 0.01);
    }

    #[test]
    fn square_and_x1_are_lne() {
        assert_eq!(is_lne(&square()).unwrap().status, LneStatus::Lne);
        let v = is_lne(&x1()).unwrap();
        assert_eq!(v.status, LneStatus::Lne, "{:?}", v);
    }

    #[test]
    fn thin_rectangle_is_not_lne() {
        // Long sides t apart at distance t^2; midpoints are far along the link.
        let g = PolygonalGerm::chain(vec![arc("0", "0"), arc("t", "0"), arc("t", "t^2"), arc("0", "t^2")], true).unwrap();
        assert_eq!(is_lne(&g).unwrap().status, LneStatus::NotLne);
    }

    #[test]
    fn segment_exponents() {
        let (o, x) = (arc("0", "0"), arc("t", "0"));
        assert_eq!(point_segment_exponent(&arc("1/2*t", "t^3"), &o, &x), Some(qi(3)));
        assert_eq!(point_segment_exponent(&arc("2*t", "0"), &o, &x), Some(qi(1)));
        assert_eq!(point_segment_exponent(&arc("-t^2", "t^2"), &o, &x), Some(qi(2)));
        let e = segment_distance_exponent(&arc("0", "t^2"), &arc("t", "t^2"), &o, &x);
        assert_eq!(e, Some(qi(2)));
        assert_eq!(segment_distance_exponent(&o, &arc("0", "t"), &o, &x), None);
    }

    #[test]
    fn lne_constant_examples() {
        let seg = PolygonalGerm::chain(vec![arc("0", "0"), arc("t", "0")], false).unwrap();
        assert_eq!(lne_constant(&seg, 0.125).unwrap(), 1.0);
        let corner = PolygonalGerm::chain(vec![arc("t", "0"), arc("0", "0"), arc("0", "t")], false).unwrap();
        assert!((lne_constant(&corner, 0.125).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        let c = lne_constant(&square(), 0.125).unwrap();
        assert!((1.0..=2.01).contains(&c), "{}", c);
        // Exhaustive oracle over a fine boundary sampling of the square.
        let side = 0.25;
        let per = 4.0 * side;
        let pos = |s: f64| -> P2 {
            let s = s.rem_euclid(per);
            let h = side / 2.0;
            if s < side {
                [h - s, h]
            } else if s < 2.0 * side {
                [-h, h - (s - side)]
            } else if s < 3.0 * side {
                [-h + (s - 2.0 * side), -h]
            } else {
                [h, -h + (s - 3.0 * side)]
            }
        };
        let mut sup: f64 = 1.0;
        for i in 0..200 {
            for j in i + 1..200 {
                let (s1, s2) = (per * i as f64 / 200.0, per * j as f64 / 200.0);
                let inner = (s2 - s1).min(per - (s2 - s1));
                sup = sup.max(inner / geom::dist(pos(s1), pos(s2)));
            }
        }
        assert!(c <= sup + 1e-9 && sup <= 2.0 + 1e-9);
    }

    fn series() -> impl Strategy<Value = PuiseuxSeries> {
        proptest::collection::vec((1i64..=8, 1i64..=2, -5i64..=5), 1..4).prop_map(|terms| {
            PuiseuxSeries::from_terms(terms.into_iter().map(|(n, d, c)| (q(n + d, d), qi(c))).collect(), qi(12))
        })
    }

    fn arcs() -> impl Strategy<Value = ArcGerm> {
        (series(), series()).prop_map(|(x, y)| ArcGerm::raw(x, y))
    }

    proptest! {
        #[test]
        fn tord_symmetric_and_ultrametric(a in arcs(), b in arcs(), c in arcs()) {
            let ab = tord(&a, &b).unwrap();
            prop_assert_eq!(ab.clone(), tord(&b, &a).unwrap());
            let (ab, bc, ac) = (ab.to_f64(), tord(&b, &c).unwrap().to_f64(), tord(&a, &c).unwrap().to_f64());
            prop_assert!(ac >= ab.min(bc));
            if ab != bc {
                prop_assert_eq!(ac, ab.min(bc));
            }
        }

        #[test]
        fn limit_angle_symmetric_and_stable(a in arcs(), b in arcs(), c in arcs(), n in arcs()) {
            if let (Ok(x), Ok(y)) = (limit_angle(&a, &b, &c), limit_angle(&c, &b, &a)) {
                prop_assert!((x - y).abs() < 1e-12);
                // Noise of order t^10 does not move the limit directions.
                let noise = n.scale(&PuiseuxSeries::monomial(qi(1), qi(8), qi(12)));
                let z = limit_angle(&a.add(&noise), &b.sub(&noise), &c.add(&noise)).unwrap();
                let lead = [a.sub(&b), c.sub(&b)].iter().map(|d| qf(d.leading_exponent().as_ref().unwrap())).fold(0.0, f64::max);
                if lead < 8.0 {
                    prop_assert!((x - z).abs() < 1e-12);
                }
            }
        }
    }
}
