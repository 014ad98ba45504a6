//! Arcs, polygonal germs, plane links and synchronized families.
//!
//! An arc is `γ(t) = (x(t), y(t), t)`; the third coordinate is implicit. A
//! polygonal germ is a list of components, each an open or closed chain of
//! vertex arcs; its plane link at `t` is the polyline through the evaluated
//! vertices. Components may share vertex arcs (a tail attached to a polygon).

use std::collections::HashMap;
use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::geom::{self, P2};
use crate::puiseux::{qf, qi, q_from_f64, Eventual, PuiseuxError, PuiseuxSeries, Q, DEFAULT_TRUNCATION};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GermError {
    #[error(transparent)]
    Series(#[from] PuiseuxError),
    #[error("ConeViolation: component {component}, vertex {vertex} has leading exponent {exponent} < 1")]
    ConeViolation { component: usize, vertex: usize, exponent: String },
    #[error("DuplicateVertex: component {component}, vertices {vertex} and {next} coincide")]
    DuplicateVertex { component: usize, vertex: usize, next: usize },
    #[error("TooFewVertices: component {component} has {count} vertices")]
    TooFewVertices { component: usize, count: usize },
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("InvalidT: plane link at t = {t} is not simple ({reason})")]
    InvalidT { t: f64, reason: String },
    #[error("no validated t-range: {0}")]
    NoValidRange(String),
    #[error("NotSynchronizable: {0}")]
    NotSynchronizable(String),
    #[error("germ has no components")]
    Empty,
}

/// An arc germ `(x(t), y(t), t)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ArcGerm {
    pub x: PuiseuxSeries,
    pub y: PuiseuxSeries,
}

impl ArcGerm {
    /// Checked constructor: both coordinates must vanish at least linearly.
    pub fn new(x: PuiseuxSeries, y: PuiseuxSeries) -> Result<Self, GermError> {
        let a = ArcGerm { x, y };
        if let Some(e) = a.leading_exponent() {
            if e < Q::one() {
                return Err(GermError::ConeViolation { component: 0, vertex: 0, exponent: e.to_string() });
            }
        }
        Ok(a)
    }

    /// Constructor without the cone check, for difference vectors and the like.
    pub fn raw(x: PuiseuxSeries, y: PuiseuxSeries) -> Self {
        ArcGerm { x, y }
    }

    /// Parses `x` and `y` from text with the default truncation.
    pub fn parse(x: &str, y: &str) -> Result<Self, GermError> {
        Self::new(x.parse()?, y.parse()?)
    }

    pub fn origin(truncation: Q) -> Self {
        ArcGerm { x: PuiseuxSeries::zero(truncation.clone()), y: PuiseuxSeries::zero(truncation) }
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    /// Smallest exponent among the two coordinates.
    pub fn leading_exponent(&self) -> Option<Q> {
        match (self.x.leading_exponent(), self.y.leading_exponent()) {
            (None, None) => None,
            (Some(a), None) => Some(a.clone()),
            (None, Some(b)) => Some(b.clone()),
            (Some(a), Some(b)) => Some(a.min(b).clone()),
        }
    }

    /// Coefficient vector at the leading exponent: the limit direction.
    pub fn leading_vector(&self) -> Option<(Q, Q)> {
        let e = self.leading_exponent()?;
        Some((self.x.coefficient_at(&e), self.y.coefficient_at(&e)))
    }

    pub fn truncation(&self) -> Q {
        self.x.truncation().min(self.y.truncation()).clone()
    }

    pub fn eval(&self, t: f64) -> P2 {
        [self.x.eval(t), self.y.eval(t)]
    }

    /// `self(t) - base(t)`, evaluated from the symbolic difference.
    pub fn eval_rel(&self, base: &ArcGerm, t: f64) -> P2 {
        self.sub(base).eval(t)
    }

    pub fn sub(&self, other: &ArcGerm) -> ArcGerm {
        ArcGerm { x: self.x.sub(&other.x), y: self.y.sub(&other.y) }
    }

    pub fn add(&self, other: &ArcGerm) -> ArcGerm {
        ArcGerm { x: self.x.add(&other.x), y: self.y.add(&other.y) }
    }

    pub fn scale(&self, s: &PuiseuxSeries) -> ArcGerm {
        ArcGerm { x: self.x.mul(s), y: self.y.mul(s) }
    }

    pub fn scale_q(&self, c: &Q) -> ArcGerm {
        ArcGerm { x: self.x.scale(c), y: self.y.scale(c) }
    }

    /// `self + s (other - self)`.
    pub fn lerp(&self, other: &ArcGerm, s: &PuiseuxSeries) -> ArcGerm {
        self.add(&other.sub(self).scale(s))
    }

    /// `self + s (other - self)` for a rational fraction `s`.
    pub fn lerp_q(&self, other: &ArcGerm, s: &Q) -> ArcGerm {
        self.add(&other.sub(self).scale_q(s))
    }

    pub fn dot(&self, other: &ArcGerm) -> PuiseuxSeries {
        self.x.mul(&other.x).add(&self.y.mul(&other.y))
    }

    pub fn cross(&self, other: &ArcGerm) -> PuiseuxSeries {
        self.x.mul(&other.y).sub(&self.y.mul(&other.x))
    }

    /// Coefficients of `t` in both coordinates.
    pub fn linear_part(&self) -> (Q, Q) {
        (self.x.coefficient_at(&Q::one()), self.y.coefficient_at(&Q::one()))
    }

    /// Limit of `‖(x, y)‖ / t`.
    pub fn cone_factor(&self) -> f64 {
        let (cx, cy) = self.linear_part();
        qf(&cx).hypot(qf(&cy))
    }

    /// Rotation by the exact rational rotation `r`.
    pub fn rotated(&self, r: &Rotation) -> ArcGerm {
        ArcGerm {
            x: self.x.scale(&r.cos).sub(&self.y.scale(&r.sin)),
            y: self.x.scale(&r.sin).add(&self.y.scale(&r.cos)),
        }
    }

    /// Text form `x = ...; y = ...`.
    pub fn to_line(&self) -> String {
        format!("x = {}; y = {}", self.x, self.y)
    }
}

/// Unit tangent `γ'(0) / ‖γ'(0)‖` of the 3-D arc.
pub fn tangent_direction(g: &ArcGerm) -> [f64; 3] {
    let (cx, cy) = g.linear_part();
    let v = [qf(&cx), qf(&cy), 1.0];
    let n = (v[0] * v[0] + v[1] * v[1] + 1.0).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// A rotation of the plane with rational cosine and sine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rotation {
    pub cos: Q,
    pub sin: Q,
}

impl Rotation {
    pub fn identity() -> Self {
        Rotation { cos: Q::one(), sin: Q::zero() }
    }

    /// Rational rotation from the half-angle tangent `u`.
    pub fn from_half_tangent(u: &Q) -> Self {
        let u2 = u * u;
        let den = Q::one() + &u2;
        Rotation { cos: (Q::one() - &u2) / &den, sin: (u * qi(2)) / den }
    }

    /// Rational rotation approximating `angle` (half-tangent rounded to 2^-24).
    pub fn from_angle(angle: f64) -> Self {
        if angle == 0.0 {
            return Self::identity();
        }
        let u = (angle / 2.0).tan();
        Self::from_half_tangent(&q_from_f64(u, 1 << 24))
    }

    /// Rotation taking the direction `(dx, dy)` approximately onto the positive x-axis.
    pub fn aligning(dx: f64, dy: f64) -> Self {
        Self::from_angle(-dy.atan2(dx))
    }

    pub fn angle(&self) -> f64 {
        qf(&self.sin).atan2(qf(&self.cos))
    }

    pub fn inverse(&self) -> Self {
        Rotation { cos: self.cos.clone(), sin: -&self.sin }
    }

    pub fn apply(&self, p: P2) -> P2 {
        let (c, s) = (qf(&self.cos), qf(&self.sin));
        [c * p[0] - s * p[1], s * p[0] + c * p[1]]
    }
}

/// The ruled surface of segments joining two arcs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearTriangle {
    pub a: ArcGerm,
    pub b: ArcGerm,
}

impl LinearTriangle {
    pub fn new(a: ArcGerm, b: ArcGerm) -> Option<Self> {
        if a == b {
            None
        } else {
            Some(LinearTriangle { a, b })
        }
    }

    /// Point `a(t) + s (b(t) - a(t))` of the link segment.
    pub fn point(&self, t: f64, s: f64) -> P2 {
        geom::lerp(self.a.eval(t), self.b.eval(t), s)
    }
}

/// One connected chain of vertex arcs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub vertices: Vec<ArcGerm>,
    pub closed: bool,
}

impl Component {
    pub fn new(vertices: Vec<ArcGerm>, closed: bool) -> Self {
        Component { vertices, closed }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Vertex index pairs of the edges, in chain order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.vertices.len();
        let mut e: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        if self.closed && n >= 3 {
            e.push((n - 1, 0));
        }
        e
    }
}

/// A validated polygonal surface germ.
#[derive(Clone, Debug, PartialEq)]
pub struct PolygonalGerm {
    pub components: Vec<Component>,
    /// Estimated cone opening: sup of `‖(x, y)‖ / t` over the vertex arcs.
    pub cone_a: f64,
}

/// Validates and assembles a germ from its components.
pub fn make_polygonal_germ(components: Vec<Component>) -> Result<PolygonalGerm, GermError> {
    if components.is_empty() {
        return Err(GermError::Empty);
    }
    let mut a: f64 = 0.0;
    for (ci, c) in components.iter().enumerate() {
        let min = if c.closed { 3 } else { 2 };
        if c.vertices.len() < min {
            return Err(GermError::TooFewVertices { component: ci, count: c.vertices.len() });
        }
        for (vi, v) in c.vertices.iter().enumerate() {
            if let Some(e) = v.leading_exponent() {
                if e < Q::one() {
                    return Err(GermError::ConeViolation { component: ci, vertex: vi, exponent: e.to_string() });
                }
            }
            a = a.max(v.cone_factor());
        }
        for (i, j) in c.edges() {
            if c.vertices[i].sub(&c.vertices[j]).is_zero() {
                return Err(GermError::DuplicateVertex { component: ci, vertex: i, next: j });
            }
        }
    }
    Ok(PolygonalGerm { components, cone_a: a })
}

impl PolygonalGerm {
    pub fn new(components: Vec<Component>) -> Result<Self, GermError> {
        make_polygonal_germ(components)
    }

    /// Single-component convenience constructor.
    pub fn chain(vertices: Vec<ArcGerm>, closed: bool) -> Result<Self, GermError> {
        make_polygonal_germ(vec![Component::new(vertices, closed)])
    }

    pub fn vertex(&self, component: usize, index: usize) -> &ArcGerm {
        &self.components[component].vertices[index]
    }

    pub fn vertex_count(&self) -> usize {
        self.components.iter().map(|c| c.len()).sum()
    }

    pub fn truncation(&self) -> Q {
        self.components
            .iter()
            .flat_map(|c| c.vertices.iter())
            .map(|v| v.truncation())
            .min()
            .unwrap_or_else(|| qi(DEFAULT_TRUNCATION))
    }

    pub fn has_open_components(&self) -> bool {
        self.components.iter().any(|c| !c.closed)
    }

    pub fn link_graph(&self) -> LinkGraph {
        LinkGraph::new(self)
    }

    /// Plane link at `t`; fails when the link is not simple there.
    pub fn plane_link(&self, t: f64) -> Result<PlaneLink, GermError> {
        plane_link(self, t)
    }

    /// Canonical text of the germ file.
    pub fn to_text(&self) -> String {
        format_germ(self)
    }

    /// SHA-256 of the canonical text, hex encoded.
    pub fn digest(&self) -> String {
        let h = Sha256::digest(self.to_text().as_bytes());
        h.iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{:02x}", b);
            s
        })
    }
}

/// Vertex identified across components: identical arcs share one node.
#[derive(Clone, Debug)]
pub struct LinkGraph {
    pub nodes: Vec<ArcGerm>,
    /// `node_of[component][vertex]`.
    pub node_of: Vec<Vec<usize>>,
    pub edges: Vec<LinkEdge>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LinkEdge {
    pub component: usize,
    /// Position of the edge in [`Component::edges`].
    pub index: usize,
    pub a: usize,
    pub b: usize,
}

impl LinkGraph {
    pub fn new(g: &PolygonalGerm) -> Self {
        let mut nodes: Vec<ArcGerm> = Vec::new();
        let mut lookup: HashMap<ArcGerm, usize> = HashMap::new();
        let mut node_of = Vec::new();
        for c in &g.components {
            let mut ids = Vec::new();
            for v in &c.vertices {
                let id = *lookup.entry(v.clone()).or_insert_with(|| {
                    nodes.push(v.clone());
                    nodes.len() - 1
                });
                ids.push(id);
            }
            node_of.push(ids);
        }
        let mut edges = Vec::new();
        for (ci, c) in g.components.iter().enumerate() {
            for (k, (i, j)) in c.edges().into_iter().enumerate() {
                edges.push(LinkEdge { component: ci, index: k, a: node_of[ci][i], b: node_of[ci][j] });
            }
        }
        LinkGraph { nodes, node_of, edges }
    }

    pub fn neighbours(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for (k, e) in self.edges.iter().enumerate() {
            adj[e.a].push((e.b, k));
            adj[e.b].push((e.a, k));
        }
        adj
    }

    /// Connected-component label of every node.
    pub fn connectivity(&self) -> Vec<usize> {
        let adj = self.neighbours();
        let mut label = vec![usize::MAX; self.nodes.len()];
        let mut next = 0;
        for s in 0..self.nodes.len() {
            if label[s] != usize::MAX {
                continue;
            }
            let mut stack = vec![s];
            label[s] = next;
            while let Some(u) = stack.pop() {
                for &(v, _) in &adj[u] {
                    if label[v] == usize::MAX {
                        label[v] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn eval_nodes(&self, t: f64) -> Vec<P2> {
        self.nodes.iter().map(|n| n.eval(t)).collect()
    }
}

/// Sampled plane link.
#[derive(Clone, Debug, PartialEq)]
pub struct PlaneLink {
    pub t: f64,
    pub components: Vec<(Vec<P2>, bool)>,
}

pub fn plane_link(g: &PolygonalGerm, t: f64) -> Result<PlaneLink, GermError> {
    if !(t > 0.0) {
        return Err(GermError::InvalidT { t, reason: "t must be positive".into() });
    }
    let checker = LinkChecker::new(g);
    if let Err(reason) = checker.simple_at(t) {
        return Err(GermError::InvalidT { t, reason });
    }
    Ok(PlaneLink {
        t,
        components: g
            .components
            .iter()
            .map(|c| (c.vertices.iter().map(|v| v.eval(t)).collect(), c.closed))
            .collect(),
    })
}

/// Sampling grid of link parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct GridConfig {
    /// Largest sampled `t`; computed from the germ when absent.
    pub t_max: Option<f64>,
    /// Number of halvings below `t_max`.
    pub depth: u32,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { t_max: None, depth: 15 }
    }
}

impl GridConfig {
    pub fn fixed(t_max: f64, depth: u32) -> Self {
        GridConfig { t_max: Some(t_max), depth }
    }

    pub fn grid_from(t_max: f64, depth: u32) -> Vec<f64> {
        (0..=depth).map(|j| t_max * 0.5f64.powi(j as i32)).collect()
    }
}

/// Largest dyadic exponent searched when computing `t_max`.
const MAX_DYADIC: i32 = 30;

/// The certificate grid: `t_max 2^-j`, `j = 0..=depth`, on which every link is
/// simple and every ordering predicate agrees with its leading-term verdict.
pub fn validated_grid(g: &PolygonalGerm, cfg: &GridConfig) -> Result<Vec<f64>, GermError> {
    let checker = LinkChecker::new(g);
    if let Some(t_max) = cfg.t_max {
        let grid = GridConfig::grid_from(t_max, cfg.depth);
        for &t in &grid {
            checker.valid_at(t).map_err(|reason| GermError::InvalidT { t, reason })?;
        }
        return Ok(grid);
    }
    let mut ok: HashMap<i32, bool> = HashMap::new();
    let mut last_reason = String::new();
    'outer: for k in 1..=MAX_DYADIC {
        for m in k..=k + cfg.depth as i32 {
            let good = *ok.entry(m).or_insert_with(|| match checker.valid_at(0.5f64.powi(m)) {
                Ok(()) => true,
                Err(r) => {
                    last_reason = r;
                    false
                }
            });
            if !good {
                continue 'outer;
            }
        }
        return Ok(GridConfig::grid_from(0.5f64.powi(k), cfg.depth));
    }
    Err(GermError::NoValidRange(last_reason))
}

/// Precomputed symbolic predicates for link validity checks.
pub struct LinkChecker {
    graph: LinkGraph,
    /// `diff[i][j] = node_j - node_i`.
    diff: Vec<Vec<ArcGerm>>,
    coordinate_signs: Vec<(usize, usize, Eventual, Eventual)>,
    orientations: Vec<(usize, usize, usize, PuiseuxSeries, Eventual)>,
    overlapping: Option<String>,
}

impl LinkChecker {
    pub fn new(g: &PolygonalGerm) -> Self {
        let graph = g.link_graph();
        let n = graph.nodes.len();
        let diff: Vec<Vec<ArcGerm>> =
            (0..n).map(|i| (0..n).map(|j| graph.nodes[j].sub(&graph.nodes[i])).collect()).collect();
        let mut coordinate_signs = Vec::new();
        let mut orientations = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let d = &diff[i][j];
                coordinate_signs.push((i, j, d.x.sign_eventual(), d.y.sign_eventual()));
                for k in j + 1..n {
                    let c = d.cross(&diff[i][k]);
                    let s = c.sign_eventual();
                    orientations.push((i, j, k, c, s));
                }
            }
        }
        let overlapping = Self::find_overlap(&graph, &diff);
        LinkChecker { graph, diff, coordinate_signs, orientations, overlapping }
    }

    /// Edges sharing a node that run along each other.
    fn find_overlap(graph: &LinkGraph, diff: &[Vec<ArcGerm>]) -> Option<String> {
        let m = graph.edges.len();
        for p in 0..m {
            for r in p + 1..m {
                let (e, f) = (graph.edges[p], graph.edges[r]);
                let shared: Vec<usize> = [e.a, e.b].into_iter().filter(|x| *x == f.a || *x == f.b).collect();
                if shared.len() == 2 {
                    return Some(format!("edges {:?} and {:?} coincide", (e.a, e.b), (f.a, f.b)));
                }
                if shared.len() == 1 {
                    let s = shared[0];
                    let u = if e.a == s { e.b } else { e.a };
                    let v = if f.a == s { f.b } else { f.a };
                    let (du, dv) = (&diff[s][u], &diff[s][v]);
                    if du.cross(dv).is_zero() && du.dot(dv).sign_eventual() == Eventual::Greater {
                        return Some(format!("edges at node {} overlap", s));
                    }
                }
            }
        }
        None
    }

    fn sign_of(x: f64) -> Eventual {
        if x > 0.0 {
            Eventual::Greater
        } else if x < 0.0 {
            Eventual::Less
        } else {
            Eventual::Equal
        }
    }

    /// Link simplicity plus agreement of all predicates with their eventual signs.
    pub fn valid_at(&self, t: f64) -> Result<(), String> {
        for (i, j, sx, sy) in &self.coordinate_signs {
            let p = self.diff[*i][*j].eval(t);
            if Self::sign_of(p[0]) != *sx || Self::sign_of(p[1]) != *sy {
                return Err(format!("coordinate order of nodes {} and {} not settled", i, j));
            }
        }
        for (i, j, k, c, s) in &self.orientations {
            if Self::sign_of(c.eval(t)) != *s {
                return Err(format!("orientation of nodes {}, {}, {} not settled", i, j, k));
            }
        }
        self.simple_at(t)
    }

    /// Non-adjacent link segments are disjoint at `t`.
    pub fn simple_at(&self, t: f64) -> Result<(), String> {
        if let Some(r) = &self.overlapping {
            return Err(r.clone());
        }
        let m = self.graph.edges.len();
        for p in 0..m {
            let e = self.graph.edges[p];
            for r in p + 1..m {
                let f = self.graph.edges[r];
                if e.a == f.a || e.a == f.b || e.b == f.a || e.b == f.b {
                    continue;
                }
                let o = [0.0, 0.0];
                let b = self.diff[e.a][e.b].eval(t);
                let c = self.diff[e.a][f.a].eval(t);
                let d = self.diff[e.a][f.b].eval(t);
                if geom::segments_intersect(o, b, c, d) {
                    return Err(format!("edges {:?} and {:?} meet", (e.a, e.b), (f.a, f.b)));
                }
            }
        }
        Ok(())
    }
}

/// A chain seen as the graph of a piecewise-linear function after rotation.
#[derive(Clone, Debug, PartialEq)]
pub struct SynchronizedFamily {
    pub rotation: Rotation,
    /// Rotated vertex arcs with eventually increasing x.
    pub vertices: Vec<ArcGerm>,
    /// Limit slope of each segment; `None` when it diverges.
    pub limit_slopes: Vec<Option<Q>>,
    /// Slope bound `M`; `None` when the family is not bounded.
    pub m_bound: Option<f64>,
}

/// Default sampling grid for slope margins.
pub fn default_grid() -> Vec<f64> {
    GridConfig::grid_from(0.5f64.powi(5), 15)
}

pub fn synchronized_view(chain: &[ArcGerm], theta: f64) -> Result<SynchronizedFamily, GermError> {
    synchronized_view_on(chain, &Rotation::from_angle(theta), &default_grid())
}

/// Synchronized view under an exact rotation, with slope margins from `grid`.
pub fn synchronized_view_on(chain: &[ArcGerm], rotation: &Rotation, grid: &[f64]) -> Result<SynchronizedFamily, GermError> {
    if chain.len() < 2 {
        return Err(GermError::NotSynchronizable("need at least two vertices".into()));
    }
    let vertices: Vec<ArcGerm> = chain.iter().map(|v| v.rotated(rotation)).collect();
    let mut limit_slopes = Vec::new();
    for w in vertices.windows(2) {
        let d = w[1].sub(&w[0]);
        if d.x.sign_eventual() != Eventual::Greater {
            return Err(GermError::NotSynchronizable("rotated x-coordinates are not eventually increasing".into()));
        }
        let ex = d.x.leading_exponent().cloned().unwrap_or_else(Q::zero);
        let slope = match d.y.leading_exponent() {
            None => Some(Q::zero()),
            Some(ey) if ey > &ex => Some(Q::zero()),
            Some(ey) if ey == &ex => Some(d.y.leading_coefficient().unwrap() / d.x.leading_coefficient().unwrap()),
            Some(_) => None,
        };
        limit_slopes.push(slope);
    }
    let m_bound = if limit_slopes.iter().any(|s| s.is_none()) {
        None
    } else {
        let limit = limit_slopes.iter().map(|s| qf(&s.clone().unwrap().abs())).fold(0.0, f64::max);
        let mut sampled: f64 = 0.0;
        for &t in grid {
            for w in vertices.windows(2) {
                let d = w[1].sub(&w[0]).eval(t);
                if d[0] > 0.0 {
                    sampled = sampled.max((d[1] / d[0]).abs());
                }
            }
        }
        Some(limit.max(sampled))
    };
    Ok(SynchronizedFamily { rotation: rotation.clone(), vertices, limit_slopes, m_bound })
}

impl SynchronizedFamily {
    /// Rotated vertices at `t`, relative to the first vertex.
    pub fn points(&self, t: f64) -> Vec<P2> {
        let base = &self.vertices[0];
        self.vertices.iter().map(|v| v.eval_rel(base, t)).collect()
    }

    /// `f_t(x)` for `x` relative to the first vertex.
    pub fn eval(&self, t: f64, x: f64) -> f64 {
        interpolate(&self.points(t), x)
    }

    pub fn slopes_at(&self, t: f64) -> Vec<f64> {
        self.points(t).windows(2).map(|w| (w[1][1] - w[0][1]) / (w[1][0] - w[0][0])).collect()
    }

    /// Sampled sup of `|∂f_t(x)/∂t|` over interior abscissae common to `t ± h`.
    pub fn t_derivative_sup(&self, t: f64) -> f64 {
        let h = t * 1e-4;
        let base = &self.vertices[0];
        let at = |s: f64| -> Vec<P2> { self.vertices.iter().map(|v| v.eval_rel(base, s)).collect() };
        let (lo, hi) = (at(t - h), at(t + h));
        let start = lo[0][0].max(hi[0][0]);
        let end = lo.last().unwrap()[0].min(hi.last().unwrap()[0]);
        let mut sup: f64 = 0.0;
        for k in 1..64 {
            let x = start + (end - start) * k as f64 / 64.0;
            let d = (interpolate(&hi, x) - interpolate(&lo, x)) / (2.0 * h);
            sup = sup.max(d.abs());
        }
        sup
    }
}

/// Piecewise-linear interpolation through points with increasing x.
pub fn interpolate(pts: &[P2], x: f64) -> f64 {
    let n = pts.len();
    if x <= pts[0][0] {
        return pts[0][1];
    }
    for w in pts.windows(2) {
        if x <= w[1][0] {
            let s = (x - w[0][0]) / (w[1][0] - w[0][0]);
            return w[0][1] + s * (w[1][1] - w[0][1]);
        }
    }
    pts[n - 1][1]
}

/// Parses the `lipgerm v1` text format.
pub fn parse_germ(text: &str, default_truncation: &Q) -> Result<PolygonalGerm, GermError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    match lines.next() {
        Some((_, "lipgerm v1")) => {}
        Some((n, other)) => {
            return Err(GermError::Parse { line: n, message: format!("expected header `lipgerm v1`, found `{}`", other) })
        }
        None => return Err(GermError::Parse { line: 1, message: "empty file".into() }),
    }
    let mut components: Vec<Component> = Vec::new();
    for (n, line) in lines {
        if let Some(kind) = line.strip_prefix("component") {
            let closed = match kind.trim() {
                "open" => false,
                "closed" => true,
                k => return Err(GermError::Parse { line: n, message: format!("unknown component kind `{}`", k) }),
            };
            components.push(Component::new(Vec::new(), closed));
            continue;
        }
        let comp = components
            .last_mut()
            .ok_or_else(|| GermError::Parse { line: n, message: "vertex before any `component` line".into() })?;
        let (xs, ys) = line
            .split_once(';')
            .ok_or_else(|| GermError::Parse { line: n, message: "expected `x = ...; y = ...`".into() })?;
        let x = field(xs, "x", n)?;
        let y = field(ys, "y", n)?;
        let parse = |s: &str| {
            PuiseuxSeries::parse_with(s, default_truncation).map_err(|e| GermError::Parse { line: n, message: e.to_string() })
        };
        comp.vertices.push(ArcGerm::raw(parse(x)?, parse(y)?));
    }
    make_polygonal_germ(components)
}

fn field<'a>(s: &'a str, name: &str, line: usize) -> Result<&'a str, GermError> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| GermError::Parse { line, message: format!("expected `{} = ...`", name) })?;
    if k.trim() != name {
        return Err(GermError::Parse { line, message: format!("expected `{}`, found `{}`", name, k.trim()) });
    }
    Ok(v.trim())
}

/// Canonical germ-file text.
pub fn format_germ(g: &PolygonalGerm) -> String {
    let mut s = String::from("lipgerm v1\n");
    for c in &g.components {
        let _ = writeln!(s, "component {}", if c.closed { "closed" } else { "open" });
        for v in &c.vertices {
            let _ = writeln!(s, "{}", v.to_line());
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::puiseux::q;

    fn arc(x: &str, y: &str) -> ArcGerm {
        ArcGerm::parse(x, y).unwrap()
    }

    fn square() -> PolygonalGerm {
        PolygonalGerm::chain(vec![arc("t", "t"), arc("-t", "t"), arc("-t", "-t"), arc("t", "-t")], true).unwrap()
    }

    #[test]
    fn square_cone_estimate() {
        assert!((square().cone_a - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn cone_violation() {
        let e = PolygonalGerm::chain(vec![arc("0", "0"), ArcGerm::raw("t^{1/2}".parse().unwrap(), "0".parse().unwrap())], false);
        assert!(matches!(e, Err(GermError::ConeViolation { .. })));
        assert!(ArcGerm::parse("t^{1/2}", "0").is_err());
    }

    #[test]
    fn structural_errors() {
        let e = PolygonalGerm::chain(vec![arc("t", "0"), arc("t", "0")], false);
        assert!(matches!(e, Err(GermError::DuplicateVertex { .. })));
        let e = PolygonalGerm::chain(vec![arc("t", "0"), arc("0", "t")], true);
        assert!(matches!(e, Err(GermError::TooFewVertices { .. })));
    }

    #[test]
    fn square_link() {
        let l = square().plane_link(0.25).unwrap();
        assert_eq!(l.components[0].0, vec![[0.25, 0.25], [-0.25, 0.25], [-0.25, -0.25], [0.25, -0.25]]);
    }

    #[test]
    fn tangent_directions() {
        let s = 0.5f64.sqrt();
        let d = tangent_direction(&arc("t", "0"));
        assert!((d[0] - s).abs() < 1e-15 && d[1] == 0.0 && (d[2] - s).abs() < 1e-15);
        assert_eq!(tangent_direction(&arc("t^2", "t^3")), [0.0, 0.0, 1.0]);
        let d = tangent_direction(&arc("t", "t"));
        let r = 1.0 / 3f64.sqrt();
        assert!(d.iter().all(|c| (c - r).abs() < 1e-15));
    }

    #[test]
    fn crossing_only_at_large_t() {
        // The two segments cross while t > 1/4 and separate below.
        let g = PolygonalGerm::new(vec![
            Component::new(vec![arc("0", "0"), arc("t", "0")], false),
            Component::new(vec![arc("1/2*t", "1/4*t - t^2"), arc("1/2*t", "t")], false),
        ])
        .unwrap();
        assert!(matches!(g.plane_link(0.5), Err(GermError::InvalidT { .. })));
        assert!(g.plane_link(0.125).is_ok());
        let grid = validated_grid(&g, &GridConfig::default()).unwrap();
        assert!(grid[0] < 0.25);
    }

    #[test]
    fn file_round_trip() {
        let g = square();
        let text = g.to_text();
        let back = parse_germ(&text, &qi(12)).unwrap();
        assert_eq!(back, g);
        let l = back.plane_link(0.125).unwrap();
        assert_eq!(l, g.plane_link(0.125).unwrap());
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_germ("nope", &qi(12)), Err(GermError::Parse { .. })));
        assert!(matches!(parse_germ("lipgerm v1\nx = t; y = 0", &qi(12)), Err(GermError::Parse { .. })));
        assert!(matches!(parse_germ("lipgerm v1\ncomponent open\nx = t", &qi(12)), Err(GermError::Parse { .. })));
        let g = parse_germ("lipgerm v1\n# comment\ncomponent open\nx = 0; y = 0\nx = t; y = t^2 # tail\n", &qi(12)).unwrap();
        assert_eq!(g.components[0].len(), 2);
    }

    #[test]
    fn synchronized_tent() {
        let chain = [arc("-t", "0"), arc("0", "t"), arc("t", "0")];
        let f = synchronized_view(&chain, 0.0).unwrap();
        assert_eq!(f.limit_slopes, vec![Some(qi(1)), Some(qi(-1))]);
        assert!((f.m_bound.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn synchronized_unbounded() {
        let chain = [arc("-t^2", "0"), arc("0", "t"), arc("t^2", "0")];
        let f = synchronized_view(&chain, 0.0).unwrap();
        assert_eq!(f.m_bound, None);
    }

    #[test]
    fn synchronized_single_segment() {
        let chain = [arc("0", "0"), arc("2*t", "t")];
        let f = synchronized_view(&chain, 0.0).unwrap();
        assert_eq!(f.limit_slopes, vec![Some(q(1, 2))]);
        assert!((f.m_bound.unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn not_synchronizable() {
        let chain = [arc("t", "0"), arc("0", "t"), arc("2*t", "0")];
        assert!(matches!(synchronized_view(&chain, 0.0), Err(GermError::NotSynchronizable(_))));
    }

    #[test]
    fn rational_rotation_is_orthogonal() {
        let r = Rotation::from_angle(0.7);
        assert_eq!(&r.cos * &r.cos + &r.sin * &r.sin, Q::one());
        assert!((r.angle() - 0.7).abs() < 1e-6);
    }
}
