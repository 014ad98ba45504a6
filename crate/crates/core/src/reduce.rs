//! Certified edge reduction of connected LNE polygonal germs.
//!
//! Every move rewrites the vertex list of a single chain and carries clearance
//! certificates for the envelopes it relies on. Moves refer to vertex indices
//! of the chain as it stands when the move is applied, so a trace replays by
//! folding [`apply_move`] over the initial chain.

use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::envelope::{
    delta_search, theta_search, ClearanceCertificate, ClearanceVerdict, EnvelopeError,
};
use crate::germ::{
    synchronized_view_on, validated_grid, ArcGerm, Component, GermError, GridConfig, PolygonalGerm, Rotation,
};
use crate::hull::{chain_hull_triangulation, GermPoints};
use crate::metric::{is_lne, tord, LneStatus, MetricError, TordValue};
use crate::puiseux::{q, q_from_f64, qf, qi, PuiseuxSeries, Q};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReduceError {
    #[error("NotLNEInput: {0}")]
    NotLneInput(String),
    #[error("AngleNotPi at vertex {0}")]
    AngleNotPi(usize),
    #[error("TordMismatch at vertex {vertex}: {left} vs {right}")]
    TordMismatch { vertex: usize, left: String, right: String },
    #[error("NoEpsilonFound at vertex {0}")]
    NoEpsilonFound(usize),
    #[error("PreconditionFailed: {0}")]
    PreconditionFailed(String),
    #[error("ClearanceFailed: {0}")]
    ClearanceFailed(String),
    #[error("PipelineStuck: {0}")]
    PipelineStuck(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Germ(#[from] GermError),
}

/// One arc inserted on an existing edge: `v[from] + s(t) (v[to] - v[from])`,
/// placed at position `at` of the vertex list.
#[derive(Clone, Debug, PartialEq)]
pub struct Insertion {
    pub from: usize,
    pub to: usize,
    pub fraction: PuiseuxSeries,
    pub at: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MoveKind {
    CollinearRemoval { vertex: usize },
    /// `v[vertex] ← v[vertex] + s (v[toward] - v[vertex])`.
    VertexSlide { vertex: usize, toward: usize, fraction: Q },
    VertexDrop { vertex: usize },
    /// Per vertex: slide towards the previous vertex by `ε₁`, then towards the next by `ε₂`.
    Perturbation { steps: Vec<(usize, Q, Q)> },
    TriangleCollapse { vertex: usize },
    /// Substitute arcs flanking the max-exponent run `(k1, k2)` (edge indices).
    MaxRunCollapse { run: (usize, usize), inserted: Vec<Insertion> },
    /// Reverse the labels (if set), then rotate left by `rotate`.
    Relabel { rotate: usize, reverse: bool },
}

impl MoveKind {
    pub fn name(&self) -> &'static str {
        match self {
            MoveKind::CollinearRemoval { .. } => "CollinearRemoval",
            MoveKind::VertexSlide { .. } => "VertexSlide",
            MoveKind::VertexDrop { .. } => "VertexDrop",
            MoveKind::Perturbation { .. } => "Perturbation",
            MoveKind::TriangleCollapse { .. } => "TriangleCollapse",
            MoveKind::MaxRunCollapse { .. } => "MaxRunCollapse",
            MoveKind::Relabel { .. } => "Relabel",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EnvelopeParam {
    Theta(f64),
    Delta(f64),
    /// Pure relabelling or subdivision: the germ is unchanged as a set.
    Identity,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReductionMove {
    pub kind: MoveKind,
    pub params: Vec<EnvelopeParam>,
    pub certificates: Vec<ClearanceCertificate>,
}

impl ReductionMove {
    fn identity(kind: MoveKind) -> Self {
        ReductionMove {
            kind,
            params: vec![EnvelopeParam::Identity],
            certificates: vec![ClearanceCertificate { samples: Vec::new(), verdict: ClearanceVerdict::Clear }],
        }
    }

    pub fn is_certified(&self) -> bool {
        !self.certificates.is_empty() && self.certificates.iter().all(|c| c.is_clear())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CanonicalForm {
    HolderTriangle(Q),
    Horn(Q),
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CanonicalForm::HolderTriangle(a) => write!(f, "HolderTriangle alpha={}", a),
            CanonicalForm::Horn(b) if b.is_one() => write!(f, "Horn beta=1 (cone)"),
            CanonicalForm::Horn(b) => write!(f, "Horn beta={}", b),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReductionTrace {
    pub initial_digest: String,
    pub initial: Component,
    pub moves: Vec<ReductionMove>,
    pub final_chain: Component,
    pub form: CanonicalForm,
    /// Leading exponent of the circumradius of the final 3-gon.
    pub circumradius_exponent: Option<Q>,
}

impl ReductionTrace {
    /// Chains before the first move and after each move, by replay.
    pub fn states(&self) -> Vec<Component> {
        let mut out = vec![self.initial.clone()];
        let mut cur = self.initial.clone();
        for m in &self.moves {
            cur = apply_move(&cur, &m.kind);
            out.push(cur.clone());
        }
        out
    }

    pub fn replay(&self) -> Component {
        self.moves.iter().fold(self.initial.clone(), |c, m| apply_move(&c, &m.kind))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("lipgerm-trace v1\n");
        s.push_str(&format!("initial {}\n", self.initial_digest));
        for (k, m) in self.moves.iter().enumerate() {
            s.push_str(&format!("move {} {}\n", k + 1, m.kind.name()));
            match &m.kind {
                MoveKind::CollinearRemoval { vertex }
                | MoveKind::VertexDrop { vertex }
                | MoveKind::TriangleCollapse { vertex } => s.push_str(&format!("  vertex {}\n", vertex)),
                MoveKind::VertexSlide { vertex, toward, fraction } => {
                    s.push_str(&format!("  vertex {}\n  toward {}\n  epsilon {}\n", vertex, toward, fraction))
                }
                MoveKind::Perturbation { steps } => {
                    for (v, e1, e2) in steps {
                        s.push_str(&format!("  vertex {} epsilon1 {} epsilon2 {}\n", v, e1, e2));
                    }
                }
                MoveKind::MaxRunCollapse { run, inserted } => {
                    s.push_str(&format!("  run {}..{}\n", run.0, run.1));
                    for ins in inserted {
                        s.push_str(&format!(
                            "  insert at {} on {}->{} fraction {}\n",
                            ins.at, ins.from, ins.to, ins.fraction
                        ));
                    }
                }
                MoveKind::Relabel { rotate, reverse } => {
                    s.push_str(&format!("  reverse {}\n  rotate {}\n", reverse, rotate))
                }
            }
            for p in &m.params {
                match p {
                    EnvelopeParam::Theta(x) => s.push_str(&format!("  theta {:e}\n", x)),
                    EnvelopeParam::Delta(x) => s.push_str(&format!("  delta {:e}\n", x)),
                    EnvelopeParam::Identity => s.push_str("  envelope identity\n"),
                }
            }
            for c in &m.certificates {
                let min = c.samples.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
                s.push_str(&format!("  certificate {} samples {} min {:e}\n", c.verdict, c.samples.len(), min));
            }
        }
        s.push_str("final\n");
        s.push_str(&format!("  closed {}\n", self.final_chain.closed));
        for v in &self.final_chain.vertices {
            s.push_str(&format!("  {}\n", v.to_line()));
        }
        if let Some(r) = &self.circumradius_exponent {
            s.push_str(&format!("circumradius exponent {}\n", r));
        }
        s.push_str(&format!("form {}\n", self.form));
        s
    }
}

/// Applies one move to a chain.
pub fn apply_move(c: &Component, kind: &MoveKind) -> Component {
    let mut v = c.vertices.clone();
    let n = v.len();
    match kind {
        MoveKind::CollinearRemoval { vertex } | MoveKind::VertexDrop { vertex } | MoveKind::TriangleCollapse { vertex } => {
            v.remove(*vertex);
        }
        MoveKind::VertexSlide { vertex, toward, fraction } => {
            v[*vertex] = v[*vertex].lerp_q(&v[*toward], fraction);
        }
        MoveKind::Perturbation { steps } => {
            for (i, e1, e2) in steps {
                let (prev, next) = ((i + n - 1) % n, (i + 1) % n);
                let p = v[*i].lerp_q(&v[prev], e1);
                v[*i] = p.lerp_q(&v[next], e2);
            }
        }
        MoveKind::MaxRunCollapse { inserted, .. } => {
            for ins in inserted {
                let a = v[ins.from].lerp(&v[ins.to], &ins.fraction);
                v.insert(ins.at, a);
            }
        }
        MoveKind::Relabel { rotate, reverse } => {
            if *reverse {
                v.reverse();
            }
            v.rotate_left(*rotate);
        }
    }
    Component::new(v, c.closed)
}

/// Sampling grid and search settings for certificates.
#[derive(Clone, Debug, PartialEq)]
pub struct ReduceConfig {
    pub grid: Vec<f64>,
    /// Starting `δ` for supporting envelopes.
    pub delta_start: f64,
    /// Iteration cap of the pipeline, per vertex.
    pub max_steps_per_vertex: usize,
}

impl ReduceConfig {
    /// Twelve halvings from `min(t_max, 2^-5)`.
    pub fn for_germ(g: &PolygonalGerm) -> Result<Self, ReduceError> {
        let t_max = validated_grid(g, &GridConfig::default())?[0];
        Ok(Self::with_t_max(t_max))
    }

    pub fn with_t_max(t_max: f64) -> Self {
        ReduceConfig {
            grid: GridConfig::grid_from(t_max.min(0.5f64.powi(5)), 11),
            delta_start: 0.25,
            max_steps_per_vertex: 12,
        }
    }
}

/// Smallest slide fraction tried.
const MIN_FRACTION_LOG2: i64 = 20;

fn idx(i: isize, n: usize) -> usize {
    i.rem_euclid(n as isize) as usize
}

fn edge_exponent(a: &ArcGerm, b: &ArcGerm) -> Result<Q, ReduceError> {
    match tord(a, b)? {
        TordValue::Finite { exponent, .. } => Ok(exponent),
        TordValue::Infinite => Err(MetricError::CoincidentArcs.into()),
    }
}

/// Leading coefficient of `‖a - b‖`, as a float.
fn edge_coefficient(a: &ArcGerm, b: &ArcGerm) -> Result<f64, ReduceError> {
    match tord(a, b)? {
        TordValue::Finite { coefficient: Some(c), .. } => Ok(c.to_f64()),
        _ => Err(MetricError::CoincidentArcs.into()),
    }
}

/// `α_i = tord(γ_i, γ_{i+1})` along the chain.
pub fn chain_exponents(c: &Component) -> Result<Vec<Q>, ReduceError> {
    c.edges().into_iter().map(|(i, j)| edge_exponent(&c.vertices[i], &c.vertices[j])).collect()
}

/// Exact limit-angle classification at `b` between `a` and `c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AngleClass {
    Zero,
    Straight,
    Proper,
}

pub fn angle_class(a: &ArcGerm, b: &ArcGerm, c: &ArcGerm) -> Result<AngleClass, ReduceError> {
    let u = a.sub(b).leading_vector().ok_or(MetricError::CoincidentArcs)?;
    let w = c.sub(b).leading_vector().ok_or(MetricError::CoincidentArcs)?;
    let cross = &u.0 * &w.1 - &u.1 * &w.0;
    if !cross.is_zero() {
        return Ok(AngleClass::Proper);
    }
    let dot = &u.0 * &w.0 + &u.1 * &w.1;
    Ok(if dot.is_negative() { AngleClass::Straight } else { AngleClass::Zero })
}

/// Chain edges other than `skip`, as arc pairs, plus `extra`.
fn rest_edges(c: &Component, skip: &[(usize, usize)], extra: &[(ArcGerm, ArcGerm)]) -> Vec<(ArcGerm, ArcGerm)> {
    let same = |e: (usize, usize), s: (usize, usize)| e == s || (e.1, e.0) == s;
    let mut out: Vec<(ArcGerm, ArcGerm)> = c
        .edges()
        .into_iter()
        .filter(|&e| !skip.iter().any(|&s| same(e, s)))
        .map(|(i, j)| (c.vertices[i].clone(), c.vertices[j].clone()))
        .collect();
    out.extend_from_slice(extra);
    out
}

fn knead_certificate(
    a: &ArcGerm,
    b: &ArcGerm,
    c: &ArcGerm,
    rest: &[(ArcGerm, ArcGerm)],
    cfg: &ReduceConfig,
) -> Result<(f64, ClearanceCertificate), EnvelopeError> {
    theta_search(a, b, c, rest, &cfg.grid).map(|(theta, _, cert)| (theta, cert))
}

/// Removes vertex `i` when the limit angle there is `π`.
pub fn remove_collinear(c: &Component, i: usize, cfg: &ReduceConfig) -> Result<(Component, ReductionMove), ReduceError> {
    let n = c.len();
    if !c.closed && (i == 0 || i + 1 >= n) {
        return Err(ReduceError::PreconditionFailed(format!("vertex {} is an endpoint", i)));
    }
    let (p, nx) = (idx(i as isize - 1, n), idx(i as isize + 1, n));
    let v = &c.vertices;
    if angle_class(&v[p], &v[i], &v[nx])? != AngleClass::Straight {
        return Err(ReduceError::AngleNotPi(i));
    }
    // Rotate the secant onto the x-axis; the wedge is then a bounded synchronized chain.
    let (dx, dy) = v[nx].sub(&v[p]).leading_vector().ok_or(MetricError::CoincidentArcs)?;
    let rotation = Rotation::aligning(qf(&dx), qf(&dy));
    let wedge = [v[p].clone(), v[i].clone(), v[nx].clone()];
    let fam = synchronized_view_on(&wedge, &rotation, &cfg.grid)
        .map_err(|e| ReduceError::ClearanceFailed(e.to_string()))?;
    let rest = rest_edges(c, &[(p, i), (i, nx)], &[]);
    let (env, cert) = delta_search(&fam, cfg.delta_start, &rest, &cfg.grid)
        .map_err(|e| ReduceError::ClearanceFailed(e.to_string()))?;
    let kind = MoveKind::CollinearRemoval { vertex: i };
    let next = apply_move(c, &kind);
    Ok((next, ReductionMove { kind, params: vec![EnvelopeParam::Delta(env.delta)], certificates: vec![cert] }))
}

/// Certificate for sliding `v[j]` towards its neighbour `v[k]` by fraction `s`:
/// the wedge `(γ_ε, γ_j, γ_m)` is kneaded onto `γ_ε γ_m`.
fn slide_certificate(c: &Component, j: usize, k: usize, s: &Q, cfg: &ReduceConfig) -> Result<(f64, ClearanceCertificate, ArcGerm), EnvelopeError> {
    let n = c.len();
    let m = if idx(j as isize - 1, n) == k { idx(j as isize + 1, n) } else { idx(j as isize - 1, n) };
    let v = &c.vertices;
    let p = v[j].lerp_q(&v[k], s);
    let rest = rest_edges(c, &[(j, k), (j, m)], &[(v[k].clone(), p.clone())]);
    let (theta, cert) = knead_certificate(&p, &v[j], &v[m], &rest, cfg)?;
    Ok((theta, cert, p))
}

/// Slides vertex `i` towards `toward` (a neighbour) by the fraction `s` of that edge.
pub fn slide_vertex(c: &Component, i: usize, toward: usize, s: &Q, cfg: &ReduceConfig) -> Result<(Component, ReductionMove), ReduceError> {
    let n = c.len();
    let (p, nx) = (idx(i as isize - 1, n), idx(i as isize + 1, n));
    let interior = c.closed || (i > 0 && i + 1 < n);
    if !interior || (toward != p && toward != nx) {
        return Err(ReduceError::PreconditionFailed(format!("vertex {} cannot slide towards {}", i, toward)));
    }
    let v = &c.vertices;
    let (l, r) = (edge_exponent(&v[p], &v[i])?, edge_exponent(&v[i], &v[nx])?);
    if l != r {
        return Err(ReduceError::TordMismatch { vertex: i, left: l.to_string(), right: r.to_string() });
    }
    if angle_class(&v[p], &v[i], &v[nx])? != AngleClass::Proper {
        return Err(ReduceError::PreconditionFailed(format!("angle at vertex {} is not in (0, π)", i)));
    }
    let (theta, cert, _) =
        slide_certificate(c, i, toward, s, cfg).map_err(|e| ReduceError::ClearanceFailed(e.to_string()))?;
    let kind = MoveKind::VertexSlide { vertex: i, toward, fraction: s.clone() };
    Ok((apply_move(c, &kind), ReductionMove { kind, params: vec![EnvelopeParam::Theta(theta)], certificates: vec![cert] }))
}

/// Halving search for a certified slide, from `1/2` down to `2^-20`.
pub fn slide_search(c: &Component, i: usize, toward: usize, cfg: &ReduceConfig) -> Result<(Component, ReductionMove), ReduceError> {
    let mut s = q(1, 2);
    for _ in 0..MIN_FRACTION_LOG2 {
        match slide_vertex(c, i, toward, &s, cfg) {
            Ok(r) => return Ok(r),
            Err(ReduceError::ClearanceFailed(_)) => s /= qi(2),
            Err(e) => return Err(e),
        }
    }
    Err(ReduceError::NoEpsilonFound(i))
}

/// Drops vertex `i` whose incoming edge is tangent to higher order than the outgoing one.
pub fn drop_vertex(c: &Component, i: usize, cfg: &ReduceConfig) -> Result<(Component, ReductionMove), ReduceError> {
    let n = c.len();
    let v = &c.vertices;
    let interior = c.closed || (i > 0 && i + 1 < n);
    if !interior || n < 3 {
        return Err(ReduceError::PreconditionFailed(format!("vertex {} is not interior", i)));
    }
    let (p, nx) = (idx(i as isize - 1, n), idx(i as isize + 1, n));
    let (a_in, a_out) = (edge_exponent(&v[p], &v[i])?, edge_exponent(&v[i], &v[nx])?);
    if a_in <= a_out {
        return Err(ReduceError::PreconditionFailed(format!("tord {} into vertex {} is not above {}", a_in, i, a_out)));
    }
    let first_of_open = !c.closed && i == 1;
    if !first_of_open {
        let has_prev = c.closed || p >= 1;
        if !has_prev {
            return Err(ReduceError::PreconditionFailed("no edge before the wedge".into()));
        }
        let pp = idx(p as isize - 1, n);
        let a_prev = edge_exponent(&v[pp], &v[p])?;
        if a_prev > a_out {
            return Err(ReduceError::PreconditionFailed(format!("previous edge tord {} exceeds {}", a_prev, a_out)));
        }
    }
    let rest = rest_edges(c, &[(p, i), (i, nx)], &[]);
    let (theta, cert) =
        knead_certificate(&v[p], &v[i], &v[nx], &rest, cfg).map_err(|e| ReduceError::ClearanceFailed(e.to_string()))?;
    let kind = MoveKind::VertexDrop { vertex: i };
    Ok((apply_move(c, &kind), ReductionMove { kind, params: vec![EnvelopeParam::Theta(theta)], certificates: vec![cert] }))
}

/// Positions `lo..=hi` of an open window, or the whole closed chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Window {
    Open { lo: usize, hi: usize },
    Closed,
}

impl Window {
    fn bounds(&self, n: usize) -> (usize, usize) {
        match *self {
            Window::Open { lo, hi } => (lo, hi),
            Window::Closed => (0, n - 1),
        }
    }
}

fn collinear_triple_in(v: &[ArcGerm]) -> Option<(usize, usize, usize)> {
    let pts = GermPoints::new(v.to_vec());
    let n = v.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if pts.cross(i, j, k).is_zero() {
                    return Some((i, j, k));
                }
            }
        }
    }
    None
}

fn parallel_to_some(d: &ArcGerm, pts: &[&ArcGerm]) -> bool {
    for (a, x) in pts.iter().enumerate() {
        for y in &pts[a + 1..] {
            if d.cross(&y.sub(x)).is_zero() {
                return true;
            }
        }
    }
    false
}

/// Slides every interior window vertex off all lines through other window vertices.
pub fn perturb_to_nondegenerate(c: &Component, w: Window, cfg: &ReduceConfig) -> Result<(Component, ReductionMove), ReduceError> {
    let n = c.len();
    let (lo, hi) = w.bounds(n);
    if collinear_triple_in(&c.vertices[lo..=hi]).is_none() {
        return Ok((c.clone(), ReductionMove::identity(MoveKind::Perturbation { steps: Vec::new() })));
    }
    let exps: Vec<Q> = (lo..hi).map(|i| edge_exponent(&c.vertices[i], &c.vertices[i + 1])).collect::<Result<_, _>>()?;
    if exps.iter().any(|e| e != &exps[0]) {
        return Err(ReduceError::PreconditionFailed("window edges have different exponents".into()));
    }
    let mut cur = c.clone();
    let mut steps = Vec::new();
    let mut params = Vec::new();
    let mut certs = Vec::new();
    for i in lo + 1..hi {
        let others: Vec<usize> = (lo..=hi).filter(|&k| k != i).collect();
        // Step 1: towards the previous vertex.
        let mut s1 = q(1, 2);
        let mut found = None;
        for _ in 0..MIN_FRACTION_LOG2 {
            let v = &cur.vertices;
            let p = v[i].lerp_q(&v[i - 1], &s1);
            let pts: Vec<&ArcGerm> = others.iter().map(|&k| &v[k]).collect();
            if !parallel_to_some(&v[i + 1].sub(&p), &pts) {
                if let Ok((theta, cert, p)) = slide_certificate(&cur, i, i - 1, &s1, cfg) {
                    found = Some((theta, cert, p));
                    break;
                }
            }
            s1 /= qi(2);
        }
        let (theta1, cert1, p) = found.ok_or(ReduceError::NoEpsilonFound(i))?;
        let mut mid = cur.clone();
        mid.vertices[i] = p.clone();
        // Step 2: from the new position towards the next vertex.
        let mut s2 = q(1, 2);
        let mut found = None;
        for _ in 0..MIN_FRACTION_LOG2 {
            let v = &mid.vertices;
            let p2 = p.lerp_q(&v[i + 1], &s2);
            let pts: Vec<&ArcGerm> = others.iter().map(|&k| &v[k]).collect();
            let generic = !parallel_to_some(&v[i - 1].sub(&p2), &pts)
                && (0..pts.len()).all(|a| (a + 1..pts.len()).all(|b| !pts[a].sub(&p2).cross(&pts[b].sub(&p2)).is_zero()));
            if generic {
                if let Ok((theta, cert, p2)) = slide_certificate(&mid, i, i + 1, &s2, cfg) {
                    found = Some((theta, cert, p2));
                    break;
                }
            }
            s2 /= qi(2);
        }
        let (theta2, cert2, p2) = found.ok_or(ReduceError::NoEpsilonFound(i))?;
        cur.vertices[i] = p2;
        steps.push((i, s1, s2));
        params.extend([EnvelopeParam::Theta(theta1), EnvelopeParam::Theta(theta2)]);
        certs.extend([cert1, cert2]);
    }
    if let Some(t) = collinear_triple_in(&cur.vertices[lo..=hi]) {
        return Err(ReduceError::PipelineStuck(format!("collinear triple {:?} survives perturbation", t)));
    }
    let kind = MoveKind::Perturbation { steps };
    debug_assert_eq!(apply_move(c, &kind), cur);
    Ok((cur, ReductionMove { kind, params, certificates: certs }))
}

/// Middle vertices of triangles with two highlighted edges, in triangle order.
fn collapse_candidates(v: &[ArcGerm], closed: bool) -> Result<Vec<usize>, ReduceError> {
    let pts = GermPoints::new(v.to_vec());
    let tri = chain_hull_triangulation(&pts, closed).map_err(|e| ReduceError::PipelineStuck(e.to_string()))?;
    let n = v.len();
    let lit = |a: usize, b: usize| {
        let d = a.abs_diff(b);
        d == 1 || (closed && d == n - 1)
    };
    let mut out = Vec::new();
    for t in &tri.triangles {
        let sides = [(t[0], t[1], t[2]), (t[1], t[2], t[0]), (t[2], t[0], t[1])];
        let count = sides.iter().filter(|(a, b, _)| lit(*a, *b)).count();
        if count == 2 {
            for &(a, b, m) in &sides {
                // The middle vertex is the one opposite the unlit side.
                if !lit(a, b) && !out.contains(&m) {
                    out.push(m);
                }
            }
        }
    }
    Ok(out)
}

/// Kneads away vertex `i`: `γ_{i-1}γ_i ∪ γ_iγ_{i+1}` becomes `γ_{i-1}γ_{i+1}`.
pub fn triangle_collapse(c: &Component, i: usize, cfg: &ReduceConfig) -> Result<(Component, ReductionMove), ReduceError> {
    let n = c.len();
    let (p, nx) = (idx(i as isize - 1, n), idx(i as isize + 1, n));
    let v = &c.vertices;
    let rest = rest_edges(c, &[(p, i), (i, nx)], &[]);
    let (theta, cert) =
        knead_certificate(&v[p], &v[i], &v[nx], &rest, cfg).map_err(|e| ReduceError::ClearanceFailed(e.to_string()))?;
    let kind = MoveKind::TriangleCollapse { vertex: i };
    Ok((apply_move(c, &kind), ReductionMove { kind, params: vec![EnvelopeParam::Theta(theta)], certificates: vec![cert] }))
}

/// Case 1 on a window whose edges share one exponent: reduce it to one edge
/// (open window, ends fixed) or to a 3-gon (closed chain).
pub fn reduce_equal_window(c: &Component, w: Window, cfg: &ReduceConfig) -> Result<(Component, Vec<ReductionMove>), ReduceError> {
    let mut cur = c.clone();
    let mut moves = Vec::new();
    let mut w = w;
    loop {
        let n = cur.len();
        let (lo, hi) = w.bounds(n);
        let target = if matches!(w, Window::Closed) { 3 } else { 2 };
        if hi - lo + 1 <= target {
            return Ok((cur, moves));
        }
        let shrink = |w: Window| match w {
            Window::Open { lo, hi } => Window::Open { lo, hi: hi - 1 },
            Window::Closed => Window::Closed,
        };
        // Case 1.2: straight angles first.
        let inner: Vec<usize> = match w {
            Window::Open { lo, hi } => (lo + 1..hi).collect(),
            Window::Closed => (0..n).collect(),
        };
        let mut straight = None;
        for &i in &inner {
            let (p, nx) = (idx(i as isize - 1, n), idx(i as isize + 1, n));
            if angle_class(&cur.vertices[p], &cur.vertices[i], &cur.vertices[nx])? == AngleClass::Straight {
                straight = Some(i);
                break;
            }
        }
        if let Some(i) = straight {
            let (next, m) = remove_collinear(&cur, i, cfg)?;
            cur = next;
            moves.push(m);
            w = shrink(w);
            continue;
        }
        if collinear_triple_in(&cur.vertices[lo..=hi]).is_some() {
            let (next, m) = perturb_to_nondegenerate(&cur, w, cfg)?;
            cur = next;
            moves.push(m);
        }
        // Case 1.1: collapse a triangle with two highlighted edges.
        let (lo, hi) = w.bounds(cur.len());
        let closed = matches!(w, Window::Closed);
        let cands = collapse_candidates(&cur.vertices[lo..=hi], closed)?;
        let mut done = false;
        let mut last = String::from("no triangle with two highlighted edges");
        for m in cands {
            let i = lo + m;
            match triangle_collapse(&cur, i, cfg) {
                Ok((next, mv)) => {
                    cur = next;
                    moves.push(mv);
                    done = true;
                    break;
                }
                Err(e) => last = e.to_string(),
            }
            // Slide a neighbour towards `i` first, then knead.
            let n = cur.len();
            let (p, nx) = (idx(i as isize - 1, n), idx(i as isize + 1, n));
            let movable = |j: usize| closed || (j > lo && j < hi);
            for (j, _) in [(nx, p), (p, nx)] {
                if !movable(j) {
                    continue;
                }
                let Ok((slid, smove)) = slide_search(&cur, j, i, cfg) else { continue };
                if let Ok((next, mv)) = triangle_collapse(&slid, i, cfg) {
                    cur = next;
                    moves.push(smove);
                    moves.push(mv);
                    done = true;
                    break;
                }
            }
            if done {
                break;
            }
        }
        if !done {
            return Err(ReduceError::ClearanceFailed(last));
        }
        w = shrink(w);
    }
}

/// Leftmost maximal run `(k1, k2)` of edges attaining the max exponent, for an open chain.
fn open_max_run(exps: &[Q]) -> (usize, usize) {
    let max = exps.iter().max().unwrap();
    let k1 = exps.iter().position(|e| e == max).unwrap();
    let mut k2 = k1;
    while k2 + 1 < exps.len() && &exps[k2 + 1] == max {
        k2 += 1;
    }
    (k1, k2)
}

/// Fraction `s(t) = c t^(α - α')` placing an arc at distance `≈ a_α t^α` from
/// `from` along the edge towards `to`.
fn substitute_fraction(c: &Component, from: usize, to: usize, alpha: &Q, a_alpha: f64) -> Result<PuiseuxSeries, ReduceError> {
    let v = &c.vertices;
    let e = edge_exponent(&v[from], &v[to])?;
    let b = edge_coefficient(&v[from], &v[to])?;
    let coeff = q_from_f64(a_alpha / b, 1 << 20);
    if !coeff.is_positive() {
        return Err(ReduceError::PipelineStuck("substitute coefficient rounds to zero".into()));
    }
    Ok(PuiseuxSeries::monomial(coeff, alpha - &e, c.vertices[from].truncation()))
}

fn run_coefficient(c: &Component, k1: usize, k2: usize) -> Result<f64, ReduceError> {
    let n = c.len();
    let mut a = 0.0;
    for k in k1..=k2 {
        a += edge_coefficient(&c.vertices[k % n], &c.vertices[(k + 1) % n])?;
    }
    Ok(a)
}

/// One step of Cases 2.3 / 2.4: isolate the leftmost max run and reduce it.
/// The chain must have edges of different exponents.
pub fn collapse_equal_run(c: &Component, cfg: &ReduceConfig) -> Result<(Component, Vec<ReductionMove>), ReduceError> {
    if c.closed {
        collapse_closed_run(c, cfg)
    } else {
        collapse_open_run(c, cfg)
    }
}

fn push(cur: &mut Component, moves: &mut Vec<ReductionMove>, m: ReductionMove) {
    *cur = apply_move(cur, &m.kind);
    moves.push(m);
}

fn collapse_open_run(c: &Component, cfg: &ReduceConfig) -> Result<(Component, Vec<ReductionMove>), ReduceError> {
    let mut cur = c.clone();
    let mut moves = Vec::new();
    let exps = chain_exponents(&cur)?;
    let last = exps.len() - 1;
    let (mut k1, mut k2) = open_max_run(&exps);
    if k1 == k2 && k1 == 0 || k1 == k2 && k2 == last {
        return Err(ReduceError::PreconditionFailed("end edge dominates: use a vertex drop".into()));
    }
    if k1 > 0 && k2 == last {
        // Case 2.3.2 mirrors onto 2.3.1.
        push(&mut cur, &mut moves, ReductionMove::identity(MoveKind::Relabel { rotate: 0, reverse: true }));
        (k1, k2) = (last - k2, last - k1);
    } else if k1 > 0 {
        let exps = chain_exponents(&cur)?;
        if exps[k1 - 1] > exps[k2 + 1] {
            push(&mut cur, &mut moves, ReductionMove::identity(MoveKind::Relabel { rotate: 0, reverse: true }));
            (k1, k2) = (last - k2, last - k1);
        }
    }
    let exps = chain_exponents(&cur)?;
    let alpha = exps[k1].clone();
    if k1 > 0 && k1 == k2 {
        let (next, m) = drop_vertex(&cur, k1 + 1, cfg)?;
        cur = next;
        moves.push(m);
        return Ok((cur, moves));
    }
    let a_alpha = run_coefficient(&cur, k1, k2)?;
    let mut inserted = Vec::new();
    // γ on the edge after the run, near its start.
    let f = substitute_fraction(&cur, k2 + 1, k2 + 2, &alpha, a_alpha)?;
    inserted.push(Insertion { from: k2 + 1, to: k2 + 2, fraction: f, at: k2 + 2 });
    let (lo, hi) = if k1 == 0 {
        (0, k2 + 2)
    } else {
        // γ̃ on the edge before the run, near its end.
        let f = substitute_fraction(&cur, k1, k1 - 1, &alpha, a_alpha)?;
        inserted.push(Insertion { from: k1, to: k1 - 1, fraction: f, at: k1 });
        (k1, k2 + 3)
    };
    push(&mut cur, &mut moves, ReductionMove::identity(MoveKind::MaxRunCollapse { run: (k1, k2), inserted }));
    let (next, sub) = reduce_equal_window(&cur, Window::Open { lo, hi }, cfg)?;
    moves.extend(sub);
    Ok((next, moves))
}

fn closed_runs(exps: &[Q]) -> Vec<(usize, usize)> {
    let n = exps.len();
    let max = exps.iter().max().unwrap();
    let mut runs = Vec::new();
    for k in 0..n {
        if &exps[k] == max && &exps[(k + n - 1) % n] != max {
            let mut m = 1;
            while &exps[(k + m) % n] == max {
                m += 1;
            }
            runs.push((k, m));
        }
    }
    runs
}

fn collapse_closed_run(c: &Component, cfg: &ReduceConfig) -> Result<(Component, Vec<ReductionMove>), ReduceError> {
    let mut cur = c.clone();
    let mut moves = Vec::new();
    let n = cur.len();
    let exps = chain_exponents(&cur)?;
    let runs = closed_runs(&exps);
    let &(k, m) = runs.first().ok_or_else(|| ReduceError::PreconditionFailed("all edges share one exponent".into()))?;
    let left = &exps[(k + n - 1) % n];
    let right = &exps[(k + m) % n];
    // Relabel so the run occupies edges 0..m with flanks (n-1, 0) and (m, m+1), left ≤ right.
    let relabel = if left <= right {
        MoveKind::Relabel { rotate: k, reverse: false }
    } else {
        let j0 = idx(n as isize - 1 - (k + m) as isize, n);
        MoveKind::Relabel { rotate: j0, reverse: true }
    };
    if relabel != (MoveKind::Relabel { rotate: 0, reverse: false }) {
        push(&mut cur, &mut moves, ReductionMove::identity(relabel));
    }
    let exps = chain_exponents(&cur)?;
    let alpha = exps[0].clone();
    debug_assert!(exps[..m].iter().all(|e| e == &alpha) && exps[n - 1] < alpha && exps[m % n] < alpha);
    if m == 1 {
        let (next, mv) = drop_vertex(&cur, 1, cfg)?;
        cur = next;
        moves.push(mv);
        return Ok((cur, moves));
    }
    let a_alpha = run_coefficient(&cur, 0, m - 1)?;
    let mut inserted = Vec::new();
    let f = substitute_fraction(&cur, m, (m + 1) % n, &alpha, a_alpha)?;
    inserted.push(Insertion { from: m, to: (m + 1) % n, fraction: f, at: m + 1 });
    // After that insertion the last original vertex sits at index n, unless γ went after it.
    let f = substitute_fraction(&cur, 0, n - 1, &alpha, a_alpha)?;
    let last = if m + 1 < n { n } else { n - 1 };
    inserted.push(Insertion { from: 0, to: last, fraction: f, at: n + 1 });
    push(&mut cur, &mut moves, ReductionMove::identity(MoveKind::MaxRunCollapse { run: (0, m - 1), inserted }));
    let len = cur.len();
    push(&mut cur, &mut moves, ReductionMove::identity(MoveKind::Relabel { rotate: len - 1, reverse: false }));
    let (next, sub) = reduce_equal_window(&cur, Window::Open { lo: 0, hi: m + 2 }, cfg)?;
    moves.extend(sub);
    Ok((next, moves))
}

/// Runs the edge-reduction pipeline on one chain until it is a single edge or a 3-gon.
pub fn reduce_chain(c: &Component, cfg: &ReduceConfig) -> Result<(Component, Vec<ReductionMove>), ReduceError> {
    let mut cur = c.clone();
    let mut moves: Vec<ReductionMove> = Vec::new();
    let cap = cfg.max_steps_per_vertex * c.len() + 16;
    for _ in 0..cap {
        let n = cur.len();
        if (!cur.closed && n <= 2) || (cur.closed && n <= 3) {
            return Ok((cur, moves));
        }
        let interior: Vec<usize> = if cur.closed { (0..n).collect() } else { (1..n - 1).collect() };
        let mut straight = None;
        for &i in &interior {
            let (p, nx) = (idx(i as isize - 1, n), idx(i as isize + 1, n));
            match angle_class(&cur.vertices[p], &cur.vertices[i], &cur.vertices[nx])? {
                AngleClass::Straight => {
                    straight = Some(i);
                    break;
                }
                AngleClass::Zero => return Err(ReduceError::PipelineStuck(format!("zero limit angle at vertex {}", i))),
                AngleClass::Proper => {}
            }
        }
        if let Some(i) = straight {
            let (next, m) = remove_collinear(&cur, i, cfg)?;
            cur = next;
            moves.push(m);
            continue;
        }
        let exps = chain_exponents(&cur)?;
        let all_equal = exps.iter().all(|e| e == &exps[0]);
        let (next, sub) = if all_equal {
            let w = if cur.closed { Window::Closed } else { Window::Open { lo: 0, hi: n - 1 } };
            reduce_equal_window(&cur, w, cfg)?
        } else if !cur.closed && exps[0] > exps[1] {
            // Case 2.1.
            let (next, m) = drop_vertex(&cur, 1, cfg)?;
            (next, vec![m])
        } else if !cur.closed && exps[n - 2] > exps[n - 3] {
            // Case 2.2: relabel, then Case 2.1 applies.
            let m = ReductionMove::identity(MoveKind::Relabel { rotate: 0, reverse: true });
            (apply_move(&cur, &m.kind), vec![m])
        } else {
            collapse_equal_run(&cur, cfg)?
        };
        cur = next;
        moves.extend(sub);
    }
    Err(ReduceError::PipelineStuck(format!("no termination after {} steps ({} vertices left)", cap, cur.len())))
}

/// Leading exponent of the circumradius `xyz / 4S` of a 3-gon.
pub fn circumradius_exponent(v: &[ArcGerm]) -> Result<Q, ReduceError> {
    let sides = [edge_exponent(&v[1], &v[2])?, edge_exponent(&v[2], &v[0])?, edge_exponent(&v[0], &v[1])?];
    let area2 = v[1].sub(&v[0]).cross(&v[2].sub(&v[0]));
    let e = area2
        .leading_exponent()
        .cloned()
        .ok_or_else(|| ReduceError::PipelineStuck("degenerate final triangle".into()))?;
    Ok(sides.iter().fold(Q::zero(), |acc, s| acc + s) - e)
}

/// Canonical form of the final chain of a reduction.
pub fn final_form(c: &Component) -> Result<(CanonicalForm, Option<Q>), ReduceError> {
    let v = &c.vertices;
    if !c.closed {
        if v.len() != 2 {
            return Err(ReduceError::PipelineStuck(format!("open chain left with {} vertices", v.len())));
        }
        return Ok((CanonicalForm::HolderTriangle(edge_exponent(&v[0], &v[1])?), None));
    }
    if v.len() != 3 {
        return Err(ReduceError::PipelineStuck(format!("closed chain left with {} vertices", v.len())));
    }
    let exps = chain_exponents(c)?;
    if exps.iter().any(|e| e != &exps[0]) {
        return Err(ReduceError::PipelineStuck(format!("final 3-gon has unequal tords {:?}", exps)));
    }
    let r = circumradius_exponent(v)?;
    if r != exps[0] {
        return Err(ReduceError::PipelineStuck(format!("circumradius exponent {} differs from tord {}", r, exps[0])));
    }
    Ok((CanonicalForm::Horn(exps[0].clone()), Some(r)))
}

/// Classifies a connected LNE germ as a Hölder triangle or a horn.
pub fn classify_connected(g: &PolygonalGerm) -> Result<(CanonicalForm, ReductionTrace), ReduceError> {
    let cfg = ReduceConfig::for_germ(g)?;
    classify_connected_with(g, &cfg)
}

pub fn classify_connected_with(g: &PolygonalGerm, cfg: &ReduceConfig) -> Result<(CanonicalForm, ReductionTrace), ReduceError> {
    if g.components.len() != 1 {
        return Err(ReduceError::PreconditionFailed(format!("{} components; expected one", g.components.len())));
    }
    let verdict = is_lne(g)?;
    if verdict.status == LneStatus::NotLne {
        let why = match &verdict.witness {
            Some(w) => format!("outer exponent {} exceeds inner {}", w.outer, w.inner),
            None => "sampled constants unbounded".into(),
        };
        return Err(ReduceError::NotLneInput(why));
    }
    let initial = g.components[0].clone();
    let (final_chain, moves) = reduce_chain(&initial, cfg)?;
    if let Some(bad) = moves.iter().find(|m| !m.is_certified()) {
        return Err(ReduceError::ClearanceFailed(format!("{} move without a clear certificate", bad.kind.name())));
    }
    let (form, circumradius_exponent) = final_form(&final_chain)?;
    let trace = ReductionTrace { initial_digest: g.digest(), initial, moves, final_chain, form: form.clone(), circumradius_exponent };
    Ok((form, trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arc(x: &str, y: &str) -> ArcGerm {
        ArcGerm::parse(x, y).unwrap()
    }

    fn cfg() -> ReduceConfig {
        ReduceConfig::with_t_max(0.5f64.powi(5))
    }

    fn chain(pts: &[(&str, &str)], closed: bool) -> Component {
        Component::new(pts.iter().map(|(x, y)| arc(x, y)).collect(), closed)
    }

    fn classify(c: &Component) -> (CanonicalForm, ReductionTrace) {
        let g = PolygonalGerm::new(vec![c.clone()]).unwrap();
        classify_connected(&g).unwrap()
    }

    #[test]
    fn collinear_removal() {
        let c = chain(&[("0", "0"), ("t", "0"), ("2*t", "0")], false);
        let (next, m) = remove_collinear(&c, 1, &cfg()).unwrap();
        assert_eq!(next.vertices.len(), 2);
        assert!(m.is_certified());
        let c = chain(&[("0", "0"), ("t", "t^2"), ("2*t", "0")], false);
        assert!(remove_collinear(&c, 1, &cfg()).is_ok());
        let c = chain(&[("t", "0"), ("0", "0"), ("0", "t")], false);
        assert_eq!(remove_collinear(&c, 1, &cfg()).unwrap_err(), ReduceError::AngleNotPi(1));
    }

    #[test]
    fn tent_slide() {
        let c = chain(&[("-t", "0"), ("0", "t"), ("t", "0")], false);
        let (next, m) = slide_vertex(&c, 1, 0, &q(1, 4), &cfg()).unwrap();
        assert!(m.is_certified());
        assert_eq!(next.vertices[1], arc("-1/4*t", "3/4*t"));
        let c = chain(&[("-t", "0"), ("0", "t"), ("t^2", "t + t^2")], false);
        assert!(matches!(slide_vertex(&c, 1, 0, &q(1, 4), &cfg()), Err(ReduceError::TordMismatch { .. })));
    }

    #[test]
    fn x1_triangle_slide_keeps_lne() {
        let c = chain(&[("0", "0"), ("t^2", "t^2"), ("t^2", "-t^2")], true);
        let (next, _) = slide_search(&c, 1, 0, &cfg()).unwrap();
        let g = PolygonalGerm::new(vec![next]).unwrap();
        assert_ne!(is_lne(&g).unwrap().status, LneStatus::NotLne);
    }

    #[test]
    fn drop_vertex_cases() {
        let c = chain(&[("0", "0"), ("t^3", "0"), ("t^3", "t^2")], false);
        let (next, m) = drop_vertex(&c, 1, &cfg()).unwrap();
        assert!(m.is_certified());
        assert_eq!(chain_exponents(&next).unwrap(), vec![qi(2)]);
        let c = chain(&[("-t", "0"), ("0", "t"), ("t", "0")], false);
        assert!(matches!(drop_vertex(&c, 1, &cfg()), Err(ReduceError::PreconditionFailed(_))));
    }

    #[test]
    fn perturbation() {
        // γ3 lies on the line through γ1 and γ2.
        let c = chain(&[("0", "0"), ("t", "t"), ("2*t", "0"), ("3*t", "-t")], false);
        let w = Window::Open { lo: 0, hi: 3 };
        let (next, m) = perturb_to_nondegenerate(&c, w, &cfg()).unwrap();
        assert!(m.is_certified());
        assert!(collinear_triple_in(&next.vertices).is_none());
        assert_eq!(next.vertices[0], c.vertices[0]);
        assert_eq!(next.vertices[3], c.vertices[3]);
        let sq = chain(&[("t", "t"), ("-t", "t"), ("-t", "-t"), ("t", "-t")], true);
        let (same, m) = perturb_to_nondegenerate(&sq, Window::Closed, &cfg()).unwrap();
        assert_eq!(same, sq);
        assert_eq!(m.kind, MoveKind::Perturbation { steps: vec![] });
    }

    #[test]
    fn square_is_cone() {
        let sq = chain(&[("t", "t"), ("-t", "t"), ("-t", "-t"), ("t", "-t")], true);
        let (form, trace) = classify(&sq);
        assert_eq!(form, CanonicalForm::Horn(qi(1)));
        assert_eq!(form.to_string(), "Horn beta=1 (cone)");
        assert_eq!(trace.circumradius_exponent, Some(qi(1)));
        assert_eq!(trace.replay(), trace.final_chain);
    }

    #[test]
    fn open_chains() {
        let c = chain(&[("0", "0"), ("t^2", "t^3"), ("t^2 + t^3", "t^2")], false);
        let (form, _) = classify(&c);
        assert_eq!(form, CanonicalForm::HolderTriangle(qi(2)));
        let c = chain(&[("0", "0"), ("t", "0"), ("t + t^2", "t^2"), ("t + 2*t^2", "0"), ("2*t", "-1/2*t")], false);
        assert_eq!(chain_exponents(&c).unwrap(), vec![qi(1), qi(2), qi(2), qi(1)]);
        let (form, trace) = classify(&c);
        assert_eq!(form, CanonicalForm::HolderTriangle(qi(1)));
        assert!(trace.moves.iter().any(|m| matches!(m.kind, MoveKind::MaxRunCollapse { .. })));
        assert_eq!(trace.replay(), trace.final_chain);
    }

    #[test]
    fn closed_polygons() {
        let pent = chain(&[("2*t", "0"), ("t", "2*t"), ("-2*t", "t"), ("-2*t", "-t"), ("t", "-2*t")], true);
        let (form, trace) = classify(&pent);
        assert_eq!(form, CanonicalForm::Horn(qi(1)));
        assert_eq!(trace.final_chain.vertices.len(), 3);
        // Edge exponents (1, 1, 1, 2, 2, 1): a small notch at scale t^2.
        let hex = chain(
            &[("2*t", "0"), ("0", "2*t"), ("-2*t", "0"), ("-t", "-t"), ("-t + t^2", "-t - t^2"), ("-t + 2*t^2", "-t")],
            true,
        );
        assert_eq!(chain_exponents(&hex).unwrap(), vec![qi(1), qi(1), qi(1), qi(2), qi(2), qi(1)]);
        let (form, trace) = classify(&hex);
        assert_eq!(form, CanonicalForm::Horn(qi(1)));
        assert_eq!(trace.replay(), trace.final_chain);
        assert!(trace.moves.iter().all(|m| m.is_certified()));
    }

    #[test]
    fn not_lne_rejected() {
        let pinch = chain(&[("t", "t^2"), ("0", "0"), ("t", "-t^2")], false);
        let g = PolygonalGerm::new(vec![pinch]).unwrap();
        assert!(matches!(classify_connected(&g), Err(ReduceError::NotLneInput(_))));
    }

    #[test]
    fn deterministic_trace() {
        let hex = chain(&[("3*t", "0"), ("t", "2*t"), ("-t", "2*t"), ("-3*t", "0"), ("-t", "-2*t"), ("t", "-2*t")], true);
        let (_, a) = classify(&hex);
        let (_, b) = classify(&hex);
        assert_eq!(a.to_text(), b.to_text());
        assert!(a.to_text().starts_with("lipgerm-trace v1\n"));
    }
}
