//! Supporting and kneading envelopes, and clearance against the rest of a germ.
//!
//! Both envelopes are convex quadrilaterals at every `t` whose corners 0 and 2
//! are the end arcs of the part being kneaded. Corners are evaluated relative
//! to a base arc so that small features stay resolvable in `f64`.

use std::fmt;

use thiserror::Error;

use crate::geom::{self, P2};
use crate::germ::{ArcGerm, Rotation, SynchronizedFamily};
use crate::metric::segment_distance_exponent;
use crate::puiseux::{qf, Q};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvelopeError {
    #[error("UnboundedFamily: the synchronized family has no slope bound")]
    UnboundedFamily,
    #[error("RaysParallel at t = {0}: θ too large for the wedge")]
    RaysParallel(f64),
    #[error("DegenerateWedge: the wedge has a collinear limit")]
    DegenerateWedge,
    #[error("NoThetaFound: {0}")]
    NoThetaFound(String),
}

/// A region whose clearance can be certified.
pub trait EnvelopeRegion {
    /// Arc the corners are measured from.
    fn base(&self) -> &ArcGerm;
    /// End arcs; they sit at corners 0 and 2.
    fn ends(&self) -> (&ArcGerm, &ArcGerm);
    /// Convex quadrilateral at `t`, relative to `base`.
    fn corners(&self, t: f64) -> Option<[P2; 4]>;
    /// Segments the envelope is built around.
    fn contents(&self) -> Vec<(ArcGerm, ArcGerm)>;
}

/// `δ`-supporting envelope of a synchronized chain.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportingEnvelope {
    pub family: SynchronizedFamily,
    pub delta: f64,
    /// Chain vertices in the original frame.
    pub original: Vec<ArcGerm>,
}

/// Endpoints and extreme difference quotients at one `t`, rotated frame,
/// relative to the first vertex.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvelopeSlopes {
    pub p0: P2,
    pub p1: P2,
    pub m0: f64,
    pub big_m0: f64,
    pub m1: f64,
    pub big_m1: f64,
}

pub fn supporting_envelope(family: &SynchronizedFamily, delta: f64) -> Result<SupportingEnvelope, EnvelopeError> {
    if family.m_bound.is_none() {
        return Err(EnvelopeError::UnboundedFamily);
    }
    let back = family.rotation.inverse();
    let original = family.vertices.iter().map(|v| v.rotated(&back)).collect();
    Ok(SupportingEnvelope { family: family.clone(), delta, original })
}

impl SupportingEnvelope {
    pub fn slopes(&self, t: f64) -> EnvelopeSlopes {
        let pts = self.family.points(t);
        let (p0, p1) = (pts[0], pts[pts.len() - 1]);
        let q0: Vec<f64> = pts[1..].iter().map(|p| (p[1] - p0[1]) / (p[0] - p0[0])).collect();
        let q1: Vec<f64> = pts[..pts.len() - 1].iter().map(|p| (p[1] - p1[1]) / (p[0] - p1[0])).collect();
        let min = |v: &[f64]| v.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = |v: &[f64]| v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        EnvelopeSlopes { p0, p1, m0: min(&q0), big_m0: max(&q0), m1: min(&q1), big_m1: max(&q1) }
    }

    /// `g_t(x)` with `x` relative to the first rotated vertex.
    pub fn lower_rel(&self, t: f64, x: f64) -> f64 {
        let s = self.slopes(t);
        let d = self.delta;
        (s.p0[1] + (s.m0 - d) * (x - s.p0[0])).max(s.p1[1] + (s.big_m1 + d) * (x - s.p1[0]))
    }

    /// `f_t(x)` with `x` relative to the first rotated vertex.
    pub fn upper_rel(&self, t: f64, x: f64) -> f64 {
        let s = self.slopes(t);
        let d = self.delta;
        (s.p0[1] + (s.big_m0 + d) * (x - s.p0[0])).min(s.p1[1] + (s.m1 - d) * (x - s.p1[0]))
    }

    fn origin(&self, t: f64) -> P2 {
        self.family.vertices[0].eval(t)
    }

    /// `g_t` at an absolute rotated abscissa.
    pub fn lower(&self, t: f64, x: f64) -> f64 {
        let o = self.origin(t);
        o[1] + self.lower_rel(t, x - o[0])
    }

    /// `f_t` at an absolute rotated abscissa.
    pub fn upper(&self, t: f64, x: f64) -> f64 {
        let o = self.origin(t);
        o[1] + self.upper_rel(t, x - o[0])
    }

    /// `P0`, lower kink, `Pn`, upper kink, in the rotated frame relative to the first vertex.
    pub fn quad_rotated(&self, t: f64) -> Option<[P2; 4]> {
        let s = self.slopes(t);
        let d = self.delta;
        let dir = |m: f64| [1.0, m];
        let (lo, _, _) = geom::line_intersection(s.p0, dir(s.m0 - d), s.p1, dir(s.big_m1 + d))?;
        let (hi, _, _) = geom::line_intersection(s.p0, dir(s.big_m0 + d), s.p1, dir(s.m1 - d))?;
        Some([s.p0, lo, s.p1, hi])
    }

    pub fn rotation(&self) -> &Rotation {
        &self.family.rotation
    }
}

impl EnvelopeRegion for SupportingEnvelope {
    fn base(&self) -> &ArcGerm {
        &self.original[0]
    }

    fn ends(&self) -> (&ArcGerm, &ArcGerm) {
        (&self.original[0], &self.original[self.original.len() - 1])
    }

    fn corners(&self, t: f64) -> Option<[P2; 4]> {
        let back = self.family.rotation.inverse();
        self.quad_rotated(t).map(|q| q.map(|p| back.apply(p)))
    }

    fn contents(&self) -> Vec<(ArcGerm, ArcGerm)> {
        self.original.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect()
    }
}

/// `θ`-kneading envelope of the wedge `γ1γ2 ∪ γ2γ3`.
#[derive(Clone, Debug, PartialEq)]
pub struct KneadingEnvelope {
    pub g1: ArcGerm,
    pub g2: ArcGerm,
    pub g3: ArcGerm,
    pub theta: f64,
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Builds the envelope and checks the rays meet at every `t` in `grid`.
pub fn kneading_envelope(g1: &ArcGerm, g2: &ArcGerm, g3: &ArcGerm, theta: f64, grid: &[f64]) -> Result<KneadingEnvelope, EnvelopeError> {
    let u = g1.sub(g2);
    let v = g3.sub(g2);
    if u.cross(&v).is_zero() {
        return Err(EnvelopeError::DegenerateWedge);
    }
    let angle = crate::metric::limit_angle(g1, g2, g3).map_err(|_| EnvelopeError::DegenerateWedge)?;
    if angle == 0.0 {
        return Err(EnvelopeError::DegenerateWedge);
    }
    let env = KneadingEnvelope { g1: g1.clone(), g2: g2.clone(), g3: g3.clone(), theta };
    for &t in grid {
        env.quad(t).ok_or(EnvelopeError::RaysParallel(t))?;
    }
    Ok(env)
}

impl KneadingEnvelope {
    /// `[γ1, γ+, γ3, γ-]` at `t`, relative to `γ2`; `None` when a ray pair fails to meet.
    pub fn quad(&self, t: f64) -> Option<[P2; 4]> {
        let p1 = self.g1.eval_rel(&self.g2, t);
        let p3 = self.g3.eval_rel(&self.g2, t);
        let p2 = [0.0, 0.0];
        let th = self.theta;
        // Each ray turns away from the third vertex of the triangle.
        let away = |from: P2, to: P2, other: P2| {
            let d = geom::sub(to, from);
            geom::rotate(d, -th * sgn(geom::orient(from, to, other)))
        };
        let (plus, s1, s3) = geom::line_intersection(p1, away(p1, p2, p3), p3, away(p3, p2, p1))?;
        if s1 <= 0.0 || s3 <= 0.0 {
            return None;
        }
        let (minus, r1, r3) = geom::line_intersection(p1, away(p1, p3, p2), p3, away(p3, p1, p2))?;
        if r1 <= 0.0 || r3 <= 0.0 {
            return None;
        }
        Some([p1, plus, p3, minus])
    }
}

impl EnvelopeRegion for KneadingEnvelope {
    fn base(&self) -> &ArcGerm {
        &self.g2
    }

    fn ends(&self) -> (&ArcGerm, &ArcGerm) {
        (&self.g1, &self.g3)
    }

    fn corners(&self, t: f64) -> Option<[P2; 4]> {
        self.quad(t)
    }

    fn contents(&self) -> Vec<(ArcGerm, ArcGerm)> {
        vec![(self.g1.clone(), self.g2.clone()), (self.g2.clone(), self.g3.clone())]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ClearanceVerdict {
    Clear,
    /// The envelope meets rest segment `edge` at `t`.
    Violation { t: f64, edge: usize },
    /// Sampled clearance decays faster than the symbolic separation allows.
    Unconfirmed { edge: usize, slope: f64, exponent: Q },
    /// The envelope is not a convex quadrilateral at `t`.
    Degenerate { t: f64 },
}

impl fmt::Display for ClearanceVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClearanceVerdict::Clear => write!(f, "Clear"),
            ClearanceVerdict::Violation { t, edge } => write!(f, "Violation(edge {}, t = {:e})", edge, t),
            ClearanceVerdict::Unconfirmed { edge, slope, exponent } => {
                write!(f, "Unconfirmed(edge {}, slope {:.3} vs exponent {})", edge, slope, exponent)
            }
            ClearanceVerdict::Degenerate { t } => write!(f, "Degenerate(t = {:e})", t),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClearanceCertificate {
    /// `(t, min distance to the rest)`; infinite when nothing remains.
    pub samples: Vec<(f64, f64)>,
    pub verdict: ClearanceVerdict,
}

impl ClearanceCertificate {
    pub fn is_clear(&self) -> bool {
        self.verdict == ClearanceVerdict::Clear
    }
}

/// Slack allowed between the fitted clearance slope and the symbolic exponent.
const SLOPE_SLACK: f64 = 0.1;
/// Number of finest grid points used in the slope fit.
const FIT_POINTS: usize = 6;

/// Certifies that `env` avoids every segment of `rest` on `grid`.
pub fn clearance<E: EnvelopeRegion + ?Sized>(env: &E, rest: &[(ArcGerm, ArcGerm)], grid: &[f64]) -> ClearanceCertificate {
    let base = env.base();
    let (e0, e2) = env.ends();
    let mut samples: Vec<(f64, f64)> = Vec::new();
    let mut per_edge: Vec<Vec<f64>> = vec![Vec::new(); rest.len()];
    for &t in grid {
        let quad = match env.corners(t) {
            Some(q) => q,
            None => return ClearanceCertificate { samples, verdict: ClearanceVerdict::Degenerate { t } },
        };
        let mut min = f64::INFINITY;
        for (k, (c, d)) in rest.iter().enumerate() {
            let pc = c.eval_rel(base, t);
            let pd = d.eval_rel(base, t);
            let shared = [(c, d), (d, c)].into_iter().find_map(|(x, y)| {
                if x == e0 {
                    Some((0usize, y))
                } else if x == e2 {
                    Some((2usize, y))
                } else {
                    None
                }
            });
            let touches_both = (c == e0 && d == e2) || (c == e2 && d == e0);
            if touches_both {
                return ClearanceCertificate { samples, verdict: ClearanceVerdict::Violation { t, edge: k } };
            }
            let dist = match shared {
                Some((corner, far)) => {
                    // A segment leaving a corner of a convex set outwards never re-enters it.
                    let apex = quad[corner];
                    let dir = geom::sub(far.eval_rel(base, t), apex);
                    let a = geom::sub(quad[(corner + 1) % 4], apex);
                    let b = geom::sub(quad[(corner + 3) % 4], apex);
                    let inside = geom::cross(a, dir) * geom::cross(a, b) >= 0.0 && geom::cross(b, dir) * geom::cross(b, a) >= 0.0;
                    if inside {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                }
                None => geom::segment_convex_distance(pc, pd, &quad),
            };
            if !(dist > 0.0) {
                return ClearanceCertificate { samples, verdict: ClearanceVerdict::Violation { t, edge: k } };
            }
            per_edge[k].push(dist);
            min = min.min(dist);
        }
        samples.push((t, min));
    }
    // Persistence: the clearance must not shrink faster than the separation itself.
    let contents = env.contents();
    let n = grid.len();
    if n >= FIT_POINTS {
        let ts = &grid[n - FIT_POINTS..];
        for (k, (c, d)) in rest.iter().enumerate() {
            let ds = &per_edge[k][n - FIT_POINTS..];
            if ds.iter().any(|x| x.is_infinite()) {
                continue;
            }
            let exponent = contents.iter().filter_map(|(a, b)| segment_distance_exponent(a, b, c, d)).max();
            let Some(exponent) = exponent else { continue };
            let slope = geom::loglog_slope(ts, ds);
            if slope > qf(&exponent) + SLOPE_SLACK {
                return ClearanceCertificate { samples, verdict: ClearanceVerdict::Unconfirmed { edge: k, slope, exponent } };
            }
        }
    }
    ClearanceCertificate { samples, verdict: ClearanceVerdict::Clear }
}

/// Initial kneading angle.
pub const THETA_START: f64 = std::f64::consts::PI / 8.0;
/// Smallest kneading angle tried.
pub const THETA_FLOOR: f64 = 1.0 / (1u64 << 20) as f64;

/// Halves `θ` from `π/8` until the kneading envelope clears `rest`.
pub fn theta_search(
    g1: &ArcGerm,
    g2: &ArcGerm,
    g3: &ArcGerm,
    rest: &[(ArcGerm, ArcGerm)],
    grid: &[f64],
) -> Result<(f64, KneadingEnvelope, ClearanceCertificate), EnvelopeError> {
    let mut theta = THETA_START;
    let mut last = String::from("no envelope formed");
    while theta >= THETA_FLOOR {
        match kneading_envelope(g1, g2, g3, theta, grid) {
            Ok(env) => {
                let cert = clearance(&env, rest, grid);
                if cert.is_clear() {
                    return Ok((theta, env, cert));
                }
                last = cert.verdict.to_string();
            }
            Err(EnvelopeError::DegenerateWedge) => {
                return Err(EnvelopeError::NoThetaFound("wedge has a collinear limit".into()))
            }
            Err(e) => last = e.to_string(),
        }
        theta /= 2.0;
    }
    Err(EnvelopeError::NoThetaFound(format!("θ below 2^-20; last: {}", last)))
}

/// Halves `δ` from `start` until the supporting envelope clears `rest`.
pub fn delta_search(
    family: &SynchronizedFamily,
    start: f64,
    rest: &[(ArcGerm, ArcGerm)],
    grid: &[f64],
) -> Result<(SupportingEnvelope, ClearanceCertificate), EnvelopeError> {
    let mut delta = start;
    let mut last = String::new();
    while delta >= THETA_FLOOR {
        let env = supporting_envelope(family, delta)?;
        let cert = clearance(&env, rest, grid);
        if cert.is_clear() {
            return Ok((env, cert));
        }
        last = cert.verdict.to_string();
        delta /= 2.0;
    }
    Err(EnvelopeError::NoThetaFound(format!("δ below 2^-20; last: {}", last)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conemaps::{rect_isotopy, FamilyFn, IsotopyFamilies};
    use crate::germ::{synchronized_view, GridConfig};

    fn arc(x: &str, y: &str) -> ArcGerm {
        ArcGerm::parse(x, y).unwrap()
    }

    fn grid() -> Vec<f64> {
        GridConfig::grid_from(0.5f64.powi(5), 15)
    }

    #[test]
    fn tent_envelope_matches_closed_form() {
        let chain = [arc("-t", "0"), arc("0", "-t"), arc("t", "0")];
        let fam = synchronized_view(&chain, 0.0).unwrap();
        let d = 0.25;
        let env = supporting_envelope(&fam, d).unwrap();
        for t in grid() {
            for k in 0..=20 {
                let x = -t + 2.0 * t * k as f64 / 20.0;
                let (lo, hi) = if x <= 0.0 {
                    (-(1.0 + d) * (t + x), d * (t + x))
                } else {
                    ((1.0 + d) * (x - t), d * (t - x))
                };
                assert!((env.lower(t, x) - lo).abs() < 1e-15 * (1.0 + t));
                assert!((env.upper(t, x) - hi).abs() < 1e-15 * (1.0 + t));
            }
        }
    }

    #[test]
    fn single_segment_wedge() {
        let fam = synchronized_view(&[arc("0", "0"), arc("t", "1/2*t")], 0.0).unwrap();
        let env = supporting_envelope(&fam, 0.1).unwrap();
        let s = env.slopes(0.01);
        assert!((s.m0 - 0.5).abs() < 1e-12 && (s.big_m0 - 0.5).abs() < 1e-12);
        assert!((env.upper(0.01, 0.005) - (0.5 + 0.1) * 0.005).abs() < 1e-15);
    }

    #[test]
    fn convex_chain_rays() {
        // Slopes u = -1 < v = 0 < w = 2.
        let chain = [arc("0", "0"), arc("t", "-t"), arc("3/2*t", "0")];
        let fam = synchronized_view(&chain, 0.0).unwrap();
        let d = 0.1;
        let env = supporting_envelope(&fam, d).unwrap();
        let s = env.slopes(0.01);
        assert!((s.m0 + 1.0).abs() < 1e-12 && s.big_m0.abs() < 1e-12);
        assert!(s.m1.abs() < 1e-12 && (s.big_m1 - 2.0).abs() < 1e-12);
        let t = 0.01;
        let x = 0.001;
        assert!((env.lower(t, x) - (-1.0 - d) * x).abs() < 1e-15);
        assert!((env.upper(t, x) - d * x).abs() < 1e-15);
    }

    #[test]
    fn containment_and_monotonicity() {
        let chain = [arc("-t", "t^2"), arc("-1/2*t", "-1/3*t"), arc("t^2", "1/4*t"), arc("t", "0")];
        let fam = synchronized_view(&chain, 0.0).unwrap();
        let big = supporting_envelope(&fam, 0.2).unwrap();
        let small = supporting_envelope(&fam, 0.05).unwrap();
        for t in grid() {
            let pts: Vec<P2> = chain.iter().map(|v| v.eval(t)).collect();
            for k in 0..=40 {
                let x = pts[0][0] + (pts[3][0] - pts[0][0]) * k as f64 / 40.0;
                let y = crate::germ::interpolate(&pts, x);
                let tol = 1e-14 * t;
                assert!(small.lower(t, x) <= y + tol && y <= small.upper(t, x) + tol);
                assert!(big.lower(t, x) <= small.lower(t, x) + tol && small.upper(t, x) <= big.upper(t, x) + tol);
            }
        }
    }

    #[test]
    fn kneading_in_supporting_envelope() {
        let chain = vec![arc("-t", "0"), arc("0", "-t"), arc("t", "0")];
        let fam = synchronized_view(&chain, 0.0).unwrap();
        let env = supporting_envelope(&fam, 0.5).unwrap();
        let fams = IsotopyFamilies {
            x0: chain[0].x.clone(),
            x1: chain[2].x.clone(),
            f: FamilyFn::Upper(Box::new(env.clone())),
            g: FamilyFn::Lower(Box::new(env)),
            a: FamilyFn::Chain(chain.clone()),
            b: FamilyFn::Chain(vec![chain[0].clone(), chain[2].clone()]),
            m: 100.0,
        };
        for t in grid() {
            for k in 1..20 {
                let u = k as f64 / 20.0;
                let (al, _) = fams.ratios(u, t).unwrap();
                let p = rect_isotopy(&fams, u, al, t, 1.0).unwrap();
                assert!(p[1].abs() < 1e-9 * t, "chain point not mapped to the secant");
                assert_eq!(rect_isotopy(&fams, u, 1.0, t, 1.0).unwrap(), fams.point(u, 1.0, t));
            }
        }
    }

    #[test]
    fn unbounded_family_rejected() {
        let fam = synchronized_view(&[arc("-t^2", "0"), arc("0", "t"), arc("t^2", "0")], 0.0).unwrap();
        assert!(matches!(supporting_envelope(&fam, 0.1), Err(EnvelopeError::UnboundedFamily)));
    }

    #[test]
    fn symmetric_tent_kneading() {
        let (g1, g2, g3) = (arc("-t", "0"), arc("0", "t"), arc("t", "0"));
        let env = kneading_envelope(&g1, &g2, &g3, std::f64::consts::PI / 36.0, &grid()).unwrap();
        for t in grid() {
            let q = env.quad(t).unwrap();
            assert!(q[1][0].abs() < 1e-15 * t && q[1][1] > 0.0);
            assert!(q[3][0].abs() < 1e-15 * t && q[3][1] < -t);
            assert!((q[0][1] - q[2][1]).abs() < 1e-15);
        }
    }

    #[test]
    fn kneading_shrinks_with_theta() {
        let (g1, g2, g3) = (arc("-t", "0"), arc("1/3*t", "t"), arc("t", "0"));
        let t = 0.01;
        let mut prev = f64::INFINITY;
        for k in 3..12 {
            let env = kneading_envelope(&g1, &g2, &g3, 0.5f64.powi(k), &[t]).unwrap();
            let q = env.quad(t).unwrap();
            let dev = geom::norm(q[1]).max(geom::point_segment_distance(q[3], q[0], q[2]));
            assert!(dev < prev);
            prev = dev;
        }
        // Deviation is first order in θ.
        assert!(prev < 4.0 * 0.5f64.powi(11) * t);
    }

    #[test]
    fn collinear_wedge_rejected() {
        let r = kneading_envelope(&arc("-t", "0"), &arc("0", "0"), &arc("t", "0"), 0.1, &grid());
        assert_eq!(r, Err(EnvelopeError::DegenerateWedge));
    }

    #[test]
    fn clearance_cases() {
        let (g1, g2, g3) = (arc("-t", "0"), arc("0", "t"), arc("t", "0"));
        let (theta, _, cert) = theta_search(&g1, &g2, &g3, &[], &grid()).unwrap();
        assert_eq!(theta, THETA_START);
        assert!(cert.is_clear());
        // X1's tail wedge: A, D1 and a point further along, against the triangle edges.
        let a = arc("0", "0");
        let (b, c) = (arc("t^2", "t^2"), arc("t^2", "-t^2"));
        let (d1, d2) = (arc("t^3", "0"), arc("2*t^3", "t^3"));
        let rest = vec![(b.clone(), c.clone()), (a.clone(), b.clone()), (c.clone(), a.clone())];
        let env = kneading_envelope(&d1, &d2, &arc("3*t^3", "0"), 0.1, &grid()).unwrap();
        assert!(clearance(&env, &rest, &grid()).is_clear());
        // A wide envelope swallowing a neighbouring edge.
        let near = vec![(arc("-1/2*t", "t"), arc("1/2*t", "t"))];
        let env = kneading_envelope(&g1, &g2, &g3, 0.3, &grid()).unwrap();
        assert!(matches!(clearance(&env, &near, &grid()).verdict, ClearanceVerdict::Violation { .. }));
        let _ = d1;
    }

    #[test]
    fn pinch_has_no_theta() {
        let (g1, g2, g3) = (arc("t", "t^2"), arc("0", "0"), arc("t", "-t^2"));
        assert!(matches!(theta_search(&g1, &g2, &g3, &[], &grid()), Err(EnvelopeError::NoThetaFound(_))));
    }
}
