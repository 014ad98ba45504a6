//! Explicit ambient maps on the cone `C_a = {x² + y² ≤ (at)²}` and a sampled
//! bi-Lipschitz harness.
//!
//! Points are `[x, y, t]`. Translation and dilatation act on the inner ball
//! `D(t)` of radius `bt`, `b = √a`, and interpolate on the shells
//! `Γ_λ(t) = {‖(x, y)‖ = (λb + (1 - λ)a) t}` so that `∂C_a` is fixed.

use std::fmt;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geom::{self, P2};
use crate::germ::ArcGerm;
use crate::envelope::SupportingEnvelope;
use crate::puiseux::{qf, LeadingTerm, PuiseuxSeries};

pub type P3 = [f64; 3];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConeMapError {
    #[error("OutsideDomain: {0:?} is not in the cone")]
    OutsideDomain(P3),
    #[error("ConeTooNarrow: ‖γ(t)‖ = {norm} is not below (a - b)t = {limit} at t = {t}")]
    ConeTooNarrow { t: f64, norm: f64, limit: f64 },
    #[error("NonPositiveLeading: the dilatation factor must tend to a positive constant")]
    NonPositiveLeading,
    #[error("DilatationTooLarge: f(t) = {f} must stay below √a = {b}")]
    DilatationTooLarge { f: f64, b: f64 },
    #[error("SouthPole")]
    SouthPole,
    #[error("SeparationViolated: ratio {ratio} outside [1/M, 1 - 1/M] at u = {u}, t = {t}")]
    SeparationViolated { u: f64, t: f64, ratio: f64 },
}

/// The cone `C_a³`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConeModel {
    pub a: f64,
}

/// Relative tolerance under which a point counts as lying on `∂C_a`.
const BOUNDARY_TOL: f64 = 1e-13;

impl ConeModel {
    pub fn new(a: f64) -> Self {
        assert!(a > 0.0, "cone opening must be positive");
        ConeModel { a }
    }

    /// Opening for translating along `γ`: `max(a0², 4 s², 4)` with `s` the sup of `‖γ‖/t` on `grid`.
    pub fn for_translation(a0: f64, gamma: &ArcGerm, grid: &[f64]) -> Self {
        let s = grid.iter().map(|&t| geom::norm(gamma.eval(t)) / t).fold(gamma.cone_factor(), f64::max);
        ConeModel::new((a0 * a0).max(4.0 * s * s).max(4.0))
    }

    /// Opening for dilating by `f`: `max(a0², 4 sup f², 4)` on `grid`.
    pub fn for_dilatation(a0: f64, f: &PuiseuxSeries, grid: &[f64]) -> Self {
        let s = grid.iter().map(|&t| f.eval(t).abs()).fold(0.0, f64::max);
        ConeModel::new((a0 * a0).max(4.0 * s * s).max(4.0))
    }

    /// Inner radius factor `b = √a`.
    pub fn b(&self) -> f64 {
        self.a.sqrt()
    }

    pub fn contains(&self, p: P3) -> bool {
        p[2] > 0.0 && p[0].hypot(p[1]) <= self.a * p[2] * (1.0 + BOUNDARY_TOL)
    }

    pub fn on_boundary(&self, p: P3) -> bool {
        (p[0].hypot(p[1]) - self.a * p[2]).abs() <= BOUNDARY_TOL * self.a * p[2]
    }

    /// Shell parameter of a point with planar radius `r` at height `t` (0 on `∂C_a`, 1 on `∂D`).
    pub fn shell(&self, r: f64, t: f64) -> f64 {
        ((self.a * t - r) / ((self.a - self.b()) * t)).clamp(0.0, 1.0)
    }

    pub fn shell_radius(&self, lambda: f64, t: f64) -> f64 {
        (lambda * self.b() + (1.0 - lambda) * self.a) * t
    }

    /// Point uniformly distributed in `C_a(t)`.
    pub fn sample<R: Rng>(&self, t: f64, rng: &mut R) -> P3 {
        let r = self.a * t * rng.gen::<f64>().sqrt();
        let th = rng.gen::<f64>() * std::f64::consts::TAU;
        [r * th.cos(), r * th.sin(), t]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

fn planar(p: P3) -> P2 {
    [p[0], p[1]]
}

/// Arc translation: `p - γ(t)` on `D(t)`, `p - λγ(t)` on `Γ_λ(t)`.
pub fn translate_along_arc(p: P3, gamma: &ArcGerm, model: &ConeModel, direction: Direction) -> Result<P3, ConeMapError> {
    let t = p[2];
    if !model.contains(p) {
        return Err(ConeMapError::OutsideDomain(p));
    }
    if model.on_boundary(p) {
        return Ok(p);
    }
    let g = gamma.eval(t);
    let (a, b) = (model.a, model.b());
    let gn = geom::norm(g);
    if gn >= (a - b) * t {
        return Err(ConeMapError::ConeTooNarrow { t, norm: gn, limit: (a - b) * t });
    }
    let x = planar(p);
    let lambda = match direction {
        Direction::Forward => {
            let r = geom::norm(x);
            if r <= b * t {
                1.0
            } else {
                model.shell(r, t)
            }
        }
        Direction::Inverse => {
            // Image shell: ‖q + λγ‖ = (λb + (1 - λ)a) t.
            if geom::norm(geom::add(x, g)) <= b * t {
                1.0
            } else {
                let qa = geom::dot(g, g) - (a - b) * (a - b) * t * t;
                let qb = geom::dot(x, g) + a * (a - b) * t * t;
                let qc = geom::dot(x, x) - a * a * t * t;
                let disc = (qb * qb - qa * qc).max(0.0);
                let den = -qb - disc.sqrt();
                if den == 0.0 {
                    0.0
                } else {
                    (qc / den).clamp(0.0, 1.0)
                }
            }
        }
    };
    let s = match direction {
        Direction::Forward => -lambda,
        Direction::Inverse => lambda,
    };
    Ok([p[0] + s * g[0], p[1] + s * g[1], t])
}

/// Function dilatation: multiply by `f(t)` on `D(t)`, interpolate on shells.
pub fn dilate_by_function(p: P3, f: &PuiseuxSeries, model: &ConeModel, direction: Direction) -> Result<P3, ConeMapError> {
    match f.leading() {
        LeadingTerm::Term { exponent, coefficient } if exponent.is_zero() && qf(&coefficient) > 0.0 => {}
        _ => return Err(ConeMapError::NonPositiveLeading),
    }
    let t = p[2];
    if !model.contains(p) {
        return Err(ConeMapError::OutsideDomain(p));
    }
    if model.on_boundary(p) {
        return Ok(p);
    }
    let (a, b) = (model.a, model.b());
    let ft = f.eval(t);
    if ft * b >= a {
        return Err(ConeMapError::DilatationTooLarge { f: ft, b });
    }
    let r = p[0].hypot(p[1]);
    let mu = |l: f64| (l * ft * b + (1.0 - l) * a) / (l * b + (1.0 - l) * a);
    let factor = match direction {
        Direction::Forward => {
            if r <= b * t {
                ft
            } else {
                mu(model.shell(r, t))
            }
        }
        Direction::Inverse => {
            if r <= ft * b * t {
                1.0 / ft
            } else {
                let l = ((a * t - r) / ((a - ft * b) * t)).clamp(0.0, 1.0);
                1.0 / mu(l)
            }
        }
    };
    Ok([p[0] * factor, p[1] * factor, t])
}

/// Stereographic projection of the sphere of radius `R` onto the plane `{x₃ = R}`.
pub fn stereographic(p: P3, r: f64) -> Result<P3, ConeMapError> {
    if (p[2] + r).abs() <= 1e-15 * r {
        return Err(ConeMapError::SouthPole);
    }
    let l = 2.0 * r / (p[2] + r);
    Ok([l * p[0], l * p[1], r])
}

pub fn stereographic_inverse(p: P3, r: f64) -> P3 {
    let l = 4.0 * r * r / (p[0] * p[0] + p[1] * p[1] + 4.0 * r * r);
    [l * p[0], l * p[1], (2.0 * l - 1.0) * r]
}

/// `a′ = 4a/(a² + 4)`: horizontal radius, over `R`, of the preimage of `∂C_a(R)`.
pub fn stereographic_opening(a: f64) -> f64 {
    4.0 * a / (a * a + 4.0)
}

/// Slope `4a/(a² - 4)` of the cone through the preimage of `∂C_a(R)` (for `a > 2`).
pub fn stereographic_cone_slope(a: f64) -> f64 {
    4.0 * a / (a * a - 4.0)
}

/// A family of functions `x ↦ h_t(x)` over a moving interval.
#[derive(Clone, Debug, PartialEq)]
pub enum FamilyFn {
    /// Piecewise-linear interpolation through vertex arcs with increasing x.
    Chain(Vec<ArcGerm>),
    /// Lower boundary `g_t` of a supporting envelope, in its rotated frame.
    Lower(Box<SupportingEnvelope>),
    /// Upper boundary `f_t` of a supporting envelope, in its rotated frame.
    Upper(Box<SupportingEnvelope>),
}

impl FamilyFn {
    pub fn eval(&self, t: f64, x: f64) -> f64 {
        match self {
            FamilyFn::Chain(v) => {
                let pts: Vec<P2> = v.iter().map(|a| a.eval(t)).collect();
                crate::germ::interpolate(&pts, x)
            }
            FamilyFn::Lower(e) => e.lower(t, x),
            FamilyFn::Upper(e) => e.upper(t, x),
        }
    }
}

/// Four families `g ≤ a, b ≤ f` on `[x0(t), x1(t)]` with separation constant `M`.
#[derive(Clone, Debug, PartialEq)]
pub struct IsotopyFamilies {
    pub x0: PuiseuxSeries,
    pub x1: PuiseuxSeries,
    pub f: FamilyFn,
    pub a: FamilyFn,
    pub b: FamilyFn,
    pub g: FamilyFn,
    pub m: f64,
}

impl IsotopyFamilies {
    /// `x_u(t)`.
    pub fn x_at(&self, u: f64, t: f64) -> f64 {
        (1.0 - u) * self.x0.eval(t) + u * self.x1.eval(t)
    }

    /// `γ_{u,v}(t) = (x_u, (1 - v) g + v f)`.
    pub fn point(&self, u: f64, v: f64, t: f64) -> P2 {
        let x = self.x_at(u, t);
        let (g, f) = (self.g.eval(t, x), self.f.eval(t, x));
        [x, (1.0 - v) * g + v * f]
    }

    /// `(α_t(u), β_t(u))`, checked against `[1/M, 1 - 1/M]`.
    pub fn ratios(&self, u: f64, t: f64) -> Result<(f64, f64), ConeMapError> {
        let x = self.x_at(u, t);
        let (g, f) = (self.g.eval(t, x), self.f.eval(t, x));
        let al = (self.a.eval(t, x) - g) / (f - g);
        let be = (self.b.eval(t, x) - g) / (f - g);
        let (lo, hi) = (1.0 / self.m, 1.0 - 1.0 / self.m);
        for r in [al, be] {
            if !(lo..=hi).contains(&r) {
                return Err(ConeMapError::SeparationViolated { u, t, ratio: r });
            }
        }
        Ok((al, be))
    }
}

/// `φ_τ(γ_{u,v}(t)) = γ_{u, ψ(v)}(t)`, with `ψ` pinned at `0`, `α ↦ (1 - τ)α + τβ`, `1`.
pub fn rect_isotopy(fam: &IsotopyFamilies, u: f64, v: f64, t: f64, tau: f64) -> Result<P2, ConeMapError> {
    let (al, be) = fam.ratios(u, t)?;
    let target = (1.0 - tau) * al + tau * be;
    if target == al {
        return Ok(fam.point(u, v, t));
    }
    let w = if v <= al { v * target / al } else { target + (v - al) * (1.0 - target) / (1.0 - al) };
    Ok(fam.point(u, w, t))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LipschitzVerdict {
    Bounded,
    Unbounded,
    Inconclusive,
}

impl fmt::Display for LipschitzVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LipschitzVerdict::Bounded => "Bounded",
            LipschitzVerdict::Unbounded => "Unbounded",
            LipschitzVerdict::Inconclusive => "Inconclusive",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LipschitzReport {
    /// `(t, min ratio, max ratio)`.
    pub per_t: Vec<(f64, f64, f64)>,
    /// Global `C` with all sampled ratios in `[1/C, C]`.
    pub bound: f64,
    pub verdict: LipschitzVerdict,
    pub samples: usize,
}

impl fmt::Display for LipschitzReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verdict: {}", self.verdict)?;
        writeln!(f, "bound: {:.6}", self.bound)?;
        writeln!(f, "samples: {}", self.samples)?;
        for (t, lo, hi) in &self.per_t {
            writeln!(f, "t = {:e}: ratios in [{:.6}, {:.6}]", t, lo, hi)?;
        }
        Ok(())
    }
}

/// Minimum number of accepted pairs per `t` for a verdict other than Inconclusive.
const MIN_PAIRS: usize = 16;

/// Samples ratios `‖m(p) - m(q)‖ / ‖p - q‖` with `‖p - q‖ ∈ {t·1e-2, t·1e-3}`.
///
/// The same seed is reused at every `t`, so self-similar maps see identical
/// relative samples.
pub fn verify_bilipschitz<M, S>(map: M, sampler: S, grid: &[f64], pairs_per_t: usize, seed: u64) -> LipschitzReport
where
    M: Fn(P3) -> Option<P3>,
    S: Fn(f64, &mut ChaCha8Rng) -> P3,
{
    let mut per_t = Vec::new();
    let mut samples = 0;
    let mut sparse = false;
    for &t in grid {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        let mut count = 0;
        for k in 0..pairs_per_t {
            let h = if k % 2 == 0 { t * 1e-2 } else { t * 1e-3 };
            let p = sampler(t, &mut rng);
            let dir = unit3(&mut rng);
            let q = [p[0] + h * dir[0], p[1] + h * dir[1], p[2] + h * dir[2]];
            if let (Some(mp), Some(mq)) = (map(p), map(q)) {
                let r = norm3(sub3(mp, mq)) / norm3(sub3(p, q));
                lo = lo.min(r);
                hi = hi.max(r);
                count += 1;
            }
        }
        samples += count;
        if count < MIN_PAIRS {
            sparse = true;
            continue;
        }
        per_t.push((t, lo, hi));
    }
    if per_t.is_empty() {
        return LipschitzReport { per_t, bound: f64::NAN, verdict: LipschitzVerdict::Inconclusive, samples };
    }
    let his: Vec<f64> = per_t.iter().map(|x| x.2).collect();
    let inv_los: Vec<f64> = per_t.iter().map(|x| 1.0 / x.1).collect();
    let spread = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max) / v.iter().cloned().fold(f64::INFINITY, f64::min);
    let worst = spread(&his).max(spread(&inv_los));
    let bound = his.iter().chain(&inv_los).cloned().fold(1.0, f64::max);
    let verdict = if worst >= 10.0 {
        LipschitzVerdict::Unbounded
    } else if worst <= 1.1 && !sparse {
        LipschitzVerdict::Bounded
    } else {
        LipschitzVerdict::Inconclusive
    };
    LipschitzReport { per_t, bound, verdict, samples }
}

fn unit3<R: Rng>(rng: &mut R) -> P3 {
    loop {
        let v = [rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0];
        let n = norm3(v);
        if n > 1e-3 && n <= 1.0 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

fn sub3(a: P3, b: P3) -> P3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm3(a: P3) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

/// Distance between two points, for callers of the harness.
pub fn distance3(a: P3, b: P3) -> f64 {
    norm3(sub3(a, b))
}

/// A map that is not Lipschitz near the apex: `(x t^{-1/2}, y, t)`.
pub fn non_lipschitz_example(p: P3) -> P3 {
    [p[0] / p[2].sqrt(), p[1], p[2]]
}
