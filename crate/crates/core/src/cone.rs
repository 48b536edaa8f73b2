//! Common invariant cones of 2×2 systems and the antinorm they induce.
//!
//! A cone here is a closed arc of directions in the projective line (angles
//! taken mod π). If every map sends the arc into itself then
//! `a_K(P) = min_{θ ∈ K} ‖P u_θ‖` is supermultiplicative on products of those
//! maps and sits between `σ₂(P)` and `σ₁(P)`. The search is heuristic; the
//! returned cone is always re-verified before use.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;

/// An arc `[start, start + width]` of line directions, `0 ≤ width < π`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectiveArc {
    pub start: f64,
    pub width: f64,
}

fn reduce(theta: f64) -> f64 {
    let t = theta.rem_euclid(PI);
    if t >= PI {
        0.0
    } else {
        t
    }
}

fn ccw_offset(from: f64, to: f64) -> f64 {
    reduce(to - from)
}

fn direction_angle(m: &Matrix, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let x = m.get(0, 0) * c + m.get(0, 1) * s;
    let y = m.get(1, 0) * c + m.get(1, 1) * s;
    reduce(y.atan2(x))
}

impl ProjectiveArc {
    pub fn point(theta: f64) -> Self {
        ProjectiveArc { start: reduce(theta), width: 0.0 }
    }

    pub fn end(&self) -> f64 {
        self.start + self.width
    }

    pub fn contains_arc(&self, other: &ProjectiveArc) -> bool {
        let off = ccw_offset(self.start, other.start);
        off + other.width <= self.width
    }

    /// Image of the arc under the projective action of `m` (assumed invertible).
    pub fn image(&self, m: &Matrix) -> ProjectiveArc {
        let a = direction_angle(m, self.start);
        if self.width == 0.0 {
            return ProjectiveArc { start: a, width: 0.0 };
        }
        let b = direction_angle(m, self.end());
        if m.det() > 0.0 {
            ProjectiveArc { start: a, width: ccw_offset(a, b) }
        } else {
            ProjectiveArc { start: b, width: ccw_offset(b, a) }
        }
    }

    /// Smallest arc containing both.
    pub fn hull(&self, other: &ProjectiveArc) -> ProjectiveArc {
        let w1 = self.width.max(ccw_offset(self.start, other.start) + other.width);
        let w2 = other.width.max(ccw_offset(other.start, self.start) + self.width);
        if w1 <= w2 {
            ProjectiveArc { start: self.start, width: w1 }
        } else {
            ProjectiveArc { start: other.start, width: w2 }
        }
    }

    fn inflate(&self, margin: f64) -> ProjectiveArc {
        ProjectiveArc { start: reduce(self.start - margin), width: self.width + 2.0 * margin }
    }

    /// `log a_K(P) = log min_{θ ∈ arc} ‖P u_θ‖`.
    pub fn log_antinorm(&self, p: &Matrix) -> f64 {
        Antinorm::new(*self).log_eval(p)
    }
}

/// [`ProjectiveArc::log_antinorm`] with the endpoint directions precomputed.
#[derive(Clone, Copy, Debug)]
pub struct Antinorm {
    arc: ProjectiveArc,
    u0: (f64, f64),
    u1: (f64, f64),
}

impl Antinorm {
    pub fn new(arc: ProjectiveArc) -> Self {
        let (s0, c0) = arc.start.sin_cos();
        let (s1, c1) = arc.end().sin_cos();
        Antinorm { arc, u0: (c0, s0), u1: (c1, s1) }
    }

    pub fn arc(&self) -> ProjectiveArc {
        self.arc
    }

    pub fn log_eval(&self, p: &Matrix) -> f64 {
        let m = p.as_slice();
        let at = |(c, s): (f64, f64)| (m[0] * c + m[1] * s).hypot(m[2] * c + m[3] * s);
        let mut best = at(self.u0).min(at(self.u1));
        // minimiser of ‖P u‖ over the whole circle: least eigenvector of PᵀP
        let q00 = m[0] * m[0] + m[2] * m[2];
        let q11 = m[1] * m[1] + m[3] * m[3];
        let q01 = m[0] * m[1] + m[2] * m[3];
        let least = reduce(0.5 * (2.0 * q01).atan2(q00 - q11) + PI / 2.0);
        if ccw_offset(self.arc.start, least) <= self.arc.width {
            best = best.min(p.min_singular());
        }
        best.ln()
    }
}

/// Searches for an arc mapped into itself by every matrix of a 2×2 system.
///
/// Starts from the hull of the dominant eigendirections, grows it by images
/// until it stabilises, then inflates slightly and checks invariance. Returns
/// `None` when some map has non-real or repeated eigenvalues (and is not a
/// scalar), when the hull would fill the whole projective line, or when the
/// final check fails.
pub fn find_invariant_cone(maps: &[Matrix]) -> Option<ProjectiveArc> {
    if maps.iter().any(|m| m.dim() != 2) {
        return None;
    }
    let mut dirs = Vec::new();
    for m in maps.iter().filter(|m| !m.is_scalar()) {
        dirs.push(dominant_direction(m)?);
    }
    let mut arc = covering_arc(&dirs);
    const MAX_WIDTH: f64 = PI * 0.999;
    for _ in 0..500 {
        let mut next = arc;
        for m in maps {
            next = next.hull(&arc.image(m));
        }
        if next.width >= MAX_WIDTH {
            return None;
        }
        let grown = next.width - arc.width;
        arc = next;
        if grown <= 1e-15 {
            break;
        }
    }
    for margin in [1e-12, 1e-9, 1e-6, 1e-4, 1e-2] {
        let candidate = arc.inflate(margin * (1.0 + arc.width));
        if candidate.width >= MAX_WIDTH {
            break;
        }
        if maps.iter().all(|m| candidate.contains_arc(&candidate.image(m))) {
            return Some(candidate);
        }
    }
    None
}

fn dominant_direction(m: &Matrix) -> Option<f64> {
    let (a, b, c, d) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
    let tr = a + d;
    let disc = (a - d).powi(2) + 4.0 * b * c;
    if disc <= 0.0 {
        return None;
    }
    let root = disc.sqrt();
    let mu = if tr >= 0.0 { 0.5 * (tr + root) } else { 0.5 * (tr - root) };
    // (A − μI)x = 0: take the better conditioned of the two row solutions
    let v1 = (b, mu - a);
    let v2 = (mu - d, c);
    let v = if v1.0.hypot(v1.1) >= v2.0.hypot(v2.1) { v1 } else { v2 };
    Some(reduce(v.1.atan2(v.0)))
}

fn covering_arc(angles: &[f64]) -> ProjectiveArc {
    if angles.is_empty() {
        return ProjectiveArc::point(0.0);
    }
    let mut sorted: Vec<f64> = angles.to_vec();
    sorted.sort_by(f64::total_cmp);
    // complement of the largest circular gap
    let n = sorted.len();
    let mut best_gap = PI - (sorted[n - 1] - sorted[0]);
    let mut best_start = sorted[0];
    for i in 0..n - 1 {
        let gap = sorted[i + 1] - sorted[i];
        if gap > best_gap {
            best_gap = gap;
            best_start = sorted[i + 1];
        }
    }
    ProjectiveArc { start: best_start, width: (PI - best_gap).max(0.0) }
}
