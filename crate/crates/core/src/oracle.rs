//! Double-precision oracle for strings and Euler numbers.
//!
//! Everything here is rebuilt from scratch in `f64`: the middle-slice
//! reflection is obtained as the generic reflection negating a 2-plane (via
//! its Gram matrix) rather than from the closed formula, and the rotation
//! angle is read off a numeric trace. It shares no code with the exact
//! pipeline beyond the parameter triple.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{Matrix2, Matrix3, Matrix5, SymmetricEigen, Vector5};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::necklace::validate_triple;

pub type V5 = Vector5<f64>;
pub type M5 = Matrix5<f64>;

/// Values within this distance of a grid angle are treated as on it.
pub const GRID_SNAP: f64 = 1e-9;

fn metric() -> M5 {
    M5::from_diagonal(&V5::new(-1.0, -1.0, -1.0, -1.0, 1.0))
}

pub fn form64(u: &V5, v: &V5) -> f64 {
    -u[0] * v[0] - u[1] * v[1] - u[2] * v[2] - u[3] * v[3] + u[4] * v[4]
}

/// Scale-free distance: largest 2×2 minor after sup-norm normalisation.
pub fn projective_distance(u: &V5, v: &V5) -> f64 {
    let u = u / u.amax();
    let v = v / v.amax();
    let mut worst: f64 = 0.0;
    for i in 0..5 {
        for j in (i + 1)..5 {
            worst = worst.max((u[i] * v[j] - u[j] * v[i]).abs());
        }
    }
    worst
}

/// The configuration rebuilt in floating point.
#[derive(Debug, Clone)]
pub struct OracleConfig {
    pub k: i64,
    pub m: i64,
    pub n: i64,
    pub x1: f64,
    pub x2: f64,
    pub r: M5,
    pub p: Vec<V5>,
}

impl OracleConfig {
    pub fn new(k: i64, m: i64, n: i64, x1: f64, x2: f64) -> Result<Self> {
        validate_triple(k, m, n)?;
        if !(x1 > 0.0 && x2 >= 0.0 && x1 + x2 > 1.0) {
            return Err(Error::Domain(format!("inadmissible parameters ({x1}, {x2})")));
        }
        let angle = |j: i64| 2.0 * PI * (j.rem_euclid(n) as f64) / n as f64;
        let (t1, tm) = (angle(1), angle(m));
        let mut r = M5::identity();
        r[(0, 0)] = t1.cos();
        r[(0, 1)] = -t1.sin();
        r[(1, 0)] = t1.sin();
        r[(1, 1)] = t1.cos();
        r[(2, 2)] = tm.cos();
        r[(2, 3)] = -tm.sin();
        r[(3, 2)] = tm.sin();
        r[(3, 3)] = tm.cos();
        let p0 = V5::new(x1.sqrt(), 0.0, x2.sqrt(), 0.0, (x1 + x2 - 1.0).sqrt());
        let mut p = Vec::with_capacity(n as usize);
        let mut cur = p0;
        for _ in 0..n {
            p.push(cur);
            cur = r * cur;
        }
        Ok(OracleConfig { k, m, n, x1, x2, r, p })
    }

    pub fn p(&self, i: i64) -> &V5 {
        &self.p[i.rem_euclid(self.n) as usize]
    }

    fn r_power(&self, e: i64) -> M5 {
        let e = e.rem_euclid(self.n);
        let mut acc = M5::identity();
        for _ in 0..e {
            acc = self.r * acc;
        }
        acc
    }
}

/// Reflection fixing the form-orthogonal complement of `span(w)` pointwise and
/// negating `span(w)`.
fn reflection_negating(w: &[V5]) -> M5 {
    let k = w.len();
    let gram = nalgebra::DMatrix::from_fn(k, k, |a, b| form64(&w[a], &w[b]));
    let inv = gram.try_inverse().expect("non-degenerate span");
    let j = metric();
    let mut proj = M5::zeros();
    for a in 0..k {
        for b in 0..k {
            proj += w[a] * (j * w[b]).transpose() * inv[(a, b)];
        }
    }
    M5::identity() - proj * 2.0
}

/// The middle-slice reflection `σ`: negates `p_0` and `p_1 − p_{n−1}`.
pub fn middle_slice_reflection(cfg: &OracleConfig) -> M5 {
    reflection_negating(&[*cfg.p(0), cfg.p(1) - cfg.p(-1)])
}

/// `σ_i = r^i σ r^{−i}`.
pub fn sigma_i(cfg: &OracleConfig, sigma: &M5, i: i64) -> M5 {
    cfg.r_power(i) * sigma * cfg.r_power(-i)
}

/// Euclidean-orthonormal basis of `span(p_i, p_{i+1})^⊥` (form complement).
pub fn corner_subspace(cfg: &OracleConfig, i: i64) -> [V5; 3] {
    let j = metric();
    let mut kept: Vec<V5> = Vec::new();
    let mut constraints: Vec<V5> = Vec::new();
    for c in [j * cfg.p(i), j * cfg.p(i + 1)] {
        let mut v = c;
        for u in &constraints {
            v -= u * u.dot(&v);
        }
        constraints.push(v.normalize());
    }
    for e in 0..5 {
        let mut v = V5::zeros();
        v[e] = 1.0;
        for u in constraints.iter().chain(kept.iter()) {
            v -= u * u.dot(&v);
        }
        if v.norm() > 1e-8 {
            kept.push(v.normalize());
        }
        if kept.len() == 3 {
            break;
        }
    }
    [kept[0], kept[1], kept[2]]
}

fn corner_gram(basis: &[V5; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|a, b| form64(&basis[a], &basis[b]))
}

/// Numbers of negative and positive eigenvalues of the restricted form.
pub fn corner_signature(basis: &[V5; 3]) -> (usize, usize) {
    let eig = SymmetricEigen::new(corner_gram(basis));
    let neg = eig.eigenvalues.iter().filter(|&&l| l < 0.0).count();
    let pos = eig.eigenvalues.iter().filter(|&&l| l > 0.0).count();
    (neg, pos)
}

/// Form-orthonormal basis `(t, e1, e2)` of the corner plane with `⟨t,t⟩ = 1`.
fn corner_frame(cfg: &OracleConfig) -> Result<(V5, V5, V5)> {
    let basis = corner_subspace(cfg, 0);
    let eig = SymmetricEigen::new(corner_gram(&basis));
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for idx in 0..3 {
        let l = eig.eigenvalues[idx];
        let col = eig.eigenvectors.column(idx);
        let v = basis[0] * col[0] + basis[1] * col[1] + basis[2] * col[2];
        let v = v / l.abs().sqrt();
        if l > 0.0 {
            pos.push(v);
        } else {
            neg.push(v);
        }
    }
    if pos.len() != 1 || neg.len() != 2 {
        return Err(Error::Precondition("corner plane is not a hyperbolic plane".into()));
    }
    Ok((pos[0], neg[0], neg[1]))
}

/// A point of the absolute on the corner plane `C_0`; `choice` selects one of
/// two directions a quarter turn apart.
pub fn ideal_point_on_corner(cfg: &OracleConfig, choice: usize) -> Result<V5> {
    let (t, e1, e2) = corner_frame(cfg)?;
    let phi = if choice % 2 == 0 { 0.0 } else { PI / 2.0 };
    Ok(t + e1 * phi.cos() + e2 * phi.sin())
}

#[derive(Debug, Clone)]
pub struct StringTrace {
    /// `q_0, q_{n−1}, …, q_1, q'_0`.
    pub points: Vec<V5>,
    pub closure_residual: f64,
    pub steps: usize,
}

/// Applies `σ_n, σ_{n−1}, …, σ_1` in turn, starting from `q0`.
pub fn trace_string(cfg: &OracleConfig, q0: &V5) -> StringTrace {
    let sigma = middle_slice_reflection(cfg);
    let mut points = vec![*q0];
    let mut q = *q0;
    for i in (1..=cfg.n).rev() {
        q = sigma_i(cfg, &sigma, i) * q;
        q /= q.amax();
        points.push(q);
    }
    StringTrace {
        closure_residual: projective_distance(&q, q0),
        points,
        steps: cfg.n as usize,
    }
}

/// Cosine of the rotation angle of `rσ` on the corner plane, from numeric traces.
pub fn rotation_cos64(cfg: &OracleConfig) -> f64 {
    let rs = cfg.r * middle_slice_reflection(cfg);
    let u = [*cfg.p(0), *cfg.p(1)];
    let gram = Matrix2::from_fn(|a, b| form64(&u[a], &u[b]));
    let images = Matrix2::from_fn(|a, b| form64(&(rs * u[b]), &u[a]));
    let restricted = gram.try_inverse().expect("p_0, p_1 independent") * images;
    (rs.trace() - restricted.trace() - 1.0) / 2.0
}

/// Solves the two-equation parameter system in floating point.
pub fn solve_system64(k: i64, m: i64, n: i64) -> Result<(f64, f64)> {
    validate_triple(k, m, n)?;
    let c = |j: i64| (2.0 * PI * j as f64 / n as f64).cos();
    let (c1, ck, cm) = (c(1), c(k), c(m));
    let a = Matrix2::new(
        1.0 - c1,
        1.0 - cm,
        (1.0 - c1 * c1) * (ck - cm),
        -(1.0 - cm * cm) * (c1 - ck),
    );
    let x = a
        .lu()
        .solve(&nalgebra::Vector2::new(1.0, 0.0))
        .ok_or_else(|| Error::Precondition("singular system".into()))?;
    Ok((x[0], x[1]))
}

/// Midpoint of the plane segment `(2/(1−c_2), 2/(1−c_1))`.
pub fn segment_midpoint64(n: i64) -> f64 {
    let c = |j: f64| (2.0 * PI * j / n as f64).cos();
    (2.0 / (1.0 - c(2.0)) + 2.0 / (1.0 - c(1.0))) / 2.0
}

/// Whether `(x1, x2)` satisfies every defining inequality with margin `eps`.
pub fn inside_region64(m: i64, n: i64, x1: f64, x2: f64, eps: f64) -> bool {
    let c = |j: i64| (2.0 * PI * (j.rem_euclid(n)) as f64 / n as f64).cos();
    let lhs = |i: i64| (1.0 - c(i)) * x1 + (1.0 - c(m * i)) * x2;
    x1 > eps && x2 >= 0.0 && x1 + x2 > 1.0 + eps && lhs(1) < 2.0 - eps && (2..=n / 2).all(|i| lhs(i) > 2.0 + eps)
}

/// Draws points of the region (with `x2 > 0`) by rejection sampling.
pub fn sample_region_points(k: i64, m: i64, n: i64, count: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    validate_triple(k, m, n)?;
    let c = |j: i64| (2.0 * PI * j as f64 / n as f64).cos();
    let x1_max = 2.0 / (1.0 - c(1));
    let x2_max = 2.0 / (1.0 - c(m));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count {
        attempts += 1;
        if attempts > 10_000_000 {
            return Err(Error::Precondition("region too thin to sample".into()));
        }
        let x1 = rng.gen_range(0.0..x1_max);
        let x2 = rng.gen_range(0.0..x2_max);
        if x2 > 1e-6 && inside_region64(m, n, x1, x2, 1e-6) {
            out.push((x1, x2));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrackSample {
    pub t: f64,
    pub cos_a: f64,
    pub a_unwrapped: f64,
}

#[derive(Debug, Clone)]
pub struct AngleTracking {
    /// Signed number of grid passages for `t ∈ (0, 1]`; positive when `cos a` grows.
    pub count: i64,
    pub samples: Vec<TrackSample>,
}

fn snap(a: f64, n: i64) -> f64 {
    let step = 2.0 * PI / n as f64;
    let j = (a / step).round();
    if (a - j * step).abs() < GRID_SNAP {
        j * step
    } else {
        a
    }
}

fn track(k: i64, m: i64, n: i64, end: (f64, f64), samples: usize) -> Result<Vec<TrackSample>> {
    let start = (segment_midpoint64(n), 0.0);
    let mut out = Vec::with_capacity(samples + 1);
    for s in 0..=samples {
        let t = s as f64 / samples as f64;
        let x1 = start.0 + t * (end.0 - start.0);
        let x2 = start.1 + t * (end.1 - start.1);
        let cfg = OracleConfig::new(k, m, n, x1, x2)?;
        let cos_a = rotation_cos64(&cfg).clamp(-1.0, 1.0);
        out.push(TrackSample {
            t,
            cos_a,
            a_unwrapped: snap(cos_a.acos(), n),
        });
    }
    Ok(out)
}

/// Grid passages in one step, or `None` if the step is not monotone.
fn passages(a0: f64, a1: f64, n: i64) -> Vec<i64> {
    let step = 2.0 * PI / n as f64;
    let mut hits = Vec::new();
    for j in 0..=n / 2 {
        let g = j as f64 * step;
        let hit = if a1 < a0 {
            g >= a1 && g < a0
        } else if a1 > a0 {
            g > a0 && g <= a1
        } else {
            false
        };
        if hit {
            hits.push(j);
        }
    }
    hits
}

/// Counts passages of the rotation angle through `{2πj/n}` along the straight
/// path from the plane configuration to `end`, by sampling and unwrapping.
pub fn euler_via_angle_tracking(k: i64, m: i64, n: i64, end: (f64, f64), samples: usize) -> Result<AngleTracking> {
    validate_triple(k, m, n)?;
    let min = 16 * n as usize;
    if samples < min {
        return Err(Error::Domain(format!("need at least {min} samples, got {samples}")));
    }
    let mut count = samples;
    for _ in 0..8 {
        let trace = track(k, m, n, end, count)?;
        let mut direction = 0.0f64;
        let mut total = 0i64;
        let mut refine = false;
        for w in trace.windows(2) {
            let (a0, a1) = (w[0].a_unwrapped, w[1].a_unwrapped);
            let d = (a1 - a0).signum();
            if a1 != a0 {
                if direction != 0.0 && d != direction {
                    refine = true;
                    break;
                }
                direction = d;
            }
            let hits = passages(a0, a1, n);
            if hits.len() > 1 {
                refine = true;
                break;
            }
            // a decreasing means cos a increasing
            total += hits.len() as i64 * if a1 < a0 { 1 } else { -1 };
        }
        if !refine {
            return Ok(AngleTracking {
                count: total,
                samples: trace,
            });
        }
        count *= 2;
    }
    Err(Error::Precondition("angle samples did not separate or stay monotone".into()))
}

/// Writes the samples as CSV with columns `t, cos_a, a_unwrapped`.
pub fn write_samples_csv<W: Write>(samples: &[TrackSample], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in samples {
        w.serialize(s).map_err(|e| Error::Output(format!("csv: {e}")))?;
    }
    w.flush().map_err(|e| Error::Output(format!("csv: {e}")))?;
    Ok(())
}
