//! Brute-force oracles and random instance generators for tests.
//!
//! Nothing here calls into the library under test.

use nalgebra::{DMatrix, DVector, Vector2};
pub use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type V2 = Vector2<f64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn cross(a: V2, b: V2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Closest distance from `p` to segment `a b`.
pub fn point_segment_distance(p: V2, a: V2, b: V2) -> f64 {
    let d = b - a;
    let len2 = d.norm_squared();
    let t = if len2 == 0.0 { 0.0 } else { ((p - a).dot(&d) / len2).clamp(0.0, 1.0) };
    (a + d * t - p).norm()
}

/// Edges of a vertex list: none for a point, one for a segment, closed ring otherwise.
fn edges(v: &[V2]) -> Vec<(V2, V2)> {
    match v.len() {
        0 | 1 => vec![],
        2 => vec![(v[0], v[1])],
        n => (0..n).map(|i| (v[i], v[(i + 1) % n])).collect(),
    }
}

fn project(v: &[V2], axis: V2) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        let x = p.dot(&axis);
        (lo.min(x), hi.max(x))
    })
}

/// Signed distance between two convex vertex sets by exhaustive features.
///
/// Separated: minimum over every vertex against every edge or vertex of
/// the other body. Overlapping: minimum overlap over all edge normals and
/// edge directions of both bodies.
pub fn oracle_signed_distance(a: &[V2], b: &[V2]) -> f64 {
    let mut axes = Vec::new();
    for (p, q) in edges(a).into_iter().chain(edges(b)) {
        let d = (q - p).normalize();
        axes.push(V2::new(-d.y, d.x));
        axes.push(d);
    }
    let mut depth = f64::INFINITY;
    let mut overlap = !axes.is_empty();
    for axis in &axes {
        let (a0, a1) = project(a, *axis);
        let (b0, b1) = project(b, *axis);
        let o = (a1 - b0).min(b1 - a0);
        if o <= 0.0 {
            overlap = false;
            break;
        }
        depth = depth.min(o);
    }
    if overlap {
        return -depth;
    }
    let mut best = f64::INFINITY;
    for (x, y) in [(a, b), (b, a)] {
        for &p in x {
            for &q in y {
                best = best.min((p - q).norm());
            }
            for (s, t) in edges(y) {
                best = best.min(point_segment_distance(p, s, t));
            }
        }
    }
    // crossing edges with no vertex inside the other body
    for (p, q) in edges(a) {
        for (s, t) in edges(b) {
            if segments_intersect(p, q, s, t) {
                return 0.0;
            }
        }
    }
    best
}

pub fn segments_intersect(p: V2, q: V2, s: V2, t: V2) -> bool {
    let d1 = cross(q - p, s - p);
    let d2 = cross(q - p, t - p);
    let d3 = cross(t - s, p - s);
    let d4 = cross(t - s, q - s);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Strict interior test for a counter-clockwise convex polygon.
pub fn inside_ccw(poly: &[V2], p: V2) -> bool {
    (0..poly.len()).all(|i| cross(poly[(i + 1) % poly.len()] - poly[i], p - poly[i]) > 0.0)
}

/// Random strictly convex counter-clockwise polygon: points on a circle
/// pushed through a random orientation-preserving linear map.
pub fn random_polygon(r: &mut impl Rng, center: V2, scale: f64) -> Vec<V2> {
    let n = r.random_range(3..=8);
    let mut ang: Vec<f64> = (0..n).map(|_| r.random_range(0.0..std::f64::consts::TAU)).collect();
    ang.sort_by(f64::total_cmp);
    // keep vertices apart so the polygon stays well conditioned
    for i in 1..n {
        if ang[i] - ang[i - 1] < 0.05 {
            ang[i] = ang[i - 1] + 0.05;
        }
    }
    if ang[n - 1] - ang[0] > std::f64::consts::TAU - 0.05 {
        ang.truncate(n - 1);
    }
    if ang.len() < 3 {
        return random_polygon(r, center, scale);
    }
    let m = loop {
        let m = nalgebra::Matrix2::new(
            r.random_range(0.3..1.5),
            r.random_range(-0.5..0.5),
            r.random_range(-0.5..0.5),
            r.random_range(0.3..1.5),
        );
        if m.determinant() > 0.1 {
            break m;
        }
    };
    ang.iter()
        .map(|a| center + m * V2::new(a.cos(), a.sin()) * scale)
        .collect()
}

/// Random point, segment or polygon near `center`.
pub fn random_body(r: &mut impl Rng, center: V2, scale: f64) -> Vec<V2> {
    match r.random_range(0..4) {
        0 => vec![center + random_v2(r, scale)],
        1 => loop {
            let a = center + random_v2(r, scale);
            let b = center + random_v2(r, scale);
            if (a - b).norm() > 1e-3 {
                break vec![a, b];
            }
        },
        _ => random_polygon(r, center, scale),
    }
}

pub fn random_v2(r: &mut impl Rng, scale: f64) -> V2 {
    V2::new(r.random_range(-scale..scale), r.random_range(-scale..scale))
}

/// Random symmetric positive definite matrix with eigenvalues in `[lo, hi]`.
pub fn random_spd(r: &mut impl Rng, n: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| r.sample::<f64, _>(StandardNormal));
    let q = g.qr().q();
    let d = DMatrix::from_diagonal(&DVector::from_fn(n, |_, _| r.random_range(lo..hi)));
    let m = &q * d * q.transpose();
    (&m + m.transpose()) * 0.5
}

pub fn random_matrix(r: &mut impl Rng, rows: usize, cols: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| r.random_range(-scale..scale))
}

/// Central-difference Jacobian of `f` at `x`.
pub fn fd_jacobian(f: impl Fn(&DVector<f64>) -> DVector<f64>, x: &DVector<f64>, h: f64) -> DMatrix<f64> {
    let m = f(x).len();
    let mut j = DMatrix::zeros(m, x.len());
    for k in 0..x.len() {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[k] += h;
        xm[k] -= h;
        j.set_column(k, &((f(&xp) - f(&xm)) / (2.0 * h)));
    }
    j
}

/// Like [`fd_jacobian`], with every difference wrapped into `(-pi, pi]` so
/// that angular outputs crossing the seam do not blow up. Differences of
/// non-angular outputs are tiny and pass through unchanged.
pub fn fd_jacobian_wrapped(f: impl Fn(&DVector<f64>) -> DVector<f64>, x: &DVector<f64>, h: f64) -> DMatrix<f64> {
    let m = f(x).len();
    let mut j = DMatrix::zeros(m, x.len());
    for k in 0..x.len() {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[k] += h;
        xm[k] -= h;
        let d = (f(&xp) - f(&xm)).map(|v| {
            let t = std::f64::consts::TAU;
            v - t * ((v + std::f64::consts::PI) / t).floor()
        });
        j.set_column(k, &(d / (2.0 * h)));
    }
    j
}

/// Lower Cholesky factor of a PSD matrix, tolerant of zero pivots.
pub fn cholesky_psd(p: &DMatrix<f64>) -> DMatrix<f64> {
    let n = p.nrows();
    let mut l = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[(i, k)] * l[(j, k)]).sum();
            if i == j {
                l[(i, i)] = (p[(i, i)] - s).max(0.0).sqrt();
            } else if l[(j, j)] > 0.0 {
                l[(i, j)] = (p[(i, j)] - s) / l[(j, j)];
            }
        }
    }
    l
}

/// Monte-Carlo estimate and binomial standard error of `Pr(x in poly)` for
/// `x ~ N(mean, cov)` in the plane.
pub fn mc_point_in_polygon(mean: V2, cov: &DMatrix<f64>, poly: &[V2], n: usize, seed: u64) -> (f64, f64) {
    let l = cholesky_psd(cov);
    let mut r = rng(seed);
    let mut hits = 0usize;
    for _ in 0..n {
        let z0: f64 = r.sample(StandardNormal);
        let z1: f64 = r.sample(StandardNormal);
        let p = mean + V2::new(l[(0, 0)] * z0, l[(1, 0)] * z0 + l[(1, 1)] * z1);
        if inside_ccw(poly, p) {
            hits += 1;
        }
    }
    let p = hits as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}

/// Standard normal CDF through a high-accuracy erfc.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Complementary error function: erf series near zero, continued fraction elsewhere.
pub fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < 0.5 {
        // Maclaurin series of erf
        let mut sum = x;
        let mut term = x;
        let x2 = x * x;
        let mut k = 0.0;
        loop {
            k += 1.0;
            term *= -x2 / k;
            let add = term / (2.0 * k + 1.0);
            sum += add;
            if add.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        1.0 - 2.0 / std::f64::consts::PI.sqrt() * sum
    } else {
        // Lentz continued fraction
        let tiny = 1e-300;
        let mut f = x;
        let mut c = x;
        let mut d = 0.0;
        for k in 1..20_000 {
            let a = k as f64 * 0.5;
            d = x + a * d;
            d = if d.abs() < tiny { tiny } else { d };
            c = x + a / c;
            c = if c.abs() < tiny { tiny } else { c };
            d = 1.0 / d;
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (-x * x).exp() / (f * std::f64::consts::PI.sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_unit_squares() {
        let sq = |cx: f64| vec![V2::new(cx - 0.5, -0.5), V2::new(cx + 0.5, -0.5), V2::new(cx + 0.5, 0.5), V2::new(cx - 0.5, 0.5)];
        assert!((oracle_signed_distance(&sq(0.0), &sq(3.0)) - 2.0).abs() < 1e-12);
        assert!((oracle_signed_distance(&sq(0.0), &sq(0.25)) + 0.75).abs() < 1e-12);
        assert!((oracle_signed_distance(&[V2::zeros()], &sq(0.0)) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn erfc_reference_points() {
        assert!((normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        for (got, want) in [
            (normal_cdf(-3.0), 0.001_349_898_031_630_095_7),
            (erfc(3.0), 2.209_049_699_858_543_8e-5),
            (erfc(0.7), 0.322_198_806_162_581_7),
            (erfc(0.2), 0.777_297_410_789_521_6),
        ] {
            assert!((got / want - 1.0).abs() < 1e-13, "{got} {want}");
        }
    }

    #[test]
    fn random_polygons_are_ccw_convex() {
        let mut r = rng(1);
        for _ in 0..500 {
            let p = random_polygon(&mut r, V2::zeros(), 2.0);
            let n = p.len();
            for i in 0..n {
                assert!(cross(p[(i + 1) % n] - p[i], p[(i + 2) % n] - p[(i + 1) % n]) > 0.0);
            }
        }
    }
}
