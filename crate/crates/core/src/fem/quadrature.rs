//! Element quadrature with splitting at data discontinuities.

use crate::scalar::Real;

const GAUSS5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GAUSS5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Seven-point rule exact for degree 5 on triangles: barycentric points
/// and weights normalised to sum to one.
fn triangle_rule<T: Real>() -> [([T; 3], T); 7] {
    let s15 = T::lit(15.0).sqrt();
    let a = (T::lit(6.0) - s15) / T::lit(21.0);
    let b = (T::lit(6.0) + s15) / T::lit(21.0);
    let wa = (T::lit(155.0) - s15) / T::lit(1200.0);
    let wb = (T::lit(155.0) + s15) / T::lit(1200.0);
    let one = T::one();
    let two = T::lit(2.0);
    let third = one / T::lit(3.0);
    [
        ([third, third, third], T::lit(9.0) / T::lit(40.0)),
        ([a, a, one - two * a], wa),
        ([a, one - two * a, a], wa),
        ([one - two * a, a, a], wa),
        ([b, b, one - two * b], wb),
        ([b, one - two * b, b], wb),
        ([one - two * b, b, b], wb),
    ]
}

/// `∫_{x0}^{x1} f(x) [λ0(x), λ1(x)] dx` for the linear hats of the
/// interval, splitting at every break strictly inside it.
pub fn interval_moments<T: Real>(x0: T, x1: T, breaks: &[T], f: &dyn Fn(&[T]) -> T) -> [T; 2] {
    let mut cuts: Vec<T> = std::iter::once(x0)
        .chain(breaks.iter().copied().filter(|&c| c > x0 && c < x1))
        .chain(std::iter::once(x1))
        .collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite breaks"));
    let len = x1 - x0;
    let mut out = [T::zero(); 2];
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let half = (b - a) / T::lit(2.0);
        let mid = (a + b) / T::lit(2.0);
        for (&xi, &wi) in GAUSS5_NODES.iter().zip(&GAUSS5_WEIGHTS) {
            let x = mid + half * T::lit(xi);
            let fx = f(&[x]) * T::lit(wi) * half;
            let l1 = (x - x0) / len;
            out[0] += fx * (T::one() - l1);
            out[1] += fx * l1;
        }
    }
    out
}

type Polygon<T> = Vec<[T; 2]>;

/// Splits a convex polygon by the line `p[axis] = c`.
fn split_polygon<T: Real>(poly: &Polygon<T>, axis: usize, c: T) -> (Polygon<T>, Polygon<T>) {
    let mut below = Vec::new();
    let mut above = Vec::new();
    let n = poly.len();
    for k in 0..n {
        let p = poly[k];
        let q = poly[(k + 1) % n];
        let (dp, dq) = (p[axis] - c, q[axis] - c);
        if dp <= T::zero() {
            below.push(p);
        }
        if dp >= T::zero() {
            above.push(p);
        }
        if (dp < T::zero() && dq > T::zero()) || (dp > T::zero() && dq < T::zero()) {
            let s = dp / (dp - dq);
            let x = [p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])];
            below.push(x);
            above.push(x);
        }
    }
    (below, above)
}

fn polygon_area<T: Real>(poly: &Polygon<T>) -> T {
    let n = poly.len();
    let mut a = T::zero();
    for k in 0..n {
        let p = poly[k];
        let q = poly[(k + 1) % n];
        a += p[0] * q[1] - q[0] * p[1];
    }
    a / T::lit(2.0)
}

/// `∫_T f λ_i` for the three barycentric hats of triangle `tri`, clipping
/// the triangle at the given vertical and horizontal break lines.
pub fn triangle_moments<T: Real>(
    tri: [[T; 2]; 3],
    breaks_x: &[T],
    breaks_y: &[T],
    f: &dyn Fn(&[T]) -> T,
) -> [T; 3] {
    let [p0, p1, p2] = tri;
    let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
    let bary = |x: [T; 2]| -> [T; 3] {
        let dx = x[0] - p0[0];
        let dy = x[1] - p0[1];
        let l1 = (dx * (p2[1] - p0[1]) - (p2[0] - p0[0]) * dy) / det;
        let l2 = ((p1[0] - p0[0]) * dy - dx * (p1[1] - p0[1])) / det;
        [T::one() - l1 - l2, l1, l2]
    };

    let mut pieces: Vec<Polygon<T>> = vec![tri.to_vec()];
    for (axis, lines) in [(0usize, breaks_x), (1usize, breaks_y)] {
        for &c in lines {
            let mut next = Vec::with_capacity(pieces.len() + 1);
            for poly in pieces {
                let lo = poly.iter().map(|p| p[axis]).fold(T::infinity(), T::min);
                let hi = poly.iter().map(|p| p[axis]).fold(T::neg_infinity(), T::max);
                if c > lo && c < hi {
                    let (a, b) = split_polygon(&poly, axis, c);
                    next.push(a);
                    next.push(b);
                } else {
                    next.push(poly);
                }
            }
            pieces = next;
        }
    }

    let rule = triangle_rule::<T>();
    let mut out = [T::zero(); 3];
    for poly in pieces.iter().filter(|p| p.len() >= 3) {
        for k in 1..poly.len() - 1 {
            let sub = [poly[0], poly[k], poly[k + 1]];
            let area = polygon_area(&sub.to_vec()).abs();
            if area == T::zero() {
                continue;
            }
            for (b, w) in &rule {
                let x = [
                    b[0] * sub[0][0] + b[1] * sub[1][0] + b[2] * sub[2][0],
                    b[0] * sub[0][1] + b[1] * sub[1][1] + b[2] * sub[2][1],
                ];
                let fx = f(&x) * *w * area;
                let lam = bary(x);
                for i in 0..3 {
                    out[i] += fx * lam[i];
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_moments_of_polynomial() {
        // ∫_0^1 x^3 (1-x) dx = 1/20, ∫_0^1 x^4 dx = 1/5
        let m = interval_moments(0.0, 1.0, &[], &|x: &[f64]| x[0].powi(3));
        assert!((m[0] - 0.05).abs() < 1e-15);
        assert!((m[1] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn interval_split_makes_step_exact() {
        let step = |x: &[f64]| if x[0] <= 2.0 / 3.0 { 1.0 } else { 0.0 };
        let m = interval_moments(0.5, 1.0, &[2.0 / 3.0], &step);
        // λ1 = 2(x - 1/2) on this element, so ∫ λ1 over (1/2, 2/3) is 1/36.
        let l1: f64 = (2.0 / 3.0f64 - 0.5).powi(2);
        assert!((m[1] - l1).abs() < 1e-15);
        assert!((m[0] + m[1] - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn triangle_moments_of_constant() {
        let tri = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]];
        let m: [f64; 3] = triangle_moments(tri, &[], &[], &|_| 1.0);
        for v in m {
            assert!((v - 1.0 / 6.0).abs() < 1e-15);
        }
    }

    #[test]
    fn clipped_triangle_integrates_indicator_exactly() {
        let tri = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]];
        let ind = |x: &[f64]| if x[0] <= 0.5 { 1.0 } else { 0.0 };
        let m = triangle_moments(tri, &[0.5], &[], &ind);
        // area of {x ≤ 1/2} inside the triangle is 1/8
        assert!((m.iter().sum::<f64>() - 0.125).abs() < 1e-15);
        let both = triangle_moments(tri, &[0.5], &[0.25], &|x| {
            if x[0] <= 0.5 && x[1] <= 0.25 {
                1.0
            } else {
                0.0
            }
        });
        assert!((both.iter().sum::<f64>() - 0.093_75).abs() < 1e-15);
    }

    #[test]
    fn split_polygon_conserves_area() {
        let tri: Polygon<f64> = vec![[0.0, 0.0], [1.0, 0.0], [0.3, 1.0]];
        let (a, b) = split_polygon(&tri, 1, 0.4);
        let total = polygon_area(&a) + polygon_area(&b);
        assert!((total - polygon_area(&tri)).abs() < 1e-15);
    }
}
