//! Deterministic low-discrepancy samples for the sampled estimators
//! (local Lipschitz constants, ball maxima, sphere maxima).

use crate::State;
#[allow(unused_imports)]
use num_traits::Float;

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Radical inverse of `index` in `base`.
fn radical_inverse(mut index: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut out = 0.0;
    while index > 0 {
        out += (index % b) as f64 * scale;
        index /= b;
        scale *= inv;
    }
    out
}

/// Point `index` of the Halton sequence in `[0, 1)^dim`.
///
/// Dimensions beyond the prime table reuse bases with a scrambled index.
pub fn halton(index: u64, dim: usize) -> State {
    State::from_iterator(
        dim,
        (0..dim).map(|d| {
            let base = PRIMES[d % PRIMES.len()];
            let idx = index + 1 + (d / PRIMES.len()) as u64 * 7919;
            radical_inverse(idx, base)
        }),
    )
}

/// `count` points in the closed ball of radius `radius` around `center`.
///
/// Points are Halton samples of the enclosing cube mapped radially so that
/// each lands inside the ball.
pub fn ball_points(center: &State, radius: f64, count: usize) -> impl Iterator<Item = State> + '_ {
    let dim = center.len();
    (0..count as u64).map(move |k| {
        let u = halton(k, dim).map(|v| 2.0 * v - 1.0);
        let inf = u.amax();
        let two = u.norm();
        // Map the cube onto the ball: keep the direction, use the sup norm
        // as the radial coordinate.
        let scaled = if two > 0.0 { u * (inf / two) } else { u };
        center + scaled * radius
    })
}

/// `count` points on the sphere of radius `radius` centered at the origin.
pub fn sphere_points(dim: usize, radius: f64, count: usize) -> impl Iterator<Item = State> {
    (0..count as u64).filter_map(move |k| {
        if dim == 1 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            return Some(State::from_element(1, sign * radius));
        }
        // Box-Muller on Halton pairs gives an isotropic direction.
        let u = halton(k, 2 * dim);
        let mut g = State::zeros(dim);
        for i in 0..dim {
            let u1 = u[2 * i].max(1e-12);
            let u2 = u[2 * i + 1];
            g[i] = (-2.0 * u1.ln()).sqrt() * (core::f64::consts::TAU * u2).cos();
        }
        let n = g.norm();
        (n > 0.0).then(|| g * (radius / n))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halton_first_points() {
        let p = halton(0, 2);
        assert_eq!(p[0], 0.5);
        assert!((p[1] - 1.0 / 3.0).abs() < 1e-15);
        let p = halton(1, 1);
        assert_eq!(p[0], 0.25);
    }

    #[test]
    fn ball_points_stay_inside() {
        let c = State::from_vec(alloc::vec![1.0, -2.0, 0.5]);
        for p in ball_points(&c, 0.3, 200) {
            assert!((p - &c).norm() <= 0.3 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn sphere_points_on_sphere() {
        for p in sphere_points(3, 2.0, 50) {
            assert!((p.norm() - 2.0).abs() < 1e-12);
        }
        let pts: alloc::vec::Vec<_> = sphere_points(1, 1.5, 4).collect();
        assert_eq!(pts.len(), 4);
        assert_eq!(pts[1][0], -1.5);
    }
}
