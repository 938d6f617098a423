//! Smooth-side period geometry and the global structure checks: the
//! harmonic conjugate matrix, the symplectic form, the holonomy pullback,
//! and the degree-1 winding test.

use crate::error::{Error, Result};
use crate::hodge::{cotangent_weights, period_map};
use crate::mesh::{AngleStructure, TorusTriangulation};
use crate::pattern::{C64, CirclePattern};
use nalgebra::{Matrix2, Vector2};

/// Standard symplectic form on period vectors.
pub fn omega(p: [f64; 2], q: [f64; 2]) -> f64 {
    p[0] * q[1] - p[1] * q[0]
}

/// Action of the harmonic conjugate on the period space of a torus of
/// modulus tau. Squares to -Id, trace 0, det 1, compatible with omega.
pub fn h_tau(tau: C64) -> Result<Matrix2<f64>> {
    if tau.im <= 0.0 {
        return Err(Error::BranchError(tau.im));
    }
    let (re, im) = (tau.re, tau.im);
    Ok(Matrix2::new(re / im, -1.0 / im, tau.norm_sqr() / im, -re / im))
}

pub fn inner_tau(tau: C64, p: [f64; 2], q: [f64; 2]) -> Result<f64> {
    let ht = h_tau(tau)?;
    let hq = ht * Vector2::new(q[0], q[1]);
    Ok(omega(p, [hq[0], hq[1]]))
}

pub fn norm_tau(tau: C64, p: [f64; 2]) -> Result<f64> {
    Ok(inner_tau(tau, p, p)?.sqrt())
}

/// Coefficient and matrix of the pulled-back symplectic form on the stretch
/// parameters, via the holonomy route: the form evaluates to
/// lambda * omega(p, q) with lambda = 2 (1 - det h_X).
pub fn pullback_form(
    mesh: &TorusTriangulation,
    angles: &AngleStructure,
    pattern: &CirclePattern,
) -> Result<(f64, Matrix2<f64>)> {
    if pattern.a == [0.0, 0.0] {
        return Err(Error::EuclideanPoint);
    }
    let w = cotangent_weights(mesh, angles, &pattern.dev);
    let (hx, _) = period_map(mesh, angles, &pattern.cells, &w)?;
    // Cross terms cancel by reciprocity; checked here rather than assumed.
    let p = [1.0, 0.0];
    let q = [0.0, 1.0];
    let hp = hx * Vector2::new(p[0], p[1]);
    let hq = hx * Vector2::new(q[0], q[1]);
    let cross = omega([hp[0], hp[1]], q) + omega(p, [hq[0], hq[1]]);
    if cross.abs() > 1e-10 {
        return Err(Error::CheckFailure(format!("reciprocity residual {}", cross)));
    }
    let lambda = 2.0 * (1.0 - hx.determinant());
    Ok((lambda, Matrix2::new(0.0, lambda, -lambda, 0.0)))
}

/// Modulus of the pattern with holonomy stretches (a1, a2).
pub fn tau_of(
    mesh: &TorusTriangulation,
    angles: &AngleStructure,
    a: [f64; 2],
    tol: f64,
) -> Result<C64> {
    Ok(CirclePattern::solve(mesh, angles, a, tol)?.tau)
}

#[derive(Debug, Clone)]
pub struct WindingResult {
    pub winding: i64,
    pub closure: f64,
    pub max_step: f64,
    pub tau_dagger: C64,
}

/// Degree check of the modulus map: the image of the half-circle
/// (R cos t, R sin t), t in [0, pi] (closed by the sign quotient), winds
/// exactly once around the Euclidean modulus. Both are watched through the
/// disk chart g(z) = (z - i)/(z + i); the winding is accumulated as the
/// continuous argument of g(tau) - g(tau_euclidean) with a step guard.
pub fn winding_check(
    mesh: &TorusTriangulation,
    angles: &AngleStructure,
    r: f64,
    n: usize,
    tol: f64,
) -> Result<WindingResult> {
    if r <= 0.0 || n < 64 {
        return Err(Error::Parse("need R > 0 and n >= 64".into()));
    }
    let g = |z: C64| (z - C64::new(0.0, 1.0)) / (z + C64::new(0.0, 1.0));
    let tau_dagger = tau_of(mesh, angles, [0.0, 0.0], tol)?;
    let center = g(tau_dagger);
    let mut ws = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let t = std::f64::consts::PI * k as f64 / n as f64;
        let a = [r * t.cos(), r * t.sin()];
        ws.push(g(tau_of(mesh, angles, a, tol)?) - center);
    }
    let closure = (ws[n] - ws[0]).norm();
    if closure > 1e-6 {
        return Err(Error::CheckFailure(format!("loop closure {}", closure)));
    }
    let mut total = 0.0;
    let mut max_step = 0.0f64;
    for k in 0..n {
        let ratio = ws[k + 1] / ws[k];
        let step = (ratio - C64::new(1.0, 0.0)).norm();
        max_step = max_step.max(step);
        if step >= 1.0 {
            return Err(Error::UnwrapFailure(step));
        }
        total += ratio.arg();
    }
    let winding = (total / (2.0 * std::f64::consts::PI)).round() as i64;
    Ok(WindingResult { winding, closure, max_step, tau_dagger })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_lattice_torus, uniform_angle_structure};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn omega_values() {
        assert_eq!(omega([1.0, 0.0], [0.0, 1.0]), 1.0);
        assert_eq!(omega([2.0, 3.0], [2.0, 3.0]), 0.0);
        assert_eq!(omega([2.0, 3.0], [5.0, 7.0]), -1.0);
    }

    #[test]
    fn h_tau_explicit() {
        let h = h_tau(C64::new(0.0, 1.0)).unwrap();
        assert_eq!(h, Matrix2::new(0.0, -1.0, 1.0, 0.0));
        let h = h_tau(C64::new(1.0, 1.0)).unwrap();
        assert_eq!(h, Matrix2::new(1.0, -1.0, 2.0, -1.0));
        assert!(h_tau(C64::new(0.3, -0.1)).is_err());
    }

    #[test]
    fn h_tau_identities_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let tau = C64::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.1..10.0));
            let h = h_tau(tau).unwrap();
            let sq = h * h + Matrix2::identity();
            assert!(sq.amax() < 1e-12);
            assert!(h.trace().abs() < 1e-12);
            assert!((h.determinant() - 1.0).abs() < 1e-12);
            let p = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let q = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let hp = h * Vector2::new(p[0], p[1]);
            let hq = h * Vector2::new(q[0], q[1]);
            let compat = (omega([hp[0], hp[1]], [hq[0], hq[1]]) - omega(p, q)).abs();
            assert!(compat < 1e-12);
        }
    }

    #[test]
    fn norm_tau_at_i() {
        let tau = C64::new(0.0, 1.0);
        assert!((norm_tau(tau, [1.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
        let (a, b): (f64, f64) = (0.6, -1.7);
        let want = (a * a + b * b).sqrt();
        assert!((norm_tau(tau, [a, b]).unwrap() - want).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let tau = C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(0.1..5.0));
            let p: [f64; 2] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            if p[0].abs() + p[1].abs() > 1e-3 {
                assert!(inner_tau(tau, p, p).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn pullback_matches_direct_evaluation() {
        let m = build_lattice_torus(4, 4).unwrap();
        let an = uniform_angle_structure(&m, PI / 3.0, PI / 3.0, PI / 3.0).unwrap();
        let pat = CirclePattern::solve(&m, &an, [0.5, 0.2], 1e-12).unwrap();
        let (lambda, mat) = pullback_form(&m, &an, &pat).unwrap();
        assert!(lambda.abs() > 1e-6);
        assert_eq!(mat[(0, 1)], lambda);
        let w = cotangent_weights(&m, &an, &pat.dev);
        let (hx, _) = period_map(&m, &an, &pat.cells, &w).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let p = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let q = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let hp = hx * Vector2::new(p[0], p[1]);
            let hq = hx * Vector2::new(q[0], q[1]);
            let direct = 2.0 * (omega(p, q) - omega([hp[0], hp[1]], [hq[0], hq[1]]));
            assert!((lambda * omega(p, q) - direct).abs() < 1e-10);
        }
    }

    #[test]
    fn pullback_rejects_euclidean_point() {
        let m = build_lattice_torus(4, 4).unwrap();
        let an = uniform_angle_structure(&m, PI / 3.0, PI / 3.0, PI / 3.0).unwrap();
        let pat = CirclePattern::solve(&m, &an, [0.0, 0.0], 1e-12).unwrap();
        assert!(matches!(pullback_form(&m, &an, &pat), Err(Error::EuclideanPoint)));
    }

    #[test]
    fn lambda_symmetry() {
        let m = build_lattice_torus(4, 4).unwrap();
        let an = uniform_angle_structure(&m, PI / 3.0, PI / 3.0, PI / 3.0).unwrap();
        let p1 = CirclePattern::solve(&m, &an, [0.7, -0.4], 1e-12).unwrap();
        let p2 = CirclePattern::solve(&m, &an, [-0.7, 0.4], 1e-12).unwrap();
        let (l1, _) = pullback_form(&m, &an, &p1).unwrap();
        let (l2, _) = pullback_form(&m, &an, &p2).unwrap();
        assert!((l1 - l2).abs() < 1e-9);
    }

    #[test]
    fn tau_symmetry_and_continuity() {
        let m = build_lattice_torus(4, 4).unwrap();
        let an = uniform_angle_structure(&m, PI / 2.0, PI / 4.0, PI / 4.0).unwrap();
        let t1 = tau_of(&m, &an, [0.9, 0.3], 1e-12).unwrap();
        let t2 = tau_of(&m, &an, [-0.9, -0.3], 1e-12).unwrap();
        assert!((t1 - t2).norm() < 1e-9);
        // No jumps along a ray.
        let mut prev = tau_of(&m, &an, [0.1, 0.05], 1e-12).unwrap();
        for k in 1..=20 {
            let s = 0.1 + 0.01 * k as f64;
            let t = tau_of(&m, &an, [s, 0.5 * s], 1e-12).unwrap();
            assert!((t - prev).norm() < 1e-3 * 10.0);
            prev = t;
        }
    }

    #[test]
    fn winding_small_radius() {
        let m = build_lattice_torus(4, 4).unwrap();
        let an = uniform_angle_structure(&m, PI / 3.0, PI / 3.0, PI / 3.0).unwrap();
        let res = winding_check(&m, &an, 2.0, 64, 1e-12).unwrap();
        assert_eq!(res.winding, 1);
        assert!(res.closure < 1e-6);
    }

    #[test]
    fn winding_rejects_sparse_sampling() {
        let m = build_lattice_torus(4, 4).unwrap();
        let an = uniform_angle_structure(&m, PI / 3.0, PI / 3.0, PI / 3.0).unwrap();
        assert!(winding_check(&m, &an, 5.0, 32, 1e-12).is_err());
    }
}
