//! Tangent vectors in shear coordinates, lifts to logarithmic lambda-length
//! derivatives, and the Weil-Petersson form evaluated on them.

use crate::error::{Error, Result};
use crate::hodge::{cotangent_weights, period_map};
use crate::mesh::{AngleStructure, TorusTriangulation};
use crate::pattern::{CirclePattern, cross_ratios, develop, solve_radii};
use nalgebra::{DMatrix, DVector, Vector2};

/// Matrix of the lift map on edge functions: for the edge of halfedge
/// h = i->j with left face (i,j,k) and right face (j,i,l),
/// x_ij = a_ki - a_il + a_lj - a_jk.
pub fn lift_matrix(mesh: &TorusTriangulation) -> DMatrix<f64> {
    let ne = mesh.n_edges;
    let mut m = DMatrix::zeros(ne, ne);
    let mut done = vec![false; ne];
    for h in 0..mesh.n_halfedges() {
        let e = mesh.he_edge[h];
        if done[e] {
            continue;
        }
        done[e] = true;
        let t = mesh.he_twin[h];
        let e_jk = mesh.he_edge[mesh.he_next[h]];
        let e_ki = mesh.he_edge[mesh.he_next[mesh.he_next[h]]];
        let e_il = mesh.he_edge[mesh.he_next[t]];
        let e_lj = mesh.he_edge[mesh.he_next[mesh.he_next[t]]];
        m[(e, e_ki)] += 1.0;
        m[(e, e_il)] -= 1.0;
        m[(e, e_lj)] += 1.0;
        m[(e, e_jk)] -= 1.0;
    }
    m
}

pub fn lift_map_h(mesh: &TorusTriangulation, a: &[f64]) -> Vec<f64> {
    let m = lift_matrix(mesh);
    let x = &m * DVector::from_column_slice(a);
    x.as_slice().to_vec()
}

/// Vertex-sum residual deciding membership in the shear tangent space.
pub fn w_residual(mesh: &TorusTriangulation, x: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for orb in mesh.vertex_orbits() {
        let s: f64 = orb.iter().map(|&h| x[mesh.he_edge[h]]).sum();
        worst = worst.max(s.abs());
    }
    worst
}

/// Minimum-norm lift a with h(a) = x, via the pseudoinverse. The form below
/// is invariant under the choice of lift, which is the real guarantee.
pub fn lift_inverse(mesh: &TorusTriangulation, x: &[f64]) -> Result<Vec<f64>> {
    let res = w_residual(mesh, x);
    if res > 1e-9 {
        return Err(Error::NotInW(res));
    }
    let m = lift_matrix(mesh);
    let pinv = m
        .svd(true, true)
        .pseudo_inverse(1e-10)
        .map_err(|e| Error::CheckFailure(e.to_string()))?;
    let a = pinv * DVector::from_column_slice(x);
    let check = (&lift_matrix(mesh) * &a - DVector::from_column_slice(x)).amax();
    if check > 1e-9 {
        return Err(Error::NotInW(check));
    }
    Ok(a.as_slice().to_vec())
}

/// The decorated Weil-Petersson form on lambda-length tangents:
/// -2 sum over faces (i,j,k) of a_ij (b_jk - b_ki) + cyclic.
pub fn penner_form(mesh: &TorusTriangulation, a: &[f64], b: &[f64]) -> f64 {
    let mut tot = 0.0;
    for f in 0..mesh.n_faces {
        let e_ij = mesh.he_edge[3 * f];
        let e_jk = mesh.he_edge[3 * f + 1];
        let e_ki = mesh.he_edge[3 * f + 2];
        tot += a[e_ij] * (b[e_jk] - b[e_ki])
            + a[e_jk] * (b[e_ki] - b[e_ij])
            + a[e_ki] * (b[e_ij] - b[e_jk]);
    }
    -2.0 * tot
}

fn log_abs_x(
    mesh: &TorusTriangulation,
    angles: &AngleStructure,
    a: [f64; 2],
    tol: f64,
) -> Result<Vec<f64>> {
    let (u, _) = solve_radii(mesh, angles, a, tol)?;
    let dev = develop(mesh, angles, &u, a)?;
    let x = cross_ratios(mesh, &dev)?;
    Ok(x.iter().map(|z| z.norm().ln()).collect())
}

/// Central difference of log |X| along a direction in the stretch plane.
pub fn shear_tangent_fd(
    mesh: &TorusTriangulation,
    angles: &AngleStructure,
    a: [f64; 2],
    dir: [f64; 2],
    step: f64,
) -> Result<Vec<f64>> {
    let ap = [a[0] + step * dir[0], a[1] + step * dir[1]];
    let am = [a[0] - step * dir[0], a[1] - step * dir[1]];
    let lp = log_abs_x(mesh, angles, ap, 1e-13)?;
    let lm = log_abs_x(mesh, angles, am, 1e-13)?;
    let x: Vec<f64> = lp.iter().zip(&lm).map(|(p, m)| (p - m) / (2.0 * step)).collect();
    let res = w_residual(mesh, &x);
    if res > 10.0 * step * step {
        return Err(Error::NotInW(res));
    }
    Ok(x)
}

#[derive(Debug, Clone)]
pub struct Crosscheck {
    pub via_penner: f64,
    pub via_holonomy: f64,
    pub relerr: f64,
}

/// The pullback evaluated two ways: through lifted finite-difference shear
/// tangents, and through the period-map determinant.
pub fn crosscheck_pullback(
    mesh: &TorusTriangulation,
    angles: &AngleStructure,
    pattern: &CirclePattern,
    dirs: ([f64; 2], [f64; 2]),
    step: f64,
) -> Result<Crosscheck> {
    if pattern.a == [0.0, 0.0] {
        return Err(Error::EuclideanPoint);
    }
    let x1 = shear_tangent_fd(mesh, angles, pattern.a, dirs.0, step)?;
    let x2 = shear_tangent_fd(mesh, angles, pattern.a, dirs.1, step)?;
    let a1 = lift_inverse(mesh, &x1)?;
    let a2 = lift_inverse(mesh, &x2)?;
    let via_penner = 2.0 * penner_form(mesh, &a1, &a2);
    let w = cotangent_weights(mesh, angles, &pattern.dev);
    let (hx, _) = period_map(mesh, angles, &pattern.cells, &w)?;
    let via_holonomy =
        2.0 * (1.0 - hx.determinant()) * crate::moduli::omega(dirs.0, dirs.1);
    let denom = via_holonomy.abs().max(1e-300);
    let relerr = if via_holonomy == 0.0 && via_penner.abs() < 1e-9 {
        0.0
    } else {
        (via_penner - via_holonomy).abs() / denom
    };
    Ok(Crosscheck { via_penner, via_holonomy, relerr })
}

/// Finite-difference derivative of the rotation parts against the period
/// map's prediction.
pub fn predicted_b_derivative_check(
    mesh: &TorusTriangulation,
    angles: &AngleStructure,
    pattern: &CirclePattern,
    p: [f64; 2],
    step: f64,
) -> Result<f64> {
    if pattern.a == [0.0, 0.0] {
        return Err(Error::EuclideanPoint);
    }
    let w = cotangent_weights(mesh, angles, &pattern.dev);
    let (hx, _) = period_map(mesh, angles, &pattern.cells, &w)?;
    let predicted = hx * Vector2::new(p[0], p[1]);
    let b_at = |a: [f64; 2]| -> Result<[f64; 2]> {
        let (u, _) = solve_radii(mesh, angles, a, 1e-13)?;
        Ok(develop(mesh, angles, &u, a)?.b)
    };
    let bp = b_at([pattern.a[0] + step * p[0], pattern.a[1] + step * p[1]])?;
    let bm = b_at([pattern.a[0] - step * p[0], pattern.a[1] - step * p[1]])?;
    let fd = [(bp[0] - bm[0]) / (2.0 * step), (bp[1] - bm[1]) / (2.0 * step)];
    let num = ((fd[0] - predicted[0]).powi(2) + (fd[1] - predicted[1]).powi(2)).sqrt();
    let den = (predicted[0].powi(2) + predicted[1].powi(2)).sqrt().max(1e-300);
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_lattice_torus, uniform_angle_structure};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn setup() -> (TorusTriangulation, AngleStructure) {
        let m = build_lattice_torus(4, 4).unwrap();
        let a = uniform_angle_structure(&m, PI / 3.0, PI / 3.0, PI / 3.0).unwrap();
        (m, a)
    }

    #[test]
    fn lift_of_constants_vanishes() {
        let (m, _) = setup();
        let a = vec![3.7; m.n_edges];
        let x = lift_map_h(&m, &a);
        assert!(x.iter().all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn lift_locality() {
        let (m, _) = setup();
        let mut a = vec![0.0; m.n_edges];
        a[5] = 1.0;
        let x = lift_map_h(&m, &a);
        let nonzero = x.iter().filter(|&&v| v.abs() > 1e-12).count();
        assert!(nonzero >= 1 && nonzero <= 4, "{} edges affected", nonzero);
    }

    #[test]
    fn lift_range_in_w() {
        let (m, _) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a: Vec<f64> = (0..m.n_edges).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = lift_map_h(&m, &a);
        assert!(w_residual(&m, &x) < 1e-12);
    }

    #[test]
    fn lift_inverse_round_trip() {
        let (m, _) = setup();
        let zero = vec![0.0; m.n_edges];
        let a0 = lift_inverse(&m, &zero).unwrap();
        assert!(a0.iter().all(|&v| v.abs() < 1e-12));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a: Vec<f64> = (0..m.n_edges).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = lift_map_h(&m, &a);
        let a2 = lift_inverse(&m, &x).unwrap();
        let x2 = lift_map_h(&m, &a2);
        for e in 0..m.n_edges {
            assert!((x[e] - x2[e]).abs() < 1e-10);
        }
    }

    #[test]
    fn lift_inverse_rejects_non_w() {
        let (m, _) = setup();
        let mut x = vec![0.0; m.n_edges];
        x[0] = 1.0;
        assert!(matches!(lift_inverse(&m, &x), Err(Error::NotInW(_))));
    }

    #[test]
    fn penner_form_antisymmetry() {
        let (m, _) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a: Vec<f64> = (0..m.n_edges).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..m.n_edges).map(|_| rng.gen_range(-1.0..1.0)).collect();
        assert!(penner_form(&m, &a, &a).abs() < 1e-12);
        assert!((penner_form(&m, &a, &b) + penner_form(&m, &b, &a)).abs() < 1e-12);
    }

    #[test]
    fn penner_form_cyclic_invariance() {
        // Rotating each face's stored corner triple must not change the
        // value; rebuild the sum with shifted corner indexing.
        let (m, _) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a: Vec<f64> = (0..m.n_edges).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..m.n_edges).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut tot = 0.0;
        for f in 0..m.n_faces {
            let e_ij = m.he_edge[3 * f + 1];
            let e_jk = m.he_edge[3 * f + 2];
            let e_ki = m.he_edge[3 * f];
            tot += a[e_ij] * (b[e_jk] - b[e_ki])
                + a[e_jk] * (b[e_ki] - b[e_ij])
                + a[e_ki] * (b[e_ij] - b[e_jk]);
        }
        assert!((-2.0 * tot - penner_form(&m, &a, &b)).abs() < 1e-12);
    }

    #[test]
    fn lift_independence_of_form() {
        let (m, an) = setup();
        let pat = CirclePattern::solve(&m, &an, [0.5, 0.2], 1e-12).unwrap();
        let x1 = shear_tangent_fd(&m, &an, pat.a, [1.0, 0.0], 1e-4).unwrap();
        let x2 = shear_tangent_fd(&m, &an, pat.a, [0.0, 1.0], 1e-4).unwrap();
        let a1 = lift_inverse(&m, &x1).unwrap();
        let a2 = lift_inverse(&m, &x2).unwrap();
        let base = penner_form(&m, &a1, &a2);
        // Perturb by a kernel element of the lift map.
        let h = lift_matrix(&m);
        let pinv = h.clone().svd(true, true).pseudo_inverse(1e-10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let r = DVector::from_iterator(m.n_edges, (0..m.n_edges).map(|_| rng.gen_range(-1.0..1.0)));
        let kern = &r - &pinv * (&h * &r);
        assert!((&h * &kern).amax() < 1e-10);
        let a1k: Vec<f64> = a1.iter().zip(kern.iter()).map(|(v, k)| v + k).collect();
        assert!((penner_form(&m, &a1k, &a2) - base).abs() < 1e-10);
    }

    #[test]
    fn fd_tangent_zero_direction() {
        let (m, an) = setup();
        let x = shear_tangent_fd(&m, &an, [0.5, 0.2], [0.0, 0.0], 1e-4).unwrap();
        assert!(x.iter().all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn fd_tangent_vertex_sums() {
        let (m, an) = setup();
        let x = shear_tangent_fd(&m, &an, [0.0, 0.0], [1.0, 0.0], 1e-4).unwrap();
        assert!(w_residual(&m, &x) < 1e-7);
    }

    #[test]
    fn fd_richardson_second_order() {
        let (m, an) = setup();
        let xh = shear_tangent_fd(&m, &an, [0.5, 0.2], [1.0, 0.0], 2e-4).unwrap();
        let xh2 = shear_tangent_fd(&m, &an, [0.5, 0.2], [1.0, 0.0], 1e-4).unwrap();
        // Richardson limit as the reference; coarse/fine error ratio ~ 4.
        let mut ratios = Vec::new();
        for e in 0..m.n_edges {
            let exact = (4.0 * xh2[e] - xh[e]) / 3.0;
            let den = (xh2[e] - exact).abs();
            if den > 1e-12 {
                ratios.push((xh[e] - exact).abs() / den);
            }
        }
        assert!(!ratios.is_empty());
        for r in ratios {
            assert!(r > 3.5 && r < 4.5, "ratio {}", r);
        }
    }

    #[test]
    fn crosscheck_agreement() {
        let (m, an) = setup();
        let pat = CirclePattern::solve(&m, &an, [0.5, 0.2], 1e-12).unwrap();
        let res = crosscheck_pullback(&m, &an, &pat, ([1.0, 0.0], [0.0, 1.0]), 1e-4).unwrap();
        assert!(res.relerr <= 1e-4, "relerr {}", res.relerr);
        let same = crosscheck_pullback(&m, &an, &pat, ([1.0, 0.0], [1.0, 0.0]), 1e-4).unwrap();
        assert!(same.via_penner.abs() < 1e-9 && same.via_holonomy == 0.0);
        let swapped = crosscheck_pullback(&m, &an, &pat, ([0.0, 1.0], [1.0, 0.0]), 1e-4).unwrap();
        assert!((swapped.via_penner + res.via_penner).abs() < 1e-8);
        assert_eq!(swapped.via_holonomy, -res.via_holonomy);
    }

    #[test]
    fn b_derivative_prediction() {
        let (m, an) = setup();
        let pat = CirclePattern::solve(&m, &an, [0.5, 0.2], 1e-12).unwrap();
        for p in [[1.0, 0.0], [0.0, 1.0]] {
            let relerr = predicted_b_derivative_check(&m, &an, &pat, p, 1e-4).unwrap();
            assert!(relerr <= 1e-3, "relerr {}", relerr);
        }
    }
}
