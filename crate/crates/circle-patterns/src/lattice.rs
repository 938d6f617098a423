//! The closed-form two-parameter family of cross ratio systems on
//! triangular-lattice tori, and the pullback form at its Euclidean point.

use crate::error::{Error, Result};
use crate::mesh::{AngleStructure, TorusTriangulation};
use crate::pattern::{C64, CirclePattern, cross_ratio_residuals};
use crate::penner::{lift_inverse, penner_form, w_residual};
use nalgebra::Matrix2;

/// Classwise cross ratios alpha e^{i theta1} | beta e^{i theta2} |
/// (alpha beta)^{-1} e^{i theta3} on the three lattice edge classes.
pub fn family_cross_ratios(
    mesh: &TorusTriangulation,
    theta: [f64; 3],
    alpha: f64,
    beta: f64,
) -> Result<Vec<C64>> {
    if (theta[0] + theta[1] + theta[2] - std::f64::consts::PI).abs() > 1e-12 {
        return Err(Error::InvalidAngles("class angles must sum to pi".into()));
    }
    if alpha <= 0.0 || beta <= 0.0 {
        return Err(Error::InvalidAngles("alpha and beta must be positive".into()));
    }
    let moduli = [alpha, beta, 1.0 / (alpha * beta)];
    let x: Vec<C64> = mesh
        .edge_class
        .iter()
        .map(|&cls| {
            let i = cls as usize - 1;
            C64::from_polar(moduli[i], theta[i])
        })
        .collect();
    let (rp, rs) = cross_ratio_residuals(mesh, &x);
    if rp > 1e-12 || rs > 1e-12 {
        return Err(Error::CheckFailure(format!(
            "vertex equation residuals {} / {}",
            rp, rs
        )));
    }
    Ok(x)
}

/// The family parameters of the unique Euclidean pattern, read off from the
/// solved pattern at zero stretch. Classwise constancy of |X| is asserted.
pub fn euclidean_point(
    mesh: &TorusTriangulation,
    angles: &AngleStructure,
    tol: f64,
) -> Result<(f64, f64)> {
    let pat = CirclePattern::solve(mesh, angles, [0.0, 0.0], tol)?;
    let mut class_abs = [f64::NAN; 3];
    for e in 0..mesh.n_edges {
        let i = mesh.edge_class[e] as usize - 1;
        let v = pat.x[e].norm();
        if class_abs[i].is_nan() {
            class_abs[i] = v;
        } else if (class_abs[i] - v).abs() > 1e-10 {
            return Err(Error::CheckFailure(format!(
                "|X| not constant on class {}: {} vs {}",
                i + 1,
                class_abs[i],
                v
            )));
        }
    }
    let (alpha, beta) = (class_abs[0], class_abs[1]);
    if (class_abs[2] - 1.0 / (alpha * beta)).abs() > 1e-9 {
        return Err(Error::CheckFailure("class moduli do not multiply to one".into()));
    }
    Ok((alpha, beta))
}

/// Pullback form at the Euclidean point on the (log alpha, log beta)
/// tangents, which are exact classwise-constant shear vectors.
pub fn euclidean_pullback(
    mesh: &TorusTriangulation,
    _angles: &AngleStructure,
) -> Result<(Matrix2<f64>, f64)> {
    let class_vec = |plus: u8, minus: u8| -> Vec<f64> {
        mesh.edge_class
            .iter()
            .map(|&c| {
                if c == plus {
                    1.0
                } else if c == minus {
                    -1.0
                } else {
                    0.0
                }
            })
            .collect()
    };
    let xa = class_vec(1, 3);
    let xb = class_vec(2, 3);
    debug_assert!(w_residual(mesh, &xa) < 1e-12);
    let la = lift_inverse(mesh, &xa)?;
    let lb = lift_inverse(mesh, &xb)?;
    let off = penner_form(mesh, &la, &lb);
    if off.abs() <= 1e-6 {
        return Err(Error::CheckFailure(format!("degenerate pullback {}", off)));
    }
    let mat = Matrix2::new(0.0, off, -off, 0.0);
    Ok((mat, mat.determinant()))
}
