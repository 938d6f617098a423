//! Cotangent weights, discrete harmonic 1-forms, and the period map.
//!
//! Orientation convention, used everywhere: the dual edge of the oriented
//! primal edge i->j points from the right face to the left face, and a dual
//! loop's period gains +eta(h) when it crosses the edge of halfedge h
//! stepping into face(h).

use crate::error::{Error, Result};
use crate::mesh::{AngleStructure, TorusTriangulation};
use crate::pattern::{Cells, Developed};
use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

/// Cotangent weights on the kept (positive-angle) edges.
#[derive(Debug, Clone)]
pub struct EdgeWeights {
    /// NaN on removed zero-angle edges.
    pub c: Vec<f64>,
    pub kept: Vec<bool>,
}

pub fn cotangent_weights(
    mesh: &TorusTriangulation,
    angles: &AngleStructure,
    dev: &Developed,
) -> EdgeWeights {
    let mut c = vec![f64::NAN; mesh.n_edges];
    let mut kept = vec![false; mesh.n_edges];
    for h in 0..mesh.n_halfedges() {
        let e = mesh.he_edge[h];
        if angles.theta[e] == 0.0 || kept[e] {
            continue;
        }
        kept[e] = true;
        let t = mesh.he_twin[h];
        c[e] = 0.5 * (1.0 / dev.alpha[h].tan() + 1.0 / dev.alpha[t].tan());
    }
    EdgeWeights { c, kept }
}

/// Discrete 1-form stored per halfedge, antisymmetric under the twin flip.
#[derive(Debug, Clone)]
pub struct DualOneForm {
    pub eta: Vec<f64>,
    /// Potential on the cells used to make the form co-closed.
    pub potential: Vec<f64>,
}

/// The unique harmonic 1-form with dual-loop periods (p1, p2): a dual-closed
/// seed built from the crossing indices minus the differential of the
/// cell potential solving the 1/c-weighted Laplace equation.
pub fn harmonic_oneform(
    mesh: &TorusTriangulation,
    _angles: &AngleStructure,
    cells: &Cells,
    weights: &EdgeWeights,
    p: [f64; 2],
) -> Result<DualOneForm> {
    let nh = mesh.n_halfedges();
    let nc = cells.n_cells;
    let mut sigma = vec![0.0f64; nh];
    for h in 0..nh {
        if !weights.kept[mesh.he_edge[h]] {
            continue;
        }
        let d = mesh.dstep[mesh.he_twin[h]];
        sigma[h] = p[0] * d[0] as f64 + p[1] * d[1] as f64;
    }
    let mut m = DMatrix::<f64>::zeros(nc + 1, nc + 1);
    let mut rhs = DVector::<f64>::zeros(nc + 1);
    for h in 0..nh {
        let e = mesh.he_edge[h];
        if !weights.kept[e] {
            continue;
        }
        let cf = cells.cell_of_face[mesh.he_face[h]];
        let cg = cells.cell_of_face[mesh.he_face[mesh.he_twin[h]]];
        let w = 1.0 / weights.c[e];
        m[(cf, cf)] += w;
        m[(cf, cg)] -= w;
        rhs[cf] += sigma[h] * w;
    }
    for i in 0..nc {
        m[(nc, i)] = 1.0;
        m[(i, nc)] = 1.0;
    }
    let sol = m.lu().solve(&rhs).ok_or(Error::SingularLaplacian)?;
    let f: Vec<f64> = (0..nc).map(|i| sol[i]).collect();
    let mut eta = vec![0.0f64; nh];
    for h in 0..nh {
        let e = mesh.he_edge[h];
        if !weights.kept[e] {
            continue;
        }
        let cf = cells.cell_of_face[mesh.he_face[h]];
        let cg = cells.cell_of_face[mesh.he_face[mesh.he_twin[h]]];
        eta[h] = sigma[h] - (f[cf] - f[cg]);
    }
    Ok(DualOneForm { eta, potential: f })
}

/// Period of eta along a dual loop given as a cyclic face sequence.
pub fn dual_period(
    mesh: &TorusTriangulation,
    weights: &EdgeWeights,
    eta: &[f64],
    loop_faces: &[usize],
) -> Result<f64> {
    let mut tot = 0.0;
    for &h in &mesh.dual_loop_steps(loop_faces)? {
        if weights.kept[mesh.he_edge[h]] {
            tot += eta[h];
        }
    }
    Ok(tot)
}

/// Period of eta/c along a primal loop given as a halfedge sequence.
pub fn primal_period(
    mesh: &TorusTriangulation,
    weights: &EdgeWeights,
    eta: &[f64],
    loop_hes: &[usize],
) -> Result<f64> {
    let mut tot = 0.0;
    for &h in loop_hes {
        let e = mesh.he_edge[h];
        if !weights.kept[e] {
            return Err(Error::InvalidMesh(format!(
                "primal loop crosses removed edge {}",
                e
            )));
        }
        tot += eta[h] / weights.c[e];
    }
    Ok(tot)
}

/// Maximal closedness residual (vertex sums) and co-closedness residual
/// (1/c-weighted cell sums) of a 1-form.
pub fn harmonicity_residuals(
    mesh: &TorusTriangulation,
    cells: &Cells,
    weights: &EdgeWeights,
    eta: &[f64],
) -> (f64, f64) {
    let mut closed = 0.0f64;
    for orb in mesh.vertex_orbits() {
        let s: f64 = orb
            .iter()
            .filter(|&&h| weights.kept[mesh.he_edge[h]])
            .map(|&h| eta[h])
            .sum();
        closed = closed.max(s.abs());
    }
    let mut cocl = vec![0.0f64; cells.n_cells];
    for h in 0..mesh.n_halfedges() {
        let e = mesh.he_edge[h];
        if !weights.kept[e] {
            continue;
        }
        cocl[cells.cell_of_face[mesh.he_face[h]]] += eta[h] / weights.c[e];
    }
    let coclosed = cocl.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    (closed, coclosed)
}

/// Discrete period map h_X: columns are the primal-loop periods of eta/c
/// for unit dual periods (1,0) and (0,1). The primal loops are traversed
/// against the crossing orientation of the seed, hence the sign flip; this
/// is pinned by b = h_X a matching the derivative of the rotation parts.
pub fn period_map(
    mesh: &TorusTriangulation,
    angles: &AngleStructure,
    cells: &Cells,
    weights: &EdgeWeights,
) -> Result<(Matrix2<f64>, [DualOneForm; 2])> {
    let f1 = harmonic_oneform(mesh, angles, cells, weights, [1.0, 0.0])?;
    let f2 = harmonic_oneform(mesh, angles, cells, weights, [0.0, 1.0])?;
    let b11 = -primal_period(mesh, weights, &f1.eta, &mesh.gamma1_primal)?;
    let b21 = -primal_period(mesh, weights, &f1.eta, &mesh.gamma2_primal)?;
    let b12 = -primal_period(mesh, weights, &f2.eta, &mesh.gamma1_primal)?;
    let b22 = -primal_period(mesh, weights, &f2.eta, &mesh.gamma2_primal)?;
    Ok((Matrix2::new(b11, b12, b21, b22), [f1, f2]))
}

/// Sum of eta^2/c over undirected kept edges.
pub fn dirichlet_energy(mesh: &TorusTriangulation, weights: &EdgeWeights, eta: &[f64]) -> f64 {
    let mut tot = 0.0;
    for h in 0..mesh.n_halfedges() {
        let e = mesh.he_edge[h];
        if weights.kept[e] {
            tot += eta[h] * eta[h] / weights.c[e];
        }
    }
    tot / 2.0
}

/// Discrete energy of the period-(p1,p2) harmonic form against the smooth
/// harmonic energy with the matching primal periods; the margin is the
/// strict excess.
pub fn energy_inequality_check(
    mesh: &TorusTriangulation,
    angles: &AngleStructure,
    cells: &Cells,
    weights: &EdgeWeights,
    hx: &Matrix2<f64>,
    htau: &Matrix2<f64>,
    p: [f64; 2],
) -> Result<(f64, f64, f64)> {
    if p == [0.0, 0.0] {
        return Err(Error::CheckFailure("zero period vector".into()));
    }
    let form = harmonic_oneform(mesh, angles, cells, weights, p)?;
    let lhs = dirichlet_energy(mesh, weights, &form.eta);
    let b = hx * Vector2::new(p[0], p[1]);
    let rhs = crate::moduli::omega([b[0], b[1]], {
        let hb = htau * b;
        [hb[0], hb[1]]
    });
    Ok((lhs, rhs, lhs - rhs))
}
