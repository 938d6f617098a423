//! Circumradius solver and developing map.
//!
//! Radii are parametrized by log circumradius per face. Crossing a cut with
//! index (m, n) multiplies the circumradius by e^{m A1 + n A2}; on the
//! quotient this enters through the per-halfedge shift dstep . A.

use crate::error::{Error, Result};
use crate::mesh::{AngleStructure, TorusTriangulation};
use nalgebra::{Complex, DMatrix, DVector};

pub type C64 = Complex<f64>;

/// Half of the central angle subtended in the circumcircle of the central
/// face by the chord shared with a neighbor at log-radius difference du and
/// intersection angle theta. Strictly decreasing in du; pairs across an
/// edge to pi - theta.
pub fn face_half_angle(du: f64, theta: f64) -> f64 {
    if theta == 0.0 {
        return 0.0;
    }
    theta.sin().atan2(du.exp() - theta.cos())
}

/// d/d(du) of `face_half_angle`.
pub fn face_half_angle_d(du: f64, theta: f64) -> f64 {
    if theta == 0.0 {
        return 0.0;
    }
    let e = du.exp();
    let (s, c) = theta.sin_cos();
    -s * e / ((e - c) * (e - c) + s * s)
}

/// Faces merged across zero-angle edges into cells sharing one radius
/// variable. Zero-angle edges force equal circumcircles, so they are exact
/// identifications rather than numerical limits.
#[derive(Debug, Clone)]
pub struct Cells {
    pub cell_of_face: Vec<usize>,
    pub n_cells: usize,
    /// Member faces per cell.
    pub faces_in: Vec<usize>,
    /// Removed (zero-angle) edges interior to each cell.
    pub internal_removed: Vec<usize>,
    pub removed_edges: Vec<usize>,
}

impl Cells {
    pub fn new(mesh: &TorusTriangulation, angles: &AngleStructure) -> Result<Self> {
        let nf = mesh.n_faces;
        let mut parent: Vec<usize> = (0..nf).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut removed_edges = Vec::new();
        let mut seen = vec![false; mesh.n_edges];
        for h in 0..mesh.n_halfedges() {
            let e = mesh.he_edge[h];
            if seen[e] {
                continue;
            }
            seen[e] = true;
            if angles.theta[e] == 0.0 {
                if mesh.dstep[h] != [0, 0] {
                    return Err(Error::InconsistentZeroAngle(e));
                }
                removed_edges.push(e);
                let a = find(&mut parent, mesh.he_face[h]);
                let b = find(&mut parent, mesh.he_face[mesh.he_twin[h]]);
                if a != b {
                    parent[a] = b;
                }
            }
        }
        let roots: Vec<usize> = (0..nf).map(|f| find(&mut parent, f)).collect();
        let mut ids: Vec<usize> = roots.clone();
        ids.sort_unstable();
        ids.dedup();
        let remap = |r: usize| ids.binary_search(&r).unwrap();
        let cell_of_face: Vec<usize> = roots.iter().map(|&r| remap(r)).collect();
        let n_cells = ids.len();
        let mut faces_in = vec![0usize; n_cells];
        for f in 0..nf {
            faces_in[cell_of_face[f]] += 1;
        }
        let mut internal_removed = vec![0usize; n_cells];
        for &e in &removed_edges {
            let h = (0..mesh.n_halfedges()).find(|&h| mesh.he_edge[h] == e).unwrap();
            let c = cell_of_face[mesh.he_face[h]];
            debug_assert_eq!(c, cell_of_face[mesh.he_face[mesh.he_twin[h]]]);
            internal_removed[c] += 1;
        }
        Ok(Cells { cell_of_face, n_cells, faces_in, internal_removed, removed_edges })
    }
}

fn dot2(d: [i64; 2], a: [f64; 2]) -> f64 {
    d[0] as f64 * a[0] + d[1] as f64 * a[1]
}

fn residual(
    mesh: &TorusTriangulation,
    angles: &AngleStructure,
    cells: &Cells,
    a: [f64; 2],
    uc: &DVector<f64>,
) -> DVector<f64> {
    let mut r = DVector::from_iterator(
        cells.n_cells,
        (0..cells.n_cells)
            .map(|c| -std::f64::consts::PI * (cells.faces_in[c] - cells.internal_removed[c]) as f64),
    );
    for h in 0..mesh.n_halfedges() {
        let e = mesh.he_edge[h];
        if angles.theta[e] == 0.0 {
            continue;
        }
        let cf = cells.cell_of_face[mesh.he_face[h]];
        let cg = cells.cell_of_face[mesh.he_face[mesh.he_twin[h]]];
        let du = uc[cf] - uc[cg] - dot2(mesh.dstep[h], a);
        r[cf] += face_half_angle(du, angles.theta[e]);
    }
    r
}

/// Solves the angle-sum system by damped Newton: every cell's half-angles
/// around its removed-edge-reduced boundary sum to pi per member face. The
/// Jacobian is symmetric negative semidefinite with constant kernel; the
/// gauge is fixed by a bordered row/column enforcing sum u = 0.
pub fn solve_radii(
    mesh: &TorusTriangulation,
    angles: &AngleStructure,
    a: [f64; 2],
    tol: f64,
) -> Result<(Vec<f64>, Cells)> {
    solve_radii_from(mesh, angles, a, tol, None)
}

pub fn solve_radii_from(
    mesh: &TorusTriangulation,
    angles: &AngleStructure,
    a: [f64; 2],
    tol: f64,
    u0: Option<&[f64]>,
) -> Result<(Vec<f64>, Cells)> {
    if tol <= 0.0 {
        return Err(Error::InvalidAngles("tolerance must be positive".into()));
    }
    let cells = Cells::new(mesh, angles)?;
    let nc = cells.n_cells;
    let mut uc = DVector::zeros(nc);
    if let Some(u0) = u0 {
        for f in 0..mesh.n_faces {
            uc[cells.cell_of_face[f]] = u0[f];
        }
    }
    let max_iter = 100;
    let mut r = residual(mesh, angles, &cells, a, &uc);
    let mut iters = 0;
    while r.amax() > tol {
        if iters >= max_iter {
            return Err(Error::NonConvergence { residual: r.amax(), iters });
        }
        iters += 1;
        let mut m = DMatrix::zeros(nc + 1, nc + 1);
        for h in 0..mesh.n_halfedges() {
            let e = mesh.he_edge[h];
            if angles.theta[e] == 0.0 {
                continue;
            }
            let cf = cells.cell_of_face[mesh.he_face[h]];
            let cg = cells.cell_of_face[mesh.he_face[mesh.he_twin[h]]];
            let du = uc[cf] - uc[cg] - dot2(mesh.dstep[h], a);
            let d = face_half_angle_d(du, angles.theta[e]);
            m[(cf, cf)] += d;
            m[(cf, cg)] -= d;
        }
        for i in 0..nc {
            m[(nc, i)] = 1.0;
            m[(i, nc)] = 1.0;
        }
        let mut rhs = DVector::zeros(nc + 1);
        for i in 0..nc {
            rhs[i] = -r[i];
        }
        let step = m
            .lu()
            .solve(&rhs)
            .ok_or(Error::SingularLaplacian)?
            .rows(0, nc)
            .into_owned();
        let base = r.norm();
        let mut t = 1.0;
        loop {
            let mut un = &uc + t * &step;
            let mean = un.mean();
            un.add_scalar_mut(-mean);
            let rn = residual(mesh, angles, &cells, a, &un);
            if rn.norm() < base || t < 1e-12 {
                uc = un;
                r = rn;
                break;
            }
            t *= 0.5;
        }
    }
    // Expand to faces, with the gauge sum over faces (not cells) zero.
    let mut u: Vec<f64> = (0..mesh.n_faces).map(|f| uc[cells.cell_of_face[f]]).collect();
    let mean = u.iter().sum::<f64>() / u.len() as f64;
    for x in &mut u {
        *x -= mean;
    }
    Ok((u, cells))
}

pub fn max_face_defect(
    mesh: &TorusTriangulation,
    angles: &AngleStructure,
    cells: &Cells,
    a: [f64; 2],
    u: &[f64],
) -> f64 {
    let uc = DVector::from_iterator(
        cells.n_cells,
        (0..cells.n_cells).map(|c| {
            let f = (0..mesh.n_faces).find(|&f| cells.cell_of_face[f] == c).unwrap();
            u[f]
        }),
    );
    residual(mesh, angles, cells, a, &uc).amax()
}

/// Corner angle per halfedge h: the angle of face(h) at the vertex opposite
/// the chord of h, equal to the half central angle of that chord. Zero-angle
/// chords get the value forced by the triangle angle sum.
pub fn corner_angles(
    mesh: &TorusTriangulation,
    angles: &AngleStructure,
    u: &[f64],
    a: [f64; 2],
) -> Result<Vec<f64>> {
    let nh = mesh.n_halfedges();
    let mut al = vec![f64::NAN; nh];
    for h in 0..nh {
        let e = mesh.he_edge[h];
        if angles.theta[e] == 0.0 {
            continue;
        }
        let f = mesh.he_face[h];
        let g = mesh.he_face[mesh.he_twin[h]];
        let du = u[f] - u[g] - dot2(mesh.dstep[h], a);
        al[h] = face_half_angle(du, angles.theta[e]);
    }
    for f in 0..mesh.n_faces {
        let hs = [3 * f, 3 * f + 1, 3 * f + 2];
        let nans: Vec<usize> = hs.iter().cloned().filter(|&h| al[h].is_nan()).collect();
        match nans.len() {
            0 => {}
            1 => {
                let s: f64 = hs.iter().filter(|&&h| !al[h].is_nan()).map(|&h| al[h]).sum();
                al[nans[0]] = std::f64::consts::PI - s;
            }
            _ => {
                return Err(Error::DegenerateLayout(format!(
                    "face {} has two zero-angle edges",
                    f
                )))
            }
        }
    }
    Ok(al)
}

/// Developed pattern: one planar lift per quotient face plus the deck data
/// needed to reach every other lift.
#[derive(Debug, Clone)]
pub struct Developed {
    /// Corner positions per face, indexed like the face's vertex triple.
    pub corners: Vec<[C64; 3]>,
    pub centers: Vec<C64>,
    pub radii: Vec<f64>,
    /// Deck offset of the stored lift of each face relative to the base.
    pub offsets: Vec<[i64; 2]>,
    /// Corner angles per halfedge (see `corner_angles`).
    pub alpha: Vec<f64>,
    /// Affine holonomy z -> a z + b along the two dual generator loops.
    pub rho: [(C64, C64); 2],
    /// Continuously tracked rotation parts of the holonomy logarithm.
    pub b: [f64; 2],
}

fn place_neighbor(
    mesh: &TorusTriangulation,
    al: &[f64],
    corners_f: &[C64; 3],
    h: usize,
) -> Result<([C64; 3], C64, f64)> {
    let t = mesh.he_twin[h];
    let g = mesh.he_face[t];
    let (c, ct) = (h % 3, t % 3);
    let zi = corners_f[c];
    let zj = corners_f[(c + 1) % 3];
    // Face g is (j, i, l) starting at corner ct. Corner angle at a corner k
    // of g is al[3g + (k+1)%3], the half angle of the opposite chord.
    let beta_j = al[3 * g + (ct + 1) % 3];
    let beta_i = al[3 * g + (ct + 2) % 3];
    let beta_l = al[3 * g + ct];
    let chord = zj - zi;
    let lij = chord.norm();
    if lij < 1e-300 || beta_l.sin().abs() < 1e-300 {
        return Err(Error::DegenerateLayout(format!("chord of halfedge {} underflows", h)));
    }
    let lil = lij * beta_j.sin() / beta_l.sin();
    let zl = zi + chord * C64::from_polar(lil / lij, -beta_i);
    let rg = lij / (2.0 * beta_l.sin());
    let mid = 0.5 * (zi + zj);
    let n = C64::new(0.0, 1.0) * chord / lij;
    let cg = mid - rg * beta_l.cos() * n;
    let mut zg = [C64::new(0.0, 0.0); 3];
    zg[ct] = zj;
    zg[(ct + 1) % 3] = zi;
    zg[(ct + 2) % 3] = zl;
    Ok((zg, cg, rg))
}

/// Lays out the faces over a breadth-first dual spanning tree from face 0.
/// Base face: circumcenter 0, radius 1, corner 0 on the positive real axis.
/// `reverse_scan` flips the neighbor scan order, giving a different
/// spanning tree for path-independence tests.
pub fn develop_with(
    mesh: &TorusTriangulation,
    angles: &AngleStructure,
    u: &[f64],
    a: [f64; 2],
    reverse_scan: bool,
) -> Result<Developed> {
    let al = corner_angles(mesh, angles, u, a)?;
    let nf = mesh.n_faces;
    let mut corners = vec![[C64::new(0.0, 0.0); 3]; nf];
    let mut centers = vec![C64::new(0.0, 0.0); nf];
    let mut radii = vec![0.0f64; nf];
    let mut offsets = vec![[0i64; 2]; nf];
    let f0 = 0usize;
    let a01 = 2.0 * al[3 * f0];
    let a12 = 2.0 * al[3 * f0 + 1];
    corners[f0] = [
        C64::from_polar(1.0, 0.0),
        C64::from_polar(1.0, a01),
        C64::from_polar(1.0, a01 + a12),
    ];
    radii[f0] = 1.0;
    let mut done = vec![false; nf];
    done[f0] = true;
    let mut queue = std::collections::VecDeque::from([f0]);
    while let Some(f) = queue.pop_front() {
        let scan: [usize; 3] = if reverse_scan { [2, 1, 0] } else { [0, 1, 2] };
        for c in scan {
            let h = 3 * f + c;
            let g = mesh.he_face[mesh.he_twin[h]];
            if done[g] {
                continue;
            }
            let (zg, cg, rg) = place_neighbor(mesh, &al, &corners[f], h)?;
            corners[g] = zg;
            centers[g] = cg;
            radii[g] = rg;
            offsets[g] = [
                offsets[f][0] + mesh.dstep[h][0],
                offsets[f][1] + mesh.dstep[h][1],
            ];
            done[g] = true;
            queue.push_back(g);
        }
    }

    // Holonomy along a dual loop: re-lay the strip starting from the stored
    // lift of its first face and compose. The recorded path alternates face
    // barycenters with crossed chord midpoints; every segment stays inside
    // a developed triangle.
    let walk = |loop_faces: &[usize]| -> Result<(C64, C64, Vec<C64>)> {
        let n = loop_faces.len();
        let f1 = loop_faces[0];
        let mut cur = corners[f1];
        let bary = |z: &[C64; 3]| (z[0] + z[1] + z[2]) / 3.0;
        let mut path = vec![bary(&cur)];
        for k in 0..n {
            let fk = loop_faces[k];
            let fnx = loop_faces[(k + 1) % n];
            let h = (0..3)
                .map(|c| 3 * fk + c)
                .find(|&h| mesh.he_face[mesh.he_twin[h]] == fnx)
                .ok_or_else(|| Error::InvalidMesh(format!("faces {} and {} not adjacent", fk, fnx)))?;
            let c = h % 3;
            let (zg, _, _) = place_neighbor(mesh, &al, &corners[fk], h)?;
            // Similarity taking the stored lift of fk to the current one.
            let s = (cur[1] - cur[0]) / (corners[fk][1] - corners[fk][0]);
            let t0 = cur[0] - s * corners[fk][0];
            path.push(0.5 * (cur[c] + cur[(c + 1) % 3]));
            let mut next = [C64::new(0.0, 0.0); 3];
            for (i, z) in zg.iter().enumerate() {
                next[i] = s * z + t0;
            }
            path.push(bary(&next));
            cur = next;
        }
        let s = (cur[1] - cur[0]) / (corners[f1][1] - corners[f1][0]);
        let t0 = cur[0] - s * corners[f1][0];
        Ok((s, t0, path))
    };
    let (a1, b1, path1) = walk(&mesh.gamma1_dual)?;
    let (a2, b2, path2) = walk(&mesh.gamma2_dual)?;

    let b = if a == [0.0, 0.0] {
        [0.0, 0.0]
    } else {
        // Rotation part of log rho_r: winding of the walked strip around
        // the common fixed point of the holonomy.
        let (aa, bb) = if a[0].abs() >= a[1].abs() { (a1, b1) } else { (a2, b2) };
        let zeta = bb / (C64::new(1.0, 0.0) - aa);
        let wind = |path: &[C64]| -> f64 {
            let mut tot = 0.0;
            for k in 0..path.len() - 1 {
                tot += ((path[k + 1] - zeta) / (path[k] - zeta)).arg();
            }
            tot
        };
        [wind(&path1), wind(&path2)]
    };

    Ok(Developed {
        corners,
        centers,
        radii,
        offsets,
        alpha: al,
        rho: [(a1, b1), (a2, b2)],
        b,
    })
}

pub fn develop(
    mesh: &TorusTriangulation,
    angles: &AngleStructure,
    u: &[f64],
    a: [f64; 2],
) -> Result<Developed> {
    develop_with(mesh, angles, u, a, false)
}

/// Composition rho1^m rho2^n of the affine holonomy generators.
pub fn rho_pow(rho: &[(C64, C64); 2], m: i64, n: i64) -> (C64, C64) {
    let mul = |p: (C64, C64), q: (C64, C64)| (p.0 * q.0, p.0 * q.1 + p.1);
    let inv = |p: (C64, C64)| (C64::new(1.0, 0.0) / p.0, -p.1 / p.0);
    let mut r = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
    let one = if m >= 0 { rho[0] } else { inv(rho[0]) };
    for _ in 0..m.abs() {
        r = mul(r, one);
    }
    let two = if n >= 0 { rho[1] } else { inv(rho[1]) };
    for _ in 0..n.abs() {
        r = mul(r, two);
    }
    r
}

/// Cross ratio per edge: X_ij = -(z_k - z_i)(z_l - z_j) /
/// ((z_i - z_l)(z_j - z_k)) with the opposite vertex of the neighboring
/// lift mapped through the deck transformation matching the stored lifts.
pub fn cross_ratios(mesh: &TorusTriangulation, dev: &Developed) -> Result<Vec<C64>> {
    let mut x = vec![C64::new(0.0, 0.0); mesh.n_edges];
    let mut filled = vec![false; mesh.n_edges];
    for h in 0..mesh.n_halfedges() {
        let e = mesh.he_edge[h];
        if filled[e] {
            continue;
        }
        filled[e] = true;
        let f = mesh.he_face[h];
        let t = mesh.he_twin[h];
        let g = mesh.he_face[t];
        let (c, ct) = (h % 3, t % 3);
        let zi = dev.corners[f][c];
        let zj = dev.corners[f][(c + 1) % 3];
        let zk = dev.corners[f][(c + 2) % 3];
        let k = [
            dev.offsets[f][0] + mesh.dstep[h][0] - dev.offsets[g][0],
            dev.offsets[f][1] + mesh.dstep[h][1] - dev.offsets[g][1],
        ];
        let (ra, rb) = rho_pow(&dev.rho, k[0], k[1]);
        let zl = ra * dev.corners[g][(ct + 2) % 3] + rb;
        let denom = (zi - zl) * (zj - zk);
        if denom.norm() < 1e-300 {
            return Err(Error::DegenerateCrossRatio(e));
        }
        x[e] = -((zk - zi) * (zl - zj)) / denom;
    }
    Ok(x)
}

/// Affine parameter c and conformal modulus tau. Euclidean patterns have no
/// affine parameter; tau is the translation ratio.
pub fn conformal_data(a: [f64; 2], dev: &Developed) -> Result<(Option<C64>, C64)> {
    if a == [0.0, 0.0] {
        let b1 = dev.rho[0].1;
        let b2 = dev.rho[1].1;
        if b1.norm() < 1e-300 {
            return Err(Error::EuclideanDegenerate);
        }
        let tau = b2 / b1;
        if tau.im <= 0.0 {
            return Err(Error::BranchError(tau.im));
        }
        return Ok((None, tau));
    }
    let c = C64::new(a[0], dev.b[0]);
    let ctau = C64::new(a[1], dev.b[1]);
    let tau = ctau / c;
    if tau.im <= 0.0 {
        return Err(Error::BranchError(tau.im));
    }
    Ok((Some(c), tau))
}

/// A solved, developed pattern with its derived data.
#[derive(Debug, Clone)]
pub struct CirclePattern {
    pub a: [f64; 2],
    pub u: Vec<f64>,
    pub cells: Cells,
    pub dev: Developed,
    pub x: Vec<C64>,
    pub c: Option<C64>,
    pub tau: C64,
    pub residual: f64,
}

impl CirclePattern {
    pub fn solve(
        mesh: &TorusTriangulation,
        angles: &AngleStructure,
        a: [f64; 2],
        tol: f64,
    ) -> Result<Self> {
        let (u, cells) = solve_radii(mesh, angles, a, tol)?;
        let dev = develop(mesh, angles, &u, a)?;
        let x = cross_ratios(mesh, &dev)?;
        let (c, tau) = conformal_data(a, &dev)?;
        let residual = max_face_defect(mesh, angles, &cells, a, &u);
        Ok(CirclePattern { a, u, cells, dev, x, c, tau, residual })
    }

    /// Developed position of one lift per vertex: the first corner of the
    /// lowest-indexed face containing it.
    pub fn vertex_positions(&self, mesh: &TorusTriangulation) -> Vec<C64> {
        let mut z = vec![C64::new(f64::NAN, f64::NAN); mesh.n_vertices];
        for f in 0..mesh.n_faces {
            for c in 0..3 {
                let v = mesh.faces[f][c];
                if z[v].re.is_nan() {
                    z[v] = self.dev.corners[f][c];
                }
            }
        }
        z
    }
}

/// Residuals of the two vertex equations of a cross ratio system: the
/// clockwise products around every vertex against 1, and the telescoping
/// partial sums against 0.
pub fn cross_ratio_residuals(mesh: &TorusTriangulation, x: &[C64]) -> (f64, f64) {
    let mut rp = 0.0f64;
    let mut rs = 0.0f64;
    for orb in mesh.vertex_orbits() {
        let mut prod = C64::new(1.0, 0.0);
        let mut sum = C64::new(0.0, 0.0);
        for &h in &orb {
            prod *= x[mesh.he_edge[h]];
            sum += prod;
        }
        rp = rp.max((prod - C64::new(1.0, 0.0)).norm());
        rs = rs.max(sum.norm());
    }
    (rp, rs)
}
