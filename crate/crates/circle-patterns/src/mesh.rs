//! Triangulated lattice tori as halfedge meshes with crossing indices.
//!
//! The universal cover is never materialized: every halfedge carries the
//! pair of integers recording how it crosses the two fundamental-domain cut
//! curves, and cover-periodic data is shifted through these indices.

use crate::error::{Error, Result};

/// Quotient combinatorics of a triangulated torus.
///
/// Halfedge `h = 3*f + c` runs from corner `c` to corner `(c+1)%3` of face
/// `f`; faces are counterclockwise vertex triples. `chi[h]` is the crossing
/// index of the halfedge, `dstep[h]` the crossing picked up when stepping
/// from `face(h)` into `face(twin(h))` across `h`.
#[derive(Debug, Clone)]
pub struct TorusTriangulation {
    pub p: usize,
    pub q: usize,
    pub n_vertices: usize,
    pub n_edges: usize,
    pub n_faces: usize,
    pub faces: Vec<[usize; 3]>,
    pub he_face: Vec<usize>,
    pub he_from: Vec<usize>,
    pub he_to: Vec<usize>,
    pub he_next: Vec<usize>,
    pub he_twin: Vec<usize>,
    pub he_edge: Vec<usize>,
    pub chi: Vec<[i64; 2]>,
    pub dstep: Vec<[i64; 2]>,
    /// 1 = horizontal, 2 = vertical, 3 = diagonal lattice class, per edge.
    pub edge_class: Vec<u8>,
    /// Lattice coordinates of the three corner lifts of each face.
    pub face_lift: Vec<[[i64; 2]; 3]>,
    /// Generator loops as cyclic face sequences (dual) and halfedge
    /// sequences (primal). Halfedges are stored, not vertices, so the loops
    /// stay well defined on multi-edge quotients (p = 2 or q = 2).
    pub gamma1_dual: Vec<usize>,
    pub gamma2_dual: Vec<usize>,
    pub gamma1_primal: Vec<usize>,
    pub gamma2_primal: Vec<usize>,
}

/// One check of a validation report.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
    fn push(&mut self, name: &str, pass: bool, detail: String) {
        self.checks.push(CheckResult { name: name.into(), pass, detail });
    }
}

fn floor_div(a: i64, b: i64) -> i64 {
    a.div_euclid(b)
}

/// Builds the p x q triangular-lattice torus: vertices v(i,j) = i + p*j,
/// each grid square split by the diagonal (i,j)-(i+1,j+1) into a lower face
/// L(i,j) = ((i,j),(i+1,j),(i+1,j+1)) and an upper face
/// U(i,j) = ((i,j),(i+1,j+1),(i,j+1)), both counterclockwise.
pub fn build_lattice_torus(p: usize, q: usize) -> Result<TorusTriangulation> {
    if p < 2 || q < 2 {
        return Err(Error::InvalidMesh(format!("need p >= 2 and q >= 2, got {}x{}", p, q)));
    }
    let (pi, qi) = (p as i64, q as i64);
    let vid = |i: i64, j: i64| (i.rem_euclid(pi) + pi * j.rem_euclid(qi)) as usize;

    let mut faces: Vec<[usize; 3]> = Vec::with_capacity(2 * p * q);
    // Per face, lattice coordinates of the three corner lifts.
    let mut lifts: Vec<[[i64; 2]; 3]> = Vec::with_capacity(2 * p * q);
    for j in 0..qi {
        for i in 0..pi {
            faces.push([vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)]);
            lifts.push([[i, j], [i + 1, j], [i + 1, j + 1]]);
            faces.push([vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)]);
            lifts.push([[i, j], [i + 1, j + 1], [i, j + 1]]);
        }
    }
    let nf = faces.len();
    let nh = 3 * nf;
    let mut he_face = vec![0usize; nh];
    let mut he_from = vec![0usize; nh];
    let mut he_to = vec![0usize; nh];
    let mut he_next = vec![0usize; nh];
    let mut chi = vec![[0i64; 2]; nh];
    for f in 0..nf {
        for c in 0..3 {
            let h = 3 * f + c;
            he_face[h] = f;
            he_from[h] = faces[f][c];
            he_to[h] = faces[f][(c + 1) % 3];
            he_next[h] = 3 * f + (c + 1) % 3;
            let [ax, ay] = lifts[f][c];
            let [bx, by] = lifts[f][(c + 1) % 3];
            // Crossing of the halfedge: lattice wrap of the to-vertex lift
            // relative to the from-vertex's canonical representative.
            let (fx, fy) = (ax.rem_euclid(pi), ay.rem_euclid(qi));
            let (tx, ty) = (fx + bx - ax, fy + by - ay);
            chi[h] = [floor_div(tx, pi), floor_div(ty, qi)];
        }
    }
    // Twin matching: u->v with crossing (m,n) pairs with v->u, (-m,-n).
    let mut he_twin = vec![usize::MAX; nh];
    {
        use std::collections::HashMap;
        let mut buckets: HashMap<(usize, usize, i64, i64), Vec<usize>> = HashMap::new();
        for h in 0..nh {
            let want = (he_to[h], he_from[h], -chi[h][0], -chi[h][1]);
            if let Some(list) = buckets.get_mut(&want) {
                if let Some(t) = list.pop() {
                    he_twin[h] = t;
                    he_twin[t] = h;
                    continue;
                }
            }
            let key = (he_from[h], he_to[h], chi[h][0], chi[h][1]);
            buckets.entry(key).or_default().push(h);
        }
    }
    if he_twin.iter().any(|&t| t == usize::MAX) {
        return Err(Error::InvalidMesh("twin matching failed".into()));
    }
    let mut he_edge = vec![usize::MAX; nh];
    let mut ne = 0usize;
    for h in 0..nh {
        if he_edge[h] == usize::MAX {
            he_edge[h] = ne;
            he_edge[he_twin[h]] = ne;
            ne += 1;
        }
    }
    let mut edge_class = vec![0u8; ne];
    for f in 0..nf {
        for c in 0..3 {
            let [ax, ay] = lifts[f][c];
            let [bx, by] = lifts[f][(c + 1) % 3];
            let cls = match (bx - ax, by - ay) {
                (1, 0) | (-1, 0) => 1,
                (0, 1) | (0, -1) => 2,
                _ => 3,
            };
            edge_class[he_edge[3 * f + c]] = cls;
        }
    }
    // Corner lift offsets relative to canonical vertex representatives;
    // the crossing of the dual step f -> face(twin(h)) is their mismatch at
    // either shared vertex.
    let off = |f: usize, c: usize| -> [i64; 2] {
        let [ax, ay] = lifts[f][c];
        [floor_div(ax, pi), floor_div(ay, qi)]
    };
    let mut dstep = vec![[0i64; 2]; nh];
    for h in 0..nh {
        let f = he_face[h];
        let t = he_twin[h];
        let g = he_face[t];
        let (c, ct) = (h % 3, t % 3);
        let of = off(f, c);
        let og = off(g, (ct + 1) % 3);
        dstep[h] = [of[0] - og[0], of[1] - og[1]];
        let of2 = off(f, (c + 1) % 3);
        let og2 = off(g, ct);
        debug_assert_eq!(dstep[h], [of2[0] - og2[0], of2[1] - og2[1]]);
    }
    // Generator loops. Dual: horizontal strip through row 0 and vertical
    // strip through column 0. Primal: bottom row and left column.
    let lface = |i: i64, j: i64| 2 * (i.rem_euclid(pi) + pi * j.rem_euclid(qi)) as usize;
    let uface = |i: i64, j: i64| lface(i, j) + 1;
    let mut gamma1_dual = Vec::new();
    for i in 0..pi {
        gamma1_dual.push(lface(i, 0));
        gamma1_dual.push(uface(i + 1, 0));
    }
    let mut gamma2_dual = Vec::new();
    for j in 0..qi {
        gamma2_dual.push(lface(0, j));
        gamma2_dual.push(uface(0, j));
    }
    let find_he = |u: usize, v: usize, want: [i64; 2]| -> Result<usize> {
        (0..nh)
            .find(|&h| he_from[h] == u && he_to[h] == v && chi[h] == want)
            .ok_or_else(|| Error::InvalidMesh(format!("no halfedge {}->{} with crossing {:?}", u, v, want)))
    };
    let mut gamma1_primal = Vec::new();
    for i in 0..pi {
        let want = [if i + 1 == pi { 1 } else { 0 }, 0];
        gamma1_primal.push(find_he(vid(i, 0), vid(i + 1, 0), want)?);
    }
    let mut gamma2_primal = Vec::new();
    for j in 0..qi {
        let want = [0, if j + 1 == qi { 1 } else { 0 }];
        gamma2_primal.push(find_he(vid(0, j), vid(0, j + 1), want)?);
    }

    Ok(TorusTriangulation {
        p,
        q,
        n_vertices: p * q,
        n_edges: ne,
        n_faces: nf,
        faces,
        he_face,
        he_from,
        he_to,
        he_next,
        he_twin,
        he_edge,
        chi,
        dstep,
        face_lift: lifts,
        edge_class,
        gamma1_dual,
        gamma2_dual,
        gamma1_primal,
        gamma2_primal,
    })
}

impl TorusTriangulation {
    pub fn n_halfedges(&self) -> usize {
        3 * self.n_faces
    }

    /// Outgoing halfedges of every vertex in clockwise order (next o twin).
    pub fn vertex_orbits(&self) -> Vec<Vec<usize>> {
        let mut start = vec![usize::MAX; self.n_vertices];
        for h in 0..self.n_halfedges() {
            let v = self.he_from[h];
            if start[v] == usize::MAX {
                start[v] = h;
            }
        }
        start
            .iter()
            .map(|&h0| {
                let mut orb = vec![h0];
                let mut h = self.he_next[self.he_twin[h0]];
                while h != h0 {
                    orb.push(h);
                    h = self.he_next[self.he_twin[h]];
                }
                orb
            })
            .collect()
    }

    /// For a cyclic face sequence, the halfedge crossed at each step,
    /// oriented so that its face is the destination of the step.
    pub fn dual_loop_steps(&self, loop_faces: &[usize]) -> Result<Vec<usize>> {
        let n = loop_faces.len();
        let mut steps = Vec::with_capacity(n);
        for k in 0..n {
            let (f, g) = (loop_faces[k], loop_faces[(k + 1) % n]);
            let h = (0..3)
                .map(|c| 3 * g + c)
                .find(|&h| self.he_face[self.he_twin[h]] == f)
                .ok_or_else(|| Error::InvalidMesh(format!("faces {} and {} not adjacent", f, g)))?;
            steps.push(h);
        }
        Ok(steps)
    }

    /// Total crossing picked up by a dual loop (zero iff null-homologous,
    /// (1,0)/(0,1) for the generators).
    pub fn dual_loop_crossing(&self, loop_faces: &[usize]) -> Result<[i64; 2]> {
        let mut tot = [0i64; 2];
        for &h in &self.dual_loop_steps(loop_faces)? {
            let d = self.dstep[self.he_twin[h]];
            tot[0] += d[0];
            tot[1] += d[1];
        }
        Ok(tot)
    }

    pub fn primal_loop_crossing(&self, loop_hes: &[usize]) -> [i64; 2] {
        let mut tot = [0i64; 2];
        for &h in loop_hes {
            tot[0] += self.chi[h][0];
            tot[1] += self.chi[h][1];
        }
        tot
    }

    /// Vertex path of a primal halfedge loop.
    pub fn loop_vertices(&self, loop_hes: &[usize]) -> Vec<usize> {
        loop_hes.iter().map(|&h| self.he_from[h]).collect()
    }

    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::default();
        let euler = self.n_vertices as i64 - self.n_edges as i64 + self.n_faces as i64;
        rep.push("euler_characteristic", euler == 0, format!("V-E+F = {}", euler));

        let nh = self.n_halfedges();
        let mut twin_ok = true;
        let mut detail = String::from("ok");
        for h in 0..nh {
            let t = self.he_twin[h];
            if t >= nh
                || self.he_twin[t] != h
                || self.he_from[t] != self.he_to[h]
                || self.he_to[t] != self.he_from[h]
                || self.he_edge[t] != self.he_edge[h]
            {
                twin_ok = false;
                detail = format!("halfedge {}", h);
                break;
            }
        }
        rep.push("twin_involution", twin_ok, detail);

        let mut next_ok = true;
        let mut detail = String::from("ok");
        for h in 0..nh {
            let h3 = self.he_next[self.he_next[self.he_next[h]]];
            if h3 != h || self.he_face[self.he_next[h]] != self.he_face[h] {
                next_ok = false;
                detail = format!("halfedge {}", h);
                break;
            }
        }
        rep.push("next_cyclic", next_ok, detail);

        let mut anti_ok = true;
        let mut detail = String::from("ok");
        for h in 0..nh {
            let t = self.he_twin[h];
            if self.chi[h][0] != -self.chi[t][0] || self.chi[h][1] != -self.chi[t][1] {
                anti_ok = false;
                detail = format!("halfedge {}", h);
                break;
            }
        }
        rep.push("crossing_antisymmetry", anti_ok, detail);

        let mut closure_ok = true;
        let mut detail = String::from("ok");
        for f in 0..self.n_faces {
            let s0: i64 = (0..3).map(|c| self.chi[3 * f + c][0]).sum();
            let s1: i64 = (0..3).map(|c| self.chi[3 * f + c][1]).sum();
            if s0 != 0 || s1 != 0 {
                closure_ok = false;
                detail = format!("face {} crossing sum ({},{})", f, s0, s1);
                break;
            }
        }
        rep.push("face_crossing_closure", closure_ok, detail);

        let c1 = self.primal_loop_crossing(&self.gamma1_primal);
        let c2 = self.primal_loop_crossing(&self.gamma2_primal);
        rep.push("gamma1_primal_crossing", c1 == [1, 0], format!("{:?}", c1));
        rep.push("gamma2_primal_crossing", c2 == [0, 1], format!("{:?}", c2));
        let d1 = self.dual_loop_crossing(&self.gamma1_dual);
        let d2 = self.dual_loop_crossing(&self.gamma2_dual);
        rep.push("gamma1_dual_crossing", d1.as_ref().map_or(false, |d| *d == [1, 0]), format!("{:?}", d1));
        rep.push("gamma2_dual_crossing", d2.as_ref().map_or(false, |d| *d == [0, 1]), format!("{:?}", d2));
        rep
    }
}

/// Intersection angles per edge, in [0, pi).
#[derive(Debug, Clone)]
pub struct AngleStructure {
    pub theta: Vec<f64>,
}

/// Assigns (theta1, theta2, theta3) to the three lattice edge classes.
/// The angle sums at the vertices are then automatically 2*pi.
pub fn uniform_angle_structure(
    mesh: &TorusTriangulation,
    theta1: f64,
    theta2: f64,
    theta3: f64,
) -> Result<AngleStructure> {
    let t = [theta1, theta2, theta3];
    if (t[0] + t[1] + t[2] - std::f64::consts::PI).abs() > 1e-12 {
        return Err(Error::InvalidAngles(format!(
            "angle sum {} != pi",
            t[0] + t[1] + t[2]
        )));
    }
    for &x in &t {
        if !(0.0..std::f64::consts::PI).contains(&x) {
            return Err(Error::InvalidAngles(format!("angle {} outside [0, pi)", x)));
        }
    }
    let theta = mesh
        .edge_class
        .iter()
        .map(|&c| {
            if c == 0 || c > 3 {
                Err(Error::InvalidMesh("edge without class tag".into()))
            } else {
                Ok(t[c as usize - 1])
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AngleStructure { theta })
}

/// Checks the vertex angle sums exactly and the dual-cycle lower bound for
/// all simple contractible dual cycles up to `max_cycle_len`. The cycle
/// check is partial by design; the report says which lengths were covered.
pub fn validate_angle_structure(
    mesh: &TorusTriangulation,
    angles: &AngleStructure,
    max_cycle_len: usize,
) -> ValidationReport {
    let mut rep = ValidationReport::default();
    let orbits = mesh.vertex_orbits();
    let mut sum_ok = true;
    let mut detail = String::from("ok");
    for (v, orb) in orbits.iter().enumerate() {
        let s: f64 = orb.iter().map(|&h| angles.theta[mesh.he_edge[h]]).sum();
        if (s - 2.0 * std::f64::consts::PI).abs() > 1e-12 {
            sum_ok = false;
            detail = format!("vertex {} sum {}", v, s);
            break;
        }
    }
    rep.push("vertex_angle_sums", sum_ok, detail);

    let cycles = enumerate_contractible_dual_cycles(mesh, max_cycle_len);
    let n_checked = cycles.len();
    let mut cyc_ok = true;
    let mut detail = format!(
        "checked {} simple contractible dual cycles of length <= {} (partial check)",
        n_checked, max_cycle_len
    );
    for cyc in &cycles {
        let steps = match mesh.dual_loop_steps(cyc) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let s: f64 = steps.iter().map(|&h| angles.theta[mesh.he_edge[h]]).sum();
        // The lower bound constrains cycles that enclose primal vertices:
        // strict above 2*pi for two or more, equality allowed for a single
        // enclosed vertex (the vertex star realizes it), no constraint for
        // vertex-free disks.
        let enclosed = enclosed_vertex_count(mesh, cyc);
        let ok = match enclosed {
            0 => true,
            1 => s >= 2.0 * std::f64::consts::PI - 1e-12,
            _ => s > 2.0 * std::f64::consts::PI + 1e-12,
        };
        if !ok {
            cyc_ok = false;
            detail = format!(
                "dual cycle {:?} encloses {} vertices with angle sum {}",
                cyc, enclosed, s
            );
            break;
        }
    }
    rep.push("dual_cycle_angle_sums", cyc_ok, detail);
    rep
}

/// Number of primal vertices enclosed by a contractible dual cycle,
/// counted on a planar lift: walk the cycle through face barycenters with
/// accumulated offsets and count lattice vertex lifts of nonzero winding.
pub fn enclosed_vertex_count(mesh: &TorusTriangulation, cyc: &[usize]) -> usize {
    let (pi, qi) = (mesh.p as i64, mesh.q as i64);
    let embed = |x: f64, y: f64| -> (f64, f64) { (x + 0.5 * y, y * 0.75f64.sqrt()) };
    let steps = match mesh.dual_loop_steps(cyc) {
        Ok(s) => s,
        Err(_) => return 0,
    };
    let mut off = [0i64, 0i64];
    let mut poly: Vec<(f64, f64)> = Vec::with_capacity(cyc.len());
    for (k, &f) in cyc.iter().enumerate() {
        let l = &mesh.face_lift[f];
        let bx = (l[0][0] + l[1][0] + l[2][0]) as f64 / 3.0 + (off[0] * pi) as f64;
        let by = (l[0][1] + l[1][1] + l[2][1]) as f64 / 3.0 + (off[1] * qi) as f64;
        poly.push(embed(bx, by));
        let d = mesh.dstep[mesh.he_twin[steps[k]]];
        off[0] += d[0];
        off[1] += d[1];
    }
    if off != [0, 0] {
        return 0; // not contractible
    }
    let winding = |px: f64, py: f64| -> i32 {
        let mut tot = 0.0f64;
        for k in 0..poly.len() {
            let (ax, ay) = poly[k];
            let (bx, by) = poly[(k + 1) % poly.len()];
            let cross = (ax - px) * (by - py) - (ay - py) * (bx - px);
            let dot = (ax - px) * (bx - px) + (ay - py) * (by - py);
            tot += cross.atan2(dot);
        }
        (tot / (2.0 * std::f64::consts::PI)).round() as i32
    };
    let xs: Vec<f64> = poly.iter().map(|&(x, _)| x).collect();
    let ys: Vec<f64> = poly.iter().map(|&(_, y)| y).collect();
    let (xmin, xmax) = (xs.iter().cloned().fold(f64::INFINITY, f64::min), xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    let (ymin, ymax) = (ys.iter().cloned().fold(f64::INFINITY, f64::min), ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    let mut count = 0;
    // Lattice vertex lifts: (a, b) embeds to (a + b/2, b*sqrt(3)/2).
    let blo = (ymin / 0.75f64.sqrt()).floor() as i64 - 1;
    let bhi = (ymax / 0.75f64.sqrt()).ceil() as i64 + 1;
    for b in blo..=bhi {
        let alo = (xmin - 0.5 * b as f64).floor() as i64 - 1;
        let ahi = (xmax - 0.5 * b as f64).ceil() as i64 + 1;
        for a in alo..=ahi {
            let (px, py) = embed(a as f64, b as f64);
            if winding(px, py) != 0 {
                count += 1;
            }
        }
    }
    count
}

/// Simple cycles in the dual graph (faces adjacent across an edge) up to
/// the given length whose total crossing vanishes. On a torus a simple
/// null-homologous cycle is contractible.
fn enumerate_contractible_dual_cycles(mesh: &TorusTriangulation, max_len: usize) -> Vec<Vec<usize>> {
    let nf = mesh.n_faces;
    let mut nbrs: Vec<Vec<usize>> = vec![Vec::new(); nf];
    for f in 0..nf {
        for c in 0..3 {
            nbrs[f].push(mesh.he_face[mesh.he_twin[3 * f + c]]);
        }
    }
    let mut out = Vec::new();
    let mut path = Vec::new();
    let mut on_path = vec![false; nf];
    // Canonical form: start at the smallest face of the cycle; to kill the
    // two traversal directions require second < last.
    fn dfs(
        mesh: &TorusTriangulation,
        nbrs: &[Vec<usize>],
        start: usize,
        path: &mut Vec<usize>,
        on_path: &mut [bool],
        max_len: usize,
        out: &mut Vec<Vec<usize>>,
    ) {
        let cur = *path.last().unwrap();
        for &g in &nbrs[cur] {
            if g == start && path.len() >= 3 {
                if path[1] < cur {
                    let mut tot = [0i64; 2];
                    let mut ok = true;
                    for k in 0..path.len() {
                        let (f, gg) = (path[k], path[(k + 1) % path.len()]);
                        match (0..3)
                            .map(|c| 3 * gg + c)
                            .find(|&h| mesh.he_face[mesh.he_twin[h]] == f)
                        {
                            Some(h) => {
                                let d = mesh.dstep[mesh.he_twin[h]];
                                tot[0] += d[0];
                                tot[1] += d[1];
                            }
                            None => ok = false,
                        }
                    }
                    if ok && tot == [0, 0] {
                        out.push(path.clone());
                    }
                }
                continue;
            }
            if g <= start || on_path[g] || path.len() >= max_len {
                continue;
            }
            path.push(g);
            on_path[g] = true;
            dfs(mesh, nbrs, start, path, on_path, max_len, out);
            on_path[g] = false;
            path.pop();
        }
    }
    for start in 0..nf {
        path.clear();
        path.push(start);
        on_path[start] = true;
        dfs(mesh, &nbrs, start, &mut path, &mut on_path, max_len, &mut out);
        on_path[start] = false;
    }
    out
}
