//! Deterministic structured-text serialization and the small input parsers.
//!
//! Numbers are emitted with 17 significant digits so that writing and
//! re-reading is exact at double precision and golden files are stable
//! byte-for-byte.

use crate::error::{Error, Result};
use crate::mesh::TorusTriangulation;
use crate::pattern::{C64, CirclePattern};
use serde_json::Value;

pub fn fmt_f64(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        // Integral values print plainly; keeps files readable and stable.
        format!("{:.1}", x)
    } else {
        format!("{:.16e}", x)
    }
}

fn fmt_c64(z: C64) -> String {
    format!("[{}, {}]", fmt_f64(z.re), fmt_f64(z.im))
}

fn fmt_f64_list(xs: &[f64]) -> String {
    let items: Vec<String> = xs.iter().map(|&x| fmt_f64(x)).collect();
    format!("[{}]", items.join(", "))
}

fn fmt_usize_list(xs: &[usize]) -> String {
    let items: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
    format!("[{}]", items.join(", "))
}

/// Canonical mesh document. Loading and re-serializing is byte-identical.
pub fn mesh_to_json(mesh: &TorusTriangulation) -> String {
    let faces: Vec<String> = mesh
        .faces
        .iter()
        .map(|f| format!("[{}, {}, {}]", f[0], f[1], f[2]))
        .collect();
    let crossing: Vec<String> = mesh
        .chi
        .iter()
        .map(|c| format!("[{}, {}]", c[0], c[1]))
        .collect();
    let edge_class: Vec<String> = mesh.edge_class.iter().map(|c| c.to_string()).collect();
    let g1: Vec<usize> = mesh.loop_vertices(&mesh.gamma1_primal);
    let g2: Vec<usize> = mesh.loop_vertices(&mesh.gamma2_primal);
    format!(
        "{{\n  \"p\": {},\n  \"q\": {},\n  \"n_vertices\": {},\n  \"faces\": [{}],\n  \"crossing\": [{}],\n  \"edge_class\": [{}],\n  \"gamma1_primal\": {},\n  \"gamma2_primal\": {}\n}}\n",
        mesh.p,
        mesh.q,
        mesh.n_vertices,
        faces.join(", "),
        crossing.join(", "),
        edge_class.join(", "),
        fmt_usize_list(&g1),
        fmt_usize_list(&g2),
    )
}

fn as_usize(v: &Value, what: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| Error::Parse(format!("{} must be a nonnegative integer", what)))
}

fn as_i64(v: &Value, what: &str) -> Result<i64> {
    v.as_i64().ok_or_else(|| Error::Parse(format!("{} must be an integer", what)))
}

/// Parses a mesh document and rebuilds the halfedge structure, verifying
/// the recorded combinatorics against a fresh lattice build.
pub fn mesh_from_json(text: &str) -> Result<TorusTriangulation> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let obj = v.as_object().ok_or_else(|| Error::Parse("expected an object".into()))?;
    let p = as_usize(obj.get("p").ok_or_else(|| Error::Parse("missing p".into()))?, "p")?;
    let q = as_usize(obj.get("q").ok_or_else(|| Error::Parse("missing q".into()))?, "q")?;
    if p > 1024 || q > 1024 {
        return Err(Error::Parse("lattice periods too large".into()));
    }
    let mesh = crate::mesh::build_lattice_torus(p, q)?;
    let nv = as_usize(
        obj.get("n_vertices").ok_or_else(|| Error::Parse("missing n_vertices".into()))?,
        "n_vertices",
    )?;
    if nv != mesh.n_vertices {
        return Err(Error::Parse(format!("n_vertices {} does not match {}x{}", nv, p, q)));
    }
    let faces = obj
        .get("faces")
        .and_then(|f| f.as_array())
        .ok_or_else(|| Error::Parse("missing faces".into()))?;
    if faces.len() != mesh.n_faces {
        return Err(Error::Parse("face count mismatch".into()));
    }
    for (f, triple) in faces.iter().enumerate() {
        let t = triple.as_array().ok_or_else(|| Error::Parse("face must be a triple".into()))?;
        if t.len() != 3 {
            return Err(Error::Parse("face must be a triple".into()));
        }
        for c in 0..3 {
            if as_usize(&t[c], "face vertex")? != mesh.faces[f][c] {
                return Err(Error::Parse(format!("face {} differs from the lattice layout", f)));
            }
        }
    }
    let crossing = obj
        .get("crossing")
        .and_then(|c| c.as_array())
        .ok_or_else(|| Error::Parse("missing crossing".into()))?;
    if crossing.len() != mesh.n_halfedges() {
        return Err(Error::Parse("crossing count mismatch".into()));
    }
    for (h, pair) in crossing.iter().enumerate() {
        let t = pair.as_array().ok_or_else(|| Error::Parse("crossing must be a pair".into()))?;
        if t.len() != 2 {
            return Err(Error::Parse("crossing must be a pair".into()));
        }
        if [as_i64(&t[0], "crossing")?, as_i64(&t[1], "crossing")?] != mesh.chi[h] {
            return Err(Error::Parse(format!("crossing of halfedge {} mismatches", h)));
        }
    }
    let ec = obj
        .get("edge_class")
        .and_then(|c| c.as_array())
        .ok_or_else(|| Error::Parse("missing edge_class".into()))?;
    if ec.len() != mesh.n_edges {
        return Err(Error::Parse("edge_class count mismatch".into()));
    }
    for (e, c) in ec.iter().enumerate() {
        if as_usize(c, "edge_class")? != mesh.edge_class[e] as usize {
            return Err(Error::Parse(format!("edge_class of edge {} mismatches", e)));
        }
    }
    for key in ["gamma1_primal", "gamma2_primal"] {
        let g = obj
            .get(key)
            .and_then(|g| g.as_array())
            .ok_or_else(|| Error::Parse(format!("missing {}", key)))?;
        let want = if key == "gamma1_primal" {
            mesh.loop_vertices(&mesh.gamma1_primal)
        } else {
            mesh.loop_vertices(&mesh.gamma2_primal)
        };
        if g.len() != want.len() {
            return Err(Error::Parse(format!("{} length mismatch", key)));
        }
        for (k, v) in g.iter().enumerate() {
            if as_usize(v, key)? != want[k] {
                return Err(Error::Parse(format!("{} entry {} mismatches", key, k)));
            }
        }
    }
    Ok(mesh)
}

/// Canonical pattern document.
pub fn pattern_to_json(mesh: &TorusTriangulation, pat: &CirclePattern) -> String {
    let z = pat.vertex_positions(mesh);
    let zs: Vec<String> = z.iter().map(|&w| fmt_c64(w)).collect();
    let xs: Vec<String> = pat.x.iter().map(|&w| fmt_c64(w)).collect();
    let c_str = match pat.c {
        Some(c) => fmt_c64(c),
        None => "null".to_string(),
    };
    format!(
        "{{\n  \"A\": {},\n  \"B\": {},\n  \"u\": {},\n  \"z\": [{}],\n  \"X\": [{}],\n  \"c\": {},\n  \"tau\": {},\n  \"residual\": {}\n}}\n",
        fmt_f64_list(&pat.a),
        fmt_f64_list(&pat.dev.b),
        fmt_f64_list(&pat.u),
        zs.join(", "),
        xs.join(", "),
        c_str,
        fmt_c64(pat.tau),
        fmt_f64(pat.residual),
    )
}

/// Parsed view of a pattern document; shape and finiteness validation only.
#[derive(Debug, Clone)]
pub struct PatternDump {
    pub a: [f64; 2],
    pub b: [f64; 2],
    pub u: Vec<f64>,
    pub z: Vec<C64>,
    pub x: Vec<C64>,
    pub c: Option<C64>,
    pub tau: C64,
    pub residual: f64,
}

fn as_f64(v: &Value, what: &str) -> Result<f64> {
    let x = v.as_f64().ok_or_else(|| Error::Parse(format!("{} must be a number", what)))?;
    if !x.is_finite() {
        return Err(Error::Parse(format!("{} must be finite", what)));
    }
    Ok(x)
}

fn as_c64(v: &Value, what: &str) -> Result<C64> {
    let t = v.as_array().ok_or_else(|| Error::Parse(format!("{} must be [re, im]", what)))?;
    if t.len() != 2 {
        return Err(Error::Parse(format!("{} must be [re, im]", what)));
    }
    Ok(C64::new(as_f64(&t[0], what)?, as_f64(&t[1], what)?))
}

pub fn pattern_from_json(text: &str) -> Result<PatternDump> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let obj = v.as_object().ok_or_else(|| Error::Parse("expected an object".into()))?;
    let pair = |key: &str| -> Result<[f64; 2]> {
        let t = obj
            .get(key)
            .and_then(|x| x.as_array())
            .ok_or_else(|| Error::Parse(format!("missing {}", key)))?;
        if t.len() != 2 {
            return Err(Error::Parse(format!("{} must be a pair", key)));
        }
        Ok([as_f64(&t[0], key)?, as_f64(&t[1], key)?])
    };
    let list = |key: &str| -> Result<Vec<f64>> {
        obj.get(key)
            .and_then(|x| x.as_array())
            .ok_or_else(|| Error::Parse(format!("missing {}", key)))?
            .iter()
            .map(|x| as_f64(x, key))
            .collect()
    };
    let clist = |key: &str| -> Result<Vec<C64>> {
        obj.get(key)
            .and_then(|x| x.as_array())
            .ok_or_else(|| Error::Parse(format!("missing {}", key)))?
            .iter()
            .map(|x| as_c64(x, key))
            .collect()
    };
    let c = match obj.get("c") {
        None => return Err(Error::Parse("missing c".into())),
        Some(Value::Null) => None,
        Some(v) => Some(as_c64(v, "c")?),
    };
    Ok(PatternDump {
        a: pair("A")?,
        b: pair("B")?,
        u: list("u")?,
        z: clist("z")?,
        x: clist("X")?,
        c,
        tau: as_c64(obj.get("tau").ok_or_else(|| Error::Parse("missing tau".into()))?, "tau")?,
        residual: as_f64(
            obj.get("residual").ok_or_else(|| Error::Parse("missing residual".into()))?,
            "residual",
        )?,
    })
}

/// Grid specification `x0:x1:n,y0:y1:n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub x0: f64,
    pub x1: f64,
    pub nx: usize,
    pub y0: f64,
    pub y1: f64,
    pub ny: usize,
}

impl GridSpec {
    pub fn points(&self) -> Vec<[f64; 2]> {
        let mut out = Vec::with_capacity(self.nx * self.ny);
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                let x = if self.nx == 1 {
                    self.x0
                } else {
                    self.x0 + (self.x1 - self.x0) * ix as f64 / (self.nx - 1) as f64
                };
                let y = if self.ny == 1 {
                    self.y0
                } else {
                    self.y0 + (self.y1 - self.y0) * iy as f64 / (self.ny - 1) as f64
                };
                out.push([x, y]);
            }
        }
        out
    }
}

pub fn parse_grid_spec(s: &str) -> Result<GridSpec> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::Parse(format!("grid spec needs two axes, got {:?}", s)));
    }
    let axis = |a: &str| -> Result<(f64, f64, usize)> {
        let f: Vec<&str> = a.split(':').collect();
        if f.len() != 3 {
            return Err(Error::Parse(format!("axis spec must be x0:x1:n, got {:?}", a)));
        }
        let x0: f64 = f[0].parse().map_err(|_| Error::Parse(format!("bad number {:?}", f[0])))?;
        let x1: f64 = f[1].parse().map_err(|_| Error::Parse(format!("bad number {:?}", f[1])))?;
        let n: usize = f[2].parse().map_err(|_| Error::Parse(format!("bad count {:?}", f[2])))?;
        if !x0.is_finite() || !x1.is_finite() {
            return Err(Error::Parse("axis bounds must be finite".into()));
        }
        if n == 0 || n > 1_000_000 {
            return Err(Error::Parse(format!("axis count {} out of range", n)));
        }
        Ok((x0, x1, n))
    };
    let (x0, x1, nx) = axis(parts[0])?;
    let (y0, y1, ny) = axis(parts[1])?;
    Ok(GridSpec { x0, x1, nx, y0, y1, ny })
}

/// Angle literal: a decimal, `pi`, `pi/4`, `2pi/3`, or `0.5pi`.
pub fn parse_angle(s: &str) -> Result<f64> {
    let t = s.trim();
    if t.is_empty() || t.len() > 64 {
        return Err(Error::Parse("empty or oversized angle literal".into()));
    }
    if let Some(idx) = t.find("pi") {
        let (coef_s, rest) = (&t[..idx], &t[idx + 2..]);
        let coef: f64 = if coef_s.is_empty() {
            1.0
        } else {
            let c = coef_s.trim_end_matches('*');
            c.parse().map_err(|_| Error::Parse(format!("bad coefficient {:?}", coef_s)))?
        };
        let div: f64 = if rest.is_empty() {
            1.0
        } else if let Some(d) = rest.strip_prefix('/') {
            let v: f64 = d.parse().map_err(|_| Error::Parse(format!("bad divisor {:?}", d)))?;
            if v == 0.0 {
                return Err(Error::Parse("division by zero".into()));
            }
            v
        } else {
            return Err(Error::Parse(format!("trailing junk {:?}", rest)));
        };
        let val = coef * std::f64::consts::PI / div;
        if !val.is_finite() {
            return Err(Error::Parse("angle overflows".into()));
        }
        return Ok(val);
    }
    let val: f64 = t.parse().map_err(|_| Error::Parse(format!("bad angle {:?}", t)))?;
    if !val.is_finite() {
        return Err(Error::Parse("angle must be finite".into()));
    }
    Ok(val)
}

/// Comma-separated angle triple.
pub fn parse_theta(s: &str) -> Result<[f64; 3]> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::Parse(format!("need three angles, got {:?}", s)));
    }
    Ok([parse_angle(parts[0])?, parse_angle(parts[1])?, parse_angle(parts[2])?])
}

/// Comma-separated stretch pair.
pub fn parse_a(s: &str) -> Result<[f64; 2]> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::Parse(format!("need two components, got {:?}", s)));
    }
    let x: f64 = parts[0].trim().parse().map_err(|_| Error::Parse(format!("bad number {:?}", parts[0])))?;
    let y: f64 = parts[1].trim().parse().map_err(|_| Error::Parse(format!("bad number {:?}", parts[1])))?;
    if !x.is_finite() || !y.is_finite() {
        return Err(Error::Parse("components must be finite".into()));
    }
    Ok([x, y])
}
