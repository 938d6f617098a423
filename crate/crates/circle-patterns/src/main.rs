use circle_patterns::error::{Error, Result};
use circle_patterns::hodge::{cotangent_weights, dirichlet_energy, harmonic_oneform, period_map};
use circle_patterns::io::{
    fmt_f64, mesh_from_json, mesh_to_json, parse_a, parse_grid_spec, parse_theta, pattern_to_json,
};
use circle_patterns::lattice::{euclidean_point, euclidean_pullback};
use circle_patterns::mesh::{
    AngleStructure, TorusTriangulation, build_lattice_torus, uniform_angle_structure,
    validate_angle_structure,
};
use circle_patterns::moduli::{h_tau, omega, winding_check};
use circle_patterns::pattern::CirclePattern;
use circle_patterns::penner::{crosscheck_pullback, predicted_b_derivative_check};
use circle_patterns::svg::export_svg;
use clap::{Args, Parser, Subcommand};
use nalgebra::Vector2;

#[derive(Parser)]
#[command(name = "circle-patterns", about = "Circle patterns on lattice tori", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct MeshArgs {
    /// Mesh file produced by mesh-gen; alternative to --p/--q.
    #[arg(long)]
    mesh: Option<String>,
    /// Horizontal lattice period.
    #[arg(long, default_value_t = 4)]
    p: usize,
    /// Vertical lattice period.
    #[arg(long, default_value_t = 4)]
    q: usize,
    /// Intersection angles of the three edge classes, e.g. "pi/3,pi/3,pi/3".
    #[arg(long, default_value = "pi/3,pi/3,pi/3")]
    theta: String,
}

#[derive(Args, Clone)]
struct SolveArgs {
    #[command(flatten)]
    mesh: MeshArgs,
    /// Holonomy stretches "A1,A2".
    #[arg(long = "A", default_value = "0,0", allow_hyphen_values = true)]
    a: String,
    /// Solver tolerance on the face angle defect.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Output file (stdout if omitted).
    #[arg(long)]
    out: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a lattice torus mesh file.
    MeshGen {
        #[command(flatten)]
        mesh: MeshArgs,
        #[arg(long)]
        out: Option<String>,
    },
    /// Solve the circumradius system and emit the pattern.
    Solve(SolveArgs),
    /// Solve, develop, and optionally export an SVG layout.
    Develop {
        #[command(flatten)]
        solve: SolveArgs,
        /// SVG output path.
        #[arg(long)]
        svg: Option<String>,
        /// Tiling factor for the SVG (k x k holonomy translates).
        #[arg(long, default_value_t = 1)]
        tile: usize,
    },
    /// Discrete period matrix and diagnostics.
    Periodmap(SolveArgs),
    /// Grid report of lambda and det h_X.
    Symplectic {
        #[command(flatten)]
        mesh: MeshArgs,
        /// Grid "x0:x1:n,y0:y1:n" of stretch parameters.
        #[arg(long, default_value = "-2:2:9,-2:2:9", allow_hyphen_values = true)]
        grid: String,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long)]
        out: Option<String>,
    },
    /// Degree check of the modulus map around the Euclidean point.
    Winding {
        #[command(flatten)]
        mesh: MeshArgs,
        /// Radius of the stretch-plane loop.
        #[arg(long = "R", default_value_t = 10.0)]
        r: f64,
        /// Sample count along the loop.
        #[arg(long, default_value_t = 256)]
        samples: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Agreement of the two pullback formulas on a grid.
    Crosscheck {
        #[command(flatten)]
        mesh: MeshArgs,
        #[arg(long, default_value = "-1:1:5,-1:1:5", allow_hyphen_values = true)]
        grid: String,
        /// Finite-difference step.
        #[arg(long, default_value_t = 1e-4)]
        step: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long)]
        out: Option<String>,
    },
    /// Closed-form lattice family report: Euclidean point and pullback.
    TriExample {
        #[command(flatten)]
        mesh: MeshArgs,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long)]
        out: Option<String>,
    },
}

fn load_mesh(args: &MeshArgs) -> Result<(TorusTriangulation, AngleStructure)> {
    let mesh = match &args.mesh {
        Some(path) => mesh_from_json(&std::fs::read_to_string(path)?)?,
        None => build_lattice_torus(args.p, args.q)?,
    };
    let t = parse_theta(&args.theta)?;
    let angles = uniform_angle_structure(&mesh, t[0], t[1], t[2])?;
    let rep = validate_angle_structure(&mesh, &angles, 6);
    if !rep.all_pass() {
        return Err(Error::InvalidAngles(format!("{:?}", rep.checks)));
    }
    Ok((mesh, angles))
}

fn emit(out: &Option<String>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{}", text),
    }
    Ok(())
}

fn run() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::MeshGen { mesh, out } => {
            let (m, _) = load_mesh(&mesh)?;
            let rep = m.validate();
            if !rep.all_pass() {
                return Err(Error::InvalidMesh(format!("{:?}", rep.checks)));
            }
            emit(&out, &mesh_to_json(&m))
        }
        Cmd::Solve(s) => {
            let (m, an) = load_mesh(&s.mesh)?;
            let a = parse_a(&s.a)?;
            let pat = CirclePattern::solve(&m, &an, a, s.tol)?;
            emit(&s.out, &pattern_to_json(&m, &pat))
        }
        Cmd::Develop { solve, svg, tile } => {
            let (m, an) = load_mesh(&solve.mesh)?;
            let a = parse_a(&solve.a)?;
            let pat = CirclePattern::solve(&m, &an, a, solve.tol)?;
            if let Some(path) = svg {
                std::fs::write(path, export_svg(&m, &pat, tile))?;
            }
            emit(&solve.out, &pattern_to_json(&m, &pat))
        }
        Cmd::Periodmap(s) => {
            let (m, an) = load_mesh(&s.mesh)?;
            let a = parse_a(&s.a)?;
            let pat = CirclePattern::solve(&m, &an, a, s.tol)?;
            let w = cotangent_weights(&m, &an, &pat.dev);
            let (hx, _) = period_map(&m, &an, &pat.cells, &w)?;
            let e1 = harmonic_oneform(&m, &an, &pat.cells, &w, [1.0, 0.0])?;
            let e2 = harmonic_oneform(&m, &an, &pat.cells, &w, [0.0, 1.0])?;
            let text = format!(
                "{{\n  \"h_X\": [[{}, {}], [{}, {}]],\n  \"trace\": {},\n  \"det\": {},\n  \"energies\": [{}, {}],\n  \"tau\": [{}, {}]\n}}\n",
                fmt_f64(hx[(0, 0)]),
                fmt_f64(hx[(0, 1)]),
                fmt_f64(hx[(1, 0)]),
                fmt_f64(hx[(1, 1)]),
                fmt_f64(hx.trace()),
                fmt_f64(hx.determinant()),
                fmt_f64(dirichlet_energy(&m, &w, &e1.eta)),
                fmt_f64(dirichlet_energy(&m, &w, &e2.eta)),
                fmt_f64(pat.tau.re),
                fmt_f64(pat.tau.im),
            );
            emit(&s.out, &text)
        }
        Cmd::Symplectic { mesh, grid, tol, out } => {
            let (m, an) = load_mesh(&mesh)?;
            let spec = parse_grid_spec(&grid)?;
            let mut rows = Vec::new();
            for a in spec.points() {
                if a == [0.0, 0.0] {
                    continue;
                }
                let pat = CirclePattern::solve(&m, &an, a, tol)?;
                let w = cotangent_weights(&m, &an, &pat.dev);
                let (hx, _) = period_map(&m, &an, &pat.cells, &w)?;
                let lambda = 2.0 * (1.0 - hx.determinant());
                rows.push(format!(
                    "  {{\"A\": [{}, {}], \"tau\": [{}, {}], \"det_hX\": {}, \"lambda\": {}}}",
                    fmt_f64(a[0]),
                    fmt_f64(a[1]),
                    fmt_f64(pat.tau.re),
                    fmt_f64(pat.tau.im),
                    fmt_f64(hx.determinant()),
                    fmt_f64(lambda)
                ));
            }
            emit(&out, &format!("[\n{}\n]\n", rows.join(",\n")))
        }
        Cmd::Winding { mesh, r, samples, tol } => {
            let (m, an) = load_mesh(&mesh)?;
            let res = winding_check(&m, &an, r, samples, tol)?;
            println!(
                "winding={} closure={} max_step={}",
                res.winding,
                fmt_f64(res.closure),
                fmt_f64(res.max_step)
            );
            if res.winding != 1 {
                return Err(Error::CheckFailure(format!("winding {} != 1", res.winding)));
            }
            Ok(())
        }
        Cmd::Crosscheck { mesh, grid, step, tol, out } => {
            let (m, an) = load_mesh(&mesh)?;
            let spec = parse_grid_spec(&grid)?;
            let mut rows = Vec::new();
            for a in spec.points() {
                if a == [0.0, 0.0] {
                    continue;
                }
                let pat = CirclePattern::solve(&m, &an, a, tol)?;
                let res = crosscheck_pullback(&m, &an, &pat, ([1.0, 0.0], [0.0, 1.0]), step)?;
                let bcheck = predicted_b_derivative_check(&m, &an, &pat, [1.0, 0.0], step)?;
                rows.push(format!(
                    "  {{\"A\": [{}, {}], \"step\": {}, \"viaPenner\": {}, \"viaHolonomy\": {}, \"relerr\": {}, \"b_relerr\": {}}}",
                    fmt_f64(a[0]),
                    fmt_f64(a[1]),
                    fmt_f64(step),
                    fmt_f64(res.via_penner),
                    fmt_f64(res.via_holonomy),
                    fmt_f64(res.relerr),
                    fmt_f64(bcheck)
                ));
            }
            emit(&out, &format!("[\n{}\n]\n", rows.join(",\n")))
        }
        Cmd::TriExample { mesh, tol, out } => {
            let (m, an) = load_mesh(&mesh)?;
            let t = parse_theta(&mesh.theta)?;
            let (alpha, beta) = euclidean_point(&m, &an, tol)?;
            let (mat, det) = euclidean_pullback(&m, &an)?;
            let pat = CirclePattern::solve(&m, &an, [0.0, 0.0], tol)?;
            let ht = h_tau(pat.tau)?;
            let hp = ht * Vector2::new(1.0, 0.0);
            let text = format!(
                "{{\n  \"theta\": [{}, {}, {}],\n  \"alpha\": {},\n  \"beta\": {},\n  \"tau\": [{}, {}],\n  \"pullback\": [[{}, {}], [{}, {}]],\n  \"det\": {},\n  \"omega_check\": {}\n}}\n",
                fmt_f64(t[0]),
                fmt_f64(t[1]),
                fmt_f64(t[2]),
                fmt_f64(alpha),
                fmt_f64(beta),
                fmt_f64(pat.tau.re),
                fmt_f64(pat.tau.im),
                fmt_f64(mat[(0, 0)]),
                fmt_f64(mat[(0, 1)]),
                fmt_f64(mat[(1, 0)]),
                fmt_f64(mat[(1, 1)]),
                fmt_f64(det),
                fmt_f64(omega([1.0, 0.0], [hp[0], hp[1]])),
            );
            emit(&out, &text)
        }
    }
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {}", e);
        std::process::exit(e.exit_code());
    }
}
