//! Command-line interface: generate, extend, measure, and render meshes,
//! emit basis vectors, and validate files.
//!
//! Exit codes: 0 when every requested check passes, 1 when computed paths
//! disagree or verification fails, 2 on input errors.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;
use tmesh::basis::{construct_basis, order_ledges, verify_basis, TieBreak};
use tmesh::conformality::ConformalityVector;
use tmesh::coord::{format_coord, parse_coord, Coord};
use tmesh::dimension::{census, dim_cellwise_oracle, dim_formula, DimensionReport};
use tmesh::extension::{extend, ExtendedMesh, Pairing, Placement};
use tmesh::hierarchy::{generate, GeneratedMesh};
use tmesh::io::{
    format_dimension_report, parse_document, parse_vectors, serialize_mesh, serialize_vectors,
    Document,
};
use tmesh::mesh::TMesh;
use tmesh::render::{render_svg, RenderOptions};

#[derive(Parser)]
#[command(
    name = "tmesh",
    about = "Hierarchical T-mesh spline spaces: dimension counts, rank oracles, and basis assembly in exact rational arithmetic"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a mesh file from a refinement script.
    Gen {
        /// Script file.
        input: PathBuf,
        /// Output mesh file (stdout when absent).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Extend a mesh (or a script's mesh) for its degrees.
    Extend {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Which boundary lines get m copies: `algebraic` or `literal`.
        #[arg(long, default_value = "algebraic")]
        extension_pairing: String,
        /// Uniform copy spacing (rational); smallest cell side when absent.
        #[arg(long)]
        spacing: Option<String>,
    },
    /// Dimension report: closed form and both exact rank oracles.
    Dim {
        input: PathBuf,
        /// Only evaluate the closed-form count (needs a script input).
        #[arg(long)]
        formula_only: bool,
        /// Only run the two rank oracles.
        #[arg(long)]
        oracle_only: bool,
        #[arg(long, default_value = "algebraic")]
        extension_pairing: String,
        #[arg(long)]
        spacing: Option<String>,
    },
    /// Construct basis vectors on the extended mesh and verify them.
    Basis {
        /// Script file (basis construction needs refinement provenance).
        input: PathBuf,
        /// Vectors file to write.
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value = "algebraic")]
        extension_pairing: String,
    },
    /// Evaluate the functions of a vectors file at rational points.
    Eval {
        /// Vectors file produced by `basis`.
        #[arg(long)]
        vectors: PathBuf,
        /// Evaluation points `x,y`; repeatable.
        #[arg(long = "at", required = true)]
        points: Vec<String>,
    },
    /// Validate a mesh or script file, and optionally basis vectors on it.
    Check {
        input: PathBuf,
        /// Vectors file whose entries must be conformal on the extended mesh.
        #[arg(long)]
        vectors: Option<PathBuf>,
        #[arg(long, default_value = "algebraic")]
        extension_pairing: String,
    },
    /// Render a mesh to SVG.
    Render {
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Stroke color per refinement level.
        #[arg(long)]
        color_by_level: bool,
        /// Label each interior l-edge with its removal order index.
        #[arg(long)]
        order_labels: bool,
        /// Render the extended mesh instead of the base mesh.
        #[arg(long)]
        extend: bool,
        #[arg(long, default_value = "algebraic")]
        extension_pairing: String,
        /// Vectors file for support highlighting.
        #[arg(long)]
        vectors: Option<PathBuf>,
        /// Highlight the support rectangle of this function (index into the
        /// vectors file); repeatable. Requires --vectors.
        #[arg(long = "highlight-fn")]
        highlight_fn: Vec<usize>,
    },
}

/// Errors that map to exit code 2.
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

enum Outcome {
    Pass,
    Fail,
}

fn read_input(path: &PathBuf) -> Result<String, InputError> {
    std::fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn write_output(path: &Option<PathBuf>, content: &str) -> Result<(), InputError> {
    match path {
        Some(p) => {
            std::fs::write(p, content).map_err(|e| InputError(format!("{}: {e}", p.display())))?
        }
        None => print!("{content}"),
    }
    Ok(())
}

fn parse_pairing(raw: &str) -> Result<Pairing, InputError> {
    Pairing::parse(raw).ok_or_else(|| {
        InputError(format!(
            "unknown pairing `{raw}`; expected `algebraic` or `literal`"
        ))
    })
}

fn placement_from_spacing(
    mesh: &TMesh,
    m: u32,
    n: u32,
    pairing: Pairing,
    spacing: &Option<String>,
) -> Result<Option<Placement>, InputError> {
    let Some(raw) = spacing else {
        return Ok(None);
    };
    let step = parse_coord(raw)?;
    if step <= Coord::from_integer(0.into()) {
        return Err(InputError("spacing must be positive".into()));
    }
    let unit = Placement::uniform(mesh, m, n, pairing);
    let rescale = |offs: &[Coord]| -> Vec<Coord> {
        (1..=offs.len())
            .map(|i| &step * tmesh::coord::coord(i as i64))
            .collect()
    };
    Ok(Some(Placement {
        left: rescale(&unit.left),
        right: rescale(&unit.right),
        bottom: rescale(&unit.bottom),
        top: rescale(&unit.top),
    }))
}

/// Input as either a generated mesh (with provenance) or a bare mesh.
enum Loaded {
    Generated(GeneratedMesh),
    Bare { mesh: TMesh, m: u32, n: u32 },
}

fn load(path: &PathBuf) -> Result<Loaded, InputError> {
    let text = read_input(path)?;
    match parse_document(&text)? {
        Document::Spec(spec) => Ok(Loaded::Generated(generate(&spec)?)),
        Document::Mesh { mesh, m, n, .. } => Ok(Loaded::Bare { mesh, m, n }),
    }
}

fn run() -> Result<Outcome, InputError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Gen { input, output } => {
            let text = read_input(&input)?;
            let Document::Spec(spec) = parse_document(&text)? else {
                return Err(InputError("`gen` needs a script input".into()));
            };
            let gen = generate(&spec)?;
            write_output(
                &output,
                &serialize_mesh(&gen.mesh, spec.m, spec.n, Pairing::Algebraic),
            )?;
            eprintln!(
                "generated mesh: {} vertices, {} cells",
                gen.mesh.vertices.len(),
                gen.mesh.cells.len()
            );
            Ok(Outcome::Pass)
        }
        Command::Extend {
            input,
            output,
            extension_pairing,
            spacing,
        } => {
            let pairing = parse_pairing(&extension_pairing)?;
            let (mesh, m, n) = match load(&input)? {
                Loaded::Generated(g) => (g.mesh, g.m, g.n),
                Loaded::Bare { mesh, m, n } => (mesh, m, n),
            };
            let placement = placement_from_spacing(&mesh, m, n, pairing, &spacing)?;
            let ext = extend(&mesh, m, n, pairing, placement.as_ref())?;
            if ext.double_extension {
                eprintln!("warning: input mesh was already an extension");
            }
            write_output(&output, &serialize_mesh(&ext.mesh, m, n, pairing))?;
            Ok(Outcome::Pass)
        }
        Command::Dim {
            input,
            formula_only,
            oracle_only,
            extension_pairing,
            spacing,
        } => {
            let pairing = parse_pairing(&extension_pairing)?;
            if formula_only && oracle_only {
                return Err(InputError(
                    "--formula-only and --oracle-only are mutually exclusive".into(),
                ));
            }
            let loaded = load(&input)?;
            let started = Instant::now();
            let (report, pass) = match &loaded {
                Loaded::Generated(gen) => {
                    let placement =
                        placement_from_spacing(&gen.mesh, gen.m, gen.n, pairing, &spacing)?;
                    let ext = extend(&gen.mesh, gen.m, gen.n, pairing, placement.as_ref())?;
                    let c = census(&ext, &gen.forest);
                    let formula = if oracle_only {
                        None
                    } else {
                        Some(dim_formula(&c, gen.m, gen.n)?)
                    };
                    let (conf, cell) = if formula_only {
                        (None, None)
                    } else {
                        let conf = tmesh::conformality::nullspace_dim(
                            &tmesh::conformality::assemble_w(&ext.mesh, gen.m, gen.n),
                        );
                        let cell = dim_cellwise_oracle(&gen.mesh, gen.m, gen.n, false);
                        (Some(conf), Some(cell))
                    };
                    let agree = if formula_only {
                        formula.is_some()
                    } else if oracle_only {
                        conf == cell
                    } else {
                        formula.map(|f| Some(f as usize)) == Some(conf) && conf == cell
                    };
                    (
                        DimensionReport {
                            m: gen.m,
                            n: gen.n,
                            pairing,
                            census: c,
                            formula,
                            conformality_rank_dim: conf,
                            cellwise_dim: cell,
                            agree,
                        },
                        agree,
                    )
                }
                Loaded::Bare { mesh, m, n } => {
                    if formula_only {
                        return Err(InputError(
                            "not-in-class: mesh has no refinement provenance; the closed form only applies to generated meshes".into(),
                        ));
                    }
                    let placement = placement_from_spacing(mesh, *m, *n, pairing, &spacing)?;
                    let ext = extend(mesh, *m, *n, pairing, placement.as_ref())?;
                    let c = census(&ext, &Default::default());
                    let conf = tmesh::conformality::nullspace_dim(
                        &tmesh::conformality::assemble_w(&ext.mesh, *m, *n),
                    );
                    let cell = dim_cellwise_oracle(mesh, *m, *n, false);
                    let agree = conf == cell;
                    (
                        DimensionReport {
                            m: *m,
                            n: *n,
                            pairing,
                            census: c,
                            formula: None,
                            conformality_rank_dim: Some(conf),
                            cellwise_dim: Some(cell),
                            agree,
                        },
                        agree,
                    )
                }
            };
            print!("{}", format_dimension_report(&report));
            eprintln!(
                "dim: formula {:?}, conformality {:?}, cellwise {:?}, agreement {} ({:.1?})",
                report.formula,
                report.conformality_rank_dim,
                report.cellwise_dim,
                report.agree,
                started.elapsed()
            );
            Ok(if pass { Outcome::Pass } else { Outcome::Fail })
        }
        Command::Basis {
            input,
            output,
            extension_pairing,
        } => {
            let pairing = parse_pairing(&extension_pairing)?;
            let Loaded::Generated(gen) = load(&input)? else {
                return Err(InputError(
                    "`basis` needs a script input with refinement provenance".into(),
                ));
            };
            let ext = extend(&gen.mesh, gen.m, gen.n, pairing, None)?;
            let fns = construct_basis(&ext, &gen)?;
            let c = census(&ext, &gen.forest);
            let expected = dim_formula(&c, gen.m, gen.n)? as usize;
            let report = verify_basis(&fns, &ext, expected, gen.m, gen.n);
            std::fs::write(&output, serialize_vectors(&fns, &ext.mesh, gen.m, gen.n))
                .map_err(|e| InputError(format!("{}: {e}", output.display())))?;
            println!("tmesh basis-report v1");
            println!("count {}", report.actual_count);
            println!("expected {}", report.expected_count);
            println!("count-ok {}", report.count_ok);
            println!("independent {}", report.independent);
            println!("conformal {}", report.all_conformal);
            println!("span-matches {}", report.span_matches);
            Ok(if report.all_ok() {
                Outcome::Pass
            } else {
                Outcome::Fail
            })
        }
        Command::Eval { vectors, points } => {
            let file = parse_vectors(&read_input(&vectors)?)?;
            let parsed: Vec<(Coord, Coord)> = points
                .iter()
                .map(|raw| -> Result<(Coord, Coord), InputError> {
                    let (x, y) = raw
                        .split_once(',')
                        .ok_or_else(|| InputError(format!("point `{raw}` is not `x,y`")))?;
                    Ok((parse_coord(x.trim())?, parse_coord(y.trim())?))
                })
                .collect::<Result<_, _>>()?;
            // Truncated powers need only the entry coordinates, not the mesh.
            for (i, rec) in file.records.iter().enumerate() {
                for (x, y) in &parsed {
                    let mut acc = Coord::from_integer(0.into());
                    for (vx, vy, k) in &rec.entries {
                        if x > vx && y > vy {
                            let mut px = Coord::from_integer(1.into());
                            for _ in 0..file.m {
                                px *= x - vx;
                            }
                            let mut py = Coord::from_integer(1.into());
                            for _ in 0..file.n {
                                py *= y - vy;
                            }
                            acc += k * px * py;
                        }
                    }
                    println!(
                        "fn {i} at {},{} = {}",
                        format_coord(x),
                        format_coord(y),
                        format_coord(&acc)
                    );
                }
            }
            Ok(Outcome::Pass)
        }
        Command::Check {
            input,
            vectors,
            extension_pairing,
        } => {
            let pairing = parse_pairing(&extension_pairing)?;
            let loaded = load(&input)?;
            let (base_mesh, m, n, ext): (&TMesh, u32, u32, Option<ExtendedMesh>) = match &loaded {
                Loaded::Generated(g) => {
                    let ext = extend(&g.mesh, g.m, g.n, pairing, None)?;
                    (&g.mesh, g.m, g.n, Some(ext))
                }
                Loaded::Bare { mesh, m, n } => (mesh, *m, *n, None),
            };
            println!(
                "mesh ok: {} vertices, {} cells",
                base_mesh.vertices.len(),
                base_mesh.cells.len()
            );
            let mut pass = true;
            if let Some(path) = vectors {
                let file = parse_vectors(&read_input(&path)?)?;
                if (file.m, file.n) != (m, n) {
                    return Err(InputError(format!(
                        "vectors are for degrees ({}, {}), mesh is ({m}, {n})",
                        file.m, file.n
                    )));
                }
                let target = match &ext {
                    Some(e) => &e.mesh,
                    None => base_mesh,
                };
                let mut conformal = 0usize;
                for (i, rec) in file.records.iter().enumerate() {
                    let mut entries = std::collections::BTreeMap::new();
                    for (x, y, k) in &rec.entries {
                        let Some(vid) = target.vertex_at(x, y) else {
                            return Err(InputError(format!(
                                "fn {i}: no vertex at ({}, {})",
                                format_coord(x),
                                format_coord(y)
                            )));
                        };
                        entries.insert(vid, k.clone());
                    }
                    let cv = ConformalityVector { entries, m, n };
                    if cv.is_conformal(target) {
                        conformal += 1;
                    } else {
                        pass = false;
                        println!("fn {i}: NOT conformal");
                    }
                }
                println!("conformal {conformal}/{}", file.records.len());
            }
            Ok(if pass { Outcome::Pass } else { Outcome::Fail })
        }
        Command::Render {
            input,
            output,
            color_by_level,
            order_labels,
            extend: do_extend,
            extension_pairing,
            vectors,
            highlight_fn,
        } => {
            let pairing = parse_pairing(&extension_pairing)?;
            let loaded = load(&input)?;
            let mut highlights = Vec::new();
            if !highlight_fn.is_empty() {
                let path = vectors.as_ref().ok_or_else(|| {
                    InputError("--highlight-fn requires --vectors".into())
                })?;
                let file = parse_vectors(&read_input(path)?)?;
                for index in &highlight_fn {
                    let rec = file.records.get(*index).ok_or_else(|| {
                        InputError(format!(
                            "function index {index} out of range ({} functions)",
                            file.records.len()
                        ))
                    })?;
                    let xs: Vec<&Coord> = rec.entries.iter().map(|(x, _, _)| x).collect();
                    let ys: Vec<&Coord> = rec.entries.iter().map(|(_, y, _)| y).collect();
                    if xs.is_empty() {
                        continue;
                    }
                    highlights.push(tmesh::mesh::Rect {
                        x0: (*xs.iter().min().expect("nonempty")).clone(),
                        x1: (*xs.iter().max().expect("nonempty")).clone(),
                        y0: (*ys.iter().min().expect("nonempty")).clone(),
                        y1: (*ys.iter().max().expect("nonempty")).clone(),
                    });
                }
            }
            let mut labels = Vec::new();
            let mesh: TMesh = match &loaded {
                Loaded::Generated(g) => {
                    if do_extend || order_labels {
                        let ext = extend(&g.mesh, g.m, g.n, pairing, None)?;
                        if order_labels {
                            let order =
                                order_ledges(&ext, &g.forest, g.m, g.n, TieBreak::Standard)?;
                            for (i, step) in order.steps.iter().enumerate() {
                                labels.push((step.ledge, format!("{}", i + 1)));
                            }
                        }
                        ext.mesh
                    } else {
                        g.mesh.clone()
                    }
                }
                Loaded::Bare { mesh, .. } => {
                    if order_labels {
                        return Err(InputError(
                            "--order-labels needs a script input with refinement provenance"
                                .into(),
                        ));
                    }
                    mesh.clone()
                }
            };
            let svg = render_svg(
                &mesh,
                &RenderOptions {
                    color_by_level,
                    labels,
                    highlights,
                    scale: None,
                },
            );
            write_output(&output, &svg)?;
            Ok(Outcome::Pass)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
