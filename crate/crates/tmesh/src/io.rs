//! Text formats: meshes, refinement scripts, vector files, and reports.
//!
//! All rationals are printed as `num/den` (or a bare integer) and parsed back
//! bit-exact; no decimal conversion ever happens. Serialization is
//! deterministic, so identical inputs produce identical documents.

use crate::basis::BasisFn;
use crate::coord::{format_coord, parse_coord, Coord};
use crate::dimension::DimensionReport;
use crate::extension::Pairing;
use crate::hierarchy::{Address, HierSpec};
use crate::mesh::{build_tmesh, Orientation, Segment, TMesh};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("{0}")]
    Semantic(String),
}

fn syntax(line: usize, msg: impl Into<String>) -> IoError {
    IoError::Syntax {
        line,
        msg: msg.into(),
    }
}

/// A parsed document: either a ready mesh or a refinement script.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum Document {
    Mesh {
        mesh: TMesh,
        m: u32,
        n: u32,
        pairing: Pairing,
    },
    Spec(HierSpec),
}

const MESH_HEADER: &str = "tmesh mesh v1";
const SPEC_HEADER: &str = "tmesh hierspec v1";
const VECTORS_HEADER: &str = "tmesh vectors v1";
const REPORT_HEADER: &str = "tmesh dim-report v1";

/// Serializes a mesh with its self-describing degree and pairing header.
pub fn serialize_mesh(mesh: &TMesh, m: u32, n: u32, pairing: Pairing) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MESH_HEADER}");
    let _ = writeln!(out, "m {m}");
    let _ = writeln!(out, "n {n}");
    let _ = writeln!(out, "pairing {}", pairing.name());
    let _ = writeln!(out, "extended {}", mesh.was_extended);
    for seg in mesh.segments() {
        let o = match seg.orientation {
            Orientation::Horizontal => "h",
            Orientation::Vertical => "v",
        };
        let level = seg
            .level
            .map(|l| l.to_string())
            .unwrap_or_else(|| "-".to_string());
        let _ = writeln!(
            out,
            "segment {o} {} {} {} {level}",
            format_coord(&seg.fixed),
            format_coord(&seg.lo),
            format_coord(&seg.hi),
        );
    }
    out
}

/// Serializes a refinement script.
pub fn serialize_hierspec(spec: &HierSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{SPEC_HEADER}");
    let _ = writeln!(out, "m {}", spec.m);
    let _ = writeln!(out, "n {}", spec.n);
    let _ = writeln!(out, "p {}", spec.p);
    let _ = writeln!(out, "q {}", spec.q);
    if let Some(xs) = &spec.x_coords {
        let list: Vec<String> = xs.iter().map(format_coord).collect();
        let _ = writeln!(out, "xcoords {}", list.join(" "));
    }
    if let Some(ys) = &spec.y_coords {
        let list: Vec<String> = ys.iter().map(format_coord).collect();
        let _ = writeln!(out, "ycoords {}", list.join(" "));
    }
    for (level, addresses) in spec.script.iter().enumerate() {
        let _ = writeln!(out, "level {level}");
        for a in addresses {
            let _ = writeln!(out, "subdivide {}", crate::hierarchy::format_address(a));
        }
    }
    out
}

fn parse_address(text: &str, line: usize) -> Result<Address, IoError> {
    let mut address = Vec::new();
    for part in text.split('/') {
        let (c, r) = part
            .split_once(',')
            .ok_or_else(|| syntax(line, format!("bad address component `{part}`")))?;
        let c = c
            .trim()
            .parse()
            .map_err(|_| syntax(line, format!("bad column in `{part}`")))?;
        let r = r
            .trim()
            .parse()
            .map_err(|_| syntax(line, format!("bad row in `{part}`")))?;
        address.push((c, r));
    }
    Ok(address)
}

struct Lines<'a> {
    items: Vec<(usize, Vec<&'a str>)>,
}

fn tokenize(doc: &str) -> Lines<'_> {
    let items = doc
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("")))
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i, l.split_whitespace().collect()))
        .collect();
    Lines { items }
}

fn coord_field(tokens: &[&str], idx: usize, line: usize) -> Result<Coord, IoError> {
    let raw = tokens
        .get(idx)
        .ok_or_else(|| syntax(line, "missing coordinate field"))?;
    parse_coord(raw).map_err(|e| syntax(line, e.to_string()))
}

fn int_field<T: std::str::FromStr>(tokens: &[&str], idx: usize, line: usize) -> Result<T, IoError> {
    tokens
        .get(idx)
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| syntax(line, "missing or invalid integer field"))
}

/// Parses a mesh or script document, determined by its header line.
pub fn parse_document(doc: &str) -> Result<Document, IoError> {
    let first = doc.lines().next().unwrap_or("").trim();
    match first {
        _ if first == MESH_HEADER => parse_mesh_document(doc),
        _ if first == SPEC_HEADER => Ok(Document::Spec(parse_hierspec_document(doc)?)),
        _ => Err(syntax(
            1,
            format!("unknown document header `{first}`; expected `{MESH_HEADER}` or `{SPEC_HEADER}`"),
        )),
    }
}

fn parse_mesh_document(doc: &str) -> Result<Document, IoError> {
    let lines = tokenize(doc);
    let mut m = None;
    let mut n = None;
    let mut pairing = Pairing::Algebraic;
    let mut extended = false;
    let mut segments: Vec<Segment> = Vec::new();
    for (lineno, tokens) in lines.items.iter().skip(1) {
        match tokens[0] {
            "m" => m = Some(int_field(tokens, 1, *lineno)?),
            "n" => n = Some(int_field(tokens, 1, *lineno)?),
            "pairing" => {
                let raw = tokens
                    .get(1)
                    .ok_or_else(|| syntax(*lineno, "missing pairing"))?;
                pairing = Pairing::parse(raw)
                    .ok_or_else(|| syntax(*lineno, format!("unknown pairing `{raw}`")))?;
            }
            "extended" => {
                extended = tokens.get(1) == Some(&"true");
            }
            "segment" => {
                let orientation = match tokens.get(1) {
                    Some(&"h") => Orientation::Horizontal,
                    Some(&"v") => Orientation::Vertical,
                    other => {
                        return Err(syntax(
                            *lineno,
                            format!("bad orientation `{}`", other.copied().unwrap_or("")),
                        ))
                    }
                };
                let fixed = coord_field(tokens, 2, *lineno)?;
                let lo = coord_field(tokens, 3, *lineno)?;
                let hi = coord_field(tokens, 4, *lineno)?;
                let level = match tokens.get(5) {
                    None | Some(&"-") => None,
                    Some(raw) => Some(
                        raw.parse()
                            .map_err(|_| syntax(*lineno, format!("bad level `{raw}`")))?,
                    ),
                };
                segments.push(Segment {
                    orientation,
                    fixed,
                    lo,
                    hi,
                    level,
                });
            }
            other => return Err(syntax(*lineno, format!("unknown directive `{other}`"))),
        }
    }
    let m = m.ok_or_else(|| IoError::Semantic("mesh document missing `m`".into()))?;
    let n = n.ok_or_else(|| IoError::Semantic("mesh document missing `n`".into()))?;
    let mut mesh = build_tmesh(&segments).map_err(|e| IoError::Semantic(e.to_string()))?;
    mesh.was_extended = extended;
    Ok(Document::Mesh {
        mesh,
        m,
        n,
        pairing,
    })
}

fn parse_hierspec_document(doc: &str) -> Result<HierSpec, IoError> {
    let lines = tokenize(doc);
    let mut m = None;
    let mut n = None;
    let mut p = None;
    let mut q = None;
    let mut x_coords = None;
    let mut y_coords = None;
    let mut script: Vec<Vec<Address>> = Vec::new();
    let mut current_level: Option<usize> = None;
    for (lineno, tokens) in lines.items.iter().skip(1) {
        match tokens[0] {
            "m" => m = Some(int_field(tokens, 1, *lineno)?),
            "n" => n = Some(int_field(tokens, 1, *lineno)?),
            "p" => p = Some(int_field(tokens, 1, *lineno)?),
            "q" => q = Some(int_field(tokens, 1, *lineno)?),
            "xcoords" | "ycoords" => {
                let coords: Result<Vec<Coord>, IoError> = tokens[1..]
                    .iter()
                    .map(|t| parse_coord(t).map_err(|e| syntax(*lineno, e.to_string())))
                    .collect();
                if tokens[0] == "xcoords" {
                    x_coords = Some(coords?);
                } else {
                    y_coords = Some(coords?);
                }
            }
            "level" => {
                let level: usize = int_field(tokens, 1, *lineno)?;
                if level != script.len() {
                    return Err(syntax(
                        *lineno,
                        format!("expected `level {}`, got `level {level}`", script.len()),
                    ));
                }
                script.push(Vec::new());
                current_level = Some(level);
            }
            "subdivide" => {
                let level = current_level
                    .ok_or_else(|| syntax(*lineno, "`subdivide` before any `level`"))?;
                let raw = tokens
                    .get(1)
                    .ok_or_else(|| syntax(*lineno, "missing address"))?;
                let address = parse_address(raw, *lineno)?;
                if address.len() != level + 1 {
                    return Err(IoError::Semantic(format!(
                        "address `{raw}` has depth {} but appears under level {level}",
                        address.len() - 1
                    )));
                }
                script[level].push(address);
            }
            other => return Err(syntax(*lineno, format!("unknown directive `{other}`"))),
        }
    }
    let m = m.ok_or_else(|| IoError::Semantic("script missing `m`".into()))?;
    let n = n.ok_or_else(|| IoError::Semantic("script missing `n`".into()))?;
    let p = p.ok_or_else(|| IoError::Semantic("script missing `p`".into()))?;
    let q = q.ok_or_else(|| IoError::Semantic("script missing `q`".into()))?;
    Ok(HierSpec {
        m,
        n,
        p,
        q,
        x_coords,
        y_coords,
        script,
    })
}

/// One basis function's sparse entries, keyed by vertex coordinates so the
/// file stands alone.
#[derive(Debug, Clone)]
pub struct VectorRecord {
    pub level: u32,
    pub window: usize,
    pub same_level_crossings: u32,
    pub corrected: bool,
    pub entries: Vec<(Coord, Coord, Coord)>,
}

#[derive(Debug, Clone)]
pub struct VectorsFile {
    pub m: u32,
    pub n: u32,
    pub records: Vec<VectorRecord>,
}

pub fn serialize_vectors(fns: &[BasisFn], mesh: &TMesh, m: u32, n: u32) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{VECTORS_HEADER}");
    let _ = writeln!(out, "m {m}");
    let _ = writeln!(out, "n {n}");
    let _ = writeln!(out, "count {}", fns.len());
    for f in fns {
        let _ = writeln!(
            out,
            "fn level {} window {} alpha {} correction {}",
            f.provenance.level,
            f.provenance.window_index,
            f.provenance.same_level_crossings,
            if f.provenance.correction.is_some() {
                "yes"
            } else {
                "no"
            }
        );
        for (vid, k) in &f.spline.cv.entries {
            let v = mesh.vertex(*vid);
            let _ = writeln!(
                out,
                "v {} {} {}",
                format_coord(&v.x),
                format_coord(&v.y),
                format_coord(k)
            );
        }
    }
    out
}

pub fn parse_vectors(doc: &str) -> Result<VectorsFile, IoError> {
    let first = doc.lines().next().unwrap_or("").trim();
    if first != VECTORS_HEADER {
        return Err(syntax(1, format!("expected `{VECTORS_HEADER}`")));
    }
    let lines = tokenize(doc);
    let mut m = None;
    let mut n = None;
    let mut count: Option<usize> = None;
    let mut records: Vec<VectorRecord> = Vec::new();
    for (lineno, tokens) in lines.items.iter().skip(1) {
        match tokens[0] {
            "m" => m = Some(int_field(tokens, 1, *lineno)?),
            "n" => n = Some(int_field(tokens, 1, *lineno)?),
            "count" => count = Some(int_field(tokens, 1, *lineno)?),
            "fn" => {
                // fn level <l> window <w> alpha <a> correction <yes|no>
                let level = int_field(tokens, 2, *lineno)?;
                let window = int_field(tokens, 4, *lineno)?;
                let alpha = int_field(tokens, 6, *lineno)?;
                let corrected = tokens.get(8) == Some(&"yes");
                records.push(VectorRecord {
                    level,
                    window,
                    same_level_crossings: alpha,
                    corrected,
                    entries: Vec::new(),
                });
            }
            "v" => {
                let x = coord_field(tokens, 1, *lineno)?;
                let y = coord_field(tokens, 2, *lineno)?;
                let k = coord_field(tokens, 3, *lineno)?;
                records
                    .last_mut()
                    .ok_or_else(|| syntax(*lineno, "`v` before any `fn`"))?
                    .entries
                    .push((x, y, k));
            }
            other => return Err(syntax(*lineno, format!("unknown directive `{other}`"))),
        }
    }
    let m = m.ok_or_else(|| IoError::Semantic("vectors missing `m`".into()))?;
    let n = n.ok_or_else(|| IoError::Semantic("vectors missing `n`".into()))?;
    if let Some(c) = count {
        if c != records.len() {
            return Err(IoError::Semantic(format!(
                "count {c} does not match {} records",
                records.len()
            )));
        }
    }
    Ok(VectorsFile { m, n, records })
}

/// Machine-readable dimension report. Deterministic; timings never appear
/// here (the CLI prints them to stderr).
pub fn format_dimension_report(report: &DimensionReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{REPORT_HEADER}");
    let _ = writeln!(out, "m {}", report.m);
    let _ = writeln!(out, "n {}", report.n);
    let _ = writeln!(out, "pairing {}", report.pairing.name());
    let _ = writeln!(out, "crossing-vertices {}", report.census.crossing_vertices);
    let _ = writeln!(
        out,
        "interior-horizontal-ledges {}",
        report.census.horizontal_ledges
    );
    let _ = writeln!(
        out,
        "interior-vertical-ledges {}",
        report.census.vertical_ledges
    );
    let _ = writeln!(out, "isolated-subdomains {}", report.census.isolated_total);
    let per_level: Vec<String> = report
        .census
        .isolated_per_level
        .iter()
        .map(|c| c.to_string())
        .collect();
    let _ = writeln!(out, "isolated-per-level {}", per_level.join(" "));
    let opt = |v: Option<String>| v.unwrap_or_else(|| "-".to_string());
    let _ = writeln!(out, "formula {}", opt(report.formula.map(|v| v.to_string())));
    let _ = writeln!(
        out,
        "conformality-dim {}",
        opt(report.conformality_rank_dim.map(|v| v.to_string()))
    );
    let _ = writeln!(
        out,
        "cellwise-dim {}",
        opt(report.cellwise_dim.map(|v| v.to_string()))
    );
    let _ = writeln!(out, "agreement {}", report.agree);
    out
}
