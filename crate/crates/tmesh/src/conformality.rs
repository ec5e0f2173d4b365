//! Conformality vector spaces.
//!
//! Every l-edge of a mesh imposes a homogeneous moment system on the
//! per-vertex factors along it: for a horizontal l-edge with vertices at
//! x_1 < ... < x_r and degree m, the sums `sum k_i x_i^j` vanish for
//! j = 0..m (degree n over y for vertical l-edges). The vectors satisfying
//! the systems of all l-edges simultaneously form the conformality vector
//! space; it is isomorphic to the spline space with homogeneous boundary
//! conditions, which is what makes exact rank computation a dimension
//! oracle. The isomorphism is realized concretely here: a conformality
//! vector evaluates as a truncated-power sum, and the per-vertex factor can
//! be recovered from the four surrounding polynomial pieces.

use crate::coord::{format_coord, Coord};
use crate::linalg::{normalize_to_integers, SparseIntMatrix};
use crate::mesh::{LEdge, LEdgeId, Orientation, TMesh, VertexId, VertexKind};
use crate::poly::{Poly1, Poly2};
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConformalityError {
    #[error("knots must be strictly increasing without repeats")]
    DegenerateKnots,
    #[error("expected {expected} knots for degree {degree}, got {got}")]
    WrongKnotCount {
        degree: u32,
        expected: usize,
        got: usize,
    },
    #[error("no mesh vertex at ({x}, {y})")]
    MissingGridVertex { x: String, y: String },
    #[error("vector violates the moment system of l-edge {0:?}")]
    NotConformal(LEdgeId),
    #[error("vertex {0:?} is not an interior vertex")]
    NotInterior(VertexId),
}

/// One moment equation: originates from one l-edge and one exponent.
#[derive(Debug, Clone)]
pub struct MomentRow {
    pub ledge: LEdgeId,
    pub exponent: u32,
    pub entries: Vec<(VertexId, Coord)>,
}

/// Stacked homogeneous moment systems. Columns are an explicit vertex list
/// (an l-edge's own vertices, or every vertex of the mesh).
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub columns: Vec<VertexId>,
    pub rows: Vec<MomentRow>,
}

impl LinearSystem {
    fn column_index(&self) -> BTreeMap<VertexId, usize> {
        self.columns
            .iter()
            .enumerate()
            .map(|(i, v)| (*v, i))
            .collect()
    }

    pub fn to_sparse(&self) -> SparseIntMatrix {
        let index = self.column_index();
        let mut m = SparseIntMatrix::new(self.columns.len());
        for row in &self.rows {
            let entries: Vec<(usize, Coord)> = row
                .entries
                .iter()
                .map(|(v, c)| (index[v], c.clone()))
                .collect();
            m.push_rational_row(&entries);
        }
        m
    }
}

/// Moment rows of one l-edge: `sum k_i t_i^j = 0` for j = 0..degree, where
/// t_i runs over the varying coordinates of the edge's vertices.
pub fn ledge_system(mesh: &TMesh, edge: &LEdge, degree: u32) -> LinearSystem {
    let rows = moment_rows(mesh, edge, degree, false);
    LinearSystem {
        columns: edge.vertices.clone(),
        rows,
    }
}

fn moment_rows(mesh: &TMesh, edge: &LEdge, degree: u32, shifted: bool) -> Vec<MomentRow> {
    // The shifted assembly recenters the coordinates at the edge midpoint;
    // it spans the same row space, so ranks must agree with the raw one.
    let shift = if shifted {
        crate::coord::midpoint(&edge.lo, &edge.hi)
    } else {
        Coord::zero()
    };
    let ts: Vec<Coord> = edge
        .vertices
        .iter()
        .map(|vid| {
            let v = mesh.vertex(*vid);
            edge.varying(&v.x, &v.y).clone() - &shift
        })
        .collect();
    (0..=degree)
        .map(|j| {
            let entries = edge
                .vertices
                .iter()
                .zip(&ts)
                .map(|(vid, t)| {
                    let mut p = Coord::one();
                    for _ in 0..j {
                        p *= t;
                    }
                    (*vid, p)
                })
                .collect();
            MomentRow {
                ledge: edge.id,
                exponent: j,
                entries,
            }
        })
        .collect()
}

/// Stacks the moment systems of all l-edges of the mesh, boundary ones
/// included: horizontal edges with degree m over x, vertical with degree n
/// over y. One column per mesh vertex.
pub fn assemble_w(mesh: &TMesh, m: u32, n: u32) -> LinearSystem {
    assemble_w_inner(mesh, m, n, false)
}

/// Shifted-monomial variant of [`assemble_w`]; same ranks by construction.
pub fn assemble_w_shifted(mesh: &TMesh, m: u32, n: u32) -> LinearSystem {
    assemble_w_inner(mesh, m, n, true)
}

fn assemble_w_inner(mesh: &TMesh, m: u32, n: u32, shifted: bool) -> LinearSystem {
    let mut rows = Vec::new();
    for edge in &mesh.ledges {
        let degree = match edge.orientation {
            Orientation::Horizontal => m,
            Orientation::Vertical => n,
        };
        rows.extend(moment_rows(mesh, edge, degree, shifted));
    }
    LinearSystem {
        columns: mesh.vertices.iter().map(|v| v.id).collect(),
        rows,
    }
}

/// Nullity of the system: #columns - rank, in exact arithmetic.
pub fn nullspace_dim(system: &LinearSystem) -> usize {
    system.columns.len() - system.to_sparse().rank()
}

/// Deterministic exact basis of the nullspace, one conformality vector per
/// free column in the reduced echelon pivot convention.
pub fn nullspace_basis(system: &LinearSystem, m: u32, n: u32) -> Vec<ConformalityVector> {
    system
        .to_sparse()
        .echelon()
        .nullspace_basis()
        .into_iter()
        .map(|dense| {
            let entries = system
                .columns
                .iter()
                .zip(&dense)
                .filter(|(_, c)| !c.is_zero())
                .map(|(v, c)| (*v, c.clone()))
                .collect();
            ConformalityVector { entries, m, n }
        })
        .collect()
}

/// Per-vertex factors of a spline, sparse over the mesh vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConformalityVector {
    pub entries: BTreeMap<VertexId, Coord>,
    pub m: u32,
    pub n: u32,
}

impl ConformalityVector {
    pub fn zero(m: u32, n: u32) -> Self {
        ConformalityVector {
            entries: BTreeMap::new(),
            m,
            n,
        }
    }

    pub fn factor(&self, v: VertexId) -> Coord {
        self.entries.get(&v).cloned().unwrap_or_else(Coord::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.values().all(|c| c.is_zero())
    }

    /// Exact membership test: every moment equation of every l-edge of the
    /// mesh evaluates to zero. Returns the first violated l-edge.
    pub fn conformality_violation(&self, mesh: &TMesh) -> Option<LEdgeId> {
        for edge in &mesh.ledges {
            let degree = match edge.orientation {
                Orientation::Horizontal => self.m,
                Orientation::Vertical => self.n,
            };
            let pairs: Vec<(Coord, Coord)> = edge
                .vertices
                .iter()
                .filter_map(|vid| {
                    self.entries.get(vid).map(|k| {
                        let v = mesh.vertex(*vid);
                        (edge.varying(&v.x, &v.y).clone(), k.clone())
                    })
                })
                .collect();
            if pairs.is_empty() {
                continue;
            }
            for j in 0..=degree {
                let mut acc = Coord::zero();
                for (t, k) in &pairs {
                    let mut p = k.clone();
                    for _ in 0..j {
                        p *= t;
                    }
                    acc += p;
                }
                if !acc.is_zero() {
                    return Some(edge.id);
                }
            }
        }
        None
    }

    pub fn is_conformal(&self, mesh: &TMesh) -> bool {
        self.conformality_violation(mesh).is_none()
    }

    /// The jump polynomial `sum k_i (t - t_i)^d` of one l-edge; identically
    /// zero exactly when the vector is conformal along that edge.
    pub fn closure_poly(&self, mesh: &TMesh, edge: &LEdge) -> Poly1 {
        let degree = match edge.orientation {
            Orientation::Horizontal => self.m,
            Orientation::Vertical => self.n,
        };
        let mut acc = Poly1::zero();
        for vid in &edge.vertices {
            if let Some(k) = self.entries.get(vid) {
                let v = mesh.vertex(*vid);
                let t = edge.varying(&v.x, &v.y);
                acc = acc.add(&Poly1::shifted_power(t, degree).scale(k));
            }
        }
        acc
    }
}

/// Conformality vector of the B-spline over `degree + 2` strictly increasing
/// knots: the one-dimensional nullspace of the knot moment system, scaled to
/// the minimal integer vector with positive first entry. Signs alternate
/// strictly.
pub fn bspline_conformality(knots: &[Coord], degree: u32) -> Result<Vec<Coord>, ConformalityError> {
    let expected = degree as usize + 2;
    if knots.len() != expected {
        return Err(ConformalityError::WrongKnotCount {
            degree,
            expected,
            got: knots.len(),
        });
    }
    if knots.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ConformalityError::DegenerateKnots);
    }
    // k_i = 1 / prod_{j != i} (t_i - t_j) annihilates all powers t^j, j <= degree.
    let mut raw = Vec::with_capacity(knots.len());
    for (i, ti) in knots.iter().enumerate() {
        let mut denom = Coord::one();
        for (j, tj) in knots.iter().enumerate() {
            if i != j {
                denom *= ti - tj;
            }
        }
        raw.push(denom.recip());
    }
    Ok(normalize_to_integers(raw))
}

/// Outer product of two window vectors laid onto the knot-grid vertices.
pub fn tensor_conformality(
    mesh: &TMesh,
    xknots: &[Coord],
    yknots: &[Coord],
    kx: &[Coord],
    ky: &[Coord],
    m: u32,
    n: u32,
) -> Result<ConformalityVector, ConformalityError> {
    assert_eq!(xknots.len(), kx.len());
    assert_eq!(yknots.len(), ky.len());
    let mut entries = BTreeMap::new();
    for (x, kxv) in xknots.iter().zip(kx) {
        for (y, kyv) in yknots.iter().zip(ky) {
            let k = kxv * kyv;
            if k.is_zero() {
                continue;
            }
            let vid =
                mesh.vertex_at(x, y)
                    .ok_or_else(|| ConformalityError::MissingGridVertex {
                        x: format_coord(x),
                        y: format_coord(y),
                    })?;
            entries.insert(vid, k);
        }
    }
    Ok(ConformalityVector { entries, m, n })
}

/// A spline represented by its conformality vector; evaluation is the
/// truncated-power sum over the vector's support.
#[derive(Debug, Clone)]
pub struct SplineFn {
    pub cv: ConformalityVector,
}

impl SplineFn {
    pub fn new(cv: ConformalityVector) -> Self {
        SplineFn { cv }
    }
}

fn truncated_power(t: &Coord, base: &Coord, d: u32) -> Coord {
    if t <= base {
        return Coord::zero();
    }
    let diff = t - base;
    let mut p = Coord::one();
    for _ in 0..d {
        p *= &diff;
    }
    p
}

/// Exact evaluation of the truncated-power sum at a point.
pub fn eval_spline(f: &SplineFn, mesh: &TMesh, x: &Coord, y: &Coord) -> Coord {
    let mut acc = Coord::zero();
    for (vid, k) in &f.cv.entries {
        let v = mesh.vertex(*vid);
        let px = truncated_power(x, &v.x, f.cv.m);
        if px.is_zero() {
            continue;
        }
        let py = truncated_power(y, &v.y, f.cv.n);
        if py.is_zero() {
            continue;
        }
        acc += k * px * py;
    }
    acc
}

/// Evaluation with an exact membership check first.
pub fn eval_spline_checked(
    f: &SplineFn,
    mesh: &TMesh,
    x: &Coord,
    y: &Coord,
) -> Result<Coord, ConformalityError> {
    if let Some(edge) = f.cv.conformality_violation(mesh) {
        return Err(ConformalityError::NotConformal(edge));
    }
    Ok(eval_spline(f, mesh, x, y))
}

/// The spline restricted to every cell, as exact bidegree-(m, n) polynomials,
/// plus the polynomial of the unbounded region beyond the top-right corner
/// (identically zero exactly when the boundary conditions hold).
#[derive(Debug, Clone)]
pub struct PiecewisePolys {
    pub per_cell: Vec<Poly2>,
    pub outer: Poly2,
}

pub fn piecewise_polynomials(
    f: &SplineFn,
    mesh: &TMesh,
    check: bool,
) -> Result<PiecewisePolys, ConformalityError> {
    if check {
        if let Some(edge) = f.cv.conformality_violation(mesh) {
            return Err(ConformalityError::NotConformal(edge));
        }
    }
    // Expanded truncated-power terms, reused across cells.
    let terms: Vec<(VertexId, Poly2)> = f
        .cv
        .entries
        .iter()
        .map(|(vid, k)| {
            let v = mesh.vertex(*vid);
            let px = Poly1::shifted_power(&v.x, f.cv.m);
            let py = Poly1::shifted_power(&v.y, f.cv.n);
            (*vid, Poly2::separable(&px, &py).scale(k))
        })
        .collect();
    let mut per_cell = Vec::with_capacity(mesh.cells.len());
    for cell in &mesh.cells {
        let mut acc = Poly2::zero();
        for (vid, term) in &terms {
            let v = mesh.vertex(*vid);
            if v.x <= cell.x0 && v.y <= cell.y0 {
                acc = acc.add(term);
            }
        }
        per_cell.push(acc);
    }
    let mut outer = Poly2::zero();
    for (_, term) in &terms {
        outer = outer.add(term);
    }
    Ok(PiecewisePolys { per_cell, outer })
}

/// Smoothing cofactors and the vertex factor recovered from the four
/// polynomial pieces around an interior vertex.
#[derive(Debug, Clone)]
pub struct CofactorTriple {
    /// Cofactor across the vertical edge, a polynomial in y of degree <= n.
    pub a: Poly1,
    /// Cofactor across the horizontal edge, a polynomial in x of degree <= m.
    pub b: Poly1,
    /// Mixed-jump factor at the vertex.
    pub k: Coord,
}

/// Recovers the cofactor triple at an interior vertex from the spline's
/// surrounding polynomial pieces; merged regions come out naturally from the
/// quadrant cell lookup. The recovered k equals the conformality factor.
pub fn extract_cofactors(
    f: &SplineFn,
    mesh: &TMesh,
    vertex: VertexId,
) -> Result<CofactorTriple, ConformalityError> {
    let polys = piecewise_polynomials(f, mesh, false)?;
    extract_cofactors_from(&polys, mesh, f.cv.m, f.cv.n, vertex)
}

/// Cofactor extraction against precomputed per-cell polynomials.
pub fn extract_cofactors_from(
    polys: &PiecewisePolys,
    mesh: &TMesh,
    m: u32,
    n: u32,
    vertex: VertexId,
) -> Result<CofactorTriple, ConformalityError> {
    let v = mesh.vertex(vertex);
    if v.kind == VertexKind::Boundary {
        return Err(ConformalityError::NotInterior(vertex));
    }
    let quadrant = |right: bool, up: bool| -> Option<&Poly2> {
        mesh.cells
            .iter()
            .position(|c| {
                let x_ok = if right {
                    c.x0 <= v.x && v.x < c.x1
                } else {
                    c.x0 < v.x && v.x <= c.x1
                };
                let y_ok = if up {
                    c.y0 <= v.y && v.y < c.y1
                } else {
                    c.y0 < v.y && v.y <= c.y1
                };
                x_ok && y_ok
            })
            .map(|i| &polys.per_cell[i])
    };
    let f1 = quadrant(false, true).ok_or(ConformalityError::NotInterior(vertex))?;
    let f2 = quadrant(false, false).ok_or(ConformalityError::NotInterior(vertex))?;
    let f3 = quadrant(true, false).ok_or(ConformalityError::NotInterior(vertex))?;
    let f4 = quadrant(true, true).ok_or(ConformalityError::NotInterior(vertex))?;

    let (m, n) = (m as usize, n as usize);
    // a(y): coefficient of (x - x0)^m in f3 - f2.
    let a = f3
        .sub(f2)
        .expand_around_x(&v.x)
        .into_iter()
        .nth(m)
        .unwrap_or_else(Poly1::zero);
    // b(x): coefficient of (y - y0)^n in f1 - f2.
    let b = f1
        .sub(f2)
        .transpose()
        .expand_around_x(&v.y)
        .into_iter()
        .nth(n)
        .unwrap_or_else(Poly1::zero);
    // k: coefficient of (x - x0)^m (y - y0)^n in f2 + f4 - f1 - f3.
    let mixed = f2.add(f4).sub(f1).sub(f3);
    let k = mixed
        .expand_around_x(&v.x)
        .into_iter()
        .nth(m)
        .unwrap_or_else(Poly1::zero)
        .expand_around(&v.y)
        .into_iter()
        .nth(n)
        .unwrap_or_else(Coord::zero);
    Ok(CofactorTriple { a, b, k })
}
