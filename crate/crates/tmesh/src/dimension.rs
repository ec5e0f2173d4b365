//! Spline space dimension: closed-form count and two independent oracles.
//!
//! For meshes generated by the hierarchical refinement scheme, the dimension
//! of the maximal-smoothness spline space equals
//!
//! ```text
//! (m-1)(n-1) + V - (m-1) E_h - (n-1) E_v + delta
//! ```
//!
//! where V counts crossing vertices of the extended mesh, E_h / E_v its
//! interior horizontal / vertical l-edges, and delta the isolated subdomains
//! over all levels. The count is verified against the conformality nullspace
//! rank on the extended mesh and against a cell-wise smoothness-constraint
//! rank computed directly on the unextended mesh. All three run in exact
//! arithmetic and must agree.

use crate::conformality::{assemble_w, nullspace_dim};
use crate::coord::Coord;
use crate::extension::{extend, ExtendedMesh, ExtensionError, Pairing, Placement};
use crate::hierarchy::{isolated_counts, Forest, GeneratedMesh};
use crate::linalg::SparseIntMatrix;
use crate::mesh::{Cell, TMesh};
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DimensionError {
    #[error("dimension formula produced a negative value {0}; the mesh violates the class invariants")]
    NegativeResult(i64),
    #[error(transparent)]
    Extension(#[from] ExtensionError),
}

/// The counts feeding the closed-form dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Census {
    pub crossing_vertices: usize,
    pub horizontal_ledges: usize,
    pub vertical_ledges: usize,
    pub isolated_total: usize,
    pub isolated_per_level: Vec<usize>,
}

/// Census of an extended mesh; isolated counts come from the subdomain
/// forest of the unextended mesh (extension does not change them).
pub fn census(ext: &ExtendedMesh, forest: &Forest) -> Census {
    let (crossing, _, _) = ext.mesh.vertex_census();
    let (h, v) = ext.mesh.interior_ledges();
    let (isolated_total, isolated_per_level) = isolated_counts(forest);
    Census {
        crossing_vertices: crossing,
        horizontal_ledges: h.len(),
        vertical_ledges: v.len(),
        isolated_total,
        isolated_per_level,
    }
}

/// Closed-form dimension from census counts.
pub fn dim_formula(c: &Census, m: u32, n: u32) -> Result<i64, DimensionError> {
    let (m, n) = (m as i64, n as i64);
    let value = (m - 1) * (n - 1) + c.crossing_vertices as i64
        - (m - 1) * c.horizontal_ledges as i64
        - (n - 1) * c.vertical_ledges as i64
        + c.isolated_total as i64;
    if value < 0 {
        return Err(DimensionError::NegativeResult(value));
    }
    Ok(value)
}

fn binomial(n: usize, k: usize) -> Coord {
    let mut v = Coord::one();
    for i in 0..k {
        v = v * Coord::from_integer((n - i).into()) / Coord::from_integer((i + 1).into());
    }
    v
}

fn power(base: &Coord, e: usize) -> Coord {
    let mut v = Coord::one();
    for _ in 0..e {
        v *= base;
    }
    v
}

/// Per-cell unknown layout for the smoothness-constraint system.
struct CellBlock {
    offset: usize,
}

/// Cross-edge smoothness rows between two cells sharing a vertical segment
/// at `x0` covering `[ylo, yhi]` of positive length, or the analogous
/// horizontal case (coordinates swapped by the caller).
///
/// Each cell polynomial is written in powers of (x - cx)(y - cy) anchored at
/// the cell's lower-left corner; the equality of the difference and its first
/// m-1 normal derivatives along the segment is expressed coefficient-wise in
/// the basis (y - ylo)^t after recentering. One row per (normal order j < m,
/// tangential power t <= n).
#[allow(clippy::too_many_arguments)]
fn smoothness_rows(
    matrix: &mut SparseIntMatrix,
    m: usize,
    n: usize,
    x0: &Coord,
    ylo: &Coord,
    left: Option<(&CellBlock, &Coord, &Coord)>,
    right: Option<(&CellBlock, &Coord, &Coord)>,
    swap_xy: bool,
) {
    for jprime in 0..m {
        for t in 0..=n {
            let mut entries: Vec<(usize, Coord)> = Vec::new();
            for (sign, side) in [(1i64, &left), (-1i64, &right)] {
                let Some((block, cx, cy)) = side else {
                    continue;
                };
                for i in jprime..=m {
                    let xfac = binomial(i, jprime) * power(&(x0 - *cx), i - jprime);
                    if xfac.is_zero() {
                        continue;
                    }
                    for j in t..=n {
                        let yfac = binomial(j, t) * power(&(ylo - *cy), j - t);
                        if yfac.is_zero() {
                            continue;
                        }
                        // Block layout: coefficient of (x-cx)^a (y-cy)^b sits
                        // at a * (ydeg + 1) + b. With swapped roles the normal
                        // index i is the y power and the y degree is `m`.
                        let col = if swap_xy {
                            block.offset + j * (m + 1) + i
                        } else {
                            block.offset + i * (n + 1) + j
                        };
                        entries.push((col, &xfac * &yfac * Coord::from_integer(sign.into())));
                    }
                }
            }
            matrix.push_rational_row(&entries);
        }
    }
}

/// Exact dimension of the piecewise-polynomial space with maximal cross-edge
/// smoothness, computed directly from per-cell coefficients.
///
/// Each cell carries (m+1)(n+1) unknown coefficients. Every pair of cells
/// sharing a positive-length segment contributes equality of the polynomial
/// and its normal derivatives up to order m-1 (across vertical segments) or
/// n-1 (across horizontal ones), expressed as exact linear constraints. With
/// `homogeneous` set, the same vanishing conditions are imposed on the
/// domain boundary. Returns #unknowns - rank.
pub fn dim_cellwise_oracle(mesh: &TMesh, m: u32, n: u32, homogeneous: bool) -> usize {
    let (m, n) = (m as usize, n as usize);
    let per_cell = (m + 1) * (n + 1);
    let unknowns = mesh.cells.len() * per_cell;
    let blocks: Vec<CellBlock> = (0..mesh.cells.len())
        .map(|i| CellBlock {
            offset: i * per_cell,
        })
        .collect();
    let mut matrix = SparseIntMatrix::new(unknowns);

    let vertical_overlap = |a: &Cell, b: &Cell| -> Option<(Coord, Coord)> {
        let lo = a.y0.clone().max(b.y0.clone());
        let hi = a.y1.clone().min(b.y1.clone());
        (lo < hi).then_some((lo, hi))
    };
    let horizontal_overlap = |a: &Cell, b: &Cell| -> Option<(Coord, Coord)> {
        let lo = a.x0.clone().max(b.x0.clone());
        let hi = a.x1.clone().min(b.x1.clone());
        (lo < hi).then_some((lo, hi))
    };

    for (ia, a) in mesh.cells.iter().enumerate() {
        for (ib, b) in mesh.cells.iter().enumerate() {
            // a left of b across a vertical segment
            if a.x1 == b.x0 {
                if let Some((ylo, _)) = vertical_overlap(a, b) {
                    smoothness_rows(
                        &mut matrix,
                        m,
                        n,
                        &a.x1,
                        &ylo,
                        Some((&blocks[ia], &a.x0, &a.y0)),
                        Some((&blocks[ib], &b.x0, &b.y0)),
                        false,
                    );
                }
            }
            // a below b across a horizontal segment: swap the roles of x, y
            if a.y1 == b.y0 {
                if let Some((xlo, _)) = horizontal_overlap(a, b) {
                    smoothness_rows(
                        &mut matrix,
                        n,
                        m,
                        &a.y1,
                        &xlo,
                        Some((&blocks[ia], &a.y0, &a.x0)),
                        Some((&blocks[ib], &b.y0, &b.x0)),
                        true,
                    );
                }
            }
        }
    }

    if homogeneous {
        let d = &mesh.domain;
        for (ic, c) in mesh.cells.iter().enumerate() {
            if c.x0 == d.x0 {
                smoothness_rows(&mut matrix, m, n, &c.x0, &c.y0, None,
                    Some((&blocks[ic], &c.x0, &c.y0)), false);
            }
            if c.x1 == d.x1 {
                smoothness_rows(&mut matrix, m, n, &c.x1, &c.y0,
                    Some((&blocks[ic], &c.x0, &c.y0)), None, false);
            }
            if c.y0 == d.y0 {
                smoothness_rows(&mut matrix, n, m, &c.y0, &c.x0, None,
                    Some((&blocks[ic], &c.y0, &c.x0)), true);
            }
            if c.y1 == d.y1 {
                smoothness_rows(&mut matrix, n, m, &c.y1, &c.x0,
                    Some((&blocks[ic], &c.y0, &c.x0)), None, true);
            }
        }
    }

    unknowns - matrix.rank()
}

/// Results of the three dimension paths on one mesh. A `None` entry means
/// the path was not run (no provenance for the closed form, or skipped by
/// a flag).
#[derive(Debug, Clone)]
pub struct DimensionReport {
    pub m: u32,
    pub n: u32,
    pub pairing: Pairing,
    pub census: Census,
    pub formula: Option<i64>,
    pub conformality_rank_dim: Option<usize>,
    pub cellwise_dim: Option<usize>,
    pub agree: bool,
}

/// Runs all three dimension paths on a generated mesh.
pub fn dim_spline_space(
    gen: &GeneratedMesh,
    pairing: Pairing,
    placement: Option<&Placement>,
) -> Result<DimensionReport, DimensionError> {
    let ext = extend(&gen.mesh, gen.m, gen.n, pairing, placement)?;
    let census = census(&ext, &gen.forest);
    let formula = dim_formula(&census, gen.m, gen.n)?;
    let conf = nullspace_dim(&assemble_w(&ext.mesh, gen.m, gen.n));
    let cellwise = dim_cellwise_oracle(&gen.mesh, gen.m, gen.n, false);
    let agree = formula >= 0 && formula as usize == conf && conf == cellwise;
    Ok(DimensionReport {
        m: gen.m,
        n: gen.n,
        pairing,
        census,
        formula: Some(formula),
        conformality_rank_dim: Some(conf),
        cellwise_dim: Some(cellwise),
        agree,
    })
}

/// The two oracle paths for a mesh of unknown provenance (no formula).
pub fn oracle_dims(
    mesh: &TMesh,
    m: u32,
    n: u32,
    pairing: Pairing,
    placement: Option<&Placement>,
) -> Result<(usize, usize), DimensionError> {
    let ext = extend(mesh, m, n, pairing, placement)?;
    let conf = nullspace_dim(&assemble_w(&ext.mesh, m, n));
    let cellwise = dim_cellwise_oracle(mesh, m, n, false);
    Ok((conf, cellwise))
}
