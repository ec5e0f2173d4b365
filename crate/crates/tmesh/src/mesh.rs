//! Exact-rational regular T-meshes.
//!
//! A T-mesh is stored as vertices, unit edges, maximal axis-aligned line
//! segments (l-edges), and rectangular cells. Construction from raw segments
//! splits everything at mutual intersections, classifies vertices, extracts
//! l-edges as maximal colinear chains, and validates regularity (the boundary
//! grid lines must form a rectangle that the cells tile exactly).

use crate::coord::{format_coord, Coord};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LEdgeId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexKind {
    /// Interior vertex where four edges meet.
    Crossing,
    /// Interior vertex where exactly three edges meet.
    TJunction,
    /// Vertex on the boundary rectangle.
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

impl Orientation {
    pub fn perpendicular(self) -> Orientation {
        match self {
            Orientation::Horizontal => Orientation::Vertical,
            Orientation::Vertical => Orientation::Horizontal,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Vertex {
    pub id: VertexId,
    pub x: Coord,
    pub y: Coord,
    pub kind: VertexKind,
    /// The horizontal l-edge through this vertex.
    pub hledge: LEdgeId,
    /// The vertical l-edge through this vertex.
    pub vledge: LEdgeId,
    /// True when the vertex is not an endpoint of its horizontal l-edge.
    pub interior_of_h: bool,
    /// True when the vertex is not an endpoint of its vertical l-edge.
    pub interior_of_v: bool,
}

/// Maximal line segment composed of consecutive mesh edges.
#[derive(Debug, Clone)]
pub struct LEdge {
    pub id: LEdgeId,
    pub orientation: Orientation,
    /// The constant coordinate (y for horizontal, x for vertical).
    pub fixed: Coord,
    pub lo: Coord,
    pub hi: Coord,
    /// Vertices on the l-edge, sorted by the varying coordinate.
    pub vertices: Vec<VertexId>,
    pub interior: bool,
    /// Refinement level for generated meshes, None for raw input.
    pub level: Option<u32>,
}

impl LEdge {
    /// Varying coordinate of a point on this l-edge.
    pub fn varying<'a>(&self, x: &'a Coord, y: &'a Coord) -> &'a Coord {
        match self.orientation {
            Orientation::Horizontal => x,
            Orientation::Vertical => y,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub id: CellId,
    pub x0: Coord,
    pub x1: Coord,
    pub y0: Coord,
    pub y1: Coord,
}

impl Cell {
    pub fn area(&self) -> Coord {
        (&self.x1 - &self.x0) * (&self.y1 - &self.y0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rect {
    pub x0: Coord,
    pub x1: Coord,
    pub y0: Coord,
    pub y1: Coord,
}

impl Rect {
    pub fn contains_point(&self, x: &Coord, y: &Coord) -> bool {
        *x >= self.x0 && *x <= self.x1 && *y >= self.y0 && *y <= self.y1
    }
}

/// Raw axis-aligned input segment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub orientation: Orientation,
    pub fixed: Coord,
    pub lo: Coord,
    pub hi: Coord,
    pub level: Option<u32>,
}

impl Segment {
    pub fn horizontal(y: Coord, x0: Coord, x1: Coord) -> Segment {
        Segment {
            orientation: Orientation::Horizontal,
            fixed: y,
            lo: x0,
            hi: x1,
            level: None,
        }
    }

    pub fn vertical(x: Coord, y0: Coord, y1: Coord) -> Segment {
        Segment {
            orientation: Orientation::Vertical,
            fixed: x,
            lo: y0,
            hi: y1,
            level: None,
        }
    }

    pub fn with_level(mut self, level: u32) -> Segment {
        self.level = Some(level);
        self
    }
}

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("boundary grid lines do not form a rectangle: {0}")]
    NotRegular(String),
    #[error("dangling segment endpoint at ({x}, {y})")]
    DanglingSegment { x: String, y: String },
    #[error("overlapping colinear segments on the {orientation:?} line at {fixed}")]
    Overlap {
        orientation: Orientation,
        fixed: String,
    },
    #[error("zero-length segment at {0}")]
    DegenerateSegment(String),
    #[error("no segments given")]
    Empty,
}

/// Regular T-mesh. Immutable after construction.
#[derive(Debug, Clone)]
pub struct TMesh {
    pub domain: Rect,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<(VertexId, VertexId)>,
    pub ledges: Vec<LEdge>,
    pub cells: Vec<Cell>,
    pub was_extended: bool,
    point_index: BTreeMap<(Coord, Coord), VertexId>,
}

/// One maximal covered interval of a grid line.
#[derive(Debug, Clone)]
struct Interval {
    fixed: Coord,
    lo: Coord,
    hi: Coord,
    level: Option<u32>,
}

fn merge_intervals(
    orientation: Orientation,
    mut segs: Vec<Segment>,
) -> Result<Vec<Interval>, MeshError> {
    segs.sort_by(|a, b| a.lo.cmp(&b.lo).then(a.hi.cmp(&b.hi)));
    let mut out: Vec<Interval> = Vec::new();
    for s in segs {
        match out.last_mut() {
            Some(last) if s.lo < last.hi => {
                return Err(MeshError::Overlap {
                    orientation,
                    fixed: format_coord(&s.fixed),
                });
            }
            Some(last) if s.lo == last.hi => {
                last.hi = s.hi;
                if last.level != s.level {
                    last.level = None;
                }
            }
            _ => out.push(Interval {
                fixed: s.fixed,
                lo: s.lo,
                hi: s.hi,
                level: s.level,
            }),
        }
    }
    Ok(out)
}

/// Builds a validated T-mesh from axis-aligned segments.
///
/// Segments are split at all mutual intersections; vertices appear at every
/// intersection and at every maximal-segment endpoint. Vertex ids are assigned
/// in lexicographic (y, x) order so identical input reproduces identical ids.
pub fn build_tmesh(segments: &[Segment]) -> Result<TMesh, MeshError> {
    if segments.is_empty() {
        return Err(MeshError::Empty);
    }
    for s in segments {
        if s.lo >= s.hi {
            return Err(MeshError::DegenerateSegment(format!(
                "{:?} line at {}",
                s.orientation,
                format_coord(&s.fixed)
            )));
        }
    }

    let mut by_line: BTreeMap<(Orientation, Coord), Vec<Segment>> = BTreeMap::new();
    for s in segments {
        by_line
            .entry((s.orientation, s.fixed.clone()))
            .or_default()
            .push(s.clone());
    }
    let mut hints: Vec<Interval> = Vec::new();
    let mut vints: Vec<Interval> = Vec::new();
    for ((orientation, _), segs) in by_line {
        let merged = merge_intervals(orientation, segs)?;
        match orientation {
            Orientation::Horizontal => hints.extend(merged),
            Orientation::Vertical => vints.extend(merged),
        }
    }

    // Vertices are the closed intersections of perpendicular intervals.
    let mut points: BTreeMap<(Coord, Coord), ()> = BTreeMap::new(); // key (y, x)
    for h in &hints {
        for v in &vints {
            if v.fixed >= h.lo && v.fixed <= h.hi && h.fixed >= v.lo && h.fixed <= v.hi {
                points.insert((h.fixed.clone(), v.fixed.clone()), ());
            }
        }
    }

    // Every interval endpoint must be supported by a perpendicular interval.
    for h in &hints {
        for x in [&h.lo, &h.hi] {
            if !points.contains_key(&(h.fixed.clone(), x.clone())) {
                return Err(MeshError::DanglingSegment {
                    x: format_coord(x),
                    y: format_coord(&h.fixed),
                });
            }
        }
    }
    for v in &vints {
        for y in [&v.lo, &v.hi] {
            if !points.contains_key(&(y.clone(), v.fixed.clone())) {
                return Err(MeshError::DanglingSegment {
                    x: format_coord(&v.fixed),
                    y: format_coord(y),
                });
            }
        }
    }

    let mut point_index: BTreeMap<(Coord, Coord), VertexId> = BTreeMap::new();
    let mut coords: Vec<(Coord, Coord)> = Vec::with_capacity(points.len()); // (x, y) per id
    for (i, (y, x)) in points.keys().cloned().enumerate() {
        point_index.insert((x.clone(), y.clone()), VertexId(i as u32));
        coords.push((x, y));
    }

    let domain = {
        let xs: Vec<&Coord> = coords.iter().map(|(x, _)| x).collect();
        let ys: Vec<&Coord> = coords.iter().map(|(_, y)| y).collect();
        Rect {
            x0: (*xs.iter().min().expect("nonempty")).clone(),
            x1: (*xs.iter().max().expect("nonempty")).clone(),
            y0: (*ys.iter().min().expect("nonempty")).clone(),
            y1: (*ys.iter().max().expect("nonempty")).clone(),
        }
    };
    if domain.x0 == domain.x1 || domain.y0 == domain.y1 {
        return Err(MeshError::NotRegular("mesh has zero area".to_string()));
    }

    // L-edges, their vertex chains, and the unit edges.
    let mut ledges: Vec<LEdge> = Vec::new();
    let mut edges: Vec<(VertexId, VertexId)> = Vec::new();
    // Per vertex: (horizontal support, vertical support), each with an
    // interior-of-edge flag.
    type Support = (Option<(LEdgeId, bool)>, Option<(LEdgeId, bool)>);
    let mut support: BTreeMap<VertexId, Support> = BTreeMap::new();
    let mut all_ints: Vec<(Orientation, Interval)> = Vec::new();
    all_ints.extend(hints.iter().map(|i| (Orientation::Horizontal, i.clone())));
    all_ints.extend(vints.iter().map(|i| (Orientation::Vertical, i.clone())));
    all_ints.sort_by(|(oa, ia), (ob, ib)| {
        (oa, &ia.fixed, &ia.lo).cmp(&(ob, &ib.fixed, &ib.lo))
    });

    for (orientation, interval) in all_ints {
        let id = LEdgeId(ledges.len() as u32);
        let mut chain: Vec<(Coord, VertexId)> = point_index
            .iter()
            .filter(|((x, y), _)| match orientation {
                Orientation::Horizontal => {
                    *y == interval.fixed && *x >= interval.lo && *x <= interval.hi
                }
                Orientation::Vertical => {
                    *x == interval.fixed && *y >= interval.lo && *y <= interval.hi
                }
            })
            .map(|((x, y), vid)| {
                let t = match orientation {
                    Orientation::Horizontal => x.clone(),
                    Orientation::Vertical => y.clone(),
                };
                (t, *vid)
            })
            .collect();
        chain.sort_by(|a, b| a.0.cmp(&b.0));
        debug_assert!(chain.len() >= 2);
        for w in chain.windows(2) {
            edges.push((w[0].1, w[1].1));
        }
        let interior = match orientation {
            Orientation::Horizontal => interval.fixed != domain.y0 && interval.fixed != domain.y1,
            Orientation::Vertical => interval.fixed != domain.x0 && interval.fixed != domain.x1,
        };
        for (i, (_, vid)) in chain.iter().enumerate() {
            let is_interior = i > 0 && i + 1 < chain.len();
            let slot = support.entry(*vid).or_insert((None, None));
            let entry = Some((id, is_interior));
            match orientation {
                Orientation::Horizontal => slot.0 = entry,
                Orientation::Vertical => slot.1 = entry,
            }
        }
        ledges.push(LEdge {
            id,
            orientation,
            fixed: interval.fixed,
            lo: interval.lo,
            hi: interval.hi,
            vertices: chain.into_iter().map(|(_, v)| v).collect(),
            interior,
            level: interval.level,
        });
    }

    // Vertex classification by valence and boundary membership.
    let mut vertices: Vec<Vertex> = Vec::with_capacity(coords.len());
    for (i, (x, y)) in coords.iter().enumerate() {
        let vid = VertexId(i as u32);
        let (h, v) = support.get(&vid).cloned().unwrap_or((None, None));
        let (hledge, h_int) = h.ok_or_else(|| MeshError::DanglingSegment {
            x: format_coord(x),
            y: format_coord(y),
        })?;
        let (vledge, v_int) = v.ok_or_else(|| MeshError::DanglingSegment {
            x: format_coord(x),
            y: format_coord(y),
        })?;
        let valence = (if h_int { 2 } else { 1 }) + (if v_int { 2 } else { 1 });
        let on_boundary =
            *x == domain.x0 || *x == domain.x1 || *y == domain.y0 || *y == domain.y1;
        let kind = if on_boundary {
            VertexKind::Boundary
        } else {
            match valence {
                4 => VertexKind::Crossing,
                3 => VertexKind::TJunction,
                _ => {
                    return Err(MeshError::DanglingSegment {
                        x: format_coord(x),
                        y: format_coord(y),
                    })
                }
            }
        };
        vertices.push(Vertex {
            id: vid,
            x: x.clone(),
            y: y.clone(),
            kind,
            hledge,
            vledge,
            interior_of_h: h_int,
            interior_of_v: v_int,
        });
    }

    // The four boundary sides must each be one full-span l-edge.
    for (orientation, fixed, lo, hi) in [
        (Orientation::Horizontal, &domain.y0, &domain.x0, &domain.x1),
        (Orientation::Horizontal, &domain.y1, &domain.x0, &domain.x1),
        (Orientation::Vertical, &domain.x0, &domain.y0, &domain.y1),
        (Orientation::Vertical, &domain.x1, &domain.y0, &domain.y1),
    ] {
        let ok = ledges.iter().any(|e| {
            e.orientation == orientation && e.fixed == *fixed && e.lo == *lo && e.hi == *hi
        });
        if !ok {
            return Err(MeshError::NotRegular(format!(
                "missing full boundary line ({:?} at {})",
                orientation,
                format_coord(fixed)
            )));
        }
    }

    let cells = extract_cells(&vertices, &ledges, &domain)?;

    Ok(TMesh {
        domain,
        vertices,
        edges,
        ledges,
        cells,
        was_extended: false,
        point_index,
    })
}

fn extract_cells(
    vertices: &[Vertex],
    ledges: &[LEdge],
    domain: &Rect,
) -> Result<Vec<Cell>, MeshError> {
    let mut xs: Vec<Coord> = vertices.iter().map(|v| v.x.clone()).collect();
    let mut ys: Vec<Coord> = vertices.iter().map(|v| v.y.clone()).collect();
    xs.sort();
    xs.dedup();
    ys.sort();
    ys.dedup();
    let nx = xs.len() - 1;
    let ny = ys.len() - 1;
    let xi: BTreeMap<&Coord, usize> = xs.iter().enumerate().map(|(i, x)| (x, i)).collect();
    let yi: BTreeMap<&Coord, usize> = ys.iter().enumerate().map(|(i, y)| (y, i)).collect();

    // Wall grids: wall between pixel (i,j) and its right/top neighbor.
    let mut vwall = vec![vec![false; ny]; nx + 1];
    let mut hwall = vec![vec![false; nx]; ny + 1];
    for e in ledges {
        match e.orientation {
            Orientation::Vertical => {
                let i = xi[&e.fixed];
                let (j0, j1) = (yi[&e.lo], yi[&e.hi]);
                for w in vwall[i][j0..j1].iter_mut() {
                    *w = true;
                }
            }
            Orientation::Horizontal => {
                let j = yi[&e.fixed];
                let (i0, i1) = (xi[&e.lo], xi[&e.hi]);
                for w in hwall[j][i0..i1].iter_mut() {
                    *w = true;
                }
            }
        }
    }

    // Union-find over pixels.
    let mut parent: Vec<usize> = (0..nx * ny).collect();
    fn find(parent: &mut [usize], mut a: usize) -> usize {
        while parent[a] != a {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        a
    }
    let idx = |i: usize, j: usize| j * nx + i;
    for j in 0..ny {
        for i in 0..nx {
            if i + 1 < nx && !vwall[i + 1][j] {
                let (a, b) = (find(&mut parent, idx(i, j)), find(&mut parent, idx(i + 1, j)));
                parent[a] = b;
            }
            if j + 1 < ny && !hwall[j + 1][i] {
                let (a, b) = (find(&mut parent, idx(i, j)), find(&mut parent, idx(i, j + 1)));
                parent[a] = b;
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for j in 0..ny {
        for i in 0..nx {
            let r = find(&mut parent, idx(i, j));
            groups.entry(r).or_default().push((i, j));
        }
    }
    let mut rects: Vec<(usize, usize, usize, usize)> = Vec::new();
    for (_, pixels) in groups {
        let i0 = pixels.iter().map(|p| p.0).min().expect("nonempty");
        let i1 = pixels.iter().map(|p| p.0).max().expect("nonempty");
        let j0 = pixels.iter().map(|p| p.1).min().expect("nonempty");
        let j1 = pixels.iter().map(|p| p.1).max().expect("nonempty");
        if pixels.len() != (i1 - i0 + 1) * (j1 - j0 + 1) {
            return Err(MeshError::NotRegular(
                "cells do not tile the domain with rectangles".to_string(),
            ));
        }
        rects.push((i0, i1, j0, j1));
    }
    rects.sort_by_key(|(i0, _, j0, _)| (*j0, *i0));
    let cells = rects
        .into_iter()
        .enumerate()
        .map(|(id, (i0, i1, j0, j1))| Cell {
            id: CellId(id as u32),
            x0: xs[i0].clone(),
            x1: xs[i1 + 1].clone(),
            y0: ys[j0].clone(),
            y1: ys[j1 + 1].clone(),
        })
        .collect::<Vec<_>>();

    // Exact tiling: cell areas must sum to the domain area.
    let total: Coord = cells.iter().map(|c| c.area()).sum();
    let expect = (&domain.x1 - &domain.x0) * (&domain.y1 - &domain.y0);
    if total != expect {
        return Err(MeshError::NotRegular(
            "cells do not cover the domain exactly".to_string(),
        ));
    }
    Ok(cells)
}

impl TMesh {
    pub fn vertex(&self, id: VertexId) -> &Vertex {
        &self.vertices[id.0 as usize]
    }

    pub fn ledge(&self, id: LEdgeId) -> &LEdge {
        &self.ledges[id.0 as usize]
    }

    pub fn cell(&self, id: CellId) -> &Cell {
        &self.cells[id.0 as usize]
    }

    pub fn vertex_at(&self, x: &Coord, y: &Coord) -> Option<VertexId> {
        self.point_index.get(&(x.clone(), y.clone())).copied()
    }

    /// Counts of (crossing, T-junction, boundary) vertices.
    pub fn vertex_census(&self) -> (usize, usize, usize) {
        let mut counts = (0, 0, 0);
        for v in &self.vertices {
            match v.kind {
                VertexKind::Crossing => counts.0 += 1,
                VertexKind::TJunction => counts.1 += 1,
                VertexKind::Boundary => counts.2 += 1,
            }
        }
        counts
    }

    /// Interior l-edges partitioned by orientation, each sorted by (fixed, lo).
    pub fn interior_ledges(&self) -> (Vec<&LEdge>, Vec<&LEdge>) {
        let mut horizontal: Vec<&LEdge> = self
            .ledges
            .iter()
            .filter(|e| e.interior && e.orientation == Orientation::Horizontal)
            .collect();
        let mut vertical: Vec<&LEdge> = self
            .ledges
            .iter()
            .filter(|e| e.interior && e.orientation == Orientation::Vertical)
            .collect();
        horizontal.sort_by(|a, b| (&a.fixed, &a.lo).cmp(&(&b.fixed, &b.lo)));
        vertical.sort_by(|a, b| (&a.fixed, &a.lo).cmp(&(&b.fixed, &b.lo)));
        (horizontal, vertical)
    }

    /// The tensor-product mesh obtained by extending every interior l-edge to
    /// the boundary. Idempotent on tensor-product meshes.
    pub fn associated_tensor_mesh(&self) -> TMesh {
        let mut xs: Vec<Coord> = self
            .ledges
            .iter()
            .filter(|e| e.orientation == Orientation::Vertical)
            .map(|e| e.fixed.clone())
            .collect();
        let mut ys: Vec<Coord> = self
            .ledges
            .iter()
            .filter(|e| e.orientation == Orientation::Horizontal)
            .map(|e| e.fixed.clone())
            .collect();
        xs.sort();
        xs.dedup();
        ys.sort();
        ys.dedup();
        let segments = tensor_segments(&xs, &ys);
        build_tmesh(&segments).expect("extending interior l-edges keeps the mesh regular")
    }

    /// One segment per l-edge, carrying level tags. Rebuilding from these
    /// reproduces the mesh exactly.
    pub fn segments(&self) -> Vec<Segment> {
        self.ledges
            .iter()
            .map(|e| Segment {
                orientation: e.orientation,
                fixed: e.fixed.clone(),
                lo: e.lo.clone(),
                hi: e.hi.clone(),
                level: e.level,
            })
            .collect()
    }

    /// Cells whose closure lies inside the given rectangle.
    pub fn cells_in(&self, rect: &Rect) -> Vec<CellId> {
        self.cells
            .iter()
            .filter(|c| {
                c.x0 >= rect.x0 && c.x1 <= rect.x1 && c.y0 >= rect.y0 && c.y1 <= rect.y1
            })
            .map(|c| c.id)
            .collect()
    }

    /// True when the mesh is a full tensor-product grid.
    pub fn is_tensor_product(&self) -> bool {
        self.ledges.iter().all(|e| match e.orientation {
            Orientation::Horizontal => e.lo == self.domain.x0 && e.hi == self.domain.x1,
            Orientation::Vertical => e.lo == self.domain.y0 && e.hi == self.domain.y1,
        })
    }
}

/// Full-span grid segments over the given sorted coordinate lists.
pub fn tensor_segments(xs: &[Coord], ys: &[Coord]) -> Vec<Segment> {
    let (x0, x1) = (xs[0].clone(), xs[xs.len() - 1].clone());
    let (y0, y1) = (ys[0].clone(), ys[ys.len() - 1].clone());
    let mut segments = Vec::with_capacity(xs.len() + ys.len());
    for x in xs {
        segments.push(Segment::vertical(x.clone(), y0.clone(), y1.clone()).with_level(0));
    }
    for y in ys {
        segments.push(Segment::horizontal(y.clone(), x0.clone(), x1.clone()).with_level(0));
    }
    segments
}
