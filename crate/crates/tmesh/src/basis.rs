//! Basis assembly for the spline space of an extended hierarchical mesh.
//!
//! Interior l-edges are removed one at a time, deepest refinement level
//! first. Removing an edge deletes its vertices from the transversal edges
//! that crossed it, so each edge's univariate conformality space is taken in
//! the mesh current at its removal time; the dimensions of those spaces
//! telescope to the dimension of the whole space. For every removed edge
//! with a nontrivial univariate space, one basis function is built per
//! window of consecutive vertices: a separable product of two window
//! vectors placed on a locally full grid, or, when a same-level transversal
//! edge is too short to span the grid, a corrected combination of two such
//! products whose factors cancel at a virtual cut point outside the short
//! edge.

use crate::conformality::{bspline_conformality, ConformalityError, ConformalityVector, SplineFn};
use crate::coord::{format_coord, Coord};
use crate::extension::ExtendedMesh;
use crate::hierarchy::{Forest, GeneratedMesh};
use crate::linalg::SparseIntMatrix;
use crate::mesh::{LEdge, LEdgeId, Orientation, TMesh, Vertex, VertexId};
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BasisError {
    #[error("l-edge {0:?} carries no refinement level tag")]
    MissingLevel(LEdgeId),
    #[error("l-edge {0:?} at level {1} intersects no subdomain one level up")]
    NoParentSubdomain(LEdgeId, u32),
    #[error("l-edge {0:?} has inconsistent positions {1} and {2} in adjacent subdomains")]
    InconsistentPosition(LEdgeId, u32, u32),
    #[error("position {position} of l-edge {ledge:?} exceeds the degree bound {bound}")]
    UnlabeledEdge {
        ledge: LEdgeId,
        position: u32,
        bound: u32,
    },
    #[error("no valid construction for window {window} of l-edge {ledge:?} ({detail})")]
    UnhandledConfiguration {
        ledge: LEdgeId,
        window: usize,
        detail: String,
    },
    #[error(transparent)]
    Conformality(#[from] ConformalityError),
}

/// Removal classes for level >= 1 edges, processed in declaration order.
/// Position labels count same-orientation same-level edges inside a parent
/// subdomain: left to right for vertical edges, top to bottom for
/// horizontal ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum RemovalPhase {
    /// Position at least two short of the degree bound.
    Inner,
    /// Horizontal, next-to-last position.
    HorizontalNextToLast,
    /// Vertical, next-to-last position.
    VerticalNextToLast,
    /// Horizontal, last position.
    HorizontalLast,
    /// Vertical, last position.
    VerticalLast,
}

/// One removal step with the census of the edge in the mesh it was removed
/// from.
#[derive(Debug, Clone)]
pub struct OrderedStep {
    pub ledge: LEdgeId,
    pub level: u32,
    pub phase: Option<RemovalPhase>,
    pub position: Option<u32>,
    pub trivial: bool,
    /// Crossing vertices of the edge at removal time.
    pub crossing_count: usize,
    /// All vertices of the edge at removal time.
    pub vertex_count: usize,
    /// (vertex_count - degree - 1)+, the univariate space dimension.
    pub space_dim: usize,
}

#[derive(Debug, Clone)]
pub struct OrderedLEdges {
    pub steps: Vec<OrderedStep>,
}

/// Tie-break policy among equally eligible edges. Totals are order
/// independent; two policies exist so tests can assert that.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    #[default]
    Standard,
    Alternate,
}

/// Live view of the extended mesh during edge removal. A vertex is present
/// while both of its supporting l-edges are.
struct RemovalSim<'a> {
    mesh: &'a TMesh,
    alive: Vec<bool>,
}

impl<'a> RemovalSim<'a> {
    fn new(mesh: &'a TMesh) -> Self {
        RemovalSim {
            mesh,
            alive: vec![true; mesh.ledges.len()],
        }
    }

    fn is_alive(&self, id: LEdgeId) -> bool {
        self.alive[id.0 as usize]
    }

    fn vertex_alive(&self, v: &Vertex) -> bool {
        self.is_alive(v.hledge) && self.is_alive(v.vledge)
    }

    fn alive_vertices(&self, edge: &LEdge) -> Vec<VertexId> {
        edge.vertices
            .iter()
            .copied()
            .filter(|vid| self.vertex_alive(self.mesh.vertex(*vid)))
            .collect()
    }

    fn counts(&self, edge: &LEdge) -> (usize, usize) {
        let mut total = 0;
        let mut crossings = 0;
        for vid in &edge.vertices {
            let v = self.mesh.vertex(*vid);
            if self.vertex_alive(v) {
                total += 1;
                if v.interior_of_h && v.interior_of_v {
                    crossings += 1;
                }
            }
        }
        (total, crossings)
    }

    fn degree(&self, edge: &LEdge, m: u32, n: u32) -> u32 {
        match edge.orientation {
            Orientation::Horizontal => m,
            Orientation::Vertical => n,
        }
    }

    fn is_trivial(&self, edge: &LEdge, m: u32, n: u32) -> bool {
        let (total, _) = self.counts(edge);
        total < self.degree(edge, m, n) as usize + 2
    }

    fn remove(&mut self, id: LEdgeId) {
        self.alive[id.0 as usize] = false;
    }

    /// True when (x, y) is a vertex of the current mesh.
    fn vertex_at(&self, x: &Coord, y: &Coord) -> Option<VertexId> {
        self.mesh
            .vertex_at(x, y)
            .filter(|vid| self.vertex_alive(self.mesh.vertex(*vid)))
    }
}

/// Interior l-edges grouped by refinement level.
pub fn level_partition(ext: &ExtendedMesh) -> Result<Vec<Vec<LEdgeId>>, BasisError> {
    let mut groups: Vec<Vec<LEdgeId>> = Vec::new();
    for e in &ext.mesh.ledges {
        if !e.interior {
            continue;
        }
        let level = e.level.ok_or(BasisError::MissingLevel(e.id))? as usize;
        if groups.len() <= level {
            groups.resize_with(level + 1, Vec::new);
        }
        groups[level].push(e.id);
    }
    Ok(groups)
}

/// Position of a level >= 1 edge among the same-orientation refinement lines
/// of a parent subdomain: 1-based, left to right for vertical edges and top
/// to bottom for horizontal ones. Consistent across all parents the edge
/// intersects.
pub fn position_label(
    _ext: &ExtendedMesh,
    forest: &Forest,
    edge: &LEdge,
) -> Result<u32, BasisError> {
    let level = edge.level.ok_or(BasisError::MissingLevel(edge.id))?;
    debug_assert!(level >= 1);
    let parents = forest.subdomains_at(level - 1);
    let mut label: Option<u32> = None;
    for sub in parents {
        if !sub.subdivided {
            continue;
        }
        let (inside, span_lo, span_hi, cells) = match edge.orientation {
            Orientation::Vertical => (
                sub.rect.x0 < edge.fixed && edge.fixed < sub.rect.x1,
                sub.rect.y0.clone(),
                sub.rect.y1.clone(),
                &sub.x_cells,
            ),
            Orientation::Horizontal => (
                sub.rect.y0 < edge.fixed && edge.fixed < sub.rect.y1,
                sub.rect.x0.clone(),
                sub.rect.x1.clone(),
                &sub.y_cells,
            ),
        };
        if !inside || edge.lo.clone().max(span_lo) >= edge.hi.clone().min(span_hi) {
            continue;
        }
        let mut mids: Vec<Coord> = cells
            .windows(2)
            .map(|w| crate::coord::midpoint(&w[0], &w[1]))
            .collect();
        if edge.orientation == Orientation::Horizontal {
            // Top to bottom.
            mids.reverse();
        }
        let Some(pos) = mids.iter().position(|m| *m == edge.fixed) else {
            continue;
        };
        let pos = pos as u32 + 1;
        match label {
            None => label = Some(pos),
            Some(prev) if prev != pos => {
                return Err(BasisError::InconsistentPosition(edge.id, prev, pos))
            }
            _ => {}
        }
    }
    label.ok_or(BasisError::NoParentSubdomain(edge.id, level))
}

/// Phase classification from orientation, position, and degrees.
pub fn classify_phase(
    edge: &LEdge,
    position: u32,
    m: u32,
    n: u32,
) -> Result<RemovalPhase, BasisError> {
    let bound = match edge.orientation {
        Orientation::Vertical => m,
        Orientation::Horizontal => n,
    };
    if position >= bound {
        return Err(BasisError::UnlabeledEdge {
            ledge: edge.id,
            position,
            bound,
        });
    }
    Ok(match (edge.orientation, position) {
        (Orientation::Vertical, p) if p == m - 1 => RemovalPhase::VerticalLast,
        (Orientation::Vertical, p) if p == m - 2 => RemovalPhase::VerticalNextToLast,
        (Orientation::Vertical, _) => RemovalPhase::Inner,
        (Orientation::Horizontal, p) if p == n - 1 => RemovalPhase::HorizontalLast,
        (Orientation::Horizontal, p) if p == n - 2 => RemovalPhase::HorizontalNextToLast,
        (Orientation::Horizontal, _) => RemovalPhase::Inner,
    })
}

fn tie_key(edge: &LEdge, policy: TieBreak) -> (u8, Coord, Coord) {
    let orient = match (policy, edge.orientation) {
        (TieBreak::Standard, Orientation::Vertical) => 0,
        (TieBreak::Standard, Orientation::Horizontal) => 1,
        (TieBreak::Alternate, Orientation::Horizontal) => 0,
        (TieBreak::Alternate, Orientation::Vertical) => 1,
    };
    match policy {
        TieBreak::Standard => (orient, edge.fixed.clone(), edge.lo.clone()),
        TieBreak::Alternate => (orient, -edge.fixed.clone(), -edge.lo.clone()),
    }
}

/// Removal schedule of all interior l-edges: levels high to low; within a
/// level a trivial edge is removed whenever one exists, otherwise the least
/// edge of the earliest nonempty phase; the level-0 loop needs no phases.
pub fn order_ledges(
    ext: &ExtendedMesh,
    forest: &Forest,
    m: u32,
    n: u32,
    policy: TieBreak,
) -> Result<OrderedLEdges, BasisError> {
    let groups = level_partition(ext)?;
    let mut labels: BTreeMap<LEdgeId, (u32, RemovalPhase)> = BTreeMap::new();
    for (level, group) in groups.iter().enumerate().skip(1) {
        let _ = level;
        for id in group {
            let edge = ext.mesh.ledge(*id);
            let position = position_label(ext, forest, edge)?;
            let phase = classify_phase(edge, position, m, n)?;
            labels.insert(*id, (position, phase));
        }
    }

    let mut sim = RemovalSim::new(&ext.mesh);
    let mut steps = Vec::new();
    for (level, group) in groups.iter().enumerate().rev() {
        let mut remaining: Vec<LEdgeId> = group.clone();
        while !remaining.is_empty() {
            let trivials: Vec<LEdgeId> = remaining
                .iter()
                .copied()
                .filter(|id| sim.is_trivial(ext.mesh.ledge(*id), m, n))
                .collect();
            let eligible: Vec<LEdgeId> = if !trivials.is_empty() {
                trivials
            } else if level == 0 {
                remaining.clone()
            } else {
                let phase = remaining
                    .iter()
                    .map(|id| labels[id].1)
                    .min()
                    .expect("nonempty");
                remaining
                    .iter()
                    .copied()
                    .filter(|id| labels[id].1 == phase)
                    .collect()
            };
            let pick = eligible
                .into_iter()
                .min_by_key(|id| tie_key(ext.mesh.ledge(*id), policy))
                .expect("nonempty");
            let edge = ext.mesh.ledge(pick);
            let (vertex_count, crossing_count) = sim.counts(edge);
            let degree = sim.degree(edge, m, n) as usize;
            let space_dim = vertex_count.saturating_sub(degree + 1);
            steps.push(OrderedStep {
                ledge: pick,
                level: level as u32,
                phase: labels.get(&pick).map(|(_, p)| *p),
                position: labels.get(&pick).map(|(p, _)| *p),
                trivial: vertex_count < degree + 2,
                crossing_count,
                vertex_count,
                space_dim,
            });
            sim.remove(pick);
            remaining.retain(|id| *id != pick);
        }
    }
    Ok(OrderedLEdges { steps })
}

/// Orientation-generic view: `t` runs along the edge being processed, `s`
/// across it.
#[derive(Clone, Copy)]
struct Frame {
    horizontal: bool,
}

impl Frame {
    fn of(edge: &LEdge) -> Frame {
        Frame {
            horizontal: edge.orientation == Orientation::Horizontal,
        }
    }

    fn xy(&self, t: &Coord, s: &Coord) -> (Coord, Coord) {
        if self.horizontal {
            (t.clone(), s.clone())
        } else {
            (s.clone(), t.clone())
        }
    }

    fn along_degree(&self, m: u32, n: u32) -> u32 {
        if self.horizontal {
            m
        } else {
            n
        }
    }

    fn across_degree(&self, m: u32, n: u32) -> u32 {
        if self.horizontal {
            n
        } else {
            m
        }
    }

    /// Support l-edge of the vertex in the edge's own orientation.
    fn row_support(&self, v: &Vertex) -> LEdgeId {
        if self.horizontal {
            v.hledge
        } else {
            v.vledge
        }
    }

    /// Support l-edge of the vertex in the transversal orientation.
    fn col_support(&self, v: &Vertex) -> LEdgeId {
        if self.horizontal {
            v.vledge
        } else {
            v.hledge
        }
    }

    /// The across-direction range of a rectangle.
    fn srange(&self, r: &crate::mesh::Rect) -> (Coord, Coord) {
        if self.horizontal {
            (r.y0.clone(), r.y1.clone())
        } else {
            (r.x0.clone(), r.x1.clone())
        }
    }

    /// The along-direction range of a rectangle.
    fn trange(&self, r: &crate::mesh::Rect) -> (Coord, Coord) {
        if self.horizontal {
            (r.x0.clone(), r.x1.clone())
        } else {
            (r.y0.clone(), r.y1.clone())
        }
    }
}

/// Correction bookkeeping for windows touching a short same-level
/// transversal edge.
#[derive(Debug, Clone)]
pub struct CorrectionInfo {
    /// The same-level crossing whose transversal edge was too short.
    pub crossing_at: (Coord, Coord),
    /// Virtual cut point on the enclosing subdomain boundary; the combined
    /// factors cancel exactly there.
    pub cut_at: (Coord, Coord),
    pub k_primary: Coord,
    pub k_secondary: Coord,
}

#[derive(Debug, Clone)]
pub struct Provenance {
    pub ledge: LEdgeId,
    pub level: u32,
    pub window_index: usize,
    /// Number of same-level crossings inside the window.
    pub same_level_crossings: u32,
    pub correction: Option<CorrectionInfo>,
}

#[derive(Debug, Clone)]
pub struct BasisFn {
    pub spline: SplineFn,
    pub provenance: Provenance,
}

/// True when every grid point (t, s) is an alive vertex, each fixed s lies
/// on a single row l-edge across all t, and each fixed t on a single column
/// l-edge across all s. An optional punctured point is skipped (it need not
/// be a vertex at all).
fn punctured_grid_supported(
    sim: &RemovalSim,
    frame: Frame,
    ts: &[Coord],
    ss: &[Coord],
    hole: Option<(&Coord, &Coord)>,
) -> bool {
    let is_hole = |t: &Coord, s: &Coord| hole.is_some_and(|(ht, hs)| t == ht && s == hs);
    for s in ss {
        let mut row: Option<LEdgeId> = None;
        for t in ts {
            if is_hole(t, s) {
                continue;
            }
            let (x, y) = frame.xy(t, s);
            let Some(vid) = sim.vertex_at(&x, &y) else {
                return false;
            };
            let v = sim.mesh.vertex(vid);
            let r = frame.row_support(v);
            if *row.get_or_insert(r) != r {
                return false;
            }
        }
    }
    for t in ts {
        let mut col: Option<LEdgeId> = None;
        for s in ss {
            if is_hole(t, s) {
                continue;
            }
            let (x, y) = frame.xy(t, s);
            let vid = sim.vertex_at(&x, &y).expect("checked above");
            let v = sim.mesh.vertex(vid);
            let c = frame.col_support(v);
            if *col.get_or_insert(c) != c {
                return false;
            }
        }
    }
    true
}

fn grid_supported(sim: &RemovalSim, frame: Frame, ts: &[Coord], ss: &[Coord]) -> bool {
    punctured_grid_supported(sim, frame, ts, ss, None)
}

#[allow(clippy::too_many_arguments)]
fn window_vector(
    sim: &RemovalSim,
    frame: Frame,
    ts: &[Coord],
    kt: &[Coord],
    ss: &[Coord],
    ks: &[Coord],
    m: u32,
    n: u32,
) -> ConformalityVector {
    let mut entries = BTreeMap::new();
    for (t, kt_v) in ts.iter().zip(kt) {
        for (s, ks_v) in ss.iter().zip(ks) {
            let k = kt_v * ks_v;
            if k.is_zero() {
                continue;
            }
            let (x, y) = frame.xy(t, s);
            let vid = sim.vertex_at(&x, &y).expect("grid checked");
            entries.insert(vid, k);
        }
    }
    ConformalityVector { entries, m, n }
}

/// Separable construction: find across-direction levels s (containing the
/// edge's own coordinate) whose grid over the window is fully supported.
fn plain_window(
    sim: &RemovalSim,
    frame: Frame,
    edge: &LEdge,
    ts: &[Coord],
    m: u32,
    n: u32,
) -> Result<Option<ConformalityVector>, BasisError> {
    let d_across = frame.across_degree(m, n) as usize;
    let want = d_across + 2;
    let s_e = edge.fixed.clone();
    // Anchor the column supports at the edge's own row.
    let anchors: Vec<LEdgeId> = ts
        .iter()
        .map(|t| {
            let (x, y) = frame.xy(t, &s_e);
            let vid = sim.vertex_at(&x, &y).expect("window vertices are alive");
            frame.col_support(sim.mesh.vertex(vid))
        })
        .collect();
    // Candidate across-levels: same-orientation alive l-edges carrying the
    // full window row with matching column supports.
    let mut candidates: Vec<Coord> = Vec::new();
    for other in &sim.mesh.ledges {
        if other.orientation != edge.orientation || !sim.is_alive(other.id) {
            continue;
        }
        let s = other.fixed.clone();
        let ok = ts.iter().zip(&anchors).all(|(t, anchor)| {
            let (x, y) = frame.xy(t, &s);
            sim.vertex_at(&x, &y).is_some_and(|vid| {
                let v = sim.mesh.vertex(vid);
                frame.row_support(v) == other.id && frame.col_support(v) == *anchor
            })
        });
        if ok {
            candidates.push(s);
        }
    }
    candidates.sort();
    candidates.dedup();
    let Some(pos_e) = candidates.iter().position(|s| *s == s_e) else {
        return Ok(None);
    };
    if candidates.len() < want {
        return Ok(None);
    }
    // Consecutive runs containing the edge's level, most centered first.
    let lo = pos_e.saturating_sub(want - 1);
    let hi = (pos_e + want - 1).min(candidates.len() - 1);
    let mut best: Option<(i64, usize)> = None;
    for start in lo..=hi.saturating_sub(want - 1) {
        let run = &candidates[start..start + want];
        if !run.contains(&s_e) {
            continue;
        }
        if !grid_supported(sim, frame, ts, run) {
            continue;
        }
        let pos = run.iter().position(|s| *s == s_e).expect("contained") as i64;
        let off_center = (2 * pos - (want as i64 - 1)).abs();
        if best.is_none_or(|(b, _)| off_center < b) {
            best = Some((off_center, start));
        }
    }
    let Some((_, start)) = best else {
        return Ok(None);
    };
    let ss = candidates[start..start + want].to_vec();
    let d_along = frame.along_degree(m, n);
    let kt = bspline_conformality(ts, d_along)?;
    let ks = bspline_conformality(&ss, d_across as u32)?;
    Ok(Some(window_vector(sim, frame, ts, &kt, &ss, &ks, m, n)))
}

/// Lexicographic index combinations of size k over 0..len.
struct Combinations {
    indices: Vec<usize>,
    len: usize,
    done: bool,
}

impl Combinations {
    fn new(len: usize, k: usize) -> Self {
        Combinations {
            indices: (0..k).collect(),
            len,
            done: k > len,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let current = self.indices.clone();
        let k = self.indices.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.indices[i] + (k - i) < self.len {
                self.indices[i] += 1;
                for j in i + 1..k {
                    self.indices[j] = self.indices[j - 1] + 1;
                }
                break;
            }
        }
        Some(current)
    }
}

/// Columns for the secondary product: a run of `m + 2` t-values around the
/// short edge whose punctured grid over `ss` is fully supported.
fn secondary_columns(
    sim: &RemovalSim,
    frame: Frame,
    t_q: &Coord,
    cut_s: &Coord,
    ss: &[Coord],
    want: usize,
) -> Option<Vec<Coord>> {
    let mut candidates: Vec<Coord> = Vec::new();
    for other in &sim.mesh.ledges {
        if other.orientation == if frame.horizontal {
            Orientation::Vertical
        } else {
            Orientation::Horizontal
        } {
            if !sim.is_alive(other.id) {
                continue;
            }
            let t = other.fixed.clone();
            let ok = ss.iter().all(|s| {
                if t == *t_q && s == cut_s {
                    return true;
                }
                let (x, y) = frame.xy(&t, s);
                sim.vertex_at(&x, &y)
                    .is_some_and(|vid| frame.col_support(sim.mesh.vertex(vid)) == other.id)
            });
            if ok {
                candidates.push(t);
            }
        }
    }
    candidates.sort();
    candidates.dedup();
    let pos_q = candidates.iter().position(|t| t == t_q)?;
    if candidates.len() < want {
        return None;
    }
    let lo = pos_q.saturating_sub(want - 1);
    let hi = (pos_q + want - 1).min(candidates.len() - 1);
    let mut best: Option<(i64, usize)> = None;
    for start in lo..=hi.saturating_sub(want - 1) {
        let run = &candidates[start..start + want];
        if !run.contains(t_q) {
            continue;
        }
        if !punctured_grid_supported(sim, frame, run, ss, Some((t_q, cut_s))) {
            continue;
        }
        let pos = run.iter().position(|t| t == t_q).expect("contained") as i64;
        let off_center = (2 * pos - (want as i64 - 1)).abs();
        if best.is_none_or(|(b, _)| off_center < b) {
            best = Some((off_center, start));
        }
    }
    best.map(|(_, start)| candidates[start..start + want].to_vec())
}

/// Correction construction for a window containing a crossing with a short
/// same-level transversal edge. Two separable products are combined so that
/// their factors cancel exactly at a virtual cut point on the boundary of
/// the subdomain two levels up. The cancellation clears the short edge's
/// moment system and the cut row's system with the same scale factor, so
/// the combination is conformal and supported on genuine vertices only.
#[allow(clippy::too_many_arguments)]
fn corrected_window(
    sim: &RemovalSim,
    frame: Frame,
    forest: &Forest,
    edge: &LEdge,
    level: u32,
    ts: &[Coord],
    m: u32,
    n: u32,
) -> Result<Option<(ConformalityVector, CorrectionInfo)>, BasisError> {
    let d_across = frame.across_degree(m, n);
    let d_along = frame.along_degree(m, n);
    let want = d_across as usize + 2;
    let s_e = edge.fixed.clone();

    // Same-level crossings inside the window.
    let mut crossings: Vec<(Coord, LEdgeId)> = Vec::new();
    for t in ts {
        let (x, y) = frame.xy(t, &s_e);
        let vid = sim.vertex_at(&x, &y).expect("window vertices are alive");
        let col = frame.col_support(sim.mesh.vertex(vid));
        if sim.mesh.ledge(col).level == Some(level) {
            crossings.push((t.clone(), col));
        }
    }
    for (t_q, short_id) in crossings {
        let short = sim.mesh.ledge(short_id);
        let alive_s: Vec<Coord> = sim
            .alive_vertices(short)
            .into_iter()
            .map(|vid| {
                let v = sim.mesh.vertex(vid);
                if frame.horizontal {
                    v.y.clone()
                } else {
                    v.x.clone()
                }
            })
            .collect();
        if alive_s.len() < want {
            continue;
        }

        // Candidate cut levels: the boundary of the subdomain two levels up
        // that the short edge fails to reach (the canonical choice), then
        // the nearest alive rows beyond either end of the short edge.
        let mut cuts: Vec<Coord> = Vec::new();
        if level >= 2 {
            let parents = forest.subdomains_at(level - 2);
            if let Some(sigma) = parents.iter().find(|sub| {
                let (tlo, thi) = frame.trange(&sub.rect);
                let (slo, shi) = frame.srange(&sub.rect);
                tlo <= t_q && t_q <= thi && slo < s_e && s_e < shi
            }) {
                let (sig_lo, sig_hi) = frame.srange(&sigma.rect);
                if short.hi < sig_hi {
                    cuts.push(sig_hi);
                } else if short.lo > sig_lo {
                    cuts.push(sig_lo);
                }
            }
        }
        let mut above: Vec<Coord> = Vec::new();
        let mut below: Vec<Coord> = Vec::new();
        for other in &sim.mesh.ledges {
            if other.orientation != edge.orientation || !sim.is_alive(other.id) {
                continue;
            }
            if other.fixed > short.hi {
                above.push(other.fixed.clone());
            } else if other.fixed < short.lo {
                below.push(other.fixed.clone());
            }
        }
        above.sort();
        above.dedup();
        below.sort();
        below.dedup();
        cuts.extend(above.into_iter().take(3));
        cuts.extend(below.into_iter().rev().take(3));

        for cut_s in cuts {
            // Primary across-window: the cut, the crossing with the edge
            // being processed, and alive short-edge rows nearest the cut.
            let mut pool1: Vec<Coord> = alive_s.iter().filter(|s| **s != s_e).cloned().collect();
            pool1.sort_by(|a, b| {
                let da = (a - &cut_s).abs();
                let db = (b - &cut_s).abs();
                da.cmp(&db).then(a.cmp(b))
            });
            if pool1.len() < want - 2 {
                continue;
            }
            let kt = bspline_conformality(ts, d_along)?;
            let at = |sv: &[Coord], kv: &[Coord], s: &Coord| -> Coord {
                sv.iter()
                    .position(|v| v == s)
                    .map(|i| kv[i].clone())
                    .unwrap_or_else(Coord::zero)
            };
            let mut primary_found = None;
            for combo in Combinations::new(pool1.len(), want - 2) {
                let mut primary: Vec<Coord> = combo.iter().map(|i| pool1[*i].clone()).collect();
                primary.push(cut_s.clone());
                primary.push(s_e.clone());
                primary.sort();
                primary.dedup();
                if primary.len() != want {
                    continue;
                }
                if punctured_grid_supported(sim, frame, ts, &primary, Some((&t_q, &cut_s))) {
                    primary_found = Some(primary);
                    break;
                }
            }
            let Some(primary) = primary_found else {
                continue;
            };
            let k_primary = bspline_conformality(&primary, d_across)?;
            let k1 = at(ts, &kt, &t_q) * at(&primary, &k_primary, &cut_s);

            // Secondary product: an across-window from the short edge's
            // other alive rows (never touching the edge being processed),
            // with its own run of columns.
            let mut built = None;
            for combo in Combinations::new(pool1.len(), want - 1) {
                let mut ss2: Vec<Coord> = combo.iter().map(|i| pool1[*i].clone()).collect();
                ss2.push(cut_s.clone());
                ss2.sort();
                ss2.dedup();
                if ss2.len() != want {
                    continue;
                }
                let Some(ts2) =
                    secondary_columns(sim, frame, &t_q, &cut_s, &ss2, d_along as usize + 2)
                else {
                    continue;
                };
                // The cut row of both products must live on one l-edge so
                // the scaled factors cancel inside a single moment system.
                let mut union_row: Vec<Coord> = ts.iter().chain(ts2.iter()).cloned().collect();
                union_row.sort();
                union_row.dedup();
                let mut row_ledge: Option<LEdgeId> = None;
                let mut row_ok = true;
                for t in &union_row {
                    if *t == t_q {
                        continue;
                    }
                    let (x, y) = frame.xy(t, &cut_s);
                    match sim.vertex_at(&x, &y) {
                        Some(vid) => {
                            let r = frame.row_support(sim.mesh.vertex(vid));
                            if *row_ledge.get_or_insert(r) != r {
                                row_ok = false;
                                break;
                            }
                        }
                        None => {
                            row_ok = false;
                            break;
                        }
                    }
                }
                if !row_ok {
                    continue;
                }
                built = Some((ss2, ts2));
                break;
            }
            let Some((ss2, ts2)) = built else {
                continue;
            };
            let k_secondary = bspline_conformality(&ss2, d_across)?;
            let kt2 = bspline_conformality(&ts2, d_along)?;
            let k2 = at(&ts2, &kt2, &t_q) * at(&ss2, &k_secondary, &cut_s);
            debug_assert!(!k1.is_zero() && !k2.is_zero());
            let scale = &k1 / &k2;
            // Combined vector: primary product minus the scaled secondary;
            // the virtual cut point drops out exactly.
            let mut entries: BTreeMap<VertexId, Coord> = BTreeMap::new();
            let mut add = |t: &Coord, s: &Coord, value: Coord| {
                if t == &t_q && s == &cut_s {
                    return;
                }
                let (x, y) = frame.xy(t, s);
                let vid = sim
                    .vertex_at(&x, &y)
                    .expect("support points are alive vertices");
                let slot = entries.entry(vid).or_insert_with(Coord::zero);
                *slot += value;
            };
            for (t, kt_v) in ts.iter().zip(&kt) {
                for (s, ks_v) in primary.iter().zip(&k_primary) {
                    add(t, s, kt_v * ks_v);
                }
            }
            for (t, kt_v) in ts2.iter().zip(&kt2) {
                for (s, ks_v) in ss2.iter().zip(&k_secondary) {
                    add(t, s, -(&scale * kt_v * ks_v));
                }
            }
            entries.retain(|_, v| !v.is_zero());
            // The factor at the cut cancels exactly by the choice of scale.
            debug_assert!((&k1 - &scale * &k2).is_zero());
            let cv = ConformalityVector { entries, m, n };
            let info = CorrectionInfo {
                crossing_at: frame.xy(&t_q, &s_e),
                cut_at: frame.xy(&t_q, &cut_s),
                k_primary: k1,
                k_secondary: k2,
            };
            return Ok(Some((cv, info)));
        }
    }
    Ok(None)
}

/// Builds the basis functions along a removal schedule: one function per
/// window of each nontrivial removed edge. Fails loudly when a window fits
/// none of the documented configurations.
pub fn construct_basis_with_order(
    ext: &ExtendedMesh,
    gen: &GeneratedMesh,
    order: &OrderedLEdges,
) -> Result<Vec<BasisFn>, BasisError> {
    let (m, n) = (gen.m, gen.n);
    let mut sim = RemovalSim::new(&ext.mesh);
    let mut fns = Vec::new();
    for step in &order.steps {
        let edge = ext.mesh.ledge(step.ledge);
        let frame = Frame::of(edge);
        let alive = sim.alive_vertices(edge);
        debug_assert_eq!(alive.len(), step.vertex_count);
        let d_along = frame.along_degree(m, n) as usize;
        if alive.len() >= d_along + 2 {
            let ts_all: Vec<Coord> = alive
                .iter()
                .map(|vid| {
                    let v = sim.mesh.vertex(*vid);
                    if frame.horizontal {
                        v.x.clone()
                    } else {
                        v.y.clone()
                    }
                })
                .collect();
            let windows = alive.len() - d_along - 1;
            for w in 0..windows {
                let ts = &ts_all[w..w + d_along + 2];
                let same_level: u32 = ts
                    .iter()
                    .filter(|t| {
                        let (x, y) = frame.xy(t, &edge.fixed);
                        let vid = sim.vertex_at(&x, &y).expect("alive");
                        let col = frame.col_support(sim.mesh.vertex(vid));
                        sim.mesh.ledge(col).level == edge.level
                            && sim.mesh.ledge(col).id != edge.id
                    })
                    .count() as u32;
                let (cv, correction) = if let Some(cv) = plain_window(&sim, frame, edge, ts, m, n)?
                {
                    (cv, None)
                } else if let Some((cv, info)) =
                    corrected_window(&sim, frame, &gen.forest, edge, step.level, ts, m, n)?
                {
                    (cv, Some(info))
                } else {
                    return Err(BasisError::UnhandledConfiguration {
                        ledge: edge.id,
                        window: w,
                        detail: format!(
                            "level {} {:?} edge at {}, window [{}..{}], {} same-level crossings",
                            step.level,
                            edge.orientation,
                            format_coord(&edge.fixed),
                            format_coord(&ts[0]),
                            format_coord(&ts[ts.len() - 1]),
                            same_level
                        ),
                    });
                };
                fns.push(BasisFn {
                    spline: SplineFn::new(cv),
                    provenance: Provenance {
                        ledge: edge.id,
                        level: step.level,
                        window_index: w,
                        same_level_crossings: same_level,
                        correction,
                    },
                });
            }
        }
        sim.remove(step.ledge);
    }
    Ok(fns)
}

/// Basis construction with the standard removal order.
pub fn construct_basis(ext: &ExtendedMesh, gen: &GeneratedMesh) -> Result<Vec<BasisFn>, BasisError> {
    let order = order_ledges(ext, &gen.forest, gen.m, gen.n, TieBreak::Standard)?;
    construct_basis_with_order(ext, gen, &order)
}

/// Outcome of the four basis checks.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub expected_count: usize,
    pub actual_count: usize,
    pub count_ok: bool,
    pub independent: bool,
    pub all_conformal: bool,
    pub span_matches: bool,
}

impl VerificationReport {
    pub fn all_ok(&self) -> bool {
        self.count_ok && self.independent && self.all_conformal && self.span_matches
    }
}

fn stack_vectors(mesh: &TMesh, vectors: &[&ConformalityVector]) -> SparseIntMatrix {
    let mut mat = SparseIntMatrix::new(mesh.vertices.len());
    for cv in vectors {
        let entries: Vec<(usize, Coord)> = cv
            .entries
            .iter()
            .map(|(vid, k)| (vid.0 as usize, k.clone()))
            .collect();
        mat.push_rational_row(&entries);
    }
    mat
}

/// Verifies a basis against the expected dimension: count, exact linear
/// independence, membership of every vector, and span equality with the
/// nullspace of the assembled moment system.
pub fn verify_basis(
    fns: &[BasisFn],
    ext: &ExtendedMesh,
    expected_count: usize,
    m: u32,
    n: u32,
) -> VerificationReport {
    let mesh = &ext.mesh;
    let vectors: Vec<&ConformalityVector> = fns.iter().map(|f| &f.spline.cv).collect();
    let count_ok = fns.len() == expected_count;
    let rank_own = stack_vectors(mesh, &vectors).rank();
    let independent = rank_own == fns.len();
    let all_conformal = vectors.iter().all(|cv| cv.is_conformal(mesh));
    let system = crate::conformality::assemble_w(mesh, m, n);
    let null = crate::conformality::nullspace_basis(&system, m, n);
    let rank_null = stack_vectors(mesh, &null.iter().collect::<Vec<_>>()).rank();
    let mut all: Vec<&ConformalityVector> = vectors.clone();
    all.extend(null.iter());
    let rank_stacked = stack_vectors(mesh, &all).rank();
    let span_matches =
        rank_null == null.len() && rank_stacked == rank_null && rank_own == rank_null;
    VerificationReport {
        expected_count,
        actual_count: fns.len(),
        count_ok,
        independent,
        all_conformal,
        span_matches,
    }
}
