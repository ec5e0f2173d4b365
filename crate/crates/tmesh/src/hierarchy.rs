//! Hierarchical T-mesh generation.
//!
//! A mesh of the restricted hierarchical class is produced level by level:
//! the level-0 tensor mesh is partitioned into subdomains of (m-1) x (n-1)
//! cells (smaller near the right or upper edge of the partitioned region),
//! a scripted subset of subdomains is subdivided at exact cell midpoints,
//! and each subdivided subdomain becomes the region partitioned at the next
//! level. Isolated subdomains (subdivided, not touching the mesh boundary,
//! with no subdivided edge-neighbor) are counted per level; their total
//! enters the closed-form dimension count.

use crate::coord::{coord, midpoint, Coord};
use crate::mesh::{build_tmesh, CellId, MeshError, Rect, Segment, TMesh};
use std::collections::BTreeMap;
use thiserror::Error;

/// Path address of a subdomain: entry k is the (column, row) position inside
/// its region's partition grid at level k.
pub type Address = Vec<(u32, u32)>;

pub fn format_address(a: &Address) -> String {
    a.iter()
        .map(|(c, r)| format!("{c},{r}"))
        .collect::<Vec<_>>()
        .join("/")
}

/// Deterministic refinement script for one mesh.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HierSpec {
    pub m: u32,
    pub n: u32,
    pub p: u32,
    pub q: u32,
    /// Level-0 x coordinates (p+1 values); uniform integers when absent.
    pub x_coords: Option<Vec<Coord>>,
    /// Level-0 y coordinates (q+1 values); uniform integers when absent.
    pub y_coords: Option<Vec<Coord>>,
    /// Addresses to subdivide, one list per level.
    pub script: Vec<Vec<Address>>,
}

impl HierSpec {
    pub fn tensor(m: u32, n: u32, p: u32, q: u32) -> HierSpec {
        HierSpec {
            m,
            n,
            p,
            q,
            x_coords: None,
            y_coords: None,
            script: Vec::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Subdomain {
    pub level: u32,
    pub address: Address,
    pub col: u32,
    pub row: u32,
    pub rect: Rect,
    /// Cell column boundaries of the subdomain's local grid at partition time.
    pub x_cells: Vec<Coord>,
    /// Cell row boundaries of the subdomain's local grid at partition time.
    pub y_cells: Vec<Coord>,
    /// Cells of the final mesh covered by the subdomain rectangle.
    pub cells: Vec<CellId>,
    pub subdivided: bool,
    pub boundary: bool,
    pub isolated: bool,
}

/// Local tensor mesh that gets partitioned into subdomains of one level.
#[derive(Debug, Clone)]
pub struct Region {
    /// Level of the subdomains this region partitions into.
    pub level: u32,
    /// Address of the subdivided subdomain this region came from; empty for
    /// the initial tensor mesh.
    pub parent: Address,
    pub x_coords: Vec<Coord>,
    pub y_coords: Vec<Coord>,
}

#[derive(Debug, Clone)]
pub struct RegionGrid {
    pub region: Region,
    pub cols: u32,
    pub rows: u32,
    /// Row-major: index = row * cols + col.
    pub subdomains: Vec<Subdomain>,
}

impl RegionGrid {
    pub fn subdomain(&self, col: u32, row: u32) -> &Subdomain {
        &self.subdomains[(row * self.cols + col) as usize]
    }
}

/// All partition grids produced during generation, grouped by level.
#[derive(Debug, Clone, Default)]
pub struct Forest {
    pub levels: Vec<Vec<RegionGrid>>,
}

impl Forest {
    /// Subdomains of one level across all regions.
    pub fn subdomains_at(&self, level: u32) -> Vec<&Subdomain> {
        self.levels
            .get(level as usize)
            .map(|grids| grids.iter().flat_map(|g| g.subdomains.iter()).collect())
            .unwrap_or_default()
    }

    pub fn find(&self, address: &Address) -> Option<&Subdomain> {
        if address.is_empty() {
            return None;
        }
        let level = address.len() - 1;
        self.levels.get(level)?.iter().find_map(|g| {
            (g.region.parent == address[..level])
                .then(|| {
                    let (c, r) = address[level];
                    (c < g.cols && r < g.rows).then(|| g.subdomain(c, r))
                })
                .flatten()
        })
    }
}

/// A mesh together with the refinement structure it was generated from.
#[derive(Debug, Clone)]
pub struct GeneratedMesh {
    pub mesh: TMesh,
    pub forest: Forest,
    pub m: u32,
    pub n: u32,
    pub spec: HierSpec,
}

#[derive(Debug, Error)]
pub enum HierError {
    #[error("region has no cells")]
    DegenerateRegion,
    #[error("degrees must be at least 2 to form subdomains, got ({0}, {1})")]
    DegreeTooSmall(u32, u32),
    #[error("address {0} appears twice in one level")]
    DuplicateAddress(String),
    #[error("address {0} does not lie inside a subdomain subdivided at the previous level")]
    StaleAddress(String),
    #[error("address {0} is out of range for its region")]
    AddressOutOfRange(String),
    #[error("subdomain {0} is already subdivided")]
    AlreadySubdivided(String),
    #[error("coordinate list must be strictly increasing with {0} entries")]
    BadCoords(usize),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Partition cut indices: steps of `d` from 0, with the remainder block
/// (of size in 1..=d) absorbed at the upper end.
fn cut_indices(p: usize, d: usize) -> Vec<usize> {
    debug_assert!(p >= 1 && d >= 1);
    let s = (p - 1) / d;
    let mut cuts: Vec<usize> = (0..=s).map(|i| i * d).collect();
    cuts.push(p);
    cuts
}

/// Splits a region into the subdomain grid for degrees (m, n). Subdomains
/// touching the boundary of `domain` (the whole mesh domain) are flagged
/// `boundary`.
pub fn partition_subdomains(
    region: &Region,
    m: u32,
    n: u32,
    domain: &Rect,
) -> Result<RegionGrid, HierError> {
    if m < 2 || n < 2 {
        return Err(HierError::DegreeTooSmall(m, n));
    }
    let p = region.x_coords.len().saturating_sub(1);
    let q = region.y_coords.len().saturating_sub(1);
    if p == 0 || q == 0 {
        return Err(HierError::DegenerateRegion);
    }
    let xcuts = cut_indices(p, (m - 1) as usize);
    let ycuts = cut_indices(q, (n - 1) as usize);
    let cols = (xcuts.len() - 1) as u32;
    let rows = (ycuts.len() - 1) as u32;
    let mut subdomains = Vec::with_capacity((cols * rows) as usize);
    for row in 0..rows {
        for col in 0..cols {
            let (xa, xb) = (xcuts[col as usize], xcuts[col as usize + 1]);
            let (ya, yb) = (ycuts[row as usize], ycuts[row as usize + 1]);
            let rect = Rect {
                x0: region.x_coords[xa].clone(),
                x1: region.x_coords[xb].clone(),
                y0: region.y_coords[ya].clone(),
                y1: region.y_coords[yb].clone(),
            };
            let boundary = rect.x0 == domain.x0
                || rect.x1 == domain.x1
                || rect.y0 == domain.y0
                || rect.y1 == domain.y1;
            let mut address = region.parent.clone();
            address.push((col, row));
            subdomains.push(Subdomain {
                level: region.level,
                address,
                col,
                row,
                rect,
                x_cells: region.x_coords[xa..=xb].to_vec(),
                y_cells: region.y_coords[ya..=yb].to_vec(),
                cells: Vec::new(),
                subdivided: false,
                boundary,
                isolated: false,
            });
        }
    }
    Ok(RegionGrid {
        region: region.clone(),
        cols,
        rows,
        subdomains,
    })
}

/// Midline segments subdividing every cell of the subdomain, tagged one level
/// deeper than the subdomain itself.
fn midline_segments(sub: &Subdomain) -> Vec<Segment> {
    let level = sub.level + 1;
    let mut out = Vec::new();
    for w in sub.x_cells.windows(2) {
        let x = midpoint(&w[0], &w[1]);
        out.push(Segment::vertical(x, sub.rect.y0.clone(), sub.rect.y1.clone()).with_level(level));
    }
    for w in sub.y_cells.windows(2) {
        let y = midpoint(&w[0], &w[1]);
        out.push(
            Segment::horizontal(y, sub.rect.x0.clone(), sub.rect.x1.clone()).with_level(level),
        );
    }
    out
}

/// Coordinates with midpoints inserted between consecutive entries.
fn refined_coords(coords: &[Coord]) -> Vec<Coord> {
    let mut out = Vec::with_capacity(coords.len() * 2 - 1);
    for w in coords.windows(2) {
        out.push(w[0].clone());
        out.push(midpoint(&w[0], &w[1]));
    }
    out.push(coords[coords.len() - 1].clone());
    out
}

/// Subdivides one subdomain of an existing mesh at exact midpoints.
pub fn subdivide_subdomain(mesh: &TMesh, sub: &Subdomain) -> Result<TMesh, HierError> {
    if sub.subdivided {
        return Err(HierError::AlreadySubdivided(format_address(&sub.address)));
    }
    // Every cell of the subdomain's partition-time grid must still be an
    // undivided cell of the mesh.
    for j in 0..sub.y_cells.len() - 1 {
        for i in 0..sub.x_cells.len() - 1 {
            let found = mesh.cells.iter().any(|c| {
                c.x0 == sub.x_cells[i]
                    && c.x1 == sub.x_cells[i + 1]
                    && c.y0 == sub.y_cells[j]
                    && c.y1 == sub.y_cells[j + 1]
            });
            if !found {
                return Err(HierError::StaleAddress(format_address(&sub.address)));
            }
        }
    }
    let mut segments = mesh.segments();
    segments.extend(midline_segments(sub));
    Ok(build_tmesh(&segments)?)
}

fn default_coords(count: u32) -> Vec<Coord> {
    (0..=count).map(|i| coord(i as i64)).collect()
}

fn validated_coords(given: &Option<Vec<Coord>>, count: u32) -> Result<Vec<Coord>, HierError> {
    match given {
        None => Ok(default_coords(count)),
        Some(c) => {
            if c.len() != count as usize + 1 || c.windows(2).any(|w| w[0] >= w[1]) {
                Err(HierError::BadCoords(count as usize + 1))
            } else {
                Ok(c.clone())
            }
        }
    }
}

/// Generates the mesh and its subdomain forest from a refinement script.
/// Deterministic: identical specs produce identical meshes and id layouts.
pub fn generate(spec: &HierSpec) -> Result<GeneratedMesh, HierError> {
    if spec.p == 0 || spec.q == 0 {
        return Err(HierError::DegenerateRegion);
    }
    let xs = validated_coords(&spec.x_coords, spec.p)?;
    let ys = validated_coords(&spec.y_coords, spec.q)?;
    let mut segments = crate::mesh::tensor_segments(&xs, &ys);
    let mut forest = Forest::default();
    let domain = Rect {
        x0: xs[0].clone(),
        x1: xs[xs.len() - 1].clone(),
        y0: ys[0].clone(),
        y1: ys[ys.len() - 1].clone(),
    };

    let mut regions = vec![Region {
        level: 0,
        parent: Vec::new(),
        x_coords: xs,
        y_coords: ys,
    }];
    for (level, addresses) in spec.script.iter().enumerate() {
        if regions.is_empty() && !addresses.is_empty() {
            return Err(HierError::StaleAddress(format_address(&addresses[0])));
        }
        let mut grids: Vec<RegionGrid> = Vec::with_capacity(regions.len());
        let mut by_parent: BTreeMap<Address, usize> = BTreeMap::new();
        for region in &regions {
            by_parent.insert(region.parent.clone(), grids.len());
            grids.push(partition_subdomains(region, spec.m, spec.n, &domain)?);
        }
        for address in addresses {
            let text = format_address(address);
            if address.len() != level + 1 {
                return Err(HierError::StaleAddress(text));
            }
            let grid_index = *by_parent
                .get(&address[..level])
                .ok_or_else(|| HierError::StaleAddress(text.clone()))?;
            let grid = &mut grids[grid_index];
            let (col, row) = address[level];
            if col >= grid.cols || row >= grid.rows {
                return Err(HierError::AddressOutOfRange(text));
            }
            let sub = &mut grid.subdomains[(row * grid.cols + col) as usize];
            if sub.subdivided {
                return Err(HierError::DuplicateAddress(text));
            }
            sub.subdivided = true;
        }
        let mut next_regions = Vec::new();
        for grid in &grids {
            for sub in &grid.subdomains {
                if sub.subdivided {
                    segments.extend(midline_segments(sub));
                    next_regions.push(Region {
                        level: sub.level + 1,
                        parent: sub.address.clone(),
                        x_coords: refined_coords(&sub.x_cells),
                        y_coords: refined_coords(&sub.y_cells),
                    });
                }
            }
        }
        forest.levels.push(grids);
        regions = next_regions;
    }

    let mesh = build_tmesh(&segments)?;
    for grids in &mut forest.levels {
        for grid in grids {
            for sub in &mut grid.subdomains {
                sub.cells = mesh.cells_in(&sub.rect);
            }
        }
    }
    apply_isolated_flags(&mut forest);
    Ok(GeneratedMesh {
        mesh,
        forest,
        m: spec.m,
        n: spec.n,
        spec: spec.clone(),
    })
}

fn share_positive_segment(a: &Rect, b: &Rect) -> bool {
    let overlap = |lo1: &Coord, hi1: &Coord, lo2: &Coord, hi2: &Coord| {
        lo1.max(lo2) < hi1.min(hi2)
    };
    let touch_x = a.x1 == b.x0 || b.x1 == a.x0;
    let touch_y = a.y1 == b.y0 || b.y1 == a.y0;
    (touch_x && overlap(&a.y0, &a.y1, &b.y0, &b.y1))
        || (touch_y && overlap(&a.x0, &a.x1, &b.x0, &b.x1))
}

fn isolated_now(forest: &Forest, level: usize, sub: &Subdomain) -> bool {
    if !sub.subdivided || sub.boundary {
        return false;
    }
    // Adjacency means sharing a boundary segment of positive length; corner
    // contact does not count. Neighbors may live in a different region.
    forest.levels[level]
        .iter()
        .flat_map(|g| g.subdomains.iter())
        .filter(|other| other.address != sub.address)
        .all(|other| !(other.subdivided && share_positive_segment(&sub.rect, &other.rect)))
}

fn apply_isolated_flags(forest: &mut Forest) {
    let snapshot = forest.clone();
    for (level, grids) in forest.levels.iter_mut().enumerate() {
        for grid in grids {
            for sub in &mut grid.subdomains {
                sub.isolated = isolated_now(&snapshot, level, sub);
            }
        }
    }
}

/// Total and per-level counts of isolated subdomains, recomputed from the
/// subdivided/boundary structure. Index k counts subdomains at level k.
pub fn isolated_counts(forest: &Forest) -> (usize, Vec<usize>) {
    let mut per_level = Vec::with_capacity(forest.levels.len());
    for (level, grids) in forest.levels.iter().enumerate() {
        let count = grids
            .iter()
            .flat_map(|g| g.subdomains.iter())
            .filter(|s| isolated_now(forest, level, s))
            .count();
        per_level.push(count);
    }
    (per_level.iter().sum(), per_level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coord::ratio;

    fn spec33() -> HierSpec {
        HierSpec::tensor(3, 3, 5, 6)
    }

    fn addr(entries: &[(u32, u32)]) -> Address {
        entries.to_vec()
    }

    #[test]
    fn partition_widths_follow_step_rule() {
        let g = generate(&HierSpec {
            script: vec![vec![]],
            ..spec33()
        })
        .unwrap();
        let grid = &g.forest.levels[0][0];
        assert_eq!((grid.cols, grid.rows), (3, 3));
        let widths: Vec<Coord> = (0..grid.cols)
            .map(|c| {
                let s = grid.subdomain(c, 0);
                &s.rect.x1 - &s.rect.x0
            })
            .collect();
        assert_eq!(widths, vec![coord(2), coord(2), coord(1)]);
        let heights: Vec<Coord> = (0..grid.rows)
            .map(|r| {
                let s = grid.subdomain(0, r);
                &s.rect.y1 - &s.rect.y0
            })
            .collect();
        assert_eq!(heights, vec![coord(2), coord(2), coord(2)]);
    }

    #[test]
    fn degree_two_subdomains_are_single_cells() {
        let g = generate(&HierSpec {
            script: vec![vec![]],
            ..HierSpec::tensor(2, 2, 4, 3)
        })
        .unwrap();
        let grid = &g.forest.levels[0][0];
        assert_eq!((grid.cols, grid.rows), (4, 3));
        for s in &grid.subdomains {
            assert_eq!(s.x_cells.len(), 2);
            assert_eq!(s.y_cells.len(), 2);
        }
    }

    #[test]
    fn mixed_degree_partition() {
        let g = generate(&HierSpec {
            script: vec![vec![]],
            ..HierSpec::tensor(4, 3, 6, 6)
        })
        .unwrap();
        let grid = &g.forest.levels[0][0];
        assert_eq!((grid.cols, grid.rows), (2, 3));
    }

    #[test]
    fn multiple_of_step_keeps_last_block_full() {
        // p = 4, m = 3: cuts at 0, 2, 4.
        assert_eq!(cut_indices(4, 2), vec![0, 2, 4]);
        assert_eq!(cut_indices(5, 2), vec![0, 2, 4, 5]);
        assert_eq!(cut_indices(2, 2), vec![0, 2]);
        assert_eq!(cut_indices(1, 2), vec![0, 1]);
    }

    #[test]
    fn empty_script_yields_tensor_mesh() {
        let g = generate(&spec33()).unwrap();
        assert!(g.mesh.is_tensor_product());
        assert_eq!(g.mesh.cells.len(), 30);
    }

    #[test]
    fn subdividing_single_cell_subdomain_adds_a_cross() {
        let g = generate(&HierSpec {
            script: vec![vec![addr(&[(1, 1)])]],
            ..HierSpec::tensor(2, 2, 3, 3)
        })
        .unwrap();
        let crosses: Vec<_> = g
            .mesh
            .ledges
            .iter()
            .filter(|e| e.level == Some(1))
            .collect();
        assert_eq!(crosses.len(), 2);
        for e in crosses {
            assert_eq!(e.vertices.len(), 3);
            assert!(e.interior);
        }
    }

    #[test]
    fn subdividing_full_subdomain_quarters_its_cells() {
        let g = generate(&HierSpec {
            script: vec![vec![addr(&[(1, 1)])]],
            ..spec33()
        })
        .unwrap();
        let sub = g.forest.find(&addr(&[(1, 1)])).unwrap();
        assert_eq!(sub.cells.len(), 16);
        assert_eq!(g.mesh.cells.len(), 30 - 4 + 16);
        // Inside the subdomain the local grid now has three interior lines
        // per direction (quarter lines plus the reinforced midline).
        let v = g
            .mesh
            .ledges
            .iter()
            .filter(|e| {
                e.orientation == crate::mesh::Orientation::Vertical
                    && e.fixed > sub.rect.x0
                    && e.fixed < sub.rect.x1
            })
            .count();
        let h = g
            .mesh
            .ledges
            .iter()
            .filter(|e| {
                e.orientation == crate::mesh::Orientation::Horizontal
                    && e.fixed > sub.rect.y0
                    && e.fixed < sub.rect.y1
            })
            .count();
        assert_eq!((v, h), (3, 3));
    }

    #[test]
    fn two_full_subdomains_give_fifty_four_cells() {
        let g = generate(&HierSpec {
            script: vec![vec![addr(&[(1, 1)]), addr(&[(0, 0)])]],
            ..spec33()
        })
        .unwrap();
        assert_eq!(g.mesh.cells.len(), 54);
        for a in [addr(&[(1, 1)]), addr(&[(0, 0)])] {
            assert_eq!(g.forest.find(&a).unwrap().cells.len(), 16);
        }
    }

    #[test]
    fn three_level_script_reaches_level_two() {
        let g = generate(&HierSpec {
            script: vec![
                vec![addr(&[(1, 1)]), addr(&[(0, 0)])],
                vec![
                    addr(&[(1, 1), (0, 0)]),
                    addr(&[(1, 1), (1, 1)]),
                    addr(&[(0, 0), (1, 1)]),
                ],
            ],
            ..spec33()
        })
        .unwrap();
        let max_level = g.mesh.ledges.iter().filter_map(|e| e.level).max();
        assert_eq!(max_level, Some(2));
    }

    #[test]
    fn single_isolated_subdomain() {
        let g = generate(&HierSpec {
            script: vec![vec![addr(&[(1, 1)])]],
            ..spec33()
        })
        .unwrap();
        let (delta, per_level) = isolated_counts(&g.forest);
        assert_eq!(delta, 1);
        assert_eq!(per_level, vec![1]);
        assert!(g.forest.find(&addr(&[(1, 1)])).unwrap().isolated);
    }

    #[test]
    fn adjacent_subdivided_subdomains_are_not_isolated() {
        let g = generate(&HierSpec {
            script: vec![vec![addr(&[(1, 1)]), addr(&[(1, 0)])]],
            ..HierSpec::tensor(3, 3, 6, 6)
        })
        .unwrap();
        let (delta, _) = isolated_counts(&g.forest);
        assert_eq!(delta, 0);
    }

    #[test]
    fn corner_contact_is_not_adjacency() {
        let g = generate(&HierSpec {
            script: vec![vec![addr(&[(1, 1)]), addr(&[(0, 0)])]],
            ..HierSpec::tensor(3, 3, 6, 6)
        })
        .unwrap();
        // (1,1) is interior and diagonal to the boundary subdomain (0,0).
        let (delta, _) = isolated_counts(&g.forest);
        assert_eq!(delta, 1);
    }

    #[test]
    fn boundary_subdomains_are_never_isolated() {
        let g = generate(&HierSpec {
            script: vec![vec![addr(&[(0, 0)])]],
            ..spec33()
        })
        .unwrap();
        let (delta, _) = isolated_counts(&g.forest);
        assert_eq!(delta, 0);
    }

    #[test]
    fn recomputing_isolated_flags_is_idempotent() {
        let g = generate(&HierSpec {
            script: vec![vec![addr(&[(1, 1)]), addr(&[(2, 0)])]],
            ..spec33()
        })
        .unwrap();
        let (_, per_level) = isolated_counts(&g.forest);
        let stored: Vec<usize> = g
            .forest
            .levels
            .iter()
            .map(|grids| {
                grids
                    .iter()
                    .flat_map(|gr| gr.subdomains.iter())
                    .filter(|s| s.isolated)
                    .count()
            })
            .collect();
        assert_eq!(per_level, stored);
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = HierSpec {
            script: vec![
                vec![addr(&[(1, 1)]), addr(&[(2, 0)])],
                vec![addr(&[(1, 1), (0, 0)])],
            ],
            ..spec33()
        };
        let a = generate(&spec).unwrap();
        let b = generate(&spec).unwrap();
        assert_eq!(a.mesh.segments(), b.mesh.segments());
        assert_eq!(a.mesh.vertices.len(), b.mesh.vertices.len());
        for (va, vb) in a.mesh.vertices.iter().zip(&b.mesh.vertices) {
            assert_eq!((&va.x, &va.y), (&vb.x, &vb.y));
        }
    }

    #[test]
    fn stale_and_duplicate_addresses_are_rejected() {
        let dup = HierSpec {
            script: vec![vec![addr(&[(1, 1)]), addr(&[(1, 1)])]],
            ..spec33()
        };
        assert!(matches!(
            generate(&dup),
            Err(HierError::DuplicateAddress(_))
        ));
        let stale = HierSpec {
            script: vec![vec![addr(&[(1, 1)])], vec![addr(&[(0, 0), (0, 0)])]],
            ..spec33()
        };
        assert!(matches!(generate(&stale), Err(HierError::StaleAddress(_))));
        let range = HierSpec {
            script: vec![vec![addr(&[(7, 0)])]],
            ..spec33()
        };
        assert!(matches!(
            generate(&range),
            Err(HierError::AddressOutOfRange(_))
        ));
    }

    #[test]
    fn standalone_subdivision_matches_generate() {
        let base = generate(&HierSpec {
            script: vec![vec![]],
            ..spec33()
        })
        .unwrap();
        let sub = base.forest.find(&addr(&[(1, 1)])).unwrap();
        let manual = subdivide_subdomain(&base.mesh, sub).unwrap();
        let scripted = generate(&HierSpec {
            script: vec![vec![addr(&[(1, 1)])]],
            ..spec33()
        })
        .unwrap();
        assert_eq!(manual.segments(), scripted.mesh.segments());
        assert!(matches!(
            subdivide_subdomain(&scripted.mesh, sub),
            Err(HierError::StaleAddress(_))
        ));
    }

    #[test]
    fn midpoints_are_dyadic() {
        let g = generate(&HierSpec {
            script: vec![
                vec![addr(&[(1, 1)])],
                vec![addr(&[(1, 1), (0, 0)])],
            ],
            ..spec33()
        })
        .unwrap();
        let level2: Vec<_> = g
            .mesh
            .ledges
            .iter()
            .filter(|e| e.level == Some(2))
            .collect();
        assert!(!level2.is_empty());
        assert!(level2.iter().any(|e| e.fixed == ratio(9, 4)));
    }
}
