//! Mesh extension for a bidegree.
//!
//! The extended mesh replicates each boundary line outside the domain and
//! prolongs every l-edge with an endpoint on the boundary straight through
//! all the copies. With homogeneous boundary conditions on the enlarged
//! domain the spline space restricted back to the original domain is the
//! space of interest, so all dimension counting happens on extended meshes.

use crate::coord::Coord;
use crate::mesh::{build_tmesh, MeshError, Orientation, Rect, Segment, TMesh};
use num_traits::Zero;
use thiserror::Error;

/// Which boundary lines receive how many copies.
///
/// `Algebraic` copies each vertical boundary line m times and each horizontal
/// one n times; on tensor-product meshes this makes the dimension come out as
/// (#vertical lines - m - 1)(#horizontal lines - n - 1). `Literal` swaps the
/// two counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Pairing {
    #[default]
    Algebraic,
    Literal,
}

impl Pairing {
    pub fn name(self) -> &'static str {
        match self {
            Pairing::Algebraic => "algebraic",
            Pairing::Literal => "literal",
        }
    }

    pub fn parse(s: &str) -> Option<Pairing> {
        match s {
            "algebraic" => Some(Pairing::Algebraic),
            "literal" => Some(Pairing::Literal),
            _ => None,
        }
    }

    /// (copies of vertical boundary lines, copies of horizontal ones).
    fn copy_counts(self, m: u32, n: u32) -> (u32, u32) {
        match self {
            Pairing::Algebraic => (m, n),
            Pairing::Literal => (n, m),
        }
    }
}

/// Outward offsets of the copied lines on each side, strictly increasing and
/// positive. The outermost copy becomes the new boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    pub left: Vec<Coord>,
    pub right: Vec<Coord>,
    pub bottom: Vec<Coord>,
    pub top: Vec<Coord>,
}

impl Placement {
    /// Uniform spacing equal to the smallest cell side length of the mesh.
    pub fn uniform(mesh: &TMesh, m: u32, n: u32, pairing: Pairing) -> Placement {
        let mut step: Option<Coord> = None;
        for c in &mesh.cells {
            for side in [&c.x1 - &c.x0, &c.y1 - &c.y0] {
                if step.as_ref().is_none_or(|s| side < *s) {
                    step = Some(side);
                }
            }
        }
        let step = step.expect("mesh has cells");
        let (vcopies, hcopies) = pairing.copy_counts(m, n);
        let offsets = |count: u32| -> Vec<Coord> {
            (1..=count).map(|i| &step * crate::coord::coord(i as i64)).collect()
        };
        Placement {
            left: offsets(vcopies),
            right: offsets(vcopies),
            bottom: offsets(hcopies),
            top: offsets(hcopies),
        }
    }

    fn validate(&self, vcopies: u32, hcopies: u32) -> Result<(), ExtensionError> {
        for (side, offs, want) in [
            ("left", &self.left, vcopies),
            ("right", &self.right, vcopies),
            ("bottom", &self.bottom, hcopies),
            ("top", &self.top, hcopies),
        ] {
            if offs.len() != want as usize {
                return Err(ExtensionError::WrongCopyCount {
                    side,
                    got: offs.len(),
                    want: want as usize,
                });
            }
            let increasing = offs.windows(2).all(|w| w[0] < w[1]);
            if !increasing || offs.first().is_some_and(|o| *o <= Coord::zero()) {
                return Err(ExtensionError::BadOffsets(side));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ExtensionError {
    #[error("side {side}: {got} copy offsets given, {want} required")]
    WrongCopyCount {
        side: &'static str,
        got: usize,
        want: usize,
    },
    #[error("copy offsets on side {0} must be positive and strictly increasing")]
    BadOffsets(&'static str),
    #[error("degrees must be at least 1, got ({0}, {1})")]
    DegreeTooSmall(u32, u32),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// An extended mesh, remembering the original domain and the pairing used.
#[derive(Debug, Clone)]
pub struct ExtendedMesh {
    pub mesh: TMesh,
    pub inner_domain: Rect,
    pub pairing: Pairing,
    pub m: u32,
    pub n: u32,
    /// Set when the input mesh was itself already an extension.
    pub double_extension: bool,
}

/// Builds the extension of a mesh for degrees (m, n).
///
/// Every boundary line is replicated outside the domain (copy counts chosen
/// by the pairing), and every l-edge with an endpoint on the boundary is
/// extended straight through all copies to the outermost one. Copied lines
/// are tagged level 0; extended l-edges keep their level.
pub fn extend(
    mesh: &TMesh,
    m: u32,
    n: u32,
    pairing: Pairing,
    placement: Option<&Placement>,
) -> Result<ExtendedMesh, ExtensionError> {
    if m < 1 || n < 1 {
        return Err(ExtensionError::DegreeTooSmall(m, n));
    }
    let (vcopies, hcopies) = pairing.copy_counts(m, n);
    let uniform;
    let placement = match placement {
        Some(p) => p,
        None => {
            uniform = Placement::uniform(mesh, m, n, pairing);
            &uniform
        }
    };
    placement.validate(vcopies, hcopies)?;

    let d = &mesh.domain;
    let outer = Rect {
        x0: &d.x0 - placement.left.last().expect("m >= 1"),
        x1: &d.x1 + placement.right.last().expect("m >= 1"),
        y0: &d.y0 - placement.bottom.last().expect("n >= 1"),
        y1: &d.y1 + placement.top.last().expect("n >= 1"),
    };

    let mut segments: Vec<Segment> = Vec::new();
    // Copied boundary lines span the full enlarged domain.
    for off in &placement.left {
        segments
            .push(Segment::vertical(&d.x0 - off, outer.y0.clone(), outer.y1.clone()).with_level(0));
    }
    for off in &placement.right {
        segments
            .push(Segment::vertical(&d.x1 + off, outer.y0.clone(), outer.y1.clone()).with_level(0));
    }
    for off in &placement.bottom {
        segments.push(
            Segment::horizontal(&d.y0 - off, outer.x0.clone(), outer.x1.clone()).with_level(0),
        );
    }
    for off in &placement.top {
        segments.push(
            Segment::horizontal(&d.y1 + off, outer.x0.clone(), outer.x1.clone()).with_level(0),
        );
    }
    // L-edges with an endpoint on the boundary get extended through the
    // copies; everything else is carried over unchanged.
    for e in &mesh.ledges {
        let mut seg = Segment {
            orientation: e.orientation,
            fixed: e.fixed.clone(),
            lo: e.lo.clone(),
            hi: e.hi.clone(),
            level: e.level,
        };
        let (side_lo, side_hi) = match e.orientation {
            Orientation::Horizontal => (&d.x0, &d.x1),
            Orientation::Vertical => (&d.y0, &d.y1),
        };
        let (outer_lo, outer_hi) = match e.orientation {
            Orientation::Horizontal => (&outer.x0, &outer.x1),
            Orientation::Vertical => (&outer.y0, &outer.y1),
        };
        if seg.lo == *side_lo {
            seg.lo = outer_lo.clone();
        }
        if seg.hi == *side_hi {
            seg.hi = outer_hi.clone();
        }
        segments.push(seg);
    }

    let mut extended = build_tmesh(&segments)?;
    let double_extension = mesh.was_extended;
    extended.was_extended = true;
    Ok(ExtendedMesh {
        mesh: extended,
        inner_domain: d.clone(),
        pairing,
        m,
        n,
        double_extension,
    })
}
