//! Exact sparse linear algebra over the rationals.
//!
//! Rows are cleared to integers and eliminated fraction-free (cross
//! multiplication with gcd scaling, content reduction after every update), so
//! intermediate growth stays bounded and no rounding ever occurs. Pivot
//! selection is deterministic: sparsest row first, then smallest leading
//! magnitude, then insertion order.

use crate::coord::Coord;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Sparse row: strictly increasing column indices, nonzero integer entries.
type SparseRow = Vec<(usize, BigInt)>;

/// Sparse integer matrix used for rank and nullspace computations.
#[derive(Debug, Clone)]
pub struct SparseIntMatrix {
    ncols: usize,
    rows: Vec<SparseRow>,
}

/// Row echelon form: pivot rows sorted by leading column.
#[derive(Debug)]
pub struct Echelon {
    ncols: usize,
    pivots: Vec<SparseRow>,
}

fn content_reduce(row: &mut SparseRow) {
    let mut g = BigInt::zero();
    for (_, v) in row.iter() {
        g = g.gcd(v);
        if g.is_one() {
            return;
        }
    }
    if g > BigInt::one() {
        for (_, v) in row.iter_mut() {
            *v = &*v / &g;
        }
    }
}

/// dst = (a * dst) - (b * src), merging sorted sparse rows.
fn row_combine(dst: &SparseRow, a: &BigInt, src: &SparseRow, b: &BigInt) -> SparseRow {
    let mut out = Vec::with_capacity(dst.len() + src.len());
    let (mut i, mut j) = (0, 0);
    while i < dst.len() || j < src.len() {
        match (dst.get(i), src.get(j)) {
            (Some((ci, vi)), Some((cj, vj))) if ci == cj => {
                let v = a * vi - b * vj;
                if !v.is_zero() {
                    out.push((*ci, v));
                }
                i += 1;
                j += 1;
            }
            (Some((ci, vi)), Some((cj, _))) if ci < cj => {
                out.push((*ci, a * vi));
                i += 1;
            }
            (Some(_), Some((cj, vj))) => {
                out.push((*cj, -(b * vj)));
                j += 1;
            }
            (Some((ci, vi)), None) => {
                out.push((*ci, a * vi));
                i += 1;
            }
            (None, Some((cj, vj))) => {
                out.push((*cj, -(b * vj)));
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

impl SparseIntMatrix {
    pub fn new(ncols: usize) -> Self {
        SparseIntMatrix {
            ncols,
            rows: Vec::new(),
        }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    /// Adds a rational row; denominators are cleared and content removed.
    pub fn push_rational_row(&mut self, entries: &[(usize, Coord)]) {
        let mut lcm = BigInt::one();
        for (_, v) in entries {
            lcm = lcm.lcm(v.denom());
        }
        let mut row: SparseRow = entries
            .iter()
            .filter(|(_, v)| !v.is_zero())
            .map(|(c, v)| (*c, v.numer() * (&lcm / v.denom())))
            .collect();
        row.sort_by_key(|(c, _)| *c);
        row.dedup_by(|later, first| {
            if later.0 == first.0 {
                first.1 += std::mem::take(&mut later.1);
                true
            } else {
                false
            }
        });
        row.retain(|(_, v)| !v.is_zero());
        content_reduce(&mut row);
        debug_assert!(row.iter().all(|(c, _)| *c < self.ncols));
        if !row.is_empty() {
            self.rows.push(row);
        }
    }

    pub fn rank(&self) -> usize {
        self.echelon().rank()
    }

    /// Forward elimination to row echelon form.
    pub fn echelon(&self) -> Echelon {
        // Rows bucketed by leading column; buckets processed left to right.
        let mut buckets: Vec<Vec<(usize, SparseRow)>> = vec![Vec::new(); self.ncols];
        for (id, row) in self.rows.iter().enumerate() {
            let mut r = row.clone();
            content_reduce(&mut r);
            if let Some(&(lead, _)) = r.first() {
                buckets[lead].push((id, r));
            }
        }
        let mut next_id = self.rows.len();
        let mut pivots: Vec<SparseRow> = Vec::new();
        for col in 0..self.ncols {
            let mut bucket = std::mem::take(&mut buckets[col]);
            if bucket.is_empty() {
                continue;
            }
            let best = bucket
                .iter()
                .enumerate()
                .min_by(|(_, (ia, ra)), (_, (ib, rb))| {
                    (ra.len(), ra[0].1.magnitude(), ia).cmp(&(
                        rb.len(),
                        rb[0].1.magnitude(),
                        ib,
                    ))
                })
                .map(|(i, _)| i)
                .expect("bucket is nonempty");
            let (_, pivot) = bucket.swap_remove(best);
            let plead = pivot[0].1.clone();
            for (_, row) in bucket {
                let rlead = &row[0].1;
                let g = plead.gcd(rlead);
                let mut reduced = row_combine(&row, &(&plead / &g), &pivot, &(rlead / &g));
                content_reduce(&mut reduced);
                if let Some(&(lead, _)) = reduced.first() {
                    debug_assert!(lead > col);
                    buckets[lead].push((next_id, reduced));
                    next_id += 1;
                }
            }
            pivots.push(pivot);
        }
        Echelon {
            ncols: self.ncols,
            pivots,
        }
    }
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Nullspace basis in the reduced echelon pivot convention: one vector per
    /// free column, entry 1 at that column, scaled to the minimal integer
    /// vector with positive first nonzero entry. Deterministic.
    pub fn nullspace_basis(&self) -> Vec<Vec<Coord>> {
        let mut is_pivot = vec![false; self.ncols];
        for row in &self.pivots {
            is_pivot[row[0].0] = true;
        }
        let mut basis = Vec::with_capacity(self.ncols - self.pivots.len());
        for free in (0..self.ncols).filter(|c| !is_pivot[*c]) {
            let mut x: Vec<BigRational> = vec![BigRational::zero(); self.ncols];
            x[free] = BigRational::one();
            for row in self.pivots.iter().rev() {
                let (lead, lead_val) = (&row[0].0, &row[0].1);
                let mut acc = BigRational::zero();
                for (c, v) in &row[1..] {
                    if !x[*c].is_zero() {
                        acc += BigRational::from_integer(v.clone()) * &x[*c];
                    }
                }
                if !acc.is_zero() {
                    x[*lead] = -acc / BigRational::from_integer(lead_val.clone());
                }
            }
            basis.push(normalize_to_integers(x));
        }
        basis
    }
}

/// Clears denominators, divides by the gcd, and makes the first nonzero
/// entry positive. Entries of the result are integers.
pub fn normalize_to_integers(v: Vec<BigRational>) -> Vec<Coord> {
    let mut lcm = BigInt::one();
    for e in &v {
        if !e.is_zero() {
            lcm = lcm.lcm(e.denom());
        }
    }
    let mut ints: Vec<BigInt> = v
        .iter()
        .map(|e| e.numer() * (&lcm / e.denom()))
        .collect();
    let mut g = BigInt::zero();
    for e in &ints {
        g = g.gcd(e);
    }
    if g > BigInt::one() {
        for e in ints.iter_mut() {
            *e = &*e / &g;
        }
    }
    if let Some(first) = ints.iter().find(|e| !e.is_zero()) {
        if first.is_negative() {
            for e in ints.iter_mut() {
                *e = -e.clone();
            }
        }
    }
    ints.into_iter().map(BigRational::from_integer).collect()
}
