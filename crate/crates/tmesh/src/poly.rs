//! Exact univariate and bivariate polynomials over rational coefficients.

use crate::coord::{coord, Coord};
use num_traits::Zero;

/// Univariate polynomial, `coeffs[i]` is the coefficient of `t^i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly1 {
    pub coeffs: Vec<Coord>,
}

impl Poly1 {
    pub fn zero() -> Self {
        Poly1 { coeffs: Vec::new() }
    }

    pub fn constant(c: Coord) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            Poly1 { coeffs: vec![c] }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }

    fn trim(mut self) -> Self {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        self
    }

    pub fn eval(&self, t: &Coord) -> Coord {
        let mut acc = Coord::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    pub fn add(&self, other: &Poly1) -> Poly1 {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = vec![Coord::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            coeffs[i] += c;
        }
        Poly1 { coeffs }.trim()
    }

    pub fn scale(&self, s: &Coord) -> Poly1 {
        Poly1 {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
        .trim()
    }

    /// `(t - t0)^d` expanded into monomial coefficients.
    pub fn shifted_power(t0: &Coord, d: u32) -> Poly1 {
        let mut p = Poly1 {
            coeffs: vec![coord(1)],
        };
        let factor = Poly1 {
            coeffs: vec![-t0.clone(), coord(1)],
        };
        for _ in 0..d {
            p = p.mul(&factor);
        }
        p
    }

    /// Coefficients in powers of `(t - t0)`.
    pub fn expand_around(&self, t0: &Coord) -> Vec<Coord> {
        let mut a = self.coeffs.clone();
        let mut out = Vec::with_capacity(a.len().max(1));
        while !a.is_empty() {
            for i in (0..a.len() - 1).rev() {
                let add = &a[i + 1] * t0;
                a[i] += add;
            }
            out.push(a.remove(0));
        }
        if out.is_empty() {
            out.push(Coord::zero());
        }
        out
    }

    pub fn mul(&self, other: &Poly1) -> Poly1 {
        if self.is_zero() || other.is_zero() {
            return Poly1::zero();
        }
        let mut coeffs = vec![Coord::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    coeffs[i + j] += a * b;
                }
            }
        }
        Poly1 { coeffs }.trim()
    }
}

/// Bivariate polynomial, `coeffs[i][j]` is the coefficient of `x^i y^j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly2 {
    pub coeffs: Vec<Vec<Coord>>,
}

impl Poly2 {
    pub fn zero() -> Self {
        Poly2 { coeffs: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().flatten().all(|c| c.is_zero())
    }

    pub fn coeff(&self, i: usize, j: usize) -> Coord {
        self.coeffs
            .get(i)
            .and_then(|row| row.get(j))
            .cloned()
            .unwrap_or_else(Coord::zero)
    }

    /// Bidegree (degree in x, degree in y), or None for the zero polynomial.
    pub fn bidegree(&self) -> Option<(usize, usize)> {
        let mut dx = None;
        let mut dy = None;
        for (i, row) in self.coeffs.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                if !c.is_zero() {
                    dx = Some(dx.map_or(i, |d: usize| d.max(i)));
                    dy = Some(dy.map_or(j, |d: usize| d.max(j)));
                }
            }
        }
        dx.zip(dy)
    }

    pub fn eval(&self, x: &Coord, y: &Coord) -> Coord {
        let mut acc = Coord::zero();
        for row in self.coeffs.iter().rev() {
            let mut row_acc = Coord::zero();
            for c in row.iter().rev() {
                row_acc = row_acc * y + c;
            }
            acc = acc * x + row_acc;
        }
        acc
    }

    pub fn add(&self, other: &Poly2) -> Poly2 {
        let ni = self.coeffs.len().max(other.coeffs.len());
        let nj = self
            .coeffs
            .iter()
            .chain(other.coeffs.iter())
            .map(|r| r.len())
            .max()
            .unwrap_or(0);
        let mut coeffs = vec![vec![Coord::zero(); nj]; ni];
        for (i, row) in self.coeffs.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                coeffs[i][j] += c;
            }
        }
        for (i, row) in other.coeffs.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                coeffs[i][j] += c;
            }
        }
        Poly2 { coeffs }
    }

    pub fn sub(&self, other: &Poly2) -> Poly2 {
        self.add(&other.scale(&coord(-1)))
    }

    pub fn scale(&self, s: &Coord) -> Poly2 {
        Poly2 {
            coeffs: self
                .coeffs
                .iter()
                .map(|row| row.iter().map(|c| c * s).collect())
                .collect(),
        }
    }

    /// Separable product `p(x) * q(y)`.
    pub fn separable(p: &Poly1, q: &Poly1) -> Poly2 {
        Poly2 {
            coeffs: p
                .coeffs
                .iter()
                .map(|a| q.coeffs.iter().map(|b| a * b).collect())
                .collect(),
        }
    }

    /// Coefficients of `(x - x0)^j` in the expansion around `x = x0`;
    /// each returned entry is a polynomial in y.
    pub fn expand_around_x(&self, x0: &Coord) -> Vec<Poly1> {
        // Repeated synthetic division by (x - x0), coefficients in Q[y].
        let mut a: Vec<Poly1> = self
            .coeffs
            .iter()
            .map(|row| Poly1 { coeffs: row.clone() }.trim())
            .collect();
        let mut out = Vec::with_capacity(a.len().max(1));
        while !a.is_empty() {
            for i in (0..a.len() - 1).rev() {
                a[i] = a[i].add(&a[i + 1].scale(x0));
            }
            out.push(a.remove(0));
        }
        if out.is_empty() {
            out.push(Poly1::zero());
        }
        out
    }

    /// True iff the polynomial is divisible by `(x - x0)^d` exactly.
    pub fn divisible_by_x_power(&self, x0: &Coord, d: u32) -> bool {
        let layers = self.expand_around_x(x0);
        layers.iter().take(d as usize).all(|p| p.is_zero())
    }

    /// True iff the polynomial is divisible by `(y - y0)^d` exactly.
    pub fn divisible_by_y_power(&self, y0: &Coord, d: u32) -> bool {
        self.transpose().divisible_by_x_power(y0, d)
    }

    pub fn transpose(&self) -> Poly2 {
        let ni = self.coeffs.len();
        let nj = self.coeffs.iter().map(|r| r.len()).max().unwrap_or(0);
        Poly2 {
            coeffs: (0..nj)
                .map(|j| (0..ni).map(|i| self.coeff(i, j)).collect())
                .collect(),
        }
    }
}
