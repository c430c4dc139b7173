//! Digit sequences in `Z_b^N`, the tent map, and point-set generation.
//!
//! A [`GElem`] stores an infinite digit sequence `(z_1, z_2, ...)` as a
//! finite prefix followed by a constant tail digit. Every sequence produced
//! by the digital constructions in this crate (including folded points,
//! whose digits become `-z_1` from some index on) has that shape, so the
//! representation is exact.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::gfpoly::{laurent_digits_raw, GFPoly, Modulus, PrimeBase};

/// Element of `Z_b^N` with an eventually constant digit sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GElem {
    base: u32,
    prefix: Vec<u32>,
    tail: u32,
}

impl GElem {
    /// Digits `prefix` followed by `tail` repeated forever.
    pub fn new(base: u32, prefix: Vec<u32>, tail: u32) -> Result<Self> {
        if base < 2 {
            return invalid(format!("base must be >= 2, got {base}"));
        }
        if tail >= base || prefix.iter().any(|&d| d >= base) {
            return invalid(format!("digit out of range for base {base}"));
        }
        Ok(Self::from_raw(base, prefix, tail))
    }

    pub(crate) fn from_raw(base: u32, mut prefix: Vec<u32>, tail: u32) -> Self {
        while prefix.last() == Some(&tail) {
            prefix.pop();
        }
        GElem { base, prefix, tail }
    }

    pub fn zero(base: u32) -> Self {
        GElem {
            base,
            prefix: Vec::new(),
            tail: 0,
        }
    }

    /// Finite expansion (tail 0).
    pub fn finite(base: u32, prefix: Vec<u32>) -> Result<Self> {
        Self::new(base, prefix, 0)
    }

    #[inline]
    pub fn base(&self) -> u32 {
        self.base
    }

    /// Canonical prefix: its last digit (if any) differs from the tail.
    #[inline]
    pub fn prefix(&self) -> &[u32] {
        &self.prefix
    }

    #[inline]
    pub fn tail(&self) -> u32 {
        self.tail
    }

    pub fn is_zero(&self) -> bool {
        self.prefix.is_empty() && self.tail == 0
    }

    /// Digit `z_i`, 1-indexed.
    #[inline]
    pub fn digit(&self, i: usize) -> u32 {
        debug_assert!(i >= 1);
        self.prefix.get(i - 1).copied().unwrap_or(self.tail)
    }

    fn check_base(&self, other: &GElem) -> Result<()> {
        if self.base != other.base {
            Err(Error::BaseMismatch(self.base, other.base))
        } else {
            Ok(())
        }
    }

    fn zip_with(&self, other: &GElem, f: impl Fn(u32, u32) -> u32) -> Result<GElem> {
        self.check_base(other)?;
        let len = self.prefix.len().max(other.prefix.len());
        let prefix = (1..=len)
            .map(|i| f(self.digit(i), other.digit(i)))
            .collect();
        Ok(Self::from_raw(self.base, prefix, f(self.tail, other.tail)))
    }

    /// Digitwise addition modulo `b`.
    pub fn add(&self, other: &GElem) -> Result<GElem> {
        let b = self.base;
        self.zip_with(other, |x, y| (x + y) % b)
    }

    /// Digitwise subtraction modulo `b`.
    pub fn sub(&self, other: &GElem) -> Result<GElem> {
        let b = self.base;
        self.zip_with(other, |x, y| (x + b - y) % b)
    }

    /// The b-adic tent transformation: `eta_i = z_{i+1} - z_1 (mod b)`.
    pub fn tent(&self) -> GElem {
        let b = self.base;
        let first = self.digit(1);
        let shift = |d: u32| (d + b - first) % b;
        let prefix = self.prefix.iter().skip(1).map(|&d| shift(d)).collect();
        Self::from_raw(b, prefix, shift(self.tail))
    }

    /// Exact value of `sum_i z_i b^{-i}`.
    pub fn project(&self) -> BigRational {
        let b = BigInt::from(self.base);
        let bm1 = BigInt::from(self.base - 1);
        let a = self
            .prefix
            .iter()
            .fold(BigInt::zero(), |acc, &d| acc * &b + BigInt::from(d));
        let scale = num_traits::pow(b, self.prefix.len());
        BigRational::new(a * &bm1 + BigInt::from(self.tail), bm1 * scale)
    }

    /// [`GElem::project`] rounded to the nearest `f64`.
    pub fn project_f64(&self) -> f64 {
        self.project().to_f64().unwrap_or(f64::NAN)
    }

    /// Inverse of [`GElem::project`] on rationals whose expansion is
    /// eventually constant, choosing the expansion that does not end in
    /// repeated `b-1` unless `x = 1`.
    ///
    /// Supported inputs are those `u/v` with `v` dividing `(b-1) b^L` for
    /// some `L`; anything else yields [`Error::UnsupportedExpansion`].
    pub fn section(x: &BigRational, base: u32) -> Result<GElem> {
        if base < 2 {
            return invalid(format!("base must be >= 2, got {base}"));
        }
        if x < &BigRational::zero() || x > &BigRational::one() {
            return invalid(format!("{x} is outside [0, 1]"));
        }
        if x.is_one() {
            return Ok(GElem {
                base,
                prefix: Vec::new(),
                tail: base - 1,
            });
        }
        let b = BigInt::from(base);
        let bm1 = BigInt::from(base - 1);
        let den = x.denom().clone();

        let mut rest = den.clone();
        loop {
            let g = rest.gcd(&b);
            if g.is_one() {
                break;
            }
            rest /= g;
        }
        if !(&bm1 % &rest).is_zero() {
            return Err(Error::UnsupportedExpansion(format!(
                "{x} has no eventually constant base-{base} expansion"
            )));
        }
        let mut len = 0usize;
        let mut scale = BigInt::one();
        while !((&bm1 * &scale) % &den).is_zero() {
            scale *= &b;
            len += 1;
        }
        let numer = x.numer() * (&bm1 * &scale) / &den;
        let tail = if base == 2 {
            BigInt::zero()
        } else {
            &numer % &bm1
        };
        let mut a = (numer - &tail) / &bm1;
        let mut prefix = vec![0u32; len];
        for slot in prefix.iter_mut().rev() {
            let (q, r) = a.div_rem(&b);
            *slot = r.to_u32().expect("digit below base");
            a = q;
        }
        debug_assert!(a.is_zero());
        Ok(Self::from_raw(
            base,
            prefix,
            tail.to_u32().expect("tail below base"),
        ))
    }

    /// First `precision` base-`b` digits of a real `x` in `[0, 1)` (tail 0);
    /// `x = 1` maps to the all-`(b-1)` element.
    pub fn section_truncated(x: f64, base: u32, precision: usize) -> Result<GElem> {
        if base < 2 {
            return invalid(format!("base must be >= 2, got {base}"));
        }
        if !(0.0..=1.0).contains(&x) {
            return invalid(format!("{x} is outside [0, 1]"));
        }
        if x == 1.0 {
            return Ok(GElem {
                base,
                prefix: Vec::new(),
                tail: base - 1,
            });
        }
        let mut prefix = Vec::with_capacity(precision);
        let mut frac = x;
        for _ in 0..precision {
            frac *= base as f64;
            let d = (frac.floor() as u32).min(base - 1);
            prefix.push(d);
            frac -= d as f64;
        }
        Ok(Self::from_raw(base, prefix, 0))
    }
}

/// `z ⊕ w`.
pub fn gelem_add(z: &GElem, w: &GElem) -> Result<GElem> {
    z.add(w)
}

/// `z ⊖ w`.
pub fn gelem_sub(z: &GElem, w: &GElem) -> Result<GElem> {
    z.sub(w)
}

/// Tent map applied to one coordinate.
pub fn tent(z: &GElem) -> GElem {
    z.tent()
}

/// Projection to `[0, 1]`.
pub fn project(z: &GElem) -> BigRational {
    z.project()
}

/// Section map from `[0, 1]`.
pub fn section(x: &BigRational, base: u32) -> Result<GElem> {
    GElem::section(x, base)
}

/// A higher-order polynomial lattice rule `P(q, p)` with `b^m` points and
/// `n = deg p` digits per coordinate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    base: PrimeBase,
    m: usize,
    modulus: Modulus,
    q: Vec<GFPoly>,
}

impl Rule {
    pub fn new(modulus: Modulus, m: usize, q: Vec<GFPoly>) -> Result<Self> {
        let base = modulus.base();
        let n = modulus.degree();
        if m < 1 || m > n {
            return invalid(format!("need 1 <= m <= n, got m={m}, n={n}"));
        }
        if q.is_empty() {
            return invalid("generating vector must be non-empty");
        }
        for qj in &q {
            if qj.base() != base {
                return Err(Error::BaseMismatch(qj.base().get(), base.get()));
            }
            if !qj.degree_below(n) {
                return invalid(format!("generating polynomial {qj} has degree >= {n}"));
            }
        }
        Ok(Rule {
            base,
            m,
            modulus,
            q,
        })
    }

    #[inline]
    pub fn base(&self) -> PrimeBase {
        self.base
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.modulus.degree()
    }

    #[inline]
    pub fn s(&self) -> usize {
        self.q.len()
    }

    #[inline]
    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    #[inline]
    pub fn q(&self) -> &[GFPoly] {
        &self.q
    }

    /// Number of points, `b^m`.
    pub fn num_points(&self) -> usize {
        (self.base.get() as usize).pow(self.m as u32)
    }

    /// Digits of coordinate `j` of point `h`, i.e. `v_n(h q_j / p)`.
    pub fn coordinate_digits(&self, h: u64, j: usize) -> Vec<u32> {
        let hp = GFPoly::from_encoding(self.base, h);
        let r = residue(&hp, &self.q[j], &self.modulus);
        laurent_digits_raw(
            r.coeffs(),
            self.modulus.poly().coeffs(),
            self.base.get(),
            self.n(),
        )
    }

    /// Generating matrices of the rule viewed as a digital net: column `c`
    /// of matrix `j` holds `v_n(x^c q_j / p)`.
    pub fn generating_matrices(&self) -> Vec<GeneratingMatrix> {
        let b = self.base.get();
        let n = self.n();
        self.q
            .iter()
            .map(|qj| {
                let cols: Vec<Vec<u32>> = (0..self.m)
                    .map(|c| {
                        let xc = GFPoly::from_raw(self.base, {
                            let mut v = vec![0; c + 1];
                            v[c] = 1;
                            v
                        });
                        let r = residue(&xc, qj, &self.modulus);
                        laurent_digits_raw(r.coeffs(), self.modulus.poly().coeffs(), b, n)
                    })
                    .collect();
                let rows = (0..n)
                    .map(|i| cols.iter().map(|col| col[i]).collect())
                    .collect();
                GeneratingMatrix {
                    base: b,
                    cols: self.m,
                    rows,
                    tail_row: vec![0; self.m],
                }
            })
            .collect()
    }
}

pub(crate) fn residue(h: &GFPoly, q: &GFPoly, p: &Modulus) -> GFPoly {
    h.mul(q)
        .and_then(|hq| hq.rem(p.poly()))
        .expect("rule polynomials share a base")
}

/// How a [`PointSet`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointSetKind {
    Hoplps,
    Matrix,
    Folded,
}

/// `b^m` points of `Z_b^N`, in index order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSet {
    pub base: u32,
    pub dim: usize,
    pub kind: PointSetKind,
    pub points: Vec<Vec<GElem>>,
}

impl PointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Applies the tent map to every coordinate of every point.
    pub fn folded(&self) -> PointSet {
        PointSet {
            base: self.base,
            dim: self.dim,
            kind: PointSetKind::Folded,
            points: self
                .points
                .iter()
                .map(|pt| pt.iter().map(GElem::tent).collect())
                .collect(),
        }
    }

    /// Exact projections of every coordinate.
    pub fn project_exact(&self) -> Vec<Vec<BigRational>> {
        self.points
            .iter()
            .map(|pt| pt.iter().map(GElem::project).collect())
            .collect()
    }

    /// Projections rounded to `f64`.
    pub fn project_f64(&self) -> Vec<Vec<f64>> {
        self.points
            .par_iter()
            .map(|pt| pt.iter().map(GElem::project_f64).collect())
            .collect()
    }
}

/// Points of the polynomial lattice rule in increasing order of `h`.
pub fn hoplps_points(rule: &Rule) -> PointSet {
    let b = rule.base.get();
    let points = (0..rule.num_points() as u64)
        .into_par_iter()
        .map(|h| {
            (0..rule.s())
                .map(|j| GElem::from_raw(b, rule.coordinate_digits(h, j), 0))
                .collect()
        })
        .collect();
    PointSet {
        base: b,
        dim: rule.s(),
        kind: PointSetKind::Hoplps,
        points,
    }
}

/// Finite-row generating matrix over `Z_b` with an optional tail row that
/// produces the constant tail digit of every generated coordinate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratingMatrix {
    base: u32,
    cols: usize,
    rows: Vec<Vec<u32>>,
    tail_row: Vec<u32>,
}

impl GeneratingMatrix {
    /// Matrix with the given rows and a zero tail row.
    pub fn new(base: u32, rows: Vec<Vec<u32>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        Self::with_tail(base, rows, vec![0; cols])
    }

    pub fn with_tail(base: u32, rows: Vec<Vec<u32>>, tail_row: Vec<u32>) -> Result<Self> {
        if base < 2 {
            return invalid(format!("base must be >= 2, got {base}"));
        }
        if rows.is_empty() {
            return invalid("generating matrix needs at least one row");
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) || tail_row.len() != cols {
            return invalid("ragged generating matrix");
        }
        if rows
            .iter()
            .chain(std::iter::once(&tail_row))
            .flatten()
            .any(|&d| d >= base)
        {
            return invalid(format!("entry out of range for base {base}"));
        }
        Ok(GeneratingMatrix {
            base,
            cols,
            rows,
            tail_row,
        })
    }

    pub fn identity(base: u32, m: usize) -> Self {
        let rows = (0..m)
            .map(|i| (0..m).map(|c| u32::from(i == c)).collect())
            .collect();
        GeneratingMatrix {
            base,
            cols: m,
            rows,
            tail_row: vec![0; m],
        }
    }

    pub fn zeros(base: u32, rows: usize, m: usize) -> Self {
        GeneratingMatrix {
            base,
            cols: m,
            rows: vec![vec![0; m]; rows],
            tail_row: vec![0; m],
        }
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    #[inline]
    pub fn tail_row(&self) -> &[u32] {
        &self.tail_row
    }

    /// Row `i` (0-indexed); rows past the stored extent repeat the tail row.
    fn row(&self, i: usize) -> &[u32] {
        self.rows.get(i).map_or(&self.tail_row[..], |r| &r[..])
    }

    fn apply(&self, eta: &[u32]) -> GElem {
        let b = self.base as u64;
        let dot = |row: &[u32]| {
            (row.iter()
                .zip(eta)
                .map(|(&c, &e)| c as u64 * e as u64)
                .sum::<u64>()
                % b) as u32
        };
        let prefix = self.rows.iter().map(|r| dot(r)).collect();
        GElem::from_raw(self.base, prefix, dot(&self.tail_row))
    }
}

/// Digital net generated by `mats`: coordinate `j` of point `h` has digit
/// vector `C_j (eta_0, ..., eta_{m-1})^T` where `eta` are the digits of `h`.
pub fn matrix_net_points(mats: &[GeneratingMatrix], m: usize) -> Result<PointSet> {
    let first = mats
        .first()
        .ok_or_else(|| Error::InvalidArgument("no matrices".into()))?;
    let base = first.base;
    for c in mats {
        if c.cols != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: c.cols,
            });
        }
        if c.rows.len() != first.rows.len() {
            return Err(Error::DimensionMismatch {
                expected: first.rows.len(),
                got: c.rows.len(),
            });
        }
        if c.base != base {
            return Err(Error::BaseMismatch(c.base, base));
        }
    }
    let npts = (base as u64).pow(m as u32);
    let points = (0..npts)
        .map(|h| {
            let eta = index_digits(h, base, m);
            mats.iter().map(|c| c.apply(&eta)).collect()
        })
        .collect();
    let kind = if mats.iter().any(|c| c.tail_row.iter().any(|&d| d != 0)) {
        PointSetKind::Folded
    } else {
        PointSetKind::Matrix
    };
    Ok(PointSet {
        base,
        dim: mats.len(),
        kind,
        points,
    })
}

/// The matrix `T C` whose net is the tent image of the net of `C`:
/// row `i` becomes `(b-1) row_1 + row_{i+1}` and the tail row becomes
/// `(b-1) row_1 + tail`.
pub fn fold_matrices(c: &GeneratingMatrix) -> GeneratingMatrix {
    let b = c.base;
    let first = c.row(0).to_vec();
    let combine = |r: &[u32]| -> Vec<u32> {
        first
            .iter()
            .zip(r)
            .map(|(&f, &x)| ((b - 1) * f + x) % b)
            .collect()
    };
    let rows = (0..c.rows.len()).map(|i| combine(c.row(i + 1))).collect();
    let tail_row = combine(&c.tail_row);
    GeneratingMatrix {
        base: b,
        cols: c.cols,
        rows,
        tail_row,
    }
}

pub(crate) fn index_digits(mut h: u64, base: u32, m: usize) -> Vec<u32> {
    let b = base as u64;
    (0..m)
        .map(|_| {
            let d = (h % b) as u32;
            h /= b;
            d
        })
        .collect()
}
