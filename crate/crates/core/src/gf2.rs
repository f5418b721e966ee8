//! Bit-packed linear algebra over F_2.
//!
//! Vectors live in (F_2)^k with k <= 64 and are packed into a single `u64`
//! (coordinate `i` is bit `i`). Subspaces are kept in a canonical reduced
//! echelon form so that equal subspaces compare equal and hash equal: every
//! basis row has a distinct pivot (its highest set bit), no other row has
//! that bit set, and rows are sorted by pivot.

use std::fmt;
use thiserror::Error;

/// Maximum ambient dimension supported by the packed representation.
pub const MAX_DIM: usize = 64;

/// Exhaustive subspace enumeration is refused above this ambient dimension.
pub const ENUMERATION_MAX_DIM: usize = 8;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Gf2Error {
    #[error("vector length {0} out of range (1..={MAX_DIM})")]
    LengthOutOfRange(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("subspace enumeration refused for ambient dimension {k}: limit is {max}")]
    EnumerationBound { k: usize, max: usize },
    #[error("affine hull of an empty point set is undefined")]
    EmptyPointSet,
    #[error("matrix is singular")]
    Singular,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
}

/// A vector in (F_2)^k, k <= 64. Addition is XOR.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gf2Vec {
    len: u8,
    bits: u64,
}

impl Gf2Vec {
    pub fn new(len: usize, bits: u64) -> Result<Self, Gf2Error> {
        if len == 0 || len > MAX_DIM {
            return Err(Gf2Error::LengthOutOfRange(len));
        }
        if len < 64 && bits >> len != 0 {
            return Err(Gf2Error::DimensionMismatch {
                expected: len,
                got: 64 - bits.leading_zeros() as usize,
            });
        }
        Ok(Self { len: len as u8, bits })
    }

    pub fn zero(len: usize) -> Self {
        Self::new(len, 0).expect("valid length")
    }

    /// The standard basis vector e_i (coordinate i set).
    pub fn basis(len: usize, i: usize) -> Self {
        assert!(i < len && len <= MAX_DIM);
        Self { len: len as u8, bits: 1 << i }
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len());
        (self.bits >> i) & 1 == 1
    }

    pub fn xor(&self, other: &Self) -> Self {
        assert_eq!(self.len, other.len);
        Self { len: self.len, bits: self.bits ^ other.bits }
    }

    /// Standard inner product <self, other> over F_2.
    pub fn dot(&self, other: &Self) -> bool {
        assert_eq!(self.len, other.len);
        (self.bits & other.bits).count_ones() & 1 == 1
    }
}

impl fmt::Debug for Gf2Vec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf2Vec({})", self)
    }
}

impl fmt::Display for Gf2Vec {
    /// Coordinate 0 first, so `e_0` in (F_2)^4 prints as `1000`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            write!(f, "{}", if self.get(i) { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// An r x c matrix over F_2; row `i` is the image of the basis vector e_i,
/// so vectors act on the right: `v * M`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Gf2Matrix {
    rows: Vec<u64>,
    ncols: usize,
}

impl Gf2Matrix {
    pub fn from_row_bits(ncols: usize, rows: Vec<u64>) -> Result<Self, Gf2Error> {
        if ncols == 0 || ncols > MAX_DIM {
            return Err(Gf2Error::LengthOutOfRange(ncols));
        }
        if ncols < 64 {
            for &r in &rows {
                if r >> ncols != 0 {
                    return Err(Gf2Error::DimensionMismatch {
                        expected: ncols,
                        got: 64 - r.leading_zeros() as usize,
                    });
                }
            }
        }
        Ok(Self { rows, ncols })
    }

    pub fn from_rows(rows: &[Gf2Vec]) -> Result<Self, Gf2Error> {
        let ncols = rows.first().map(|v| v.len()).unwrap_or(1);
        for v in rows {
            if v.len() != ncols {
                return Err(Gf2Error::DimensionMismatch { expected: ncols, got: v.len() });
            }
        }
        Self::from_row_bits(ncols, rows.iter().map(|v| v.bits()).collect())
    }

    pub fn identity(n: usize) -> Self {
        Self { rows: (0..n).map(|i| 1u64 << i).collect(), ncols: n }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row_bits(&self, i: usize) -> u64 {
        self.rows[i]
    }

    pub fn row(&self, i: usize) -> Gf2Vec {
        Gf2Vec { len: self.ncols as u8, bits: self.rows[i] }
    }

    /// `v * M` for a packed vector with `nrows` coordinates.
    pub fn apply_bits(&self, v: u64) -> u64 {
        let mut acc = 0u64;
        let mut rest = v;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            acc ^= self.rows[i];
            rest &= rest - 1;
        }
        acc
    }

    pub fn apply(&self, v: &Gf2Vec) -> Result<Gf2Vec, Gf2Error> {
        if v.len() != self.nrows() {
            return Err(Gf2Error::DimensionMismatch { expected: self.nrows(), got: v.len() });
        }
        Ok(Gf2Vec { len: self.ncols as u8, bits: self.apply_bits(v.bits()) })
    }

    /// Matrix product `self * other` (apply `self` first).
    pub fn mul(&self, other: &Gf2Matrix) -> Result<Gf2Matrix, Gf2Error> {
        if self.ncols != other.nrows() {
            return Err(Gf2Error::DimensionMismatch { expected: self.ncols, got: other.nrows() });
        }
        Ok(Gf2Matrix {
            rows: self.rows.iter().map(|&r| other.apply_bits(r)).collect(),
            ncols: other.ncols,
        })
    }

    pub fn transpose(&self) -> Gf2Matrix {
        let mut rows = vec![0u64; self.ncols];
        for (i, &r) in self.rows.iter().enumerate() {
            let mut rest = r;
            while rest != 0 {
                let j = rest.trailing_zeros() as usize;
                rows[j] |= 1 << i;
                rest &= rest - 1;
            }
        }
        Gf2Matrix { rows, ncols: self.rows.len() }
    }

    pub fn rank(&self) -> usize {
        let mut basis: Vec<u64> = Vec::new();
        for &r in &self.rows {
            let red = reduce_by(&basis, r);
            if red != 0 {
                insert_sorted(&mut basis, red);
            }
        }
        basis.len()
    }

    pub fn is_invertible(&self) -> bool {
        self.nrows() == self.ncols && self.rank() == self.ncols
    }

    /// Gauss-Jordan on [M | I].
    pub fn inverse(&self) -> Result<Gf2Matrix, Gf2Error> {
        let n = self.ncols;
        if self.nrows() != n {
            return Err(Gf2Error::NotSquare { rows: self.nrows(), cols: n });
        }
        let mut a = self.rows.clone();
        let mut inv: Vec<u64> = (0..n).map(|i| 1u64 << i).collect();
        let mut pivot_row_of_col = vec![usize::MAX; n];
        let mut used = vec![false; n];
        for (col, slot) in pivot_row_of_col.iter_mut().enumerate() {
            let Some(p) = (0..n).find(|&r| !used[r] && (a[r] >> col) & 1 == 1) else {
                continue;
            };
            used[p] = true;
            *slot = p;
            for r in 0..n {
                if r != p && (a[r] >> col) & 1 == 1 {
                    a[r] ^= a[p];
                    inv[r] ^= inv[p];
                }
            }
        }
        if pivot_row_of_col.contains(&usize::MAX) {
            return Err(Gf2Error::Singular);
        }
        let rows = (0..n).map(|c| inv[pivot_row_of_col[c]]).collect();
        Ok(Gf2Matrix { rows, ncols: n })
    }
}

impl fmt::Debug for Gf2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Gf2Matrix {}x{} [", self.nrows(), self.ncols)?;
        for i in 0..self.nrows() {
            writeln!(f, "  {}", self.row(i))?;
        }
        write!(f, "]")
    }
}

fn reduce_by(basis: &[u64], mut v: u64) -> u64 {
    for &b in basis.iter().rev() {
        if v ^ b < v {
            v ^= b;
        }
    }
    v
}

/// Insert a reduced vector and re-reduce existing rows so every pivot bit
/// appears in exactly one row. `basis` stays sorted by pivot.
fn insert_sorted(basis: &mut Vec<u64>, v: u64) {
    debug_assert!(v != 0);
    let pivot = 63 - v.leading_zeros();
    for b in basis.iter_mut() {
        if (*b >> pivot) & 1 == 1 {
            *b ^= v;
        }
    }
    let pos = basis.partition_point(|&b| 63 - b.leading_zeros() < pivot);
    basis.insert(pos, v);
}

/// A subspace of (F_2)^k held as a canonical reduced basis.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Gf2Subspace {
    ambient: usize,
    basis: Vec<u64>,
}

impl Gf2Subspace {
    pub fn trivial(ambient: usize) -> Self {
        Self { ambient, basis: Vec::new() }
    }

    pub fn full(ambient: usize) -> Self {
        Self { ambient, basis: (0..ambient).map(|i| 1u64 << i).collect() }
    }

    pub fn span_bits(ambient: usize, vectors: impl IntoIterator<Item = u64>) -> Self {
        let mut basis = Vec::new();
        for v in vectors {
            let red = reduce_by(&basis, v);
            if red != 0 {
                insert_sorted(&mut basis, red);
            }
        }
        Self { ambient, basis }
    }

    /// Construct from rows already in canonical form (used by enumeration).
    pub(crate) fn from_canonical_rows(ambient: usize, basis: Vec<u64>) -> Self {
        Self { ambient, basis }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient
    }

    pub fn is_trivial(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis_bits(&self) -> &[u64] {
        &self.basis
    }

    pub fn basis(&self) -> Vec<Gf2Vec> {
        self.basis.iter().map(|&b| Gf2Vec { len: self.ambient as u8, bits: b }).collect()
    }

    pub fn contains_bits(&self, v: u64) -> bool {
        reduce_by(&self.basis, v) == 0
    }

    pub fn contains(&self, v: &Gf2Vec) -> bool {
        v.len() == self.ambient && self.contains_bits(v.bits())
    }

    /// Canonical coset representative: the minimum of `v + self` under
    /// integer reading (all pivot bits cleared).
    pub fn reduce_bits(&self, v: u64) -> u64 {
        reduce_by(&self.basis, v)
    }

    pub fn contains_subspace(&self, other: &Gf2Subspace) -> bool {
        other.basis.iter().all(|&b| self.contains_bits(b))
    }

    pub fn sum(&self, other: &Gf2Subspace) -> Result<Gf2Subspace, Gf2Error> {
        if self.ambient != other.ambient {
            return Err(Gf2Error::DimensionMismatch { expected: self.ambient, got: other.ambient });
        }
        Ok(Self::span_bits(
            self.ambient,
            self.basis.iter().chain(other.basis.iter()).copied(),
        ))
    }

    /// Image {vM : v in S}; the matrix must accept vectors of this ambient
    /// dimension.
    pub fn image(&self, m: &Gf2Matrix) -> Result<Gf2Subspace, Gf2Error> {
        if m.nrows() != self.ambient {
            return Err(Gf2Error::DimensionMismatch { expected: self.ambient, got: m.nrows() });
        }
        Ok(Self::span_bits(m.ncols(), self.basis.iter().map(|&b| m.apply_bits(b))))
    }

    /// {v : <v, s> = 0 for all s in self}.
    pub fn orthogonal_complement(&self) -> Gf2Subspace {
        let k = self.ambient;
        let pivots: Vec<u32> = self.basis.iter().map(|&b| 63 - b.leading_zeros()).collect();
        let pivot_mask: u64 = pivots.iter().fold(0, |m, &p| m | (1u64 << p));
        let mut out = Vec::new();
        // For each free position j, e_j plus the j-th column of the basis
        // re-expressed on the pivots is orthogonal to every basis row.
        for j in 0..k {
            if (pivot_mask >> j) & 1 == 1 {
                continue;
            }
            let mut v = 1u64 << j;
            for (row, &p) in self.basis.iter().zip(&pivots) {
                if (row >> j) & 1 == 1 {
                    v |= 1u64 << p;
                }
            }
            out.push(v);
        }
        Self::span_bits(k, out)
    }

    /// All 2^dim points; intended for small subspaces.
    pub fn iter_points(&self) -> impl Iterator<Item = u64> + '_ {
        let n = 1u64 << self.dim();
        (0..n).map(move |mask| {
            let mut x = 0u64;
            let mut rest = mask;
            while rest != 0 {
                let i = rest.trailing_zeros() as usize;
                x ^= self.basis[i];
                rest &= rest - 1;
            }
            x
        })
    }
}

impl fmt::Debug for Gf2Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf2Subspace(dim {} of {}, basis [", self.dim(), self.ambient)?;
        for (i, &b) in self.basis.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{:#x}", b)?;
        }
        write!(f, "])")
    }
}

/// Span of the given vectors in canonical form.
pub fn rref(vectors: &[Gf2Vec]) -> Result<Gf2Subspace, Gf2Error> {
    let Some(first) = vectors.first() else {
        return Err(Gf2Error::EmptyPointSet);
    };
    let ambient = first.len();
    for v in vectors {
        if v.len() != ambient {
            return Err(Gf2Error::DimensionMismatch { expected: ambient, got: v.len() });
        }
    }
    Ok(Gf2Subspace::span_bits(ambient, vectors.iter().map(|v| v.bits())))
}

/// Image of a subspace under a matrix (see [`Gf2Subspace::image`]).
pub fn subspace_image(s: &Gf2Subspace, m: &Gf2Matrix) -> Result<Gf2Subspace, Gf2Error> {
    s.image(m)
}

/// An affine subspace `offset + direction`, with the offset canonicalized to
/// the minimum point of the coset under integer reading.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct AffineSubspace {
    offset: u64,
    direction: Gf2Subspace,
}

impl AffineSubspace {
    pub fn new(offset: u64, direction: Gf2Subspace) -> Self {
        let offset = direction.reduce_bits(offset);
        Self { offset, direction }
    }

    pub fn offset_bits(&self) -> u64 {
        self.offset
    }

    pub fn offset(&self) -> Gf2Vec {
        Gf2Vec { len: self.direction.ambient() as u8, bits: self.offset }
    }

    pub fn direction(&self) -> &Gf2Subspace {
        &self.direction
    }

    pub fn dim(&self) -> usize {
        self.direction.dim()
    }

    pub fn size(&self) -> u128 {
        1u128 << self.direction.dim()
    }

    pub fn contains_bits(&self, v: u64) -> bool {
        self.direction.contains_bits(v ^ self.offset)
    }
}

/// Smallest affine subspace containing the given points.
pub fn affine_hull(points: &[Gf2Vec]) -> Result<AffineSubspace, Gf2Error> {
    let Some(first) = points.first() else {
        return Err(Gf2Error::EmptyPointSet);
    };
    let ambient = first.len();
    for p in points {
        if p.len() != ambient {
            return Err(Gf2Error::DimensionMismatch { expected: ambient, got: p.len() });
        }
    }
    let a = first.bits();
    let dir = Gf2Subspace::span_bits(ambient, points.iter().map(|p| p.bits() ^ a));
    Ok(AffineSubspace::new(a, dir))
}

pub(crate) fn affine_hull_bits(ambient: usize, points: &[u64]) -> Result<AffineSubspace, Gf2Error> {
    let Some(&a) = points.first() else {
        return Err(Gf2Error::EmptyPointSet);
    };
    let dir = Gf2Subspace::span_bits(ambient, points.iter().map(|&p| p ^ a));
    Ok(AffineSubspace::new(a, dir))
}

/// Software bit deposit: scatter the low bits of `value` into the set
/// positions of `mask` (LSB first).
#[inline]
fn deposit_bits(mut value: u64, mut mask: u64) -> u64 {
    let mut out = 0u64;
    while mask != 0 {
        let bit = mask & mask.wrapping_neg();
        if value & 1 == 1 {
            out |= bit;
        }
        value >>= 1;
        mask ^= bit;
    }
    out
}

fn next_combination(pivots: &mut [usize], k: usize) -> bool {
    let r = pivots.len();
    for i in (0..r).rev() {
        // pivots[i] can go up to k - (r - i)
        if pivots[i] + (r - i) < k {
            pivots[i] += 1;
            for j in i + 1..r {
                pivots[j] = pivots[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Visit every subspace of (F_2)^k with dimension in `dims`, in a fixed
/// deterministic order (dimension ascending, pivot sets lexicographic, free
/// bits as an odometer), passing the canonical basis rows to `visit`.
/// Stops early if `visit` returns `false`; the return value says whether the
/// enumeration ran to completion.
///
/// No ambient bound is enforced here; public entry points add their own.
pub(crate) fn for_each_subspace_in<F>(
    k: usize,
    dims: std::ops::RangeInclusive<usize>,
    mut visit: F,
) -> bool
where
    F: FnMut(&[u64]) -> bool,
{
    for r in dims {
        if r > k {
            break;
        }
        if r == 0 {
            if !visit(&[]) {
                return false;
            }
            continue;
        }
        let mut pivots: Vec<usize> = (0..r).collect();
        loop {
            let pivot_mask: u64 = pivots.iter().fold(0, |m, &p| m | (1u64 << p));
            let free_masks: Vec<u64> =
                pivots.iter().map(|&p| !pivot_mask & ((1u64 << p) - 1)).collect();
            let free_counts: Vec<u32> = free_masks.iter().map(|m| m.count_ones()).collect();

            let mut rows: Vec<u64> = pivots.iter().map(|&p| 1u64 << p).collect();
            let mut counters: Vec<u64> = vec![0; r];
            'odometer: loop {
                if !visit(&rows) {
                    return false;
                }
                for i in 0..r {
                    if free_counts[i] == 0 {
                        continue;
                    }
                    counters[i] += 1;
                    if counters[i] < (1u64 << free_counts[i]) {
                        rows[i] = (1u64 << pivots[i]) | deposit_bits(counters[i], free_masks[i]);
                        continue 'odometer;
                    }
                    counters[i] = 0;
                    rows[i] = 1u64 << pivots[i];
                }
                break;
            }

            if !next_combination(&mut pivots, k) {
                break;
            }
        }
    }
    true
}

/// Exhaustive subspace enumeration (ambient dimension at most
/// [`ENUMERATION_MAX_DIM`]). Yields every subspace exactly once in canonical
/// form; with `dim_filter` set, only subspaces of that dimension.
pub fn enumerate_subspaces(
    k: usize,
    dim_filter: Option<usize>,
) -> Result<Vec<Gf2Subspace>, Gf2Error> {
    if k == 0 || k > ENUMERATION_MAX_DIM {
        return Err(Gf2Error::EnumerationBound { k, max: ENUMERATION_MAX_DIM });
    }
    let dims = match dim_filter {
        Some(d) => d..=d,
        None => 0..=k,
    };
    let mut out = Vec::new();
    for_each_subspace_in(k, dims, |rows| {
        out.push(Gf2Subspace::from_canonical_rows(k, rows.to_vec()));
        true
    });
    Ok(out)
}

/// Gaussian binomial coefficient: the number of `r`-dimensional subspaces of
/// (F_2)^n.
pub fn gaussian_binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    let mut num = 1u128;
    let mut den = 1u128;
    for i in 0..r {
        num *= (1u128 << (n - i)) - 1;
        den *= (1u128 << (i + 1)) - 1;
    }
    num / den
}
