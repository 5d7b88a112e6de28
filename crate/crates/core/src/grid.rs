//! Piecewise-constant functions on uniform n-dimensional cell grids, with
//! exact aggregate queries over cell-aligned boxes backed by an n-dimensional
//! prefix-sum (summed-area) table.
//!
//! All integrals over cell-aligned sets are finite sums of cell values times
//! the cell measure `h^n`, so equimeasurability and decomposition conditions
//! can be checked to floating-point accuracy rather than quadrature accuracy.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Magic bytes of the binary grid format.
pub const OSCG_MAGIC: &[u8; 4] = b"OSCG";
/// Current version of the binary grid format.
pub const OSCG_VERSION: u32 = 1;
/// Largest supported dimension for grids.
pub const MAX_DIM: usize = 16;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("empty shape")]
    EmptyShape,
    #[error("box out of bounds")]
    OutOfBounds,
    #[error("bad magic")]
    BadMagic,
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),
    #[error("dimension mismatch")]
    DimensionMismatch,
    #[error("truncated payload")]
    TruncatedPayload,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Placement of a grid in real coordinates: `dim` axes, `extents[i]` cells
/// along axis `i`, uniform cell side `cell_size`, lower corner at `origin`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    pub dim: usize,
    pub extents: Vec<usize>,
    pub cell_size: f64,
    pub origin: Vec<f64>,
}

impl GridGeometry {
    pub fn new(extents: Vec<usize>, cell_size: f64, origin: Vec<f64>) -> Result<Self, GridError> {
        let dim = extents.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(GridError::DimensionMismatch);
        }
        if extents.contains(&0) {
            return Err(GridError::InvalidGrid("zero extent".into()));
        }
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(GridError::InvalidGrid("cell size must be positive".into()));
        }
        if origin.len() != dim {
            return Err(GridError::DimensionMismatch);
        }
        if origin.iter().any(|x| !x.is_finite()) {
            return Err(GridError::InvalidGrid("origin must be finite".into()));
        }
        Ok(Self {
            dim,
            extents,
            cell_size,
            origin,
        })
    }

    /// Number of cells.
    pub fn len(&self) -> usize {
        self.extents.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false // extents are validated positive
    }

    /// Measure of one cell, `h^n`.
    pub fn cell_measure(&self) -> f64 {
        self.cell_size.powi(self.dim as i32)
    }

    /// Measure of the whole domain box.
    pub fn domain_measure(&self) -> f64 {
        self.cell_measure() * self.len() as f64
    }

    /// Row-major strides; the last axis is contiguous.
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1usize; self.dim];
        for i in (0..self.dim.saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.extents[i + 1];
        }
        s
    }

    /// Linear index of a multi-index.
    pub fn index_of(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dim);
        let mut lin = 0usize;
        for (k, &i) in idx.iter().enumerate() {
            debug_assert!(i < self.extents[k]);
            lin = lin * self.extents[k] + i;
        }
        lin
    }

    /// Multi-index of a linear index.
    pub fn multi_index(&self, mut lin: usize) -> Vec<usize> {
        let mut idx = vec![0usize; self.dim];
        for k in (0..self.dim).rev() {
            idx[k] = lin % self.extents[k];
            lin /= self.extents[k];
        }
        idx
    }

    /// Real coordinates of a cell center.
    pub fn cell_center(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .zip(&self.origin)
            .map(|(&i, &o)| o + (i as f64 + 0.5) * self.cell_size)
            .collect()
    }

    /// Real coordinates of the lower corner of a cell-index box face.
    pub fn corner(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .zip(&self.origin)
            .map(|(&i, &o)| o + i as f64 * self.cell_size)
            .collect()
    }

    fn check_box(&self, lo: &[usize], hi: &[usize]) -> Result<(), GridError> {
        if lo.len() != self.dim || hi.len() != self.dim {
            return Err(GridError::DimensionMismatch);
        }
        for k in 0..self.dim {
            if lo[k] > hi[k] || hi[k] > self.extents[k] {
                return Err(GridError::OutOfBounds);
            }
        }
        if lo.iter().zip(hi).any(|(a, b)| a == b) {
            return Err(GridError::EmptyShape);
        }
        Ok(())
    }
}

/// A piecewise-constant real function on a uniform n-dimensional grid.
/// Values are stored row-major (last axis contiguous). Immutable after
/// construction; shared freely across worker threads.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    geom: GridGeometry,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(
        extents: Vec<usize>,
        cell_size: f64,
        origin: Vec<f64>,
        values: Vec<f64>,
    ) -> Result<Self, GridError> {
        let geom = GridGeometry::new(extents, cell_size, origin)?;
        if values.len() != geom.len() {
            return Err(GridError::InvalidGrid(format!(
                "expected {} values, got {}",
                geom.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(GridError::InvalidGrid("values must be finite".into()));
        }
        Ok(Self { geom, values })
    }

    /// Convenience constructor with origin at zero.
    pub fn from_values(
        extents: Vec<usize>,
        cell_size: f64,
        values: Vec<f64>,
    ) -> Result<Self, GridError> {
        let origin = vec![0.0; extents.len()];
        Self::new(extents, cell_size, origin, values)
    }

    /// A constant function on the given geometry.
    pub fn constant(geom: GridGeometry, c: f64) -> Self {
        let values = vec![c; geom.len()];
        Self { geom, values }
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geom
    }

    pub fn dim(&self) -> usize {
        self.geom.dim
    }

    pub fn extents(&self) -> &[usize] {
        &self.geom.extents
    }

    pub fn cell_size(&self) -> f64 {
        self.geom.cell_size
    }

    pub fn origin(&self) -> &[f64] {
        &self.geom.origin
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value_at_cell(&self, idx: &[usize]) -> f64 {
        self.values[self.geom.index_of(idx)]
    }

    /// Pointwise map producing a new grid on the same geometry.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self, GridError> {
        let values: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        Self::new(
            self.geom.extents.clone(),
            self.geom.cell_size,
            self.geom.origin.clone(),
            values,
        )
    }

    /// Cellwise difference `self - other`; geometries must agree.
    pub fn sub(&self, other: &GridFunction) -> Result<Self, GridError> {
        if self.geom != other.geom {
            return Err(GridError::DimensionMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Self::new(
            self.geom.extents.clone(),
            self.geom.cell_size,
            self.geom.origin.clone(),
            values,
        )
    }

    /// Write the binary `OSCG` format to `w`.
    pub fn save(&self, mut w: impl Write) -> Result<(), GridError> {
        w.write_all(OSCG_MAGIC)?;
        w.write_all(&OSCG_VERSION.to_le_bytes())?;
        w.write_all(&(self.geom.dim as u32).to_le_bytes())?;
        for &d in &self.geom.extents {
            w.write_all(&(d as u32).to_le_bytes())?;
        }
        w.write_all(&self.geom.cell_size.to_le_bytes())?;
        for &o in &self.geom.origin {
            w.write_all(&o.to_le_bytes())?;
        }
        for &v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    /// Read the binary `OSCG` format from `r`.
    pub fn load(mut r: impl Read) -> Result<Self, GridError> {
        let mut magic = [0u8; 4];
        read_exact_or_truncated(&mut r, &mut magic, false)?;
        if &magic != OSCG_MAGIC {
            return Err(GridError::BadMagic);
        }
        let version = read_u32(&mut r)?;
        if version != OSCG_VERSION {
            return Err(GridError::UnsupportedVersion(version));
        }
        let dim = read_u32(&mut r)? as usize;
        if dim == 0 || dim > MAX_DIM {
            return Err(GridError::DimensionMismatch);
        }
        let mut extents = Vec::with_capacity(dim);
        for _ in 0..dim {
            extents.push(read_u32(&mut r)? as usize);
        }
        if extents.contains(&0) {
            return Err(GridError::DimensionMismatch);
        }
        let cell_size = read_f64(&mut r)?;
        let mut origin = Vec::with_capacity(dim);
        for _ in 0..dim {
            origin.push(read_f64(&mut r)?);
        }
        let count: usize = extents.iter().product();
        let mut values = Vec::with_capacity(count);
        for _ in 0..count {
            values.push(read_f64(&mut r)?);
        }
        GridFunction::new(extents, cell_size, origin, values)
    }

    pub fn save_path(&self, path: impl AsRef<Path>) -> Result<(), GridError> {
        let file = std::fs::File::create(path)?;
        self.save(std::io::BufWriter::new(file))
    }

    pub fn load_path(path: impl AsRef<Path>) -> Result<Self, GridError> {
        let file = std::fs::File::open(path)?;
        Self::load(std::io::BufReader::new(file))
    }
}

fn read_exact_or_truncated(
    r: &mut impl Read,
    buf: &mut [u8],
    past_header: bool,
) -> Result<(), GridError> {
    match r.read_exact(buf) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => {
            if past_header {
                Err(GridError::TruncatedPayload)
            } else {
                Err(GridError::BadMagic)
            }
        }
        Err(e) => Err(GridError::Io(e)),
    }
}

fn read_u32(r: &mut impl Read) -> Result<u32, GridError> {
    let mut b = [0u8; 4];
    read_exact_or_truncated(r, &mut b, true)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64, GridError> {
    let mut b = [0u8; 8];
    read_exact_or_truncated(r, &mut b, true)?;
    Ok(f64::from_le_bytes(b))
}

/// Double-double accumulator so that inclusion–exclusion over large tables
/// (and long cumulative arrays elsewhere in the crate) stays well inside the
/// 1e-12 relative contracts.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    Dd { hi: s, lo: err }
}

impl Dd {
    #[inline]
    pub(crate) fn from(v: f64) -> Self {
        Dd { hi: v, lo: 0.0 }
    }

    #[inline]
    pub(crate) fn add(self, other: Dd) -> Dd {
        let s = two_sum(self.hi, other.hi);
        let lo = s.lo + self.lo + other.lo;
        let t = two_sum(s.hi, lo);
        Dd { hi: t.hi, lo: t.lo }
    }

    #[inline]
    pub(crate) fn add_f64(self, other: f64) -> Dd {
        self.add(Dd::from(other))
    }

    #[inline]
    pub(crate) fn sub(self, other: Dd) -> Dd {
        self.add(other.neg())
    }

    #[inline]
    pub(crate) fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    #[inline]
    pub(crate) fn value(self) -> f64 {
        self.hi + self.lo
    }
}

/// Cumulative sums over all lower-corner boxes of a grid, of size
/// `prod(extents[i] + 1)`. Queries reproduce naive cell sums by
/// 2^n-corner inclusion–exclusion.
#[derive(Debug, Clone)]
pub struct PrefixSumTable {
    geom: GridGeometry,
    table_extents: Vec<usize>,
    strides: Vec<usize>,
    table: Vec<Dd>,
}

/// Builds the prefix-sum table of `f`; each cell is touched once per axis.
pub fn build_prefix(f: &GridFunction) -> PrefixSumTable {
    PrefixSumTable::build(f)
}

impl PrefixSumTable {
    pub fn build(f: &GridFunction) -> Self {
        let geom = f.geometry().clone();
        let dim = geom.dim;
        let table_extents: Vec<usize> = geom.extents.iter().map(|&d| d + 1).collect();
        let mut strides = vec![1usize; dim];
        for i in (0..dim.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * table_extents[i + 1];
        }
        let total: usize = table_extents.iter().product();
        let mut table = vec![Dd::default(); total];

        // Scatter cell values at offset +1 along every axis.
        let cell_strides = geom.strides();
        for (lin, &v) in f.values().iter().enumerate() {
            let mut rem = lin;
            let mut tlin = 0usize;
            for k in 0..dim {
                let i = rem / cell_strides[k];
                rem %= cell_strides[k];
                tlin += (i + 1) * strides[k];
            }
            table[tlin] = Dd::from(v);
        }

        // Cumulative sum along each axis in turn.
        for axis in 0..dim {
            let stride = strides[axis];
            let len = table_extents[axis];
            // Iterate all lines along `axis`.
            let line_count = total / len;
            for line in 0..line_count {
                // Decompose `line` into the non-axis coordinates.
                let mut rem = line;
                let mut base = 0usize;
                for k in 0..dim {
                    if k == axis {
                        continue;
                    }
                    let ext = table_extents[k];
                    let coord = rem % ext;
                    rem /= ext;
                    base += coord * strides[k];
                }
                let mut acc = Dd::default();
                for i in 0..len {
                    let idx = base + i * stride;
                    acc = acc.add(table[idx]);
                    table[idx] = acc;
                }
            }
        }

        Self {
            geom,
            table_extents,
            strides,
            table,
        }
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geom
    }

    /// Number of stored table entries, `prod(d_i + 1)`.
    pub fn table_len(&self) -> usize {
        self.table.len()
    }

    fn corner(&self, idx: &[usize]) -> Dd {
        let mut lin = 0usize;
        for (k, &i) in idx.iter().enumerate() {
            debug_assert!(i < self.table_extents[k]);
            lin += i * self.strides[k];
        }
        self.table[lin]
    }

    /// Raw sum of cell values over the half-open index box `[lo, hi)`.
    /// Empty boxes (any `lo[k] == hi[k]`) sum to zero.
    pub fn cell_sum(&self, lo: &[usize], hi: &[usize]) -> f64 {
        debug_assert_eq!(lo.len(), self.geom.dim);
        debug_assert_eq!(hi.len(), self.geom.dim);
        let dim = self.geom.dim;
        let mut acc = Dd::default();
        let mut corner_idx = vec![0usize; dim];
        for mask in 0u32..(1u32 << dim) {
            let mut picks_lo = 0u32;
            for k in 0..dim {
                if mask & (1 << k) != 0 {
                    corner_idx[k] = lo[k];
                    picks_lo += 1;
                } else {
                    corner_idx[k] = hi[k];
                }
            }
            let term = self.corner(&corner_idx);
            acc = acc.add(if picks_lo.is_multiple_of(2) {
                term
            } else {
                term.neg()
            });
        }
        acc.value()
    }

    /// Integral of the function over the box `[lo, hi)`: cell sum times `h^n`.
    pub fn box_sum(&self, lo: &[usize], hi: &[usize]) -> f64 {
        self.cell_sum(lo, hi) * self.geom.cell_measure()
    }

    /// Mean over the box `[lo, hi)`. Errors with [`GridError::EmptyShape`]
    /// on degenerate boxes.
    pub fn box_mean(&self, lo: &[usize], hi: &[usize]) -> Result<f64, GridError> {
        self.geom.check_box(lo, hi)?;
        Ok(self.box_mean_unchecked(lo, hi))
    }

    /// Mean without bounds checks; callers guarantee `lo < hi` within extents.
    #[inline]
    pub fn box_mean_unchecked(&self, lo: &[usize], hi: &[usize]) -> f64 {
        let count: usize = lo.iter().zip(hi).map(|(&a, &b)| b - a).product();
        self.cell_sum(lo, hi) / count as f64
    }
}

/// Mean over a cell-index box, as a free function matching `box_mean`.
pub fn box_mean(table: &PrefixSumTable, lo: &[usize], hi: &[usize]) -> Result<f64, GridError> {
    table.box_mean(lo, hi)
}
