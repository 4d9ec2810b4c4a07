//! Real-valued fields on uniform 1D/2D grids.
//!
//! A [`GridSignal`] is the state ψ of a flow and the initial condition f.
//! Inner products and norms are plain sums over grid values (no cell
//! weight); energies carry the cell weight h^d separately.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Spatial dimensionality of a grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridDim {
    One,
    Two,
}

/// Shape and spacing of a grid, kept by decompositions so signals can be
/// rebuilt from flat vectors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridMeta {
    pub dim: GridDim,
    pub rows: usize,
    pub cols: usize,
    pub spacing: f64,
}

impl GridMeta {
    /// Number of grid cells.
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cell volume h^d.
    pub fn cell_volume(&self) -> f64 {
        match self.dim {
            GridDim::One => self.spacing,
            GridDim::Two => self.spacing * self.spacing,
        }
    }
}

/// A real field on a uniform grid. 1D signals are stored as a single row.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSignal {
    values: Array2<f64>,
    meta: GridMeta,
}

impl GridSignal {
    /// 1D signal from a slice of values.
    pub fn one_d(values: &[f64], spacing: f64) -> Result<Self> {
        let arr = Array2::from_shape_vec((1, values.len()), values.to_vec())
            .expect("row vector shape");
        Self::new(arr, spacing, GridDim::One)
    }

    /// 2D signal from a rows×cols array.
    pub fn two_d(values: Array2<f64>, spacing: f64) -> Result<Self> {
        Self::new(values, spacing, GridDim::Two)
    }

    fn new(values: Array2<f64>, spacing: f64, dim: GridDim) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyData("signal has no cells"));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidParam(format!("spacing must be positive, got {spacing}")));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("grid values"));
        }
        let (rows, cols) = values.dim();
        if dim == GridDim::One && rows != 1 {
            return Err(Error::ShapeMismatch(format!("1D signal stored with {rows} rows")));
        }
        let meta = GridMeta { dim, rows, cols, spacing };
        Ok(Self { values, meta })
    }

    /// Rebuild a signal from a flat row-major vector and grid metadata.
    pub fn from_flat(meta: GridMeta, flat: Vec<f64>) -> Result<Self> {
        if flat.len() != meta.len() {
            return Err(Error::ShapeMismatch(format!(
                "flat length {} does not match {}x{}",
                flat.len(),
                meta.rows,
                meta.cols
            )));
        }
        let values =
            Array2::from_shape_vec((meta.rows, meta.cols), flat).expect("length checked");
        Self::new(values, meta.spacing, meta.dim)
    }

    /// Same-shape zero signal.
    pub fn zeros_like(&self) -> Self {
        Self { values: Array2::zeros(self.values.dim()), meta: self.meta }
    }

    pub fn meta(&self) -> GridMeta {
        self.meta
    }

    pub fn dim(&self) -> GridDim {
        self.meta.dim
    }

    pub fn spacing(&self) -> f64 {
        self.meta.spacing
    }

    /// Total number of cells M.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array2<f64> {
        &mut self.values
    }

    /// Row-major flat view of the grid values.
    pub fn flat(&self) -> &[f64] {
        self.values.as_slice().expect("standard layout")
    }

    /// Copy of the values as a flat 1D array.
    pub fn to_flat_array(&self) -> Array1<f64> {
        Array1::from_iter(self.flat().iter().copied())
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.meta.dim == other.meta.dim
            && self.values.dim() == other.values.dim()
    }

    /// Unweighted inner product Σ ψ_i v_i.
    pub fn inner(&self, other: &Self) -> f64 {
        debug_assert!(self.same_shape(other));
        self.flat().iter().zip(other.flat()).map(|(a, b)| a * b).sum()
    }

    /// Squared Euclidean norm Σ ψ_i².
    pub fn norm_sq(&self) -> f64 {
        self.flat().iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// self + a·other, in place.
    pub fn axpy(&mut self, a: f64, other: &Self) {
        debug_assert!(self.same_shape(other));
        self.values.zip_mut_with(&other.values, |x, y| *x += a * y);
    }

    /// a·self as a new signal.
    pub fn scaled(&self, a: f64) -> Self {
        Self { values: &self.values * a, meta: self.meta }
    }

    pub fn is_finite(&self) -> bool {
        self.flat().iter().all(|v| v.is_finite())
    }
}
