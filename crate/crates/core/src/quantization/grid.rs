use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    /// Nodes `min + j h`, `h = (max - min) / n`; the last node wraps to the first.
    Periodic,
    /// Interior nodes `min + (j + 1) h`, `h = (max - min) / (n + 1)`; zero at `min` and `max`.
    DirichletZero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub label: String,
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(label: impl Into<String>, min: f64, max: f64, n: usize) -> Self {
        Axis { label: label.into(), min, max, n }
    }
}

/// Uniform tensor-product grid, row-major with the last axis fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    axes: Vec<Axis>,
    boundary: Boundary,
}

impl GridGeometry {
    pub fn new(axes: Vec<Axis>, boundary: Boundary) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::GridMismatch("grid needs at least one axis".into()));
        }
        for a in &axes {
            if !(a.min.is_finite() && a.max.is_finite() && a.max > a.min) {
                return Err(Error::GridMismatch(format!("axis {} has an empty box [{}, {}]", a.label, a.min, a.max)));
            }
            if a.n < 3 {
                return Err(Error::GridMismatch(format!("axis {} needs at least 3 points", a.label)));
            }
        }
        Ok(GridGeometry { axes, boundary })
    }

    /// A grid with axes labelled `q0, q1, ..`.
    pub fn uniform(boxes: &[(f64, f64)], n: &[usize], boundary: Boundary) -> Result<Self> {
        if boxes.len() != n.len() {
            return Err(Error::GridMismatch("box and point counts differ in length".into()));
        }
        let axes =
            boxes.iter().zip(n).enumerate().map(|(i, (&(a, b), &n))| Axis::new(format!("q{i}"), a, b, n)).collect();
        GridGeometry::new(axes, boundary)
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.n).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        let a = &self.axes[axis];
        match self.boundary {
            Boundary::Periodic => (a.max - a.min) / a.n as f64,
            Boundary::DirichletZero => (a.max - a.min) / (a.n + 1) as f64,
        }
    }

    pub fn coordinate(&self, axis: usize, j: usize) -> f64 {
        let a = &self.axes[axis];
        let h = self.spacing(axis);
        match self.boundary {
            Boundary::Periodic => a.min + j as f64 * h,
            Boundary::DirichletZero => a.min + (j + 1) as f64 * h,
        }
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dims()).map(|i| self.spacing(i)).product()
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.axes[axis + 1..].iter().map(|a| a.n).product()
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dims()];
        for i in (0..self.dims()).rev() {
            idx[i] = flat % self.axes[i].n;
            flat /= self.axes[i].n;
        }
        idx
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat).iter().enumerate().map(|(i, &j)| self.coordinate(i, j)).collect()
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(|k| self.point(k))
    }

    /// Nodes at least `margin` cells from a Dirichlet edge; every node when periodic.
    pub fn interior_mask(&self, margin: usize) -> Vec<bool> {
        (0..self.len())
            .map(|k| match self.boundary {
                Boundary::Periodic => true,
                Boundary::DirichletZero => {
                    self.multi_index(k).iter().zip(&self.axes).all(|(&j, a)| j >= margin && j + margin < a.n)
                }
            })
            .collect()
    }

    pub fn check_same(&self, other: &GridGeometry) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch("grids differ in box, shape, labels or boundary".into()))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridKind {
    /// Half-densities over `Q`.
    HalfDensity,
    /// Sections of the prequantum line bundle over a `(q, p)` box: position axes first.
    PhaseSection { config_dim: usize, momentum_dim: usize },
}

/// Complex values on a [`GridGeometry`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub geometry: GridGeometry,
    pub kind: GridKind,
    pub values: Vec<Complex64>,
}

impl Grid {
    pub fn new(geometry: GridGeometry, kind: GridKind, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != geometry.len() {
            return Err(Error::GridMismatch(format!("{} values for {} nodes", values.len(), geometry.len())));
        }
        if let GridKind::PhaseSection { config_dim, momentum_dim } = kind {
            if geometry.dims() != config_dim + momentum_dim {
                return Err(Error::GridMismatch(format!(
                    "phase-section grid over {config_dim} positions and {momentum_dim} momenta needs {} axes",
                    config_dim + momentum_dim
                )));
            }
        }
        Ok(Grid { geometry, kind, values })
    }

    pub fn zeros(geometry: GridGeometry, kind: GridKind) -> Result<Self> {
        let n = geometry.len();
        Grid::new(geometry, kind, vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn half_density<F>(geometry: GridGeometry, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64,
    {
        let values = geometry.points().map(|x| f(&x)).collect();
        Grid { geometry, kind: GridKind::HalfDensity, values }
    }

    pub fn phase_section<F>(geometry: GridGeometry, config_dim: usize, momentum_dim: usize, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Complex64,
    {
        let values = geometry.points().map(|x| f(&x)).collect();
        Grid::new(geometry, GridKind::PhaseSection { config_dim, momentum_dim }, values)
    }

    pub fn with_values(&self, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Grid { geometry: self.geometry.clone(), kind: self.kind, values }
    }

    pub fn dims(&self) -> usize {
        self.geometry.dims()
    }

    pub fn check_compatible(&self, other: &Grid) -> Result<()> {
        self.geometry.check_same(&other.geometry)?;
        if self.kind != other.kind {
            return Err(Error::GridMismatch("grid kinds differ".into()));
        }
        Ok(())
    }

    pub fn scaled(&self, c: Complex64) -> Grid {
        self.with_values(self.values.iter().map(|v| v * c).collect())
    }

    pub fn add(&self, other: &Grid) -> Result<Grid> {
        self.check_compatible(other)?;
        Ok(self.with_values(self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect()))
    }

    pub fn sub(&self, other: &Grid) -> Result<Grid> {
        self.check_compatible(other)?;
        Ok(self.with_values(self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect()))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
}
