use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Shape of a point: a column vector or an `n x p` matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layout {
    Vector(usize),
    Matrix(usize, usize),
}

impl Layout {
    pub fn shape(&self) -> (usize, usize) {
        match *self {
            Layout::Vector(n) => (n, 1),
            Layout::Matrix(n, p) => (n, p),
        }
    }

    pub fn len(&self) -> usize {
        let (n, p) = self.shape();
        n * p
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A real point stored densely in column-major order.
///
/// Inner products and norms are Euclidean (Frobenius for matrices).
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    data: DMatrix<f64>,
    layout: Layout,
}

impl Point {
    pub fn zeros(layout: Layout) -> Self {
        let (n, p) = layout.shape();
        Point {
            data: DMatrix::zeros(n, p),
            layout,
        }
    }

    pub fn from_vec(values: Vec<f64>) -> Self {
        let n = values.len();
        Point {
            data: DMatrix::from_vec(n, 1, values),
            layout: Layout::Vector(n),
        }
    }

    pub fn from_slice(values: &[f64]) -> Self {
        Self::from_vec(values.to_vec())
    }

    pub fn from_dvector(v: DVector<f64>) -> Self {
        let n = v.len();
        Point {
            data: DMatrix::from_column_slice(n, 1, v.as_slice()),
            layout: Layout::Vector(n),
        }
    }

    pub fn from_matrix(m: DMatrix<f64>) -> Self {
        let layout = Layout::Matrix(m.nrows(), m.ncols());
        Point { data: m, layout }
    }

    /// Reinterprets a matrix with the given layout; the shapes must agree.
    pub fn with_layout(m: DMatrix<f64>, layout: Layout) -> Result<Self> {
        if (m.nrows(), m.ncols()) != layout.shape() {
            return Err(Error::DimensionMismatch {
                expected: layout,
                found: Layout::Matrix(m.nrows(), m.ncols()),
            });
        }
        Ok(Point { data: m, layout })
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn as_matrix_mut(&mut self) -> &mut DMatrix<f64> {
        &mut self.data
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.data
    }

    pub fn as_slice(&self) -> &[f64] {
        self.data.as_slice()
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        self.data.as_mut_slice()
    }

    pub fn to_dvector(&self) -> DVector<f64> {
        DVector::from_column_slice(self.data.as_slice())
    }

    pub fn check_layout(&self, expected: Layout) -> Result<()> {
        if self.layout == expected {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected,
                found: self.layout,
            })
        }
    }

    pub fn dot(&self, other: &Point) -> f64 {
        self.data.dot(&other.data)
    }

    pub fn norm(&self) -> f64 {
        self.data.norm()
    }

    pub fn norm_squared(&self) -> f64 {
        self.data.norm_squared()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `self += a * x`.
    pub fn axpy(&mut self, a: f64, x: &Point) {
        for (d, v) in self.data.iter_mut().zip(x.data.iter()) {
            *d += a * v;
        }
    }

    pub fn scale_mut(&mut self, a: f64) {
        self.data *= a;
    }

    pub fn scaled(&self, a: f64) -> Point {
        Point {
            data: &self.data * a,
            layout: self.layout,
        }
    }

    /// `self + alpha * (target - self)`.
    pub fn toward(&self, target: &Point, alpha: f64) -> Point {
        let mut out = self.scaled(1.0 - alpha);
        out.axpy(alpha, target);
        out
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (&self.data - &other.data).norm()
    }
}

impl Add for &Point {
    type Output = Point;
    fn add(self, rhs: &Point) -> Point {
        Point {
            data: &self.data + &rhs.data,
            layout: self.layout,
        }
    }
}

impl Sub for &Point {
    type Output = Point;
    fn sub(self, rhs: &Point) -> Point {
        Point {
            data: &self.data - &rhs.data,
            layout: self.layout,
        }
    }
}

impl Mul<f64> for &Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        self.scaled(rhs)
    }
}

impl Neg for &Point {
    type Output = Point;
    fn neg(self) -> Point {
        self.scaled(-1.0)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        &self + &rhs
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        &self - &rhs
    }
}
