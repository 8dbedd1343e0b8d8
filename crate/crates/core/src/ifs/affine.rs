use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type State = DVector<f64>;

/// Default margin below 1 that a spectral radius must clear.
pub const DEFAULT_SCHUR_MARGIN: f64 = 1e-9;

/// Vector norm on the state space. Operator norms are the induced ones.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Norm {
    #[default]
    Euclidean,
    Max,
    One,
}

impl Norm {
    pub fn of(self, v: &DVector<f64>) -> f64 {
        match self {
            Norm::Euclidean => v.norm(),
            Norm::Max => v.amax(),
            Norm::One => v.lp_norm(1),
        }
    }

    pub fn distance(self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        self.of(&(a - b))
    }

    /// Induced operator norm `sup ‖Ax‖/‖x‖`.
    pub fn operator(self, m: &DMatrix<f64>) -> f64 {
        match self {
            Norm::Euclidean => m.clone().singular_values().max(),
            Norm::Max => m
                .row_iter()
                .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
                .fold(0.0, f64::max),
            Norm::One => m
                .column_iter()
                .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
                .fold(0.0, f64::max),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchurCheck {
    pub stable: bool,
    pub spectral_radius: f64,
}

/// Largest eigenvalue modulus of a square matrix.
pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix"));
    }
    match m.nrows() {
        0 => Err(Error::Dimension { expected: 1, got: 0 }),
        1 => Ok(m[(0, 0)].abs()),
        _ => Ok(m
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)),
    }
}

/// Schur test: stable iff the spectral radius is below `1 - margin`.
pub fn verify_schur(m: &DMatrix<f64>, margin: f64) -> Result<SchurCheck> {
    let spectral_radius = spectral_radius(m)?;
    Ok(SchurCheck { stable: spectral_radius < 1.0 - margin, spectral_radius })
}

/// One response function `x ↦ Ax + b` with a Schur matrix `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    matrix: DMatrix<f64>,
    offset: DVector<f64>,
}

impl AffineMap {
    pub fn new(matrix: DMatrix<f64>, offset: DVector<f64>) -> Result<Self> {
        Self::with_margin(matrix, offset, DEFAULT_SCHUR_MARGIN)
    }

    pub fn with_margin(matrix: DMatrix<f64>, offset: DVector<f64>, margin: f64) -> Result<Self> {
        if matrix.nrows() != offset.len() {
            return Err(Error::Dimension { expected: matrix.nrows(), got: offset.len() });
        }
        if offset.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("offset"));
        }
        let check = verify_schur(&matrix, margin)?;
        if !check.stable {
            return Err(Error::NotSchur { radius: check.spectral_radius, margin });
        }
        Ok(Self { matrix, offset })
    }

    /// Scalar map `x ↦ a·x + b`.
    pub fn scalar(a: f64, b: f64) -> Result<Self> {
        Self::new(DMatrix::from_element(1, 1, a), DVector::from_element(1, b))
    }

    /// Constant map `x ↦ b` (zero matrix).
    pub fn constant(b: DVector<f64>) -> Self {
        let n = b.len();
        Self { matrix: DMatrix::zeros(n, n), offset: b }
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn offset(&self) -> &DVector<f64> {
        &self.offset
    }

    pub fn apply(&self, x: &State) -> State {
        &self.matrix * x + &self.offset
    }

    /// Lipschitz constant of the map under `norm`.
    pub fn lipschitz(&self, norm: Norm) -> f64 {
        norm.operator(&self.matrix)
    }

    /// Same matrix, offset shifted by `delta`.
    pub fn shifted(&self, delta: &DVector<f64>) -> Result<Self> {
        Self::new(self.matrix.clone(), &self.offset + delta)
    }
}
