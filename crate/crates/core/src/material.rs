//! Material data and the scalar ingredients of the fracture energy:
//! the degradation function, the local dissipation function and the
//! Macaulay/step primitives used by both penalty terms.

use crate::error::{Error, Result};

/// Isotropic linear-elastic material with fracture parameters.
///
/// Plane strain is assumed throughout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialSpec {
    pub young_modulus: f64,
    pub poisson_ratio: f64,
    pub toughness: f64,
    pub length_scale: f64,
}

impl MaterialSpec {
    pub fn new(young_modulus: f64, poisson_ratio: f64, toughness: f64, length_scale: f64) -> Result<Self> {
        if !(young_modulus > 0.0) {
            return Err(Error::Material(format!("E must be positive, got {young_modulus}")));
        }
        if !(poisson_ratio > -1.0 && poisson_ratio < 0.5) {
            return Err(Error::Material(format!("nu must lie in (-1, 0.5), got {poisson_ratio}")));
        }
        if !(toughness > 0.0) {
            return Err(Error::Material(format!("G_c must be positive, got {toughness}")));
        }
        if !(length_scale > 0.0) {
            return Err(Error::Material(format!("length scale must be positive, got {length_scale}")));
        }
        Ok(Self { young_modulus, poisson_ratio, toughness, length_scale })
    }

    /// First Lame constant.
    pub fn lambda(&self) -> f64 {
        let nu = self.poisson_ratio;
        self.young_modulus * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
    }

    /// Shear modulus.
    pub fn mu(&self) -> f64 {
        self.young_modulus / (2.0 * (1.0 + self.poisson_ratio))
    }

    /// Plane-strain modulus E / (1 - nu^2).
    pub fn plane_strain_modulus(&self) -> f64 {
        self.young_modulus / (1.0 - self.poisson_ratio * self.poisson_ratio)
    }

    /// 2D plane-strain bulk modulus lambda + mu, used by the
    /// volumetric-deviatoric split.
    pub fn bulk_modulus_2d(&self) -> f64 {
        self.lambda() + self.mu()
    }
}

/// Local dissipation function family: `At1` uses w(a) = a, `At2` uses
/// w(a) = a^2. The normalization constant c_w is bound to the kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    At1,
    At2,
}

impl ModelKind {
    pub fn c_w(&self) -> f64 {
        match self {
            ModelKind::At1 => 8.0 / 3.0,
            ModelKind::At2 => 2.0,
        }
    }

    pub fn dissipation(&self, alpha: f64) -> f64 {
        match self {
            ModelKind::At1 => alpha,
            ModelKind::At2 => alpha * alpha,
        }
    }

    pub fn dissipation_prime(&self, alpha: f64) -> f64 {
        match self {
            ModelKind::At1 => 1.0,
            ModelKind::At2 => 2.0 * alpha,
        }
    }

    pub fn dissipation_prime2(&self, _alpha: f64) -> f64 {
        match self {
            ModelKind::At1 => 0.0,
            ModelKind::At2 => 2.0,
        }
    }
}

/// Tension-compression split selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitKind {
    /// No split: the full strain energy is degraded.
    NoSplit,
    /// Volumetric-deviatoric split.
    VolDev,
    /// Spectral (eigenvalue-based) split.
    Spectral,
}

/// How the irreversibility constraint alpha >= alpha_prev is enforced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IrreversibilityMode {
    /// Quadratic penalty with constant gamma > 0.
    PenaltyGamma(f64),
    /// History field: running maximum of the tensile energy density.
    HistoryField,
}

impl IrreversibilityMode {
    pub fn validate(&self) -> Result<()> {
        if let IrreversibilityMode::PenaltyGamma(g) = self {
            if !(*g > 0.0) {
                return Err(Error::Config(format!("gamma must be positive, got {g}")));
            }
        }
        Ok(())
    }
}

/// Degradation function g(a) = (1 - a)^2.
pub fn degradation(alpha: f64) -> f64 {
    (1.0 - alpha) * (1.0 - alpha)
}

pub fn degradation_prime(alpha: f64) -> f64 {
    -2.0 * (1.0 - alpha)
}

pub fn degradation_prime2(_alpha: f64) -> f64 {
    2.0
}

/// Negative-part Macaulay bracket: min(0, y).
pub fn macaulay_neg(y: f64) -> f64 {
    y.min(0.0)
}

/// Step function H^-(y): 1 for y <= 0, else 0. Note H^-(0) = 1.
pub fn heaviside_neg(y: f64) -> f64 {
    if y <= 0.0 {
        1.0
    } else {
        0.0
    }
}
