//! Lower bounds on the elastic energy from turning-angle arguments.

use std::f64::consts::{PI, TAU};

use thiserror::Error;

use crate::geometry::{total_curvature, DiscreteCurve, GeometryError};

/// Lower bound on the energy of any Theta network with α = β = 1.
pub const THETA_LOWER_BOUND: f64 = 16.0 * PI / 3.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("cycle length must be positive")]
    NonPositiveLength,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// `max(0, 2π − Σ|turns|)² / L` for a closed cycle of length `L`.
pub fn lower_bound_cycle(turns: &[f64], length: f64) -> Result<f64, BoundError> {
    if !(length > 0.0) {
        return Err(BoundError::NonPositiveLength);
    }
    let deficit = (TAU - turns.iter().map(|t| t.abs()).sum::<f64>()).max(0.0);
    Ok(deficit * deficit / length)
}

/// `2 Σ ∫|k|`, a lower bound for `∫k² + L` on each curve.
pub fn lemma2c_bound(curves: &[DiscreteCurve]) -> Result<f64, BoundError> {
    let mut sum = 0.0;
    for c in curves {
        sum += total_curvature(c)?;
    }
    Ok(2.0 * sum)
}
