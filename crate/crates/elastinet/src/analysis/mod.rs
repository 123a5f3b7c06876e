//! Critical-point residuals, energy lower bounds and explicit constructions.

mod bounds;
mod constructions;
mod el;

pub use bounds::{lemma2c_bound, lower_bound_cycle, BoundError, THETA_LOWER_BOUND};
pub use constructions::{
    desingularize, desingularized_energy, fan_energy, fan_network, make_collapsing_fan,
    make_train_tracks, straighten_endpoint, straighten_start, train_track_between,
    train_tracks_network, ConstructionError, Straightened,
};
pub use el::{
    el_residual, interior_residual, ELReport, EdgeResidual, JunctionResidual, MIN_EL_SEGMENTS,
};
