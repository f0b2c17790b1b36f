//! The correct dynamics of one photon sector: stationary matching on the mesa
//! mode and time-dependent propagation on a grid.

mod field;
mod propagate;
mod stationary;

pub use field::{init_wavepacket, Grid, TwoChannelField, WavePacketSpec, PACKET_EDGE_TOLERANCE};
pub use propagate::{
    energy_expectation, hamiltonian_apply, propagate, AbsorbingLayer, PropagationOptions, Propagator, Trajectory,
    TrajectoryRecord, STABILITY_LIMIT,
};
pub use stationary::{
    flux_probabilities, stationary_scatter, stationary_scatter_with_mode, FluxProbabilities, InteriorBasis,
    InteriorChannel, StationarySolution,
};
