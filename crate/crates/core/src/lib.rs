//! Transmission expansion planning with linearised power flow, in an
//! angle-based and a cycle-based mixed-integer formulation.

pub mod bench;
pub mod bigm;
pub mod formulation;
pub mod graph;
pub mod instancegen;
pub mod netmodel;
pub mod postproc;
pub mod verify;
