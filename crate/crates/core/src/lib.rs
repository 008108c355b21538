//! Simulation and analysis toolkit for 1+1D Dirac-fermion dynamics and its
//! emulation with a parametrically modulated qubit coupled to a microwave
//! resonator.
//!
//! The crate is organised by subsystem:
//!
//! - [`dirac`]: exact spinor evolution on a momentum grid, Zitterbewegung
//!   traces, positive-branch states, reduced pseudospin density and
//!   entanglement entropy.
//! - [`wigner`]: Wigner quasiprobability distributions from momentum spinors
//!   and from Fock-space density matrices, marginals, moments and wavepacket
//!   discrimination.
//! - [`circuit`]: truncated Fock-space simulation of the driven qubit-resonator
//!   system (full interaction-picture and effective Dirac Hamiltonians).
//! - [`tomography`]: probe-qubit Rabi traces, photon-number fits, readout
//!   calibration, conditional distributions and density-matrix reconstruction.
//! - [`scenario`]: configuration-driven runners for the Zitterbewegung,
//!   positive-branch, Klein-tunneling and model-comparison experiments.
//!
//! Units: `ħ = 1` throughout. Continuum scenarios use natural units; circuit
//! scenarios use rad/ns for angular frequencies and ns for time.

pub mod circuit;
pub mod dirac;
pub mod fock;
pub mod linalg;
pub mod quadrature;
pub mod scenario;
pub mod special;
pub mod tomography;
pub mod units;
pub mod wigner;

pub use num_complex::Complex64 as C64;
