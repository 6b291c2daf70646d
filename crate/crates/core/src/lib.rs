//! Extended sampling method for acoustic inverse scattering.
//!
//! Given far-field samples of a single (or a few) incident plane waves, the
//! method solves, at every probe point `z` of a lattice, a Tikhonov-regularised
//! far-field equation whose kernel is the analytic far field of a sound-soft
//! disc centred at `z`. The norm of the regularised density is small where
//! the disc covers the scatterer, which yields its location and a disc-shaped
//! support estimate.
//!
//! Module map:
//! - [`specfun`]: Bessel and Hankel functions of integer order.
//! - [`disc_kernel`]: analytic disc far field, translation, kernel assembly.
//! - [`forward`]: synthetic data (analytic discs, Nyström solver, noise).
//! - [`regularization`]: SVD, Tikhonov filter, Morozov parameter choice.
//! - [`esm`]: indicator fields, single- and multilevel reconstructions.
//! - [`io`]: text file formats and PGM heatmaps.
//! - [`cli`]: command-line front end.

pub mod cli;
pub mod disc_kernel;
pub mod esm;
pub mod forward;
pub mod io;
pub mod regularization;
pub mod specfun;
