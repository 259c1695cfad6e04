//! Cut-and-project model sets in Euclidean and Heisenberg physical spaces,
//! their empirical autocorrelation, and their pure-point diffraction.
//!
//! The pipeline is: build a [`scheme::Scheme`] and [`scheme::Window`], cut out a
//! [`scheme::ModelSet`], estimate its autocorrelation with
//! [`autocorr::empirical_autocorr`], and compare against the theoretical
//! spectrum from [`diffraction::spherical_diffraction`].

pub mod autocorr;
pub mod diffraction;
pub mod error;
pub mod heisenberg;
pub mod lattice;
pub mod harmonic;
pub mod quadrature;
pub mod scheme;

pub use error::{Error, Result};
pub use lattice::{covolume, dual_lattice, enumerate_points, LatticeBasis, LatticePoint, QuadraticNumber, Region};
pub use scheme::{cut_and_project, density, Geometry, ModelPoint, ModelSet, Scheme, Window};
pub use harmonic::{spherical_ft, weighted_norm, Metric, PointGroup, SphericalLabel, TestFunction, WeightedNormParams};
pub use autocorr::{
    approx_sequence_diagnostic, empirical_autocorr, pair_against_test_function, pair_radial, radialize, ApproxSequence,
    EmpiricalAutocorrelation, Family,
};
pub use diffraction::{
    consistency_harness, meyer_diffraction, periodization_norm_bound_check, poisson_triple_check, shadow_transform_va,
    spherical_diffraction, PurePointMeasure, ShadowInput,
};
pub use heisenberg::{h_empirical_autocorr, h_model_set, HScheme};
