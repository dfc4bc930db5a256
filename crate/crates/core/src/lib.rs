//! Critical Ising and FK-Ising interfaces on square-lattice domains, their
//! Loewner driving functions, and the statistics used to compare them with
//! SLE(3) and SLE(16/3).

pub mod conformal;
pub mod crossing;
pub mod curve;
pub mod domain;
pub mod experiment;
pub mod fk;
pub mod loewner;
pub mod oracle;
pub mod plot;
pub mod real;
pub mod rng;
pub mod sampling;
pub mod spin;
pub mod stats;
pub mod unionfind;

pub type Complex64 = num_complex::Complex<f64>;
pub type DrivingFunction = loewner::DrivingFunction<f64>;
pub type CurveInH = loewner::CurveInH<f64>;
pub type UniformizerHandle = conformal::UniformizerHandle<f64>;
