//! Evolutionary multi-objective optimization of the bi-objective minimum
//! spanning tree problem.
//!
//! The crate provides the problem encoding and penalized fitness, the two
//! engines (NSGA-II and GSEMO), the variation operators, an exact oracle for
//! the extremal points of the convex hull of the Pareto front, the distance
//! potential used to track progress towards those points, and an experiment
//! harness for sweeps and scaling fits.

pub mod drift;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod graph;
pub mod gsemo;
pub mod nsga2;
pub mod objective;
pub mod oracle;
pub mod run;
pub mod variation;

pub use error::{ConfigError, InstanceError, OracleError};
pub use exec::Parallelism;
pub use graph::{parse_instance, Edge, Genotype, Graph, Objective};
pub use objective::{evaluate, FitnessVector};
pub use oracle::{extremal_points, ExtremalFront};
pub use run::{RunSummary, StopRule};
