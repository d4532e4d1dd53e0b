//! Convolution semigroups: generators, flows, and divisibility chains.

mod divisibility;
mod flow;
mod generator;
pub mod ode;

pub use divisibility::{divisibility_chain, BranchPolicy, ChainLevel, RECOMPOSITION_TOL};
pub use flow::{
    flow_point, integrate_flow, semigroup_measures, series_flow, FlowOptions, FlowState, Scheme, SemigroupMember,
};
pub use generator::{
    classify_halfline_generator, validate_generator, CallableGenerator, Classification, Generator, GeneratorCircle,
    GeneratorHalfLine, GeneratorReport,
};
pub use ode::RkOptions;
