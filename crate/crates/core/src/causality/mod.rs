//! Causal structure of `g̃`: cone comparisons with explicit backgrounds,
//! time functions, causal diamonds and light-ray asymptotics.

pub mod backgrounds;
pub mod cones;
pub mod diamond;
pub mod epsilon;
pub mod rays;
pub mod tilted;
pub mod time_fn;

pub use backgrounds::{tilt_delta, ConstantMetric, ConeBackground, TiltedBackground, WedgeBackground};
pub use cones::{cone_contained, ConeOptions, ConeVerdict, ConeViolation};
pub use diamond::{flat_diamond, flat_escape_test, flat_growth, plane_diamond, plane_escape_test, DiamondBox, EscapeReport, GrowthReport};
pub use epsilon::{compare_with_background, epsilon_bound, epsilon_from_f, grid_epsilon, epsilon_convergence, time_direction, Convergence, EpsilonBound};
pub use rays::{lightray_exponent, RayFit, RayProfile};
pub use tilted::{monotone_scan, tilted_comparison, MonotoneScan};
pub use time_fn::{verify_time_function, CurveOptions, Steering, TimeFunction, TimeFunctionReport};
