//! Charts, metrics, forms, frames and transport.

pub mod chart;
pub mod forms;
pub mod frame;
pub mod metric;
pub mod ode;
pub mod transport;

pub use chart::{Chart, Coordinate};
pub use forms::{exterior_derivative, FormField};
pub use frame::{connection_curvature_forms, frame_forms, FrameField, FrameForms};
pub use metric::{christoffel, riemann, Christoffel, MetricField, MetricJet, Riemann, SampledMetric, Signature, SmoothMetric};
pub use ode::{integrate, OdeOptions, Solution};
pub use transport::{integrate_causal_curve, parallel_transport, transport_matrix, CurvePath, Polyline, SampledCurve};
