//! Lorentzian scenarios on `N = M × ℝ²` and the closed-form connection and curvature oracle.

pub mod factor;
pub mod functions;
pub mod lemma1;
pub mod scenario;

pub use factor::{Block, BlockKind, BlockSplit, Factor, FactorSpec, ProductManifold};
pub use functions::{Bump, Profile, TrigPoly};
pub use lemma1::{compare_forms, FamilyResiduals, Lemma1Data, Lemma1Forms};
pub use scenario::{build_scenario, isotropic_j, FShape, GenericSpec, LorentzScenario, LorentzSpace, PlaneSpec};
