//! Numerical laboratory for scalar curvature, μ-bubbles and Gauss–Bonnet
//! prism inequalities on Riemannian metrics over chart boxes.

pub mod bubble;
pub mod curvature;
pub mod domain;
pub mod error;
pub mod lab;
pub mod linalg;
pub mod metric;
pub mod num;
pub mod surface;

pub use curvature::{curvature, scalar_curvature, CurvatureSample, DerivMode};
pub use error::{Error, Result};
pub use linalg::SMat;
pub use metric::{ChartBox, FieldKind, MetricField, MetricSpec, Provenance, QuadraticFormField};
pub use num::{Dual, Jet, Num, MAX_DIM};
pub use surface::{BaseMesh, Coorientation, GraphSurface, HeightProfile, SurfacePoint};
pub use bubble::{BubbleProblem, BubbleSolution, PhiSpec, PsiSpec, SolveOptions, SolveStatus};
pub use domain::{AuditReport, CombinatorialScheme, CorneredDomain};
pub use lab::{PrismOptions, PrismReport, Verdict};
