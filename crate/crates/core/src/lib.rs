//! Conformal metrics on the flat half 4-ball with prescribed zero
//! Q-curvature, zero T-curvature on both faces and constant U-curvature
//! on the corner: series construction, conformal action and numerical
//! verification.

pub mod basis;
pub mod config;
pub mod conformal;
pub mod construct;
pub mod error;
pub mod expr;
pub mod fd;
pub mod field;
pub mod geometry;
pub mod harmonics;
pub mod ops;
pub mod series;
pub mod verify;

pub use basis::{table1_row, verify_table1, BasisTerm, Family, Table1Grid, Table1Report, Table1Row};
pub use config::Config;
pub use conformal::{act, ConfElement, TransformSpec};
pub use construct::{build_omega1, build_solution, solve_fullball, BoundaryData, Solution, ZonalData};
pub use error::{Error, Result};
pub use expr::{DataExpression, Var};
pub use fd::{FdScheme, Side};
pub use field::Field;
pub use geometry::{GridOrders, Point4, QuadratureGrid, Region};
pub use series::{Monomial, Tail, ZonalSeries};
pub use verify::{
    curvatures, gauss_bonnet, non_c4_probe, residual_report, FlatConstants, GaussBonnet, GbConfig,
    ResidualConfig, ResidualReport, FLAT,
};
