//! Study harness around the pidenet library: configuration, the four rate
//! studies, the basket pricing demonstration, and file persistence. The CLI
//! binary is a thin layer over this crate.

pub mod config;
pub mod persist;
pub mod study;

pub use config::{StudyConfig, StudyKind};
pub use study::{run_basket_demo, run_study, BasketDemoConfig, BasketRow, StudyResult};
