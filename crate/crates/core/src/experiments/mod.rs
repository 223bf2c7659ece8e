//! Parameter scans, scaling fits and the validation suite behind the CLI.

pub mod config;
pub mod output;
pub mod scan;
pub mod validate;

pub use config::{BudgetMode, EngineKind, FitRegime, OutputFormat, ScanConfig};
pub use output::{write_csv, write_json, ScanRecord};
pub use scan::{run_chi_scan, run_decay_profile, run_scaling_fit, FitResult};
pub use validate::{run_validate, CheckCategory, CheckResult, ValidationReport};
