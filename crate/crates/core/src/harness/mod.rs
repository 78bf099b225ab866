//! Instance files, random generators, brute-force oracles, run reports, the
//! cross-module property suite and the non-power-of-two search.

pub mod generate;
pub mod instance;
pub mod oracle;
pub mod report;
pub mod search;
pub mod suite;

pub use generate::{generate, Family, GenerateError};
pub use instance::{EdgeSpec, InstanceError, InstanceFile, MultiAllocationSpec, ValuationSpec};
pub use oracle::{oracle_best_allocation, oracle_mms, oracle_omega, OracleError};
pub use report::{digest, AgentRow, RunReport};
pub use search::{search_d3, Finding, SearchConfig, SearchReport};
pub use suite::{run_suite, SuiteConfig, SuiteReport, SuiteViolation};
