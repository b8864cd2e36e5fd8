//! Experiment runner for the dsfc codec: redundancy sweeps, oracle reports and
//! CSV output shared by the `dsfc` command-line tool and the acceptance suite.

pub mod bound;
pub mod config;
pub mod error;
pub mod oracle_report;
pub mod sweep;

use std::io::Write;

use dsfc::oracles::{BoundType, ReportRow};

pub use bound::RedundancyBound;
pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};

/// Writes rows as CSV with the fixed header `instance,quantity,value,bound`.
pub fn write_csv<W: Write>(rows: &[ReportRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ReportRow::HEADER)?;
    for r in rows {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}

pub fn any_budget_rows(rows: &[ReportRow]) -> bool {
    rows.iter().any(|r| r.bound == BoundType::BudgetExceeded)
}
