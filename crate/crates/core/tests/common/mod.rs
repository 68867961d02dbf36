pub mod geweke;
pub mod metric_oracles;
pub mod oracle8;
pub mod prior_checks;
