use std::path::PathBuf;
use std::time::Duration;

use clap::ValueEnum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
    Dot,
}

/// Settings shared by every subcommand.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: &'static str,
    pub n: Option<usize>,
    pub max_nodes: usize,
    pub max_records: Option<u64>,
    pub time_limit: Option<Duration>,
    pub workers: Option<usize>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.n == Some(0) {
            return Err("-n must be at least 1".into());
        }
        if self.max_nodes == 0 {
            return Err("--max-nodes must be positive".into());
        }
        if self.max_records == Some(0) {
            return Err("--max-records must be positive".into());
        }
        if self.time_limit == Some(Duration::ZERO) {
            return Err("--time-limit must be positive".into());
        }
        if self.workers == Some(0) {
            return Err("--workers must be at least 1".into());
        }
        if self.command == "beta" && self.seed.is_none() {
            return Err("beta requires --seed".into());
        }
        Ok(())
    }

    /// Requested format, or `default` when none was given. Fails on formats
    /// the command cannot produce.
    pub fn format_or(&self, default: Format, allowed: &[Format]) -> Result<Format, String> {
        let f = self.format.unwrap_or(default);
        if allowed.contains(&f) {
            Ok(f)
        } else {
            Err(format!("{} does not support --format {f:?}", self.command))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> RunConfig {
        RunConfig {
            command: "words",
            n: Some(3),
            max_nodes: 14,
            max_records: None,
            time_limit: None,
            workers: None,
            output: None,
            format: None,
            seed: None,
        }
    }

    #[test]
    fn rejects_zero_budgets() {
        assert!(base().validate().is_ok());
        assert!(RunConfig { n: Some(0), ..base() }.validate().is_err());
        assert!(RunConfig { max_nodes: 0, ..base() }.validate().is_err());
        assert!(RunConfig { workers: Some(0), ..base() }.validate().is_err());
        assert!(RunConfig { max_records: Some(0), ..base() }.validate().is_err());
        assert!(RunConfig {
            time_limit: Some(Duration::ZERO),
            ..base()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn beta_needs_seed() {
        let c = RunConfig { command: "beta", ..base() };
        assert!(c.validate().is_err());
        assert!(RunConfig { seed: Some(1), ..c }.validate().is_ok());
    }

    #[test]
    fn format_selection() {
        let c = base();
        assert_eq!(c.format_or(Format::Text, &[Format::Text]), Ok(Format::Text));
        let c = RunConfig {
            format: Some(Format::Dot),
            ..base()
        };
        assert!(c.format_or(Format::Text, &[Format::Text, Format::Json]).is_err());
    }
}
