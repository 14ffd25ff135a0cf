//! Subcommand implementations.

pub mod adf;
pub mod ingest;
pub mod network;
pub mod pipeline;
pub mod quantreg;
pub mod regress;
pub mod rolling;
pub mod sea;
pub mod spillover;

use std::path::PathBuf;

use clap::Args;
use spillover_core::panel::PricePanel;

use crate::error::{CliError, Result};
use crate::io::{GapPolicy, PanelOptions, PanelReport};

/// Flags shared by every subcommand that reads a panel.
#[derive(Debug, Args)]
pub struct PanelArgs {
    /// Panel file: delimited text with a year column and one column per location.
    #[arg(long)]
    pub panel: PathBuf,
    /// Field delimiter.
    #[arg(long, default_value = ",")]
    pub delimiter: String,
    /// Name of the year column.
    #[arg(long, default_value = "year")]
    pub year_column: String,
    /// Gap handling: strict rejects, truncate keeps the longest contiguous block.
    #[arg(long, value_parser = parse_gap_policy, default_value = "strict")]
    pub gap_policy: GapPolicy,
}

fn parse_gap_policy(s: &str) -> std::result::Result<GapPolicy, String> {
    match s {
        "strict" => Ok(GapPolicy::Strict),
        "truncate" => Ok(GapPolicy::Truncate),
        other => Err(format!("expected strict or truncate, got {other}")),
    }
}

impl PanelArgs {
    pub fn delimiter_byte(&self) -> Result<u8> {
        let bytes = self.delimiter.as_bytes();
        if bytes.len() != 1 {
            return Err(CliError::config(format!(
                "delimiter must be a single byte, got \"{}\"",
                self.delimiter
            )));
        }
        Ok(bytes[0])
    }

    pub fn load(&self) -> Result<(PricePanel, PanelReport)> {
        let file = std::fs::File::open(&self.panel).map_err(|e| {
            CliError::data(format!("cannot open {}: {e}", self.panel.display()))
        })?;
        let options = PanelOptions {
            delimiter: self.delimiter_byte()?,
            year_column: self.year_column.clone(),
            gap_policy: self.gap_policy,
        };
        crate::io::load_panel(file, &options)
    }
}

/// Winsorize (optionally) and difference (optionally) a freshly loaded panel.
pub fn prepare_panel(
    panel: &PricePanel,
    winsorize: Option<f64>,
    difference: bool,
) -> Result<PricePanel> {
    let mut prepared = panel.clone();
    if let Some(p) = winsorize {
        let (w, warnings) = prepared
            .winsorize(p)
            .map_err(|e| CliError::config(e.to_string()))?;
        for warning in warnings {
            eprintln!("warning: {warning}");
        }
        prepared = w;
    }
    if difference {
        prepared = prepared
            .first_difference()
            .map_err(|e| CliError::data(e.to_string()))?;
    }
    Ok(prepared)
}

/// Parse a window set: "30..40" (inclusive) or "30,35,40".
pub fn parse_windows(text: &str) -> Result<Vec<usize>> {
    let parse_one = |s: &str| -> Result<usize> {
        s.trim()
            .parse()
            .map_err(|_| CliError::config(format!("bad window \"{s}\"")))
    };
    let mut windows = Vec::new();
    if let Some((from, to)) = text.split_once("..") {
        let from = parse_one(from)?;
        let to = parse_one(to)?;
        if to < from {
            return Err(CliError::config(format!("window range {from}..{to} is inverted")));
        }
        windows.extend(from..=to);
    } else {
        for part in text.split(',') {
            windows.push(parse_one(part)?);
        }
    }
    windows.sort_unstable();
    windows.dedup();
    if windows.is_empty() {
        return Err(CliError::config("window set is empty"));
    }
    Ok(windows)
}

/// Parse a year range "1628..1648".
pub fn parse_year_range(text: &str) -> Result<(i32, i32)> {
    let (lo, hi) = text
        .split_once("..")
        .ok_or_else(|| CliError::config(format!("expected LO..HI, got \"{text}\"")))?;
    let lo: i32 = lo
        .trim()
        .parse()
        .map_err(|_| CliError::config(format!("bad year \"{lo}\"")))?;
    let hi: i32 = hi
        .trim()
        .parse()
        .map_err(|_| CliError::config(format!("bad year \"{hi}\"")))?;
    if hi < lo {
        return Err(CliError::config(format!("year range {lo}..{hi} is inverted")));
    }
    Ok((lo, hi))
}

/// Parse comma-separated year ranges "1618..1648,1688..1697".
pub fn parse_year_ranges(text: &str) -> Result<Vec<(i32, i32)>> {
    text.split(',').map(parse_year_range).collect()
}

/// Read an index CSV (year,value,n_windows) written by `rolling`.
pub fn read_index_csv(path: &PathBuf) -> Result<Vec<(i32, f64)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            continue; // header
        }
        let mut parts = line.split(',');
        let year: i32 = parts
            .next()
            .unwrap_or("")
            .parse()
            .map_err(|_| CliError::data(format!("{}: bad year on line {}", path.display(), i + 1)))?;
        let value = parts.next().unwrap_or("");
        if value.is_empty() {
            continue; // recorded gap
        }
        let value: f64 = value.parse().map_err(|_| {
            CliError::data(format!("{}: bad value on line {}", path.display(), i + 1))
        })?;
        out.push((year, value));
    }
    if out.is_empty() {
        return Err(CliError::data(format!("{}: no usable rows", path.display())));
    }
    Ok(out)
}

pub fn write_output(path: &PathBuf, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_parsing() {
        assert_eq!(parse_windows("30..33").unwrap(), vec![30, 31, 32, 33]);
        assert_eq!(parse_windows("40,30,35,30").unwrap(), vec![30, 35, 40]);
        assert!(parse_windows("40..30").is_err());
        assert!(parse_windows("x").is_err());
    }

    #[test]
    fn year_range_parsing() {
        assert_eq!(parse_year_range("1628..1648").unwrap(), (1628, 1648));
        assert_eq!(
            parse_year_ranges("1618..1648,1756..1762").unwrap(),
            vec![(1618, 1648), (1756, 1762)]
        );
        assert!(parse_year_range("1648..1628").is_err());
    }
}
