//! Delimited-text ingestion and re-serialization: price panels, conflict
//! catalogs, and coordinate files.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use spillover_core::conflict::ConflictEvent;
use spillover_core::linalg::Mat;
use spillover_core::panel::PricePanel;

use crate::error::{CliError, Result};

/// What to do with gaps in the year sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapPolicy {
    /// Reject the file.
    Strict,
    /// Keep the longest contiguous block (earliest wins a tie) and report
    /// what was dropped.
    Truncate,
}

#[derive(Debug, Clone, Default)]
pub struct PanelReport {
    /// Years at which a gap in the sequence starts (the missing year).
    pub gaps: Vec<i32>,
    /// Rows dropped by truncation.
    pub dropped_rows: usize,
    /// First and last year kept.
    pub kept_span: Option<(i32, i32)>,
}

pub struct PanelOptions {
    pub delimiter: u8,
    pub year_column: String,
    pub gap_policy: GapPolicy,
}

impl Default for PanelOptions {
    fn default() -> Self {
        PanelOptions {
            delimiter: b',',
            year_column: "year".to_string(),
            gap_policy: GapPolicy::Strict,
        }
    }
}

/// Read a panel from delimited text with a header row: one year column plus
/// one column per location.
pub fn load_panel(reader: impl Read, options: &PanelOptions) -> Result<(PricePanel, PanelReport)> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = csv_reader
        .headers()
        .map_err(|e| CliError::data(format!("cannot read header row: {e}")))?
        .clone();
    let year_idx = headers
        .iter()
        .position(|h| h == options.year_column)
        .ok_or_else(|| {
            CliError::data(format!(
                "missing year column \"{}\" (found: {})",
                options.year_column,
                headers.iter().collect::<Vec<_>>().join(", ")
            ))
        })?;
    let locations: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != year_idx)
        .map(|(_, h)| h.to_string())
        .collect();
    if locations.is_empty() {
        return Err(CliError::data("no location columns"));
    }

    let mut rows: Vec<(i32, Vec<f64>)> = Vec::new();
    for (line, record) in csv_reader.records().enumerate() {
        let record = record?;
        let row_no = line + 2; // 1-based, after the header
        let year_text = record
            .get(year_idx)
            .ok_or_else(|| CliError::data(format!("row {row_no}: short record")))?;
        let year: i32 = year_text.parse().map_err(|_| {
            CliError::data(format!("row {row_no}: non-numeric year \"{year_text}\""))
        })?;
        let mut values = Vec::with_capacity(locations.len());
        for (i, cell) in record.iter().enumerate() {
            if i == year_idx {
                continue;
            }
            let column = &headers[i];
            let value: f64 = cell.parse().map_err(|_| {
                CliError::data(format!(
                    "row {row_no}, column \"{column}\": non-numeric cell \"{cell}\""
                ))
            })?;
            values.push(value);
        }
        rows.push((year, values));
    }
    if rows.is_empty() {
        return Err(CliError::data("panel has no data rows"));
    }
    rows.sort_by_key(|(y, _)| *y);
    for w in rows.windows(2) {
        if w[1].0 == w[0].0 {
            return Err(CliError::data(format!("duplicate year {}", w[0].0)));
        }
    }

    let mut report = PanelReport::default();
    for w in rows.windows(2) {
        if w[1].0 > w[0].0 + 1 {
            report.gaps.push(w[0].0 + 1);
        }
    }
    let kept: &[(i32, Vec<f64>)] = if report.gaps.is_empty() {
        &rows
    } else {
        match options.gap_policy {
            GapPolicy::Strict => {
                return Err(CliError::data(format!(
                    "gap in year sequence at {} (strict policy; use truncation to keep the longest block)",
                    report.gaps[0]
                )));
            }
            GapPolicy::Truncate => {
                // Longest contiguous block, earliest on ties.
                let mut best = (0usize, 0usize);
                let mut start = 0;
                for i in 1..=rows.len() {
                    let contiguous = i < rows.len() && rows[i].0 == rows[i - 1].0 + 1;
                    if !contiguous {
                        if i - start > best.1 - best.0 {
                            best = (start, i);
                        }
                        start = i;
                    }
                }
                report.dropped_rows = rows.len() - (best.1 - best.0);
                &rows[best.0..best.1]
            }
        }
    };

    let t = kept.len();
    let mut values = Mat::zeros(t, locations.len());
    for (r, (_, row)) in kept.iter().enumerate() {
        values.row_mut(r).copy_from_slice(row);
    }
    let years: Vec<i32> = kept.iter().map(|(y, _)| *y).collect();
    report.kept_span = Some((years[0], *years.last().unwrap()));
    let panel = PricePanel::new(years, locations, values)
        .map_err(|e| CliError::data(e.to_string()))?;
    Ok((panel, report))
}

/// Serialize a panel back to delimited text in the input layout.
pub fn save_panel(panel: &PricePanel, writer: impl Write, delimiter: u8) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(delimiter)
        .from_writer(writer);
    let mut header = vec!["year".to_string()];
    header.extend(panel.locations().iter().cloned());
    w.write_record(&header)?;
    for (i, &year) in panel.years().iter().enumerate() {
        let mut record = vec![year.to_string()];
        record.extend(panel.values().row(i).iter().map(|v| format_float(*v)));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Shortest round-trip float formatting (matches the JSON writers).
pub fn format_float(v: f64) -> String {
    let mut buf = ryu_format(v);
    if buf.ends_with(".0") {
        buf.truncate(buf.len() - 2);
    }
    buf
}

fn ryu_format(v: f64) -> String {
    // serde_json uses ryu internally; going through it keeps every tabular
    // file bit-identical with the JSON outputs.
    serde_json::to_string(&v).unwrap_or_else(|_| v.to_string())
}

/// Column map for conflict catalogs.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct CatalogSchema {
    pub region: String,
    pub start_year: String,
    pub end_year: String,
    pub fatalities: String,
    pub name: Option<String>,
}

impl Default for CatalogSchema {
    fn default() -> Self {
        CatalogSchema {
            region: "region".to_string(),
            start_year: "start_year".to_string(),
            end_year: "end_year".to_string(),
            fatalities: "fatalities".to_string(),
            name: Some("name".to_string()),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct CatalogReport {
    /// Rows dropped because the fatality cell was empty.
    pub dropped_missing_fatalities: usize,
}

/// Parse a conflict catalog. Rows with an empty fatality cell are dropped
/// and counted; malformed years or inverted spans are errors.
pub fn parse_catalog(
    reader: impl Read,
    schema: &CatalogSchema,
    delimiter: u8,
) -> Result<(Vec<ConflictEvent>, CatalogReport)> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = csv_reader
        .headers()
        .map_err(|e| CliError::data(format!("cannot read header row: {e}")))?
        .clone();
    let col = |name: &str| -> Result<usize> {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            CliError::data(format!(
                "missing catalog column \"{name}\" (found: {})",
                headers.iter().collect::<Vec<_>>().join(", ")
            ))
        })
    };
    let region_idx = col(&schema.region)?;
    let start_idx = col(&schema.start_year)?;
    let end_idx = col(&schema.end_year)?;
    let deaths_idx = col(&schema.fatalities)?;
    let name_idx = match &schema.name {
        Some(name) => col(name).ok(),
        None => None,
    };

    let mut events = Vec::new();
    let mut report = CatalogReport::default();
    for (line, record) in csv_reader.records().enumerate() {
        let record = record?;
        let row_no = line + 2;
        let cell = |idx: usize| record.get(idx).unwrap_or("");
        let deaths_text = cell(deaths_idx);
        if deaths_text.is_empty() {
            report.dropped_missing_fatalities += 1;
            continue;
        }
        let parse_year = |idx: usize, what: &str| -> Result<i32> {
            let text = cell(idx);
            text.replace(',', "").parse().map_err(|_| {
                CliError::data(format!("row {row_no}: malformed {what} \"{text}\""))
            })
        };
        let start = parse_year(start_idx, "start year")?;
        let end = parse_year(end_idx, "end year")?;
        let region: u32 = cell(region_idx).parse().map_err(|_| {
            CliError::data(format!(
                "row {row_no}: malformed region \"{}\"",
                cell(region_idx)
            ))
        })?;
        let deaths: f64 = deaths_text.replace(',', "").parse().map_err(|_| {
            CliError::data(format!(
                "row {row_no}: malformed fatalities \"{deaths_text}\""
            ))
        })?;
        let name = name_idx
            .map(|i| cell(i).to_string())
            .filter(|s| !s.is_empty())
            .unwrap_or_else(|| format!("event {row_no}"));
        let event = ConflictEvent::new(
            format!("row{row_no}"),
            name,
            region,
            start,
            end,
            deaths,
        )
        .map_err(|e| CliError::data(format!("row {row_no}: {e}")))?;
        events.push(event);
    }
    Ok((events, report))
}

/// Load a (label, latitude, longitude) coordinate file.
pub fn load_coordinates(reader: impl Read, delimiter: u8) -> Result<BTreeMap<String, [f64; 2]>> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = BTreeMap::new();
    for (line, record) in csv_reader.records().enumerate() {
        let record = record?;
        let row_no = line + 2;
        if record.len() < 3 {
            return Err(CliError::data(format!("coordinates row {row_no}: need label, lat, lon")));
        }
        let label = record.get(0).unwrap().to_string();
        let lat: f64 = record.get(1).unwrap().parse().map_err(|_| {
            CliError::data(format!("coordinates row {row_no}: bad latitude"))
        })?;
        let lon: f64 = record.get(2).unwrap().parse().map_err(|_| {
            CliError::data(format!("coordinates row {row_no}: bad longitude"))
        })?;
        out.insert(label, [lat, lon]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_complete_panel() {
        let csv = "year,Paris,London\n1700,1.0,2.0\n1701,1.1,2.1\n1702,1.2,2.2\n";
        let (panel, report) = load_panel(csv.as_bytes(), &PanelOptions::default()).unwrap();
        assert_eq!(panel.len(), 3);
        assert_eq!(panel.n_locations(), 2);
        assert_eq!(panel.locations(), &["Paris".to_string(), "London".to_string()]);
        assert!(report.gaps.is_empty());
    }

    #[test]
    fn missing_year_column_is_reported() {
        let csv = "anno,Paris\n1700,1.0\n";
        let err = load_panel(csv.as_bytes(), &PanelOptions::default()).unwrap_err();
        assert!(err.to_string().contains("missing year column"), "{err}");
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn non_numeric_cell_names_row_and_column() {
        let csv = "year,Paris,London\n1700,1.0,2.0\n1701,n/a,2.1\n";
        let err = load_panel(csv.as_bytes(), &PanelOptions::default()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 3") && msg.contains("Paris") && msg.contains("n/a"), "{msg}");
    }

    #[test]
    fn duplicate_year_rejected() {
        let csv = "year,Paris\n1700,1.0\n1700,1.1\n";
        let err = load_panel(csv.as_bytes(), &PanelOptions::default()).unwrap_err();
        assert!(err.to_string().contains("duplicate year 1700"));
    }

    #[test]
    fn gap_errors_under_strict_and_truncates_under_lenient() {
        // Hand-enumerated blocks on a 6-row fixture with 1701 missing:
        // {1700} and {1702..1706} -> the longest block is the last five rows.
        let csv = "year,Paris\n1700,1.0\n1702,1.2\n1703,1.3\n1704,1.4\n1705,1.5\n1706,1.6\n";
        let err = load_panel(csv.as_bytes(), &PanelOptions::default()).unwrap_err();
        assert!(err.to_string().contains("gap in year sequence at 1701"), "{err}");

        let options = PanelOptions { gap_policy: GapPolicy::Truncate, ..Default::default() };
        let (panel, report) = load_panel(csv.as_bytes(), &options).unwrap();
        assert_eq!(panel.years(), &[1702, 1703, 1704, 1705, 1706]);
        assert_eq!(report.dropped_rows, 1);
        assert_eq!(report.gaps, vec![1701]);
        assert_eq!(report.kept_span, Some((1702, 1706)));
    }

    #[test]
    fn truncation_tie_keeps_earliest_block() {
        let csv = "year,P\n1700,1\n1701,2\n1705,3\n1706,4\n";
        let options = PanelOptions { gap_policy: GapPolicy::Truncate, ..Default::default() };
        let (panel, _) = load_panel(csv.as_bytes(), &options).unwrap();
        assert_eq!(panel.years(), &[1700, 1701]);
    }

    #[test]
    fn unsorted_rows_are_sorted_by_year() {
        let csv = "year,P\n1702,3\n1700,1\n1701,2\n";
        let (panel, _) = load_panel(csv.as_bytes(), &PanelOptions::default()).unwrap();
        assert_eq!(panel.years(), &[1700, 1701, 1702]);
        assert_eq!(panel.column(0), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn panel_round_trips_through_save() {
        let csv = "year,Paris,London\n1700,1.25,2\n1701,1.5,2.125\n";
        let (panel, _) = load_panel(csv.as_bytes(), &PanelOptions::default()).unwrap();
        let mut out = Vec::new();
        save_panel(&panel, &mut out, b',').unwrap();
        let (back, _) = load_panel(out.as_slice(), &PanelOptions::default()).unwrap();
        assert_eq!(panel.values(), back.values());
        assert_eq!(panel.years(), back.years());
    }

    #[test]
    fn custom_delimiter_supported() {
        let csv = "year;Paris\n1700;1.0\n1701;1.1\n";
        let options = PanelOptions { delimiter: b';', ..Default::default() };
        let (panel, _) = load_panel(csv.as_bytes(), &options).unwrap();
        assert_eq!(panel.len(), 2);
    }

    #[test]
    fn catalog_parses_and_drops_missing_fatalities() {
        let csv = "name,region,start_year,end_year,fatalities\n\
                   Thirty Years War,4,1618,1648,3000000\n\
                   Unknown,3,1650,1651,\n\
                   Short,3,1700,1700,500\n";
        let (events, report) =
            parse_catalog(csv.as_bytes(), &CatalogSchema::default(), b',').unwrap();
        assert_eq!(events.len(), 2);
        assert_eq!(report.dropped_missing_fatalities, 1);
        assert_eq!(events[0].region_code, 4);
        assert_eq!(events[0].duration_years(), 31);
    }

    #[test]
    fn catalog_rejects_inverted_span_naming_row() {
        let csv = "name,region,start_year,end_year,fatalities\nBad,3,1618,1617,100\n";
        let err = parse_catalog(csv.as_bytes(), &CatalogSchema::default(), b',').unwrap_err();
        assert!(err.to_string().contains("row 2"), "{err}");
    }

    #[test]
    fn catalog_rejects_malformed_year() {
        let csv = "name,region,start_year,end_year,fatalities\nBad,3,sixteen,1620,100\n";
        let err = parse_catalog(csv.as_bytes(), &CatalogSchema::default(), b',').unwrap_err();
        assert!(err.to_string().contains("malformed start year"), "{err}");
    }

    #[test]
    fn coordinates_load() {
        let csv = "label,lat,lon\nParis,48.85,2.35\nLondon,51.5,-0.12\n";
        let coords = load_coordinates(csv.as_bytes(), b',').unwrap();
        assert_eq!(coords["Paris"], [48.85, 2.35]);
        assert_eq!(coords.len(), 2);
    }
}
