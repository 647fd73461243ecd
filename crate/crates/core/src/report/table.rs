use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::mafi::format_correlation;
use crate::util::format_fixed;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum TableError {
    #[error("row {row} has {found} cells, header has {expected}")]
    RaggedRows {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("unreadable CSV table: {0}")]
    Csv(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableStyle {
    Markdown,
    Csv,
}

impl fmt::Display for TableStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TableStyle::Markdown => "markdown",
            TableStyle::Csv => "csv",
        })
    }
}

impl FromStr for TableStyle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "markdown" | "md" => Ok(TableStyle::Markdown),
            "csv" => Ok(TableStyle::Csv),
            other => Err(format!("unknown table style `{other}`")),
        }
    }
}

/// A table cell. Numbers are rounded half up when rendered.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Number {
        value: f64,
        decimals: u32,
    },
    /// Rendered with a trailing `%`.
    Percent {
        value: f64,
        decimals: u32,
    },
    /// Pearson r to three decimals with significance stars.
    Correlation {
        r: f64,
        p: f64,
    },
    Missing,
}

impl Cell {
    pub fn number(value: f64, decimals: u32) -> Self {
        Cell::Number { value, decimals }
    }

    pub fn percent(value: f64, decimals: u32) -> Self {
        Cell::Percent { value, decimals }
    }

    pub fn render(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Number { value, decimals } => format_fixed(*value, *decimals),
            Cell::Percent { value, decimals } => format!("{}%", format_fixed(*value, *decimals)),
            Cell::Correlation { r, p } => format_correlation(*r, *p),
            Cell::Missing => "n/a".to_string(),
        }
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

fn markdown_escape(s: &str) -> String {
    s.replace('|', "\\|").replace('\n', " ")
}

/// Renders rows under `header`. Column order is exactly the header order;
/// an empty row set yields the header alone.
pub fn render_table<H: AsRef<str>>(
    header: &[H],
    rows: &[Vec<Cell>],
    style: TableStyle,
) -> Result<String, TableError> {
    for (i, row) in rows.iter().enumerate() {
        if row.len() != header.len() {
            return Err(TableError::RaggedRows {
                row: i,
                expected: header.len(),
                found: row.len(),
            });
        }
    }
    let rendered: Vec<Vec<String>> = rows
        .iter()
        .map(|r| r.iter().map(Cell::render).collect())
        .collect();
    Ok(match style {
        TableStyle::Csv => {
            let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
            let to_err = |e: csv::Error| TableError::Csv(e.to_string());
            w.write_record(header.iter().map(|h| h.as_ref()))
                .map_err(to_err)?;
            for row in &rendered {
                w.write_record(row).map_err(to_err)?;
            }
            let bytes = w.into_inner().map_err(|e| TableError::Csv(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| TableError::Csv(e.to_string()))?
        }
        TableStyle::Markdown => {
            let mut out = String::new();
            let line = |cells: Vec<String>| format!("| {} |\n", cells.join(" | "));
            out.push_str(&line(
                header.iter().map(|h| markdown_escape(h.as_ref())).collect(),
            ));
            out.push_str(&line(header.iter().map(|_| "---".to_string()).collect()));
            for row in &rendered {
                out.push_str(&line(row.iter().map(|c| markdown_escape(c)).collect()));
            }
            out
        }
    })
}

/// Reads back a CSV table written by [`render_table`].
pub fn parse_csv_table(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>), TableError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header = rdr
        .headers()
        .map_err(|e| TableError::Csv(e.to_string()))?
        .iter()
        .map(String::from)
        .collect();
    let rows = rdr
        .records()
        .map(|r| {
            r.map(|rec| rec.iter().map(String::from).collect())
                .map_err(|e| TableError::Csv(e.to_string()))
        })
        .collect::<Result<_, _>>()?;
    Ok((header, rows))
}
