use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use clap::ValueEnum;
use leo_doppler::sweep::Table;
use leo_doppler::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Text,
}

/// A header plus string rows, rendered as CSV or aligned text.
pub struct Frame {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Frame {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Frame {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                for line in std::iter::once(&self.header).chain(&self.rows) {
                    w.write_record(line).expect("writing to memory");
                }
                String::from_utf8(w.into_inner().expect("writing to memory")).expect("csv output is UTF-8")
            }
            Format::Text => {
                let widths: Vec<usize> = (0..self.header.len())
                    .map(|i| {
                        self.rows
                            .iter()
                            .map(|r| r[i].len())
                            .chain([self.header[i].len()])
                            .max()
                            .unwrap_or(0)
                    })
                    .collect();
                let mut out = String::new();
                for line in std::iter::once(&self.header).chain(&self.rows) {
                    let cells: Vec<String> = line.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
                    out.push_str(&cells.join("  "));
                    out.push('\n');
                }
                out
            }
        }
    }
}

pub fn render_table(table: &Table, format: Format) -> Result<String> {
    match format {
        Format::Csv => table.to_csv_string(),
        Format::Text => Ok(table.to_text()),
    }
}

pub fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            let io_err = |source| Error::Io {
                path: path.to_path_buf(),
                source,
            };
            let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
            w.write_all(text.as_bytes()).map_err(io_err)?;
            w.flush().map_err(io_err)
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes())
                .and_then(|_| lock.flush())
                .map_err(|source| Error::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}
