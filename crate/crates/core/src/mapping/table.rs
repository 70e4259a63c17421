use std::collections::{BTreeMap, HashMap, HashSet};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("table {table}: CSV error at line {line}: {message}")]
    Csv {
        table: String,
        line: u64,
        message: String,
    },
    #[error("table {table}: empty header")]
    EmptyHeader { table: String },
    #[error("table {table}: duplicate column {column:?}")]
    DuplicateColumn { table: String, column: String },
    #[error("table {table}: row {row} has {found} cells, header has {expected}")]
    RaggedRow {
        table: String,
        row: usize,
        expected: usize,
        found: usize,
    },
}

/// A named CSV table: header plus rows of equal width.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    name: String,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    index: HashMap<String, usize>,
}

impl Table {
    pub fn new(
        name: impl Into<String>,
        header: Vec<String>,
        rows: Vec<Vec<String>>,
    ) -> Result<Self, TableError> {
        let name = name.into();
        if header.is_empty() {
            return Err(TableError::EmptyHeader { table: name });
        }
        let mut seen = HashSet::new();
        for column in &header {
            if !seen.insert(column.as_str()) {
                return Err(TableError::DuplicateColumn {
                    table: name,
                    column: column.clone(),
                });
            }
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != header.len() {
                return Err(TableError::RaggedRow {
                    table: name,
                    row: i + 1,
                    expected: header.len(),
                    found: row.len(),
                });
            }
        }
        let index = header
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i))
            .collect();
        Ok(Table {
            name,
            header,
            rows,
            index,
        })
    }

    /// Reads comma-separated UTF-8 text whose first record is the header.
    pub fn from_csv(name: impl Into<String>, text: &str) -> Result<Self, TableError> {
        let name = name.into();
        let text = text.strip_prefix('\u{FEFF}').unwrap_or(text);
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(false)
            .from_reader(text.as_bytes());
        let csv_err = |e: csv::Error, name: &str| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            TableError::Csv {
                table: name.to_owned(),
                line,
                message: e.to_string(),
            }
        };
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| csv_err(e, &name))?
            .iter()
            .map(|h| h.trim().to_owned())
            .collect();
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| csv_err(e, &name))?;
            rows.push(record.iter().map(str::to_owned).collect());
        }
        if header.len() == 1 && header[0].is_empty() {
            return Err(TableError::EmptyHeader { table: name });
        }
        Table::new(name, header, rows)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn has_column(&self, column: &str) -> bool {
        self.index.contains_key(column)
    }

    pub fn row(&self, i: usize) -> Row<'_> {
        Row {
            table: self,
            cells: &self.rows[i],
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = Row<'_>> + '_ {
        self.rows
            .iter()
            .map(move |cells| Row { table: self, cells })
    }

    pub fn raw_rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn to_csv(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        // writing to a Vec cannot fail
        writer.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            writer.write_record(row).expect("in-memory write");
        }
        String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }
}

/// Anything that can answer "what is in column X of this row".
pub trait CellSource {
    fn cell(&self, column: &str) -> Option<&str>;
}

#[derive(Debug, Clone, Copy)]
pub struct Row<'a> {
    table: &'a Table,
    cells: &'a [String],
}

impl<'a> Row<'a> {
    pub fn get(&self, column: &str) -> Option<&'a str> {
        self.table
            .index
            .get(column)
            .map(|&i| self.cells[i].as_str())
    }

    pub fn cells(&self) -> &'a [String] {
        self.cells
    }
}

impl CellSource for Row<'_> {
    fn cell(&self, column: &str) -> Option<&str> {
        self.get(column)
    }
}

impl CellSource for HashMap<String, String> {
    fn cell(&self, column: &str) -> Option<&str> {
        self.get(column).map(String::as_str)
    }
}

impl CellSource for BTreeMap<String, String> {
    fn cell(&self, column: &str) -> Option<&str> {
        self.get(column).map(String::as_str)
    }
}

impl CellSource for BTreeMap<&str, &str> {
    fn cell(&self, column: &str) -> Option<&str> {
        self.get(column).copied()
    }
}
