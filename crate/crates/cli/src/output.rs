//! Result serialization.
//!
//! CSV: comma separated, LF line endings, one header line. Reals are written
//! as `{:.16e}` (17 significant digits), integers and labels verbatim.

use std::io::Write;

use serde_json::Value;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(u64),
    Text(&'static str),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<&'static str> for Cell {
    fn from(x: &'static str) -> Self {
        Cell::Text(x)
    }
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", self.header.join(","))?;
        for row in &self.rows {
            let line: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Real(x) => format!("{x:.16e}"),
                    Cell::Int(n) => n.to_string(),
                    Cell::Text(s) => s.to_string(),
                })
                .collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// Everything a command produces.
pub struct Report {
    /// Which model produced the numbers.
    pub regime: &'static str,
    pub result: Value,
    pub table: Table,
}

/// JSON number, or `null` for non-finite values.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else {
        Value::Null
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["x[1/gamma]", "label", "n"]);
        t.push(vec![0.1.into(), "a".into(), 3usize.into()]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x[1/gamma],label,n\n1.0000000000000001e-1,a,3\n");
    }
}
