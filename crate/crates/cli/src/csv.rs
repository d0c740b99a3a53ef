//! Minimal CSV output: numeric and enum fields only, so nothing is quoted.

use std::fmt::Write as _;

/// Formats `x` with `digits` significant digits in scientific notation;
/// `nan` marks fields that could not be computed.
pub fn float(x: f64, digits: usize) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x == 0.0 {
        "0".to_string()
    } else {
        format!("{:.*e}", digits - 1, x)
    }
}

pub struct Table {
    digits: usize,
    buf: String,
}

pub enum Cell {
    Float(f64),
    Int(u64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl Table {
    pub fn new(header: &[&str], digits: usize) -> Self {
        let mut buf = header.join(",");
        buf.push('\n');
        Table { digits, buf }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        for (i, c) in cells.into_iter().enumerate() {
            if i > 0 {
                self.buf.push(',');
            }
            match c {
                Cell::Float(x) => self.buf.push_str(&float(x, self.digits)),
                Cell::Int(n) => write!(self.buf, "{n}").unwrap(),
                Cell::Text(s) => self.buf.push_str(&s),
            }
        }
        self.buf.push('\n');
    }

    pub fn into_string(self) -> String {
        self.buf
    }
}

/// Joins values with `;` so a list fits in one unquoted field.
pub fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(";")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format() {
        assert_eq!(float(0.5, 3), "5.00e-1");
        assert_eq!(float(-1234.5678, 12), "-1.23456780000e3");
        assert_eq!(float(0.0, 12), "0");
        assert_eq!(float(f64::NAN, 12), "nan");
    }

    #[test]
    fn table_layout() {
        let mut t = Table::new(&["a", "b", "c"], 2);
        t.row(vec![1u64.into(), 0.25.into(), "even".into()]);
        assert_eq!(t.into_string(), "a,b,c\n1,2.5e-1,even\n");
        assert_eq!(join(&[0.7, 0.8]), "0.7;0.8");
    }
}
