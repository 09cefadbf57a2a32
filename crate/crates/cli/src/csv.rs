//! Minimal CSV writer: header row, full-precision floats, LF line endings.

use std::fmt::Write;

pub struct Csv {
    buf: String,
    width: usize,
}

pub enum Cell<'a> {
    Float(f64),
    Int(usize),
    Text(&'a str),
    Bool(bool),
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = header.join(",");
        buf.push('\n');
        Self { buf, width: header.len() }
    }

    pub fn row(&mut self, cells: &[Cell<'_>]) {
        assert_eq!(cells.len(), self.width, "row width differs from header");
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                self.buf.push(',');
            }
            let _ = match cell {
                Cell::Float(x) => write!(self.buf, "{}", float(*x)),
                Cell::Int(n) => write!(self.buf, "{n}"),
                Cell::Text(s) => write!(self.buf, "{s}"),
                Cell::Bool(b) => write!(self.buf, "{b}"),
            };
        }
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

/// 17 significant digits in scientific notation.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}
