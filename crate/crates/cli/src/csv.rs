use std::fmt::Write as _;
use std::path::Path;

use crate::error::CliError;

/// Shortest round-trip decimal; scientific for 0 < |x| < 1e-4. NaN is an
/// empty field and -0 prints as 0.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else if x == 0.0 {
        "0".to_string()
    } else if x.abs() < 1e-4 {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

/// In-memory CSV table, written in one piece with LF line endings.
pub struct Table {
    columns: usize,
    buf: String,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut buf = header.join(",");
        buf.push('\n');
        Self { columns: header.len(), buf }
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) {
        assert_eq!(fields.len(), self.columns, "row width must match the header");
        for (i, f) in fields.iter().enumerate() {
            if i > 0 {
                self.buf.push(',');
            }
            let _ = write!(self.buf, "{}", f.as_ref());
        }
        self.buf.push('\n');
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, &self.buf).map_err(|e| CliError::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_policy() {
        assert_eq!(fmt_float(1.0), "1");
        assert_eq!(fmt_float(0.1), "0.1");
        assert_eq!(fmt_float(1e-4), "0.0001");
        assert_eq!(fmt_float(2.5e-5), "2.5e-5");
        assert_eq!(fmt_float(-3e-9), "-3e-9");
        assert_eq!(fmt_float(-0.0), "0");
        assert_eq!(fmt_float(f64::NAN), "");
        assert_eq!(fmt_float(123456.789), "123456.789");
        for x in [0.1 + 0.2, 1.0 / 3.0, 7.3e-12, 0.911670135] {
            assert_eq!(fmt_float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn table_layout() {
        let mut t = Table::new(&["a", "b"]);
        t.row(&["1", ""]);
        assert_eq!(t.buf, "a,b\n1,\n");
    }
}
