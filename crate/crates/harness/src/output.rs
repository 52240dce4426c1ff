//! CSV formatting and destination handling.

use std::io::Write;
use std::path::Path;

use crate::error::Result;

/// 17 significant digits, which round-trips every `f64`.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Accumulates a CSV document with `#` comment lines and `\n` endings.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn raw(&mut self, block: &str) {
        self.text.push_str(block);
    }

    pub fn comment(&mut self, line: impl AsRef<str>) {
        self.text.push_str("# ");
        self.text.push_str(line.as_ref());
        self.text.push('\n');
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut first = true;
        for f in fields {
            if !first {
                self.text.push(',');
            }
            self.text.push_str(f.as_ref());
            first = false;
        }
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

/// Writes `text` to `path`, or to standard output when `path` is `-`.
pub fn emit(path: &Path, text: &str) -> Result<()> {
    if path.as_os_str() == "-" {
        let stdout = std::io::stdout();
        let mut lock = stdout.lock();
        lock.write_all(text.as_bytes())?;
        lock.flush()?;
    } else {
        std::fs::write(path, text)?;
    }
    Ok(())
}
