//! Report emission: pretty JSON or raw text, to stdout or a file.

use martinet::error::Error;
use serde::Serialize;

pub fn emit<T: Serialize>(report: &T, out: Option<&str>) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(report)
        .map_err(|e| Error::Precondition(format!("serialization failed: {e}")))?;
    write_text(&(text + "\n"), out)
}

pub fn write_text(text: &str, out: Option<&str>) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Precondition(format!("cannot write `{path}`: {e}"))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
