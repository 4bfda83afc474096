use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// Writes a CSV with the given header. Rows are written as given.
pub(crate) fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reads a CSV whose header must match `header` exactly.
pub(crate) fn read_csv(path: &Path, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    if !path.exists() {
        return Err(Error::MissingInput(format!("{} not found", path.display())));
    }
    let mut rdr = csv::Reader::from_path(path)?;
    let got = rdr.headers()?.clone();
    if got.iter().ne(header.iter().copied()) {
        return Err(Error::malformed(
            path,
            1,
            format!("expected header {}", header.join(",")),
        ));
    }
    let mut out = Vec::new();
    for (i, r) in rdr.records().enumerate() {
        let r = r.map_err(|e| Error::malformed(path, i + 2, e.to_string()))?;
        if r.len() != header.len() {
            return Err(Error::malformed(
                path,
                i + 2,
                format!("expected {} columns", header.len()),
            ));
        }
        out.push(r);
    }
    Ok(out)
}

pub(crate) fn opt_f64(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
