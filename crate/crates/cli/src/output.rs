use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

/// Scientific notation with 17 significant digits, enough to read back the same `f64`.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_owned(), source }
}

pub struct Output {
    dir: PathBuf,
}

impl Output {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        Ok(Self { dir: dir.to_owned() })
    }

    pub fn csv(&self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| csv_err(&path, e))?;
        w.write_record(header).map_err(|e| csv_err(&path, e))?;
        for row in rows {
            w.write_record(&row).map_err(|e| csv_err(&path, e))?;
        }
        w.flush().map_err(io_err(&path))?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }

    pub fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        let mut w = BufWriter::new(File::create(&path).map_err(io_err(&path))?);
        serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Io {
            path: path.clone(),
            source: e.into(),
        })?;
        writeln!(w).and_then(|_| w.flush()).map_err(io_err(&path))?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    CliError::Io { path: path.to_owned(), source: e.into() }
}

#[cfg(test)]
mod tests {
    use super::num;

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, -1.0 / 3.0, 6.02214076e23, 5e-324, 0.0] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(1.5), "1.5000000000000000e0");
    }
}
