use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::observables::ObservableSeries;

/// Shortest representation that parses back to the same f64. Plain decimal
/// for moderate magnitudes, exponent form otherwise.
pub fn fmt_float(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// In-memory CSV table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    /// Row count implied by the sweep definition.
    pub expected_rows: usize,
}

impl Table {
    pub fn new(name: impl Into<String>, header: Vec<&'static str>, expected_rows: usize) -> Self {
        Self {
            name: name.into(),
            header,
            rows: Vec::with_capacity(expected_rows),
            expected_rows,
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> csv::Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner().map_err(|e| e.into_error().into())
    }
}

/// Writes files through a temporary sibling and a rename, and remembers what
/// it wrote so a failed run can be rolled back.
#[derive(Debug)]
pub struct AtomicWriter {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl AtomicWriter {
    pub fn new(dir: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> std::io::Result<PathBuf> {
        let target = self.dir.join(name);
        let tmp = self.dir.join(format!(".{name}.tmp"));
        let result = (|| {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(bytes)?;
            f.sync_all()?;
            fs::rename(&tmp, &target)
        })();
        if let Err(e) = result {
            let _ = fs::remove_file(&tmp);
            return Err(e);
        }
        self.written.push(target.clone());
        Ok(target)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    /// Remove everything written so far.
    pub fn rollback(&mut self) {
        for p in self.written.drain(..) {
            let _ = fs::remove_file(p);
        }
    }
}

/// Line plot of W(t) as a standalone SVG document.
pub fn inversion_svg(series: &ObservableSeries) -> String {
    let (w, h, pad) = (640.0, 400.0, 50.0);
    let t0 = series.time.first().copied().unwrap_or(0.0);
    let t1 = series.time.last().copied().unwrap_or(1.0);
    let span = if t1 > t0 { t1 - t0 } else { 1.0 };
    let x = |t: f64| pad + (t - t0) / span * (w - 2.0 * pad);
    let y = |v: f64| pad + (1.0 - v) / 2.0 * (h - 2.0 * pad);
    let points: Vec<String> = series
        .time
        .iter()
        .zip(&series.inversion)
        .map(|(&t, &v)| format!("{:.2},{:.2}", x(t), y(v)))
        .collect();
    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    for v in [-1.0, 0.0, 1.0] {
        s.push_str(&format!(
            "<line x1=\"{pad}\" y1=\"{yv:.2}\" x2=\"{x2}\" y2=\"{yv:.2}\" stroke=\"#bbb\"/>\n<text x=\"{tx}\" y=\"{ty:.2}\" font-size=\"12\" text-anchor=\"end\">{v}</text>\n",
            yv = y(v),
            x2 = w - pad,
            tx = pad - 6.0,
            ty = y(v) + 4.0
        ));
    }
    s.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">t = {} .. {}</text>\n",
        w / 2.0,
        h - 15.0,
        fmt_float(t0),
        fmt_float(t1)
    ));
    s.push_str(&format!(
        "<text x=\"15\" y=\"{:.2}\" font-size=\"12\" transform=\"rotate(-90 15 {:.2})\" text-anchor=\"middle\">W(t)</text>\n",
        h / 2.0,
        h / 2.0
    ));
    s.push_str(&format!(
        "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.5\" points=\"{}\"/>\n",
        points.join(" ")
    ));
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.0, 1.0, -0.1, 1.0 / 3.0, 1e-300, 6.02e23, 1.1641497712357792e-3, f64::MIN_POSITIVE] {
            let s = fmt_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_float(0.5), "0.5");
        assert_eq!(fmt_float(1e-300), "1e-300");
    }

    #[test]
    fn csv_quotes_fields() {
        let mut t = Table::new("t.csv", vec!["a", "b"], 1);
        t.push(vec!["x,y".into(), "1".into()]);
        let s = String::from_utf8(t.to_csv().unwrap()).unwrap();
        assert_eq!(s, "a,b\r\n\"x,y\",1\r\n");
    }

    #[test]
    fn rollback_removes_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = AtomicWriter::new(dir.path()).unwrap();
        let p = w.write("a.csv", b"x").unwrap();
        assert!(p.exists());
        assert!(!dir.path().join(".a.csv.tmp").exists());
        w.rollback();
        assert!(!p.exists());
    }
}
