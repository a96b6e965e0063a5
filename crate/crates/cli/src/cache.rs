//! On-disk character cache: content-addressed text entries with a checksum
//! line, written atomically (temp file + rename).

use orbifold_core::qseries::QSeries;
use orbifold_core::{Error, Result};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

pub struct DiskCache {
    dir: PathBuf,
}

impl DiskCache {
    pub fn new(dir: &Path) -> Result<DiskCache> {
        std::fs::create_dir_all(dir)
            .map_err(|e| Error::ParseError(format!("cache dir: {e}")))?;
        Ok(DiskCache { dir: dir.to_path_buf() })
    }

    fn path_for(&self, key: &str) -> PathBuf {
        let mut h = Sha256::new();
        h.update(key.as_bytes());
        let digest = h.finalize();
        self.dir.join(format!("{}.tw", hex_string(&digest)))
    }

    pub fn get(&self, key: &str) -> Result<Option<QSeries>> {
        let path = self.path_for(key);
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(_) => return Ok(None),
        };
        let (sum_line, body) = text
            .split_once('\n')
            .ok_or_else(|| Error::ParseError("corrupt cache entry: missing checksum".into()))?;
        let mut h = Sha256::new();
        h.update(body.as_bytes());
        let expect = hex_string(&h.finalize());
        if sum_line.trim() != expect {
            return Err(Error::ParseError(format!(
                "corrupt cache entry {}: checksum mismatch",
                path.display()
            )));
        }
        Ok(Some(QSeries::from_text(body)?))
    }

    pub fn put(&self, key: &str, series: &QSeries) -> Result<()> {
        let body = series.to_text();
        let mut h = Sha256::new();
        h.update(body.as_bytes());
        let content = format!("{}\n{}", hex_string(&h.finalize()), body);
        let path = self.path_for(key);
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, content).map_err(|e| Error::ParseError(format!("cache write: {e}")))?;
        std::fs::rename(&tmp, &path).map_err(|e| Error::ParseError(format!("cache rename: {e}")))?;
        Ok(())
    }
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

impl DiskCache {
    /// Raw checksummed blob storage (used for defect-representation data).
    pub fn put_blob(&self, key: &str, body: &str) -> Result<()> {
        let mut h = Sha256::new();
        h.update(body.as_bytes());
        let content = format!("{}\n{}", hex_string(&h.finalize()), body);
        let path = self.path_for(key).with_extension("blob");
        let tmp = path.with_extension("blob.tmp");
        std::fs::write(&tmp, content).map_err(|e| Error::ParseError(format!("cache write: {e}")))?;
        std::fs::rename(&tmp, &path).map_err(|e| Error::ParseError(format!("cache rename: {e}")))?;
        Ok(())
    }

    pub fn get_blob(&self, key: &str) -> Result<Option<String>> {
        let path = self.path_for(key).with_extension("blob");
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(_) => return Ok(None),
        };
        let (sum_line, body) = text
            .split_once('\n')
            .ok_or_else(|| Error::ParseError("corrupt cache entry: missing checksum".into()))?;
        let mut h = Sha256::new();
        h.update(body.as_bytes());
        if sum_line.trim() != hex_string(&h.finalize()) {
            return Err(Error::ParseError("corrupt cache entry: checksum mismatch".into()));
        }
        Ok(Some(body.to_string()))
    }
}
