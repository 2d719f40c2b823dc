//! On-disk tables: `dlog/p{p}.bin` and `gauss/q{q}.bin` under a root directory.
//!
//! Every file starts with the magic `CSL1` followed by little-endian fields.
//! Writes go to a temporary file in the target directory and are renamed into
//! place, so readers never observe a partial table.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use super::DirichletError;

const MAGIC: &[u8; 4] = b"CSL1";

#[derive(Debug, Clone)]
pub struct DiskCache {
    root: PathBuf,
}

impl DiskCache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        DiskCache { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn dlog_path(&self, p: u64) -> PathBuf {
        self.root.join("dlog").join(format!("p{p}.bin"))
    }

    pub fn gauss_path(&self, q: u64) -> PathBuf {
        self.root.join("gauss").join(format!("q{q}.bin"))
    }

    /// Returns `(generator, dlog)`; a missing or malformed file is a miss.
    pub fn load_dlog(&self, p: u64) -> Option<(u64, Vec<u32>)> {
        let bytes = fs::read(self.dlog_path(p)).ok()?;
        let mut r = Reader::new(&bytes)?;
        if r.u64()? != p {
            return None;
        }
        let g = r.u64()?;
        let n = r.u64()? as usize;
        if n != p as usize {
            return None;
        }
        let dlog = (0..n).map(|_| r.u32()).collect::<Option<Vec<_>>>()?;
        r.finished().then_some((g, dlog))
    }

    pub fn store_dlog(&self, p: u64, generator: u64, dlog: &[u32]) -> Result<(), DirichletError> {
        let mut buf = Vec::with_capacity(28 + 4 * dlog.len());
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&p.to_le_bytes());
        buf.extend_from_slice(&generator.to_le_bytes());
        buf.extend_from_slice(&(dlog.len() as u64).to_le_bytes());
        for &l in dlog {
            buf.extend_from_slice(&l.to_le_bytes());
        }
        write_atomic(&self.dlog_path(p), &buf)
    }

    pub fn load_gauss(&self, q: u64, count: usize) -> Option<Vec<Complex64>> {
        let bytes = fs::read(self.gauss_path(q)).ok()?;
        let mut r = Reader::new(&bytes)?;
        if r.u64()? != q || r.u64()? as usize != count {
            return None;
        }
        let table = (0..count)
            .map(|_| Some(Complex64::new(r.f64()?, r.f64()?)))
            .collect::<Option<Vec<_>>>()?;
        r.finished().then_some(table)
    }

    pub fn store_gauss(&self, q: u64, table: &[Complex64]) -> Result<(), DirichletError> {
        let mut buf = Vec::with_capacity(20 + 16 * table.len());
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&q.to_le_bytes());
        buf.extend_from_slice(&(table.len() as u64).to_le_bytes());
        for z in table {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
        write_atomic(&self.gauss_path(q), &buf)
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), DirichletError> {
    let io_err = |source| DirichletError::Cache { path: path.display().to_string(), source };
    let dir = path.parent().expect("cache paths have a parent");
    fs::create_dir_all(dir).map_err(io_err)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Option<Self> {
        (bytes.get(..4)? == MAGIC).then_some(Reader { bytes, pos: 4 })
    }

    fn take<const N: usize>(&mut self) -> Option<[u8; N]> {
        let chunk = self.bytes.get(self.pos..self.pos + N)?;
        self.pos += N;
        chunk.try_into().ok()
    }

    fn u32(&mut self) -> Option<u32> {
        self.take().map(u32::from_le_bytes)
    }

    fn u64(&mut self) -> Option<u64> {
        self.take().map(u64::from_le_bytes)
    }

    fn f64(&mut self) -> Option<f64> {
        self.take().map(f64::from_le_bytes)
    }

    fn finished(&self) -> bool {
        self.pos == self.bytes.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dlog_roundtrip_and_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let cache = DiskCache::new(dir.path());
        assert!(cache.load_dlog(7).is_none());
        let dlog = vec![u32::MAX, 0, 2, 1, 4, 5, 3];
        cache.store_dlog(7, 3, &dlog).unwrap();
        assert_eq!(cache.load_dlog(7), Some((3, dlog)));
        fs::write(cache.dlog_path(7), b"CSL0junk").unwrap();
        assert!(cache.load_dlog(7).is_none());
    }

    #[test]
    fn gauss_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = DiskCache::new(dir.path());
        let t = vec![Complex64::new(1.5, -2.0), Complex64::new(0.0, 3.0)];
        cache.store_gauss(3, &t).unwrap();
        assert_eq!(cache.load_gauss(3, 2), Some(t));
        assert!(cache.load_gauss(3, 5).is_none());
        let bytes = fs::read(cache.gauss_path(3)).unwrap();
        assert_eq!(&bytes[..4], b"CSL1");
    }
}
