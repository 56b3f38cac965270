//! Matrix and vector files: CSV (one feature per column) and the `LSCR` binary layout
//! (magic, `u32` version, `u64` rows, `u64` columns, column-major little-endian `f64`).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::marker::PhantomData;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::dictionary::{Dictionary, FeatureAccess};
use crate::error::{Result, ScreenError};
use crate::linalg;
use crate::Scalar;

pub const MAGIC: &[u8; 4] = b"LSCR";
pub const VERSION: u32 = 1;
const HEADER_LEN: u64 = 4 + 4 + 8 + 8;
pub const DEFAULT_BLOCK_SIZE: usize = 4096;

/// Dense matrix as read from disk, column-major.
#[derive(Clone, Debug, PartialEq)]
pub struct RawMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl RawMatrix {
    pub fn into_dictionary<T: Scalar>(self) -> Result<Dictionary<T>> {
        Dictionary::from_column_major(self.rows, self.cols, self.data.into_iter().map(T::lit).collect())
    }
}

fn is_binary(path: &Path) -> Result<bool> {
    let mut f = File::open(path)?;
    let mut head = [0u8; 4];
    let mut got = 0;
    while got < 4 {
        match f.read(&mut head[got..])? {
            0 => break,
            k => got += k,
        }
    }
    Ok(got == 4 && &head == MAGIC)
}

/// Reads either format, detected by the magic bytes.
pub fn read_matrix(path: impl AsRef<Path>) -> Result<RawMatrix> {
    let path = path.as_ref();
    if is_binary(path)? {
        read_binary(path)
    } else {
        read_csv(path)
    }
}

pub fn read_dictionary<T: Scalar>(path: impl AsRef<Path>) -> Result<Dictionary<T>> {
    read_matrix(path)?.into_dictionary()
}

/// Reads a single-column matrix as a vector.
pub fn read_vector<T: Scalar>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let m = read_matrix(path)?;
    if m.cols != 1 {
        return Err(ScreenError::Format(format!(
            "expected a single column vector, found {} columns",
            m.cols
        )));
    }
    Ok(m.data.into_iter().map(T::lit).collect())
}

fn read_csv(path: &Path) -> Result<RawMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_error)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_error)?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let row = rec
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| ScreenError::Format(format!("row {}: cannot parse {s:?}", line + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(ScreenError::Format(format!(
                    "row {} has {} entries, expected {}",
                    line + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    let n = rows.len();
    let p = rows.first().map_or(0, Vec::len);
    if n == 0 || p == 0 {
        return Err(ScreenError::Format("empty matrix file".into()));
    }
    let mut data = vec![0.0; n * p];
    for (i, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            data[j * n + i] = v;
        }
    }
    Ok(RawMatrix { rows: n, cols: p, data })
}

fn csv_error(e: csv::Error) -> ScreenError {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => ScreenError::Io(e),
        other => ScreenError::Format(format!("{other:?}")),
    }
}

fn read_header<R: Read>(r: &mut R) -> Result<(usize, usize)> {
    let mut buf = [0u8; HEADER_LEN as usize];
    r.read_exact(&mut buf)
        .map_err(|_| ScreenError::Format("truncated binary header".into()))?;
    if &buf[..4] != MAGIC {
        return Err(ScreenError::Format("missing LSCR magic".into()));
    }
    let version = u32::from_le_bytes(buf[4..8].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(ScreenError::Format(format!("unsupported binary version {version}")));
    }
    let n = u64::from_le_bytes(buf[8..16].try_into().expect("8 bytes"));
    let p = u64::from_le_bytes(buf[16..24].try_into().expect("8 bytes"));
    let n = usize::try_from(n).map_err(|_| ScreenError::Format("row count too large".into()))?;
    let p = usize::try_from(p).map_err(|_| ScreenError::Format("column count too large".into()))?;
    if n == 0 || p == 0 {
        return Err(ScreenError::Format("empty matrix file".into()));
    }
    Ok((n, p))
}

fn read_f64s<R: Read>(r: &mut R, out: &mut [f64]) -> Result<()> {
    let mut bytes = vec![0u8; out.len() * 8];
    r.read_exact(&mut bytes)
        .map_err(|_| ScreenError::Format("truncated binary data".into()))?;
    for (o, c) in out.iter_mut().zip(bytes.chunks_exact(8)) {
        *o = f64::from_le_bytes(c.try_into().expect("8 bytes"));
    }
    Ok(())
}

fn read_binary(path: &Path) -> Result<RawMatrix> {
    let mut r = BufReader::new(File::open(path)?);
    let (n, p) = read_header(&mut r)?;
    let mut data = vec![0.0; n * p];
    read_f64s(&mut r, &mut data)?;
    Ok(RawMatrix { rows: n, cols: p, data })
}

/// Writes column-major `data` (`rows × cols`) in the binary layout.
pub fn write_binary(path: impl AsRef<Path>, rows: usize, cols: usize, data: &[f64]) -> Result<()> {
    if data.len() != rows * cols {
        return Err(ScreenError::DimensionMismatch {
            expected: rows * cols,
            got: data.len(),
        });
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(rows as u64).to_le_bytes())?;
    w.write_all(&(cols as u64).to_le_bytes())?;
    for v in data {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Writes column-major `data` as CSV, one feature per column.
pub fn write_csv(path: impl AsRef<Path>, rows: usize, cols: usize, data: &[f64]) -> Result<()> {
    if data.len() != rows * cols {
        return Err(ScreenError::DimensionMismatch {
            expected: rows * cols,
            got: data.len(),
        });
    }
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    for i in 0..rows {
        w.write_record((0..cols).map(|j| format!("{:e}", data[j * rows + i])))
            .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_dictionary<T: Scalar>(path: impl AsRef<Path>, dict: &Dictionary<T>, binary: bool) -> Result<()> {
    let data: Vec<f64> = dict
        .to_column_major()
        .into_iter()
        .map(|v| v.to_f64().unwrap_or(f64::NAN))
        .collect();
    if binary {
        write_binary(path, dict.dim(), dict.count(), &data)
    } else {
        write_csv(path, dict.dim(), dict.count(), &data)
    }
}

pub fn write_vector<T: Scalar>(path: impl AsRef<Path>, v: &[T], binary: bool) -> Result<()> {
    let data: Vec<f64> = v.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect();
    if binary {
        write_binary(path, v.len(), 1, &data)
    } else {
        write_csv(path, v.len(), 1, &data)
    }
}

/// CSV with header `feature,rejected` and one `0`/`1` row per feature.
pub fn write_flags<W: Write>(out: W, flags: &[bool]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["feature", "rejected"]).map_err(csv_error)?;
    for (i, &f) in flags.iter().enumerate() {
        w.write_record([i.to_string(), u8::from(f).to_string()])
            .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_flags(path: impl AsRef<Path>) -> Result<Vec<bool>> {
    let mut rdr = csv::Reader::from_path(path).map_err(csv_error)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        match rec.get(1) {
            Some("0") => out.push(false),
            Some("1") => out.push(true),
            other => return Err(ScreenError::Format(format!("bad flag value {other:?}"))),
        }
    }
    Ok(out)
}

/// CSV with header `feature,weight`.
pub fn write_weights<T: Scalar, W: Write>(out: W, w: &[T]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(out);
    wr.write_record(["feature", "weight"]).map_err(csv_error)?;
    for (i, v) in w.iter().enumerate() {
        wr.write_record([i.to_string(), format!("{v:e}")])
            .map_err(csv_error)?;
    }
    wr.flush()?;
    Ok(())
}

/// Features of a binary matrix file, read from disk in blocks of columns on every pass.
/// Only one block is resident at a time.
#[derive(Debug, Clone)]
pub struct BlockFeatureReader<T> {
    path: PathBuf,
    n: usize,
    p: usize,
    block_size: usize,
    norms: Vec<T>,
    _scalar: PhantomData<T>,
}

impl<T: Scalar> BlockFeatureReader<T> {
    pub fn open(path: impl AsRef<Path>, block_size: usize) -> Result<Self> {
        if block_size == 0 {
            return Err(ScreenError::InvalidParameter("block size must be positive".into()));
        }
        let path = path.as_ref().to_path_buf();
        let mut r = BufReader::new(File::open(&path)?);
        let (n, p) = read_header(&mut r)?;
        let expected = HEADER_LEN + (n as u64) * (p as u64) * 8;
        if r.get_ref().metadata()?.len() < expected {
            return Err(ScreenError::Format("truncated binary data".into()));
        }
        let mut reader = Self {
            path,
            n,
            p,
            block_size,
            norms: Vec::new(),
            _scalar: PhantomData,
        };
        let mut norms = Vec::with_capacity(p);
        reader.for_each_block(|_, block| {
            norms.extend(block.chunks_exact(n).map(linalg::norm));
            Ok(())
        })?;
        if let Some(j) = norms.iter().position(|v| !(*v > T::zero())) {
            return Err(ScreenError::ZeroFeature(j));
        }
        reader.norms = norms;
        Ok(reader)
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    fn for_each_block(&self, mut f: impl FnMut(usize, &[T]) -> Result<()>) -> Result<()> {
        let mut r = BufReader::new(File::open(&self.path)?);
        r.seek(SeekFrom::Start(HEADER_LEN))?;
        let mut raw = vec![0.0f64; self.block_size.min(self.p) * self.n];
        let mut block = Vec::with_capacity(raw.len());
        let mut start = 0;
        while start < self.p {
            let cols = self.block_size.min(self.p - start);
            let buf = &mut raw[..cols * self.n];
            read_f64s(&mut r, buf)?;
            block.clear();
            block.extend(buf.iter().map(|&v| T::lit(v)));
            f(start, &block)?;
            start += cols;
        }
        Ok(())
    }
}

impl<T: Scalar> FeatureAccess<T> for BlockFeatureReader<T> {
    fn dim(&self) -> usize {
        self.n
    }

    fn count(&self) -> usize {
        self.p
    }

    fn feature_norms(&self) -> Result<Vec<T>> {
        Ok(self.norms.clone())
    }

    fn correlate(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.n {
            return Err(ScreenError::DimensionMismatch {
                expected: self.n,
                got: v.len(),
            });
        }
        let mut out = Vec::with_capacity(self.p);
        self.for_each_block(|_, block| {
            out.par_extend(block.par_chunks_exact(self.n).map(|c| linalg::dot(c, v)));
            Ok(())
        })?;
        Ok(out)
    }

    fn feature(&self, j: usize) -> Result<Vec<T>> {
        if j >= self.p {
            return Err(ScreenError::IndexOutOfRange { index: j, len: self.p });
        }
        let mut r = File::open(&self.path)?;
        r.seek(SeekFrom::Start(HEADER_LEN + (j * self.n * 8) as u64))?;
        let mut col = vec![0.0; self.n];
        read_f64s(&mut r, &mut col)?;
        Ok(col.into_iter().map(T::lit).collect())
    }

    fn gather(&self, indices: &[usize]) -> Result<Dictionary<T>> {
        let mut data = Vec::with_capacity(indices.len() * self.n);
        for &j in indices {
            data.extend(self.feature(j)?);
        }
        Dictionary::from_column_major(self.n, indices.len(), data)
    }
}
