//! Sample storage, seeded random streams, splitting and CSV ingestion.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::index;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Deterministic random stream identified by `(seed, stream)`.
///
/// Backed by ChaCha8, whose output depends only on the key and the stream
/// counter, so the same pair yields the same draws on every platform and
/// distinct stream ids never overlap.
#[derive(Clone, Debug)]
pub struct StreamRng {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl StreamRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        StreamRng {
            seed,
            stream,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// A seed for a nested computation, fixed by `(seed, stream)` alone.
    pub fn child_seed(seed: u64, stream: u64) -> u64 {
        StreamRng::new(seed, stream).next_u64()
    }
}

impl RngCore for StreamRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Columnar store of `(x, y, z)` samples with univariate `x`, `y` and a
/// `d_z`-dimensional `z` kept row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
    d_z: usize,
}

impl Dataset {
    pub fn new(x: Vec<f64>, y: Vec<f64>, z: Vec<f64>, d_z: usize) -> Result<Self> {
        if d_z == 0 {
            return Err(Error::Domain("d_z must be at least 1".into()));
        }
        let n = x.len();
        if y.len() != n {
            return Err(Error::LengthMismatch(format!(
                "x has {n} entries, y has {}",
                y.len()
            )));
        }
        if z.len() != n * d_z {
            return Err(Error::LengthMismatch(format!(
                "z has {} entries, expected {n} x {d_z}",
                z.len()
            )));
        }
        if let Some(i) = x.iter().chain(&y).chain(&z).position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite value at flat position {i}")));
        }
        Ok(Dataset { x, y, z, d_z })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn d_z(&self) -> usize {
        self.d_z
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Row-major `n x d_z` block.
    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn z_row(&self, i: usize) -> &[f64] {
        &self.z[i * self.d_z..(i + 1) * self.d_z]
    }

    /// New dataset made of the given rows, in the given order.
    pub fn select(&self, rows: &[usize]) -> Dataset {
        let mut z = Vec::with_capacity(rows.len() * self.d_z);
        for &r in rows {
            z.extend_from_slice(self.z_row(r));
        }
        Dataset {
            x: rows.iter().map(|&r| self.x[r]).collect(),
            y: rows.iter().map(|&r| self.y[r]).collect(),
            z,
            d_z: self.d_z,
        }
    }

    /// Same `y` and `z`, with the `x` column replaced.
    pub fn with_x(&self, x: Vec<f64>) -> Result<Dataset> {
        Dataset::new(x, self.y.clone(), self.z.clone(), self.d_z)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let mut line = String::from("x,y");
        for j in 1..=self.d_z {
            line.push_str(&format!(",z{j}"));
        }
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
        for i in 0..self.n() {
            line.clear();
            line.push_str(&format!("{},{}", self.x[i], self.y[i]));
            for v in self.z_row(i) {
                line.push_str(&format!(",{v}"));
            }
            writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Reads a CSV with a header naming `x`, `y` and contiguous `z1..zd`.
///
/// Other columns are ignored. Rows are 1-based in error messages, counting
/// data rows after the header.
pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::io(path, e))?;
    let headers = reader.headers().map_err(|e| Error::io(path, e))?.clone();

    let find = |name: &str| headers.iter().position(|h| h == name);
    let x_col = find("x").ok_or_else(|| Error::MissingColumn("x".into()))?;
    let y_col = find("y").ok_or_else(|| Error::MissingColumn("y".into()))?;
    let mut z_ids: Vec<usize> = headers
        .iter()
        .filter_map(|h| h.strip_prefix('z').and_then(|s| s.parse::<usize>().ok()))
        .collect();
    z_ids.sort_unstable();
    let d_z = z_ids.len();
    if d_z == 0 {
        return Err(Error::MissingColumn("z1".into()));
    }
    for (expect, &got) in (1..=d_z).zip(&z_ids) {
        if got != expect {
            return Err(Error::MissingColumn(format!("z{expect}")));
        }
    }
    let z_cols: Vec<usize> = (1..=d_z)
        .map(|j| find(&format!("z{j}")).expect("checked above"))
        .collect();

    let (mut x, mut y, mut z) = (Vec::new(), Vec::new(), Vec::new());
    for (r, record) in reader.records().enumerate() {
        let row = r + 1;
        let record = record.map_err(|e| Error::Ingest {
            row,
            column: String::new(),
            message: e.to_string(),
        })?;
        let cell = |col: usize| -> Result<f64> {
            let name = &headers[col];
            let raw = record.get(col).ok_or_else(|| Error::Ingest {
                row,
                column: name.to_string(),
                message: "missing cell".into(),
            })?;
            let v: f64 = raw.parse().map_err(|_| Error::Ingest {
                row,
                column: name.to_string(),
                message: format!("not a number: {raw:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Ingest {
                    row,
                    column: name.to_string(),
                    message: format!("non-finite value {raw:?}"),
                });
            }
            Ok(v)
        };
        x.push(cell(x_col)?);
        y.push(cell(y_col)?);
        for &c in &z_cols {
            z.push(cell(c)?);
        }
    }
    Dataset::new(x, y, z, d_z)
}

/// Disjoint train/test partition of a parent dataset.
#[derive(Clone, Debug)]
pub struct SplitPair {
    pub u1: Dataset,
    pub u2: Dataset,
    pub u1_rows: Vec<usize>,
    pub u2_rows: Vec<usize>,
    pub seed: u64,
}

/// Uniform random partition with `|u2| = floor(n/3)` and `|u1| = n - floor(n/3)`.
pub fn split(data: &Dataset, seed: u64) -> Result<SplitPair> {
    let n = data.n();
    if n < 6 {
        return Err(Error::TooFewSamples { needed: 6, got: n });
    }
    let n_test = n / 3;
    let mut rng = StreamRng::new(seed, 0);
    let perm = index::sample(&mut rng, n, n).into_vec();
    let mut u2_rows = perm[..n_test].to_vec();
    let mut u1_rows = perm[n_test..].to_vec();
    u1_rows.sort_unstable();
    u2_rows.sort_unstable();
    Ok(SplitPair {
        u1: data.select(&u1_rows),
        u2: data.select(&u2_rows),
        u1_rows,
        u2_rows,
        seed,
    })
}

/// `m` rows drawn uniformly without replacement, in draw order.
pub fn subsample(data: &Dataset, m: usize, rng: &mut StreamRng) -> Result<Dataset> {
    if m == 0 || m > data.n() {
        return Err(Error::Domain(format!(
            "cannot subsample {m} rows from {}",
            data.n()
        )));
    }
    let rows = index::sample(rng, data.n(), m).into_vec();
    Ok(data.select(&rows))
}
