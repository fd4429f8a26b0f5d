//! Dense datasets, svmlight I/O, and seeded synthetic generators.
//!
//! All randomness comes from `ChaCha8Rng::seed_from_u64`, so a seed names the
//! same dataset on every platform.

use std::collections::HashSet;
use std::io::{BufRead, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetKind {
    /// Labels in {−1, +1}.
    Classification,
    Regression,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseDataset {
    features: DMatrix<f64>,
    targets: DVector<f64>,
    kind: DatasetKind,
}

impl DenseDataset {
    pub fn new(features: DMatrix<f64>, targets: DVector<f64>, kind: DatasetKind) -> Result<Self> {
        if features.nrows() != targets.len() {
            return Err(Error::DimensionMismatch { expected: features.nrows(), got: targets.len() });
        }
        if kind == DatasetKind::Classification {
            if let Some(bad) = targets.iter().find(|&&y| y != 1.0 && y != -1.0) {
                return Err(Error::invalid("labels", format!("classification label {bad} is not ±1")));
            }
        }
        if features.iter().chain(targets.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dataset"));
        }
        Ok(Self { features, targets, kind })
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn targets(&self) -> &DVector<f64> {
        &self.targets
    }

    pub fn kind(&self) -> DatasetKind {
        self.kind
    }

    pub fn samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    /// Classification copy with labels `sign(y)`, zero mapped to +1.
    pub fn to_classification(&self) -> Self {
        Self {
            features: self.features.clone(),
            targets: self.targets.map(|y| if y < 0.0 { -1.0 } else { 1.0 }),
            kind: DatasetKind::Classification,
        }
    }

    /// One row per sample: features then the target.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let header: Vec<String> = (1..=self.dim()).map(|j| format!("x{j}")).collect();
        writeln!(out, "{},y", header.join(","))?;
        for i in 0..self.samples() {
            for j in 0..self.dim() {
                write!(out, "{},", self.features[(i, j)])?;
            }
            writeln!(out, "{}", self.targets[i])?;
        }
        Ok(())
    }
}

/// Observed entries of a `users × items` ratings matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingsDataset {
    pub users: usize,
    pub items: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl RatingsDataset {
    pub fn new(users: usize, items: usize, entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(entries.len());
        for &(r, c, v) in &entries {
            if r >= users || c >= items {
                return Err(Error::invalid("ratings", format!("entry ({r}, {c}) outside {users}x{items}")));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite("rating"));
            }
            if !seen.insert((r, c)) {
                return Err(Error::invalid("ratings", format!("duplicate entry ({r}, {c})")));
            }
        }
        Ok(Self { users, items, entries })
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "row,col,value")?;
        for (r, c, v) in &self.entries {
            writeln!(out, "{r},{c},{v}")?;
        }
        Ok(())
    }
}

fn check_fraction(what: &'static str, f: f64) -> Result<()> {
    if f > 0.0 && f <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(what, format!("{f} not in (0, 1]")))
    }
}

fn check_noise(sd: f64) -> Result<()> {
    if sd >= 0.0 && sd.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("noise_sd", format!("{sd} must be finite and >= 0")))
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Compressed-sensing regression data `b = A·x_true + noise`.
///
/// `A` is standard normal and `x_true` has `round(sparsity·n)` standard-normal
/// entries at random positions. Draw order: `A` row-major, then the support,
/// then the nonzero values, then the noise.
pub fn gen_sensing(
    m: usize,
    n: usize,
    sparsity: f64,
    noise_sd: f64,
    seed: u64,
) -> Result<(DenseDataset, DVector<f64>)> {
    if m == 0 || n == 0 {
        return Err(Error::invalid("sensing shape", format!("m = {m}, n = {n} must be >= 1")));
    }
    check_fraction("sparsity", sparsity)?;
    check_noise(noise_sd)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DMatrix::from_row_iterator(m, n, (0..m * n).map(|_| normal(&mut rng)));
    let nnz = ((sparsity * n as f64).round() as usize).clamp(1, n);
    let mut support = sample(&mut rng, n, nnz).into_vec();
    support.sort_unstable();
    let mut x_true = DVector::zeros(n);
    for j in support {
        // a draw of exactly zero would drop a nonzero; redraw
        let mut v = normal(&mut rng);
        while v == 0.0 {
            v = normal(&mut rng);
        }
        x_true[j] = v;
    }
    let mut b = &a * &x_true;
    for bi in b.iter_mut() {
        *bi += noise_sd * normal(&mut rng);
    }
    Ok((DenseDataset::new(a, b, DatasetKind::Regression)?, x_true))
}

/// Noisy observations of a rank-`rank` matrix `U·Vᵀ` with Gaussian factors
/// scaled by `1/√rank`.
///
/// `round(frac·users·items)` distinct entries are observed, listed in
/// row-major order.
pub fn gen_lowrank(
    users: usize,
    items: usize,
    rank: usize,
    observed_fraction: f64,
    noise_sd: f64,
    seed: u64,
) -> Result<RatingsDataset> {
    if rank == 0 || rank > users.min(items) {
        return Err(Error::invalid(
            "rank",
            format!("{rank} not in [1, {}]", users.min(items)),
        ));
    }
    check_fraction("observed_fraction", observed_fraction)?;
    check_noise(noise_sd)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = (rank as f64).sqrt().recip();
    let u = DMatrix::from_row_iterator(users, rank, (0..users * rank).map(|_| normal(&mut rng) * scale));
    let v = DMatrix::from_row_iterator(items, rank, (0..items * rank).map(|_| normal(&mut rng)));
    let truth = &u * v.transpose();
    let total = users * items;
    let count = ((observed_fraction * total as f64).round() as usize).clamp(1, total);
    let mut picked = sample(&mut rng, total, count).into_vec();
    picked.sort_unstable();
    let entries = picked
        .into_iter()
        .map(|idx| {
            let (r, c) = (idx / items, idx % items);
            (r, c, truth[(r, c)] + noise_sd * normal(&mut rng))
        })
        .collect();
    RatingsDataset::new(users, items, entries)
}

/// Parses svmlight/libsvm text: `label idx:val idx:val ...` with 1-based,
/// strictly ascending indices.
///
/// Blank lines and `#` comments are ignored. The matrix width is the largest
/// index seen. When every label is 0 or 1 the zeros become −1; labels all in
/// {−1, +1} after that give a classification dataset, anything else a
/// regression dataset.
pub fn parse_svmlight<R: BufRead>(reader: R) -> Result<DenseDataset> {
    let mut labels = Vec::new();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut width = 0;
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let body = line.split('#').next().unwrap_or("");
        let mut tokens = body.split_whitespace();
        let Some(label) = tokens.next() else { continue };
        let err = |msg: String| Error::Parse { line: lineno, msg };
        let y: f64 = label.parse().map_err(|_| err(format!("bad label {label:?}")))?;
        if !y.is_finite() {
            return Err(err(format!("non-finite label {label:?}")));
        }
        let mut row = Vec::new();
        let mut last = 0;
        for tok in tokens {
            let (idx, val) = tok.split_once(':').ok_or_else(|| err(format!("expected idx:val, got {tok:?}")))?;
            let idx: usize = idx.parse().map_err(|_| err(format!("bad index {idx:?}")))?;
            let val: f64 = val.parse().map_err(|_| err(format!("bad value {val:?}")))?;
            if idx == 0 {
                return Err(err("indices are 1-based".into()));
            }
            if idx <= last {
                return Err(err(format!("index {idx} not ascending after {last}")));
            }
            if !val.is_finite() {
                return Err(err(format!("non-finite value at index {idx}")));
            }
            last = idx;
            row.push((idx - 1, val));
        }
        width = width.max(last);
        labels.push(y);
        rows.push(row);
    }
    if labels.is_empty() {
        return Err(Error::Parse { line: 0, msg: "empty file".into() });
    }
    let mut features = DMatrix::zeros(rows.len(), width);
    for (i, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            features[(i, j)] = v;
        }
    }
    if labels.iter().all(|&y| y == 0.0 || y == 1.0) && labels.contains(&0.0) {
        for y in &mut labels {
            if *y == 0.0 {
                *y = -1.0;
            }
        }
    }
    let kind = if labels.iter().all(|&y| y == 1.0 || y == -1.0) {
        DatasetKind::Classification
    } else {
        DatasetKind::Regression
    };
    DenseDataset::new(features, DVector::from_vec(labels), kind)
}

pub fn parse_svmlight_path(path: impl AsRef<Path>) -> Result<DenseDataset> {
    let file = std::fs::File::open(path)?;
    parse_svmlight(std::io::BufReader::new(file))
}

/// Writes the nonzero entries of each row in svmlight form.
pub fn serialize_svmlight<W: Write>(data: &DenseDataset, mut out: W) -> std::io::Result<()> {
    for i in 0..data.samples() {
        write!(out, "{}", data.targets[i])?;
        for j in 0..data.dim() {
            let v = data.features[(i, j)];
            if v != 0.0 {
                write!(out, " {}:{}", j + 1, v)?;
            }
        }
        writeln!(out)?;
    }
    Ok(())
}
