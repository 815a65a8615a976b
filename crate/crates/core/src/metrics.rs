//! Security and fidelity metrics.

use std::fmt;

use crate::codec::ImageFrame;
use crate::{Error, Grid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Horizontal,
    Vertical,
    /// `(r, c)` paired with `(r + 1, c + 1)`.
    Diagonal,
}

impl Direction {
    pub const ALL: [Direction; 3] = [
        Direction::Horizontal,
        Direction::Vertical,
        Direction::Diagonal,
    ];

    fn offset(self) -> (usize, usize) {
        match self {
            Direction::Horizontal => (0, 1),
            Direction::Vertical => (1, 0),
            Direction::Diagonal => (1, 1),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Direction::Horizontal => "horizontal",
            Direction::Vertical => "vertical",
            Direction::Diagonal => "diagonal",
        }
    }
}

/// Pearson correlation over every adjacent pair in `direction`. RGB images
/// are reduced to the unweighted channel mean first.
pub fn adjacent_correlation(image: &ImageFrame, direction: Direction) -> Result<f64> {
    grid_correlation(&image.gray_values(), direction)
}

pub fn grid_correlation(values: &Grid<f64>, direction: Direction) -> Result<f64> {
    let (dr, dc) = direction.offset();
    let (rows, cols) = values.dims();
    if rows <= dr || cols <= dc {
        return Err(Error::TooSmall(direction.name()));
    }
    let pairs = || {
        (0..rows - dr).flat_map(move |r| {
            (0..cols - dc).map(move |c| (values[(r, c)], values[(r + dr, c + dc)]))
        })
    };
    let n = ((rows - dr) * (cols - dc)) as f64;
    let (sx, sy) = pairs().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in pairs() {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateVariance);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Adjacent correlations in all three directions; `None` marks a
/// degenerate (zero-variance) direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationReport {
    pub horizontal: Option<f64>,
    pub vertical: Option<f64>,
    pub diagonal: Option<f64>,
}

impl CorrelationReport {
    pub fn get(&self, d: Direction) -> Option<f64> {
        match d {
            Direction::Horizontal => self.horizontal,
            Direction::Vertical => self.vertical,
            Direction::Diagonal => self.diagonal,
        }
    }

    /// Largest magnitude across directions, ignoring degenerate ones.
    pub fn max_abs(&self) -> Option<f64> {
        Direction::ALL
            .iter()
            .filter_map(|&d| self.get(d))
            .map(f64::abs)
            .reduce(f64::max)
    }
}

pub fn correlation_report(image: &ImageFrame) -> Result<CorrelationReport> {
    let gray = image.gray_values();
    let one = |d| match grid_correlation(&gray, d) {
        Ok(v) => Ok(Some(v)),
        Err(Error::DegenerateVariance) => Ok(None),
        Err(e) => Err(e),
    };
    Ok(CorrelationReport {
        horizontal: one(Direction::Horizontal)?,
        vertical: one(Direction::Vertical)?,
        diagonal: one(Direction::Diagonal)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum Psnr {
    Finite(f64),
    /// Identical inputs.
    Infinite,
}

impl Psnr {
    pub fn db(self) -> f64 {
        match self {
            Psnr::Finite(v) => v,
            Psnr::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Psnr::Infinite)
    }
}

impl fmt::Display for Psnr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Psnr::Finite(v) => write!(f, "{}", fmt_sig(*v)),
            Psnr::Infinite => f.write_str("inf"),
        }
    }
}

pub fn mse(a: &ImageFrame, b: &ImageFrame) -> Result<f64> {
    if (a.rows(), a.cols(), a.channels()) != (b.rows(), b.cols(), b.channels()) {
        return Err(Error::mismatch(
            format!("{}x{}x{}", a.rows(), a.cols(), a.channels().count()),
            format!("{}x{}x{}", b.rows(), b.cols(), b.channels().count()),
        ));
    }
    let sum: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum();
    Ok(sum / a.data().len() as f64)
}

/// `10 log10(255^2 / MSE)` over every sample.
pub fn psnr(a: &ImageFrame, b: &ImageFrame) -> Result<Psnr> {
    let m = mse(a, b)?;
    Ok(if m == 0.0 {
        Psnr::Infinite
    } else {
        Psnr::Finite(10.0 * (255.0 * 255.0 / m).log10())
    })
}

/// Largest absolute per-sample difference.
pub fn max_abs_error(a: &ImageFrame, b: &ImageFrame) -> Result<u8> {
    mse(a, b)?;
    Ok(a.data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| x.abs_diff(y))
        .max()
        .unwrap_or(0))
}

/// Bits of key per pixel, `log2(L)`; a single level (or none) carries no key.
pub fn key_entropy(levels: u32) -> f64 {
    if levels <= 1 {
        0.0
    } else {
        (levels as f64).log2()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryReport {
    pub psnr: Vec<Psnr>,
    /// Mean over finite entries; `None` when every pair is identical.
    pub mean_db: Option<f64>,
    pub min: Psnr,
    pub max: Psnr,
    /// `(floor dB, count)` in 1 dB bins, ascending.
    pub bins: Vec<(i64, usize)>,
    /// Identical pairs.
    pub overflow: usize,
}

pub fn recovery_report(pairs: &[(ImageFrame, ImageFrame)]) -> Result<RecoveryReport> {
    if pairs.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let psnr = pairs
        .iter()
        .map(|(a, b)| psnr(a, b))
        .collect::<Result<Vec<_>>>()?;
    let finite: Vec<f64> = psnr
        .iter()
        .filter(|p| !p.is_infinite())
        .map(|p| p.db())
        .collect();
    let mean_db = (!finite.is_empty()).then(|| finite.iter().sum::<f64>() / finite.len() as f64);
    let by_db = |a: &&Psnr, b: &&Psnr| a.db().total_cmp(&b.db());
    let min = *psnr.iter().min_by(by_db).expect("non-empty");
    let max = *psnr.iter().max_by(by_db).expect("non-empty");

    let mut bins = std::collections::BTreeMap::new();
    for db in &finite {
        *bins.entry(db.floor() as i64).or_insert(0usize) += 1;
    }
    Ok(RecoveryReport {
        overflow: psnr.len() - finite.len(),
        psnr,
        mean_db,
        min,
        max,
        bins: bins.into_iter().collect(),
    })
}

impl RecoveryReport {
    /// Histogram CSV: `bin_lo_db,bin_hi_db,count`, with identical pairs in a
    /// final `inf,inf` overflow row when present.
    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("bin_lo_db,bin_hi_db,count\n");
        for (lo, n) in &self.bins {
            out.push_str(&format!("{lo},{},{n}\n", lo + 1));
        }
        if self.overflow > 0 {
            out.push_str(&format!("inf,inf,{}\n", self.overflow));
        }
        out
    }

    /// Per-pair CSV: `index,psnr_db`.
    pub fn pairs_csv(&self) -> String {
        let mut out = String::from("index,psnr_db\n");
        for (i, p) in self.psnr.iter().enumerate() {
            out.push_str(&format!("{i},{p}\n"));
        }
        out
    }
}

/// Formats with at least ten significant digits, plain notation in the
/// everyday range and scientific outside it.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if (-3..9).contains(&mag) {
        let decimals = (9 - mag).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.9e}")
    }
}
