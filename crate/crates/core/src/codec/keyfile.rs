//! `.spk` key files.
//!
//! ```text
//! SECUREPIX-KEY 1
//! <rows> <cols> <L> <pva_min> <pva_max>
//! <cols integers in 1..=L>        (repeated rows times)
//! seed <u64>                      (optional)
//! ```
//!
//! Voltages are written in Rust's shortest round-trip float form, so
//! `parse(serialize(k)) == k` holds bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use crate::array::{ArrayConfig, KeyMatrix};
use crate::{Error, Grid, Result};

pub const MAGIC: &str = "SECUREPIX-KEY";
pub const VERSION: u32 = 1;

/// Largest accepted `rows * cols`.
pub const MAX_KEY_PIXELS: usize = 1 << 26;

#[derive(Debug, Clone, PartialEq)]
pub struct KeyFile {
    pub pva_min: f64,
    pub pva_max: f64,
    pub key: KeyMatrix,
    pub seed: Option<u64>,
}

fn malformed(line: usize, reason: impl Into<String>) -> Error {
    Error::MalformedKeyFile {
        line,
        reason: reason.into(),
    }
}

impl KeyFile {
    /// i.i.d. uniform key over `levels` levels from `seed`.
    pub fn generate(
        rows: usize,
        cols: usize,
        levels: u32,
        pva_min: f64,
        pva_max: f64,
        seed: u64,
    ) -> Result<Self> {
        let key = KeyFile {
            pva_min,
            pva_max,
            key: KeyMatrix::random(rows, cols, levels, seed)?,
            seed: Some(seed),
        };
        key.array_config(0.0).validate()?;
        Ok(key)
    }

    pub fn rows(&self) -> usize {
        self.key.rows()
    }

    pub fn cols(&self) -> usize {
        self.key.cols()
    }

    pub fn levels(&self) -> u32 {
        self.key.levels()
    }

    /// Array geometry implied by the key plus the run's half-select ratio.
    pub fn array_config(&self, half_select_kappa: f64) -> ArrayConfig {
        ArrayConfig {
            rows: self.rows(),
            cols: self.cols(),
            levels: self.levels(),
            pva_min: self.pva_min,
            pva_max: self.pva_max,
            half_select_kappa,
        }
    }

    /// Total key space, `rows * cols * log2(L)` bits.
    pub fn key_bits(&self) -> f64 {
        (self.rows() * self.cols()) as f64 * crate::metrics::key_entropy(self.levels())
    }

    pub fn serialize(&self) -> String {
        let mut out = format!("{MAGIC} {VERSION}\n");
        let _ = writeln!(
            out,
            "{} {} {} {} {}",
            self.rows(),
            self.cols(),
            self.levels(),
            self.pva_min,
            self.pva_max
        );
        for r in 0..self.rows() {
            let line: Vec<String> = self.key.grid().row(r).iter().map(u32::to_string).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "seed {seed}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));

        let (n, header) = lines.next().ok_or_else(|| malformed(1, "empty file"))?;
        let mut magic = header.split_whitespace();
        if magic.next() != Some(MAGIC) {
            return Err(malformed(n, format!("expected `{MAGIC} {VERSION}`")));
        }
        match magic.next().map(str::parse::<u32>) {
            Some(Ok(VERSION)) if magic.next().is_none() => {}
            _ => {
                return Err(malformed(
                    n,
                    format!("unsupported version, expected {VERSION}"),
                ))
            }
        }

        let (n, dims) = lines
            .next()
            .ok_or_else(|| malformed(2, "missing dimension line"))?;
        let fields: Vec<&str> = dims.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(malformed(
                n,
                "expected `<rows> <cols> <L> <pva_min> <pva_max>`",
            ));
        }
        let int = |s: &str, what: &str| {
            s.parse::<usize>()
                .map_err(|_| malformed(n, format!("bad {what} `{s}`")))
        };
        let float = |s: &str, what: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| malformed(n, format!("bad {what} `{s}`")))
        };
        let rows = int(fields[0], "rows")?;
        let cols = int(fields[1], "cols")?;
        let levels = u32::try_from(int(fields[2], "level count")?)
            .map_err(|_| malformed(n, "level count too large"))?;
        let pva_min = float(fields[3], "pva_min")?;
        let pva_max = float(fields[4], "pva_max")?;
        if rows == 0 || cols == 0 {
            return Err(malformed(n, "zero dimension"));
        }
        if rows.checked_mul(cols).is_none_or(|p| p > MAX_KEY_PIXELS) {
            return Err(malformed(n, "key too large"));
        }
        if levels == 0 {
            return Err(malformed(n, "level count must be positive"));
        }
        if !(pva_min < pva_max) {
            return Err(malformed(n, "pva_min must be below pva_max"));
        }

        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let (n, line) = lines.next().ok_or_else(|| {
                malformed(3 + r, format!("truncated matrix: missing row {}", r + 1))
            })?;
            let before = data.len();
            for tok in line.split_whitespace() {
                let level: u32 = tok
                    .parse()
                    .map_err(|_| malformed(n, format!("bad level `{tok}`")))?;
                if level == 0 || level > levels {
                    return Err(malformed(n, format!("level {level} outside 1..={levels}")));
                }
                data.push(level);
                if data.len() - before > cols {
                    break;
                }
            }
            if data.len() - before != cols {
                return Err(malformed(
                    n,
                    format!(
                        "row {} has {} entries, expected {cols}",
                        r + 1,
                        data.len() - before
                    ),
                ));
            }
        }

        let mut seed = None;
        for (n, line) in lines {
            if line.is_empty() {
                continue;
            }
            if seed.is_some() {
                return Err(malformed(n, "unexpected trailing content"));
            }
            let mut parts = line.split_whitespace();
            match (parts.next(), parts.next(), parts.next()) {
                (Some("seed"), Some(v), None) => {
                    seed = Some(
                        v.parse()
                            .map_err(|_| malformed(n, format!("bad seed `{v}`")))?,
                    );
                }
                _ => return Err(malformed(n, "unexpected trailing content")),
            }
        }

        let grid = Grid::from_vec(rows, cols, data).expect("row lengths checked");
        Ok(KeyFile {
            pva_min,
            pva_max,
            key: KeyMatrix::new(grid, levels)?,
            seed,
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.serialize())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_key_round_trips() {
        let k = KeyFile::generate(32, 32, 16, 1.3, 2.8, 77).unwrap();
        assert_eq!(KeyFile::parse(&k.serialize()).unwrap(), k);
    }

    #[test]
    fn seedless_key_round_trips() {
        let mut k = KeyFile::generate(3, 2, 4, 1.3, 2.8, 1).unwrap();
        k.seed = None;
        let text = k.serialize();
        assert!(!text.contains("seed"));
        assert_eq!(KeyFile::parse(&text).unwrap(), k);
    }

    #[test]
    fn rejects_level_above_range() {
        let text = "SECUREPIX-KEY 1\n1 2 16 1.3 2.8\n1 17\n";
        assert!(matches!(
            KeyFile::parse(text),
            Err(Error::MalformedKeyFile { line: 3, .. })
        ));
    }

    #[test]
    fn rejects_truncated_matrix() {
        let text = "SECUREPIX-KEY 1\n3 2 16 1.3 2.8\n1 2\n3 4\n";
        assert!(matches!(
            KeyFile::parse(text),
            Err(Error::MalformedKeyFile { line: 5, .. })
        ));
        let short_row = "SECUREPIX-KEY 1\n2 2 16 1.3 2.8\n1 2\n3\n";
        assert!(matches!(
            KeyFile::parse(short_row),
            Err(Error::MalformedKeyFile { line: 4, .. })
        ));
    }

    #[test]
    fn rejects_bad_headers() {
        for text in [
            "",
            "SECUREPIX-KEY 2\n1 1 16 1.3 2.8\n1\n",
            "SECUREPIX 1\n1 1 16 1.3 2.8\n1\n",
            "SECUREPIX-KEY 1\n1 1 16 1.3\n1\n",
            "SECUREPIX-KEY 1\n1 1 16 2.8 1.3\n1\n",
            "SECUREPIX-KEY 1\n1 1 16 1.3 inf\n1\n",
            "SECUREPIX-KEY 1\n0 1 16 1.3 2.8\n",
            "SECUREPIX-KEY 1\n1 1 16 1.3 2.8\n1\nseed x\n",
            "SECUREPIX-KEY 1\n1 1 16 1.3 2.8\n1\nseed 1\nseed 2\n",
            "SECUREPIX-KEY 1\n1 1 16 1.3 2.8\n1\n2\n",
        ] {
            assert!(
                matches!(KeyFile::parse(text), Err(Error::MalformedKeyFile { .. })),
                "{text:?}"
            );
        }
    }

    #[test]
    fn key_bits_for_32x32_l16() {
        let k = KeyFile::generate(32, 32, 16, 1.3, 2.8, 0).unwrap();
        assert_eq!(k.key_bits(), 4096.0);
    }
}
