//! Binary PGM (P5) and PPM (P6) with maxval 255.
//!
//! Header comments are preserved on decode so encrypted images can carry
//! their provenance (`# securepix-seed=...`, `# securepix-config=...`).

use std::path::Path;

use crate::{Error, Grid, Result};

/// Largest accepted `width * height * channels`; guards allocation on
/// hostile headers.
pub const MAX_SAMPLES: usize = 1 << 28;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channels {
    Gray,
    Rgb,
}

impl Channels {
    pub fn count(self) -> usize {
        match self {
            Channels::Gray => 1,
            Channels::Rgb => 3,
        }
    }

    fn magic(self) -> &'static [u8; 2] {
        match self {
            Channels::Gray => b"P5",
            Channels::Rgb => b"P6",
        }
    }
}

/// 8-bit image, samples interleaved per pixel in row-major order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageFrame {
    rows: usize,
    cols: usize,
    channels: Channels,
    data: Vec<u8>,
}

impl ImageFrame {
    pub fn new(rows: usize, cols: usize, channels: Channels, data: Vec<u8>) -> Result<Self> {
        let expected = rows
            .checked_mul(cols)
            .and_then(|n| n.checked_mul(channels.count()));
        if expected != Some(data.len()) {
            return Err(Error::mismatch(
                format!("{rows}x{cols}x{} samples", channels.count()),
                data.len(),
            ));
        }
        Ok(ImageFrame {
            rows,
            cols,
            channels,
            data,
        })
    }

    pub fn gray(grid: &Grid<u8>) -> Self {
        ImageFrame {
            rows: grid.rows(),
            cols: grid.cols(),
            channels: Channels::Gray,
            data: grid.as_slice().to_vec(),
        }
    }

    pub fn blank(rows: usize, cols: usize, channels: Channels) -> Self {
        ImageFrame {
            rows,
            cols,
            channels,
            data: vec![0; rows * cols * channels.count()],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn channels(&self) -> Channels {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn sample(&self, row: usize, col: usize, ch: usize) -> u8 {
        self.data[(row * self.cols + col) * self.channels.count() + ch]
    }

    pub fn plane(&self, ch: usize) -> Grid<u8> {
        assert!(ch < self.channels.count(), "channel out of range");
        Grid::from_fn(self.rows, self.cols, |r, c| self.sample(r, c, ch))
    }

    pub fn set_plane(&mut self, ch: usize, plane: &Grid<u8>) {
        assert_eq!(plane.dims(), (self.rows, self.cols), "plane size");
        let n = self.channels.count();
        for ((r, c), &v) in plane.iter() {
            self.data[(r * self.cols + c) * n + ch] = v;
        }
    }

    /// Per-pixel luminance proxy: the unweighted channel mean.
    pub fn gray_values(&self) -> Grid<f64> {
        let n = self.channels.count();
        Grid::from_fn(self.rows, self.cols, |r, c| {
            let base = (r * self.cols + c) * n;
            self.data[base..base + n]
                .iter()
                .map(|&v| v as f64)
                .sum::<f64>()
                / n as f64
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub image: ImageFrame,
    /// Header comments without the leading `#`, trimmed.
    pub comments: Vec<String>,
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
    comments: Vec<String>,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.data.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                let start = self.pos + 1;
                let end = self.data[start..]
                    .iter()
                    .position(|&b| b == b'\n' || b == b'\r')
                    .map_or(self.data.len(), |n| start + n);
                let text = String::from_utf8_lossy(&self.data[start..end]);
                self.comments.push(text.trim().to_string());
                self.pos = end;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.data.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::MalformedImage(format!("expected {what}")));
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::MalformedImage(format!("{what} out of range")))
    }
}

pub fn decode(data: &[u8]) -> Result<Decoded> {
    let channels = match data.get(..2) {
        Some(b"P5") => Channels::Gray,
        Some(b"P6") => Channels::Rgb,
        _ => {
            return Err(Error::MalformedImage(
                "not a binary PGM (P5) or PPM (P6) file".into(),
            ))
        }
    };
    let mut cur = Cursor {
        data,
        pos: 2,
        comments: Vec::new(),
    };
    let cols = cur.number("width")?;
    let rows = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if maxval != 255 {
        return Err(Error::MalformedImage(format!(
            "unsupported maxval {maxval}, only 255 is accepted"
        )));
    }
    if rows == 0 || cols == 0 {
        return Err(Error::MalformedImage("zero image dimension".into()));
    }
    // exactly one whitespace byte separates the header from the raster
    match data.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => {
            return Err(Error::MalformedImage(
                "missing whitespace after maxval".into(),
            ))
        }
    }
    let len = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(channels.count()))
        .filter(|&n| n <= MAX_SAMPLES)
        .ok_or_else(|| Error::MalformedImage(format!("image {cols}x{rows} too large")))?;
    let raster = data
        .get(cur.pos..)
        .filter(|r| r.len() >= len)
        .ok_or_else(|| Error::MalformedImage(format!("truncated raster, expected {len} bytes")))?;
    Ok(Decoded {
        image: ImageFrame {
            rows,
            cols,
            channels,
            data: raster[..len].to_vec(),
        },
        comments: cur.comments,
    })
}

/// Serializes with one `# ` line per comment between the magic and the size.
pub fn encode(image: &ImageFrame, comments: &[String]) -> Vec<u8> {
    let mut out = Vec::with_capacity(image.data.len() + 64);
    out.extend_from_slice(image.channels.magic());
    out.push(b'\n');
    for c in comments {
        let line = c.replace(['\n', '\r'], " ");
        out.extend_from_slice(format!("# {line}\n").as_bytes());
    }
    out.extend_from_slice(format!("{} {}\n255\n", image.cols, image.rows).as_bytes());
    out.extend_from_slice(&image.data);
    out
}

pub fn read(path: impl AsRef<Path>) -> Result<Decoded> {
    decode(&std::fs::read(path)?)
}

pub fn write(path: impl AsRef<Path>, image: &ImageFrame, comments: &[String]) -> Result<()> {
    std::fs::write(path, encode(image, comments))?;
    Ok(())
}
