//! Sampled monotone transfer curves and their inversion.

use std::fmt::Write as _;
use std::io;

use crate::{Error, Result};

/// A transfer curve sampled on a strictly increasing grid of photodiode
/// drops, with non-increasing output currents.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferLut {
    level: Option<u32>,
    abscissae: Vec<f64>,
    ordinates: Vec<f64>,
}

impl TransferLut {
    pub fn new(level: Option<u32>, abscissae: Vec<f64>, ordinates: Vec<f64>) -> Result<Self> {
        if abscissae.len() != ordinates.len() {
            return Err(Error::mismatch(
                format!("{} ordinates", abscissae.len()),
                ordinates.len(),
            ));
        }
        if abscissae.len() < 2 {
            return Err(Error::TooFewPoints {
                min: 2,
                got: abscissae.len(),
            });
        }
        if abscissae.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParams(
                "LUT grid must be strictly increasing".into(),
            ));
        }
        if let Some(index) = ordinates.windows(2).position(|w| !(w[1] <= w[0])) {
            return Err(Error::NonMonotoneCurve {
                level: level.unwrap_or(0),
                index: index + 1,
            });
        }
        Ok(TransferLut {
            level,
            abscissae,
            ordinates,
        })
    }

    pub fn with_level(mut self, level: u32) -> Self {
        self.level = Some(level);
        self
    }

    pub fn level(&self) -> Option<u32> {
        self.level
    }

    pub fn abscissae(&self) -> &[f64] {
        &self.abscissae
    }

    pub fn ordinates(&self) -> &[f64] {
        &self.ordinates
    }

    pub fn len(&self) -> usize {
        self.abscissae.len()
    }

    pub fn is_empty(&self) -> bool {
        self.abscissae.is_empty()
    }

    /// Forward evaluation by linear interpolation, clamped to the grid.
    pub fn eval(&self, x: f64) -> f64 {
        let xs = &self.abscissae;
        let ys = &self.ordinates;
        if x <= xs[0] {
            return ys[0];
        }
        if x >= xs[xs.len() - 1] {
            return ys[ys.len() - 1];
        }
        let hi = xs.partition_point(|&v| v <= x);
        let lo = hi - 1;
        let t = (x - xs[lo]) / (xs[hi] - xs[lo]);
        ys[lo] + t * (ys[hi] - ys[lo])
    }

    /// Inverse of [`eval`](Self::eval) on a curve whose ordinates have been
    /// passed through `scale` (which must preserve ordering). Targets above
    /// the curve clamp to the first abscissa, targets below to the last; on a
    /// plateau the smallest matching abscissa wins.
    pub fn invert_scaled(&self, target: f64, scale: impl Fn(f64) -> f64) -> f64 {
        let xs = &self.abscissae;
        let n = xs.len();
        let y = |k: usize| scale(self.ordinates[k]);
        if target >= y(0) {
            return xs[0];
        }
        if target < y(n - 1) {
            return xs[n - 1];
        }
        // first index whose scaled ordinate drops to or below target
        let (mut lo, mut hi) = (0usize, n - 1);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if y(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (y0, y1) = (y(lo), y(hi));
        let t = (y0 - target) / (y0 - y1);
        xs[lo] + t * (xs[hi] - xs[lo])
    }

    pub fn invert(&self, target: f64) -> f64 {
        self.invert_scaled(target, |v| v)
    }

    /// CSV with header `delta_vpd,i_out`, SI units, shortest round-trip
    /// formatting of every double.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("delta_vpd,i_out\n");
        for (x, y) in self.abscissae.iter().zip(&self.ordinates) {
            let _ = writeln!(out, "{x:e},{y:e}");
        }
        out
    }

    pub fn write_csv(&self, mut w: impl io::Write) -> io::Result<()> {
        w.write_all(self.to_csv().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp() -> TransferLut {
        TransferLut::new(Some(1), vec![0.0, 1.0, 2.0, 3.0], vec![9.0, 6.0, 3.0, 0.0]).unwrap()
    }

    #[test]
    fn rejects_rising_ordinates() {
        let err = TransferLut::new(Some(4), vec![0.0, 1.0, 2.0], vec![2.0, 1.0, 1.5]).unwrap_err();
        assert!(matches!(
            err,
            Error::NonMonotoneCurve { level: 4, index: 2 }
        ));
    }

    #[test]
    fn rejects_bad_grid() {
        assert!(TransferLut::new(None, vec![0.0, 0.0], vec![1.0, 0.0]).is_err());
        assert!(TransferLut::new(None, vec![0.0], vec![1.0]).is_err());
        assert!(TransferLut::new(None, vec![0.0, 1.0], vec![1.0]).is_err());
    }

    #[test]
    fn eval_and_invert_agree() {
        let lut = ramp();
        assert_eq!(lut.eval(1.5), 4.5);
        assert_eq!(lut.invert(4.5), 1.5);
        assert_eq!(lut.invert(100.0), 0.0);
        assert_eq!(lut.invert(-1.0), 3.0);
    }

    #[test]
    fn plateau_inverts_to_its_start() {
        let lut =
            TransferLut::new(None, vec![0.0, 1.0, 2.0, 3.0], vec![2.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(lut.invert(0.0), 2.0);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let csv = ramp().to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("delta_vpd,i_out"));
        assert_eq!(lines.next(), Some("0e0,9e0"));
        assert_eq!(csv.lines().count(), 5);
    }
}
