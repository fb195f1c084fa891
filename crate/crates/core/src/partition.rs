//! Coarse and fine cube partitions of a shifted copy of `[-1, 1)^d`.
//!
//! The coarse partition has `M^d` cubes of side `2/M`. Each coarse cube splits
//! into `M^d` fine cubes of side `2/M^2`, and the fine cube with offset index
//! `i` inside coarse cube `j` has lower corner `B_j + (2/M^2) i`. The shift
//! index `κ ∈ 1..=2^d` moves the whole grid by `1/M^2` along the coordinates
//! selected by the bits of `κ - 1`; the `2^d` shifted grids together carry the
//! partition of unity.
//!
//! Multi-indices are linearized with the first coordinate most significant.

use crate::error::{invalid, Error, Result};

/// Half-open cube `[lower, lower + side)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cube {
    pub lower: Vec<f64>,
    pub side: f64,
}

/// Half-open box `[lower, upper)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Region {
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.lower.len()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&lo, &hi))| lo <= v && v < hi)
    }
}

impl Cube {
    pub fn upper(&self) -> Vec<f64> {
        self.lower.iter().map(|l| l + self.side).collect()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower.iter().map(|l| l + self.side / 2.0).collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.region().contains(x)
    }

    pub fn region(&self) -> Region {
        Region {
            lower: self.lower.clone(),
            upper: self.upper(),
        }
    }

    /// `[lower + δ, upper - δ)`; rejects `δ >= side / 2`.
    pub fn shrink(&self, delta: f64) -> Result<Region> {
        if !(delta >= 0.0 && 2.0 * delta < self.side) {
            return Err(Error::DegenerateShrink {
                side: self.side,
                delta,
            });
        }
        Ok(Region {
            lower: self.lower.iter().map(|l| l + delta).collect(),
            upper: self.upper().iter().map(|u| u - delta).collect(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Coarse,
    Fine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionPair {
    m: usize,
    d: usize,
    kappa: usize,
    origin: Vec<f64>,
    count: usize,
}

/// The coarse/fine pair for grid size `m`, dimension `d` and shift `kappa`.
pub fn build_partitions(m: usize, d: usize, kappa: usize) -> Result<PartitionPair> {
    if m < 2 {
        return Err(invalid("M", format!("must be at least 2, got {m}")));
    }
    if d == 0 || d > 16 {
        return Err(invalid("d", format!("must lie in 1..=16, got {d}")));
    }
    if kappa == 0 || kappa > 1 << d {
        return Err(invalid(
            "kappa",
            format!("must lie in 1..={}, got {kappa}", 1usize << d),
        ));
    }
    let count = m
        .checked_pow(d as u32)
        .filter(|c| c.checked_mul(*c).is_some())
        .ok_or_else(|| invalid("M", "partition too large"))?;
    let half = 1.0 / (m * m) as f64;
    let origin = (0..d)
        .map(|k| {
            if ((kappa - 1) >> k) & 1 == 1 {
                -1.0 + half
            } else {
                -1.0
            }
        })
        .collect();
    Ok(PartitionPair {
        m,
        d,
        kappa,
        origin,
        count,
    })
}

impl PartitionPair {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    /// Lower corner of the whole grid.
    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn coarse_side(&self) -> f64 {
        2.0 / self.m as f64
    }

    pub fn fine_side(&self) -> f64 {
        2.0 / (self.m * self.m) as f64
    }

    /// `M^d`: coarse cubes, and also fine cubes per coarse cube.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn fine_count(&self) -> usize {
        self.count * self.count
    }

    /// Digits of `j` in base `M`, first coordinate most significant.
    pub fn digits(&self, mut j: usize) -> Vec<usize> {
        let mut out = vec![0; self.d];
        for k in (0..self.d).rev() {
            out[k] = j % self.m;
            j /= self.m;
        }
        out
    }

    fn linear(&self, digits: &[usize]) -> usize {
        digits.iter().fold(0, |acc, &v| acc * self.m + v)
    }

    pub fn coarse_cube(&self, j: usize) -> Cube {
        let side = self.coarse_side();
        Cube {
            lower: self
                .digits(j)
                .iter()
                .zip(&self.origin)
                .map(|(&n, &o)| o + side * n as f64)
                .collect(),
            side,
        }
    }

    /// Offset `v^(i) = (2/M^2) i` of fine cube `i` inside its coarse cube.
    pub fn offset(&self, i: usize) -> Vec<f64> {
        let side = self.fine_side();
        self.digits(i).iter().map(|&n| side * n as f64).collect()
    }

    /// Fine cube with offset `i` inside coarse cube `j`.
    pub fn fine_cube(&self, i: usize, j: usize) -> Cube {
        let mut c = self.coarse_cube(j);
        for (l, v) in c.lower.iter_mut().zip(self.offset(i)) {
            *l += v;
        }
        c.side = self.fine_side();
        c
    }

    pub fn coarse_cubes(&self) -> Vec<Cube> {
        (0..self.count).map(|j| self.coarse_cube(j)).collect()
    }

    pub fn offsets(&self) -> Vec<Vec<f64>> {
        (0..self.count).map(|i| self.offset(i)).collect()
    }

    /// All fine cubes, coarse index outer, offset index inner.
    pub fn fine_cubes(&self) -> Vec<Cube> {
        (0..self.count)
            .flat_map(|j| (0..self.count).map(move |i| (i, j)))
            .map(|(i, j)| self.fine_cube(i, j))
            .collect()
    }

    /// Index of the coarse cube containing `x`.
    pub fn locate_coarse(&self, x: &[f64]) -> Result<usize> {
        self.check_dim(x)?;
        let side = self.coarse_side();
        let mut digits = Vec::with_capacity(self.d);
        for k in 0..self.d {
            let lower = |n: usize| self.origin[k] + side * n as f64;
            digits.push(self.digit(x, k, lower)?);
        }
        Ok(self.linear(&digits))
    }

    /// `(i, j)` of the fine cube containing `x`.
    pub fn locate_fine(&self, x: &[f64]) -> Result<(usize, usize)> {
        let j = self.locate_coarse(x)?;
        let base = self.coarse_cube(j).lower;
        let side = self.fine_side();
        // x already lies in coarse cube j, so the fine digit only needs the
        // lower faces; the last fine cube absorbs any rounding at the top.
        let digits: Vec<usize> = (0..self.d)
            .map(|k| {
                let lower = |n: usize| base[k] + side * n as f64;
                let guess = ((x[k] - base[k]) / side).floor().max(0.0) as usize;
                let mut n = guess.min(self.m - 1);
                while n > 0 && x[k] < lower(n) {
                    n -= 1;
                }
                while n + 1 < self.m && x[k] >= lower(n + 1) {
                    n += 1;
                }
                n
            })
            .collect();
        Ok((self.linear(&digits), j))
    }

    pub fn locate(&self, x: &[f64], level: Level) -> Result<Cube> {
        match level {
            Level::Coarse => Ok(self.coarse_cube(self.locate_coarse(x)?)),
            Level::Fine => {
                let (i, j) = self.locate_fine(x)?;
                Ok(self.fine_cube(i, j))
            }
        }
    }

    /// Largest `n < M` with `lower(n) <= x_k`, erroring when `x_k` falls
    /// outside `[lower(0), lower(M))`. `lower` is the same expression used to
    /// build the cubes, so faces are assigned consistently.
    fn digit(&self, x: &[f64], k: usize, lower: impl Fn(usize) -> f64) -> Result<usize> {
        let v = x[k];
        if !(v >= lower(0) && v < lower(self.m)) {
            return Err(Error::OutOfDomain { point: x.to_vec() });
        }
        let guess = ((v - lower(0)) / (lower(1) - lower(0))).floor();
        let mut n = (guess.max(0.0) as usize).min(self.m - 1);
        while n > 0 && v < lower(n) {
            n -= 1;
        }
        while n + 1 < self.m && v >= lower(n + 1) {
            n += 1;
        }
        Ok(n)
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                actual: x.len(),
            });
        }
        Ok(())
    }

    /// Fringe width `1 / M^(2r + 2)` used by the indicators for smoothness `r`.
    pub fn fringe(&self, r: f64) -> f64 {
        (self.m as f64).powf(-(2.0 * r + 2.0))
    }

    /// Whether `x` lies in the `delta`-shrunk fine cube containing it.
    pub fn in_fine_interior(&self, x: &[f64], delta: f64) -> bool {
        self.locate(x, Level::Fine)
            .and_then(|c| c.shrink(delta))
            .is_ok_and(|r| r.contains(x))
    }

    /// Whether `x` lies in the `delta`-shrunk coarse cube containing it.
    pub fn in_coarse_interior(&self, x: &[f64], delta: f64) -> bool {
        self.locate(x, Level::Coarse)
            .and_then(|c| c.shrink(delta))
            .is_ok_and(|r| r.contains(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_and_sides() {
        let p = build_partitions(3, 2, 1).unwrap();
        assert_eq!(p.count(), 9);
        assert_eq!(p.fine_count(), 81);
        assert_eq!(p.coarse_side(), 2.0 / 3.0);
        assert_eq!(p.fine_side(), 2.0 / 9.0);
        assert_eq!(p.coarse_cubes().len(), 9);
        assert_eq!(p.fine_cubes().len(), 81);
    }

    #[test]
    fn parameter_checks() {
        assert!(build_partitions(1, 2, 1).is_err());
        assert!(build_partitions(3, 0, 1).is_err());
        assert!(build_partitions(3, 2, 0).is_err());
        assert!(build_partitions(3, 2, 5).is_err());
        assert!(build_partitions(3, 2, 4).is_ok());
    }

    #[test]
    fn shift_moves_selected_coordinates() {
        let p = build_partitions(2, 2, 3).unwrap();
        assert_eq!(p.origin(), &[-1.0, -0.75]);
        let p = build_partitions(2, 2, 4).unwrap();
        assert_eq!(p.origin(), &[-0.75, -0.75]);
    }

    #[test]
    fn locate_examples() {
        let p = build_partitions(2, 1, 1).unwrap();
        let c = p.locate(&[0.3], Level::Fine).unwrap();
        assert_eq!(c.lower, vec![0.0]);
        assert_eq!(c.side, 0.5);
        assert!(p.locate(&[1.0], Level::Fine).is_err());
        assert!(p.locate(&[-1.0], Level::Coarse).is_ok());
        assert!(p.locate(&[0.3, 0.1], Level::Coarse).is_err());
    }

    #[test]
    fn shrink_examples() {
        let c = Cube {
            lower: vec![0.0],
            side: 0.5,
        };
        let r = c.shrink(0.1).unwrap();
        assert!(r.contains(&[0.1]));
        assert!(!r.contains(&[0.4]));
        assert!(c.shrink(0.25).is_err());
    }
}
