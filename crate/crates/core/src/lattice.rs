//! Exact geometry of the three shifted dyadic grids on `[0,1)`.
//!
//! The unit interval is tiled by `N = 3·2^L` lattice cells of width `1/N`.
//! Grid `α ∈ {0, 1/3, 2/3}` consists of the intervals `α + 2^{-j}[k, k+1)`;
//! for `j ≤ L` every endpoint is a lattice point, so intervals are stored as
//! half-open cell ranges and all geometry is integer arithmetic.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Range;

use num::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::Real;

/// Largest supported resolution level (`N = 3·2^24` cells).
pub const MAX_LEVEL: u32 = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Resolution {
    level: u32,
}

impl Resolution {
    pub fn new(level: u32) -> Result<Self> {
        if level > MAX_LEVEL {
            return Err(Error::Resolution(level));
        }
        Ok(Resolution { level })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn cell_count(&self) -> usize {
        3usize << self.level
    }

    /// Length in cells of a scale-`j` interval: `3·2^{L-j}`.
    pub fn scale_len(&self, j: u32) -> usize {
        debug_assert!(j <= self.level);
        3usize << (self.level - j)
    }

    /// Cell index of the grid shift `α`, i.e. `α·N`.
    pub fn grid_offset(&self, grid: GridId) -> usize {
        grid.thirds() << self.level
    }

    /// Lebesgue measure of a single cell.
    pub fn cell_measure(&self) -> Real {
        Real::frac(1, self.cell_count() as i128)
    }

    /// Lebesgue measure of `count` cells.
    pub fn measure_of(&self, count: usize) -> Real {
        Real::frac(count as i128, self.cell_count() as i128)
    }

    pub fn interval(&self, grid: GridId, j: u32, k: i64) -> Result<LatticeInterval> {
        let out = || Error::OutOfDomain { alpha: grid.label(), j, k };
        if j > self.level {
            return Err(out());
        }
        let len = self.scale_len(j) as i64;
        let start = self.grid_offset(grid) as i64 + k * len;
        if start < 0 || start + len > self.cell_count() as i64 {
            return Err(out());
        }
        Ok(LatticeInterval { grid, j, k, start: start as usize, end: (start + len) as usize })
    }

    /// The whole domain `[0,1)` as the root of grid 0.
    pub fn unit(&self) -> LatticeInterval {
        self.interval(GridId::Zero, 0, 0).expect("[0,1) is always in-domain")
    }

    /// Range of translation indices `k` of in-domain scale-`j` intervals.
    pub fn k_range(&self, grid: GridId, j: u32) -> Range<i64> {
        let len = self.scale_len(j) as i64;
        let off = self.grid_offset(grid) as i64;
        let n = self.cell_count() as i64;
        let lo = (-off).div_euclid(len) + i64::from((-off).rem_euclid(len) != 0);
        let hi = (n - len - off).div_euclid(len);
        if hi < lo {
            0..0
        } else {
            lo..hi + 1
        }
    }

    /// In-domain intervals of one grid at one scale, left to right.
    pub fn intervals_at(&self, grid: GridId, j: u32) -> impl Iterator<Item = LatticeInterval> + '_ {
        self.k_range(grid, j).map(move |k| self.interval(grid, j, k).expect("k_range yields in-domain intervals"))
    }

    /// Every in-domain interval of one grid, coarse scales first.
    pub fn grid_intervals(&self, grid: GridId) -> Vec<LatticeInterval> {
        (0..=self.level).flat_map(|j| self.intervals_at(grid, j)).collect()
    }

    /// The union of the three grids, coarse scales first.
    pub fn dyadic_family(&self) -> Vec<LatticeInterval> {
        GridId::ALL.iter().flat_map(|&g| self.grid_intervals(g)).collect()
    }

    /// The scale-`j` interval of `grid` containing `cell`, if it is in-domain.
    pub fn containing(&self, grid: GridId, j: u32, cell: usize) -> Option<LatticeInterval> {
        let len = self.scale_len(j) as i64;
        let k = (cell as i64 - self.grid_offset(grid) as i64).div_euclid(len);
        self.interval(grid, j, k).ok()
    }

    /// Smallest in-domain grid interval containing the cell range `[start, end)`
    /// with at most six times its length (ties broken by grid order).
    pub fn one_third_cover(&self, cells: Range<usize>) -> Result<(GridId, LatticeInterval)> {
        let (start, end) = (cells.start, cells.end);
        if start >= end || end > self.cell_count() {
            return Err(Error::Parameter(format!("cell range [{start},{end}) is not a subinterval of [0,1)")));
        }
        let limit = 6 * (end - start);
        for j in (0..=self.level).rev() {
            let len = self.scale_len(j);
            if len > limit {
                break;
            }
            if len < end - start {
                continue;
            }
            for grid in GridId::ALL {
                if let Some(q) = self.containing(grid, j, start) {
                    if q.end >= end {
                        return Ok((grid, q));
                    }
                }
            }
        }
        Err(Error::NoCover { start, end })
    }
}

/// One of the three dyadic grids `D^0`, `D^{1/3}`, `D^{2/3}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GridId {
    Zero,
    Third,
    TwoThirds,
}

impl GridId {
    pub const ALL: [GridId; 3] = [GridId::Zero, GridId::Third, GridId::TwoThirds];

    /// `3α`.
    pub fn thirds(&self) -> usize {
        match self {
            GridId::Zero => 0,
            GridId::Third => 1,
            GridId::TwoThirds => 2,
        }
    }

    pub fn index(&self) -> usize {
        self.thirds()
    }

    pub fn label(&self) -> &'static str {
        match self {
            GridId::Zero => "0",
            GridId::Third => "1/3",
            GridId::TwoThirds => "2/3",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "0" => Ok(GridId::Zero),
            "1/3" => Ok(GridId::Third),
            "2/3" => Ok(GridId::TwoThirds),
            other => Err(Error::Malformed(format!("unknown grid shift {other:?}"))),
        }
    }
}

impl fmt::Display for GridId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// An in-domain interval of one of the grids, with its cell range cached.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LatticeInterval {
    grid: GridId,
    j: u32,
    k: i64,
    start: usize,
    end: usize,
}

impl LatticeInterval {
    pub fn grid(&self) -> GridId {
        self.grid
    }

    pub fn scale(&self) -> u32 {
        self.j
    }

    pub fn translation(&self) -> i64 {
        self.k
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cells(&self) -> Range<usize> {
        self.start..self.end
    }

    pub fn contains(&self, other: &LatticeInterval) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn strictly_contains(&self, other: &LatticeInterval) -> bool {
        self.contains(other) && self.len() > other.len()
    }

    pub fn contains_cell(&self, cell: usize) -> bool {
        self.start <= cell && cell < self.end
    }

    pub fn is_disjoint(&self, other: &LatticeInterval) -> bool {
        self.end <= other.start || other.end <= self.start
    }

    /// Lebesgue measure `2^{-j}`.
    pub fn measure(&self) -> Real {
        Real::frac(1, 1i128 << self.j)
    }

    /// Exact endpoints as rationals.
    pub fn endpoints(&self, res: &Resolution) -> (BigRational, BigRational) {
        let n = res.cell_count() as i64;
        (BigRational::new(self.start.into(), n.into()), BigRational::new(self.end.into(), n.into()))
    }

    pub fn parent(&self, res: &Resolution) -> Option<LatticeInterval> {
        if self.j == 0 {
            return None;
        }
        res.interval(self.grid, self.j - 1, self.k.div_euclid(2)).ok()
    }

    pub fn children(&self, res: &Resolution) -> Result<[LatticeInterval; 2]> {
        if self.j >= res.level() {
            return Err(Error::ScaleExhausted(self.j));
        }
        Ok([res.interval(self.grid, self.j + 1, 2 * self.k)?, res.interval(self.grid, self.j + 1, 2 * self.k + 1)?])
    }

    pub fn to_literal(&self) -> IntervalLiteral {
        IntervalLiteral { alpha: self.grid.label().to_string(), j: self.j, k: self.k }
    }

    pub fn from_literal(res: &Resolution, lit: &IntervalLiteral) -> Result<Self> {
        res.interval(GridId::parse(&lit.alpha)?, lit.j, lit.k)
    }
}

/// Witness order: smallest scale, then smallest translation, then grid.
impl Ord for LatticeInterval {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.j, self.k, self.grid).cmp(&(other.j, other.k, other.grid))
    }
}

impl PartialOrd for LatticeInterval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for LatticeInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "D^{}[j={},k={}]=cells[{},{})", self.grid, self.j, self.k, self.start, self.end)
    }
}

/// JSON form `{"alpha": "0|1/3|2/3", "j": int, "k": int}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalLiteral {
    pub alpha: String,
    pub j: u32,
    pub k: i64,
}

impl Serialize for LatticeInterval {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_literal().serialize(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn children_bisect() {
        let res = Resolution::new(4).unwrap();
        let [a, b] = res.unit().children(&res).unwrap();
        assert_eq!(a.endpoints(&res), (q(0, 1), q(1, 2)));
        assert_eq!(b.endpoints(&res), (q(1, 2), q(1, 1)));
        let [c, d] = b.children(&res).unwrap();
        assert_eq!(c.endpoints(&res), (q(1, 2), q(3, 4)));
        assert_eq!(d.endpoints(&res), (q(3, 4), q(1, 1)));
    }

    #[test]
    fn shifted_children() {
        let res = Resolution::new(4).unwrap();
        let third = res.interval(GridId::Third, 1, 0).unwrap();
        assert_eq!(third.endpoints(&res), (q(1, 3), q(5, 6)));
        let [a, b] = third.children(&res).unwrap();
        assert_eq!(a.endpoints(&res), (q(1, 3), q(7, 12)));
        assert_eq!(b.endpoints(&res), (q(7, 12), q(5, 6)));
        assert_eq!(a.parent(&res), Some(third));
    }

    #[test]
    fn scale_exhausted() {
        let res = Resolution::new(2).unwrap();
        let leaf = res.interval(GridId::Zero, 2, 1).unwrap();
        assert_eq!(leaf.children(&res), Err(Error::ScaleExhausted(2)));
    }

    #[test]
    fn shifted_roots_are_out_of_domain() {
        let res = Resolution::new(3).unwrap();
        assert!(res.interval(GridId::Third, 0, 0).is_err());
        assert!(res.interval(GridId::TwoThirds, 0, 0).is_err());
        assert_eq!(res.intervals_at(GridId::Third, 0).count(), 0);
    }

    #[test]
    fn one_third_cover_examples() {
        let res = Resolution::new(4).unwrap();
        let n = res.cell_count();
        let (g, c) = res.one_third_cover(n / 3..2 * n / 3).unwrap();
        assert_eq!(g, GridId::Third);
        assert_eq!(c.endpoints(&res), (q(1, 3), q(5, 6)));
        let (g, c) = res.one_third_cover(n / 4..3 * n / 4).unwrap();
        assert_eq!((g, c), (GridId::Zero, res.unit()));
        let (g, c) = res.one_third_cover(0..n / 2).unwrap();
        assert_eq!(g, GridId::Zero);
        assert_eq!(c.cells(), 0..n / 2);
    }

    #[test]
    fn grid_partition_and_lattice_closure() {
        let res = Resolution::new(5).unwrap();
        for grid in GridId::ALL {
            for j in 0..=res.level() {
                let ivs: Vec<_> = res.intervals_at(grid, j).collect();
                for w in ivs.windows(2) {
                    assert!(w[0].end() <= w[1].start());
                }
                for iv in &ivs {
                    assert_eq!(iv.len(), res.scale_len(j));
                    if let Some(p) = iv.parent(&res) {
                        assert!(p.contains(iv));
                    }
                }
            }
        }
    }

    #[test]
    fn cover_law_on_random_intervals() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let res = Resolution::new(rng.gen_range(3..=10)).unwrap();
            let n = res.cell_count();
            let len = rng.gen_range(1..=n / 8);
            let start = rng.gen_range(0..=n - len);
            let (grid, c) = res.one_third_cover(start..start + len).unwrap();
            assert_eq!(c.grid(), grid);
            assert!(c.start() <= start && start + len <= c.end());
            assert!(c.len() <= 6 * len);
        }
    }
}
