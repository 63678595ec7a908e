use std::ops::Range;

use crate::error::{invalid, Result};
use crate::Point;

/// Map from a contiguous chart of points to `(dof count, offset)` pairs.
///
/// Offsets are the exclusive prefix sum of the dof counts once
/// [`Section::set_up`] has run. Points outside the chart have no dofs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    start: Point,
    dofs: Vec<usize>,
    offsets: Vec<usize>,
    dirty: bool,
}

impl Default for Section {
    fn default() -> Self {
        Self::new(0..0)
    }
}

impl Section {
    pub fn new(chart: Range<Point>) -> Self {
        let n = chart.end.saturating_sub(chart.start);
        Self {
            start: chart.start,
            dofs: vec![0; n],
            offsets: vec![0; n],
            dirty: false,
        }
    }

    /// Build a set-up section from per-point counts starting at `start`.
    pub fn from_dofs(start: Point, dofs: Vec<usize>) -> Self {
        let mut s = Self {
            start,
            offsets: vec![0; dofs.len()],
            dofs,
            dirty: true,
        };
        s.set_up();
        s
    }

    /// As [`Section::from_dofs`], for counts that arrive as signed integers.
    pub fn from_counts(start: Point, counts: &[i64]) -> Result<Self> {
        let mut dofs = Vec::with_capacity(counts.len());
        for (i, &c) in counts.iter().enumerate() {
            if c < 0 {
                return invalid(format!("negative dof count {c} at point {}", start + i));
            }
            dofs.push(c as usize);
        }
        Ok(Self::from_dofs(start, dofs))
    }

    pub fn chart(&self) -> Range<Point> {
        self.start..self.start + self.dofs.len()
    }

    pub fn contains(&self, p: Point) -> bool {
        self.chart().contains(&p)
    }

    pub fn dof(&self, p: Point) -> usize {
        if self.contains(p) {
            self.dofs[p - self.start]
        } else {
            0
        }
    }

    pub fn set_dof(&mut self, p: Point, dof: usize) -> Result<()> {
        if !self.contains(p) {
            return invalid(format!("point {p} outside section chart {:?}", self.chart()));
        }
        self.dofs[p - self.start] = dof;
        self.dirty = true;
        Ok(())
    }

    pub fn add_dof(&mut self, p: Point, dof: usize) -> Result<()> {
        let cur = self.dof(p);
        self.set_dof(p, cur + dof)
    }

    pub fn set_up(&mut self) {
        let mut acc = 0;
        for (off, &d) in self.offsets.iter_mut().zip(&self.dofs) {
            *off = acc;
            acc += d;
        }
        self.dirty = false;
    }

    /// Offset of `p`'s first dof. Points outside the chart report the
    /// storage size.
    pub fn offset(&self, p: Point) -> usize {
        debug_assert!(!self.dirty, "section offsets read before set_up");
        if self.contains(p) {
            self.offsets[p - self.start]
        } else {
            self.storage_size()
        }
    }

    /// Dof index range of `p`.
    pub fn range(&self, p: Point) -> Range<usize> {
        let off = self.offset(p);
        off..off + self.dof(p)
    }

    pub fn storage_size(&self) -> usize {
        self.dofs.iter().sum()
    }

    pub fn dofs(&self) -> &[usize] {
        &self.dofs
    }

    pub fn offsets(&self) -> &[usize] {
        debug_assert!(!self.dirty, "section offsets read before set_up");
        &self.offsets
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;
    use proptest::prelude::*;

    #[test]
    fn taylor_hood_layout() {
        // c, d, f carry 2 dofs (edges); epsilon, delta, phi carry 3 (vertices).
        let s = Section::from_dofs(0, vec![2, 2, 2, 3, 3, 3]);
        assert_eq!(s.offsets(), &[0, 2, 4, 6, 9, 12]);
        assert_eq!(s.storage_size(), 15);
    }

    #[test]
    fn zero_and_sparse_dofs() {
        let s = Section::from_dofs(0, vec![0, 0, 0]);
        assert_eq!(s.offsets(), &[0, 0, 0]);
        let s = Section::from_dofs(0, vec![1, 0, 2]);
        assert_eq!(s.offsets(), &[0, 1, 1]);
        assert_eq!(s.range(2), 1..3);
    }

    #[test]
    fn outside_chart_has_no_dofs() {
        let mut s = Section::new(3..5);
        s.set_dof(3, 4).unwrap();
        s.set_up();
        assert_eq!(s.dof(0), 0);
        assert_eq!(s.dof(3), 4);
        assert_eq!(s.offset(4), 4);
        assert!(matches!(s.set_dof(9, 1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn negative_counts_rejected() {
        assert!(matches!(
            Section::from_counts(0, &[1, -1]),
            Err(Error::InvalidArgument(_))
        ));
        assert_eq!(Section::from_counts(2, &[1, 2]).unwrap().offset(3), 1);
    }

    proptest! {
        #[test]
        fn offsets_are_exclusive_prefix_sum(dofs in proptest::collection::vec(0usize..10, 0..40)) {
            let s = Section::from_dofs(5, dofs.clone());
            let mut acc = 0;
            for (i, d) in dofs.iter().enumerate() {
                prop_assert_eq!(s.offset(5 + i), acc);
                acc += d;
            }
            prop_assert_eq!(s.storage_size(), acc);
        }
    }
}
