use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use crate::datalayout::Section;
use crate::error::{invalid, Result};
use crate::Point;

/// One-to-many map from integer values to sorted, duplicate-free point sets.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Label {
    strata: BTreeMap<i32, BTreeSet<Point>>,
}

impl Label {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns `true` if the pair was not present before.
    pub fn insert(&mut self, value: i32, point: Point) -> bool {
        self.strata.entry(value).or_default().insert(point)
    }

    pub fn extend(&mut self, value: i32, points: impl IntoIterator<Item = Point>) {
        self.strata.entry(value).or_default().extend(points);
    }

    pub fn remove(&mut self, value: i32, point: Point) -> bool {
        let Some(set) = self.strata.get_mut(&value) else {
            return false;
        };
        let removed = set.remove(&point);
        if set.is_empty() {
            self.strata.remove(&value);
        }
        removed
    }

    pub fn contains(&self, value: i32, point: Point) -> bool {
        self.strata.get(&value).is_some_and(|s| s.contains(&point))
    }

    /// Points carrying `value`, ascending.
    pub fn stratum(&self, value: i32) -> Vec<Point> {
        self.strata
            .get(&value)
            .map(|s| s.iter().copied().collect())
            .unwrap_or_default()
    }

    pub fn stratum_set(&self, value: i32) -> Option<&BTreeSet<Point>> {
        self.strata.get(&value)
    }

    pub fn stratum_size(&self, value: i32) -> usize {
        self.strata.get(&value).map_or(0, BTreeSet::len)
    }

    /// Values in ascending order.
    pub fn values(&self) -> Vec<i32> {
        self.strata.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, &BTreeSet<Point>)> {
        self.strata.iter().map(|(&v, s)| (v, s))
    }

    pub fn is_empty(&self) -> bool {
        self.strata.is_empty()
    }

    /// Number of `(value, point)` pairs.
    pub fn num_entries(&self) -> usize {
        self.strata.values().map(BTreeSet::len).sum()
    }

    pub(crate) fn from_strata(strata: BTreeMap<i32, BTreeSet<Point>>) -> Self {
        let strata = strata.into_iter().filter(|(_, s)| !s.is_empty()).collect();
        Self { strata }
    }

    /// Lay the label out as a section over the value chart plus the
    /// concatenated point lists, values ascending.
    pub fn to_section(&self, values: Range<usize>) -> Result<(Section, Vec<Point>)> {
        let mut section = Section::new(values.clone());
        let mut points = Vec::with_capacity(self.num_entries());
        for (&v, set) in &self.strata {
            if v < 0 || !values.contains(&(v as usize)) {
                return invalid(format!("label value {v} outside section chart {values:?}"));
            }
            section.set_dof(v as usize, set.len())?;
        }
        section.set_up();
        for set in self.strata.values() {
            points.extend(set.iter().copied());
        }
        Ok((section, points))
    }

    pub fn from_section(section: &Section, points: &[Point]) -> Result<Self> {
        if section.storage_size() != points.len() {
            return invalid(format!(
                "section stores {} entries but {} points were given",
                section.storage_size(),
                points.len()
            ));
        }
        let mut label = Label::new();
        for v in section.chart() {
            let r = section.range(v);
            if !r.is_empty() {
                label.extend(v as i32, points[r].iter().copied());
            }
        }
        Ok(label)
    }
}
