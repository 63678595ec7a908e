//! Text formats: a line-oriented mesh file and a star-forest listing.
//!
//! ```text
//! plexfile 1
//! dim 2
//! strata 2 4 0 5
//! conesizes 3 3 0 0 0 0 2 2 2 2 2
//! cones 6 7 10 8 9 10 2 3 2 4 3 5 4 5 3 4
//! orients 0 -1 0 0 -1 -1 0 0 0 0 0 0 0 0 0 0
//! coords
//! 0 0
//! ...
//! label boundary
//! value 1 8 2 3 4 5 6 7 8 9
//! end
//! ```
//!
//! `dim` is the coordinate dimension, 0 for a mesh without coordinates.
//! `strata` gives cells, vertices, faces and edges and must agree with the
//! depths implied by the cones.

use std::fmt::Write as _;

use crate::datalayout::Label;
use crate::error::{invalid, Error, Result};
use crate::plex::Plex;
use crate::starforest::{DistributedSf, RemotePoint, StarForest};

const HEADER: &str = "plexfile 1";

fn join<T: ToString>(key: &str, items: impl IntoIterator<Item = T>) -> String {
    let mut s = key.to_string();
    for it in items {
        s.push(' ');
        s.push_str(&it.to_string());
    }
    s
}

/// Serialize a mesh. Label names must be single words.
pub fn write_plex(m: &Plex) -> Result<String> {
    let c = m.counts();
    let mut out = String::new();
    let dim = if m.has_coordinates() { m.coordinate_dim() } else { 0 };
    let _ = writeln!(out, "{HEADER}");
    let _ = writeln!(out, "dim {dim}");
    let _ = writeln!(out, "strata {} {} {} {}", c.cells, c.vertices, c.faces, c.edges);
    let sizes = m.chart().map(|p| m.cone_section().dof(p));
    let _ = writeln!(out, "{}", join("conesizes", sizes));
    let _ = writeln!(out, "{}", join("cones", m.cone_points()));
    let _ = writeln!(out, "{}", join("orients", m.orientations()));
    let _ = writeln!(out, "coords");
    if dim > 0 {
        for row in m.coordinates().chunks(dim) {
            let _ = writeln!(out, "{}", join("", row).trim_start());
        }
    }
    for (name, label) in m.labels() {
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return invalid(format!("label name {name:?} is not a single word"));
        }
        let _ = writeln!(out, "label {name}");
        for (v, set) in label.iter() {
            let head = format!("value {v} {}", set.len());
            let _ = writeln!(out, "{}", join(&head, set));
        }
    }
    let _ = writeln!(out, "end");
    Ok(out)
}

struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            line: self.line,
            message: message.into(),
        })
    }

    fn next(&mut self) -> Result<&'a str> {
        match self.iter.next() {
            Some((i, l)) => {
                self.line = i + 1;
                Ok(l)
            }
            None => {
                self.line += 1;
                self.err("unexpected end of file")
            }
        }
    }

    /// Next line, which must start with `key`; returns the remaining words.
    fn keyed(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let l = self.next()?;
        let mut words = l.split_whitespace();
        if words.next() != Some(key) {
            return self.err(format!("expected '{key}'"));
        }
        Ok(words.collect())
    }

    fn parse<T: std::str::FromStr>(&self, words: &[&str]) -> Result<Vec<T>> {
        words
            .iter()
            .map(|w| w.parse::<T>().or_else(|_| self.err(format!("bad number '{w}'"))))
            .collect()
    }
}

/// Parse a mesh file. Errors carry the 1-based line number.
pub fn read_plex(text: &str) -> Result<Plex> {
    let mut lines = Lines {
        iter: text.lines().enumerate(),
        line: 0,
    };
    if lines.next()?.trim() != HEADER {
        return lines.err(format!("expected header '{HEADER}'"));
    }
    let dim = lines.keyed("dim")?;
    let dim: Vec<usize> = lines.parse(&dim)?;
    let [dim] = dim[..] else {
        return lines.err("dim takes one value");
    };
    let strata = lines.keyed("strata")?;
    let strata: Vec<usize> = lines.parse(&strata)?;
    if strata.len() != 4 {
        return lines.err("strata takes four counts");
    }
    let strata_line = lines.line;
    let sizes = lines.keyed("conesizes")?;
    let sizes: Vec<usize> = lines.parse(&sizes)?;
    let cones = lines.keyed("cones")?;
    let cones: Vec<usize> = lines.parse(&cones)?;
    if cones.len() != sizes.iter().sum::<usize>() {
        return lines.err(format!(
            "{} cone points for cone sizes summing to {}",
            cones.len(),
            sizes.iter().sum::<usize>()
        ));
    }
    let orients = lines.keyed("orients")?;
    let orients: Vec<i32> = lines.parse(&orients)?;
    if orients.len() != cones.len() {
        return lines.err(format!("{} orientations for {} cone points", orients.len(), cones.len()));
    }
    let mut m = Plex::new(&sizes, cones, orients).or_else(|e| lines.err(e.to_string()))?;
    let c = m.counts();
    if [c.cells, c.vertices, c.faces, c.edges] != strata[..] {
        return Err(Error::Parse {
            line: strata_line,
            message: format!(
                "strata {strata:?} disagree with the cones: {} {} {} {}",
                c.cells, c.vertices, c.faces, c.edges
            ),
        });
    }
    lines.keyed("coords")?;
    if dim > 0 {
        let mut coords = Vec::with_capacity(dim * m.num_vertices());
        for _ in 0..m.num_vertices() {
            let words: Vec<&str> = lines.next()?.split_whitespace().collect();
            if words.len() != dim {
                return lines.err(format!("expected {dim} coordinates"));
            }
            coords.extend(lines.parse::<f64>(&words)?);
        }
        m.set_coordinates(dim, coords).or_else(|e| lines.err(e.to_string()))?;
    }
    let mut current: Option<(String, Label)> = None;
    loop {
        let l = lines.next()?;
        let words: Vec<&str> = l.split_whitespace().collect();
        match words.first().copied() {
            Some("end") => break,
            Some("label") if words.len() == 2 => {
                if let Some((name, label)) = current.take() {
                    m.set_label(name, label).or_else(|e| lines.err(e.to_string()))?;
                }
                current = Some((words[1].to_string(), Label::new()));
            }
            Some("value") if words.len() >= 3 => {
                let Some((_, label)) = current.as_mut() else {
                    return lines.err("value line outside a label block");
                };
                let v: i32 = lines.parse(&words[1..2])?[0];
                let k: usize = lines.parse(&words[2..3])?[0];
                let points: Vec<usize> = lines.parse(&words[3..])?;
                if points.len() != k {
                    return lines.err(format!("value {v} announces {k} points, lists {}", points.len()));
                }
                if let Some(&bad) = points.iter().find(|&&p| p >= m.num_points()) {
                    return lines.err(format!("point {bad} outside chart [0, {})", m.num_points()));
                }
                label.extend(v, points);
            }
            _ => return lines.err(format!("unexpected line '{l}'")),
        }
    }
    if let Some((name, label)) = current {
        m.set_label(name, label)?;
    }
    Ok(m)
}

/// One line per leaf, `local <l> -> rank <r> index <i>`, by local index.
pub fn write_sf(sf: &StarForest) -> String {
    let mut out = String::new();
    for (l, rp) in sf.sorted_leaves() {
        let _ = writeln!(out, "local {l} -> rank {} index {}", rp.rank, rp.index);
    }
    out
}

/// Listing of a forest over all ranks: a `rank <r>` line followed by that
/// rank's leaves in [`write_sf`] form.
pub fn write_distributed_sf(sf: &DistributedSf) -> String {
    let mut out = String::new();
    for (r, f) in sf.forests().iter().enumerate() {
        let _ = writeln!(out, "rank {r}");
        out.push_str(&write_sf(f));
    }
    out
}

/// Parse [`write_distributed_sf`] output; `nroots[r]` is the chart size of
/// rank `r`.
pub fn read_distributed_sf(text: &str, nroots: &[usize]) -> Result<DistributedSf> {
    let p = nroots.len();
    let mut leaves: Vec<Vec<(usize, RemotePoint)>> = vec![Vec::new(); p];
    let mut rank: Option<usize> = None;
    for (i, l) in text.lines().enumerate() {
        let err = |message: String| Error::Parse { line: i + 1, message };
        let w: Vec<&str> = l.split_whitespace().collect();
        let num = |s: &str| s.parse::<usize>().map_err(|_| err(format!("bad number '{s}'")));
        match w[..] {
            [] => {}
            ["rank", r] => {
                let r = num(r)?;
                if r >= p {
                    return Err(err(format!("rank {r} outside 0..{p}")));
                }
                rank = Some(r);
            }
            ["local", l, "->", "rank", r, "index", i] => {
                let Some(cur) = rank else {
                    return Err(err("leaf before any 'rank' line".into()));
                };
                let (l, r, i) = (num(l)?, num(r)?, num(i)?);
                if l >= nroots[cur] || r >= p || i >= nroots[r] {
                    return Err(err(format!("leaf {l} -> ({r}, {i}) outside the charts")));
                }
                leaves[cur].push((l, RemotePoint::new(r, i)));
            }
            _ => return Err(err(format!("unexpected line '{l}'"))),
        }
    }
    let forests = leaves
        .into_iter()
        .zip(nroots)
        .map(|(ls, &n)| {
            let (l, rem) = ls.into_iter().unzip();
            StarForest::new(n, Some(l), rem)
        })
        .collect::<Result<Vec<_>>>()?;
    DistributedSf::new(p, forests)
}
