//! Moving data, sections, meshes and point star forests along a migration
//! star forest whose leaves are target points and whose roots are source
//! points.

use std::collections::{BTreeSet, HashMap};

use crate::comm::{CommWorld, Owner, Wire};
use crate::datalayout::{Label, Section};
use crate::error::{Error, Result};
use crate::plex::Plex;
use crate::starforest::{create_section_sf, DistributedSf, ReduceOp, RemotePoint, StarForest};
use crate::Point;

/// Global ids of one rank's points. Owned points of rank `r` take a
/// contiguous block after those of ranks `< r`; ghosts carry their owner's id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobalNumbering {
    pub globals: Vec<usize>,
    pub owned: Vec<bool>,
}

impl GlobalNumbering {
    pub fn num_owned(&self) -> usize {
        self.owned.iter().filter(|&&o| o).count()
    }
}

pub fn create_global_numbering(
    world: &CommWorld,
    stage: &str,
    plexes: &[Plex],
    sf_point: &DistributedSf,
) -> Result<Vec<GlobalNumbering>> {
    let owned: Vec<Vec<bool>> = plexes
        .iter()
        .zip(sf_point.forests())
        .map(|(m, f)| {
            let mut o = vec![true; m.num_points()];
            for (p, _) in f.iter() {
                o[p] = false;
            }
            o
        })
        .collect();
    let counts: Vec<i32> = owned.iter().map(|o| o.iter().filter(|&&x| x).count() as i32).collect();
    let counts = world.allgather(stage, &counts)?;
    let mut start = 0usize;
    let mut roots = Vec::with_capacity(plexes.len());
    for (o, &c) in owned.iter().zip(&counts) {
        let mut next = start;
        roots.push(
            o.iter()
                .map(|&own| {
                    if own {
                        next += 1;
                        (next - 1) as i32
                    } else {
                        -1
                    }
                })
                .collect::<Vec<i32>>(),
        );
        start += c as usize;
    }
    let ghosts = sf_point.bcast(world, stage, &roots)?;
    let mut out = Vec::with_capacity(plexes.len());
    for (r, ((mut g, f), o)) in roots.into_iter().zip(sf_point.forests()).zip(owned).enumerate() {
        for (i, (p, rp)) in f.iter().enumerate() {
            if ghosts[r][i] < 0 {
                return Err(Error::ContractViolation(format!(
                    "rank {r} point {p} is a leaf of point {} on rank {}, which is itself a ghost",
                    rp.index, rp.rank
                )));
            }
            g[p] = ghosts[r][i];
        }
        out.push(GlobalNumbering {
            globals: g.into_iter().map(|x| x as usize).collect(),
            owned: o,
        });
    }
    Ok(out)
}

/// Lay out the target side of a section migration: the target chart covers
/// the local leaf points, dof counts and source offsets arrive by two
/// broadcasts. Returns the remote offset of every leaf position and the
/// target sections.
pub fn distribute_section(
    world: &CommWorld,
    stage: &str,
    sf: &DistributedSf,
    sec_source: &[Section],
) -> Result<(Vec<Vec<usize>>, Vec<Section>)> {
    let dofs: Vec<Vec<i32>> = sf
        .forests()
        .iter()
        .zip(sec_source)
        .map(|(f, s)| (0..f.nroots()).map(|q| s.dof(q) as i32).collect())
        .collect();
    let offs: Vec<Vec<i32>> = sf
        .forests()
        .iter()
        .zip(sec_source)
        .map(|(f, s)| (0..f.nroots()).map(|q| s.offset(q) as i32).collect())
        .collect();
    let leaf_dofs = sf.bcast(world, stage, &dofs)?;
    let leaf_offs = sf.bcast(world, stage, &offs)?;
    let mut targets = Vec::with_capacity(sf.nranks());
    for (f, d) in sf.forests().iter().zip(&leaf_dofs) {
        let mut counts = vec![0usize; f.leaf_space_len()];
        for (i, &n) in d.iter().enumerate() {
            counts[f.leaf(i)] = n as usize;
        }
        targets.push(Section::from_dofs(0, counts));
    }
    let remote = leaf_offs
        .into_iter()
        .map(|o| o.into_iter().map(|x| x as usize).collect())
        .collect();
    Ok((remote, targets))
}

/// Move `(section, data)` pairs along a point star forest.
pub fn migrate_data<T: Wire + Default>(
    world: &CommWorld,
    stage: &str,
    sf: &DistributedSf,
    sec_source: &[Section],
    data_source: &[Vec<T>],
) -> Result<(Vec<Section>, Vec<Vec<T>>)> {
    for (r, (s, d)) in sec_source.iter().zip(data_source).enumerate() {
        if s.storage_size() != d.len() {
            return Err(Error::InconsistentLayout(format!(
                "rank {r}: section stores {} items but {} were given",
                s.storage_size(),
                d.len()
            )));
        }
    }
    let (remote_offsets, sec_target) = distribute_section(world, stage, sf, sec_source)?;
    let dof_sf = create_section_sf(sf, sec_source, &remote_offsets, &sec_target)?;
    let packed = dof_sf.bcast(world, stage, data_source)?;
    let sizes: Vec<usize> = sec_target.iter().map(Section::storage_size).collect();
    let data = dof_sf.scatter(&packed, &sizes, T::default());
    Ok((sec_target, data))
}

fn check_leaf_space(sf: &DistributedSf) -> Result<()> {
    for (r, f) in sf.forests().iter().enumerate() {
        if f.leaf_space_len() != f.nleaves() {
            return Err(Error::ContractViolation(format!(
                "rank {r}: migration leaves must number the target points 0..{}",
                f.nleaves()
            )));
        }
    }
    Ok(())
}

/// Build the target meshes of a migration.
///
/// Cones travel as global ids and are rewritten to target-local ids;
/// orientations travel unchanged. Coordinates move over the vertex leaves
/// only, and every label moves as a section of values per point.
pub fn migrate_mesh(
    world: &CommWorld,
    stage: &str,
    source: &[Plex],
    sf: &DistributedSf,
    l2g: &[Vec<usize>],
) -> Result<Vec<Plex>> {
    check_leaf_space(sf)?;
    let nranks = sf.nranks();
    let l2g_i32: Vec<Vec<i32>> = l2g.iter().map(|g| g.iter().map(|&x| x as i32).collect()).collect();
    let sizes: Vec<usize> = sf.forests().iter().map(StarForest::nleaves).collect();
    let gids = sf.bcast_to_points(world, stage, &l2g_i32, &sizes, -1)?;
    let mut g2l: Vec<HashMap<usize, Point>> = Vec::with_capacity(nranks);
    for (r, g) in gids.iter().enumerate() {
        let mut map = HashMap::with_capacity(g.len());
        for (p, &x) in g.iter().enumerate() {
            if map.insert(x as usize, p).is_some() {
                return Err(Error::InvalidNumbering(format!(
                    "rank {r} receives global point {x} twice"
                )));
            }
        }
        g2l.push(map);
    }

    let cone_secs: Vec<Section> = source.iter().map(|m| m.cone_section().clone()).collect();
    let (remote_offsets, cone_target) = distribute_section(world, stage, sf, &cone_secs)?;
    let dof_sf = create_section_sf(sf, &cone_secs, &remote_offsets, &cone_target)?;
    let global_cones: Vec<Vec<i32>> = source
        .iter()
        .zip(&l2g_i32)
        .map(|(m, g)| m.cone_points().iter().map(|&q| g[q]).collect())
        .collect();
    let orients: Vec<Vec<i32>> = source.iter().map(|m| m.orientations().to_vec()).collect();
    let store: Vec<usize> = cone_target.iter().map(Section::storage_size).collect();
    let cones_in = dof_sf.scatter(&dof_sf.bcast(world, stage, &global_cones)?, &store, -1);
    let orients_in = dof_sf.scatter(&dof_sf.bcast(world, stage, &orients)?, &store, 0);

    let mut targets = Vec::with_capacity(nranks);
    for (r, orients) in orients_in.into_iter().enumerate() {
        let sec = &cone_target[r];
        let mut cones = Vec::with_capacity(store[r]);
        #[allow(clippy::needless_range_loop)]
        for p in 0..sizes[r] {
            for k in sec.range(p) {
                let g = cones_in[r][k] as usize;
                let q = *g2l[r].get(&g).ok_or(Error::IncompleteClosure {
                    rank: r,
                    point: gids[r][p] as usize,
                    missing: g,
                })?;
                cones.push(q);
            }
        }
        let mut dofs = sec.dofs().to_vec();
        dofs.resize(sizes[r], 0);
        targets.push(Plex::new(&dofs, cones, orients)?);
    }

    migrate_coordinates(world, stage, source, sf, &mut targets)?;
    migrate_labels(world, stage, source, sf, &mut targets)?;
    Ok(targets)
}

fn migrate_coordinates(
    world: &CommWorld,
    stage: &str,
    source: &[Plex],
    sf: &DistributedSf,
    targets: &mut [Plex],
) -> Result<()> {
    let dims: Vec<i32> = source
        .iter()
        .map(|m| if m.has_coordinates() { m.coordinate_dim() as i32 } else { 0 })
        .collect();
    let dim = world.allgather(stage, &dims)?.into_iter().max().unwrap_or(0) as usize;
    if dim == 0 {
        return Ok(());
    }
    let width = dim * f64::WIDTH;
    // Roots span all source points; only vertex rows are ever requested.
    let roots: Vec<Vec<u8>> = source
        .iter()
        .map(|m| {
            let mut buf = vec![0u8; m.num_points() * width];
            if m.has_coordinates() {
                for v in m.vertices() {
                    let mut row = Vec::with_capacity(width);
                    for x in m.vertex_coordinates(v).expect("vertex") {
                        x.put(&mut row);
                    }
                    buf[v * width..(v + 1) * width].copy_from_slice(&row);
                }
            }
            buf
        })
        .collect();
    let mut forests = Vec::with_capacity(sf.nranks());
    for (f, t) in sf.forests().iter().zip(targets.iter()) {
        let vs = t.vertices();
        let (leaves, remotes): (Vec<Point>, Vec<RemotePoint>) = f
            .iter()
            .filter(|(p, _)| vs.contains(p))
            .map(|(p, rp)| (p - vs.start, rp))
            .unzip();
        forests.push(StarForest::new(f.nroots(), Some(leaves), remotes)?);
    }
    let vertex_sf = DistributedSf::new(sf.nranks(), forests)?;
    let packed = vertex_sf.bcast_bytes(world, stage, width, &roots)?;
    for ((t, f), bytes) in targets.iter_mut().zip(vertex_sf.forests()).zip(packed) {
        let nv = t.num_vertices();
        let mut coords = vec![0.0; nv * dim];
        for i in 0..f.nleaves() {
            let v = f.leaf(i);
            for k in 0..dim {
                let at = i * width + k * f64::WIDTH;
                coords[v * dim + k] = f64::get(&bytes[at..at + f64::WIDTH]);
            }
        }
        t.set_coordinates(dim, coords)?;
    }
    Ok(())
}

fn migrate_labels(
    world: &CommWorld,
    stage: &str,
    source: &[Plex],
    sf: &DistributedSf,
    targets: &mut [Plex],
) -> Result<()> {
    let names: Vec<Vec<u8>> = source
        .iter()
        .map(|m| m.labels().keys().cloned().collect::<Vec<_>>().join("\n").into_bytes())
        .collect();
    let gathered = world.allgather_bytes(stage, names)?;
    let names: BTreeSet<String> = gathered
        .iter()
        .flat_map(|b| String::from_utf8_lossy(b).lines().map(str::to_string).collect::<Vec<_>>())
        .filter(|s| !s.is_empty())
        .collect();
    for name in names {
        let mut secs = Vec::with_capacity(source.len());
        let mut data = Vec::with_capacity(source.len());
        for m in source {
            let mut per_point: Vec<Vec<i32>> = vec![Vec::new(); m.num_points()];
            if let Some(l) = m.label(&name) {
                for (v, set) in l.iter() {
                    for &p in set {
                        per_point[p].push(v);
                    }
                }
            }
            secs.push(Section::from_dofs(0, per_point.iter().map(Vec::len).collect()));
            data.push(per_point.concat());
        }
        let (tsecs, tdata) = migrate_data(world, stage, sf, &secs, &data)?;
        for ((t, s), d) in targets.iter_mut().zip(&tsecs).zip(&tdata) {
            let mut l = Label::new();
            for p in s.chart() {
                for k in s.range(p) {
                    l.insert(d[k], p);
                }
            }
            t.set_label(name.clone(), l)?;
        }
    }
    Ok(())
}

/// How [`migrate_sf`] picks the owner of each migrated point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OwnershipRule {
    /// Every receiver bids; the highest rank wins.
    Vote,
    /// The rank holding the root keeps it. Every root must be mirrored on
    /// its own rank.
    KeepRootOwner,
}

/// Point star forest of the target meshes: each target point whose owner
/// is another rank becomes a leaf of the owner's copy.
pub fn migrate_sf(
    world: &CommWorld,
    stage: &str,
    sf_mig: &DistributedSf,
    rule: OwnershipRule,
) -> Result<DistributedSf> {
    let bids: Vec<Vec<Owner>> = sf_mig
        .forests()
        .iter()
        .enumerate()
        .map(|(r, f)| {
            f.iter()
                .map(|(p, rp)| match rule {
                    OwnershipRule::Vote => Owner::new(r, p),
                    OwnershipRule::KeepRootOwner if rp.rank == r => Owner::new(r, p),
                    OwnershipRule::KeepRootOwner => Owner::NONE,
                })
                .collect()
        })
        .collect();
    let mut roots: Vec<Vec<Owner>> = sf_mig.forests().iter().map(|f| vec![Owner::NONE; f.nroots()]).collect();
    sf_mig.reduce(world, stage, &bids, &mut roots, ReduceOp::MaxLoc)?;
    let owners = sf_mig.bcast(world, stage, &roots)?;
    let mut forests = Vec::with_capacity(sf_mig.nranks());
    for (r, (f, own)) in sf_mig.forests().iter().zip(&owners).enumerate() {
        let mut leaves: Vec<(Point, RemotePoint)> = Vec::new();
        for (i, (p, rp)) in f.iter().enumerate() {
            let o = own[i];
            if o.is_none() {
                return Err(Error::ContractViolation(format!(
                    "root {} on rank {} has no copy on its own rank",
                    rp.index, rp.rank
                )));
            }
            if o.rank as usize != r {
                leaves.push((p, RemotePoint::new(o.rank as usize, o.index as usize)));
            }
        }
        leaves.sort_unstable_by_key(|&(p, _)| p);
        let (l, rem) = leaves.into_iter().unzip();
        forests.push(StarForest::new(f.nleaves(), Some(l), rem)?);
    }
    DistributedSf::new(sf_mig.nranks(), forests)
}
