//! In-process multi-rank communicator.
//!
//! Every collective takes the contributions of all ranks at once and
//! delivers in bulk: all sends are posted, then all messages are handed
//! out ordered by `(sender, tag)`. Only payload bytes are accounted, per
//! rank and per named stage, in a [`VolumeLedger`].

mod volume;
mod wire;

use std::collections::BTreeMap;
use std::sync::Mutex;

use crate::error::{invalid, Error, Result};

pub use volume::{compare_volumes, predict_volumes, VolumeComparison, VolumePrediction};
pub use wire::{decode, encode, Owner, Wire};

/// Stable stage keys used by the distribution drivers.
pub mod stage {
    pub const PARTITION: &str = "partition";
    pub const INVERSION: &str = "inversion";
    pub const MIGRATION: &str = "migration";
    pub const OVERLAP: &str = "overlap";
    pub const REDISTRIBUTION: &str = "redistribution";
    /// Point-SF construction after a migration (ownership vote).
    pub const OWNERSHIP: &str = "ownership";
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outgoing {
    pub dest: usize,
    pub tag: u32,
    pub payload: Vec<u8>,
}

impl Outgoing {
    pub fn new(dest: usize, tag: u32, payload: Vec<u8>) -> Self {
        Self { dest, tag, payload }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Delivered {
    pub source: usize,
    pub tag: u32,
    pub payload: Vec<u8>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RankVolume {
    pub sent: u64,
    pub received: u64,
}

/// Byte counters per stage and rank. Counters only ever grow.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VolumeLedger {
    size: usize,
    stages: BTreeMap<String, Vec<RankVolume>>,
}

impl VolumeLedger {
    fn new(size: usize) -> Self {
        Self {
            size,
            stages: BTreeMap::new(),
        }
    }

    pub fn stages(&self) -> impl Iterator<Item = &str> {
        self.stages.keys().map(String::as_str)
    }

    pub fn report(&self, stage: &str) -> Vec<RankVolume> {
        self.stages
            .get(stage)
            .cloned()
            .unwrap_or_else(|| vec![RankVolume::default(); self.size])
    }

    pub fn total_sent(&self, stage: &str) -> u64 {
        self.stages
            .get(stage)
            .map_or(0, |v| v.iter().map(|r| r.sent).sum())
    }

    pub fn total_received(&self, stage: &str) -> u64 {
        self.stages
            .get(stage)
            .map_or(0, |v| v.iter().map(|r| r.received).sum())
    }

    fn entry(&mut self, stage: &str) -> &mut Vec<RankVolume> {
        let size = self.size;
        self.stages
            .entry(stage.to_string())
            .or_insert_with(|| vec![RankVolume::default(); size])
    }
}

/// A simulated world of `size` ranks.
///
/// The world is `Sync`; independent collectives may be issued from several
/// threads and only the ledger is shared between them.
#[derive(Debug)]
pub struct CommWorld {
    size: usize,
    ledger: Mutex<VolumeLedger>,
}

impl CommWorld {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return invalid("a communicator needs at least one rank");
        }
        Ok(Self {
            size,
            ledger: Mutex::new(VolumeLedger::new(size)),
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Bulk-synchronous all-to-all exchange.
    ///
    /// `outgoing[r]` is the list rank `r` posts. The result holds, for each
    /// rank, the messages addressed to it sorted by `(source, tag)`; messages
    /// with equal keys keep their posting order.
    pub fn exchange(&self, stage: &str, outgoing: Vec<Vec<Outgoing>>) -> Result<Vec<Vec<Delivered>>> {
        if outgoing.len() != self.size {
            return Err(Error::ContractViolation(format!(
                "exchange on stage {stage:?} got contributions from {} ranks, world has {}",
                outgoing.len(),
                self.size
            )));
        }
        for (src, msgs) in outgoing.iter().enumerate() {
            if let Some(m) = msgs.iter().find(|m| m.dest >= self.size) {
                return invalid(format!(
                    "rank {src} addressed rank {} in a world of {} ranks",
                    m.dest, self.size
                ));
            }
        }

        let mut sent = vec![0u64; self.size];
        let mut received = vec![0u64; self.size];
        let mut inbox: Vec<Vec<Delivered>> = vec![Vec::new(); self.size];
        for (src, msgs) in outgoing.into_iter().enumerate() {
            for m in msgs {
                let n = m.payload.len() as u64;
                sent[src] += n;
                received[m.dest] += n;
                inbox[m.dest].push(Delivered {
                    source: src,
                    tag: m.tag,
                    payload: m.payload,
                });
            }
        }
        // Sources were visited in order; a stable sort on the tag within each
        // source keeps posting order for equal tags.
        for msgs in &mut inbox {
            msgs.sort_by_key(|m| (m.source, m.tag));
        }

        if sent.iter().any(|&s| s > 0) {
            let mut ledger = self.ledger.lock().expect("ledger lock poisoned");
            let entry = ledger.entry(stage);
            for r in 0..self.size {
                entry[r].sent += sent[r];
                entry[r].received += received[r];
            }
        }
        Ok(inbox)
    }

    /// Every rank sends its item to every other rank. Returns the items
    /// indexed by source rank, identical on all ranks.
    pub fn allgather<T: Wire>(&self, stage: &str, items: &[T]) -> Result<Vec<T>> {
        let bytes = items.iter().map(|it| encode(std::slice::from_ref(it))).collect();
        let out = self.allgather_bytes(stage, bytes)?;
        Ok(out.iter().map(|b| T::get(b)).collect())
    }

    /// Variable-length form of [`CommWorld::allgather`].
    pub fn allgather_bytes(&self, stage: &str, items: Vec<Vec<u8>>) -> Result<Vec<Vec<u8>>> {
        if items.len() != self.size {
            return Err(Error::ContractViolation(format!(
                "allgather got {} contributions for {} ranks",
                items.len(),
                self.size
            )));
        }
        let outgoing = items
            .iter()
            .enumerate()
            .map(|(src, it)| {
                (0..self.size)
                    .filter(|&d| d != src)
                    .map(|d| Outgoing::new(d, 0, it.clone()))
                    .collect()
            })
            .collect();
        let inbox = self.exchange(stage, outgoing)?;
        // Rank 0's view; every rank assembles the same vector.
        let mut out = items;
        for m in inbox.into_iter().next().unwrap_or_default() {
            out[m.source] = m.payload;
        }
        Ok(out)
    }

    /// Snapshot of the counters for one stage; unknown stages read as zero.
    pub fn volume_report(&self, stage: &str) -> Vec<RankVolume> {
        self.ledger.lock().expect("ledger lock poisoned").report(stage)
    }

    pub fn ledger(&self) -> VolumeLedger {
        self.ledger.lock().expect("ledger lock poisoned").clone()
    }

    /// Global bytes sent, summed over the given stages.
    pub fn total_sent(&self, stages: &[&str]) -> u64 {
        let ledger = self.ledger.lock().expect("ledger lock poisoned");
        stages.iter().map(|s| ledger.total_sent(s)).sum()
    }
}
