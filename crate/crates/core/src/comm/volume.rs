//! Closed-form communication volume of a one-to-all distribution of a 3D
//! simplicial mesh, and reconciliation against measured ledger bytes.

use super::CommWorld;

const INT: u64 = 4;
const REAL: u64 = 8;

/// Predicted bytes per distribution phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VolumePrediction {
    pub sf: u64,
    pub inversion: u64,
    pub stratify: u64,
    pub partition: u64,
    pub cones: u64,
    pub orientations: u64,
    pub section: u64,
    pub topology: u64,
    pub coordinates: u64,
    pub markers: u64,
    pub migration: u64,
}

impl VolumePrediction {
    /// Partition plus migration, the whole initial distribution.
    pub fn distribution_total(&self) -> u64 {
        self.partition + self.migration
    }
}

/// Evaluate the volume model for stratum counts (cells, faces, edges, vertices).
pub fn predict_volumes(nc: u64, nf: u64, ne: u64, nv: u64) -> VolumePrediction {
    let n = nc + nf + ne + nv;
    let sf = INT * n;
    let inversion = sf + 2 * INT * n;
    let stratify = sf + INT * n;
    let partition = inversion + stratify;
    let cones = nc * INT * 4 + nf * INT * 3 + ne * INT * 2;
    let orientations = cones;
    let section = 3 * sf + 2 * INT * n;
    let topology = cones + orientations + section;
    let coordinates = (3 * REAL + 2 * INT) * nv;
    let markers = 3 * sf;
    let migration = topology + coordinates + markers;
    VolumePrediction {
        sf,
        inversion,
        stratify,
        partition,
        cones,
        orientations,
        section,
        topology,
        coordinates,
        markers,
        migration,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolumeComparison {
    pub predicted: u64,
    pub measured: u64,
    /// `|measured - predicted| / predicted`; `None` when nothing was predicted.
    pub relative_error: Option<f64>,
    /// Set when a zero prediction meets a nonzero measurement.
    pub mismatch: bool,
}

impl VolumeComparison {
    pub fn within(&self, tolerance: f64) -> bool {
        match self.relative_error {
            Some(e) => e <= tolerance,
            None => !self.mismatch,
        }
    }
}

/// Compare a predicted byte count with the global bytes sent over `stages`.
pub fn compare_volumes(predicted: u64, world: &CommWorld, stages: &[&str]) -> VolumeComparison {
    let measured = world.total_sent(stages);
    let (relative_error, mismatch) = if predicted == 0 {
        (None, measured > 0)
    } else {
        let e = (measured as f64 - predicted as f64).abs() / predicted as f64;
        (Some(e), false)
    };
    VolumeComparison {
        predicted,
        measured,
        relative_error,
        mismatch,
    }
}
