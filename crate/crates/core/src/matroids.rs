//! Placement constraints: the uniform (cardinality) matroid and the cardinality-constrained
//! partition matroid over candidate indices.

use crate::error::{DesignError, Result};
use crate::model::CandidateGrid;

#[derive(Debug, Clone, PartialEq)]
pub enum MatroidKind {
    /// `|S| <= rank`.
    Uniform { rank: usize },
    /// `|S| <= global_cap` and `|S ∩ bins[j]| <= caps[j]` for every bin.
    Partition { bins: Vec<Vec<usize>>, caps: Vec<usize>, global_cap: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatroidSpec {
    ground_size: usize,
    kind: MatroidKind,
    // bin of every ground element; empty for the uniform matroid
    bin_of: Vec<usize>,
}

impl MatroidSpec {
    pub fn uniform(ground_size: usize, rank: usize) -> Self {
        MatroidSpec { ground_size, kind: MatroidKind::Uniform { rank }, bin_of: Vec::new() }
    }

    /// Partition matroid from explicit bins, which must partition `0..ground_size` exactly.
    pub fn partition(ground_size: usize, bins: Vec<Vec<usize>>, caps: Vec<usize>, global_cap: usize) -> Result<Self> {
        if bins.len() != caps.len() {
            return Err(DesignError::DimensionMismatch { expected: bins.len(), got: caps.len() });
        }
        let mut bin_of = vec![usize::MAX; ground_size];
        for (j, bin) in bins.iter().enumerate() {
            for &x in bin {
                if x >= ground_size {
                    return Err(DesignError::IndexOutOfRange { index: x, len: ground_size });
                }
                if bin_of[x] != usize::MAX {
                    return Err(DesignError::InvalidArgument(format!("element {x} belongs to more than one bin")));
                }
                bin_of[x] = j;
            }
        }
        if let Some(x) = bin_of.iter().position(|&b| b == usize::MAX) {
            return Err(DesignError::InvalidArgument(format!("element {x} is not covered by any bin")));
        }
        Ok(MatroidSpec { ground_size, kind: MatroidKind::Partition { bins, caps, global_cap }, bin_of })
    }

    pub fn kind(&self) -> &MatroidKind {
        &self.kind
    }

    pub fn ground_size(&self) -> usize {
        self.ground_size
    }

    /// Upper bound on the size of any independent set.
    pub fn global_cap(&self) -> usize {
        match &self.kind {
            MatroidKind::Uniform { rank } => *rank,
            MatroidKind::Partition { global_cap, .. } => *global_cap,
        }
    }

    /// Rank of the matroid (size of every maximal independent set).
    pub fn rank(&self) -> usize {
        match &self.kind {
            MatroidKind::Uniform { rank } => (*rank).min(self.ground_size),
            MatroidKind::Partition { bins, caps, global_cap } => {
                let per_bin: usize = bins.iter().zip(caps).map(|(b, &c)| b.len().min(c)).sum();
                per_bin.min(*global_cap)
            }
        }
    }

    /// Bin index of a ground element (partition matroids only).
    pub fn bin_of(&self, x: usize) -> Option<usize> {
        self.bin_of.get(x).copied()
    }

    pub fn is_independent(&self, set: &[usize]) -> Result<bool> {
        let mut tracker = IndependenceTracker::new(self);
        for &x in set {
            self.check(x)?;
            if !tracker.can_add(x) {
                return Ok(false);
            }
            tracker.add(x);
        }
        Ok(true)
    }

    /// Whether `set ∪ {x}` is independent, for an independent `set` not containing `x`.
    pub fn can_extend(&self, set: &[usize], x: usize) -> Result<bool> {
        self.check(x)?;
        if set.contains(&x) {
            return Err(DesignError::AlreadyChosen(x));
        }
        let mut tracker = IndependenceTracker::new(self);
        for &y in set {
            self.check(y)?;
            tracker.add(y);
        }
        Ok(tracker.can_add(x))
    }

    fn check(&self, x: usize) -> Result<()> {
        if x >= self.ground_size {
            return Err(DesignError::IndexOutOfRange { index: x, len: self.ground_size });
        }
        Ok(())
    }
}

/// Per-bin occupancy counts for incremental feasibility checks.
#[derive(Debug, Clone)]
pub struct IndependenceTracker<'a> {
    spec: &'a MatroidSpec,
    total: usize,
    per_bin: Vec<usize>,
}

impl<'a> IndependenceTracker<'a> {
    pub fn new(spec: &'a MatroidSpec) -> Self {
        let bins = match &spec.kind {
            MatroidKind::Uniform { .. } => 0,
            MatroidKind::Partition { bins, .. } => bins.len(),
        };
        IndependenceTracker { spec, total: 0, per_bin: vec![0; bins] }
    }

    pub fn can_add(&self, x: usize) -> bool {
        if self.total >= self.spec.global_cap() {
            return false;
        }
        match &self.spec.kind {
            MatroidKind::Uniform { .. } => true,
            MatroidKind::Partition { caps, .. } => {
                let b = self.spec.bin_of[x];
                self.per_bin[b] < caps[b]
            }
        }
    }

    pub fn add(&mut self, x: usize) {
        self.total += 1;
        if let MatroidKind::Partition { .. } = self.spec.kind {
            self.per_bin[self.spec.bin_of[x]] += 1;
        }
    }
}

/// Splits the grid into half-open bins `[offset + i·width, offset + (i+1)·width)`.
///
/// Bins without grid points are dropped. `caps` holds either one cap for every bin or one
/// cap per nonempty bin in increasing position order. Points within `1e-9·width` below an
/// edge are assigned to the bin that starts at that edge.
pub fn partition_from_bins(
    grid: &CandidateGrid,
    bin_width: f64,
    offset: f64,
    caps: &[usize],
    global_cap: usize,
) -> Result<MatroidSpec> {
    if !(bin_width > 0.0) || !bin_width.is_finite() {
        return Err(DesignError::InvalidArgument(format!("bin width must be positive, got {bin_width}")));
    }
    if !offset.is_finite() {
        return Err(DesignError::InvalidArgument("bin offset must be finite".into()));
    }
    let mut bins: Vec<(i64, Vec<usize>)> = Vec::new();
    for (x, &pos) in grid.positions().iter().enumerate() {
        let key = ((pos - offset) / bin_width + 1e-9).floor() as i64;
        match bins.last_mut() {
            Some((k, members)) if *k == key => members.push(x),
            _ => bins.push((key, vec![x])),
        }
    }
    let bins: Vec<Vec<usize>> = bins.into_iter().map(|(_, b)| b).collect();
    let caps = match caps.len() {
        1 => vec![caps[0]; bins.len()],
        n if n == bins.len() => caps.to_vec(),
        n => return Err(DesignError::DimensionMismatch { expected: bins.len(), got: n }),
    };
    MatroidSpec::partition(grid.len(), bins, caps, global_cap)
}
