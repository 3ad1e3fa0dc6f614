//! Work and scheduling counters shared by the engines.

/// Cumulative counters plus the work of the most recent update.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Metrics {
    pub updates: u64,
    pub queries: u64,
    /// Elementary operations over the whole run.
    pub ops: u64,
    /// Elementary operations charged to the current or most recent update.
    pub last_ops: u64,
    /// Largest single-update charge so far.
    pub max_update_ops: u64,
    /// Largest single-update charge outside phase boundaries and rebuilds.
    pub max_steady_ops: u64,
    /// Per-update cap in force for the most recent update (0 when uncapped).
    pub last_cap: u64,
    /// Updates whose non-boundary work exceeded their cap.
    pub cap_violations: u64,
    /// Operations spent stepping deferred jobs during the most recent update.
    pub last_job_ops: u64,
    /// Operations spent stepping deferred jobs over the whole run.
    pub job_ops: u64,
    pub max_job_ops: u64,
    pub job_backlog: u64,
    pub deadline_misses: u64,
    pub rebuilds: u64,
    pub last_rebuild: bool,
    /// Operations at phase boundaries (rotation, re-basing, job folds).
    pub boundary_ops: u64,
    /// Boundary operations inside the most recent update.
    pub last_boundary_ops: u64,
    pub chunks_sealed: u64,
    pub phases: u64,
    pub transitions_started: u64,
    pub transitions_committed: u64,
    pub transitions_cancelled: u64,
    pub class_switches: u64,
}

impl Metrics {
    pub fn begin_update(&mut self) {
        self.updates += 1;
        self.last_ops = 0;
        self.last_job_ops = 0;
        self.last_boundary_ops = 0;
        self.last_rebuild = false;
    }

    pub fn end_update(&mut self) {
        self.max_update_ops = self.max_update_ops.max(self.last_ops);
        self.max_steady_ops = self.max_steady_ops.max(self.last_steady_ops());
        if self.last_cap > 0 && self.last_steady_ops() > self.last_cap {
            self.cap_violations += 1;
        }
        self.max_job_ops = self.max_job_ops.max(self.last_job_ops);
    }

    #[inline]
    pub fn charge(&mut self, n: u64) {
        self.ops += n;
        self.last_ops += n;
    }

    /// Non-boundary work of the most recent update.
    pub fn last_steady_ops(&self) -> u64 {
        self.last_ops - self.last_boundary_ops.min(self.last_ops)
    }

    pub fn charge_job(&mut self, n: u64) {
        self.charge(n);
        self.last_job_ops += n;
        self.job_ops += n;
    }

    pub fn absorb(&mut self, other: &Metrics) {
        self.ops += other.ops;
        self.deadline_misses += other.deadline_misses;
        self.chunks_sealed += other.chunks_sealed;
        self.boundary_ops += other.boundary_ops;
    }
}
