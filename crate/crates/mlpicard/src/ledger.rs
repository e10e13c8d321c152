//! Realized-cost ledger.
//!
//! Every evaluation threads one of these through its recursion, counting
//! scalar standard normal variates and terminal/nonlinearity evaluations
//! actually consumed. The counts are compared against the exact cost
//! recursions of [`crate::cost`], which bound them from above.

/// Running counts for one evaluation tree.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CostLedger {
    /// Scalar standard normal variates drawn.
    pub normals: u64,
    /// Evaluations of the pointwise nonlinearity `f`.
    pub f_evals: u64,
    /// Evaluations of the terminal condition `g`.
    pub g_evals: u64,
}

impl CostLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_normals(&mut self, count: u64) {
        self.normals += count;
    }

    pub fn add_f_eval(&mut self) {
        self.f_evals += 1;
    }

    pub fn add_g_eval(&mut self) {
        self.g_evals += 1;
    }

    /// Combined `f` and `g` evaluation count, the quantity the
    /// function-evaluation cost model bounds.
    pub fn function_evals(&self) -> u64 {
        self.f_evals + self.g_evals
    }

    pub fn merge(&mut self, other: &CostLedger) {
        self.normals += other.normals;
        self.f_evals += other.f_evals;
        self.g_evals += other.g_evals;
    }
}
