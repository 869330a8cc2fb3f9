/// Deterministic operation counter.
///
/// Cost is measured in algorithm-specific unit steps (entry visits, digit
/// operations, modular multiplications, rho iterations) so measurements are
/// reproducible independent of the machine.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Work {
    pub steps: u64,
}

impl Work {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn tick(&mut self) {
        self.steps += 1;
    }

    #[inline]
    pub fn add(&mut self, n: u64) {
        self.steps = self.steps.saturating_add(n);
    }
}
