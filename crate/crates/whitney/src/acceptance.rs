//! The acceptance suite: one runnable check per shipped guarantee, shared
//! by `ws selftest` and the integration tests.

pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

pub fn run_all(seed: u64) -> Vec<CriterionResult> {
    let _ = seed;
    Vec::new()
}
