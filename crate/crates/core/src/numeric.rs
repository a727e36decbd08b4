//! Numeric tolerances and tolerance-aware value classing.

/// Absolute tolerance used when comparing probabilities.
pub const PROB_TOLERANCE: f64 = 1e-9;

/// Absolute tolerance used when deciding whether two utilities are the same value.
pub const UTILITY_TOLERANCE: f64 = 1e-9;

/// Assigns reals to classes: a value joins the first class whose representative
/// lies within `tolerance`, otherwise it opens a new class. Class ids follow
/// first appearance, so the result depends only on the order values are fed in.
#[derive(Debug, Clone)]
pub(crate) struct ValueClasses {
    tolerance: f64,
    reps: Vec<f64>,
}

impl ValueClasses {
    pub(crate) fn new(tolerance: f64) -> Self {
        ValueClasses {
            tolerance,
            reps: Vec::new(),
        }
    }

    pub(crate) fn classify(&mut self, value: f64) -> usize {
        if let Some(i) = self
            .reps
            .iter()
            .position(|r| (r - value).abs() <= self.tolerance)
        {
            return i;
        }
        self.reps.push(value);
        self.reps.len() - 1
    }

    pub(crate) fn representative(&self, class: usize) -> f64 {
        self.reps[class]
    }
}

/// Label-wise comparison of two probability tables sorted by label.
pub(crate) fn tables_match(a: &[(String, f64)], b: &[(String, f64)]) -> bool {
    a.len() == b.len()
        && a
            .iter()
            .zip(b)
            .all(|((la, pa), (lb, pb))| la == lb && (pa - pb).abs() <= PROB_TOLERANCE)
}
