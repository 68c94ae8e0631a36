use crate::error::Result;
use crate::sparse::{Label, SparseVector};

/// Norm beyond which an example is rejected as an ingestion bug rather than
/// silently clamped.
pub const UNIT_BALL_REJECT: f64 = 1.0 + 1e-6;

/// A streaming binary classifier evaluated by progressive validation.
///
/// The label only enters through [`update`](OnlineClassifier::update), which
/// must follow a [`predict`](OnlineClassifier::predict) on the same example, so
/// a prediction is always committed before the learner sees its label.
pub trait OnlineClassifier {
    fn predict(&mut self, x: &SparseVector) -> Result<Label>;

    /// Reveals the label of the most recently predicted example.
    fn update(&mut self, y: Label) -> Result<()>;
}

pub(crate) fn check_unit_ball(x: &SparseVector) -> Result<()> {
    let norm = x.norm();
    if norm > UNIT_BALL_REJECT || norm.is_nan() {
        return Err(crate::error::BoostError::OutsideUnitBall { norm });
    }
    Ok(())
}
