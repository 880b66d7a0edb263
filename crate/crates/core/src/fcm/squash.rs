use serde::{Deserialize, Serialize};

use super::FcmError;

/// Nondecreasing map from the reals into `[0, 1]` applied to each node's
/// summed causal input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SquashSpec {
    /// `1 / (1 + exp(-steepness * x))`
    Logistic { steepness: f64 },
    /// 1 when `x > cutoff`, else 0.
    Threshold { cutoff: f64 },
    /// `x` clamped to `[0, 1]`.
    ClippedLinear,
}

impl Default for SquashSpec {
    fn default() -> Self {
        SquashSpec::Logistic { steepness: 5.0 }
    }
}

impl SquashSpec {
    pub fn logistic(steepness: f64) -> Result<Self, FcmError> {
        let s = SquashSpec::Logistic { steepness };
        s.validate()?;
        Ok(s)
    }

    pub fn threshold(cutoff: f64) -> Result<Self, FcmError> {
        let s = SquashSpec::Threshold { cutoff };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), FcmError> {
        match *self {
            SquashSpec::Logistic { steepness } if !(steepness.is_finite() && steepness > 0.0) => {
                Err(FcmError::Squash(format!(
                    "logistic steepness must be finite and positive, got {steepness}"
                )))
            }
            SquashSpec::Threshold { cutoff } if cutoff.is_nan() => {
                Err(FcmError::Squash("threshold cutoff is NaN".into()))
            }
            _ => Ok(()),
        }
    }

    /// Output is always in `[0, 1]`; NaN input maps to 0.
    pub fn apply(&self, x: f64) -> f64 {
        if x.is_nan() {
            return 0.0;
        }
        match *self {
            SquashSpec::Logistic { steepness } => 1.0 / (1.0 + (-steepness * x).exp()),
            SquashSpec::Threshold { cutoff } => {
                if x > cutoff {
                    1.0
                } else {
                    0.0
                }
            }
            SquashSpec::ClippedLinear => x.clamp(0.0, 1.0),
        }
    }

    /// True when outputs are always exactly 0 or 1.
    pub fn is_binary(&self) -> bool {
        matches!(self, SquashSpec::Threshold { .. })
    }
}
