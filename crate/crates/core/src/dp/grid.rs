use serde::Serialize;

use super::DpError;

/// Rounded payoffs: integer multiples of `eps / (2n)`.
///
/// Witnesses store grid indices. Rounding goes to the nearest grid point with
/// ties broken downward. Indices are not clamped to `[0, 1]`: partial payoff
/// sums of a normalized game may leave that interval, and clamping would void
/// the rounding-error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoundedPayoffGrid {
    eps: f64,
    n: usize,
    spacing: f64,
}

impl RoundedPayoffGrid {
    pub fn new(eps: f64, n: usize) -> Result<Self, DpError> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(DpError::BadEpsilon(eps));
        }
        let n = n.max(1);
        Ok(Self {
            eps,
            n,
            spacing: eps / (2.0 * n as f64),
        })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Number of grid points inside `[0, 1]`: `floor(2n / eps) + 1`.
    pub fn size(&self) -> usize {
        (2.0 * self.n as f64 / self.eps).floor() as usize + 1
    }

    /// The grid points inside `[0, 1]`.
    pub fn values(&self) -> Vec<f64> {
        (0..self.size()).map(|i| self.value(i as i64)).collect()
    }

    pub fn value(&self, index: i64) -> f64 {
        index as f64 * self.spacing
    }

    /// Index of the grid point nearest to `x`, ties downward.
    pub fn round_index(&self, x: f64) -> i64 {
        round_half_down(x / self.spacing)
    }

    pub fn round(&self, x: f64) -> f64 {
        self.value(self.round_index(x))
    }

    /// Index of the grid point nearest to `value(index) + delta`.
    pub fn shift_index(&self, index: i64, delta: f64) -> i64 {
        index + round_half_down(delta / self.spacing)
    }
}

fn round_half_down(q: f64) -> i64 {
    (q - 0.5).ceil() as i64
}
