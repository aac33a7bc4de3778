use std::fmt;

use serde::Serialize;

/// Where a bound came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// The object is zero.
    ExactZero,
    /// Factorization read off an elementary-tensor representation unchanged.
    CanonicalFactorization,
    /// Factorization rebalanced by the semidefinite program.
    SdpFactorization,
    /// Factorization found by alternating interface rebalancing.
    AlsFactorization,
    /// Schur factorization from a singular value decomposition.
    SvdFactorization,
    /// Schur factorization by rows (`a_i = row i`, `b_j = e_j`).
    RowFactorization,
    /// Schur factorization by columns.
    ColumnFactorization,
    /// Schur factorization from a Gram decomposition of an SDP iterate.
    GramFactorization,
    /// Value known in closed form and checked numerically.
    ClosedForm,
    /// Alternating maximization over amplified unit-ball inputs.
    Amplification,
    /// Input built from the dual states of the semidefinite program.
    SdpWitness,
    /// The swap matrix `Σ e_ij ⊗ e_ji`.
    SwapWitness,
    /// A single matrix unit.
    MatrixUnit,
}

/// Two-sided bound `lower ≤ value ≤ upper` with provenance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormBracket {
    pub lower: f64,
    pub upper: f64,
    pub lower_method: Method,
    pub upper_method: Method,
    pub tolerance: f64,
}

impl NormBracket {
    pub fn new(lower: f64, upper: f64, lower_method: Method, upper_method: Method, tolerance: f64) -> Self {
        Self { lower: lower.max(0.0), upper, lower_method, upper_method, tolerance }
    }

    pub fn zero(tolerance: f64) -> Self {
        Self::new(0.0, 0.0, Method::ExactZero, Method::ExactZero, tolerance)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// Width relative to the upper end; 0 when both ends are 0.
    pub fn relative_width(&self) -> f64 {
        if self.upper <= 0.0 {
            0.0
        } else {
            (self.width() / self.upper).max(0.0)
        }
    }

    /// Whether the width is within `tolerance` relative to the upper end.
    pub fn is_tight(&self) -> bool {
        self.relative_width() <= self.tolerance
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    /// Whether `x` lies in the bracket widened by `slack` relative to `x`.
    pub fn contains(&self, x: f64, slack: f64) -> bool {
        let s = slack * x.abs().max(f64::MIN_POSITIVE);
        self.lower - s <= x && x <= self.upper + s
    }

    /// Relative distance between two brackets; 0 when they intersect.
    pub fn gap_to(&self, other: &NormBracket) -> f64 {
        let gap = (self.lower - other.upper).max(other.lower - self.upper).max(0.0);
        let scale = self.upper.max(other.upper);
        if scale <= 0.0 {
            0.0
        } else {
            gap / scale
        }
    }

    pub fn raise_lower(&mut self, value: f64, method: Method) {
        if value > self.lower {
            self.lower = value;
            self.lower_method = method;
        }
    }

    pub fn lower_upper(&mut self, value: f64, method: Method) {
        if value < self.upper {
            self.upper = value;
            self.upper_method = method;
        }
    }

    /// The invariant `0 ≤ lower ≤ upper (1 + tolerance)`.
    pub fn is_consistent(&self) -> bool {
        self.lower >= 0.0 && self.lower <= self.upper * (1.0 + self.tolerance) + 1e-300
    }
}

impl fmt::Display for NormBracket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.12e}, {:.12e}]", self.lower, self.upper)
    }
}
