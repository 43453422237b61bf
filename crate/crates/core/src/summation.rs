//! Compensated summation and Wynn's epsilon acceleration.
//!
//! The derivative recurrences and the series evaluations all sum terms of
//! alternating sign, so plain accumulation is never used for them. The
//! epsilon algorithm computes the diagonal Padé approximants of a power
//! series from its partial sums; it is what lets an 80-term expansion be
//! used near (or past) its radius of convergence.

use alloc::vec::Vec;

use crate::math::abs;

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub const fn new() -> Self {
        Self { sum: 0.0, compensation: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if abs(self.sum) >= abs(x) {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl core::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator of terms.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    terms.into_iter().collect::<CompensatedSum>().value()
}

/// Partial sums `S_0 = t_0, S_1 = t_0 + t_1, ...`, each compensated.
pub fn partial_sums(terms: &[f64]) -> Vec<f64> {
    let mut acc = CompensatedSum::new();
    terms
        .iter()
        .map(|&t| {
            acc.add(t);
            acc.value()
        })
        .collect()
}

/// Arithmetic needed by the epsilon table.
pub trait EpsilonScalar: Clone {
    fn sub(&self, other: &Self) -> Self;
    fn add(&self, other: &Self) -> Self;
    /// `None` when the value is zero (or the reciprocal is not representable).
    fn recip(&self) -> Option<Self>;
    fn to_f64(&self) -> f64;
}

impl EpsilonScalar for f64 {
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn recip(&self) -> Option<Self> {
        let r = 1.0 / self;
        (r.is_finite() && *self != 0.0).then_some(r)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

/// Result of an accelerated summation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Accelerated {
    pub value: f64,
    /// Absolute error estimate (spread of the last estimates in the chosen column).
    pub error: f64,
    /// Even column of the epsilon table the value was taken from (0 = plain sum).
    pub column: usize,
}

/// Wynn's epsilon algorithm applied to a sequence of partial sums.
///
/// Every even column `ε_{2k}` is a sequence of Padé approximants; the
/// estimate returned is the last entry of the column whose last two entries
/// (and predecessor column) agree best. Column 0 is the plain partial sum,
/// so an already converged series is returned unchanged.
pub fn wynn_epsilon<T: EpsilonScalar>(sums: &[T]) -> Accelerated {
    let m = sums.len();
    if m == 0 {
        return Accelerated { value: 0.0, error: 0.0, column: 0 };
    }
    if m == 1 {
        return Accelerated { value: sums[0].to_f64(), error: f64::INFINITY, column: 0 };
    }
    let spread = |col: &[T]| -> f64 {
        let n = col.len();
        abs(col[n - 1].to_f64() - col[n - 2].to_f64())
    };

    let mut best = Accelerated {
        value: sums[m - 1].to_f64(),
        error: spread(sums),
        column: 0,
    };
    if best.error == 0.0 {
        return best;
    }

    // prev = ε_{k-2}, cur = ε_{k-1}; both indexed from the start of the sequence.
    let mut prev: Option<Vec<T>> = None;
    let mut cur: Vec<T> = sums.to_vec();
    let mut last_even_value = best.value;
    let mut k = 0usize;
    while cur.len() > 1 {
        k += 1;
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let diff = cur[i + 1].sub(&cur[i]);
            let Some(r) = diff.recip() else {
                // Equal entries in an even column mean it has converged.
                let col = k - 1;
                if col % 2 == 0 && col > 0 {
                    let value = cur[cur.len() - 1].to_f64();
                    let err = spread(&cur);
                    if value.is_finite() && err <= best.error {
                        return Accelerated { value, error: err, column: col };
                    }
                }
                return best;
            };
            let v = match &prev {
                Some(p) => p[i + 1].add(&r),
                None => r,
            };
            next.push(v);
        }
        prev = Some(cur);
        cur = next;
        if k % 2 == 0 && cur.len() >= 2 {
            let value = cur[cur.len() - 1].to_f64();
            if !value.is_finite() {
                break;
            }
            let err = spread(&cur).max(abs(value - last_even_value));
            if err < best.error {
                best = Accelerated { value, error: err, column: k };
            }
            last_even_value = value;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::ln;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let terms = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(compensated_sum(terms), 2.0);
    }

    #[test]
    fn wynn_accelerates_alternating_log_series() {
        // ln 2 = 1 - 1/2 + 1/3 - ...
        let terms: Vec<f64> = (1..=30)
            .map(|n| if n % 2 == 1 { 1.0 / n as f64 } else { -1.0 / n as f64 })
            .collect();
        let sums = partial_sums(&terms);
        let plain = (sums[29] - ln(2.0)).abs();
        let acc = wynn_epsilon(&sums);
        assert!(plain > 1e-2);
        assert!((acc.value - ln(2.0)).abs() < 1e-12, "{acc:?}");
    }

    #[test]
    fn wynn_sums_divergent_geometric_series() {
        // 1 - 2 + 4 - 8 + ... is the Padé value 1/(1+2) = 1/3.
        let terms: Vec<f64> = (0..12).map(|n| (-2.0f64).powi(n)).collect();
        let acc = wynn_epsilon(&partial_sums(&terms));
        assert!((acc.value - 1.0 / 3.0).abs() < 1e-12, "{acc:?}");
    }

    #[test]
    fn converged_sequence_is_left_alone() {
        let sums = [1.0, 1.5, 1.5, 1.5];
        let acc = wynn_epsilon(&sums);
        assert_eq!(acc.value, 1.5);
        assert_eq!(acc.column, 0);
    }
}
