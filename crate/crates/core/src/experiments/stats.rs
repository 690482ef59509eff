//! Paired comparisons between campaigns.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignTest {
    /// Pairs with `a < b`.
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
    /// One-sided exact binomial p-value of at least `wins` successes among
    /// the untied pairs under a fair coin.
    pub p_value: f64,
}

/// Upper tail `P[X ≥ wins]` for `X ~ Binomial(n, 1/2)`.
pub fn binomial_upper_tail(n: usize, wins: usize) -> f64 {
    if wins == 0 {
        return 1.0;
    }
    if wins > n {
        return 0.0;
    }
    // log pmf by the recurrence C(n, i+1) = C(n, i)(n−i)/(i+1)
    let ln_half = -(n as f64) * std::f64::consts::LN_2;
    let mut ln_c = 0.0;
    let mut tail = 0.0;
    for i in 0..=n {
        if i >= wins {
            tail += (ln_c + ln_half).exp();
        }
        if i < n {
            ln_c += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
        }
    }
    tail.min(1.0)
}

/// Sign test of the hypothesis that `a` tends to be smaller than `b`. Pairs
/// with a missing side are skipped.
pub fn paired_sign_test(a: &[Option<f64>], b: &[Option<f64>]) -> SignTest {
    let (mut wins, mut losses, mut ties) = (0, 0, 0);
    for (x, y) in a.iter().zip(b) {
        let (Some(x), Some(y)) = (x, y) else { continue };
        if x < y {
            wins += 1;
        } else if x > y {
            losses += 1;
        } else {
            ties += 1;
        }
    }
    SignTest { wins, losses, ties, p_value: binomial_upper_tail(wins + losses, wins) }
}

/// Median of the finite values, `None` if there are none.
pub fn median(values: &[f64]) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}
