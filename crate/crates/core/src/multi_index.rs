//! Multi-indices `α ∈ ℕ₀^d` in graded lexicographic order.

/// All `α` with `|α|₁ ≤ k`, ordered by total degree, then lexicographically
/// descending in the leading coordinate (`(1,0)` before `(0,1)`).
pub fn multi_indices(d: usize, k: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for total in 0..=k {
        let mut cur = vec![0u32; d];
        fill(d, 0, total, &mut cur, &mut out);
    }
    out
}

fn fill(d: usize, pos: usize, remaining: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if pos + 1 == d {
        cur[pos] = remaining;
        out.push(cur.clone());
        return;
    }
    for v in (0..=remaining).rev() {
        cur[pos] = v;
        fill(d, pos + 1, remaining - v, cur, out);
    }
    cur[pos] = 0;
}

pub fn order(alpha: &[u32]) -> u32 {
    alpha.iter().sum()
}

/// `α! = α₁!·…·α_d!`
pub fn factorial(alpha: &[u32]) -> f64 {
    alpha.iter().map(|&a| factorial_u(a)).product()
}

pub fn factorial_u(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, j| acc * j as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_binomial() {
        // #{α ∈ ℕ₀^d : |α| ≤ k} = C(k + d, d)
        assert_eq!(multi_indices(1, 4).len(), 5);
        assert_eq!(multi_indices(2, 2).len(), 6);
        assert_eq!(multi_indices(3, 3).len(), 20);
    }

    #[test]
    fn graded_order() {
        let m = multi_indices(2, 1);
        assert_eq!(m, vec![vec![0, 0], vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn factorials() {
        assert_eq!(factorial(&[2, 3]), 12.0);
        assert_eq!(factorial_u(0), 1.0);
    }
}
