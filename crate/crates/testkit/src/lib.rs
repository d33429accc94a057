//! Random corpora and queries, plus brute-force oracles that evaluate them
//! straight from raw record text and reference lists. Nothing here goes
//! through the index or the executor.

pub mod gen;
pub mod graph_oracle;
pub mod text_oracle;

/// Optimal-string-alignment distance by direct recursion over suffixes,
/// memoized. Deliberately shaped differently from the library's row DP.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut memo = vec![vec![usize::MAX; b.len() + 1]; a.len() + 1];
    fn go(a: &[char], b: &[char], i: usize, j: usize, memo: &mut [Vec<usize>]) -> usize {
        if memo[i][j] != usize::MAX {
            return memo[i][j];
        }
        let best = if i == a.len() {
            b.len() - j
        } else if j == b.len() {
            a.len() - i
        } else {
            let mut best = go(a, b, i + 1, j, memo) + 1;
            best = best.min(go(a, b, i, j + 1, memo) + 1);
            best = best.min(go(a, b, i + 1, j + 1, memo) + usize::from(a[i] != b[j]));
            if i + 1 < a.len() && j + 1 < b.len() && a[i] == b[j + 1] && a[i + 1] == b[j] {
                best = best.min(go(a, b, i + 2, j + 2, memo) + 1);
            }
            best
        };
        memo[i][j] = best;
        best
    }
    go(&a, &b, 0, 0, &mut memo)
}

/// Largest h with at least h counts ≥ h, by trying every h.
pub fn brute_h_index(counts: &[usize]) -> usize {
    (0..=counts.len())
        .filter(|&h| counts.iter().filter(|&&c| c >= h).count() >= h)
        .max()
        .unwrap_or(0)
}

/// Largest g ≤ n whose top-g citation sum reaches g², by trying every g.
pub fn brute_g_index(counts: &[usize]) -> usize {
    let mut sorted = counts.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    (0..=counts.len())
        .filter(|&g| sorted[..g].iter().sum::<usize>() >= g * g)
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_examples() {
        assert_eq!(edit_distance("eisenstein", "einstein"), 2);
        assert_eq!(edit_distance("eisenstein", "eisenman"), 4);
        assert_eq!(edit_distance("ab", "ba"), 1);
        assert_eq!(edit_distance("ca", "abc"), 3);
        assert_eq!(edit_distance("", ""), 0);
    }

    #[test]
    fn indices() {
        assert_eq!(brute_h_index(&[2, 3, 1]), 2);
        assert_eq!(brute_g_index(&[2, 3, 1]), 2);
        assert_eq!(brute_h_index(&[]), 0);
    }
}
