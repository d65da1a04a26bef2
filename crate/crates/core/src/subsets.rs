//! Lexicographic enumeration of fixed-size index subsets.

/// Binomial coefficient C(n, k), saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Total number of subsets with sizes in `lo..=hi` drawn from `m` items.
pub fn subset_count(m: usize, lo: usize, hi: usize) -> u128 {
    (lo..=hi).fold(0u128, |acc, j| acc.saturating_add(binomial(m, j)))
}

/// Iterator over all `k`-subsets of `0..m` in lexicographic order.
///
/// Yields each subset as a freshly allocated sorted `Vec<usize>`; use
/// [`Subsets::advance`] with [`Subsets::current`] to avoid the allocation.
#[derive(Debug, Clone)]
pub struct Subsets {
    m: usize,
    idx: Vec<usize>,
    started: bool,
    done: bool,
}

impl Subsets {
    pub fn new(m: usize, k: usize) -> Self {
        Subsets {
            m,
            idx: (0..k).collect(),
            started: false,
            done: k > m,
        }
    }

    /// Step to the next subset; returns false once exhausted.
    pub fn advance(&mut self) -> bool {
        if self.done {
            return false;
        }
        if !self.started {
            self.started = true;
            return true;
        }
        let k = self.idx.len();
        let mut i = k;
        while i > 0 {
            i -= 1;
            if self.idx[i] < self.m - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                return true;
            }
        }
        self.done = true;
        false
    }

    pub fn current(&self) -> &[usize] {
        &self.idx
    }
}

impl Iterator for Subsets {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.advance() {
            Some(self.idx.clone())
        } else {
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(12, 4), 495);
        assert_eq!(binomial(3, 4), 0);
        assert!(binomial(1000, 500) > 0);
    }

    #[test]
    fn subsets_are_lexicographic_and_complete() {
        let all: Vec<_> = Subsets::new(4, 2).collect();
        assert_eq!(
            all,
            vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]
        );
        assert_eq!(Subsets::new(7, 3).count() as u128, binomial(7, 3));
    }

    #[test]
    fn empty_and_oversized() {
        let empty: Vec<_> = Subsets::new(3, 0).collect();
        assert_eq!(empty, vec![Vec::<usize>::new()]);
        assert_eq!(Subsets::new(2, 3).count(), 0);
    }
}
