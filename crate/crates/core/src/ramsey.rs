//! Monochromatic subsets of pair colorings.

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// A coloring of the 2-subsets of `{1..n}` with colors `1..=colors`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairColoring {
    n: usize,
    colors: usize,
    table: Vec<usize>,
}

impl PairColoring {
    pub fn from_fn(n: usize, colors: usize, color: impl Fn(usize, usize) -> usize) -> Result<Self> {
        let mut table = vec![0; n * n];
        for i in 1..=n {
            for j in i + 1..=n {
                let c = color(i, j);
                if c == 0 || c > colors {
                    return Err(Error::Structure(format!("pair {{{i},{j}}} has color {c} outside 1..={colors}")));
                }
                table[(i - 1) * n + (j - 1)] = c;
                table[(j - 1) * n + (i - 1)] = c;
            }
        }
        Ok(PairColoring { n, colors, table })
    }

    /// The coloring whose `b`-th bit (pairs in lexicographic order) selects
    /// color 2 over color 1.
    pub fn from_bits(n: usize, bits: u64) -> Self {
        let mut index = vec![0; n * n];
        let mut b = 0;
        for i in 1..=n {
            for j in i + 1..=n {
                index[(i - 1) * n + (j - 1)] = b;
                b += 1;
            }
        }
        Self::from_fn(n, 2, |i, j| 1 + ((bits >> index[(i - 1) * n + (j - 1)]) & 1) as usize)
            .expect("two colors")
    }

    /// Pairs adjacent on the cycle `1-2-..-n-1` get color 1, the rest color 2.
    pub fn cycle(n: usize) -> Self {
        Self::from_fn(n, 2, |i, j| if j - i == 1 || (i == 1 && j == n) { 1 } else { 2 }).expect("two colors")
    }

    /// Colors pairs `i < j` by how `values[i-1], values[j-1]` compare:
    /// 1 increasing, 2 decreasing, 3 equal.
    pub fn by_order<T: Ord>(values: &[T]) -> Self {
        Self::from_fn(values.len(), 3, |i, j| match values[i - 1].cmp(&values[j - 1]) {
            Ordering::Less => 1,
            Ordering::Greater => 2,
            Ordering::Equal => 3,
        })
        .expect("three colors")
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn colors(&self) -> usize {
        self.colors
    }

    pub fn color(&self, i: usize, j: usize) -> usize {
        self.table[(i - 1) * self.n + (j - 1)]
    }
}

/// The lexicographically least `m`-subset of `{1..n}` whose pairs all share
/// one color, with that color (`0` when `m < 2`).
pub fn mono_subset(coloring: &PairColoring, m: usize) -> Option<(Vec<usize>, usize)> {
    if m > coloring.n {
        return None;
    }
    let mut chosen = Vec::with_capacity(m);
    extend(coloring, m, 1, 0, &mut chosen)
}

fn extend(c: &PairColoring, m: usize, from: usize, color: usize, chosen: &mut Vec<usize>) -> Option<(Vec<usize>, usize)> {
    if chosen.len() == m {
        return Some((chosen.clone(), color));
    }
    let need = m - chosen.len();
    for v in from..=c.n + 1 - need {
        let mut col = color;
        let fits = chosen.iter().all(|&u| {
            let k = c.color(u, v);
            if col == 0 {
                col = k;
            }
            k == col
        });
        if fits {
            chosen.push(v);
            if let Some(found) = extend(c, m, v + 1, col, chosen) {
                return Some(found);
            }
            chosen.pop();
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_coloring() {
        let c = PairColoring::from_fn(5, 1, |_, _| 1).unwrap();
        assert_eq!(mono_subset(&c, 3), Some((vec![1, 2, 3], 1)));
    }

    #[test]
    fn pentagon_has_no_triangle() {
        assert_eq!(mono_subset(&PairColoring::cycle(5), 3), None);
        assert!(mono_subset(&PairColoring::cycle(6), 3).is_some());
    }

    #[test]
    fn order_coloring() {
        let c = PairColoring::by_order(&[3, 1, 2, 5, 4]);
        assert_eq!(mono_subset(&c, 3), Some((vec![2, 3, 4], 1)));
        assert_eq!(c.color(1, 2), 2);
    }

    #[test]
    fn rejects_bad_colors() {
        assert!(PairColoring::from_fn(3, 2, |_, _| 3).is_err());
    }
}
