//! Uniform collocation lattice with a seeded train/test split.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::simulate::rng::path_stream;

/// Points `(t_j, s_i) = (j/n_t, i/n_s)` for `j = 1..=n_t`, `i = 1..=n_s`,
/// stored with `t` as the outer index.
#[derive(Debug, Clone, PartialEq)]
pub struct CollocationGrid {
    pub n_s: usize,
    pub n_t: usize,
    pub points: Vec<(f64, f64)>,
    /// Ascending indices into `points`.
    pub train: Vec<usize>,
    /// Ascending indices into `points`, disjoint from `train`.
    pub test: Vec<usize>,
}

impl CollocationGrid {
    pub fn train_points(&self) -> Vec<(f64, f64)> {
        self.train.iter().map(|&i| self.points[i]).collect()
    }

    pub fn test_points(&self) -> Vec<(f64, f64)> {
        self.test.iter().map(|&i| self.points[i]).collect()
    }
}

/// Builds the lattice and assigns `round(split_fraction · n)` random points
/// to the training set.
pub fn make_grid(
    n_s: usize,
    n_t: usize,
    split_fraction: f64,
    seed: u64,
) -> Result<CollocationGrid> {
    if n_s == 0 || n_t == 0 {
        return Err(Error::invalid("grid", "n_s and n_t must be at least 1"));
    }
    if !(0.0..=1.0).contains(&split_fraction) {
        return Err(Error::OutOfRange {
            name: "split_fraction",
            value: split_fraction,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let mut points = Vec::with_capacity(n_s * n_t);
    for j in 1..=n_t {
        for i in 1..=n_s {
            points.push((j as f64 / n_t as f64, i as f64 / n_s as f64));
        }
    }
    let n = points.len();
    let n_train = (split_fraction * n as f64).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut path_stream(seed, 0x6772_6964));
    let mut train = order[..n_train].to_vec();
    let mut test = order[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok(CollocationGrid {
        n_s,
        n_t,
        points,
        train,
        test,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_by_ten() {
        let g = make_grid(10, 10, 0.8, 42).unwrap();
        assert_eq!(g.points.len(), 100);
        assert_eq!((g.train.len(), g.test.len()), (80, 20));
        let mut all: Vec<usize> = g.train.iter().chain(&g.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
        assert_eq!(g.points[0], (0.1, 0.1));
        assert_eq!(g.points[99], (1.0, 1.0));
        assert_eq!(g, make_grid(10, 10, 0.8, 42).unwrap());
    }

    #[test]
    fn single_point() {
        let g = make_grid(1, 1, 0.8, 0).unwrap();
        assert_eq!(g.points, vec![(1.0, 1.0)]);
        assert_eq!(g.train, vec![0]);
    }

    #[test]
    fn invalid_inputs() {
        assert!(make_grid(0, 3, 0.8, 0).is_err());
        assert!(make_grid(3, 3, 1.5, 0).is_err());
    }
}
