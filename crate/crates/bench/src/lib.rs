//! Fixed inputs shared by the benchmark targets.

use tileforge_core::{DigitSet, IntMatrix};

pub fn dragon() -> (IntMatrix, DigitSet) {
    (
        IntMatrix::new(vec![vec![1, 1], vec![-1, 1]]).expect("square"),
        DigitSet::new(vec![vec![0, 0], vec![1, 0]]).expect("digits"),
    )
}

pub fn rectangle() -> (IntMatrix, DigitSet) {
    (
        IntMatrix::new(vec![vec![0, -2], vec![1, 0]]).expect("square"),
        DigitSet::new(vec![vec![0, 0], vec![1, 0]]).expect("digits"),
    )
}

pub fn stretched_interval() -> (IntMatrix, DigitSet) {
    (IntMatrix::scalar(2), DigitSet::scalars(&[0, 3]).expect("digits"))
}
