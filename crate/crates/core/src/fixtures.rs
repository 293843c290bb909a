//! The eight-item running example (features L, C, E, S; class H), shared by
//! unit tests, integration tests and the CLI tests.

use crate::dataset::{binarize, parse_csv_str, BinDataset};

pub const EXAMPLE1_CSV: &str = "L,C,E,S,H
1,0,1,0,0
1,0,0,1,0
0,0,1,0,1
1,1,0,0,0
0,0,0,1,1
1,1,1,1,0
0,1,1,0,0
0,0,1,1,1
";

pub fn example1() -> BinDataset {
    binarize(&parse_csv_str(EXAMPLE1_CSV).expect("fixture parses"), 2).expect("fixture binarizes")
}

/// Feature indices in [`example1`].
pub const L: usize = 0;
pub const C: usize = 1;
pub const E: usize = 2;
pub const S: usize = 3;
