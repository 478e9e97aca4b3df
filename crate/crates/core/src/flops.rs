use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

/// Operation counts of a kernel run.
///
/// `flops` counts additions and multiplications only (a multiply-add pair is
/// 2). Divisions and square roots are tallied separately in `divs` and are
/// never part of `flops`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlopCounter {
    pub flops: u64,
    pub divs: u64,
}

impl FlopCounter {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, n: u64) {
        self.flops += n;
    }

    #[inline]
    pub fn div(&mut self, n: u64) {
        self.divs += n;
    }
}

impl AddAssign for FlopCounter {
    fn add_assign(&mut self, rhs: Self) {
        self.flops += rhs.flops;
        self.divs += rhs.divs;
    }
}

impl Add for FlopCounter {
    type Output = FlopCounter;

    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}
