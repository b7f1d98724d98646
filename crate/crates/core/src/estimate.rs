/// A bracketing pair of depth counts.
///
/// `d_minus` counts only objects that contain the query point; `d_plus`
/// counts every object that contains it. Objects whose boundary passes within
/// `epsilon` of the query may move between the two.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DepthEstimate {
    pub d_minus: u32,
    pub d_plus: u32,
}

impl DepthEstimate {
    pub const ZERO: DepthEstimate = DepthEstimate {
        d_minus: 0,
        d_plus: 0,
    };

    pub fn new(d_minus: u32, d_plus: u32) -> Self {
        debug_assert!(d_minus <= d_plus);
        DepthEstimate { d_minus, d_plus }
    }

    /// Combine estimates of disjoint sub-scenes.
    pub fn merge(self, other: DepthEstimate) -> DepthEstimate {
        DepthEstimate {
            d_minus: self.d_minus + other.d_minus,
            d_plus: self.d_plus + other.d_plus,
        }
    }

    /// Combine signed under/over counts from a positive and a negative part,
    /// clamping the underestimate at zero. Depth is nonnegative, so clamping
    /// keeps `d_minus <= true depth` intact.
    pub fn from_signed(pos: SignedCounts, neg: SignedCounts) -> DepthEstimate {
        let lo = pos.under as i64 - neg.over as i64;
        let hi = pos.over as i64 - neg.under as i64;
        debug_assert!(hi >= 0 && hi >= lo);
        DepthEstimate {
            d_minus: lo.max(0) as u32,
            d_plus: hi.max(0) as u32,
        }
    }
}

/// Under/over counts against one sign class of a signed decomposition.
#[derive(Clone, Copy, Debug, Default)]
pub struct SignedCounts {
    pub under: u32,
    pub over: u32,
}

impl SignedCounts {
    pub fn add(&mut self, est: DepthEstimate) {
        self.under += est.d_minus;
        self.over += est.d_plus;
    }
}
