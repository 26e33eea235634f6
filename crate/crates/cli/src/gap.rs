/// How much of the distance between the non-adaptive rate and the lower
/// bound a scheme closes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapReport {
    pub m_ratio: f64,
    pub nonadaptive: f64,
    pub scheme: f64,
    pub bound: f64,
    /// `None` when the non-adaptive rate already meets the bound.
    pub gap_reduction: Option<f64>,
}

impl GapReport {
    pub fn new(m_ratio: f64, nonadaptive: f64, scheme: f64, bound: f64) -> Self {
        GapReport {
            m_ratio,
            nonadaptive,
            scheme,
            bound,
            gap_reduction: gap_reduction(nonadaptive, scheme, bound),
        }
    }
}

/// `(r_na - r_scheme) / (r_na - bound)`, undefined unless `r_na > bound`.
pub fn gap_reduction(r_na: f64, r_scheme: f64, bound: f64) -> Option<f64> {
    // differences below this are rounding noise, not a gap
    const MIN_GAP: f64 = 1e-9;
    if r_na - bound > MIN_GAP {
        Some((r_na - r_scheme) / (r_na - bound))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert!((gap_reduction(3.225, 3.0, 2.775).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(gap_reduction(3.0, 3.0, 2.0), Some(0.0));
        assert_eq!(gap_reduction(3.0, 2.0, 2.0), Some(1.0));
        assert_eq!(gap_reduction(2.0, 2.0, 2.0), None);
        assert_eq!(gap_reduction(1.0, 1.0, 2.0), None);
        let g = GapReport::new(0.1, 3.0, 2.5, 2.0);
        assert_eq!(g.gap_reduction, Some(0.5));
    }
}
