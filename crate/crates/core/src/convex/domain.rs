use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    Unbounded,
    Closed(f64),
    Open(f64),
}

impl Bound {
    pub fn value(self) -> Option<f64> {
        match self {
            Bound::Unbounded => None,
            Bound::Closed(x) | Bound::Open(x) => Some(x),
        }
    }
}

/// An interval of the real line, possibly unbounded, with per-side
/// open/closed flags.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: Bound,
    pub upper: Bound,
}

impl Interval {
    pub const fn new(lower: Bound, upper: Bound) -> Self {
        Interval { lower, upper }
    }

    pub const fn real_line() -> Self {
        Interval::new(Bound::Unbounded, Bound::Unbounded)
    }

    pub const fn closed(a: f64, b: f64) -> Self {
        Interval::new(Bound::Closed(a), Bound::Closed(b))
    }

    pub const fn open(a: f64, b: f64) -> Self {
        Interval::new(Bound::Open(a), Bound::Open(b))
    }

    pub const fn point(x: f64) -> Self {
        Interval::closed(x, x)
    }

    pub fn contains(&self, x: f64) -> bool {
        if x.is_nan() {
            return false;
        }
        let above = match self.lower {
            Bound::Unbounded => true,
            Bound::Closed(a) => x >= a,
            Bound::Open(a) => x > a,
        };
        let below = match self.upper {
            Bound::Unbounded => true,
            Bound::Closed(b) => x <= b,
            Bound::Open(b) => x < b,
        };
        above && below
    }

    pub fn contains_interior(&self, x: f64) -> bool {
        if x.is_nan() {
            return false;
        }
        self.lower.value().is_none_or(|a| x > a) && self.upper.value().is_none_or(|b| x < b)
    }

    pub fn has_nonempty_interior(&self) -> bool {
        match (self.lower.value(), self.upper.value()) {
            (Some(a), Some(b)) => a < b,
            _ => true,
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.lower.value().is_some() && self.upper.value().is_some()
    }

    /// Intersection of two intervals; the stricter bound wins on ties.
    pub fn intersect(&self, other: &Interval) -> Interval {
        fn pick_lower(a: Bound, b: Bound) -> Bound {
            match (a.value(), b.value()) {
                (None, _) => b,
                (_, None) => a,
                (Some(x), Some(y)) if x > y => a,
                (Some(x), Some(y)) if y > x => b,
                _ => {
                    if matches!(a, Bound::Open(_)) {
                        a
                    } else {
                        b
                    }
                }
            }
        }
        fn pick_upper(a: Bound, b: Bound) -> Bound {
            match (a.value(), b.value()) {
                (None, _) => b,
                (_, None) => a,
                (Some(x), Some(y)) if x < y => a,
                (Some(x), Some(y)) if y < x => b,
                _ => {
                    if matches!(a, Bound::Open(_)) {
                        a
                    } else {
                        b
                    }
                }
            }
        }
        Interval::new(pick_lower(self.lower, other.lower), pick_upper(self.upper, other.upper))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn open_and_closed_membership() {
        let iv = Interval::new(Bound::Unbounded, Bound::Open(1.0));
        assert!(iv.contains(-1e9));
        assert!(!iv.contains(1.0));
        assert!(iv.contains_interior(0.999));
        let c = Interval::closed(-1.0, 1.0);
        assert!(c.contains(1.0) && !c.contains_interior(1.0));
        assert!(!Interval::point(0.0).has_nonempty_interior());
    }

    #[test]
    fn intersection_prefers_open_on_ties() {
        let a = Interval::new(Bound::Closed(0.0), Bound::Unbounded);
        let b = Interval::new(Bound::Open(0.0), Bound::Open(2.0));
        let c = a.intersect(&b);
        assert_eq!(c, Interval::new(Bound::Open(0.0), Bound::Open(2.0)));
    }
}
