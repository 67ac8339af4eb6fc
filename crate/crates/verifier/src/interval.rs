//! Closed intervals with optional infinite endpoints.

use vspec_core::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Interval<T> {
    pub lo: Option<T>,
    pub hi: Option<T>,
}

impl<T: Scalar> Interval<T> {
    pub fn unbounded() -> Self {
        Interval { lo: None, hi: None }
    }

    pub fn point(v: T) -> Self {
        Interval { lo: Some(v.clone()), hi: Some(v) }
    }

    pub fn new(lo: Option<T>, hi: Option<T>) -> Self {
        Interval { lo, hi }
    }

    pub fn add(&self, other: &Interval<T>) -> Interval<T> {
        let sum = |a: &Option<T>, b: &Option<T>| match (a, b) {
            (Some(a), Some(b)) => Some(a.clone() + b.clone()),
            _ => None,
        };
        Interval { lo: sum(&self.lo, &other.lo), hi: sum(&self.hi, &other.hi) }
    }

    pub fn scale(&self, k: &T) -> Interval<T> {
        let mul = |v: &Option<T>| v.as_ref().map(|v| v.clone() * k.clone());
        if k.is_negative() {
            Interval { lo: mul(&self.hi), hi: mul(&self.lo) }
        } else if k.is_zero() {
            Interval::point(T::zero())
        } else {
            Interval { lo: mul(&self.lo), hi: mul(&self.hi) }
        }
    }

    pub fn shift(&self, k: &T) -> Interval<T> {
        self.add(&Interval::point(k.clone()))
    }

    pub fn relu(&self) -> Interval<T> {
        let clamp = |v: &Option<T>| v.as_ref().map(|v| T::max_of(v.clone(), T::zero()));
        Interval { lo: Some(self.lo.as_ref().map_or(T::zero(), |_| clamp(&self.lo).unwrap())), hi: clamp(&self.hi) }
    }

    /// Upper bound at most zero.
    pub fn nonpositive(&self) -> bool {
        self.hi.as_ref().is_some_and(|h| !h.is_pos())
    }

    /// Lower bound at least zero.
    pub fn nonnegative(&self) -> bool {
        self.lo.as_ref().is_some_and(|l| !l.is_neg())
    }

    pub fn contains(&self, v: &T) -> bool {
        self.lo.as_ref().is_none_or(|l| l <= v) && self.hi.as_ref().is_none_or(|h| v <= h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use vspec_core::scalar::rat;
    use vspec_core::Rational;

    #[test]
    fn affine_endpoint_arithmetic() {
        let b = Interval::new(Some(rat(-13, 4)), Some(rat(13, 4)));
        let z = b.scale(&rat(-2, 1)).add(&b);
        assert_eq!(z, Interval::new(Some(rat(-39, 4)), Some(rat(39, 4))));
        assert!(!z.nonpositive() && !z.nonnegative());
    }

    #[test]
    fn relu_clamps() {
        let i: Interval<Rational> = Interval::new(Some(rat(-1, 1)), Some(rat(2, 1)));
        assert_eq!(i.relu(), Interval::new(Some(rat(0, 1)), Some(rat(2, 1))));
        assert_eq!(Interval::<Rational>::unbounded().relu().lo, Some(rat(0, 1)));
    }

    #[test]
    fn float_instantiation() {
        let i = Interval::new(Some(-1.5f64), Some(0.5));
        assert_eq!(i.scale(&-2.0).hi, Some(3.0));
    }
}
