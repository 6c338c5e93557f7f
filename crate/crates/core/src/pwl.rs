//! Continuous piecewise-linear functions and right-continuous step functions on `[0, ∞)`.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::rational::{format_rational, pair_list, rationals_from_numbers, Q};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PwlError {
    #[error("argument {0} lies outside the domain [0, ∞)")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("pseudo-inverse is unbounded at {0}")]
    Unbounded(String),
    #[error("malformed function: {0}")]
    Malformed(String),
}

/// A continuous piecewise-linear function on `[0, ∞)`.
///
/// Stored as its kinks `(x, f(x))` starting at `x = 0` plus the slope after the last kink.
/// The representation is canonical: no stored point lies on the line through its neighbours,
/// so two functions are equal exactly when their representations are.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PwlFn {
    points: Vec<(Q, Q)>,
    final_slope: Q,
}

impl PwlFn {
    pub fn new(points: Vec<(Q, Q)>, final_slope: Q) -> Result<Self, PwlError> {
        match points.first() {
            None => return Err(PwlError::Malformed("no breakpoints".into())),
            Some((x, _)) if !x.is_zero() => {
                return Err(PwlError::Malformed(format!("first breakpoint at {} instead of 0", format_rational(x))))
            }
            _ => {}
        }
        if points.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(PwlError::Malformed("breakpoints are not strictly increasing".into()));
        }
        Ok(Self::canonical(points, final_slope))
    }

    fn canonical(points: Vec<(Q, Q)>, final_slope: Q) -> Self {
        let mut kept: Vec<(Q, Q)> = Vec::with_capacity(points.len());
        for p in points {
            while kept.len() >= 2 {
                let (a, b) = (&kept[kept.len() - 2], &kept[kept.len() - 1]);
                if slope(a, b) == slope(b, &p) {
                    kept.pop();
                } else {
                    break;
                }
            }
            kept.push(p);
        }
        while kept.len() >= 2 && slope(&kept[kept.len() - 2], &kept[kept.len() - 1]) == final_slope {
            kept.pop();
        }
        PwlFn { points: kept, final_slope }
    }

    pub fn constant(c: Q) -> Self {
        PwlFn { points: vec![(Q::zero(), c)], final_slope: Q::zero() }
    }

    pub fn linear(intercept: Q, slope: Q) -> Self {
        PwlFn { points: vec![(Q::zero(), intercept)], final_slope: slope }
    }

    pub fn identity() -> Self {
        Self::linear(Q::zero(), Q::one())
    }

    /// Interpolates `f` through `xs`, which must contain 0 and every kink of `f`.
    pub fn sample(xs: impl IntoIterator<Item = Q>, f: impl Fn(&Q) -> Q) -> Self {
        let xs: BTreeSet<Q> = xs.into_iter().collect();
        assert!(xs.first().is_some_and(|x| x.is_zero()), "sample points must start at 0");
        let last = xs.last().unwrap().clone();
        let beyond = &last + Q::one();
        let points: Vec<(Q, Q)> = xs.into_iter().map(|x| {
            let y = f(&x);
            (x, y)
        }).collect();
        let final_slope = f(&beyond) - &points.last().unwrap().1;
        Self::canonical(points, final_slope)
    }

    pub fn points(&self) -> &[(Q, Q)] {
        &self.points
    }

    pub fn final_slope(&self) -> &Q {
        &self.final_slope
    }

    /// Number of kinks, not counting the origin.
    pub fn num_breakpoints(&self) -> usize {
        self.points.len() - 1
    }

    pub fn breakpoint_xs(&self) -> impl Iterator<Item = &Q> {
        self.points.iter().skip(1).map(|p| &p.0)
    }

    pub fn last_x(&self) -> &Q {
        &self.points.last().unwrap().0
    }

    pub fn eval(&self, x: &Q) -> Result<Q, PwlError> {
        if x.is_negative() {
            return Err(PwlError::Domain(format_rational(x)));
        }
        Ok(self.at(x))
    }

    /// Like [`eval`](Self::eval) for arguments known to be non-negative.
    pub fn at(&self, x: &Q) -> Q {
        let i = self.points.partition_point(|p| p.0 <= *x);
        let i = i.max(1) - 1;
        let (x0, y0) = &self.points[i];
        let s = self.slope_from(i);
        y0 + s * (x - x0)
    }

    /// Slope of the piece starting at stored point `i`.
    fn slope_from(&self, i: usize) -> Q {
        if i + 1 < self.points.len() {
            slope(&self.points[i], &self.points[i + 1])
        } else {
            self.final_slope.clone()
        }
    }

    /// Right derivative at `x`.
    pub fn right_slope(&self, x: &Q) -> Q {
        let i = self.points.partition_point(|p| p.0 <= *x).max(1) - 1;
        self.slope_from(i)
    }

    /// Slopes of all pieces in order, the last one being the final slope.
    pub fn slopes(&self) -> Vec<Q> {
        (0..self.points.len()).map(|i| self.slope_from(i)).collect()
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.slopes().iter().all(|s| !s.is_negative())
    }

    pub fn scale(&self, c: &Q) -> PwlFn {
        linear_combine(c, self, &Q::zero(), self)
    }
}

fn slope(a: &(Q, Q), b: &(Q, Q)) -> Q {
    (&b.1 - &a.1) / (&b.0 - &a.0)
}

impl fmt::Display for PwlFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pts: Vec<String> = self
            .points
            .iter()
            .map(|(x, y)| format!("({}, {})", format_rational(x), format_rational(y)))
            .collect();
        write!(f, "[{}] then slope {}", pts.join(", "), format_rational(&self.final_slope))
    }
}

fn union_xs<'a>(fs: impl IntoIterator<Item = &'a PwlFn>) -> BTreeSet<Q> {
    let mut xs = BTreeSet::new();
    for f in fs {
        xs.extend(f.points.iter().map(|p| p.0.clone()));
    }
    xs
}

/// Points strictly inside pieces (and on the final ray) where `f - g` changes sign.
fn crossings(f: &PwlFn, g: &PwlFn) -> BTreeSet<Q> {
    let xs: Vec<Q> = union_xs([f, g]).into_iter().collect();
    let mut out = BTreeSet::new();
    let diff = |x: &Q| f.at(x) - g.at(x);
    for w in xs.windows(2) {
        let (d0, d1) = (diff(&w[0]), diff(&w[1]));
        if (d0.is_negative() && d1.is_positive()) || (d0.is_positive() && d1.is_negative()) {
            out.insert(&w[0] + &d0 / (&d0 - &d1) * (&w[1] - &w[0]));
        }
    }
    let last = xs.last().unwrap();
    let d = diff(last);
    let s = &f.final_slope - &g.final_slope;
    if (d.is_negative() && s.is_positive()) || (d.is_positive() && s.is_negative()) {
        out.insert(last - d / s);
    }
    out
}

pub fn pointwise_min(f: &PwlFn, g: &PwlFn) -> PwlFn {
    let mut xs = union_xs([f, g]);
    xs.extend(crossings(f, g));
    PwlFn::sample(xs, |x| std::cmp::min(f.at(x), g.at(x)))
}

pub fn pointwise_max(f: &PwlFn, g: &PwlFn) -> PwlFn {
    let mut xs = union_xs([f, g]);
    xs.extend(crossings(f, g));
    PwlFn::sample(xs, |x| std::cmp::max(f.at(x), g.at(x)))
}

pub fn linear_combine(alpha: &Q, f: &PwlFn, beta: &Q, g: &PwlFn) -> PwlFn {
    PwlFn::sample(union_xs([f, g]), |x| alpha * f.at(x) + beta * g.at(x))
}

/// `g ∘ m` for a non-decreasing inner function `m` with `m(0) ≥ 0`.
pub fn compose_monotone(g: &PwlFn, m: &PwlFn) -> Result<PwlFn, PwlError> {
    if !m.is_nondecreasing() {
        return Err(PwlError::Precondition("inner function is not non-decreasing".into()));
    }
    if m.points[0].1.is_negative() {
        return Err(PwlError::Precondition("inner function is negative at 0".into()));
    }
    let mut xs = union_xs([m]);
    let pieces: Vec<(Q, Option<Q>)> = (0..m.points.len())
        .map(|i| (m.points[i].0.clone(), m.points.get(i + 1).map(|p| p.0.clone())))
        .collect();
    for (i, (lo, hi)) in pieces.iter().enumerate() {
        let s = m.slope_from(i);
        if s.is_zero() {
            continue;
        }
        let y_lo = &m.points[i].1;
        for y in g.breakpoint_xs() {
            if y <= y_lo {
                continue;
            }
            let x = lo + (y - y_lo) / &s;
            if hi.as_ref().map_or(true, |h| x < *h) {
                xs.insert(x);
            }
        }
    }
    Ok(PwlFn::sample(xs, |x| g.at(&m.at(x))))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InverseSide {
    /// `min{x ≥ 0 : f(x) ≥ ρ}`
    Lower,
    /// `inf{x ≥ 0 : f(x) > ρ}`
    Upper,
}

/// A generalized inverse of a non-decreasing [`PwlFn`].
///
/// It jumps wherever the underlying function is flat, so it is kept as a function object
/// rather than a continuous [`PwlFn`]. Both sides are 0 below `f(0)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PseudoInverse {
    f: PwlFn,
    side: InverseSide,
}

pub fn pseudo_inverse(f: &PwlFn, side: InverseSide) -> Result<PseudoInverse, PwlError> {
    if !f.is_nondecreasing() {
        return Err(PwlError::Precondition("function is not non-decreasing".into()));
    }
    Ok(PseudoInverse { f: f.clone(), side })
}

impl PseudoInverse {
    pub fn side(&self) -> InverseSide {
        self.side
    }

    pub fn eval(&self, rho: &Q) -> Result<Q, PwlError> {
        let f = &self.f;
        let f0 = &f.points[0].1;
        let below = match self.side {
            InverseSide::Lower => rho <= f0,
            InverseSide::Upper => rho < f0,
        };
        if below {
            return Ok(Q::zero());
        }
        for i in 0..f.points.len() {
            let (x0, y0) = &f.points[i];
            let s = f.slope_from(i);
            if s.is_zero() {
                continue;
            }
            let reaches = match f.points.get(i + 1) {
                Some((_, y1)) => match self.side {
                    InverseSide::Lower => y1 >= rho,
                    InverseSide::Upper => y1 > rho,
                },
                None => true,
            };
            if reaches {
                let x = x0 + (rho - y0) / &s;
                return Ok(std::cmp::max(x, x0.clone()));
            }
        }
        Err(PwlError::Unbounded(format_rational(rho)))
    }
}

/// A right-continuous step function on `[0, ∞)` given by `(start, value)` pieces.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StepFn {
    pieces: Vec<(Q, Q)>,
}

impl StepFn {
    pub fn new(pieces: Vec<(Q, Q)>) -> Result<Self, PwlError> {
        match pieces.first() {
            None => return Err(PwlError::Malformed("no pieces".into())),
            Some((x, _)) if !x.is_zero() => {
                return Err(PwlError::Malformed(format!("first piece starts at {}", format_rational(x))))
            }
            _ => {}
        }
        if pieces.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(PwlError::Malformed("piece starts are not strictly increasing".into()));
        }
        let mut merged: Vec<(Q, Q)> = Vec::with_capacity(pieces.len());
        for p in pieces {
            if merged.last().is_some_and(|l| l.1 == p.1) {
                continue;
            }
            merged.push(p);
        }
        Ok(StepFn { pieces: merged })
    }

    pub fn constant(c: Q) -> Self {
        StepFn { pieces: vec![(Q::zero(), c)] }
    }

    pub fn pieces(&self) -> &[(Q, Q)] {
        &self.pieces
    }

    pub fn eval(&self, x: &Q) -> Result<Q, PwlError> {
        if x.is_negative() {
            return Err(PwlError::Domain(format_rational(x)));
        }
        Ok(self.at(x))
    }

    pub fn at(&self, x: &Q) -> Q {
        let i = self.pieces.partition_point(|p| p.0 <= *x).max(1) - 1;
        self.pieces[i].1.clone()
    }

    /// First jump strictly after `x`.
    pub fn next_jump_after(&self, x: &Q) -> Option<&Q> {
        self.pieces.iter().map(|p| &p.0).find(|s| *s > x)
    }

    pub fn jumps(&self) -> impl Iterator<Item = &Q> {
        self.pieces.iter().skip(1).map(|p| &p.0)
    }
}

/// `x ↦ ∫_from^x g`, the antiderivative of `g` vanishing at `from`.
pub fn integrate_step(g: &StepFn, from: &Q) -> PwlFn {
    let mut points = Vec::with_capacity(g.pieces.len());
    let mut acc = Q::zero();
    for (i, (start, value)) in g.pieces.iter().enumerate() {
        points.push((start.clone(), acc.clone()));
        if let Some((next, _)) = g.pieces.get(i + 1) {
            acc += value * (next - start);
        }
    }
    let raw = PwlFn::canonical(points, g.pieces.last().unwrap().1.clone());
    let offset = raw.at(from);
    let shifted = raw.points.iter().map(|(x, y)| (x.clone(), y - &offset)).collect();
    PwlFn::canonical(shifted, raw.final_slope)
}

impl Serialize for PwlFn {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            breakpoints: Vec<Vec<serde_json::Number>>,
            final_slope: Vec<serde_json::Number>,
        }
        Repr {
            breakpoints: self.points.iter().map(|(x, y)| pair_list(&[x, y])).collect(),
            final_slope: pair_list(&[&self.final_slope]),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PwlFn {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Repr {
            breakpoints: Vec<Vec<serde_json::Number>>,
            final_slope: Vec<serde_json::Number>,
        }
        let repr = Repr::deserialize(deserializer)?;
        let mut points = Vec::with_capacity(repr.breakpoints.len());
        for bp in &repr.breakpoints {
            let v = rationals_from_numbers(bp).map_err(D::Error::custom)?;
            if v.len() != 2 {
                return Err(D::Error::custom("a breakpoint is [x_num, x_den, y_num, y_den]"));
            }
            let mut it = v.into_iter();
            points.push((it.next().unwrap(), it.next().unwrap()));
        }
        let slope = rationals_from_numbers(&repr.final_slope).map_err(D::Error::custom)?;
        if slope.len() != 1 {
            return Err(D::Error::custom("final_slope is [num, den]"));
        }
        PwlFn::new(points, slope.into_iter().next().unwrap()).map_err(D::Error::custom)
    }
}

impl Serialize for StepFn {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            pieces: Vec<Vec<serde_json::Number>>,
        }
        Repr { pieces: self.pieces.iter().map(|(x, v)| pair_list(&[x, v])).collect() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for StepFn {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Repr {
            pieces: Vec<Vec<serde_json::Number>>,
        }
        let repr = Repr::deserialize(deserializer)?;
        let mut pieces = Vec::with_capacity(repr.pieces.len());
        for p in &repr.pieces {
            let v = rationals_from_numbers(p).map_err(D::Error::custom)?;
            if v.len() != 2 {
                return Err(D::Error::custom("a piece is [start_num, start_den, value_num, value_den]"));
            }
            let mut it = v.into_iter();
            pieces.push((it.next().unwrap(), it.next().unwrap()));
        }
        StepFn::new(pieces).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, q};

    fn f(points: &[(i64, i64)], slope: Q) -> PwlFn {
        PwlFn::new(points.iter().map(|&(x, y)| (int(x), int(y))).collect(), slope).unwrap()
    }

    fn max1_half() -> PwlFn {
        f(&[(0, 1), (2, 1)], q(1, 2))
    }

    #[test]
    fn canonical_form_drops_collinear_points() {
        let g = PwlFn::new(vec![(int(0), int(0)), (int(1), int(1)), (int(2), int(2))], int(1)).unwrap();
        assert_eq!(g, PwlFn::identity());
        assert_eq!(g.num_breakpoints(), 0);
        assert!(PwlFn::new(vec![(int(1), int(0))], int(0)).is_err());
        assert!(PwlFn::new(vec![(int(0), int(0)), (int(0), int(1))], int(0)).is_err());
    }

    #[test]
    fn eval_rejects_negative_arguments() {
        assert!(matches!(max1_half().eval(&int(-1)), Err(PwlError::Domain(_))));
        assert_eq!(max1_half().eval(&int(6)).unwrap(), int(3));
    }

    #[test]
    fn pseudo_inverses_of_flat_start() {
        let g = max1_half();
        let lo = pseudo_inverse(&g, InverseSide::Lower).unwrap();
        let hi = pseudo_inverse(&g, InverseSide::Upper).unwrap();
        assert_eq!(lo.eval(&int(1)).unwrap(), int(0));
        assert_eq!(hi.eval(&int(1)).unwrap(), int(2));
        assert_eq!(lo.eval(&int(3)).unwrap(), int(6));
        assert_eq!(hi.eval(&int(3)).unwrap(), int(6));
        assert_eq!(lo.eval(&q(1, 2)).unwrap(), int(0));
        assert_eq!(hi.eval(&q(1, 2)).unwrap(), int(0));
    }

    #[test]
    fn pseudo_inverse_of_eventually_constant_function_is_unbounded() {
        let g = f(&[(0, 0), (1, 1)], int(0));
        let hi = pseudo_inverse(&g, InverseSide::Upper).unwrap();
        assert!(matches!(hi.eval(&int(1)), Err(PwlError::Unbounded(_))));
        let lo = pseudo_inverse(&g, InverseSide::Lower).unwrap();
        assert_eq!(lo.eval(&int(1)).unwrap(), int(1));
        assert!(lo.eval(&int(2)).is_err());
        assert!(pseudo_inverse(&f(&[(0, 1)], int(-1)), InverseSide::Lower).is_err());
    }

    #[test]
    fn compose_shifted_floor() {
        let outer = f(&[(0, 1), (1, 1)], int(1));
        let inner = f(&[(0, 0), (1, 0)], int(1));
        let c = compose_monotone(&outer, &inner).unwrap();
        assert_eq!(c, f(&[(0, 1), (2, 1)], int(1)));
        let decreasing = f(&[(0, 1)], int(-1));
        assert!(matches!(compose_monotone(&outer, &decreasing), Err(PwlError::Precondition(_))));
    }

    #[test]
    fn min_of_tent_halves_crosses_at_one() {
        let up = PwlFn::identity();
        let down = PwlFn::linear(int(2), int(-1));
        let m = pointwise_min(&up, &down);
        assert_eq!(m, f(&[(0, 0), (1, 1)], int(-1)));
        let mx = pointwise_max(&up, &down);
        assert_eq!(mx, f(&[(0, 2), (1, 1)], int(1)));
    }

    #[test]
    fn linear_combination() {
        let c = linear_combine(&int(2), &max1_half(), &int(-1), &PwlFn::identity());
        assert_eq!(c, f(&[(0, 2), (2, 0)], int(0)));
    }

    #[test]
    fn integrate_step_from_interior_point() {
        let g = StepFn::new(vec![(int(0), int(2)), (int(1), int(0)), (int(3), int(1))]).unwrap();
        let big = integrate_step(&g, &int(0));
        assert_eq!(big, f(&[(0, 0), (1, 2), (3, 2)], int(1)));
        let shifted = integrate_step(&g, &int(1));
        assert_eq!(shifted.at(&int(1)), int(0));
        assert_eq!(shifted.at(&int(0)), int(-2));
    }

    #[test]
    fn step_fn_merges_equal_neighbours() {
        let g = StepFn::new(vec![(int(0), int(1)), (int(1), int(1)), (int(2), int(0))]).unwrap();
        assert_eq!(g.pieces().len(), 2);
        assert_eq!(g.eval(&int(2)).unwrap(), int(0));
        assert_eq!(g.eval(&q(3, 2)).unwrap(), int(1));
        assert_eq!(g.next_jump_after(&int(0)), Some(&int(2)));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let g = max1_half();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"breakpoints":[[0,1,1,1],[2,1,1,1]],"final_slope":[1,2]}"#);
        let back: PwlFn = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        let step = StepFn::new(vec![(int(0), int(2)), (int(1), int(0))]).unwrap();
        let s = serde_json::to_string(&step).unwrap();
        assert_eq!(s, r#"{"pieces":[[0,1,2,1],[1,1,0,1]]}"#);
        assert_eq!(serde_json::from_str::<StepFn>(&s).unwrap(), step);
        assert!(serde_json::from_str::<PwlFn>(r#"{"breakpoints":[[1,1,0,1]],"final_slope":[0,1]}"#).is_err());
    }
}
