//! One-dimensional solvers shared by the conjugate, primal, dual and
//! niveloid computations.

/// Outcome of a bracketing search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarSolution {
    pub x: f64,
    pub iterations: usize,
    /// Width of the final bracket.
    pub width: f64,
}

/// Root of a nonincreasing function on `[lo, hi]` by bisection.
///
/// Requires `f(lo) >= 0 >= f(hi)`; the returned point is within `width / 2`
/// of a root. Stops once the bracket is narrower than `tol` and `|f|` at the
/// midpoint is at most `tol`, after `max_iter` halvings, or when the midpoint
/// no longer separates the ends.
pub fn bisect_nonincreasing(
    f: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_iter: usize,
) -> ScalarSolution {
    let mut iterations = 0;
    while iterations < max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let value = f(mid);
        if hi - lo <= tol && value.abs() <= tol {
            break;
        }
        iterations += 1;
        if value > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    ScalarSolution {
        x: 0.5 * (lo + hi),
        iterations,
        width: hi - lo,
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section maximization of a concave (or unimodal) function on
/// `[lo, hi]`. Returns the best point seen together with its value.
pub fn golden_max(
    f: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_iter: usize,
) -> (ScalarSolution, f64) {
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iterations = 0;
    while hi - lo > tol && iterations < max_iter {
        iterations += 1;
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d);
        }
    }
    let (x, fx) = if fc >= fd { (c, fc) } else { (d, fd) };
    (
        ScalarSolution {
            x,
            iterations,
            width: hi - lo,
        },
        fx,
    )
}

/// Result of expanding a bracket around the maximizer of a concave function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaxBracket {
    /// A maximizer lies in `[lo, hi]`.
    Found { lo: f64, hi: f64 },
    /// The function kept increasing until an endpoint passed the ceiling.
    Unbounded,
}

/// Expands `[lo, hi]` outward, doubling the step each time, until the
/// concave function `f` does not increase past either end. `slack` absorbs
/// rounding noise on flat functions.
pub fn bracket_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, ceiling: f64, slack: f64) -> MaxBracket {
    let (mut lo, mut hi) = (lo.min(hi), lo.max(hi));
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let mut mid = 0.5 * (lo + hi);
    let mut f_mid = f(mid);
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    let rises = |a: f64, b: f64| a > b + slack * (1.0 + b.abs());
    loop {
        if !f_mid.is_finite() && f_mid > 0.0 {
            return MaxBracket::Unbounded;
        }
        if rises(f_hi, f_mid) {
            let step = 2.0 * (hi - lo);
            lo = mid;
            f_lo = f_mid;
            mid = hi;
            f_mid = f_hi;
            hi += step;
            f_hi = f(hi);
        } else if rises(f_lo, f_mid) {
            let step = 2.0 * (hi - lo);
            hi = mid;
            f_hi = f_mid;
            mid = lo;
            f_mid = f_lo;
            lo -= step;
            f_lo = f(lo);
        } else {
            return MaxBracket::Found { lo, hi };
        }
        if lo.abs() > ceiling || hi.abs() > ceiling || f_mid.abs() > ceiling {
            return MaxBracket::Unbounded;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_finds_root() {
        let s = bisect_nonincreasing(|x| 2.0 - x, 0.0, 5.0, 1e-12, 200);
        assert!((s.x - 2.0).abs() < 1e-12);
        assert!(s.width <= 1e-12);
    }

    #[test]
    fn bisection_respects_cap() {
        let s = bisect_nonincreasing(|x| 2.0 - x, 0.0, 5.0, 0.0, 3);
        assert_eq!(s.iterations, 3);
        assert!((s.width - 5.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn golden_section_maximizes_parabola() {
        let (s, v) = golden_max(|x| -(x - 1.3) * (x - 1.3) + 4.0, -10.0, 10.0, 1e-10, 500);
        assert!((s.x - 1.3).abs() < 1e-6);
        assert!((v - 4.0).abs() < 1e-15);
    }

    #[test]
    fn bracket_expansion() {
        let f = |x: f64| -(x - 40.0).powi(2);
        match bracket_max(f, -1.0, 1.0, 1e6, 0.0) {
            MaxBracket::Found { lo, hi } => assert!(lo <= 40.0 && 40.0 <= hi),
            MaxBracket::Unbounded => panic!("should bracket"),
        }
        let f = |x: f64| -(x + 40.0).powi(2);
        match bracket_max(f, -1.0, 1.0, 1e6, 0.0) {
            MaxBracket::Found { lo, hi } => assert!(lo <= -40.0 && -40.0 <= hi),
            MaxBracket::Unbounded => panic!("should bracket"),
        }
        assert_eq!(bracket_max(|x| x, 0.0, 1.0, 1e6, 0.0), MaxBracket::Unbounded);
        assert!(matches!(
            bracket_max(|_| 3.0, 0.0, 1.0, 1e6, 1e-12),
            MaxBracket::Found { .. }
        ));
    }
}
