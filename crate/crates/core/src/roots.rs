//! One-dimensional numerics: bracketed bisection and golden-section search.

/// Distance from 1 at which the right end of every root bracket is placed.
pub const EDGE_EPS: f64 = 1e-12;

/// Bisection tolerance on the abscissa.
pub const ROOT_TOL: f64 = 1e-12;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Root of `f` on `[lo, hi]` given `f(lo) <= 0 < f(hi)`.
///
/// The bracket is halved until it is narrower than `tol`, then bisection
/// continues while the midpoint is still representable, so the returned
/// abscissa is the end point with the smaller residual at full precision.
pub fn bisect_increasing<F>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    debug_assert!(lo <= hi);
    let mut f_lo = f(lo);
    let mut f_hi = f(hi);
    if f_lo >= 0.0 {
        return lo;
    }
    if f_hi <= 0.0 {
        return hi;
    }
    // 1100 halvings exhaust any f64 bracket.
    for _ in 0..1100 {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_mid < 0.0 {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
        // Past the tolerance we keep going only to sharpen the residual.
        if hi - lo < tol * 1e-4 {
            break;
        }
    }
    if f_lo.abs() <= f_hi.abs() {
        lo
    } else {
        hi
    }
}

/// Maximizer of `f` on `[lo, hi]` by golden-section search.
///
/// Returns `(x, f(x))`. Stops once the bracket is narrower than `tol`.
pub fn golden_max<F>(f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        // ties shrink to the left bracket, favouring the smaller abscissa
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            if x1 <= a || x1 >= x2 {
                break;
            }
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            if x2 >= b || x2 <= x1 {
                break;
            }
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}
