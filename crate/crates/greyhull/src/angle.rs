//! Angle wrapping and unit conversion.

use crate::real::Real;

/// Wraps an angle to the half-open interval `(-pi, pi]`.
///
/// The positive boundary is kept: `wrap_angle(PI) == PI` and
/// `wrap_angle(-PI) == PI`.
pub fn wrap_angle<T: Real>(angle: T) -> T {
    let tau = T::TAU();
    let wrapped = angle - tau * ((angle - T::PI()) / tau).ceil();
    // ceil can land exactly on -pi when (angle - pi) is a negative multiple
    // of tau perturbed by roundoff; fold that case back to pi.
    if wrapped <= -T::PI() {
        wrapped + tau
    } else {
        wrapped
    }
}

/// Smallest signed difference `a - b`, wrapped to `(-pi, pi]`.
pub fn wrap_diff<T: Real>(a: T, b: T) -> T {
    wrap_angle(a - b)
}

pub fn deg_to_rad<T: Real>(deg: T) -> T {
    deg * T::PI() / T::of(180.0)
}

pub fn rad_to_deg<T: Real>(rad: T) -> T {
    rad * T::of(180.0) / T::PI()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn wrap_keeps_positive_pi() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert_eq!(wrap_angle(0.0), 0.0);
        assert_eq!(wrap_angle(3.0 * PI), PI);
    }

    #[test]
    fn wrap_moves_into_interval() {
        for k in -6i32..=6 {
            for frac in [-0.99, -0.5, -0.1, 0.1, 0.5, 0.99] {
                let base = frac * PI;
                let wrapped = wrap_angle(base + 2.0 * PI * f64::from(k));
                assert!(wrapped > -PI && wrapped <= PI, "wrapped={wrapped}");
                assert!(
                    (wrapped - base).abs() < 1e-9,
                    "base={base} k={k} wrapped={wrapped}"
                );
            }
        }
    }

    #[test]
    fn wrap_diff_small_angles_exact() {
        // Residual of 2*pi - 0.1 wraps to -0.1.
        let d = wrap_diff(2.0 * PI - 0.1, 0.0);
        assert!((d + 0.1).abs() < 1e-12);
        // A quarter turn passes through unchanged, bit-exactly.
        assert_eq!(wrap_diff(PI / 2.0, 0.0), PI / 2.0);
    }

    #[test]
    fn degree_round_trip() {
        for d in [-180.0f64, -35.0, 0.0, 2.32, 90.0, 180.0] {
            let r = deg_to_rad(d);
            assert!((rad_to_deg(r) - d).abs() < 1e-12);
        }
    }
}
