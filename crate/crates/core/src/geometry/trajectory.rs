//! Closed-form ballistic planning for an ideal parabola launched from the
//! origin.

use serde::{Deserialize, Serialize};

use super::{GeometryError, Vec2};

/// The pair of launch angles that put a projectile of fixed speed through a
/// target point. Angles are meaningless when `reachable` is false.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySolution {
    pub low_angle: f64,
    pub high_angle: f64,
    pub reachable: bool,
}

impl TrajectorySolution {
    pub fn angles(&self) -> Option<(f64, f64)> {
        self.reachable.then_some((self.low_angle, self.high_angle))
    }
}

/// Solves `tanθ = (v² ± √(v⁴ − g(g·x² + 2y·v²))) / (g·x)` for a target given
/// relative to the launch point.
///
/// The low root is computed from the product of the roots rather than the
/// subtraction form so that it keeps full precision when `√D ≈ v²`.
pub fn solve_launch_angles(
    launch_speed: f64,
    gravity: f64,
    target: Vec2,
) -> Result<TrajectorySolution, GeometryError> {
    if !(launch_speed > 0.0) || !launch_speed.is_finite() {
        return Err(GeometryError::InvalidParameter("launch_speed must be > 0"));
    }
    if !(gravity > 0.0) || !gravity.is_finite() {
        return Err(GeometryError::InvalidParameter("gravity must be > 0"));
    }
    if !target.is_finite() {
        return Err(GeometryError::InvalidParameter("target must be finite"));
    }
    if target.x <= 0.0 {
        return Err(GeometryError::TargetNotAhead { x: target.x });
    }

    let (x, y) = (target.x, target.y);
    let v2 = launch_speed * launch_speed;
    let v4 = v2 * v2;
    let mut disc = v4 - gravity * (gravity * x * x + 2.0 * y * v2);
    if disc < 0.0 {
        // Rounding at the exact range boundary.
        if disc > -1e-12 * v4 {
            disc = 0.0;
        } else {
            return Ok(TrajectorySolution {
                low_angle: 0.0,
                high_angle: 0.0,
                reachable: false,
            });
        }
    }
    let root = disc.sqrt();
    let tan_high = (v2 + root) / (gravity * x);
    let tan_low = (gravity * x * x + 2.0 * y * v2) / (x * (v2 + root));
    Ok(TrajectorySolution {
        low_angle: tan_low.atan(),
        high_angle: tan_high.atan(),
        reachable: true,
    })
}

/// Height of the analytic parabola at horizontal distance `x`.
pub fn height_at(angle: f64, launch_speed: f64, gravity: f64, x: f64) -> f64 {
    let t = angle.tan();
    x * t - gravity * x * x * (1.0 + t * t) / (2.0 * launch_speed * launch_speed)
}

/// Position on the analytic parabola after `t` seconds.
pub fn position_at(angle: f64, launch_speed: f64, gravity: f64, t: f64) -> Vec2 {
    let (s, c) = angle.sin_cos();
    Vec2::new(
        launch_speed * c * t,
        launch_speed * s * t - 0.5 * gravity * t * t,
    )
}

/// Seconds until the projectile covers horizontal distance `x`. Infinite for
/// a vertical shot.
pub fn time_to_x(angle: f64, launch_speed: f64, x: f64) -> f64 {
    let vx = launch_speed * angle.cos();
    if vx.abs() < 1e-12 {
        f64::INFINITY
    } else {
        x / vx
    }
}

/// A parabola discretized at constant time spacing, starting at its launch
/// point.
#[derive(Clone, Debug, PartialEq)]
pub struct Polyline {
    pub points: Vec<Vec2>,
    pub dt_sample: f64,
}

impl Polyline {
    pub fn segments(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        self.points.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn translated(mut self, offset: Vec2) -> Polyline {
        for p in &mut self.points {
            *p += offset;
        }
        self
    }

    /// Elapsed time at sample `k`.
    pub fn time_of(&self, k: usize) -> f64 {
        k as f64 * self.dt_sample
    }
}

/// Default sampling interval for obstruction queries, finer than the physics
/// step.
pub const DEFAULT_SAMPLE_DT: f64 = 1.0 / 120.0;

/// Samples `points[k] = (v·cosθ·k·dt, v·sinθ·k·dt − ½g(k·dt)²)` relative to
/// the launch point until `t_max`, or until the first point strictly below
/// `floor_y` (that point is kept so the last segment crosses the floor). Pass
/// `f64::NEG_INFINITY` for no floor.
pub fn sample_trajectory(
    angle: f64,
    launch_speed: f64,
    gravity: f64,
    dt_sample: f64,
    t_max: f64,
    floor_y: f64,
) -> Result<Polyline, GeometryError> {
    if !(dt_sample > 0.0) {
        return Err(GeometryError::InvalidParameter("dt_sample must be > 0"));
    }
    if !(t_max >= dt_sample) {
        return Err(GeometryError::InvalidParameter("t_max must be >= dt_sample"));
    }
    let (s, c) = angle.sin_cos();
    let (vx, vy) = (launch_speed * c, launch_speed * s);
    // Tolerate accumulated rounding in t_max / dt.
    let n = ((t_max / dt_sample) + 1e-9).floor() as usize;
    let mut points = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let t = k as f64 * dt_sample;
        let p = Vec2::new(vx * t, vy * t - 0.5 * gravity * t * t);
        points.push(p);
        if k > 0 && p.y < floor_y {
            break;
        }
    }
    Ok(Polyline { points, dt_sample })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    /// Bisection on the analytic flight equation, independent of the
    /// closed form: y(x; θ) rises on (−π/2, θ*) and falls on (θ*, π/2).
    fn bisect_roots(v: f64, g: f64, target: Vec2) -> (f64, f64) {
        let f = |th: f64| height_at(th, v, g, target.x) - target.y;
        let peak = (v * v / (g * target.x)).atan();
        let solve = |mut lo: f64, mut hi: f64, rising: bool| {
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let below = f(mid) < 0.0;
                if below == rising {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let eps = 1e-12;
        (
            solve(-std::f64::consts::FRAC_PI_2 + eps, peak, true),
            solve(peak, std::f64::consts::FRAC_PI_2 - eps, false),
        )
    }

    #[test]
    fn max_range_gives_single_angle() {
        let sol = solve_launch_angles(10.0, 10.0, Vec2::new(10.0, 0.0)).unwrap();
        assert!(sol.reachable);
        assert!((sol.low_angle - FRAC_PI_4).abs() < 1e-12);
        assert!((sol.high_angle - FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn beyond_range_is_unreachable() {
        let sol = solve_launch_angles(10.0, 10.0, Vec2::new(20.0, 0.0)).unwrap();
        assert!(!sol.reachable);
        assert!(sol.angles().is_none());
    }

    #[test]
    fn matches_bisection_oracle() {
        let target = Vec2::new(30.0, 5.0);
        let sol = solve_launch_angles(20.0, 9.8, target).unwrap();
        let (low, high) = bisect_roots(20.0, 9.8, target);
        assert!((sol.low_angle - low).abs() <= 1e-9, "{} vs {}", sol.low_angle, low);
        assert!((sol.high_angle - high).abs() <= 1e-9, "{} vs {}", sol.high_angle, high);
    }

    #[test]
    fn target_behind_is_domain_error() {
        assert!(matches!(
            solve_launch_angles(10.0, 9.8, Vec2::new(0.0, 1.0)),
            Err(GeometryError::TargetNotAhead { .. })
        ));
        assert!(solve_launch_angles(10.0, 9.8, Vec2::new(-3.0, 1.0)).is_err());
        assert!(solve_launch_angles(0.0, 9.8, Vec2::new(3.0, 1.0)).is_err());
    }

    #[test]
    fn horizontal_sample_first_point() {
        let line = sample_trajectory(0.0, 5.0, 10.0, 0.1, 1.0, f64::NEG_INFINITY).unwrap();
        assert_eq!(line.points[0], Vec2::ZERO);
        assert!((line.points[1].x - 0.5).abs() < 1e-12);
        assert!((line.points[1].y + 0.05).abs() < 1e-12);
        assert_eq!(line.points.len(), 11);
    }

    #[test]
    fn vertical_sample_stays_on_axis() {
        let line = sample_trajectory(
            std::f64::consts::FRAC_PI_2,
            5.0,
            10.0,
            0.1,
            0.5,
            f64::NEG_INFINITY,
        )
        .unwrap();
        assert!(line.points.iter().all(|p| p.x.abs() < 1e-12));
    }

    #[test]
    fn apex_height_matches_formula() {
        let line = sample_trajectory(FRAC_PI_4, 10.0, 10.0, 1e-4, 1.5, f64::NEG_INFINITY).unwrap();
        let apex = line.points.iter().map(|p| p.y).fold(f64::MIN, f64::max);
        // apex at t = v sinθ / g = 0.7071..., not on a sample point; bound the
        // sampling error by g·dt²/2.
        assert!((apex - 2.5).abs() < 1e-7, "apex {apex}");
        let exact = position_at(FRAC_PI_4, 10.0, 10.0, 10.0 * FRAC_PI_4.sin() / 10.0);
        assert!((exact.y - 2.5).abs() < 1e-9);
    }

    #[test]
    fn floor_stops_sampling() {
        let line = sample_trajectory(0.3, 10.0, 9.8, 0.05, 10.0, -1.0).unwrap();
        let last = *line.points.last().unwrap();
        assert!(last.y < -1.0);
        assert!(line.points[line.points.len() - 2].y >= -1.0);
    }

    #[test]
    fn bad_sampling_parameters() {
        assert!(sample_trajectory(0.3, 10.0, 9.8, 0.0, 1.0, 0.0).is_err());
        assert!(sample_trajectory(0.3, 10.0, 9.8, 0.5, 0.1, 0.0).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn both_angles_hit_target(
                v in 5.0f64..40.0,
                g in 1.0f64..20.0,
                fx in 0.02f64..1.0,
                fy in -1.0f64..0.9,
            ) {
                let range = v * v / g;
                let x = fx * range;
                // Keep y under the envelope y ≤ v²/2g − g x²/2v².
                let envelope = v * v / (2.0 * g) - g * x * x / (2.0 * v * v);
                let y = if fy >= 0.0 { fy * envelope } else { fy * range };
                let sol = solve_launch_angles(v, g, Vec2::new(x, y)).unwrap();
                prop_assert!(sol.reachable);
                prop_assert!(sol.low_angle <= sol.high_angle);
                prop_assert!(sol.high_angle < std::f64::consts::FRAC_PI_2);
                for th in [sol.low_angle, sol.high_angle] {
                    let err = (height_at(th, v, g, x) - y).abs();
                    prop_assert!(err < 1e-9 * (1.0 + range), "err {}", err);
                }
            }

            #[test]
            fn equal_angles_only_at_zero_discriminant(
                v in 5.0f64..40.0,
                g in 1.0f64..20.0,
                fx in 0.05f64..0.95,
            ) {
                let x = fx * v * v / g;
                let sol = solve_launch_angles(v, g, Vec2::new(x, 0.0)).unwrap();
                prop_assert!(sol.high_angle - sol.low_angle > 1e-9);
            }
        }
    }
}
