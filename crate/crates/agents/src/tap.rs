use birdbench_core::model::BirdType;

/// What the tap delay is measured against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TapPolicy {
    /// A fixed fraction of the whole flight to the target.
    TotalLength,
    /// A fixed fraction of the flight to the first obstacle.
    FirstObstacle,
}

/// Fixed per-bird fraction of the reference flight time at which to tap.
pub fn tap_fraction(bird: BirdType) -> f64 {
    match bird {
        BirdType::Red => 0.0,
        BirdType::Blue => 0.8,
        BirdType::Yellow => 0.85,
        BirdType::Black => 0.98,
        BirdType::White => 0.75,
    }
}

/// Tap delay in milliseconds for a reference flight time in seconds.
/// Birds without an ability never tap.
pub fn tap_ms(bird: BirdType, reference_time: f64) -> u64 {
    let ms = (tap_fraction(bird) * reference_time * 1000.0).round();
    if ms.is_finite() && ms > 0.0 {
        ms as u64
    } else {
        0
    }
}

/// Chooses the reference time under `policy`. The first-obstacle policy
/// falls back to the full flight when nothing is in the way.
pub fn tap_for(bird: BirdType, policy: TapPolicy, time_to_target: f64, time_to_obstacle: Option<f64>) -> u64 {
    let t = match policy {
        TapPolicy::TotalLength => time_to_target,
        TapPolicy::FirstObstacle => time_to_obstacle.unwrap_or(time_to_target),
    };
    tap_ms(bird, t)
}
