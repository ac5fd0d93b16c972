use serde::{Deserialize, Serialize};

use super::DamageModel;
use crate::model::{effectiveness, BirdType, BodyKind, Material, ObjectId};

/// Damage dealt to a body of `material` and `mass` by an impact of
/// `impulse`, optionally from a bird.
pub fn compute_damage(
    model: &DamageModel,
    material: Material,
    mass: f64,
    impulse: f64,
    bird: Option<BirdType>,
) -> f64 {
    let threshold = model.threshold(mass);
    if !(impulse > threshold) {
        return 0.0;
    }
    (impulse - threshold) * model.gain * effectiveness(bird, material)
}

/// Impulse that exactly uses up `hp` against the threshold, i.e. the part of
/// an impact that goes into breaking the body.
pub(crate) fn breaking_impulse(
    model: &DamageModel,
    material: Material,
    mass: f64,
    hp: f64,
    bird: Option<BirdType>,
) -> f64 {
    model.threshold(mass) + hp / (model.gain * effectiveness(bird, material))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DamageKind {
    Damaged,
    Destroyed,
    PigKilled,
    TntDetonated,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DamageEvent {
    pub step: u64,
    pub subject: ObjectId,
    /// Kind of the subject body, so the log can be scored on its own.
    pub subject_kind: BodyKind,
    pub kind: DamageKind,
    pub amount: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> DamageModel {
        DamageModel {
            threshold_per_mass: 0.5,
            reference_speed: 1.0,
            gain: 1.0,
        }
    }

    #[test]
    fn zero_impulse_is_harmless() {
        for m in [Material::Wood, Material::Ice, Material::Stone, Material::None] {
            assert_eq!(compute_damage(&model(), m, 1.0, 0.0, None), 0.0);
        }
    }

    #[test]
    fn threshold_boundary() {
        let th = model().threshold(2.0);
        assert_eq!(th, 1.0);
        assert_eq!(compute_damage(&model(), Material::Wood, 2.0, th, None), 0.0);
        assert_eq!(
            compute_damage(&model(), Material::Wood, 2.0, th + 1.0, Some(BirdType::Red)),
            1.0
        );
        assert_eq!(
            compute_damage(&model(), Material::Stone, 2.0, th + 1.0, Some(BirdType::Red)),
            0.75
        );
    }

    #[test]
    fn yellow_doubles_red_on_wood() {
        for imp in [0.6, 1.0, 3.5, 10.0] {
            let y = compute_damage(&model(), Material::Wood, 1.0, imp, Some(BirdType::Yellow));
            let r = compute_damage(&model(), Material::Wood, 1.0, imp, Some(BirdType::Red));
            assert_eq!(y, 2.0 * r);
        }
    }

    #[test]
    fn breaking_impulse_inverts_damage() {
        let j = breaking_impulse(&model(), Material::Ice, 0.4, 0.3, Some(BirdType::Blue));
        let d = compute_damage(&model(), Material::Ice, 0.4, j, Some(BirdType::Blue));
        assert!((d - 0.3).abs() < 1e-12);
    }
}
