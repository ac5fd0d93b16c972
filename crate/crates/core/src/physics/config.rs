use serde::{Deserialize, Serialize};

use crate::model::{BirdType, Material};

/// Every tunable constant of the engine. Serialized verbatim to clients so
/// that planning agents can rebuild an identical world.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicsConfig {
    pub dt: f64,
    pub velocity_iterations: usize,
    pub position_iterations: usize,
    pub gravity: f64,
    /// Launch speed at full draw (`speed_fraction = 1`).
    pub launch_speed: f64,
    pub linear_damping: f64,
    pub angular_damping: f64,
    /// Extra linear and angular damping on round bodies that touched
    /// something during the previous step. Stands in for rolling resistance.
    pub rolling_damping: f64,
    /// Approach speeds below this do not bounce.
    pub restitution_threshold: f64,
    pub linear_slop: f64,
    pub baumgarte: f64,
    pub max_correction: f64,
    pub sleep_linear: f64,
    pub sleep_angular: f64,
    pub time_to_sleep: f64,
    /// Bodies this far outside the world rectangle are removed.
    pub kill_margin: f64,
    pub wood: MaterialProps,
    pub ice: MaterialProps,
    pub stone: MaterialProps,
    pub pig: BodyProps,
    pub tnt: BodyProps,
    pub terrain_friction: f64,
    pub terrain_restitution: f64,
    pub birds: BirdTable,
    pub damage: DamageModel,
    pub tnt_blast: Blast,
    pub black_blast: Blast,
    pub egg_blast: Blast,
    pub split_angle_deg: f64,
    pub boost_factor: f64,
    /// Upward speed given to the white bird when it drops its egg.
    pub white_rebound_speed: f64,
    pub egg_speed: f64,
    pub egg_radius: f64,
    pub egg_density: f64,
    pub settle: SettleParams,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialProps {
    pub density: f64,
    pub friction: f64,
    pub restitution: f64,
    pub hp_per_area: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BodyProps {
    pub density: f64,
    pub friction: f64,
    pub restitution: f64,
    pub hp: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BirdProps {
    pub radius: f64,
    pub density: f64,
    pub friction: f64,
    pub restitution: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BirdTable {
    pub red: BirdProps,
    pub blue: BirdProps,
    pub yellow: BirdProps,
    pub black: BirdProps,
    pub white: BirdProps,
}

impl BirdTable {
    pub fn get(&self, bird: BirdType) -> &BirdProps {
        match bird {
            BirdType::Red => &self.red,
            BirdType::Blue => &self.blue,
            BirdType::Yellow => &self.yellow,
            BirdType::Black => &self.black,
            BirdType::White => &self.white,
        }
    }
}

/// Radial explosion: impulse falls off linearly from `impulse` at the centre
/// to zero at `radius`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Blast {
    pub radius: f64,
    pub impulse: f64,
}

impl Blast {
    /// Impulse delivered at distance `d`; zero at and beyond the radius.
    pub fn impulse_at(&self, d: f64) -> f64 {
        if d >= self.radius {
            0.0
        } else {
            self.impulse * (1.0 - d / self.radius)
        }
    }
}

/// Impact damage: nothing below `threshold_per_mass · mass · reference_speed`,
/// then linear in the excess impulse, scaled by bird effectiveness.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DamageModel {
    pub threshold_per_mass: f64,
    pub reference_speed: f64,
    pub gain: f64,
}

impl DamageModel {
    pub fn threshold(&self, mass: f64) -> f64 {
        self.threshold_per_mass * mass * self.reference_speed
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SettleParams {
    pub v_eps: f64,
    pub k_steps: usize,
    pub t_cap: f64,
}

impl PhysicsConfig {
    pub fn material(&self, material: Material) -> Option<&MaterialProps> {
        match material {
            Material::Wood => Some(&self.wood),
            Material::Ice => Some(&self.ice),
            Material::Stone => Some(&self.stone),
            Material::None => None,
        }
    }

    /// Number of whole steps that fit in `seconds`.
    pub fn steps_for(&self, seconds: f64) -> usize {
        ((seconds / self.dt) - 1e-9).ceil().max(0.0) as usize
    }
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        let bird = |radius, density| BirdProps {
            radius,
            density,
            friction: 0.5,
            restitution: 0.3,
        };
        PhysicsConfig {
            dt: 1.0 / 60.0,
            velocity_iterations: 4,
            position_iterations: 3,
            gravity: 9.8,
            launch_speed: 28.0,
            linear_damping: 0.0,
            angular_damping: 0.3,
            rolling_damping: 1.5,
            restitution_threshold: 1.0,
            linear_slop: 0.003,
            baumgarte: 0.2,
            max_correction: 0.2,
            sleep_linear: 0.05,
            sleep_angular: 0.05,
            time_to_sleep: 0.5,
            kill_margin: 10.0,
            wood: MaterialProps {
                density: 0.25,
                friction: 0.6,
                restitution: 0.1,
                hp_per_area: 1.0,
            },
            ice: MaterialProps {
                density: 0.2,
                friction: 0.2,
                restitution: 0.1,
                hp_per_area: 0.5,
            },
            stone: MaterialProps {
                density: 0.8,
                friction: 0.8,
                restitution: 0.05,
                hp_per_area: 3.0,
            },
            pig: BodyProps {
                density: 0.3,
                friction: 0.6,
                restitution: 0.2,
                hp: 0.75,
            },
            tnt: BodyProps {
                density: 0.3,
                friction: 0.6,
                restitution: 0.1,
                hp: f64::MIN_POSITIVE,
            },
            terrain_friction: 0.8,
            terrain_restitution: 0.1,
            birds: BirdTable {
                red: bird(0.4, 1.0),
                blue: bird(0.25, 1.2),
                yellow: bird(0.4, 1.0),
                black: bird(0.5, 1.0),
                white: bird(0.5, 0.8),
            },
            damage: DamageModel {
                threshold_per_mass: 0.5,
                reference_speed: 1.0,
                gain: 1.0,
            },
            tnt_blast: Blast {
                radius: 4.0,
                impulse: 3.0,
            },
            black_blast: Blast {
                radius: 5.0,
                impulse: 4.0,
            },
            egg_blast: Blast {
                radius: 3.5,
                impulse: 3.5,
            },
            split_angle_deg: 15.0,
            boost_factor: 1.7,
            white_rebound_speed: 12.0,
            egg_speed: 10.0,
            egg_radius: 0.3,
            egg_density: 2.0,
            settle: SettleParams {
                v_eps: 0.05,
                k_steps: 30,
                t_cap: 15.0,
            },
        }
    }
}
