//! Vocabulary shared by the engine, the level format and the percept.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Identifier of a body in a world. Level objects are numbered from 1 in file
/// order; 0 is reserved for the terrain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectId(pub u32);

pub const TERRAIN_ID: ObjectId = ObjectId(0);

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BodyKind {
    Block,
    Pig,
    Bird,
    Tnt,
    Terrain,
}

impl BodyKind {
    /// Kinds that carry hit points and show up in the damage log.
    pub fn is_damageable(self) -> bool {
        matches!(self, BodyKind::Block | BodyKind::Pig | BodyKind::Tnt)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Material {
    Wood,
    Ice,
    Stone,
    None,
}

impl Material {
    pub const BLOCK_MATERIALS: [Material; 3] = [Material::Wood, Material::Ice, Material::Stone];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BirdType {
    Red,
    Blue,
    Yellow,
    Black,
    White,
}

impl BirdType {
    pub const ALL: [BirdType; 5] = [
        BirdType::Red,
        BirdType::Blue,
        BirdType::Yellow,
        BirdType::Black,
        BirdType::White,
    ];

    pub fn ability(self) -> Ability {
        match self {
            BirdType::Red => Ability::None,
            BirdType::Blue => Ability::Split3,
            BirdType::Yellow => Ability::Boost,
            BirdType::Black => Ability::Blast,
            BirdType::White => Ability::EggBomb,
        }
    }

    /// Damage multiplier against a material. Each bird has one strong
    /// material (×2) and a set of weak ones (×0.75).
    pub fn effectiveness(self, material: Material) -> f64 {
        use Material::{Ice, Stone, Wood};
        let (strong, weak): (Option<Material>, &[Material]) = match self {
            BirdType::Red => (None, &[Stone]),
            BirdType::Blue => (Some(Ice), &[Wood, Stone]),
            BirdType::Yellow => (Some(Wood), &[Stone]),
            BirdType::Black => (Some(Stone), &[]),
            BirdType::White => (None, &[Ice]),
        };
        if material == Material::None {
            1.0
        } else if strong == Some(material) {
            2.0
        } else if weak.contains(&material) {
            0.75
        } else {
            1.0
        }
    }
}

impl fmt::Display for BirdType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BirdType::Red => "red",
            BirdType::Blue => "blue",
            BirdType::Yellow => "yellow",
            BirdType::Black => "black",
            BirdType::White => "white",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ability {
    None,
    Split3,
    Boost,
    Blast,
    EggBomb,
}

/// Effectiveness of an optional impactor; non-bird impacts are neutral.
pub fn effectiveness(bird: Option<BirdType>, material: Material) -> f64 {
    bird.map_or(1.0, |b| b.effectiveness(material))
}
