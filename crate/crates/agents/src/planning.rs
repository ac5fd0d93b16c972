//! Trajectory planning over a percept: aiming at objects, sampling the
//! flight path and finding what it runs into.

use birdbench_core::game::GameInfo;
use birdbench_core::geometry::{
    first_obstruction, obstructions_before_target, sample_trajectory, solve_launch_angles, time_to_x, PathHit,
    Polyline, SceneObject, Vec2, DEFAULT_SAMPLE_DT,
};
use birdbench_core::level::TERRAIN_DEPTH;
use birdbench_core::model::{BirdType, BodyKind, ObjectId, TERRAIN_ID};
use birdbench_core::percept::{Percept, PerceptObject, ScreenMap};

/// Steepest launch angle the reference agents will use.
pub const MAX_LAUNCH_ANGLE: f64 = 85.0 * std::f64::consts::PI / 180.0;

/// Longest flight the planners sample.
const MAX_FLIGHT: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Branch {
    Low,
    High,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Low, Branch::High];
}

/// A launch that passes through a chosen point.
#[derive(Clone, Debug)]
pub struct Aim {
    pub target: ObjectId,
    pub point: Vec2,
    pub branch: Branch,
    pub angle: f64,
    /// Flight time to `point` along the ideal parabola.
    pub time: f64,
}

/// World-space view of one percept, shared by all planners.
pub struct Planner<'a> {
    pub percept: &'a Percept,
    pub map: ScreenMap,
    pub origin: Vec2,
    pub speed: f64,
    pub gravity: f64,
    pub scene: Vec<SceneObject>,
}

impl<'a> Planner<'a> {
    pub fn new(percept: &'a Percept, info: &GameInfo) -> Planner<'a> {
        let map = info.screen;
        Planner {
            percept,
            map,
            origin: percept.launch_point(&map),
            speed: info.physics.launch_speed,
            gravity: info.physics.gravity,
            scene: percept.scene(&map),
        }
    }

    pub fn bird(&self) -> Option<BirdType> {
        self.percept.current_bird
    }

    /// Non-terrain objects in id order.
    pub fn objects(&self) -> impl Iterator<Item = &PerceptObject> {
        self.percept.objects.iter().filter(|o| !o.is_terrain())
    }

    pub fn pigs(&self) -> Vec<&PerceptObject> {
        let mut v: Vec<_> = self.percept.pigs().collect();
        v.sort_by_key(|o| o.id);
        v
    }

    pub fn center(&self, o: &PerceptObject) -> Vec2 {
        o.world_center(&self.map)
    }

    pub fn scene_object(&self, id: ObjectId) -> Option<&SceneObject> {
        self.scene.iter().find(|o| o.id == id && o.kind != BodyKind::Terrain)
    }

    /// Launch angle on `branch` through `point`, if it exists and is usable.
    pub fn aim_at(&self, target: ObjectId, point: Vec2, branch: Branch) -> Option<Aim> {
        let rel = point - self.origin;
        let (low, high) = solve_launch_angles(self.speed, self.gravity, rel).ok()?.angles()?;
        let angle = match branch {
            Branch::Low => low,
            Branch::High => high,
        };
        if !(0.0..=MAX_LAUNCH_ANGLE).contains(&angle) {
            return None;
        }
        Some(Aim {
            target,
            point,
            branch,
            angle,
            time: time_to_x(angle, self.speed, rel.x),
        })
    }

    pub fn aim_at_object(&self, o: &PerceptObject, branch: Branch) -> Option<Aim> {
        self.aim_at(o.id, self.center(o), branch)
    }

    /// Sampled flight path in world coordinates, ending below the ground.
    pub fn path(&self, angle: f64) -> Polyline {
        sample_trajectory(
            angle,
            self.speed,
            self.gravity,
            DEFAULT_SAMPLE_DT,
            MAX_FLIGHT,
            -TERRAIN_DEPTH - self.origin.y,
        )
        .expect("sampling parameters are valid")
        .translated(self.origin)
    }

    /// Objects crossed before the aim reaches its target, in path order.
    pub fn blockers(&self, aim: &Aim) -> Vec<PathHit> {
        obstructions_before_target(&self.path(aim.angle), &self.scene, aim.target).unwrap_or_default()
    }

    /// True when nothing but pigs lies between the sling and the target.
    pub fn is_clear(&self, aim: &Aim) -> bool {
        self.blockers(aim).iter().all(|h| self.kind_of(h.id) == Some(BodyKind::Pig))
    }

    /// True when the ground is in the way before the target.
    pub fn hits_terrain_first(&self, aim: &Aim) -> bool {
        self.blockers(aim).iter().any(|h| h.id == TERRAIN_ID)
    }

    pub fn kind_of(&self, id: ObjectId) -> Option<BodyKind> {
        if id == TERRAIN_ID {
            return Some(BodyKind::Terrain);
        }
        self.scene_object(id).map(|o| o.kind)
    }

    /// Time until the path first touches any object other than the
    /// ground, or until it lands when it touches nothing.
    pub fn time_to_first_contact(&self, angle: f64) -> f64 {
        let path = self.path(angle);
        let hit = if self.scene.iter().any(|o| o.id == TERRAIN_ID) {
            first_obstruction(&path, &self.scene, TERRAIN_ID).ok().flatten()
        } else {
            None
        };
        let x = match hit {
            Some((_, p)) => p.x,
            None => path.points.last().map_or(self.origin.x, |p| p.x),
        };
        time_to_x(angle, self.speed, x - self.origin.x)
    }

    /// Time until the aim's path first touches something other than its
    /// target, if it does before the target.
    pub fn time_to_first_obstacle(&self, aim: &Aim) -> Option<f64> {
        let first = self.blockers(aim).into_iter().next()?;
        Some(time_to_x(aim.angle, self.speed, first.point.x - self.origin.x))
    }
}
