//! Procedural scenes and "move A from B to C" task instances.
//!
//! The world is planar 2.5-D: a floor at `z = 0`, receptacles as axis-aligned
//! boxes standing on it, and objects as spheres resting on receptacle tops.

mod generate;
mod grid;
mod labels;
mod task;

pub use generate::{generate_scene, ObjectPool, SceneParams};
pub use grid::{Cell, OccupancyGrid};
pub use labels::{LabelBank, LABEL_BANK};
pub use task::{render_instruction, spawn_task, TaskInstance, DEFAULT_LENIENT_GOAL, DEFAULT_STRICT_GOAL};

use crate::geometry::{Aabb, Vec3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum WorldError {
    #[error("invalid scene parameters: {0}")]
    InvalidParams(String),
    #[error("generation infeasible after {attempts} attempts: {reason}")]
    GenerationInfeasible { attempts: usize, reason: String },
    #[error("no valid object/goal pair: {0}")]
    NoValidPair(String),
    #[error("invalid receptacle: {0}")]
    InvalidReceptacle(String),
}

/// Which train/test partition a scene was generated for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SceneSplit {
    Train,
    Test,
    #[default]
    Unassigned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Receptacle {
    pub rec_id: String,
    pub label: String,
    /// Footprint center, world meters.
    pub center: [f64; 2],
    /// Full footprint extents (dx, dy).
    pub footprint: [f64; 2],
    /// Height of the top surface.
    pub height: f64,
}

impl Receptacle {
    pub fn new(
        rec_id: impl Into<String>,
        label: impl Into<String>,
        center: [f64; 2],
        footprint: [f64; 2],
        height: f64,
    ) -> Result<Self, WorldError> {
        let rec = Self {
            rec_id: rec_id.into(),
            label: label.into(),
            center,
            footprint,
            height,
        };
        rec.validate()?;
        Ok(rec)
    }

    pub fn validate(&self) -> Result<(), WorldError> {
        let [dx, dy] = self.footprint;
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !(ok(dx) && ok(dy) && ok(self.height)) {
            return Err(WorldError::InvalidReceptacle(format!(
                "{}: extents must be positive (dx={dx}, dy={dy}, height={})",
                self.rec_id, self.height
            )));
        }
        Ok(())
    }

    pub fn aabb(&self) -> Aabb {
        let [cx, cy] = self.center;
        let [dx, dy] = self.footprint;
        Aabb::new(
            Vec3::new(cx - dx / 2.0, cy - dy / 2.0, 0.0),
            Vec3::new(cx + dx / 2.0, cy + dy / 2.0, self.height),
        )
    }

    /// Center of the 3-D bounding box.
    pub fn center3(&self) -> Vec3 {
        Vec3::new(self.center[0], self.center[1], self.height / 2.0)
    }

    pub fn top_center(&self) -> Vec3 {
        Vec3::new(self.center[0], self.center[1], self.height)
    }

    pub fn contains_xy(&self, x: f64, y: f64) -> bool {
        let [cx, cy] = self.center;
        let [dx, dy] = self.footprint;
        (x - cx).abs() <= dx / 2.0 && (y - cy).abs() <= dy / 2.0
    }

    /// Horizontal distance from `(x, y)` to the footprint rectangle (0 inside).
    pub fn footprint_distance(&self, x: f64, y: f64) -> f64 {
        let [cx, cy] = self.center;
        let [dx, dy] = self.footprint;
        let ex = ((x - cx).abs() - dx / 2.0).max(0.0);
        let ey = ((y - cy).abs() - dy / 2.0).max(0.0);
        ex.hypot(ey)
    }

    pub fn diagonal(&self) -> f64 {
        receptacle_diagonal(self)
    }
}

/// Diagonal of the receptacle's 3-D bounding box.
pub fn receptacle_diagonal(rec: &Receptacle) -> f64 {
    let [dx, dy] = rec.footprint;
    (dx * dx + dy * dy + rec.height * rec.height).sqrt()
}

/// Where an object currently rests. Serialized as the receptacle id,
/// `"held"`, or `"floor"`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum RestingOn {
    Receptacle(String),
    Held,
    Floor,
}

impl From<String> for RestingOn {
    fn from(s: String) -> Self {
        match s.as_str() {
            "held" => RestingOn::Held,
            "floor" => RestingOn::Floor,
            _ => RestingOn::Receptacle(s),
        }
    }
}

impl From<RestingOn> for String {
    fn from(r: RestingOn) -> Self {
        match r {
            RestingOn::Receptacle(id) => id,
            RestingOn::Held => "held".into(),
            RestingOn::Floor => "floor".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectInstance {
    pub obj_id: String,
    pub label: String,
    pub position: [f64; 3],
    pub bound_radius: f64,
    pub resting_on: RestingOn,
}

impl ObjectInstance {
    pub fn center(&self) -> Vec3 {
        Vec3::from_array(self.position)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub scene_id: String,
    pub cell_size: f64,
    pub occupancy: OccupancyGrid,
    pub receptacles: Vec<Receptacle>,
    pub objects: Vec<ObjectInstance>,
    pub floor_height: f64,
    #[serde(default)]
    pub split: SceneSplit,
}

impl SceneSpec {
    /// Empty walled room of `width x height` cells.
    pub fn empty(scene_id: impl Into<String>, width: usize, height: usize, cell_size: f64) -> Self {
        Self {
            scene_id: scene_id.into(),
            cell_size,
            occupancy: OccupancyGrid::walled(width, height),
            receptacles: Vec::new(),
            objects: Vec::new(),
            floor_height: 0.0,
            split: SceneSplit::Unassigned,
        }
    }

    pub fn receptacle(&self, rec_id: &str) -> Option<&Receptacle> {
        self.receptacles.iter().find(|r| r.rec_id == rec_id)
    }

    pub fn object(&self, obj_id: &str) -> Option<&ObjectInstance> {
        self.objects.iter().find(|o| o.obj_id == obj_id)
    }

    pub fn object_mut(&mut self, obj_id: &str) -> Option<&mut ObjectInstance> {
        self.objects.iter_mut().find(|o| o.obj_id == obj_id)
    }

    /// Cell containing world point `(x, y)`, if inside the grid.
    pub fn cell_of(&self, x: f64, y: f64) -> Option<Cell> {
        if !(x.is_finite() && y.is_finite()) || x < 0.0 || y < 0.0 {
            return None;
        }
        let (i, j) = ((x / self.cell_size) as usize, (y / self.cell_size) as usize);
        (i < self.occupancy.width() && j < self.occupancy.height()).then_some(Cell::new(i, j))
    }

    pub fn cell_center(&self, c: Cell) -> [f64; 2] {
        [
            (c.i as f64 + 0.5) * self.cell_size,
            (c.j as f64 + 0.5) * self.cell_size,
        ]
    }

    /// `true` when `(x, y)` lies in a free grid cell.
    pub fn is_navigable(&self, x: f64, y: f64) -> bool {
        self.cell_of(x, y).is_some_and(|c| self.occupancy.is_free(c))
    }

    /// Marks every cell overlapping `rec`'s footprint as blocked.
    pub fn block_footprint(&mut self, rec: &Receptacle) {
        let [cx, cy] = rec.center;
        let [dx, dy] = rec.footprint;
        let cs = self.cell_size;
        for j in 0..self.occupancy.height() {
            for i in 0..self.occupancy.width() {
                let (x0, y0) = (i as f64 * cs, j as f64 * cs);
                let overlaps = x0 < cx + dx / 2.0
                    && x0 + cs > cx - dx / 2.0
                    && y0 < cy + dy / 2.0
                    && y0 + cs > cy - dy / 2.0;
                if overlaps {
                    self.occupancy.set_blocked(Cell::new(i, j), true);
                }
            }
        }
    }

    /// Adds a receptacle and blocks its footprint.
    pub fn add_receptacle(&mut self, rec: Receptacle) {
        self.block_footprint(&rec);
        self.receptacles.push(rec);
    }

    /// Adds an object resting on the top of `rec_id` at `(x, y)`.
    pub fn add_object_on(
        &mut self,
        obj_id: impl Into<String>,
        label: impl Into<String>,
        rec_id: &str,
        xy: [f64; 2],
        radius: f64,
    ) -> Result<(), WorldError> {
        let rec = self
            .receptacle(rec_id)
            .ok_or_else(|| WorldError::InvalidParams(format!("unknown receptacle {rec_id}")))?;
        if !rec.contains_xy(xy[0], xy[1]) || radius <= 0.0 {
            return Err(WorldError::InvalidParams(format!(
                "object position {xy:?} is not on {rec_id} or radius nonpositive"
            )));
        }
        let z = rec.height;
        self.objects.push(ObjectInstance {
            obj_id: obj_id.into(),
            label: label.into(),
            position: [xy[0], xy[1], z],
            bound_radius: radius,
            resting_on: RestingOn::Receptacle(rec_id.to_string()),
        });
        Ok(())
    }

    /// Largest connected navigable component.
    pub fn navigable_component(&self) -> Vec<bool> {
        self.occupancy.largest_component()
    }

    /// Checks the structural invariants of a scene.
    pub fn validate(&self) -> Result<(), WorldError> {
        let bad = |m: String| Err(WorldError::InvalidParams(m));
        let (w, h) = (
            self.occupancy.width() as f64 * self.cell_size,
            self.occupancy.height() as f64 * self.cell_size,
        );
        for rec in &self.receptacles {
            rec.validate()?;
            let b = rec.aabb();
            if b.min.x < 0.0 || b.min.y < 0.0 || b.max.x > w || b.max.y > h {
                return bad(format!("{} footprint leaves the grid", rec.rec_id));
            }
            let c = self.cell_of(rec.center[0], rec.center[1]).expect("inside grid");
            if self.occupancy.is_free(c) {
                return bad(format!("{} footprint is not blocked", rec.rec_id));
            }
        }
        for obj in &self.objects {
            if obj.bound_radius <= 0.0 {
                return bad(format!("{} has nonpositive radius", obj.obj_id));
            }
            if let RestingOn::Receptacle(id) = &obj.resting_on {
                let Some(rec) = self.receptacle(id) else {
                    return bad(format!("{} rests on unknown {}", obj.obj_id, id));
                };
                let [x, y, z] = obj.position;
                if !rec.contains_xy(x, y) || (z - rec.height).abs() > 1e-9 {
                    return bad(format!("{} is not on top of {}", obj.obj_id, id));
                }
            }
        }
        Ok(())
    }
}
