use super::camera::{BboxNorm, BboxPx, CameraPose};
use super::RobotState;
use crate::geometry::{ray_plane_z, ray_sphere, Aabb, Vec3};
use crate::world::{RestingOn, SceneSpec};
use serde::{Deserialize, Serialize};
use std::sync::{Arc, OnceLock};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    Object,
    Receptacle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entity {
    pub entity_id: String,
    pub kind: EntityKind,
    pub label: String,
    pub bbox_px: BboxPx,
    pub bbox_norm: BboxNorm,
    pub depth_m: f64,
}

/// What a camera ray hit first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HitKind {
    Nothing,
    Floor,
    Receptacle(usize),
    Object(usize),
}

/// Render-relevant geometry of a scene at one instant. Held objects are
/// not part of it.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSnapshot {
    pub receptacles: Vec<Aabb>,
    /// `(center, radius)` per scene object; `None` while held.
    pub objects: Vec<Option<(Vec3, f64)>>,
    pub floor_height: f64,
}

impl SceneSnapshot {
    pub fn capture(scene: &SceneSpec) -> Self {
        Self {
            receptacles: scene.receptacles.iter().map(|r| r.aabb()).collect(),
            objects: scene
                .objects
                .iter()
                .map(|o| (o.resting_on != RestingOn::Held).then(|| (o.center(), o.bound_radius)))
                .collect(),
            floor_height: scene.floor_height,
        }
    }

    /// First surface along the ray; `dir` must be unit length.
    pub fn cast(&self, origin: Vec3, dir: Vec3) -> (f64, HitKind) {
        let mut best = (f64::INFINITY, HitKind::Nothing);
        if let Some(t) = ray_plane_z(origin, dir, self.floor_height) {
            best = (t, HitKind::Floor);
        }
        for (i, b) in self.receptacles.iter().enumerate() {
            if let Some(t) = b.ray_entry(origin, dir) {
                if t < best.0 {
                    best = (t, HitKind::Receptacle(i));
                }
            }
        }
        for (i, o) in self.objects.iter().enumerate() {
            if let Some((c, r)) = o {
                if let Some(t) = ray_sphere(origin, dir, *c, *r) {
                    if t < best.0 {
                        best = (t, HitKind::Object(i));
                    }
                }
            }
        }
        best
    }
}

/// Per-pixel ray-cast range image. Pixels are evaluated on demand; the
/// full buffer is only built when exported.
#[derive(Debug, Clone)]
pub struct DepthRaster {
    camera: CameraPose,
    snapshot: Arc<SceneSnapshot>,
    full: Arc<OnceLock<Vec<(f64, HitKind)>>>,
}

impl DepthRaster {
    pub fn new(camera: CameraPose, snapshot: Arc<SceneSnapshot>) -> Self {
        Self {
            camera,
            snapshot,
            full: Arc::new(OnceLock::new()),
        }
    }

    pub fn width(&self) -> u32 {
        self.camera.image_size[0]
    }

    pub fn height(&self) -> u32 {
        self.camera.image_size[1]
    }

    fn eval(&self, px: u32, py: u32) -> (f64, HitKind) {
        let dir = self.camera.pixel_ray(px as f64 + 0.5, py as f64 + 0.5);
        self.snapshot.cast(self.camera.origin(), dir)
    }

    /// Range and hit at integer pixel `(px, py)`; `+inf` where nothing is hit.
    pub fn sample(&self, px: u32, py: u32) -> (f64, HitKind) {
        let px = px.min(self.width() - 1);
        let py = py.min(self.height() - 1);
        match self.full.get() {
            Some(buf) => buf[(py * self.width() + px) as usize],
            None => self.eval(px, py),
        }
    }

    pub fn depth(&self, px: u32, py: u32) -> f64 {
        self.sample(px, py).0
    }

    /// Range at the pixel containing continuous image point `(u, v)`.
    pub fn depth_at(&self, u: f64, v: f64) -> Option<f64> {
        if !(u >= 0.0 && v >= 0.0 && u <= self.width() as f64 && v <= self.height() as f64) {
            return None;
        }
        Some(self.depth(u as u32, v as u32))
    }

    fn buffer(&self) -> &[(f64, HitKind)] {
        self.full.get_or_init(|| {
            let (w, h) = (self.width(), self.height());
            let mut out = Vec::with_capacity((w * h) as usize);
            for py in 0..h {
                for px in 0..w {
                    out.push(self.eval(px, py));
                }
            }
            out
        })
    }

    /// Row-major copy of all ranges.
    pub fn to_vec(&self) -> Vec<f64> {
        self.buffer().iter().map(|p| p.0).collect()
    }

    /// Binary netpbm (P6) image with one flat color per surface kind.
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width(), self.height()).into_bytes();
        for (_, hit) in self.buffer() {
            out.extend_from_slice(&palette(*hit));
        }
        out
    }
}

pub fn palette(hit: HitKind) -> [u8; 3] {
    match hit {
        HitKind::Nothing => [20, 20, 30],
        HitKind::Floor => [170, 170, 160],
        HitKind::Receptacle(_) => [140, 95, 50],
        HitKind::Object(_) => [220, 50, 40],
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Observation {
    pub camera: CameraPose,
    pub entities: Vec<Entity>,
    #[serde(skip)]
    pub depth: DepthRaster,
}

impl Observation {
    pub fn entity(&self, id: &str) -> Option<&Entity> {
        self.entities.iter().find(|e| e.entity_id == id)
    }

    pub fn is_visible(&self, id: &str) -> bool {
        self.entity(id).is_some()
    }
}

/// Observation from the robot's head camera.
pub fn observe(state: &RobotState, scene: &SceneSpec) -> Observation {
    observe_from(&state.camera(), scene)
}

/// Observation from an arbitrary camera pose.
pub fn observe_from(camera: &CameraPose, scene: &SceneSpec) -> Observation {
    let snapshot = Arc::new(SceneSnapshot::capture(scene));
    let origin = camera.origin();
    let first_hit = |target: Vec3| {
        let d = target - origin;
        snapshot.cast(origin, d.normalized()).1
    };
    let mut entities = Vec::new();
    for (i, rec) in scene.receptacles.iter().enumerate() {
        let center = rec.center3();
        if camera.project_point(center).is_none() {
            continue;
        }
        let Some(b) = camera.project_aabb(&snapshot.receptacles[i]) else {
            continue;
        };
        if first_hit(center) != HitKind::Receptacle(i) {
            continue;
        }
        entities.push(Entity {
            entity_id: rec.rec_id.clone(),
            kind: EntityKind::Receptacle,
            label: rec.label.clone(),
            bbox_px: b,
            bbox_norm: camera.bbox_norm(&b),
            depth_m: center.distance(origin),
        });
    }
    for (i, obj) in scene.objects.iter().enumerate() {
        let Some((center, radius)) = snapshot.objects[i] else {
            continue;
        };
        let Some((b, depth)) = camera.project_bbox(center, radius) else {
            continue;
        };
        if first_hit(center) != HitKind::Object(i) {
            continue;
        }
        entities.push(Entity {
            entity_id: obj.obj_id.clone(),
            kind: EntityKind::Object,
            label: obj.label.clone(),
            bbox_px: b,
            bbox_norm: camera.bbox_norm(&b),
            depth_m: depth,
        });
    }
    Observation {
        camera: *camera,
        entities,
        depth: DepthRaster::new(*camera, snapshot),
    }
}
