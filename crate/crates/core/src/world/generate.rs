use super::{LabelBank, ObjectInstance, Receptacle, RestingOn, SceneSpec, SceneSplit, WorldError, LABEL_BANK};
use rand::seq::SliceRandom;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Which part of the object label bank objects are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectPool {
    #[default]
    All,
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneParams {
    pub grid_width: usize,
    pub grid_height: usize,
    pub cell_size: f64,
    pub receptacles: usize,
    pub objects: usize,
    pub max_retries: usize,
    /// Minimum Chebyshev gap between two receptacle footprints.
    pub min_gap: f64,
    /// Free margin kept between a footprint and the wall cells.
    pub wall_clearance: f64,
    pub object_pool: ObjectPool,
    pub split: SceneSplit,
}

impl Default for SceneParams {
    fn default() -> Self {
        Self {
            grid_width: 60,
            grid_height: 60,
            cell_size: 0.1,
            receptacles: 4,
            objects: 2,
            max_retries: 1000,
            min_gap: 0.8,
            wall_clearance: 0.3,
            object_pool: ObjectPool::All,
            split: SceneSplit::Unassigned,
        }
    }
}

impl SceneParams {
    pub fn validate(&self) -> Result<(), WorldError> {
        let bad = |m: &str| Err(WorldError::InvalidParams(m.to_string()));
        if self.grid_width < 16 || self.grid_height < 16 {
            return bad("grid must be at least 16x16 cells");
        }
        if !(self.cell_size.is_finite() && self.cell_size > 0.0) {
            return bad("cell_size must be positive");
        }
        if self.receptacles < 2 {
            return bad("need at least 2 receptacles");
        }
        if self.objects < 1 {
            return bad("need at least 1 object");
        }
        if self.objects > self.receptacles {
            return bad("at most one object per receptacle");
        }
        if self.receptacles > LABEL_BANK.receptacles.len() {
            return bad("more receptacles than receptacle labels");
        }
        if self.max_retries == 0 {
            return bad("max_retries must be positive");
        }
        Ok(())
    }
}

const FOOTPRINT_RANGE: (f64, f64) = (0.4, 1.0);
const HEIGHT_RANGE: (f64, f64) = (0.6, 1.0);
const RADIUS_RANGE: (f64, f64) = (0.04, 0.08);
/// Object spawn needs a navigable cell in this horizontal band around it.
const PICK_BAND: (f64, f64) = (0.45, 0.55);
const STANDOFF_LIMIT: f64 = 0.6;
const PLACEMENT_TRIES: usize = 50;

fn quantize(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

fn object_labels(bank: &LabelBank, pool: ObjectPool) -> Vec<String> {
    match pool {
        ObjectPool::All => bank.all_objects(),
        ObjectPool::Train => bank.objects.train.clone(),
        ObjectPool::Test => bank.objects.test.clone(),
    }
}

/// Builds a random scene. Deterministic in `(seed, params)`.
pub fn generate_scene(seed: u64, params: &SceneParams) -> Result<SceneSpec, WorldError> {
    params.validate()?;
    let pool = object_labels(&LABEL_BANK, params.object_pool);
    if params.objects > pool.len() {
        return Err(WorldError::InvalidParams("more objects than object labels".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last_reason = String::from("no attempt made");
    for _ in 0..params.max_retries {
        match try_layout(&mut rng, seed, params, &pool) {
            Ok(scene) => return Ok(scene),
            Err(reason) => last_reason = reason,
        }
    }
    Err(WorldError::GenerationInfeasible {
        attempts: params.max_retries,
        reason: last_reason,
    })
}

fn try_layout(
    rng: &mut ChaCha8Rng,
    seed: u64,
    params: &SceneParams,
    pool: &[String],
) -> Result<SceneSpec, String> {
    let cs = params.cell_size;
    let mut scene = SceneSpec::empty(format!("scene-{seed:05}"), params.grid_width, params.grid_height, cs);
    scene.split = params.split;
    let room = [params.grid_width as f64 * cs, params.grid_height as f64 * cs];
    let margin = cs + params.wall_clearance;

    let mut rec_labels = LABEL_BANK.receptacles.clone();
    rec_labels.shuffle(rng);

    for (k, label) in rec_labels.iter().take(params.receptacles).enumerate() {
        let mut placed = None;
        for _ in 0..PLACEMENT_TRIES {
            let dx = quantize(rng.random_range(FOOTPRINT_RANGE.0..=FOOTPRINT_RANGE.1));
            let dy = quantize(rng.random_range(FOOTPRINT_RANGE.0..=FOOTPRINT_RANGE.1));
            let h = quantize(rng.random_range(HEIGHT_RANGE.0..=HEIGHT_RANGE.1));
            let (lo_x, hi_x) = (margin + dx / 2.0, room[0] - margin - dx / 2.0);
            let (lo_y, hi_y) = (margin + dy / 2.0, room[1] - margin - dy / 2.0);
            if lo_x >= hi_x || lo_y >= hi_y {
                continue;
            }
            let cx = quantize(rng.random_range(lo_x..hi_x));
            let cy = quantize(rng.random_range(lo_y..hi_y));
            let gap_ok = scene.receptacles.iter().all(|r| {
                let gx = (cx - r.center[0]).abs() - (dx + r.footprint[0]) / 2.0;
                let gy = (cy - r.center[1]).abs() - (dy + r.footprint[1]) / 2.0;
                gx.max(gy) >= params.min_gap
            });
            if gap_ok {
                placed = Some(Receptacle {
                    rec_id: format!("rec_{k}"),
                    label: label.clone(),
                    center: [cx, cy],
                    footprint: [dx, dy],
                    height: h,
                });
                break;
            }
        }
        let rec = placed.ok_or_else(|| format!("could not place receptacle {k} without overlap"))?;
        scene.add_receptacle(rec);
    }

    let main = scene.navigable_component();
    let main_centers: Vec<[f64; 2]> = main
        .iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(idx, _)| scene.cell_center(scene.occupancy.cell_at(idx)))
        .collect();
    for rec in &scene.receptacles {
        let reachable = main_centers
            .iter()
            .any(|c| rec.footprint_distance(c[0], c[1]) <= STANDOFF_LIMIT);
        if !reachable {
            return Err(format!("{} has no navigable standoff", rec.rec_id));
        }
    }

    let mut hosts: Vec<usize> = (0..scene.receptacles.len()).collect();
    hosts.shuffle(rng);
    let mut obj_labels = pool.to_vec();
    obj_labels.shuffle(rng);
    for k in 0..params.objects {
        let rec = scene.receptacles[hosts[k]].clone();
        let mut spawned = None;
        for _ in 0..PLACEMENT_TRIES {
            let r = quantize(rng.random_range(RADIUS_RANGE.0..=RADIUS_RANGE.1));
            let inset = r + 0.05;
            let hx = rec.footprint[0] / 2.0 - inset;
            let hy = rec.footprint[1] / 2.0 - inset;
            if hx <= 0.0 || hy <= 0.0 {
                continue;
            }
            let x = quantize(rec.center[0] + rng.random_range(-hx..=hx));
            let y = quantize(rec.center[1] + rng.random_range(-hy..=hy));
            let graspable = main_centers.iter().any(|c| {
                let d = (c[0] - x).hypot(c[1] - y);
                (PICK_BAND.0..=PICK_BAND.1).contains(&d)
            });
            if graspable {
                spawned = Some((x, y, r));
                break;
            }
        }
        let (x, y, r) = spawned.ok_or_else(|| format!("no graspable spot on {}", rec.rec_id))?;
        scene.objects.push(ObjectInstance {
            obj_id: format!("obj_{k}"),
            label: obj_labels[k].clone(),
            position: [x, y, rec.height],
            bound_radius: r,
            resting_on: RestingOn::Receptacle(rec.rec_id.clone()),
        });
    }
    scene.validate().map_err(|e| e.to_string())?;
    Ok(scene)
}
