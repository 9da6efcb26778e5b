#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use owmm_bench::datagen::prepare_episode;
use owmm_bench::sim::PoseGraph;
use owmm_bench::sim::CameraPose;
use owmm_bench::world::{generate_scene, SceneParams, SceneSpec, TaskInstance};

/// Scene, task and scene frames for a seed, as the CLI builds them.
pub fn setup(seed: u64) -> (SceneSpec, TaskInstance, PoseGraph) {
    let scene = generate_scene(seed, &SceneParams::default()).expect("scene");
    let (task, frames) = prepare_episode(&scene, seed, 4).expect("episode setup");
    (scene, task, frames)
}

struct Item(f64, usize);
impl PartialEq for Item {
    fn eq(&self, o: &Self) -> bool {
        self.0 == o.0
    }
}
impl Eq for Item {}
impl PartialOrd for Item {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Item {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0)
    }
}

/// Uniform-cost search on a boolean mask; diagonals need both side cells free.
pub fn dijkstra(blocked: &[bool], w: usize, h: usize, s: (usize, usize), g: (usize, usize)) -> Option<f64> {
    let free = |i: i64, j: i64| i >= 0 && j >= 0 && (i as usize) < w && (j as usize) < h && !blocked[j as usize * w + i as usize];
    if !free(s.0 as i64, s.1 as i64) || !free(g.0 as i64, g.1 as i64) {
        return None;
    }
    let mut dist = vec![f64::INFINITY; w * h];
    let mut heap = BinaryHeap::new();
    dist[s.1 * w + s.0] = 0.0;
    heap.push(Item(0.0, s.1 * w + s.0));
    while let Some(Item(d, idx)) = heap.pop() {
        if d > dist[idx] {
            continue;
        }
        let (i, j) = ((idx % w) as i64, (idx / w) as i64);
        if (i as usize, j as usize) == g {
            return Some(d);
        }
        for di in -1..=1i64 {
            for dj in -1..=1i64 {
                if (di, dj) == (0, 0) || !free(i + di, j + dj) {
                    continue;
                }
                if di != 0 && dj != 0 && !(free(i + di, j) && free(i, j + dj)) {
                    continue;
                }
                let c = if di != 0 && dj != 0 { 2f64.sqrt() } else { 1.0 };
                let n = ((j + dj) as usize) * w + (i + di) as usize;
                if d + c < dist[n] {
                    dist[n] = d + c;
                    heap.push(Item(d + c, n));
                }
            }
        }
    }
    None
}

/// Pixel of `p` via explicit yaw and pitch rotations.
pub fn reference_pixel(cam: &CameraPose, p: [f64; 3]) -> Option<(f64, f64)> {
    let d = [p[0] - cam.position[0], p[1] - cam.position[1], p[2] - cam.position[2]];
    let (sy, cy) = cam.yaw.sin_cos();
    let x1 = cy * d[0] + sy * d[1];
    let y1 = -sy * d[0] + cy * d[1];
    let z1 = d[2];
    let (sp, cp) = cam.pitch.sin_cos();
    let x2 = cp * x1 + sp * z1;
    let z2 = -sp * x1 + cp * z1;
    if x2 <= 0.0 {
        return None;
    }
    let (w, h) = (cam.image_size[0] as f64, cam.image_size[1] as f64);
    let f = (w / 2.0) / (cam.hfov / 2.0).tan();
    Some((w / 2.0 - f * y1 / x2, h / 2.0 - f * z2 / x2))
}

/// (image side, ground-truth pixel, predicted normalized center, expected score)
pub const GROUNDING_FIXTURE: [(u32, [f64; 2], [u32; 2], f64); 20] = [
    (1000, [0.0, 0.0], [300, 400], 0.6464466094),
    (1000, [500.0, 500.0], [500, 500], 1.0),
    (1000, [0.0, 0.0], [1000, 1000], 0.0),
    (1000, [100.0, 100.0], [400, 500], 0.6464466094),
    (1000, [250.0, 250.0], [750, 750], 0.5),
    (1000, [0.0, 500.0], [1000, 500], 0.2928932188),
    (1000, [500.0, 0.0], [500, 1000], 0.2928932188),
    (1000, [10.0, 20.0], [13, 24], 0.9964644661),
    (1000, [999.0, 1.0], [1, 999], 0.0020000000),
    (1000, [600.0, 200.0], [200, 500], 0.6464466094),
    (1000, [123.0, 456.0], [789, 12], 0.4340088340),
    (1000, [50.0, 50.0], [50, 60], 0.9929289322),
    (1000, [700.0, 300.0], [700, 300], 1.0),
    (1000, [0.0, 0.0], [600, 800], 0.2928932188),
    (1000, [400.0, 400.0], [420, 415], 0.9823223305),
    (512, [256.0, 256.0], [500, 500], 1.0),
    (512, [0.0, 0.0], [500, 500], 0.5),
    (512, [128.0, 128.0], [750, 750], 0.5),
    (512, [100.0, 50.0], [250, 175], 0.9330194867),
    (512, [0.0, 0.0], [1000, 1000], 0.0),
];

